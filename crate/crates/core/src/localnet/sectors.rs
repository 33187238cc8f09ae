use crate::algebra::{center, minimal_projections_of_abelian, subspace_intersect, MatrixAlgebra};
use crate::cpmap::{commutant_lifting, relative_commutant, stinespring_for, CPMap};
use crate::decomp::{central_decomposition_with_rep, is_quasi_equivalent};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

use super::{LatticeNet, RegionPair};

#[derive(Clone, Debug)]
pub struct SectorReport {
    /// `dim 𝒵_{T,full}` with `𝒵_{T,full} = π_T(𝒜)'' ∩ π_T(𝒜)^c`.
    pub zfull_dim: usize,
    /// Dimension of the lifted center `θ_T(𝔷_π(𝒜))`.
    pub theta_dim: usize,
    /// `𝒵_{T,full} = θ_T(𝔷_π(𝒜))`.
    pub factor_state: bool,
    pub theta_in_zfull: bool,
    /// `θ_T(𝔷_π(𝒜)) ⊊ 𝒵_{T,full}`.
    pub zfull_strictly_larger: bool,
    /// Minimal projections of `𝒵_{T,full}`, one per sector component.
    pub sector_projections: Vec<ComplexMatrix>,
    pub components: Vec<CPMap>,
    pub intertwiner_dims: Vec<Vec<usize>>,
    pub pairwise_disjoint: bool,
    /// `max ‖Σᵢ Tᵢ(B) − T(B)‖` over the domain basis.
    pub barycenter_residual: f64,
    /// Projections generating one complement `𝒵_T` of `θ_T(𝔷_π(𝒜))` in
    /// `𝒵_{T,full}`, when `θ_T(𝔷_π(𝒜)) ⊆ 𝒵_{T,full}`.
    pub zt_projections: Option<Vec<ComplexMatrix>>,
    /// More than one complement exists.
    pub zt_non_unique: bool,
    /// Quasi-equivalence among `T` and the supplied states, `T` first.
    pub quasi_equivalence: Vec<Vec<bool>>,
}

/// Sector analysis of a local state `T` against the defining representation
/// of the net: the emergent center `𝒵_{T,full}`, the lifted reference center
/// `θ_T(𝔷_π(𝒜))`, the induced decomposition into sector components, and
/// quasi-equivalence against the other supplied states.
pub fn local_sector_analysis(
    net: &LatticeNet,
    pair: &RegionPair,
    t: &CPMap,
    others: &[CPMap],
    tol: &ToleranceConfig,
) -> Result<SectorReport> {
    let n = net.global_dim();
    if t.n() != n || t.m() != n {
        return Err(Error::DimensionMismatch(format!("state must act on C^{n}")));
    }
    if pair.outer().sites().iter().any(|&s| s >= net.sites()) {
        return Err(Error::InvalidRegion("outer region outside the net".into()));
    }
    let rep = stinespring_for(t, tol)?;
    let d = rep.dilation_dim();
    let span_tol = tol.solved_tol() * (1.0 + d as f64);
    let image = rep.image_algebra(tol)?;
    let rc = relative_commutant(t, &rep, tol)?;
    let zfull = subspace_intersect(&image, &rc, tol)?;

    let z_pi = center(t.domain(), tol)?;
    let lifts = z_pi
        .basis()
        .iter()
        .map(|z| commutant_lifting(&rep, t, z, tol))
        .collect::<Result<Vec<_>>>()?;
    let theta = MatrixAlgebra::from_spanning_unital(d, &lifts, tol)?;
    let theta_in_zfull = theta.is_subspace_of(&zfull, span_tol);
    let factor_state = theta_in_zfull && zfull.is_subspace_of(&theta, span_tol);

    let dec = central_decomposition_with_rep(t, &rep, tol)?;
    let mut sum = CPMap::zero(t.domain().clone(), t.target().clone());
    for v in dec.measure.values() {
        sum = sum.add(v)?;
    }
    let barycenter_residual = sum.distance(t);

    let (zt_projections, zt_non_unique) = if theta_in_zfull {
        let theta_atoms = minimal_projections_of_abelian(&theta, tol)?;
        let (p, non_unique) = complement_projections(&dec.projections, &theta_atoms, span_tol);
        (Some(p), non_unique)
    } else {
        (None, false)
    };

    let mut states = vec![t.clone()];
    states.extend(others.iter().cloned());
    let k = states.len();
    let mut quasi = vec![vec![true; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let q = is_quasi_equivalent(&states[i], &states[j], tol)?.quasi_equivalent;
            quasi[i][j] = q;
            quasi[j][i] = q;
        }
    }

    Ok(SectorReport {
        zfull_dim: zfull.dim(),
        theta_dim: theta.dim(),
        factor_state,
        theta_in_zfull,
        zfull_strictly_larger: theta_in_zfull && !factor_state,
        sector_projections: dec.projections,
        components: dec.measure.values().to_vec(),
        intertwiner_dims: dec.intertwiner_dims,
        pairwise_disjoint: dec.pairwise_disjoint,
        barycenter_residual,
        zt_projections,
        zt_non_unique,
        quasi_equivalence: quasi,
    })
}

/// Given the atoms of `𝒵_{T,full}` grouped by the atoms of `θ`, label the
/// atoms inside each group `0, 1, …` and join equal labels across groups.
/// The result meets `θ` in the scalars and generates `𝒵_{T,full}` with it.
/// It is unique exactly when at most one group exists or every group is a
/// single atom.
fn complement_projections(
    atoms: &[ComplexMatrix],
    theta_atoms: &[ComplexMatrix],
    tol: f64,
) -> (Vec<ComplexMatrix>, bool) {
    let d = atoms.first().map_or(0, |p| p.nrows());
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); theta_atoms.len()];
    for (i, p) in atoms.iter().enumerate() {
        if let Some(g) = theta_atoms.iter().position(|q| linalg::dist(&(q * p), p) <= tol) {
            groups[g].push(i);
        }
    }
    let width = groups.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![linalg::zeros(d, d); width];
    for grp in &groups {
        for (label, &i) in grp.iter().enumerate() {
            out[label] += &atoms[i];
        }
    }
    let non_unique = groups.len() > 1 && groups.iter().any(|g| g.len() > 1);
    (out, non_unique)
}
