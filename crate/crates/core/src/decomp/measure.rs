use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{minimal_projections_of_abelian, subspace_intersect, MatrixAlgebra};
use crate::cpmap::{
    intertwiner_space, is_completely_positive, relative_commutant, stinespring_for, CPMap, StinespringRep,
};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

use super::order::{check_unit_interval, cp_from_operator, order_leq, RnSolver};
use super::relations::is_orthogonal;

/// Largest atom count for exhaustive binary-split checks.
pub const MAX_SPLIT_ATOMS: usize = 12;

/// A CP-valued measure on the atoms `{0, …, m−1}` with the power set as
/// σ-algebra. `weights[i] = ρ(μᵢ(1))` for the normalized trace `ρ` on the
/// target space.
#[derive(Clone, Debug)]
pub struct CPMeasure {
    values: Vec<CPMap>,
    barycenter: CPMap,
    weights: Vec<f64>,
}

impl CPMeasure {
    pub fn new(values: Vec<CPMap>, barycenter: CPMap, tol: &ToleranceConfig) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("measure without atoms".into()));
        }
        let mut sum = CPMap::zero(barycenter.domain().clone(), barycenter.target().clone());
        for (k, v) in values.iter().enumerate() {
            v.check_compatible(&barycenter)?;
            let cert = is_completely_positive(v, tol)?;
            if !cert.completely_positive {
                return Err(Error::Invalid(format!(
                    "atom {k} is not completely positive (min eigenvalue {:.3e})",
                    cert.min_eigenvalue
                )));
            }
            sum = sum.add(v)?;
        }
        let miss = sum.distance(&barycenter);
        let scale = barycenter.images().iter().map(linalg::norm).fold(0.0, f64::max);
        if miss > tol.solved_tol() * (1.0 + scale) {
            return Err(Error::Inconsistent { what: "atoms do not sum to the barycenter".into(), residual: miss });
        }
        let weights = values.iter().map(reference_weight).collect();
        Ok(Self { values, barycenter, weights })
    }

    /// Barycenter taken as the sum of the atoms.
    pub fn from_values(values: Vec<CPMap>, tol: &ToleranceConfig) -> Result<Self> {
        let first = values.first().ok_or_else(|| Error::Empty("measure without atoms".into()))?;
        let mut sum = CPMap::zero(first.domain().clone(), first.target().clone());
        for v in &values {
            sum = sum.add(v)?;
        }
        Self::new(values, sum, tol)
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[CPMap] {
        &self.values
    }

    pub fn barycenter(&self) -> &CPMap {
        &self.barycenter
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `μ(Δ)` for a set of atoms.
    pub fn value_of(&self, atoms: &[usize]) -> Result<CPMap> {
        let pick = |a: usize| self.values.get(a).ok_or_else(|| Error::Invalid(format!("no atom {a}")));
        let Some((&first, rest)) = atoms.split_first() else {
            return Ok(CPMap::zero(self.barycenter.domain().clone(), self.barycenter.target().clone()));
        };
        // summing from the first atom keeps Kraus families when all atoms have one
        let mut sum = pick(first)?.clone();
        for &a in rest {
            sum = sum.add(pick(a)?)?;
        }
        Ok(sum)
    }

    /// The image measure under the map sending atom `i` to the block of the
    /// partition that contains it.
    pub fn coarsen(&self, blocks: &[Vec<usize>], tol: &ToleranceConfig) -> Result<CPMeasure> {
        let mut seen = vec![false; self.atoms()];
        for &a in blocks.iter().flatten() {
            if a >= self.atoms() || seen[a] {
                return Err(Error::Invalid("blocks must partition the atoms".into()));
            }
            seen[a] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Invalid("blocks must partition the atoms".into()));
        }
        let values = blocks.iter().map(|b| self.value_of(b)).collect::<Result<Vec<_>>>()?;
        Self::new(values, self.barycenter.clone(), tol)
    }
}

fn reference_weight(t: &CPMap) -> f64 {
    let one = t.eval(&t.domain().identity());
    linalg::trace(&one).re / t.m() as f64
}

/// `κ_μ(χ_{i})` for every atom: operators on the barycenter's dilation space.
#[derive(Clone, Debug)]
pub struct KappaFamily {
    operators: Vec<ComplexMatrix>,
}

impl KappaFamily {
    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `κ_μ(f) = Σᵢ f(i) κ_μ(χ_{i})`.
    pub fn apply(&self, f: &[Complex64]) -> ComplexMatrix {
        assert_eq!(f.len(), self.operators.len());
        let d = self.operators.first().map_or(0, |m| m.nrows());
        let mut out = linalg::zeros(d, d);
        for (r, &z) in self.operators.iter().zip(f) {
            out += r * z;
        }
        out
    }

    /// `maxᵢⱼ ‖κ(χᵢ)κ(χⱼ) − δᵢⱼ κ(χᵢ)‖`; zero iff κ is multiplicative on indicators.
    pub fn homomorphism_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.operators.iter().enumerate() {
            for (j, b) in self.operators.iter().enumerate() {
                let prod = a * b;
                let r = if i == j { linalg::dist(&prod, a) } else { linalg::norm(&prod) };
                worst = worst.max(r);
            }
        }
        worst
    }

    /// `‖Σᵢ κ(χᵢ) − 1‖`.
    pub fn sum_defect(&self) -> f64 {
        let ones = vec![linalg::ONE; self.operators.len()];
        let s = self.apply(&ones);
        linalg::dist(&s, &linalg::identity(s.nrows()))
    }
}

/// `κ_μ` on indicators: the derivatives `dμᵢ/dT` on the barycenter's dilation.
pub fn kappa(mu: &CPMeasure, rep: &StinespringRep, tol: &ToleranceConfig) -> Result<KappaFamily> {
    let t = mu.barycenter();
    let solver = RnSolver::new(rep, tol);
    let mut operators = Vec::with_capacity(mu.atoms());
    for v in mu.values() {
        let cert = order_leq(v, t, tol)?;
        if !cert.leq {
            return Err(Error::Precondition(format!(
                "atom not dominated by the barycenter (min eigenvalue {:.3e})",
                cert.min_eigenvalue
            )));
        }
        let r = solver.solve(v, tol)?;
        check_unit_interval(&r, tol)?;
        operators.push(r);
    }
    let fam = KappaFamily { operators };
    let miss = fam.sum_defect();
    if miss > tol.solved_tol() * (1.0 + rep.dilation_dim() as f64) {
        return Err(Error::Inconsistent { what: "κ operators do not sum to 1".into(), residual: miss });
    }
    Ok(fam)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalMeasureReport {
    /// κ is multiplicative on indicators.
    pub orthogonal: bool,
    pub homomorphism_defect: f64,
    /// Every checked split `μ(Δ) ⊥ μ(Δᶜ)`.
    pub splits_orthogonal: bool,
    pub splits_checked: usize,
    /// Whether all `2^(m−1) − 1` splits were checked (`m ≤ 12`) or only
    /// single atoms against their complements.
    pub exhaustive: bool,
}

/// The nontrivial binary splits up to complement: all subsets containing
/// atom 0 except the whole set. Beyond [`MAX_SPLIT_ATOMS`], single atoms.
pub fn binary_splits(m: usize) -> (Vec<Vec<usize>>, bool) {
    if m <= MAX_SPLIT_ATOMS {
        let splits = (0u32..(1 << m))
            .filter(|mask| mask & 1 == 1 && *mask != (1 << m) - 1)
            .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        (splits, true)
    } else {
        ((0..m).map(|i| vec![i]).collect(), false)
    }
}

fn complement(m: usize, set: &[usize]) -> Vec<usize> {
    (0..m).filter(|i| !set.contains(i)).collect()
}

pub fn is_orthogonal_measure(mu: &CPMeasure, tol: &ToleranceConfig) -> Result<OrthogonalMeasureReport> {
    let rep = stinespring_for(mu.barycenter(), tol)?;
    let fam = kappa(mu, &rep, tol)?;
    let defect = fam.homomorphism_defect();
    let (splits, exhaustive) = binary_splits(mu.atoms());
    let verdicts: Vec<bool> = splits
        .par_iter()
        .map(|set| -> Result<bool> {
            let a = mu.value_of(set)?;
            let b = mu.value_of(&complement(mu.atoms(), set))?;
            Ok(is_orthogonal(&a, &b, tol)?.orthogonal)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrthogonalMeasureReport {
        orthogonal: defect <= tol.solved_tol(),
        homomorphism_defect: defect,
        splits_orthogonal: verdicts.iter().all(|&v| v),
        splits_checked: verdicts.len(),
        exhaustive,
    })
}

/// The measure `Δ ↦ V* π(·) P_Δ V` of an abelian subalgebra of the relative
/// commutant, one atom per minimal projection.
pub fn measure_from_abelian(
    b: &MatrixAlgebra,
    t: &CPMap,
    rep: &StinespringRep,
    tol: &ToleranceConfig,
) -> Result<CPMeasure> {
    let rc = relative_commutant(t, rep, tol)?;
    measure_from_abelian_in(b, &rc, t, rep, tol)
}

pub(crate) fn measure_from_abelian_in(
    b: &MatrixAlgebra,
    rc: &MatrixAlgebra,
    t: &CPMap,
    rep: &StinespringRep,
    tol: &ToleranceConfig,
) -> Result<CPMeasure> {
    let defect = b.commutativity_defect();
    if defect > tol.solved_tol() {
        return Err(Error::NotAbelian { residual: defect });
    }
    let out = b.inclusion_defect(rc);
    if out > tol.solved_tol() * (1.0 + rep.dilation_dim() as f64) {
        return Err(Error::NotInSpan { what: "relative commutant".into(), residual: out });
    }
    let projections = minimal_projections_of_abelian(b, tol)?;
    let values = projections
        .iter()
        .map(|p| cp_from_operator(t, rep, p, tol))
        .collect::<Result<Vec<_>>>()?;
    CPMeasure::new(values, t.clone(), tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubcentralReport {
    /// Orthogonal with every κ operator in `π(𝒳)''`.
    pub subcentral: bool,
    pub orthogonal: bool,
    pub homomorphism_defect: f64,
    /// Largest distance of a κ operator from the span of `π(𝒳)`.
    pub center_distance: f64,
    /// Every checked split has `μ(Δ)` and `μ(Δᶜ)` with no intertwiner.
    pub splits_disjoint: bool,
    pub splits_checked: usize,
    pub exhaustive: bool,
}

pub fn is_subcentral(mu: &CPMeasure, tol: &ToleranceConfig) -> Result<SubcentralReport> {
    let rep = stinespring_for(mu.barycenter(), tol)?;
    let fam = kappa(mu, &rep, tol)?;
    let defect = fam.homomorphism_defect();
    let orthogonal = defect <= tol.solved_tol();
    let alg = rep.image_algebra(tol)?;
    let mut center_distance: f64 = 0.0;
    let mut inside = true;
    for r in fam.operators() {
        let dist = alg.residual(r);
        center_distance = center_distance.max(dist);
        inside &= dist <= tol.solved_tol() * (1.0 + linalg::norm(r));
    }
    let (splits_disjoint, splits_checked, exhaustive) = binary_split_disjointness(mu, tol)?;
    Ok(SubcentralReport {
        subcentral: orthogonal && inside,
        orthogonal,
        homomorphism_defect: defect,
        center_distance,
        splits_disjoint,
        splits_checked,
        exhaustive,
    })
}

/// Intertwiner oracle: for every split, the dilations of `μ(Δ)` and `μ(Δᶜ)`
/// share no equivalent subrepresentation.
pub fn binary_split_disjointness(mu: &CPMeasure, tol: &ToleranceConfig) -> Result<(bool, usize, bool)> {
    let (splits, exhaustive) = binary_splits(mu.atoms());
    let verdicts: Vec<bool> = splits
        .par_iter()
        .map(|set| -> Result<bool> {
            let a = stinespring_for(&mu.value_of(set)?, tol)?;
            let b = stinespring_for(&mu.value_of(&complement(mu.atoms(), set))?, tol)?;
            Ok(intertwiner_space(a.pi_images(), b.pi_images(), tol).is_empty())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((verdicts.iter().all(|&v| v), verdicts.len(), exhaustive))
}

/// Central decomposition of a CP map and its certificates.
#[derive(Clone, Debug)]
pub struct CentralDecomposition {
    pub measure: CPMeasure,
    /// Minimal projections of `𝒵 = π(𝒳)'' ∩ π(𝒳)^c`.
    pub projections: Vec<ComplexMatrix>,
    /// `intertwiner_dims[i][j]` between components `i ≠ j` (zero on the diagonal).
    pub intertwiner_dims: Vec<Vec<usize>>,
    pub pairwise_disjoint: bool,
    /// Dimension of `𝒵`.
    pub center_dim: usize,
}

pub fn central_decomposition(t: &CPMap, tol: &ToleranceConfig) -> Result<CentralDecomposition> {
    let rep = stinespring_for(t, tol)?;
    central_decomposition_with_rep(t, &rep, tol)
}

pub fn central_decomposition_with_rep(
    t: &CPMap,
    rep: &StinespringRep,
    tol: &ToleranceConfig,
) -> Result<CentralDecomposition> {
    let alg = rep.image_algebra(tol)?;
    let rc = relative_commutant(t, rep, tol)?;
    let z = subspace_intersect(&alg, &rc, tol)?;
    let projections = minimal_projections_of_abelian(&z, tol)?;
    let values = projections
        .iter()
        .map(|p| cp_from_operator(t, rep, p, tol))
        .collect::<Result<Vec<_>>>()?;
    let reps = values.iter().map(|v| stinespring_for(v, tol)).collect::<Result<Vec<_>>>()?;
    let k = values.len();
    let mut dims = vec![vec![0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let n = intertwiner_space(reps[i].pi_images(), reps[j].pi_images(), tol).len();
            dims[i][j] = n;
            dims[j][i] = n;
        }
    }
    let pairwise_disjoint = dims.iter().flatten().all(|&n| n == 0);
    let measure = CPMeasure::new(values, t.clone(), tol)?;
    Ok(CentralDecomposition { measure, projections, intertwiner_dims: dims, pairwise_disjoint, center_dim: z.dim() })
}

/// Every set partition of `{0, …, m−1}` in restricted-growth order.
pub fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; m];
    fn rec(k: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let m = labels.len();
        if k == m {
            let blocks = if m == 0 { 0 } else { max + 1 };
            let mut parts = vec![Vec::new(); blocks];
            for (i, &l) in labels.iter().enumerate() {
                parts[l].push(i);
            }
            out.push(parts);
            return;
        }
        let top = if k == 0 { 0 } else { max + 1 };
        for l in 0..=top {
            labels[k] = l;
            rec(k + 1, max.max(l), labels, out);
        }
    }
    rec(0, 0, &mut labels, &mut out);
    out
}
