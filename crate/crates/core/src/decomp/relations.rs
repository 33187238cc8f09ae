use serde::Serialize;

use crate::algebra::commutant_of_set;
use crate::cpmap::{intertwiner_space, stinespring_for, CPMap, StinespringRep};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cluster_sorted, eigh, select_columns, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

use super::order::rn_derivative;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    /// `R` is a projection, `‖R² − R‖` within the solved tolerance.
    pub orthogonal: bool,
    pub projection_defect: f64,
    /// Dilation dimensions of `T₁`, `T₂` and `T₁ + T₂`.
    pub dims: [usize; 3],
    /// `dim 𝒦_{T₁} + dim 𝒦_{T₂} = dim 𝒦_T`.
    pub dims_additive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisjointnessReport {
    /// `R` is a projection lying in `π(𝒳)''`.
    pub disjoint: bool,
    pub orthogonal: bool,
    pub projection_defect: f64,
    /// Distance of `R` from the span of `π(𝒳)`.
    pub bicommutant_distance: f64,
    /// Dimension of `{S : S π₁(·) = π₂(·) S}`; zero iff the dilations share
    /// no equivalent subrepresentation.
    pub intertwiner_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiEquivalenceReport {
    pub quasi_equivalent: bool,
    /// Irreducible classes (indices into a shared class list) present in
    /// each dilation, with multiplicities.
    pub classes_first: Vec<(usize, usize)>,
    pub classes_second: Vec<(usize, usize)>,
    /// Dimension of each shared class.
    pub class_dims: Vec<usize>,
}

fn sum_and_rep(t1: &CPMap, t2: &CPMap, tol: &ToleranceConfig) -> Result<(CPMap, StinespringRep)> {
    let t = t1.add(t2)?;
    let rep = stinespring_for(&t, tol)?;
    Ok((t, rep))
}

fn projection_defect(r: &ComplexMatrix) -> f64 {
    linalg::dist(&(r * r), r)
}

/// Orthogonality of `T₁, T₂` through the derivative of `T₁` with respect to
/// `T₁ + T₂`, cross-checked against additivity of dilation dimensions.
pub fn is_orthogonal(t1: &CPMap, t2: &CPMap, tol: &ToleranceConfig) -> Result<OrthogonalityReport> {
    let (t, rep) = sum_and_rep(t1, t2, tol)?;
    let r = rn_derivative(t1, &t, &rep, tol)?;
    let defect = projection_defect(&r);
    let d1 = stinespring_for(t1, tol)?.dilation_dim();
    let d2 = stinespring_for(t2, tol)?.dilation_dim();
    let d = rep.dilation_dim();
    Ok(OrthogonalityReport {
        orthogonal: defect <= tol.solved_tol(),
        projection_defect: defect,
        dims: [d1, d2, d],
        dims_additive: d1 + d2 == d,
    })
}

/// Disjointness: the derivative is a projection in `π(𝒳)'' ∩ π(𝒳)^c`.
/// The intertwiner dimension is reported as an independent check.
pub fn is_disjoint(t1: &CPMap, t2: &CPMap, tol: &ToleranceConfig) -> Result<DisjointnessReport> {
    let (t, rep) = sum_and_rep(t1, t2, tol)?;
    let r = rn_derivative(t1, &t, &rep, tol)?;
    let defect = projection_defect(&r);
    let orthogonal = defect <= tol.solved_tol();
    let alg = rep.image_algebra(tol)?;
    let dist = alg.residual(&r);
    let disjoint = orthogonal && dist <= tol.solved_tol() * (1.0 + linalg::norm(&r));
    let rep1 = stinespring_for(t1, tol)?;
    let rep2 = stinespring_for(t2, tol)?;
    let intertwiner_dim = intertwiner_space(rep1.pi_images(), rep2.pi_images(), tol).len();
    Ok(DisjointnessReport {
        disjoint,
        orthogonal,
        projection_defect: defect,
        bicommutant_distance: dist,
        intertwiner_dim,
    })
}

/// An irreducible subrepresentation, as images on the domain basis.
#[derive(Clone, Debug)]
pub struct Irreducible {
    pub images: Vec<ComplexMatrix>,
}

impl Irreducible {
    pub fn dim(&self) -> usize {
        self.images.first().map_or(0, |m| m.nrows())
    }
}

/// Splits a representation into irreducibles by repeatedly diagonalizing a
/// non-scalar self-adjoint element of the commutant of each piece.
pub fn irreducible_components(pi_images: &[ComplexMatrix], tol: &ToleranceConfig) -> Result<Vec<Irreducible>> {
    let d = pi_images.first().map_or(0, |m| m.nrows());
    let mut done = Vec::new();
    if d == 0 {
        return Ok(done);
    }
    let mut stack = vec![linalg::identity(d)];
    while let Some(q) = stack.pop() {
        let qa = q.adjoint();
        let local: Vec<ComplexMatrix> = pi_images.iter().map(|p| &qa * p * &q).collect();
        let k = q.ncols();
        let comm = commutant_of_set(k, &local, tol)?;
        if comm.dim() == 1 {
            done.push(Irreducible { images: local });
            continue;
        }
        let pieces = split_by_commutant(comm.basis(), k, tol);
        if pieces.len() < 2 {
            return Err(Error::DecompositionStalled(format!(
                "commutant of dimension {} produced no split",
                comm.dim()
            )));
        }
        // push in reverse so pieces come out in eigenvalue order
        for p in pieces.into_iter().rev() {
            stack.push(&q * p);
        }
    }
    Ok(done)
}

fn split_by_commutant(basis: &[ComplexMatrix], k: usize, tol: &ToleranceConfig) -> Vec<ComplexMatrix> {
    let id = linalg::identity(k);
    for b in basis {
        for h in [linalg::hermitian_part(b), (b - b.adjoint()) * c(0.0, -0.5)] {
            // drop the scalar part
            let shift = linalg::trace(&h) / c(k as f64, 0.0);
            let h0 = &h - &id * shift;
            let size = linalg::norm(&h0);
            if size <= tol.cluster_gap() {
                continue;
            }
            let (vals, vecs) = eigh(&(h0 * c(1.0 / size, 0.0)));
            let ranges = cluster_sorted(&vals, tol.cluster_gap());
            if ranges.len() > 1 {
                return ranges
                    .into_iter()
                    .map(|r| select_columns(&vecs, &r.collect::<Vec<_>>()))
                    .collect();
            }
        }
    }
    Vec::new()
}

fn equivalent(a: &Irreducible, b: &Irreducible, tol: &ToleranceConfig) -> bool {
    a.dim() == b.dim() && !intertwiner_space(&a.images, &b.images, tol).is_empty()
}

/// Quasi-equivalence of the dilation representations: the same irreducible
/// classes occur in both, multiplicities ignored.
pub fn is_quasi_equivalent(t1: &CPMap, t2: &CPMap, tol: &ToleranceConfig) -> Result<QuasiEquivalenceReport> {
    t1.check_compatible(t2)?;
    let rep1 = stinespring_for(t1, tol)?;
    let rep2 = stinespring_for(t2, tol)?;
    quasi_equivalence_of_reps(rep1.pi_images(), rep2.pi_images(), tol)
}

pub fn quasi_equivalence_of_reps(
    pi1: &[ComplexMatrix],
    pi2: &[ComplexMatrix],
    tol: &ToleranceConfig,
) -> Result<QuasiEquivalenceReport> {
    let irr1 = irreducible_components(pi1, tol)?;
    let irr2 = irreducible_components(pi2, tol)?;
    let mut classes: Vec<Irreducible> = Vec::new();
    let mut tally = |irrs: Vec<Irreducible>| -> Vec<(usize, usize)> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for irr in irrs {
            let idx = match classes.iter().position(|cl| equivalent(cl, &irr, tol)) {
                Some(i) => i,
                None => {
                    classes.push(irr);
                    classes.len() - 1
                }
            };
            match counts.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, n)) => *n += 1,
                None => counts.push((idx, 1)),
            }
        }
        counts.sort();
        counts
    };
    let first = tally(irr1);
    let second = tally(irr2);
    let support = |v: &[(usize, usize)]| v.iter().map(|(i, _)| *i).collect::<Vec<_>>();
    Ok(QuasiEquivalenceReport {
        quasi_equivalent: support(&first) == support(&second),
        classes_first: first,
        classes_second: second,
        class_dims: classes.iter().map(Irreducible::dim).collect(),
    })
}
