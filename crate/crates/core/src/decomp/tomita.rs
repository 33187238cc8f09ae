use serde::Serialize;

use crate::algebra::MatrixAlgebra;
use crate::cpmap::{relative_commutant, stinespring_for, CPMap, StinespringRep};
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

use super::measure::{kappa, measure_from_abelian_in, CPMeasure};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TomitaReport {
    pub measures: usize,
    pub algebras: usize,
    /// Measure → algebra → measure did not return the same atoms.
    pub measure_roundtrip_mismatches: usize,
    /// Algebra → measure → algebra did not return the same span.
    pub algebra_roundtrip_mismatches: usize,
    /// Pairs where dominance and algebra inclusion disagree.
    pub monotonicity_mismatches: usize,
    pub pairs_checked: usize,
}

impl TomitaReport {
    pub fn ok(&self) -> bool {
        self.measure_roundtrip_mismatches == 0
            && self.algebra_roundtrip_mismatches == 0
            && self.monotonicity_mismatches == 0
    }
}

/// Projections `κ(χᵢ)` with numerically zero atoms dropped.
fn kappa_projections(mu: &CPMeasure, rep: &StinespringRep, tol: &ToleranceConfig) -> Result<Vec<ComplexMatrix>> {
    Ok(kappa(mu, rep, tol)?
        .operators()
        .iter()
        .filter(|r| linalg::norm(r) > tol.cluster_gap())
        .cloned()
        .collect())
}

fn span_algebra(d: usize, projections: &[ComplexMatrix], tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    MatrixAlgebra::from_spanning_unital(d, projections, tol)
}

/// `μ₁ ≺ μ₂`: every κ₁ projection is a sum of κ₂ projections.
pub fn dominated_by(k1: &[ComplexMatrix], k2: &[ComplexMatrix], tol: &ToleranceConfig) -> bool {
    k1.iter().all(|p| {
        let d = p.nrows();
        let mut sum = linalg::zeros(d, d);
        for q in k2 {
            // q ≤ p iff pq = q
            if linalg::dist(&(p * q), q) <= tol.solved_tol() * (1.0 + d as f64) {
                sum += q;
            }
        }
        linalg::dist(&sum, p) <= tol.solved_tol() * (1.0 + d as f64)
    })
}

fn same_atoms(a: &[CPMap], b: &[CPMap], tol: &ToleranceConfig) -> bool {
    let nonzero = |v: &[CPMap]| -> Vec<CPMap> {
        v.iter()
            .filter(|t| t.images().iter().any(|m| linalg::norm(m) > tol.cluster_gap()))
            .cloned()
            .collect()
    };
    let (a, b) = (nonzero(a), nonzero(b));
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in &a {
        let scale = 1.0 + x.images().iter().map(linalg::norm).fold(0.0, f64::max);
        let hit = (0..b.len()).find(|&j| !used[j] && x.distance(&b[j]) <= tol.solved_tol() * scale);
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Checks the correspondence between orthogonal measures with barycenter `T`
/// and abelian subalgebras of the relative commutant on the given instances:
/// both roundtrips, and dominance ⇔ inclusion on every ordered pair (of
/// measures, and of algebras).
pub fn tomita_correspondence_check(
    t: &CPMap,
    measures: &[CPMeasure],
    algebras: &[MatrixAlgebra],
    tol: &ToleranceConfig,
) -> Result<TomitaReport> {
    let rep = stinespring_for(t, tol)?;
    let rc = relative_commutant(t, &rep, tol)?;
    let d = rep.dilation_dim();
    let span_tol = tol.solved_tol() * (1.0 + d as f64);
    let mut report = TomitaReport { measures: measures.len(), algebras: algebras.len(), ..Default::default() };

    let mut measure_kappas = Vec::new();
    let mut measure_algs = Vec::new();
    for mu in measures {
        let ps = kappa_projections(mu, &rep, tol)?;
        let alg = span_algebra(d, &ps, tol)?;
        let back = measure_from_abelian_in(&alg, &rc, t, &rep, tol)?;
        if !same_atoms(mu.values(), back.values(), tol) {
            report.measure_roundtrip_mismatches += 1;
        }
        measure_kappas.push(ps);
        measure_algs.push(alg);
    }
    let mut algebra_kappas = Vec::new();
    for b in algebras {
        let mu = measure_from_abelian_in(b, &rc, t, &rep, tol)?;
        let ps = kappa_projections(&mu, &rep, tol)?;
        let back = span_algebra(d, &ps, tol)?;
        if !back.same_span(b, span_tol) {
            report.algebra_roundtrip_mismatches += 1;
        }
        algebra_kappas.push(ps);
    }
    for (kappas, algs) in [(&measure_kappas, measure_algs.iter().collect::<Vec<_>>()), (&algebra_kappas, algebras.iter().collect())] {
        for i in 0..kappas.len() {
            for j in 0..kappas.len() {
                let dominance = dominated_by(&kappas[i], &kappas[j], tol);
                let inclusion = algs[i].is_subspace_of(algs[j], span_tol);
                report.pairs_checked += 1;
                if dominance != inclusion {
                    report.monotonicity_mismatches += 1;
                }
            }
        }
    }
    Ok(report)
}
