use crate::cpmap::{gram_matrix, is_completely_positive, CPMap, StinespringRep};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, pinv, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

/// Outcome of `T₁ ≤ T₂`, i.e. `T₂ − T₁` completely positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderCertificate {
    pub leq: bool,
    /// Minimum eigenvalue of the Gram matrix of `T₂ − T₁`.
    pub min_eigenvalue: f64,
}

pub fn order_leq(t1: &CPMap, t2: &CPMap, tol: &ToleranceConfig) -> Result<OrderCertificate> {
    let diff = t2.sub(t1)?;
    let cert = is_completely_positive(&diff, tol)?;
    Ok(OrderCertificate { leq: cert.completely_positive, min_eigenvalue: cert.min_eigenvalue })
}

/// Reusable pieces for solving `S* R S = G'` on one dilation.
pub(crate) struct RnSolver<'a> {
    rep: &'a StinespringRep,
    s: ComplexMatrix,
    s_pinv: ComplexMatrix,
}

impl<'a> RnSolver<'a> {
    pub(crate) fn new(rep: &'a StinespringRep, tol: &ToleranceConfig) -> Self {
        let s = rep.spanning_matrix();
        let s_pinv = pinv(&s, tol.rank_cutoff);
        Self { rep, s, s_pinv }
    }

    /// Solves for `R` without checking domination.
    pub(crate) fn solve(&self, tp: &CPMap, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
        let g = gram_matrix(tp);
        let r = linalg::hermitian_part(&(self.s_pinv.adjoint() * &g * &self.s_pinv));
        let resid = linalg::dist(&(self.s.adjoint() * &r * &self.s), &g);
        if resid > tol.solved_tol() * (1.0 + linalg::norm(&g)) {
            return Err(Error::Inconsistent { what: "Radon–Nikodym system".into(), residual: resid });
        }
        let scale = 1.0 + linalg::norm(&r);
        for p in self.rep.pi_images() {
            let c = linalg::norm(&linalg::commutator(&r, p));
            if c > tol.solved_tol() * scale * (1.0 + linalg::norm(p)) {
                return Err(Error::Inconsistent { what: "derivative leaves π(𝒳)'".into(), residual: c });
            }
        }
        Ok(r)
    }
}

/// The Radon–Nikodym derivative of `Tp ≤ T`: the unique `R ∈ π_T(𝒳)'` with
/// `0 ≤ R ≤ 1` and `Tp(X) = V* R π(X) V`.
///
/// `R` solves `⟨π(Bᵢ)V e_k, R π(Bⱼ)V e_l⟩ = ⟨e_k, Tp(Bᵢ*Bⱼ) e_l⟩`, i.e.
/// `S* R S = G'`, and is unique because the columns of `S` span the
/// dilation space.
pub fn rn_derivative(tp: &CPMap, t: &CPMap, rep: &StinespringRep, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    tp.check_compatible(t)?;
    let cert = order_leq(tp, t, tol)?;
    if !cert.leq {
        return Err(Error::Precondition(format!(
            "map is not dominated (min eigenvalue of difference {:.3e})",
            cert.min_eigenvalue
        )));
    }
    let lower = is_completely_positive(tp, tol)?;
    if !lower.completely_positive {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: lower.min_eigenvalue });
    }
    let r = RnSolver::new(rep, tol).solve(tp, tol)?;
    check_unit_interval(&r, tol)?;
    Ok(r)
}

/// Spectrum of a solved operator inside `[−ε, 1 + ε]`, `ε` the solved tolerance.
pub(crate) fn check_unit_interval(r: &ComplexMatrix, tol: &ToleranceConfig) -> Result<()> {
    let (vals, _) = eigh(r);
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    if lo < -tol.solved_tol() {
        return Err(Error::Inconsistent { what: "derivative has negative spectrum".into(), residual: -lo });
    }
    if hi > 1.0 + tol.solved_tol() {
        return Err(Error::Inconsistent { what: "derivative exceeds 1".into(), residual: hi - 1.0 });
    }
    Ok(())
}

/// `T_R(X) = V* R π(X) V` for `R` in the relative commutant with `0 ≤ R ≤ 1`.
pub fn cp_from_operator(t: &CPMap, rep: &StinespringRep, r: &ComplexMatrix, tol: &ToleranceConfig) -> Result<CPMap> {
    let d = rep.dilation_dim();
    if r.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("operator must be {d}×{d}")));
    }
    let herm = linalg::dist(r, &r.adjoint());
    if herm > tol.solved_tol() * (1.0 + linalg::norm(r)) {
        return Err(Error::Precondition(format!("operator is not self-adjoint (defect {herm:.3e})")));
    }
    let r = linalg::hermitian_part(r);
    let scale = 1.0 + linalg::norm(&r);
    for p in rep.pi_images() {
        let c = linalg::norm(&linalg::commutator(&r, p));
        if c > tol.solved_tol() * scale * (1.0 + linalg::norm(p)) {
            return Err(Error::NotInSpan { what: "commutant of π(𝒳)".into(), residual: c });
        }
    }
    check_unit_interval(&r, tol).map_err(|e| Error::Precondition(e.to_string()))?;
    compress_to_map(t, rep, &r, tol)
}

/// `X ↦ V* R π(X) V` with only the target-span check.
pub(crate) fn compress_to_map(
    t: &CPMap,
    rep: &StinespringRep,
    r: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<CPMap> {
    let images = rep.compress(r);
    for (k, img) in images.iter().enumerate() {
        let res = t.target().residual(img);
        if res > tol.solved_tol() * (1.0 + linalg::norm(img)) {
            return Err(Error::NotInSpan { what: format!("target algebra (compressed image {k})"), residual: res });
        }
    }
    let images = images.iter().map(|img| t.target().project(img)).collect();
    CPMap::from_images_unverified(t.domain().clone(), t.target().clone(), images, tol)
}
