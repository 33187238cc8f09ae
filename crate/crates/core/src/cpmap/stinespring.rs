use crate::algebra::{commutant, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, kron, pinv, unvectorize, vectorize, ComplexMatrix, OrthoBasis};
use crate::tolerance::ToleranceConfig;

use super::{gram_matrix, is_completely_positive, CPMap};

/// A Stinespring triple `(π, V, K)` for a map on a domain algebra: `π` is a
/// unital ∗-representation on `K = C^d` given by its values on the domain
/// basis, and `V : C^m → K` with `T(X) = V* π(X) V`.
#[derive(Clone, Debug)]
pub struct StinespringRep {
    domain: MatrixAlgebra,
    pi_images: Vec<ComplexMatrix>,
    v: ComplexMatrix,
}

impl StinespringRep {
    pub fn new(domain: MatrixAlgebra, pi_images: Vec<ComplexMatrix>, v: ComplexMatrix) -> Result<Self> {
        if pi_images.len() != domain.dim() {
            return Err(Error::DimensionMismatch("one π image per domain basis element".into()));
        }
        let d = v.nrows();
        if pi_images.iter().any(|p| p.shape() != (d, d)) {
            return Err(Error::DimensionMismatch(format!("π images must be {d}×{d}")));
        }
        Ok(Self { domain, pi_images, v })
    }

    pub fn dilation_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn domain(&self) -> &MatrixAlgebra {
        &self.domain
    }

    pub fn pi_images(&self) -> &[ComplexMatrix] {
        &self.pi_images
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    /// `π(X)` for `X` in the domain algebra.
    pub fn pi(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dilation_dim();
        let mut out = linalg::zeros(d, d);
        for (p, z) in self.pi_images.iter().zip(self.domain.coordinates(x)) {
            if z != linalg::ZERO {
                out += p * z;
            }
        }
        out
    }

    /// Basis images of `X ↦ V* R π(X) V`.
    pub fn compress(&self, r: &ComplexMatrix) -> Vec<ComplexMatrix> {
        let vr = self.v.adjoint() * r;
        self.pi_images.iter().map(|p| &vr * p * &self.v).collect()
    }

    /// `[π(B₁)V | π(B₂)V | …]`, of shape `d × (b·m)`. Its columns span `K`
    /// exactly when the dilation is minimal.
    pub fn spanning_matrix(&self) -> ComplexMatrix {
        let d = self.dilation_dim();
        let m = self.v.ncols();
        let mut s = linalg::zeros(d, self.pi_images.len() * m);
        for (i, p) in self.pi_images.iter().enumerate() {
            s.view_mut((0, i * m), (d, m)).copy_from(&(p * &self.v));
        }
        s
    }

    /// Rank of [`spanning_matrix`](Self::spanning_matrix).
    pub fn spanning_rank(&self, tol: &ToleranceConfig) -> usize {
        let s = self.spanning_matrix();
        let (vals, _) = eigh(&(&s * s.adjoint()));
        let top = vals.last().copied().unwrap_or(0.0).max(1.0);
        vals.iter().filter(|&&x| x > tol.rank_cutoff * top).count()
    }

    /// `π(𝒳)`. The image of a ∗-homomorphism is already a ∗-algebra, so
    /// the span of the basis images is enough.
    pub fn image_algebra(&self, tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
        MatrixAlgebra::from_spanning_unital(self.dilation_dim(), &self.pi_images, tol)
    }

    /// `maxᵢ ‖V* π(Bᵢ) V − T(Bᵢ)‖`.
    pub fn reconstruction_residual(&self, t: &CPMap) -> f64 {
        let va = self.v.adjoint();
        self.pi_images
            .iter()
            .zip(t.images())
            .map(|(p, img)| linalg::dist(&(&va * p * &self.v), img))
            .fold(0.0, f64::max)
    }

    /// Worst defect of `π` as a unital ∗-homomorphism on the domain basis.
    pub fn multiplicativity_residual(&self) -> f64 {
        let basis = self.domain.basis();
        let d = self.dilation_dim();
        let mut worst = linalg::dist(&self.pi(&self.domain.identity()), &linalg::identity(d));
        for (i, bi) in basis.iter().enumerate() {
            worst = worst.max(linalg::dist(&self.pi(&bi.adjoint()), &self.pi_images[i].adjoint()));
            for (j, bj) in basis.iter().enumerate() {
                let lhs = self.pi(&(bi * bj));
                let rhs = &self.pi_images[i] * &self.pi_images[j];
                worst = worst.max(linalg::dist(&lhs, &rhs));
            }
        }
        worst
    }

    /// `‖V*V − 1‖`, zero exactly for unital maps.
    pub fn isometry_defect(&self) -> f64 {
        let m = self.v.ncols();
        linalg::dist(&(self.v.adjoint() * &self.v), &linalg::identity(m))
    }
}

/// Minimal Stinespring dilation from the Gram matrix of `T`.
///
/// The GNS space is the quotient of `𝒳 ⊗ C^m` by the null space of `G`;
/// factoring `G = W* W` over its nonzero eigenvalues realizes it as `C^d`
/// with `d = rank G`, so the dilation is minimal by construction.
pub fn minimal_stinespring(t: &CPMap, tol: &ToleranceConfig) -> Result<StinespringRep> {
    let cert = is_completely_positive(t, tol)?;
    if !cert.completely_positive {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: cert.min_eigenvalue });
    }
    let g = gram_matrix(t);
    let (vals, vecs) = eigh(&g);
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > tol.rank_cutoff * top).collect();
    let d = keep.len();
    let bm = g.nrows();
    let m = t.m();
    let b = t.domain().dim();
    // W = Λ^{1/2} U_r*, W⁺ = U_r Λ^{-1/2}
    let mut w = linalg::zeros(d, bm);
    let mut w_pinv = linalg::zeros(bm, d);
    for (row, &k) in keep.iter().enumerate() {
        let s = vals[k].sqrt();
        let u = vecs.column(k);
        for col in 0..bm {
            w[(row, col)] = u[col].conj() * s;
            w_pinv[(col, row)] = u[col] / s;
        }
    }
    let domain = t.domain();
    let basis = domain.basis();
    let id_m = linalg::identity(m);
    let mut pi_images = Vec::with_capacity(b);
    for bp in basis {
        let mut cmat = linalg::zeros(b, b);
        for (j, bj) in basis.iter().enumerate() {
            let coords = domain.coordinates(&(bp * bj));
            for (i, z) in coords.into_iter().enumerate() {
                cmat[(i, j)] = z;
            }
        }
        pi_images.push(&w * kron(&cmat, &id_m) * &w_pinv);
    }
    let unit_coords = domain.coordinates(&domain.identity());
    let mut v = linalg::zeros(d, m);
    for (i, z) in unit_coords.iter().enumerate() {
        if *z == linalg::ZERO {
            continue;
        }
        for k in 0..m {
            let col = w.column(i * m + k) * *z;
            let mut dst = v.column_mut(k);
            dst += col;
        }
    }
    StinespringRep::new(domain.clone(), pi_images, v)
}

/// Minimal dilation read off a Kraus family: `π(X) = X ⊗ 1_r` and
/// `V e_k = Σⱼ Cⱼ e_k ⊗ fⱼ`, compressed to the cyclic subspace spanned by
/// `π(Bᵢ) V e_k`.
pub fn stinespring_from_kraus(t: &CPMap, tol: &ToleranceConfig) -> Result<StinespringRep> {
    let ops = t
        .kraus_ops()
        .ok_or_else(|| Error::Precondition("map carries no Kraus family".into()))?;
    let n = t.n();
    let m = t.m();
    let r = ops.len();
    let mut v_big = linalg::zeros(n * r, m);
    for (j, op) in ops.iter().enumerate() {
        for a in 0..n {
            for k in 0..m {
                v_big[(a * r + j, k)] = op[(a, k)];
            }
        }
    }
    let basis = t.domain().basis();
    let mut ob = OrthoBasis::new(n * r, tol.rank_cutoff);
    for b in basis {
        let pv = lift_apply(b, &v_big, r);
        for k in 0..m {
            ob.push(&pv.column(k).into_owned());
        }
    }
    let q = ob.to_matrix();
    let qa = q.adjoint();
    let pi_images = basis.iter().map(|b| &qa * lift_apply(b, &q, r)).collect();
    let v = &qa * &v_big;
    StinespringRep::new(t.domain().clone(), pi_images, v)
}

/// `(B ⊗ 1_r) X` without forming the Kronecker product: a column of `X`,
/// indexed `a·r + j`, is the column-major `r × n` matrix `M` and maps to
/// `M Bᵀ`.
fn lift_apply(b: &ComplexMatrix, x: &ComplexMatrix, r: usize) -> ComplexMatrix {
    let n = b.nrows();
    let bt = b.transpose();
    let mut out = linalg::zeros(n * r, x.ncols());
    for col in 0..x.ncols() {
        let m = ComplexMatrix::from_iterator(r, n, x.column(col).iter().copied());
        let y = m * &bt;
        out.column_mut(col).copy_from_slice(y.as_slice());
    }
    out
}

/// Kraus route when the map carries a Kraus family, Gram route otherwise.
/// Both give minimal dilations, unique up to a unitary.
pub fn stinespring_for(t: &CPMap, tol: &ToleranceConfig) -> Result<StinespringRep> {
    if t.kraus_ops().is_some() {
        stinespring_from_kraus(t, tol)
    } else {
        minimal_stinespring(t, tol)
    }
}

/// Lifts `A ∈ T(𝒳)'` to the unique `A₁ ∈ π(𝒳)'` with `A₁ π(X) V = π(X) V A`.
pub fn commutant_lifting(
    rep: &StinespringRep,
    t: &CPMap,
    a: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let m = t.m();
    if a.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!("lifted operator must be {m}×{m}")));
    }
    let scale = 1.0 + linalg::norm(a);
    for (k, img) in t.images().iter().enumerate() {
        let defect = linalg::norm(&linalg::commutator(a, img));
        if defect > tol.solved_tol() * scale * (1.0 + linalg::norm(img)) {
            return Err(Error::Precondition(format!(
                "operator does not commute with T(B_{k}) (defect {defect:.3e})"
            )));
        }
    }
    let s = rep.spanning_matrix();
    let d = rep.dilation_dim();
    let mut tt = linalg::zeros(d, s.ncols());
    for (i, p) in rep.pi_images().iter().enumerate() {
        tt.view_mut((0, i * m), (d, m)).copy_from(&(p * rep.v() * a));
    }
    let a1 = &tt * pinv(&s, tol.rank_cutoff);
    let resid = linalg::dist(&(&a1 * &s), &tt);
    if resid > tol.solved_tol() * scale * (1.0 + linalg::norm(&s)) {
        return Err(Error::Inconsistent { what: "commutant lifting".into(), residual: resid });
    }
    Ok(a1)
}

/// `π(𝒳)' ∩ {R : V* R π(X) V ∈ 𝒴 for all X}` where `𝒴` is the target
/// algebra of `T`. With a full target this is the whole commutant.
pub fn relative_commutant(t: &CPMap, rep: &StinespringRep, tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    let pi_alg = rep.image_algebra(tol)?;
    let comm = commutant(&pi_alg, tol)?;
    let target = t.target();
    let m = t.m();
    let mm = m * m;
    let b = rep.pi_images().len();
    let cdim = comm.dim();
    let mut k = linalg::zeros(b * mm, cdim);
    for (p, rp) in comm.basis().iter().enumerate() {
        for (i, y) in rep.compress(rp).iter().enumerate() {
            let off = y - target.project(y);
            k.view_mut((i * mm, p), (mm, 1)).copy_from(&vectorize(&off));
        }
    }
    let ns = linalg::null_space(&k, tol.rank_cutoff);
    let d = rep.dilation_dim();
    let elems: Vec<ComplexMatrix> = (0..ns.ncols()).map(|j| comm.element(ns.column(j).as_slice())).collect();
    let alg = MatrixAlgebra::from_spanning_unital(d, &elems, tol)?;
    let (unit, adj, prod) = alg.closure_defects();
    let worst = unit.max(adj).max(prod);
    if worst > tol.solved_tol() * (1.0 + d as f64) {
        return Err(Error::ClosureFailure { what: "relative commutant".into(), residual: worst });
    }
    Ok(alg)
}

/// Basis of `{S : S π₁(Bᵢ) = π₂(Bᵢ) S}` (shape `d₂ × d₁`) for two
/// representations given on the same domain basis.
pub fn intertwiner_space(pi1: &[ComplexMatrix], pi2: &[ComplexMatrix], tol: &ToleranceConfig) -> Vec<ComplexMatrix> {
    assert_eq!(pi1.len(), pi2.len(), "representations on different bases");
    let (Some(first1), Some(first2)) = (pi1.first(), pi2.first()) else {
        return Vec::new();
    };
    let d1 = first1.nrows();
    let d2 = first2.nrows();
    if d1 == 0 || d2 == 0 {
        return Vec::new();
    }
    let id1 = linalg::identity(d1);
    let id2 = linalg::identity(d2);
    let vars = d1 * d2;
    let mut gram = linalg::zeros(vars, vars);
    for (a, b) in pi1.iter().zip(pi2) {
        // K = Aᵀ⊗1 − 1⊗B on vec(S); K*K = (ĀAᵀ)⊗1 − Ā⊗B − Aᵀ⊗B* + 1⊗(B*B)
        let at = a.transpose();
        let abar = a.conjugate();
        let bstar = b.adjoint();
        gram += kron(&(&abar * &at), &id2);
        gram -= kron(&abar, b);
        gram -= kron(&at, &bstar);
        gram += kron(&id1, &(&bstar * b));
    }
    let ns = linalg::null_space_of_gram(&gram, tol.rank_cutoff);
    (0..ns.ncols()).map(|j| unvectorize(ns.column(j).as_slice(), d2, d1)).collect()
}

/// The unitary `U` with `U V₁ = V₂` and `U π₁(·) U* = π₂(·)` between two
/// minimal dilations of the same map.
pub fn intertwining_unitary(
    rep1: &StinespringRep,
    rep2: &StinespringRep,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    if rep1.dilation_dim() != rep2.dilation_dim() || rep1.pi_images.len() != rep2.pi_images.len() {
        return Err(Error::DimensionMismatch("dilations of different size".into()));
    }
    let s1 = rep1.spanning_matrix();
    let s2 = rep2.spanning_matrix();
    let u = &s2 * pinv(&s1, tol.rank_cutoff);
    let d = rep1.dilation_dim();
    let id = linalg::identity(d);
    let checks = [
        ("U S₁ = S₂", linalg::dist(&(&u * &s1), &s2)),
        ("U*U = 1", linalg::dist(&(u.adjoint() * &u), &id)),
        ("U U* = 1", linalg::dist(&(&u * u.adjoint()), &id)),
        ("U V₁ = V₂", linalg::dist(&(&u * rep1.v()), rep2.v())),
    ];
    for (what, r) in checks {
        if r > tol.solved_tol() * (1.0 + d as f64) {
            return Err(Error::Inconsistent { what: what.into(), residual: r });
        }
    }
    for (p1, p2) in rep1.pi_images.iter().zip(&rep2.pi_images) {
        let r = linalg::dist(&(&u * p1), &(p2 * &u));
        if r > tol.solved_tol() * (1.0 + linalg::norm(p1)) {
            return Err(Error::Inconsistent { what: "U π₁ = π₂ U".into(), residual: r });
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, pauli_x, pauli_y, pauli_z, unit};
    use crate::oracle;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn kraus_map(n: usize, target: MatrixAlgebra, ops: Vec<ComplexMatrix>) -> CPMap {
        CPMap::from_kraus(MatrixAlgebra::full(n), target, ops, &tol()).unwrap()
    }

    fn depolarizing() -> CPMap {
        let h = c(0.5, 0.0);
        let ops = vec![identity(2) * h, pauli_x() * h, pauli_y() * h, pauli_z() * h];
        kraus_map(2, MatrixAlgebra::full(2), ops)
    }

    fn vector_state(k: usize) -> CPMap {
        kraus_map(2, MatrixAlgebra::full(1), vec![unit(2, 1, k, 0)])
    }

    fn trace_map() -> CPMap {
        kraus_map(2, MatrixAlgebra::full(1), vec![unit(2, 1, 0, 0), unit(2, 1, 1, 0)])
    }

    fn check_rep(rep: &StinespringRep, t: &CPMap) {
        assert!(rep.reconstruction_residual(t) < 1e-9);
        assert!(rep.multiplicativity_residual() < 1e-9);
        assert_eq!(rep.spanning_rank(&tol()), rep.dilation_dim());
    }

    #[test]
    fn identity_dilation() {
        let t = kraus_map(2, MatrixAlgebra::full(2), vec![identity(2)]);
        for rep in [minimal_stinespring(&t, &tol()).unwrap(), stinespring_from_kraus(&t, &tol()).unwrap()] {
            assert_eq!(rep.dilation_dim(), 2);
            check_rep(&rep, &t);
            assert!(rep.isometry_defect() < 1e-10);
        }
    }

    #[test]
    fn depolarizing_dilation_matches_choi_rank() {
        let t = depolarizing();
        let rank = oracle::choi_rank(|x| t.eval(x), 2, 2, 1e-10);
        assert_eq!(rank, 4);
        let gns = minimal_stinespring(&t, &tol()).unwrap();
        let kr = stinespring_from_kraus(&t, &tol()).unwrap();
        assert_eq!(gns.dilation_dim(), 2 * rank);
        assert_eq!(kr.dilation_dim(), 8);
        check_rep(&gns, &t);
        check_rep(&kr, &t);
        assert!(gns.isometry_defect() < 1e-10);
        intertwining_unitary(&gns, &kr, &tol()).unwrap();
    }

    #[test]
    fn vector_state_dilation() {
        let t = vector_state(0);
        let rep = minimal_stinespring(&t, &tol()).unwrap();
        assert_eq!(rep.dilation_dim(), 2);
        check_rep(&rep, &t);
        // the defining representation, up to a unitary
        let id_rep: Vec<ComplexMatrix> = t.domain().basis().to_vec();
        assert_eq!(intertwiner_space(rep.pi_images(), &id_rep, &tol()).len(), 1);
    }

    #[test]
    fn preparation_channel_compresses() {
        // X ↦ ⟨e₁|X e₁⟩·1 written with Kraus {E₁₁, E₁₂}
        let t = kraus_map(2, MatrixAlgebra::full(2), vec![unit(2, 2, 0, 0), unit(2, 2, 0, 1)]);
        let rep = stinespring_from_kraus(&t, &tol()).unwrap();
        assert!(rep.dilation_dim() <= 4);
        check_rep(&rep, &t);
        let gns = minimal_stinespring(&t, &tol()).unwrap();
        assert_eq!(gns.dilation_dim(), rep.dilation_dim());
        intertwining_unitary(&gns, &rep, &tol()).unwrap();
    }

    #[test]
    fn rejects_transpose() {
        let t = CPMap::from_fn_unverified(MatrixAlgebra::full(2), MatrixAlgebra::full(2), |x| x.transpose(), &tol())
            .unwrap();
        assert!(matches!(minimal_stinespring(&t, &tol()), Err(Error::NotCompletelyPositive { .. })));
    }

    #[test]
    fn relative_commutant_examples() {
        let t = trace_map();
        let rep = minimal_stinespring(&t, &tol()).unwrap();
        assert_eq!(rep.dilation_dim(), 4);
        let rc = relative_commutant(&t, &rep, &tol()).unwrap();
        assert_eq!(rc.dim(), 4);

        let id = kraus_map(2, MatrixAlgebra::full(2), vec![identity(2)]);
        let rep = minimal_stinespring(&id, &tol()).unwrap();
        assert_eq!(relative_commutant(&id, &rep, &tol()).unwrap().dim(), 1);

        // diagonal target cuts the commutant down
        let pinch = CPMap::from_kraus(
            MatrixAlgebra::full(2),
            MatrixAlgebra::diagonal(2),
            vec![unit(2, 2, 0, 0), unit(2, 2, 1, 1)],
            &tol(),
        )
        .unwrap();
        let rep = stinespring_for(&pinch, &tol()).unwrap();
        let full = commutant(&rep.image_algebra(&tol()).unwrap(), &tol()).unwrap();
        let rc = relative_commutant(&pinch, &rep, &tol()).unwrap();
        assert!(rc.is_subspace_of(&full, 1e-8));
        assert_eq!(oracle::commutant_dimension(rep.pi_images(), rep.dilation_dim()), full.dim());
    }

    #[test]
    fn lifting_scalars_and_block_projection() {
        let t = trace_map();
        let rep = minimal_stinespring(&t, &tol()).unwrap();
        let a1 = commutant_lifting(&rep, &t, &(identity(1) * c(3.0, 0.0)), &tol()).unwrap();
        assert!(linalg::dist(&a1, &(identity(4) * c(3.0, 0.0))) < 1e-9);

        // T = ω_{e1} ⊕ ω_{e2} on the diagonal target C²
        let t2 = CPMap::from_kraus(
            MatrixAlgebra::full(2),
            MatrixAlgebra::diagonal(2),
            vec![unit(2, 2, 0, 0), unit(2, 2, 1, 1)],
            &tol(),
        )
        .unwrap();
        let rep = minimal_stinespring(&t2, &tol()).unwrap();
        let a = linalg::diag(&[1.0, 0.0]);
        let a1 = commutant_lifting(&rep, &t2, &a, &tol()).unwrap();
        assert!(linalg::dist(&(&a1 * &a1), &a1) < 1e-9);
        assert!(linalg::dist(&(rep.v() * &a), &(&a1 * rep.v())) < 1e-9);
        assert!((linalg::trace(&a1).re - 2.0).abs() < 1e-9);
        for p in rep.pi_images() {
            assert!(linalg::norm(&linalg::commutator(&a1, p)) < 1e-9);
        }
    }

    #[test]
    fn lifting_rejects_noncommuting_operator() {
        let t = depolarizing().drop_kraus();
        let id = kraus_map(2, MatrixAlgebra::full(2), vec![identity(2)]);
        let rep = minimal_stinespring(&id, &tol()).unwrap();
        assert!(matches!(commutant_lifting(&rep, &id, &pauli_x(), &tol()), Err(Error::Precondition(_))));
        // the depolarizing image is scalar, so any operator lifts
        let rep = minimal_stinespring(&t, &tol()).unwrap();
        assert!(commutant_lifting(&rep, &t, &pauli_x(), &tol()).is_ok());
    }
}
