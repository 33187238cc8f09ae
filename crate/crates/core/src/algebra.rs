//! Concrete finite-dimensional ∗-subalgebras of `M_n` and the operations on
//! them: commutants, generated algebras, centers, subspace intersections and
//! minimal central projections.
//!
//! An algebra is stored as a basis that is orthonormal for the normalized
//! Hilbert–Schmidt inner product `⟨A, B⟩ = tr(A* B) / n`. Weak closures are
//! not modelled: every subspace here is finite dimensional and already closed.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, cluster_sorted, eigh, null_space_of_gram, unvectorize, vectorize, ComplexMatrix,
    ComplexVector, OrthoBasis,
};
use crate::tolerance::ToleranceConfig;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    space_dim: usize,
    basis: Vec<ComplexMatrix>,
    /// `n² × dim`, column `i` is `vec(basis[i]) / √n` (a Euclidean unit vector).
    stacked: ComplexMatrix,
}

impl MatrixAlgebra {
    /// Builds an algebra from a spanning set, orthonormalizing it in input
    /// order and checking that the span is a unital ∗-algebra.
    pub fn new(space_dim: usize, spanning: &[ComplexMatrix], tol: &ToleranceConfig) -> Result<Self> {
        check_shapes(space_dim, spanning)?;
        let alg = Self::from_spanning(space_dim, spanning, tol);
        alg.validate(tol)?;
        Ok(alg)
    }

    /// Orthonormalizes the spanning set without checking algebra axioms.
    pub(crate) fn from_spanning(space_dim: usize, spanning: &[ComplexMatrix], tol: &ToleranceConfig) -> Self {
        let mut ob = OrthoBasis::new(space_dim * space_dim, tol.rank_cutoff);
        for m in spanning {
            ob.push(&vectorize(m));
        }
        Self::from_unit_vectors(space_dim, ob.vectors())
    }

    /// Like [`from_spanning`](Self::from_spanning) but puts the identity
    /// first. Fails if the identity is not in the span.
    pub(crate) fn from_spanning_unital(
        space_dim: usize,
        spanning: &[ComplexMatrix],
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let mut probe = OrthoBasis::new(space_dim * space_dim, tol.rank_cutoff);
        for m in spanning {
            probe.push(&vectorize(m));
        }
        let id = vectorize(&linalg::identity(space_dim));
        let miss = probe.distance(&id) / (space_dim as f64).sqrt();
        if miss > tol.solved_tol() {
            return Err(Error::NotInSpan { what: "identity".into(), residual: miss });
        }
        let mut ob = OrthoBasis::new(space_dim * space_dim, tol.rank_cutoff);
        ob.push(&id);
        for v in probe.vectors() {
            ob.push(v);
        }
        Ok(Self::from_unit_vectors(space_dim, ob.vectors()))
    }

    fn from_unit_vectors(space_dim: usize, vectors: &[ComplexVector]) -> Self {
        let scale = c((space_dim as f64).sqrt(), 0.0);
        let basis = vectors
            .iter()
            .map(|v| unvectorize(v.as_slice(), space_dim, space_dim) * scale)
            .collect();
        let mut stacked = linalg::zeros(space_dim * space_dim, vectors.len());
        for (k, v) in vectors.iter().enumerate() {
            stacked.set_column(k, v);
        }
        Self { space_dim, basis, stacked }
    }

    /// Trusts that `basis` is orthonormal and spans a unital ∗-algebra.
    pub(crate) fn from_orthonormal_unchecked(space_dim: usize, basis: Vec<ComplexMatrix>) -> Self {
        let inv = c(1.0 / (space_dim as f64).sqrt(), 0.0);
        let mut stacked = linalg::zeros(space_dim * space_dim, basis.len());
        for (k, b) in basis.iter().enumerate() {
            stacked.set_column(k, &(vectorize(b) * inv));
        }
        Self { space_dim, basis, stacked }
    }

    /// The full matrix algebra `M_n`, basis `√n E_ij` in row-major order.
    pub fn full(n: usize) -> Self {
        Self::blocks(&[n])
    }

    /// Scalar multiples of the identity on `C^n`.
    pub fn scalars(n: usize) -> Self {
        Self::from_orthonormal_unchecked(n, vec![linalg::identity(n)])
    }

    /// Diagonal matrices on `C^n`.
    pub fn diagonal(n: usize) -> Self {
        Self::blocks(&vec![1; n])
    }

    /// Block-diagonal algebra `M_{k₁} ⊕ M_{k₂} ⊕ …` on `C^{Σ kᵢ}`.
    pub fn blocks(sizes: &[usize]) -> Self {
        let n: usize = sizes.iter().sum();
        let scale = c((n as f64).sqrt(), 0.0);
        let mut basis = Vec::new();
        let mut off = 0;
        for &k in sizes {
            for i in 0..k {
                for j in 0..k {
                    basis.push(linalg::unit(n, n, off + i, off + j) * scale);
                }
            }
            off += k;
        }
        Self::from_orthonormal_unchecked(n, basis)
    }

    /// `A ⊗ 1_k` on `C^n ⊗ C^k`.
    pub fn kron_identity(&self, k: usize) -> Self {
        let id = linalg::identity(k);
        let basis = self.basis.iter().map(|b| linalg::kron(b, &id)).collect();
        Self::from_orthonormal_unchecked(self.space_dim * k, basis)
    }

    /// `1_k ⊗ A` on `C^k ⊗ C^n`.
    pub fn identity_kron(&self, k: usize) -> Self {
        let id = linalg::identity(k);
        let basis = self.basis.iter().map(|b| linalg::kron(&id, b)).collect();
        Self::from_orthonormal_unchecked(self.space_dim * k, basis)
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn identity(&self) -> ComplexMatrix {
        linalg::identity(self.space_dim)
    }

    /// Coordinates in the orthonormal basis: `⟨Bᵢ, X⟩ = tr(Bᵢ* X) / n`.
    pub fn coordinates(&self, x: &ComplexMatrix) -> Vec<Complex64> {
        debug_assert_eq!(x.shape(), (self.space_dim, self.space_dim));
        let v = vectorize(x);
        let inv = 1.0 / (self.space_dim as f64).sqrt();
        (self.stacked.adjoint() * v).iter().map(|z| z * inv).collect()
    }

    pub fn element(&self, coords: &[Complex64]) -> ComplexMatrix {
        assert_eq!(coords.len(), self.basis.len());
        let mut out = linalg::zeros(self.space_dim, self.space_dim);
        for (b, &z) in self.basis.iter().zip(coords) {
            out += b * z;
        }
        out
    }

    /// Orthogonal (Hilbert–Schmidt) projection onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.element(&self.coordinates(x))
    }

    /// Frobenius distance from `x` to the span.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        linalg::dist(x, &self.project(x))
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        x.shape() == (self.space_dim, self.space_dim) && self.residual(x) <= tol
    }

    /// Largest distance of a basis element of `self` from the span of `other`.
    pub fn inclusion_defect(&self, other: &MatrixAlgebra) -> f64 {
        if self.space_dim != other.space_dim {
            return f64::INFINITY;
        }
        self.basis.iter().map(|b| other.residual(b)).fold(0.0, f64::max)
    }

    pub fn is_subspace_of(&self, other: &MatrixAlgebra, tol: f64) -> bool {
        self.inclusion_defect(other) <= tol
    }

    pub fn same_span(&self, other: &MatrixAlgebra, tol: f64) -> bool {
        self.dim() == other.dim() && self.is_subspace_of(other, tol) && other.is_subspace_of(self, tol)
    }

    /// Largest commutator norm between basis elements.
    pub fn commutativity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.basis.len() {
            for j in (i + 1)..self.basis.len() {
                worst = worst.max(linalg::norm(&linalg::commutator(&self.basis[i], &self.basis[j])));
            }
        }
        worst
    }

    pub fn is_abelian(&self, tol: f64) -> bool {
        self.commutativity_defect() <= tol
    }

    /// `(unit, adjoint, product)` residuals of the ∗-algebra axioms.
    pub fn closure_defects(&self) -> (f64, f64, f64) {
        let unit = self.residual(&self.identity());
        let adj = self.basis.iter().map(|b| self.residual(&b.adjoint())).fold(0.0, f64::max);
        let mut prod: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                prod = prod.max(self.residual(&(a * b)));
            }
        }
        (unit, adj, prod)
    }

    pub fn validate(&self, tol: &ToleranceConfig) -> Result<()> {
        let (unit, adj, prod) = self.closure_defects();
        if unit > tol.abs_tol {
            return Err(Error::ClosureFailure { what: "identity not in span".into(), residual: unit });
        }
        if adj > tol.abs_tol {
            return Err(Error::ClosureFailure { what: "not closed under adjoint".into(), residual: adj });
        }
        if prod > tol.abs_tol {
            return Err(Error::ClosureFailure { what: "not closed under products".into(), residual: prod });
        }
        Ok(())
    }
}

fn check_shapes(n: usize, mats: &[ComplexMatrix]) -> Result<()> {
    for (k, m) in mats.iter().enumerate() {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "element {k} has shape {:?}, expected {n}×{n}",
                m.shape()
            )));
        }
    }
    Ok(())
}

/// Commutant `{R : RB = BR for all B}` as the null space of the stacked maps
/// `R ↦ RB − BR` over the basis.
pub fn commutant(alg: &MatrixAlgebra, tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    commutant_of_set(alg.space_dim(), alg.basis(), tol)
}

/// Commutant of an arbitrary finite set of `n × n` matrices.
pub fn commutant_of_set(n: usize, set: &[ComplexMatrix], tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    check_shapes(n, set)?;
    let id = linalg::identity(n);
    let nn = n * n;
    let mut gram = linalg::zeros(nn, nn);
    for b in set {
        // L = Bᵀ⊗1 − 1⊗B acting on column-major vec(R);
        // L*L = (B̄Bᵀ)⊗1 − B̄⊗B − Bᵀ⊗B* + 1⊗(B*B)
        let bt = b.transpose();
        let bbar = b.conjugate();
        let bstar = b.adjoint();
        gram += linalg::kron(&(&bbar * &bt), &id);
        gram -= linalg::kron(&bbar, b);
        gram -= linalg::kron(&bt, &bstar);
        gram += linalg::kron(&id, &(&bstar * b));
    }
    let ns = if set.is_empty() { linalg::identity(nn) } else { null_space_of_gram(&gram, tol.rank_cutoff) };
    let elems: Vec<ComplexMatrix> =
        (0..ns.ncols()).map(|k| unvectorize(ns.column(k).as_slice(), n, n)).collect();
    MatrixAlgebra::from_spanning_unital(n, &elems, tol)
}

/// Smallest unital ∗-algebra containing `gens`: the span of all words in the
/// generators and their adjoints, grown until the dimension stabilizes.
pub fn generated_algebra(gens: &[ComplexMatrix], n: usize, tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    check_shapes(n, gens)?;
    let mut letters: Vec<ComplexMatrix> = Vec::new();
    for g in gens {
        letters.push(g.clone());
        let a = g.adjoint();
        if linalg::dist(&a, g) > tol.abs_tol {
            letters.push(a);
        }
    }
    let scale = c((n as f64).sqrt(), 0.0);
    let mut ob = OrthoBasis::new(n * n, tol.rank_cutoff);
    ob.push(&vectorize(&linalg::identity(n)));
    for g in &letters {
        ob.push(&vectorize(g));
    }
    let mut next = 0;
    while next < ob.len() {
        let word = unvectorize(ob.vectors()[next].as_slice(), n, n) * scale;
        for g in &letters {
            ob.push(&vectorize(&(&word * g)));
        }
        next += 1;
    }
    Ok(MatrixAlgebra::from_unit_vectors(n, ob.vectors()))
}

/// Center `A ∩ A'`, solved in the coordinates of `A`'s basis: the
/// combinations `Σ cᵢ Bᵢ` with `Σ cᵢ [Bᵢ, Bⱼ] = 0` for every `j`.
pub fn center(alg: &MatrixAlgebra, tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    let b = alg.dim();
    let basis = alg.basis();
    let mut comms: Vec<Vec<Option<ComplexMatrix>>> = vec![vec![None; b]; b];
    for i in 0..b {
        for j in (i + 1)..b {
            comms[i][j] = Some(linalg::commutator(&basis[i], &basis[j]));
        }
    }
    let get = |i: usize, j: usize| -> Option<ComplexMatrix> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => comms[i][j].clone(),
            std::cmp::Ordering::Greater => comms[j][i].clone().map(|m| -m),
            std::cmp::Ordering::Equal => None,
        }
    };
    // gram[i, i'] = Σ_j ⟨[Bᵢ,Bⱼ], [Bᵢ',Bⱼ]⟩
    let mut gram = linalg::zeros(b, b);
    for j in 0..b {
        let col: Vec<Option<ComplexMatrix>> = (0..b).map(|i| get(i, j)).collect();
        for i in 0..b {
            let Some(ci) = &col[i] else { continue };
            for k in i..b {
                let Some(ck) = &col[k] else { continue };
                let v = linalg::hs_inner(ci, ck);
                gram[(i, k)] += v;
                if k != i {
                    gram[(k, i)] += v.conj();
                }
            }
        }
    }
    let ns = null_space_of_gram(&gram, tol.rank_cutoff);
    let elems: Vec<ComplexMatrix> = (0..ns.ncols())
        .map(|k| alg.element(ns.column(k).as_slice()))
        .collect();
    MatrixAlgebra::from_spanning_unital(alg.space_dim(), &elems, tol)
}

/// Orthonormal basis of the intersection of two spans: eigenvectors with
/// eigenvalue 1 of the compression of `P_b` to the span of `a`.
pub fn subspace_intersect(a: &MatrixAlgebra, b: &MatrixAlgebra, tol: &ToleranceConfig) -> Result<MatrixAlgebra> {
    if a.space_dim() != b.space_dim() {
        return Err(Error::DimensionMismatch(format!(
            "intersecting algebras on C^{} and C^{}",
            a.space_dim(),
            b.space_dim()
        )));
    }
    let n = a.space_dim();
    let m = a.stacked.adjoint() * &b.stacked;
    let h = &m * m.adjoint();
    let (vals, vecs) = eigh(&h);
    let scale = c((n as f64).sqrt(), 0.0);
    let mut elems = Vec::new();
    for (k, &lambda) in vals.iter().enumerate() {
        if 1.0 - lambda <= tol.abs_tol {
            let w = &a.stacked * vecs.column(k);
            elems.push(unvectorize(w.as_slice(), n, n) * scale);
        }
    }
    MatrixAlgebra::from_spanning_unital(n, &elems, tol)
}

/// The minimal projections of the center of `alg`, mutually orthogonal and
/// summing to the identity.
///
/// Computed by simultaneous eigenspace refinement over the Hermitian parts of
/// the center's basis. Output is sorted by the first index in each
/// projection's support.
pub fn minimal_central_projections(alg: &MatrixAlgebra, tol: &ToleranceConfig) -> Result<Vec<ComplexMatrix>> {
    let z = center(alg, tol)?;
    minimal_projections_of_abelian(&z, tol)
}

/// Minimal projections of an abelian algebra (its joint spectral projections).
pub fn minimal_projections_of_abelian(z: &MatrixAlgebra, tol: &ToleranceConfig) -> Result<Vec<ComplexMatrix>> {
    let defect = z.commutativity_defect();
    if defect > tol.solved_tol() {
        return Err(Error::NotAbelian { residual: defect });
    }
    let n = z.space_dim();
    let mut hermitians = Vec::new();
    for b in z.basis() {
        hermitians.push(linalg::hermitian_part(b));
        hermitians.push((b - b.adjoint()) * c(0.0, -0.5));
    }
    let mut blocks: Vec<ComplexMatrix> = vec![linalg::identity(n)];
    for h in &hermitians {
        if linalg::norm(h) <= tol.abs_tol {
            continue;
        }
        let mut refined = Vec::new();
        for q in &blocks {
            let local = q.adjoint() * h * q;
            let (vals, vecs) = eigh(&local);
            let spread = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
            for range in cluster_sorted(&vals, tol.cluster_gap() * spread) {
                let cols: Vec<usize> = range.collect();
                refined.push(q * linalg::select_columns(&vecs, &cols));
            }
        }
        blocks = refined;
    }
    let mut projections: Vec<ComplexMatrix> = blocks.iter().map(linalg::range_projection).collect();
    projections.sort_by_key(first_support_index);
    let sum = projections.iter().fold(linalg::zeros(n, n), |acc, p| acc + p);
    let miss = linalg::dist(&sum, &linalg::identity(n));
    if miss > tol.solved_tol() {
        return Err(Error::Inconsistent { what: "central projections do not sum to 1".into(), residual: miss });
    }
    Ok(projections)
}

fn first_support_index(p: &ComplexMatrix) -> usize {
    (0..p.nrows()).find(|&k| p[(k, k)].re > 1e-6).unwrap_or(p.nrows())
}
