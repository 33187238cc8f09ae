//! Dense complex linear algebra helpers shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Vectorization is column-major
//! (the native nalgebra storage order), so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix; the carrier for operators, states and Choi blocks.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Matrix unit `E_ij` of size `rows × cols`.
pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(rows, cols);
    m[(i, j)] = ONE;
    m
}

pub fn diag(entries: &[f64]) -> ComplexMatrix {
    let n = entries.len();
    let mut m = zeros(n, n);
    for (k, &e) in entries.iter().enumerate() {
        m[(k, k)] = c(e, 0.0);
    }
    m
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
}

pub fn pauli_x() -> ComplexMatrix {
    from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    from_real_rows(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Frobenius norm.
pub fn norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator (spectral) norm, the largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let h = m.adjoint() * m;
    let (vals, _) = eigh(&h);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `tr(A* B)`, the unnormalized Hilbert–Schmidt inner product.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Column-major vectorization.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(rows, cols, v)
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
///
/// The input is symmetrized first, so tiny anti-Hermitian noise is ignored.
pub fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = hermitian_part(m);
    // nalgebra's SymmetricEigen returns NaN on some exactly structured inputs
    let fm = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = h[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let eig = fm
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigendecomposition did not converge");
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let vals = order.iter().map(|&k| s[k].re).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| {
        let z = u[(i, order[j])];
        c(z.re, z.im)
    });
    (vals, vecs)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) for the null space of `k`, i.e. of `k* k`.
///
/// An eigenvalue of `k* k` counts as zero when it is at most `rank_cutoff`
/// times the largest one, with the largest one floored at 1 so that an
/// all-noise operator is recognized as zero.
pub fn null_space(k: &ComplexMatrix, rank_cutoff: f64) -> ComplexMatrix {
    let gram = k.adjoint() * k;
    null_space_of_gram(&gram, rank_cutoff)
}

/// Null space of a positive semidefinite matrix given directly.
pub fn null_space_of_gram(gram: &ComplexMatrix, rank_cutoff: f64) -> ComplexMatrix {
    let n = gram.nrows();
    let (vals, vecs) = eigh(gram);
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let cut = rank_cutoff * top;
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] <= cut).collect();
    select_columns(&vecs, &keep)
}

pub fn select_columns(m: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    let mut out = zeros(m.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        out.set_column(dst, &m.column(src));
    }
    out
}

/// Moore–Penrose pseudo-inverse with a cutoff relative to the largest
/// eigenvalue of `m m*` (squared singular values).
///
/// Goes through the Hermitian eigensolver on the smaller Gram matrix:
/// `m⁺ = m* (m m*)⁺` for wide and `(m* m)⁺ m*` for tall inputs. nalgebra's
/// complex SVD can stop short of convergence on wide matrices with
/// repeated singular values.
pub fn pinv(m: &ComplexMatrix, rank_cutoff: f64) -> ComplexMatrix {
    if m.is_empty() {
        return zeros(m.ncols(), m.nrows());
    }
    let wide = m.nrows() <= m.ncols();
    let gram = if wide { m * m.adjoint() } else { m.adjoint() * m };
    let (vals, vecs) = eigh(&gram);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rank_cutoff * top;
    let k = gram.nrows();
    let mut inv = zeros(k, k);
    for (i, &lam) in vals.iter().enumerate() {
        if lam > cut && lam > 0.0 {
            let v = vecs.column(i);
            inv += v * v.adjoint() * c(1.0 / lam, 0.0);
        }
    }
    if wide {
        m.adjoint() * inv
    } else {
        inv * m.adjoint()
    }
}

/// Incrementally built orthonormal family of vectors in `C^len`.
///
/// Vectors are added by two-pass modified Gram–Schmidt; a candidate is
/// rejected when its residual norm is at most `sqrt(rank_cutoff)` times
/// the largest candidate norm seen so far, so rounding noise in a product
/// that vanishes exactly is not mistaken for a new direction.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    len: usize,
    rank_cutoff: f64,
    vectors: Vec<ComplexVector>,
    largest: f64,
}

impl OrthoBasis {
    pub fn new(len: usize, rank_cutoff: f64) -> Self {
        Self { len, rank_cutoff, vectors: Vec::new(), largest: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<ComplexVector> {
        self.vectors
    }

    fn residual(&self, v: &ComplexVector) -> ComplexVector {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.vectors {
                let coef = q.dotc(&r);
                r.axpy(-coef, q, ONE);
            }
        }
        r
    }

    /// Distance from `v` to the current span.
    pub fn distance(&self, v: &ComplexVector) -> f64 {
        self.residual(v).norm()
    }

    /// Adds `v` if it is not (numerically) in the span. Returns whether it was added.
    pub fn push(&mut self, v: &ComplexVector) -> bool {
        assert_eq!(v.len(), self.len);
        let scale = v.norm();
        if scale == 0.0 {
            return false;
        }
        self.largest = self.largest.max(scale);
        let scale = self.largest;
        let r = self.residual(v);
        let rn = r.norm();
        if rn <= self.rank_cutoff.sqrt() * scale || rn == 0.0 {
            return false;
        }
        self.vectors.push(r / c(rn, 0.0));
        true
    }

    /// Columns of the returned matrix are the basis vectors.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = zeros(self.len, self.vectors.len());
        for (k, v) in self.vectors.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    }
}

/// Groups sorted eigenvalues into clusters separated by gaps larger than `gap`.
/// Returns index ranges into the sorted list.
pub fn cluster_sorted(vals: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    if vals.is_empty() {
        return out;
    }
    let mut start = 0;
    for k in 1..vals.len() {
        if vals[k] - vals[k - 1] > gap {
            out.push(start..k);
            start = k;
        }
    }
    out.push(start..vals.len());
    out
}

/// Projection `Q Q*` onto the column span of an isometry `Q`.
pub fn range_projection(q: &ComplexMatrix) -> ComplexMatrix {
    q * q.adjoint()
}

/// Entrywise approximate equality in Frobenius norm.
pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && dist(a, b) <= tol
}

/// Rounds away floating noise for display: entries below `eps` become zero.
pub fn chop(m: &ComplexMatrix, eps: f64) -> ComplexMatrix {
    m.map(|z| {
        c(
            if z.re.abs() < eps { 0.0 } else { z.re },
            if z.im.abs() < eps { 0.0 } else { z.im },
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_ascending() {
        let m = diag(&[3.0, -1.0, 2.0]);
        let (vals, vecs) = eigh(&m);
        assert_eq!(vals.len(), 3);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
        let recon = &vecs * diag(&vals) * vecs.adjoint();
        assert!(dist(&recon, &m) < 1e-12);
    }

    #[test]
    fn vec_identity_matches_kron() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 1.0, j as f64));
        let x = ComplexMatrix::from_fn(3, 2, |i, j| c(j as f64 - i as f64, 0.5));
        let b = ComplexMatrix::from_fn(2, 2, |i, j| c((i * j) as f64, 1.0));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_rank_one() {
        let k = from_real_rows(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&k, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!(norm(&(&k * &ns)) < 1e-12);
    }

    #[test]
    fn pinv_inverts_full_rank() {
        let m = from_real_rows(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let p = pinv(&m, 1e-10);
        assert!(dist(&(&m * &p), &identity(2)) < 1e-12);
    }

    #[test]
    fn ortho_basis_rejects_dependent_vectors() {
        let mut b = OrthoBasis::new(3, 1e-10);
        assert!(b.push(&ComplexVector::from_vec(vec![ONE, ZERO, ZERO])));
        assert!(b.push(&ComplexVector::from_vec(vec![ONE, ONE, ZERO])));
        assert!(!b.push(&ComplexVector::from_vec(vec![c(2.0, 0.0), c(-3.0, 0.0), ZERO])));
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn op_norm_of_diagonal() {
        assert!((op_norm(&diag(&[0.5, -2.0])) - 2.0).abs() < 1e-12);
    }
}
