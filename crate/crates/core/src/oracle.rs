//! Independent reference computations used to cross-check the main code
//! paths in tests and in the self-test.
//!
//! Nothing here calls into nalgebra's decompositions: eigenvalues come from a
//! cyclic Jacobi iteration on the real symmetric embedding
//! `[[Re H, −Im H], [Im H, Re H]]` of a Hermitian `H`, whose spectrum is that
//! of `H` with every eigenvalue doubled.

use crate::linalg::{ComplexMatrix, ONE, ZERO};
use num_complex::Complex64;

/// Eigenvalues of a real symmetric matrix (row-major, `n × n`), ascending.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|k| a[k * n + k]).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigenvalues of a Hermitian matrix, ascending, via the real embedding.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.nrows();
    let big = 2 * n;
    let mut a = vec![0.0; big * big];
    for i in 0..n {
        for j in 0..n {
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            a[i * big + j] = z.re;
            a[(i + n) * big + (j + n)] = z.re;
            a[i * big + (j + n)] = -z.im;
            a[(i + n) * big + j] = z.im;
        }
    }
    let doubled = jacobi_eigenvalues(a, big);
    doubled.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Number of eigenvalues above `rel_cutoff` times the largest.
pub fn numerical_rank(vals: &[f64], rel_cutoff: f64) -> usize {
    let top = vals.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    vals.iter().filter(|&&v| v > rel_cutoff * top).count()
}

/// Choi matrix `Σ_ij E_ij ⊗ T(E_ij)` of a map on `M_n` with values in `M_m`.
pub fn choi_matrix(map: impl Fn(&ComplexMatrix) -> ComplexMatrix, n: usize, m: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n * m, n * m);
    for i in 0..n {
        for j in 0..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(i, j)] = ONE;
            let img = map(&e);
            for a in 0..m {
                for b in 0..m {
                    out[(i * m + a, j * m + b)] = img[(a, b)];
                }
            }
        }
    }
    out
}

pub fn choi_rank(map: impl Fn(&ComplexMatrix) -> ComplexMatrix, n: usize, m: usize, rel_cutoff: f64) -> usize {
    numerical_rank(&hermitian_eigenvalues(&choi_matrix(map, n, m)), rel_cutoff)
}

/// Minimum eigenvalue of the Choi matrix; negative iff the map is not CP.
pub fn choi_min_eigenvalue(map: impl Fn(&ComplexMatrix) -> ComplexMatrix, n: usize, m: usize) -> f64 {
    hermitian_eigenvalues(&choi_matrix(map, n, m))[0]
}

/// Dimension of the solution space of `S·A_k = B_k·S` for all `k`
/// (`S` is `q × p`), by explicit entrywise assembly of the constraints.
pub fn intertwiner_dimension(left: &[ComplexMatrix], right: &[ComplexMatrix]) -> usize {
    assert_eq!(left.len(), right.len());
    if left.is_empty() {
        return 0;
    }
    let p = left[0].nrows();
    let q = right[0].nrows();
    let vars = q * p;
    if vars == 0 {
        return 0;
    }
    // gram = Σ over constraint rows of row* row
    let mut gram = ComplexMatrix::zeros(vars, vars);
    let var = |r: usize, c: usize| r * p + c;
    for (a, b) in left.iter().zip(right) {
        for r in 0..q {
            for cc in 0..p {
                // (S A − B S)_{r,cc} = Σ_k S_{r,k} A_{k,cc} − Σ_k B_{r,k} S_{k,cc}
                let mut row = vec![ZERO; vars];
                for k in 0..p {
                    row[var(r, k)] += a[(k, cc)];
                }
                for k in 0..q {
                    row[var(k, cc)] -= b[(r, k)];
                }
                for i in 0..vars {
                    if row[i] == ZERO {
                        continue;
                    }
                    for j in 0..vars {
                        gram[(i, j)] += row[i].conj() * row[j];
                    }
                }
            }
        }
    }
    let vals = hermitian_eigenvalues(&gram);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    vals.iter().filter(|&&v| v <= 1e-10 * top.max(1e-300)).count()
}

/// Dimension of the commutant of a set of `n × n` matrices.
pub fn commutant_dimension(set: &[ComplexMatrix], n: usize) -> usize {
    if set.is_empty() {
        return n * n;
    }
    intertwiner_dimension(set, set)
}

/// Gram matrix `⟨x_k | T(B_i* B_j) x_l⟩` assembled from an explicit map
/// closure, independent of any stored image table.
pub fn brute_force_gram(
    map: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    basis: &[ComplexMatrix],
    m: usize,
) -> ComplexMatrix {
    let b = basis.len();
    let mut g = ComplexMatrix::zeros(b * m, b * m);
    for i in 0..b {
        for j in 0..b {
            let img = map(&(basis[i].adjoint() * &basis[j]));
            for k in 0..m {
                for l in 0..m {
                    g[(i * m + k, j * m + l)] = img[(k, l)];
                }
            }
        }
    }
    g
}

pub fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1, 3
        let v = jacobi_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_embedding_spectrum() {
        // Pauli Y has eigenvalues ±1
        let y = crate::linalg::pauli_y();
        let v = hermitian_eigenvalues(&y);
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_choi_has_negative_eigenvalue() {
        let lam = choi_min_eigenvalue(|x| x.transpose(), 2, 2);
        assert!((lam + 1.0).abs() < 1e-12);
    }
}
