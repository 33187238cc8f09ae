use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix};
use num_complex::Complex64;

use super::LinearMap;

/// `X ↦ Σⱼ Cⱼ* X Cⱼ` with `Cⱼ : C^m → C^n` (shape `n × m`).
///
/// Products skip zero entries of the Kraus operators, so operators of the
/// form `|ψ⟩⟨j| ⊗ 1` on large tensor spaces apply in `O(n²)` time.
#[derive(Clone, Debug)]
pub struct KrausMap {
    n: usize,
    m: usize,
    ops: Vec<ComplexMatrix>,
    // per op, per column: nonzero (row, value)
    sparse: Vec<Vec<Vec<(usize, Complex64)>>>,
}

impl KrausMap {
    pub fn new(n: usize, m: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Empty("Kraus family".into()));
        }
        for (k, op) in ops.iter().enumerate() {
            if op.shape() != (n, m) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} has shape {:?}, expected {n}×{m}",
                    op.shape()
                )));
            }
        }
        let sparse = ops.iter().map(column_nonzeros).collect();
        Ok(Self { n, m, ops, sparse })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub(crate) fn scaled(&self, a: f64) -> Self {
        let s = c(a.max(0.0).sqrt(), 0.0);
        let ops = self.ops.iter().map(|op| op * s).collect();
        Self::new(self.n, self.m, ops).expect("same shapes")
    }

    pub(crate) fn concat(&self, other: &Self) -> Self {
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        Self::new(self.n, self.m, ops).expect("same shapes")
    }

    /// `Σⱼ Cⱼ*Cⱼ`, equal to the image of the identity.
    pub fn completeness(&self) -> ComplexMatrix {
        self.ops.iter().fold(linalg::zeros(self.m, self.m), |acc, op| acc + op.adjoint() * op)
    }
}

fn column_nonzeros(op: &ComplexMatrix) -> Vec<Vec<(usize, Complex64)>> {
    (0..op.ncols())
        .map(|col| {
            op.column(col)
                .iter()
                .enumerate()
                .filter(|(_, z)| **z != linalg::ZERO)
                .map(|(r, z)| (r, *z))
                .collect()
        })
        .collect()
}

impl LinearMap for KrausMap {
    fn input_dim(&self) -> usize {
        self.n
    }

    fn output_dim(&self) -> usize {
        self.m
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.shape(), (self.n, self.n), "Kraus map applied to wrong shape");
        let (n, m) = (self.n, self.m);
        let mut out = linalg::zeros(m, m);
        let mut xc = linalg::zeros(n, m);
        for cols in &self.sparse {
            // xc = X C
            xc.fill(linalg::ZERO);
            for (col, nz) in cols.iter().enumerate() {
                let mut dst = xc.column_mut(col);
                for &(r, v) in nz {
                    dst.axpy(v, &x.column(r), linalg::ONE);
                }
            }
            // out += C* (X C): out[a, :] += Σ_r conj(C[r,a]) xc[r, :]
            for (a, nz) in cols.iter().enumerate() {
                for &(r, v) in nz {
                    let w = v.conj();
                    for b in 0..m {
                        out[(a, b)] += w * xc[(r, b)];
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z};

    #[test]
    fn matches_dense_formula() {
        let c1 = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64 - j as f64, 0.3 * (i + j) as f64));
        let c2 = ComplexMatrix::from_fn(3, 2, |i, j| c(0.5, (i * j) as f64));
        let x = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, i as f64 - 1.0));
        let k = KrausMap::new(3, 2, vec![c1.clone(), c2.clone()]).unwrap();
        let dense = c1.adjoint() * &x * &c1 + c2.adjoint() * &x * &c2;
        assert!(linalg::dist(&k.apply(&x), &dense) < 1e-12);
    }

    #[test]
    fn depolarizing_family() {
        let h = c(0.5, 0.0);
        let ops = vec![linalg::identity(2) * h, pauli_x() * h, pauli_y() * h, pauli_z() * h];
        let k = KrausMap::new(2, 2, ops).unwrap();
        let x = ComplexMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, j as f64));
        let want = linalg::identity(2) * (linalg::trace(&x) * c(0.5, 0.0));
        assert!(linalg::dist(&k.apply(&x), &want) < 1e-12);
        assert!(linalg::dist(&k.completeness(), &linalg::identity(2)) < 1e-12);
    }

    #[test]
    fn rejects_empty_and_bad_shapes() {
        assert!(matches!(KrausMap::new(2, 2, vec![]), Err(Error::Empty(_))));
        assert!(matches!(KrausMap::new(2, 2, vec![linalg::identity(3)]), Err(Error::DimensionMismatch(_))));
    }
}
