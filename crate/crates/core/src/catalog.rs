//! Small named CP maps used throughout the examples and tests.

use crate::algebra::MatrixAlgebra;
use crate::cpmap::CPMap;
use crate::linalg::{self, c, unit};
use crate::tolerance::ToleranceConfig;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// `X ↦ X` on `M_n`.
pub fn identity_map(n: usize) -> CPMap {
    CPMap::from_kraus(MatrixAlgebra::full(n), MatrixAlgebra::full(n), vec![linalg::identity(n)], &tol())
        .expect("identity is CP")
}

/// `X ↦ tr(X)/2 · 1` on `M_2`, Kraus family `{1, X, Y, Z}/2`.
pub fn depolarizing() -> CPMap {
    let h = c(0.5, 0.0);
    let ops = vec![
        linalg::identity(2) * h,
        linalg::pauli_x() * h,
        linalg::pauli_y() * h,
        linalg::pauli_z() * h,
    ];
    CPMap::from_kraus(MatrixAlgebra::full(2), MatrixAlgebra::full(2), ops, &tol()).expect("depolarizing is CP")
}

/// The vector state `ω_{e_k}(X) = X_kk` on `M_n`, into the scalars.
pub fn vector_state(n: usize, k: usize) -> CPMap {
    CPMap::from_kraus(MatrixAlgebra::full(n), MatrixAlgebra::full(1), vec![unit(n, 1, k, 0)], &tol())
        .expect("vector state is CP")
}

/// `X ↦ tr X` on `M_n`, into the scalars.
pub fn trace_map(n: usize) -> CPMap {
    let ops = (0..n).map(|k| unit(n, 1, k, 0)).collect();
    CPMap::from_kraus(MatrixAlgebra::full(n), MatrixAlgebra::full(1), ops, &tol()).expect("trace is CP")
}

/// Evaluation `δ_k(x) = x_k` on the diagonal algebra `C^n`.
pub fn delta(n: usize, k: usize) -> CPMap {
    CPMap::from_kraus(MatrixAlgebra::diagonal(n), MatrixAlgebra::full(1), vec![unit(n, 1, k, 0)], &tol())
        .expect("evaluation is CP")
}

/// `x ↦ Σ_k x_k`, the counting functional on `C^n`.
pub fn counting(n: usize) -> CPMap {
    let ops = (0..n).map(|k| unit(n, 1, k, 0)).collect();
    CPMap::from_kraus(MatrixAlgebra::diagonal(n), MatrixAlgebra::full(1), ops, &tol()).expect("counting is CP")
}

/// The transpose on `M_2`: positive but not completely positive.
pub fn transpose() -> CPMap {
    CPMap::from_fn_unverified(MatrixAlgebra::full(2), MatrixAlgebra::full(2), |x| x.transpose(), &tol())
        .expect("transpose preserves adjoints")
}
