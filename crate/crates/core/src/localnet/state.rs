use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cpmap::{CPMap, KrausMap, LinearMap};
use crate::error::{Error, Result};
use crate::linalg::{self, c, eigh, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

use super::{LatticeNet, RegionPair, Split, MATERIALIZE_LIMIT};

/// Nets up to this global dimension are verified over full bases; larger
/// ones with random probes.
pub const EXHAUSTIVE_LIMIT: usize = 16;
const PROBES: usize = 4;
const PROBE_SEED: u64 = 0x6c6f_6361_6c21;

/// A density matrix: self-adjoint, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!("shape {:?} is not square", matrix.shape())));
        }
        let herm = linalg::dist(&matrix, &matrix.adjoint());
        if herm > tol.abs_tol {
            return Err(Error::InvalidState(format!("not self-adjoint (defect {herm:.3e})")));
        }
        let (vals, _) = eigh(&matrix);
        if vals[0] < -tol.abs_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {:.3e}", vals[0])));
        }
        let tr = linalg::trace(&matrix);
        if (tr - linalg::ONE).norm() > tol.abs_tol {
            return Err(Error::InvalidState(format!("trace {:.6} is not 1", tr.re)));
        }
        Ok(Self { matrix: linalg::hermitian_part(&matrix) })
    }

    pub fn pure(psi: &[num_complex::Complex64], tol: &ToleranceConfig) -> Result<Self> {
        let v = linalg::ComplexVector::from_column_slice(psi);
        let nrm = v.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = v / c(nrm, 0.0);
        Self::new(&v * v.adjoint(), tol)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// The local state `T(X) = 1 ⊗ Tr_inner[(φ ⊗ 1) X]`: it is `φ` on the
/// inner region and the identity on everything outside it.
///
/// Application runs through the partial trace in `O(N²)`; the Kraus family
/// `C_{jk} = √p_k |ψ_k⟩⟨j| ⊗ 1` is built on request.
#[derive(Clone, Debug)]
pub struct LocalState {
    net: LatticeNet,
    pair: RegionPair,
    phi: DensityState,
    split: Split,
    report: LocalStateReport,
}

impl LocalState {
    pub fn net(&self) -> &LatticeNet {
        &self.net
    }

    pub fn pair(&self) -> &RegionPair {
        &self.pair
    }

    pub fn phi(&self) -> &DensityState {
        &self.phi
    }

    /// Verification performed at construction.
    pub fn report(&self) -> &LocalStateReport {
        &self.report
    }

    pub fn kraus_ops(&self, tol: &ToleranceConfig) -> Result<Vec<ComplexMatrix>> {
        let (vals, vecs) = eigh(self.phi.matrix());
        let d = self.phi.dim();
        let n = self.net.global_dim();
        let keep: Vec<usize> = (0..d).filter(|&k| vals[k] > tol.rank_cutoff).collect();
        let count = keep.len() * d;
        if count.saturating_mul(n * n) > MATERIALIZE_LIMIT {
            return Err(Error::DimensionCap { dim: count * n * n, cap: MATERIALIZE_LIMIT });
        }
        let mut ops = Vec::with_capacity(count);
        for &k in &keep {
            let psi = vecs.column(k) * c(vals[k].sqrt(), 0.0);
            for j in 0..d {
                let mut local = linalg::zeros(d, d);
                local.set_column(j, &psi);
                ops.push(self.split.embed(&local));
            }
        }
        Ok(ops)
    }

    pub fn kraus_map(&self, tol: &ToleranceConfig) -> Result<KrausMap> {
        let n = self.net.global_dim();
        KrausMap::new(n, n, self.kraus_ops(tol)?)
    }

    /// The state as a [`CPMap`] on the global algebra, carrying its Kraus family.
    pub fn to_cpmap(&self, tol: &ToleranceConfig) -> Result<CPMap> {
        let alg = self.net.algebra_of(&self.net.all())?;
        CPMap::from_kraus(alg.clone(), alg, self.kraus_ops(tol)?, tol)
    }
}

impl LinearMap for LocalState {
    fn input_dim(&self) -> usize {
        self.net.global_dim()
    }

    fn output_dim(&self) -> usize {
        self.net.global_dim()
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.net.global_dim();
        assert_eq!(x.shape(), (n, n), "local state applied to wrong shape");
        let s = &self.split;
        let phi = self.phi.matrix();
        // Y[r, r'] = Σ φ[a', a] X[(a, r), (a', r')]
        let mut y = linalg::zeros(s.rest_dim, s.rest_dim);
        for h in 0..n {
            let (b, rh) = (s.region_idx[h], s.rest_idx[h]);
            for g in 0..n {
                let z = x[(g, h)];
                if z != linalg::ZERO {
                    y[(s.rest_idx[g], rh)] += phi[(b, s.region_idx[g])] * z;
                }
            }
        }
        let mut out = linalg::zeros(n, n);
        for h in 0..n {
            let (b, rh) = (s.region_idx[h], s.rest_idx[h]);
            for r in 0..s.rest_dim {
                out[(s.groups[r][b], h)] = y[(r, rh)];
            }
        }
        out
    }
}

/// Builds the local state of `φ` on `Λ = (O₁, O₂)` and verifies both
/// defining conditions.
pub fn local_state(net: &LatticeNet, pair: &RegionPair, phi: &DensityState, tol: &ToleranceConfig) -> Result<LocalState> {
    let inner = pair.inner();
    let d = net.region_dim(inner);
    if phi.dim() != d {
        return Err(Error::InvalidState(format!("state is {}×{0}, inner region has dimension {d}", phi.dim())));
    }
    check_pair(net, pair)?;
    let mut state = LocalState {
        net: net.clone(),
        pair: pair.clone(),
        phi: phi.clone(),
        split: net.split(inner),
        report: LocalStateReport::default(),
    };
    state.report = verify_local_state(net, pair, &state, tol)?;
    Ok(state)
}

fn check_pair(net: &LatticeNet, pair: &RegionPair) -> Result<()> {
    if let Some(&s) = pair.outer().sites().iter().find(|&&s| s >= net.sites()) {
        return Err(Error::InvalidRegion(format!("site {s} outside the net")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VerificationMethod {
    #[default]
    Exhaustive,
    Probe {
        probes: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LocalStateReport {
    /// `‖T(1) − 1‖`.
    pub unital_defect: f64,
    /// `max ‖T(AB) − T(A)B‖` over `A` global, `B ∈ 𝒜(O₂')`.
    pub condition1: f64,
    /// `max ‖T(A) − φ(A)1‖` over the basis of `𝒜(O₁)`.
    pub condition2: f64,
    /// The state read off from `T` on `𝒜(O₁)`.
    pub implied_state: ComplexMatrix,
    pub implied_state_valid: bool,
    pub method: VerificationMethod,
    pub passes: bool,
}

fn method_for(n: usize) -> VerificationMethod {
    if n <= EXHAUSTIVE_LIMIT {
        VerificationMethod::Exhaustive
    } else {
        VerificationMethod::Probe { probes: PROBES }
    }
}

/// Scales a probe to Frobenius norm `√N`, the norm of a basis element.
fn normalized(x: ComplexMatrix) -> ComplexMatrix {
    let n = x.nrows() as f64;
    let f = linalg::norm(&x);
    if f == 0.0 {
        x
    } else {
        x * c(n.sqrt() / f, 0.0)
    }
}

/// Checks `T(AB) = T(A)B` for `B ∈ 𝒜(O₂')` and `T(A) = φ(A)·1` for
/// `A ∈ 𝒜(O₁)`, and recovers `φ`.
///
/// Up to global dimension 16 condition (1) runs over full bases. Above that
/// it runs on random probes `A` and `B` from the respective algebras, which
/// detect a nonzero bilinear defect with probability one.
pub fn verify_local_state(
    net: &LatticeNet,
    pair: &RegionPair,
    t: &dyn LinearMap,
    tol: &ToleranceConfig,
) -> Result<LocalStateReport> {
    check_pair(net, pair)?;
    let n = net.global_dim();
    if t.input_dim() != n || t.output_dim() != n {
        return Err(Error::DimensionMismatch(format!("map must act on the global space C^{n}")));
    }
    let id = linalg::identity(n);
    let unital_defect = linalg::dist(&t.apply(&id), &id);

    let global = net.local_algebra(&net.all());
    let outside = net.complement(pair.outer());
    let comp = net.local_algebra(&outside);
    let comp_split = net.split(&outside);
    let global_split = net.split(&net.all());
    let method = method_for(n);
    let (a_list, b_list): (Vec<ComplexMatrix>, Vec<ComplexMatrix>) = match method {
        VerificationMethod::Exhaustive => (
            (0..global.dim()).map(|k| global_split.embed(&global.element(k))).collect(),
            (0..comp.dim()).map(|k| comp_split.embed(&comp.element(k))).collect(),
        ),
        VerificationMethod::Probe { probes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
            let a = (0..probes).map(|_| normalized(global_split.embed(&global.random_element(&mut rng)))).collect();
            let b = (0..probes).map(|_| normalized(comp_split.embed(&comp.random_element(&mut rng)))).collect();
            (a, b)
        }
    };
    let mut condition1: f64 = 0.0;
    for a in &a_list {
        let ta = t.apply(a);
        for b in &b_list {
            let lhs = t.apply(&(a * b));
            condition1 = condition1.max(linalg::dist(&lhs, &(&ta * b)));
        }
    }

    let inner = net.local_algebra(pair.inner());
    let inner_split = net.split(pair.inner());
    let d_in = inner.region_dim();
    let mut condition2: f64 = 0.0;
    let mut implied = linalg::zeros(d_in, d_in);
    for k in 0..inner.dim() {
        let local = inner.element(k);
        let img = t.apply(&inner_split.embed(&local));
        let value = linalg::trace(&img) / c(n as f64, 0.0);
        condition2 = condition2.max(linalg::dist(&img, &(&id * value)));
        implied += local.adjoint() * (value / c(d_in as f64, 0.0));
    }
    let implied_state_valid = DensityState::new(implied.clone(), tol).is_ok();
    let passes = unital_defect <= tol.abs_tol
        && condition1 <= tol.abs_tol
        && condition2 <= tol.abs_tol
        && implied_state_valid;
    Ok(LocalStateReport {
        unital_defect,
        condition1,
        condition2,
        implied_state: implied,
        implied_state_valid,
        method,
        passes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutationReport {
    /// `max ‖T₁(T₂(B)) − T₂(T₁(B))‖`.
    pub deviation: f64,
    /// The outer regions intersect, so commutation is not expected.
    pub overlapping: bool,
    pub method: VerificationMethod,
}

/// Deviation of `T₁ ∘ T₂` from `T₂ ∘ T₁` over the global algebra.
pub fn commutation_check(
    net: &LatticeNet,
    t1: &dyn LinearMap,
    pair1: &RegionPair,
    t2: &dyn LinearMap,
    pair2: &RegionPair,
) -> Result<CommutationReport> {
    check_pair(net, pair1)?;
    check_pair(net, pair2)?;
    let n = net.global_dim();
    for t in [t1, t2] {
        if t.input_dim() != n || t.output_dim() != n {
            return Err(Error::DimensionMismatch(format!("map must act on the global space C^{n}")));
        }
    }
    let overlapping = !pair1.outer().is_disjoint_from(pair2.outer());
    let global = net.local_algebra(&net.all());
    let split = net.split(&net.all());
    let method = method_for(n);
    let probes: Vec<ComplexMatrix> = match method {
        VerificationMethod::Exhaustive => (0..global.dim()).map(|k| split.embed(&global.element(k))).collect(),
        VerificationMethod::Probe { probes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
            (0..probes).map(|_| normalized(split.embed(&global.random_element(&mut rng)))).collect()
        }
    };
    let deviation = probes
        .iter()
        .map(|b| linalg::dist(&t1.apply(&t2.apply(b)), &t2.apply(&t1.apply(b))))
        .fold(0.0, f64::max);
    Ok(CommutationReport { deviation, overlapping, method })
}
