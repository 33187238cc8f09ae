use cpsector::cpmap::{stinespring_for, LinearMap};
use cpsector::linalg::{self, c, diag, identity, kron, pauli_x, pauli_z, ComplexMatrix};
use cpsector::localnet::*;
use cpsector::tolerance::ToleranceConfig;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn qubits(k: usize) -> LatticeNet {
    LatticeNet::uniform(k, 2, SiteKind::Full).unwrap()
}

fn pair(net: &LatticeNet, inner: &[usize], outer: &[usize]) -> RegionPair {
    RegionPair::new(net.region(inner).unwrap(), net.region(outer).unwrap()).unwrap()
}

fn ket0() -> DensityState {
    DensityState::new(diag(&[1.0, 0.0]), &tol()).unwrap()
}

fn ket_plus() -> DensityState {
    let s = 1.0 / 2f64.sqrt();
    DensityState::pure(&[c(s, 0.0), c(s, 0.0)], &tol()).unwrap()
}

struct GlobalDepolarizing(usize);

impl LinearMap for GlobalDepolarizing {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        identity(self.0) * (linalg::trace(x) / c(self.0 as f64, 0.0))
    }
}

struct Identity(usize);

impl LinearMap for Identity {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.clone()
    }
}

#[test]
fn pure_state_preparation_on_four_site_chain() {
    let net = qubits(4);
    let lam = pair(&net, &[1], &[0, 1, 2]);
    let t = local_state(&net, &lam, &ket0(), &tol()).unwrap();
    assert!(t.report().passes);
    assert_eq!(t.report().method, VerificationMethod::Exhaustive);
    let site1 = net.region(&[1]).unwrap();
    let z1 = net.embed(&site1, &pauli_z()).unwrap();
    assert!(linalg::dist(&t.apply(&z1), &identity(16)) < 1e-12);
    assert!(linalg::dist(&t.apply(&identity(16)), &identity(16)) < 1e-12);

    // T(A ⊗ B) = φ(A)·(1 ⊗ B), A on site 1, B on site 3
    let a = ComplexMatrix::from_fn(2, 2, |i, j| c(1.0 + i as f64, j as f64 - 0.5));
    let b = pauli_x();
    let ab = net.embed(&net.region(&[1, 3]).unwrap(), &kron(&a, &b)).unwrap();
    let b_glob = net.embed(&net.region(&[3]).unwrap(), &b).unwrap();
    let phi_a = a[(0, 0)];
    assert!(linalg::dist(&t.apply(&ab), &(b_glob * phi_a)) < 1e-12);
    assert!(linalg::dist(&t.report().implied_state, ket0().matrix()) < 1e-12);
}

#[test]
fn structured_application_matches_kraus_family() {
    let net = LatticeNet::new(vec![2, 3, 2], vec![SiteKind::Full, SiteKind::Full, SiteKind::Diagonal]).unwrap();
    let lam = pair(&net, &[0, 2], &[0, 1, 2]);
    let phi = DensityState::new(diag(&[0.1, 0.2, 0.3, 0.4]), &tol()).unwrap();
    let t = local_state(&net, &lam, &phi, &tol()).unwrap();
    assert!(t.report().passes, "{:?}", t.report());
    let k = t.kraus_map(&tol()).unwrap();
    assert!(linalg::dist(&k.completeness(), &identity(12)) < 1e-12);
    let x = ComplexMatrix::from_fn(12, 12, |i, j| c((i * j % 5) as f64, i as f64 - j as f64));
    assert!(linalg::dist(&t.apply(&x), &k.apply(&x)) < 1e-12);
}

#[test]
fn verification_rejects_non_local_maps() {
    let net = qubits(3);
    let lam = pair(&net, &[0], &[0, 1]);
    let r = verify_local_state(&net, &lam, &GlobalDepolarizing(8), &tol()).unwrap();
    assert!(!r.passes);
    // depolarizing erases the outside: T(B) = tr(B)/8 ≠ B for B = Z on site 2
    assert!(r.condition1 > 0.5, "{}", r.condition1);
    let r = verify_local_state(&net, &lam, &Identity(8), &tol()).unwrap();
    assert!(!r.passes && r.condition1 < 1e-12 && r.condition2 > 0.5);
}

#[test]
fn identity_passes_condition_two_on_scalar_inner_region() {
    let net = qubits(2);
    let lam = pair(&net, &[], &[0]);
    let r = verify_local_state(&net, &lam, &Identity(4), &tol()).unwrap();
    assert!(r.condition2 < 1e-12);
}

#[test]
fn commutation_examples() {
    let net = qubits(4);
    let l1 = pair(&net, &[0], &[0, 1]);
    let l2 = pair(&net, &[3], &[2, 3]);
    let t1 = local_state(&net, &l1, &ket0(), &tol()).unwrap();
    let t2 = local_state(&net, &l2, &ket_plus(), &tol()).unwrap();
    let r = commutation_check(&net, &t1, &l1, &t2, &l2).unwrap();
    assert!(!r.overlapping && r.deviation < 1e-9);
    let r = commutation_check(&net, &t1, &l1, &t1, &l1).unwrap();
    assert!(r.overlapping && r.deviation == 0.0);

    // both preparations on site 0 of a 2-site chain
    let net = qubits(2);
    let lam = pair(&net, &[0], &[0, 1]);
    let a = local_state(&net, &lam, &ket0(), &tol()).unwrap();
    let b = local_state(&net, &lam, &ket_plus(), &tol()).unwrap();
    let r = commutation_check(&net, &a, &lam, &b, &lam).unwrap();
    assert!(r.overlapping && r.deviation >= 0.1);
    assert_eq!(r.method, VerificationMethod::Exhaustive);
}

#[test]
fn pure_states_on_full_nets_are_factor_states() {
    let net = qubits(2);
    let lam = pair(&net, &[0], &[0, 1]);
    let t = local_state(&net, &lam, &ket_plus(), &tol()).unwrap().to_cpmap(&tol()).unwrap();
    let r = local_sector_analysis(&net, &lam, &t, &[], &tol()).unwrap();
    assert!(r.factor_state);
    assert_eq!((r.zfull_dim, r.theta_dim), (1, 1));
    assert_eq!(r.components.len(), 1);
    assert!(!r.zt_non_unique);
}

#[test]
fn classical_bit_splits_into_two_sectors() {
    let net = LatticeNet::new(vec![2, 2], vec![SiteKind::Diagonal, SiteKind::Full]).unwrap();
    let lam = pair(&net, &[0], &[0, 1]);
    let phi = DensityState::new(diag(&[0.3, 0.7]), &tol()).unwrap();
    let state = local_state(&net, &lam, &phi, &tol()).unwrap();
    let t = state.to_cpmap(&tol()).unwrap();
    let other = local_state(&net, &lam, &ket0(), &tol()).unwrap().to_cpmap(&tol()).unwrap();
    let r = local_sector_analysis(&net, &lam, &t, &[other], &tol()).unwrap();
    assert_eq!(r.components.len(), 2);
    assert!(r.pairwise_disjoint);
    assert!(r.barycenter_residual < 1e-8);
    assert_eq!(r.zfull_dim, 2);
    assert!(!r.factor_state);
    // the lifted center acts on the multiplicity of the output bit, not inside π_T(𝒜)''
    assert!(!r.theta_in_zfull && r.theta_dim == 2 && r.zt_projections.is_none());
    // the bit prepared in |0⟩ shares one sector with the mixture
    assert!(!r.quasi_equivalence[0][1]);
    let rep = stinespring_for(&r.components[0], &tol()).unwrap();
    assert!(rep.dilation_dim() > 0);
    // components are the bit-conditioned preparations, weighted 0.3 and 0.7
    let weights: Vec<f64> = r
        .components
        .iter()
        .map(|v| linalg::trace(&v.eval(&identity(4))).re / 4.0)
        .collect();
    assert!((weights[0] - 0.3).abs() < 1e-9 && (weights[1] - 0.7).abs() < 1e-9, "{weights:?}");
}

#[test]
fn center_outside_the_outer_region_lifts_into_the_emergent_center() {
    let net = LatticeNet::new(vec![2, 2, 2], vec![SiteKind::Full, SiteKind::Full, SiteKind::Diagonal]).unwrap();
    let lam = pair(&net, &[0], &[0, 1]);
    let t = local_state(&net, &lam, &ket_plus(), &tol()).unwrap().to_cpmap(&tol()).unwrap();
    let r = local_sector_analysis(&net, &lam, &t, &[], &tol()).unwrap();
    assert!(r.theta_in_zfull && r.factor_state);
    assert_eq!((r.zfull_dim, r.theta_dim), (2, 2));
    assert_eq!(r.components.len(), 2);
    assert!(r.pairwise_disjoint);
    assert_eq!(r.zt_projections.as_ref().map(Vec::len), Some(1));
}
