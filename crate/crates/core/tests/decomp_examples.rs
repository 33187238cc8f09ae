use cpsector::algebra::MatrixAlgebra;
use cpsector::catalog::{counting, delta, depolarizing, identity_map, trace_map, vector_state};
use cpsector::cpmap::{relative_commutant, stinespring_for, CPMap};
use cpsector::decomp::*;
use cpsector::linalg::{self, c, identity, ComplexMatrix};
use cpsector::tolerance::ToleranceConfig;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn is_projection(r: &ComplexMatrix) -> bool {
    linalg::dist(&(r * r), r) < 1e-8 && linalg::dist(r, &r.adjoint()) < 1e-8
}

#[test]
fn order_examples() {
    let t = depolarizing();
    assert!(order_leq(&t, &t, &tol()).unwrap().leq);
    assert!(order_leq(&t.scaled(0.5), &t, &tol()).unwrap().leq);
    let half_trace = trace_map(2).scaled(0.5);
    let cert = order_leq(&vector_state(2, 0), &half_trace, &tol()).unwrap();
    assert!(!cert.leq);
    // ½tr − ω_{e1} = ½(ω_{e2} − ω_{e1}); its Gram matrix has eigenvalue −½·2
    assert!((cert.min_eigenvalue + 1.0).abs() < 1e-10, "{}", cert.min_eigenvalue);
}

#[test]
fn rn_derivative_examples() {
    let t = depolarizing();
    let rep = stinespring_for(&t, &tol()).unwrap();
    let d = rep.dilation_dim();
    let r = rn_derivative(&t, &t, &rep, &tol()).unwrap();
    assert!(linalg::dist(&r, &identity(d)) < 1e-9);
    let r = rn_derivative(&t.scaled(0.5), &t, &rep, &tol()).unwrap();
    assert!(linalg::dist(&r, &(identity(d) * c(0.5, 0.0))) < 1e-9);

    let tr = trace_map(2);
    let rep = stinespring_for(&tr, &tol()).unwrap();
    let w1 = vector_state(2, 0);
    let r = rn_derivative(&w1, &tr, &rep, &tol()).unwrap();
    assert!(is_projection(&r));
    // the range of R carries the dilation of ω_{e1}, which is C²
    assert!((linalg::trace(&r).re - 2.0).abs() < 1e-9);
    for x in tr.domain().basis() {
        let got = rep.v().adjoint() * &r * rep.pi(x) * rep.v();
        assert!((got[(0, 0)] - x[(0, 0)]).norm() < 1e-9);
    }
}

#[test]
fn rn_rejects_undominated() {
    let tr = trace_map(2);
    let rep = stinespring_for(&tr, &tol()).unwrap();
    assert!(rn_derivative(&tr.scaled(2.0), &tr, &rep, &tol()).is_err());
}

#[test]
fn cp_from_operator_examples() {
    let t = depolarizing();
    let rep = stinespring_for(&t, &tol()).unwrap();
    let d = rep.dilation_dim();
    let one = cp_from_operator(&t, &rep, &identity(d), &tol()).unwrap();
    assert!(one.distance(&t) < 1e-9);
    let zero = cp_from_operator(&t, &rep, &linalg::zeros(d, d), &tol()).unwrap();
    assert!(zero.images().iter().all(|m| linalg::norm(m) < 1e-12));
    // outside [0, 1]
    assert!(cp_from_operator(&t, &rep, &(identity(d) * c(2.0, 0.0)), &tol()).is_err());
}

#[test]
fn orthogonality_examples() {
    let r = is_orthogonal(&vector_state(2, 0), &vector_state(2, 1), &tol()).unwrap();
    assert!(r.orthogonal && r.dims_additive);
    assert_eq!(r.dims, [2, 2, 4]);

    let t = depolarizing();
    let r = is_orthogonal(&t, &t, &tol()).unwrap();
    assert!(!r.orthogonal && !r.dims_additive);
    assert!((r.projection_defect - 0.25 * 8f64.sqrt()).abs() < 1e-9);

    let r = is_orthogonal(&delta(2, 0), &delta(2, 1), &tol()).unwrap();
    assert!(r.orthogonal && r.dims_additive);
    assert_eq!(r.dims, [1, 1, 2]);
}

#[test]
fn disjointness_examples() {
    let r = is_disjoint(&delta(2, 0), &delta(2, 1), &tol()).unwrap();
    assert!(r.disjoint && r.orthogonal);
    assert_eq!(r.intertwiner_dim, 0);

    let r = is_disjoint(&vector_state(2, 0), &vector_state(2, 1), &tol()).unwrap();
    assert!(r.orthogonal && !r.disjoint);
    assert_eq!(r.intertwiner_dim, 1);

    let t = depolarizing();
    let r = is_disjoint(&t, &t, &tol()).unwrap();
    assert!(!r.disjoint && !r.orthogonal);
    assert!(r.intertwiner_dim > 0);
}

#[test]
fn quasi_equivalence_examples() {
    let t = depolarizing();
    assert!(is_quasi_equivalent(&t, &t.scaled(2.0), &tol()).unwrap().quasi_equivalent);
    let r = is_quasi_equivalent(&vector_state(2, 0), &vector_state(2, 1), &tol()).unwrap();
    assert!(r.quasi_equivalent);
    assert_eq!(r.class_dims, vec![2]);
    let r = is_quasi_equivalent(&delta(2, 0), &delta(2, 1), &tol()).unwrap();
    assert!(!r.quasi_equivalent);
    // depolarizing dilation is the defining irrep with multiplicity 4
    let r = is_quasi_equivalent(&t, &identity_map(2), &tol()).unwrap();
    assert!(r.quasi_equivalent);
    assert_eq!(r.classes_first, vec![(0, 4)]);
}

fn omega_measure() -> CPMeasure {
    CPMeasure::new(vec![vector_state(2, 0), vector_state(2, 1)], trace_map(2), &tol()).unwrap()
}

#[test]
fn kappa_examples() {
    let t = depolarizing();
    let rep = stinespring_for(&t, &tol()).unwrap();
    let d = rep.dilation_dim();
    let single = CPMeasure::new(vec![t.clone()], t.clone(), &tol()).unwrap();
    let k = kappa(&single, &rep, &tol()).unwrap();
    assert!(linalg::dist(&k.operators()[0], &identity(d)) < 1e-9);

    let halves = CPMeasure::from_values(vec![t.scaled(0.5), t.scaled(0.5)], &tol()).unwrap();
    let k = kappa(&halves, &rep, &tol()).unwrap();
    for r in k.operators() {
        assert!(linalg::dist(r, &(identity(d) * c(0.5, 0.0))) < 1e-9);
    }

    let mu = omega_measure();
    let rep = stinespring_for(mu.barycenter(), &tol()).unwrap();
    let k = kappa(&mu, &rep, &tol()).unwrap();
    assert!(k.operators().iter().all(is_projection));
    assert!(linalg::norm(&(&k.operators()[0] * &k.operators()[1])) < 1e-9);
    assert_eq!(mu.weights(), &[1.0, 1.0]);
}

#[test]
fn orthogonal_measure_examples() {
    let r = is_orthogonal_measure(&omega_measure(), &tol()).unwrap();
    assert!(r.orthogonal && r.splits_orthogonal && r.exhaustive);
    assert_eq!(r.splits_checked, 1);

    let t = depolarizing();
    let halves = CPMeasure::from_values(vec![t.scaled(0.5), t.scaled(0.5)], &tol()).unwrap();
    let r = is_orthogonal_measure(&halves, &tol()).unwrap();
    assert!(!r.orthogonal && !r.splits_orthogonal);

    let single = CPMeasure::from_values(vec![t], &tol()).unwrap();
    let r = is_orthogonal_measure(&single, &tol()).unwrap();
    assert!(r.orthogonal && r.splits_orthogonal);
    assert_eq!(r.splits_checked, 0);
}

#[test]
fn measure_from_abelian_examples() {
    let t = trace_map(2);
    let rep = stinespring_for(&t, &tol()).unwrap();
    let d = rep.dilation_dim();
    let mu = measure_from_abelian(&MatrixAlgebra::scalars(d), &t, &rep, &tol()).unwrap();
    assert_eq!(mu.atoms(), 1);
    assert!(mu.values()[0].distance(&t) < 1e-9);

    // the two κ projections of (ω_{e1}, ω_{e2}) regenerate that measure
    let k = kappa(&omega_measure(), &rep, &tol()).unwrap();
    let b = MatrixAlgebra::new(d, k.operators(), &tol()).unwrap();
    let back = measure_from_abelian(&b, &t, &rep, &tol()).unwrap();
    assert_eq!(back.atoms(), 2);
    let w = [vector_state(2, 0), vector_state(2, 1)];
    for v in back.values() {
        assert!(w.iter().any(|x| x.distance(v) < 1e-9));
    }

    // three orthogonal blocks: the counting functional on C³
    let t = counting(3);
    let rep = stinespring_for(&t, &tol()).unwrap();
    let rc = relative_commutant(&t, &rep, &tol()).unwrap();
    assert_eq!(rc.dim(), 3);
    let mu = measure_from_abelian(&rc, &t, &rep, &tol()).unwrap();
    assert_eq!(mu.atoms(), 3);
    assert!(is_orthogonal_measure(&mu, &tol()).unwrap().orthogonal);

    // a non-abelian algebra is refused
    let rc = relative_commutant(&trace_map(2), &rep_of(&trace_map(2)), &tol()).unwrap();
    assert!(measure_from_abelian(&rc, &trace_map(2), &rep_of(&trace_map(2)), &tol()).is_err());
}

fn rep_of(t: &CPMap) -> cpsector::cpmap::StinespringRep {
    stinespring_for(t, &tol()).unwrap()
}

#[test]
fn subcentral_examples() {
    let r = is_subcentral(&omega_measure(), &tol()).unwrap();
    assert!(r.orthogonal && !r.subcentral && !r.splits_disjoint);

    let deltas = CPMeasure::new(vec![delta(2, 0), delta(2, 1)], counting(2), &tol()).unwrap();
    let r = is_subcentral(&deltas, &tol()).unwrap();
    assert!(r.subcentral && r.splits_disjoint);

    let single = CPMeasure::from_values(vec![depolarizing()], &tol()).unwrap();
    let r = is_subcentral(&single, &tol()).unwrap();
    assert!(r.subcentral && r.splits_disjoint);
}

#[test]
fn central_decomposition_examples() {
    let dec = central_decomposition(&identity_map(2), &tol()).unwrap();
    assert_eq!(dec.measure.atoms(), 1);

    let dec = central_decomposition(&counting(2), &tol()).unwrap();
    assert_eq!(dec.measure.atoms(), 2);
    assert!(dec.pairwise_disjoint);
    let want = [delta(2, 0), delta(2, 1)];
    for (v, w) in dec.measure.values().iter().zip(&want) {
        assert!(v.distance(w) < 1e-9);
    }

    // nontrivial commutant but trivial 𝒵
    let dec = central_decomposition(&trace_map(2), &tol()).unwrap();
    assert_eq!(dec.measure.atoms(), 1);
    assert_eq!(dec.center_dim, 1);
}

#[test]
fn tomita_examples() {
    let t = trace_map(2);
    let rep = stinespring_for(&t, &tol()).unwrap();
    let d = rep.dilation_dim();
    let trivial = CPMeasure::from_values(vec![t.clone()], &tol()).unwrap();
    let mu = omega_measure();
    let k = kappa(&mu, &rep, &tol()).unwrap();
    let two = MatrixAlgebra::new(d, k.operators(), &tol()).unwrap();
    let report = tomita_correspondence_check(
        &t,
        &[trivial, mu],
        &[MatrixAlgebra::scalars(d), two],
        &tol(),
    )
    .unwrap();
    assert!(report.ok(), "{report:?}");
    assert_eq!(report.pairs_checked, 8);
}

#[test]
fn coarsening_lattice_on_four_atoms() {
    let fine = CPMeasure::new((0..4).map(|k| delta(4, k)).collect(), counting(4), &tol()).unwrap();
    let parts = set_partitions(4);
    assert_eq!(parts.len(), 15);
    let measures: Vec<CPMeasure> = parts.iter().map(|p| fine.coarsen(p, &tol()).unwrap()).collect();
    let t = counting(4);
    let rep = stinespring_for(&t, &tol()).unwrap();
    let algebras: Vec<MatrixAlgebra> = measures
        .iter()
        .map(|m| MatrixAlgebra::new(rep.dilation_dim(), kappa(m, &rep, &tol()).unwrap().operators(), &tol()).unwrap())
        .collect();
    let report = tomita_correspondence_check(&t, &measures, &algebras, &tol()).unwrap();
    assert!(report.ok(), "{report:?}");
    assert_eq!(report.pairs_checked, 2 * 15 * 15);
}
