use cpsector::algebra::{commutant, generated_algebra, MatrixAlgebra};
use cpsector::cpmap::{relative_commutant, stinespring_for, CPMap};
use cpsector::decomp::{cp_from_operator, is_orthogonal_measure, kappa, order_leq, rn_derivative, CPMeasure};
use cpsector::io::{AlgebraSpec, MapFile};
use cpsector::linalg::{self, c};
use cpsector::oracle;
use cpsector::random;
use cpsector::tolerance::ToleranceConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn domains() -> Vec<MatrixAlgebra> {
    vec![MatrixAlgebra::full(2), MatrixAlgebra::full(3), MatrixAlgebra::blocks(&[2, 1]), MatrixAlgebra::diagonal(3)]
}

fn random_map(rng: &mut ChaCha8Rng) -> CPMap {
    let doms = domains();
    let dom = &doms[rng.random_range(0..doms.len())];
    let targets: [&[usize]; 3] = [&[2], &[1, 1], &[2, 1]];
    let tg = targets[rng.random_range(0..targets.len())];
    let count = rng.random_range(1..=4);
    random::kraus_map(dom, tg, count, false, rng, &tol()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn dilation_reconstructs_and_is_a_representation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_map(&mut rng);
        let rep = stinespring_for(&t, &tol()).unwrap();
        prop_assert!(rep.reconstruction_residual(&t) < 1e-9);
        prop_assert!(rep.multiplicativity_residual() < 1e-9);
        prop_assert_eq!(rep.spanning_rank(&tol()), rep.dilation_dim());
    }

    #[test]
    fn full_domain_dilation_matches_choi_rank(seed in any::<u64>(), n in 2usize..4, count in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random::kraus_map(&MatrixAlgebra::full(n), &[2], count, true, &mut rng, &tol()).unwrap();
        let rep = stinespring_for(&t, &tol()).unwrap();
        let rank = oracle::choi_rank(|x| t.eval(x), n, 2, 1e-9);
        prop_assert_eq!(rep.dilation_dim(), n * rank);
    }

    #[test]
    fn derivative_roundtrip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_map(&mut rng);
        let rep = stinespring_for(&t, &tol()).unwrap();
        let rc = relative_commutant(&t, &rep, &tol()).unwrap();
        let r = random::unit_interval_element(&rc, &mut rng);
        let tp = cp_from_operator(&t, &rep, &r, &tol()).unwrap();
        prop_assert!(order_leq(&tp, &t, &tol()).unwrap().leq);
        let back = rn_derivative(&tp, &t, &rep, &tol()).unwrap();
        prop_assert!(linalg::dist(&back, &r) < 1e-6, "{}", linalg::dist(&back, &r));
    }

    #[test]
    fn adding_a_cp_map_increases_the_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random::kraus_map(&MatrixAlgebra::full(2), &[2], 2, false, &mut rng, &tol()).unwrap();
        let s = random::kraus_map(&MatrixAlgebra::full(2), &[2], 1, false, &mut rng, &tol()).unwrap();
        let sum = t.add(&s).unwrap();
        prop_assert!(order_leq(&t, &sum, &tol()).unwrap().leq);
        prop_assert!(order_leq(&t, &t, &tol()).unwrap().leq);
    }

    #[test]
    fn kappa_is_positive_and_contractive(seed in any::<u64>(), atoms in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_map(&mut rng);
        let rep = stinespring_for(&t, &tol()).unwrap();
        let rc = relative_commutant(&t, &rep, &tol()).unwrap();
        let parts = random::partition_of_unity(&rc, atoms, &mut rng);
        let values = parts.iter().map(|p| cp_from_operator(&t, &rep, p, &tol()).unwrap()).collect();
        let mu = CPMeasure::new(values, t.clone(), &tol()).unwrap();
        let fam = kappa(&mu, &rep, &tol()).unwrap();
        prop_assert!(fam.sum_defect() < 1e-6);
        let f: Vec<_> = (0..atoms).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let sup = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(linalg::op_norm(&fam.apply(&f)) <= sup + 1e-9);
        for r in fam.operators() {
            prop_assert!(linalg::min_eigenvalue(r) >= -1e-9);
        }
    }

    #[test]
    fn projection_measures_are_orthogonal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_map(&mut rng);
        let rep = stinespring_for(&t, &tol()).unwrap();
        let rc = relative_commutant(&t, &rep, &tol()).unwrap();
        if let Some(ps) = random::orthogonal_projections(&rc, 2, &mut rng, &tol()) {
            let values = ps.iter().map(|p| cp_from_operator(&t, &rep, p, &tol()).unwrap()).collect();
            let mu = CPMeasure::new(values, t.clone(), &tol()).unwrap();
            let r = is_orthogonal_measure(&mu, &tol()).unwrap();
            prop_assert!(r.orthogonal && r.splits_orthogonal);
        }
    }

    #[test]
    fn bicommutant_of_rotated_block_algebra(seed in any::<u64>(), which in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alg = [MatrixAlgebra::blocks(&[2, 1]), MatrixAlgebra::diagonal(3), MatrixAlgebra::full(2).kron_identity(2), MatrixAlgebra::blocks(&[1, 1, 2])][which].clone();
        let d = alg.space_dim();
        let u = random::unitary(d, &mut rng);
        let gens: Vec<_> = alg.basis().iter().map(|b| &u * b * u.adjoint()).collect();
        let a = generated_algebra(&gens, d, &tol()).unwrap();
        prop_assert_eq!(a.dim(), alg.dim());
        let cc = commutant(&commutant(&a, &tol()).unwrap(), &tol()).unwrap();
        prop_assert!(cc.same_span(&a, 1e-8));
        prop_assert_eq!(commutant(&a, &tol()).unwrap().dim(), oracle::commutant_dimension(&gens, d));
    }

    #[test]
    fn map_files_roundtrip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random::kraus_map(&MatrixAlgebra::blocks(&[2, 1]), &[2], 2, false, &mut rng, &tol()).unwrap();
        let dom = AlgebraSpec::Blocks { blocks: vec![2, 1] };
        let file = MapFile::from_map(&t, dom.clone(), AlgebraSpec::Full);
        let text = serde_json::to_string(&file).unwrap();
        let back: MapFile = serde_json::from_str(&text).unwrap();
        prop_assert!(back.to_map(&tol()).unwrap().distance(&t) < 1e-12);
        let images = MapFile::from_map(&t.clone().drop_kraus(), dom, AlgebraSpec::Full);
        prop_assert!(images.to_map(&tol()).unwrap().distance(&t) < 1e-9);
    }
}
