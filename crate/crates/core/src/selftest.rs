//! Randomized self-test over the numbered acceptance criteria 1–11.
//!
//! Every instance draws from its own ChaCha stream derived from
//! `(seed, criterion, part, index)`, and instances are evaluated in parallel
//! but merged in index order, so a report depends only on the seed, the
//! counts and the tolerance. No timings are recorded.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::MatrixAlgebra;
use crate::catalog;
use crate::cpmap::{
    minimal_stinespring, relative_commutant, stinespring_for, stinespring_from_kraus, CPMap, StinespringRep,
};
use crate::decomp::{
    central_decomposition_with_rep, cp_from_operator, is_disjoint, is_orthogonal, is_orthogonal_measure,
    is_subcentral, kappa, rn_derivative, set_partitions, tomita_correspondence_check, CPMeasure,
};
use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix};
use crate::localnet::{
    commutation_check, local_sector_analysis, local_state, DensityState, LatticeNet, RegionPair, SiteKind,
};
use crate::oracle;
use crate::random;
use crate::tolerance::ToleranceConfig;

/// Instance counts per criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counts {
    pub dilation_maps: usize,
    pub choi_instances: usize,
    pub rn_elements: usize,
    pub affine_pairs: usize,
    pub orthogonality_pairs: usize,
    pub disjointness_pairs: usize,
    pub kappa_measures: usize,
    pub barycenters: usize,
    pub subcentral_instances: usize,
    pub local_states: usize,
    pub commuting_pairs: usize,
    pub factor_states: usize,
    pub bit_instances: usize,
}

impl Counts {
    /// The counts stated in the acceptance criteria.
    pub fn full() -> Self {
        Self {
            dilation_maps: 200,
            choi_instances: 100,
            rn_elements: 200,
            affine_pairs: 50,
            orthogonality_pairs: 200,
            disjointness_pairs: 60,
            kappa_measures: 100,
            barycenters: 3,
            subcentral_instances: 30,
            local_states: 50,
            commuting_pairs: 50,
            factor_states: 10,
            bit_instances: 4,
        }
    }

    pub fn reduced() -> Self {
        Self {
            dilation_maps: 40,
            choi_instances: 20,
            rn_elements: 40,
            affine_pairs: 10,
            orthogonality_pairs: 40,
            disjointness_pairs: 15,
            kappa_measures: 20,
            barycenters: 3,
            subcentral_instances: 9,
            local_states: 10,
            commuting_pairs: 10,
            factor_states: 3,
            bit_instances: 2,
        }
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "stinespring fidelity"),
    (2, "dilation dimension oracle"),
    (3, "radon-nikodym roundtrip"),
    (4, "orthogonality equivalence"),
    (5, "disjointness hierarchy"),
    (6, "kappa contract"),
    (7, "tomita correspondence"),
    (8, "subcentral oracle"),
    (9, "local states"),
    (10, "commutation"),
    (11, "local sectors"),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    /// Worst residuals and event counts.
    pub metrics: BTreeMap<String, f64>,
    /// The first few failure messages.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub abs_tol: f64,
    pub counts: Counts,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

const MAX_FAILURE_MESSAGES: usize = 5;

#[derive(Default)]
struct Tally {
    maxima: BTreeMap<String, f64>,
    counts: BTreeMap<String, f64>,
    failures: Vec<String>,
    failed: usize,
    instances: usize,
}

impl Tally {
    fn max(&mut self, key: &str, v: f64) {
        let e = self.maxima.entry(key.to_string()).or_insert(0.0);
        // NaN must not be swallowed by max
        *e = if v.is_nan() || e.is_nan() { f64::NAN } else { e.max(v) };
    }

    fn count(&mut self, key: &str, n: usize) {
        *self.counts.entry(key.to_string()).or_insert(0.0) += n as f64;
    }

    fn flag(&mut self, key: &str, hit: bool) {
        self.count(key, usize::from(hit));
    }

    fn fail(&mut self, msg: String) {
        self.failed += 1;
        if self.failures.len() < MAX_FAILURE_MESSAGES {
            self.failures.push(msg);
        }
    }

    fn merge(&mut self, other: Tally) {
        for (k, v) in other.maxima {
            self.max(&k, v);
        }
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0.0) += v;
        }
        for f in other.failures {
            if self.failures.len() < MAX_FAILURE_MESSAGES {
                self.failures.push(f);
            }
        }
        self.failed += other.failed;
        self.instances += other.instances;
    }

    fn get(&self, key: &str) -> f64 {
        self.maxima.get(key).or_else(|| self.counts.get(key)).copied().unwrap_or(0.0)
    }

    fn finish(mut self, id: u8, passed: bool) -> CriterionResult {
        let mut metrics = std::mem::take(&mut self.maxima);
        metrics.extend(std::mem::take(&mut self.counts));
        metrics.insert("errors".into(), self.failed as f64);
        let name = CRITERIA.iter().find(|(i, _)| *i == id).map_or("", |(_, n)| n).to_string();
        CriterionResult {
            id,
            name,
            passed: passed && self.failed == 0,
            instances: self.instances,
            metrics,
            failures: self.failures,
        }
    }
}

fn rng_for(seed: u64, stream: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | index as u64);
    rng
}

/// Runs `count` instances in parallel and merges their tallies in order.
fn instances<F>(seed: u64, stream: u64, count: usize, f: F) -> Tally
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Tally> + Sync,
{
    let parts: Vec<Tally> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, stream, k);
            let mut t = f(k, &mut rng).unwrap_or_else(|e| {
                let mut t = Tally::default();
                t.fail(format!("instance {k}: {e}"));
                t
            });
            t.instances = 1;
            t
        })
        .collect();
    let mut out = Tally::default();
    for p in parts {
        out.merge(p);
    }
    out
}

const TARGETS: [&[usize]; 5] = [&[1], &[2], &[1, 1], &[2, 1], &[1, 2]];

fn domain(k: usize) -> MatrixAlgebra {
    match k % 4 {
        0 => MatrixAlgebra::full(2),
        1 => MatrixAlgebra::full(3),
        2 => MatrixAlgebra::blocks(&[2, 2]),
        _ => MatrixAlgebra::diagonal(3),
    }
}

fn random_target(rng: &mut ChaCha8Rng) -> &'static [usize] {
    TARGETS[rng.random_range(0..TARGETS.len())]
}

/// A random map with its dilation and relative commutant, resampled until
/// the relative commutant has dimension at least `min_rc_dim`.
fn rc_instance(
    rng: &mut ChaCha8Rng,
    domains: &[MatrixAlgebra],
    min_rc_dim: usize,
    tol: &ToleranceConfig,
) -> Result<(CPMap, StinespringRep, MatrixAlgebra)> {
    for _ in 0..50 {
        let dom = &domains[rng.random_range(0..domains.len())];
        let count = rng.random_range(2..=4);
        let map = random::kraus_map(dom, random_target(rng), count, false, rng, tol)?;
        let rep = stinespring_for(&map, tol)?;
        let rc = relative_commutant(&map, &rep, tol)?;
        if rc.dim() >= min_rc_dim {
            return Ok((map, rep, rc));
        }
    }
    Err(Error::DecompositionStalled("no instance with a large enough relative commutant".into()))
}

/// Like [`rc_instance`], also returning `count` orthogonal projections of
/// the relative commutant.
fn projection_instance(
    rng: &mut ChaCha8Rng,
    domains: &[MatrixAlgebra],
    count: usize,
    tol: &ToleranceConfig,
) -> Result<(CPMap, StinespringRep, MatrixAlgebra, Vec<ComplexMatrix>)> {
    for _ in 0..50 {
        let (map, rep, rc) = rc_instance(rng, domains, 2, tol)?;
        if let Some(ps) = random::orthogonal_projections(&rc, count, rng, tol) {
            return Ok((map, rep, rc, ps));
        }
    }
    Err(Error::DecompositionStalled("no instance with enough orthogonal projections".into()))
}

fn all_domains() -> Vec<MatrixAlgebra> {
    (0..4).map(domain).collect()
}

fn c1(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let tally = instances(seed, 16, counts.dilation_maps, |k, rng| {
        let mut t = Tally::default();
        let count = rng.random_range(1..=4);
        let redundant = rng.random_bool(0.3);
        let map = random::kraus_map(&domain(k), random_target(rng), count, redundant, rng, tol)?;
        let gns = minimal_stinespring(&map.clone().drop_kraus(), tol)?;
        let kr = stinespring_from_kraus(&map, tol)?;
        for rep in [&gns, &kr] {
            t.max("max_reconstruction_residual", rep.reconstruction_residual(&map));
            t.max("max_multiplicativity_residual", rep.multiplicativity_residual());
            t.flag("non_minimal", rep.spanning_rank(tol) != rep.dilation_dim());
        }
        t.flag("dimension_mismatches", gns.dilation_dim() != kr.dilation_dim());
        Ok(t)
    });
    let passed = tally.get("max_reconstruction_residual") <= 1e-7
        && tally.get("max_multiplicativity_residual") <= 1e-7
        && tally.get("non_minimal") == 0.0
        && tally.get("dimension_mismatches") == 0.0;
    tally.finish(1, passed)
}

fn c2(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let tally = instances(seed, 32, counts.choi_instances, |k, rng| {
        let mut t = Tally::default();
        let n = 2 + k % 2;
        let count = rng.random_range(1..=5);
        let map = random::kraus_map(&MatrixAlgebra::full(n), random_target(rng), count, rng.random_bool(0.3), rng, tol)?;
        let rep = minimal_stinespring(&map.clone().drop_kraus(), tol)?;
        let rank = oracle::choi_rank(|x| map.eval(x), n, map.m(), 1e-9);
        t.flag("mismatches", rep.dilation_dim() != n * rank);
        t.max("max_choi_rank", rank as f64);
        Ok(t)
    });
    let passed = tally.get("mismatches") == 0.0;
    tally.finish(2, passed)
}

fn c3(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let domains = all_domains();
    let mut tally = instances(seed, 48, counts.rn_elements, |_, rng| {
        let mut t = Tally::default();
        let (map, rep, rc) = rc_instance(rng, &domains, 2, tol)?;
        let r = random::unit_interval_element(&rc, rng);
        let tr = cp_from_operator(&map, &rep, &r, tol)?;
        let back = rn_derivative(&tr, &map, &rep, tol)?;
        t.max("max_roundtrip_error", linalg::dist(&r, &back));
        Ok(t)
    });
    let affine = instances(seed, 49, counts.affine_pairs, |_, rng| {
        let mut t = Tally::default();
        let (map, rep, rc) = rc_instance(rng, &domains, 2, tol)?;
        let r1 = random::unit_interval_element(&rc, rng);
        let r2 = random::unit_interval_element(&rc, rng);
        let lam = rng.random_range(0.05..0.95);
        let mix = &r1 * c(lam, 0.0) + &r2 * c(1.0 - lam, 0.0);
        let t1 = cp_from_operator(&map, &rep, &r1, tol)?;
        let t2 = cp_from_operator(&map, &rep, &r2, tol)?;
        let tm = cp_from_operator(&map, &rep, &mix, tol)?;
        t.max("max_affinity_error", tm.distance(&t1.linear_combination(lam, &t2, 1.0 - lam)?));
        let back = rn_derivative(&tm, &map, &rep, tol)?;
        t.max("max_affinity_error", linalg::dist(&back, &mix));
        Ok(t)
    });
    let affine_instances = affine.instances;
    tally.merge(affine);
    tally.count("affine_pairs", affine_instances);
    tally.instances -= affine_instances;
    let passed = tally.get("max_roundtrip_error") <= 1e-6 && tally.get("max_affinity_error") <= 1e-6;
    tally.finish(3, passed)
}

fn perturbed(p: &ComplexMatrix, eps: f64) -> ComplexMatrix {
    // P + ε(1 − 2P): spectrum {ε, 1 − ε}, never a projection
    let d = p.nrows();
    p * c(1.0 - 2.0 * eps, 0.0) + linalg::identity(d) * c(eps, 0.0)
}

fn c4(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let domains = all_domains();
    let tally = instances(seed, 64, counts.orthogonality_pairs, |k, rng| {
        let mut t = Tally::default();
        let (map, rep, _, ps) = projection_instance(rng, &domains, 2, tol)?;
        let want = k % 2 == 0;
        let r = if want { ps[0].clone() } else { perturbed(&ps[0], rng.random_range(0.05..0.45)) };
        let d = rep.dilation_dim();
        let t1 = cp_from_operator(&map, &rep, &r, tol)?;
        let t2 = cp_from_operator(&map, &rep, &(linalg::identity(d) - &r), tol)?;
        let rep12 = is_orthogonal(&t1, &t2, tol)?;
        t.flag("disagreements", rep12.orthogonal != rep12.dims_additive);
        t.flag("label_mismatches", rep12.orthogonal != want);
        t.flag("orthogonal_pairs", rep12.orthogonal);
        if want {
            t.max("max_projection_defect_orthogonal", rep12.projection_defect);
        }
        Ok(t)
    });
    let passed = tally.get("disagreements") == 0.0 && tally.get("label_mismatches") == 0.0;
    tally.finish(4, passed)
}

fn c5(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let central_domains =
        vec![MatrixAlgebra::blocks(&[2, 2]), MatrixAlgebra::diagonal(3), MatrixAlgebra::blocks(&[2, 1])];
    let domains = all_domains();
    let mut tally = instances(seed, 80, counts.disjointness_pairs, |k, rng| {
        let mut t = Tally::default();
        let (map, rep, r, kind) = match k % 3 {
            0 => {
                let (map, rep, _) = rc_instance(rng, &central_domains, 2, tol)?;
                let dec = central_decomposition_with_rep(&map, &rep, tol)?;
                let ps = dec.projections;
                if ps.len() < 2 {
                    return Err(Error::DecompositionStalled("trivial center".into()));
                }
                let d = rep.dilation_dim();
                // a proper nonempty subset of the central atoms containing atom 0
                let mut r = ps[0].clone();
                for p in &ps[1..ps.len() - 1] {
                    if rng.random_bool(0.5) {
                        r += p;
                    }
                }
                debug_assert!(r.shape() == (d, d));
                (map, rep, r, "central")
            }
            1 => {
                let (map, rep, _, ps) = projection_instance(rng, &domains, 2, tol)?;
                (map, rep, ps[0].clone(), "projection")
            }
            _ => {
                let (map, rep, _, ps) = projection_instance(rng, &domains, 2, tol)?;
                let eps = rng.random_range(0.05..0.45);
                (map, rep, perturbed(&ps[0], eps), "perturbed")
            }
        };
        let d = rep.dilation_dim();
        let t1 = cp_from_operator(&map, &rep, &r, tol)?;
        let t2 = cp_from_operator(&map, &rep, &(linalg::identity(d) - &r), tol)?;
        let rd = is_disjoint(&t1, &t2, tol)?;
        t.flag("hierarchy_violations", rd.disjoint && !rd.orthogonal);
        t.flag("oracle_disagreements", rd.disjoint != (rd.intertwiner_dim == 0));
        t.flag(
            "label_mismatches",
            (kind == "central" && !rd.disjoint) || (kind == "perturbed" && rd.orthogonal),
        );
        t.flag("disjoint_pairs", rd.disjoint);
        t.flag("orthogonal_not_disjoint_pairs", rd.orthogonal && !rd.disjoint);
        Ok(t)
    });
    let mut witness = |key: &str, t1: CPMap, t2: CPMap, want: (bool, bool)| match is_disjoint(&t1, &t2, tol) {
        Ok(r) => {
            tally.flag(&format!("witness_{key}_ok"), (r.orthogonal, r.disjoint) == want);
            if (r.orthogonal, r.disjoint) != want {
                tally.fail(format!("witness {key}: orthogonal {} disjoint {}", r.orthogonal, r.disjoint));
            }
        }
        Err(e) => tally.fail(format!("witness {key}: {e}")),
    };
    witness("vector_states", catalog::vector_state(2, 0), catalog::vector_state(2, 1), (true, false));
    witness("deltas", catalog::delta(2, 0), catalog::delta(2, 1), (true, true));
    let passed = tally.get("hierarchy_violations") == 0.0
        && tally.get("oracle_disagreements") == 0.0
        && tally.get("label_mismatches") == 0.0;
    tally.finish(5, passed)
}

/// Barycenter `j` of the constructed family with four orthogonal
/// projections of its relative commutant.
fn constructed_barycenter(
    j: usize,
    rng: &mut ChaCha8Rng,
    tol: &ToleranceConfig,
) -> Result<(CPMap, StinespringRep, Vec<ComplexMatrix>)> {
    for _ in 0..50 {
        let map = match j % 3 {
            0 => catalog::counting(4),
            1 => random::kraus_map(&MatrixAlgebra::full(4), &[1], 4, false, rng, tol)?,
            _ => random::kraus_map(&MatrixAlgebra::full(2), &[2], 4, false, rng, tol)?,
        };
        let rep = stinespring_for(&map, tol)?;
        let rc = relative_commutant(&map, &rep, tol)?;
        if let Some(ps) = random::orthogonal_projections(&rc, 4, rng, tol) {
            return Ok((map, rep, ps));
        }
    }
    Err(Error::DecompositionStalled("no barycenter with four orthogonal projections".into()))
}

fn measure_of(map: &CPMap, rep: &StinespringRep, rs: &[ComplexMatrix], tol: &ToleranceConfig) -> Result<CPMeasure> {
    let values = rs.iter().map(|r| cp_from_operator(map, rep, r, tol)).collect::<Result<Vec<_>>>()?;
    CPMeasure::new(values, map.clone(), tol)
}

fn c6(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let domains = all_domains();
    let mut tally = instances(seed, 96, counts.kappa_measures, |_, rng| {
        let mut t = Tally::default();
        let (map, rep, rc) = rc_instance(rng, &domains, 1, tol)?;
        let atoms = rng.random_range(2..=4);
        let mut rs = random::partition_of_unity(&rc, atoms, rng);
        if rng.random_bool(0.25) {
            let d = rep.dilation_dim();
            rs.push(linalg::zeros(d, d));
        }
        let mu = measure_of(&map, &rep, &rs, tol)?;
        let fam = kappa(&mu, &rep, tol)?;
        for (r, k) in rs.iter().zip(fam.operators()) {
            t.max("max_recovery_error", linalg::dist(r, k));
        }
        for (w, k) in mu.weights().iter().zip(fam.operators()) {
            t.flag("faithfulness_violations", (*w > tol.abs_tol) != (linalg::op_norm(k) > tol.solved_tol()));
        }
        for _ in 0..5 {
            let f: Vec<_> = (0..rs.len())
                .map(|_| {
                    let r: f64 = rng.random_range(0.0..=1.0);
                    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    c(r * th.cos(), r * th.sin())
                })
                .collect();
            let sup = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
            t.max("max_contractivity_excess", linalg::op_norm(&fam.apply(&f)) - sup);
            let g: Vec<_> = (0..rs.len()).map(|_| c(rng.random_range(0.0..=1.0), 0.0)).collect();
            t.max("max_positivity_violation", -linalg::min_eigenvalue(&fam.apply(&g)));
        }
        Ok(t)
    });
    let equivalence = instances(seed, 97, counts.barycenters, |j, rng| {
        let mut t = Tally::default();
        let (map, rep, ps) = constructed_barycenter(j, rng, tol)?;
        let half = (&ps[2] + &ps[3]) * c(0.5, 0.0);
        let orth = measure_of(&map, &rep, &ps, tol)?;
        let mixed = measure_of(&map, &rep, &[ps[0].clone(), ps[1].clone(), half.clone(), half], tol)?;
        for blocks in set_partitions(4) {
            for (label, mu) in [("orthogonal", &orth), ("mixed", &mixed)] {
                let r = is_orthogonal_measure(&mu.coarsen(&blocks, tol)?, tol)?;
                t.flag("equivalence_mismatches", r.orthogonal != r.splits_orthogonal);
                let together = blocks.iter().any(|b| b.contains(&2) && b.contains(&3));
                let want = label == "orthogonal" || together;
                t.flag("label_mismatches", r.orthogonal != want);
                t.flag("orthogonal_verdicts", r.orthogonal);
                t.flag("non_orthogonal_verdicts", !r.orthogonal);
            }
        }
        Ok(t)
    });
    let n = equivalence.instances;
    tally.merge(equivalence);
    tally.instances -= n;
    tally.count("barycenters", n);
    let passed = tally.get("max_contractivity_excess") <= 1e-9
        && tally.get("max_positivity_violation") <= 1e-9
        && tally.get("faithfulness_violations") == 0.0
        && tally.get("equivalence_mismatches") == 0.0
        && tally.get("label_mismatches") == 0.0;
    tally.finish(6, passed)
}

fn c7(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let tally = instances(seed, 112, counts.barycenters, |j, rng| {
        let mut t = Tally::default();
        let (map, rep, ps) = constructed_barycenter(j, rng, tol)?;
        let mu = measure_of(&map, &rep, &ps, tol)?;
        let d = rep.dilation_dim();
        let mut measures = Vec::new();
        let mut algebras = Vec::new();
        for blocks in set_partitions(4) {
            let coarse = mu.coarsen(&blocks, tol)?;
            let fam = kappa(&coarse, &rep, tol)?;
            algebras.push(MatrixAlgebra::from_spanning_unital(d, fam.operators(), tol)?);
            measures.push(coarse);
        }
        let r = tomita_correspondence_check(&map, &measures, &algebras, tol)?;
        t.count("measure_roundtrip_mismatches", r.measure_roundtrip_mismatches);
        t.count("algebra_roundtrip_mismatches", r.algebra_roundtrip_mismatches);
        t.count("monotonicity_mismatches", r.monotonicity_mismatches);
        t.count("pairs_checked", r.pairs_checked);
        Ok(t)
    });
    let passed = tally.get("measure_roundtrip_mismatches") == 0.0
        && tally.get("algebra_roundtrip_mismatches") == 0.0
        && tally.get("monotonicity_mismatches") == 0.0;
    tally.finish(7, passed)
}

fn subcentral_check(t: &mut Tally, mu: &CPMeasure, want: Option<bool>, tol: &ToleranceConfig) -> Result<()> {
    let r = is_subcentral(mu, tol)?;
    t.flag("oracle_disagreements", r.subcentral != r.splits_disjoint);
    t.flag("non_exhaustive", !r.exhaustive);
    t.flag("label_mismatches", want.is_some_and(|w| w != r.subcentral));
    t.flag("subcentral_verdicts", r.subcentral);
    t.flag("non_subcentral_verdicts", !r.subcentral);
    t.max("max_atoms", mu.atoms() as f64);
    t.count("splits_checked", r.splits_checked);
    Ok(())
}

fn c8(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    // the counting functional on C^m split into point evaluations, m = 2..=12
    let mut tally = instances(seed, 128, 11, |k, rng| {
        let mut t = Tally::default();
        let m = k + 2;
        let atoms: Vec<CPMap> = (0..m).map(|i| catalog::delta(m, i)).collect();
        let mu = CPMeasure::new(atoms, catalog::counting(m), tol)?;
        subcentral_check(&mut t, &mu, Some(true), tol)?;
        if m >= 3 {
            let parts = set_partitions(m.min(5));
            let mut blocks = parts[rng.random_range(1..parts.len())].clone();
            blocks.last_mut().expect("nonempty").extend(m.min(5)..m);
            subcentral_check(&mut t, &mu.coarsen(&blocks, tol)?, Some(true), tol)?;
        }
        Ok(t)
    });
    let central_domains =
        vec![MatrixAlgebra::blocks(&[2, 2]), MatrixAlgebra::diagonal(3), MatrixAlgebra::blocks(&[2, 1])];
    let domains = all_domains();
    let random_part = instances(seed, 129, counts.subcentral_instances, |k, rng| {
        let mut t = Tally::default();
        match k % 3 {
            0 => {
                let (map, rep, _) = rc_instance(rng, &central_domains, 1, tol)?;
                let dec = central_decomposition_with_rep(&map, &rep, tol)?;
                subcentral_check(&mut t, &dec.measure, Some(true), tol)?;
            }
            1 => {
                let atoms = rng.random_range(2..=4);
                let (map, rep, _, ps) = projection_instance(rng, &domains, atoms.min(2), tol)?;
                let rc = relative_commutant(&map, &rep, tol)?;
                let ps = random::orthogonal_projections(&rc, atoms, rng, tol).unwrap_or(ps);
                subcentral_check(&mut t, &measure_of(&map, &rep, &ps, tol)?, None, tol)?;
            }
            _ => {
                let (map, rep, rc) = rc_instance(rng, &domains, 1, tol)?;
                let rs = random::partition_of_unity(&rc, rng.random_range(2..=4), rng);
                subcentral_check(&mut t, &measure_of(&map, &rep, &rs, tol)?, Some(false), tol)?;
            }
        }
        Ok(t)
    });
    tally.merge(random_part);
    let passed = tally.get("oracle_disagreements") == 0.0
        && tally.get("non_exhaustive") == 0.0
        && tally.get("label_mismatches") == 0.0;
    tally.finish(8, passed)
}

fn c9(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let tally = instances(seed, 144, counts.local_states, |_, rng| {
        let mut t = Tally::default();
        let net = random::lattice_net(1, 5, 4, true, 256, rng);
        let pair = random::region_pair(&net, rng)?;
        let phi = DensityState::new(random::region_density(&net, pair.inner(), rng), tol)?;
        let state = local_state(&net, &pair, &phi, tol)?;
        let r = state.report();
        t.max("max_condition1", r.condition1);
        t.max("max_condition2", r.condition2);
        t.max("max_unital_defect", r.unital_defect);
        t.max("max_global_dim", net.global_dim() as f64);
        t.flag("rejected", !r.passes);
        t.max("max_implied_state_error", linalg::dist(&r.implied_state, phi_on_inner(&net, &pair, &phi)?.matrix()));
        Ok(t)
    });
    let passed = tally.get("max_condition1") <= 1e-9
        && tally.get("max_condition2") <= 1e-9
        && tally.get("max_unital_defect") <= 1e-9
        && tally.get("rejected") == 0.0;
    tally.finish(9, passed)
}

/// The restriction of `φ` to the inner algebra: diagonal sites see only
/// the diagonal of their factor.
fn phi_on_inner(net: &LatticeNet, pair: &RegionPair, phi: &DensityState) -> Result<DensityState> {
    let dims: Vec<usize> = pair.inner().sites().iter().map(|&s| net.site_dims()[s]).collect();
    let kinds: Vec<SiteKind> = pair.inner().sites().iter().map(|&s| net.kinds()[s]).collect();
    let d = phi.dim();
    let digits = |mut x: usize| {
        let mut v = vec![0; dims.len()];
        for s in (0..dims.len()).rev() {
            v[s] = x % dims[s];
            x /= dims[s];
        }
        v
    };
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (digits(i), digits(j));
        let keep = (0..dims.len()).all(|s| kinds[s] == SiteKind::Full || a[s] == b[s]);
        if keep {
            phi.matrix()[(i, j)]
        } else {
            linalg::ZERO
        }
    });
    DensityState::new(m, &ToleranceConfig::default())
}

fn c10(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let mut tally = instances(seed, 160, counts.commuting_pairs, |_, rng| {
        let mut t = Tally::default();
        let net = random::lattice_net(2, 5, 3, true, 256, rng);
        let (p1, p2) = random::separated_pairs(&net, rng)?;
        let phi1 = DensityState::new(random::region_density(&net, p1.inner(), rng), tol)?;
        let phi2 = DensityState::new(random::region_density(&net, p2.inner(), rng), tol)?;
        let s1 = local_state(&net, &p1, &phi1, tol)?;
        let s2 = local_state(&net, &p2, &phi2, tol)?;
        let r = commutation_check(&net, &s1, &p1, &s2, &p2)?;
        t.max("max_separated_deviation", r.deviation);
        t.flag("overlapping_generated", r.overlapping);
        Ok(t)
    });
    match overlapping_counterexample(tol) {
        Ok(dev) => tally.max("overlapping_counterexample_deviation", dev),
        Err(e) => tally.fail(format!("counterexample: {e}")),
    }
    let passed = tally.get("max_separated_deviation") <= 1e-9
        && tally.get("overlapping_generated") == 0.0
        && tally.get("overlapping_counterexample_deviation") >= 0.1;
    tally.finish(10, passed)
}

/// `|0⟩` and `|+⟩` prepared on the same site of a two-qubit chain.
fn overlapping_counterexample(tol: &ToleranceConfig) -> Result<f64> {
    let net = LatticeNet::uniform(2, 2, SiteKind::Full)?;
    let pair = RegionPair::new(net.region(&[0])?, net.region(&[0, 1])?)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = DensityState::new(linalg::diag(&[1.0, 0.0]), tol)?;
    let plus = DensityState::pure(&[c(s, 0.0), c(s, 0.0)], tol)?;
    let a = local_state(&net, &pair, &zero, tol)?;
    let b = local_state(&net, &pair, &plus, tol)?;
    Ok(commutation_check(&net, &a, &pair, &b, &pair)?.deviation)
}

fn c11(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> CriterionResult {
    let mut tally = instances(seed, 176, counts.factor_states, |_, rng| {
        let mut t = Tally::default();
        let net = random::lattice_net(1, 3, 3, false, 8, rng);
        let pair = random::region_pair(&net, rng)?;
        let d = net.region_dim(pair.inner());
        let phi = DensityState::new(random::density(d, 1, rng), tol)?;
        let map = local_state(&net, &pair, &phi, tol)?.to_cpmap(tol)?;
        let r = local_sector_analysis(&net, &pair, &map, &[], tol)?;
        t.flag("non_factor", !(r.factor_state && r.zfull_dim == 1 && r.theta_dim == 1));
        Ok(t)
    });
    let bits = instances(seed, 177, counts.bit_instances, |k, rng| {
        let mut t = Tally::default();
        let (dims, kinds) = match k % 3 {
            0 => (vec![2, 2], vec![SiteKind::Diagonal, SiteKind::Full]),
            1 => (vec![2, 3], vec![SiteKind::Diagonal, SiteKind::Full]),
            _ => (vec![2, 2, 2], vec![SiteKind::Diagonal, SiteKind::Full, SiteKind::Full]),
        };
        let net = LatticeNet::new(dims, kinds)?;
        let pair = RegionPair::new(net.region(&[0])?, net.region(&[0, 1])?)?;
        let p = rng.random_range(0.1..0.9);
        let phi = DensityState::new(linalg::diag(&[p, 1.0 - p]), tol)?;
        let map = local_state(&net, &pair, &phi, tol)?.to_cpmap(tol)?;
        let r = local_sector_analysis(&net, &pair, &map, &[], tol)?;
        t.flag("bit_component_count_mismatches", r.components.len() != 2);
        t.flag("bit_not_disjoint", !r.pairwise_disjoint);
        t.max("max_bit_barycenter_residual", r.barycenter_residual);
        let mut w: Vec<f64> = r
            .components
            .iter()
            .map(|v| linalg::trace(&v.eval(&v.domain().identity())).re / net.global_dim() as f64)
            .collect();
        w.sort_by(f64::total_cmp);
        let mut want = [p, 1.0 - p];
        want.sort_by(f64::total_cmp);
        let werr = if w.len() == 2 { (w[0] - want[0]).abs().max((w[1] - want[1]).abs()) } else { f64::INFINITY };
        t.max("max_bit_weight_error", werr);
        t.flag("bit_theta_in_zfull", r.theta_in_zfull);
        Ok(t)
    });
    let n = bits.instances;
    tally.merge(bits);
    tally.count("bit_instances", n);
    let passed = tally.get("non_factor") == 0.0
        && tally.get("bit_component_count_mismatches") == 0.0
        && tally.get("bit_not_disjoint") == 0.0
        && tally.get("max_bit_barycenter_residual") <= 1e-8;
    tally.finish(11, passed)
}

/// Runs one criterion (1–11).
pub fn run_criterion(id: u8, seed: u64, counts: &Counts, tol: &ToleranceConfig) -> Result<CriterionResult> {
    Ok(match id {
        1 => c1(seed, counts, tol),
        2 => c2(seed, counts, tol),
        3 => c3(seed, counts, tol),
        4 => c4(seed, counts, tol),
        5 => c5(seed, counts, tol),
        6 => c6(seed, counts, tol),
        7 => c7(seed, counts, tol),
        8 => c8(seed, counts, tol),
        9 => c9(seed, counts, tol),
        10 => c10(seed, counts, tol),
        11 => c11(seed, counts, tol),
        _ => return Err(Error::Invalid(format!("no criterion {id}"))),
    })
}

pub fn run_all(seed: u64, counts: &Counts, tol: &ToleranceConfig) -> SelftestReport {
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(*id, seed, counts, tol).expect("known criterion"))
        .collect();
    let passed = criteria.iter().all(|c| c.passed);
    SelftestReport { seed, abs_tol: tol.abs_tol, counts: counts.clone(), criteria, passed }
}
