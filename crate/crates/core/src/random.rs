//! Random instance generators for property tests and the self-test.
//!
//! Everything takes an explicit `Rng`, so a seeded generator reproduces the
//! same instances on every platform.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::MatrixAlgebra;
use crate::cpmap::CPMap;
use crate::error::{Error, Result};
use crate::linalg::{self, c, eigh, ComplexMatrix};
use crate::localnet::{LatticeNet, Region, RegionPair, SiteKind};
use crate::tolerance::ToleranceConfig;

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    linalg::hermitian_part(&gaussian(n, n, rng))
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let qr = gaussian(n, n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else if i == j {
            linalg::ONE
        } else {
            linalg::ZERO
        }
    });
    q * phases
}

/// Density matrix of the given rank, `W W* / tr(W W*)` with `W` Gaussian.
pub fn density<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let w = gaussian(n, rank.max(1), rng);
    let rho = &w * w.adjoint();
    let tr = linalg::trace(&rho);
    linalg::hermitian_part(&(rho / tr))
}

/// Target block algebra `⊕ M_{sᵢ}` on `C^{Σ sᵢ}`.
pub fn block_target(sizes: &[usize]) -> MatrixAlgebra {
    if sizes.len() == 1 {
        MatrixAlgebra::full(sizes[0])
    } else {
        MatrixAlgebra::blocks(sizes)
    }
}

/// A random CP map from `domain` into the block algebra `⊕ M_{sᵢ}`, given by
/// `count` Kraus operators, each supported on the columns of one target
/// block (round robin), so every image is block diagonal. With `redundant`
/// one extra operator is appended as a combination of the others, which
/// leaves the Choi rank unchanged. Scaled to `‖T(1)‖ = 1`.
pub fn kraus_map<R: Rng + ?Sized>(
    domain: &MatrixAlgebra,
    target_blocks: &[usize],
    count: usize,
    redundant: bool,
    rng: &mut R,
    tol: &ToleranceConfig,
) -> Result<CPMap> {
    if count == 0 || target_blocks.is_empty() {
        return Err(Error::Empty("random Kraus family".into()));
    }
    let n = domain.space_dim();
    let m: usize = target_blocks.iter().sum();
    let offsets: Vec<usize> = target_blocks
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let mut ops: Vec<ComplexMatrix> = (0..count)
        .map(|k| {
            let b = k % target_blocks.len();
            let mut op = linalg::zeros(n, m);
            let g = gaussian(n, target_blocks[b], rng);
            op.view_mut((0, offsets[b]), (n, target_blocks[b])).copy_from(&g);
            op
        })
        .collect();
    if redundant {
        // combination of operators on one block keeps the block support
        let same: Vec<usize> = (0..count).filter(|k| k % target_blocks.len() == 0).collect();
        let mut extra = linalg::zeros(n, m);
        for &k in &same {
            let a: f64 = rng.sample(StandardNormal);
            extra += &ops[k] * c(a, 0.0);
        }
        ops.push(extra);
    }
    let one: ComplexMatrix = ops
        .iter()
        .fold(linalg::zeros(m, m), |acc, op| acc + op.adjoint() * domain.identity() * op);
    let scale = linalg::op_norm(&one).max(f64::MIN_POSITIVE);
    let s = c(1.0 / scale.sqrt(), 0.0);
    let ops = ops.into_iter().map(|op| op * s).collect();
    CPMap::from_kraus(domain.clone(), block_target(target_blocks), ops, tol)
}

/// Random self-adjoint element of a `*`-algebra.
pub fn self_adjoint_element<R: Rng + ?Sized>(alg: &MatrixAlgebra, rng: &mut R) -> ComplexMatrix {
    let coords: Vec<_> = (0..alg.dim())
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    linalg::hermitian_part(&alg.element(&coords))
}

/// Affine image of `h` with spectrum spread over `[lo, hi]`.
pub fn rescale_spectrum(h: &ComplexMatrix, lo: f64, hi: f64) -> ComplexMatrix {
    let (vals, _) = eigh(h);
    let n = h.nrows();
    let (a, b) = (vals[0], vals[n - 1]);
    if b - a < 1e-12 {
        return linalg::identity(n) * c(0.5 * (lo + hi), 0.0);
    }
    let s = (hi - lo) / (b - a);
    (h - linalg::identity(n) * c(a, 0.0)) * c(s, 0.0) + linalg::identity(n) * c(lo, 0.0)
}

/// Random element `0 ≤ R ≤ 1` of a unital `*`-algebra.
pub fn unit_interval_element<R: Rng + ?Sized>(alg: &MatrixAlgebra, rng: &mut R) -> ComplexMatrix {
    let h = self_adjoint_element(alg, rng);
    let lo = rng.random_range(0.0..0.2);
    let hi = rng.random_range(0.8..1.0);
    rescale_spectrum(&h, lo, hi)
}

/// `count` mutually orthogonal nonzero projections of `alg` summing to 1,
/// built from unions of spectral projections of a random self-adjoint
/// element. `None` if that element has fewer than `count` distinct
/// eigenvalues.
pub fn orthogonal_projections<R: Rng + ?Sized>(
    alg: &MatrixAlgebra,
    count: usize,
    rng: &mut R,
    tol: &ToleranceConfig,
) -> Option<Vec<ComplexMatrix>> {
    let h = self_adjoint_element(alg, rng);
    let (vals, vecs) = eigh(&h);
    let clusters = linalg::cluster_sorted(&vals, tol.cluster_gap());
    if clusters.len() < count || count == 0 {
        return None;
    }
    // random contiguous grouping of the clusters into `count` parts
    let mut cuts: Vec<usize> = (1..clusters.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(count - 1).collect();
    cuts.sort_unstable();
    cuts.push(clusters.len());
    let mut out = Vec::with_capacity(count);
    let mut start = 0;
    for end in cuts {
        let cols: Vec<usize> = clusters[start..end].iter().flat_map(|r| r.clone()).collect();
        let q = linalg::select_columns(&vecs, &cols);
        out.push(linalg::range_projection(&q));
        start = end;
    }
    Some(out)
}

/// `count` positive elements of `alg` summing to 1: `S^{-1/2} Aᵢ S^{-1/2}`
/// with `Aᵢ = Hᵢ² + ε` and `S = Σ Aᵢ`.
pub fn partition_of_unity<R: Rng + ?Sized>(alg: &MatrixAlgebra, count: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let d = alg.space_dim();
    let parts: Vec<ComplexMatrix> = (0..count)
        .map(|_| {
            let h = self_adjoint_element(alg, rng);
            let h = &h / c(linalg::op_norm(&h).max(f64::MIN_POSITIVE), 0.0);
            &h * &h + linalg::identity(d) * c(0.05, 0.0)
        })
        .collect();
    let s = parts.iter().fold(linalg::zeros(d, d), |acc, a| acc + a);
    let (vals, vecs) = eigh(&s);
    let inv_sqrt = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        vals.iter().map(|v| c(1.0 / v.sqrt(), 0.0)),
    ));
    let w = &vecs * inv_sqrt * vecs.adjoint();
    parts.iter().map(|a| linalg::hermitian_part(&(&w * a * &w))).collect()
}

/// Random net with at most `max_sites` sites of dimension up to `max_dim`
/// and global dimension at most `cap`; rejection-sampled.
pub fn lattice_net<R: Rng + ?Sized>(
    min_sites: usize,
    max_sites: usize,
    max_dim: usize,
    allow_diagonal: bool,
    cap: usize,
    rng: &mut R,
) -> LatticeNet {
    loop {
        let k = rng.random_range(min_sites..=max_sites);
        let dims: Vec<usize> = (0..k).map(|_| rng.random_range(1..=max_dim)).collect();
        if dims.iter().product::<usize>() > cap {
            continue;
        }
        let kinds = (0..k)
            .map(|_| if allow_diagonal && rng.random_bool(0.3) { SiteKind::Diagonal } else { SiteKind::Full })
            .collect();
        if let Ok(net) = LatticeNet::with_cap(dims, kinds, cap) {
            return net;
        }
    }
}

fn random_subset<R: Rng + ?Sized>(sites: &[usize], rng: &mut R) -> Vec<usize> {
    sites.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
}

/// Random `inner ⊊ outer` inside the given sites (`outer` nonempty).
pub fn region_pair_within<R: Rng + ?Sized>(net: &LatticeNet, sites: &[usize], rng: &mut R) -> Result<RegionPair> {
    if sites.is_empty() {
        return Err(Error::InvalidRegion("no sites to choose from".into()));
    }
    let mut outer = random_subset(sites, rng);
    if outer.is_empty() {
        outer.push(sites[rng.random_range(0..sites.len())]);
    }
    let mut inner = random_subset(&outer, rng);
    if inner.len() == outer.len() {
        inner.remove(rng.random_range(0..inner.len()));
    }
    RegionPair::new(net.region(&inner)?, net.region(&outer)?)
}

pub fn region_pair<R: Rng + ?Sized>(net: &LatticeNet, rng: &mut R) -> Result<RegionPair> {
    let sites: Vec<usize> = (0..net.sites()).collect();
    region_pair_within(net, &sites, rng)
}

/// Two region pairs with disjoint outer regions (needs at least 2 sites).
pub fn separated_pairs<R: Rng + ?Sized>(net: &LatticeNet, rng: &mut R) -> Result<(RegionPair, RegionPair)> {
    let mut sites: Vec<usize> = (0..net.sites()).collect();
    if sites.len() < 2 {
        return Err(Error::InvalidRegion("need two sites for separated regions".into()));
    }
    sites.shuffle(rng);
    let cut = rng.random_range(1..sites.len());
    let (a, b) = sites.split_at(cut);
    Ok((region_pair_within(net, a, rng)?, region_pair_within(net, b, rng)?))
}

/// Random density state on a region: pure with probability one half.
pub fn region_density<R: Rng + ?Sized>(net: &LatticeNet, r: &Region, rng: &mut R) -> ComplexMatrix {
    let d = net.region_dim(r);
    let rank = if rng.random_bool(0.5) { 1 } else { rng.random_range(1..=d) };
    density(d, rank, rng)
}
