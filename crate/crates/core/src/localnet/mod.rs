//! A finite chain of matrix-algebra sites as a toy local net.
//!
//! Site 0 is the most significant tensor factor of the global space
//! `C^{d₀} ⊗ C^{d₁} ⊗ …`. A region's algebra is the tensor product of its
//! site algebras with identities elsewhere. The complement of a region is
//! the set complement of its sites.

mod sectors;
mod state;

pub use sectors::{local_sector_analysis, SectorReport};
pub use state::{
    commutation_check, local_state, verify_local_state, CommutationReport, DensityState, LocalState,
    LocalStateReport, VerificationMethod,
};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix};

pub const DEFAULT_CAP: usize = 256;

/// Largest `dim · N²` for which a region algebra is materialized.
pub const MATERIALIZE_LIMIT: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Full,
    #[serde(rename = "diag")]
    Diagonal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeNet {
    site_dims: Vec<usize>,
    kinds: Vec<SiteKind>,
    cap: usize,
}

/// Sorted, duplicate-free site indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.0.iter().all(|&s| other.contains(s))
    }

    pub fn is_disjoint_from(&self, other: &Region) -> bool {
        self.0.iter().all(|&s| !other.contains(s))
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        Region(v)
    }
}

/// `inner ⋐ outer`: the inner region is strictly contained in the outer one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionPair {
    inner: Region,
    outer: Region,
}

impl RegionPair {
    pub fn new(inner: Region, outer: Region) -> Result<Self> {
        if !inner.is_subset_of(&outer) || inner == outer {
            return Err(Error::InvalidRegion(format!(
                "inner {:?} must be strictly contained in outer {:?}",
                inner.0, outer.0
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> &Region {
        &self.inner
    }

    pub fn outer(&self) -> &Region {
        &self.outer
    }
}

impl LatticeNet {
    pub fn new(site_dims: Vec<usize>, kinds: Vec<SiteKind>) -> Result<Self> {
        Self::with_cap(site_dims, kinds, DEFAULT_CAP)
    }

    pub fn with_cap(site_dims: Vec<usize>, kinds: Vec<SiteKind>, cap: usize) -> Result<Self> {
        if site_dims.len() != kinds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} site dimensions but {} kinds",
                site_dims.len(),
                kinds.len()
            )));
        }
        if site_dims.contains(&0) {
            return Err(Error::Invalid("site dimensions must be at least 1".into()));
        }
        let dim = site_dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(Self { site_dims, kinds, cap })
    }

    /// `k` sites of the same dimension and kind.
    pub fn uniform(k: usize, d: usize, kind: SiteKind) -> Result<Self> {
        Self::new(vec![d; k], vec![kind; k])
    }

    pub fn sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn kinds(&self) -> &[SiteKind] {
        &self.kinds
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn global_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    pub fn region(&self, sites: &[usize]) -> Result<Region> {
        let mut v = sites.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&bad) = v.iter().find(|&&s| s >= self.sites()) {
            return Err(Error::InvalidRegion(format!("site {bad} outside 0..{}", self.sites())));
        }
        Ok(Region(v))
    }

    pub fn all(&self) -> Region {
        Region((0..self.sites()).collect())
    }

    pub fn complement(&self, r: &Region) -> Region {
        Region((0..self.sites()).filter(|&s| !r.contains(s)).collect())
    }

    pub fn region_dim(&self, r: &Region) -> usize {
        r.0.iter().map(|&s| self.site_dims[s]).product()
    }

    pub(crate) fn split(&self, r: &Region) -> Split {
        Split::new(self, r)
    }

    /// Places an operator on the region's space (sites in increasing order)
    /// into the global space, with identities on the other sites.
    pub fn embed(&self, r: &Region, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dr = self.region_dim(r);
        if op.shape() != (dr, dr) {
            return Err(Error::DimensionMismatch(format!("operator on region must be {dr}×{dr}")));
        }
        Ok(self.split(r).embed(op))
    }

    pub fn local_algebra(&self, r: &Region) -> LocalAlgebra {
        LocalAlgebra::new(self, r)
    }

    /// `𝒜(O)` as a [`MatrixAlgebra`] on the global space.
    pub fn algebra_of(&self, r: &Region) -> Result<MatrixAlgebra> {
        let la = self.local_algebra(r);
        let n = self.global_dim();
        let size = la.dim().saturating_mul(n * n);
        if size > MATERIALIZE_LIMIT {
            return Err(Error::DimensionCap { dim: size, cap: MATERIALIZE_LIMIT });
        }
        let split = self.split(r);
        let basis = (0..la.dim()).map(|k| split.embed(&la.element(k))).collect();
        Ok(MatrixAlgebra::from_orthonormal_unchecked(n, basis))
    }
}

/// Global index bookkeeping for a region: each global basis index maps to
/// a (region index, rest index) pair.
#[derive(Clone, Debug)]
pub(crate) struct Split {
    pub(crate) region_idx: Vec<usize>,
    pub(crate) rest_idx: Vec<usize>,
    pub(crate) region_dim: usize,
    pub(crate) rest_dim: usize,
    /// `groups[rest][region]` is the global index.
    pub(crate) groups: Vec<Vec<usize>>,
}

impl Split {
    fn new(net: &LatticeNet, r: &Region) -> Self {
        let n = net.global_dim();
        let region_dim = net.region_dim(r);
        let rest_dim = n / region_dim;
        let mut region_idx = vec![0; n];
        let mut rest_idx = vec![0; n];
        let mut groups = vec![vec![0; region_dim]; rest_dim];
        for g in 0..n {
            // digits, site 0 most significant
            let mut rem = g;
            let mut digits = vec![0; net.sites()];
            for s in (0..net.sites()).rev() {
                digits[s] = rem % net.site_dims[s];
                rem /= net.site_dims[s];
            }
            let (mut ri, mut ci) = (0, 0);
            for (s, &dgt) in digits.iter().enumerate() {
                if r.contains(s) {
                    ri = ri * net.site_dims[s] + dgt;
                } else {
                    ci = ci * net.site_dims[s] + dgt;
                }
            }
            region_idx[g] = ri;
            rest_idx[g] = ci;
            groups[ci][ri] = g;
        }
        Self { region_idx, rest_idx, region_dim, rest_dim, groups }
    }

    pub(crate) fn embed(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let n = self.region_idx.len();
        let mut out = linalg::zeros(n, n);
        let nz: Vec<(usize, usize, num_complex::Complex64)> = (0..self.region_dim)
            .flat_map(|a| (0..self.region_dim).map(move |b| (a, b)))
            .filter_map(|(a, b)| {
                let z = op[(a, b)];
                (z != linalg::ZERO).then_some((a, b, z))
            })
            .collect();
        for grp in &self.groups {
            for &(a, b, z) in &nz {
                out[(grp[a], grp[b])] = z;
            }
        }
        out
    }
}

/// Product basis of a region algebra, generated on demand: `√d E_ab` on
/// full sites and `√d E_aa` on diagonal sites, normalized for the global
/// space.
#[derive(Clone, Debug)]
pub struct LocalAlgebra {
    dims: Vec<usize>,
    kinds: Vec<SiteKind>,
    counts: Vec<usize>,
}

impl LocalAlgebra {
    fn new(net: &LatticeNet, r: &Region) -> Self {
        let dims: Vec<usize> = r.0.iter().map(|&s| net.site_dims[s]).collect();
        let kinds: Vec<SiteKind> = r.0.iter().map(|&s| net.kinds[s]).collect();
        let counts = dims
            .iter()
            .zip(&kinds)
            .map(|(&d, k)| match k {
                SiteKind::Full => d * d,
                SiteKind::Diagonal => d,
            })
            .collect();
        Self { dims, kinds, counts }
    }

    pub fn dim(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn region_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Basis element `k` as an operator on the region's space.
    pub fn element(&self, k: usize) -> ComplexMatrix {
        assert!(k < self.dim(), "basis index out of range");
        let mut rem = k;
        let mut out = linalg::identity(1);
        let mut factors = Vec::with_capacity(self.dims.len());
        for s in (0..self.dims.len()).rev() {
            factors.push(rem % self.counts[s]);
            rem /= self.counts[s];
        }
        factors.reverse();
        for (s, &f) in factors.iter().enumerate() {
            let d = self.dims[s];
            let (a, b) = match self.kinds[s] {
                SiteKind::Full => (f / d, f % d),
                SiteKind::Diagonal => (f, f),
            };
            let site = linalg::unit(d, d, a, b) * c((d as f64).sqrt(), 0.0);
            out = linalg::kron(&out, &site);
        }
        out
    }

    /// Random element on the region's space: Gaussian entries, with the
    /// off-diagonal pattern of every diagonal site zeroed.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let n = self.region_dim();
        let digits = |mut x: usize| -> Vec<usize> {
            let mut v = vec![0; self.dims.len()];
            for s in (0..self.dims.len()).rev() {
                v[s] = x % self.dims[s];
                x /= self.dims[s];
            }
            v
        };
        let all: Vec<Vec<usize>> = (0..n).map(digits).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let allowed = (0..self.dims.len())
                .all(|s| self.kinds[s] == SiteKind::Full || all[i][s] == all[j][s]);
            if allowed {
                c(rng.sample(StandardNormal), rng.sample(StandardNormal))
            } else {
                linalg::ZERO
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::commutant;
    use crate::linalg::{kron, pauli_x, pauli_z};
    use crate::tolerance::ToleranceConfig;

    fn qubits(k: usize) -> LatticeNet {
        LatticeNet::uniform(k, 2, SiteKind::Full).unwrap()
    }

    #[test]
    fn algebra_examples() {
        let net = qubits(2);
        assert_eq!(net.algebra_of(&net.region(&[]).unwrap()).unwrap().dim(), 1);
        assert_eq!(net.algebra_of(&net.all()).unwrap().dim(), 16);
        let a0 = net.algebra_of(&net.region(&[0]).unwrap()).unwrap();
        assert_eq!(a0.dim(), 4);
        assert!(a0.contains(&kron(&pauli_x(), &linalg::identity(2)), 1e-12));
        assert!(!a0.contains(&kron(&linalg::identity(2), &pauli_x()), 1e-3));
        a0.validate(&ToleranceConfig::default()).unwrap();
    }

    #[test]
    fn embed_respects_site_order() {
        let net = LatticeNet::new(vec![2, 3, 2], vec![SiteKind::Full; 3]).unwrap();
        let r = net.region(&[0, 2]).unwrap();
        let op = kron(&pauli_x(), &pauli_z());
        let want = kron(&kron(&pauli_x(), &linalg::identity(3)), &pauli_z());
        assert!(linalg::dist(&net.embed(&r, &op).unwrap(), &want) < 1e-12);
    }

    #[test]
    fn locality_and_isotony() {
        let net = LatticeNet::new(vec![2, 2, 3], vec![SiteKind::Full, SiteKind::Diagonal, SiteKind::Full]).unwrap();
        let a = net.algebra_of(&net.region(&[0]).unwrap()).unwrap();
        let b = net.algebra_of(&net.region(&[1, 2]).unwrap()).unwrap();
        let ab = net.algebra_of(&net.region(&[0, 1]).unwrap()).unwrap();
        for x in a.basis() {
            for y in b.basis() {
                assert_eq!(linalg::norm(&linalg::commutator(x, y)), 0.0);
            }
        }
        assert!(a.is_subspace_of(&ab, 1e-12));
        // diagonal site gives a nontrivial center
        let all = net.algebra_of(&net.all()).unwrap();
        let z = crate::algebra::center(&all, &ToleranceConfig::default()).unwrap();
        assert_eq!(z.dim(), 2);
        assert!(commutant(&b, &ToleranceConfig::default()).unwrap().dim() > 1);
    }

    #[test]
    fn cap_and_region_errors() {
        assert!(matches!(LatticeNet::uniform(9, 2, SiteKind::Full), Err(Error::DimensionCap { dim: 512, .. })));
        let net = qubits(3);
        assert!(matches!(net.region(&[3]), Err(Error::InvalidRegion(_))));
        let r = net.region(&[0, 1]).unwrap();
        assert!(RegionPair::new(r.clone(), r.clone()).is_err());
        assert!(RegionPair::new(net.region(&[2]).unwrap(), r).is_err());
    }

    #[test]
    fn random_element_lies_in_algebra() {
        use rand::SeedableRng;
        let net = LatticeNet::new(vec![2, 2], vec![SiteKind::Diagonal, SiteKind::Full]).unwrap();
        let r = net.all();
        let la = net.local_algebra(&r);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = la.random_element(&mut rng);
        assert!(net.algebra_of(&r).unwrap().contains(&x, 1e-10));
    }
}
