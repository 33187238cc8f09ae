//! Completely positive maps between matrix algebras.
//!
//! A [`CPMap`] is stored by its action on the orthonormal basis of the domain
//! algebra. Maps built from a Kraus family keep the family, which makes
//! evaluation on arbitrary matrices cheap.

mod kraus;
mod stinespring;

pub use kraus::KrausMap;
pub use stinespring::{
    commutant_lifting, intertwiner_space, intertwining_unitary, minimal_stinespring, relative_commutant,
    stinespring_for, stinespring_from_kraus, StinespringRep,
};

use crate::algebra::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix};
use crate::tolerance::ToleranceConfig;
use num_complex::Complex64;

/// Anything that maps `n × n` matrices linearly to `m × m` matrices.
pub trait LinearMap: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix;
}

#[derive(Clone, Debug)]
pub struct CPMap {
    domain: MatrixAlgebra,
    target: MatrixAlgebra,
    images: Vec<ComplexMatrix>,
    kraus: Option<KrausMap>,
}

/// Outcome of the Gram-matrix complete positivity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CpCertificate {
    pub completely_positive: bool,
    pub min_eigenvalue: f64,
}

impl CPMap {
    /// Builds a map from basis images and rejects it unless it is completely positive.
    pub fn from_images(
        domain: MatrixAlgebra,
        target: MatrixAlgebra,
        images: Vec<ComplexMatrix>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let map = Self::from_images_unverified(domain, target, images, tol)?;
        let cert = is_completely_positive(&map, tol)?;
        if !cert.completely_positive {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: cert.min_eigenvalue });
        }
        Ok(map)
    }

    /// Structural checks only: shapes, images in the target span, and
    /// `T(B*) = T(B)*`. Complete positivity is left to the caller.
    pub fn from_images_unverified(
        domain: MatrixAlgebra,
        target: MatrixAlgebra,
        images: Vec<ComplexMatrix>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        let m = target.space_dim();
        for (k, img) in images.iter().enumerate() {
            if img.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "image {k} has shape {:?}, expected {m}×{m}",
                    img.shape()
                )));
            }
            let r = target.residual(img);
            if r > tol.solved_tol() * (1.0 + linalg::norm(img)) {
                return Err(Error::NotInSpan { what: format!("target algebra (image {k})"), residual: r });
            }
        }
        let map = Self { domain, target, images, kraus: None };
        let herm = map.hermiticity_defect();
        if herm > tol.solved_tol() * (1.0 + map.scale()) {
            return Err(Error::Invalid(format!("map does not preserve adjoints (defect {herm:.3e})")));
        }
        Ok(map)
    }

    /// `T(X) = Σⱼ Cⱼ* X Cⱼ` with every `Cⱼ` of shape `n × m`.
    pub fn from_kraus(
        domain: MatrixAlgebra,
        target: MatrixAlgebra,
        ops: Vec<ComplexMatrix>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let kraus = KrausMap::new(domain.space_dim(), target.space_dim(), ops)?;
        let images: Vec<ComplexMatrix> = domain.basis().iter().map(|b| kraus.apply(b)).collect();
        for (k, img) in images.iter().enumerate() {
            let r = target.residual(img);
            if r > tol.solved_tol() * (1.0 + linalg::norm(img)) {
                return Err(Error::NotInSpan { what: format!("target algebra (image {k})"), residual: r });
            }
        }
        Ok(Self { domain, target, images, kraus: Some(kraus) })
    }

    /// Evaluates `f` on the domain basis. Complete positivity is not checked.
    pub fn from_fn_unverified(
        domain: MatrixAlgebra,
        target: MatrixAlgebra,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        let images = domain.basis().iter().map(f).collect();
        Self::from_images_unverified(domain, target, images, tol)
    }

    pub fn zero(domain: MatrixAlgebra, target: MatrixAlgebra) -> Self {
        let m = target.space_dim();
        let images = vec![linalg::zeros(m, m); domain.dim()];
        Self { domain, target, images, kraus: None }
    }

    pub fn domain(&self) -> &MatrixAlgebra {
        &self.domain
    }

    pub fn target(&self) -> &MatrixAlgebra {
        &self.target
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    pub fn kraus_ops(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_ref().map(|k| k.ops())
    }

    /// Domain Hilbert space dimension `n`.
    pub fn n(&self) -> usize {
        self.domain.space_dim()
    }

    /// Target Hilbert space dimension `m`.
    pub fn m(&self) -> usize {
        self.target.space_dim()
    }

    /// Evaluates on an element of the domain algebra. Without a Kraus family
    /// the argument is first projected onto the domain span.
    pub fn eval(&self, x: &ComplexMatrix) -> ComplexMatrix {
        if let Some(k) = &self.kraus {
            return k.apply(x);
        }
        self.eval_coords(&self.domain.coordinates(x))
    }

    pub fn eval_coords(&self, coords: &[Complex64]) -> ComplexMatrix {
        let m = self.m();
        let mut out = linalg::zeros(m, m);
        for (img, &z) in self.images.iter().zip(coords) {
            if z != linalg::ZERO {
                out += img * z;
            }
        }
        out
    }

    fn scale(&self) -> f64 {
        self.images.iter().map(linalg::norm).fold(0.0, f64::max)
    }

    fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (b, img) in self.domain.basis().iter().zip(&self.images) {
            let adj_img = self.eval_coords(&self.domain.coordinates(&b.adjoint()));
            worst = worst.max(linalg::dist(&adj_img, &img.adjoint()));
        }
        worst
    }

    pub(crate) fn check_compatible(&self, other: &CPMap) -> Result<()> {
        if self.domain.space_dim() != other.domain.space_dim()
            || self.domain.dim() != other.domain.dim()
            || self.target.space_dim() != other.target.space_dim()
        {
            return Err(Error::DimensionMismatch("maps have different domain or target".into()));
        }
        let drift = self
            .domain
            .basis()
            .iter()
            .zip(other.domain.basis())
            .map(|(a, b)| linalg::dist(a, b))
            .fold(0.0, f64::max);
        if drift > 1e-9 {
            return Err(Error::DimensionMismatch("maps use different domain bases".into()));
        }
        Ok(())
    }

    fn combine(&self, other: &CPMap, a: f64, b: f64) -> Result<CPMap> {
        self.check_compatible(other)?;
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(x, y)| x * c(a, 0.0) + y * c(b, 0.0))
            .collect();
        let kraus = match (&self.kraus, &other.kraus) {
            (Some(k1), Some(k2)) if a >= 0.0 && b >= 0.0 => Some(k1.scaled(a).concat(&k2.scaled(b))),
            _ => None,
        };
        Ok(CPMap { domain: self.domain.clone(), target: self.target.clone(), images, kraus })
    }

    pub fn add(&self, other: &CPMap) -> Result<CPMap> {
        self.combine(other, 1.0, 1.0)
    }

    /// `self − other`; generally not completely positive.
    pub fn sub(&self, other: &CPMap) -> Result<CPMap> {
        self.combine(other, 1.0, -1.0)
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &CPMap, b: f64) -> Result<CPMap> {
        self.combine(other, a, b)
    }

    pub fn scaled(&self, a: f64) -> CPMap {
        CPMap {
            domain: self.domain.clone(),
            target: self.target.clone(),
            images: self.images.iter().map(|x| x * c(a, 0.0)).collect(),
            kraus: if a >= 0.0 { self.kraus.as_ref().map(|k| k.scaled(a)) } else { None },
        }
    }

    /// Largest Frobenius distance between images of the same basis element.
    pub fn distance(&self, other: &CPMap) -> f64 {
        self.images
            .iter()
            .zip(&other.images)
            .map(|(x, y)| linalg::dist(x, y))
            .fold(0.0, f64::max)
    }

    /// `‖T(1) − 1‖`.
    pub fn unitality_defect(&self) -> f64 {
        linalg::dist(&self.eval(&self.domain.identity()), &linalg::identity(self.m()))
    }

    pub fn drop_kraus(mut self) -> Self {
        self.kraus = None;
        self
    }
}

impl LinearMap for CPMap {
    fn input_dim(&self) -> usize {
        self.n()
    }

    fn output_dim(&self) -> usize {
        self.m()
    }

    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.eval(x)
    }
}

/// The block Gram matrix `G[(i,k),(j,l)] = ⟨e_k | T(Bᵢ* Bⱼ) e_l⟩` over the
/// domain basis `{Bᵢ}` and the standard basis `{e_k}` of the target space.
/// `T` is completely positive on the domain algebra iff `G ⪰ 0`.
pub fn gram_matrix(t: &CPMap) -> ComplexMatrix {
    let b = t.domain.dim();
    let m = t.m();
    let basis = t.domain.basis();
    let mut g = linalg::zeros(b * m, b * m);
    for i in 0..b {
        let bi_adj = basis[i].adjoint();
        for j in i..b {
            let img = t.eval(&(&bi_adj * &basis[j]));
            for k in 0..m {
                for l in 0..m {
                    g[(i * m + k, j * m + l)] = img[(k, l)];
                    if i != j {
                        g[(j * m + l, i * m + k)] = img[(k, l)].conj();
                    }
                }
            }
        }
    }
    g
}

/// Complete positivity via the Gram matrix: CP iff its minimum eigenvalue is
/// at least `−abs_tol`.
pub fn is_completely_positive(t: &CPMap, tol: &ToleranceConfig) -> Result<CpCertificate> {
    for (k, b) in t.domain.basis().iter().enumerate() {
        for b2 in t.domain.basis() {
            let prod = b.adjoint() * b2;
            let r = t.domain.residual(&prod);
            if r > tol.solved_tol() * (1.0 + linalg::norm(&prod)) {
                return Err(Error::NotInSpan { what: format!("domain algebra (product with basis {k})"), residual: r });
            }
        }
    }
    let g = gram_matrix(t);
    let lam = linalg::min_eigenvalue(&g);
    Ok(CpCertificate { completely_positive: lam >= -tol.abs_tol, min_eigenvalue: lam })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, trace, unit};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    pub(crate) fn identity_map(n: usize) -> CPMap {
        CPMap::from_kraus(MatrixAlgebra::full(n), MatrixAlgebra::full(n), vec![identity(n)], &tol()).unwrap()
    }

    #[test]
    fn identity_is_cp_with_zero_min_eigenvalue() {
        let cert = is_completely_positive(&identity_map(2), &tol()).unwrap();
        assert!(cert.completely_positive);
        assert!(cert.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn transpose_is_not_cp() {
        let t = CPMap::from_fn_unverified(MatrixAlgebra::full(2), MatrixAlgebra::full(2), |x| x.transpose(), &tol())
            .unwrap();
        let cert = is_completely_positive(&t, &tol()).unwrap();
        assert!(!cert.completely_positive);
        // frozen from the brute-force Gram oracle below
        assert!((cert.min_eigenvalue + 2.0).abs() < 1e-10, "{}", cert.min_eigenvalue);
        let g = crate::oracle::brute_force_gram(|x| x.transpose(), t.domain().basis(), 2);
        let oracle_min = crate::oracle::hermitian_eigenvalues(&g)[0];
        assert!((oracle_min - cert.min_eigenvalue).abs() < 1e-10);
        let err = CPMap::from_images(t.domain().clone(), t.target().clone(), t.images().to_vec(), &tol());
        assert!(matches!(err, Err(Error::NotCompletelyPositive { .. })));
    }

    #[test]
    fn completely_depolarizing_is_cp() {
        let t = CPMap::from_fn_unverified(
            MatrixAlgebra::full(2),
            MatrixAlgebra::full(2),
            |x| identity(2) * (trace(x) * c(0.5, 0.0)),
            &tol(),
        )
        .unwrap();
        let cert = is_completely_positive(&t, &tol()).unwrap();
        assert!(cert.completely_positive);
        let g = crate::oracle::brute_force_gram(|x| identity(2) * (trace(x) * c(0.5, 0.0)), t.domain().basis(), 2);
        let oracle_min = crate::oracle::hermitian_eigenvalues(&g)[0];
        assert!((oracle_min - cert.min_eigenvalue).abs() < 1e-10);
        assert!(oracle_min > 0.5);
    }

    #[test]
    fn target_span_is_enforced() {
        // identity on M_2 cannot land in the diagonal algebra
        let r = CPMap::from_kraus(MatrixAlgebra::full(2), MatrixAlgebra::diagonal(2), vec![identity(2)], &tol());
        assert!(matches!(r, Err(Error::NotInSpan { .. })));
        // pinching can
        let p = CPMap::from_kraus(
            MatrixAlgebra::full(2),
            MatrixAlgebra::diagonal(2),
            vec![unit(2, 2, 0, 0), unit(2, 2, 1, 1)],
            &tol(),
        );
        assert!(p.is_ok());
    }

    #[test]
    fn arithmetic_on_images() {
        let t = identity_map(2);
        let s = t.add(&t).unwrap();
        assert!(s.distance(&t.scaled(2.0)) < 1e-12);
        let z = t.sub(&t).unwrap();
        assert!(z.images().iter().all(|m| linalg::norm(m) < 1e-12));
        assert!(t.unitality_defect() < 1e-12);
    }
}
