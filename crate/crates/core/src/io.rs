//! JSON file formats and deterministic serialization.
//!
//! Matrices are arrays of rows, each row an array of `[re, im]` pairs.
//! [`to_json`] prints every float with 17 significant digits so that equal
//! values always produce identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::algebra::MatrixAlgebra;
use crate::cpmap::{CPMap, StinespringRep};
use crate::decomp::CPMeasure;
use crate::error::{Error, Result};
use crate::linalg::{self, c, pinv, ComplexMatrix};
use crate::localnet::{LatticeNet, SiteKind, DEFAULT_CAP};
use crate::tolerance::ToleranceConfig;

/// Row-major `[re, im]` form of a matrix.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Which algebra a map acts on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlgebraSpec {
    /// `M_n`, with `n` taken from the enclosing map.
    Full,
    /// `⊕ M_{kᵢ}`.
    Blocks { blocks: Vec<usize> },
    /// The global algebra of a lattice net.
    Net { dims: Vec<usize>, kinds: Vec<SiteKind> },
}

impl AlgebraSpec {
    pub fn build(&self, n: usize) -> Result<MatrixAlgebra> {
        let alg = match self {
            AlgebraSpec::Full => MatrixAlgebra::full(n),
            AlgebraSpec::Blocks { blocks } => {
                if blocks.contains(&0) {
                    return Err(Error::Invalid("block sizes must be positive".into()));
                }
                MatrixAlgebra::blocks(blocks)
            }
            AlgebraSpec::Net { dims, kinds } => {
                let net = LatticeNet::with_cap(dims.clone(), kinds.clone(), usize::MAX)?;
                net.algebra_of(&net.all())?
            }
        };
        if alg.space_dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "algebra acts on C^{}, map declares C^{n}",
                alg.space_dim()
            )));
        }
        Ok(alg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapRepr {
    /// `T(X) = Σ Cⱼ* X Cⱼ`, every `Cⱼ` of shape `n × m`.
    Kraus { ops: Vec<MatrixJson> },
    /// Images of a spanning set of the domain.
    Images { basis: Vec<MatrixJson>, images: Vec<MatrixJson> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub n: usize,
    pub m: usize,
    pub domain: AlgebraSpec,
    pub target: AlgebraSpec,
    pub repr: MapRepr,
}

impl MapFile {
    /// Parses and validates, rejecting maps that are not completely positive.
    pub fn to_map(&self, tol: &ToleranceConfig) -> Result<CPMap> {
        let domain = self.domain.build(self.n)?;
        let target = self.target.build(self.m)?;
        match &self.repr {
            MapRepr::Kraus { ops } => {
                let ops = ops.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                CPMap::from_kraus(domain, target, ops, tol)
            }
            MapRepr::Images { basis, images } => {
                let basis = basis.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                let images = images.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                let images = images_on_basis(&domain, &basis, &images, tol)?;
                CPMap::from_images(domain, target, images, tol)
            }
        }
    }

    /// Serializable form: the Kraus family when the map has one, otherwise
    /// the images of its orthonormal domain basis.
    pub fn from_map(t: &CPMap, domain: AlgebraSpec, target: AlgebraSpec) -> Self {
        let repr = match t.kraus_ops() {
            Some(ops) => MapRepr::Kraus { ops: ops.iter().map(matrix_to_json).collect() },
            None => MapRepr::Images {
                basis: t.domain().basis().iter().map(matrix_to_json).collect(),
                images: t.images().iter().map(matrix_to_json).collect(),
            },
        };
        Self { n: t.n(), m: t.m(), domain, target, repr }
    }
}

/// Images of the domain's orthonormal basis from the images of an arbitrary
/// spanning set, by solving the coordinate system in least squares.
fn images_on_basis(
    domain: &MatrixAlgebra,
    basis: &[ComplexMatrix],
    images: &[ComplexMatrix],
    tol: &ToleranceConfig,
) -> Result<Vec<ComplexMatrix>> {
    if basis.len() != images.len() || basis.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} basis elements but {} images",
            basis.len(),
            images.len()
        )));
    }
    let n = domain.space_dim();
    let dim = domain.dim();
    let mut a = linalg::zeros(dim, basis.len());
    for (j, b) in basis.iter().enumerate() {
        if b.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("basis element {j} is not {n}×{n}")));
        }
        let r = domain.residual(b);
        if r > tol.solved_tol() * (1.0 + linalg::norm(b)) {
            return Err(Error::NotInSpan { what: format!("domain algebra (basis element {j})"), residual: r });
        }
        for (i, z) in domain.coordinates(b).into_iter().enumerate() {
            a[(i, j)] = z;
        }
    }
    let a_pinv = pinv(&a, tol.rank_cutoff);
    let miss = linalg::dist(&(&a * &a_pinv), &linalg::identity(dim));
    if miss > tol.solved_tol() * (1.0 + dim as f64) {
        return Err(Error::NotInSpan { what: "span of the given basis (domain not covered)".into(), residual: miss });
    }
    let m = images[0].nrows();
    Ok((0..dim)
        .map(|k| {
            let mut img = linalg::zeros(m, m);
            for (j, x) in images.iter().enumerate() {
                let w = a_pinv[(j, k)];
                if w != linalg::ZERO {
                    img += x * w;
                }
            }
            img
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub barycenter: MapFile,
    pub atoms: Vec<MapFile>,
}

impl MeasureFile {
    pub fn to_measure(&self, tol: &ToleranceConfig) -> Result<CPMeasure> {
        let t = self.barycenter.to_map(tol)?;
        let atoms = self.atoms.iter().map(|a| a.to_map(tol)).collect::<Result<Vec<_>>>()?;
        CPMeasure::new(atoms, t, tol)
    }

    pub fn from_measure(mu: &CPMeasure, domain: AlgebraSpec, target: AlgebraSpec) -> Self {
        Self {
            barycenter: MapFile::from_map(mu.barycenter(), domain.clone(), target.clone()),
            atoms: mu.values().iter().map(|v| MapFile::from_map(v, domain.clone(), target.clone())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetFile {
    pub sites: usize,
    pub dims: Vec<usize>,
    pub kinds: Vec<SiteKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
}

impl NetFile {
    pub fn to_net(&self) -> Result<LatticeNet> {
        if self.sites != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} sites declared, {} dimensions given",
                self.sites,
                self.dims.len()
            )));
        }
        LatticeNet::with_cap(self.dims.clone(), self.kinds.clone(), self.cap.unwrap_or(DEFAULT_CAP))
    }

    pub fn from_net(net: &LatticeNet) -> Self {
        let cap = (net.cap() != DEFAULT_CAP).then_some(net.cap());
        Self { sites: net.sites(), dims: net.site_dims().to_vec(), kinds: net.kinds().to_vec(), cap }
    }

    pub fn algebra_spec(&self) -> AlgebraSpec {
        AlgebraSpec::Net { dims: self.dims.clone(), kinds: self.kinds.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationFile {
    pub dilation_dim: usize,
    pub pi_images: Vec<MatrixJson>,
    #[serde(rename = "V")]
    pub v: MatrixJson,
    pub reconstruction_residual: f64,
}

impl DilationFile {
    pub fn from_rep(rep: &StinespringRep, t: &CPMap) -> Self {
        Self {
            dilation_dim: rep.dilation_dim(),
            pi_images: rep.pi_images().iter().map(matrix_to_json).collect(),
            v: matrix_to_json(rep.v()),
            reconstruction_residual: rep.reconstruction_residual(t),
        }
    }

    /// Rebuilds the dilation over the given domain and checks that it is
    /// a representation reproducing `t`.
    pub fn to_rep(&self, t: &CPMap, tol: &ToleranceConfig) -> Result<StinespringRep> {
        let pi = self.pi_images.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let rep = StinespringRep::new(t.domain().clone(), pi, matrix_from_json(&self.v)?)?;
        let scale = 1.0 + t.images().iter().map(linalg::norm).fold(0.0, f64::max);
        let r = rep.reconstruction_residual(t);
        if r > tol.solved_tol() * scale {
            return Err(Error::Inconsistent { what: "dilation does not reproduce the map".into(), residual: r });
        }
        let h = rep.multiplicativity_residual();
        if h > tol.solved_tol() * (1.0 + rep.dilation_dim() as f64) {
            return Err(Error::Inconsistent { what: "π is not a representation".into(), residual: h });
        }
        Ok(rep)
    }
}

/// Verdicts with their certificates and optional artifacts. Every verdict
/// key also appears among the certificates or the artifacts.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub verdicts: BTreeMap<String, bool>,
    pub certificates: BTreeMap<String, f64>,
    pub artifacts: BTreeMap<String, serde_json::Value>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), ..Default::default() }
    }

    pub fn verdict(&mut self, name: &str, value: bool, certificate: f64) {
        self.verdicts.insert(name.to_string(), value);
        self.certificates.insert(name.to_string(), certificate);
    }

    pub fn verdict_with_artifact(&mut self, name: &str, value: bool, artifact: serde_json::Value) {
        self.verdicts.insert(name.to_string(), value);
        self.artifacts.insert(name.to_string(), artifact);
    }

    pub fn certificate(&mut self, name: &str, value: f64) {
        self.certificates.insert(name.to_string(), value);
    }

    pub fn artifact(&mut self, name: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value).map_err(|e| Error::Invalid(format!("serialization: {e}")))?;
        self.artifacts.insert(name.to_string(), v);
        Ok(())
    }

    /// Verdicts lacking both a certificate and an artifact.
    pub fn unbacked_verdicts(&self) -> Vec<&str> {
        self.verdicts
            .keys()
            .filter(|k| !self.certificates.contains_key(*k) && !self.artifacts.contains_key(*k))
            .map(String::as_str)
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }
}

/// Pretty printing with floats in `{:.16e}` form.
struct FixedFloats(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + std::io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        // -0.0 and 0.0 print alike
        let v = if value == 0.0 { 0.0 } else { value };
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Deterministic pretty JSON: map keys in struct or `BTreeMap` order, floats
/// with 17 significant digits, non-finite floats as `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Invalid(format!("serialization: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Invalid(format!("serialization: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn floats_print_with_seventeen_digits() {
        let s = to_json(&vec![0.1, -0.0, 1e-300, f64::NAN]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("0.0000000000000000e0"), "{s}");
        assert!(s.contains("1.0000000000000000e-300"), "{s}");
        assert!(s.contains("null"), "{s}");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Some(0.1));
    }

    #[test]
    fn kraus_file_roundtrip() {
        let t = catalog::depolarizing();
        let f = MapFile::from_map(&t, AlgebraSpec::Full, AlgebraSpec::Full);
        let text = to_json(&f).unwrap();
        let back: MapFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(back.to_map(&tol()).unwrap().distance(&t) < 1e-15);
    }

    #[test]
    fn images_on_a_nonorthonormal_basis() {
        // the identity map on C², given on {1, E11}
        let basis = [linalg::identity(2), linalg::unit(2, 2, 0, 0)];
        let f = MapFile {
            n: 2,
            m: 2,
            domain: AlgebraSpec::Blocks { blocks: vec![1, 1] },
            target: AlgebraSpec::Blocks { blocks: vec![1, 1] },
            repr: MapRepr::Images {
                basis: basis.iter().map(matrix_to_json).collect(),
                images: basis.iter().map(matrix_to_json).collect(),
            },
        };
        let t = f.to_map(&tol()).unwrap();
        let e22 = linalg::unit(2, 2, 1, 1);
        assert!(linalg::dist(&t.eval(&e22), &e22) < 1e-12);
    }

    #[test]
    fn rejects_bad_files() {
        let mut f = MapFile::from_map(&catalog::transpose(), AlgebraSpec::Full, AlgebraSpec::Full);
        assert!(matches!(f.to_map(&tol()), Err(Error::NotCompletelyPositive { .. })));
        f.domain = AlgebraSpec::Blocks { blocks: vec![1, 2] };
        assert!(f.to_map(&tol()).is_err());
        let f = MapFile {
            n: 2,
            m: 1,
            domain: AlgebraSpec::Full,
            target: AlgebraSpec::Full,
            repr: MapRepr::Images {
                basis: vec![matrix_to_json(&linalg::identity(2))],
                images: vec![matrix_to_json(&linalg::identity(1))],
            },
        };
        assert!(matches!(f.to_map(&tol()), Err(Error::NotInSpan { .. })));
    }

    #[test]
    fn dilation_file_roundtrip() {
        let t = catalog::depolarizing();
        let rep = crate::cpmap::stinespring_for(&t, &tol()).unwrap();
        let f = DilationFile::from_rep(&rep, &t);
        let back: DilationFile = serde_json::from_str(&to_json(&f).unwrap()).unwrap();
        assert_eq!(back.dilation_dim, 8);
        back.to_rep(&t, &tol()).unwrap();
    }

    #[test]
    fn net_file_roundtrip() {
        let text = r#"{"sites": 2, "dims": [2, 3], "kinds": ["diag", "full"]}"#;
        let f: NetFile = serde_json::from_str(text).unwrap();
        let net = f.to_net().unwrap();
        assert_eq!(net.global_dim(), 6);
        assert_eq!(NetFile::from_net(&net), f);
        let bad: NetFile = serde_json::from_str(r#"{"sites": 3, "dims": [2, 3], "kinds": ["full", "full"]}"#).unwrap();
        assert!(bad.to_net().is_err());
    }
}
