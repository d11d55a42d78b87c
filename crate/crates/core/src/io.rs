//! JSON documents and CSV export.
//!
//! Every document is an envelope `{"kind": …, "version": "1", "payload": …}`.
//! Complex numbers are `[re, im]` pairs (a bare number is read as real),
//! matrices are row-major with explicit `rows`/`cols`, polynomials carry
//! ascending coefficients. Floats are written with 17 significant digits so
//! that reading a document back reproduces every value bit for bit.

use std::fmt;
use std::io;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::harness::{Cluster, ClusterSpec, SweepRecord, SweepResult, SweepSlopes};
use crate::linalg::{c64, ComplexMatrix, C64};
use crate::radical::{Generator, MultiPoly, RadicalOutput};
use crate::rank::{RankMethod, RankReport};
use crate::traces::{MonomialBasis, MulMatrixSet, Point, TraceMatrix};
use crate::univariate::{Polynomial, SquareFreeResult};

pub const FORMAT_VERSION: &str = "1";

/// Header of the sweep CSV export.
pub const SWEEP_CSV_HEADER: [&str; 5] = ["epsilon", "pivot_tail", "sigma_tail", "mean_error", "commutator_norm"];

const NON_FINITE_MARK: &str = "non-finite value";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("unknown document kind {0:?}")]
    UnknownKind(String),

    #[error("unsupported format version {found:?} (expected {expected:?})")]
    VersionMismatch { found: String, expected: String },

    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },

    #[error("invalid {path}: {message}")]
    Invalid { path: String, message: String },

    #[error("non-finite value in {path}")]
    NonFinite { path: String },

    #[error("expected a {expected} document, found {found}")]
    WrongKind { expected: String, found: String },

    #[error("csv: {0}")]
    Csv(String),
}

fn invalid(path: &str, e: impl fmt::Display) -> FormatError {
    FormatError::Invalid {
        path: path.into(),
        message: e.to_string(),
    }
}

/// Finite float; serializing NaN or infinity is an error instead of `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct F64(f64);

impl Serialize for F64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(NON_FINITE_MARK));
        }
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for F64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() {
            return Err(serde::de::Error::custom(NON_FINITE_MARK));
        }
        Ok(F64(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cx(C64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [F64(self.0.re), F64(self.0.im)].serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CxRepr {
    Real(F64),
    Pair([F64; 2]),
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match CxRepr::deserialize(d) {
            Ok(CxRepr::Real(x)) => Ok(Cx(c64(x.0, 0.0))),
            Ok(CxRepr::Pair([re, im])) => Ok(Cx(c64(re.0, im.0))),
            Err(_) => Err(serde::de::Error::custom(
                "expected a finite complex number [re, im] or a real number",
            )),
        }
    }
}

fn cx_vec(v: &[C64]) -> Vec<Cx> {
    v.iter().cloned().map(Cx).collect()
}

fn un_cx(v: Vec<Cx>) -> Vec<C64> {
    v.into_iter().map(|c| c.0).collect()
}

fn f_vec(v: &[f64]) -> Vec<F64> {
    v.iter().cloned().map(F64).collect()
}

fn un_f(v: Vec<F64>) -> Vec<f64> {
    v.into_iter().map(|c| c.0).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    entries: Vec<Cx>,
}

impl MatrixWire {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: cx_vec(m.as_slice()),
        }
    }

    fn into_matrix(self, path: &str) -> Result<ComplexMatrix, FormatError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(invalid(
                path,
                format!(
                    "{} entries for a {}x{} matrix",
                    self.entries.len(),
                    self.rows,
                    self.cols
                ),
            ));
        }
        ComplexMatrix::new(self.rows, self.cols, un_cx(self.entries)).map_err(|e| invalid(path, e))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyWire {
    degree: usize,
    coeffs: Vec<Cx>,
}

impl PolyWire {
    fn from(p: &Polynomial) -> Self {
        Self {
            degree: p.degree(),
            coeffs: cx_vec(p.coeffs()),
        }
    }

    fn into_poly(self, path: &str) -> Result<Polynomial, FormatError> {
        if self.coeffs.len() != self.degree + 1 {
            return Err(invalid(
                path,
                format!("degree {} needs {} coefficients, got {}", self.degree, self.degree + 1, self.coeffs.len()),
            ));
        }
        if self.coeffs.last().map(|c| c.0) == Some(c64(0.0, 0.0)) {
            return Err(invalid(path, "leading coefficient is zero"));
        }
        Polynomial::new(un_cx(self.coeffs)).map_err(|e| invalid(path, e))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisWire {
    num_vars: usize,
    monomials: Vec<Vec<u32>>,
}

impl BasisWire {
    fn from(b: &MonomialBasis) -> Self {
        Self {
            num_vars: b.num_vars(),
            monomials: b.monomials().to_vec(),
        }
    }

    fn into_basis(self, path: &str) -> Result<MonomialBasis, FormatError> {
        MonomialBasis::new(self.num_vars, self.monomials).map_err(|e| invalid(path, e))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MulMatsWire {
    basis: BasisWire,
    matrices: Vec<MatrixWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsWire {
    num_vars: usize,
    points: Vec<Vec<Cx>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterWire {
    center: Vec<Cx>,
    offsets: Vec<Vec<Cx>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterSpecWire {
    num_vars: usize,
    epsilon: F64,
    clusters: Vec<ClusterWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<BasisWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceMatrixWire {
    basis: BasisWire,
    matrix: MatrixWire,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankReportWire {
    rank: usize,
    method: String,
    diagnostics: Vec<F64>,
    threshold_used: F64,
}

impl RankReportWire {
    fn from(r: &RankReport) -> Self {
        Self {
            rank: r.rank,
            method: r.method.as_str().into(),
            diagnostics: f_vec(&r.diagnostics),
            threshold_used: F64(r.threshold_used),
        }
    }

    fn into_report(self, path: &str) -> Result<RankReport, FormatError> {
        let method =
            RankMethod::parse(&self.method).ok_or_else(|| invalid(path, format!("unknown method {:?}", self.method)))?;
        Ok(RankReport {
            rank: self.rank,
            method,
            diagnostics: un_f(self.diagnostics),
            threshold_used: self.threshold_used.0,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermWire {
    exps: Vec<u32>,
    coeff: Cx,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultiPolyWire {
    num_vars: usize,
    terms: Vec<TermWire>,
}

impl MultiPolyWire {
    fn from(p: &MultiPoly) -> Self {
        Self {
            num_vars: p.num_vars,
            terms: p
                .terms
                .iter()
                .map(|(e, c)| TermWire {
                    exps: e.clone(),
                    coeff: Cx(*c),
                })
                .collect(),
        }
    }

    fn into_poly(self, path: &str) -> Result<MultiPoly, FormatError> {
        if self.terms.iter().any(|t| t.exps.len() != self.num_vars) {
            return Err(invalid(path, "exponent vector of wrong length"));
        }
        Ok(MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.into_iter().map(|t| (t.exps, t.coeff.0)).collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorWire {
    var: usize,
    basis_index: usize,
    poly: MultiPolyWire,
}

/// Serializable summary of a [`RadicalOutput`].
#[derive(Clone, Debug, PartialEq)]
pub struct RadicalDocument {
    pub rank: usize,
    pub basis: MonomialBasis,
    pub row_basis: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub col_basis: MonomialBasis,
    pub generators: Vec<Generator>,
    pub nullspace: Vec<MultiPoly>,
    pub mul_primes: Vec<ComplexMatrix>,
    pub means: Vec<Point>,
    pub commutator_norms: Vec<f64>,
    pub commutator_max_entry: f64,
    pub offdiag_residuals: Vec<f64>,
    pub block_condition: f64,
    pub report: RankReport,
    pub cross_check: Option<RankReport>,
}

impl From<&RadicalOutput> for RadicalDocument {
    fn from(o: &RadicalOutput) -> Self {
        Self {
            rank: o.rank,
            basis: o.basis.clone(),
            row_basis: o.row_basis.clone(),
            col_indices: o.col_indices.clone(),
            col_basis: o.col_basis.clone(),
            generators: o.generators.clone(),
            nullspace: o.nullspace.clone(),
            mul_primes: o.mul_primes.clone(),
            means: o.means.points.clone(),
            commutator_norms: o.commutator_norms.clone(),
            commutator_max_entry: o.commutator_max_entry,
            offdiag_residuals: o.means.offdiag_residuals.clone(),
            block_condition: o.block_condition,
            report: o.report.clone(),
            cross_check: o.cross_check.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadicalWire {
    rank: usize,
    basis: BasisWire,
    row_basis: Vec<usize>,
    col_indices: Vec<usize>,
    col_basis: BasisWire,
    generators: Vec<GeneratorWire>,
    nullspace: Vec<MultiPolyWire>,
    mul_primes: Vec<MatrixWire>,
    means: Vec<Vec<Cx>>,
    commutator_norms: Vec<F64>,
    commutator_max_entry: F64,
    offdiag_residuals: Vec<F64>,
    block_condition: F64,
    report: RankReportWire,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cross_check: Option<RankReportWire>,
}

/// Serializable summary of a [`SquareFreeResult`].
#[derive(Clone, Debug, PartialEq)]
pub struct SquareFreeDocument {
    pub factor: Polynomial,
    pub roots: Vec<C64>,
    pub rank: usize,
    pub nullspace: Vec<Polynomial>,
    pub report: RankReport,
    pub cross_check: RankReport,
}

impl SquareFreeDocument {
    pub fn new(r: &SquareFreeResult) -> crate::Result<Self> {
        Ok(Self {
            factor: r.factor.clone(),
            roots: r.factor.roots()?,
            rank: r.rank,
            nullspace: r.nullspace_polys.clone(),
            report: r.report.clone(),
            cross_check: r.cross_check.clone(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SquareFreeWire {
    factor: PolyWire,
    roots: Vec<Cx>,
    rank: usize,
    nullspace: Vec<PolyWire>,
    report: RankReportWire,
    cross_check: RankReportWire,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepRecordWire {
    epsilon: F64,
    pivot_tail: F64,
    sigma_tail: F64,
    mean_error: F64,
    commutator_norm: F64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlopesWire {
    pivot_tail: Option<F64>,
    sigma_tail: Option<F64>,
    mean_error: Option<F64>,
    commutator_norm: Option<F64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepWire {
    rank: usize,
    records: Vec<SweepRecordWire>,
    slopes: SlopesWire,
    skipped: Vec<F64>,
}

/// Explicit root list.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub num_vars: usize,
    pub points: Vec<Point>,
}

/// Every document kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Polynomial(Polynomial),
    Matrix(ComplexMatrix),
    MulMats(MulMatrixSet),
    Basis(MonomialBasis),
    ClusterSpec(ClusterSpec),
    RadicalOutput(RadicalDocument),
    Sweep(SweepResult),
    Points(PointSet),
    TraceMatrix(TraceMatrix),
    RankReport(RankReport),
    SquareFree(SquareFreeDocument),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Polynomial(_) => "polynomial",
            Document::Matrix(_) => "matrix",
            Document::MulMats(_) => "mulmats",
            Document::Basis(_) => "basis",
            Document::ClusterSpec(_) => "cluster-spec",
            Document::RadicalOutput(_) => "radical-output",
            Document::Sweep(_) => "sweep",
            Document::Points(_) => "points",
            Document::TraceMatrix(_) => "trace-matrix",
            Document::RankReport(_) => "rank-report",
            Document::SquareFree(_) => "square-free",
        }
    }
}

pub const KINDS: [&str; 11] = [
    "polynomial",
    "matrix",
    "mulmats",
    "basis",
    "cluster-spec",
    "radical-output",
    "sweep",
    "points",
    "trace-matrix",
    "rank-report",
    "square-free",
];

#[derive(Deserialize)]
struct RawEnvelope {
    kind: String,
    version: String,
    #[allow(dead_code)]
    payload: serde::de::IgnoredAny,
}

#[derive(Serialize)]
struct OutEnvelope<'a, T> {
    kind: &'a str,
    version: &'a str,
    payload: T,
}

#[derive(Deserialize)]
struct InEnvelope<T> {
    #[allow(dead_code)]
    kind: String,
    #[allow(dead_code)]
    version: String,
    payload: T,
}

fn convert_json_error(e: serde_json::Error) -> FormatError {
    let message = e.to_string();
    if message.contains(NON_FINITE_MARK) {
        return FormatError::NonFinite {
            path: format!("line {}, column {}", e.line(), e.column()),
        };
    }
    match e.classify() {
        serde_json::error::Category::Data => FormatError::Schema {
            line: e.line(),
            column: e.column(),
            message,
        },
        _ => FormatError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        },
    }
}

fn payload<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    serde_json::from_str::<InEnvelope<T>>(text)
        .map(|e| e.payload)
        .map_err(convert_json_error)
}

/// Parses any document.
pub fn parse(text: &str) -> Result<Document, FormatError> {
    let raw: RawEnvelope = serde_json::from_str(text).map_err(convert_json_error)?;
    if !KINDS.contains(&raw.kind.as_str()) {
        return Err(FormatError::UnknownKind(raw.kind));
    }
    if raw.version != FORMAT_VERSION {
        return Err(FormatError::VersionMismatch {
            found: raw.version,
            expected: FORMAT_VERSION.into(),
        });
    }
    let doc = match raw.kind.as_str() {
        "polynomial" => Document::Polynomial(payload::<PolyWire>(text)?.into_poly("payload")?),
        "matrix" => Document::Matrix(payload::<MatrixWire>(text)?.into_matrix("payload")?),
        "basis" => Document::Basis(payload::<BasisWire>(text)?.into_basis("payload")?),
        "mulmats" => {
            let w: MulMatsWire = payload(text)?;
            let basis = w.basis.into_basis("payload.basis")?;
            let mats = w
                .matrices
                .into_iter()
                .enumerate()
                .map(|(i, m)| m.into_matrix(&format!("payload.matrices[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Document::MulMats(MulMatrixSet::new(basis, mats).map_err(|e| invalid("payload", e))?)
        }
        "points" => {
            let w: PointsWire = payload(text)?;
            if let Some(i) = w.points.iter().position(|p| p.len() != w.num_vars) {
                return Err(invalid(&format!("payload.points[{i}]"), "wrong dimension"));
            }
            Document::Points(PointSet {
                num_vars: w.num_vars,
                points: w.points.into_iter().map(un_cx).collect(),
            })
        }
        "cluster-spec" => {
            let w: ClusterSpecWire = payload(text)?;
            let clusters = w
                .clusters
                .into_iter()
                .map(|c| Cluster {
                    center: un_cx(c.center),
                    offsets: c.offsets.into_iter().map(un_cx).collect(),
                })
                .collect();
            let mut spec = ClusterSpec::new(w.num_vars, clusters, w.epsilon.0).map_err(|e| invalid("payload", e))?;
            if let Some(b) = w.basis {
                spec = spec
                    .with_basis(b.into_basis("payload.basis")?)
                    .map_err(|e| invalid("payload.basis", e))?;
            }
            Document::ClusterSpec(spec)
        }
        "trace-matrix" => {
            let w: TraceMatrixWire = payload(text)?;
            let basis = w.basis.into_basis("payload.basis")?;
            let matrix = w.matrix.into_matrix("payload.matrix")?;
            if matrix.rows() != basis.len() || matrix.cols() != basis.len() {
                return Err(invalid("payload.matrix", "size does not match basis"));
            }
            Document::TraceMatrix(TraceMatrix { matrix, basis })
        }
        "rank-report" => Document::RankReport(payload::<RankReportWire>(text)?.into_report("payload")?),
        "square-free" => {
            let w: SquareFreeWire = payload(text)?;
            Document::SquareFree(SquareFreeDocument {
                factor: w.factor.into_poly("payload.factor")?,
                roots: un_cx(w.roots),
                rank: w.rank,
                nullspace: w
                    .nullspace
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| p.into_poly(&format!("payload.nullspace[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
                report: w.report.into_report("payload.report")?,
                cross_check: w.cross_check.into_report("payload.cross_check")?,
            })
        }
        "radical-output" => Document::RadicalOutput(radical_from_wire(payload(text)?)?),
        "sweep" => {
            let w: SweepWire = payload(text)?;
            Document::Sweep(SweepResult {
                rank: w.rank,
                records: w
                    .records
                    .into_iter()
                    .map(|r| SweepRecord {
                        epsilon: r.epsilon.0,
                        pivot_tail: r.pivot_tail.0,
                        sigma_tail: r.sigma_tail.0,
                        mean_error: r.mean_error.0,
                        commutator_norm: r.commutator_norm.0,
                    })
                    .collect(),
                slopes: SweepSlopes {
                    pivot_tail: w.slopes.pivot_tail.map(|x| x.0),
                    sigma_tail: w.slopes.sigma_tail.map(|x| x.0),
                    mean_error: w.slopes.mean_error.map(|x| x.0),
                    commutator_norm: w.slopes.commutator_norm.map(|x| x.0),
                },
                skipped: un_f(w.skipped),
            })
        }
        _ => unreachable!("kind checked above"),
    };
    Ok(doc)
}

fn radical_from_wire(w: RadicalWire) -> Result<RadicalDocument, FormatError> {
    Ok(RadicalDocument {
        rank: w.rank,
        basis: w.basis.into_basis("payload.basis")?,
        row_basis: w.row_basis,
        col_indices: w.col_indices,
        col_basis: w.col_basis.into_basis("payload.col_basis")?,
        generators: w
            .generators
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                Ok(Generator {
                    var: g.var,
                    basis_index: g.basis_index,
                    poly: g.poly.into_poly(&format!("payload.generators[{i}]"))?,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?,
        nullspace: w
            .nullspace
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.into_poly(&format!("payload.nullspace[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
        mul_primes: w
            .mul_primes
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.into_matrix(&format!("payload.mul_primes[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
        means: w.means.into_iter().map(un_cx).collect(),
        commutator_norms: un_f(w.commutator_norms),
        commutator_max_entry: w.commutator_max_entry.0,
        offdiag_residuals: un_f(w.offdiag_residuals),
        block_condition: w.block_condition.0,
        report: w.report.into_report("payload.report")?,
        cross_check: w.cross_check.map(|r| r.into_report("payload.cross_check")).transpose()?,
    })
}

/// Compact JSON with every float written as `{:.16e}`.
struct FloatFormatter;

impl serde_json::ser::Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

fn write_envelope<T: Serialize>(kind: &str, payload: T) -> Result<String, FormatError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FloatFormatter);
    OutEnvelope {
        kind,
        version: FORMAT_VERSION,
        payload,
    }
    .serialize(&mut ser)
    .map_err(convert_json_error)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

fn report_wire(r: &RankReport) -> RankReportWire {
    RankReportWire::from(r)
}

/// Serializes a document deterministically, newline-terminated.
pub fn serialize(doc: &Document) -> Result<String, FormatError> {
    let kind = doc.kind();
    match doc {
        Document::Polynomial(p) => write_envelope(kind, PolyWire::from(p)),
        Document::Matrix(m) => write_envelope(kind, MatrixWire::from(m)),
        Document::Basis(b) => write_envelope(kind, BasisWire::from(b)),
        Document::MulMats(m) => write_envelope(
            kind,
            MulMatsWire {
                basis: BasisWire::from(m.basis()),
                matrices: m.matrices().iter().map(MatrixWire::from).collect(),
            },
        ),
        Document::Points(p) => write_envelope(
            kind,
            PointsWire {
                num_vars: p.num_vars,
                points: p.points.iter().map(|x| cx_vec(x)).collect(),
            },
        ),
        Document::ClusterSpec(s) => write_envelope(
            kind,
            ClusterSpecWire {
                num_vars: s.num_vars,
                epsilon: F64(s.epsilon),
                clusters: s
                    .clusters
                    .iter()
                    .map(|c| ClusterWire {
                        center: cx_vec(&c.center),
                        offsets: c.offsets.iter().map(|d| cx_vec(d)).collect(),
                    })
                    .collect(),
                basis: s.basis.as_ref().map(BasisWire::from),
            },
        ),
        Document::TraceMatrix(t) => write_envelope(
            kind,
            TraceMatrixWire {
                basis: BasisWire::from(&t.basis),
                matrix: MatrixWire::from(&t.matrix),
            },
        ),
        Document::RankReport(r) => write_envelope(kind, report_wire(r)),
        Document::SquareFree(s) => write_envelope(
            kind,
            SquareFreeWire {
                factor: PolyWire::from(&s.factor),
                roots: cx_vec(&s.roots),
                rank: s.rank,
                nullspace: s.nullspace.iter().map(PolyWire::from).collect(),
                report: report_wire(&s.report),
                cross_check: report_wire(&s.cross_check),
            },
        ),
        Document::RadicalOutput(r) => write_envelope(
            kind,
            RadicalWire {
                rank: r.rank,
                basis: BasisWire::from(&r.basis),
                row_basis: r.row_basis.clone(),
                col_indices: r.col_indices.clone(),
                col_basis: BasisWire::from(&r.col_basis),
                generators: r
                    .generators
                    .iter()
                    .map(|g| GeneratorWire {
                        var: g.var,
                        basis_index: g.basis_index,
                        poly: MultiPolyWire::from(&g.poly),
                    })
                    .collect(),
                nullspace: r.nullspace.iter().map(MultiPolyWire::from).collect(),
                mul_primes: r.mul_primes.iter().map(MatrixWire::from).collect(),
                means: r.means.iter().map(|p| cx_vec(p)).collect(),
                commutator_norms: f_vec(&r.commutator_norms),
                commutator_max_entry: F64(r.commutator_max_entry),
                offdiag_residuals: f_vec(&r.offdiag_residuals),
                block_condition: F64(r.block_condition),
                report: report_wire(&r.report),
                cross_check: r.cross_check.as_ref().map(report_wire),
            },
        ),
        Document::Sweep(s) => write_envelope(
            kind,
            SweepWire {
                rank: s.rank,
                records: s
                    .records
                    .iter()
                    .map(|r| SweepRecordWire {
                        epsilon: F64(r.epsilon),
                        pivot_tail: F64(r.pivot_tail),
                        sigma_tail: F64(r.sigma_tail),
                        mean_error: F64(r.mean_error),
                        commutator_norm: F64(r.commutator_norm),
                    })
                    .collect(),
                slopes: SlopesWire {
                    pivot_tail: s.slopes.pivot_tail.map(F64),
                    sigma_tail: s.slopes.sigma_tail.map(F64),
                    mean_error: s.slopes.mean_error.map(F64),
                    commutator_norm: s.slopes.commutator_norm.map(F64),
                },
                skipped: f_vec(&s.skipped),
            },
        ),
    }
}

/// Parses and insists on a particular kind.
pub fn parse_kind(text: &str, expected: &str) -> Result<Document, FormatError> {
    let doc = parse(text)?;
    if doc.kind() != expected {
        return Err(FormatError::WrongKind {
            expected: expected.into(),
            found: doc.kind().into(),
        });
    }
    Ok(doc)
}

/// Sweep records as CSV with [`SWEEP_CSV_HEADER`].
pub fn sweep_to_csv(records: &[SweepRecord]) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| FormatError::Csv(e.to_string());
    w.write_record(SWEEP_CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let fields = [r.epsilon, r.pivot_tail, r.sigma_tail, r.mean_error, r.commutator_norm];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(FormatError::NonFinite {
                path: format!("sweep record at epsilon {:e}", r.epsilon),
            });
        }
        w.write_record(fields.iter().map(|x| format!("{x:.16e}"))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

/// Reads records written by [`sweep_to_csv`].
pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepRecord>, FormatError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| FormatError::Csv(e.to_string()))?;
    if header.iter().ne(SWEEP_CSV_HEADER.iter().cloned()) {
        return Err(FormatError::Csv(format!("unexpected header {:?}", header)));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| FormatError::Csv(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormatError::Csv(format!("row {}: {e}", line + 2)))?;
        if vals.len() != 5 {
            return Err(FormatError::Csv(format!("row {}: expected 5 fields", line + 2)));
        }
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(FormatError::NonFinite {
                path: format!("csv row {}", line + 2),
            });
        }
        out.push(SweepRecord {
            epsilon: vals[0],
            pivot_tail: vals[1],
            sigma_tail: vals[2],
            mean_error: vals[3],
            commutator_norm: vals[4],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_payload() {
        let text = r#"{"kind":"polynomial","version":"1","payload":{"degree":2,"coeffs":[[2,0],[-3,0],[1,0]]}}"#;
        let doc = parse(text).unwrap();
        assert_eq!(doc, Document::Polynomial(Polynomial::from_real(&[2.0, -3.0, 1.0]).unwrap()));
        assert_eq!(parse(&serialize(&doc).unwrap()).unwrap(), doc);
    }

    #[test]
    fn bare_reals_are_accepted() {
        let text = r#"{"kind":"matrix","version":"1","payload":{"rows":1,"cols":2,"entries":[1.5,[0,-1]]}}"#;
        let Document::Matrix(m) = parse(text).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(m[(0, 0)], c64(1.5, 0.0));
        assert_eq!(m[(0, 1)], c64(0.0, -1.0));
    }

    #[test]
    fn float_format_is_lossless() {
        let m = ComplexMatrix::new(1, 2, vec![c64(0.1, -1.0 / 3.0), c64(f64::MIN_POSITIVE, 1e300)]).unwrap();
        let text = serialize(&Document::Matrix(m.clone())).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        let Document::Matrix(back) = parse(&text).unwrap() else {
            panic!("wrong kind")
        };
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn error_categories() {
        assert!(matches!(parse("{\"kind\": "), Err(FormatError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse(r#"{"kind":"banana","version":"1","payload":{}}"#),
            Err(FormatError::UnknownKind(_))
        ));
        assert!(matches!(
            parse(r#"{"kind":"matrix","version":"2","payload":{}}"#),
            Err(FormatError::VersionMismatch { .. })
        ));
        assert!(matches!(
            parse(r#"{"kind":"matrix","version":"1","payload":{"rows":1}}"#),
            Err(FormatError::Schema { .. })
        ));
        assert!(matches!(
            parse(r#"{"kind":"matrix","version":"1","payload":{"rows":2,"cols":2,"entries":[1,2,3]}}"#),
            Err(FormatError::Invalid { .. })
        ));
        assert!(matches!(
            parse(r#"{"kind":"matrix","version":"1","payload":{"rows":1,"cols":1,"entries":[1e999]}}"#),
            Err(FormatError::Schema { .. }) | Err(FormatError::NonFinite { .. }) | Err(FormatError::Syntax { .. })
        ));
    }

    #[test]
    fn multiline_syntax_position() {
        let text = "{\n  \"kind\": \"matrix\",\n  \"version\": \"1\",\n  \"payload\": {,}\n}";
        match parse(text) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_serialization_fails() {
        let r = RankReport {
            rank: 1,
            method: RankMethod::Svd,
            diagnostics: vec![f64::NAN],
            threshold_used: 0.0,
        };
        assert!(matches!(
            serialize(&Document::RankReport(r)),
            Err(FormatError::NonFinite { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![SweepRecord {
            epsilon: 0.1,
            pivot_tail: 1e-3,
            sigma_tail: 2e-3,
            mean_error: 3e-4,
            commutator_norm: 0.0,
        }];
        let text = sweep_to_csv(&recs).unwrap();
        assert!(text.starts_with("epsilon,pivot_tail,sigma_tail,mean_error,commutator_norm\n"));
        assert_eq!(sweep_from_csv(&text).unwrap(), recs);
    }

    #[test]
    fn wrong_kind() {
        let text = serialize(&Document::Basis(MonomialBasis::power(2))).unwrap();
        assert!(matches!(parse_kind(&text, "matrix"), Err(FormatError::WrongKind { .. })));
    }
}
