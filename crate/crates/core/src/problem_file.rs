//! On-disk problem files: UTF-8 JSON with a `family` tag and a
//! family-specific `payload`, matrices as row-major arrays of arrays.
//!
//! ```json
//! {"family": "binary", "payload": {"q": [[2.0]], "f": [3.0]}}
//! ```
//!
//! Parsing rejects unknown fields and reports the line and column of the
//! offending token; serializing is canonical (fixed field order, 17
//! significant digits) so that parse → serialize → parse is idempotent.

use serde::{Deserialize, Serialize};

use crate::binary::BinaryProblem;
use crate::boxqp::BoxProblem;
use crate::linalg::SymMatrix;
use crate::qc::QcProblem;
use crate::report::to_json_17;
use crate::{Error, Result};

/// Quadratically constrained family: `½xᵀAx − fᵀx` subject to `½xᵀCx ≤ λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QcPayload {
    pub a: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub lambda: f64,
}

/// Box family: `½(½‖Bx‖² − α)² + ½xᵀAx − cᵀx` on `x_i² ≤ ℓ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxPayload {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub alpha: f64,
    pub ell: Vec<f64>,
}

/// Binary family: `½xᵀQx − fᵀx` on `{0,1}ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryPayload {
    pub q: Vec<Vec<f64>>,
    pub f: Vec<f64>,
}

/// A parsed problem file, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "payload", rename_all = "lowercase")]
pub enum ProblemFile {
    Qc(QcPayload),
    Box(BoxPayload),
    Binary(BinaryPayload),
}

impl ProblemFile {
    pub fn family(&self) -> &'static str {
        match self {
            ProblemFile::Qc(_) => "qc",
            ProblemFile::Box(_) => "box",
            ProblemFile::Binary(_) => "binary",
        }
    }

    /// Canonical serialization: fixed field order, 17-significant-digit
    /// decimals, so numbers round-trip bit-faithfully.
    pub fn to_canonical_json(&self) -> String {
        to_json_17(self)
    }

    pub fn into_qc(self) -> Result<QcProblem> {
        let ProblemFile::Qc(p) = self else {
            return Err(Error::InvalidProblem(format!(
                "expected family \"qc\", file has \"{}\"",
                self.family()
            )));
        };
        QcProblem::new(
            SymMatrix::from_rows(&p.a)?,
            SymMatrix::from_rows(&p.c)?,
            p.f,
            p.lambda,
        )
    }

    pub fn into_box(self) -> Result<BoxProblem> {
        let ProblemFile::Box(p) = self else {
            return Err(Error::InvalidProblem(format!(
                "expected family \"box\", file has \"{}\"",
                self.family()
            )));
        };
        BoxProblem::new(SymMatrix::from_rows(&p.a)?, p.b, p.c, p.alpha, p.ell)
    }

    pub fn into_binary(self) -> Result<BinaryProblem> {
        let ProblemFile::Binary(p) = self else {
            return Err(Error::InvalidProblem(format!(
                "expected family \"binary\", file has \"{}\"",
                self.family()
            )));
        };
        BinaryProblem::new(SymMatrix::from_rows(&p.q)?, p.f)
    }
}

impl From<&QcProblem> for ProblemFile {
    fn from(p: &QcProblem) -> Self {
        ProblemFile::Qc(QcPayload {
            a: p.a().rows(),
            c: p.c().rows(),
            f: p.f().to_vec(),
            lambda: p.lambda(),
        })
    }
}

impl From<&BoxProblem> for ProblemFile {
    fn from(p: &BoxProblem) -> Self {
        ProblemFile::Box(BoxPayload {
            a: p.a().rows(),
            b: p.b().to_vec(),
            c: p.c().to_vec(),
            alpha: p.alpha(),
            ell: p.ell().to_vec(),
        })
    }
}

impl From<&BinaryProblem> for ProblemFile {
    fn from(p: &BinaryProblem) -> Self {
        ProblemFile::Binary(BinaryPayload {
            q: p.q().rows(),
            f: p.f().to_vec(),
        })
    }
}

/// Parses problem-file JSON, mapping syntax and schema errors to
/// [`Error::InvalidProblem`] with the line and column of the offense.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| {
        Error::InvalidProblem(format!(
            "line {}, column {}: {}",
            e.line(),
            e.column(),
            e
        ))
    })
}

/// Reads and parses a problem file from disk.
pub fn read_problem_file(path: &std::path::Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidProblem(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_problem_file(&text)
}
