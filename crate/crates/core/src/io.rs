//! File formats: distribution input, protocol input, and report output.
//!
//! All documents are JSON. Reports print every float with 17 significant
//! digits so that values re-parse to the identical double.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::aux::SolverReport;
use crate::dist::JointPmf;
use crate::error::{Error, Result};
use crate::protocol::{EvaluationReport, ProtocolSpec};
use crate::region::{GapMetrics, InfoQuantities, Point, RateRegion, RegionReport};

pub const REPORT_SCHEMA: &str = "pkcap-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Distribution input: `variables` in X, Y, Z order, `cardinalities`, and a
/// flat row-major `pmf` with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub variables: Vec<String>,
    pub cardinalities: Vec<usize>,
    pub pmf: Vec<f64>,
}

impl DistributionFile {
    pub fn into_pmf(self, sum_tol: f64) -> Result<JointPmf> {
        let p = JointPmf::new(self.pmf, self.variables, self.cardinalities, sum_tol)?;
        p.terminals()?;
        Ok(p)
    }

    pub fn from_pmf(p: &JointPmf) -> Self {
        DistributionFile {
            variables: p.variables().to_vec(),
            cardinalities: p.cardinalities().to_vec(),
            pmf: p.probs().to_vec(),
        }
    }
}

fn parse_error(what: &str, e: serde_json::Error) -> Error {
    Error::InvalidParameter(format!("cannot parse {what}: {e}"))
}

pub fn parse_distribution(text: &str, sum_tol: f64) -> Result<JointPmf> {
    let file: DistributionFile = serde_json::from_str(text).map_err(|e| parse_error("distribution", e))?;
    file.into_pmf(sum_tol)
}

pub fn parse_protocol(text: &str) -> Result<ProtocolSpec> {
    serde_json::from_str(text).map_err(|e| parse_error("protocol", e))
}

/// Settings echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub protocol: Option<String>,
    pub sum_tol: f64,
    pub ci_tol: f64,
    pub feas_tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub aux_card: Option<usize>,
    pub budget: u64,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub value: f64,
    pub residual: f64,
    pub converged: bool,
    pub restarts: usize,
    pub seed: u64,
    pub aux_card: usize,
    pub best_restart: usize,
    pub residual_trace: Vec<f64>,
    /// `channel[c][u] = w(u | c)`
    pub channel: Vec<Vec<f64>>,
}

impl From<&SolverReport> for SolverSummary {
    fn from(r: &SolverReport) -> Self {
        SolverSummary {
            value: r.value,
            residual: r.residual,
            converged: r.converged,
            restarts: r.restarts,
            seed: r.seed,
            aux_card: r.aux_card,
            best_restart: r.best_restart,
            residual_trace: r.residual_trace.clone(),
            channel: r.channel.rows().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub components: usize,
    pub det_correlated: bool,
    pub det_residual: f64,
    pub thm3_feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regions {
    pub outer: RateRegion,
    pub inner: RateRegion,
    pub exact: Option<RateRegion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeReport {
    pub quantities: InfoQuantities,
    pub thm3: SolverSummary,
    pub conditions: Conditions,
    pub regions: Regions,
    pub gap: GapMetrics,
}

impl From<&RegionReport> for ComputeReport {
    fn from(r: &RegionReport) -> Self {
        ComputeReport {
            quantities: r.quantities,
            thm3: (&r.thm3).into(),
            conditions: Conditions {
                components: r.components,
                det_correlated: r.thm4_holds,
                det_residual: r.det_residual,
                thm3_feasible: r.thm3_feasible,
            },
            regions: Regions {
                outer: r.outer.clone(),
                inner: r.inner.clone(),
                exact: r.exact.clone(),
            },
            gap: r.gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub conditions: Conditions,
    pub thm3: SolverSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub evaluation: EvaluationReport,
    pub eps: f64,
    pub eps_pk_xy: bool,
    pub eps_pk_xz: bool,
    pub rate_point: Point,
    pub outer: RateRegion,
    pub rate_point_in_outer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Body {
    Compute(ComputeReport),
    Check(CheckReport),
    Simulate(SimulateReport),
}

/// A complete report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema: String,
    pub tool_version: String,
    pub config: ConfigEcho,
    pub body: Body,
}

impl ReportDoc {
    pub fn new(config: ConfigEcho, body: Body) -> Self {
        ReportDoc {
            schema: REPORT_SCHEMA.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            config,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits::default());
        self.serialize(&mut ser).expect("report serializes");
        out.push(b'\n');
        String::from_utf8(out).expect("utf-8")
    }

    /// Parses a report and checks its schema version.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ReportDoc = serde_json::from_str(text).map_err(|e| parse_error("report", e))?;
        if doc.schema != REPORT_SCHEMA {
            return Err(Error::InvalidParameter(format!("unsupported report schema `{}`", doc.schema)));
        }
        Ok(doc)
    }
}

/// Pretty JSON with floats written as `d.dddddddddddddddde±x` (17
/// significant digits).
#[derive(Default)]
pub struct SigDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SigDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
