use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, measured: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            measured,
            threshold,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Convergence history of one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub g: f64,
    pub k: u32,
    pub level: usize,
    pub dims: Vec<usize>,
    pub values: Vec<ComplexValue>,
    pub deltas: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub timestamp: String,
    pub traces: Vec<Trace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<CheckRecord>,
    pub provenance: Provenance,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct ExactFloats<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {$(
        fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        }
    )*};
}

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
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

/// `{:.16e}`: 17 significant digits, enough to round-trip any double.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn write_json<W: Write>(report: &Report, out: W) -> io::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(out, ExactFloats(PrettyFormatter::with_indent(b"  ")));
    report.serialize(&mut ser).map_err(io::Error::other)?;
    let mut out = ser.into_inner();
    out.write_all(b"\n")
}

pub fn to_json_string(report: &Report) -> String {
    let mut buf = Vec::new();
    write_json(report, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// One row per (grid point, level) of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub g: f64,
    pub k: u32,
    pub level: usize,
    pub energy_re: f64,
    pub energy_im: f64,
    pub converged: bool,
    pub dim: usize,
    pub max_imag: f64,
    pub min_eta_norm: Option<f64>,
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "g",
        "k",
        "level",
        "energy_re",
        "energy_im",
        "converged",
        "dim",
        "max_imag",
        "min_eta_norm",
    ])?;
    for r in rows {
        w.write_record([
            format_f64(r.g),
            r.k.to_string(),
            r.level.to_string(),
            format_f64(r.energy_re),
            format_f64(r.energy_im),
            r.converged.to_string(),
            r.dim.to_string(),
            format_f64(r.max_imag),
            r.min_eta_norm.map(format_f64).unwrap_or_default(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 1.0625, f64::MIN_POSITIVE, 0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let parsed: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(parsed, v);
        }
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
    }
}
