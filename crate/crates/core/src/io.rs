//! File formats: matrices, spectra and Jordan data as JSON; reports as CSV or JSON.
//!
//! Matrix file:
//!
//! ```text
//! { "n_rows": 2, "n_cols": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]] }
//! ```
//!
//! `entries` holds `[re, im]` pairs in row-major order. Components are JSON numbers; the strings
//! and bare tokens `NaN`, `Infinity`, `inf` are recognized only so they can be rejected with their path.
//!
//! Jordan data file:
//!
//! ```text
//! { "blocks": [{ "lambda": [1, 0], "size": 2 }],
//!   "q": "identity" | <matrix> | { "random_seed": 7, "target_kappa": 10 } }
//! ```
//!
//! Spectrum file: a JSON array of `[re, im]` pairs.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::BoundId;
use crate::error::{Error, Result};
use crate::harness::{Report, TrialOutcome};
use crate::jordan::{JordanBlock, JordanSpec};
use crate::matrix::{ComplexMatrix, C64};
use crate::random::random_with_condition;
use crate::spectrum::Spectrum;

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Quotes bare `NaN`/`Infinity`/`inf` tokens so that they reach the field-level checks.
fn quote_nonfinite_tokens(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    let mut in_string = false;
    let mut escaped = false;
    while let Some(c) = chars.next() {
        if in_string {
            out.push(c);
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
        } else if c.is_ascii_alphabetic() || (c == '-' && chars.peek().is_some_and(|n| n.is_ascii_alphabetic())) {
            let mut word = String::from(c);
            while let Some(&n) = chars.peek() {
                if !n.is_ascii_alphanumeric() {
                    break;
                }
                word.push(n);
                chars.next();
            }
            let bare = word.trim_start_matches('-');
            if matches!(bare, "NaN" | "nan" | "Infinity" | "inf" | "Inf") {
                out.push('"');
                out.push_str(&word);
                out.push('"');
            } else {
                out.push_str(&word);
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(&quote_nonfinite_tokens(text))
        .map_err(|e| parse_err(format!("line {}, column {}", e.line(), e.column()), e.to_string()))
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| parse_err(path, format!("missing field {key:?}")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| parse_err(path, "expected a nonnegative integer"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| parse_err(path, "number out of range"))?,
        Value::String(s) => s
            .parse::<f64>()
            .map_err(|_| parse_err(path, format!("expected a number, found {s:?}")))?,
        _ => return Err(parse_err(path, "expected a number")),
    };
    if !x.is_finite() {
        return Err(parse_err(path, format!("non-finite value {x}")));
    }
    Ok(x)
}

fn as_complex(v: &Value, path: &str) -> Result<C64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(C64::new(as_f64(re, &format!("{path}[0]"))?, as_f64(im, &format!("{path}[1]"))?)),
        _ => Err(parse_err(path, "expected a [re, im] pair")),
    }
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    json!({
        "n_rows": m.nrows(),
        "n_cols": m.ncols(),
        "entries": m.entries().iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
    })
}

/// `path` prefixes every diagnostic, e.g. `q.entries[3][1]`.
pub fn matrix_from_json(v: &Value, path: &str) -> Result<ComplexMatrix> {
    let sub = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    let rows = as_usize(field(v, "n_rows", path)?, &sub("n_rows"))?;
    let cols = as_usize(field(v, "n_cols", path)?, &sub("n_cols"))?;
    let entries_path = sub("entries");
    let entries = field(v, "entries", path)?
        .as_array()
        .ok_or_else(|| parse_err(&entries_path, "expected an array"))?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(path, "matrix dimensions must be positive"));
    }
    if entries.len() != rows * cols {
        return Err(parse_err(
            &entries_path,
            format!("expected {} entries for a {rows}×{cols} matrix, found {}", rows * cols, entries.len()),
        ));
    }
    let data = entries
        .iter()
        .enumerate()
        .map(|(k, z)| as_complex(z, &format!("{entries_path}[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::new(rows, cols, data)
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    matrix_from_json(&parse_json(text)?, "")
}

pub fn matrix_to_string(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&matrix_to_json(m)).expect("matrix JSON is always serializable")
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, matrix_to_string(m) + "\n")?;
    Ok(())
}

pub fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let v = parse_json(text)?;
    let items = v
        .as_array()
        .ok_or_else(|| parse_err("", "expected an array of [re, im] pairs"))?;
    let values = items
        .iter()
        .enumerate()
        .map(|(k, z)| as_complex(z, &format!("[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::new(values))
}

pub fn read_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    parse_spectrum(&fs::read_to_string(path)?)
}

pub fn spectrum_to_string(s: &Spectrum) -> String {
    let v: Vec<Value> = s.values().iter().map(|&z| complex_json(z)).collect();
    serde_json::to_string(&v).expect("spectrum JSON is always serializable")
}

/// How `Q` is given in a Jordan data file.
#[derive(Clone, Debug, PartialEq)]
pub enum QSource {
    Identity,
    Inline(ComplexMatrix),
    Random { seed: u64, target_kappa: f64 },
}

fn parse_blocks(v: &Value) -> Result<Vec<JordanBlock>> {
    let items = field(v, "blocks", "")?
        .as_array()
        .ok_or_else(|| parse_err("blocks", "expected an array"))?;
    items
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let path = format!("blocks[{k}]");
            let lambda = as_complex(field(b, "lambda", &path)?, &format!("{path}.lambda"))?;
            let size = as_usize(field(b, "size", &path)?, &format!("{path}.size"))?;
            Ok(JordanBlock::new(lambda, size))
        })
        .collect()
}

fn parse_q(v: &Value) -> Result<QSource> {
    let q = field(v, "q", "")?;
    match q {
        Value::String(s) if s == "identity" => Ok(QSource::Identity),
        Value::String(s) => Err(parse_err("q", format!("unknown q keyword {s:?}"))),
        Value::Object(o) if o.contains_key("random_seed") => {
            let seed = field(q, "random_seed", "q")?
                .as_u64()
                .ok_or_else(|| parse_err("q.random_seed", "expected a nonnegative integer"))?;
            let target_kappa = as_f64(field(q, "target_kappa", "q")?, "q.target_kappa")?;
            if target_kappa < 1.0 {
                return Err(parse_err("q.target_kappa", "must be ≥ 1"));
            }
            Ok(QSource::Random { seed, target_kappa })
        }
        Value::Object(_) => Ok(QSource::Inline(matrix_from_json(q, "q")?)),
        _ => Err(parse_err("q", "expected \"identity\", a matrix or {random_seed, target_kappa}")),
    }
}

/// Block list and `Q` source without building the spec; used by the sweep's user-file profile.
pub fn parse_jordan_parts(text: &str) -> Result<(Vec<JordanBlock>, QSource)> {
    let v = parse_json(text)?;
    Ok((parse_blocks(&v)?, parse_q(&v)?))
}

pub fn parse_jordan_spec(text: &str) -> Result<JordanSpec> {
    let (blocks, q) = parse_jordan_parts(text)?;
    let n: usize = blocks.iter().map(|b| b.size).sum();
    let q = match q {
        QSource::Identity => ComplexMatrix::identity(n.max(1)),
        QSource::Inline(m) => m,
        QSource::Random { seed, target_kappa } => {
            random_with_condition(&mut ChaCha8Rng::seed_from_u64(seed), n.max(1), target_kappa)
        }
    };
    JordanSpec::new(blocks, q)
}

pub fn read_jordan_spec(path: impl AsRef<Path>) -> Result<JordanSpec> {
    parse_jordan_spec(&fs::read_to_string(path)?)
}

/// `Q` is written inline so the file reproduces the spec exactly.
pub fn jordan_spec_to_string(spec: &JordanSpec) -> String {
    let blocks: Vec<Value> = spec
        .blocks()
        .iter()
        .map(|b| json!({ "lambda": complex_json(b.lambda), "size": b.size }))
        .collect();
    let v = json!({ "blocks": blocks, "q": matrix_to_json(spec.q()) });
    serde_json::to_string_pretty(&v).expect("Jordan data JSON is always serializable")
}

pub fn write_jordan_spec(path: impl AsRef<Path>, spec: &JordanSpec) -> Result<()> {
    fs::write(path, jordan_spec_to_string(spec) + "\n")?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    /// The whole report as JSON.
    StructuredText,
}

/// One CSV line: a bound of a completed trial, or a failed trial with an empty `bound_id`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub trial: usize,
    pub bound_id: Option<BoundId>,
    pub branch: String,
    pub value: Option<f64>,
    pub d2: Option<f64>,
    pub slack: Option<f64>,
}

pub const CSV_HEADER: [&str; 6] = ["trial", "bound_id", "branch", "value", "d2", "slack"];

pub fn csv_rows(report: &Report) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for rec in &report.records {
        match &rec.outcome {
            TrialOutcome::Completed(e) => rows.extend(e.bounds.iter().map(|b| CsvRow {
                trial: rec.trial,
                bound_id: Some(b.id),
                branch: b.branch.clone(),
                value: b.value,
                d2: Some(e.d2),
                slack: b.value.map(|v| v - e.d2),
            })),
            TrialOutcome::FailedInfrastructure { message } => rows.push(CsvRow {
                trial: rec.trial,
                bound_id: None,
                branch: format!("failed-infrastructure: {message}"),
                value: None,
                d2: None,
                slack: None,
            }),
        }
    }
    rows
}

/// CSV text; a `# generated_at=` line comes first when `generated_at` is given.
pub fn report_csv(report: &Report, generated_at: Option<&str>) -> Result<String> {
    let mut buf = Vec::new();
    if let Some(stamp) = generated_at {
        writeln!(buf, "# generated_at={stamp}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    for row in csv_rows(report) {
        w.serialize(row)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn parse_csv_rows(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(parse_err("line 1", format!("expected columns {}", CSV_HEADER.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report JSON is always serializable")
}

pub fn parse_report_json(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("line {}, column {}", e.line(), e.column()), e.to_string()))
}

pub fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

pub fn write_report(report: &Report, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report_csv(report, Some(&unix_timestamp()))?,
        ReportFormat::StructuredText => report_json(report) + "\n",
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    parse_report_json(&fs::read_to_string(path)?)
}

pub fn read_csv_rows(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    parse_csv_rows(&fs::read_to_string(path)?)
}
