//! JSON and CSV emission, and the structure-constant and form file formats.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), so a
//! value read back parses to the same double. Reports never contain `null`:
//! a non-finite number anywhere in a report is an error.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use grf_homog_core::curvature::CurvatureTensor;
use grf_homog_core::linalg::Mat;
use grf_homog_core::{AltForm, LieAlgebra};
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Version of every JSON document this crate writes.
pub const SCHEMA: u64 = 1;

/// Float text used in JSON and CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct SignificantDigits<'a>(PrettyFormatter<'a>);

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite number in report"));
        }
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
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

fn find_null(v: &Value, path: &mut String) -> bool {
    match v {
        Value::Null => true,
        Value::Array(items) => items.iter().enumerate().any(|(i, x)| {
            let len = path.len();
            path.push_str(&format!("[{i}]"));
            let found = find_null(x, path);
            if !found {
                path.truncate(len);
            }
            found
        }),
        Value::Object(map) => map.iter().any(|(k, x)| {
            let len = path.len();
            path.push('.');
            path.push_str(k);
            let found = find_null(x, path);
            if !found {
                path.truncate(len);
            }
            found
        }),
        _ => false,
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_bytes(value: &Value) -> CliResult<Vec<u8>> {
    let mut path = String::new();
    if find_null(value, &mut path) {
        // serde_json turns NaN and infinities into null
        return Err(CliError::numerical(format!("non-finite value at {}", if path.is_empty() { "." } else { &path })));
    }
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits(PrettyFormatter::new()));
    serde::Serialize::serialize(value, &mut ser).map_err(|e| CliError::numerical(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, bytes).map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display())))
        }
        _ => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn write_json(path: Option<&Path>, value: &Value) -> CliResult<()> {
    write_output(path, &to_json_bytes(value)?)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

/// Starts a report object with the schema field and the command name.
pub fn report(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m
}

pub fn matrix_json(m: &Mat) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect())
}

/// `{"degree": k, "terms": [{"idx": [...], "val": x}]}` with 1-based indices.
pub fn form_json(form: &AltForm) -> Value {
    let terms: Vec<Value> = form
        .terms()
        .into_iter()
        .map(|(idx, val)| json!({"idx": idx.iter().map(|i| i + 1).collect::<Vec<_>>(), "val": val}))
        .collect();
    json!({"degree": form.degree(), "terms": terms})
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDoc {
    degree: usize,
    terms: Vec<TermDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    idx: Vec<usize>,
    val: Number,
}

/// Reads the form format of [`form_json`] on an `dim`-dimensional space.
/// Index tuples need not be increasing; the usual sign is applied.
pub fn form_from_json(value: &Value, dim: usize) -> CliResult<AltForm> {
    let doc: FormDoc = serde_json::from_value(value.clone())?;
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in &doc.terms {
        if t.idx.len() != doc.degree {
            return Err(CliError::usage(format!("term {:?} does not have {} indices", t.idx, doc.degree)));
        }
        if t.idx.iter().any(|&i| i == 0 || i > dim) {
            return Err(CliError::usage(format!("term {:?} has an index outside 1..={dim}", t.idx)));
        }
        terms.push((t.idx.iter().map(|i| i - 1).collect::<Vec<_>>(), t.val.value()?));
    }
    let refs: Vec<(&[usize], f64)> = terms.iter().map(|(i, v)| (i.as_slice(), *v)).collect();
    Ok(AltForm::from_terms(dim, doc.degree, &refs)?)
}

pub fn matrix_from_json(value: &Value) -> CliResult<Mat> {
    let rows: Vec<Vec<Number>> = serde_json::from_value(value.clone())?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(CliError::usage("matrix rows have different lengths"));
    }
    let mut out = Mat::zeros(n, m);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[(i, j)] = v.value()?;
        }
    }
    Ok(out)
}

/// Flat component array with the index convention spelled out.
pub fn curvature_json(r: &CurvatureTensor) -> Value {
    let n = r.dim();
    json!({
        "shape": [n, n, n, n],
        "layout": "row-major [i][j][k][l], 1-based labels e1..en",
        "convention": "R(e_i, e_j) e_k = sum_l R[i][j][k][l] e_l",
        "components": r.components(),
        "max_abs": r.max_abs(),
    })
}

/// A JSON number, or a string holding an integer, a decimal or a fraction
/// `p/q` (rounded to the nearest double).
#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> CliResult<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => parse_number(s),
        }
    }
}

/// Parses `"3"`, `"-0.25"`, `"1e-3"` or `"-2/3"`.
pub fn parse_number(s: &str) -> CliResult<f64> {
    let s = s.trim();
    let bad = || CliError::usage(format!("not a number: {s:?}"));
    let x = match s.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(CliError::usage(format!("zero denominator in {s:?}")));
            }
            // both exactly representable below 2^53, so the quotient is correctly rounded
            if num.unsigned_abs() > 1 << 53 || den.unsigned_abs() > 1 << 53 {
                return Err(CliError::usage(format!("fraction {s:?} exceeds 2^53")));
            }
            num as f64 / den as f64
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if !x.is_finite() {
        return Err(bad());
    }
    Ok(x)
}

/// A list given as a JSON array (`[1, 0.3, "1/2"]`) or comma separated
/// (`1,0.3,1/2`).
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    let t = s.trim();
    if t.starts_with('[') {
        let items: Vec<Number> = serde_json::from_str(t)?;
        return items.iter().map(Number::value).collect();
    }
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(',').map(parse_number).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraDoc {
    dim: usize,
    #[serde(rename = "C")]
    c: Vec<Vec<Vec<Number>>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    /// 1-based indices spanning the isotropy algebra.
    #[serde(default)]
    k: Option<Vec<usize>>,
}

/// A Lie algebra read from `{"dim": n, "C": [[[...]]], "labels": [...]}`,
/// with `C[i][j][k]` the `e_k` component of `[e_i, e_j]`, and the optional
/// isotropy indices `"k"`. A catalog dump (whose `"algebra"` member has this
/// shape) is accepted as well.
pub struct AlgebraImport {
    pub algebra: LieAlgebra,
    /// 0-based isotropy indices.
    pub isotropy: Vec<usize>,
}

pub fn parse_algebra(text: &str) -> CliResult<AlgebraImport> {
    let mut value: Value = serde_json::from_str(text)?;
    if let Some(inner) = value.get_mut("algebra") {
        value = inner.take();
    }
    let doc: AlgebraDoc = serde_json::from_value(value)?;
    if doc.c.len() != doc.dim {
        return Err(CliError::usage(format!("\"C\" has {} planes but \"dim\" is {}", doc.c.len(), doc.dim)));
    }
    let mut c = Vec::with_capacity(doc.dim);
    for plane in &doc.c {
        let mut rows = Vec::with_capacity(plane.len());
        for row in plane {
            rows.push(row.iter().map(Number::value).collect::<CliResult<Vec<f64>>>()?);
        }
        c.push(rows);
    }
    let mut algebra = LieAlgebra::new(&c)?;
    if let Some(labels) = doc.labels {
        algebra = algebra.with_labels(labels)?;
    }
    let isotropy = match doc.k {
        None => Vec::new(),
        Some(k) => {
            if k.iter().any(|&i| i == 0 || i > doc.dim) {
                return Err(CliError::usage(format!("isotropy indices {k:?} outside 1..={}", doc.dim)));
            }
            k.iter().map(|i| i - 1).collect()
        }
    };
    Ok(AlgebraImport { algebra, isotropy })
}

/// The algebra in the import format (with `"k"` when nonempty).
pub fn algebra_json(algebra: &LieAlgebra, isotropy: &[usize]) -> Value {
    let n = algebra.dim();
    let c: Vec<Vec<Vec<f64>>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| algebra.c(i, j, k)).collect()).collect()).collect();
    let mut doc = json!({"dim": n, "C": c, "labels": algebra.labels()});
    if !isotropy.is_empty() {
        doc["k"] = json!(isotropy.iter().map(|i| i + 1).collect::<Vec<_>>());
    }
    doc
}

/// One CSV record per row, floats in the JSON float format.
pub fn csv_bytes(header: &[&str], rows: &[Vec<f64>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::usage(e.to_string());
    w.write_record(header).map_err(err)?;
    for (r, row) in rows.iter().enumerate() {
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(CliError::numerical(format!("non-finite value {x} in CSV row {r}")));
        }
        w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::usage(e.to_string()))
}
