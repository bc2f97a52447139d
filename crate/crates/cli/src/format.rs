//! JSON file formats. Rationals travel as strings such as `"-3/2"` or `"7"`.

use crate::CliError;
use ecs_core::gridmod::{Grade, GridModule, Matrix};
use ecs_core::series::{ExpKey, FormalSum, Rational};
use ecs_core::Barcode;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet};

/// Parses `[sign]digits[/digits]`.
pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::Parse(format!("invalid rational '{s}'"));
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    if !digits(num) || den.is_some_and(|d| !digits(d)) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = match den {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::from(1),
    };
    if d.is_zero() {
        return Err(bad());
    }
    let r = Rational::new(n, d);
    Ok(if neg { -r } else { r })
}

pub fn rational_string(r: &Rational) -> String {
    r.to_string()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BarEntry {
    pub birth: String,
    pub lifespan: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BarcodeFile {
    pub bars: Vec<BarEntry>,
}

pub fn parse_barcode(text: &str) -> Result<Barcode, CliError> {
    let file: BarcodeFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut pairs = Vec::with_capacity(file.bars.len());
    for bar in &file.bars {
        pairs.push((parse_rational(&bar.birth)?, parse_rational(&bar.lifespan)?));
    }
    Barcode::from_pairs(pairs).map_err(CliError::from)
}

pub fn barcode_json(f: &Barcode) -> Value {
    let bars: Vec<Value> = f
        .bars()
        .iter()
        .map(|b| json!({"birth": rational_string(b.birth()), "lifespan": rational_string(b.lifespan())}))
        .collect();
    json!({ "bars": bars })
}

/// Terms in output order: ascending `z`, then grade, then `y`.
fn output_order(s: &FormalSum) -> Vec<(&ExpKey, &Rational)> {
    let mut terms: Vec<_> = s.iter().collect();
    terms.sort_by(|a, b| a.0.z().cmp(&b.0.z()).then_with(|| a.0.cmp(b.0)));
    terms
}

/// SeriesFile for `s` with `axes` x-coordinates. The indeterminate list
/// names `x` always, and `y`, `z` when requested or present.
pub fn series_json(s: &FormalSum, axes: usize, with_z: bool) -> Value {
    let has_y = s.iter().any(|(k, _)| !k.y().is_zero());
    let has_z = with_z || s.iter().any(|(k, _)| k.z() != 0);
    let mut names = vec!["x"];
    if has_y {
        names.push("y");
    }
    if has_z {
        names.push("z");
    }
    let terms: Vec<Value> = output_order(s)
        .into_iter()
        .map(|(k, c)| {
            let mut t = Map::new();
            let coords = k.x_padded(axes).unwrap_or_else(|| k.x_coords().to_vec());
            let x = if axes == 1 {
                Value::String(rational_string(&coords[0]))
            } else {
                Value::Array(coords.iter().map(|r| Value::String(rational_string(r))).collect())
            };
            t.insert("x".into(), x);
            if has_y {
                t.insert("y".into(), Value::String(rational_string(k.y())));
            }
            if has_z {
                t.insert("z".into(), json!(k.z()));
            }
            t.insert("coeff".into(), Value::String(rational_string(c)));
            Value::Object(t)
        })
        .collect();
    json!({ "indeterminates": names, "axes": axes, "terms": terms })
}

#[derive(Debug, Deserialize)]
struct SeriesFile {
    #[serde(default)]
    indeterminates: Option<Vec<String>>,
    #[serde(default = "one")]
    axes: usize,
    terms: Vec<TermEntry>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum XEntry {
    Scalar(String),
    Vector(Vec<String>),
}

#[derive(Debug, Deserialize)]
struct TermEntry {
    #[serde(default)]
    x: Option<XEntry>,
    #[serde(default)]
    y: Option<String>,
    #[serde(default)]
    z: Option<u32>,
    coeff: String,
}

/// Parsed series with the declared indeterminates and x-arity.
pub struct ParsedSeries {
    pub series: FormalSum,
    pub indeterminates: BTreeSet<String>,
    pub axes: usize,
}

pub fn parse_series(text: &str) -> Result<ParsedSeries, CliError> {
    let file: SeriesFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if file.axes == 0 {
        return Err(CliError::Parse("axes must be at least 1".into()));
    }
    let declared: Option<BTreeSet<String>> = file.indeterminates.map(|v| v.into_iter().collect());
    if let Some(d) = &declared {
        if let Some(bad) = d.iter().find(|n| !["x", "y", "z"].contains(&n.as_str())) {
            return Err(CliError::Parse(format!("unknown indeterminate '{bad}'")));
        }
    }
    let mut used = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut series = FormalSum::zero();
    for (i, t) in file.terms.iter().enumerate() {
        let coords = match &t.x {
            None => vec![Rational::zero(); file.axes],
            Some(XEntry::Scalar(s)) if file.axes == 1 => vec![parse_rational(s)?],
            Some(XEntry::Vector(v)) if v.len() == file.axes => {
                v.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>()?
            }
            Some(_) => return Err(CliError::Parse(format!("term {i}: x does not have {} coordinates", file.axes))),
        };
        if t.x.is_some() {
            used.insert("x".to_string());
        }
        let y = match &t.y {
            Some(s) => {
                used.insert("y".to_string());
                parse_rational(s)?
            }
            None => Rational::zero(),
        };
        let z = t.z.unwrap_or(0);
        if t.z.is_some() {
            used.insert("z".to_string());
        }
        let c = parse_rational(&t.coeff)?;
        if c.is_zero() {
            return Err(CliError::Parse(format!("term {i} has a zero coefficient")));
        }
        let key = ExpKey::with_grade(coords, y, z);
        if !seen.insert(key.clone()) {
            return Err(CliError::Parse(format!("term {i} repeats the key {key}")));
        }
        series.add_term(key, c);
    }
    if let Some(d) = &declared {
        if let Some(extra) = used.iter().find(|u| !d.contains(*u)) {
            return Err(CliError::Parse(format!("indeterminate '{extra}' is used but not declared")));
        }
    }
    Ok(ParsedSeries { series, indeterminates: declared.unwrap_or(used), axes: file.axes })
}

#[derive(Debug, Deserialize)]
struct ModuleFile {
    n: usize,
    lo: Vec<i64>,
    hi: Vec<i64>,
    #[serde(default)]
    dims: BTreeMap<String, usize>,
    #[serde(default)]
    maps: Vec<MapEntry>,
}

#[derive(Debug, Deserialize)]
struct MapEntry {
    from: Vec<i64>,
    axis: usize,
    matrix: Vec<Vec<String>>,
}

fn parse_grade_key(s: &str, n: usize) -> Result<Grade, CliError> {
    let coords: Result<Vec<i64>, _> = s.split(',').map(|c| c.trim().parse::<i64>()).collect();
    match coords {
        Ok(c) if c.len() == n => Ok(Grade::new(c)),
        _ => Err(CliError::Parse(format!("invalid grade key '{s}' for {n} axes"))),
    }
}

pub fn grade_key(g: &Grade) -> String {
    g.coords().iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

/// Parses and validates a ModuleFile. Shape problems and failing squares are
/// validation errors.
pub fn parse_module(text: &str) -> Result<GridModule, CliError> {
    let file: ModuleFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let n = file.n;
    if file.lo.len() != n || file.hi.len() != n {
        return Err(CliError::Parse(format!("lo and hi need {n} coordinates")));
    }
    let mut dims = BTreeMap::new();
    for (k, d) in &file.dims {
        dims.insert(parse_grade_key(k, n)?, *d);
    }
    let mut steps = BTreeMap::new();
    for (i, m) in file.maps.iter().enumerate() {
        if m.from.len() != n {
            return Err(CliError::Parse(format!("map {i}: 'from' needs {n} coordinates")));
        }
        let from = Grade::new(m.from.clone());
        let cols = dims.get(&from).copied().unwrap_or(0);
        let cols = if m.matrix.is_empty() { cols } else { m.matrix[0].len() };
        let rows: Vec<Vec<Rational>> = m
            .matrix
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let matrix = Matrix::from_rows(rows, cols)
            .ok_or_else(|| CliError::Parse(format!("map {i}: ragged matrix")))?;
        if steps.insert((from, m.axis), matrix).is_some() {
            return Err(CliError::Parse(format!("map {i} repeats an earlier map")));
        }
    }
    let module = GridModule::new(Grade::new(file.lo), Grade::new(file.hi), &dims, &steps)?;
    module.validate()?;
    Ok(module)
}
