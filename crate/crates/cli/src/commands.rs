use crate::format::{
    barcode_json, grade_key, parse_barcode, parse_module, parse_series, rational_string, series_json,
};
use crate::{CliError, Outcome, EXIT_DIFFER, EXIT_OK};
use ecs_core::barcode::ecs_within;
use ecs_core::gridmod::{module_ecs_within, GridModule};
use ecs_core::reconstruct::reconstruct_within;
use ecs_core::series::{ExpKey, FormalSum};
use ecs_core::Barcode;
use serde_json::{json, Map, Value};

pub fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{path}: {e}")))
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// One value is printed bare, several as an object keyed by name.
fn emit(parts: Vec<(&str, Value)>) -> String {
    if parts.len() == 1 {
        return render(&parts[0].1);
    }
    let obj: Map<String, Value> = parts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    render(&Value::Object(obj))
}

#[derive(Debug, Clone, Default)]
pub struct BarcodeFlags {
    pub birth: bool,
    pub death: bool,
    pub critical: bool,
    pub lifespan: bool,
    pub drift: bool,
    pub ecs: bool,
    pub p_max: Option<usize>,
    pub budget: usize,
}

pub fn barcode_invariants(text: &str, flags: &BarcodeFlags) -> Result<Outcome, CliError> {
    let f = parse_barcode(text)?;
    let none = !(flags.birth || flags.death || flags.critical || flags.lifespan || flags.drift || flags.ecs);
    let mut parts = Vec::new();
    if flags.birth {
        parts.push(("birth", series_json(&f.birth_series(), 1, false)));
    }
    if flags.death {
        parts.push(("death", series_json(&f.death_series(), 1, false)));
    }
    if flags.critical {
        parts.push(("critical", series_json(&f.critical_series(), 1, false)));
    }
    if flags.lifespan {
        parts.push(("lifespan", series_json(&f.lifespan_series(), 1, false)));
    }
    if flags.drift {
        parts.push(("drift", Value::String(rational_string(&f.drift()))));
    }
    if flags.ecs || none {
        let e = ecs_within(&f, flags.p_max, flags.budget)?;
        parts.push(("ecs", series_json(&e, 1, true)));
    }
    Ok(Outcome::ok(emit(parts)))
}

pub fn barcode_reconstruct(text: &str, budget: usize) -> Result<Outcome, CliError> {
    let parsed = parse_series(text)?;
    if parsed.axes != 1 || parsed.indeterminates.contains("y") {
        return Err(CliError::Malformed(
            "malformed exterior critical series at stage 'input': only the indeterminates x and z on one axis are allowed"
                .into(),
        ));
    }
    let f = reconstruct_within(&parsed.series, budget)?;
    Ok(Outcome::ok(render(&barcode_json(&f))))
}

/// `x` part of a key as `3` on one axis or `(2,2)` on several.
fn grade_text(k: &ExpKey, axes: usize) -> String {
    let coords = k.x_padded(axes).unwrap_or_else(|| k.x_coords().to_vec());
    let parts: Vec<String> = coords.iter().map(rational_string).collect();
    if axes == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(","))
    }
}

/// Least term of `a - b` in output order (ascending z, then grade).
fn first_difference(a: &FormalSum, b: &FormalSum) -> Option<ExpKey> {
    let d = a - b;
    d.iter().map(|(k, _)| k.clone()).min_by(|x, y| x.z().cmp(&y.z()).then_with(|| x.cmp(y)))
}

fn series_line(name: &str, a: &FormalSum, b: &FormalSum, axes: usize, with_z: bool) -> (String, bool) {
    match first_difference(a, b) {
        None => (format!("{name}: EQUAL"), true),
        Some(k) if with_z => (format!("{name}: DIFFER first at z^{} grade {}", k.z(), grade_text(&k, axes)), false),
        Some(k) => (format!("{name}: DIFFER first at grade {}", grade_text(&k, axes)), false),
    }
}

fn report(lines: Vec<(String, bool)>) -> Outcome {
    let equal = lines.iter().all(|l| l.1);
    let mut out: String = lines.into_iter().map(|l| l.0 + "\n").collect();
    out.push_str(if equal { "result: EQUAL\n" } else { "result: DIFFER\n" });
    Outcome { stdout: out, code: if equal { EXIT_OK } else { EXIT_DIFFER } }
}

pub fn barcode_compare(a: &str, b: &str, p_max: Option<usize>, budget: usize) -> Result<Outcome, CliError> {
    let (f, g): (Barcode, Barcode) = (parse_barcode(a)?, parse_barcode(b)?);
    let mut lines = vec![
        series_line("birth", &f.birth_series(), &g.birth_series(), 1, false),
        series_line("death", &f.death_series(), &g.death_series(), 1, false),
        series_line("critical", &f.critical_series(), &g.critical_series(), 1, false),
        series_line("lifespan", &f.lifespan_series(), &g.lifespan_series(), 1, false),
    ];
    let (da, db) = (f.drift(), g.drift());
    lines.push(if da == db {
        ("drift: EQUAL".to_string(), true)
    } else {
        (format!("drift: DIFFER ({} vs {})", rational_string(&da), rational_string(&db)), false)
    });
    let (ea, eb) = (ecs_within(&f, p_max, budget)?, ecs_within(&g, p_max, budget)?);
    lines.push(series_line("ecs", &ea, &eb, 1, true));
    Ok(report(lines))
}

#[derive(Debug, Clone, Default)]
pub struct ModuleFlags {
    pub hilbert: bool,
    pub rank_invariant: bool,
    pub onset: bool,
    pub critical: bool,
    pub ecs: bool,
    pub p_max: Option<usize>,
    pub budget: usize,
}

fn hilbert_json(m: &GridModule) -> Value {
    let obj: Map<String, Value> = m.hilbert().iter().map(|(g, d)| (grade_key(g), json!(d))).collect();
    Value::Object(obj)
}

fn rank_json(m: &GridModule) -> Value {
    let pairs: Vec<Value> = m
        .rank_invariant()
        .iter()
        .map(|((g, h), r)| json!({"from": g.coords(), "to": h.coords(), "rank": r}))
        .collect();
    Value::Array(pairs)
}

fn onset_json(m: &GridModule) -> Value {
    let dims: Map<String, Value> = m
        .grades()
        .iter()
        .map(|g| (g, m.onset_dim(g)))
        .filter(|(_, d)| *d > 0)
        .map(|(g, d)| (grade_key(g), json!(d)))
        .collect();
    let total: usize = dims.values().filter_map(Value::as_u64).sum::<u64>() as usize;
    json!({"total": total, "dims": dims})
}

pub fn module_invariants(text: &str, flags: &ModuleFlags) -> Result<Outcome, CliError> {
    let m = parse_module(text)?;
    let n = m.axes();
    let none = !(flags.hilbert || flags.rank_invariant || flags.onset || flags.critical || flags.ecs);
    let mut parts = Vec::new();
    if flags.hilbert {
        parts.push(("hilbert", hilbert_json(&m)));
    }
    if flags.rank_invariant {
        parts.push(("rank-invariant", rank_json(&m)));
    }
    if flags.onset {
        parts.push(("onset", onset_json(&m)));
    }
    if flags.critical {
        parts.push(("critical", series_json(&m.critical_series(), n, false)));
    }
    if flags.ecs || none {
        let e = module_ecs_within(&m, flags.p_max, flags.budget)?;
        parts.push(("ecs", series_json(&e, n, true)));
    }
    Ok(Outcome::ok(emit(parts)))
}

pub fn module_compare(a: &str, b: &str, p_max: Option<usize>, budget: usize) -> Result<Outcome, CliError> {
    let (m, w) = (parse_module(a)?, parse_module(b)?);
    if m.axes() != w.axes() {
        return Err(CliError::Validation(format!("axis count mismatch: {} vs {}", m.axes(), w.axes())));
    }
    let n = m.axes();
    let mut lines = Vec::new();
    let (ha, hb) = (m.hilbert(), w.hilbert());
    let hdiff = ha.keys().chain(hb.keys()).filter(|g| ha.get(*g) != hb.get(*g)).min().cloned();
    lines.push(match hdiff {
        None => ("hilbert: EQUAL".to_string(), true),
        Some(g) => (format!("hilbert: DIFFER first at grade {g}"), false),
    });
    lines.push(match m.rank_invariant().first_difference(&w.rank_invariant()) {
        None => ("rank-invariant: EQUAL".to_string(), true),
        Some((g, h)) => (format!("rank-invariant: DIFFER first at pair {g} -> {h}"), false),
    });
    let (oa, ob) = (m.onset_total(), w.onset_total());
    lines.push(if oa == ob {
        (format!("onset-total: EQUAL ({oa})"), true)
    } else {
        (format!("onset-total: DIFFER ({oa} vs {ob})"), false)
    });
    lines.push(series_line("critical", &m.critical_series(), &w.critical_series(), n, false));
    let (ea, eb) = (module_ecs_within(&m, p_max, budget)?, module_ecs_within(&w, p_max, budget)?);
    lines.push(series_line("ecs", &ea, &eb, n, true));
    Ok(report(lines))
}
