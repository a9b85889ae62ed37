//! JSON description files and report encoding.
//!
//! Matrices (bundle generators, presentations, anchors) are listed row by
//! row; lists of sections (`generators` of a module basis or vector field
//! file) are listed one section per entry.

use std::path::Path;

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use tepui_core::algebroid::AnchoredBracket;
use tepui_core::bundle::{BoxDomain, Bundle, Cell, Piece, Relation, SignCondition};
use tepui_core::constructions::PolyMap;
use tepui_core::dynamics::{FPath, Segment};
use tepui_core::grobner::ModuleBasis;
use tepui_core::modules::FPModule;
use tepui_core::polyalg::{format_rational, PolyMatrix, Polynomial, Rational, Variables};

use crate::error::{CliError, CliResult};

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_json(text: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(CliError::parse)
}

/// Deterministic rendering: sorted keys, two-space indentation.
pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values always serialize")
}

/// Exact rational from `3`, `-3/4`, `0.25` or `1e-3`.
pub fn parse_rational(s: &str) -> CliResult<Rational> {
    let s = s.trim();
    let bad = || CliError::Parse(format!("`{s}` is not a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let text = if let Some((int, frac)) = mantissa.split_once('.') {
        if mantissa.contains('/') || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let digits = if digits == "-" || digits == "+" || digits.is_empty() { return Err(bad()) } else { digits };
        format!("({digits})/1{}", "0".repeat(frac.len()))
    } else {
        format!("({mantissa})")
    };
    let text = match exp {
        0 => text,
        e if e > 0 => format!("{text}*1{}", "0".repeat(e as usize)),
        e => format!("{text}/1{}", "0".repeat((-e) as usize)),
    };
    if !text.chars().all(|c| c.is_ascii_digit() || "()/*+-".contains(c)) {
        return Err(bad());
    }
    let empty = Variables::default();
    empty.parse(&text).ok().and_then(|p| p.constant_value()).ok_or_else(bad)
}

/// Comma-separated rational coordinates.
pub fn parse_point(s: &str) -> CliResult<Vec<Rational>> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(parse_rational).collect()
}

pub fn parse_reals(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Parse(format!("`{t}` is not a number"))))
        .collect()
}

fn field<'a>(v: &'a Value, key: &str) -> CliResult<&'a Value> {
    v.get(key).ok_or_else(|| CliError::Parse(format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| CliError::Parse(format!("`{what}` must be an array")))
}

fn usize_field(v: &Value, key: &str) -> CliResult<usize> {
    field(v, key)?.as_u64().map(|n| n as usize).ok_or_else(|| CliError::Parse(format!("`{key}` must be a nonnegative integer")))
}

pub fn rational_value(v: &Value) -> CliResult<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        _ => Err(CliError::Parse(format!("expected a number, found {v}"))),
    }
}

pub fn real_value(v: &Value) -> CliResult<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| CliError::Parse(format!("expected a finite number, found {v}")))
}

fn reals(v: &Value, what: &str) -> CliResult<Vec<f64>> {
    array(v, what)?.iter().map(real_value).collect()
}

pub fn variables(v: &Value, key: &str) -> CliResult<Variables> {
    let names = array(field(v, key)?, key)?
        .iter()
        .map(|n| n.as_str().map(str::to_string).ok_or_else(|| CliError::Parse(format!("`{key}` must list strings"))))
        .collect::<CliResult<Vec<_>>>()?;
    Variables::new(names).map_err(CliError::parse)
}

pub fn polynomial(vars: &Variables, v: &Value) -> CliResult<Polynomial> {
    match v {
        Value::String(s) => vars.parse(s).map_err(|e| CliError::Parse(format!("`{s}`: {e}"))),
        Value::Number(_) => Ok(Polynomial::constant(vars.len(), rational_value(v)?)),
        _ => Err(CliError::Parse(format!("expected a polynomial, found {v}"))),
    }
}

fn poly_list(vars: &Variables, v: &Value, what: &str) -> CliResult<Vec<Polynomial>> {
    array(v, what)?.iter().map(|p| polynomial(vars, p)).collect()
}

fn poly_lists(vars: &Variables, v: &Value, what: &str) -> CliResult<Vec<Vec<Polynomial>>> {
    array(v, what)?.iter().map(|r| poly_list(vars, r, what)).collect()
}

/// A row-major matrix with `rows` rows. An empty list is the `rows × 0` matrix.
fn matrix(vars: &Variables, v: &Value, rows: usize, what: &str) -> CliResult<PolyMatrix> {
    let listed = poly_lists(vars, v, what)?;
    if listed.is_empty() {
        return Ok(PolyMatrix::zeros(rows, 0, vars.len()));
    }
    if listed.len() != rows {
        return Err(CliError::Parse(format!("`{what}` must have {rows} rows, found {}", listed.len())));
    }
    let cols = listed[0].len();
    if listed.iter().any(|r| r.len() != cols) {
        return Err(CliError::Parse(format!("`{what}` rows have different lengths")));
    }
    PolyMatrix::from_rows(vars.len(), listed).map_err(CliError::parse)
}

pub fn domain(v: Option<&Value>, nvars: usize) -> CliResult<BoxDomain> {
    let Some(v) = v.filter(|v| !v.is_null()) else {
        return Ok(BoxDomain::unbounded(nvars));
    };
    let bounds = array(v, "domain")?
        .iter()
        .map(|pair| {
            let pair = array(pair, "domain")?;
            if pair.len() != 2 {
                return Err(CliError::Parse("domain entries are [lo, hi]".into()));
            }
            let end = |e: &Value| if e.is_null() { Ok(None) } else { rational_value(e).map(Some) };
            Ok((end(&pair[0])?, end(&pair[1])?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if bounds.len() != nvars {
        return Err(CliError::Parse(format!("domain has {} intervals for {nvars} variables", bounds.len())));
    }
    BoxDomain::new(bounds).map_err(CliError::parse)
}

/// `[[lhs, rel, rhs], …]`, meaning `lhs − rhs rel 0`.
pub fn cell(vars: &Variables, v: &Value) -> CliResult<Cell> {
    let conditions = array(v, "cell")?
        .iter()
        .map(|c| {
            let c = array(c, "cell")?;
            if c.len() != 3 {
                return Err(CliError::Parse("cell conditions are [lhs, relation, rhs]".into()));
            }
            let rel: Relation = c[1]
                .as_str()
                .ok_or_else(|| CliError::Parse("relation must be a string".into()))?
                .parse()
                .map_err(CliError::parse)?;
            Ok(SignCondition::new(&polynomial(vars, &c[0])? - &polynomial(vars, &c[2])?, rel))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Cell::new(conditions))
}

pub struct BundleFile {
    pub vars: Variables,
    pub bundle: Bundle,
}

pub fn bundle(v: &Value) -> CliResult<BundleFile> {
    let vars = variables(v, "vars")?;
    let n = usize_field(v, "ambient_rank")?;
    let dom = domain(v.get("domain"), vars.len())?;
    let pieces = array(field(v, "pieces")?, "pieces")?
        .iter()
        .map(|p| {
            let cell = cell(&vars, p.get("cell").unwrap_or(&Value::Array(vec![])))?;
            let generators = matrix(&vars, field(p, "generators")?, n, "generators")?;
            Ok(Piece { cell, generators })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if pieces.is_empty() {
        return Err(CliError::Parse("a bundle needs at least one piece".into()));
    }
    let bundle = Bundle::from_pieces(vars.len(), n, pieces, dom).map_err(CliError::parse)?;
    Ok(BundleFile { vars, bundle })
}

pub struct ModuleFile {
    pub vars: Variables,
    pub module: FPModule,
}

pub fn module(v: &Value) -> CliResult<ModuleFile> {
    let vars = variables(v, "vars")?;
    let p = usize_field(v, "free_rank")?;
    let pres = matrix(&vars, field(v, "presentation")?, p, "presentation")?;
    let module = FPModule::new(p, pres).map_err(CliError::parse)?;
    Ok(ModuleFile { vars, module })
}

pub struct AlgebroidFile {
    pub vars: Variables,
    pub anchor: PolyMatrix,
    pub bracket: AnchoredBracket,
}

/// `c` entries are `[i, j, k, poly]` with `i < j`, 0-based: the `eₖ`
/// coefficient of `[eᵢ, eⱼ]`.
pub fn algebroid(v: &Value) -> CliResult<AlgebroidFile> {
    let vars = variables(v, "vars")?;
    let rank = usize_field(v, "rank")?;
    let anchor_rows = poly_lists(&vars, field(v, "anchor")?, "anchor")?;
    if anchor_rows.len() != vars.len() {
        return Err(CliError::Parse(format!("anchor must have {} rows", vars.len())));
    }
    if anchor_rows.iter().any(|r| r.len() != rank) {
        return Err(CliError::Parse(format!("anchor rows must have {rank} entries")));
    }
    let anchor = if anchor_rows.is_empty() {
        PolyMatrix::zeros(0, rank, 0)
    } else {
        PolyMatrix::from_rows(vars.len(), anchor_rows).map_err(CliError::parse)?
    };
    let mut entries = Vec::new();
    for e in v.get("c").map(|c| array(c, "c")).transpose()?.into_iter().flatten() {
        let e = array(e, "c")?;
        if e.len() != 4 {
            return Err(CliError::Parse("c entries are [i, j, k, poly]".into()));
        }
        let idx = |x: &Value| x.as_u64().map(|n| n as usize).ok_or_else(|| CliError::Parse("c indices must be integers".into()));
        let (i, j, k) = (idx(&e[0])?, idx(&e[1])?, idx(&e[2])?);
        if i >= j {
            return Err(CliError::Parse(format!("c entry ({i}, {j}) needs i < j")));
        }
        entries.push((i, j, k, polynomial(&vars, &e[3])?));
    }
    let bracket = AnchoredBracket::new(anchor.clone(), entries).map_err(CliError::parse)?;
    Ok(AlgebroidFile { vars, anchor, bracket })
}

pub struct SectionsFile {
    pub vars: Variables,
    pub rank: usize,
    pub generators: Vec<Vec<Polynomial>>,
}

impl SectionsFile {
    pub fn basis(&self) -> CliResult<ModuleBasis> {
        ModuleBasis::new(self.rank, self.vars.len(), self.generators.clone()).map_err(CliError::parse)
    }
}

/// `{vars, rank, generators}`; vector fields use `rank` = number of variables.
pub fn sections(v: &Value) -> CliResult<SectionsFile> {
    let vars = variables(v, "vars")?;
    let rank = match v.get("rank") {
        Some(_) => usize_field(v, "rank")?,
        None => vars.len(),
    };
    let generators = poly_lists(&vars, field(v, "generators")?, "generators")?;
    if let Some(g) = generators.iter().find(|g| g.len() != rank) {
        return Err(CliError::Parse(format!("generator of length {} in rank {rank}", g.len())));
    }
    Ok(SectionsFile { vars, rank, generators })
}

pub struct MapFile {
    pub source: Variables,
    pub target: Variables,
    pub map: PolyMap,
    pub source_domain: BoxDomain,
}

pub fn poly_map(v: &Value) -> CliResult<MapFile> {
    let source = variables(v, "source_vars")?;
    let target = variables(v, "target_vars")?;
    let comps = poly_list(&source, field(v, "components")?, "components")?;
    if comps.len() != target.len() {
        return Err(CliError::Parse(format!("{} components for {} target variables", comps.len(), target.len())));
    }
    let map = PolyMap::new(source.len(), comps).map_err(CliError::parse)?;
    let source_domain = domain(v.get("domain"), source.len())?;
    Ok(MapFile { source, target, map, source_domain })
}

pub fn fpath(v: &Value) -> CliResult<FPath> {
    let start = reals(field(v, "start")?, "start")?;
    let segments = array(field(v, "segments")?, "segments")?
        .iter()
        .map(|s| {
            let t = real_value(field(s, "t")?)?;
            if t <= 0.0 {
                return Err(CliError::Parse(format!("segment duration {t} must be positive")));
            }
            Ok(Segment { lambda: reals(field(s, "lambda")?, "lambda")?, t })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(FPath { start, segments })
}

/// Float with 17 significant digits; non-finite values become `null`.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON")
}

pub fn real_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| real(x)).collect())
}

pub fn rational(c: &Rational) -> Value {
    Value::String(format_rational(c))
}

pub fn rational_vec(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn rational_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

pub fn poly(vars: &Variables, p: &Polynomial) -> Value {
    Value::String(vars.format(p))
}

pub fn poly_vec(vars: &Variables, v: &[Polynomial]) -> Value {
    Value::Array(v.iter().map(|p| poly(vars, p)).collect())
}

fn names(vars: &Variables) -> Value {
    json!(vars.names())
}

fn matrix_rows(vars: &Variables, m: &PolyMatrix) -> Value {
    if m.cols() == 0 {
        return json!([]);
    }
    Value::Array((0..m.rows()).map(|r| poly_vec(vars, &m.row(r))).collect())
}

fn domain_json(d: &BoxDomain) -> Value {
    Value::Array(
        d.bounds
            .iter()
            .map(|(lo, hi)| json!([lo.as_ref().map_or(Value::Null, rational), hi.as_ref().map_or(Value::Null, rational)]))
            .collect(),
    )
}

pub fn bundle_json(vars: &Variables, e: &Bundle) -> Value {
    let pieces: Vec<Value> = e
        .pieces()
        .iter()
        .map(|p| {
            let cell: Vec<Value> =
                p.cell.conditions.iter().map(|c| json!([vars.format(&c.poly), c.relation.as_str(), "0"])).collect();
            json!({ "cell": cell, "generators": matrix_rows(vars, &p.generators) })
        })
        .collect();
    json!({
        "vars": names(vars),
        "ambient_rank": e.ambient_rank(),
        "domain": domain_json(e.domain()),
        "pieces": pieces,
    })
}

pub fn module_json(vars: &Variables, q: &FPModule) -> Value {
    json!({
        "vars": names(vars),
        "free_rank": q.free_rank(),
        "presentation": matrix_rows(vars, q.presentation()),
    })
}

pub fn algebroid_json(vars: &Variables, l: &AnchoredBracket) -> Value {
    let c: Vec<Value> = l.entries().iter().map(|(i, j, k, p)| json!([i, j, k, vars.format(p)])).collect();
    let anchor = l.anchor();
    let rows: Vec<Value> = (0..anchor.rows()).map(|r| poly_vec(vars, &anchor.row(r))).collect();
    json!({ "vars": names(vars), "rank": anchor.cols(), "anchor": rows, "c": c })
}

/// Object from key/value pairs; keys come out sorted.
pub fn object<I: IntoIterator<Item = (&'static str, Value)>>(items: I) -> Value {
    Value::Object(items.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}
