//! Fixed-format MPS export of a [`ModelIR`], a reader for the same subset,
//! and import of external solver solutions.
//!
//! Column names come from a mangler (by default `z_p{path}_s{slice}` style,
//! see [`default_mangle`]). Rows are named `{family}_{n}` with `n` counting
//! within the constraint family. Names longer than 255 bytes are truncated
//! and suffixed with a hash of the full name.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::Hasher;

use fnv::FnvHasher;

use crate::error::{Error, Result};
use crate::model::{decode, ModelIR, Sense, Var, VarKind};
use crate::placement::Placement;

pub const MAX_NAME_LEN: usize = 255;
const OBJECTIVE_ROW: &str = "COST";

/// `symbol` followed by `_{key}{id}` per entity. Bytes outside
/// `[A-Za-z0-9.-]` are written as `%XX`, so `_` only ever separates fields
/// and the mapping is injective.
pub fn default_mangle(var: &Var) -> String {
    let mut out = String::from(var.symbol);
    for (key, id) in &var.ids {
        out.push('_');
        out.push_str(key);
        for b in id.bytes() {
            if b.is_ascii_alphanumeric() || b == b'.' || b == b'-' {
                out.push(b as char);
            } else {
                write!(out, "%{b:02X}").unwrap();
            }
        }
    }
    out
}

fn shorten(name: String) -> String {
    if name.len() <= MAX_NAME_LEN {
        return name;
    }
    let mut h = FnvHasher::default();
    h.write(name.as_bytes());
    let suffix = format!("#{:016x}", h.finish());
    let mut cut = MAX_NAME_LEN - suffix.len();
    while !name.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{}{suffix}", &name[..cut])
}

/// Mangled, length-limited column names, one per variable.
pub fn column_names(m: &ModelIR, mangle: impl Fn(&Var) -> String) -> Result<Vec<String>> {
    let names: Vec<String> = m.vars.iter().map(|v| shorten(mangle(v))).collect();
    let mut seen = HashSet::with_capacity(names.len());
    for n in &names {
        if n.is_empty() || n.contains(char::is_whitespace) || !seen.insert(n.as_str()) {
            return Err(Error::NameCollision(n.clone()));
        }
    }
    Ok(names)
}

pub fn row_names(m: &ModelIR) -> Vec<String> {
    let mut counters: HashMap<&str, usize> = HashMap::new();
    m.constraints
        .iter()
        .map(|c| {
            let n = counters.entry(c.family()).or_insert(0);
            *n += 1;
            format!("{}_{}", c.family(), n)
        })
        .collect()
}

fn field(out: &mut String, code: &str, a: &str, b: &str, value: Option<f64>) {
    write!(out, " {code:<2} {a:<8}  {b:<8}").unwrap();
    if let Some(v) = value {
        // Shortest representation that parses back to the same f64.
        write!(out, "  {:>12}", format!("{v:?}")).unwrap();
    }
    out.push('\n');
}

/// Writes `m` as fixed-format MPS using `mangle` for column names.
pub fn export_mps_with(m: &ModelIR, name: &str, mangle: impl Fn(&Var) -> String) -> Result<String> {
    let cols = column_names(m, mangle)?;
    let rows = row_names(m);
    let mut out = String::new();
    writeln!(out, "NAME          {name}").unwrap();
    out.push_str("ROWS\n");
    field(&mut out, "N", OBJECTIVE_ROW, "", None);
    for (c, r) in m.constraints.iter().zip(&rows) {
        let code = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        field(&mut out, code, r, "", None);
    }

    // Column-major copy of the matrix, objective first.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m.vars.len()];
    for (r, c) in m.constraints.iter().enumerate() {
        for &(v, coef) in c.expr.terms() {
            by_col[v].push((r, coef));
        }
    }
    let mut obj = vec![0.0; m.vars.len()];
    for &(v, coef) in m.objective.terms() {
        obj[v] = coef;
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (v, var) in m.vars.iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            writeln!(out, "    MARKER{markers:<4}  'MARKER'                 {tag}").unwrap();
            markers += 1;
            in_int = is_int;
        }
        if obj[v] != 0.0 {
            field(&mut out, "", &cols[v], OBJECTIVE_ROW, Some(obj[v]));
        }
        for &(r, coef) in &by_col[v] {
            field(&mut out, "", &cols[v], &rows[r], Some(coef));
        }
        if obj[v] == 0.0 && by_col[v].is_empty() {
            // Keep the column declared.
            field(&mut out, "", &cols[v], OBJECTIVE_ROW, Some(0.0));
        }
    }
    if in_int {
        writeln!(out, "    MARKER{markers:<4}  'MARKER'                 'INTEND'").unwrap();
    }

    out.push_str("RHS\n");
    if m.objective.constant != 0.0 {
        field(&mut out, "", "RHS", OBJECTIVE_ROW, Some(-m.objective.constant));
    }
    for (c, r) in m.constraints.iter().zip(&rows) {
        let rhs = c.rhs - c.expr.constant;
        if rhs != 0.0 {
            field(&mut out, "", "RHS", r, Some(rhs));
        }
    }
    out.push_str("RANGES\n");
    out.push_str("BOUNDS\n");
    for (var, col) in m.vars.iter().zip(&cols) {
        match var.kind {
            VarKind::Binary => field(&mut out, "BV", "BND", col, None),
            VarKind::Continuous => {
                if var.lo == f64::NEG_INFINITY && var.hi == f64::INFINITY {
                    field(&mut out, "FR", "BND", col, None);
                    continue;
                }
                if var.lo != 0.0 {
                    if var.lo == f64::NEG_INFINITY {
                        field(&mut out, "MI", "BND", col, None);
                    } else {
                        field(&mut out, "LO", "BND", col, Some(var.lo));
                    }
                }
                if var.hi != f64::INFINITY {
                    field(&mut out, "UP", "BND", col, Some(var.hi));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn export_mps(m: &ModelIR, name: &str) -> Result<String> {
    export_mps_with(m, name, default_mangle)
}

/// Model read back from MPS text, keyed by names.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedMps {
    pub name: String,
    pub rows: Vec<(String, Sense)>,
    pub columns: Vec<String>,
    pub integer: Vec<bool>,
    /// `(row, column, coefficient)` in file order.
    pub entries: Vec<(usize, usize, f64)>,
    pub objective: Vec<(usize, f64)>,
    /// Negated objective RHS, i.e. the objective constant.
    pub objective_constant: f64,
    pub rhs: Vec<f64>,
    pub ranges: Vec<Option<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("MPS line {line}: {msg}"))
}

fn row_of(index: &HashMap<String, usize>, name: &str, line: usize) -> Result<usize> {
    index
        .get(name)
        .copied()
        .ok_or_else(|| parse_err(line, format!("unknown row `{name}`")))
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| parse_err(line, format!("bad number `{tok}`")))
}

/// Parses the MPS subset written by [`export_mps`], plus the common bound
/// types (`LO UP FX FR MI PL BV LI UI`).
pub fn parse_mps(text: &str) -> Result<ParsedMps> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Ranges,
        Bounds,
    }
    let mut p = ParsedMps::default();
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = match toks[0] {
                "NAME" => {
                    p.name = toks.get(1).unwrap_or(&"").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                other => return Err(parse_err(ln, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(parse_err(ln, "data outside a section")),
            Section::Rows => {
                let [code, name] = toks[..] else {
                    return Err(parse_err(ln, "expected `type name`"));
                };
                let sense = match code {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name.to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(parse_err(ln, format!("unknown row type `{code}`"))),
                };
                if row_index.insert(name.to_string(), p.rows.len()).is_some() {
                    return Err(parse_err(ln, format!("duplicate row `{name}`")));
                }
                p.rows.push((name.to_string(), sense));
            }
            Section::Columns => {
                if toks.get(1) == Some(&"'MARKER'") {
                    match toks.get(2) {
                        Some(&"'INTORG'") => in_int = true,
                        Some(&"'INTEND'") => in_int = false,
                        _ => return Err(parse_err(ln, "bad marker")),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(parse_err(ln, "expected `column row value [row value]`"));
                }
                let col = match col_index.get(toks[0]) {
                    Some(&c) => c,
                    None => {
                        let c = p.columns.len();
                        col_index.insert(toks[0].to_string(), c);
                        p.columns.push(toks[0].to_string());
                        p.integer.push(in_int);
                        p.lower.push(0.0);
                        p.upper.push(if in_int { 1.0 } else { f64::INFINITY });
                        c
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let value = number(pair[1], ln)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        if value != 0.0 {
                            p.objective.push((col, value));
                        }
                    } else {
                        p.entries.push((row_of(&row_index, pair[0], ln)?, col, value));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                if p.rhs.len() != p.rows.len() {
                    p.rhs = vec![0.0; p.rows.len()];
                    p.ranges = vec![None; p.rows.len()];
                }
                // The set name is optional in the wild; pairs are at the end.
                let pairs = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in pairs.chunks(2) {
                    let value = number(pair[1], ln)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        p.objective_constant = -value;
                    } else if section == Section::Rhs {
                        p.rhs[row_of(&row_index, pair[0], ln)?] = value;
                    } else {
                        p.ranges[row_of(&row_index, pair[0], ln)?] = Some(value);
                    }
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(parse_err(ln, "expected `type set column [value]`"));
                }
                let col = *col_index
                    .get(toks[2])
                    .ok_or_else(|| parse_err(ln, format!("unknown column `{}`", toks[2])))?;
                let value = || -> Result<f64> { number(toks.get(3).ok_or_else(|| parse_err(ln, "missing bound value"))?, ln) };
                match toks[0] {
                    "LO" => p.lower[col] = value()?,
                    "UP" => p.upper[col] = value()?,
                    "FX" => {
                        p.lower[col] = value()?;
                        p.upper[col] = p.lower[col];
                    }
                    "FR" => {
                        p.lower[col] = f64::NEG_INFINITY;
                        p.upper[col] = f64::INFINITY;
                    }
                    "MI" => p.lower[col] = f64::NEG_INFINITY,
                    "PL" => p.upper[col] = f64::INFINITY,
                    "BV" => {
                        p.integer[col] = true;
                        p.lower[col] = 0.0;
                        p.upper[col] = 1.0;
                    }
                    "LI" => {
                        p.integer[col] = true;
                        p.lower[col] = value()?;
                    }
                    "UI" => {
                        p.integer[col] = true;
                        p.upper[col] = value()?;
                    }
                    other => return Err(parse_err(ln, format!("unknown bound type `{other}`"))),
                }
            }
        }
    }
    if !ended {
        return Err(Error::Parse("MPS file has no ENDATA".into()));
    }
    if p.rhs.len() != p.rows.len() {
        p.rhs = vec![0.0; p.rows.len()];
        p.ranges = vec![None; p.rows.len()];
    }
    Ok(p)
}

/// Variable values read from a solution file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolutionFile {
    pub values: BTreeMap<String, f64>,
    pub objective: Option<f64>,
}

/// Reads whitespace-separated `name value` lines; `#` starts a comment and
/// a `=obj= value` line gives the objective.
pub fn parse_solution(text: &str) -> Result<SolutionFile> {
    let mut sol = SolutionFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [name, value] = toks[..] else {
            return Err(Error::Parse(format!("solution line {}: expected `name value`", i + 1)));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("solution line {}: bad number `{value}`", i + 1)))?;
        if name == "=obj=" {
            sol.objective = Some(value);
        } else if sol.values.insert(name.to_string(), value).is_some() {
            return Err(Error::DuplicateId {
                kind: "solution variable",
                id: name.to_string(),
            });
        }
    }
    Ok(sol)
}

/// Writes `values` (aligned with `m.vars`) in the solution file format.
pub fn write_solution(m: &ModelIR, values: &[f64]) -> Result<String> {
    let cols = column_names(m, default_mangle)?;
    let mut out = String::new();
    writeln!(out, "=obj= {:?}", m.objective_value(values)?).unwrap();
    for (name, v) in cols.iter().zip(values) {
        writeln!(out, "{name} {v:?}").unwrap();
    }
    Ok(out)
}

/// Maps a solution onto the model's variables; absent variables are 0.
pub fn solution_values(sol: &SolutionFile, m: &ModelIR) -> Result<Vec<f64>> {
    let cols = column_names(m, default_mangle)?;
    let index: HashMap<&str, usize> = cols.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut values = vec![0.0; m.vars.len()];
    for (name, &v) in &sol.values {
        let &i = index
            .get(name.as_str())
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        values[i] = v;
    }
    Ok(values)
}

/// Decodes an external solution into a placement.
pub fn import_solution(sol: &SolutionFile, m: &ModelIR) -> Result<Placement> {
    decode(m, &solution_values(sol, m)?)
}
