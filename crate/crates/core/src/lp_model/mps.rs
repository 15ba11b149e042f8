//! MPS reader and writer.
//!
//! Equality rows go to `A x = b`. `G` rows are kept as `a x ≥ rhs`, `L` rows
//! are negated into `−a x ≥ −rhs`, and any row with a RANGES entry becomes two
//! `≥` rows (lower side first). MARKER lines are accepted and integrality is
//! discarded.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use super::{LpProblem, ModelError, ObjSense, SparseMatrix};

/// Bound values at or beyond this magnitude are read as infinite.
const MPS_INFINITY: f64 = 1e30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MpsFormat {
    /// Whitespace-separated fields; names may not contain spaces.
    #[default]
    Free,
    /// Fields at the classic fixed column positions.
    Fixed,
}

#[derive(Debug, thiserror::Error)]
pub enum MpsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("no variables")]
    NoVariables,
    #[error("no objective row")]
    NoObjective,
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::Syntax { line, msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Endata,
}

impl Section {
    fn from_keyword(s: &str) -> Option<Section> {
        Some(match s {
            "NAME" => Section::Name,
            "OBJSENSE" => Section::ObjSense,
            "ROWS" => Section::Rows,
            "COLUMNS" => Section::Columns,
            "RHS" => Section::Rhs,
            "RANGES" => Section::Ranges,
            "BOUNDS" => Section::Bounds,
            "ENDATA" => Section::Endata,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowKind {
    Objective,
    Free,
    Eq,
    Ge,
    Le,
}

#[derive(Default)]
struct ColBounds {
    lower: Option<f64>,
    upper: Option<f64>,
    negative_upper_implied_free: bool,
    last_line: usize,
}

struct Builder {
    format: MpsFormat,
    sense: ObjSense,
    rows: Vec<(String, RowKind)>,
    row_index: HashMap<String, usize>,
    cols: Vec<String>,
    col_index: HashMap<String, usize>,
    obj: Vec<f64>,
    entries: Vec<(usize, usize, f64)>,
    rhs: HashMap<usize, f64>,
    ranges: HashMap<usize, f64>,
    bounds: Vec<ColBounds>,
    objective_row: Option<usize>,
}

/// Splits a fixed-format line into its six positional fields.
fn fixed_fields(line: &str) -> [&str; 6] {
    const SPANS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];
    let mut out = [""; 6];
    for (k, &(s, e)) in SPANS.iter().enumerate() {
        if s < line.len() {
            out[k] = line.get(s..e.min(line.len())).unwrap_or("").trim();
        }
    }
    out
}

fn parse_value(tok: &str, line: usize) -> Result<f64, MpsError> {
    let v: f64 = tok.parse().map_err(|_| syntax(line, format!("invalid number '{tok}'")))?;
    if v.is_nan() {
        return Err(syntax(line, "NaN value"));
    }
    Ok(v)
}

impl Builder {
    fn new(format: MpsFormat) -> Self {
        Builder {
            format,
            sense: ObjSense::Minimize,
            rows: Vec::new(),
            row_index: HashMap::new(),
            cols: Vec::new(),
            col_index: HashMap::new(),
            obj: Vec::new(),
            entries: Vec::new(),
            rhs: HashMap::new(),
            ranges: HashMap::new(),
            bounds: Vec::new(),
            objective_row: None,
        }
    }

    fn row(&self, name: &str, line: usize) -> Result<usize, MpsError> {
        self.row_index.get(name).copied().ok_or_else(|| syntax(line, format!("unknown row '{name}'")))
    }

    fn col(&self, name: &str, line: usize) -> Result<usize, MpsError> {
        self.col_index.get(name).copied().ok_or_else(|| syntax(line, format!("unknown column '{name}'")))
    }

    fn objsense(&mut self, tok: &str, line: usize) -> Result<(), MpsError> {
        self.sense = match tok.to_ascii_uppercase().as_str() {
            "MAX" | "MAXIMIZE" => ObjSense::Maximize,
            "MIN" | "MINIMIZE" => ObjSense::Minimize,
            other => return Err(syntax(line, format!("unknown objective sense '{other}'"))),
        };
        Ok(())
    }

    fn rows_line(&mut self, raw: &str, line: usize) -> Result<(), MpsError> {
        let (kind, name) = match self.format {
            MpsFormat::Free => {
                let t: Vec<&str> = raw.split_whitespace().collect();
                if t.len() != 2 {
                    return Err(syntax(line, "ROWS entry needs a type and a name"));
                }
                (t[0], t[1])
            }
            MpsFormat::Fixed => {
                let f = fixed_fields(raw);
                (f[0], f[1])
            }
        };
        let kind = match kind.to_ascii_uppercase().as_str() {
            "N" if self.objective_row.is_none() => {
                self.objective_row = Some(self.rows.len());
                RowKind::Objective
            }
            "N" => RowKind::Free,
            "E" => RowKind::Eq,
            "G" => RowKind::Ge,
            "L" => RowKind::Le,
            other => return Err(syntax(line, format!("unknown row type '{other}'"))),
        };
        if name.is_empty() {
            return Err(syntax(line, "empty row name"));
        }
        if self.row_index.insert(name.to_string(), self.rows.len()).is_some() {
            return Err(syntax(line, format!("duplicate row '{name}'")));
        }
        self.rows.push((name.to_string(), kind));
        Ok(())
    }

    fn columns_line(&mut self, raw: &str, line: usize) -> Result<(), MpsError> {
        let fields: Vec<&str> = match self.format {
            MpsFormat::Free => raw.split_whitespace().collect(),
            MpsFormat::Fixed => {
                let f = fixed_fields(raw);
                f[1..].iter().copied().filter(|s| !s.is_empty()).collect()
            }
        };
        if fields.iter().any(|f| f.trim_matches('\'').eq_ignore_ascii_case("MARKER")) {
            return Ok(());
        }
        if fields.len() != 3 && fields.len() != 5 {
            return Err(syntax(line, "COLUMNS entry needs a column and one or two (row, value) pairs"));
        }
        let name = fields[0];
        let j = match self.col_index.get(name) {
            Some(&j) => j,
            None => {
                let j = self.cols.len();
                self.col_index.insert(name.to_string(), j);
                self.cols.push(name.to_string());
                self.obj.push(0.0);
                self.bounds.push(ColBounds::default());
                j
            }
        };
        for pair in fields[1..].chunks(2) {
            let r = self.row(pair[0], line)?;
            let v = parse_value(pair[1], line)?;
            if !v.is_finite() {
                return Err(syntax(line, "infinite coefficient"));
            }
            match self.rows[r].1 {
                RowKind::Objective => self.obj[j] += v,
                RowKind::Free => {}
                _ => self.entries.push((r, j, v)),
            }
        }
        Ok(())
    }

    /// RHS and RANGES share a layout: optional set name, then pairs.
    fn pairs_fields<'a>(&self, raw: &'a str, line: usize) -> Result<Vec<&'a str>, MpsError> {
        let fields: Vec<&str> = match self.format {
            MpsFormat::Free => {
                let t: Vec<&str> = raw.split_whitespace().collect();
                match t.len() {
                    2 | 4 => t,
                    3 | 5 => t[1..].to_vec(),
                    _ => return Err(syntax(line, "expected one or two (row, value) pairs")),
                }
            }
            MpsFormat::Fixed => {
                let f = fixed_fields(raw);
                f[2..].iter().copied().filter(|s| !s.is_empty()).collect()
            }
        };
        if fields.len() != 2 && fields.len() != 4 {
            return Err(syntax(line, "expected one or two (row, value) pairs"));
        }
        Ok(fields)
    }

    fn rhs_line(&mut self, raw: &str, line: usize) -> Result<(), MpsError> {
        for pair in self.pairs_fields(raw, line)?.chunks(2) {
            let r = self.row(pair[0], line)?;
            let v = parse_value(pair[1], line)?;
            if !v.is_finite() {
                return Err(syntax(line, "infinite right-hand side"));
            }
            self.rhs.insert(r, v);
        }
        Ok(())
    }

    fn ranges_line(&mut self, raw: &str, line: usize) -> Result<(), MpsError> {
        for pair in self.pairs_fields(raw, line)?.chunks(2) {
            let r = self.row(pair[0], line)?;
            let v = parse_value(pair[1], line)?;
            if !v.is_finite() {
                return Err(syntax(line, "infinite range"));
            }
            match self.rows[r].1 {
                RowKind::Objective | RowKind::Free => {
                    return Err(syntax(line, format!("range on free row '{}'", pair[0])))
                }
                _ => {
                    self.ranges.insert(r, v);
                }
            }
        }
        Ok(())
    }

    fn bounds_line(&mut self, raw: &str, line: usize) -> Result<(), MpsError> {
        let (kind, col, value) = match self.format {
            MpsFormat::Free => {
                let t: Vec<&str> = raw.split_whitespace().collect();
                if t.is_empty() {
                    return Err(syntax(line, "empty bound"));
                }
                let kind = t[0].to_ascii_uppercase();
                let needs_value = matches!(kind.as_str(), "UP" | "LO" | "FX" | "LI" | "UI" | "SC");
                match (needs_value, t.len()) {
                    (true, 3) => (kind, t[1], Some(t[2])),
                    (true, 4) => (kind, t[2], Some(t[3])),
                    (false, 2) => (kind, t[1], None),
                    (false, 3) => (kind, t[2], None),
                    // BV sometimes carries a redundant value
                    (false, 4) => (kind, t[2], None),
                    _ => return Err(syntax(line, format!("malformed {kind} bound"))),
                }
            }
            MpsFormat::Fixed => {
                let f = fixed_fields(raw);
                let v = if f[3].is_empty() { None } else { Some(f[3]) };
                (f[0].to_ascii_uppercase(), f[2], v)
            }
        };
        let j = self.col(col, line)?;
        let value = match value {
            Some(tok) => Some(parse_value(tok, line)?),
            None => None,
        };
        let need = |v: Option<f64>| v.ok_or_else(|| syntax(line, format!("{kind} bound needs a value")));
        let inf = f64::INFINITY;
        let (lower, upper) = match kind.as_str() {
            "UP" | "UI" => {
                let v = need(value)?;
                if v < 0.0 && self.bounds[j].lower.is_none() {
                    log::warn!("line {line}: negative upper bound on '{col}' with default lower; lower set to -inf");
                    self.bounds[j].negative_upper_implied_free = true;
                }
                (None, Some(v))
            }
            "LO" | "LI" => (Some(need(value)?), None),
            "FX" => {
                let v = need(value)?;
                (Some(v), Some(v))
            }
            "FR" => (Some(-inf), Some(inf)),
            "MI" => (Some(-inf), None),
            "PL" => (None, Some(inf)),
            "BV" => (Some(0.0), Some(1.0)),
            other => return Err(syntax(line, format!("unsupported bound type '{other}'"))),
        };
        let b = &mut self.bounds[j];
        b.last_line = line;
        for (slot, new, side) in [(&mut b.lower, lower, "lower"), (&mut b.upper, upper, "upper")] {
            let Some(mut v) = new else { continue };
            if v >= MPS_INFINITY {
                v = inf;
            } else if v <= -MPS_INFINITY {
                v = -inf;
            }
            match *slot {
                Some(old) if old != v => {
                    return Err(syntax(line, format!("conflicting {side} bound for column '{col}': {old} vs {v}")))
                }
                _ => *slot = Some(v),
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<LpProblem, MpsError> {
        if self.cols.is_empty() {
            return Err(MpsError::NoVariables);
        }
        let n = self.cols.len();
        let objective_row = self.objective_row.ok_or(MpsError::NoObjective)?;

        let mut l = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        for (j, b) in self.bounds.iter().enumerate() {
            let lo = b.lower.unwrap_or(if b.negative_upper_implied_free { f64::NEG_INFINITY } else { 0.0 });
            let hi = b.upper.unwrap_or(f64::INFINITY);
            if lo > hi {
                return Err(syntax(
                    b.last_line,
                    format!("column '{}' has lower bound {lo} above upper bound {hi}", self.cols[j]),
                ));
            }
            l.push(lo);
            u.push(hi);
        }

        // (first output row, sign) per original row for A and G blocks
        let mut eq_map: Vec<Option<usize>> = vec![None; self.rows.len()];
        let mut ge_map: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.rows.len()];
        let mut b = Vec::new();
        let mut h = Vec::new();
        for (r, (_, kind)) in self.rows.iter().enumerate() {
            let rhs = self.rhs.get(&r).copied().unwrap_or(0.0);
            let range = self.ranges.get(&r).copied();
            let sides: Option<(f64, f64)> = match (kind, range) {
                (RowKind::Objective | RowKind::Free, _) => continue,
                (RowKind::Eq, None) => {
                    eq_map[r] = Some(b.len());
                    b.push(rhs);
                    continue;
                }
                (RowKind::Ge, None) => {
                    ge_map[r].push((h.len(), 1.0));
                    h.push(rhs);
                    None
                }
                (RowKind::Le, None) => {
                    ge_map[r].push((h.len(), -1.0));
                    h.push(-rhs);
                    None
                }
                (RowKind::Ge, Some(rg)) => Some((rhs, rhs + rg.abs())),
                (RowKind::Le, Some(rg)) => Some((rhs - rg.abs(), rhs)),
                (RowKind::Eq, Some(rg)) if rg >= 0.0 => Some((rhs, rhs + rg)),
                (RowKind::Eq, Some(rg)) => Some((rhs + rg, rhs)),
            };
            if let Some((lo, hi)) = sides {
                ge_map[r].push((h.len(), 1.0));
                h.push(lo);
                ge_map[r].push((h.len(), -1.0));
                h.push(-hi);
            }
        }

        let mut a_t = Vec::new();
        let mut g_t = Vec::new();
        for &(r, j, v) in &self.entries {
            if let Some(i) = eq_map[r] {
                a_t.push((i, j, v));
            }
            for &(i, s) in &ge_map[r] {
                g_t.push((i, j, s * v));
            }
        }
        let a = SparseMatrix::from_triplets(b.len(), n, a_t).expect("indices are in range");
        let g = SparseMatrix::from_triplets(h.len(), n, g_t).expect("indices are in range");

        // objective constant is the negated RHS of the objective row
        let offset = -self.rhs.get(&objective_row).copied().unwrap_or(0.0);
        let (c, offset) = match self.sense {
            ObjSense::Minimize => (self.obj, offset),
            ObjSense::Maximize => (self.obj.into_iter().map(|v| -v).collect(), -offset),
        };
        Ok(LpProblem::new(a, g, c, b, h, l, u)?.with_offset(offset).with_sense(self.sense))
    }
}

/// Parses MPS text.
pub fn parse_mps(text: &str, format: MpsFormat) -> Result<LpProblem, MpsError> {
    let mut bld = Builder::new(format);
    let mut section: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(|c: char| c.is_whitespace()) {
            let mut toks = raw.split_whitespace();
            let kw = toks.next().unwrap_or("").to_ascii_uppercase();
            let next = Section::from_keyword(&kw)
                .ok_or_else(|| syntax(line, format!("unknown section '{kw}'")))?;
            if let Some(prev) = section {
                if next <= prev {
                    return Err(syntax(line, format!("section {kw} out of order")));
                }
            }
            if next == Section::ObjSense && section.is_some_and(|s| s > Section::Name) {
                return Err(syntax(line, "OBJSENSE must precede ROWS"));
            }
            if next >= Section::Columns && bld.rows.is_empty() {
                return Err(syntax(line, format!("section {kw} before ROWS")));
            }
            if next == Section::ObjSense {
                if let Some(tok) = toks.next() {
                    bld.objsense(tok, line)?;
                }
            }
            section = Some(next);
            if next == Section::Endata {
                break;
            }
            continue;
        }
        match section {
            None | Some(Section::Name) => return Err(syntax(line, "data line outside of a section")),
            Some(Section::ObjSense) => bld.objsense(raw.trim(), line)?,
            Some(Section::Rows) => bld.rows_line(raw, line)?,
            Some(Section::Columns) => bld.columns_line(raw, line)?,
            Some(Section::Rhs) => bld.rhs_line(raw, line)?,
            Some(Section::Ranges) => bld.ranges_line(raw, line)?,
            Some(Section::Bounds) => bld.bounds_line(raw, line)?,
            Some(Section::Endata) => unreachable!(),
        }
    }
    bld.finish()
}

/// Reads an MPS file; `.gz` files are decompressed transparently.
pub fn read_problem(path: impl AsRef<Path>, format: MpsFormat) -> Result<LpProblem, MpsError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz")) {
        flate2::read::GzDecoder::new(file).read_to_end(&mut bytes)?;
    } else {
        std::io::BufReader::new(file).read_to_end(&mut bytes)?;
    }
    let text = String::from_utf8(bytes).map_err(|_| MpsError::Encoding)?;
    parse_mps(&text, format)
}

/// Writes a problem as free-format MPS. Rows are named `e{i}` / `g{i}` and
/// columns `x{j}`; `parse_mps` on the output reproduces the problem exactly.
pub fn write_mps(problem: &LpProblem, name: &str) -> String {
    let mut s = String::new();
    let f = |v: f64| format!("{v:?}");
    let _ = writeln!(s, "NAME {name}");
    let maximize = problem.sense() == ObjSense::Maximize;
    if maximize {
        let _ = writeln!(s, "OBJSENSE\n    MAX");
    }
    s.push_str("ROWS\n N  obj\n");
    for i in 0..problem.m1() {
        let _ = writeln!(s, " E  e{i}");
    }
    for i in 0..problem.m2() {
        let _ = writeln!(s, " G  g{i}");
    }
    s.push_str("COLUMNS\n");
    let sign = if maximize { -1.0 } else { 1.0 };
    for j in 0..problem.n() {
        let cj = sign * problem.c()[j];
        let (a_rows, a_vals) = problem.a().col(j);
        let (g_rows, g_vals) = problem.g().col(j);
        if cj != 0.0 || (a_rows.is_empty() && g_rows.is_empty()) {
            let _ = writeln!(s, "    x{j}  obj  {}", f(cj));
        }
        for (i, v) in a_rows.iter().zip(a_vals) {
            let _ = writeln!(s, "    x{j}  e{i}  {}", f(*v));
        }
        for (i, v) in g_rows.iter().zip(g_vals) {
            let _ = writeln!(s, "    x{j}  g{i}  {}", f(*v));
        }
    }
    s.push_str("RHS\n");
    let obj_rhs = if maximize { problem.objective_offset() } else { -problem.objective_offset() };
    if obj_rhs != 0.0 {
        let _ = writeln!(s, "    RHS  obj  {}", f(obj_rhs));
    }
    for (i, v) in problem.b().iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(s, "    RHS  e{i}  {}", f(*v));
    }
    for (i, v) in problem.h().iter().enumerate().filter(|(_, v)| **v != 0.0) {
        let _ = writeln!(s, "    RHS  g{i}  {}", f(*v));
    }
    s.push_str("BOUNDS\n");
    for j in 0..problem.n() {
        let (lo, hi) = (problem.lower()[j], problem.upper()[j]);
        if lo == 0.0 && hi == f64::INFINITY {
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(s, " FR BND  x{j}");
        } else if lo == hi {
            let _ = writeln!(s, " FX BND  x{j}  {}", f(lo));
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(s, " MI BND  x{j}");
            } else if lo != 0.0 {
                let _ = writeln!(s, " LO BND  x{j}  {}", f(lo));
            }
            if hi.is_finite() {
                let _ = writeln!(s, " UP BND  x{j}  {}", f(hi));
            }
        }
    }
    s.push_str("ENDATA\n");
    s
}
