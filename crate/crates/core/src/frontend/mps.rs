//! MPS reader and writer with an AUX file assigning the second level.
//!
//! Lines are split on whitespace, which covers free MPS and fixed MPS files
//! whose names contain no blanks. Supported sections: NAME, OBJSENSE, ROWS,
//! COLUMNS (with integer markers), RHS, RANGES, BOUNDS, ENDATA.
//!
//! AUX lines, one keyword each:
//!
//! | keyword | meaning |
//! |---|---|
//! | `N k` | number of second-level columns |
//! | `M k` | number of second-level rows |
//! | `LC j` | column `j` belongs to the second level |
//! | `LR i` | constraint row `i` (objective rows not counted) belongs to the second level |
//! | `LO v` | second-level objective coefficient, in `LC` order |
//! | `OS s` | second-level sense, `1` minimize, `-1` maximize |
//!
//! Indices are zero-based unless [`AuxOptions::one_based`] is set.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{read_file, FrontendError};
use crate::model::{canonicalize, Level, MiblpInstance, RawInstance, RawRow, RawVar, Sense};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuxOptions {
    pub one_based: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    name: String,
    integer: bool,
    lower: f64,
    upper: f64,
    entries: Vec<(usize, f64)>,
    objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    name: String,
    sense: Sense,
    rhs: f64,
    range: Option<f64>,
}

/// Single-level data read from an MPS file.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsModel {
    name: String,
    maximize: bool,
    rows: Vec<Row>,
    columns: Vec<Column>,
}

/// Level assignment read from an AUX file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuxData {
    pub columns: Vec<usize>,
    pub rows: Vec<usize>,
    pub objective: Vec<f64>,
    pub maximize: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

fn number(tok: &str, line: usize) -> Result<f64, FrontendError> {
    tok.parse::<f64>().map_err(|_| FrontendError::Mps {
        line,
        message: format!("expected a number, found `{tok}`"),
    })
}

fn mps_err(line: usize, message: impl Into<String>) -> FrontendError {
    FrontendError::Mps {
        line,
        message: message.into(),
    }
}

pub fn parse_mps_str(text: &str) -> Result<MpsModel, FrontendError> {
    let mut model = MpsModel {
        name: String::new(),
        maximize: false,
        rows: Vec::new(),
        columns: Vec::new(),
    };
    let mut objective_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut integer_block = false;
    let mut section = Section::None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if header {
            section = match toks[0].to_ascii_uppercase().as_str() {
                "NAME" => {
                    model.name = toks.get(1).map(|s| s.to_string()).unwrap_or_default();
                    Section::None
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        model.maximize = s.to_ascii_uppercase().starts_with("MAX");
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                other => return Err(mps_err(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(mps_err(line, "data outside a section")),
            Section::ObjSense => model.maximize = toks[0].to_ascii_uppercase().starts_with("MAX"),
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(mps_err(line, "ROWS entries need a type and a name"));
                }
                let sense = match toks[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if objective_row.is_none() {
                            objective_row = Some(toks[1].to_string());
                        }
                        continue;
                    }
                    "G" => Sense::Ge,
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    t => return Err(mps_err(line, format!("unknown row type `{t}`"))),
                };
                row_index.insert(toks[1].to_string(), model.rows.len());
                model.rows.push(Row {
                    name: toks[1].to_string(),
                    sense,
                    rhs: 0.0,
                    range: None,
                });
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
                    match toks[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                        "INTORG" => integer_block = true,
                        "INTEND" => integer_block = false,
                        m => return Err(mps_err(line, format!("unknown marker `{m}`"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(mps_err(line, "COLUMNS entries need one or two row/value pairs"));
                }
                let j = *col_index.entry(toks[0].to_string()).or_insert_with(|| {
                    model.columns.push(Column {
                        name: toks[0].to_string(),
                        integer: integer_block,
                        lower: 0.0,
                        upper: f64::INFINITY,
                        entries: Vec::new(),
                        objective: 0.0,
                    });
                    model.columns.len() - 1
                });
                for pair in toks[1..].chunks(2) {
                    let value = number(pair[1], line)?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        model.columns[j].objective += value;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        model.columns[j].entries.push((i, value));
                    } else {
                        return Err(mps_err(line, format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in pairs.chunks(2) {
                    let value = number(pair[1], line)?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        log::warn!("ignoring objective constant on line {line}");
                        continue;
                    }
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| mps_err(line, format!("unknown row `{}`", pair[0])))?;
                    if section == Section::Rhs {
                        model.rows[i].rhs = value;
                    } else {
                        model.rows[i].range = Some(value);
                    }
                }
            }
            Section::Bounds => {
                let kind = toks[0].to_ascii_uppercase();
                let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
                let col_pos = match (needs_value, toks.len()) {
                    (true, 4) | (false, 3) | (false, 4) => 2,
                    (true, 3) | (false, 2) => 1,
                    _ => return Err(mps_err(line, "malformed BOUNDS entry")),
                };
                let &j = col_index
                    .get(toks[col_pos])
                    .ok_or_else(|| mps_err(line, format!("unknown column `{}`", toks[col_pos])))?;
                let value = toks.get(col_pos + 1).map(|t| number(t, line)).transpose()?;
                let col = &mut model.columns[j];
                match (kind.as_str(), value) {
                    ("UP", Some(v)) => col.upper = v,
                    ("LO", Some(v)) => col.lower = v,
                    ("FX", Some(v)) => {
                        col.lower = v;
                        col.upper = v;
                    }
                    ("LI", Some(v)) => {
                        col.lower = v;
                        col.integer = true;
                    }
                    ("UI", Some(v)) => {
                        col.upper = v;
                        col.integer = true;
                    }
                    ("FR", _) => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                    }
                    ("MI", _) => col.lower = f64::NEG_INFINITY,
                    ("PL", _) => col.upper = f64::INFINITY,
                    ("BV", _) => {
                        col.lower = 0.0;
                        col.upper = 1.0;
                        col.integer = true;
                    }
                    (k, _) => return Err(mps_err(line, format!("unsupported bound type `{k}`"))),
                }
            }
        }
    }
    Ok(model)
}

fn aux_err(line: usize, message: impl Into<String>) -> FrontendError {
    FrontendError::Aux {
        line,
        message: message.into(),
    }
}

pub fn parse_aux_str(text: &str, options: &AuxOptions) -> Result<AuxData, FrontendError> {
    let mut aux = AuxData::default();
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut sense: Option<f64> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(aux_err(line, "expected `KEY value`"));
        }
        let index = |tok: &str| -> Result<usize, FrontendError> {
            let v: i64 = tok.parse().map_err(|_| aux_err(line, format!("bad index `{tok}`")))?;
            let v = if options.one_based { v - 1 } else { v };
            usize::try_from(v).map_err(|_| aux_err(line, format!("negative index `{tok}`")))
        };
        match toks[0].to_ascii_uppercase().as_str() {
            "N" => n = Some(toks[1].parse().map_err(|_| aux_err(line, "bad count"))?),
            "M" => m = Some(toks[1].parse().map_err(|_| aux_err(line, "bad count"))?),
            "LC" => aux.columns.push(index(toks[1])?),
            "LR" => aux.rows.push(index(toks[1])?),
            "LO" => aux
                .objective
                .push(toks[1].parse().map_err(|_| aux_err(line, "bad coefficient"))?),
            "OS" => {
                let s: f64 = toks[1].parse().map_err(|_| aux_err(line, "bad sense"))?;
                if s != 1.0 && s != -1.0 {
                    return Err(aux_err(line, "sense must be 1 or -1"));
                }
                sense = Some(s);
            }
            other => return Err(aux_err(line, format!("unknown keyword `{other}`"))),
        }
    }
    if n.is_some_and(|n| n != aux.columns.len()) {
        return Err(aux_err(0, format!("N is {} but {} LC lines given", n.unwrap_or(0), aux.columns.len())));
    }
    if m.is_some_and(|m| m != aux.rows.len()) {
        return Err(aux_err(0, format!("M is {} but {} LR lines given", m.unwrap_or(0), aux.rows.len())));
    }
    if aux.objective.len() != aux.columns.len() {
        return Err(aux_err(0, "one LO line is required per LC line"));
    }
    match sense {
        Some(s) => aux.maximize = s < 0.0,
        None => log::warn!("AUX file has no OS line; assuming minimization"),
    }
    Ok(aux)
}

/// Combines single-level data and a level assignment into a raw instance.
pub fn assemble(model: &MpsModel, aux: &AuxData) -> Result<RawInstance, FrontendError> {
    let ncols = model.columns.len();
    let nrows = model.rows.len();
    if let Some(&j) = aux.columns.iter().find(|&&j| j >= ncols) {
        return Err(aux_err(0, format!("LC index {j} out of range for {ncols} columns")));
    }
    if let Some(&i) = aux.rows.iter().find(|&&i| i >= nrows) {
        return Err(aux_err(0, format!("LR index {i} out of range for {nrows} rows")));
    }
    let mut y_pos: Vec<Option<usize>> = vec![None; ncols];
    for (k, &j) in aux.columns.iter().enumerate() {
        if y_pos[j].replace(k).is_some() {
            return Err(aux_err(0, format!("column {j} listed twice")));
        }
    }
    let x_cols: Vec<usize> = (0..ncols).filter(|&j| y_pos[j].is_none()).collect();
    let mut x_pos = vec![usize::MAX; ncols];
    for (k, &j) in x_cols.iter().enumerate() {
        x_pos[j] = k;
    }
    let follower_rows: Vec<bool> = (0..nrows).map(|i| aux.rows.contains(&i)).collect();
    let var = |c: &Column| RawVar {
        name: c.name.clone(),
        integer: c.integer,
        lower: c.lower,
        upper: c.upper,
    };
    let n1 = x_cols.len();
    let n2 = aux.columns.len();
    let mut dense = vec![(vec![0.0; n1], vec![0.0; n2]); nrows];
    for (j, col) in model.columns.iter().enumerate() {
        for &(i, v) in &col.entries {
            match y_pos[j] {
                Some(k) => dense[i].1[k] += v,
                None => dense[i].0[x_pos[j]] += v,
            }
        }
    }
    let mut rows = Vec::new();
    for (i, row) in model.rows.iter().enumerate() {
        let level = if follower_rows[i] { Level::Follower } else { Level::Leader };
        let (coef_x, coef_y) = dense[i].clone();
        let push = |rows: &mut Vec<RawRow>, sense: Sense, rhs: f64| {
            rows.push(RawRow {
                level,
                coef_x: coef_x.clone(),
                coef_y: coef_y.clone(),
                sense,
                rhs,
            })
        };
        match (row.sense, row.range) {
            (s, None) => push(&mut rows, s, row.rhs),
            (Sense::Le, Some(r)) => {
                push(&mut rows, Sense::Ge, row.rhs - r.abs());
                push(&mut rows, Sense::Le, row.rhs);
            }
            (Sense::Ge, Some(r)) => {
                push(&mut rows, Sense::Ge, row.rhs);
                push(&mut rows, Sense::Le, row.rhs + r.abs());
            }
            (Sense::Eq, Some(r)) => {
                let (lo, hi) = if r >= 0.0 { (row.rhs, row.rhs + r) } else { (row.rhs + r, row.rhs) };
                push(&mut rows, Sense::Ge, lo);
                push(&mut rows, Sense::Le, hi);
            }
        }
    }
    let y_cols = &aux.columns;
    Ok(RawInstance {
        name: model.name.clone(),
        x_vars: x_cols.iter().map(|&j| var(&model.columns[j])).collect(),
        y_vars: y_cols.iter().map(|&j| var(&model.columns[j])).collect(),
        c: x_cols.iter().map(|&j| model.columns[j].objective).collect(),
        d1: y_cols.iter().map(|&j| model.columns[j].objective).collect(),
        d2: aux.objective.clone(),
        leader_maximize: model.maximize,
        follower_maximize: aux.maximize,
        rows,
        interdiction: None,
    })
}

pub fn from_mps_aux_str(mps: &str, aux: &str, options: &AuxOptions) -> Result<MiblpInstance, FrontendError> {
    let model = parse_mps_str(mps)?;
    let aux = parse_aux_str(aux, options)?;
    Ok(canonicalize(&assemble(&model, &aux)?)?)
}

pub fn parse_mps_aux(mps_path: &Path, aux_path: &Path, options: &AuxOptions) -> Result<MiblpInstance, FrontendError> {
    from_mps_aux_str(&read_file(mps_path)?, &read_file(aux_path)?, options)
}

/// Free-format MPS and zero-based AUX text for a canonical instance.
///
/// Interdiction metadata has no MPS representation and is not written.
pub fn to_mps_aux_strings(inst: &MiblpInstance) -> (String, String) {
    let name = if inst.name.is_empty() { "MIBLP" } else { inst.name.as_str() };
    let mut mps = format!("NAME {name}\nROWS\n N OBJ\n");
    let (m1, m2) = (inst.m1(), inst.m2());
    let row_name = |i: usize| if i < m1 { format!("L{i}") } else { format!("F{}", i - m1) };
    for i in 0..m1 + m2 {
        let _ = writeln!(mps, " G {}", row_name(i));
    }
    mps.push_str("COLUMNS\n");
    let mut in_integer = false;
    let columns: Vec<(String, bool, f64, Vec<f64>)> = (0..inst.n1)
        .map(|j| {
            let col = inst.a1.iter().chain(&inst.a2).map(|r| r[j]).collect();
            (inst.x_name(j), j < inst.r1, inst.c[j], col)
        })
        .chain((0..inst.n2).map(|j| {
            let col = inst.g1.iter().chain(&inst.g2).map(|r| r[j]).collect();
            (inst.y_name(j), j < inst.r2, inst.d1[j], col)
        }))
        .collect();
    for (k, (cname, integer, obj, col)) in columns.iter().enumerate() {
        if *integer != in_integer {
            let marker = if *integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(mps, " M{k} 'MARKER' '{marker}'");
            in_integer = *integer;
        }
        let _ = writeln!(mps, " {cname} OBJ {obj:?}");
        for (i, v) in col.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(mps, " {cname} {} {v:?}", row_name(i));
            }
        }
    }
    if in_integer {
        let _ = writeln!(mps, " MEND 'MARKER' 'INTEND'");
    }
    mps.push_str("RHS\n");
    for (i, b) in inst.b1.iter().chain(&inst.b2).enumerate() {
        if *b != 0.0 {
            let _ = writeln!(mps, " RHS {} {b:?}", row_name(i));
        }
    }
    mps.push_str("BOUNDS\n");
    let bounds = inst.lx.iter().zip(&inst.ux).chain(inst.ly.iter().zip(&inst.uy));
    for ((cname, ..), (lo, up)) in columns.iter().zip(bounds) {
        let _ = writeln!(mps, " LO BND {cname} {lo:?}");
        let _ = writeln!(mps, " UP BND {cname} {up:?}");
    }
    mps.push_str("ENDATA\n");

    let mut aux = format!("N {}\nM {}\n", inst.n2, m2);
    for j in 0..inst.n2 {
        let _ = writeln!(aux, "LC {}", inst.n1 + j);
    }
    for i in 0..m2 {
        let _ = writeln!(aux, "LR {}", m1 + i);
    }
    for v in &inst.d2 {
        let _ = writeln!(aux, "LO {v:?}");
    }
    aux.push_str("OS 1\n");
    (mps, aux)
}

pub fn write_mps_aux(inst: &MiblpInstance, mps_path: &Path, aux_path: &Path) -> Result<(), FrontendError> {
    let (mps, aux) = to_mps_aux_strings(inst);
    super::write_file(mps_path, &mps)?;
    super::write_file(aux_path, &aux)
}
