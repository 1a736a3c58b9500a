//! CPLEX LP text format.
//!
//! Every variable gets a line in `Bounds`, in declaration order, so that
//! parsing an exported file recovers the variable order exactly.

use std::fmt::Write as _;

use super::{Constraint, MilpError, MilpModel, Sense, VarId, VarKind};

const LINE_WIDTH: usize = 100;

/// Number with at most 12 significant digits, shortest form.
pub(crate) fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn write_terms(out: &mut String, head: &str, terms: &[(VarId, f64)], m: &MilpModel, tail: &str) {
    let mut line = head.to_string();
    for (i, &(j, a)) in terms.iter().enumerate() {
        let name = &m.variables[j].name;
        let mag = a.abs();
        let coef = if mag == 1.0 { String::new() } else { format!("{} ", fmt_num(mag)) };
        let piece = match (i, a < 0.0) {
            (0, false) => format!("{coef}{name}"),
            (0, true) => format!("- {coef}{name}"),
            (_, false) => format!(" + {coef}{name}"),
            (_, true) => format!(" - {coef}{name}"),
        };
        if line.len() + piece.len() > LINE_WIDTH && i > 0 {
            out.push_str(&line);
            out.push('\n');
            line = "  ".to_string();
            line.push_str(piece.trim_start());
        } else {
            line.push_str(&piece);
        }
    }
    if terms.is_empty() {
        line.push_str("0 ");
        line.push_str(&m.variables[0].name);
    }
    if line.len() + tail.len() > LINE_WIDTH {
        out.push_str(&line);
        out.push('\n');
        line = "  ".to_string();
        line.push_str(tail.trim_start());
    } else {
        line.push_str(tail);
    }
    out.push_str(&line);
    out.push('\n');
}

pub fn export_lp(m: &MilpModel) -> String {
    let mut out = String::from("\\ uavplan MILP model\nMaximize\n");
    write_terms(&mut out, " obj: ", &m.objective, m, "");
    out.push_str("Subject To\n");
    for c in &m.constraints {
        let tail = format!(" {} {}", c.sense.as_str(), fmt_num(c.rhs));
        write_terms(&mut out, &format!(" {}: ", c.name), &c.terms, m, &tail);
    }
    out.push_str("Bounds\n");
    for v in &m.variables {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, fmt_num(v.lower));
        } else if v.upper.is_infinite() {
            let _ = writeln!(out, " {} >= {}", v.name, fmt_num(v.lower));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
        }
    }
    out.push_str("Binary\n");
    for v in m.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Colon,
    Plus,
    Minus,
    Rel(Sense),
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, MilpError> {
    let err = |message: String| MilpError::Parse { line, message };
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            ':' => {
                out.push(Tok::Colon);
                i += 1;
            }
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                while j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                    j += 1;
                }
                let op: String = chars[i..j].iter().collect();
                let sense = match op.as_str() {
                    "<=" | "=<" | "<" => Sense::Le,
                    ">=" | "=>" | ">" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => return Err(err(format!("bad operator `{op}`"))),
                };
                out.push(Tok::Rel(sense));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_digit()
                        || chars[j] == '.'
                        || matches!(chars[j], 'e' | 'E')
                        || (matches!(chars[j], '+' | '-') && matches!(chars[j - 1], 'e' | 'E')))
                {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let v = s.parse().map_err(|_| err(format!("bad number `{s}`")))?;
                out.push(Tok::Num(v));
                i = j;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || matches!(chars[j], '_' | '.' | '(' | ')' | ','))
                {
                    j += 1;
                }
                let w: String = chars[i..j].iter().collect();
                let lw = w.to_ascii_lowercase();
                if lw == "inf" || lw == "infinity" {
                    out.push(Tok::Num(f64::INFINITY));
                } else {
                    out.push(Tok::Word(w));
                }
                i = j;
            }
            _ => return Err(err(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

/// A linear expression statement: optional label, terms, optional
/// relation and right-hand side.
struct Statement {
    label: Option<String>,
    terms: Vec<(String, f64)>,
    relation: Option<(Sense, f64)>,
}

fn parse_statement(toks: &[Tok], line: usize) -> Result<Statement, MilpError> {
    let err = |message: &str| MilpError::Parse { line, message: message.to_string() };
    let mut i = 0;
    let mut label = None;
    if let (Some(Tok::Word(w)), Some(Tok::Colon)) = (toks.first(), toks.get(1)) {
        label = Some(w.clone());
        i = 2;
    }
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while i < toks.len() {
        match &toks[i] {
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => coef = Some(coef.unwrap_or(1.0) * v),
            Tok::Word(w) => {
                terms.push((w.clone(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Rel(sense) => {
                let mut rest_sign = 1.0;
                let mut j = i + 1;
                while let Some(Tok::Minus | Tok::Plus) = toks.get(j) {
                    if toks[j] == Tok::Minus {
                        rest_sign = -rest_sign;
                    }
                    j += 1;
                }
                let Some(Tok::Num(v)) = toks.get(j) else { return Err(err("missing right-hand side")) };
                if j + 1 != toks.len() {
                    return Err(err("trailing tokens after right-hand side"));
                }
                if coef.is_some() {
                    // `0 x` style empty rows carry a dangling coefficient only
                    // when followed by a name; a bare number here is an error.
                    return Err(err("dangling coefficient"));
                }
                return Ok(Statement { label, terms, relation: Some((*sense, rest_sign * v)) });
            }
            Tok::Colon => return Err(err("unexpected `:`")),
        }
        i += 1;
    }
    if coef.is_some() {
        return Err(err("dangling coefficient"));
    }
    Ok(Statement { label, terms, relation: None })
}

/// Parse LP text written by [`export_lp`] (a subset of the CPLEX LP
/// format: no ranges, general integers or semi-continuous sections).
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    let mut section = Section::Preamble;
    let mut objective: Option<(Vec<(String, f64)>, usize)> = None;
    let mut rows: Vec<(String, Vec<(String, f64)>, Sense, f64)> = Vec::new();
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut pending: Vec<Tok> = Vec::new();
    let mut pending_line = 0;

    let lines: Vec<&str> = text.lines().collect();
    for (n, raw) in lines.iter().enumerate() {
        let line_no = n + 1;
        let body = raw.split('\\').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_of(body) {
            if !pending.is_empty() {
                return Err(MilpError::Parse { line: pending_line, message: "unterminated statement".into() });
            }
            section = next;
            continue;
        }
        let continuation = body.starts_with("  ");
        match section {
            Section::Preamble | Section::End => {
                return Err(MilpError::Parse { line: line_no, message: "text outside a section".into() })
            }
            Section::Objective => {
                let st = parse_statement(&tokenize(body, line_no)?, line_no)?;
                match (&mut objective, continuation) {
                    (Some((terms, _)), true) => terms.extend(st.terms),
                    (None, false) => objective = Some((st.terms, line_no)),
                    _ => return Err(MilpError::Parse { line: line_no, message: "second objective".into() }),
                }
            }
            Section::Constraints => {
                if pending.is_empty() {
                    pending_line = line_no;
                }
                pending.extend(tokenize(body, line_no)?);
                if pending.iter().any(|t| matches!(t, Tok::Rel(_))) {
                    let st = parse_statement(&pending, pending_line)?;
                    let (sense, rhs) = st.relation.expect("relation present");
                    let name = st.label.unwrap_or_else(|| format!("r{}", rows.len()));
                    rows.push((name, st.terms, sense, rhs));
                    pending.clear();
                }
            }
            Section::Bounds => {
                let toks = tokenize(body, line_no)?;
                let err = |m: &str| MilpError::Parse { line: line_no, message: m.to_string() };
                let signed = |toks: &[Tok], at: usize| -> Option<(f64, usize)> {
                    match (toks.get(at), toks.get(at + 1)) {
                        (Some(Tok::Minus), Some(Tok::Num(v))) => Some((-v, at + 2)),
                        (Some(Tok::Plus), Some(Tok::Num(v))) => Some((*v, at + 2)),
                        (Some(Tok::Num(v)), _) => Some((*v, at + 1)),
                        _ => None,
                    }
                };
                if let Some((lo, at)) = signed(&toks, 0) {
                    // lo <= x <= hi
                    let (Some(Tok::Rel(Sense::Le)), Some(Tok::Word(name)), Some(Tok::Rel(Sense::Le))) =
                        (toks.get(at), toks.get(at + 1), toks.get(at + 2))
                    else {
                        return Err(err("expected `lo <= name <= hi`"));
                    };
                    let (hi, end) = signed(&toks, at + 3).ok_or_else(|| err("missing upper bound"))?;
                    if end != toks.len() {
                        return Err(err("trailing tokens in bound"));
                    }
                    bounds.push((name.clone(), lo, hi));
                } else {
                    let (Some(Tok::Word(name)), Some(Tok::Rel(sense))) = (toks.first(), toks.get(1)) else {
                        return Err(err("malformed bound"));
                    };
                    let (v, end) = signed(&toks, 2).ok_or_else(|| err("missing bound value"))?;
                    if end != toks.len() {
                        return Err(err("trailing tokens in bound"));
                    }
                    let (lo, hi) = match sense {
                        Sense::Eq => (v, v),
                        Sense::Ge => (v, f64::INFINITY),
                        Sense::Le => (0.0, v),
                    };
                    bounds.push((name.clone(), lo, hi));
                }
            }
            Section::Binary => {
                for tok in tokenize(body, line_no)? {
                    match tok {
                        Tok::Word(w) => binaries.push(w),
                        _ => return Err(MilpError::Parse { line: line_no, message: "expected a name".into() }),
                    }
                }
            }
        }
    }
    if section != Section::End {
        return Err(MilpError::Parse { line: lines.len(), message: "missing `End`".into() });
    }

    let mut m = MilpModel::default();
    for (name, lo, hi) in bounds {
        if m.lookup(&name).is_some() {
            return Err(MilpError::Parse { line: 0, message: format!("duplicate bound for `{name}`") });
        }
        m.add_var(name, VarKind::Continuous, lo, hi);
    }
    for name in binaries {
        let id = m.lookup(&name).ok_or(MilpError::UnknownVariable(name))?;
        m.variables[id].kind = VarKind::Binary;
    }
    let resolve = |m: &MilpModel, terms: Vec<(String, f64)>| -> Result<Vec<(VarId, f64)>, MilpError> {
        terms
            .into_iter()
            .map(|(name, a)| m.lookup(&name).map(|j| (j, a)).ok_or(MilpError::UnknownVariable(name)))
            .collect()
    };
    if let Some((terms, _)) = objective {
        m.objective = resolve(&m, terms)?;
    }
    for (name, terms, sense, rhs) in rows {
        let terms = resolve(&m, terms)?;
        m.add_row(name, terms, sense, rhs);
    }
    Ok(m)
}

impl Constraint {
    /// Row text as it appears in an LP file, for diagnostics.
    pub fn describe(&self, m: &MilpModel) -> String {
        let mut out = String::new();
        let tail = format!(" {} {}", self.sense.as_str(), fmt_num(self.rhs));
        write_terms(&mut out, &format!("{}: ", self.name), &self.terms, m, &tail);
        out.trim_end().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(3.125), "3.125");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(212.5), "212.5");
    }

    #[test]
    fn statement_parsing() {
        let toks = tokenize("c1: 2 x - y + 0.5 z <= -3", 1).unwrap();
        let st = parse_statement(&toks, 1).unwrap();
        assert_eq!(st.label.as_deref(), Some("c1"));
        assert_eq!(st.terms, vec![("x".into(), 2.0), ("y".into(), -1.0), ("z".into(), 0.5)]);
        assert_eq!(st.relation, Some((Sense::Le, -3.0)));
    }

    #[test]
    fn small_model_round_trip() {
        let mut m = MilpModel::default();
        let x = m.add_var("x".into(), VarKind::Binary, 0.0, 1.0);
        let y = m.add_var("y".into(), VarKind::Continuous, 0.0, f64::INFINITY);
        let g = m.add_var("Gamma".into(), VarKind::Continuous, 0.0, 0.0);
        m.add_row("a".into(), vec![(x, 1.0), (y, -2.5)], Sense::Ge, -1.0);
        m.add_row("b".into(), vec![(y, 1.0), (g, 1.0)], Sense::Eq, 4.0);
        m.objective = vec![(g, 1.0)];
        let text = export_lp(&m);
        assert!(text.contains("\n obj: Gamma\n"));
        assert_eq!(parse_lp(&text).unwrap(), m);
    }
}
