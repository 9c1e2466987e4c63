//! CPLEX LP text format export/import for debugging. Variable and row names
//! use only letters, digits, dots, parentheses and underscores, so they pass
//! through unchanged.

use super::{ModelHandle, ObjSense, RowSense, VarKind, Variable};

#[derive(Debug, thiserror::Error)]
#[error("LP parse error at line {line}: {detail}")]
pub struct LpParseError {
    pub line: usize,
    pub detail: String,
}

fn fmt_coef(first: bool, w: f64, name: &str, out: &mut String) {
    if first {
        if w < 0.0 {
            out.push_str("- ");
        }
    } else if w < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let a = w.abs();
    if (a - 1.0).abs() < f64::EPSILON {
        out.push_str(name);
    } else {
        out.push_str(&format!("{a} {name}"));
    }
}

/// Serializes a model to LP text. Every variable appears in the Bounds
/// section so the import can reconstruct the exact bound set.
pub fn write_lp(model: &ModelHandle) -> String {
    let mut out = String::new();
    out.push_str(&format!("\\ model: {}\n", model.name));
    out.push_str(match model.sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    out.push_str(" obj:");
    let mut first = true;
    for v in &model.vars {
        if v.obj != 0.0 {
            out.push(' ');
            fmt_coef(first, v.obj, &v.name, &mut out);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 dummy_zero");
    }
    out.push('\n');
    out.push_str("Subject To\n");
    for c in &model.cons {
        out.push_str(&format!(" {}:", c.name));
        let mut first = true;
        for &(i, w) in &c.terms {
            if w == 0.0 {
                continue;
            }
            out.push(' ');
            fmt_coef(first, w, &model.vars[i].name, &mut out);
            first = false;
        }
        if first {
            out.push_str(" 0 dummy_zero");
        }
        let op = match c.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        out.push_str(&format!(" {} {}\n", op, c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            out.push_str(&format!(" {} free\n", v.name));
        } else if v.lb == f64::NEG_INFINITY {
            out.push_str(&format!(" -inf <= {} <= {}\n", v.name, v.ub));
        } else if v.ub == f64::INFINITY {
            out.push_str(&format!(" {} >= {}\n", v.name, v.lb));
        } else {
            out.push_str(&format!(" {} <= {} <= {}\n", v.lb, v.name, v.ub));
        }
    }
    let binaries: Vec<&Variable> = model
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for v in binaries {
            out.push_str(&format!(" {}\n", v.name));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(PartialEq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Done,
}

/// Parses the subset of the LP format produced by [`write_lp`].
pub fn read_lp(text: &str) -> Result<ModelHandle, LpParseError> {
    let mut model = ModelHandle::new("imported");
    let mut section = None;
    let mut var_of: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let err = |line: usize, detail: &str| LpParseError {
        line,
        detail: detail.to_string(),
    };

    // objective / constraint bodies may wrap across lines; gather then parse
    let mut pending = String::new();
    let mut pending_line = 0;

    fn parse_terms(
        body: &str,
        model: &mut ModelHandle,
        var_of: &mut std::collections::HashMap<String, usize>,
    ) -> Result<Vec<(usize, f64)>, String> {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        let toks: Vec<&str> = body.split_whitespace().collect();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        for tok in toks {
            match tok {
                "+" => {
                    sign = 1.0;
                }
                "-" => {
                    sign = -sign;
                }
                _ => {
                    if let Ok(num) = tok.parse::<f64>() {
                        coef = Some(coef.unwrap_or(1.0) * num);
                    } else {
                        let name = tok.to_string();
                        if name == "dummy_zero" {
                            sign = 1.0;
                            coef = None;
                            continue;
                        }
                        let idx = *var_of.entry(name.clone()).or_insert_with(|| {
                            model.add_var(name, VarKind::Continuous, 0.0, f64::INFINITY, 0.0)
                        });
                        terms.push((idx, sign * coef.unwrap_or(1.0)));
                        sign = 1.0;
                        coef = None;
                    }
                }
            }
        }
        Ok(terms)
    }

    fn flush(
        pending: &mut String,
        pending_line: usize,
        section: &Section,
        model: &mut ModelHandle,
        var_of: &mut std::collections::HashMap<String, usize>,
    ) -> Result<(), LpParseError> {
        if pending.trim().is_empty() {
            return Ok(());
        }
        let body = std::mem::take(pending);
        let mk_err = |detail: String| LpParseError {
            line: pending_line,
            detail,
        };
        let (label, rest) = match body.split_once(':') {
            Some((l, r)) => (l.trim().to_string(), r.to_string()),
            None => (String::new(), body.clone()),
        };
        match section {
            Section::Objective => {
                let terms = parse_terms(&rest, model, var_of).map_err(mk_err)?;
                for (idx, w) in terms {
                    model.vars[idx].obj += w;
                }
            }
            Section::Constraints => {
                let (lhs, op, rhs) = if let Some(p) = rest.find("<=") {
                    (&rest[..p], RowSense::Le, &rest[p + 2..])
                } else if let Some(p) = rest.find(">=") {
                    (&rest[..p], RowSense::Ge, &rest[p + 2..])
                } else if let Some(p) = rest.find('=') {
                    (&rest[..p], RowSense::Eq, &rest[p + 1..])
                } else {
                    return Err(mk_err("constraint without relational operator".into()));
                };
                let rhs: f64 = rhs
                    .trim()
                    .parse()
                    .map_err(|_| mk_err(format!("bad rhs `{}`", rhs.trim())))?;
                let terms = parse_terms(lhs, model, var_of).map_err(mk_err)?;
                model.add_con(label, terms, op, rhs);
            }
            _ => {}
        }
        Ok(())
    }

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        let lower = line.to_lowercase();
        let new_section = match lower.as_str() {
            "minimize" | "maximize" => {
                model.sense = if lower == "minimize" {
                    ObjSense::Minimize
                } else {
                    ObjSense::Maximize
                };
                Some(Section::Objective)
            }
            "subject to" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" => Some(Section::Binaries),
            "end" => Some(Section::Done),
            _ => None,
        };
        if let Some(s) = new_section {
            if let Some(prev) = &section {
                flush(&mut pending, pending_line, prev, &mut model, &mut var_of)?;
            }
            section = Some(s);
            continue;
        }
        match section
            .as_ref()
            .ok_or_else(|| err(lineno, "content before any section header"))?
        {
            Section::Objective | Section::Constraints => {
                // a new labelled row starts a new statement
                if line.contains(':') {
                    let sec = section.as_ref().unwrap();
                    flush(&mut pending, pending_line, sec, &mut model, &mut var_of)?;
                    pending_line = lineno;
                }
                pending.push(' ');
                pending.push_str(line);
            }
            Section::Bounds => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let get = |name: &str| -> Option<usize> { var_of.get(name).copied() };
                match toks.as_slice() {
                    [name, "free"] => {
                        let i = get(name).ok_or_else(|| err(lineno, "unknown variable"))?;
                        model.vars[i].lb = f64::NEG_INFINITY;
                        model.vars[i].ub = f64::INFINITY;
                    }
                    [lo, "<=", name, "<=", hi] => {
                        let i = get(name).ok_or_else(|| err(lineno, "unknown variable"))?;
                        model.vars[i].lb = if *lo == "-inf" {
                            f64::NEG_INFINITY
                        } else {
                            lo.parse().map_err(|_| err(lineno, "bad lower bound"))?
                        };
                        model.vars[i].ub = hi.parse().map_err(|_| err(lineno, "bad upper bound"))?;
                    }
                    [name, ">=", lo] => {
                        let i = get(name).ok_or_else(|| err(lineno, "unknown variable"))?;
                        model.vars[i].lb = lo.parse().map_err(|_| err(lineno, "bad lower bound"))?;
                        model.vars[i].ub = f64::INFINITY;
                    }
                    _ => return Err(err(lineno, "unrecognised bounds line")),
                }
            }
            Section::Binaries => {
                let i = var_of
                    .get(line)
                    .copied()
                    .ok_or_else(|| err(lineno, "unknown binary variable"))?;
                model.vars[i].kind = VarKind::Binary;
                model.vars[i].lb = model.vars[i].lb.max(0.0);
                model.vars[i].ub = model.vars[i].ub.min(1.0);
            }
            Section::Done => {}
        }
    }
    if let Some(prev) = &section {
        flush(&mut pending, pending_line, prev, &mut model, &mut var_of)?;
    }
    Ok(model)
}
