//! Text format for circuits.
//!
//! ```text
//! # comment
//! qubits 3
//! gate toffoli q0 q1 q2
//! gate ry(pi/6) q2
//! gate custom[[0:0, 1:0], [1:0, 0:0]] q1
//! ```
//!
//! Angles accept `pi`, numeric literals, `*`, `/` and unary minus. Custom
//! matrix entries are `re:im` pairs (or a bare real) in row-major order.

use std::f64::consts::PI;

use super::{Circuit, GateKind, PlacedGate};
use crate::error::{Error, ParseError};
use crate::linalg::{c, CMatrix, C64};

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stmt = raw.split('#').next().unwrap_or("").trim();
        if stmt.is_empty() {
            continue;
        }
        let (keyword, rest) = split_word(stmt);
        match keyword {
            "qubits" => {
                if circuit.is_some() {
                    return Err(ParseError::new(line, "duplicate `qubits` declaration"));
                }
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| ParseError::new(line, format!("invalid qubit count `{}`", rest.trim())))?;
                circuit = Some(Circuit::new(n).map_err(|e| ParseError::new(line, e.to_string()))?);
            }
            "gate" => {
                let c = circuit.as_mut().ok_or_else(|| ParseError::new(line, "`gate` before `qubits` declaration"))?;
                let gate = parse_gate(rest, c.num_qubits()).map_err(|m| ParseError::new(line, m))?;
                c.push(gate).map_err(|e| ParseError::new(line, e.to_string()))?;
            }
            other => return Err(ParseError::new(line, format!("unknown statement `{other}`"))),
        }
    }
    circuit.ok_or_else(|| ParseError::new(text.lines().count().max(1), "missing `qubits` declaration"))
}

fn split_word(s: &str) -> (&str, &str) {
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    }
}

fn parse_gate(rest: &str, n: usize) -> Result<PlacedGate, String> {
    let rest = rest.trim_start();
    let name_end = rest.find(|ch: char| !ch.is_ascii_alphanumeric() && ch != '_').unwrap_or(rest.len());
    let name = rest[..name_end].to_ascii_lowercase();
    if name.is_empty() {
        return Err("missing gate name".into());
    }
    let mut tail = &rest[name_end..];

    let mut param: Option<&str> = None;
    let mut matrix: Option<&str> = None;
    if tail.starts_with('(') {
        let close = tail.find(')').ok_or("unterminated `(`")?;
        param = Some(&tail[1..close]);
        tail = &tail[close + 1..];
    } else if tail.starts_with('[') {
        let close = matching_bracket(tail).ok_or("unterminated `[`")?;
        matrix = Some(&tail[..=close]);
        tail = &tail[close + 1..];
    }

    let angle = |p: Option<&str>| -> Result<f64, String> {
        let p = p.ok_or_else(|| format!("`{name}` needs an angle, e.g. `{name}(pi/4)`"))?;
        eval_expr(p)
    };
    let no_param = |p: Option<&str>| -> Result<(), String> {
        match p {
            Some(_) => Err(format!("`{name}` takes no angle")),
            None => Ok(()),
        }
    };
    if matrix.is_some() && name != "custom" {
        return Err(format!("`{name}` takes no matrix"));
    }

    let kind = match name.as_str() {
        "h" => no_param(param).map(|_| GateKind::H)?,
        "x" => no_param(param).map(|_| GateKind::X)?,
        "y" => no_param(param).map(|_| GateKind::Y)?,
        "z" => no_param(param).map(|_| GateKind::Z)?,
        "phase" => no_param(param).map(|_| GateKind::Phase)?,
        "cnot" => no_param(param).map(|_| GateKind::Cnot)?,
        "toffoli" => no_param(param).map(|_| GateKind::Toffoli)?,
        "ry" => GateKind::Ry(angle(param)?),
        "rz" => GateKind::Rz(angle(param)?),
        "custom" => {
            let m = matrix.ok_or("`custom` needs a matrix, e.g. `custom[[1:0,0:0],[0:0,1:0]]`")?;
            GateKind::custom(parse_matrix(m)?).map_err(|e| match e {
                Error::NotUnitary { deviation } => {
                    format!("custom matrix is not unitary (deviation {deviation:.3e})")
                }
                other => other.to_string(),
            })?
        }
        other => return Err(format!("unknown gate `{other}`")),
    };

    let mut qubits = Vec::new();
    for tok in tail.split_whitespace() {
        let idx = tok
            .strip_prefix('q')
            .or_else(|| tok.strip_prefix('Q'))
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| format!("invalid qubit `{tok}`"))?;
        if idx >= n {
            return Err(format!("qubit q{idx} out of range for {n} qubit(s)"));
        }
        if qubits.contains(&idx) {
            return Err(format!("qubit q{idx} repeated"));
        }
        qubits.push(idx);
    }
    PlacedGate::new(kind, qubits).map_err(|e| match e {
        Error::InvalidGate(m) => m,
        other => other.to_string(),
    })
}

fn matching_bracket(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_matrix(s: &str) -> Result<CMatrix, String> {
    let body = s
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or("matrix must be written as [[...],[...]]")?;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('[').ok_or("expected `[` starting a matrix row")?;
        let close = open.find(']').ok_or("unterminated matrix row")?;
        let row = open[..close].split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
        rest = open[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    CMatrix::from_rows(rows).map_err(|e| e.to_string())
}

fn parse_complex(s: &str) -> Result<C64, String> {
    match s.split_once(':') {
        Some((re, im)) => Ok(c(eval_expr(re)?, eval_expr(im)?)),
        None => Ok(c(eval_expr(s)?, 0.0)),
    }
}

/// Evaluates `factor (('*' | '/') factor)*` with `factor = '-' factor | number | pi`.
pub(crate) fn eval_expr(s: &str) -> Result<f64, String> {
    let tokens = tokenize(s)?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut pos = 0;
    let mut value = factor(&tokens, &mut pos)?;
    while pos < tokens.len() {
        let op = &tokens[pos];
        pos += 1;
        let rhs = factor(&tokens, &mut pos)?;
        value = match op {
            Tok::Mul => value * rhs,
            Tok::Div => value / rhs,
            _ => return Err(format!("unexpected token in `{}`", s.trim())),
        };
    }
    if !value.is_finite() {
        return Err(format!("expression `{}` is not finite", s.trim()));
    }
    Ok(value)
}

#[derive(Debug, PartialEq)]
enum Tok {
    Num(f64),
    Mul,
    Div,
    Neg,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' => i += 1,
            '*' => {
                out.push(Tok::Mul);
                i += 1;
            }
            '/' => {
                out.push(Tok::Div);
                i += 1;
            }
            '-' => {
                out.push(Tok::Neg);
                i += 1;
            }
            'p' | 'P' if chars.get(i + 1).is_some_and(|n| n.eq_ignore_ascii_case(&'i')) => {
                out.push(Tok::Num(PI));
                i += 2;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit.parse::<f64>().map_err(|_| format!("invalid number `{lit}`"))?;
                out.push(Tok::Num(v));
            }
            other => return Err(format!("unexpected character `{other}` in expression")),
        }
    }
    Ok(out)
}

fn factor(tokens: &[Tok], pos: &mut usize) -> Result<f64, String> {
    match tokens.get(*pos) {
        Some(Tok::Neg) => {
            *pos += 1;
            Ok(-factor(tokens, pos)?)
        }
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(*v)
        }
        _ => Err("expected a number or `pi`".into()),
    }
}
