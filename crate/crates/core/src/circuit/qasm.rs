//! OpenQASM 2.0 import/export for the U3/CX subset.
//!
//! Accepted statements: the `OPENQASM 2.0;` header, `include "qelib1.inc";`,
//! one `qreg`, any `creg`, `u3(..)`/`u(..)` on a single qubit, `cx`,
//! `barrier` (ignored) and terminal measurement of the whole register, either
//! as `measure q -> c;` or one `measure q[i] -> c[i];` per qubit. Angle
//! arguments may be expressions over numbers and `pi` with `+ - * /` and
//! parentheses.

use super::{Circuit, Gate};
use crate::error::{Error, Result};

/// Renders an elementary circuit. Angles use 17 significant digits so the
/// text round-trips bit-exactly.
pub fn to_qasm(c: &Circuit) -> Result<String> {
    to_qasm_with_comments(c, &[])
}

/// As [`to_qasm`], with `// ` comment lines placed after the include line.
pub fn to_qasm_with_comments(c: &Circuit, comments: &[String]) -> Result<String> {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for line in comments {
        out.push_str("// ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&format!("qreg q[{0}];\ncreg c[{0}];\n", c.n_qubits));
    for g in &c.gates {
        match g {
            Gate::U3 { theta, phi, lambda, qubit } => {
                out.push_str(&format!("u3({theta:.16e},{phi:.16e},{lambda:.16e}) q[{qubit}];\n"));
            }
            Gate::Cx { control, target } => {
                out.push_str(&format!("cx q[{control}],q[{target}];\n"));
            }
            Gate::Opaque { .. } => return Err(Error::NotElementary),
        }
    }
    if c.measured {
        out.push_str("measure q -> c;\n");
    }
    Ok(out)
}

struct Statement {
    line: usize,
    text: String,
}

fn split_statements(text: &str) -> Result<Vec<Statement>> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("");
        for ch in line.chars() {
            if ch == ';' {
                out.push(Statement { line: start, text: buf.trim().to_string() });
                buf.clear();
            } else {
                if buf.trim().is_empty() && !ch.is_whitespace() {
                    start = i + 1;
                }
                buf.push(ch);
            }
        }
        buf.push(' ');
    }
    if !buf.trim().is_empty() {
        return Err(Error::Parse { line: start, msg: "statement is missing ';'".into() });
    }
    Ok(out)
}

struct Parser {
    qreg: Option<(String, usize)>,
    gates: Vec<Gate>,
    measured: Vec<bool>,
}

pub fn from_qasm(text: &str) -> Result<Circuit> {
    let statements = split_statements(text)?;
    let mut iter = statements.into_iter().filter(|s| !s.text.is_empty());
    match iter.next() {
        Some(s) if s.text.starts_with("OPENQASM") => {
            let version = s.text["OPENQASM".len()..].trim();
            if version != "2.0" {
                return Err(Error::Unsupported { line: s.line, msg: format!("version {version}") });
            }
        }
        Some(s) => {
            return Err(Error::Parse { line: s.line, msg: "expected 'OPENQASM 2.0;' header".into() })
        }
        None => return Err(Error::Parse { line: 0, msg: "empty program".into() }),
    }
    let mut p = Parser { qreg: None, gates: Vec::new(), measured: Vec::new() };
    for s in iter {
        p.statement(&s)?;
    }
    let (_, n) = p.qreg.ok_or(Error::Parse { line: 0, msg: "no qreg declared".into() })?;
    let count = p.measured.iter().filter(|&&m| m).count();
    if count != 0 && count != n {
        return Err(Error::Unsupported { line: 0, msg: "partial measurement".into() });
    }
    let mut c = Circuit::new(n);
    for g in p.gates {
        c.push(g)?;
    }
    c.measured = count == n;
    Ok(c)
}

impl Parser {
    fn statement(&mut self, s: &Statement) -> Result<()> {
        let line = s.line;
        let text = s.text.as_str();
        let word_end = text
            .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
            .unwrap_or(text.len());
        let (word, rest) = text.split_at(word_end);
        let rest = rest.trim();
        match word {
            "include" => {
                if rest != "\"qelib1.inc\"" {
                    return Err(Error::Unsupported { line, msg: format!("include {rest}") });
                }
                Ok(())
            }
            "qreg" => {
                if self.qreg.is_some() {
                    return Err(Error::Unsupported { line, msg: "more than one qreg".into() });
                }
                let (name, n) = parse_indexed(rest, line)?;
                if n == 0 {
                    return Err(Error::Parse { line, msg: "empty qreg".into() });
                }
                self.measured = vec![false; n];
                self.qreg = Some((name, n));
                Ok(())
            }
            "creg" => parse_indexed(rest, line).map(|_| ()),
            "barrier" => Ok(()),
            "u3" | "u" | "U" => {
                let (args, operands) = split_args(rest, line)?;
                if args.len() != 3 {
                    return Err(Error::Parse { line, msg: format!("{word} takes 3 angles") });
                }
                let angles = args
                    .iter()
                    .map(|a| eval_expr(a, line))
                    .collect::<Result<Vec<f64>>>()?;
                let qs = self.operands(operands, 1, line)?;
                self.push(Gate::u3(angles[0], angles[1], angles[2], qs[0]), line)
            }
            "cx" | "CX" => {
                let qs = self.operands(rest, 2, line)?;
                self.push(Gate::cx(qs[0], qs[1]), line)
            }
            "measure" => self.measure(rest, line),
            _ => Err(Error::Unsupported { line, msg: format!("statement '{word}'") }),
        }
    }

    fn push(&mut self, g: Gate, line: usize) -> Result<()> {
        if g.qubits().iter().any(|&q| self.measured[q]) {
            return Err(Error::Unsupported { line, msg: "gate after measurement".into() });
        }
        let qs = g.qubits();
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Parse { line, msg: "repeated qubit operand".into() });
        }
        self.gates.push(g);
        Ok(())
    }

    fn register(&self, line: usize) -> Result<&(String, usize)> {
        self.qreg
            .as_ref()
            .ok_or(Error::Parse { line, msg: "gate before qreg declaration".into() })
    }

    fn qubit(&self, operand: &str, line: usize) -> Result<usize> {
        let (name, n) = self.register(line)?;
        let (got, idx) = parse_indexed(operand, line)?;
        if &got != name {
            return Err(Error::Parse { line, msg: format!("unknown register '{got}'") });
        }
        if idx >= *n {
            return Err(Error::Parse { line, msg: format!("qubit index {idx} out of range") });
        }
        Ok(idx)
    }

    fn operands(&self, text: &str, expected: usize, line: usize) -> Result<Vec<usize>> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != expected {
            return Err(Error::Parse { line, msg: format!("expected {expected} operand(s)") });
        }
        parts.iter().map(|p| self.qubit(p, line)).collect()
    }

    fn measure(&mut self, rest: &str, line: usize) -> Result<()> {
        let (src, _dst) = rest
            .split_once("->")
            .ok_or(Error::Parse { line, msg: "measure needs '->'".into() })?;
        let src = src.trim();
        let (name, n) = self.register(line)?.clone();
        if src == name {
            self.measured = vec![true; n];
        } else {
            let q = self.qubit(src, line)?;
            self.measured[q] = true;
        }
        Ok(())
    }
}

fn parse_indexed(text: &str, line: usize) -> Result<(String, usize)> {
    let malformed = || Error::Parse { line, msg: format!("expected name[index], got '{text}'") };
    let open = text.find('[').ok_or_else(malformed)?;
    let close = text.rfind(']').ok_or_else(malformed)?;
    if close != text.len() - 1 || close < open {
        return Err(malformed());
    }
    let name = text[..open].trim();
    if name.is_empty() || !name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
        return Err(malformed());
    }
    let idx = text[open + 1..close].trim().parse::<usize>().map_err(|_| malformed())?;
    Ok((name.to_string(), idx))
}

/// Splits `(a, b, c) operands` into its parenthesised arguments and the rest.
fn split_args(text: &str, line: usize) -> Result<(Vec<String>, &str)> {
    let err = || Error::Parse { line, msg: "malformed gate arguments".into() };
    if !text.starts_with('(') {
        return Err(err());
    }
    let mut depth = 0usize;
    let mut args = Vec::new();
    let mut cur = String::new();
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => {
                if depth > 0 {
                    cur.push(ch);
                }
                depth += 1;
            }
            ')' => {
                depth -= 1;
                if depth == 0 {
                    args.push(cur.trim().to_string());
                    return Ok((args, text[i + 1..].trim()));
                }
                cur.push(ch);
            }
            ',' if depth == 1 => args.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(ch),
        }
    }
    Err(err())
}

/// Evaluates an angle expression: numbers, `pi`, `+ - * /`, unary minus and
/// parentheses.
pub fn eval_expr(text: &str, line: usize) -> Result<f64> {
    let tokens = tokenize(text, line)?;
    let mut pos = 0;
    let v = expr(&tokens, &mut pos, line)?;
    if pos != tokens.len() {
        return Err(Error::Parse { line, msg: format!("trailing input in '{text}'") });
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(ch) {
            out.push(Tok::Op(ch));
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '+' || chars[i] == '-')
                        && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Parse { line, msg: format!("bad number '{s}'") })?;
            out.push(Tok::Num(v));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s != "pi" {
                return Err(Error::Parse { line, msg: format!("unknown identifier '{s}'") });
            }
            out.push(Tok::Num(std::f64::consts::PI));
        } else {
            return Err(Error::Parse { line, msg: format!("unexpected character '{ch}'") });
        }
    }
    Ok(out)
}

fn expr(t: &[Tok], pos: &mut usize, line: usize) -> Result<f64> {
    let mut v = term(t, pos, line)?;
    while let Some(Tok::Op(op @ ('+' | '-'))) = t.get(*pos) {
        *pos += 1;
        let rhs = term(t, pos, line)?;
        v = if *op == '+' { v + rhs } else { v - rhs };
    }
    Ok(v)
}

fn term(t: &[Tok], pos: &mut usize, line: usize) -> Result<f64> {
    let mut v = factor(t, pos, line)?;
    while let Some(Tok::Op(op @ ('*' | '/'))) = t.get(*pos) {
        *pos += 1;
        let rhs = factor(t, pos, line)?;
        v = if *op == '*' { v * rhs } else { v / rhs };
    }
    Ok(v)
}

fn factor(t: &[Tok], pos: &mut usize, line: usize) -> Result<f64> {
    match t.get(*pos) {
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(*v)
        }
        Some(Tok::Op('-')) => {
            *pos += 1;
            Ok(-factor(t, pos, line)?)
        }
        Some(Tok::Op('+')) => {
            *pos += 1;
            factor(t, pos, line)
        }
        Some(Tok::Op('(')) => {
            *pos += 1;
            let v = expr(t, pos, line)?;
            if t.get(*pos) != Some(&Tok::Op(')')) {
                return Err(Error::Parse { line, msg: "missing ')'".into() });
            }
            *pos += 1;
            Ok(v)
        }
        _ => Err(Error::Parse { line, msg: "incomplete expression".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::workloads::random_circuit;
    use std::f64::consts::PI;

    #[test]
    fn single_gate_round_trip() {
        let mut c = Circuit::new(1);
        c.u3(PI, 0.0, PI, 0).unwrap();
        let text = to_qasm(&c).unwrap();
        assert!(text.contains("u3(") && text.contains(") q[0];"));
        assert_eq!(from_qasm(&text).unwrap(), c);
    }

    #[test]
    fn bell_round_trip_keeps_order_and_measurement() {
        let mut c = Circuit::new(2);
        c.h(0).unwrap().cx(0, 1).unwrap();
        c.measured = true;
        let text = to_qasm(&c).unwrap();
        assert!(text.ends_with("measure q -> c;\n"));
        assert_eq!(from_qasm(&text).unwrap(), c);
    }

    #[test]
    fn random_circuits_round_trip_exactly() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..20 {
            let c = random_circuit(5, 40, &mut rng);
            assert_eq!(from_qasm(&to_qasm(&c).unwrap()).unwrap(), c);
        }
    }

    #[test]
    fn expressions_and_per_qubit_measurement() {
        let text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\n\
                    // a comment\nu(pi/2, -pi/4, 2*(pi-1.5e-1)) q[1];\nbarrier q[0],q[1];\n\
                    CX q[1], q[0];\nmeasure q[0] -> c[0];\nmeasure q[1] -> c[1];\n";
        let c = from_qasm(text).unwrap();
        assert!(c.measured);
        assert_eq!(c.gates[1], Gate::cx(1, 0));
        match c.gates[0] {
            Gate::U3 { theta, phi, lambda, qubit } => {
                assert_eq!(qubit, 1);
                assert!((theta - PI / 2.0).abs() < 1e-15);
                assert!((phi + PI / 4.0).abs() < 1e-15);
                assert!((lambda - 2.0 * (PI - 0.15)).abs() < 1e-15);
            }
            _ => panic!("expected u3"),
        }
    }

    #[test]
    fn rejects_malformed_and_unsupported() {
        let head = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\n";
        let cases = [
            ("qreg q[2];", "missing header"),
            ("OPENQASM 2.0;\nqreg q[2]\ncx q[0],q[1];", "missing semicolon"),
            ("u3(1,2) q[0];", "two angles"),
            ("cx q[0],q[5];", "out of range"),
            ("cx q[0];", "one operand"),
            ("u3(1,2,foo) q[0];", "unknown identifier"),
            ("cx r[0],q[1];", "unknown register"),
        ];
        for (body, why) in cases {
            let text = if body.starts_with("qreg") || body.starts_with("OPENQASM") {
                body.to_string()
            } else {
                format!("{head}{body}")
            };
            assert!(matches!(from_qasm(&text), Err(Error::Parse { .. })), "{why}");
        }
        for body in ["h q[0];", "measure q[0] -> c[0];\nu3(0,0,0) q[0];", "measure q[0] -> c[0];", "reset q[0];"] {
            let text = format!("{head}creg c[2];\n{body}");
            assert!(matches!(from_qasm(&text), Err(Error::Unsupported { .. })), "{body}");
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nu3(1,2,3) q[4];\n";
        assert!(matches!(from_qasm(text), Err(Error::Parse { line: 4, .. })));
    }
}
