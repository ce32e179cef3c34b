//! Line-oriented text form of a layer list.
//!
//! ```text
//! L0 cycles=10 | SWAP(a=q0,b=q4) CSWAP(ctrl=q5+,a=q7,b=q9)
//! L1 cycles=4 | CCSWAP(ctrl=q1+,ctrl=q2-,a=q3,b=q6) X(t=q2) CX(data=1,t=q8)
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{Gate, Layer};
use crate::branch_state::{Control, QubitId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct DumpError {
    pub line: usize,
    pub reason: String,
}

fn fmt_ctrl(c: &Control) -> String {
    format!("ctrl={}{}", c.qubit, if c.polarity { '+' } else { '-' })
}

pub fn dump_layers(layers: &[Layer]) -> String {
    let mut out = String::new();
    for (k, layer) in layers.iter().enumerate() {
        write!(out, "L{k} cycles={} |", layer.code_cycles).unwrap();
        for g in &layer.gates {
            out.push(' ');
            match g {
                Gate::Swap { a, b } => write!(out, "SWAP(a={a},b={b})"),
                Gate::CSwap { control, a, b } => write!(out, "CSWAP({},a={a},b={b})", fmt_ctrl(control)),
                Gate::CCSwap { controls, a, b } => {
                    write!(out, "CCSWAP({},{},a={a},b={b})", fmt_ctrl(&controls[0]), fmt_ctrl(&controls[1]))
                }
                Gate::X { target } => write!(out, "X(t={target})"),
                Gate::ClassicalCx { data_bit, target } => write!(out, "CX(data={},t={target})", *data_bit as u8),
            }
            .unwrap();
        }
        out.push('\n');
    }
    out
}

fn qubit(s: &str) -> Result<QubitId, String> {
    let idx = s.strip_prefix('q').ok_or_else(|| format!("expected qubit, got {s:?}"))?;
    let idx: u32 = idx.parse().map_err(|_| format!("bad qubit index {idx:?}"))?;
    Ok(QubitId::new(idx as usize))
}

fn gate(tok: &str) -> Result<Gate, String> {
    let open = tok.find('(').ok_or_else(|| format!("missing '(' in {tok:?}"))?;
    let body = tok[open + 1..].strip_suffix(')').ok_or_else(|| format!("missing ')' in {tok:?}"))?;
    let name = &tok[..open];

    let mut ctrls = Vec::new();
    let (mut a, mut b, mut t, mut data) = (None, None, None, None);
    for field in body.split(',') {
        let (key, val) = field.split_once('=').ok_or_else(|| format!("bad field {field:?}"))?;
        match key {
            "ctrl" => {
                let (q, pol) = match val.as_bytes().last() {
                    Some(b'+') => (&val[..val.len() - 1], true),
                    Some(b'-') => (&val[..val.len() - 1], false),
                    _ => return Err(format!("control {val:?} lacks polarity")),
                };
                ctrls.push(Control { qubit: qubit(q)?, polarity: pol });
            }
            "a" if a.is_none() => a = Some(qubit(val)?),
            "b" if b.is_none() => b = Some(qubit(val)?),
            "t" if t.is_none() => t = Some(qubit(val)?),
            "data" if data.is_none() => {
                data = Some(match val {
                    "0" => false,
                    "1" => true,
                    _ => return Err(format!("data bit {val:?}")),
                })
            }
            _ => return Err(format!("unexpected field {key:?}")),
        }
    }

    let fields = (ctrls.len(), a, b, t, data);
    match (name, fields) {
        ("SWAP", (0, Some(a), Some(b), None, None)) => Ok(Gate::Swap { a, b }),
        ("CSWAP", (1, Some(a), Some(b), None, None)) => Ok(Gate::CSwap { control: ctrls[0], a, b }),
        ("CCSWAP", (2, Some(a), Some(b), None, None)) => Ok(Gate::CCSwap { controls: [ctrls[0], ctrls[1]], a, b }),
        ("X", (0, None, None, Some(target), None)) => Ok(Gate::X { target }),
        ("CX", (0, None, None, Some(target), Some(data_bit))) => Ok(Gate::ClassicalCx { data_bit, target }),
        _ => Err(format!("malformed gate {tok:?}")),
    }
}

/// Parses the output of [`dump_layers`]. Blank lines are ignored; layer
/// indices must count up from zero.
pub fn parse_dump(text: &str) -> Result<Vec<Layer>, DumpError> {
    let mut layers = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| DumpError { line: i + 1, reason };
        let (head, gates) = line.split_once('|').ok_or_else(|| err("missing '|'".into()))?;
        let mut head = head.split_whitespace();
        let label = head.next().ok_or_else(|| err("empty header".into()))?;
        let k: usize = label
            .strip_prefix('L')
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| err(format!("bad layer label {label:?}")))?;
        if k != layers.len() {
            return Err(err(format!("layer L{k} out of order")));
        }
        let cycles = head
            .next()
            .and_then(|c| c.strip_prefix("cycles="))
            .and_then(|c| c.parse::<u32>().ok())
            .ok_or_else(|| err("bad cycles field".into()))?;
        if head.next().is_some() {
            return Err(err("trailing header tokens".into()));
        }
        let gates = gates.split_whitespace().map(gate).collect::<Result<Vec<_>, _>>().map_err(err)?;
        layers.push(Layer { gates, code_cycles: cycles });
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let layers = parse_dump("L0 cycles=6 | CSWAP(ctrl=q5+,a=q7,b=q9)\n").unwrap();
        assert_eq!(layers.len(), 1);
        assert_eq!(
            layers[0].gates[0],
            Gate::CSwap { control: Control::on(QubitId::new(5)), a: QubitId::new(7), b: QubitId::new(9) }
        );
    }

    #[test]
    fn every_gate_round_trips() {
        let q = QubitId::new;
        let layers = vec![
            Layer {
                gates: vec![
                    Gate::Swap { a: q(0), b: q(1) },
                    Gate::CCSwap { controls: [Control::on(q(2)), Control::off(q(3))], a: q(4), b: q(5) },
                ],
                code_cycles: 12,
            },
            Layer { gates: vec![], code_cycles: 1 },
            Layer {
                gates: vec![Gate::X { target: q(7) }, Gate::ClassicalCx { data_bit: true, target: q(8) }],
                code_cycles: 3,
            },
        ];
        let text = dump_layers(&layers);
        assert_eq!(parse_dump(&text).unwrap(), layers);
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "L0 cycles=1 SWAP(a=q0,b=q1)",
            "L1 cycles=1 |",
            "L0 cycles=x |",
            "L0 cycles=1 | SWAP(a=q0)",
            "L0 cycles=1 | CSWAP(ctrl=q1,a=q0,b=q2)",
            "L0 cycles=1 | SWAP(a=q0,a=q1)",
            "L0 cycles=1 | FOO(a=q0,b=q1)",
            "L0 cycles=1 | X(t=q)",
        ] {
            assert!(parse_dump(bad).is_err(), "{bad}");
        }
    }
}
