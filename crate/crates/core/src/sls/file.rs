//! Machine files.
//!
//! ```text
//! [params]
//! k=1 l=1 m=2 u=1 v=1
//!
//! [op flip]
//! ou0=0 -> ou0=1, rr=T
//! ou0=1 -> ou0=0, rr=F
//! ```
//!
//! Each `[op NAME]` table lists input cells on the left and output cells on
//! the right; unlisted cells are unchanged. Word cells take binary values,
//! `rr` takes `T` or `F`. Loads and stores are implicit.

use std::fmt::Write as _;

use thiserror::Error;

use super::{build_sls, SlsLayout, SlsMachine, SlsParams};
use crate::machine::{MemoryLayout, Operation, ProjectionTable, TableError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct MachineFileError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MachineFileError {
    MachineFileError {
        line,
        message: message.into(),
    }
}

struct OpSection {
    name: String,
    line: usize,
    inputs: Option<Vec<usize>>,
    outputs: Option<Vec<usize>>,
    rows: Vec<(Vec<u32>, Vec<u32>)>,
}

/// Reorders `assignments` to follow `header`, fixing the header on first
/// use.
fn align(
    header: &mut Option<Vec<usize>>,
    assignments: Vec<(usize, u32)>,
    layout: &MemoryLayout,
    line: usize,
) -> Result<Vec<u32>, MachineFileError> {
    let cells = header.get_or_insert_with(|| assignments.iter().map(|&(c, _)| c).collect());
    if cells.len() != assignments.len() || assignments.iter().any(|(c, _)| !cells.contains(c)) {
        let names: Vec<String> = cells.iter().map(|&c| layout.cell_name(c)).collect();
        return Err(err(
            line,
            format!("row must list exactly the cells {{{}}}", names.join(", ")),
        ));
    }
    Ok(cells
        .iter()
        .map(|c| assignments.iter().find(|(x, _)| x == c).expect("checked").1)
        .collect())
}

fn parse_params(text: &str, line: usize, seen: &mut [Option<u64>; 5]) -> Result<(), MachineFileError> {
    for token in text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
    {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, found `{token}`")))?;
        let slot = match key.trim() {
            "k" => 0,
            "l" => 1,
            "m" => 2,
            "u" => 3,
            "v" => 4,
            other => return Err(err(line, format!("unknown parameter `{other}`"))),
        };
        if seen[slot].is_some() {
            return Err(err(line, format!("parameter `{key}` given twice")));
        }
        let n = value
            .trim()
            .parse()
            .map_err(|_| err(line, format!("`{value}` is not a natural number")))?;
        seen[slot] = Some(n);
    }
    Ok(())
}

pub fn parse_machine_file(text: &str) -> Result<SlsMachine, MachineFileError> {
    let mut params: [Option<u64>; 5] = [None; 5];
    let mut in_params = false;
    let mut cells: Option<SlsLayout> = None;
    let mut ops: Vec<OpSection> = Vec::new();
    let mut params_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(header) = body.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim();
            if header == "params" {
                if params_line != 0 {
                    return Err(err(line, "duplicate [params] section"));
                }
                if !ops.is_empty() {
                    return Err(err(line, "[params] must come before every [op] section"));
                }
                params_line = line;
                in_params = true;
            } else if let Some(name) = header.strip_prefix("op ") {
                if params_line == 0 {
                    return Err(err(line, "[params] must come before every [op] section"));
                }
                let name = name.trim().to_string();
                if ops.iter().any(|o| o.name == name) {
                    return Err(err(line, format!("operation `{name}` defined twice")));
                }
                in_params = false;
                ops.push(OpSection {
                    name,
                    line,
                    inputs: None,
                    outputs: None,
                    rows: Vec::new(),
                });
            } else {
                return Err(err(line, format!("unknown section `[{header}]`")));
            }
            continue;
        }
        if in_params {
            parse_params(body, line, &mut params)?;
            continue;
        }
        let Some(op) = ops.last_mut() else {
            return Err(err(line, "content outside any section"));
        };
        if cells.is_none() {
            cells = Some(layout_from(&params, params_line)?);
        }
        let layout = &cells.as_ref().expect("set above").layout;
        let (lhs, rhs) = body.split_once("->").ok_or_else(|| err(line, "table row needs `->`"))?;
        let ins = layout.parse_assignments(lhs).map_err(|e| err(line, e.to_string()))?;
        let outs = layout.parse_assignments(rhs).map_err(|e| err(line, e.to_string()))?;
        let ins = align(&mut op.inputs, ins, layout, line)?;
        let outs = align(&mut op.outputs, outs, layout, line)?;
        op.rows.push((ins, outs));
    }

    if params_line == 0 {
        return Err(err(1, "missing [params] section"));
    }
    let cells = match cells {
        Some(c) => c,
        None => layout_from(&params, params_line)?,
    };
    let sls = params_of(&params, params_line)?;
    let mut data_manip = Vec::new();
    for op in ops {
        let table = ProjectionTable::from_rows(
            &cells.layout,
            op.inputs.unwrap_or_default(),
            op.outputs.unwrap_or_default(),
            op.rows,
        )
        .map_err(|e| err(op.line, format!("operation `{}`: {e}", op.name)))?;
        data_manip.push((op.name.clone(), Operation::from_projection(op.name, table)));
    }
    build_sls(sls, data_manip).map_err(|e| err(params_line, e.to_string()))
}

fn params_of(p: &[Option<u64>; 5], line: usize) -> Result<SlsParams, MachineFileError> {
    let get = |i: usize, key: &str| p[i].ok_or_else(|| err(line, format!("missing parameter `{key}`")));
    let small = |v: u64| u32::try_from(v).map_err(|_| err(line, format!("parameter value {v} is too large")));
    let (k, l, m, u, v) = (get(0, "k")?, get(1, "l")?, get(2, "m")?, get(3, "u")?, get(4, "v")?);
    SlsParams::new(small(k)?, small(l)?, m as usize, u as usize, v as usize).map_err(|e| err(line, e.to_string()))
}

fn layout_from(p: &[Option<u64>; 5], line: usize) -> Result<SlsLayout, MachineFileError> {
    SlsLayout::new(&params_of(p, line)?).map_err(|e| err(line, e.to_string()))
}

/// Serializes the `A'` instructions as tables over their declared regions.
pub fn write_machine_file(m: &SlsMachine) -> Result<String, TableError> {
    let p = &m.params;
    let layout = m.layout();
    let mut out = String::new();
    let _ = writeln!(out, "[params]\nk={} l={} m={} u={} v={}", p.k, p.l, p.m, p.u, p.v);
    for a in &m.data_manip {
        let op = &m.machine.interpretation(a).expect("A' action is interpreted").operation;
        let owned;
        let table = match op.projection() {
            Some(t) => t,
            None => {
                owned = ProjectionTable::of_operation(layout, op)?;
                &owned
            }
        };
        let _ = writeln!(out, "\n[op {a}]");
        let side = |cells: &[usize], values: &[u32]| {
            cells
                .iter()
                .zip(values)
                .map(|(&c, &v)| format!("{}={}", layout.cell_name(c), layout.domain(c).format(v)))
                .collect::<Vec<_>>()
                .join(", ")
        };
        for (ins, outs) in table.rows() {
            let lhs = side(table.inputs(), &ins);
            let rhs = side(table.outputs(), outs);
            let line = format!("{lhs} -> {rhs}");
            let _ = writeln!(out, "{}", line.trim());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::T;
    use crate::sls::load_action;

    const FLIP: &str = "\
# a one-instruction machine
[params]
k=1 l=1
m=2 u=1 v=1

[op flip]
ou0=0 -> ou0=1, rr=T
ou0=1 -> rr=F, ou0=0

[op mark]
-> rr=T, ou1=1
";

    #[test]
    fn parses_and_round_trips() {
        let m = parse_machine_file(FLIP).unwrap();
        assert_eq!(m.params, SlsParams::new(1, 1, 2, 1, 1).unwrap());
        assert_eq!(m.d(), 2);
        assert!(m.machine.interpretation(&load_action(0)).is_some());
        let flip = &m.machine.interpretation(&"flip".parse().unwrap()).unwrap().operation;
        let s = m.layout().parse_state("ou0=0").unwrap();
        let t = flip.evaluate(&s);
        assert_eq!(m.layout().format_cells(&t, [2, 8]), "ou0=1, rr=T");
        assert_eq!(t.get(m.cells.rr), T);

        let text = write_machine_file(&m).unwrap();
        let again = parse_machine_file(&text).unwrap();
        assert_eq!(write_machine_file(&again).unwrap(), text);
        assert!(text.contains("[op mark]\n-> rr=T, ou1=1\n"), "{text}");
    }

    #[test]
    fn reports_errors_with_lines() {
        let e = parse_machine_file("[op x]\n-> rr=T\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_machine_file("[params]\nk=1 l=1 m=0 u=1 v=1 q=3\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_machine_file("[params]\nk=1 l=1 m=1 u=1 v=1\n[op x]\nou=0 -> rr=T\n").unwrap_err();
        assert_eq!(e.line, 3, "{e}");
        assert!(e.message.contains("no entry"), "{e}");
        let e = parse_machine_file("[params]\nk=1 l=1 m=1 u=1 v=1\n[op x]\nou=0 -> rr=T\nrr=T -> rr=T\n").unwrap_err();
        assert_eq!(e.line, 5);
        let e = parse_machine_file("[params]\nk=1 l=1 m=1 u=1 v=1\n[op load:0]\n-> rr=T\n").unwrap_err();
        assert!(e.message.contains("clashes"), "{e}");
        let e = parse_machine_file("[params]\nk=1 l=1 m=1 u=1\n").unwrap_err();
        assert!(e.message.contains("missing parameter `v`"));
    }
}
