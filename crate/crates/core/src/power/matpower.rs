//! Reader for the numeric tables of a MATPOWER case file.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{BusKind, PowerBranch, PowerBus, PowerCase};

const BUS_COLS: usize = 13;
const GEN_COLS: usize = 10;
const BRANCH_COLS: usize = 13;

struct Row {
    line: usize,
    values: Vec<f64>,
}

fn parse_error(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('%').next().unwrap_or("")
}

/// Rows of `mpc.<name> = [ ... ];`, with 1-based source line numbers.
fn table(text: &str, name: &str) -> Result<Option<Vec<Row>>> {
    let header = format!("mpc.{name}");
    let mut rows = Vec::new();
    let mut inside = false;
    let mut found = false;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let mut line = strip_comment(raw).trim();
        if !inside {
            let Some(rest) = line.strip_prefix(&header) else {
                continue;
            };
            let rest = rest.trim_start();
            let Some(rest) = rest.strip_prefix('=') else {
                continue;
            };
            let Some(rest) = rest.trim_start().strip_prefix('[') else {
                return Err(parse_error(line_no, name, "expected `[` after `=`"));
            };
            inside = true;
            found = true;
            line = rest.trim();
        }
        let (body, closed) = match line.find(']') {
            Some(pos) => (&line[..pos], true),
            None => (line, false),
        };
        for chunk in body.split(';') {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                continue;
            }
            let values = chunk
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| parse_error(line_no, name, format!("not a number: `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(Row {
                line: line_no,
                values,
            });
        }
        if closed {
            return Ok(Some(rows));
        }
    }
    if found {
        Err(parse_error(text.lines().count(), name, "table is not closed by `]`"))
    } else {
        Ok(None)
    }
}

fn scalar(text: &str, name: &str) -> Result<Option<f64>> {
    let header = format!("mpc.{name}");
    for (k, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if let Some(rest) = line.strip_prefix(&header) {
            let Some(rest) = rest.trim_start().strip_prefix('=') else {
                continue;
            };
            let value = rest.trim().trim_end_matches(';').trim();
            return value
                .parse()
                .map(Some)
                .map_err(|_| parse_error(k + 1, name, format!("not a number: `{value}`")));
        }
    }
    Ok(None)
}

fn check_width(rows: &[Row], name: &str, min: usize) -> Result<()> {
    for r in rows {
        if r.values.len() < min {
            return Err(parse_error(
                r.line,
                name,
                format!("expected at least {min} columns, found {}", r.values.len()),
            ));
        }
    }
    Ok(())
}

fn as_id(value: f64, line: usize, field: &str) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(parse_error(line, field, format!("invalid bus number {value}")))
    }
}

/// Parses `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch`.
///
/// A bus with an in-service generator takes the generator's voltage setpoint
/// and counts as a generator bus; other buses use their `Vm` column.
/// Isolated buses (type 4) and out-of-service branches and generators are
/// dropped. Resistances, charging, shunts, tap ratios and phase shifts are
/// not part of the lossless model and are listed in `ignored`.
pub fn parse_matpower(text: &str, name: &str) -> Result<PowerCase> {
    let base_mva = scalar(text, "baseMVA")?.ok_or_else(|| parse_error(0, "baseMVA", "missing"))?;
    if !(base_mva > 0.0) {
        return Err(parse_error(0, "baseMVA", "must be positive"));
    }
    let bus_rows = table(text, "bus")?.ok_or_else(|| parse_error(0, "bus", "missing table"))?;
    let gen_rows = table(text, "gen")?.unwrap_or_default();
    let branch_rows = table(text, "branch")?.ok_or_else(|| parse_error(0, "branch", "missing table"))?;
    check_width(&bus_rows, "bus", BUS_COLS)?;
    check_width(&gen_rows, "gen", GEN_COLS)?;
    check_width(&branch_rows, "branch", BRANCH_COLS)?;

    let mut ignored = Vec::new();
    let mut order = Vec::new();
    let mut vm: HashMap<usize, f64> = HashMap::new();
    let mut load: HashMap<usize, f64> = HashMap::new();
    let mut generator_type: HashMap<usize, bool> = HashMap::new();
    let mut isolated = Vec::new();
    let mut shunts = false;
    for r in &bus_rows {
        let v = &r.values;
        let id = as_id(v[0], r.line, "bus.bus_i")?;
        let kind = v[1];
        if kind == 4.0 {
            isolated.push(id);
            continue;
        }
        if vm.insert(id, v[7]).is_some() {
            return Err(parse_error(r.line, "bus.bus_i", format!("duplicate bus {id}")));
        }
        order.push(id);
        load.insert(id, v[2]);
        generator_type.insert(id, kind == 2.0 || kind == 3.0);
        shunts |= v[4] != 0.0 || v[5] != 0.0;
    }
    if shunts {
        ignored.push("bus shunts (Gs, Bs)".to_string());
    }

    let mut generation: HashMap<usize, f64> = HashMap::new();
    let mut setpoint: HashMap<usize, f64> = HashMap::new();
    for r in &gen_rows {
        let v = &r.values;
        let bus = as_id(v[0], r.line, "gen.bus")?;
        if v[7] <= 0.0 || !vm.contains_key(&bus) {
            continue;
        }
        *generation.entry(bus).or_insert(0.0) += v[1];
        setpoint.entry(bus).or_insert(v[5]);
    }

    let mut branches = Vec::new();
    let (mut resistive, mut charged, mut taps) = (false, false, false);
    for r in &branch_rows {
        let v = &r.values;
        let from = as_id(v[0], r.line, "branch.fbus")?;
        let to = as_id(v[1], r.line, "branch.tbus")?;
        if !(v[3] > 0.0) {
            return Err(parse_error(r.line, "branch.x", format!("reactance {} must be positive", v[3])));
        }
        if v[10] <= 0.0 || isolated.contains(&from) || isolated.contains(&to) {
            continue;
        }
        resistive |= v[2] != 0.0;
        charged |= v[4] != 0.0;
        taps |= (v[8] != 0.0 && v[8] != 1.0) || v[9] != 0.0;
        branches.push(PowerBranch { from, to, x: v[3] });
    }
    if resistive {
        ignored.push("branch resistance".to_string());
    }
    if charged {
        ignored.push("line charging".to_string());
    }
    if taps {
        ignored.push("transformer taps and phase shifts".to_string());
    }

    let buses = order
        .iter()
        .map(|&id| {
            let has_gen = setpoint.contains_key(&id);
            PowerBus {
                id,
                kind: if has_gen || generator_type[&id] {
                    BusKind::Generator
                } else {
                    BusKind::Load
                },
                vm: setpoint.get(&id).copied().unwrap_or(vm[&id]),
                p_nom: (generation.get(&id).copied().unwrap_or(0.0) - load[&id]) / base_mva,
            }
        })
        .collect();
    PowerCase {
        name: name.to_string(),
        base_mva,
        buses,
        branches,
        ignored,
    }
    .validated()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case9_fixture() {
        let case = parse_matpower(include_str!("../../data/case9.m"), "case9").unwrap();
        assert_eq!((case.n(), case.branches.len()), (9, 9));
        assert_eq!(case.buses[0].vm, 1.04);
        assert_eq!(case.buses[4].vm, 1.0);
        assert!((case.buses[1].p_nom - 1.63).abs() < 1e-12);
        assert!((case.buses[8].p_nom + 1.25).abs() < 1e-12);
        assert!(case.ignored.iter().any(|s| s.contains("resistance")));
    }

    #[test]
    fn case14_fixture() {
        let case = parse_matpower(include_str!("../../data/case14.m"), "case14").unwrap();
        assert_eq!((case.n(), case.branches.len()), (14, 20));
        assert_eq!(case.buses[7].kind, BusKind::Generator);
        assert_eq!(case.buses[7].vm, 1.09);
        assert!(case.ignored.iter().any(|s| s.contains("taps")));
    }

    const SMALL: &str = "mpc.baseMVA = 100;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 0 1 1.1 0.9;
  2 1 50 0 0 0 1 1 0 0 1 1.1 0.9;
];
mpc.gen = [ 1 50 0 0 0 1.0 100 1 100 0; ];
mpc.branch = [
  1 2 0 XVAL 0 0 0 0 0 0 1 -360 360;
];";

    #[test]
    fn zero_reactance_is_rejected_with_its_line() {
        let text = SMALL.replace("XVAL", "0");
        match parse_matpower(&text, "t") {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 8);
                assert_eq!(field, "branch.x");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_matpower(&SMALL.replace("XVAL", "0.2"), "t").is_ok());
    }

    #[test]
    fn malformed_tables() {
        let text = SMALL.replace("XVAL", "abc");
        assert!(matches!(parse_matpower(&text, "t"), Err(Error::Parse { line: 8, .. })));
        let short = "mpc.baseMVA = 100;\nmpc.bus = [ 1 3 0 ];\nmpc.branch = [ ];";
        assert!(matches!(parse_matpower(short, "t"), Err(Error::Parse { line: 2, .. })));
    }
}
