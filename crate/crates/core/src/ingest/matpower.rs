//! Reader for the matrix-literal subset of MATPOWER `.m` case files.
//!
//! Only `mpc.baseMVA`, `mpc.bus`, `mpc.branch` and (optionally) `mpc.gen`
//! are read. The generator table only locates the slack voltage setpoint.

use crate::error::{Error, Result};
use crate::netmodel::{Branch, Bus, NetworkCase, Slack};
use crate::C64;

const BUS_PQ: i64 = 1;
const BUS_PV: i64 = 2;
const BUS_REF: i64 = 3;
const BUS_ISOLATED: i64 = 4;

struct Matrix {
    rows: Vec<(usize, Vec<f64>)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(p) => &line[..p],
        None => line,
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("non-numeric token `{tok}`")))
}

/// Locates `mpc.<name> = [ ... ];` and returns its numeric rows.
fn find_matrix(lines: &[&str], name: &str) -> Result<Option<Matrix>> {
    let key = format!("mpc.{name}");
    let mut start = None;
    for (k, raw) in lines.iter().enumerate() {
        let code = strip_comment(raw);
        if let Some(pos) = code.find(&key) {
            let rest = code[pos + key.len()..].trim_start();
            if rest.starts_with('=') && rest[1..].trim_start().starts_with('[') {
                start = Some(k);
                break;
            }
        }
    }
    let Some(start) = start else {
        return Ok(None);
    };
    let mut rows = Vec::new();
    let mut current: Vec<f64> = Vec::new();
    let mut current_line = start + 1;
    for (k, raw) in lines.iter().enumerate().skip(start) {
        let lineno = k + 1;
        let mut code = strip_comment(raw);
        if k == start {
            code = &code[code.find('[').unwrap() + 1..];
        }
        let (body, closed) = match code.find(']') {
            Some(p) => (&code[..p], true),
            None => (code, false),
        };
        for (seg_idx, segment) in body.split(';').enumerate() {
            if seg_idx > 0 && !current.is_empty() {
                rows.push((current_line, std::mem::take(&mut current)));
            }
            for tok in segment.split(|c: char| c.is_whitespace() || c == ',') {
                if tok.is_empty() {
                    continue;
                }
                if current.is_empty() {
                    current_line = lineno;
                }
                current.push(parse_number(tok, lineno)?);
            }
        }
        // a newline also ends a row in MATLAB matrix literals
        if !current.is_empty() {
            rows.push((current_line, std::mem::take(&mut current)));
        }
        if closed {
            return Ok(Some(Matrix { rows }));
        }
    }
    Err(Error::parse(start + 1, format!("unterminated matrix `{key}`")))
}

fn find_scalar(lines: &[&str], name: &str) -> Result<Option<(usize, f64)>> {
    let key = format!("mpc.{name}");
    for (k, raw) in lines.iter().enumerate() {
        let code = strip_comment(raw);
        if let Some(pos) = code.find(&key) {
            let rest = code[pos + key.len()..].trim_start();
            if let Some(val) = rest.strip_prefix('=') {
                let tok = val.trim().trim_end_matches(';').trim();
                return Ok(Some((k + 1, parse_number(tok, k + 1)?)));
            }
        }
    }
    Ok(None)
}

fn require_cols(row: &(usize, Vec<f64>), n: usize, what: &str) -> Result<()> {
    if row.1.len() < n {
        return Err(Error::parse(
            row.0,
            format!("{what} row has {} columns, need at least {n}", row.1.len()),
        ));
    }
    Ok(())
}

fn as_id(v: f64, line: usize) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::parse(line, format!("invalid bus number {v}")))
    }
}

pub fn parse_matpower_case(text: &str) -> Result<NetworkCase> {
    let lines: Vec<&str> = text.lines().collect();
    let eof = lines.len().max(1);
    let name = lines
        .iter()
        .find_map(|l| {
            let l = strip_comment(l).trim();
            l.strip_prefix("function")
                .and_then(|r| r.split('=').nth(1))
                .map(|n| n.trim().to_string())
        })
        .unwrap_or_else(|| "case".to_string());
    let (_, base_mva) =
        find_scalar(&lines, "baseMVA")?.ok_or_else(|| Error::parse(eof, "missing `mpc.baseMVA`"))?;
    let bus = find_matrix(&lines, "bus")?.ok_or_else(|| Error::parse(eof, "missing `mpc.bus`"))?;
    let branch = find_matrix(&lines, "branch")?.ok_or_else(|| Error::parse(eof, "missing `mpc.branch`"))?;
    let gen = find_matrix(&lines, "gen")?;

    let mut buses = Vec::with_capacity(bus.rows.len());
    let mut slack: Option<(usize, f64, f64)> = None;
    let mut base_kv = 0.0;
    for row in &bus.rows {
        require_cols(row, 9, "bus")?;
        let (line, r) = (row.0, &row.1);
        let id = as_id(r[0], line)?;
        match r[1] as i64 {
            BUS_PQ => {}
            BUS_REF => {
                if let Some((other, _, _)) = slack {
                    return Err(Error::Validation(format!(
                        "multiple slack buses ({other} and {id})"
                    )));
                }
                slack = Some((id, r[7], r[8]));
            }
            BUS_PV => {
                return Err(Error::Validation(format!(
                    "bus {id} is a PV bus; only PQ and slack buses are supported"
                )))
            }
            BUS_ISOLATED => {
                return Err(Error::Validation(format!("bus {id} is isolated")));
            }
            t => return Err(Error::parse(line, format!("unknown bus type {t}"))),
        }
        if base_kv == 0.0 && r.len() > 9 {
            base_kv = r[9];
        }
        buses.push(Bus {
            id,
            load_p: C64::new(r[2], r[3]) / base_mva,
            load_i: C64::new(0.0, 0.0),
            load_z: C64::new(0.0, 0.0),
            shunt: C64::new(r[4], r[5]) / base_mva,
        });
    }
    let (slack_id, vm, va) = slack.ok_or_else(|| Error::Validation("no slack (type 3) bus".into()))?;
    let mut v_mag = vm;
    if let Some(gen) = &gen {
        for row in &gen.rows {
            require_cols(row, 6, "gen")?;
            let in_service = row.1.get(7).is_none_or(|&s| s > 0.0);
            if as_id(row.1[0], row.0)? == slack_id && in_service {
                v_mag = row.1[5];
            }
        }
    }
    if v_mag == 0.0 {
        v_mag = 1.0;
    }
    let v0 = C64::from_polar(v_mag, va.to_radians());

    let mut branches = Vec::with_capacity(branch.rows.len());
    for row in &branch.rows {
        require_cols(row, 5, "branch")?;
        let (line, r) = (row.0, &row.1);
        let ratio = r.get(8).copied().unwrap_or(0.0);
        let shift = r.get(9).copied().unwrap_or(0.0);
        if ratio != 0.0 && ratio != 1.0 {
            return Err(Error::Validation(format!(
                "line {line}: off-nominal tap ratio {ratio} is not supported"
            )));
        }
        if shift != 0.0 {
            return Err(Error::Validation(format!(
                "line {line}: phase shifters are not supported"
            )));
        }
        branches.push(Branch {
            from: as_id(r[0], line)?,
            to: as_id(r[1], line)?,
            series_impedance: C64::new(r[2], r[3]),
            total_charging: C64::new(0.0, r[4]),
            in_service: r.get(10).is_none_or(|&s| s > 0.0),
        });
    }
    let case = NetworkCase {
        name,
        base_mva,
        base_kv,
        slack: Slack { id: slack_id, v0 },
        buses,
        branches,
    };
    case.validate()?;
    Ok(case)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "function mpc = two
mpc.version = '2';
mpc.baseMVA = 10;
%% bus data
mpc.bus = [
	1	3	0	0	0	0	1	1	0	12.66	1	1	1;
	2	1	0.1	0.06	0	0.02	1	1	0	12.66	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	10	-10	1.02	100	1	10	0;
];
mpc.branch = [
	1	2	0.01	0.02	0.001	0	0	0	0	0	1	-360	360;
];
";

    #[test]
    fn two_bus_per_unit() {
        let c = parse_matpower_case(TWO_BUS).unwrap();
        assert_eq!(c.name, "two");
        assert_eq!(c.slack.id, 1);
        assert_eq!(c.slack.v0, C64::new(1.02, 0.0));
        assert_eq!(c.buses[1].load_p, C64::new(0.1 / 10.0, 0.06 / 10.0));
        assert_eq!(c.buses[1].shunt, C64::new(0.0, 0.002));
        assert_eq!(c.branches[0].series_impedance, C64::new(0.01, 0.02));
        assert_eq!(c.branches[0].total_charging, C64::new(0.0, 0.001));
        assert_eq!(c.base_kv, 12.66);
    }

    #[test]
    fn two_slacks_rejected() {
        let text = TWO_BUS.replace("2\t1\t0.1", "2\t3\t0.1");
        assert!(matches!(parse_matpower_case(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn bad_token_reports_line() {
        let text = TWO_BUS.replace("0.06", "x6");
        match parse_matpower_case(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_branch_section() {
        let text: String = TWO_BUS
            .lines()
            .take_while(|l| !l.starts_with("mpc.branch"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_matpower_case(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn rows_may_span_one_line_each_without_semicolons() {
        let text = TWO_BUS.replace(";\n\t2", "\n\t2");
        let c = parse_matpower_case(&text).unwrap();
        assert_eq!(c.buses.len(), 2);
    }
}
