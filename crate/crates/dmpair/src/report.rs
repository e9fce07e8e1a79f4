//! CSV and JSON writers. Numbers are printed in a fixed scientific format
//! so bodies compare byte for byte.

use std::io::Write;

use dmpair_core::gaussgreen::BalanceReport;
use serde::Serialize;

use crate::checks::{ConvergenceRow, Row};

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x == 0.0 {
        // drop the sign of zero
        "0.000000000000e0".into()
    } else {
        format!("{x:.12e}")
    }
}

/// One comment line naming the scenario, the seed and the resolution.
pub fn header(scenario: &str, seed: u64, panels_1d: usize, panels_2d: usize) -> String {
    format!("# dmpair report scenario={scenario} seed={seed} panels_1d={panels_1d} panels_2d={panels_2d}\n")
}

pub fn write_report<W: Write>(mut w: W, header: &str, rows: &[Row]) -> csv::Result<()> {
    w.write_all(header.as_bytes())?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["name", "value", "reference", "residual", "tolerance", "pass"])?;
    for r in rows {
        let verdict = match (&r.error, r.pass) {
            (Some(e), _) => format!("fail: {e}"),
            (None, true) => "pass".into(),
            (None, false) => "fail".into(),
        };
        out.write_record([r.name.clone(), num(r.value), num(r.reference), num(r.residual), num(r.tolerance), verdict])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_convergence<W: Write>(w: W, rows: &[ConvergenceRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["study", "param", "value", "limit", "order", "reliable"])?;
    for r in rows {
        out.write_record([r.study.clone(), num(r.param), num(r.value), num(r.limit), num(r.order), r.reliable.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// A row of `dmpair pair`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRow {
    pub route: &'static str,
    pub phi: String,
    pub value: f64,
    pub residual: f64,
}

pub fn write_pairs<W: Write>(w: W, rows: &[PairRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["route", "phi", "value", "residual"])?;
    for r in rows {
        out.write_record([r.route.to_string(), r.phi.clone(), num(r.value), num(r.residual)])?;
    }
    out.flush()?;
    Ok(())
}

/// A balance report with the set and formula it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceRow {
    pub set: String,
    pub formula: &'static str,
    pub lhs_interior: f64,
    pub lhs_closure: f64,
    pub rhs_interior: f64,
    pub rhs_closure: f64,
    pub residual_interior: f64,
    pub residual_closure: f64,
    pub consistency: f64,
}

impl BalanceRow {
    pub fn new(set: &str, formula: &'static str, b: &BalanceReport) -> Self {
        BalanceRow {
            set: set.to_string(),
            formula,
            lhs_interior: b.lhs_interior,
            lhs_closure: b.lhs_closure,
            rhs_interior: b.rhs_interior,
            rhs_closure: b.rhs_closure,
            residual_interior: b.residual_interior,
            residual_closure: b.residual_closure,
            consistency: b.consistency(),
        }
    }
}

pub fn write_balances_csv<W: Write>(w: W, rows: &[BalanceRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "set",
        "formula",
        "lhs_interior",
        "lhs_closure",
        "rhs_interior",
        "rhs_closure",
        "residual_interior",
        "residual_closure",
        "consistency",
    ])?;
    for r in rows {
        out.write_record([
            r.set.clone(),
            r.formula.to_string(),
            num(r.lhs_interior),
            num(r.lhs_closure),
            num(r.rhs_interior),
            num(r.rhs_closure),
            num(r.residual_interior),
            num(r.residual_closure),
            num(r.consistency),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Strips `#` comment lines, leaving the CSV body.
pub fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_stable() {
        assert_eq!(num(-0.0), num(0.0));
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(2.0), "2.000000000000e0");
        assert_eq!(num(-1.5e-7), "-1.500000000000e-7");
    }

    #[test]
    fn body_drops_comments() {
        assert_eq!(body("# seed=1\na,b\n1,2\n"), "a,b\n1,2\n");
    }
}
