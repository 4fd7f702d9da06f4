//! Flat CSV and canonical JSON output.
//!
//! CSV files start with `#`-prefixed provenance lines followed by a header
//! row. Floats carry 17 significant digits so every value round-trips.

use std::fmt::Write as _;

use serde::Serialize;

use crate::entanglement::CONCURRENCE_ZERO;
use crate::fermion::ModeBasis;
use crate::sweep::{GapPoint, SweepTable, ThresholdOutcome, ThresholdResult};

pub const SWEEP_COLUMNS: [&str; 11] = [
    "axis_value",
    "N",
    "n",
    "lambda",
    "lambda_I",
    "C_end",
    "C_single_modulus",
    "C_nn_end",
    "sqrt_tau_res",
    "gap",
    "degenerate",
];

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Concurrences below the zero cutoff are written as exactly zero.
pub fn fmt_concurrence(x: f64) -> String {
    fmt_f64(if x < CONCURRENCE_ZERO { 0.0 } else { x })
}

/// Canonical JSON: keys sorted, two-space indent, trailing newline.
/// Re-serializing a parsed document yields identical bytes.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    s.push('\n');
    Ok(s)
}

fn provenance_lines(out: &mut String, config: &serde_json::Value) {
    let _ = writeln!(out, "# modent {}", crate::VERSION);
    let _ = writeln!(
        out,
        "# config: {}",
        serde_json::to_string(config).unwrap_or_default()
    );
}

pub fn sweep_csv(table: &SweepTable, config: &serde_json::Value) -> String {
    sweep_csv_multi(std::slice::from_ref(table), config)
}

/// Several sweeps (e.g. one per curve of a figure) under a single header.
pub fn sweep_csv_multi(tables: &[SweepTable], config: &serde_json::Value) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, config);
    for table in tables {
        let b = &table.provenance.base;
        let _ = writeln!(
            out,
            "# axis: {} (n={}, lambda={}, lambda_I={})",
            table.axis, b.sites_per_modulus, b.end_bond, b.inter_modulus
        );
        if let Some(note) = &table.provenance.note {
            let _ = writeln!(out, "# note: n={}: {note}", b.sites_per_modulus);
        }
    }
    out.push_str(&SWEEP_COLUMNS.join(","));
    out.push('\n');
    for r in tables.iter().flat_map(|t| &t.rows) {
        let fields = [
            fmt_f64(r.axis_value),
            r.moduli.to_string(),
            r.sites_per_modulus.to_string(),
            fmt_f64(r.end_bond),
            fmt_f64(r.inter_modulus),
            fmt_concurrence(r.c_end),
            fmt_concurrence(r.c_single_modulus),
            fmt_concurrence(r.c_nn_end),
            fmt_f64(r.sqrt_tau_res),
            fmt_f64(r.gap),
            r.degenerate.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(basis: &ModeBasis, config: &serde_json::Value) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, config);
    let _ = writeln!(out, "# convention: {}", crate::fermion::CONVENTION);
    out.push_str("k,energy,zero_mode\n");
    for (k, e) in basis.energies().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", k + 1, fmt_f64(*e), basis.is_zero_mode(k));
    }
    out
}

pub const THRESHOLD_COLUMNS: [&str; 9] = [
    "N",
    "n",
    "lambda",
    "outcome",
    "lambda_I_th",
    "bracket_lo",
    "bracket_hi",
    "ratio",
    "converged",
];

pub fn threshold_csv(results: &[ThresholdResult], config: &serde_json::Value) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, config);
    if let Some(r) = results.first() {
        let _ = writeln!(out, "# onset tolerance: {}", r.tolerance);
    }
    out.push_str(&THRESHOLD_COLUMNS.join(","));
    out.push('\n');
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in results {
        let outcome = match r.outcome {
            ThresholdOutcome::Found => "found",
            ThresholdOutcome::NoThresholdInRange => "no_threshold_in_range",
            ThresholdOutcome::EntangledAtZero => "entangled_at_zero",
        };
        let fields = [
            r.base.moduli.to_string(),
            r.base.sites_per_modulus.to_string(),
            fmt_f64(r.base.end_bond),
            outcome.to_string(),
            opt(r.threshold),
            opt(r.bracket.map(|b| b.0)),
            opt(r.bracket.map(|b| b.1)),
            opt(r.ratio),
            r.converged.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn gap_csv(points: &[GapPoint], config: &serde_json::Value) -> String {
    let mut out = String::new();
    provenance_lines(&mut out, config);
    out.push_str("N,n,n_t,gap,ln_gap\n");
    for p in points {
        let ln = if p.gap > 0.0 {
            fmt_f64(p.gap.ln())
        } else {
            "-inf".into()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.moduli,
            p.sites_per_modulus,
            p.total_sites,
            fmt_f64(p.gap),
            ln
        );
    }
    out
}

/// Data rows of a CSV document produced here, split into fields.
pub fn parse_csv_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_concurrence(3e-11), fmt_f64(0.0));
    }

    #[test]
    fn json_is_canonical() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: Vec<f64>,
        }
        let text = to_json(&S {
            zeta: 0.1,
            alpha: vec![1e-300, -2.5],
        })
        .unwrap();
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(to_json(&parsed).unwrap(), text);
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }

        #[test]
        fn json_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let text = to_json(&vec![x]).unwrap();
            let back: Vec<f64> = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back[0], x);
        }
    }
}
