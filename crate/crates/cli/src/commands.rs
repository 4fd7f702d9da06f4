use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use modent::entanglement::report_with;
use modent::io::{
    fmt_concurrence, fmt_f64, gap_csv, spectrum_csv, sweep_csv, sweep_csv_multi, threshold_csv,
    to_json,
};
use modent::sweep::{
    fit_log_gap, gap_scan, linear_grid, matched_inter_modulus, sweep_moduli_with, ThresholdOptions,
    ASYMPTOTE_TOL,
};
use modent::{
    build_couplings, compare_with_oracle, find_threshold, solve, sweep_lambda_i, ChainSpec,
    ModularSpec, ReportOptions,
};

use crate::args::{FigName, Format};
use crate::config::{require, Settings};
use crate::error::CliError;
use crate::recipes;

/// One finished output: a file name used when writing into a directory, and
/// its contents.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

fn artifact(name: impl Into<String>, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a Value,
    result: &'a T,
}

fn json_doc<T: Serialize>(config: &Value, result: &T) -> Result<String, CliError> {
    Ok(to_json(&Document {
        tool: "modent",
        version: modent::VERSION,
        config,
        result,
    })?)
}

fn format_or(s: &Settings, default: Format) -> Format {
    s.format.unwrap_or(default)
}

fn chain_spec(s: &Settings) -> Result<ChainSpec, CliError> {
    if let Some(c) = &s.couplings {
        return Ok(ChainSpec::explicit(c.clone())?);
    }
    let spec = ModularSpec::new(
        require(s.moduli, "moduli")?,
        require(s.sites, "sites")?,
        require(s.lambda, "lambda")?,
        require(s.lambda_i, "lambda-i")?,
    )?;
    Ok(ChainSpec::Modular(spec))
}

/// Stderr warning for chains without mirror symmetry, which cannot carry
/// end-to-end entanglement.
fn warn_if_asymmetric(spec: &ChainSpec) -> Result<(), CliError> {
    let check = spec.couplings()?.mirror_symmetry();
    if !check.symmetric {
        eprintln!(
            "{}",
            json!({"warning": {"kind": "mirror-asymmetry", "message": check.diagnostic()}})
        );
    }
    Ok(())
}

/// Outputs of a command, plus a failure to report after they are written.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<CliError>,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Outcome {
            artifacts,
            failure: None,
        }
    }
}

/// Runs the command named in `s`, filling defaults into `s` as it goes so
/// the embedded config is the one actually used.
pub fn run(s: &mut Settings) -> Result<Outcome, CliError> {
    let command = s.command.clone().unwrap_or_default();
    let artifacts = match command.as_str() {
        "report" => report(s),
        "spectrum" => spectrum(s),
        "sweep-lambda-i" => sweep_li(s),
        "sweep-moduli" => sweep_n(s),
        "threshold" => threshold(s),
        "gap-scan" => gaps(s),
        "oracle-check" => return oracle_check(s),
        "fig" => figure(s, require(s.figure, "figure")?),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }?;
    Ok(artifacts.into())
}

fn report(s: &mut Settings) -> Result<Vec<Artifact>, CliError> {
    let spec = chain_spec(s)?;
    warn_if_asymmetric(&spec)?;
    let tangle_site = *s.tangle_site.get_or_insert(0);
    let r = report_with(&spec, ReportOptions { tangle_site })?;
    let config = serde_json::to_value(&*s)?;
    Ok(match format_or(s, Format::Json) {
        Format::Json => vec![artifact("report.json", json_doc(&config, &r)?)],
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!(
                "# modent {}\n# config: {}\n",
                modent::VERSION,
                config
            ));
            for (k, v) in [
                (
                    "end_to_end_concurrence",
                    fmt_concurrence(r.end_to_end_concurrence),
                ),
                ("one_tangle", fmt_f64(r.one_tangle)),
                ("residual_tangle", fmt_f64(r.residual_tangle)),
                ("ground_energy", fmt_f64(r.ground_energy)),
                ("gap", fmt_f64(r.gap)),
                ("degenerate", r.degenerate.to_string()),
                ("mirror_symmetric", r.mirror_symmetric.to_string()),
            ] {
                out.push_str(&format!("# {k}: {v}\n"));
            }
            out.push_str("i,j,concurrence\n");
            for (k, c) in r.pairwise_from_first.iter().enumerate() {
                out.push_str(&format!("1,{},{}\n", k + 2, fmt_concurrence(*c)));
            }
            vec![artifact("report.csv", out)]
        }
    })
}

fn spectrum(s: &mut Settings) -> Result<Vec<Artifact>, CliError> {
    let spec = chain_spec(s)?;
    warn_if_asymmetric(&spec)?;
    let basis = solve(&spec.couplings()?)?;
    let config = serde_json::to_value(&*s)?;
    Ok(match format_or(s, Format::Csv) {
        Format::Csv => vec![artifact("spectrum.csv", spectrum_csv(&basis, &config))],
        Format::Json => {
            let zero: Vec<bool> = (0..basis.sites()).map(|k| basis.is_zero_mode(k)).collect();
            let body = json!({
                "convention": modent::fermion::CONVENTION,
                "energies": basis.energies(),
                "zero_modes": zero,
                "ground_energy": basis.ground_energy(),
                "gap": basis.energy_gap(),
            });
            vec![artifact("spectrum.json", json_doc(&config, &body)?)]
        }
    })
}

fn sweep_li(s: &mut Settings) -> Result<Vec<Artifact>, CliError> {
    let moduli = *s.moduli.get_or_insert(2);
    let base = ModularSpec::new(
        moduli,
        require(s.sites, "sites")?,
        require(s.lambda, "lambda")?,
        0.0,
    )?;
    let grid = linear_grid(
        *s.from.get_or_insert(0.0),
        *s.to.get_or_insert(2.0),
        *s.step.get_or_insert(0.01),
    )?;
    let table = sweep_lambda_i(&base, &grid)?;
    let config = serde_json::to_value(&*s)?;
    Ok(match format_or(s, Format::Csv) {
        Format::Csv => vec![artifact("sweep_lambda_i.csv", sweep_csv(&table, &config))],
        Format::Json => vec![artifact("sweep_lambda_i.json", json_doc(&config, &table)?)],
    })
}

fn sweep_n(s: &mut Settings) -> Result<Vec<Artifact>, CliError> {
    let base = ModularSpec::new(
        1,
        require(s.sites, "sites")?,
        require(s.lambda, "lambda")?,
        require(s.lambda_i, "lambda-i")?,
    )?;
    let n_max = *s.max_moduli.get_or_insert(recipes::MAX_MODULI);
    let tol = *s.asymptote_tol.get_or_insert(ASYMPTOTE_TOL);
    let sweep = sweep_moduli_with(&base, n_max, tol)?;
    let config = serde_json::to_value(&*s)?;
    Ok(match format_or(s, Format::Csv) {
        Format::Csv => {
            let mut out = sweep_csv(&sweep.table, &config);
            out.push_str(&format!(
                "# asymptote: {}, converged: {} (tolerance {})\n",
                fmt_f64(sweep.asymptote),
                sweep.converged,
                sweep.convergence_tolerance
            ));
            if let Some(f) = sweep.gap_fit {
                out.push_str(&format!(
                    "# ln gap fit: slope {}, r_squared {}\n",
                    fmt_f64(f.slope),
                    fmt_f64(f.r_squared)
                ));
            }
            vec![artifact("sweep_moduli.csv", out)]
        }
        Format::Json => vec![artifact("sweep_moduli.json", json_doc(&config, &sweep)?)],
    })
}

fn threshold_options(s: &mut Settings) -> ThresholdOptions {
    let d = ThresholdOptions::default();
    ThresholdOptions {
        step: *s.scan_step.get_or_insert(d.step),
        max: *s.scan_max.get_or_insert(d.max),
        tolerance: *s.onset_tol.get_or_insert(d.tolerance),
        bracket_width: *s.bracket_width.get_or_insert(d.bracket_width),
    }
}

fn threshold(s: &mut Settings) -> Result<Vec<Artifact>, CliError> {
    let moduli = *s.moduli.get_or_insert(2);
    let base = ModularSpec::new(
        moduli,
        require(s.sites, "sites")?,
        require(s.lambda, "lambda")?,
        0.0,
    )?;
    let options = threshold_options(s);
    let result = find_threshold(&base, options)?;
    let config = serde_json::to_value(&*s)?;
    Ok(match format_or(s, Format::Json) {
        Format::Json => vec![artifact("threshold.json", json_doc(&config, &result)?)],
        Format::Csv => vec![artifact("threshold.csv", threshold_csv(&[result], &config))],
    })
}

fn gaps(s: &mut Settings) -> Result<Vec<Artifact>, CliError> {
    let base = ModularSpec::new(
        1,
        require(s.sites, "sites")?,
        require(s.lambda, "lambda")?,
        require(s.lambda_i, "lambda-i")?,
    )?;
    let lo = *s.min_moduli.get_or_insert(1);
    let hi = *s.max_moduli.get_or_insert(recipes::MAX_MODULI);
    if lo == 0 || hi < lo {
        return Err(CliError::Usage(format!("bad moduli range {lo}..={hi}")));
    }
    let points = gap_scan(&base, &(lo..=hi).collect::<Vec<_>>())?;
    let fit = fit_log_gap(
        &points
            .iter()
            .map(|p| (p.moduli as f64, p.gap))
            .collect::<Vec<_>>(),
    );
    let config = serde_json::to_value(&*s)?;
    Ok(match format_or(s, Format::Csv) {
        Format::Csv => {
            let mut out = gap_csv(&points, &config);
            if let Some(f) = fit {
                out.push_str(&format!(
                    "# ln gap fit: slope {}, r_squared {}\n",
                    fmt_f64(f.slope),
                    fmt_f64(f.r_squared)
                ));
            }
            vec![artifact("gap_scan.csv", out)]
        }
        Format::Json => vec![artifact(
            "gap_scan.json",
            json_doc(&config, &json!({"points": points, "fit": fit}))?,
        )],
    })
}

#[derive(Serialize)]
struct OracleRow {
    moduli: usize,
    sites_per_modulus: usize,
    lambda: f64,
    lambda_i: f64,
    #[serde(flatten)]
    comparison: modent::OracleComparison,
    pass: bool,
}

/// The grid n ∈ {2,3,4,6}, N ∈ {1,2,3}, λ ∈ {0.1,0.5,1}, λ_I ∈ {0.05,0.5,1,4}
/// restricted to `n·N ≤ max_sites`.
fn oracle_grid(max_sites: usize) -> Vec<ModularSpec> {
    let mut specs = Vec::new();
    for n in [2, 3, 4, 6] {
        for n_mod in 1..=3 {
            if n * n_mod > max_sites {
                continue;
            }
            for lambda in [0.1, 0.5, 1.0] {
                for li in [0.05, 0.5, 1.0, 4.0] {
                    specs.push(ModularSpec {
                        moduli: n_mod,
                        sites_per_modulus: n,
                        end_bond: lambda,
                        inter_modulus: li,
                    });
                }
            }
        }
    }
    specs
}

fn oracle_check(s: &mut Settings) -> Result<Outcome, CliError> {
    let max_sites = *s.max_sites.get_or_insert(12);
    if max_sites > modent::oracle::MAX_SITES {
        return Err(CliError::Usage(format!(
            "--max-sites {max_sites} exceeds the oracle cap {}",
            modent::oracle::MAX_SITES
        )));
    }
    let energy_tol = *s.energy_tol.get_or_insert(1e-9);
    let state_tol = *s.state_tol.get_or_insert(1e-8);
    let rows = oracle_grid(max_sites)
        .par_iter()
        .map(|spec| {
            let comparison = compare_with_oracle(&build_couplings(spec)?)?;
            Ok(OracleRow {
                moduli: spec.moduli,
                sites_per_modulus: spec.sites_per_modulus,
                lambda: spec.end_bond,
                lambda_i: spec.inter_modulus,
                pass: comparison.passes(energy_tol, state_tol),
                comparison,
            })
        })
        .collect::<Result<Vec<_>, modent::Error>>()?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    let config = serde_json::to_value(&*s)?;
    let out = match format_or(s, Format::Csv) {
        Format::Json => artifact("oracle_check.json", json_doc(&config, &rows)?),
        Format::Csv => {
            let mut out = format!("# modent {}\n# config: {}\n", modent::VERSION, config);
            out.push_str("N,n,lambda,lambda_I,n_t,energy_deviation,state_deviation,entanglement_deviation,degeneracy_agrees,pass\n");
            for r in &rows {
                let c = &r.comparison;
                out.push_str(&format!(
                    "{},{},{},{},{},{:.3e},{:.3e},{:.3e},{},{}\n",
                    r.moduli,
                    r.sites_per_modulus,
                    r.lambda,
                    r.lambda_i,
                    c.sites,
                    c.energy_deviation,
                    c.state_deviation,
                    c.entanglement_deviation,
                    c.degeneracy_agrees,
                    r.pass
                ));
            }
            artifact("oracle_check.csv", out)
        }
    };
    eprintln!("oracle-check: {} chains, {failed} mismatches", rows.len());
    let failure = (failed > 0).then(|| {
        CliError::OracleMismatch(format!(
            "{failed} of {} chains disagree with the oracle",
            rows.len()
        ))
    });
    Ok(Outcome {
        artifacts: vec![out],
        failure,
    })
}

fn figure(s: &mut Settings, name: FigName) -> Result<Vec<Artifact>, CliError> {
    let format = format_or(s, Format::Csv);
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match name {
        FigName::Fig2a | FigName::Fig2b => {
            let r = if name == FigName::Fig2a {
                recipes::FIG2A
            } else {
                recipes::FIG2B
            };
            let config = json!({"command": "fig", "figure": name, "recipe": r});
            let base = ModularSpec::new(r.moduli, r.sites, r.lambda, 0.0)?;
            let table = sweep_lambda_i(&base, &linear_grid(r.from, r.to, r.step)?)?;
            let label = if name == FigName::Fig2a {
                "fig2a"
            } else {
                "fig2b"
            };
            let contents = match format {
                Format::Csv => sweep_csv(&table, &config),
                Format::Json => json_doc(&config, &table)?,
            };
            Ok(vec![artifact(format!("{label}.{ext}"), contents)])
        }
        FigName::Fig3 => {
            let r = recipes::FIG3;
            let config = json!({"command": "fig", "figure": name, "recipe": r, "threshold": ThresholdOptions::default()});
            let lambdas = linear_grid(r.lambda_from, r.lambda_to, r.lambda_step)?;
            let specs: Vec<ModularSpec> = r
                .sites
                .iter()
                .flat_map(|&n| {
                    lambdas.iter().map(move |&l| ModularSpec {
                        moduli: r.moduli,
                        sites_per_modulus: n,
                        end_bond: l,
                        inter_modulus: 0.0,
                    })
                })
                .collect();
            let results = thresholds(&specs)?;
            Ok(vec![artifact(
                format!("fig3.{ext}"),
                threshold_output(format, &results, &config)?,
            )])
        }
        FigName::Fig4 | FigName::Fig5 => {
            let curves = if name == FigName::Fig4 {
                recipes::FIG4_CURVES
            } else {
                recipes::FIG5_CURVES
            };
            let config = json!({"command": "fig", "figure": name, "curves": curves, "max_moduli": recipes::MAX_MODULI});
            let sweeps = curves
                .iter()
                .map(|c| {
                    sweep_moduli_with(
                        &ModularSpec::new(1, c.sites, c.lambda, c.lambda_i)?,
                        recipes::MAX_MODULI,
                        ASYMPTOTE_TOL,
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            let label = if name == FigName::Fig4 {
                "fig4"
            } else {
                "fig5"
            };
            let mut out = vec![match format {
                Format::Csv => {
                    let tables: Vec<_> = sweeps.iter().map(|w| w.table.clone()).collect();
                    artifact(format!("{label}.csv"), sweep_csv_multi(&tables, &config))
                }
                Format::Json => artifact(format!("{label}.json"), json_doc(&config, &sweeps)?),
            }];
            if name == FigName::Fig5 {
                out.push(fig5_inset(format)?);
            }
            Ok(out)
        }
        FigName::Fig6 => {
            let config = json!({
                "command": "fig",
                "figure": name,
                "curves": recipes::FIG6_CURVES,
                "moduli": [recipes::FIG6_MIN_MODULI, recipes::MAX_MODULI],
                "threshold": ThresholdOptions::default(),
            });
            let specs: Vec<ModularSpec> = recipes::FIG6_CURVES
                .iter()
                .flat_map(|&(n, l)| {
                    (recipes::FIG6_MIN_MODULI..=recipes::MAX_MODULI).map(move |m| ModularSpec {
                        moduli: m,
                        sites_per_modulus: n,
                        end_bond: l,
                        inter_modulus: 0.0,
                    })
                })
                .collect();
            let results = thresholds(&specs)?;
            Ok(vec![artifact(
                format!("fig6.{ext}"),
                threshold_output(format, &results, &config)?,
            )])
        }
    }
}

fn thresholds(specs: &[ModularSpec]) -> Result<Vec<modent::ThresholdResult>, CliError> {
    Ok(specs
        .par_iter()
        .map(|b| find_threshold(b, ThresholdOptions::default()))
        .collect::<Result<Vec<_>, _>>()?)
}

fn threshold_output(
    format: Format,
    results: &[modent::ThresholdResult],
    config: &Value,
) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => threshold_csv(results, config),
        Format::Json => json_doc(config, &results)?,
    })
}

fn fig5_inset(format: Format) -> Result<Artifact, CliError> {
    let config = json!({
        "command": "fig",
        "figure": "fig5-inset",
        "sites_per_modulus": recipes::FIG5_INSET_SITES,
        "lambda": recipes::FIG5_INSET_LAMBDA,
        "decay_factor": recipes::FIG5_INSET_DECAY,
        "max_total_sites": recipes::FIG5_INSET_MAX_SITES,
    });
    let mut points = Vec::new();
    for n in recipes::FIG5_INSET_SITES {
        let shape = ModularSpec::new(1, n, recipes::FIG5_INSET_LAMBDA, 1.0)?;
        let li = matched_inter_modulus(&shape, recipes::FIG5_INSET_DECAY)
            .ok_or_else(|| CliError::Usage(format!("no decay factor for n = {n}")))?;
        let moduli: Vec<usize> = (1..=recipes::FIG5_INSET_MAX_SITES / n).collect();
        points.extend(gap_scan(&shape.with_inter_modulus(li), &moduli)?);
    }
    Ok(match format {
        Format::Csv => artifact("fig5_inset.csv", gap_csv(&points, &config)),
        Format::Json => artifact("fig5_inset.json", json_doc(&config, &points)?),
    })
}
