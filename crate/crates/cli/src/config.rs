//! Config files and flag merging.
//!
//! A config file holds the same settings as the flags, with snake_case keys
//! (`lambda_i`, `max_moduli`, ...). Any flag given on the command line
//! replaces the file value. The merged settings, defaults included, are the
//! resolved config written into every output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{ChainArgs, Cli, Command, Format};
use crate::error::CliError;

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moduli: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tangle_site: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_moduli: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_moduli: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptote_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<crate::args::FigName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

pub fn load(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let bad = |e: String| CliError::Usage(format!("invalid config {}: {e}", path.display()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| bad(e.to_string())),
        Some("json") => serde_json::from_str(&text).map_err(|e| bad(e.to_string())),
        _ => serde_json::from_str(&text)
            .or_else(|_| toml::from_str(&text))
            .map_err(|e| bad(e.to_string())),
    }
}

/// Flags over file values; defaults are filled in later by each command.
pub fn merge(cli: &Cli, file: Settings) -> Settings {
    let mut s = file;
    s.command = Some(cli.command.name().to_string());
    set(&mut s.out, cli.global.out.clone());
    set(&mut s.format, cli.global.format);
    set(&mut s.threads, cli.global.threads);
    match cli.command.clone() {
        Command::Report { chain, tangle_site } => {
            merge_chain(&mut s, chain);
            set(&mut s.tangle_site, tangle_site);
        }
        Command::Spectrum { chain } => merge_chain(&mut s, chain),
        Command::SweepLambdaI {
            base,
            from,
            to,
            step,
        } => {
            set(&mut s.moduli, base.moduli);
            set(&mut s.sites, base.sites);
            set(&mut s.lambda, base.lambda);
            set(&mut s.from, from);
            set(&mut s.to, to);
            set(&mut s.step, step);
        }
        Command::SweepModuli {
            sites,
            lambda,
            lambda_i,
            max_moduli,
            asymptote_tol,
        } => {
            set(&mut s.sites, sites);
            set(&mut s.lambda, lambda);
            set(&mut s.lambda_i, lambda_i);
            set(&mut s.max_moduli, max_moduli);
            set(&mut s.asymptote_tol, asymptote_tol);
        }
        Command::Threshold {
            base,
            scan_step,
            scan_max,
            onset_tol,
            bracket_width,
        } => {
            set(&mut s.moduli, base.moduli);
            set(&mut s.sites, base.sites);
            set(&mut s.lambda, base.lambda);
            set(&mut s.scan_step, scan_step);
            set(&mut s.scan_max, scan_max);
            set(&mut s.onset_tol, onset_tol);
            set(&mut s.bracket_width, bracket_width);
        }
        Command::GapScan {
            sites,
            lambda,
            lambda_i,
            min_moduli,
            max_moduli,
        } => {
            set(&mut s.sites, sites);
            set(&mut s.lambda, lambda);
            set(&mut s.lambda_i, lambda_i);
            set(&mut s.min_moduli, min_moduli);
            set(&mut s.max_moduli, max_moduli);
        }
        Command::OracleCheck {
            max_sites,
            energy_tol,
            state_tol,
        } => {
            set(&mut s.max_sites, max_sites);
            set(&mut s.energy_tol, energy_tol);
            set(&mut s.state_tol, state_tol);
        }
        Command::Fig { name } => s.figure = Some(name),
    }
    s
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

/// Modular flags and `--couplings` exclude each other across file and flags
/// too: whichever kind the flags use drops the other kind from the file.
fn merge_chain(s: &mut Settings, chain: ChainArgs) {
    let modular_flag = chain.moduli.is_some()
        || chain.sites.is_some()
        || chain.lambda.is_some()
        || chain.lambda_i.is_some();
    if chain.couplings.is_some() {
        s.moduli = None;
        s.sites = None;
        s.lambda = None;
        s.lambda_i = None;
    } else if modular_flag {
        s.couplings = None;
    }
    set(&mut s.moduli, chain.moduli);
    set(&mut s.sites, chain.sites);
    set(&mut s.lambda, chain.lambda);
    set(&mut s.lambda_i, chain.lambda_i);
    set(&mut s.couplings, chain.couplings);
}

pub fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}
