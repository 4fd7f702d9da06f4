//! Parameter scans over modular chains: inter-modulus coupling sweeps,
//! onset thresholds, and scaling with the number of moduli.
//!
//! Grid points are evaluated in parallel and merged in grid order, so tables
//! are bit-identical from run to run regardless of scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_couplings, ChainSpec, ModularSpec};
use crate::entanglement::{end_to_end_concurrence, report, EntanglementReport, CONCURRENCE_ZERO};
use crate::error::{Error, Result};

/// Concurrence level separating "no entanglement" from onset.
pub const ONSET_TOL: f64 = 1e-8;
/// Default asymptote convergence criterion for moduli sweeps.
pub const ASYMPTOTE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub moduli: usize,
    pub sites_per_modulus: usize,
    pub end_bond: f64,
    pub inter_modulus: f64,
    /// `C_{1,n_t}`
    pub c_end: f64,
    /// `C_{1,n}` of one isolated modulus.
    pub c_single_modulus: f64,
    /// `C_{1,2}`
    pub c_nn_end: f64,
    pub sqrt_tau_res: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub report: EntanglementReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub code_version: String,
    pub base: ModularSpec,
    pub onset_tolerance: f64,
    pub concurrence_zero: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Provenance {
    pub fn new(base: ModularSpec) -> Self {
        Self {
            tool: "modent".into(),
            code_version: crate::VERSION.into(),
            base,
            onset_tolerance: ONSET_TOL,
            concurrence_zero: CONCURRENCE_ZERO,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

impl SweepTable {
    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn axis_values(&self) -> Vec<f64> {
        self.column(|r| r.axis_value)
    }
}

/// `start, start + step, …` up to and including `stop` (within half a step).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(Error::InvalidGrid(format!(
            "bad range {start}..{stop} step {step}"
        )));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidGrid(format!(
            "grid value {x} must be finite and >= 0"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly ascending".into()));
    }
    Ok(())
}

fn row(axis_value: f64, spec: ModularSpec, c_single_modulus: f64) -> Result<SweepRow> {
    let r = report(&ChainSpec::Modular(spec))?;
    Ok(SweepRow {
        axis_value,
        moduli: spec.moduli,
        sites_per_modulus: spec.sites_per_modulus,
        end_bond: spec.end_bond,
        inter_modulus: spec.inter_modulus,
        c_end: r.end_to_end_concurrence,
        c_single_modulus,
        c_nn_end: r.pairwise_from_first[0],
        sqrt_tau_res: r.sqrt_residual_tangle,
        gap: r.gap,
        degenerate: r.degenerate,
        report: r,
    })
}

fn single_modulus_concurrence(base: &ModularSpec) -> Result<f64> {
    end_to_end_concurrence(&build_couplings(&base.single_modulus())?)
}

/// Scans the inter-modulus coupling; the `inter_modulus` field of `base` is
/// ignored.
pub fn sweep_lambda_i(base: &ModularSpec, grid: &[f64]) -> Result<SweepTable> {
    validate_grid(grid)?;
    base.with_inter_modulus(0.0).validate()?;
    let single = single_modulus_concurrence(base)?;
    let rows = grid
        .par_iter()
        .map(|&li| row(li, base.with_inter_modulus(li), single))
        .collect::<Result<Vec<_>>>()?;
    let mut provenance = Provenance::new(*base);
    if base.sites_per_modulus % 2 == 1 {
        provenance.note = Some("odd number of sites per modulus".into());
    }
    Ok(SweepTable {
        axis: "lambda_I".into(),
        rows,
        provenance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub step: f64,
    pub max: f64,
    pub tolerance: f64,
    pub bracket_width: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            step: 0.05,
            max: 8.0,
            tolerance: ONSET_TOL,
            bracket_width: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdOutcome {
    Found,
    /// End-to-end concurrence never exceeds the tolerance on the scan.
    NoThresholdInRange,
    /// Already entangled at `λ_I = 0` (only possible for a single modulus).
    EntangledAtZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub base: ModularSpec,
    pub outcome: ThresholdOutcome,
    /// Bracket midpoint `λ_I^th`.
    pub threshold: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    /// Concurrence at the bracket ends.
    pub bracket_concurrence: Option<(f64, f64)>,
    pub tolerance: f64,
    /// `λ_I^th / λ`
    pub ratio: Option<f64>,
    pub converged: bool,
    pub evaluations: usize,
}

/// Onset coupling of end-to-end entanglement: first sign change of
/// `[C_{1,n_t} > tol]` on an ascending coarse grid, refined by bisection.
pub fn find_threshold(base: &ModularSpec, options: ThresholdOptions) -> Result<ThresholdResult> {
    base.with_inter_modulus(0.0).validate()?;
    let grid = linear_grid(options.step, options.max, options.step)?;
    let c_at = |li: f64| -> Result<f64> {
        end_to_end_concurrence(&build_couplings(&base.with_inter_modulus(li))?)
    };

    let coarse = grid
        .par_iter()
        .map(|&li| c_at(li))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = coarse.len();
    let mut result = ThresholdResult {
        base: *base,
        outcome: ThresholdOutcome::NoThresholdInRange,
        threshold: None,
        bracket: None,
        bracket_concurrence: None,
        tolerance: options.tolerance,
        ratio: None,
        converged: false,
        evaluations,
    };
    let Some(first) = coarse.iter().position(|&c| c > options.tolerance) else {
        return Ok(result);
    };

    let (mut lo, mut c_lo) = if first == 0 {
        evaluations += 1;
        (0.0, c_at(0.0)?)
    } else {
        (grid[first - 1], coarse[first - 1])
    };
    if c_lo > options.tolerance {
        result.outcome = ThresholdOutcome::EntangledAtZero;
        result.threshold = Some(0.0);
        result.ratio = Some(0.0);
        result.converged = true;
        result.evaluations = evaluations;
        return Ok(result);
    }
    let (mut hi, mut c_hi) = (grid[first], coarse[first]);
    // bisection; stops on width or when the midpoint stops moving
    while hi - lo > options.bracket_width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let c = c_at(mid)?;
        evaluations += 1;
        if c > options.tolerance {
            hi = mid;
            c_hi = c;
        } else {
            lo = mid;
            c_lo = c;
        }
    }
    let threshold = 0.5 * (lo + hi);
    result.outcome = ThresholdOutcome::Found;
    result.threshold = Some(threshold);
    result.bracket = Some((lo, hi));
    result.bracket_concurrence = Some((c_lo, c_hi));
    result.ratio = Some(threshold / base.end_bond);
    result.converged = hi - lo <= options.bracket_width;
    result.evaluations = evaluations;
    Ok(result)
}

/// Least-squares line through `(x, ln gap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGapFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_log_gap(points: &[(f64, f64)]) -> Option<LogGapFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, g)| *g > 0.0)
        .map(|&(x, g)| (x, g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogGapFit {
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuliSweep {
    pub table: SweepTable,
    /// `C_{1,n_t}` at the largest `N`.
    pub asymptote: f64,
    pub converged: bool,
    pub convergence_tolerance: f64,
    /// Fit of `ln gap` against `N` over all nondegenerate rows.
    pub gap_fit: Option<LogGapFit>,
}

/// Reports for `N = 1..=n_max`; the `moduli` field of `base` is ignored.
pub fn sweep_moduli(base: &ModularSpec, n_max: usize) -> Result<ModuliSweep> {
    sweep_moduli_with(base, n_max, ASYMPTOTE_TOL)
}

pub fn sweep_moduli_with(
    base: &ModularSpec,
    n_max: usize,
    convergence_tolerance: f64,
) -> Result<ModuliSweep> {
    if n_max < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least two moduli, got N_max = {n_max}"
        )));
    }
    base.with_moduli(1).validate()?;
    let single = single_modulus_concurrence(base)?;
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n_mod| row(n_mod as f64, base.with_moduli(n_mod), single))
        .collect::<Result<Vec<_>>>()?;
    let last = rows[n_max - 1].c_end;
    let prev = rows[n_max - 2].c_end;
    let gap_fit = fit_log_gap(
        &rows
            .iter()
            .map(|r| (r.moduli as f64, r.gap))
            .collect::<Vec<_>>(),
    );
    let mut provenance = Provenance::new(*base);
    if base.sites_per_modulus % 2 == 1 {
        provenance.note = Some("odd number of sites per modulus".into());
    }
    Ok(ModuliSweep {
        table: SweepTable {
            axis: "N".into(),
            rows,
            provenance,
        },
        asymptote: last,
        converged: (last - prev).abs() < convergence_tolerance,
        convergence_tolerance,
        gap_fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub moduli: usize,
    pub sites_per_modulus: usize,
    pub total_sites: usize,
    pub gap: f64,
}

/// Energy gap for each `N` in `moduli`; cheaper than a full sweep.
pub fn gap_scan(base: &ModularSpec, moduli: &[usize]) -> Result<Vec<GapPoint>> {
    moduli
        .par_iter()
        .map(|&n_mod| {
            let spec = base.with_moduli(n_mod);
            let basis = crate::fermion::solve(&build_couplings(&spec)?)?;
            Ok(GapPoint {
                moduli: n_mod,
                sites_per_modulus: spec.sites_per_modulus,
                total_sites: spec.total_sites(),
                gap: basis.energy_gap(),
            })
        })
        .collect()
}

/// Per-modulus decay of the zero-energy edge mode: the product of
/// `|J_even / J_odd|` over one period of the bipartite chain (even `n` only).
///
/// Two chains with equal factors sit in the same correlation regime: their
/// edge-mode splitting shrinks by the same amount per added modulus.
pub fn modulus_decay_factor(spec: &ModularSpec) -> Option<f64> {
    if spec.sites_per_modulus % 2 == 1 {
        return None;
    }
    let period = build_couplings(&spec.with_moduli(2)).ok()?;
    let c = &period.as_slice()[..spec.sites_per_modulus];
    Some(c.chunks(2).map(|p| (p[0] / p[1]).abs()).product())
}

/// The inter-modulus coupling that gives `spec`'s modulus shape the
/// requested decay factor.
pub fn matched_inter_modulus(spec: &ModularSpec, decay: f64) -> Option<f64> {
    let unit = modulus_decay_factor(&spec.with_inter_modulus(1.0))?;
    Some(unit / decay)
}
