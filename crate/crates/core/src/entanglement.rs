//! Concurrence, tangles and per-chain entanglement reports.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, CouplingVector};
use crate::correlators::{pair_from_q, PairState, QMatrix, STATE_TOL};
use crate::error::{Error, Result};
use crate::fermion::{solve, ModeBasis, CONVENTION};

/// Round-off window for clamping tiny negative populations and tangles.
pub const CLAMP_TOL: f64 = 1e-8;

/// Concurrences below this are reported as exactly zero in flat outputs.
pub const CONCURRENCE_ZERO: f64 = 1e-10;

pub const SCHEMA_VERSION: u32 = 1;

fn clamp_nonneg(x: f64, what: &str, sites: (usize, usize)) -> Result<f64> {
    if x < -CLAMP_TOL {
        Err(Error::NonPhysical(format!(
            "{what} = {x:e} at sites {sites:?}"
        )))
    } else {
        Ok(x.max(0.0))
    }
}

/// Wootters concurrence of an X state:
/// `C = 2·max(0, |z| - √(p↑↑ p↓↓), |w| - √(p↑↓ p↓↑))`.
pub fn concurrence(p: &PairState) -> Result<f64> {
    let sum: f64 = p.populations().iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > STATE_TOL {
        return Err(Error::NonPhysical(format!(
            "populations sum to {sum} at sites {:?}",
            p.sites
        )));
    }
    let uu = clamp_nonneg(p.p_uu, "p_uu", p.sites)?;
    let ud = clamp_nonneg(p.p_ud, "p_ud", p.sites)?;
    let du = clamp_nonneg(p.p_du, "p_du", p.sites)?;
    let dd = clamp_nonneg(p.p_dd, "p_dd", p.sites)?;
    let c = 2.0
        * (p.z.abs() - (uu * dd).sqrt())
            .max(p.w.abs() - (ud * du).sqrt())
            .max(0.0);
    Ok(c.min(1.0))
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let vals = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Wootters concurrence of an arbitrary real two-qubit density matrix from
/// the spin-flip construction: the `λ_k` are the singular values of
/// `√ρ · √ρ̃` with `ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ)`.
pub fn concurrence_of_density(rho: &DMatrix<f64>) -> f64 {
    let mut yy = DMatrix::zeros(4, 4);
    yy[(0, 3)] = -1.0;
    yy[(1, 2)] = 1.0;
    yy[(2, 1)] = 1.0;
    yy[(3, 0)] = -1.0;
    let sqrt_rho = psd_sqrt(rho);
    // ρ is real, so ρ* = ρ and √ρ̃ = Y √ρ Y
    let sqrt_tilde = &yy * &sqrt_rho * &yy;
    let mut lambdas: Vec<f64> = (sqrt_rho * sqrt_tilde)
        .singular_values()
        .iter()
        .copied()
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// General-path concurrence of a pair state (validation route).
pub fn concurrence_general(p: &PairState) -> f64 {
    concurrence_of_density(&p.density_matrix())
}

/// `τ₁ = 4 det ρ_i = 1 - ⟨σᶻ_i⟩²` for the U(1)-symmetric single-site state.
pub fn one_tangle(sigma_z: f64) -> f64 {
    (1.0 - sigma_z * sigma_z).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangleBreakdown {
    pub site: usize,
    pub one_tangle: f64,
    pub sum_squared_concurrence: f64,
    pub residual: f64,
}

impl TangleBreakdown {
    fn new(site: usize, one_tangle: f64, sum_squared_concurrence: f64) -> Result<Self> {
        let raw = one_tangle - sum_squared_concurrence;
        let residual = clamp_nonneg(raw, "residual tangle", (site, site))?;
        Ok(Self {
            site,
            one_tangle,
            sum_squared_concurrence,
            residual,
        })
    }
}

/// CKW residual tangle `τ₁(i) - Σ_{j≠i} C²_ij`.
pub fn residual_tangle(m: &ModeBasis, i: usize) -> Result<TangleBreakdown> {
    let q = QMatrix::from_basis(m);
    let n = q.sites();
    if i >= n {
        return Err(Error::InvalidSites { i, j: i, sites: n });
    }
    let squares: Vec<f64> = (0..n)
        .into_par_iter()
        .filter(|&j| j != i)
        .map(|j| {
            let p = pair_from_q(&q, i.min(j), i.max(j))?;
            concurrence(&p).map(|c| c * c)
        })
        .collect::<Result<_>>()?;
    TangleBreakdown::new(i, one_tangle(q.sigma_z(i)), squares.iter().sum())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Site whose residual tangle is reported (0-based).
    pub tangle_site: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub schema_version: u32,
    pub code_version: String,
    pub method: String,
    pub convention: String,
    pub clamp_tolerance: f64,
    pub state_tolerance: f64,
}

impl SolverMetadata {
    pub fn new(method: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            code_version: crate::VERSION.to_string(),
            method: method.to_string(),
            convention: CONVENTION.to_string(),
            clamp_tolerance: CLAMP_TOL,
            state_tolerance: STATE_TOL,
        }
    }
}

/// Ground-state entanglement observables of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub spec: ChainSpec,
    pub sites: usize,
    pub mirror_symmetric: bool,
    pub end_to_end_concurrence: f64,
    /// `C_{1,j}` for `j = 2..=n_t`.
    pub pairwise_from_first: Vec<f64>,
    pub one_tangle: f64,
    pub residual_tangle: f64,
    pub sqrt_residual_tangle: f64,
    pub tangle: TangleBreakdown,
    pub ground_energy: f64,
    pub gap: f64,
    pub zero_modes: usize,
    pub degenerate: bool,
    pub metadata: SolverMetadata,
}

impl EntanglementReport {
    /// Concurrence `C_{1,j}` for a 0-based partner site `j ≥ 1`.
    pub fn concurrence_with_first(&self, j: usize) -> f64 {
        self.pairwise_from_first[j - 1]
    }
}

/// Raw ingredients of a report, shared by the free-fermion and the
/// exact-diagonalization routes.
pub struct ReportParts {
    pub spec: ChainSpec,
    pub couplings: CouplingVector,
    pub pairs_from_first: Vec<PairState>,
    pub tangle: TangleBreakdown,
    pub ground_energy: f64,
    pub gap: f64,
    pub zero_modes: usize,
    pub degenerate: bool,
    pub method: &'static str,
}

pub fn assemble_report(parts: ReportParts) -> Result<EntanglementReport> {
    let pairwise = parts
        .pairs_from_first
        .iter()
        .map(concurrence)
        .collect::<Result<Vec<_>>>()?;
    let residual = parts.tangle.residual;
    let tangle_one = parts.tangle.one_tangle;
    Ok(EntanglementReport {
        sites: parts.couplings.sites(),
        mirror_symmetric: parts.couplings.mirror_symmetry().symmetric,
        end_to_end_concurrence: *pairwise.last().expect("chain has at least two sites"),
        pairwise_from_first: pairwise,
        one_tangle: tangle_one,
        residual_tangle: residual,
        sqrt_residual_tangle: residual.sqrt(),
        tangle: parts.tangle,
        ground_energy: parts.ground_energy,
        gap: parts.gap,
        zero_modes: parts.zero_modes,
        degenerate: parts.degenerate,
        metadata: SolverMetadata::new(parts.method),
        spec: parts.spec,
    })
}

pub fn report(spec: &ChainSpec) -> Result<EntanglementReport> {
    report_with(spec, ReportOptions::default())
}

pub fn report_with(spec: &ChainSpec, options: ReportOptions) -> Result<EntanglementReport> {
    let couplings = spec.couplings()?;
    let basis = solve(&couplings)?;
    report_from_basis(spec.clone(), &basis, options)
}

pub fn report_from_basis(
    spec: ChainSpec,
    basis: &ModeBasis,
    options: ReportOptions,
) -> Result<EntanglementReport> {
    let q = QMatrix::from_basis(basis);
    let n = q.sites();
    let site = options.tangle_site;
    if site >= n {
        return Err(Error::InvalidSites {
            i: site,
            j: site,
            sites: n,
        });
    }
    let pairs_from_first = (1..n)
        .into_par_iter()
        .map(|j| pair_from_q(&q, 0, j))
        .collect::<Result<Vec<_>>>()?;
    let tangle = if site == 0 {
        let sum: f64 = pairs_from_first
            .iter()
            .map(|p| concurrence(p).map(|c| c * c))
            .sum::<Result<f64>>()?;
        TangleBreakdown::new(0, one_tangle(q.sigma_z(0)), sum)?
    } else {
        residual_tangle(basis, site)?
    };
    assemble_report(ReportParts {
        spec,
        couplings: basis.couplings().clone(),
        pairs_from_first,
        tangle,
        ground_energy: basis.ground_energy(),
        gap: basis.energy_gap(),
        zero_modes: basis.zero_mode_count(),
        degenerate: basis.is_degenerate(),
        method: "free-fermion",
    })
}

/// `C_{1,n_t}` alone: one determinant instead of a full report.
pub fn end_to_end_concurrence(couplings: &CouplingVector) -> Result<f64> {
    let basis = solve(couplings)?;
    let q = QMatrix::from_basis(&basis);
    concurrence(&pair_from_q(&q, 0, q.sites() - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ModularSpec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn x_state(p: [f64; 4], z: f64, w: f64) -> PairState {
        let mut s = PairState::from_correlators((0, 1), 0.0, 0.0, 0.0, 0.0, 0.0);
        s.p_uu = p[0];
        s.p_ud = p[1];
        s.p_du = p[2];
        s.p_dd = p[3];
        s.z = z;
        s.w = w;
        s
    }

    #[test]
    fn singlet_is_maximally_entangled() {
        let s = x_state([0.0, 0.5, 0.5, 0.0], -0.5, 0.0);
        assert_eq!(concurrence(&s).unwrap(), 1.0);
        assert!((concurrence_general(&s) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn three_site_end_mixture_is_separable() {
        let s = x_state([0.25; 4], 0.25, 0.0);
        assert_eq!(concurrence(&s).unwrap(), 0.0);
        assert!(concurrence_general(&s) < 1e-10);
    }

    #[test]
    fn product_state_is_separable() {
        let s = x_state([0.1, 0.2, 0.3, 0.4], 0.0, 0.0);
        assert_eq!(concurrence(&s).unwrap(), 0.0);
        assert!(concurrence_general(&s) < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_states() {
        assert!(concurrence(&x_state([0.3, 0.3, 0.3, 0.3], 0.0, 0.0)).is_err());
        assert!(concurrence(&x_state([-0.1, 0.6, 0.5, 0.0], 0.0, 0.0)).is_err());
        // round-off sized negatives are clamped
        assert!(concurrence(&x_state([-1e-12, 0.5, 0.5, 1e-12], -0.5, 0.0)).is_ok());
    }

    fn random_x_state(rng: &mut impl Rng) -> PairState {
        // random populations on the simplex, coherences inside the positivity cone
        let raw: [f64; 4] = std::array::from_fn(|_| -rng.random::<f64>().ln());
        let total: f64 = raw.iter().sum();
        let p = raw.map(|x| x / total);
        let z = (p[1] * p[2]).sqrt() * rng.random_range(-1.0..1.0);
        let w = (p[0] * p[3]).sqrt() * rng.random_range(-1.0..1.0);
        x_state(p, z, w)
    }

    #[test]
    fn general_wootters_path_agrees_on_random_x_states() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let s = random_x_state(&mut rng);
            worst = worst.max((concurrence(&s).unwrap() - concurrence_general(&s)).abs());
        }
        assert!(worst <= 1e-10, "worst deviation {worst:e}");
    }

    #[test]
    fn two_site_chain_anchor() {
        let r = report(&ChainSpec::modular(1, 2, 1.0, 0.0).unwrap()).unwrap();
        assert!((r.end_to_end_concurrence - 1.0).abs() <= 1e-12);
        assert!((r.gap - 0.25).abs() <= 1e-12);
        assert!(r.residual_tangle.abs() <= 1e-12);
        assert!((r.one_tangle - 1.0).abs() <= 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn odd_moduli_do_not_share_end_entanglement() {
        let r = report(&ChainSpec::modular(2, 7, 0.1, 0.5).unwrap()).unwrap();
        assert!(r.end_to_end_concurrence <= 1e-10);
    }

    #[test]
    fn odd_moduli_keep_multipartite_entanglement() {
        for li in [0.05, 0.2, 0.5, 1.0, 2.0] {
            let r = report(&ChainSpec::modular(2, 7, 0.1, li).unwrap()).unwrap();
            assert!(r.residual_tangle > 0.0, "λ_I = {li}");
        }
    }

    #[test]
    fn decoupled_even_moduli_have_no_end_to_end_entanglement() {
        for n in [2, 4, 6, 8] {
            for n_mod in 2..=4 {
                let r = report(&ChainSpec::modular(n_mod, n, 0.3, 0.0).unwrap()).unwrap();
                assert!(r.end_to_end_concurrence <= 1e-12);
            }
        }
    }

    #[test]
    fn tangle_for_other_sites() {
        let spec = ChainSpec::modular(2, 4, 0.1, 0.5).unwrap();
        let basis = solve(&spec.couplings().unwrap()).unwrap();
        let r = report_from_basis(spec.clone(), &basis, ReportOptions { tangle_site: 7 }).unwrap();
        // mirror symmetry: last site behaves like the first
        let first = residual_tangle(&basis, 0).unwrap();
        assert!((r.tangle.residual - first.residual).abs() < 1e-10);
        assert_eq!(r.tangle.site, 7);
        assert!(report_from_basis(spec, &basis, ReportOptions { tangle_site: 8 }).is_err());
    }

    #[test]
    fn end_to_end_shortcut_matches_report() {
        let spec = ModularSpec::new(3, 4, 0.2, 0.9).unwrap();
        let r = report(&spec.into()).unwrap();
        let c = end_to_end_concurrence(&crate::build_couplings(&spec).unwrap()).unwrap();
        assert_eq!(c, r.end_to_end_concurrence);
    }

    proptest! {
        #[test]
        fn monogamy_on_random_symmetric_chains(half in prop::collection::vec(0.05f64..3.0, 1..8)) {
            // palindromic couplings with an even number of sites
            let mut c = half.clone();
            c.push(1.0);
            c.extend(half.iter().rev());
            let r = report(&ChainSpec::explicit(c).unwrap()).unwrap();
            let sum: f64 = r.pairwise_from_first.iter().map(|x| x * x).sum();
            prop_assert!(sum <= r.one_tangle + 1e-8);
            prop_assert!(r.pairwise_from_first.iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }
}
