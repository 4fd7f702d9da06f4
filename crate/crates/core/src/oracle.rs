//! Dense exact diagonalization of small XX chains.
//!
//! The spin Hamiltonian `½ Σ J (SˣSˣ + SʸSʸ) = Σ (J/4)(σ⁺σ⁻ + σ⁻σ⁺)` conserves
//! the number of up spins, so it is diagonalized sector by sector, each sector
//! split by reflection parity when the couplings are palindromic. Two-site
//! states come from a direct partial trace of the ground state, or of the
//! equal-weight mixture over a degenerate ground manifold. Nothing here goes
//! through the fermion picture.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::chain::{ChainSpec, CouplingVector};
use crate::correlators::PairState;
use crate::entanglement::{
    assemble_report, concurrence, one_tangle, EntanglementReport, ReportParts, TangleBreakdown,
};
use crate::error::{Error, Result};

/// Largest chain the oracle accepts.
pub const MAX_SITES: usize = 14;

/// Energies closer than this to `E_0` belong to the ground manifold.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SectorState {
    /// Number of up spins.
    pub up_spins: usize,
    pub energy: f64,
    /// Amplitudes over the full `2^n_t` basis; bit `i` set means site `i` is up.
    pub amplitudes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub sites: usize,
    pub ground_energy: f64,
    pub first_excited: f64,
    pub ground_states: Vec<SectorState>,
    /// Dimension of every magnetization sector, indexed by up-spin count.
    pub sector_dims: Vec<usize>,
}

impl DenseSpectrum {
    pub fn degeneracy(&self) -> usize {
        self.ground_states.len()
    }

    pub fn gap(&self) -> f64 {
        self.first_excited - self.ground_energy
    }

    /// Two-site reduced density matrix (4×4, basis `↑↑, ↑↓, ↓↑, ↓↓`) of the
    /// ground state, averaged over the degenerate manifold.
    pub fn pair_density(&self, i: usize, j: usize) -> DMatrix<f64> {
        let mut rho = DMatrix::zeros(4, 4);
        let weight = 1.0 / self.ground_states.len() as f64;
        let (bi, bj) = (1usize << i, 1usize << j);
        // local index 0 = ↑↑ … 3 = ↓↓
        let local = |s: usize| (usize::from(s & bi == 0) << 1) | usize::from(s & bj == 0);
        for gs in &self.ground_states {
            let psi = &gs.amplitudes;
            for rest in 0..psi.len() {
                if rest & (bi | bj) != 0 {
                    continue;
                }
                let configs = [rest | bi | bj, rest | bi, rest | bj, rest];
                for a in configs {
                    for b in configs {
                        rho[(local(a), local(b))] += weight * psi[a] * psi[b];
                    }
                }
            }
        }
        rho
    }

    pub fn pair_state(&self, i: usize, j: usize) -> Result<PairState> {
        if i >= j || j >= self.sites {
            return Err(Error::InvalidSites {
                i,
                j,
                sites: self.sites,
            });
        }
        Ok(PairState::from_density_matrix(
            (i, j),
            &self.pair_density(i, j),
        ))
    }

    /// `⟨σᶻ_i⟩` in the (mixed) ground state.
    pub fn sigma_z(&self, i: usize) -> f64 {
        let weight = 1.0 / self.ground_states.len() as f64;
        self.ground_states
            .iter()
            .map(|gs| {
                gs.amplitudes
                    .iter()
                    .enumerate()
                    .map(|(s, a)| if s & (1 << i) != 0 { a * a } else { -a * a })
                    .sum::<f64>()
            })
            .sum::<f64>()
            * weight
    }
}

fn sector_basis(sites: usize, up: usize) -> Vec<usize> {
    (0..1usize << sites)
        .filter(|s| s.count_ones() as usize == up)
        .collect()
}

fn reflect(s: usize, sites: usize) -> usize {
    s.reverse_bits() >> (usize::BITS as usize - sites)
}

/// Orthonormal basis of one symmetry block; each vector is a list of
/// `(configuration, coefficient)`.
struct Block {
    up: usize,
    vectors: Vec<Vec<(usize, f64)>>,
}

/// Magnetization sector `up`, split further into reflection-even and
/// reflection-odd blocks when the couplings are exactly palindromic.
/// Near-degenerate levels of mirror-symmetric chains usually have opposite
/// parity, so the split keeps the dense eigenvectors well conditioned.
fn blocks(sites: usize, up: usize, mirror: bool) -> Vec<Block> {
    let basis = sector_basis(sites, up);
    if !mirror {
        return vec![Block {
            up,
            vectors: basis.iter().map(|&s| vec![(s, 1.0)]).collect(),
        }];
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (mut even, mut odd) = (Vec::new(), Vec::new());
    for &s in &basis {
        let t = reflect(s, sites);
        if s == t {
            even.push(vec![(s, 1.0)]);
        } else if s < t {
            even.push(vec![(s, r), (t, r)]);
            odd.push(vec![(s, r), (t, -r)]);
        }
    }
    [even, odd]
        .into_iter()
        .filter(|v| !v.is_empty())
        .map(|vectors| Block { up, vectors })
        .collect()
}

fn block_hamiltonian(couplings: &[f64], sites: usize, block: &Block) -> Mat<f64> {
    let dim = block.vectors.len();
    let mut row_of = vec![usize::MAX; 1 << sites];
    let mut coef = vec![0.0; 1 << sites];
    for (a, v) in block.vectors.iter().enumerate() {
        for &(s, c) in v {
            row_of[s] = a;
            coef[s] = c;
        }
    }
    let mut h = Mat::zeros(dim, dim);
    for (col, v) in block.vectors.iter().enumerate() {
        for &(s, cs) in v {
            for (bond, &j) in couplings.iter().enumerate() {
                let pair = (1usize << bond) | (1usize << (bond + 1));
                let bits = s & pair;
                if bits != 0 && bits != pair {
                    let t = s ^ pair;
                    let row = row_of[t];
                    if row != usize::MAX {
                        h[(row, col)] += coef[t] * cs * j / 4.0;
                    }
                }
            }
        }
    }
    h
}

/// Diagonalizes the chain exactly, block by block.
pub fn ed_solve(c: &CouplingVector) -> Result<DenseSpectrum> {
    let sites = c.sites();
    if sites > MAX_SITES {
        return Err(Error::OracleTooLarge {
            sites,
            cap: MAX_SITES,
        });
    }
    let couplings = c.as_slice();
    let mirror = couplings.iter().eq(couplings.iter().rev());
    let solved = (0..=sites)
        .into_par_iter()
        .flat_map_iter(|up| blocks(sites, up, mirror))
        .map(|block| {
            let h = block_hamiltonian(couplings, sites, &block);
            let values = h
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|_| Error::NoConvergence(h.nrows()))?;
            Ok((block, h, values))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut levels: Vec<f64> = solved
        .iter()
        .flat_map(|(_, _, v)| v.iter().copied())
        .collect();
    levels.sort_by(f64::total_cmp);
    let ground_energy = levels[0];
    let first_excited = levels[1];

    let mut ground_states = Vec::new();
    for (block, h, values) in &solved {
        if values.iter().all(|&e| e - ground_energy > DEGENERACY_TOL) {
            continue;
        }
        let eig = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence(h.nrows()))?;
        let (energies, vectors) = (eig.S(), eig.U());
        for k in 0..h.nrows() {
            let energy = energies[k];
            if energy - ground_energy <= DEGENERACY_TOL {
                let mut amplitudes = vec![0.0; 1 << sites];
                let v = vectors.col(k);
                let norm = v.norm_l2();
                for (idx, components) in block.vectors.iter().enumerate() {
                    for &(s, c) in components {
                        amplitudes[s] += c * v[idx] / norm;
                    }
                }
                ground_states.push(SectorState {
                    up_spins: block.up,
                    energy,
                    amplitudes,
                });
            }
        }
    }
    let sector_dims = (0..=sites)
        .map(|up| sector_basis(sites, up).len())
        .collect();
    Ok(DenseSpectrum {
        sites,
        ground_energy,
        first_excited,
        ground_states,
        sector_dims,
    })
}

/// Entanglement report computed entirely from the dense ground state.
pub fn ed_report(c: &CouplingVector) -> Result<EntanglementReport> {
    ed_report_from(c, &ed_solve(c)?)
}

/// Report built from an already diagonalized chain.
pub fn ed_report_from(c: &CouplingVector, spectrum: &DenseSpectrum) -> Result<EntanglementReport> {
    let n = spectrum.sites;
    let pairs_from_first = (1..n)
        .map(|j| spectrum.pair_state(0, j))
        .collect::<Result<Vec<_>>>()?;
    let sum: f64 = pairs_from_first
        .iter()
        .map(|p| concurrence(p).map(|x| x * x))
        .sum::<Result<f64>>()?;
    let tau1 = one_tangle(spectrum.sigma_z(0));
    let raw = tau1 - sum;
    let residual = if raw < -crate::entanglement::CLAMP_TOL {
        return Err(Error::NonPhysical(format!("residual tangle {raw:e}")));
    } else {
        raw.max(0.0)
    };
    let degenerate = spectrum.degeneracy() > 1;
    assemble_report(ReportParts {
        spec: ChainSpec::Explicit {
            couplings: c.as_slice().to_vec(),
        },
        couplings: c.clone(),
        pairs_from_first,
        tangle: TangleBreakdown {
            site: 0,
            one_tangle: tau1,
            sum_squared_concurrence: sum,
            residual,
        },
        ground_energy: spectrum.ground_energy,
        gap: if degenerate { 0.0 } else { spectrum.gap() },
        zero_modes: 0,
        degenerate,
        method: "exact-diagonalization",
    })
}

/// Largest deviations between the free-fermion path and the oracle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleComparison {
    pub sites: usize,
    /// Ground energy and gap.
    pub energy_deviation: f64,
    /// Every element of every two-site density matrix.
    pub state_deviation: f64,
    /// Every pairwise concurrence and the residual tangle at site 1.
    pub entanglement_deviation: f64,
    pub degeneracy_agrees: bool,
}

impl OracleComparison {
    pub fn passes(&self, energy_tol: f64, state_tol: f64) -> bool {
        self.degeneracy_agrees
            && self.energy_deviation <= energy_tol
            && self.state_deviation <= state_tol
            && self.entanglement_deviation <= state_tol
    }
}

/// Solves `c` both ways and records the worst disagreement.
pub fn compare_with_oracle(c: &CouplingVector) -> Result<OracleComparison> {
    let basis = crate::fermion::solve(c)?;
    let dense = ed_solve(c)?;
    let ed_gap = if dense.degeneracy() > 1 {
        0.0
    } else {
        dense.gap()
    };
    let energy_deviation = (basis.ground_energy() - dense.ground_energy)
        .abs()
        .max((basis.energy_gap() - ed_gap).abs());

    let q = crate::correlators::QMatrix::from_basis(&basis);
    let (mut state_deviation, mut entanglement_deviation) = (0.0f64, 0.0f64);
    for i in 0..c.sites() {
        for j in i + 1..c.sites() {
            let ff = crate::correlators::pair_from_q(&q, i, j)?;
            state_deviation =
                state_deviation.max((ff.density_matrix() - dense.pair_density(i, j)).amax());
            let d = (concurrence(&ff)? - concurrence(&dense.pair_state(i, j)?)?).abs();
            entanglement_deviation = entanglement_deviation.max(d);
        }
    }
    let spec = ChainSpec::Explicit {
        couplings: c.as_slice().to_vec(),
    };
    let ff = crate::entanglement::report_from_basis(spec, &basis, Default::default())?;
    let ed = ed_report_from(c, &dense)?;
    entanglement_deviation =
        entanglement_deviation.max((ff.residual_tangle - ed.residual_tangle).abs());
    Ok(OracleComparison {
        sites: c.sites(),
        energy_deviation,
        state_deviation,
        entanglement_deviation,
        degeneracy_agrees: basis.is_degenerate() == (dense.degeneracy() > 1),
    })
}
