//! Spin–spin correlators from the fermionic correlation matrix.
//!
//! With `Q = 2G - 1`, Wick's theorem gives
//! `⟨σᶻ_l⟩ = Q_ll`, `⟨σᶻ_i σᶻ_j⟩ = Q_ii Q_jj - Q_ij Q_ji`, and the string
//! correlators `⟨σˣ_i σˣ_j⟩`, `⟨σʸ_i σʸ_j⟩` as determinants of the `(j-i)`-square
//! blocks of `Q` shifted by one row or column. Sites are 0-based.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::ModeBasis;

/// Tolerance on population sums and positivity of a two-site state.
pub const STATE_TOL: f64 = 1e-10;

/// Contraction matrix `Q = 2G - 1`.
#[derive(Debug, Clone)]
pub struct QMatrix(DMatrix<f64>);

impl QMatrix {
    pub fn from_basis(m: &ModeBasis) -> Self {
        let g = m.correlation();
        let n = g.nrows();
        Self(DMatrix::from_fn(n, n, |i, j| {
            2.0 * g[(i, j)] - if i == j { 1.0 } else { 0.0 }
        }))
    }

    pub fn sites(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.0[(l, m)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `⟨σᶻ_l⟩`.
    pub fn sigma_z(&self, l: usize) -> f64 {
        self.0[(l, l)]
    }

    /// Determinant of the square block with rows starting at `row0` and
    /// columns starting at `col0`.
    pub fn block_determinant(&self, row0: usize, col0: usize, size: usize) -> f64 {
        if size == 1 {
            return self.0[(row0, col0)];
        }
        self.0
            .view((row0, col0), (size, size))
            .into_owned()
            .lu()
            .determinant()
    }

    /// `⟨σˣ_i σˣ_j⟩` for `i < j`: rows `i..j`, columns `i+1..=j`.
    pub fn sigma_xx(&self, i: usize, j: usize) -> f64 {
        self.block_determinant(i, i + 1, j - i)
    }

    /// `⟨σʸ_i σʸ_j⟩` for `i < j`: rows `i+1..=j`, columns `i..j`.
    pub fn sigma_yy(&self, i: usize, j: usize) -> f64 {
        self.block_determinant(i + 1, i, j - i)
    }

    pub fn sigma_zz(&self, i: usize, j: usize) -> f64 {
        self.0[(i, i)] * self.0[(j, j)] - self.0[(i, j)] * self.0[(j, i)]
    }
}

/// Two-site reduced state in X form, in the basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`
/// with `↑` the `σᶻ = +1` state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub sites: (usize, usize),
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
    /// `⟨↑↓|ρ|↓↑⟩`
    pub z: f64,
    /// `⟨↑↑|ρ|↓↓⟩`
    pub w: f64,
    pub sz_i: f64,
    pub sz_j: f64,
    pub szz: f64,
    pub sxx: f64,
    pub syy: f64,
}

impl PairState {
    pub fn from_correlators(
        sites: (usize, usize),
        sz_i: f64,
        sz_j: f64,
        szz: f64,
        sxx: f64,
        syy: f64,
    ) -> Self {
        Self {
            sites,
            p_uu: (1.0 + sz_i + sz_j + szz) / 4.0,
            p_ud: (1.0 + sz_i - sz_j - szz) / 4.0,
            p_du: (1.0 - sz_i + sz_j - szz) / 4.0,
            p_dd: (1.0 - sz_i - sz_j + szz) / 4.0,
            z: (sxx + syy) / 4.0,
            w: (sxx - syy) / 4.0,
            sz_i,
            sz_j,
            szz,
            sxx,
            syy,
        }
    }

    /// Builds the state from a real 4×4 density matrix, keeping only the X part.
    pub fn from_density_matrix(sites: (usize, usize), rho: &DMatrix<f64>) -> Self {
        let (p_uu, p_ud, p_du, p_dd) = (rho[(0, 0)], rho[(1, 1)], rho[(2, 2)], rho[(3, 3)]);
        let z = 0.5 * (rho[(1, 2)] + rho[(2, 1)]);
        let w = 0.5 * (rho[(0, 3)] + rho[(3, 0)]);
        Self {
            sites,
            p_uu,
            p_ud,
            p_du,
            p_dd,
            z,
            w,
            sz_i: p_uu + p_ud - p_du - p_dd,
            sz_j: p_uu - p_ud + p_du - p_dd,
            szz: p_uu - p_ud - p_du + p_dd,
            sxx: 2.0 * (z + w),
            syy: 2.0 * (z - w),
        }
    }

    pub fn populations(&self) -> [f64; 4] {
        [self.p_uu, self.p_ud, self.p_du, self.p_dd]
    }

    pub fn density_matrix(&self) -> DMatrix<f64> {
        let mut rho = DMatrix::zeros(4, 4);
        for (k, p) in self.populations().into_iter().enumerate() {
            rho[(k, k)] = p;
        }
        rho[(1, 2)] = self.z;
        rho[(2, 1)] = self.z;
        rho[(0, 3)] = self.w;
        rho[(3, 0)] = self.w;
        rho
    }

    /// Checks the population sum and positivity of the two X blocks.
    pub fn validate(&self) -> Result<()> {
        let pops = self.populations();
        if pops.iter().any(|p| !p.is_finite()) || !self.z.is_finite() || !self.w.is_finite() {
            return Err(Error::NonPhysical(format!(
                "non-finite entries at sites {:?}",
                self.sites
            )));
        }
        let sum: f64 = pops.iter().sum();
        if (sum - 1.0).abs() > STATE_TOL {
            return Err(Error::NonPhysical(format!(
                "populations sum to {sum} at sites {:?}",
                self.sites
            )));
        }
        if let Some(p) = pops.iter().find(|p| **p < -STATE_TOL) {
            return Err(Error::NonPhysical(format!(
                "negative population {p:e} at sites {:?}",
                self.sites
            )));
        }
        let clamp = |p: f64| p.max(0.0);
        if self.z.abs() > (clamp(self.p_ud) * clamp(self.p_du)).sqrt() + STATE_TOL
            || self.w.abs() > (clamp(self.p_uu) * clamp(self.p_dd)).sqrt() + STATE_TOL
        {
            return Err(Error::NonPhysical(format!(
                "coherence exceeds populations at sites {:?}",
                self.sites
            )));
        }
        Ok(())
    }

    /// The state of the mirrored pair `(n-1-j, n-1-i)`, relabeled.
    pub fn mirrored(&self, sites: usize) -> Self {
        let (i, j) = self.sites;
        Self {
            sites: (sites - 1 - j, sites - 1 - i),
            p_ud: self.p_du,
            p_du: self.p_ud,
            sz_i: self.sz_j,
            sz_j: self.sz_i,
            ..self.clone()
        }
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= j || j >= n {
        return Err(Error::InvalidSites { i, j, sites: n });
    }
    Ok(())
}

/// Two-site state of sites `i < j` from precomputed contractions.
pub fn pair_from_q(q: &QMatrix, i: usize, j: usize) -> Result<PairState> {
    check_pair(q.sites(), i, j)?;
    Ok(PairState::from_correlators(
        (i, j),
        q.sigma_z(i),
        q.sigma_z(j),
        q.sigma_zz(i, j),
        q.sigma_xx(i, j),
        q.sigma_yy(i, j),
    ))
}

pub fn pair_correlators(m: &ModeBasis, i: usize, j: usize) -> Result<PairState> {
    pair_from_q(&QMatrix::from_basis(m), i, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_couplings, CouplingVector, ModularSpec};
    use crate::fermion::solve;

    fn q_for(c: &[f64]) -> QMatrix {
        QMatrix::from_basis(&solve(&CouplingVector::new(c.to_vec()).unwrap()).unwrap())
    }

    #[test]
    fn singlet_pair() {
        let p = pair_from_q(&q_for(&[1.0]), 0, 1).unwrap();
        assert!((p.sxx + 1.0).abs() < 1e-15);
        assert!((p.szz + 1.0).abs() < 1e-15);
        assert!((p.z + 0.5).abs() < 1e-15);
        assert!(p.p_uu.abs() < 1e-15 && p.p_dd.abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn three_site_ends_with_half_filled_zero_mode() {
        let p = pair_from_q(&q_for(&[1.0, 1.0]), 0, 2).unwrap();
        assert!((p.sxx.abs() - 0.5).abs() < 1e-15);
        assert!(p.szz.abs() < 1e-15);
        assert!((p.z.abs() - 0.25).abs() < 1e-15);
        assert!((p.p_uu - 0.25).abs() < 1e-15 && (p.p_dd - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_pairs() {
        let q = q_for(&[1.0, 1.0]);
        assert!(matches!(
            pair_from_q(&q, 1, 1),
            Err(Error::InvalidSites { .. })
        ));
        assert!(pair_from_q(&q, 2, 1).is_err());
        assert!(pair_from_q(&q, 0, 3).is_err());
    }

    #[test]
    fn adjacent_shortcut_matches_general_determinant() {
        let q = q_for(&[0.1, 1.0, 0.1, 0.5, 0.1, 1.0, 0.1]);
        for i in 0..7 {
            let general = q
                .matrix()
                .view((i, i + 1), (1, 1))
                .into_owned()
                .lu()
                .determinant();
            assert_eq!(q.sigma_xx(i, i + 1), general);
        }
    }

    #[test]
    fn xx_equals_yy_and_outer_coherence_vanishes() {
        for spec in [(2, 4, 0.1, 0.5), (3, 3, 0.5, 4.0), (2, 6, 0.8, 3.2)] {
            let c = build_couplings(&ModularSpec::new(spec.0, spec.1, spec.2, spec.3).unwrap())
                .unwrap();
            let q = QMatrix::from_basis(&solve(&c).unwrap());
            let n = q.sites();
            for i in 0..n {
                for j in i + 1..n {
                    let p = pair_from_q(&q, i, j).unwrap();
                    assert!((p.sxx - p.syy).abs() < 1e-10);
                    assert!(p.w.abs() < 1e-10);
                    p.validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn mirror_pairs_agree() {
        let c = build_couplings(&ModularSpec::new(3, 4, 0.3, 0.7).unwrap()).unwrap();
        let q = QMatrix::from_basis(&solve(&c).unwrap());
        let n = q.sites();
        for i in 0..n {
            for j in i + 1..n {
                let a = pair_from_q(&q, i, j).unwrap().mirrored(n);
                let b = pair_from_q(&q, n - 1 - j, n - 1 - i).unwrap();
                assert_eq!(a.sites, b.sites);
                for (x, y) in [
                    (a.p_uu, b.p_uu),
                    (a.p_ud, b.p_ud),
                    (a.p_du, b.p_du),
                    (a.p_dd, b.p_dd),
                    (a.z, b.z),
                ] {
                    assert!((x - y).abs() < 1e-10, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn density_matrix_round_trip() {
        let p = pair_from_q(&q_for(&[0.3, 1.0, 0.3]), 0, 3).unwrap();
        let back = PairState::from_density_matrix(p.sites, &p.density_matrix());
        for (x, y) in [
            (p.sz_i, back.sz_i),
            (p.sz_j, back.sz_j),
            (p.szz, back.szz),
            (p.sxx, back.sxx),
        ] {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
