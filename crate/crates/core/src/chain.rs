//! Coupling patterns for modular XX chains.
//!
//! A modular chain is `N` identical moduli of `n` sites each. Inside a modulus
//! the two end bonds carry the weak coupling `λ` and every bulk bond carries the
//! unit coupling `J = 1`; consecutive moduli are joined by a single bond `λ_I`.
//! For `n = 2` and `n = 3` there is no bulk, so every intra-modulus bond is `λ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the palindrome check on coupling vectors.
pub const MIRROR_TOL: f64 = 1e-12;

/// Declarative description of a chain: either the modular pattern or an
/// explicit list of nearest-neighbour couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainSpec {
    Modular(ModularSpec),
    Explicit { couplings: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularSpec {
    /// Number of moduli `N`.
    pub moduli: usize,
    /// Sites per modulus `n`.
    pub sites_per_modulus: usize,
    /// End bond `λ` inside each modulus.
    pub end_bond: f64,
    /// Inter-modulus coupling `λ_I`.
    pub inter_modulus: f64,
}

impl ModularSpec {
    pub fn new(
        moduli: usize,
        sites_per_modulus: usize,
        end_bond: f64,
        inter_modulus: f64,
    ) -> Result<Self> {
        let spec = Self {
            moduli,
            sites_per_modulus,
            end_bond,
            inter_modulus,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites_per_modulus < 2 {
            return Err(Error::InvalidSpec(format!(
                "sites per modulus must be at least 2, got {}",
                self.sites_per_modulus
            )));
        }
        if self.moduli < 1 {
            return Err(Error::InvalidSpec(
                "at least one modulus is required".into(),
            ));
        }
        if !(self.end_bond.is_finite() && self.end_bond > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "end bond must be > 0, got {}",
                self.end_bond
            )));
        }
        if !(self.inter_modulus.is_finite() && self.inter_modulus >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "inter-modulus coupling must be >= 0, got {}",
                self.inter_modulus
            )));
        }
        Ok(())
    }

    pub fn total_sites(&self) -> usize {
        self.moduli * self.sites_per_modulus
    }

    pub fn with_inter_modulus(self, inter_modulus: f64) -> Self {
        Self {
            inter_modulus,
            ..self
        }
    }

    pub fn with_moduli(self, moduli: usize) -> Self {
        Self { moduli, ..self }
    }

    /// The isolated single modulus (`N = 1`) of this chain.
    pub fn single_modulus(self) -> Self {
        Self { moduli: 1, ..self }
    }
}

impl ChainSpec {
    pub fn modular(
        moduli: usize,
        sites_per_modulus: usize,
        end_bond: f64,
        inter_modulus: f64,
    ) -> Result<Self> {
        ModularSpec::new(moduli, sites_per_modulus, end_bond, inter_modulus).map(Self::Modular)
    }

    pub fn explicit(couplings: Vec<f64>) -> Result<Self> {
        CouplingVector::new(couplings.clone())?;
        Ok(Self::Explicit { couplings })
    }

    pub fn couplings(&self) -> Result<CouplingVector> {
        match self {
            Self::Modular(m) => build_couplings(m),
            Self::Explicit { couplings } => CouplingVector::new(couplings.clone()),
        }
    }

    pub fn as_modular(&self) -> Option<&ModularSpec> {
        match self {
            Self::Modular(m) => Some(m),
            Self::Explicit { .. } => None,
        }
    }
}

impl From<ModularSpec> for ChainSpec {
    fn from(m: ModularSpec) -> Self {
        Self::Modular(m)
    }
}

/// The `n_t - 1` nearest-neighbour couplings `J_{i,i+1}` in units of `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CouplingVector(Vec<f64>);

impl CouplingVector {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidSpec("a chain needs at least one bond".into()));
        }
        if let Some((index, &value)) = couplings.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFiniteCoupling { index, value });
        }
        Ok(Self(couplings))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sites(&self) -> usize {
        self.0.len() + 1
    }

    pub fn bonds(&self) -> usize {
        self.0.len()
    }

    pub fn mirror_symmetry(&self) -> MirrorCheck {
        validate_mirror_symmetry(self)
    }
}

impl std::ops::Index<usize> for CouplingVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Expands a modular spec into its coupling vector.
pub fn build_couplings(spec: &ModularSpec) -> Result<CouplingVector> {
    spec.validate()?;
    let n = spec.sites_per_modulus;
    let mut couplings = Vec::with_capacity(spec.total_sites() - 1);
    for k in 0..spec.moduli {
        for bond in 0..n - 1 {
            let value = if bond == 0 || bond == n - 2 {
                spec.end_bond
            } else {
                1.0
            };
            couplings.push(value);
        }
        if k + 1 < spec.moduli {
            couplings.push(spec.inter_modulus);
        }
    }
    CouplingVector::new(couplings)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirrorCheck {
    pub symmetric: bool,
    /// Largest `|c_i - c_{n_t-i}|` over the chain.
    pub max_deviation: f64,
    /// First offending bond (0-based) when asymmetric.
    pub first_violation: Option<usize>,
}

impl MirrorCheck {
    pub fn diagnostic(&self) -> String {
        match self.first_violation {
            None => "couplings are mirror symmetric".to_string(),
            Some(i) => format!(
                "couplings are not mirror symmetric (bond {} deviates by {:.3e}); \
                 end-to-end entanglement is expected to vanish",
                i + 1,
                self.max_deviation
            ),
        }
    }
}

pub fn validate_mirror_symmetry(c: &CouplingVector) -> MirrorCheck {
    let v = c.as_slice();
    let len = v.len();
    let mut max_deviation: f64 = 0.0;
    let mut first_violation = None;
    for i in 0..len / 2 {
        let dev = (v[i] - v[len - 1 - i]).abs();
        if dev > MIRROR_TOL && first_violation.is_none() {
            first_violation = Some(i);
        }
        max_deviation = max_deviation.max(dev);
    }
    MirrorCheck {
        symmetric: first_violation.is_none(),
        max_deviation,
        first_violation,
    }
}
