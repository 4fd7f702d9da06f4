//! Parameters behind every `fig` recipe, kept in one place.
//!
//! Values marked "assumed" are not legible from the published figures and
//! were picked to show each documented behaviour; edit them here.

/// `(N, n, λ)` and a λ_I grid `from..=to` with spacing `step`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LambdaIScan {
    pub moduli: usize,
    pub sites: usize,
    pub lambda: f64,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

/// Two moduli of six sites, λ = 0.1, λ_I over [0, 2].
pub const FIG2A: LambdaIScan = LambdaIScan {
    moduli: 2,
    sites: 6,
    lambda: 0.1,
    from: 0.0,
    to: 2.0,
    step: 0.01,
};

/// Two moduli of seven sites, λ = 0.1, λ_I over (0, 2]; the step matches
/// panel a (assumed).
pub const FIG2B: LambdaIScan = LambdaIScan {
    moduli: 2,
    sites: 7,
    lambda: 0.1,
    from: 0.01,
    to: 2.0,
    step: 0.01,
};

/// Threshold against the end bond for two moduli.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ThresholdScan {
    pub moduli: usize,
    pub sites: &'static [usize],
    /// λ grid (assumed).
    pub lambda_from: f64,
    pub lambda_to: f64,
    pub lambda_step: f64,
}

pub const FIG3: ThresholdScan = ThresholdScan {
    moduli: 2,
    sites: &[2, 4, 6, 8],
    lambda_from: 0.05,
    lambda_to: 1.0,
    lambda_step: 0.05,
};

/// One curve `(n, λ, λ_I)` against the number of moduli.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Curve {
    pub sites: usize,
    pub lambda: f64,
    pub lambda_i: f64,
}

const fn curve(sites: usize, lambda: f64, lambda_i: f64) -> Curve {
    Curve {
        sites,
        lambda,
        lambda_i,
    }
}

/// Largest number of moduli for the N scans (n_t = 160 at n = 8).
pub const MAX_MODULI: usize = 20;

/// End-to-end concurrence and gap against N. Only the six-site curve
/// λ = 0.8, λ_I = 4λ is given in the text; the rest are assumed.
pub const FIG4_CURVES: [Curve; 6] = [
    curve(2, 0.1, 1.0),
    curve(4, 0.1, 0.05),
    curve(4, 0.1, 1.0),
    curve(6, 0.1, 0.5),
    curve(6, 0.8, 3.2),
    curve(8, 0.1, 0.05),
];

pub const FIG5_CURVES: [Curve; 6] = FIG4_CURVES;

/// Inset: gap against n_t for n = 2, 4, 8 in one correlation regime, i.e.
/// equal per-modulus decay factor `Π |J_even / J_odd|` (assumed 0.01 with
/// λ = 0.1, so λ_I = 10 for n = 2 and λ_I = 1 for n = 4, 8).
pub const FIG5_INSET_SITES: [usize; 3] = [2, 4, 8];
pub const FIG5_INSET_LAMBDA: f64 = 0.1;
pub const FIG5_INSET_DECAY: f64 = 0.01;
pub const FIG5_INSET_MAX_SITES: usize = 160;

/// λ_I^th / λ against N = 2..=20, one curve per `(n, λ)` (λ values assumed).
pub const FIG6_CURVES: [(usize, f64); 5] = [(2, 0.1), (4, 0.1), (4, 1.0), (6, 0.1), (8, 0.1)];
pub const FIG6_MIN_MODULI: usize = 2;
