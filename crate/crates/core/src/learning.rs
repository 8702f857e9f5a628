//! Linear reward-penalty learning and its L2-biased extension.
//!
//! A learner holds the probability `p` of choosing grammar G1. After each
//! interaction one of four affine operators `f_ij(p) = a p + b_ij` is applied,
//! selected by the chosen grammar `i` and the environment's response `j`.
//! All four operators share the slope `a = 1 - gamma - delta`; `delta = 0`
//! recovers the classical scheme used by L1 learners.
//!
//! Because the slopes coincide, the raw moments of `p` obey closed linear
//! recursions, which gives exact expressions for the mean trajectory and the
//! limiting variance.

use serde::{Deserialize, Serialize};

use crate::error::{domain, ModelError, Result};

/// Largest rounding overshoot tolerated before clamping back into `[0, 1]`.
pub const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Grammar {
    G1,
    G2,
}

impl Grammar {
    pub fn index(self) -> usize {
        match self {
            Grammar::G1 => 0,
            Grammar::G2 => 1,
        }
    }

    pub fn other(self) -> Grammar {
        match self {
            Grammar::G1 => Grammar::G2,
            Grammar::G2 => Grammar::G1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Response {
    Reward,
    Penalty,
}

impl Response {
    pub fn index(self) -> usize {
        match self {
            Response::Reward => 0,
            Response::Penalty => 1,
        }
    }
}

/// Learning rate `gamma` and L2 bias `delta`.
///
/// Valid rates satisfy `0 < gamma < 1` and `0 <= delta <= 1 - gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRates {
    gamma: f64,
    delta: f64,
}

impl LearningRates {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(domain(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if !(delta >= 0.0 && delta <= 1.0 - gamma) {
            return Err(domain(format!(
                "delta must lie in [0, 1 - gamma] = [0, {}], got {delta}",
                1.0 - gamma
            )));
        }
        Ok(Self { gamma, delta })
    }

    /// Rates for a plain L1 learner (`delta = 0`).
    pub fn l1(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0)
    }

    /// Builds rates from `gamma` and the ratio `d = delta / gamma`.
    pub fn from_ratio(gamma: f64, d: f64) -> Result<Self> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(domain(format!("difficulty ratio d must be >= 0, got {d}")));
        }
        Self::new(gamma, d * gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `d = delta / gamma`.
    pub fn d(&self) -> f64 {
        self.delta / self.gamma
    }

    /// Common slope `1 - gamma - delta` of the four operators.
    pub fn slope(&self) -> f64 {
        1.0 - self.gamma - self.delta
    }

    pub fn is_l1(&self) -> bool {
        self.delta == 0.0
    }
}

/// Slopes and intercepts of the four affine operators `f_ij(p) = a_ij p + b_ij`.
///
/// Index `[i][j]` is grammar `i` (G1, G2) and response `j` (reward, penalty).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSet {
    pub slopes: [[f64; 2]; 2],
    pub intercepts: [[f64; 2]; 2],
}

impl OperatorSet {
    pub fn from_rates(rates: &LearningRates) -> Self {
        let a = rates.slope();
        let g = rates.gamma();
        Self {
            slopes: [[a; 2]; 2],
            intercepts: [[g, 0.0], [0.0, g]],
        }
    }

    /// The shared slope, if all four operators have one.
    pub fn common_slope(&self) -> Option<f64> {
        let a = self.slopes[0][0];
        self.slopes.iter().flatten().all(|&s| s == a).then_some(a)
    }

    pub fn apply(&self, p: f64, chosen: Grammar, response: Response) -> f64 {
        let (i, j) = (chosen.index(), response.index());
        clamp_unit(self.slopes[i][j] * p + self.intercepts[i][j])
    }
}

/// Clamps rounding drift back into `[0, 1]`.
pub(crate) fn clamp_unit(x: f64) -> f64 {
    debug_assert!(
        (-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&x),
        "probability {x} overshoots [0, 1] by more than rounding slack"
    );
    x.clamp(0.0, 1.0)
}

/// Stationary response probabilities `omega[i][j]`: response `j` after action `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment2x2 {
    omega: [[f64; 2]; 2],
}

impl Environment2x2 {
    /// Environment in which G1 is punished with probability `pi1` and G2 with `pi2`.
    pub fn from_penalties(pi1: f64, pi2: f64) -> Result<Self> {
        for (name, v) in [("pi1", pi1), ("pi2", pi2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self {
            omega: [[1.0 - pi1, pi1], [1.0 - pi2, pi2]],
        })
    }

    pub fn omega(&self) -> [[f64; 2]; 2] {
        self.omega
    }

    pub fn pi1(&self) -> f64 {
        self.omega[0][1]
    }

    pub fn pi2(&self) -> f64 {
        self.omega[1][1]
    }

    /// `0 < omega_ii < 1` for both actions, the precondition for `|C1| < 1`.
    pub fn is_contracting(&self) -> bool {
        (0..2).all(|i| self.omega[i][i] > 0.0 && self.omega[i][i] < 1.0)
    }

    fn require_contracting(&self) -> Result<()> {
        if self.is_contracting() {
            Ok(())
        } else {
            Err(ModelError::ContractionViolation(format!(
                "need 0 < omega_ii < 1, got omega_11 = {}, omega_22 = {}",
                self.omega[0][0], self.omega[1][1]
            )))
        }
    }
}

/// Constants of the first two moment recursions
///
/// `<p>_{n+1} = C0 + C1 <p>_n` and `<p^2>_{n+1} = D0 + D1 <p^2>_n + D2 <p>_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstants {
    pub c0: f64,
    pub c1: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

impl MomentConstants {
    pub fn new(env: &Environment2x2, ops: &OperatorSet) -> Self {
        let w = env.omega();
        let a = ops.slopes;
        let b = ops.intercepts;
        // Response-weighted averages for each action row.
        let avg = |i: usize, f: &dyn Fn(usize) -> f64| f(0) * w[i][0] + f(1) * w[i][1];
        let a_bar = |i: usize| avg(i, &|j| a[i][j]);
        let b_bar = |i: usize| avg(i, &|j| b[i][j]);
        let aa_bar = |i: usize| avg(i, &|j| a[i][j] * a[i][j]);
        let bb_bar = |i: usize| avg(i, &|j| b[i][j] * b[i][j]);
        let ab_bar = |i: usize| avg(i, &|j| a[i][j] * b[i][j]);

        Self {
            c0: b_bar(1),
            c1: b_bar(0) - b_bar(1) + a_bar(1),
            d0: bb_bar(1),
            d1: 2.0 * ab_bar(0) - 2.0 * ab_bar(1) + aa_bar(1),
            d2: bb_bar(0) - bb_bar(1) + 2.0 * ab_bar(1),
        }
    }

    pub fn from_rates(env: &Environment2x2, rates: &LearningRates) -> Self {
        Self::new(env, &OperatorSet::from_rates(rates))
    }

    /// Limit of the mean, `C0 / (1 - C1)`.
    pub fn mean_limit(&self) -> f64 {
        self.c0 / (1.0 - self.c1)
    }

    /// `E0 = D0 + D2 <p>_inf`.
    pub fn e0(&self) -> f64 {
        self.d0 + self.d2 * self.mean_limit()
    }

    /// `E1 = D2 (<p>_0 - <p>_inf)`, the transient forcing of the second moment.
    pub fn e1(&self, p0: f64) -> f64 {
        self.d2 * (p0 - self.mean_limit())
    }
}

/// Applies `f_ij` for the given rates.
pub fn apply_operator(
    p: f64,
    chosen: Grammar,
    response: Response,
    rates: &LearningRates,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(OperatorSet::from_rates(rates).apply(p, chosen, response))
}

/// Expected asymptotic probability of G1, `pi2 / (pi1 + pi2 + d)`.
pub fn asymptotic_mean(env: &Environment2x2, d: f64) -> Result<f64> {
    let denom = env.pi1() + env.pi2() + d;
    if !(denom > 0.0) {
        return Err(domain("pi1 + pi2 + d must be positive"));
    }
    Ok(env.pi2() / denom)
}

/// Expected probability after `n` learning iterations from `p0`.
pub fn mean_trajectory(
    p0: f64,
    n: u64,
    env: &Environment2x2,
    rates: &LearningRates,
) -> Result<f64> {
    env.require_contracting()?;
    let k = MomentConstants::from_rates(env, rates);
    let c1n = powu(k.c1, n);
    Ok(c1n * p0 + (1.0 - c1n) * k.mean_limit())
}

fn powu(x: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(e) => x.powi(e),
        Err(_) => x.powf(n as f64),
    }
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// One step of the raw-moment recursion for `<p^m>`.
///
/// `moments[k]` holds `<p^k>` for `k = 0..=m`. Only equal-slope operator sets
/// give a closed recursion; others are rejected.
pub fn moment_recursion(
    moments: &[f64],
    m: usize,
    ops: &OperatorSet,
    env: &Environment2x2,
) -> Result<f64> {
    let Some(a) = ops.common_slope() else {
        return Err(ModelError::UnsupportedConfiguration(
            "moment recursion requires a common operator slope".into(),
        ));
    };
    if moments.len() < m + 1 {
        return Err(domain(format!(
            "need moments of order 0..={m}, got {} values",
            moments.len()
        )));
    }
    if moments[0] != 1.0 {
        return Err(domain("zeroth moment must equal 1"));
    }
    if let Some(bad) = moments[..=m].iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(domain(format!("raw moments must lie in [0, 1], got {bad}")));
    }

    let w = env.omega();
    let b = ops.intercepts;
    let omega_row = |i: usize, k: usize| -> f64 {
        (0..2)
            .map(|j| a.powi(k as i32) * b[i][j].powi((m - k) as i32) * w[i][j])
            .sum()
    };

    let mut next = 0.0;
    for k in 0..=m {
        let chosen_g1 = omega_row(0, k);
        let chosen_g2 = omega_row(1, k);
        let mut term = chosen_g2 * moments[k];
        // For k = m the difference vanishes with equal slopes, so <p^{m+1}> is never read.
        if k < m {
            term += (chosen_g1 - chosen_g2) * moments[k + 1];
        }
        next += binomial(m, k) * term;
    }
    Ok(next)
}

/// Limiting variance `<p^2>_inf - <p>_inf^2`.
pub fn variance_limit(env: &Environment2x2, rates: &LearningRates) -> Result<f64> {
    env.require_contracting()?;
    let k = MomentConstants::from_rates(env, rates);
    if !(k.d1.abs() < 1.0) {
        return Err(ModelError::ContractionViolation(format!(
            "second-moment coefficient D1 = {} is not inside (-1, 1)",
            k.d1
        )));
    }
    let mean = k.mean_limit();
    let second = k.e0() / (1.0 - k.d1);
    Ok((second - mean * mean).max(0.0))
}
