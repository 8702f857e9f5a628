//! Penalty probabilities generated by a mixed L1/L2 speaker population.

use serde::{Deserialize, Serialize};

use crate::error::{domain, ModelError, Result};

/// Fractions of each grammar's output that the competing grammar cannot parse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrammarAdvantages {
    alpha1: f64,
    alpha2: f64,
}

impl GrammarAdvantages {
    /// Both advantages must lie in `[0, 1]`. A zero advantage is accepted
    /// here (it silences that grammar's distinctive output) but cannot be
    /// reduced to an advantage ratio.
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, v) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(domain(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self { alpha1, alpha2 })
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    /// Advantage of grammar `G1` (index 0) or `G2` (index 1).
    pub fn of(&self, grammar: crate::learning::Grammar) -> f64 {
        match grammar {
            crate::learning::Grammar::G1 => self.alpha1,
            crate::learning::Grammar::G2 => self.alpha2,
        }
    }

    /// `alpha1 / alpha2`.
    pub fn ratio(&self) -> Result<f64> {
        if self.alpha2 == 0.0 {
            return Err(ModelError::DegenerateAdvantage);
        }
        Ok(self.alpha1 / self.alpha2)
    }
}

/// Probability of G1 among L1 speakers (`p`) and among L2 speakers (`q`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PopulationState {
    pub p: f64,
    pub q: f64,
}

impl PopulationState {
    pub const ORIGIN: PopulationState = PopulationState { p: 0.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Result<Self> {
        let s = Self { p, q };
        if !s.in_unit_square() {
            return Err(domain(format!("state ({p}, {q}) lies outside [0, 1]^2")));
        }
        Ok(s)
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.p) && (0.0..=1.0).contains(&self.q)
    }

    pub fn sup_distance(&self, other: &PopulationState) -> f64 {
        (self.p - other.p).abs().max((self.q - other.q).abs())
    }

    pub fn sup_norm(&self) -> f64 {
        self.p.abs().max(self.q.abs())
    }
}

/// The reduced parameter triple driving the generational map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Advantage ratio `alpha1 / alpha2`.
    pub alpha: f64,
    /// L2 difficulty scaled by the advantage of G2, `D = d / alpha2`.
    pub difficulty: f64,
    /// Proportion of L2 speakers.
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, difficulty: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(difficulty >= 0.0) || !difficulty.is_finite() {
            return Err(domain(format!(
                "D must be >= 0 and finite, got {difficulty}"
            )));
        }
        if !(0.0..=1.0).contains(&sigma) {
            return Err(domain(format!("sigma must lie in [0, 1], got {sigma}")));
        }
        Ok(Self {
            alpha,
            difficulty,
            sigma,
        })
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Self::new(self.alpha, self.difficulty, sigma)
    }
}

/// Penalty probabilities `(pi1, pi2)` faced by any learner in state `state`.
pub fn penalty_probabilities(
    state: PopulationState,
    sigma: f64,
    adv: &GrammarAdvantages,
) -> (f64, f64) {
    let l1 = 1.0 - sigma;
    let pi1 = l1 * adv.alpha2 * (1.0 - state.p) + sigma * adv.alpha2 * (1.0 - state.q);
    let pi2 = l1 * adv.alpha1 * state.p + sigma * adv.alpha1 * state.q;
    (pi1, pi2)
}

/// Collapses `(alpha1, alpha2, d)` to `(alpha, D, sigma)`.
pub fn reduce_params(adv: &GrammarAdvantages, d: f64, sigma: f64) -> Result<ModelParams> {
    let alpha = adv.ratio()?;
    if !(d >= 0.0) {
        return Err(domain(format!("difficulty ratio d must be >= 0, got {d}")));
    }
    ModelParams::new(alpha, d / adv.alpha2, sigma)
}
