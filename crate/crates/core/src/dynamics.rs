//! Deterministic inter-generational dynamics of a mixed L1/L2 population.
//!
//! Each generation learns from the previous one and settles on the learners'
//! asymptotic expectation, giving the map
//!
//! ```text
//! s      = (1 - sigma) p + sigma q
//! p' = alpha s / ((1 - sigma)(1 - p) + sigma (1 - q) + alpha s)
//! q' = alpha s / ((1 - sigma)(1 - p) + sigma (1 - q) + alpha s + D)
//! ```
//!
//! The map is the primary engine. The continuous-time field with the same
//! equilibria is used for nullcline geometry and the stability analysis of
//! the origin, whose leading eigenvalue changes sign at `sigma_crit`.

use serde::{Deserialize, Serialize};

use crate::environment::{ModelParams, PopulationState};
use crate::error::{domain, ModelError, Result};
use crate::learning::clamp_unit;
use crate::par;

/// Default sup-norm step tolerance for equilibrium searches.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
/// Default iteration budget for equilibrium searches.
pub const EQUILIBRIUM_MAX_ITER: usize = 1_000_000;
/// Default extinction threshold for passage times.
pub const PASSAGE_THRESHOLD: f64 = 0.001;
/// Relative width of the band around `sigma_crit` labelled [`PhaseLabel::Critical`].
pub const CRITICAL_BAND: f64 = 1e-12;

/// Shared numerator and the two denominators of the map.
fn map_terms(state: PopulationState, params: &ModelParams) -> (f64, f64) {
    let ModelParams { alpha, sigma, .. } = *params;
    let l1 = 1.0 - sigma;
    let num = alpha * (l1 * state.p + sigma * state.q);
    let denom = l1 * (1.0 - state.p) + sigma * (1.0 - state.q) + num;
    (num, denom)
}

/// One generation of the map.
pub fn step_map(state: PopulationState, params: &ModelParams) -> PopulationState {
    let (num, denom) = map_terms(state, params);
    if num == 0.0 {
        // Includes the only place a denominator could vanish.
        return if denom > 0.0 {
            PopulationState::ORIGIN
        } else {
            state
        };
    }
    PopulationState {
        p: clamp_unit(num / denom),
        q: clamp_unit(num / (denom + params.difficulty)),
    }
}

/// Trajectory of `n` generations; element 0 is `state0`.
pub fn iterate(state0: PopulationState, params: &ModelParams, n: usize) -> Vec<PopulationState> {
    let mut out = Vec::with_capacity(n + 1);
    let mut x = state0;
    out.push(x);
    for _ in 0..n {
        x = step_map(x, params);
        out.push(x);
    }
    out
}

/// Continuous-time field `(p_dot, q_dot)` with the positive denominators dropped.
pub fn vector_field(state: PopulationState, params: &ModelParams) -> (f64, f64) {
    let ModelParams {
        alpha,
        difficulty,
        sigma,
    } = *params;
    let PopulationState { p, q } = state;
    let l1 = 1.0 - sigma;
    let gain = alpha * (l1 * p + sigma * q);
    let loss = l1 * (1.0 - p) + sigma * (1.0 - q);
    (
        gain * (1.0 - p) - loss * p,
        gain * (1.0 - q) - (loss + difficulty) * q,
    )
}

/// Jacobian of [`vector_field`] at an arbitrary state.
pub fn jacobian(state: PopulationState, params: &ModelParams) -> [[f64; 2]; 2] {
    let ModelParams {
        alpha,
        difficulty,
        sigma,
    } = *params;
    let PopulationState { p, q } = state;
    let (a_t, s_t) = (1.0 - alpha, 1.0 - sigma);
    [
        [
            2.0 * a_t * s_t * p + a_t * sigma * q + alpha * s_t - 1.0,
            a_t * sigma * p + alpha * sigma,
        ],
        [
            a_t * s_t * q + alpha * s_t,
            a_t * s_t * p + 2.0 * a_t * sigma * q + alpha * sigma - difficulty - 1.0,
        ],
    ]
}

/// Linear stability of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub jacobian: [[f64; 2]; 2],
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `(alpha + D)^2 - 4 alpha D sigma`, never below `(alpha - D)^2`.
    pub discriminant: f64,
    pub stable: bool,
}

/// `(lambda_plus, lambda_minus, discriminant)` at the origin.
///
/// Takes raw numbers so that thresholds above 1 can still be evaluated.
pub fn eigenvalues_at_origin(alpha: f64, difficulty: f64, sigma: f64) -> (f64, f64, f64) {
    let d = difficulty;
    let discriminant = (alpha + d).powi(2) - 4.0 * alpha * d * sigma;
    let root = discriminant.max(0.0).sqrt();
    (
        (alpha - (d + 2.0) + root) / 2.0,
        (alpha - (d + 2.0) - root) / 2.0,
        discriminant,
    )
}

pub fn jacobian_and_eigenvalues(params: &ModelParams) -> StabilityReport {
    let (lambda_plus, lambda_minus, discriminant) =
        eigenvalues_at_origin(params.alpha, params.difficulty, params.sigma);
    StabilityReport {
        jacobian: jacobian(PopulationState::ORIGIN, params),
        lambda_plus,
        lambda_minus,
        discriminant,
        stable: lambda_plus < 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `alpha <= 1`: the origin attracts for every sigma.
    AlwaysLost,
    /// `1 < alpha < D + 2`: sigma is a bifurcation parameter.
    Bifurcation,
    /// `alpha >= D + 2`: the origin repels for every sigma.
    AlwaysRetained,
    /// `D = 0` with `1 < alpha < 2`; the threshold formula divides by zero.
    DegenerateD,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaCrit {
    /// Threshold on sigma. In the bifurcation regime this is the raw value of
    /// `(alpha - 1)(D + 1) / (alpha D)`, which exceeds 1 when `alpha > D + 1`.
    pub value: f64,
    pub regime: Regime,
}

pub fn sigma_crit(alpha: f64, difficulty: f64) -> Result<SigmaCrit> {
    if !(alpha > 0.0) || !(difficulty >= 0.0) {
        return Err(domain(format!(
            "need alpha > 0 and D >= 0, got alpha = {alpha}, D = {difficulty}"
        )));
    }
    let (value, regime) = if alpha <= 1.0 {
        (0.0, Regime::AlwaysLost)
    } else if alpha >= difficulty + 2.0 {
        (1.0, Regime::AlwaysRetained)
    } else if difficulty == 0.0 {
        (f64::INFINITY, Regime::DegenerateD)
    } else {
        (
            (alpha - 1.0) * (difficulty + 1.0) / (alpha * difficulty),
            Regime::Bifurcation,
        )
    };
    Ok(SigmaCrit { value, regime })
}

/// Eventual fate of the L2-difficult grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Lost,
    Retained,
    Critical,
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PhaseLabel::Lost => "lost",
            PhaseLabel::Retained => "retained",
            PhaseLabel::Critical => "critical",
        })
    }
}

pub fn classify_phase(params: &ModelParams) -> PhaseLabel {
    // ModelParams guarantees alpha > 0 and D >= 0.
    let crit = sigma_crit(params.alpha, params.difficulty).expect("validated params");
    match crit.regime {
        Regime::AlwaysLost => PhaseLabel::Lost,
        // With D = 0 the leading eigenvalue is alpha - 1 > 0.
        Regime::AlwaysRetained | Regime::DegenerateD => PhaseLabel::Retained,
        Regime::Bifurcation => {
            let gap = params.sigma - crit.value;
            if gap.abs() <= CRITICAL_BAND * crit.value.max(1.0) {
                PhaseLabel::Critical
            } else if gap > 0.0 {
                PhaseLabel::Lost
            } else {
                PhaseLabel::Retained
            }
        }
    }
}

/// Iterates the map until successive states differ by less than `tol`.
pub fn find_equilibrium(
    params: &ModelParams,
    start: PopulationState,
    tol: f64,
    max_iter: usize,
) -> Result<PopulationState> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = start;
    for _ in 0..max_iter {
        let next = step_map(x, params);
        if next.sup_distance(&x) < tol {
            return Ok(next);
        }
        x = next;
    }
    Err(ModelError::NonConvergence {
        iterations: max_iter,
        last: x,
    })
}

/// Generations until both `p` and `q` drop below `threshold`, starting from `(1, q0)`.
pub fn passage_time(
    params: &ModelParams,
    q0: f64,
    threshold: f64,
    max_gen: usize,
) -> Result<usize> {
    passage_time_from(PopulationState::new(1.0, q0)?, params, threshold, max_gen)
}

/// As [`passage_time`], from an arbitrary initial state.
pub fn passage_time_from(
    start: PopulationState,
    params: &ModelParams,
    threshold: f64,
    max_gen: usize,
) -> Result<usize> {
    if !(threshold > 0.0) {
        return Err(domain(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let mut x = start;
    for n in 0..=max_gen {
        if x.p < threshold && x.q < threshold {
            return Ok(n);
        }
        x = step_map(x, params);
    }
    Err(ModelError::NonConvergence {
        iterations: max_gen,
        last: x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Converged,
    NonConverged,
}

/// One `(alpha, D, sigma)` cell of an orbit diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitCell {
    pub params: ModelParams,
    /// The equilibrium when converged, otherwise the last iterate.
    pub state: PopulationState,
    pub phase: PhaseLabel,
    pub status: CellStatus,
}

/// Start used for every orbit-diagram cell.
pub const ORBIT_START: PopulationState = PopulationState { p: 0.5, q: 0.5 };

/// Stable equilibria over a full `alpha x D x sigma` grid, in grid order.
///
/// Cells that fail to converge are reported with [`CellStatus::NonConverged`]
/// rather than aborting the sweep.
pub fn orbit_diagram(
    alphas: &[f64],
    difficulties: &[f64],
    sigmas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<OrbitCell>> {
    if alphas.is_empty() || difficulties.is_empty() || sigmas.is_empty() {
        return Err(domain("orbit diagram grids must be non-empty"));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut cells = Vec::with_capacity(alphas.len() * difficulties.len() * sigmas.len());
    for &a in alphas {
        for &d in difficulties {
            for &s in sigmas {
                cells.push(ModelParams::new(a, d, s)?);
            }
        }
    }
    Ok(par::map_indexed(&cells, |_, params| {
        let phase = classify_phase(params);
        match find_equilibrium(params, ORBIT_START, tol, max_iter) {
            Ok(state) => OrbitCell {
                params: *params,
                state,
                phase,
                status: CellStatus::Converged,
            },
            Err(ModelError::NonConvergence { last, .. }) => OrbitCell {
                params: *params,
                state: last,
                phase,
                status: CellStatus::NonConverged,
            },
            Err(e) => unreachable!("tolerance validated above: {e}"),
        }
    }))
}

/// The conic `A_pp p^2 + 2 A_pq p q + A_qq q^2 + B_p p + B_q q + C = 0`
/// on which `p_dot` vanishes, with its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullclineGeometry {
    pub a_pp: f64,
    pub a_pq: f64,
    pub a_qq: f64,
    pub b_p: f64,
    pub b_q: f64,
    pub c: f64,
    /// `A_pp A_qq - A_pq^2`.
    pub discriminant: f64,
    pub center: (f64, f64),
}

impl NullclineGeometry {
    /// Left-hand side of the conic equation at `(p, q)`.
    pub fn evaluate(&self, p: f64, q: f64) -> f64 {
        self.a_pp * p * p
            + 2.0 * self.a_pq * p * q
            + self.a_qq * q * q
            + self.b_p * p
            + self.b_q * q
            + self.c
    }
}

pub fn nullcline_geometry(params: &ModelParams) -> Result<NullclineGeometry> {
    let ModelParams { alpha, sigma, .. } = *params;
    let (a_t, s_t) = (1.0 - alpha, 1.0 - sigma);
    let a_pp = a_t * s_t;
    let a_pq = a_t * sigma / 2.0;
    let a_qq = 0.0;
    let b_p = alpha * s_t - 1.0;
    let b_q = alpha * sigma;
    let discriminant = a_pp * a_qq - a_pq * a_pq;
    if discriminant == 0.0 {
        // alpha = 1 (lines through the origin) or sigma = 0 (no q coupling).
        return Err(ModelError::DegenerateConic { alpha, sigma });
    }
    let center = (
        (b_q * a_pq - b_p * a_qq) / (2.0 * discriminant),
        (b_p * a_pq - b_q * a_pp) / (2.0 * discriminant),
    );
    Ok(NullclineGeometry {
        a_pp,
        a_pq,
        a_qq,
        b_p,
        b_q,
        c: 0.0,
        discriminant,
        center,
    })
}
