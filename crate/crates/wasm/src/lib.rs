//! Browser bindings: an orbit-diagram slice, a passage-time curve and a panel
//! of single-learner trajectories. Results come back as flat `f64` arrays so
//! the page can draw them without any glue beyond `Float64Array`.

use langcontact::abm::{simulate_panel, LearnerKind, PanelConfig, SAMPLE_EVERY};
use langcontact::dynamics::{
    classify_phase, find_equilibrium, passage_time, sigma_crit, Regime, EQUILIBRIUM_MAX_ITER,
    EQUILIBRIUM_TOL, ORBIT_START, PASSAGE_THRESHOLD,
};
use langcontact::environment::{reduce_params, GrammarAdvantages, ModelParams};
use langcontact::{ModelError, Result};
use wasm_bindgen::prelude::*;

fn js_err(e: ModelError) -> JsError {
    JsError::new(&e.to_string())
}

fn unit_grid(n: usize) -> impl Iterator<Item = f64> {
    let last = n.max(2) - 1;
    (0..n).map(move |i| i as f64 / last as f64)
}

/// Equilibria along `n` evenly spaced sigma values in `[0, 1]`.
///
/// Returns `[p_0, q_0, p_1, q_1, ...]`. Cells that do not settle within the
/// iteration budget report `NaN`.
pub fn orbit_slice(alpha: f64, difficulty: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n);
    for sigma in unit_grid(n) {
        let params = ModelParams::new(alpha, difficulty, sigma)?;
        match find_equilibrium(
            &params,
            ORBIT_START,
            EQUILIBRIUM_TOL,
            EQUILIBRIUM_MAX_ITER / 10,
        ) {
            Ok(x) => out.extend([x.p, x.q]),
            Err(_) => out.extend([f64::NAN, f64::NAN]),
        }
    }
    Ok(out)
}

/// Critical L2 fraction, or `NaN` when sigma does not decide the outcome.
pub fn critical_sigma(alpha: f64, difficulty: f64) -> Result<f64> {
    let c = sigma_crit(alpha, difficulty)?;
    Ok(match c.regime {
        Regime::Bifurcation if c.value <= 1.0 => c.value,
        _ => f64::NAN,
    })
}

pub fn phase(alpha: f64, difficulty: f64, sigma: f64) -> Result<String> {
    let params = ModelParams::new(alpha, difficulty, sigma)?;
    Ok(classify_phase(&params).to_string())
}

/// Generations from `(1, q0)` to the 0.001 ball for `n` values of d in
/// `[d_max / n, d_max]`, with equal grammatical advantages.
///
/// Returns `[d_0, g_0, d_1, g_1, ...]`; `g` is `NaN` past `max_gen`.
pub fn passage_curve(
    sigma: f64,
    q0: f64,
    d_max: f64,
    n: usize,
    max_gen: usize,
) -> Result<Vec<f64>> {
    let adv = GrammarAdvantages::new(1.0, 1.0)?;
    let mut out = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let d = d_max * i as f64 / n as f64;
        let params = reduce_params(&adv, d, sigma)?;
        let g = passage_time(&params, q0, PASSAGE_THRESHOLD, max_gen)
            .map(|g| g as f64)
            .unwrap_or(f64::NAN);
        out.extend([d, g]);
    }
    Ok(out)
}

/// Trajectories of `n_learners` learners, half of them L2, sampled every 100 tokens.
///
/// Layout: `[n_samples, kind_0, s_00, s_01, ..., kind_1, s_10, ...]` where
/// `kind` is 1 for L1 and 2 for L2.
#[allow(clippy::too_many_arguments)]
pub fn learner_trajectories(
    gamma: f64,
    d: f64,
    freq_g1: f64,
    alpha1: f64,
    alpha2: f64,
    n_learners: usize,
    tokens: u32,
    seed: u32,
) -> Result<Vec<f64>> {
    let adv = GrammarAdvantages::new(alpha1, alpha2)?;
    let config = PanelConfig {
        n_learners,
        l2_fraction: 0.5,
        tokens_per_learner: tokens as u64,
        g1_frequency: freq_g1,
        gamma,
        d,
        sample_every: SAMPLE_EVERY,
        seed: seed as u64,
    };
    let panel = simulate_panel(&config, &adv)?;
    let n_samples = panel.first().map_or(0, |l| l.trajectory.samples.len());
    let mut out = Vec::with_capacity(1 + panel.len() * (n_samples + 1));
    out.push(n_samples as f64);
    for l in &panel {
        out.push(match l.kind {
            LearnerKind::L1 => 1.0,
            LearnerKind::L2 => 2.0,
        });
        out.extend(l.trajectory.samples.iter().map(|&(_, p)| p));
    }
    Ok(out)
}

/// JavaScript entry points; each forwards to the native function of the same name.
pub mod js {
    use super::*;

    #[wasm_bindgen(js_name = orbitSlice)]
    pub fn orbit_slice(
        alpha: f64,
        difficulty: f64,
        n: usize,
    ) -> std::result::Result<Vec<f64>, JsError> {
        super::orbit_slice(alpha, difficulty, n).map_err(js_err)
    }

    #[wasm_bindgen(js_name = criticalSigma)]
    pub fn critical_sigma(alpha: f64, difficulty: f64) -> std::result::Result<f64, JsError> {
        super::critical_sigma(alpha, difficulty).map_err(js_err)
    }

    #[wasm_bindgen(js_name = phase)]
    pub fn phase(alpha: f64, difficulty: f64, sigma: f64) -> std::result::Result<String, JsError> {
        super::phase(alpha, difficulty, sigma).map_err(js_err)
    }

    #[wasm_bindgen(js_name = passageCurve)]
    pub fn passage_curve(
        sigma: f64,
        q0: f64,
        d_max: f64,
        n: usize,
        max_gen: usize,
    ) -> std::result::Result<Vec<f64>, JsError> {
        super::passage_curve(sigma, q0, d_max, n, max_gen).map_err(js_err)
    }

    #[wasm_bindgen(js_name = learnerTrajectories)]
    #[allow(clippy::too_many_arguments)]
    pub fn learner_trajectories(
        gamma: f64,
        d: f64,
        freq_g1: f64,
        alpha1: f64,
        alpha2: f64,
        n_learners: usize,
        tokens: u32,
        seed: u32,
    ) -> std::result::Result<Vec<f64>, JsError> {
        super::learner_trajectories(gamma, d, freq_g1, alpha1, alpha2, n_learners, tokens, seed)
            .map_err(js_err)
    }
}
