//! Regime checks and potential-function diagnostics for the samplers'
//! convergence behaviour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_graph::{GraphicalModel, UpdateRequest, VarId, VarSet};
use crate::oracle::exact_gibbs;
use crate::resample_engine::{bootstrap_sample, local_resample, EngineOptions, ResampleState};
use crate::rng::RngStream;
use crate::spin_models::{hardcore_round, HardcoreModel, HardcoreUpdate, IsingModel, PottsModel};

/// Exact set cover is attempted only up to this many candidate constraints.
pub const EXACT_COVER_LIMIT: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// Outcome of a sufficient-condition check. `margin ≥ 0` iff satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub condition: String,
    pub satisfied: bool,
    pub margin: f64,
    pub params: RegimeParams,
}

impl RegimeReport {
    fn new(condition: &str, margin: f64, params: RegimeParams) -> Self {
        Self {
            condition: condition.to_string(),
            satisfied: margin >= 0.0,
            margin,
            params,
        }
    }
}

/// Smallest admissible `B_e` for dependency degree `d`:
/// `(1 − (1−δ)/(d+1))^{1/2}`.
pub fn soft_threshold(d: usize, delta: f64) -> f64 {
    (1.0 - (1.0 - delta) / (d as f64 + 1.0)).sqrt()
}

pub fn check_soft_condition(model: &GraphicalModel, delta: f64) -> RegimeReport {
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    let model = model.normalize();
    let d = model.dependency_degree();
    let threshold = soft_threshold(d, delta);
    let min_b = model.min_lower_bound();
    RegimeReport::new(
        "soft",
        min_b - threshold,
        RegimeParams {
            d: Some(d),
            delta: Some(delta),
            min_b: Some(min_b),
            threshold: Some(threshold),
            ..RegimeParams::default()
        },
    )
}

/// Root of `α = 1 + 2/(1 + e^{−1/α})` by fixed-point iteration.
pub fn solve_alpha() -> f64 {
    let map = |a: f64| 1.0 + 2.0 / (1.0 + (-1.0 / a).exp());
    let mut alpha = 2.0;
    for _ in 0..200 {
        let next = map(alpha);
        if (next - alpha).abs() < 1e-12 {
            return next;
        }
        alpha = next;
    }
    alpha
}

/// `δ(α, Δ) = 1 / (α (1 + e^{−1/α}) (αΔ + 1))`.
pub fn delta_alpha(alpha: f64, max_degree: usize) -> f64 {
    1.0 / (alpha * (1.0 + (-1.0 / alpha).exp()) * (alpha * max_degree as f64 + 1.0))
}

/// Largest `|β|` with `e^{−2|β|} ≥ 1 − 1/(αΔ+1)`.
pub fn ising_beta_threshold(max_degree: usize) -> f64 {
    let alpha = solve_alpha();
    -0.5 * (1.0 - 1.0 / (alpha * max_degree as f64 + 1.0)).ln()
}

/// `1/(√2·Δ − 1)`, infinite for an edgeless graph.
pub fn hardcore_lambda_threshold(max_degree: usize) -> f64 {
    if max_degree == 0 {
        return f64::INFINITY;
    }
    1.0 / (std::f64::consts::SQRT_2 * max_degree as f64 - 1.0)
}

fn pairwise_regime(condition: &str, max_degree: usize, beta_star: f64) -> RegimeReport {
    let alpha = solve_alpha();
    let threshold = 1.0 - 1.0 / (alpha * max_degree as f64 + 1.0);
    RegimeReport::new(
        condition,
        (-2.0 * beta_star).exp() - threshold,
        RegimeParams {
            max_degree: Some(max_degree),
            beta_star: Some(beta_star),
            alpha: Some(alpha),
            threshold: Some(threshold),
            ..RegimeParams::default()
        },
    )
}

pub fn check_ising_regime(ising: &IsingModel) -> RegimeReport {
    pairwise_regime("ising", ising.max_degree(), ising.beta_star())
}

/// Potts models share the Ising bound.
pub fn check_potts_regime(potts: &PottsModel) -> RegimeReport {
    pairwise_regime("potts", potts.max_degree(), potts.beta_star())
}

pub fn check_hardcore_regime(hc: &HardcoreModel) -> RegimeReport {
    let max_degree = hc.max_degree();
    let threshold = hardcore_lambda_threshold(max_degree);
    let lambda_max = hc.lambda().iter().copied().fold(0.0, f64::max);
    let margin = if threshold.is_infinite() {
        f64::INFINITY
    } else {
        threshold - lambda_max
    };
    RegimeReport::new(
        "hardcore",
        margin,
        RegimeParams {
            max_degree: Some(max_degree),
            lambda_max: Some(lambda_max),
            threshold: Some(threshold),
            ..RegimeParams::default()
        },
    )
}

/// A set-cover value and whether it is known to be optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Potential {
    pub value: u64,
    pub exact: bool,
}

/// Minimum number of `candidates` whose union contains `universe`.
///
/// Optimal by branch and bound when there are at most
/// [`EXACT_COVER_LIMIT`] useful candidates (and at most 128 elements),
/// greedy otherwise. Returns `None` if some element is in no candidate.
pub fn set_cover<'a>(
    universe: &VarSet,
    candidates: impl IntoIterator<Item = &'a [VarId]>,
) -> Option<Potential> {
    if universe.is_empty() {
        return Some(Potential {
            value: 0,
            exact: true,
        });
    }
    let elems: Vec<VarId> = universe.iter().copied().collect();
    let mut masks: Vec<Vec<bool>> = candidates
        .into_iter()
        .map(|scope| {
            elems
                .iter()
                .map(|v| scope.contains(v))
                .collect::<Vec<bool>>()
        })
        .filter(|m| m.iter().any(|b| *b))
        .collect();
    masks.sort();
    masks.dedup();
    let coverable = (0..elems.len()).all(|i| masks.iter().any(|m| m[i]));
    if !coverable {
        return None;
    }
    if masks.len() <= EXACT_COVER_LIMIT && elems.len() <= 128 {
        let bits: Vec<u128> = masks
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .fold(0u128, |acc, (i, _)| acc | 1 << i)
            })
            .collect();
        let full = if elems.len() == 128 {
            u128::MAX
        } else {
            (1u128 << elems.len()) - 1
        };
        let mut best = greedy_cover(&masks);
        branch_cover(&bits, full, 0, 0, &mut best);
        return Some(Potential {
            value: best as u64,
            exact: true,
        });
    }
    Some(Potential {
        value: greedy_cover(&masks) as u64,
        exact: false,
    })
}

fn greedy_cover(masks: &[Vec<bool>]) -> usize {
    let n = masks.first().map_or(0, Vec::len);
    let mut covered = vec![false; n];
    let mut used = 0;
    while covered.iter().any(|c| !c) {
        let gain = |m: &Vec<bool>| m.iter().zip(&covered).filter(|(b, c)| **b && !**c).count();
        let pick = masks
            .iter()
            .max_by(|a, b| gain(a).cmp(&gain(b)).then(std::cmp::Ordering::Greater))
            .expect("coverable universe has candidates");
        for (c, b) in covered.iter_mut().zip(pick) {
            *c |= *b;
        }
        used += 1;
    }
    used
}

fn branch_cover(bits: &[u128], full: u128, covered: u128, depth: usize, best: &mut usize) {
    if covered == full {
        *best = (*best).min(depth);
        return;
    }
    if depth + 1 >= *best {
        return;
    }
    let first_missing = (!covered & full).trailing_zeros();
    for m in bits.iter().filter(|m| (*m >> first_missing) & 1 == 1) {
        branch_cover(bits, full, covered | m, depth + 1, best);
    }
}

/// `H(R)`: the minimum number of constraints covering `R`.
pub fn potential_h(model: &GraphicalModel, r: &VarSet) -> Result<Potential> {
    if let Some(v) = r.iter().find(|v| model.incident(**v).is_empty()) {
        return Err(Error::UncoveredVariable { var: *v });
    }
    let candidates = model.incident_constraints(r);
    set_cover(r, candidates.iter().map(|e| model.constraint(*e).scope()))
        .ok_or(Error::InvalidModel("resample set cannot be covered".into()))
}

/// `H_HC(R) = |E(R)|`, the number of constraints inside `R`.
pub fn potential_h_hardcore(model: &GraphicalModel, r: &VarSet) -> u64 {
    model.constraint_partition(r).internal.len() as u64
}

/// Monte Carlo estimate of the one-round potential ratio `E[H(R′)]/H(R₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub condition: String,
    pub satisfied: bool,
    pub margin: f64,
    pub empirical_ratio: f64,
    pub bound: f64,
    pub stderr: f64,
    pub trials: u64,
    pub initial_potential: u64,
}

impl DecayReport {
    /// Empirical ratio within three standard errors of the bound.
    pub fn within_bound(&self) -> bool {
        self.empirical_ratio <= self.bound + 3.0 * self.stderr
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One round of local resampling from `(X, vbl(D))`, repeated `trials`
/// times, against the bound `1 − δ`. `X` is an exact sample of `pre_model`
/// (enumerated when small enough, bootstrapped otherwise).
pub fn decay_experiment(
    pre_model: &GraphicalModel,
    update: &UpdateRequest,
    delta: f64,
    trials: u64,
    rng: &RngStream,
) -> Result<DecayReport> {
    let pre_model = pre_model.normalize();
    let post = pre_model.apply_update(update)?;
    let regime = check_soft_condition(&post, delta);
    let r0 = post.vbl(update);
    let h0 = potential_h(&post, &r0)?.value;
    let opts = EngineOptions::default();
    let exact = exact_gibbs(&pre_model).and_then(|d| d.sampler()).ok();
    let mut ratios = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let trial = rng.split("trial", i);
        let x = match &exact {
            Some(s) => s.sample(&mut trial.split("initial", 0).rng()),
            None => bootstrap_sample(&pre_model, &trial.split("initial", 0), &opts)?,
        };
        let (next, _) = local_resample(
            &post,
            ResampleState::new(x, r0.clone()),
            &trial.split("engine", 0),
            0,
            &opts,
        );
        let h1 = potential_h(&post, &next.resample_set)?.value;
        ratios.push(if h0 == 0 { 0.0 } else { h1 as f64 / h0 as f64 });
    }
    let (mean, stderr) = mean_and_stderr(&ratios);
    Ok(DecayReport {
        condition: "soft".into(),
        satisfied: regime.satisfied,
        margin: regime.margin,
        empirical_ratio: mean,
        bound: 1.0 - delta,
        stderr,
        trials,
        initial_potential: h0,
    })
}

/// Hardcore analogue with `H_HC` and the bound `1 − 1/(2Δ)`. Each trial
/// bootstraps an exact sample of `pre`, applies `update` and runs one round
/// of the hardcore sampler.
pub fn hardcore_decay_experiment(
    pre: &HardcoreModel,
    update: &HardcoreUpdate,
    trials: u64,
    rng: &RngStream,
) -> Result<DecayReport> {
    let post = pre.apply_update(update)?;
    let regime = check_hardcore_regime(&post);
    let r0 = post.vbl(update);
    let h0 = post.internal_edges(&r0) as u64;
    let opts = EngineOptions::default();
    let mut ratios = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let trial = rng.split("trial", i);
        let x = pre.bootstrap_sample(&trial.split("initial", 0), &opts)?;
        let (next, _) = hardcore_round(
            &post,
            ResampleState::new(x, r0.clone()),
            &trial.split("engine", 0),
            0,
        );
        let h1 = post.internal_edges(&next.resample_set) as u64;
        ratios.push(if h0 == 0 { 0.0 } else { h1 as f64 / h0 as f64 });
    }
    let (mean, stderr) = mean_and_stderr(&ratios);
    Ok(DecayReport {
        condition: "hardcore".into(),
        satisfied: regime.satisfied,
        margin: regime.margin,
        empirical_ratio: mean,
        bound: 1.0 - 1.0 / (2.0 * post.max_degree().max(1) as f64),
        stderr,
        trials,
        initial_potential: h0,
    })
}
