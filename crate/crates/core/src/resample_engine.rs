//! Local resampling and the dynamic sampler built on it.
//!
//! A run maintains a configuration `X` and a resample set `R`. Each round
//! computes the correcting factor `κ_e` of every constraint touching `R` from
//! the current `X`, redraws every variable in `R` from its weight vector, and
//! then marks a constraint as violated with probability `1 − κ_e·φ_e(X′_e)`.
//! The variables of the violated constraints form the next resample set.
//! When the resample set empties, `X` is an exact draw from the Gibbs
//! distribution of the current model.
//!
//! Within a round, variables and constraints are visited in ascending id
//! order. Every random draw is keyed by `(round, entity)` (see
//! [`crate::rng`]), so the parallel round mode returns the same values as the
//! sequential one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convergence;
use crate::error::{BudgetExceeded, Error, Result};
use crate::factor_graph::{
    Configuration, ConstraintId, GraphicalModel, UpdateRequest, VarId, VarSet,
};
use crate::rng::{DrawKind, RngStream};

/// The pair `(X, R)`. The sanity set is the complement of `resample_set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleState {
    pub config: Configuration,
    pub resample_set: VarSet,
}

impl ResampleState {
    pub fn new(config: Configuration, resample_set: VarSet) -> Self {
        Self {
            config,
            resample_set,
        }
    }

    pub fn is_done(&self) -> bool {
        self.resample_set.is_empty()
    }
}

/// Work done by a single round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub variable_resamples: u64,
    pub coin_flips: u64,
    pub kappa_evaluations: u64,
}

/// Counters for one dynamic-sampling run.
///
/// `r_sizes[t]` is `|R_t|` at the start of round `t`, followed by the final
/// (empty) size; `potentials` follows the same indexing when recorded.
/// `kappa_evaluations` is reported apart from the resampling cost.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStats {
    pub iterations: u64,
    pub variable_resamples: u64,
    pub coin_flips: u64,
    pub kappa_evaluations: u64,
    pub r_sizes: Vec<usize>,
    pub potentials: Option<Vec<u64>>,
}

impl TraceStats {
    /// Variable resamplings plus indicator draws.
    pub fn total_resamples(&self) -> u64 {
        self.variable_resamples + self.coin_flips
    }

    pub(crate) fn add_round(&mut self, round: RoundStats) {
        self.iterations += 1;
        self.variable_resamples += round.variable_resamples;
        self.coin_flips += round.coin_flips;
        self.kappa_evaluations += round.kappa_evaluations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundMode {
    #[default]
    Sequential,
    Parallel,
}

/// How boundary constraints get their correcting factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaRule {
    #[default]
    Exact,
    /// `κ_e = 1` on boundary constraints, i.e. plain Moser–Tardos style
    /// resampling. Biased; exists as a negative control for the statistical
    /// tests.
    BoundaryForcedToOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineOptions {
    pub mode: RoundMode,
    pub kappa: KappaRule,
    /// Round budget; `None` uses [`default_budget`].
    pub budget: Option<u64>,
    pub record_potential: bool,
}

impl EngineOptions {
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_mode(mut self, mode: RoundMode) -> Self {
        self.mode = mode;
        self
    }
}

/// `1000·(1 + log₂(1 + |R₀|))` rounds.
pub fn default_budget(initial_size: usize) -> u64 {
    (1000.0 * (1.0 + (1.0 + initial_size as f64).log2())).ceil() as u64
}

/// Expansion of the resample set ahead of a round. The returned set must
/// contain `resample_set` and may depend only on `resample_set` and the
/// values of `config` inside it.
pub trait ExpandStrategy: Sync {
    fn expand(
        &self,
        model: &GraphicalModel,
        config: &Configuration,
        resample_set: &VarSet,
    ) -> VarSet;
}

/// `Expand(X, R) = R`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialExpand;

impl ExpandStrategy for TrivialExpand {
    fn expand(&self, _: &GraphicalModel, _: &Configuration, resample_set: &VarSet) -> VarSet {
        resample_set.clone()
    }
}

/// Expands any non-empty resample set to every variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullExpand;

impl ExpandStrategy for FullExpand {
    fn expand(&self, model: &GraphicalModel, _: &Configuration, resample_set: &VarSet) -> VarSet {
        if resample_set.is_empty() {
            VarSet::new()
        } else {
            model.all_variables()
        }
    }
}

/// Correcting factor of constraint `e` against resample set `r`: the minimum
/// of `φ_e` over assignments that agree with `config` on `e ∩ r`, divided by
/// `φ_e(config_e)`, with `0/0 = 1`.
pub fn compute_kappa(model: &GraphicalModel, config: &[usize], r: &VarSet, e: ConstraintId) -> f64 {
    let c = model.constraint(e);
    let current = c.value(config);
    let least = c.min_agreeing(config, |v| r.contains(&v));
    if current == 0.0 {
        // least <= current, so this is 0/0
        return 1.0;
    }
    least / current
}

fn draw_variable(model: &GraphicalModel, rng: &RngStream, round: u64, v: VarId) -> usize {
    model
        .variable(v)
        .sample(&mut rng.entity(round, DrawKind::Variable, v))
}

/// `F_e = 1` (violated) with probability `1 − p_keep`.
fn draw_violation(rng: &RngStream, round: u64, e: ConstraintId, p_keep: f64) -> bool {
    assert!(
        (-1e-12..=1.0 + 1e-9).contains(&p_keep),
        "coin probability {p_keep} for constraint {e} outside [0, 1]"
    );
    rng.entity(round, DrawKind::Coin, e).random::<f64>() >= p_keep
}

/// One round of local resampling on `state`.
pub fn local_resample(
    model: &GraphicalModel,
    state: ResampleState,
    rng: &RngStream,
    round: u64,
    opts: &EngineOptions,
) -> (ResampleState, RoundStats) {
    let ResampleState {
        mut config,
        resample_set: r,
    } = state;
    if r.is_empty() {
        return (ResampleState::new(config, r), RoundStats::default());
    }
    let incident = model.incident_constraints(&r);

    // κ from the configuration before any variable is redrawn.
    let kappa_of = |e: ConstraintId| -> f64 {
        let internal = model.constraint(e).scope().iter().all(|v| r.contains(v));
        match opts.kappa {
            KappaRule::BoundaryForcedToOne if !internal => 1.0,
            _ => compute_kappa(model, &config, &r, e),
        }
    };
    let kappas: Vec<f64> = incident.iter().map(|e| kappa_of(*e)).collect();

    let vars: Vec<VarId> = r.iter().copied().collect();
    let violated: Vec<bool> = match opts.mode {
        #[cfg(feature = "parallel")]
        RoundMode::Parallel => {
            use rayon::prelude::*;
            let fresh: Vec<usize> = vars
                .par_iter()
                .map(|v| draw_variable(model, rng, round, *v))
                .collect();
            for (v, x) in vars.iter().zip(fresh) {
                config[*v] = x;
            }
            incident
                .par_iter()
                .zip(kappas.par_iter())
                .map(|(e, k)| {
                    draw_violation(rng, round, *e, k * model.constraint(*e).value(&config))
                })
                .collect()
        }
        _ => {
            for v in &vars {
                config[*v] = draw_variable(model, rng, round, *v);
            }
            incident
                .iter()
                .zip(&kappas)
                .map(|(e, k)| {
                    draw_violation(rng, round, *e, k * model.constraint(*e).value(&config))
                })
                .collect()
        }
    };

    let next: VarSet = incident
        .iter()
        .zip(&violated)
        .filter(|(_, f)| **f)
        .flat_map(|(e, _)| model.constraint(*e).scope().iter().copied())
        .collect();
    let stats = RoundStats {
        variable_resamples: vars.len() as u64,
        coin_flips: incident.len() as u64,
        kappa_evaluations: incident.len() as u64,
    };
    (ResampleState::new(config, next), stats)
}

/// One round of the generalized sampler: expand, then resample locally.
pub fn gen_resample(
    model: &GraphicalModel,
    state: ResampleState,
    strategy: &dyn ExpandStrategy,
    rng: &RngStream,
    round: u64,
    opts: &EngineOptions,
) -> (ResampleState, RoundStats) {
    let expanded = strategy.expand(model, &state.config, &state.resample_set);
    debug_assert!(expanded.is_superset(&state.resample_set));
    local_resample(
        model,
        ResampleState::new(state.config, expanded),
        rng,
        round,
        opts,
    )
}

fn potential_of(model: &GraphicalModel, r: &VarSet) -> u64 {
    // Variables without constraints cannot be covered; they leave after one
    // round, so the potential ignores them.
    let covered: VarSet = r
        .iter()
        .copied()
        .filter(|v| !model.incident(*v).is_empty())
        .collect();
    convergence::potential_h(model, &covered)
        .map(|p| p.value)
        .unwrap_or(0)
}

/// Runs the dynamic sampler from `state0` until the resample set is empty.
///
/// `model` must be normalized. If `state0.config` is an exact sample of the
/// pre-update model and the resample set is `vbl(D)`, the returned
/// configuration is an exact sample of `model`.
pub fn dynamic_sample(
    model: &GraphicalModel,
    state0: ResampleState,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<(Configuration, TraceStats)> {
    dynamic_sample_with(model, state0, &TrivialExpand, rng, opts)
}

pub fn dynamic_sample_with(
    model: &GraphicalModel,
    state0: ResampleState,
    strategy: &dyn ExpandStrategy,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<(Configuration, TraceStats)> {
    if !model.is_normalized() {
        return Err(Error::NotNormalized);
    }
    model.check_configuration(&state0.config)?;
    if let Some(v) = state0
        .resample_set
        .iter()
        .find(|v| **v >= model.num_variables())
    {
        return Err(Error::UnknownVariable {
            id: *v,
            n: model.num_variables(),
        });
    }
    let budget = opts
        .budget
        .unwrap_or_else(|| default_budget(state0.resample_set.len()));
    let mut stats = TraceStats {
        potentials: opts.record_potential.then(Vec::new),
        ..TraceStats::default()
    };
    let mut state = state0;
    loop {
        stats.r_sizes.push(state.resample_set.len());
        if let Some(p) = stats.potentials.as_mut() {
            p.push(potential_of(model, &state.resample_set));
        }
        if state.is_done() {
            return Ok((state.config, stats));
        }
        if stats.iterations >= budget {
            return Err(Error::BudgetExceeded(Box::new(BudgetExceeded {
                state,
                stats,
            })));
        }
        let (next, round) = gen_resample(model, state, strategy, rng, stats.iterations, opts);
        stats.add_round(round);
        state = next;
    }
}

/// Draw from the product distribution `⊗_v φ_v`.
pub fn product_sample(model: &GraphicalModel, rng: &RngStream) -> Configuration {
    Configuration::new(
        (0..model.num_variables())
            .map(|v| draw_variable(model, rng, 0, v))
            .collect(),
    )
}

/// Result of threading a sample through an update stream.
#[derive(Debug, Clone)]
pub struct StreamOutcome {
    pub model: GraphicalModel,
    pub config: Configuration,
    pub stats: Vec<TraceStats>,
}

/// Applies each update in turn and repairs the sample after each one.
/// Update `i` draws from `rng.split("update", i)`.
pub fn run_update_stream(
    model: &GraphicalModel,
    x0: Configuration,
    updates: &[UpdateRequest],
    strategy: &dyn ExpandStrategy,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<StreamOutcome> {
    let mut model = model.normalize();
    let mut config = x0;
    let mut stats = Vec::with_capacity(updates.len());
    for (index, update) in updates.iter().enumerate() {
        let wrap = |source: Error| Error::Stream {
            index,
            source: Box::new(source),
        };
        let next = model.apply_update(update).map_err(wrap)?;
        let state = ResampleState::new(config, next.vbl(update));
        let (x, st) = dynamic_sample_with(
            &next,
            state,
            strategy,
            &rng.split("update", index as u64),
            opts,
        )
        .map_err(wrap)?;
        config = x;
        stats.push(st);
        model = next;
    }
    Ok(StreamOutcome {
        model,
        config,
        stats,
    })
}

/// Exact sample of `model` obtained by starting from its product
/// distribution and adding its constraints one update at a time.
pub fn bootstrap_sample(
    model: &GraphicalModel,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<Configuration> {
    let model = model.normalize();
    let empty = GraphicalModel::unconstrained(model.variables().to_vec());
    let updates: Vec<UpdateRequest> = model
        .constraints()
        .map(|(_, c)| UpdateRequest::new().set_constraint(c.scope().to_vec(), c.table().to_vec()))
        .collect();
    let x0 = product_sample(&empty, &rng.split("product", 0));
    let out = run_update_stream(
        &empty,
        x0,
        &updates,
        &TrivialExpand,
        &rng.split("build", 0),
        opts,
    )?;
    Ok(out.config)
}
