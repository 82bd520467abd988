//! Brute-force ground truth: exact Gibbs enumeration, conditional marginals
//! with boundary conditions, and the distance statistics used to check the
//! samplers.
//!
//! Joint states are indexed row-major with the lowest variable id most
//! significant, matching the constraint-table layout.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_graph::{Configuration, GraphicalModel, UpdateRequest, VarId, VarSet};
use crate::resample_engine::{local_resample, EngineOptions, ResampleState};
use crate::rng::RngStream;

/// Largest joint state space the oracle will enumerate.
pub const MAX_STATES: u128 = 1 << 22;

fn state_count(dims: &[usize]) -> Result<usize> {
    let states = dims
        .iter()
        .try_fold(1u128, |acc, q| acc.checked_mul(*q as u128))
        .unwrap_or(u128::MAX);
    if states > MAX_STATES {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: MAX_STATES,
        });
    }
    Ok(states as usize)
}

/// Mixed-radix index over a list of domain sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateIndexer {
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl StateIndexer {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let size = state_count(&dims)?;
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(Self {
            dims,
            strides,
            size,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn index(&self, values: impl IntoIterator<Item = usize>) -> usize {
        values
            .into_iter()
            .zip(&self.strides)
            .map(|(x, s)| x * s)
            .sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let x = index / s;
                index %= s;
                x
            })
            .collect()
    }
}

/// A probability vector over an enumerated state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
    /// Normalizing constant of the enumerated weights.
    pub z: f64,
    /// Set when every weight is zero; `probs` is then all zeros.
    pub degenerate: bool,
}

impl ExactDistribution {
    fn from_weights(dims: Vec<usize>, weights: Vec<f64>) -> Self {
        let z: f64 = weights.iter().sum();
        if z == 0.0 {
            return Self {
                dims,
                probs: weights,
                z,
                degenerate: true,
            };
        }
        Self {
            dims,
            probs: weights.into_iter().map(|w| w / z).collect(),
            z,
            degenerate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn indexer(&self) -> StateIndexer {
        StateIndexer::new(self.dims.clone()).expect("distribution was enumerated")
    }

    pub fn prob_of(&self, values: &[usize]) -> f64 {
        self.probs[self.indexer().index(values.iter().copied())]
    }

    pub fn sampler(&self) -> Result<ExactSampler> {
        let index = WeightedIndex::new(&self.probs).map_err(|_| Error::ZeroPartition)?;
        Ok(ExactSampler {
            indexer: self.indexer(),
            index,
        })
    }
}

/// Draws full configurations from an [`ExactDistribution`].
#[derive(Debug, Clone)]
pub struct ExactSampler {
    indexer: StateIndexer,
    index: WeightedIndex<f64>,
}

impl ExactSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        Configuration::new(self.indexer.decode(self.index.sample(rng)))
    }
}

/// Enumerates `μ(σ) = w(σ)/Z` over every configuration.
pub fn exact_gibbs(model: &GraphicalModel) -> Result<ExactDistribution> {
    let indexer = StateIndexer::new(model.domain_sizes())?;
    let weights: Vec<f64> = (0..indexer.size())
        .map(|i| model.weight(&indexer.decode(i)))
        .collect();
    let dist = ExactDistribution::from_weights(model.domain_sizes(), weights);
    if dist.degenerate {
        return Err(Error::ZeroPartition);
    }
    Ok(dist)
}

/// `μ̄_S^τ`: the law on `S` proportional to
/// `∏_{v∈S} φ_v(σ_v) · ∏_{e∩S≠∅} φ_e((σ∪τ)_e)`.
///
/// Only the values of `tau` outside `S` are read. States are indexed over
/// `S` in ascending variable order. When every weight vanishes the result is
/// the all-zero vector with `degenerate` set.
pub fn conditional_marginal(
    model: &GraphicalModel,
    s: &VarSet,
    tau: &Configuration,
) -> Result<ExactDistribution> {
    model.check_configuration(tau)?;
    let vars: Vec<VarId> = s.iter().copied().collect();
    let dims: Vec<usize> = vars.iter().map(|v| model.variable(*v).q()).collect();
    let indexer = StateIndexer::new(dims.clone())?;
    let touching = model.incident_constraints(s);
    let mut full = tau.clone();
    let weights = (0..indexer.size())
        .map(|i| {
            let sigma = indexer.decode(i);
            let mut w = 1.0;
            for (v, x) in vars.iter().zip(&sigma) {
                full[*v] = *x;
                w *= model.variable(*v).weight(*x);
            }
            for e in &touching {
                w *= model.constraint(*e).value(&full);
            }
            w
        })
        .collect();
    Ok(ExactDistribution::from_weights(dims, weights))
}

/// Half the L1 distance between two probability vectors.
pub fn tvd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Typical TVD between a `k`-state distribution and an `n`-sample empirical
/// estimate of it: `√(k/(2πn))`.
pub fn multinomial_noise(k: usize, n: u64) -> f64 {
    (k as f64 / (2.0 * std::f64::consts::PI * n as f64)).sqrt()
}

/// Sample counts over an enumerated state space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl EmpiricalDistribution {
    pub fn new(states: usize) -> Self {
        Self {
            counts: vec![0; states],
            total: 0,
        }
    }

    pub fn from_indices(states: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut emp = Self::new(states);
        for i in indices {
            emp.add(i);
        }
        emp
    }

    pub fn add(&mut self, index: usize) {
        self.counts[index] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalDistribution) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn probs(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|c| *c as f64 / self.total as f64)
            .collect()
    }

    pub fn tvd_to(&self, reference: &[f64]) -> Result<f64> {
        tvd(&self.probs(), reference)
    }

    /// Pearson statistic against `reference`, over states with positive
    /// reference mass, plus the number of samples that landed on zero-mass
    /// states.
    pub fn chi_square(&self, reference: &[f64]) -> Result<ChiSquare> {
        if reference.len() != self.counts.len() {
            return Err(Error::SupportMismatch {
                left: self.counts.len(),
                right: reference.len(),
            });
        }
        let n = self.total as f64;
        let mut stat = 0.0;
        let mut cells = 0usize;
        let mut impossible = 0u64;
        for (c, p) in self.counts.iter().zip(reference) {
            if *p > 0.0 {
                let expected = n * p;
                stat += (*c as f64 - expected).powi(2) / expected;
                cells += 1;
            } else {
                impossible += c;
            }
        }
        Ok(ChiSquare {
            statistic: stat,
            degrees_of_freedom: cells.saturating_sub(1),
            impossible_samples: impossible,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub impossible_samples: u64,
}

/// Default bucket floor for the conditional-Gibbs check.
pub const MIN_BUCKET: u64 = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub resample_set: Vec<VarId>,
    pub tau: Vec<usize>,
    pub samples: u64,
    pub states: usize,
    pub tvd: f64,
    pub noise: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalGibbsReport {
    pub round: u64,
    pub trials: u64,
    pub min_bucket: u64,
    pub buckets: Vec<BucketReport>,
    pub skipped_buckets: usize,
    pub skipped_samples: u64,
    pub max_tvd: f64,
}

impl ConditionalGibbsReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_tvd <= tolerance
    }

    pub fn summary_line(&self, tolerance: f64) -> String {
        format!(
            "{} conditional-gibbs round={} buckets={} skipped={} max_tvd={:.4} tol={}",
            if self.passes(tolerance) {
                "PASS"
            } else {
                "FAIL"
            },
            self.round,
            self.buckets.len(),
            self.skipped_buckets,
            self.max_tvd,
            tolerance
        )
    }
}

/// Groups snapshots `(X, R)` by `(R, X_R)` and compares, in every bucket with
/// at least `min_bucket` samples, the empirical law of `X` off `R` with
/// [`conditional_marginal`].
pub fn bucket_snapshots(
    model: &GraphicalModel,
    snapshots: impl IntoIterator<Item = ResampleState>,
    round: u64,
    min_bucket: u64,
) -> Result<ConditionalGibbsReport> {
    let n = model.num_variables();
    let mut buckets: HashMap<(Vec<VarId>, Vec<usize>), (Configuration, EmpiricalDistribution)> =
        HashMap::new();
    let mut trials = 0;
    for snap in snapshots {
        trials += 1;
        let r: Vec<VarId> = snap.resample_set.iter().copied().collect();
        let tau: Vec<usize> = r.iter().map(|v| snap.config[*v]).collect();
        let sanity: Vec<VarId> = (0..n).filter(|v| !snap.resample_set.contains(v)).collect();
        let entry = buckets.entry((r, tau)).or_insert_with(|| {
            let dims = sanity.iter().map(|v| model.variable(*v).q()).collect();
            let states = StateIndexer::new(dims).map(|ix| ix.size()).unwrap_or(0);
            (snap.config.clone(), EmpiricalDistribution::new(states))
        });
        let dims: Vec<usize> = sanity.iter().map(|v| model.variable(*v).q()).collect();
        let idx = StateIndexer::new(dims)?.index(sanity.iter().map(|v| snap.config[*v]));
        entry.1.add(idx);
    }

    let mut keys: Vec<_> = buckets.keys().cloned().collect();
    keys.sort();
    let mut report = ConditionalGibbsReport {
        round,
        trials,
        min_bucket,
        buckets: Vec::new(),
        skipped_buckets: 0,
        skipped_samples: 0,
        max_tvd: 0.0,
    };
    for key in keys {
        let (witness, emp) = &buckets[&key];
        if emp.total < min_bucket {
            report.skipped_buckets += 1;
            report.skipped_samples += emp.total;
            continue;
        }
        let r: VarSet = key.0.iter().copied().collect();
        let sanity: VarSet = (0..n).filter(|v| !r.contains(v)).collect();
        let reference = conditional_marginal(model, &sanity, witness)?;
        let distance = emp.tvd_to(&reference.probs)?;
        report.max_tvd = report.max_tvd.max(distance);
        report.buckets.push(BucketReport {
            resample_set: key.0.clone(),
            tau: key.1.clone(),
            samples: emp.total,
            states: emp.counts.len(),
            tvd: distance,
            noise: multinomial_noise(emp.counts.len(), emp.total),
            degenerate: reference.degenerate,
        });
    }
    Ok(report)
}

/// Snapshots `(X_t, R_t)` after `round` rounds of local resampling on the
/// updated model, starting each trial from an exact sample of `pre_model`
/// and `R_0 = vbl(update)`. Trial `i` draws from `rng.split("trial", i)`.
pub fn snapshot_rounds(
    pre_model: &GraphicalModel,
    update: &UpdateRequest,
    trials: u64,
    round: u64,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<(GraphicalModel, Vec<ResampleState>)> {
    let pre_model = pre_model.normalize();
    let post = pre_model.apply_update(update)?;
    let sampler = exact_gibbs(&pre_model)?.sampler()?;
    let r0 = post.vbl(update);
    let run = |i: u64| {
        let trial = rng.split("trial", i);
        let x = sampler.sample(&mut trial.split("initial", 0).rng());
        let engine = trial.split("engine", 0);
        let mut state = ResampleState::new(x, r0.clone());
        for t in 0..round {
            state = local_resample(&post, state, &engine, t, opts).0;
        }
        state
    };
    #[cfg(feature = "parallel")]
    let snaps = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let snaps = (0..trials).map(run).collect();
    Ok((post, snaps))
}

/// Empirical check that `(X_t, V∖R_t)` is conditionally Gibbs after `round`
/// rounds (see [`snapshot_rounds`] and [`bucket_snapshots`]).
pub fn conditional_gibbs_test(
    pre_model: &GraphicalModel,
    update: &UpdateRequest,
    trials: u64,
    round: u64,
    min_bucket: u64,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<ConditionalGibbsReport> {
    let (post, snaps) = snapshot_rounds(pre_model, update, trials, round, rng, opts)?;
    bucket_snapshots(&post, snaps, round, min_bucket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::VariableFactor;

    #[test]
    fn indexer_round_trips() {
        let ix = StateIndexer::new(vec![2, 3, 2]).unwrap();
        assert_eq!(ix.size(), 12);
        for i in 0..12 {
            assert_eq!(ix.index(ix.decode(i)), i);
        }
        assert_eq!(ix.index([1, 0, 0]), 6);
        assert_eq!(ix.index([0, 2, 1]), 5);
    }

    #[test]
    fn too_large_state_space_rejected() {
        let m = GraphicalModel::unconstrained(vec![VariableFactor::uniform(2); 23]);
        assert!(matches!(
            exact_gibbs(&m),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn constraint_free_is_product() {
        let m = GraphicalModel::from_tables(vec![vec![0.2, 0.8], vec![0.5, 0.25, 0.25]], vec![])
            .unwrap();
        let d = exact_gibbs(&m).unwrap();
        let expected = [0.1, 0.05, 0.05, 0.4, 0.2, 0.2];
        for (p, e) in d.probs.iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
    }

    #[test]
    fn single_edge_ising_closed_form() {
        let beta: f64 = 0.8;
        let t = vec![1.0, (-2.0 * beta).exp(), (-2.0 * beta).exp(), 1.0];
        let m =
            GraphicalModel::from_tables(vec![vec![0.5, 0.5]; 2], vec![(vec![0, 1], t)]).unwrap();
        let d = exact_gibbs(&m).unwrap();
        let agree = d.probs[0] + d.probs[3];
        let closed = beta.exp() / (beta.exp() + (-beta).exp());
        assert!((agree - closed).abs() < 1e-14);
    }

    #[test]
    fn hardcore_single_edge() {
        let m = GraphicalModel::from_tables(
            vec![vec![0.5, 0.5]; 2],
            vec![(vec![0, 1], vec![1.0, 1.0, 1.0, 0.0])],
        )
        .unwrap();
        let d = exact_gibbs(&m).unwrap();
        for (p, e) in d.probs.iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) {
            assert!((p - e).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_partition_reported() {
        let m = GraphicalModel::from_tables(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![(vec![0, 1], vec![1.0, 0.0, 0.0, 1.0])],
        )
        .unwrap();
        assert!(matches!(exact_gibbs(&m), Err(Error::ZeroPartition)));
    }

    #[test]
    fn conditional_marginal_edge_cases() {
        let m = GraphicalModel::from_tables(
            vec![vec![0.3, 0.7], vec![0.5, 0.5], vec![0.6, 0.4]],
            vec![
                (vec![0, 1], vec![1.0, 0.4, 0.4, 1.0]),
                (vec![1, 2], vec![0.2, 1.0, 1.0, 0.5]),
            ],
        )
        .unwrap();
        let full = conditional_marginal(&m, &m.all_variables(), &Configuration::zeros(3)).unwrap();
        let exact = exact_gibbs(&m).unwrap();
        assert!(tvd(&full.probs, &exact.probs).unwrap() < 1e-15);

        let point =
            conditional_marginal(&m, &VarSet::new(), &Configuration::new(vec![1, 0, 1])).unwrap();
        assert_eq!(point.probs, vec![1.0]);
        assert!(!point.degenerate);
    }

    #[test]
    fn infeasible_boundary_gives_flagged_zero_distribution() {
        // x0 = x1 = x2 forced by equalities; τ pins x0 = 0, x2 = 1.
        let eq = vec![1.0, 0.0, 0.0, 1.0];
        let m = GraphicalModel::from_tables(
            vec![vec![0.5, 0.5]; 3],
            vec![(vec![0, 1], eq.clone()), (vec![1, 2], eq)],
        )
        .unwrap();
        let s: VarSet = [1].into_iter().collect();
        let d = conditional_marginal(&m, &s, &Configuration::new(vec![0, 0, 1])).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.probs, vec![0.0, 0.0]);
    }

    #[test]
    fn tvd_examples() {
        assert_eq!(tvd(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(tvd(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((tvd(&[0.5, 0.5], &[0.6, 0.4]).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(
            tvd(&[1.0], &[0.5, 0.5]),
            Err(Error::SupportMismatch { .. })
        ));
    }

    #[test]
    fn empirical_counts_and_chi_square() {
        let emp = EmpiricalDistribution::from_indices(3, [0, 0, 1, 2]);
        assert_eq!(emp.total, 4);
        assert_eq!(emp.probs(), vec![0.5, 0.25, 0.25]);
        let chi = emp.chi_square(&[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(chi.impossible_samples, 1);
        assert_eq!(chi.degrees_of_freedom, 1);
    }

    #[test]
    fn exact_sampler_frequencies() {
        let m = GraphicalModel::from_tables(vec![vec![0.25, 0.75]], vec![]).unwrap();
        let s = exact_gibbs(&m).unwrap().sampler().unwrap();
        let mut rng = RngStream::new(1).rng();
        let ones = (0..20_000).filter(|_| s.sample(&mut rng)[0] == 1).count();
        assert!((ones as f64 / 20_000.0 - 0.75).abs() < 0.015);
    }
}
