//! Model families and update-size sweeps used for scaling measurements.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convergence::{hardcore_lambda_threshold, ising_beta_threshold, soft_threshold};
use crate::error::{Error, Result};
use crate::factor_graph::{GraphicalModel, UpdateRequest, VarId};
use crate::io::{ModelSpec, Update};
use crate::resample_engine::{EngineOptions, TraceStats};
use crate::rng::RngStream;
use crate::spin_models::{HardcoreModel, HardcoreUpdate, IsingModel, SpinUpdate};

/// Table with entries drawn uniformly from `[floor, 1]`.
pub fn random_soft_table<R: Rng + ?Sized>(size: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    (0..size).map(|_| rng.random_range(floor..=1.0)).collect()
}

/// Random model on the given scopes whose tables satisfy the soft
/// condition for `delta`. Variable weights are drawn from `[0.2, 1]`.
pub fn random_soft_model<R: Rng + ?Sized>(
    domain_sizes: &[usize],
    scopes: &[Vec<VarId>],
    delta: f64,
    rng: &mut R,
) -> Result<GraphicalModel> {
    let weights: Vec<Vec<f64>> = domain_sizes
        .iter()
        .map(|q| (0..*q).map(|_| rng.random_range(0.2..=1.0)).collect())
        .collect();
    let skeleton = GraphicalModel::from_tables(
        weights.clone(),
        scopes
            .iter()
            .map(|s| {
                (
                    s.clone(),
                    vec![1.0; s.iter().map(|v| domain_sizes[*v]).product()],
                )
            })
            .collect(),
    )?;
    let floor = soft_threshold(skeleton.dependency_degree(), delta);
    let constraints = scopes
        .iter()
        .map(|s| {
            let size = s.iter().map(|v| domain_sizes[*v]).product();
            (s.clone(), random_soft_table(size, floor, rng))
        })
        .collect();
    GraphicalModel::from_tables(weights, constraints)
}

/// Binary chain `0 − 1 − … − (n−1)` with soft pairwise tables.
pub fn soft_chain<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> Result<GraphicalModel> {
    let scopes: Vec<Vec<VarId>> = (0..n.saturating_sub(1)).map(|i| vec![i, i + 1]).collect();
    random_soft_model(&vec![2; n], &scopes, delta, rng)
}

/// The 3-regular circular ladder on `n` vertices (`n` even, at least 6):
/// two `n/2`-cycles joined by rungs.
pub fn circular_ladder(n: usize) -> Result<Vec<(VarId, VarId)>> {
    if n < 6 || n % 2 == 1 {
        return Err(Error::InvalidModel(format!(
            "a circular ladder needs an even number of vertices ≥ 6, got {n}"
        )));
    }
    let m = n / 2;
    let mut edges = Vec::with_capacity(3 * m);
    for i in 0..m {
        edges.push((i, (i + 1) % m));
        edges.push((m + i, m + (i + 1) % m));
        edges.push((i, m + i));
    }
    Ok(edges)
}

/// A model family for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// Soft binary chain; an update redraws `k` random tables.
    Chain { n: usize, delta: f64 },
    /// Ising on a circular ladder at `0.9×` the coupling threshold; an
    /// update sets `k` random edges to `±β`.
    Ising { n: usize },
    /// Hardcore on a circular ladder at `0.9×` the fugacity threshold; a
    /// trial removes `k` random edges and then adds them back, counted as
    /// two updates.
    Hardcore { n: usize },
}

impl Family {
    pub fn build(&self, rng: &RngStream) -> Result<ModelSpec> {
        match *self {
            Family::Chain { n, delta } => Ok(ModelSpec::FactorGraph(
                soft_chain(n, delta, &mut rng.rng())?.normalize(),
            )),
            Family::Ising { n } => {
                let beta = 0.9 * ising_beta_threshold(3);
                let edges = circular_ladder(n)?
                    .into_iter()
                    .map(|(u, v)| (u, v, beta))
                    .collect();
                Ok(ModelSpec::Ising(IsingModel::new(n, edges)?))
            }
            Family::Hardcore { n } => Ok(ModelSpec::Hardcore(HardcoreModel::uniform(
                n,
                circular_ladder(n)?,
                0.9 * hardcore_lambda_threshold(3),
            )?)),
        }
    }

    fn updates(&self, model: &ModelSpec, k: usize, rng: &RngStream) -> Result<Vec<Update>> {
        let mut r = rng.rng();
        match (self, model) {
            (Family::Chain { delta, .. }, ModelSpec::FactorGraph(m)) => {
                check_k(k, m.num_constraints())?;
                let floor = soft_threshold(m.dependency_degree(), *delta);
                let mut req = UpdateRequest::new();
                for e in sample_indices(&mut r, m.num_constraints(), k) {
                    let c = m.constraint(e);
                    req = req.set_constraint(
                        c.scope().to_vec(),
                        random_soft_table(c.table().len(), floor, &mut r),
                    );
                }
                Ok(vec![Update::FactorGraph(req)])
            }
            (Family::Ising { .. }, ModelSpec::Ising(m)) => {
                check_k(k, m.graph().num_edges())?;
                let beta = 0.9 * ising_beta_threshold(3);
                let mut up = SpinUpdate::new();
                for e in sample_indices(&mut r, m.graph().num_edges(), k) {
                    let (u, v) = m.graph().endpoints(e);
                    let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                    up = up.set_edge(u, v, sign * beta);
                }
                Ok(vec![Update::Spin(up)])
            }
            (Family::Hardcore { .. }, ModelSpec::Hardcore(m)) => {
                check_k(k, m.graph().num_edges())?;
                let picked: Vec<(VarId, VarId)> = sample_indices(&mut r, m.graph().num_edges(), k)
                    .into_iter()
                    .map(|e| m.graph().endpoints(e))
                    .collect();
                Ok(vec![
                    Update::Hardcore(HardcoreUpdate {
                        remove_edges: picked.clone(),
                        ..HardcoreUpdate::default()
                    }),
                    Update::Hardcore(HardcoreUpdate {
                        edges: picked,
                        ..HardcoreUpdate::default()
                    }),
                ])
            }
            _ => Err(Error::InvalidModel("family does not match model".into())),
        }
    }
}

fn check_k(k: usize, available: usize) -> Result<()> {
    if k == 0 || k > available {
        return Err(Error::InvalidModel(format!(
            "update size {k} must lie in 1..={available}"
        )));
    }
    Ok(())
}

/// One line of a sweep: averages over all updates run at size `k`.
/// `stderr` is the standard error of `mean_iterations`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub k: usize,
    pub mean_iterations: f64,
    pub mean_resamples: f64,
    pub stderr: f64,
}

fn summarize(k: usize, stats: &[TraceStats]) -> BenchRow {
    let n = stats.len() as f64;
    let iters: Vec<f64> = stats.iter().map(|s| s.iterations as f64).collect();
    let mean = iters.iter().sum::<f64>() / n;
    let var = if stats.len() > 1 {
        iters.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    BenchRow {
        k,
        mean_iterations: mean,
        mean_resamples: stats
            .iter()
            .map(|s| s.total_resamples() as f64)
            .sum::<f64>()
            / n,
        stderr: (var / n).sqrt(),
    }
}

/// Runs `trials` updates of each size in `ks` on one sample that is
/// threaded through the whole sweep. The sample starts exact, so every
/// update starts from an exact sample of the current model.
pub fn bench(
    family: &Family,
    ks: &[usize],
    trials: u64,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<Vec<BenchRow>> {
    let mut model = family.build(&rng.split("model", 0))?;
    let mut x = model.bootstrap_sample(&rng.split("initial", 0), opts)?;
    let mut rows = Vec::with_capacity(ks.len());
    for (ki, k) in ks.iter().enumerate() {
        let stream = rng.split("size", ki as u64);
        let mut stats = Vec::new();
        for t in 0..trials {
            let trial = stream.split("trial", t);
            let updates = family.updates(&model, *k, &trial.split("update", 0))?;
            let engine = trial.split("engine", 0);
            for (i, u) in updates.iter().enumerate() {
                let (m, next, st) = model.step(u, x, &engine.split("step", i as u64), opts)?;
                model = m;
                x = next;
                stats.push(st);
            }
        }
        rows.push(summarize(*k, &stats));
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("k,mean_iterations,mean_resamples,stderr\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.k, r.mean_iterations, r.mean_resamples, r.stderr
        ));
    }
    out
}

/// Least-squares fits of mean iterations against `log₂ k` and against `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub log_slope: f64,
    pub log_intercept: f64,
    pub log_rss: f64,
    pub linear_slope: f64,
    pub linear_intercept: f64,
    pub linear_rss: f64,
    /// `max / min` of `mean_resamples / k` over the sweep.
    pub resample_ratio_spread: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, rss)
}

pub fn fit_scaling(rows: &[BenchRow]) -> ScalingFit {
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_iterations).collect();
    let logs: Vec<f64> = rows.iter().map(|r| (r.k as f64).log2()).collect();
    let lin: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let (log_slope, log_intercept, log_rss) = least_squares(&logs, &ys);
    let (linear_slope, linear_intercept, linear_rss) = least_squares(&lin, &ys);
    let per_k: Vec<f64> = rows.iter().map(|r| r.mean_resamples / r.k as f64).collect();
    let max = per_k.iter().copied().fold(f64::MIN, f64::max);
    let min = per_k.iter().copied().fold(f64::MAX, f64::min);
    ScalingFit {
        log_slope,
        log_intercept,
        log_rss,
        linear_slope,
        linear_intercept,
        linear_rss,
        resample_ratio_spread: max / min,
    }
}
