//! Browser demo: an Ising torus whose coupling follows a slider, a hardcore
//! lattice where clicking a site detaches it from its neighbours, and an
//! iteration-count sweep for plotting. Every change is applied as an update
//! and the current sample is repaired locally instead of redrawn.

use wasm_bindgen::prelude::*;

use dynsampler::bench::{bench, Family};
use dynsampler::convergence::{hardcore_lambda_threshold, ising_beta_threshold};
use dynsampler::factor_graph::{Configuration, VarId};
use dynsampler::resample_engine::{EngineOptions, ResampleState, TraceStats};
use dynsampler::rng::RngStream;
use dynsampler::spin_models::{
    hardcore_dynamic_sample, ising_dynamic_sample, HardcoreModel, HardcoreUpdate, IsingModel,
    SpinUpdate,
};

/// Edges of the `side × side` torus, each listed once.
fn torus_edges(side: usize) -> Vec<(VarId, VarId)> {
    let at = |r: usize, c: usize| (r % side) * side + (c % side);
    let mut edges = Vec::with_capacity(2 * side * side);
    for r in 0..side {
        for c in 0..side {
            edges.push((at(r, c), at(r, c + 1)));
            edges.push((at(r, c), at(r + 1, c)));
        }
    }
    edges
}

fn check_side(side: usize) -> Result<(), String> {
    if (3..=128).contains(&side) {
        Ok(())
    } else {
        Err(format!("side must lie in 3..=128, got {side}"))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LastUpdate {
    iterations: u64,
    resamples: u64,
    resample_set: usize,
}

impl LastUpdate {
    fn new(stats: &TraceStats) -> Self {
        Self {
            iterations: stats.iterations,
            resamples: stats.total_resamples(),
            resample_set: stats.r_sizes.first().copied().unwrap_or(0),
        }
    }
}

/// Ising model on a torus with uniform coupling.
#[wasm_bindgen]
pub struct IsingDemo {
    side: usize,
    model: IsingModel,
    config: Configuration,
    rng: RngStream,
    updates: u64,
    last: LastUpdate,
}

#[wasm_bindgen]
impl IsingDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(side: usize, beta: f64, seed: u64) -> Result<IsingDemo, String> {
        check_side(side)?;
        let edges = torus_edges(side)
            .into_iter()
            .map(|(u, v)| (u, v, beta))
            .collect();
        let model = IsingModel::new(side * side, edges).map_err(|e| e.to_string())?;
        let rng = RngStream::new(seed);
        let config = model
            .bootstrap_sample(&rng.split("initial", 0), &EngineOptions::default())
            .map_err(|e| e.to_string())?;
        Ok(IsingDemo {
            side,
            model,
            config,
            rng,
            updates: 0,
            last: LastUpdate::default(),
        })
    }

    /// Largest `|β|` the convergence guarantee covers on this 4-regular graph.
    pub fn beta_limit() -> f64 {
        ising_beta_threshold(4)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn beta(&self) -> f64 {
        self.model.beta_star() * self.model.betas().first().map_or(1.0, |b| b.signum())
    }

    /// Sets every coupling to `beta` and repairs the sample.
    pub fn set_beta(&mut self, beta: f64) -> Result<(), String> {
        let mut update = SpinUpdate::new();
        for (u, v) in self.model.graph().edges().to_vec() {
            update = update.set_edge(u, v, beta);
        }
        self.apply(update)
    }

    /// Sets the coupling of the edges around one site, as a small update.
    pub fn set_site_beta(&mut self, site: usize, beta: f64) -> Result<(), String> {
        if site >= self.side * self.side {
            return Err(format!("site {site} is off the grid"));
        }
        let mut update = SpinUpdate::new();
        for &e in self.model.graph().incident(site) {
            let (u, v) = self.model.graph().endpoints(e);
            update = update.set_edge(u, v, beta);
        }
        self.apply(update)
    }

    /// Spins as 0/1, row-major.
    pub fn spins(&self) -> Vec<u8> {
        self.config.values().iter().map(|s| *s as u8).collect()
    }

    pub fn magnetization(&self) -> f64 {
        let n = self.config.len() as f64;
        self.config
            .values()
            .iter()
            .map(|s| 2.0 * *s as f64 - 1.0)
            .sum::<f64>()
            / n
    }

    pub fn last_iterations(&self) -> u64 {
        self.last.iterations
    }

    pub fn last_resamples(&self) -> u64 {
        self.last.resamples
    }

    pub fn last_resample_set(&self) -> usize {
        self.last.resample_set
    }

    fn apply(&mut self, update: SpinUpdate) -> Result<(), String> {
        let next = self
            .model
            .apply_update(&update)
            .map_err(|e| e.to_string())?;
        let state = ResampleState::new(self.config.clone(), update.vbl());
        let stream = self.rng.split("update", self.updates);
        let (config, stats) =
            ising_dynamic_sample(&next, state, &stream, &EngineOptions::default())
                .map_err(|e| e.to_string())?;
        self.model = next;
        self.config = config;
        self.updates += 1;
        self.last = LastUpdate::new(&stats);
        Ok(())
    }
}

/// Hardcore model on a torus. Clicking a site removes its four edges, or
/// restores them if it is already detached.
#[wasm_bindgen]
pub struct HardcoreDemo {
    side: usize,
    model: HardcoreModel,
    detached: Vec<bool>,
    config: Configuration,
    rng: RngStream,
    updates: u64,
    last: LastUpdate,
}

#[wasm_bindgen]
impl HardcoreDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(side: usize, lambda: f64, seed: u64) -> Result<HardcoreDemo, String> {
        check_side(side)?;
        let model = HardcoreModel::uniform(side * side, torus_edges(side), lambda)
            .map_err(|e| e.to_string())?;
        let rng = RngStream::new(seed);
        let config = model
            .bootstrap_sample(&rng.split("initial", 0), &EngineOptions::default())
            .map_err(|e| e.to_string())?;
        Ok(HardcoreDemo {
            side,
            model,
            detached: vec![false; side * side],
            config,
            rng,
            updates: 0,
            last: LastUpdate::default(),
        })
    }

    /// Fugacity threshold of the convergence guarantee for degree 4.
    pub fn lambda_limit() -> f64 {
        hardcore_lambda_threshold(4)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Detaches or re-attaches `site`; returns whether it is now detached.
    pub fn toggle(&mut self, site: usize) -> Result<bool, String> {
        if site >= self.detached.len() {
            return Err(format!("site {site} is off the grid"));
        }
        let detach = !self.detached[site];
        let mut update = HardcoreUpdate::new();
        for &e in self.model.graph().incident(site) {
            let (u, v) = self.model.graph().endpoints(e);
            let other = if u == site { v } else { u };
            // an edge to an already detached neighbour stays removed
            if self.detached[other] {
                continue;
            }
            update = if detach {
                update.remove_edge(u, v)
            } else {
                update.add_edge(u, v)
            };
        }
        let next = self
            .model
            .apply_update(&update)
            .map_err(|e| e.to_string())?;
        let state = ResampleState::new(self.config.clone(), update.vbl());
        let stream = self.rng.split("update", self.updates);
        let (config, stats) =
            hardcore_dynamic_sample(&next, state, &stream, &EngineOptions::default())
                .map_err(|e| e.to_string())?;
        self.model = next;
        self.config = config;
        self.detached[site] = detach;
        self.updates += 1;
        self.last = LastUpdate::new(&stats);
        Ok(detach)
    }

    /// 0 empty, 1 occupied, plus 2 when the site is detached.
    pub fn cells(&self) -> Vec<u8> {
        self.config
            .values()
            .iter()
            .zip(&self.detached)
            .map(|(x, d)| *x as u8 + 2 * u8::from(*d))
            .collect()
    }

    pub fn density(&self) -> f64 {
        self.config.values().iter().sum::<usize>() as f64 / self.config.len() as f64
    }

    pub fn last_iterations(&self) -> u64 {
        self.last.iterations
    }

    pub fn last_resamples(&self) -> u64 {
        self.last.resamples
    }

    pub fn last_resample_set(&self) -> usize {
        self.last.resample_set
    }
}

/// Mean iterations and resamplings per update size on a soft chain of `n`
/// variables, for `k = 1, 2, 4, …, max_k`. Flattened as
/// `[k, mean_iterations, mean_resamples, stderr]` per row.
#[wasm_bindgen]
pub fn scaling_curve(n: usize, max_k: usize, trials: u32, seed: u64) -> Result<Vec<f64>, String> {
    if max_k == 0 || max_k >= n {
        return Err(format!("max_k must lie in 1..{n}"));
    }
    let ks: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|k| *k <= max_k)
        .collect();
    let rows = bench(
        &Family::Chain { n, delta: 0.2 },
        &ks,
        u64::from(trials.max(1)),
        &RngStream::new(seed),
        &EngineOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|r| [r.k as f64, r.mean_iterations, r.mean_resamples, r.stderr])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_is_four_regular() {
        let edges = torus_edges(5);
        assert_eq!(edges.len(), 50);
        let hc = HardcoreModel::uniform(25, edges, 0.1).unwrap();
        assert_eq!(hc.max_degree(), 4);
    }

    #[test]
    fn slider_updates_keep_a_valid_sample() {
        let mut demo = IsingDemo::new(8, 0.0, 3).unwrap();
        let limit = IsingDemo::beta_limit();
        for beta in [0.5 * limit, limit, -limit, 0.0] {
            demo.set_beta(beta).unwrap();
            assert!((demo.beta() - beta).abs() < 1e-12);
            assert_eq!(demo.last_resample_set(), 64);
            assert!(demo.last_iterations() >= 1);
        }
        demo.set_site_beta(10, 0.1).unwrap();
        assert_eq!(demo.last_resample_set(), 5);
        assert_eq!(demo.spins().len(), 64);
        assert!(demo.magnetization().abs() <= 1.0);
        assert!(demo.set_site_beta(64, 0.1).is_err());
    }

    #[test]
    fn toggling_keeps_an_independent_set() {
        let mut demo = HardcoreDemo::new(6, 0.9 * HardcoreDemo::lambda_limit(), 1).unwrap();
        for site in [0, 1, 7, 0, 35, 1, 7] {
            demo.toggle(site).unwrap();
            assert!(demo.model.is_independent(demo.config.values()));
        }
        let cells = demo.cells();
        assert_eq!(cells[35] & 2, 2);
        assert_eq!(cells[0] & 2, 0);
        assert_eq!(demo.model.active_edges().count(), 72 - 4);
        assert!(demo.toggle(99).is_err());
    }

    #[test]
    fn curve_rows_are_flattened() {
        let curve = scaling_curve(64, 8, 10, 2).unwrap();
        assert_eq!(curve.len(), 16);
        assert_eq!(curve[0], 1.0);
        assert_eq!(curve[12], 8.0);
        assert!(scaling_curve(8, 8, 1, 0).is_err());
    }

    #[test]
    fn seeds_reproduce() {
        let beta = 0.8 * IsingDemo::beta_limit();
        let mut a = IsingDemo::new(6, 0.0, 9).unwrap();
        let mut b = IsingDemo::new(6, 0.0, 9).unwrap();
        a.set_beta(beta).unwrap();
        b.set_beta(beta).unwrap();
        assert_eq!(a.spins(), b.spins());
    }
}
