#![allow(dead_code)]

use dynsampler::convergence::soft_threshold;
use dynsampler::factor_graph::{GraphicalModel, UpdateRequest, VarId};
use dynsampler::rng::RngStream;
use rand::Rng;

pub const DELTA: f64 = 0.2;

/// Seed of the random soft model shared by the exactness, equilibrium and
/// decay checks.
pub const SOFT_PAIR_SEED: u64 = 26;

const SCOPES: [[VarId; 5]; 2] = [[0, 1, 2, 3, 4], [1, 2, 3, 4, 5]];

/// Random soft factor graph on six binary variables with two overlapping
/// five-variable constraints, so the dependency degree is 1. Every table
/// entry is either the soft floor for `δ = 0.2` or 1. Variables 0..5 lean
/// heavily towards 0 and variable 5 is close to fair.
///
/// Returns the model and a stream of three updates, each redrawing one
/// constraint table. The first update redraws the constraint on `0..5`.
pub fn soft_pair(seed: u64) -> (GraphicalModel, Vec<UpdateRequest>) {
    let mut r = RngStream::new(seed).rng();
    let weights: Vec<Vec<f64>> = (0..6)
        .map(|v| {
            let p: f64 = if v < 5 {
                r.random_range(0.9..=0.97)
            } else {
                r.random_range(0.4..=0.6)
            };
            vec![p, 1.0 - p]
        })
        .collect();
    let skeleton = GraphicalModel::from_tables(
        weights.clone(),
        SCOPES.iter().map(|s| (s.to_vec(), vec![1.0; 32])).collect(),
    )
    .unwrap();
    let floor = soft_threshold(skeleton.dependency_degree(), DELTA);
    let mut table = || -> Vec<f64> {
        (0..32)
            .map(|_| if r.random::<bool>() { floor } else { 1.0 })
            .collect()
    };
    let tables: Vec<(Vec<VarId>, Vec<f64>)> =
        SCOPES.iter().map(|s| (s.to_vec(), table())).collect();
    let model = GraphicalModel::from_tables(weights, tables).unwrap();
    let stream = [0, 1, 0]
        .into_iter()
        .map(|i| UpdateRequest::new().set_constraint(SCOPES[i].to_vec(), table()))
        .collect();
    (model, stream)
}
