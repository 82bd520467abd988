use std::collections::BTreeSet;

use proptest::collection::vec;
use proptest::prelude::*;

use dynsampler::convergence::potential_h;
use dynsampler::factor_graph::{Configuration, GraphicalModel, UpdateRequest, VarSet};
use dynsampler::io::{model_to_json, parse_model, ModelSpec};
use dynsampler::oracle::{tvd, StateIndexer};
use dynsampler::resample_engine::{
    compute_kappa, local_resample, EngineOptions, ResampleState, RoundMode,
};
use dynsampler::rng::RngStream;
use dynsampler::spin_models::{hardcore_dynamic_sample, HardcoreModel, HardcoreUpdate};

#[derive(Debug, Clone)]
struct Case {
    model: GraphicalModel,
    config: Vec<usize>,
    r: VarSet,
}

fn table(size: usize) -> impl Strategy<Value = Vec<f64>> {
    (
        vec(prop_oneof![1 => Just(0.0), 6 => 0.0..=1.0f64], size),
        0..size,
    )
        .prop_map(|(mut t, i)| {
            t[i] = 1.0;
            t
        })
}

fn case() -> impl Strategy<Value = Case> {
    (3usize..=6)
        .prop_flat_map(|n| {
            (
                vec(2usize..=3, n),
                proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2..=3)
                    .prop_map(|s| vec![s]),
                vec(any::<bool>(), n),
            )
        })
        .prop_flat_map(|(dims, extra, in_r)| {
            let n = dims.len();
            let mut scopes: BTreeSet<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
            scopes.extend(extra);
            let scopes: Vec<Vec<usize>> = scopes.into_iter().collect();
            let tables: Vec<_> = scopes
                .iter()
                .map(|s| table(s.iter().map(|v| dims[*v]).product()))
                .collect();
            let weights: Vec<_> = dims.iter().map(|q| vec(0.05..1.0f64, *q)).collect();
            let config: Vec<_> = dims.iter().map(|q| 0..*q).collect();
            (Just(scopes), tables, weights, config, Just(in_r))
        })
        .prop_map(|(scopes, tables, weights, config, in_r)| Case {
            model: GraphicalModel::from_tables(weights, scopes.into_iter().zip(tables).collect())
                .unwrap()
                .normalize(),
            config,
            r: in_r
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(v, _)| v)
                .collect(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn kappa_is_a_probability(c in case()) {
        for e in c.model.incident_constraints(&c.r) {
            let k = compute_kappa(&c.model, &c.config, &c.r, e);
            prop_assert!((0.0..=1.0).contains(&k));
            if c.model.constraint(e).scope().iter().all(|v| c.r.contains(v)) {
                prop_assert_eq!(k, 1.0);
            }
        }
    }

    #[test]
    fn resampling_is_local(c in case(), seed in any::<u64>()) {
        let state = ResampleState::new(Configuration::new(c.config.clone()), c.r.clone());
        let (next, stats) = local_resample(&c.model, state, &RngStream::new(seed), 0, &EngineOptions::default());
        for v in 0..c.config.len() {
            if !c.r.contains(&v) {
                prop_assert_eq!(next.config[v], c.config[v]);
            }
        }
        let incident = c.model.incident_constraints(&c.r);
        let reach: VarSet = incident.iter().flat_map(|e| c.model.constraint(*e).scope().to_vec()).collect();
        prop_assert!(next.resample_set.is_subset(&reach));
        prop_assert_eq!(stats.variable_resamples, c.r.len() as u64);
        prop_assert_eq!(stats.coin_flips, incident.len() as u64);
    }

    #[test]
    fn round_mode_does_not_change_output(c in case(), seed in any::<u64>(), round in 0u64..5) {
        let state = ResampleState::new(Configuration::new(c.config.clone()), c.r.clone());
        let rng = RngStream::new(seed);
        let seq = local_resample(&c.model, state.clone(), &rng, round, &EngineOptions::default());
        let par = local_resample(&c.model, state, &rng, round, &EngineOptions::default().with_mode(RoundMode::Parallel));
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn potential_is_monotone(c in case(), extra in vec(any::<bool>(), 6)) {
        let bigger: VarSet = c.r.iter().copied()
            .chain((0..c.config.len()).filter(|v| extra[*v]))
            .collect();
        let small = potential_h(&c.model, &c.r).unwrap();
        let big = potential_h(&c.model, &bigger).unwrap();
        prop_assert!(small.exact && big.exact);
        prop_assert!(small.value <= big.value);
        prop_assert_eq!(small.value == 0, c.r.is_empty());
    }

    #[test]
    fn json_round_trip(c in case()) {
        let spec = ModelSpec::FactorGraph(c.model.clone());
        prop_assert_eq!(parse_model(&model_to_json(&spec)).unwrap(), spec);
    }

    #[test]
    fn inverse_update_restores_the_model(c in case(), pick in any::<prop::sample::Index>(), t in vec(0.1..=1.0f64, 27)) {
        let (_, e) = c.model.constraints().nth(pick.index(c.model.num_constraints())).unwrap();
        let size = e.table().len();
        let update = UpdateRequest::new().set_constraint(e.scope().to_vec(), t[..size].to_vec());
        let after = c.model.apply_update(&update).unwrap();
        let back = after.apply_update(&update.inverse(&c.model)).unwrap();
        prop_assert_eq!(back.normalize(), c.model.normalize());
    }

    #[test]
    fn indexer_round_trips(dims in vec(1usize..=4, 1..=6), pick in any::<prop::sample::Index>()) {
        let ix = StateIndexer::new(dims).unwrap();
        let i = pick.index(ix.size());
        prop_assert_eq!(ix.index(ix.decode(i)), i);
    }

    #[test]
    fn tvd_is_a_bounded_metric(a in vec(0.0..1.0f64, 5), b in vec(0.0..1.0f64, 5)) {
        let norm = |v: Vec<f64>| { let s: f64 = v.iter().sum::<f64>() + 1e-9; v.into_iter().map(|x| x / s).collect::<Vec<_>>() };
        let (p, q) = (norm(a), norm(b));
        let d = tvd(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - tvd(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(tvd(&p, &p).unwrap() == 0.0);
    }

    #[test]
    fn hardcore_outputs_are_independent_sets(
        n in 3usize..=8,
        pairs in vec((0usize..8, 0usize..8), 0..14),
        lambda in 0.05..1.5f64,
        seed in any::<u64>(),
    ) {
        let mut edges: Vec<(usize, usize)> = pairs.into_iter()
            .filter(|(u, v)| u < v && *v < n)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let added = edges.split_off(edges.len() / 2);
        let pre = HardcoreModel::uniform(n, edges, lambda).unwrap();
        let update = added.iter().fold(HardcoreUpdate::new(), |u, (a, b)| u.add_edge(*a, *b));
        let post = pre.apply_update(&update).unwrap();
        let rng = RngStream::new(seed);
        let opts = EngineOptions::default();
        let x0 = pre.bootstrap_sample(&rng.split("initial", 0), &opts).unwrap();
        prop_assert!(pre.is_independent(x0.values()));
        let (x, _) = hardcore_dynamic_sample(&post, ResampleState::new(x0, post.vbl(&update)), &rng, &opts).unwrap();
        prop_assert!(post.is_independent(x.values()));
    }
}
