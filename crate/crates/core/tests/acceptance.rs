//! Acceptance suite. Runs as a plain binary so that every criterion prints
//! one PASS/FAIL line; the process exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use dynsampler::bench::{bench, fit_scaling, Family};
use dynsampler::convergence::{
    check_soft_condition, decay_experiment, hardcore_decay_experiment, hardcore_lambda_threshold,
    potential_h, solve_alpha,
};
use dynsampler::factor_graph::{Configuration, GraphicalModel, VarSet};
use dynsampler::io::{ModelSpec, Update};
use dynsampler::oracle::{
    conditional_gibbs_test, exact_gibbs, multinomial_noise, tvd, EmpiricalDistribution,
    StateIndexer, MIN_BUCKET,
};
use dynsampler::resample_engine::{
    compute_kappa, dynamic_sample, local_resample, EngineOptions, KappaRule, ResampleState,
    RoundMode,
};
use dynsampler::rng::RngStream;
use dynsampler::spin_models::{
    hardcore_dynamic_sample, ising_dynamic_sample, HardcoreModel, HardcoreUpdate, IsingModel,
    PottsModel, SpinUpdate,
};

use common::{soft_pair, DELTA, SOFT_PAIR_SEED};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

// ---------------------------------------------------------------- 1

struct StreamCase {
    name: &'static str,
    pre: ModelSpec,
    updates: Vec<Update>,
    target: ModelSpec,
}

fn stream_cases() -> Vec<StreamCase> {
    let ising_edge = StreamCase {
        name: "single-edge ising",
        pre: ModelSpec::Ising(IsingModel::new(2, vec![(0, 1, 0.0)]).unwrap()),
        updates: vec![
            Update::Spin(SpinUpdate::new().set_edge(0, 1, 0.8)),
            Update::Spin(SpinUpdate::new().set_field(0, vec![0.3, 0.7])),
            Update::Spin(SpinUpdate::new().set_field(0, vec![0.5, 0.5])),
        ],
        target: ModelSpec::Ising(IsingModel::new(2, vec![(0, 1, 0.8)]).unwrap()),
    };

    let triangle: Vec<_> = [(0, 1), (1, 2), (0, 2)]
        .iter()
        .map(|&(u, v)| (u, v, -0.5))
        .collect();
    let ising_triangle = StreamCase {
        name: "antiferro 3-cycle",
        pre: ModelSpec::Ising(IsingModel::new(3, vec![]).unwrap()),
        updates: triangle
            .iter()
            .map(|&(u, v, b)| Update::Spin(SpinUpdate::new().set_edge(u, v, b)))
            .collect(),
        target: ModelSpec::Ising(IsingModel::new(3, triangle).unwrap()),
    };

    let path = vec![(0, 1), (1, 2), (2, 3)];
    let hardcore = StreamCase {
        name: "hardcore 4-path",
        pre: ModelSpec::Hardcore(HardcoreModel::uniform(4, vec![], 0.3).unwrap()),
        updates: path
            .iter()
            .map(|&(u, v)| Update::Hardcore(HardcoreUpdate::new().add_edge(u, v)))
            .collect(),
        target: ModelSpec::Hardcore(HardcoreModel::uniform(4, path, 0.3).unwrap()),
    };

    let mut skewed = vec![vec![1.0; 3]; 4];
    skewed[3] = vec![2.0, 1.0, 1.0];
    let potts = StreamCase {
        name: "potts 2x2 grid",
        pre: ModelSpec::Potts(
            PottsModel::new(4, 3, vec![(0, 1, 0.3), (2, 3, 0.3), (0, 2, -0.2)])
                .unwrap()
                .with_fields(skewed)
                .unwrap(),
        ),
        updates: vec![
            Update::Spin(SpinUpdate::new().set_edge(1, 3, 0.3)),
            Update::Spin(SpinUpdate::new().set_edge(0, 2, 0.3)),
            Update::Spin(SpinUpdate::new().set_field(3, vec![1.0, 1.0, 1.0])),
        ],
        target: ModelSpec::Potts(
            PottsModel::new(
                4,
                3,
                vec![(0, 1, 0.3), (2, 3, 0.3), (0, 2, 0.3), (1, 3, 0.3)],
            )
            .unwrap(),
        ),
    };

    let (pre, stream) = soft_pair(SOFT_PAIR_SEED);
    let target = stream
        .iter()
        .fold(pre.clone(), |m, u| m.apply_update(u).unwrap());
    let soft = StreamCase {
        name: "random soft n=6",
        pre: ModelSpec::FactorGraph(pre),
        updates: stream.into_iter().map(Update::FactorGraph).collect(),
        target: ModelSpec::FactorGraph(target),
    };

    vec![ising_edge, ising_triangle, hardcore, potts, soft]
}

fn exactness() -> Outcome {
    const N: u64 = 200_000;
    const TOL: f64 = 0.015;
    let opts = EngineOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (ci, case) in stream_cases().into_iter().enumerate() {
        let initial = exact_gibbs(&case.pre.to_factor_graph())
            .unwrap()
            .sampler()
            .unwrap();
        let target = exact_gibbs(&case.target.to_factor_graph()).unwrap();
        let indexer = target.indexer();
        let root = RngStream::new(1000 + ci as u64);
        let finals: Vec<usize> = (0..N)
            .into_par_iter()
            .map(|i| {
                let trial = root.split("trial", i);
                let x0 = initial.sample(&mut trial.split("initial", 0).rng());
                let (_, x, _) = case
                    .pre
                    .run_updates(x0, &case.updates, &trial.split("engine", 0), &opts)
                    .unwrap();
                indexer.index(x.values().iter().copied())
            })
            .collect();
        let emp = EmpiricalDistribution::from_indices(target.len(), finals);
        let d = emp.tvd_to(&target.probs).unwrap();
        let support = target.probs.iter().filter(|p| **p > 0.0).count();
        pass &= d <= TOL;
        parts.push(format!(
            "{} tvd={:.4} (noise {:.4})",
            case.name,
            d,
            multinomial_noise(support, N)
        ));
    }
    Outcome::new(pass, format!("{}; tol={TOL}", parts.join(", ")))
}

// ---------------------------------------------------------------- 2

fn equilibrium() -> Outcome {
    const N: u64 = 100_000;
    const TOL: f64 = 0.05;
    let (pre, stream) = soft_pair(SOFT_PAIR_SEED);
    let update = &stream[0];
    let rng = RngStream::new(2024);
    let mut worst = 0.0f64;
    let mut worst_mutant = 0.0f64;
    let mut buckets = 0;
    for t in 1..=3 {
        let exact = conditional_gibbs_test(
            &pre,
            update,
            N,
            t,
            MIN_BUCKET,
            &rng,
            &EngineOptions::default(),
        )
        .unwrap();
        let mutant_opts = EngineOptions {
            kappa: KappaRule::BoundaryForcedToOne,
            ..EngineOptions::default()
        };
        let mutant =
            conditional_gibbs_test(&pre, update, N, t, MIN_BUCKET, &rng, &mutant_opts).unwrap();
        worst = worst.max(exact.max_tvd);
        worst_mutant = worst_mutant.max(mutant.max_tvd);
        buckets += exact.buckets.len();
    }
    Outcome::new(
        worst <= TOL && worst_mutant > TOL,
        format!(
            "max bucket tvd={worst:.4} over {buckets} buckets; boundary-kappa-one control max tvd={worst_mutant:.4}; tol={TOL}"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn cube() -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..8usize {
        for b in 0..3 {
            let v = u ^ (1 << b);
            if u < v {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn decay() -> Outcome {
    const TRIALS: u64 = 10_000;
    let (pre, stream) = soft_pair(SOFT_PAIR_SEED);
    let soft = decay_experiment(&pre, &stream[0], DELTA, TRIALS, &RngStream::new(3001)).unwrap();

    let mut edges = cube();
    let added = edges.pop().unwrap();
    let hc_pre = HardcoreModel::uniform(8, edges, 0.3).unwrap();
    let hc_update = HardcoreUpdate::new().add_edge(added.0, added.1);
    let hard =
        hardcore_decay_experiment(&hc_pre, &hc_update, TRIALS, &RngStream::new(3002)).unwrap();

    let soft_bound_ok = (soft.bound - 0.8).abs() < 1e-12;
    let hard_bound_ok = (hard.bound - 5.0 / 6.0).abs() < 1e-12;
    Outcome::new(
        soft.satisfied
            && hard.satisfied
            && soft_bound_ok
            && hard_bound_ok
            && soft.within_bound()
            && hard.within_bound(),
        format!(
            "soft ratio={:.4}±{:.4} (bound {:.3}), hardcore ratio={:.4}±{:.4} (bound {:.4})",
            soft.empirical_ratio,
            soft.stderr,
            soft.bound,
            hard.empirical_ratio,
            hard.stderr,
            hard.bound
        ),
    )
}

// ---------------------------------------------------------------- 4

fn scaling() -> Outcome {
    let ks = [1, 2, 4, 8, 16, 32, 64];
    let family = Family::Chain {
        n: 256,
        delta: DELTA,
    };
    let rows = bench(
        &family,
        &ks,
        400,
        &RngStream::new(4004),
        &EngineOptions::default(),
    )
    .unwrap();
    let fit = fit_scaling(&rows);
    let means: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2}", r.mean_iterations))
        .collect();
    Outcome::new(
        fit.log_slope > 0.0 && fit.log_rss < fit.linear_rss && fit.resample_ratio_spread < 2.0,
        format!(
            "mean iterations [{}]; log slope={:.3} rss log={:.4} linear={:.4}; resamples/k spread={:.3}",
            means.join(", "),
            fit.log_slope,
            fit.log_rss,
            fit.linear_rss,
            fit.resample_ratio_spread
        ),
    )
}

// ---------------------------------------------------------------- 5

fn constants() -> Outcome {
    let alpha = solve_alpha();
    let residual = (alpha - (1.0 + 2.0 / (1.0 + (-1.0 / alpha).exp()))).abs();
    let digits = format!("{alpha:.6}").starts_with("2.22");
    let closed = 1.0 / (3.0 * 2f64.sqrt() - 1.0);
    let lambda = hardcore_lambda_threshold(3);
    Outcome::new(
        residual < 1e-10 && digits && (lambda - closed).abs() < 1e-12,
        format!(
            "alpha={alpha:.12} residual={residual:.1e}; lambda_c(3)={lambda:.12} vs {closed:.12}"
        ),
    )
}

// ---------------------------------------------------------------- 6

fn size_independence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, make) in [
        ("ising", (|n| Family::Ising { n }) as fn(usize) -> Family),
        ("hardcore", |n| Family::Hardcore { n }),
    ] {
        let means: Vec<f64> = [50, 100, 200]
            .into_par_iter()
            .map(|n| {
                let rows = bench(
                    &make(n),
                    &[1],
                    4000,
                    &RngStream::new(6000 + n as u64),
                    &EngineOptions::default(),
                )
                .unwrap();
                rows[0].mean_resamples
            })
            .collect();
        let ratio = means.iter().copied().fold(f64::MIN, f64::max)
            / means.iter().copied().fold(f64::MAX, f64::min);
        pass &= ratio < 2.0;
        parts.push(format!(
            "{name} resamples n=50,100,200: {:.2}, {:.2}, {:.2} (max/min {:.3})",
            means[0], means[1], means[2], ratio
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------- 7

fn engine_equivalence() -> Outcome {
    const N: u64 = 200_000;
    const TOL: f64 = 0.015;
    let pre =
        IsingModel::new(4, vec![(0, 1, 0.4), (1, 2, 0.4), (2, 3, -0.3), (3, 0, 0.0)]).unwrap();
    let update = SpinUpdate::new()
        .set_edge(3, 0, 0.4)
        .set_field(1, vec![0.35, 0.65]);
    let post = pre.apply_update(&update).unwrap();
    let generic_post = pre
        .to_factor_graph()
        .apply_update(&pre.factor_update(&update))
        .unwrap();
    let generic_r = generic_post.vbl(&pre.factor_update(&update));
    let initial = exact_gibbs(&pre.to_factor_graph())
        .unwrap()
        .sampler()
        .unwrap();
    let target = exact_gibbs(&generic_post).unwrap();
    let indexer = StateIndexer::new(vec![2; 4]).unwrap();
    let opts = EngineOptions::default();
    let root = RngStream::new(7007);
    let pairs: Vec<(usize, usize)> = (0..N)
        .into_par_iter()
        .map(|i| {
            let trial = root.split("trial", i);
            let x0 = initial.sample(&mut trial.split("initial", 0).rng());
            let (a, _) = ising_dynamic_sample(
                &post,
                ResampleState::new(x0.clone(), post.vbl(&update)),
                &trial.split("specialized", 0),
                &opts,
            )
            .unwrap();
            let (b, _) = dynamic_sample(
                &generic_post,
                ResampleState::new(x0, generic_r.clone()),
                &trial.split("generic", 0),
                &opts,
            )
            .unwrap();
            (
                indexer.index(a.into_values()),
                indexer.index(b.into_values()),
            )
        })
        .collect();
    let specialized = EmpiricalDistribution::from_indices(16, pairs.iter().map(|p| p.0));
    let generic = EmpiricalDistribution::from_indices(16, pairs.iter().map(|p| p.1));
    let paired = tvd(&specialized.probs(), &generic.probs()).unwrap();
    Outcome::new(
        paired <= TOL,
        format!(
            "paired tvd={paired:.4}; specialized vs exact={:.4}, generic vs exact={:.4}; tol={TOL}",
            specialized.tvd_to(&target.probs).unwrap(),
            generic.tvd_to(&target.probs).unwrap()
        ),
    )
}

// ---------------------------------------------------------------- 8

fn stream_fingerprint(seed: u64, mode: RoundMode) -> String {
    let opts = EngineOptions::default().with_mode(mode);
    let mut out = String::new();
    for case in stream_cases() {
        let rng = RngStream::new(seed);
        let x0 = case
            .pre
            .bootstrap_sample(&rng.split("initial", 0), &opts)
            .unwrap();
        let (_, x, stats) = case
            .pre
            .run_updates(x0, &case.updates, &rng.split("engine", 0), &opts)
            .unwrap();
        out.push_str(&serde_json::to_string(&(x.values(), stats)).unwrap());
        out.push('\n');
    }
    out
}

struct Case {
    model: GraphicalModel,
    config: Configuration,
    r: VarSet,
}

fn random_case<R: Rng>(rng: &mut R) -> Case {
    let n = rng.random_range(3..=7);
    let dims: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3)).collect();
    let variables: Vec<Vec<f64>> = dims
        .iter()
        .map(|q| (0..*q).map(|_| rng.random_range(0.05..1.0)).collect())
        .collect();
    let mut scopes: BTreeSet<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
    for _ in 0..rng.random_range(0..=3) {
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(rng);
        let mut s = vs[..rng.random_range(2..=3)].to_vec();
        s.sort_unstable();
        scopes.insert(s);
    }
    let constraints = scopes
        .into_iter()
        .map(|s| {
            let size: usize = s.iter().map(|v| dims[*v]).product();
            let mut table: Vec<f64> = (0..size)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        0.0
                    } else {
                        rng.random_range(0.0..=1.0)
                    }
                })
                .collect();
            table[rng.random_range(0..size)] = 1.0;
            (s, table)
        })
        .collect();
    let model = GraphicalModel::from_tables(variables, constraints)
        .unwrap()
        .normalize();
    let config = Configuration::new(dims.iter().map(|q| rng.random_range(0..*q)).collect());
    let r: VarSet = (0..n).filter(|_| rng.random_bool(0.4)).collect();
    Case { model, config, r }
}

fn random_hardcore<R: Rng>(rng: &mut R) -> (HardcoreModel, HardcoreUpdate) {
    let n = rng.random_range(3..=8);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(0.35) {
                edges.push((u, v));
            }
        }
    }
    edges.shuffle(rng);
    let split = rng.random_range(0..=edges.len().min(3));
    let added = edges.split_off(edges.len() - split);
    let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let pre = HardcoreModel::new(n, edges, lambda).unwrap();
    let mut update = HardcoreUpdate::new();
    for (u, v) in added {
        update = update.add_edge(u, v);
    }
    if rng.random_bool(0.5) {
        update = update.set_lambda(rng.random_range(0..n), rng.random_range(0.05..1.0));
    }
    (pre, update)
}

fn determinism_and_invariants() -> Outcome {
    const CASES: u64 = 10_000;
    let mut violations: Vec<String> = Vec::new();

    for seed in [1u64, 2, 3] {
        let a = stream_fingerprint(seed, RoundMode::Sequential);
        let b = stream_fingerprint(seed, RoundMode::Sequential);
        let c = stream_fingerprint(seed, RoundMode::Parallel);
        if a != b {
            violations.push(format!("sequential runs differ for seed {seed}"));
        }
        if a != c {
            violations.push(format!(
                "parallel run differs from sequential for seed {seed}"
            ));
        }
    }

    let root = RngStream::new(8008);
    let opts = EngineOptions::default();
    for i in 0..CASES {
        let stream = root.split("case", i);
        let mut rng = stream.rng();
        let Case { model, config, r } = random_case(&mut rng);
        let incident = model.incident_constraints(&r);
        for &e in &incident {
            let kappa = compute_kappa(&model, config.values(), &r, e);
            if !(0.0..=1.0).contains(&kappa) {
                violations.push(format!("case {i}: kappa {kappa} outside [0, 1]"));
            }
            let internal = model.constraint(e).scope().iter().all(|v| r.contains(v));
            if internal && kappa != 1.0 {
                violations.push(format!("case {i}: internal kappa {kappa}"));
            }
        }

        let (next, _) = local_resample(
            &model,
            ResampleState::new(config.clone(), r.clone()),
            &stream.split("engine", 0),
            0,
            &opts,
        );
        if (0..model.num_variables()).any(|v| !r.contains(&v) && next.config[v] != config[v]) {
            violations.push(format!("case {i}: a variable outside R changed"));
        }
        let closure: VarSet = incident
            .iter()
            .flat_map(|e| model.constraint(*e).scope().iter().copied())
            .collect();
        if !next.resample_set.is_subset(&closure) {
            violations.push(format!("case {i}: R' escapes vbl(E+(R))"));
        }

        let bigger: VarSet = r
            .iter()
            .copied()
            .chain((0..model.num_variables()).filter(|_| rng.random_bool(0.3)))
            .collect();
        let (h_small, h_big) = (
            potential_h(&model, &r).unwrap(),
            potential_h(&model, &bigger).unwrap(),
        );
        if h_small.value > h_big.value {
            violations.push(format!(
                "case {i}: H({r:?})={} > H({bigger:?})={}",
                h_small.value, h_big.value
            ));
        }

        let (pre, update) = random_hardcore(&mut rng);
        let post = pre.apply_update(&update).unwrap();
        let x0 = pre
            .bootstrap_sample(&stream.split("initial", 0), &opts)
            .unwrap();
        let start_ok = pre.is_independent(x0.values());
        let (x, _) = hardcore_dynamic_sample(
            &post,
            ResampleState::new(x0, post.vbl(&update)),
            &stream.split("hardcore", 0),
            &opts,
        )
        .unwrap();
        if !start_ok || !post.is_independent(x.values()) {
            violations.push(format!(
                "case {i}: hardcore output is not an independent set"
            ));
        }
    }

    let first = violations.first().cloned().unwrap_or_default();
    Outcome::new(
        violations.is_empty(),
        format!(
            "3 seeds byte-identical across reruns and modes; {CASES} randomized cases, {} violations{}",
            violations.len(),
            if first.is_empty() { String::new() } else { format!(" (first: {first})") }
        ),
    )
}

fn main() -> ExitCode {
    let soft = soft_pair(SOFT_PAIR_SEED).0;
    assert!(
        check_soft_condition(&soft, DELTA).satisfied,
        "shared soft model leaves the regime"
    );

    let criteria: [Criterion; 8] = [
        ("exactness against enumeration", exactness),
        ("conditional Gibbs equilibrium", equilibrium),
        ("potential decay", decay),
        ("iteration scaling", scaling),
        ("regime constants", constants),
        ("size independence", size_independence),
        ("engine equivalence", engine_equivalence),
        ("determinism and invariants", determinism_and_invariants),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        println!(
            "{} [{}] {}: {} ({:.1}s)",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            out.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!out.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
