use dynsampler::io::{model_to_json, parse_model, parse_updates, updates_to_json, ModelSpec};
use dynsampler::oracle::{exact_gibbs, EmpiricalDistribution};
use dynsampler::resample_engine::EngineOptions;
use dynsampler::rng::RngStream;

const TRIANGLE: &str = r#"{"type":"ising","n":3}"#;
const TRIANGLE_UPDATES: &str = r#"[
    {"edges":[[0,1,-0.5]]},
    {"edges":[[1,2,-0.5]]},
    {"edges":[[0,2,-0.5]],"fields":[{"id":1,"phi":[0.3,0.7]}]}
]"#;

fn run_file_stream(model: &str, updates: &str, trials: u64) -> (ModelSpec, EmpiricalDistribution) {
    let model = parse_model(model).unwrap();
    let updates = parse_updates(&model, updates).unwrap();
    let opts = EngineOptions::default();
    let mut last = None;
    let mut emp = None;
    for i in 0..trials {
        let trial = RngStream::new(77).split("trial", i);
        let x0 = model
            .bootstrap_sample(&trial.split("initial", 0), &opts)
            .unwrap();
        let (post, x, stats) = model
            .run_updates(x0, &updates, &trial.split("engine", 0), &opts)
            .unwrap();
        assert_eq!(stats.len(), updates.len());
        let exact = exact_gibbs(&post.to_factor_graph()).unwrap();
        let emp = emp.get_or_insert_with(|| EmpiricalDistribution::new(exact.len()));
        emp.add(exact.indexer().index(x.into_values()));
        last = Some(post);
    }
    (last.unwrap(), emp.unwrap())
}

#[test]
fn ising_file_stream_matches_enumeration() {
    let (post, emp) = run_file_stream(TRIANGLE, TRIANGLE_UPDATES, 40_000);
    let exact = exact_gibbs(&post.to_factor_graph()).unwrap();
    assert!(emp.tvd_to(&exact.probs).unwrap() < 0.02);
}

#[test]
fn hardcore_file_stream_stays_independent() {
    let model = r#"{"type":"hardcore","edges":[[0,1],[1,2]],"lambda":[0.5,0.5,0.5,0.5]}"#;
    let updates =
        r#"[{"edges":[[2,3]]},{"remove_edges":[[0,1]],"lambda":[[0,1.2]]},{"edges":[[3,0]]}]"#;
    let (post, emp) = run_file_stream(model, updates, 20_000);
    let exact = exact_gibbs(&post.to_factor_graph()).unwrap();
    for (i, c) in emp.counts.iter().enumerate() {
        if exact.probs[i] == 0.0 {
            assert_eq!(*c, 0, "sample landed on a blocked configuration");
        }
    }
    assert!(emp.tvd_to(&exact.probs).unwrap() < 0.02);
}

#[test]
fn potts_and_factor_graph_files_run() {
    let potts = r#"{"type":"potts","q":3,"edges":[[0,1,0.2],[1,2,-0.1]]}"#;
    let (post, emp) = run_file_stream(potts, r#"[{"edges":[[0,2,0.25]]}]"#, 20_000);
    assert_eq!(post.kind(), "potts");
    let exact = exact_gibbs(&post.to_factor_graph()).unwrap();
    assert!(emp.tvd_to(&exact.probs).unwrap() < 0.03);

    let generic = r#"{"variables":[{"q":2,"phi":[0.5,0.5]},{"q":2,"phi":[0.4,0.6]},{"q":3,"phi":[1,1,1]}],
                      "constraints":[{"scope":[0,1],"table":[1,0.9,0.9,1]}]}"#;
    let updates = r#"[{"constraints":[{"scope":[1,2],"table":[1,0.95,0.9,0.9,1,0.95]}]},
                      {"variables":[{"id":0,"phi":[0.2,0.8]}]}]"#;
    let (post, emp) = run_file_stream(generic, updates, 20_000);
    let exact = exact_gibbs(&post.to_factor_graph()).unwrap();
    assert!(emp.tvd_to(&exact.probs).unwrap() < 0.02);
}

#[test]
fn files_round_trip() {
    for text in [
        TRIANGLE,
        r#"{"type":"potts","q":4,"edges":[[0,1,0.2]]}"#,
        r#"{"type":"hardcore","edges":[[0,1]],"lambda":[0.2,0.3]}"#,
    ] {
        let m = parse_model(text).unwrap();
        assert_eq!(parse_model(&model_to_json(&m)).unwrap(), m);
    }
    let m = parse_model(TRIANGLE).unwrap();
    let ups = parse_updates(&m, TRIANGLE_UPDATES).unwrap();
    assert_eq!(parse_updates(&m, &updates_to_json(&ups)).unwrap(), ups);
}

#[test]
fn mismatched_updates_are_parse_errors() {
    let m = parse_model(TRIANGLE).unwrap();
    assert!(parse_updates(&m, r#"[{"remove_edges":[[0,1]]}]"#).is_err());
    assert!(parse_updates(&m, r#"{"edges":[]}"#).is_err());
    assert!(parse_model("{").is_err());
}
