use mmwave_mac::experiment::{run_experiment, Engine, ExperimentSpec, CSV_HEADER};
use mmwave_mac::montecarlo::estimate_collision_prob;
use mmwave_mac::{collision_prob_given_length, Error, Scenario};

#[test]
fn toml_to_csv() {
    let spec = ExperimentSpec::from_toml(
        r#"
name = "density"
engine = "analytic"
[scenario]
tx_density = 0.25
beamwidth_deg = 30.0
[sweep]
param = "obstacle_density"
values = [0.01, 0.1, 1.0]
"#,
    )
    .unwrap();
    let out = run_experiment(&spec).unwrap();
    let csv = out.to_csv();
    assert!(csv.contains("# experiment: density\n"));
    assert!(csv.contains(CSV_HEADER));
    let collision: Vec<f64> = out
        .rows
        .iter()
        .filter(|r| r.metric == "collision_prob")
        .map(|r| r.value)
        .collect();
    // more obstacles shadow more interferers
    assert_eq!(collision.len(), 3);
    assert!(collision.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn conditional_collision_matches_sampling() {
    let sc = Scenario {
        tx_density: 0.5,
        obstacle_density: 0.05,
        ..Scenario::default()
    };
    let exact = collision_prob_given_length(8.0, &sc).unwrap();
    let est = estimate_collision_prob(&sc, Some(8.0), 200_000, 99).unwrap();
    assert!(
        (est.mean - exact).abs() < 4.0 * est.std_error,
        "{} vs {exact}",
        est.mean
    );
}

#[test]
fn invalid_configs_are_config_errors() {
    for text in [
        "engine = \"quantum\"",
        "[scenario]\ncoherence_angle_deg = 45.0\nbeamwidth_deg = 20.0",
        "[sweep]\nparam = \"colour\"\nvalues = [1.0]",
        "unknown_key = 1",
    ] {
        let err = ExperimentSpec::from_toml(text).unwrap_err();
        assert!(
            matches!(err, Error::Config(_) | Error::InvalidParameter { .. }),
            "{text}: {err:?}"
        );
    }
}

#[test]
fn desim_engine_reports_replication_spread() {
    let spec = ExperimentSpec {
        engine: Engine::Desim,
        duration_s: 0.02,
        replications: 4,
        ..ExperimentSpec::default()
    };
    let out = run_experiment(&spec).unwrap();
    let row = out
        .rows
        .iter()
        .find(|r| r.metric == "per_link_throughput")
        .unwrap();
    assert!(row.value > 0.0 && row.value <= 1.0);
    assert!(row.stderr.unwrap() >= 0.0);
}
