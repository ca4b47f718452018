use super::{Engine, ExperimentSpec, ScenarioConfig, Sweep};
use crate::desim::{MacConfig, Protocol, Traffic};
use crate::error::{Error, Result};

pub const FIGURE_IDS: &[&str] = &[
    "fig2a", "fig2b", "fig3", "fig5a", "fig5b", "fig6", "fig7a", "fig7b", "fig8a", "fig8b",
];

const SEED: u64 = 20_160_101;

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn label(x: f64) -> String {
    format!("{x:.4}")
        .trim_end_matches('0')
        .trim_end_matches('.')
        .to_string()
}

fn spec(
    name: String,
    engine: Engine,
    scenario: ScenarioConfig,
    param: &str,
    values: Vec<f64>,
) -> ExperimentSpec {
    ExperimentSpec {
        name,
        engine,
        scenario,
        sweep: Some(Sweep {
            param: param.into(),
            values,
        }),
        seed: SEED,
        ..ExperimentSpec::default()
    }
}

/// Same sweep evaluated by the closed forms and by Monte Carlo.
fn with_mc(
    name: String,
    scenario: ScenarioConfig,
    param: &str,
    values: Vec<f64>,
    link_length: Option<f64>,
) -> Vec<ExperimentSpec> {
    [Engine::Analytic, Engine::Montecarlo]
        .into_iter()
        .map(|engine| ExperimentSpec {
            link_length,
            ..spec(
                format!("{name}-{}", engine.name()),
                engine,
                scenario.clone(),
                param,
                values.clone(),
            )
        })
        .collect()
}

/// Sweep specifications encoding the stated parameters of each figure.
pub fn figure_preset(id: &str) -> Result<Vec<ExperimentSpec>> {
    let base = ScenarioConfig::default();
    let mut out = Vec::new();
    match id {
        "fig2a" => {
            for lo in [0.0025, 0.11, 0.25] {
                let sc = ScenarioConfig {
                    obstacle_density: lo,
                    ..base.clone()
                };
                out.extend(with_mc(
                    format!("fig2a-lo{}", label(lo)),
                    sc,
                    "tx_density",
                    logspace(0.01, 10.0, 13),
                    None,
                ));
            }
        }
        "fig2b" => {
            for lt in [1.0 / 9.0, 0.25, 1.0] {
                let sc = ScenarioConfig {
                    tx_density: lt,
                    ..base.clone()
                };
                out.extend(with_mc(
                    format!("fig2b-lt{}", label(lt)),
                    sc,
                    "obstacle_density",
                    logspace(0.001, 10.0, 13),
                    None,
                ));
            }
        }
        "fig3" => {
            for (lt, theta) in [(1.0 / 9.0, 20.0), (1.0 / 9.0, 10.0), (0.25, 20.0)] {
                let sc = ScenarioConfig {
                    tx_density: lt,
                    beamwidth_deg: theta,
                    ..base.clone()
                };
                out.extend(with_mc(
                    format!("fig3-lt{}-theta{}", label(lt), label(theta)),
                    sc,
                    "link_length",
                    linspace(0.0, 15.0, 16),
                    None,
                ));
            }
        }
        "fig5a" => {
            for lo in [1.0 / 400.0, 0.11] {
                let sc = ScenarioConfig {
                    obstacle_density: lo,
                    ..base.clone()
                };
                out.extend(with_mc(
                    format!("fig5a-lo{}", label(lo)),
                    sc,
                    "tx_density",
                    logspace(0.01, 10.0, 13),
                    Some(5.0),
                ));
            }
        }
        "fig5b" => {
            for lt in [1.0 / 9.0, 0.25] {
                let sc = ScenarioConfig {
                    tx_density: lt,
                    ..base.clone()
                };
                out.extend(with_mc(
                    format!("fig5b-lt{}", label(lt)),
                    sc,
                    "obstacle_density",
                    logspace(0.001, 10.0, 13),
                    Some(5.0),
                ));
            }
        }
        "fig6" => {
            let rho = linspace(0.1, 1.0, 10);
            for lt in [0.44, 1.0, 4.0] {
                let sc = ScenarioConfig {
                    tx_density: lt,
                    obstacle_density: 0.11,
                    region_area: 100.0,
                    ..base.clone()
                };
                let name = format!("fig6-lt{}", label(lt));
                out.push(spec(
                    format!("{name}-analytic"),
                    Engine::Analytic,
                    sc.clone(),
                    "tx_prob",
                    rho.clone(),
                ));
                out.push(ExperimentSpec {
                    mac: MacConfig {
                        traffic: Traffic::Saturated,
                        ..MacConfig::default()
                    },
                    ..spec(
                        format!("{name}-desim"),
                        Engine::Desim,
                        sc,
                        "tx_prob",
                        rho.clone(),
                    )
                });
            }
        }
        "fig7a" | "fig7b" => {
            for theta in [10.0, 25.0, 40.0] {
                let fixed = ScenarioConfig {
                    beamwidth_deg: theta,
                    obstacle_density: 0.11,
                    region_area: 500.0,
                    ..base.clone()
                };
                let mut variants = vec![("dmax15", fixed.clone())];
                if id == "fig7b" {
                    variants.push((
                        "derived",
                        ScenarioConfig {
                            reference_link_length: Some(5.0),
                            ..fixed
                        },
                    ));
                }
                for (tag, sc) in variants {
                    out.push(ExperimentSpec {
                        optimize: true,
                        ..spec(
                            format!("{id}-theta{}-{tag}", label(theta)),
                            Engine::Analytic,
                            sc,
                            "tx_density",
                            logspace(0.001, 10.0, 17),
                        )
                    });
                }
            }
        }
        "fig8a" => {
            let sc = ScenarioConfig {
                beamwidth_deg: 10.0,
                obstacle_density: 0.25,
                region_area: 100.0,
                ..base.clone()
            };
            let lt = logspace(0.05, 20.0, 12);
            for rho in [1.0, 0.1] {
                let sc = ScenarioConfig {
                    tx_prob: rho,
                    ..sc.clone()
                };
                let name = format!("fig8a-aloha{}", label(rho));
                out.push(spec(
                    format!("{name}-analytic"),
                    Engine::Analytic,
                    sc.clone(),
                    "tx_density",
                    lt.clone(),
                ));
                out.push(ExperimentSpec {
                    mac: MacConfig {
                        traffic: Traffic::Saturated,
                        ..MacConfig::default()
                    },
                    replications: 5,
                    ..spec(
                        format!("{name}-desim"),
                        Engine::Desim,
                        sc,
                        "tx_density",
                        lt.clone(),
                    )
                });
            }
            out.push(ExperimentSpec {
                mac: MacConfig {
                    traffic: Traffic::Saturated,
                    ..MacConfig::with_protocol(Protocol::Tdma)
                },
                replications: 5,
                ..spec(
                    "fig8a-tdma-desim".into(),
                    Engine::Desim,
                    sc,
                    "tx_density",
                    lt,
                )
            });
        }
        "fig8b" => {
            let sc = ScenarioConfig {
                beamwidth_deg: 10.0,
                obstacle_density: 0.25,
                region_area: 100.0,
                ..base
            };
            // a quarter of the one-packet-per-slot link capacity
            let traffic = Traffic::Cbr { bps: 400e6 };
            let lt = vec![0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0];
            let protocols = [
                ("tdma", Protocol::Tdma, 1.0),
                ("aloha1", Protocol::SlottedAloha { tx_prob: 1.0 }, 1.0),
                ("aloha0.9", Protocol::SlottedAloha { tx_prob: 0.9 }, 0.9),
                (
                    "csma",
                    Protocol::Csma {
                        cw_min: 16,
                        cw_max: 1024,
                    },
                    1.0,
                ),
                (
                    "csma_ca",
                    Protocol::CsmaCa {
                        cw_min: 16,
                        cw_max: 1024,
                    },
                    1.0,
                ),
            ];
            for (tag, protocol, rho) in protocols {
                out.push(ExperimentSpec {
                    mac: MacConfig {
                        protocol,
                        traffic,
                        ..MacConfig::default()
                    },
                    replications: 5,
                    ..spec(
                        format!("fig8b-{tag}"),
                        Engine::Desim,
                        ScenarioConfig {
                            tx_prob: rho,
                            ..sc.clone()
                        },
                        "tx_density",
                        lt.clone(),
                    )
                });
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown figure `{other}`; expected one of {}",
                FIGURE_IDS.join(", ")
            )))
        }
    }
    Ok(out)
}
