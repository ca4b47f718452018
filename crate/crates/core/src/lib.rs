//! Analytic, Monte Carlo and event-driven models of collisions, throughput
//! and delay in directional millimeter-wave networks with correlated
//! blockage.

pub mod analytics;
pub mod desim;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod quad;

#[cfg(test)]
mod testutil;

pub use analytics::{
    aloha_delay_pmf, aloha_throughput, collision_prob, collision_prob_given_length,
    optimize_tx_prob, success_prob_given_length, tdma_throughput, Analytic, CollisionResult,
    DelayPmf, ProtocolTag, ThroughputReport, TxProbOptimum,
};
pub use error::{Error, Result};
pub use model::{AntennaPattern, Channel, DerivedParams, DmaxMode, Scenario};
