//! Event-driven simulator of a planar directional network: segment obstacles,
//! CBR or saturated traffic and four MAC protocols.

mod engine;
mod mac;
mod topology;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use engine::{run, run_with_graph, LinkStats, SimStats};
pub use mac::{csma_ca_cycle_us, utilization, MacConfig, Protocol, Traffic};
pub use topology::{
    build_topology, collision_check, interferes, ConflictGraph, Link, PlanarTopology, Region,
};

use crate::error::Result;
use crate::model::Scenario;

/// Seeds `(topology, run)` of replication `index` derived from a base seed.
pub fn replication_seeds(seed: u64, index: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (rng.next_u64(), rng.next_u64())
}

/// Independent replications, each on a fresh topology. Results are in
/// replication order whatever the thread count.
pub fn replicate(
    scenario: &Scenario,
    region: Region,
    mac: &MacConfig,
    duration_s: f64,
    replications: u64,
    seed: u64,
) -> Result<Vec<SimStats>> {
    (0..replications)
        .into_par_iter()
        .map(|r| {
            let (topo_seed, run_seed) = replication_seeds(seed, r);
            let topo = build_topology(scenario, region, topo_seed)?;
            run(&topo, mac, duration_s, run_seed)
        })
        .collect()
}
