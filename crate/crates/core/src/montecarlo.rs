//! Direct sampling of the sectored interference/blockage model.
//!
//! Nothing here uses a closed form: each trial draws Poisson counts and
//! radial distances per coherence sector and checks which interferers are in
//! line of sight. Trial `t` uses its own ChaCha8 stream (`seed`, stream `t`),
//! and hits are summed as integers, so results do not depend on how rayon
//! splits the work.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{check_domain, invalid, Result};
use crate::model::{DerivedParams, Scenario};

/// One sampled receiver neighborhood: interferer and obstacle distances per
/// coherence sector, with the tagged transmitter in `tagged_sector`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorTopology {
    pub interferers: Vec<Vec<f64>>,
    pub obstacles: Vec<Vec<f64>>,
    pub tagged_sector: usize,
    pub link_length: f64,
}

impl SectorTopology {
    /// A sector holds a line-of-sight interferer when its nearest interferer
    /// is strictly closer than its nearest obstacle.
    pub fn sector_has_los(&self, sector: usize) -> bool {
        los_in(&self.interferers[sector], &self.obstacles[sector])
    }

    pub fn collided(&self) -> bool {
        (0..self.interferers.len()).any(|s| self.sector_has_los(s))
    }
}

fn nearest(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn los_in(interferers: &[f64], obstacles: &[f64]) -> bool {
    // ties go to the obstacle
    nearest(interferers) < nearest(obstacles)
}

/// Bernoulli estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    pub hits: u64,
}

impl Estimate {
    pub fn from_hits(hits: u64, trials: u64, seed: u64) -> Self {
        let mean = hits as f64 / trials as f64;
        Self {
            mean,
            std_error: (mean * (1.0 - mean) / trials as f64).sqrt(),
            trials,
            seed,
            hits,
        }
    }
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as usize
}

/// Distances of the points of a Poisson process with density `lambda` inside
/// the part of a sector of angle `angle` between radii `inner` and `dmax`.
fn sample_ring<R: Rng>(lambda: f64, angle: f64, inner: f64, dmax: f64, rng: &mut R) -> Vec<f64> {
    let area = angle * (dmax * dmax - inner * inner) / 2.0;
    let n = poisson(lambda * area, rng);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            (inner * inner + u * (dmax * dmax - inner * inner)).sqrt()
        })
        .collect()
}

/// Interferer and obstacle distances in one sector of angle `coherence_angle`
/// and radius `dmax`. Counts are Poisson with means `λ·A_dmax`; distances
/// have CDF `x²/d_max²`.
pub fn sample_sector<R: Rng>(
    lambda_i: f64,
    lambda_o: f64,
    dmax: f64,
    coherence_angle: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let interferers = sample_ring(lambda_i, coherence_angle, 0.0, dmax, rng);
    let obstacles = sample_ring(lambda_o, coherence_angle, 0.0, dmax, rng);
    (interferers, obstacles)
}

/// Samples all `k` sectors for a link of length `link_length`. The tagged
/// sector (the last one) gets obstacles only beyond the link length, since
/// the link is assumed established.
pub fn sample_topology<R: Rng>(
    params: &DerivedParams,
    obstacle_density: f64,
    link_length: f64,
    rng: &mut R,
) -> SectorTopology {
    let k = params.sector_count as usize;
    let (li, d, a) = (
        params.interferer_density,
        params.dmax,
        params.coherence_angle,
    );
    let mut interferers = Vec::with_capacity(k);
    let mut obstacles = Vec::with_capacity(k);
    for _ in 0..k - 1 {
        let (i, o) = sample_sector(li, obstacle_density, d, a, rng);
        interferers.push(i);
        obstacles.push(o);
    }
    interferers.push(sample_ring(li, a, 0.0, d, rng));
    obstacles.push(sample_ring(obstacle_density, a, link_length, d, rng));
    SectorTopology {
        interferers,
        obstacles,
        tagged_sector: k - 1,
        link_length,
    }
}

fn trial_rng(base: &ChaCha8Rng, trial: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(trial);
    rng
}

fn count_hits<F>(trials: u64, seed: u64, hit: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| hit(&mut trial_rng(&base, t)) as u64)
        .sum();
    Ok(Estimate::from_hits(hits, trials, seed))
}

/// Fraction of sampled sectors holding a line-of-sight interferer.
pub fn estimate_sector_los_prob(scenario: &Scenario, trials: u64, seed: u64) -> Result<Estimate> {
    let p = scenario.derive()?;
    let lo = scenario.obstacle_density;
    count_hits(trials, seed, |rng| {
        let (i, o) = sample_sector(p.interferer_density, lo, p.dmax, p.coherence_angle, rng);
        los_in(&i, &o)
    })
}

/// Collision probability of a link of length `given_length`, or of a link
/// whose length is drawn from `2ℓ/d_max²` when `None`.
pub fn estimate_collision_prob(
    scenario: &Scenario,
    given_length: Option<f64>,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    estimate_collision_prob_with(
        &scenario.derive()?,
        scenario.obstacle_density,
        given_length,
        trials,
        seed,
    )
}

/// As [`estimate_collision_prob`] with explicit derived parameters.
pub fn estimate_collision_prob_with(
    params: &DerivedParams,
    obstacle_density: f64,
    given_length: Option<f64>,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if let Some(ell) = given_length {
        check_domain("link length", ell, 0.0, params.dmax)?;
    }
    count_hits(trials, seed, |rng| {
        let ell = match given_length {
            Some(l) => l.min(params.dmax),
            None => params.dmax * rng.random::<f64>().sqrt(),
        };
        sample_topology(params, obstacle_density, ell, rng).collided()
    })
}
