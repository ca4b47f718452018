//! Closed-form collision, throughput, area spectral efficiency and delay
//! model of a directional network under the coherence-angle blockage model.
//!
//! The receiver's main lobe of width θ is split into `k` coherence sectors of
//! angle θ_c. Inside a sector the nearest obstacle shadows everything behind
//! it; sectors are independent. The tagged transmitter sits in sector `k` at
//! distance ℓ, so that sector is obstacle-free on `(0, ℓ]`.
//!
//! All formulas have guarded branches for `λ = 0` where the raw expressions
//! are `0/0`, and work with complements in log space so products of many
//! near-one factors stay accurate.

use crate::error::{check_domain, invalid, Error, Result};
use crate::model::{DerivedParams, Scenario};
use crate::quad::{self, DEFAULT_TOL};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `(1 − e^(−x)) / x`, continuous at 0.
pub(crate) fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Probability that at least one line-of-sight interferer exists in a sector,
/// given the sector holds at least one interferer and at least one obstacle.
///
/// `area` is the sector area `A_dmax`; both densities must be positive since
/// the conditioning event is otherwise empty.
pub fn conditional_los_prob_nonempty(lambda_i: f64, lambda_o: f64, area: f64) -> Result<f64> {
    if !(lambda_i > 0.0 && lambda_o > 0.0 && area > 0.0) {
        return Err(invalid(
            "densities",
            "conditioning on non-empty sectors needs λ_I > 0, λ_o > 0 and area > 0",
        ));
    }
    let s = lambda_i + lambda_o;
    let pi = -(-lambda_i * area).exp_m1();
    let po = -(-lambda_o * area).exp_m1();
    // λ_o/(p_I p_o) · (p_o/λ_o − (1 − e^{−sA})/s), rearranged to keep the
    // difference well conditioned
    let diff = area * (one_minus_exp_over(lambda_o * area) - one_minus_exp_over(s * area));
    Ok((lambda_o * diff / (pi * po)).clamp(0.0, 1.0))
}

/// Probability of at least one line-of-sight interferer in a regular sector
/// (one that does not hold the tagged transmitter):
/// `λ_I/(λ_o+λ_I) · (1 − e^(−(λ_o+λ_I)·area))`.
pub fn los_prob_regular_sector(lambda_i: f64, lambda_o: f64, area: f64) -> f64 {
    let s = lambda_i + lambda_o;
    if lambda_i <= 0.0 || area <= 0.0 || s <= 0.0 {
        return 0.0;
    }
    lambda_i / s * -(-s * area).exp_m1()
}

/// `ln(1 − P_regular)`, the log-probability that a regular sector of the given
/// area holds no line-of-sight interferer.
fn ln_no_los_regular(lambda_i: f64, lambda_o: f64, area: f64) -> f64 {
    let p = los_prob_regular_sector(lambda_i, lambda_o, area);
    if p < 0.5 {
        (-p).ln_1p()
    } else {
        let s = lambda_i + lambda_o;
        ((lambda_o + lambda_i * (-s * area).exp()) / s).ln()
    }
}

/// Probability of at least one line-of-sight interferer in the sector holding
/// the tagged transmitter at distance ℓ: the inner part of area `area_l` is
/// obstacle-free, the outer ring up to `area_dmax` behaves like a regular
/// sector.
pub fn los_prob_tagged_sector(
    lambda_i: f64,
    lambda_o: f64,
    area_l: f64,
    area_dmax: f64,
) -> Result<f64> {
    check_domain("tagged sector area", area_l, 0.0, area_dmax)?;
    Ok(-ln_no_los_tagged(lambda_i, lambda_o, area_l, area_dmax).exp_m1())
}

fn ln_no_los_tagged(lambda_i: f64, lambda_o: f64, area_l: f64, area_dmax: f64) -> f64 {
    -lambda_i * area_l + ln_no_los_regular(lambda_i, lambda_o, (area_dmax - area_l).max(0.0))
}

/// Joint density of the nearest interferer distance `x`, nearest obstacle
/// distance `y` and the counts `n`, `m` in a sector of radius `dmax` and area
/// `area`, conditioned on both counts being at least one.
///
/// It is the product of two first-order-statistic densities
/// `2nx/d²·(1 − x²/d²)^(n−1)` and two zero-truncated Poisson masses with means
/// `λ_I·area` and `λ_o·area`.
#[allow(clippy::too_many_arguments)]
pub fn min_distance_joint_density(
    x: f64,
    y: f64,
    n: u32,
    m: u32,
    lambda_i: f64,
    lambda_o: f64,
    dmax: f64,
    area: f64,
) -> Result<f64> {
    if !(dmax > 0.0 && area > 0.0) {
        return Err(invalid("dmax", "sector radius and area must be > 0"));
    }
    check_domain("interferer distance", x, 0.0, dmax)?;
    check_domain("obstacle distance", y, 0.0, dmax)?;
    if n == 0 || m == 0 {
        return Err(invalid("counts", "n and m must be >= 1"));
    }
    if !(lambda_i > 0.0 && lambda_o > 0.0) {
        return Err(invalid("densities", "zero-truncated counts need λ > 0"));
    }
    Ok(first_order_density(x, n, dmax)
        * first_order_density(y, m, dmax)
        * zero_truncated_poisson(n, lambda_i * area)
        * zero_truncated_poisson(m, lambda_o * area))
}

fn first_order_density(x: f64, n: u32, dmax: f64) -> f64 {
    let d2 = dmax * dmax;
    2.0 * n as f64 * x / d2 * (1.0 - x * x / d2).powi(n as i32 - 1)
}

fn zero_truncated_poisson(n: u32, mean: f64) -> f64 {
    let ln_fact: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
    (n as f64 * mean.ln() - mean - ln_fact).exp() / -(-mean).exp_m1()
}

/// Collision probability as a function of link length together with its
/// length average and bounds.
#[derive(Debug, Clone, Copy)]
pub struct CollisionResult {
    model: Analytic,
    /// Average over the link-length law `2ℓ/d_max²`.
    pub averaged: f64,
    /// Value at ℓ = 0.
    pub lower_bound: f64,
    /// Value at ℓ = d_max.
    pub upper_bound: f64,
}

impl CollisionResult {
    pub fn conditional_at(&self, ell: f64) -> Result<f64> {
        self.model.collision_given_length(ell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolTag {
    Aloha,
    Tdma,
}

/// Per-link throughput (packets/slot), its bounds and the area spectral
/// efficiency (packets/slot/m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub protocol: ProtocolTag,
    pub per_link: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub ase: f64,
}

/// Geometric law of the number of retransmissions before a success.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayPmf {
    pub success_prob: f64,
}

impl DelayPmf {
    pub fn new(success_prob: f64) -> Result<Self> {
        if success_prob <= 0.0 {
            return Err(Error::DegenerateDelay);
        }
        check_domain("success probability", success_prob, 0.0, 1.0)?;
        Ok(Self { success_prob })
    }

    /// Probability of exactly `n` retransmissions, `ρ_s(1 − ρ_s)^n`.
    pub fn pmf_at(&self, n: u32) -> f64 {
        let p = self.success_prob;
        if p >= 1.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        p * (n as f64 * (-p).ln_1p()).exp()
    }

    pub fn mean_retransmissions(&self) -> f64 {
        (1.0 - self.success_prob) / self.success_prob
    }
}

/// Closed-form engine bound to one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analytic {
    pub params: DerivedParams,
    pub tx_density: f64,
    pub obstacle_density: f64,
    pub tx_prob: f64,
    pub region_area: f64,
}

impl Analytic {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Ok(Self::from_derived(scenario, scenario.derive()?))
    }

    /// Uses `params` as given, which lets callers override the sector count or
    /// interference range.
    pub fn from_derived(scenario: &Scenario, params: DerivedParams) -> Self {
        Self {
            params,
            tx_density: scenario.tx_density,
            obstacle_density: scenario.obstacle_density,
            tx_prob: scenario.tx_prob,
            region_area: scenario.region_area,
        }
    }

    fn lambda_i(&self) -> f64 {
        self.params.interferer_density
    }

    /// Line-of-sight interference probability of one regular sector.
    pub fn sector_los_prob(&self) -> f64 {
        los_prob_regular_sector(
            self.lambda_i(),
            self.obstacle_density,
            self.params.sector_area(),
        )
    }

    /// `ln(1 − ρ_{c|L}(ℓ))`: every regular sector and the tagged sector are
    /// free of line-of-sight interferers.
    fn ln_no_collision(&self, ell: f64) -> f64 {
        let (li, lo) = (self.lambda_i(), self.obstacle_density);
        let ad = self.params.sector_area();
        let al = self.params.sector_area_at(ell).min(ad);
        let regular = (self.params.sector_count - 1) as f64;
        let reg = if regular > 0.0 {
            regular * ln_no_los_regular(li, lo, ad)
        } else {
            0.0
        };
        reg + ln_no_los_tagged(li, lo, al, ad)
    }

    fn check_length(&self, ell: f64) -> Result<()> {
        check_domain("link length", ell, 0.0, self.params.dmax)
    }

    /// Collision probability of a link of length ℓ.
    pub fn collision_given_length(&self, ell: f64) -> Result<f64> {
        self.check_length(ell)?;
        Ok(-self.ln_no_collision(ell).exp_m1())
    }

    /// Per-slot success probability of a link of length ℓ: active, not
    /// blocked and not collided.
    pub fn success_given_length(&self, ell: f64) -> Result<f64> {
        self.check_length(ell)?;
        Ok(self.success_unchecked(ell))
    }

    fn success_unchecked(&self, ell: f64) -> f64 {
        if self.tx_prob <= 0.0 {
            return 0.0;
        }
        let blocked = -self.obstacle_density * self.params.sector_area_at(ell);
        self.tx_prob * (blocked + self.ln_no_collision(ell)).exp()
    }

    fn length_average<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> f64 {
        let d = self.params.dmax;
        quad::integrate(|l| f(l) * 2.0 * l / (d * d), 0.0, d, tol)
    }

    pub fn collision(&self) -> CollisionResult {
        self.collision_with_tol(DEFAULT_TOL)
    }

    pub fn collision_with_tol(&self, tol: f64) -> CollisionResult {
        let lower = -self.ln_no_collision(0.0).exp_m1();
        let upper = -self.ln_no_collision(self.params.dmax).exp_m1();
        let averaged = self.length_average(|l| -self.ln_no_collision(l).exp_m1(), tol);
        CollisionResult {
            model: *self,
            // the integrand is nondecreasing, so anything outside is quadrature noise
            averaged: averaged.clamp(lower, upper),
            lower_bound: lower,
            upper_bound: upper,
        }
    }

    pub fn aloha_throughput(&self) -> ThroughputReport {
        self.aloha_throughput_with_tol(DEFAULT_TOL)
    }

    pub fn aloha_throughput_with_tol(&self, tol: f64) -> ThroughputReport {
        let lower = self.success_unchecked(self.params.dmax);
        let upper = self.success_unchecked(0.0);
        let per_link = self
            .length_average(|l| self.success_unchecked(l), tol)
            .clamp(lower, upper);
        let a = self.region_area;
        ThroughputReport {
            protocol: ProtocolTag::Aloha,
            per_link,
            lower_bound: lower,
            upper_bound: upper,
            ase: (1.0 + a * self.tx_density) / a * per_link,
        }
    }

    /// Round-robin TDMA over the `1 + n_t` links of the region, `n_t` Poisson
    /// with mean `λ_t·A`. The lower bound is the exact value; the upper bound
    /// is the obstacle-free limit.
    pub fn tdma_throughput(&self) -> ThroughputReport {
        let a = self.region_area;
        let share = one_minus_exp_over(self.tx_density * a);
        let los = one_minus_exp_over(self.obstacle_density * self.params.sector_area());
        let per_link = share * los;
        ThroughputReport {
            protocol: ProtocolTag::Tdma,
            per_link,
            lower_bound: per_link,
            upper_bound: share,
            ase: los / a,
        }
    }

    /// Retransmission law with the length-averaged ALOHA success probability.
    pub fn delay_pmf(&self) -> Result<DelayPmf> {
        DelayPmf::new(self.aloha_throughput().per_link)
    }
}

pub fn collision_prob_given_length(ell: f64, scenario: &Scenario) -> Result<f64> {
    Analytic::new(scenario)?.collision_given_length(ell)
}

pub fn collision_prob(scenario: &Scenario) -> Result<CollisionResult> {
    Ok(Analytic::new(scenario)?.collision())
}

pub fn success_prob_given_length(ell: f64, scenario: &Scenario) -> Result<f64> {
    Analytic::new(scenario)?.success_given_length(ell)
}

pub fn aloha_throughput(scenario: &Scenario) -> Result<ThroughputReport> {
    Ok(Analytic::new(scenario)?.aloha_throughput())
}

pub fn tdma_throughput(scenario: &Scenario) -> Result<ThroughputReport> {
    Ok(Analytic::new(scenario)?.tdma_throughput())
}

pub fn aloha_delay_pmf(scenario: &Scenario) -> Result<DelayPmf> {
    Analytic::new(scenario)?.delay_pmf()
}

/// Transmission probability maximizing the ALOHA per-link throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxProbOptimum {
    pub tx_prob: f64,
    pub throughput: f64,
}

const OPT_GRID: usize = 101;
const GOLDEN_TOL: f64 = 1e-6;

/// Maximizes the ALOHA per-link throughput over `ρ_a ∈ [0, 1]` (the scenario's
/// own `tx_prob` is ignored). A 101-point grid locates the best bracket, which
/// golden-section search then refines; ties go to the larger probability.
pub fn optimize_tx_prob(scenario: &Scenario) -> Result<TxProbOptimum> {
    scenario.validate()?;
    let params = scenario.derive()?;
    let objective = |rho: f64| {
        let mut m = Analytic::from_derived(scenario, params);
        m.tx_prob = rho;
        m.params.interferer_density =
            rho * scenario.tx_density * scenario.antenna.beamwidth / TWO_PI;
        m.aloha_throughput().per_link
    };

    let mut best = (0.0, objective(0.0));
    let mut best_idx = 0;
    for i in 1..OPT_GRID {
        let rho = i as f64 / (OPT_GRID - 1) as f64;
        let v = objective(rho);
        if v >= best.1 {
            best = (rho, v);
            best_idx = i;
        }
    }

    let step = 1.0 / (OPT_GRID - 1) as f64;
    let mut lo = (best_idx as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_idx as f64 + 1.0) * step).min(1.0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while hi - lo > GOLDEN_TOL {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    let rho = 0.5 * (lo + hi);
    let refined = (rho, objective(rho));
    let tie = 1e-12 * best.1.abs().max(1e-300);
    let winner = if refined.1 > best.1 + tie || (refined.1 >= best.1 - tie && refined.0 > best.0) {
        refined
    } else {
        best
    };
    Ok(TxProbOptimum {
        tx_prob: winner.0,
        throughput: winner.1,
    })
}

/// Closed-form limits of the conditional collision probability and of the
/// throughput, used as benchmarks.
pub mod limits {
    use super::one_minus_exp_over;

    /// λ_o → 0: every interferer in the main lobe is in line of sight,
    /// `1 − e^(−k λ_I A_dmax)`.
    pub fn obstacle_free_collision(lambda_i: f64, area_dmax: f64, sector_count: u32) -> f64 {
        -(-(sector_count as f64) * lambda_i * area_dmax).exp_m1()
    }

    /// λ_o → ∞ with finite λ_I: only interferers closer than the tagged
    /// transmitter in its own sector remain, `1 − e^(−λ_I A_ℓ)`.
    pub fn obstacle_dense_collision(lambda_i: f64, area_l: f64) -> f64 {
        -(-lambda_i * area_l).exp_m1()
    }

    /// θ_c → 0 with θ ≫ θ_c: independent blockage per interferer,
    /// `1 − e^(−λ_I d_max² θ/2)`.
    pub fn independent_blockage_collision(lambda_i: f64, dmax: f64, beamwidth: f64) -> f64 {
        -(-lambda_i * dmax * dmax * beamwidth / 2.0).exp_m1()
    }

    /// λ_I → 0, and θ = θ_c → 0.
    pub const NO_INTERFERENCE_COLLISION: f64 = 0.0;

    /// λ_I → ∞ with finite λ_o.
    pub const SATURATED_COLLISION: f64 = 1.0;

    /// λ_t → 0 common limit of the ALOHA (with ρ_a = 1) and TDMA per-link
    /// throughput, `(1 − e^(−λ_o A_dmax)) / (λ_o A_dmax)`.
    pub fn sparse_network_throughput(lambda_o: f64, area_dmax: f64) -> f64 {
        one_minus_exp_over(lambda_o * area_dmax)
    }

    /// Obstacle-free TDMA per-link throughput, `(1 − e^(−λ_t A))/(λ_t A)`.
    pub fn tdma_per_link_upper(tx_density: f64, region_area: f64) -> f64 {
        one_minus_exp_over(tx_density * region_area)
    }

    pub fn tdma_ase_upper(region_area: f64) -> f64 {
        1.0 / region_area
    }
}
