//! Physical-layer parameterization: sector antenna pattern, deterministic
//! path-loss channel, interference range, coherence-angle sectorization and
//! the link-length law.
//!
//! Everything here is SI (meters, watts, radians). Degrees and milliwatts only
//! appear at the configuration boundary.

use std::f64::consts::PI;

use crate::error::{check_domain, invalid, Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Ideal sector antenna: constant gain inside the main lobe of width
/// `beamwidth`, constant `side_lobe` gain elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    /// Main-lobe width in radians, in (0, 2π].
    pub beamwidth: f64,
    /// Side-lobe gain, in [0, 1).
    pub side_lobe: f64,
}

impl AntennaPattern {
    pub fn new(beamwidth: f64, side_lobe: f64) -> Result<Self> {
        let pattern = Self {
            beamwidth,
            side_lobe,
        };
        pattern.validate()?;
        Ok(pattern)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beamwidth > 0.0 && self.beamwidth <= TWO_PI * (1.0 + 1e-12)) {
            return Err(invalid(
                "beamwidth",
                format!("{} rad not in (0, 2π]", self.beamwidth),
            ));
        }
        if !(0.0..1.0).contains(&self.side_lobe) {
            return Err(invalid(
                "side_lobe",
                format!("{} not in [0, 1)", self.side_lobe),
            ));
        }
        Ok(())
    }

    /// Main-lobe gain, fixed by requiring the pattern to radiate the same
    /// total power as an isotropic antenna.
    pub fn main_lobe_gain(&self) -> f64 {
        main_lobe_gain(self)
    }
}

/// Main-lobe gain `(2π − (2π − θ)ε) / θ` of an ideal sector pattern.
pub fn main_lobe_gain(pattern: &AntennaPattern) -> f64 {
    let theta = pattern.beamwidth;
    (TWO_PI - (TWO_PI - theta) * pattern.side_lobe) / theta
}

/// Deterministic path-loss channel `a·d^(−α)`, optionally multiplied by an
/// atmospheric absorption term `exp(−c·d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Channel gain at the 1 m reference distance.
    pub ref_attenuation: f64,
    pub pathloss_exponent: f64,
    /// Minimum SINR (linear) for correct decoding.
    pub sinr_threshold: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Extra atmospheric absorption in dB/km; 0 disables it.
    pub absorption_db_per_km: f64,
}

impl Channel {
    /// 60 GHz short-range channel with 2.5 mW transmit power and 16 dB/km
    /// oxygen absorption.
    ///
    /// The reference gain is free-space `(λ/4π)²` at 5 mm wavelength, noise is
    /// thermal over 2.16 GHz with a 10 dB noise figure, the path-loss exponent
    /// is 2 and the SINR threshold is 9 dB. With a 20° ideal sector pattern and
    /// a 5 m link this puts the interference range at about 14.9 m.
    pub fn mmwave_60ghz() -> Self {
        let wavelength = 299_792_458.0 / 60e9;
        let noise_dbm = -174.0 + 10.0 * (2.16e9_f64).log10() + 10.0;
        Self {
            tx_power: 2.5e-3,
            ref_attenuation: (wavelength / (4.0 * PI)).powi(2),
            pathloss_exponent: 2.0,
            sinr_threshold: 10f64.powf(0.9),
            noise_power: 10f64.powf(noise_dbm / 10.0) * 1e-3,
            absorption_db_per_km: 16.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power", self.tx_power),
            ("ref_attenuation", self.ref_attenuation),
            ("pathloss_exponent", self.pathloss_exponent),
            ("sinr_threshold", self.sinr_threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        for (name, v) in [
            ("noise_power", self.noise_power),
            ("absorption_db_per_km", self.absorption_db_per_km),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("{v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Absorption coefficient in nepers per meter (16 dB/km ≈ 0.0037 /m).
    pub fn absorption_per_m(&self) -> f64 {
        self.absorption_db_per_km * std::f64::consts::LN_10 / 10.0 / 1000.0
    }
}

/// Maximum distance at which an aligned line-of-sight interferer still drives
/// the SINR of a link of length `link_length` below the threshold.
///
/// Without absorption this is the closed form
/// `(L^(−α)/β − (σ/pa)(1/g)²)^(−1/α)`; with absorption the SINR equality is
/// solved by bisection.
pub fn interference_range(
    link_length: f64,
    channel: &Channel,
    pattern: &AntennaPattern,
) -> Result<f64> {
    if !(link_length.is_finite() && link_length > 0.0) {
        return Err(invalid("link_length", format!("{link_length} must be > 0")));
    }
    if channel.absorption_db_per_km > 0.0 {
        return interference_range_bisect(link_length, channel, pattern);
    }
    let alpha = channel.pathloss_exponent;
    let base = range_base(link_length, channel, pattern, 0.0);
    if base <= 0.0 {
        return Err(Error::NoInterferenceRange { link_length });
    }
    Ok(base.powf(-1.0 / alpha))
}

/// Right-hand side of `d^(−α)·e^(−c·d) = base` from the SINR equality.
fn range_base(link_length: f64, channel: &Channel, pattern: &AntennaPattern, c: f64) -> f64 {
    let g = main_lobe_gain(pattern);
    let alpha = channel.pathloss_exponent;
    link_length.powf(-alpha) * (-c * link_length).exp() / channel.sinr_threshold
        - channel.noise_power / (channel.tx_power * channel.ref_attenuation * g * g)
}

const BISECT_UPPER_M: f64 = 1e4;

/// Root of the SINR equality by bisection on `(0, 10⁴]` m. The received
/// interference power is strictly decreasing in distance, so the bracket holds
/// a single crossing. Iterates to full double precision.
pub(crate) fn interference_range_bisect(
    link_length: f64,
    channel: &Channel,
    pattern: &AntennaPattern,
) -> Result<f64> {
    let alpha = channel.pathloss_exponent;
    let c = channel.absorption_per_m();
    let base = range_base(link_length, channel, pattern, c);
    if base <= 0.0 {
        return Err(Error::NoInterferenceRange { link_length });
    }
    // work with logs: h(d) = −α ln d − c d is decreasing
    let target = base.ln();
    let h = |d: f64| -alpha * d.ln() - c * d;
    let (mut lo, mut hi) = (0.0_f64, BISECT_UPPER_M);
    if h(hi) >= target {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = if lo == 0.0 { hi / 2.0 } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Density `2ℓ/d_max²` of the distance from a receiver to a transmitter placed
/// uniformly in a circle sector of radius `dmax`.
pub fn link_length_density(ell: f64, dmax: f64) -> Result<f64> {
    if !(dmax > 0.0) {
        return Err(invalid("dmax", format!("{dmax} must be > 0")));
    }
    check_domain("link length", ell, 0.0, dmax)?;
    Ok(2.0 * ell / (dmax * dmax))
}

/// How the interference range is obtained for a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DmaxMode {
    /// Interference range fixed in meters.
    Fixed(f64),
    /// Interference range from the SINR equality at a reference link length.
    DerivedFromLength { link_length: f64 },
}

impl Default for DmaxMode {
    fn default() -> Self {
        DmaxMode::Fixed(15.0)
    }
}

/// Full parameter bundle shared by the analytic, Monte Carlo and simulation
/// engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Transmitter (link) density per m².
    pub tx_density: f64,
    /// Obstacle density per m².
    pub obstacle_density: f64,
    /// Slotted-ALOHA transmission probability.
    pub tx_prob: f64,
    /// Angular width (radians) over which blockage is fully correlated.
    pub coherence_angle: f64,
    /// Area of the region a TDMA scheduler serves, m².
    pub region_area: f64,
    pub antenna: AntennaPattern,
    pub channel: Channel,
    pub dmax_mode: DmaxMode,
}

impl Default for Scenario {
    /// θ = 20°, θ_c = 5°, d_max = 15 m, ρ_a = 1, λ_t = 1/9, λ_o = 0.11 and a
    /// 10×10 m² region.
    fn default() -> Self {
        Self {
            tx_density: 1.0 / 9.0,
            obstacle_density: 0.11,
            tx_prob: 1.0,
            coherence_angle: 5f64.to_radians(),
            region_area: 100.0,
            antenna: AntennaPattern {
                beamwidth: 20f64.to_radians(),
                side_lobe: 0.0,
            },
            channel: Channel::mmwave_60ghz(),
            dmax_mode: DmaxMode::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.antenna.validate()?;
        self.channel.validate()?;
        if !(self.tx_density.is_finite() && self.tx_density >= 0.0) {
            return Err(invalid(
                "tx_density",
                format!("{} must be >= 0", self.tx_density),
            ));
        }
        if !(self.obstacle_density.is_finite() && self.obstacle_density >= 0.0) {
            return Err(invalid(
                "obstacle_density",
                format!("{} must be >= 0", self.obstacle_density),
            ));
        }
        if !(0.0..=1.0).contains(&self.tx_prob) {
            return Err(invalid(
                "tx_prob",
                format!("{} not in [0, 1]", self.tx_prob),
            ));
        }
        let theta = self.antenna.beamwidth;
        if !(self.coherence_angle > 0.0 && self.coherence_angle <= theta * (1.0 + 1e-9)) {
            return Err(invalid(
                "coherence_angle",
                format!(
                    "{} rad not in (0, beamwidth = {theta}]",
                    self.coherence_angle
                ),
            ));
        }
        if !(self.region_area.is_finite() && self.region_area > 0.0) {
            return Err(invalid(
                "region_area",
                format!("{} must be > 0", self.region_area),
            ));
        }
        match self.dmax_mode {
            DmaxMode::Fixed(d) if !(d.is_finite() && d > 0.0) => {
                Err(invalid("dmax", format!("{d} must be > 0")))
            }
            DmaxMode::DerivedFromLength { link_length } if !(link_length > 0.0) => Err(invalid(
                "reference_link_length",
                format!("{link_length} must be > 0"),
            )),
            _ => Ok(()),
        }
    }

    /// Interference range implied by `dmax_mode`.
    pub fn dmax(&self) -> Result<f64> {
        match self.dmax_mode {
            DmaxMode::Fixed(d) => Ok(d),
            DmaxMode::DerivedFromLength { link_length } => {
                interference_range(link_length, &self.channel, &self.antenna)
            }
        }
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        Ok(DerivedParams {
            interferer_density: self.tx_prob * self.tx_density * self.antenna.beamwidth / TWO_PI,
            dmax: self.dmax()?,
            sector_count: sector_count(self.antenna.beamwidth, self.coherence_angle),
            coherence_angle: self.coherence_angle,
        })
    }
}

/// Number of coherence sectors `⌈θ/θ_c⌉`. A ratio within 1e-9 (relative) of an
/// integer counts as that integer, so 20°/5° gives 4 even when the radian
/// conversion leaves the quotient a hair above 4.
pub fn sector_count(beamwidth: f64, coherence_angle: f64) -> u32 {
    let ratio = beamwidth / coherence_angle;
    let nearest = ratio.round();
    let k = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    k.max(1.0) as u32
}

/// Quantities computed from a [`Scenario`] that every formula consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Density of active transmitters whose main lobe covers the receiver,
    /// `ρ_a λ_t θ / 2π`.
    pub interferer_density: f64,
    /// Interference range in meters.
    pub dmax: f64,
    /// Number of coherence sectors `k` inside the receiver's main lobe.
    pub sector_count: u32,
    pub coherence_angle: f64,
}

impl DerivedParams {
    /// Area `θ_c d²/2` of a coherence sector of radius `d`.
    pub fn sector_area_at(&self, d: f64) -> f64 {
        self.coherence_angle * d * d / 2.0
    }

    pub fn sector_area(&self) -> f64 {
        self.sector_area_at(self.dmax)
    }
}
