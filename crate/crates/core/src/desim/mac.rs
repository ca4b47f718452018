use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    SlottedAloha { tx_prob: f64 },
    Tdma,
    Csma { cw_min: u32, cw_max: u32 },
    CsmaCa { cw_min: u32, cw_max: u32 },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::SlottedAloha { .. } => "slotted_aloha",
            Protocol::Tdma => "tdma",
            Protocol::Csma { .. } => "csma",
            Protocol::CsmaCa { .. } => "csma_ca",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Traffic {
    /// Constant-bit-rate arrivals into an unbounded queue.
    Cbr { bps: f64 },
    /// Every link always has a packet waiting.
    Saturated,
}

/// MAC and PHY timing. Durations are in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MacConfig {
    pub protocol: Protocol,
    pub slot_us: f64,
    pub packet_bytes: u32,
    pub data_rate_bps: f64,
    pub control_rate_bps: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub control_frame_bytes: u32,
    pub traffic: Traffic,
    pub include_ack: bool,
    /// Contention backoff unit for CSMA and CSMA/CA.
    pub backoff_slot_us: f64,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            protocol: Protocol::SlottedAloha { tx_prob: 1.0 },
            slot_us: 50.0,
            packet_bytes: 10_000,
            data_rate_bps: 1.5e9,
            control_rate_bps: 27.7e6,
            sifs_us: 2.5,
            difs_us: 5.5,
            control_frame_bytes: 30,
            traffic: Traffic::Cbr { bps: 384e6 },
            include_ack: false,
            backoff_slot_us: 5.0,
        }
    }
}

/// A data packet occupies exactly one slot; its nominal airtime may exceed the
/// slot by at most this factor.
const AIRTIME_SLACK: f64 = 1.1;

impl MacConfig {
    pub fn with_protocol(protocol: Protocol) -> Self {
        Self {
            protocol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("slot_us", self.slot_us),
            ("data_rate_bps", self.data_rate_bps),
            ("control_rate_bps", self.control_rate_bps),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("backoff_slot_us", self.backoff_slot_us),
            ("packet_bytes", self.packet_bytes as f64),
            ("control_frame_bytes", self.control_frame_bytes as f64),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{name} = {v} must be finite and > 0"
                )));
            }
        }
        match self.protocol {
            Protocol::SlottedAloha { tx_prob } if !(0.0..=1.0).contains(&tx_prob) => {
                return Err(Error::Config(format!("tx_prob = {tx_prob} not in [0, 1]")))
            }
            Protocol::Csma { cw_min, cw_max } | Protocol::CsmaCa { cw_min, cw_max }
                if cw_min == 0 || cw_max < cw_min =>
            {
                return Err(Error::Config(format!(
                    "contention window [{cw_min}, {cw_max}] needs 1 <= cw_min <= cw_max"
                )))
            }
            _ => {}
        }
        if let Traffic::Cbr { bps } = self.traffic {
            if !(bps.is_finite() && bps > 0.0) {
                return Err(Error::Config(format!("cbr rate {bps} must be > 0")));
            }
        }
        let airtime = self.data_airtime_us();
        if airtime > AIRTIME_SLACK * self.slot_us {
            return Err(Error::Config(format!(
                "packet airtime {airtime:.2} us does not fit the {} us slot",
                self.slot_us
            )));
        }
        Ok(())
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_bytes as f64 * 8.0
    }

    pub fn data_airtime_us(&self) -> f64 {
        self.packet_bits() / self.data_rate_bps * 1e6
    }

    pub fn control_airtime_us(&self) -> f64 {
        self.control_frame_bytes as f64 * 8.0 / self.control_rate_bps * 1e6
    }

    /// Offered load in packets per slot, `None` when saturated.
    pub fn offered_load(&self) -> Option<f64> {
        match self.traffic {
            Traffic::Cbr { bps } => Some(bps / self.packet_bits() * self.slot_us * 1e-6),
            Traffic::Saturated => None,
        }
    }
}

/// Channel reservation overhead of one RTS/CTS exchange:
/// DIFS + RTS + SIFS + CTS + SIFS, plus SIFS + ACK when acknowledgements are
/// enabled.
pub fn csma_ca_cycle_us(mac: &MacConfig) -> f64 {
    let ctrl = mac.control_airtime_us();
    let base = mac.difs_us + 2.0 * ctrl + 2.0 * mac.sifs_us;
    if mac.include_ack {
        base + mac.sifs_us + ctrl
    } else {
        base
    }
}

/// Fraction of channel time carrying data when every packet of
/// `data_airtime_us` pays the CSMA/CA reservation overhead.
pub fn utilization(mac: &MacConfig, data_airtime_us: f64) -> f64 {
    data_airtime_us / (data_airtime_us + csma_ca_cycle_us(mac))
}
