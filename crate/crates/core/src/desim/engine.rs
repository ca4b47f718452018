use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mac::{MacConfig, Protocol, Traffic};
use super::topology::{ConflictGraph, PlanarTopology};
use crate::error::{invalid, Result};

/// Event kinds in tie-break order at equal time and link id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Arrival,
    TxEnd,
    Tick,
    Slot,
}

/// Slot boundaries are owned by no link and sort after all link events.
const SLOT_OWNER: usize = usize::MAX;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkStats {
    pub delivered: u64,
    pub collided: u64,
    pub blocked: u64,
    /// Completed transmission attempts.
    pub attempts: u64,
    pub mean_delay_slots: Option<f64>,
    /// Failed attempts before each delivered packet.
    pub retransmissions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub per_link: Vec<LinkStats>,
    /// Simulated time in slots.
    pub slots: f64,
    /// Delivered packets per slot, summed over links.
    pub network_throughput: f64,
    /// Network throughput per m² of region.
    pub ase: f64,
    /// Enqueue-to-reception delay of every delivered packet, in slots.
    pub delay_samples: Vec<f64>,
}

impl SimStats {
    pub fn link_throughput(&self, link: usize) -> f64 {
        self.per_link[link].delivered as f64 / self.slots
    }

    /// Average per-link throughput in packets/slot; 0 for an empty network.
    pub fn mean_link_throughput(&self) -> f64 {
        if self.per_link.is_empty() {
            0.0
        } else {
            self.network_throughput / self.per_link.len() as f64
        }
    }

    pub fn mean_delay(&self) -> Option<f64> {
        if self.delay_samples.is_empty() {
            None
        } else {
            Some(self.delay_samples.iter().sum::<f64>() / self.delay_samples.len() as f64)
        }
    }
}

fn us_to_ns(us: f64) -> u64 {
    (us * 1e3).round() as u64
}

/// Runs the event-driven simulation for `duration_s` seconds.
pub fn run(
    topology: &PlanarTopology,
    mac: &MacConfig,
    duration_s: f64,
    seed: u64,
) -> Result<SimStats> {
    run_with_graph(
        topology,
        &ConflictGraph::new(topology),
        mac,
        duration_s,
        seed,
    )
}

/// As [`run`] with a precomputed conflict graph, so several MAC settings can
/// share one topology.
pub fn run_with_graph(
    topology: &PlanarTopology,
    graph: &ConflictGraph,
    mac: &MacConfig,
    duration_s: f64,
    seed: u64,
) -> Result<SimStats> {
    mac.validate()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(invalid("duration", format!("{duration_s} s must be > 0")));
    }
    let mut sim = Sim::new(topology, graph, mac, duration_s, seed);
    sim.execute();
    Ok(sim.finish())
}

#[derive(Default, Clone)]
struct LinkState {
    queue: VecDeque<u64>,
    /// Saturated traffic: time the current head-of-line packet became ready.
    hol_since: u64,
    hol_failures: u32,
    next_arrival_raw: f64,
    cw: u32,
    backoff: Option<u32>,
    contending: bool,
    need_difs: bool,
    transmitting: bool,
    tx_start: u64,
    tx_end: u64,
    failed: bool,
    delay_sum: f64,
    stats: LinkStats,
}

struct Sim<'a> {
    topo: &'a PlanarTopology,
    graph: &'a ConflictGraph,
    mac: MacConfig,
    rng: ChaCha8Rng,
    events: BinaryHeap<Reverse<(u64, usize, Kind)>>,
    links: Vec<LinkState>,
    slot_ns: u64,
    end_ns: u64,
    period_ns: f64,
    delays: Vec<f64>,
    active: Vec<bool>,
}

impl<'a> Sim<'a> {
    fn new(
        topo: &'a PlanarTopology,
        graph: &'a ConflictGraph,
        mac: &MacConfig,
        duration_s: f64,
        seed: u64,
    ) -> Self {
        let n = topo.links.len();
        let slot_ns = us_to_ns(mac.slot_us);
        let period_ns = match mac.traffic {
            Traffic::Cbr { bps } => mac.packet_bits() / bps * 1e9,
            Traffic::Saturated => f64::INFINITY,
        };
        let cw_min = match mac.protocol {
            Protocol::Csma { cw_min, .. } | Protocol::CsmaCa { cw_min, .. } => cw_min,
            _ => 1,
        };
        let mut sim = Self {
            topo,
            graph,
            mac: *mac,
            rng: ChaCha8Rng::seed_from_u64(seed),
            events: BinaryHeap::new(),
            links: vec![
                LinkState {
                    cw: cw_min,
                    ..LinkState::default()
                };
                n
            ],
            slot_ns,
            end_ns: (duration_s * 1e9).round() as u64,
            period_ns,
            delays: Vec::new(),
            active: vec![false; n],
        };
        sim.schedule_initial();
        sim
    }

    fn saturated(&self) -> bool {
        matches!(self.mac.traffic, Traffic::Saturated)
    }

    fn slotted(&self) -> bool {
        matches!(
            self.mac.protocol,
            Protocol::SlottedAloha { .. } | Protocol::Tdma
        )
    }

    fn push(&mut self, t: u64, link: usize, kind: Kind) {
        if t <= self.end_ns {
            self.events.push(Reverse((t, link, kind)));
        }
    }

    fn align(&self, raw_ns: f64) -> u64 {
        (raw_ns / self.slot_ns as f64).ceil() as u64 * self.slot_ns
    }

    fn schedule_initial(&mut self) {
        let n = self.links.len();
        if !self.saturated() {
            for i in 0..n {
                let phase = self.rng.random::<f64>() * self.period_ns;
                self.links[i].next_arrival_raw = phase;
                let t = self.align(phase);
                self.push(t, i, Kind::Arrival);
            }
        } else if !self.slotted() {
            for i in 0..n {
                self.become_ready(i, 0);
            }
        }
        if self.slotted() && n > 0 {
            self.push(0, SLOT_OWNER, Kind::Slot);
        }
    }

    fn has_packet(&self, i: usize) -> bool {
        self.saturated() || !self.links[i].queue.is_empty()
    }

    fn execute(&mut self) {
        while let Some(Reverse((t, link, kind))) = self.events.pop() {
            match kind {
                Kind::Arrival => self.on_arrival(link, t),
                Kind::Slot => self.on_slot(t),
                Kind::Tick => self.on_tick(link, t),
                Kind::TxEnd => self.on_tx_end(link, t),
            }
        }
    }

    fn on_arrival(&mut self, i: usize, t: u64) {
        let was_empty = self.links[i].queue.is_empty();
        self.links[i].queue.push_back(t);
        let raw = self.links[i].next_arrival_raw + self.period_ns;
        self.links[i].next_arrival_raw = raw;
        let next = self.align(raw);
        self.push(next, i, Kind::Arrival);
        if !self.slotted() && was_empty && !self.links[i].contending && !self.links[i].transmitting
        {
            self.become_ready(i, t);
        }
    }

    fn deliver(&mut self, i: usize, t_rx: u64) {
        let slot = self.slot_ns as f64;
        let saturated = self.saturated();
        let st = &mut self.links[i];
        let enq = if saturated {
            let e = st.hol_since;
            st.hol_since = t_rx;
            e
        } else {
            st.queue.pop_front().expect("delivered packet was queued")
        };
        let delay = (t_rx - enq) as f64 / slot;
        st.stats.delivered += 1;
        st.delay_sum += delay;
        st.stats.retransmissions.push(st.hol_failures);
        st.hol_failures = 0;
        self.delays.push(delay);
    }

    fn on_slot(&mut self, t: u64) {
        let t_end = t + self.slot_ns;
        if t_end > self.end_ns {
            return;
        }
        let n = self.links.len();
        match self.mac.protocol {
            Protocol::SlottedAloha { tx_prob } => {
                let mut txs = Vec::new();
                for i in 0..n {
                    if self.has_packet(i) && self.rng.random::<f64>() < tx_prob {
                        txs.push(i);
                        self.active[i] = true;
                    }
                }
                for &i in &txs {
                    self.links[i].stats.attempts += 1;
                    if !self.graph.los_ok[i] {
                        self.links[i].stats.blocked += 1;
                        self.links[i].hol_failures += 1;
                    } else if self.graph.interferers_of[i].iter().any(|&j| self.active[j]) {
                        self.links[i].stats.collided += 1;
                        self.links[i].hol_failures += 1;
                    } else {
                        self.deliver(i, t_end);
                    }
                }
                for &i in &txs {
                    self.active[i] = false;
                }
            }
            Protocol::Tdma => {
                let i = ((t / self.slot_ns) % n as u64) as usize;
                if self.has_packet(i) {
                    self.links[i].stats.attempts += 1;
                    if self.graph.los_ok[i] {
                        self.deliver(i, t_end);
                    } else {
                        self.links[i].stats.blocked += 1;
                        self.links[i].hol_failures += 1;
                    }
                }
            }
            _ => unreachable!("slot events only drive slotted protocols"),
        }
        self.push(t_end, SLOT_OWNER, Kind::Slot);
    }

    // ---- contention protocols ----

    fn cw_bounds(&self) -> (u32, u32) {
        match self.mac.protocol {
            Protocol::Csma { cw_min, cw_max } | Protocol::CsmaCa { cw_min, cw_max } => {
                (cw_min, cw_max)
            }
            _ => (1, 1),
        }
    }

    fn reserves(&self) -> bool {
        matches!(self.mac.protocol, Protocol::CsmaCa { .. })
    }

    fn draw_backoff(&mut self, cw: u32) -> u32 {
        self.rng.random_range(0..cw)
    }

    fn become_ready(&mut self, i: usize, t: u64) {
        let saturated = self.saturated();
        let st = &mut self.links[i];
        st.contending = true;
        st.backoff = None;
        st.need_difs = false;
        if saturated {
            st.hol_since = t;
        }
        let difs = us_to_ns(self.mac.difs_us);
        self.push(t + difs, i, Kind::Tick);
    }

    /// Sensed activity: transmissions that started strictly before `t` and
    /// have not ended.
    fn sensed(&self, j: usize, t: u64) -> bool {
        let s = &self.links[j];
        s.transmitting && s.tx_start < t && t < s.tx_end
    }

    fn overlapping(&self, j: usize, t: u64) -> bool {
        let s = &self.links[j];
        s.transmitting && s.tx_start <= t && t < s.tx_end
    }

    /// Idealized sensing: the channel is busy when a transmission that would
    /// collide at our receiver is in progress; with RTS/CTS also when ours
    /// would collide at a reserved receiver.
    fn clear(&self, i: usize, t: u64) -> bool {
        if self.graph.interferers_of[i]
            .iter()
            .any(|&j| self.sensed(j, t))
        {
            return false;
        }
        !(self.reserves() && self.graph.victims_of[i].iter().any(|&j| self.sensed(j, t)))
    }

    fn on_tick(&mut self, i: usize, t: u64) {
        if !self.links[i].contending {
            return;
        }
        let backoff_ns = us_to_ns(self.mac.backoff_slot_us);
        if !self.clear(i, t) {
            if self.links[i].backoff.is_none() {
                let cw = self.links[i].cw;
                self.links[i].backoff = Some(self.draw_backoff(cw));
            }
            self.links[i].need_difs = true;
            self.push(t + backoff_ns, i, Kind::Tick);
            return;
        }
        if self.links[i].need_difs {
            self.links[i].need_difs = false;
            self.push(t + us_to_ns(self.mac.difs_us), i, Kind::Tick);
            return;
        }
        match self.links[i].backoff {
            None | Some(0) => self.start_tx(i, t),
            Some(b) => {
                self.links[i].backoff = Some(b - 1);
                self.push(t + backoff_ns, i, Kind::Tick);
            }
        }
    }

    fn exchange_ns(&self, full: bool) -> u64 {
        let m = &self.mac;
        if !self.reserves() {
            return self.slot_ns;
        }
        let ctrl = m.control_airtime_us();
        let handshake = ctrl + m.sifs_us + ctrl;
        if !full {
            return us_to_ns(handshake);
        }
        let ack = if m.include_ack { m.sifs_us + ctrl } else { 0.0 };
        us_to_ns(handshake + m.sifs_us + ack) + self.slot_ns
    }

    fn start_tx(&mut self, i: usize, t: u64) {
        let mut failed = false;
        for k in 0..self.graph.interferers_of[i].len() {
            let j = self.graph.interferers_of[i][k];
            if self.overlapping(j, t) {
                failed = true;
            }
        }
        for k in 0..self.graph.victims_of[i].len() {
            let j = self.graph.victims_of[i][k];
            if self.overlapping(j, t) && !self.links[j].failed {
                self.links[j].failed = true;
                if self.reserves() {
                    // the handshake of j collided with ours and times out early
                    let end = self.links[j].tx_start + self.exchange_ns(false);
                    self.links[j].tx_end = end;
                    self.push(end, j, Kind::TxEnd);
                }
            }
        }
        let full = !failed && self.graph.los_ok[i];
        let end = t + self.exchange_ns(full);
        let st = &mut self.links[i];
        st.contending = false;
        st.transmitting = true;
        st.failed = failed;
        st.tx_start = t;
        st.tx_end = end;
        self.push(end, i, Kind::TxEnd);
    }

    fn on_tx_end(&mut self, i: usize, t: u64) {
        if !self.links[i].transmitting || self.links[i].tx_end != t {
            return;
        }
        let (cw_min, cw_max) = self.cw_bounds();
        let st = &mut self.links[i];
        st.transmitting = false;
        st.stats.attempts += 1;
        let failed = std::mem::take(&mut st.failed);
        let success = self.graph.los_ok[i] && !failed;
        if !self.graph.los_ok[i] {
            st.stats.blocked += 1;
        } else if failed {
            st.stats.collided += 1;
        }
        if success {
            self.deliver(i, t);
            self.links[i].cw = cw_min;
        } else {
            self.links[i].hol_failures += 1;
            self.links[i].cw = (self.links[i].cw * 2).min(cw_max);
        }
        if self.has_packet(i) {
            let cw = self.links[i].cw;
            let b = self.draw_backoff(cw);
            let st = &mut self.links[i];
            st.contending = true;
            st.need_difs = false;
            st.backoff = Some(b);
            self.push(t + us_to_ns(self.mac.difs_us), i, Kind::Tick);
        }
    }

    fn finish(self) -> SimStats {
        let slots = self.end_ns as f64 / self.slot_ns as f64;
        let per_link: Vec<LinkStats> = self
            .links
            .into_iter()
            .map(|mut s| {
                if s.stats.delivered > 0 {
                    s.stats.mean_delay_slots = Some(s.delay_sum / s.stats.delivered as f64);
                }
                s.stats
            })
            .collect();
        let delivered: u64 = per_link.iter().map(|s| s.delivered).sum();
        let network_throughput = delivered as f64 / slots;
        SimStats {
            per_link,
            slots,
            network_throughput,
            ase: network_throughput / self.topo.region.area(),
            delay_samples: self.delays,
        }
    }
}
