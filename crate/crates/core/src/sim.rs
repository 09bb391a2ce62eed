//! Super-frame simulation.
//!
//! Each frame runs the access period (nodes in `Ad` pay the access cost),
//! queries the channel once per node, asks the scheduler for slots, applies
//! deliveries, credits harvest and settles state changes. A node switches off
//! (`Nd`) when its payload is complete or its energy is below the death
//! threshold after the harvest; switched-off nodes keep harvesting but never
//! come back.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AnalyticChannelParams, ChannelSource, RssiPrrTable, RssiTrace};
use crate::energy::{
    apply_frame_energy, harvested_energy, EfficiencyTable, SolarSource, SolarTrace, WptParams,
};
use crate::error::{Error, Result};
use crate::model::{
    EnergyConstants, FrameStats, Kappa, NodeId, NodeState, ProtocolState, RunMetrics,
    DATA_PACKET_BYTES,
};
use crate::scalar::Scalar;
use crate::sched::{SchedulerInput, SchedulerKind};

pub const NOP_PAYLOAD_BYTES: u64 = 80_000;
pub const NAP_PAYLOAD_BYTES: u64 = 300_000;
pub const DEFAULT_MAX_FRAMES: u32 = 1_000_000;

/// Packets needed for `bytes` of payload.
pub fn payload_packets(bytes: u64) -> u32 {
    bytes.div_ceil(DATA_PACKET_BYTES as u64) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ScenarioKind {
    /// Every node present from the first frame.
    Nop,
    /// Nodes arrive with exponential inter-arrival times.
    Nap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceptionMode {
    /// Each slot delivers `prr` expected packets.
    #[default]
    Expected,
    /// Each slot delivers one packet with probability `prr`.
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ScenarioConfig<T> {
    pub kind: ScenarioKind,
    pub n: u32,
    /// Defaults to 80 KB for NOP and 300 KB for NAP.
    #[serde(default)]
    pub payload_bytes: Option<u64>,
    /// Mean inter-arrival time in frames; required for NAP.
    #[serde(default)]
    pub arrival_rate: Option<T>,
    #[serde(default = "default_max_frames")]
    pub max_frames: u32,
    #[serde(default)]
    pub reception_mode: ReceptionMode,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_max_frames() -> u32 {
    DEFAULT_MAX_FRAMES
}

impl<T: Scalar> ScenarioConfig<T> {
    pub fn nop(n: u32) -> Self {
        ScenarioConfig {
            kind: ScenarioKind::Nop,
            n,
            payload_bytes: None,
            arrival_rate: None,
            max_frames: DEFAULT_MAX_FRAMES,
            reception_mode: ReceptionMode::Expected,
            rng_seed: 0,
        }
    }

    pub fn payload_bytes(&self) -> u64 {
        self.payload_bytes.unwrap_or(match self.kind {
            ScenarioKind::Nop => NOP_PAYLOAD_BYTES,
            ScenarioKind::Nap => NAP_PAYLOAD_BYTES,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("scenario.n", "need at least one node"));
        }
        if self.payload_bytes() == 0 {
            return Err(Error::param("scenario.payload_bytes", "must be positive"));
        }
        if self.max_frames == 0 {
            return Err(Error::param("scenario.max_frames", "must be positive"));
        }
        match (self.kind, self.arrival_rate) {
            (ScenarioKind::Nap, None) => Err(Error::param(
                "scenario.arrival_rate",
                "required for the NAP scenario",
            )),
            (ScenarioKind::Nap, Some(r)) if !(r > T::zero() && r.is_finite()) => {
                Err(Error::param("scenario.arrival_rate", "must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Node-to-base-station distances for the analytic channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields, bound = "T: Scalar")]
pub enum DistanceSpec<T> {
    /// Drawn uniformly per node, metres.
    Uniform { min: T, max: T },
    /// One distance per node, metres; shorter lists repeat round-robin.
    List(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "mode",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound = "T: Scalar"
)]
pub enum ChannelConfig<T> {
    Analytic {
        #[serde(default)]
        params: AnalyticChannelParams<T>,
        distance: DistanceSpec<T>,
    },
    /// RSSI trace, converted through `table` (a generic reception cliff when
    /// absent).
    Trace {
        path: PathBuf,
        #[serde(default)]
        table: Option<Vec<(T, T)>>,
    },
    /// Same PRR for every node and frame.
    Constant { prr: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "mode",
    rename_all = "snake_case",
    deny_unknown_fields,
    bound = "T: Scalar"
)]
pub enum SolarConfig<T> {
    None,
    Diurnal {
        peak_w: T,
        day_s: T,
    },
    /// CSV of `node_id,frame,power_mw`.
    Trace {
        path: PathBuf,
    },
}

/// Charger placement used to read the efficiency factors from a measured
/// table instead of giving them directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct EfficiencyConfig<T> {
    pub path: PathBuf,
    pub distance_m: T,
    pub angle_deg: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct HarvestConfig<T> {
    #[serde(default = "default_p_tx_wpt")]
    pub p_tx_wpt: T,
    #[serde(default = "default_delta")]
    pub delta_d: T,
    #[serde(default = "default_delta")]
    pub delta_theta: T,
    #[serde(default)]
    pub efficiency: Option<EfficiencyConfig<T>>,
    /// Mean WPT channel power gain.
    #[serde(default = "T::one")]
    pub channel_gain_sq: T,
    /// Draw the gain per node and frame from an exponential distribution
    /// with mean `channel_gain_sq`.
    #[serde(default)]
    pub fading: bool,
    /// Seconds of WPT charging per frame; the frame length when absent.
    #[serde(default)]
    pub tau_wpt: Option<T>,
    #[serde(default = "solar_none")]
    pub solar: SolarConfig<T>,
    /// Seconds of solar charging per frame; the frame length when absent.
    #[serde(default)]
    pub tau_solar: Option<T>,
}

fn default_p_tx_wpt<T: Scalar>() -> T {
    T::lit(3.0)
}

fn default_delta<T: Scalar>() -> T {
    T::lit(0.5)
}

fn default_fifty<T: Scalar>() -> T {
    T::lit(50.0)
}

fn default_initial_std<T: Scalar>() -> T {
    T::lit(5.0)
}

fn solar_none<T>() -> SolarConfig<T> {
    SolarConfig::None
}

impl<T: Scalar> Default for HarvestConfig<T> {
    fn default() -> Self {
        HarvestConfig {
            p_tx_wpt: T::lit(3.0),
            delta_d: default_delta(),
            delta_theta: default_delta(),
            efficiency: None,
            channel_gain_sq: T::one(),
            fading: false,
            tau_wpt: None,
            solar: SolarConfig::None,
            tau_solar: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct EnergyConfig<T> {
    /// Battery capacity, J.
    #[serde(default = "default_fifty")]
    pub e_max: T,
    /// Initial energy is normal with this mean and deviation, J, redrawn
    /// until it lies in `[e_td, e_max]`.
    #[serde(default = "default_fifty")]
    pub initial_mean: T,
    #[serde(default = "default_initial_std")]
    pub initial_std: T,
    #[serde(default = "EnergyConstants::cc2420")]
    pub constants: EnergyConstants<T>,
}

impl<T: Scalar> Default for EnergyConfig<T> {
    fn default() -> Self {
        EnergyConfig {
            e_max: T::lit(50.0),
            initial_mean: T::lit(50.0),
            initial_std: T::lit(5.0),
            constants: EnergyConstants::cc2420(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct SimConfig<T> {
    pub scenario: ScenarioConfig<T>,
    pub kappa: T,
    #[serde(default = "default_slots")]
    pub slots: usize,
    /// Wall-clock length of one super frame, s.
    #[serde(default = "default_frame_seconds")]
    pub frame_seconds: T,
    #[serde(default)]
    pub energy: EnergyConfig<T>,
    pub channel: ChannelConfig<T>,
    #[serde(default)]
    pub harvest: HarvestConfig<T>,
}

fn default_slots() -> usize {
    100
}

fn default_frame_seconds<T: Scalar>() -> T {
    T::lit(0.1)
}

impl<T: Scalar> SimConfig<T> {
    /// NOP scenario with every default and the given channel.
    pub fn new(n: u32, kappa: T, channel: ChannelConfig<T>) -> Self {
        SimConfig {
            scenario: ScenarioConfig::nop(n),
            kappa,
            slots: default_slots(),
            frame_seconds: default_frame_seconds(),
            energy: EnergyConfig::default(),
            channel,
            harvest: HarvestConfig::default(),
        }
    }

    /// Fills every optional value with its default so the record shows what
    /// actually ran.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.scenario.payload_bytes = Some(self.scenario.payload_bytes());
        c.harvest.tau_wpt = Some(self.harvest.tau_wpt.unwrap_or(self.frame_seconds));
        c.harvest.tau_solar = Some(self.harvest.tau_solar.unwrap_or(self.frame_seconds));
        if let ChannelConfig::Trace { table, .. } = &mut c.channel {
            if table.is_none() {
                *table = Some(RssiPrrTable::default_cliff().points().to_vec());
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        Kappa::allowing_zero(self.kappa).map_err(|_| {
            Error::param("kappa", format!("must lie in [0, 1], got {}", self.kappa))
        })?;
        if self.slots == 0 {
            return Err(Error::param("slots", "must be positive"));
        }
        if !(self.frame_seconds > T::zero()) {
            return Err(Error::param("frame_seconds", "must be positive"));
        }
        let e = &self.energy;
        e.constants.validate()?;
        if !(e.e_max >= e.constants.e_td) {
            return Err(Error::param("energy.e_max", "must be at least e_td"));
        }
        if !(e.initial_std >= T::zero()) {
            return Err(Error::param("energy.initial_std", "must be non-negative"));
        }
        match &self.channel {
            ChannelConfig::Analytic { params, distance } => {
                params.validate()?;
                match distance {
                    DistanceSpec::Uniform { min, max } => {
                        if !(*min > T::zero() && max >= min) {
                            return Err(Error::param("channel.distance", "need 0 < min <= max"));
                        }
                    }
                    DistanceSpec::List(d) => {
                        if d.is_empty() || d.iter().any(|x| !(*x > T::zero())) {
                            return Err(Error::param(
                                "channel.distance",
                                "need at least one positive distance",
                            ));
                        }
                    }
                }
            }
            ChannelConfig::Trace { table, .. } => {
                if let Some(points) = table {
                    RssiPrrTable::new(points.clone())?;
                }
            }
            ChannelConfig::Constant { prr } => {
                if !(*prr >= T::zero() && *prr <= T::one()) {
                    return Err(Error::param("channel.prr", "must lie in [0, 1]"));
                }
            }
        }
        let h = &self.harvest;
        self.wpt_params(h.delta_d, h.delta_theta, h.channel_gain_sq)
            .validate()?;
        for (name, v) in [
            ("harvest.tau_wpt", h.tau_wpt),
            ("harvest.tau_solar", h.tau_solar),
        ] {
            if matches!(v, Some(t) if !(t >= T::zero())) {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        if let SolarConfig::Diurnal { peak_w, day_s } = h.solar {
            if !(peak_w >= T::zero() && day_s > T::zero()) {
                return Err(Error::param(
                    "harvest.solar",
                    "need peak_w >= 0 and day_s > 0",
                ));
            }
        }
        Ok(())
    }

    fn wpt_params(&self, delta_d: T, delta_theta: T, gain: T) -> WptParams<T> {
        WptParams {
            p_tx_wpt: self.harvest.p_tx_wpt,
            delta_d,
            delta_theta,
            channel_gain_sq: gain,
            tau_wpt: self.harvest.tau_wpt.unwrap_or(self.frame_seconds),
        }
    }
}

/// Data files a configuration refers to, already parsed.
#[derive(Debug, Clone, Default)]
pub struct Inputs<T> {
    pub rssi: Option<RssiTrace<T>>,
    pub solar: Option<SolarTrace<T>>,
    pub efficiency: Option<EfficiencyTable<T>>,
}

impl<T> Inputs<T> {
    pub fn none() -> Self {
        Inputs {
            rssi: None,
            solar: None,
            efficiency: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Arrived,
    Transition {
        from: ProtocolState,
        to: ProtocolState,
    },
    Fair,
    Finished,
    Died,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub frame: u32,
    pub node: NodeId,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunRecord<T> {
    pub config: SimConfig<T>,
    pub scheduler: SchedulerKind,
    pub frames: u32,
    /// The run hit `max_frames` before every node switched off.
    pub truncated: bool,
    pub metrics: RunMetrics<T>,
    pub events: Vec<Event>,
    /// Final state of every node.
    pub nodes: Vec<NodeState<T>>,
}

impl<T: Scalar> RunRecord<T> {
    pub fn count_events(&self, pred: impl Fn(&EventKind) -> bool) -> usize {
        self.events.iter().filter(|e| pred(&e.kind)).count()
    }
}

/// Mutable state of one run.
pub struct World<T: Scalar> {
    config: SimConfig<T>,
    kappa: Kappa<T>,
    channel: ChannelSource<T>,
    solar: SolarSource<T>,
    delta: (T, T),
    nodes: Vec<NodeState<T>>,
    frame: u32,
    rng: ChaCha8Rng,
    harvested_total: T,
    metrics: RunMetrics<T>,
    events: Vec<Event>,
}

impl<T: Scalar> World<T> {
    pub fn new(config: &SimConfig<T>, inputs: &Inputs<T>) -> Result<Self> {
        config.validate()?;
        let config = config.resolved();
        let n = config.scenario.n as usize;
        let mut init = ChaCha8Rng::seed_from_u64(config.scenario.rng_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(config.scenario.rng_seed);
        rng.set_stream(1);

        let channel = match &config.channel {
            ChannelConfig::Analytic { params, distance } => {
                let distances = match distance {
                    DistanceSpec::Uniform { min, max } => {
                        let (lo, hi) = (min.to_f64_lossy(), max.to_f64_lossy());
                        (0..n)
                            .map(|_| {
                                if hi > lo {
                                    T::lit(init.random_range(lo..=hi))
                                } else {
                                    *min
                                }
                            })
                            .collect()
                    }
                    DistanceSpec::List(d) => (0..n).map(|i| d[i % d.len()]).collect(),
                };
                ChannelSource::Analytic {
                    params: *params,
                    distances,
                }
            }
            ChannelConfig::Trace { path, table } => {
                let trace = inputs.rssi.as_ref().ok_or_else(|| {
                    Error::Config(format!("RSSI trace {} was not loaded", path.display()))
                })?;
                let table = RssiPrrTable::new(table.clone().expect("resolved config has a table"))?;
                ChannelSource::trace(trace, table)?
            }
            ChannelConfig::Constant { prr } => ChannelSource::Tabulated(vec![vec![*prr]; n]),
        };

        let solar = match &config.harvest.solar {
            SolarConfig::None => SolarSource::None,
            SolarConfig::Diurnal { peak_w, day_s } => SolarSource::Diurnal {
                peak_w: *peak_w,
                day_s: *day_s,
                frame_s: config.frame_seconds,
            },
            SolarConfig::Trace { path } => {
                let trace = inputs.solar.as_ref().ok_or_else(|| {
                    Error::Config(format!("solar trace {} was not loaded", path.display()))
                })?;
                SolarSource::from_trace(trace)?
            }
        };

        let delta = match &config.harvest.efficiency {
            None => (config.harvest.delta_d, config.harvest.delta_theta),
            Some(eff) => {
                let table = inputs.efficiency.as_ref().ok_or_else(|| {
                    Error::Config(format!(
                        "efficiency table {} was not loaded",
                        eff.path.display()
                    ))
                })?;
                table.efficiency(eff.distance_m, eff.angle_deg)?
            }
        };

        let payload = payload_packets(config.scenario.payload_bytes());
        let arrivals = arrival_frames(&config.scenario, &mut init)?;
        let energies = initial_energies(&config.energy, n, &mut init)?;
        let nodes = (0..n)
            .map(|i| NodeState::new(NodeId::from_index(i), payload, energies[i], arrivals[i]))
            .collect();

        Ok(World {
            kappa: Kappa::allowing_zero(config.kappa)?,
            channel,
            solar,
            delta,
            nodes,
            frame: 0,
            rng,
            harvested_total: T::zero(),
            metrics: RunMetrics {
                total_received: T::zero(),
                fair_nodes: 0,
                dead_nodes: 0,
                per_frame: Vec::new(),
            },
            events: Vec::new(),
            config,
        })
    }

    pub fn nodes(&self) -> &[NodeState<T>] {
        &self.nodes
    }

    pub fn frame(&self) -> u32 {
        self.frame
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.config
    }

    /// Every node has arrived and switched off.
    pub fn is_done(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.has_arrived(self.frame) && n.protocol_state == ProtocolState::Nd)
    }

    /// Advances one super frame.
    pub fn step(&mut self, scheduler: SchedulerKind) -> Result<FrameStats<T>> {
        self.frame += 1;
        let f = self.frame;
        let c = self.config.energy.constants;
        let e_max = Some(self.config.energy.e_max);

        for node in self.nodes.iter_mut() {
            node.rcap_participant = false;
            if node.arrival_frame == f {
                self.events.push(Event {
                    frame: f,
                    node: node.id,
                    kind: EventKind::Arrived,
                });
            }
            if !node.is_live(f) {
                continue;
            }
            if node.protocol_state == ProtocolState::Ad {
                *node = apply_frame_energy(node, true, 0, T::zero(), &c, e_max);
                node.rcap_participant = true;
            }
            node.prr = self.channel.prr(node.id, f)?;
        }

        let decision = scheduler.decide(&SchedulerInput {
            frame_index: f,
            nodes: &self.nodes,
            slots: self.config.slots,
            kappa: self.kappa,
            constants: &c,
        });
        let counts = decision.schedule.counts(self.nodes.len());

        let mode = self.config.scenario.reception_mode;
        let mut gamma = T::zero();
        let (delta_d, delta_theta) = self.delta;
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if !node.has_arrived(f) {
                continue;
            }
            let before = node.delivered;
            let cap = T::from_count(u64::from(node.payload_total));
            for _ in 0..counts[i] {
                match mode {
                    ReceptionMode::Expected => node.delivered = node.delivered + node.prr,
                    ReceptionMode::Bernoulli => {
                        let p = node.prr.to_f64_lossy().clamp(0.0, 1.0);
                        if self.rng.random_bool(p) && node.delivered < cap {
                            node.delivered = node.delivered + T::one();
                        }
                    }
                }
            }
            gamma = gamma + (node.delivered - before);

            let mut gain = self.config.harvest.channel_gain_sq;
            if self.config.harvest.fading {
                let draw: f64 = Exp1.sample(&mut self.rng);
                gain = gain * T::lit(draw);
            }
            let wpt = self.config.wpt_params(delta_d, delta_theta, gain);
            let tau_solar = self
                .config
                .harvest
                .tau_solar
                .unwrap_or(self.config.frame_seconds);
            let harvest = harvested_energy(&wpt, self.solar.power_w(node.id, f), tau_solar);
            *node = apply_frame_energy(node, false, counts[i], harvest, &c, e_max);
            self.harvested_total = self.harvested_total + harvest;
        }

        for (id, next) in &decision.transitions {
            let node = &mut self.nodes[id.index()];
            if *next == ProtocolState::Nd || node.protocol_state == ProtocolState::Nd {
                continue;
            }
            if node.protocol_state != *next {
                self.events.push(Event {
                    frame: f,
                    node: node.id,
                    kind: EventKind::Transition {
                        from: node.protocol_state,
                        to: *next,
                    },
                });
                node.set_state(*next);
            }
        }

        for node in self.nodes.iter_mut() {
            if !node.is_live(f) {
                continue;
            }
            if node.fair_frame.is_none() && node.is_fair(self.kappa) {
                node.fair_frame = Some(f);
                self.events.push(Event {
                    frame: f,
                    node: node.id,
                    kind: EventKind::Fair,
                });
            }
            let off = if node.is_dead(&c) {
                node.died_frame = Some(f);
                Some(EventKind::Died)
            } else if node.is_payload_complete(node.prr) {
                node.finished_frame = Some(f);
                Some(EventKind::Finished)
            } else {
                None
            };
            if let Some(kind) = off {
                self.events.push(Event {
                    frame: f,
                    node: node.id,
                    kind: EventKind::Transition {
                        from: node.protocol_state,
                        to: ProtocolState::Nd,
                    },
                });
                self.events.push(Event {
                    frame: f,
                    node: node.id,
                    kind,
                });
                node.set_state(ProtocolState::Nd);
            }
        }

        let stats = FrameStats {
            frame: f,
            gamma,
            harvested_cumulative: self.harvested_total,
            live_nodes: self.nodes.iter().filter(|n| n.is_live(f)).count() as u32,
            fair_nodes: self.nodes.iter().filter(|n| n.fair_frame.is_some()).count() as u32,
            dead_nodes: self.nodes.iter().filter(|n| n.died_frame.is_some()).count() as u32,
        };
        self.metrics.total_received = self.metrics.total_received + gamma;
        self.metrics.fair_nodes = stats.fair_nodes;
        self.metrics.dead_nodes = stats.dead_nodes;
        self.metrics.per_frame.push(stats.clone());
        Ok(stats)
    }

    pub fn into_record(self, scheduler: SchedulerKind) -> RunRecord<T> {
        let truncated = !self.is_done();
        RunRecord {
            scheduler,
            frames: self.frame,
            truncated,
            metrics: self.metrics,
            events: self.events,
            nodes: self.nodes,
            config: self.config,
        }
    }
}

fn arrival_frames<T: Scalar>(s: &ScenarioConfig<T>, rng: &mut ChaCha8Rng) -> Result<Vec<u32>> {
    let n = s.n as usize;
    match s.kind {
        ScenarioKind::Nop => Ok(vec![1; n]),
        ScenarioKind::Nap => {
            let mean = s.arrival_rate.expect("validated").to_f64_lossy();
            let exp = Exp::new(1.0 / mean)
                .map_err(|e| Error::param("scenario.arrival_rate", e.to_string()))?;
            let mut t = 0.0;
            Ok((0..n)
                .map(|_| {
                    t += exp.sample(rng);
                    (1.0 + t.floor()).min(f64::from(u32::MAX)) as u32
                })
                .collect())
        }
    }
}

fn initial_energies<T: Scalar>(
    e: &EnergyConfig<T>,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<T>> {
    let lo = e.constants.e_td.to_f64_lossy();
    let hi = e.e_max.to_f64_lossy();
    let normal = Normal::new(e.initial_mean.to_f64_lossy(), e.initial_std.to_f64_lossy())
        .map_err(|err| Error::param("energy.initial_std", err.to_string()))?;
    Ok((0..n)
        .map(|_| {
            for _ in 0..1000 {
                let x = normal.sample(rng);
                if (lo..=hi).contains(&x) {
                    return T::lit(x);
                }
            }
            T::lit(e.initial_mean.to_f64_lossy().clamp(lo, hi))
        })
        .collect())
}

/// Runs until every node has switched off or `max_frames` is reached.
pub fn run<T: Scalar>(
    config: &SimConfig<T>,
    inputs: &Inputs<T>,
    scheduler: SchedulerKind,
) -> Result<RunRecord<T>> {
    let mut world = World::new(config, inputs)?;
    let max_frames = world.config().scenario.max_frames;
    while !world.is_done() && world.frame() < max_frames {
        world.step(scheduler)?;
    }
    Ok(world.into_record(scheduler))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Kappa,
    N,
    DeltaD,
    DeltaTheta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Kappa => "kappa",
            SweepAxis::N => "n",
            SweepAxis::DeltaD => "delta_d",
            SweepAxis::DeltaTheta => "delta_theta",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply<T: Scalar>(self, base: &SimConfig<T>, value: T) -> Result<SimConfig<T>> {
        let mut c = base.clone();
        match self {
            SweepAxis::Kappa => c.kappa = value,
            SweepAxis::N => {
                let n = value.to_f64_lossy();
                if !(n >= 1.0 && n.fract() == 0.0 && n <= f64::from(u32::MAX)) {
                    return Err(Error::param("n", format!("not a node count: {value}")));
                }
                c.scenario.n = n as u32;
            }
            SweepAxis::DeltaD => c.harvest.delta_d = value,
            SweepAxis::DeltaTheta => c.harvest.delta_theta = value,
        }
        Ok(c)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa" => Ok(SweepAxis::Kappa),
            "n" => Ok(SweepAxis::N),
            "delta_d" => Ok(SweepAxis::DeltaD),
            "delta_theta" => Ok(SweepAxis::DeltaTheta),
            other => Err(Error::param(
                "axis",
                format!("unknown axis `{other}` (expected kappa, n, delta_d or delta_theta)"),
            )),
        }
    }
}

/// One run per value, in parallel, returned in input order.
pub fn sweep<T: Scalar>(
    base: &SimConfig<T>,
    inputs: &Inputs<T>,
    scheduler: SchedulerKind,
    axis: SweepAxis,
    values: &[T],
) -> Result<Vec<RunRecord<T>>> {
    if values.is_empty() {
        return Err(Error::param("values", "sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .map(|v| axis.apply(base, *v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .map(|c| run(c, inputs, scheduler))
        .collect()
}
