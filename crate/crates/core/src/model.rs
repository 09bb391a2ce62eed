//! Domain types shared by the channel, energy, scheduling and simulation layers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Bytes of application data carried by one data packet.
pub const DATA_PACKET_BYTES: u32 = 32;
/// Length of Hello, HACK and SACK control packets.
pub const CONTROL_PACKET_BYTES: u32 = 10;

/// 1-based node index, stable for the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node protocol state.
///
/// * `Ad`: competes in the random access period and may receive data slots.
/// * `Na`: fair already; sits out the access period while others catch up.
/// * `Nd`: radio off for the rest of the run (payload done or energy exhausted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProtocolState {
    Ad,
    Na,
    Nd,
}

impl ProtocolState {
    /// Whether `self -> next` is a legal transition.
    pub fn can_transition_to(self, next: ProtocolState) -> bool {
        use ProtocolState::*;
        matches!(
            (self, next),
            (Ad, Na) | (Na, Ad) | (Ad, Nd) | (Na, Nd) | (Ad, Ad) | (Na, Na) | (Nd, Nd)
        )
    }
}

impl fmt::Display for ProtocolState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProtocolState::Ad => "AD",
            ProtocolState::Na => "NA",
            ProtocolState::Nd => "ND",
        };
        f.write_str(s)
    }
}

/// Per-packet and per-access energy costs of the node radio, in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConstants<T> {
    pub e_tx_hello: T,
    pub e_rx_hack: T,
    pub e_rx_sack: T,
    /// Energy of one data packet transmission.
    pub e_tx: T,
    /// Death threshold: below this residual energy the node powers down.
    pub e_td: T,
    pub v_cc: T,
    pub i_tx: T,
    pub i_rx: T,
    /// Radio bit rate, bits per second.
    pub r_b: T,
}

impl<T: Field> EnergyConstants<T> {
    /// CC2420 at 3 V, 35 mA transmit, 15 mA receive, with the rounded
    /// per-packet costs (0.03 / 0.01 / 0.01 / 0.1 mJ) and a 1.67 mJ floor.
    pub fn cc2420() -> Self {
        EnergyConstants {
            e_tx_hello: T::lit(0.03e-3),
            e_rx_hack: T::lit(0.01e-3),
            e_rx_sack: T::lit(0.01e-3),
            e_tx: T::lit(0.1e-3),
            e_td: T::lit(1.67e-3),
            v_cc: T::lit(3.0),
            i_tx: T::lit(0.035),
            i_rx: T::lit(0.015),
            r_b: T::lit(250_000.0),
        }
    }

    /// Same radio, with every per-packet cost derived from voltage, current
    /// and bit rate instead of the rounded values.
    pub fn cc2420_derived() -> Result<Self> {
        let base = Self::cc2420();
        let ctrl = u64::from(CONTROL_PACKET_BYTES * 8);
        let data = u64::from(DATA_PACKET_BYTES * 8);
        Ok(EnergyConstants {
            e_tx_hello: packet_energy(base.v_cc, base.i_tx, ctrl, base.r_b)?,
            e_rx_hack: packet_energy(base.v_cc, base.i_rx, ctrl, base.r_b)?,
            e_rx_sack: packet_energy(base.v_cc, base.i_rx, ctrl, base.r_b)?,
            e_tx: packet_energy(base.v_cc, base.i_tx, data, base.r_b)?,
            ..base
        })
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let fields = [
            ("e_tx_hello", self.e_tx_hello),
            ("e_rx_hack", self.e_rx_hack),
            ("e_rx_sack", self.e_rx_sack),
            ("e_tx", self.e_tx),
            ("e_td", self.e_td),
            ("v_cc", self.v_cc),
            ("i_tx", self.i_tx),
            ("i_rx", self.i_rx),
            ("r_b", self.r_b),
        ];
        for (name, v) in fields {
            if !(v > zero) {
                return Err(Error::param(name, format!("must be positive, got {v:?}")));
            }
        }
        Ok(())
    }

    /// Energy a node spends in one random access period.
    pub fn rcap_cost(&self) -> T {
        rcap_cost(self)
    }
}

/// Energy spent in the random access period: one Hello sent, one HACK and
/// one SACK received.
pub fn rcap_cost<T: Field>(constants: &EnergyConstants<T>) -> T {
    constants.e_tx_hello + constants.e_rx_hack + constants.e_rx_sack
}

/// Energy to move `bits` through a radio drawing `current` at `v_cc`.
pub fn packet_energy<T: Field>(v_cc: T, current: T, bits: u64, r_b: T) -> Result<T> {
    if !(r_b > T::zero()) {
        return Err(Error::param("r_b", "bit rate must be positive"));
    }
    Ok(v_cc * current * T::from_count(bits) / r_b)
}

/// Fairness coefficient, the fraction of each payload that must be delivered.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Kappa<T>(T);

impl<T: Field> Kappa<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > T::zero() && value <= T::one() {
            Ok(Kappa(value))
        } else {
            Err(Error::param(
                "kappa",
                format!("must lie in (0, 1], got {value:?}"),
            ))
        }
    }

    /// Accepts κ = 0 as well, which removes the fairness coupling. Only the
    /// exact solver uses this; run configurations require κ > 0.
    pub fn allowing_zero(value: T) -> Result<Self> {
        if value >= T::zero() && value <= T::one() {
            Ok(Kappa(value))
        } else {
            Err(Error::param(
                "kappa",
                format!("must lie in [0, 1], got {value:?}"),
            ))
        }
    }

    pub fn get(self) -> T {
        self.0
    }

    /// Packets node needs before it counts as fair.
    pub fn threshold(self, payload: u32) -> T {
        self.0 * T::from_count(u64::from(payload))
    }

    pub fn is_fair(self, delivered: T, payload: u32) -> bool {
        delivered + T::tolerance() >= self.threshold(payload)
    }
}

/// State of one sensor node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState<T> {
    pub id: NodeId,
    /// Payload in data packets.
    pub payload_total: u32,
    /// Expected packets received by the base station so far.
    pub delivered: T,
    pub energy: T,
    pub energy_initial: T,
    /// Packet reception rate for the current frame.
    pub prr: T,
    pub protocol_state: ProtocolState,
    pub rcap_participant: bool,
    pub arrival_frame: u32,
    /// Energy ledger.
    pub packets_sent: u64,
    pub rcap_frames: u64,
    pub harvested: T,
    /// Number of updates where energy hit the battery cap or the zero floor.
    pub clamp_events: u32,
    pub fair_frame: Option<u32>,
    pub finished_frame: Option<u32>,
    pub died_frame: Option<u32>,
}

impl<T: Field> NodeState<T> {
    pub fn new(id: NodeId, payload_total: u32, energy: T, arrival_frame: u32) -> Self {
        NodeState {
            id,
            payload_total,
            delivered: T::zero(),
            energy,
            energy_initial: energy,
            prr: T::zero(),
            protocol_state: ProtocolState::Ad,
            rcap_participant: false,
            arrival_frame,
            packets_sent: 0,
            rcap_frames: 0,
            harvested: T::zero(),
            clamp_events: 0,
            fair_frame: None,
            finished_frame: None,
            died_frame: None,
        }
    }

    pub fn has_arrived(&self, frame: u32) -> bool {
        self.arrival_frame <= frame
    }

    /// Arrived and not yet switched off.
    pub fn is_live(&self, frame: u32) -> bool {
        self.has_arrived(frame) && self.protocol_state != ProtocolState::Nd
    }

    pub fn remaining(&self) -> T {
        T::from_count(u64::from(self.payload_total)) - self.delivered
    }

    pub fn is_fair(&self, kappa: Kappa<T>) -> bool {
        kappa.is_fair(self.delivered, self.payload_total)
    }

    /// No further packet fits into the payload at reception rate `prr`.
    pub fn is_payload_complete(&self, prr: T) -> bool {
        let remaining = self.remaining();
        remaining <= T::tolerance() || (prr > T::zero() && remaining + T::tolerance() < prr)
    }

    pub fn is_dead(&self, constants: &EnergyConstants<T>) -> bool {
        self.energy < constants.e_td
    }

    /// Moves to `next`, enforcing the allowed transitions.
    pub fn set_state(&mut self, next: ProtocolState) {
        debug_assert!(
            self.protocol_state.can_transition_to(next),
            "illegal transition {} -> {} for node {}",
            self.protocol_state,
            next,
            self.id
        );
        self.protocol_state = next;
        if next != ProtocolState::Ad {
            self.rcap_participant = false;
        }
    }
}

/// Slot assignment of one super frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSchedule {
    pub frame_index: u32,
    pub slots: Vec<Option<NodeId>>,
}

impl FrameSchedule {
    pub fn empty(frame_index: u32, slots: usize) -> Self {
        FrameSchedule {
            frame_index,
            slots: vec![None; slots],
        }
    }

    pub fn slots_for(&self, node: NodeId) -> usize {
        self.slots.iter().filter(|s| **s == Some(node)).count()
    }

    pub fn used(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    /// Nodes in the order they first appear.
    pub fn service_order(&self) -> Vec<NodeId> {
        let mut order = Vec::new();
        for id in self.slots.iter().flatten() {
            if !order.contains(id) {
                order.push(*id);
            }
        }
        order
    }

    /// Slot count per node, indexed by `NodeId::index`.
    pub fn counts(&self, n: usize) -> Vec<u32> {
        let mut counts = vec![0; n];
        for id in self.slots.iter().flatten() {
            counts[id.index()] += 1;
        }
        counts
    }
}

/// One row of the per-frame metric series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameStats<T> {
    pub frame: u32,
    pub gamma: T,
    pub harvested_cumulative: T,
    pub live_nodes: u32,
    pub fair_nodes: u32,
    pub dead_nodes: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics<T> {
    pub total_received: T,
    pub fair_nodes: u32,
    pub dead_nodes: u32,
    pub per_frame: Vec<FrameStats<T>>,
}

impl<T: Field> RunMetrics<T> {
    pub fn gamma_sum(&self) -> T {
        self.per_frame
            .iter()
            .fold(T::zero(), |acc, row| acc + row.gamma)
    }
}
