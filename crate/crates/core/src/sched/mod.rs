//! Per-frame slot schedulers.
//!
//! Every scheduler sees the same frame-start snapshot: node energies already
//! net of this frame's access-period cost, and the frame's PRR. A slot is one
//! data packet. Two guards apply to every grant:
//!
//! * payload: `delivered + prr <= payload`, so no node is scheduled past its
//!   payload;
//! * energy: `energy - e_tx >= e_td` after the packet, so no grant takes a
//!   node below the death threshold.
//!
//! Ties are broken by ascending `NodeId`, which makes every scheduler a pure
//! function of its input.

mod baseline;
mod ehfs;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baseline::{fcfs_frame, hp_frame, le_frame};
pub use ehfs::ehfs_frame;

use crate::error::{Error, Result};
use crate::model::{EnergyConstants, FrameSchedule, Kappa, NodeId, NodeState, ProtocolState};
use crate::scalar::Field;

pub struct SchedulerInput<'a, T> {
    pub frame_index: u32,
    /// All nodes of the network; schedulers skip those that have not arrived,
    /// are switched off, or sat out the access period.
    pub nodes: &'a [NodeState<T>],
    pub slots: usize,
    pub kappa: Kappa<T>,
    pub constants: &'a EnergyConstants<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameDecision {
    pub schedule: FrameSchedule,
    /// State changes to apply at the end of the frame. `Nd` entries are
    /// projections from expected delivery.
    pub transitions: Vec<(NodeId, ProtocolState)>,
}

/// Transmission priority of a node: PRR per joule of residual energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priority<T> {
    pub eta: T,
    pub node: NodeId,
}

pub fn eta<T: Field>(prr: T, energy: T) -> Result<T> {
    if energy > T::zero() {
        Ok(prr / energy)
    } else {
        Err(Error::param(
            "energy",
            "priority is undefined for non-positive energy",
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Ehfs,
    Fcfs,
    Le,
    Hp,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::Ehfs,
        SchedulerKind::Fcfs,
        SchedulerKind::Le,
        SchedulerKind::Hp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Ehfs => "ehfs",
            SchedulerKind::Fcfs => "fcfs",
            SchedulerKind::Le => "le",
            SchedulerKind::Hp => "hp",
        }
    }

    pub fn decide<T: Field>(self, input: &SchedulerInput<'_, T>) -> FrameDecision {
        match self {
            SchedulerKind::Ehfs => ehfs_frame(input),
            SchedulerKind::Fcfs => fcfs_frame(input),
            SchedulerKind::Le => le_frame(input),
            SchedulerKind::Hp => hp_frame(input),
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ehfs" => Ok(SchedulerKind::Ehfs),
            "fcfs" => Ok(SchedulerKind::Fcfs),
            "le" => Ok(SchedulerKind::Le),
            "hp" => Ok(SchedulerKind::Hp),
            other => Err(Error::param(
                "scheduler",
                format!("unknown scheduler `{other}` (expected ehfs, fcfs, le or hp)"),
            )),
        }
    }
}

/// Shared slot-filling state for one frame.
pub(crate) struct SlotFiller<'a, T> {
    input: &'a SchedulerInput<'a, T>,
    schedule: FrameSchedule,
    next_slot: usize,
    delivered: Vec<T>,
    energy: Vec<T>,
}

impl<'a, T: Field> SlotFiller<'a, T> {
    pub(crate) fn new(input: &'a SchedulerInput<'a, T>) -> Self {
        SlotFiller {
            input,
            schedule: FrameSchedule::empty(input.frame_index, input.slots),
            next_slot: 0,
            delivered: input.nodes.iter().map(|n| n.delivered).collect(),
            energy: input.nodes.iter().map(|n| n.energy).collect(),
        }
    }

    /// Indices of nodes eligible for slots this frame.
    pub(crate) fn participants(&self) -> Vec<usize> {
        let frame = self.input.frame_index;
        self.input
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| {
                n.is_live(frame) && n.rcap_participant && n.protocol_state == ProtocolState::Ad
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn slots_left(&self) -> bool {
        self.next_slot < self.schedule.slots.len()
    }

    pub(crate) fn is_fair(&self, i: usize) -> bool {
        let n = &self.input.nodes[i];
        self.input.kappa.is_fair(self.delivered[i], n.payload_total)
    }

    /// Whether node `i` could take one more packet right now.
    pub(crate) fn can_send(&self, i: usize) -> bool {
        let n = &self.input.nodes[i];
        let c = self.input.constants;
        n.prr > T::zero()
            && self.delivered[i] + n.prr
                <= T::from_count(u64::from(n.payload_total)) + T::tolerance()
            && self.energy[i] - c.e_tx >= c.e_td
    }

    /// Grants slots to node `i` while `keep_going` holds and the node can
    /// send. Returns the number granted.
    pub(crate) fn fill(&mut self, i: usize, keep_going: impl Fn(&Self, usize) -> bool) -> usize {
        let id = self.input.nodes[i].id;
        let prr = self.input.nodes[i].prr;
        let e_tx = self.input.constants.e_tx;
        let mut granted = 0;
        while self.slots_left() && self.can_send(i) && keep_going(self, i) {
            self.schedule.slots[self.next_slot] = Some(id);
            self.next_slot += 1;
            self.delivered[i] = self.delivered[i] + prr;
            self.energy[i] = self.energy[i] - e_tx;
            granted += 1;
        }
        granted
    }

    /// `Nd` transitions for participants whose payload is projected complete.
    pub(crate) fn completions(&self, participants: &[usize]) -> Vec<(NodeId, ProtocolState)> {
        participants
            .iter()
            .filter(|&&i| {
                let n = &self.input.nodes[i];
                let mut projected = n.clone();
                projected.delivered = self.delivered[i];
                projected.is_payload_complete(n.prr)
            })
            .map(|&i| (self.input.nodes[i].id, ProtocolState::Nd))
            .collect()
    }

    pub(crate) fn finish(self, transitions: Vec<(NodeId, ProtocolState)>) -> FrameDecision {
        FrameDecision {
            schedule: self.schedule,
            transitions,
        }
    }
}

/// Sorts node indices by `key` with ties broken by ascending node id.
pub(crate) fn sort_by_key_then_id<T: Field>(
    nodes: &[NodeState<T>],
    order: &mut [usize],
    cmp: impl Fn(&NodeState<T>, &NodeState<T>) -> Ordering,
) {
    order.sort_by(|&a, &b| cmp(&nodes[a], &nodes[b]).then_with(|| nodes[a].id.cmp(&nodes[b].id)));
}

pub(crate) fn partial<T: PartialOrd>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
