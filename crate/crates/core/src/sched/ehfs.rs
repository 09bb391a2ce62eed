//! Fair scheduling with energy harvesting.
//!
//! Nodes are served in descending `prr / energy`. While some live node that
//! can still transmit is short of its fairness quota, only unfair nodes get
//! slots, each up to its quota, and nodes that reach it move to `Na` so they
//! skip subsequent access periods. Once every such node is fair, `Na` nodes
//! rejoin and slots go to the highest-priority nodes up to their full payload.
//!
//! The priority order is computed once from the frame-start snapshot and is
//! not revised while slots are filled.

use super::{partial, sort_by_key_then_id, FrameDecision, SchedulerInput, SlotFiller};
use crate::model::{NodeId, ProtocolState};
use crate::scalar::Field;

pub fn ehfs_frame<T: Field>(input: &SchedulerInput<'_, T>) -> FrameDecision {
    let mut filler = SlotFiller::new(input);
    let mut order = filler.participants();
    sort_by_key_then_id(input.nodes, &mut order, |a, b| {
        // descending prr / energy; participants always have positive energy
        let ea = super::eta(a.prr, a.energy).unwrap_or_else(|_| T::zero());
        let eb = super::eta(b.prr, b.energy).unwrap_or_else(|_| T::zero());
        partial(eb, ea)
    });

    let frame = input.frame_index;
    let live: Vec<usize> = input
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.is_live(frame))
        .map(|(i, _)| i)
        .collect();

    // An unfair node blocks the fill-up phase only if it can actually use a
    // slot; nodes sitting out this access period cannot.
    let blocking = |f: &SlotFiller<'_, T>| order.iter().any(|&i| !f.is_fair(i) && f.can_send(i));

    let fairness_phase = blocking(&filler);
    if fairness_phase {
        for &i in &order {
            if !filler.slots_left() {
                break;
            }
            filler.fill(i, |f, i| !f.is_fair(i));
        }
    }
    let fairness_met = !blocking(&filler);
    if fairness_met {
        for &i in &order {
            if !filler.slots_left() {
                break;
            }
            filler.fill(i, |_, _| true);
        }
    }

    let mut transitions: Vec<(NodeId, ProtocolState)> = filler.completions(&order);
    let done = |id: NodeId, t: &[(NodeId, ProtocolState)]| t.iter().any(|(n, _)| *n == id);

    // Same rule as `blocking`, over every live node: an unfair node without
    // energy headroom does not hold the others back.
    let unfair_live_remaining = live.iter().any(|&i| {
        !filler.is_fair(i) && !done(input.nodes[i].id, &transitions) && filler.can_send(i)
    });

    for &i in &live {
        let n = &input.nodes[i];
        if done(n.id, &transitions) {
            continue;
        }
        let next = match (n.protocol_state, unfair_live_remaining) {
            (ProtocolState::Ad, true) if filler.is_fair(i) => ProtocolState::Na,
            (ProtocolState::Na, false) => ProtocolState::Ad,
            _ => continue,
        };
        transitions.push((n.id, next));
    }
    transitions.sort_by_key(|t| t.0);
    filler.finish(transitions)
}
