//! Reference schedulers. Each serves its participants in a fixed order and
//! lets the head node hold slots until its payload or energy runs out.

use std::cmp::Ordering;

use super::{partial, sort_by_key_then_id, FrameDecision, SchedulerInput, SlotFiller};
use crate::model::NodeState;
use crate::scalar::Field;

fn serve_in_order<T: Field>(
    input: &SchedulerInput<'_, T>,
    cmp: impl Fn(&NodeState<T>, &NodeState<T>) -> Ordering,
) -> FrameDecision {
    let mut filler = SlotFiller::new(input);
    let mut order = filler.participants();
    sort_by_key_then_id(input.nodes, &mut order, cmp);
    for &i in &order {
        if !filler.slots_left() {
            break;
        }
        filler.fill(i, |_, _| true);
    }
    let transitions = filler.completions(&order);
    filler.finish(transitions)
}

/// First come, first served: arrival frame, then node id.
pub fn fcfs_frame<T: Field>(input: &SchedulerInput<'_, T>) -> FrameDecision {
    serve_in_order(input, |a, b| a.arrival_frame.cmp(&b.arrival_frame))
}

/// Lowest residual energy first.
pub fn le_frame<T: Field>(input: &SchedulerInput<'_, T>) -> FrameDecision {
    serve_in_order(input, |a, b| partial(a.energy, b.energy))
}

/// Highest PRR first.
pub fn hp_frame<T: Field>(input: &SchedulerInput<'_, T>) -> FrameDecision {
    serve_in_order(input, |a, b| partial(b.prr, a.prr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EnergyConstants, NodeId, ProtocolState};
    use crate::sched::testutil::{input, node};

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn fcfs_serves_arrival_order() {
        let c = EnergyConstants::cc2420();
        let mut nodes = vec![
            node(1, 1.0, 1.0, 2),
            node(2, 1.0, 1.0, 2),
            node(3, 1.0, 1.0, 2),
        ];
        nodes[0].arrival_frame = 2;
        nodes[1].arrival_frame = 3;
        nodes[2].arrival_frame = 1;
        let mut inp = input(&nodes, 6, 0.5, &c);
        inp.frame_index = 3;
        let d = fcfs_frame(&inp);
        assert_eq!(d.schedule.service_order(), ids(&[3, 1, 2]));
    }

    #[test]
    fn fcfs_head_holds_slots_at_its_rate() {
        let c = EnergyConstants::cc2420();
        let nodes = [node(1, 0.5, 1.0, 10), node(2, 1.0, 1.0, 10)];
        let d = fcfs_frame(&input(&nodes, 10, 0.5, &c));
        // the head node needs 20 slots at PRR 0.5, so it keeps all 10
        assert_eq!(d.schedule.slots_for(NodeId(1)), 10);
        assert!(d.transitions.is_empty());
    }

    #[test]
    fn fcfs_successor_takes_over_when_head_runs_dry() {
        let c = EnergyConstants::cc2420();
        let e = c.e_td + 3.0 * c.e_tx + 1e-9;
        let nodes = [node(1, 1.0, e, 10), node(2, 1.0, 1.0, 10)];
        let d = fcfs_frame(&input(&nodes, 5, 0.5, &c));
        assert_eq!(d.schedule.slots[..3], [Some(NodeId(1)); 3]);
        assert_eq!(d.schedule.slots[3..], [Some(NodeId(2)); 2]);
    }

    #[test]
    fn le_order_and_ties() {
        let c = EnergyConstants::cc2420();
        let nodes = [
            node(1, 1.0, 3.0, 1),
            node(2, 1.0, 1.0, 1),
            node(3, 1.0, 2.0, 1),
        ];
        let d = le_frame(&input(&nodes, 3, 0.5, &c));
        assert_eq!(d.schedule.service_order(), ids(&[2, 3, 1]));

        let tied = [node(2, 1.0, 1.0, 1), node(1, 1.0, 1.0, 1)];
        let d = le_frame(&input(&tied, 2, 0.5, &c));
        assert_eq!(d.schedule.service_order(), ids(&[1, 2]));
    }

    #[test]
    fn le_skips_switched_off_nodes() {
        let c = EnergyConstants::cc2420();
        let mut nodes = vec![node(1, 1.0, 0.5, 1), node(2, 1.0, 1.0, 1)];
        nodes[0].protocol_state = ProtocolState::Nd;
        let d = le_frame(&input(&nodes, 2, 0.5, &c));
        assert_eq!(d.schedule.service_order(), ids(&[2]));
    }

    #[test]
    fn hp_order_and_ties() {
        let c = EnergyConstants::cc2420();
        let nodes = [
            node(1, 0.2, 1.0, 1),
            node(2, 0.9, 1.0, 1),
            node(3, 0.5, 1.0, 1),
        ];
        let d = hp_frame(&input(&nodes, 6, 0.5, &c));
        assert_eq!(d.schedule.service_order(), ids(&[2, 3, 1]));

        let tied = [node(3, 0.5, 1.0, 1), node(1, 0.5, 2.0, 1)];
        let d = hp_frame(&input(&tied, 4, 0.5, &c));
        assert_eq!(d.schedule.service_order(), ids(&[1, 3]));

        let single = [node(1, 0.5, 1.0, 100)];
        let d = hp_frame(&input(&single, 7, 0.5, &c));
        assert_eq!(d.schedule.slots_for(NodeId(1)), 7);
    }
}
