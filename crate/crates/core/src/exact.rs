//! Exact optimiser for small scheduling instances.
//!
//! Maximises expected packets received, `Σ_f Σ_i Σ_j x[f][j][i] · q[i][f]`,
//! subject to the energy floor, the fairness quota, the payload cap, slot
//! exclusivity and the access-period coupling. Slots within a frame are
//! interchangeable, so the search branches on per-frame slot counts
//! (frames outer, nodes by descending PRR inner) and prunes with an
//! optimistic bound on the remaining slots.
//!
//! Modelling choices:
//!
//! * Harvested energy adds to the residual energy. The floor is enforced per
//!   frame, before that frame's harvest is credited: for every node and frame,
//!   `E[f-1] - φ[f]·E_access - k[f]·e_tx >= e_td`.
//! * The access indicator `φ[f]` is chosen minimally: a node pays the access
//!   cost exactly in frames where it transmits. This never excludes a feasible
//!   schedule and implies that a node stops accessing the channel once its
//!   payload is complete.
//! * The per-slot remaining-payload indicator `v` is derived from `x` (one while
//!   payload remains) rather than searched over.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::energy::apply_frame_energy;
use crate::error::{Error, Result};
use crate::model::{EnergyConstants, Kappa, NodeId, NodeState, ProtocolState};
use crate::scalar::{max, min, Field};
use crate::sched::{SchedulerInput, SchedulerKind};

/// Default limit on `n · s · f_max`.
pub const DEFAULT_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceNode<T> {
    /// Payload in packets.
    pub payload: u32,
    /// Initial residual energy, J.
    pub energy: T,
    /// PRR per frame.
    pub prr: Vec<T>,
    /// Harvested energy per frame, J.
    pub harvest: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactInstance<T> {
    /// Slots per frame.
    pub s: usize,
    /// Frame horizon.
    pub f_max: usize,
    pub kappa: T,
    pub constants: EnergyConstants<T>,
    #[serde(rename = "node")]
    pub nodes: Vec<InstanceNode<T>>,
}

impl<T: Field> ExactInstance<T> {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn variables(&self) -> usize {
        self.n() * self.s * self.f_max
    }

    pub fn validate(&self) -> Result<()> {
        Kappa::allowing_zero(self.kappa)?;
        self.constants.validate()?;
        if self.nodes.is_empty() || self.s == 0 || self.f_max == 0 {
            return Err(Error::ShapeMismatch(
                "instance needs at least one node, slot and frame".into(),
            ));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.prr.len() != self.f_max || node.harvest.len() != self.f_max {
                return Err(Error::ShapeMismatch(format!(
                    "node {}: expected {} PRR and harvest values, got {} and {}",
                    i + 1,
                    self.f_max,
                    node.prr.len(),
                    node.harvest.len()
                )));
            }
            if node.prr.iter().any(|q| *q < T::zero() || *q > T::one()) {
                return Err(Error::param(
                    "prr",
                    format!("node {}: PRR outside [0, 1]", i + 1),
                ));
            }
            if node.harvest.iter().any(|h| *h < T::zero()) {
                return Err(Error::param(
                    "harvest",
                    format!("node {}: negative harvest", i + 1),
                ));
            }
        }
        Ok(())
    }

    fn payload(&self, i: usize) -> T {
        T::from_count(u64::from(self.nodes[i].payload))
    }

    fn quota(&self, i: usize) -> T {
        self.kappa * self.payload(i)
    }
}

/// Boolean transmission tensor plus access indicators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    /// `x[frame][slot][node]`.
    pub x: Vec<Vec<Vec<bool>>>,
    /// `phi[frame][node]`.
    pub phi: Vec<Vec<bool>>,
}

impl Assignment {
    pub fn zeros(n: usize, s: usize, f_max: usize) -> Self {
        Assignment {
            x: vec![vec![vec![false; n]; s]; f_max],
            phi: vec![vec![false; n]; f_max],
        }
    }

    /// Lays out per-frame slot counts node by node and sets `phi` exactly
    /// where a node transmits.
    pub fn from_counts(counts: &[Vec<u32>], s: usize) -> Self {
        let n = counts.first().map_or(0, Vec::len);
        let mut a = Assignment::zeros(n, s, counts.len());
        for (f, row) in counts.iter().enumerate() {
            let mut slot = 0;
            for (i, &k) in row.iter().enumerate() {
                for _ in 0..k {
                    a.x[f][slot][i] = true;
                    slot += 1;
                }
                a.phi[f][i] = k > 0;
            }
        }
        a
    }

    pub fn counts(&self) -> Vec<Vec<u32>> {
        self.x
            .iter()
            .map(|frame| {
                let n = frame.first().map_or(0, Vec::len);
                (0..n)
                    .map(|i| frame.iter().filter(|slot| slot[i]).count() as u32)
                    .collect()
            })
            .collect()
    }

    /// Same transmissions with `phi` reduced to the frames where each node
    /// transmits.
    pub fn with_minimal_access(&self) -> Self {
        let mut a = self.clone();
        for (f, frame) in self.x.iter().enumerate() {
            for i in 0..a.phi[f].len() {
                a.phi[f][i] = frame.iter().any(|slot| slot[i]);
            }
        }
        a
    }

    fn check_shape<T: Field>(&self, inst: &ExactInstance<T>) -> Result<()> {
        let n = inst.n();
        let ok = self.x.len() == inst.f_max
            && self.phi.len() == inst.f_max
            && self
                .x
                .iter()
                .all(|frame| frame.len() == inst.s && frame.iter().all(|slot| slot.len() == n))
            && self.phi.iter().all(|row| row.len() == n);
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "assignment does not match {} nodes × {} slots × {} frames",
                n, inst.s, inst.f_max
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Residual energy stays at or above the death threshold.
    EnergyFloor,
    /// Delivered packets reach the fairness quota.
    Fairness,
    /// Delivered packets do not exceed the payload.
    Payload,
    /// Transmission indicators are binary.
    Binary,
    /// At most one node per slot.
    Exclusive,
    /// Remaining payload is non-negative at every slot.
    Remaining,
    /// Remaining-payload indicator is non-increasing over slots of a frame.
    SlotMonotone,
    /// Remaining-payload indicator is non-increasing across frames.
    FrameMonotone,
    /// No access period after the payload is complete.
    AccessAfterDone,
    /// Transmitting requires taking part in the access period.
    TxNeedsAccess,
}

impl Constraint {
    pub const ALL: [Constraint; 10] = [
        Constraint::EnergyFloor,
        Constraint::Fairness,
        Constraint::Payload,
        Constraint::Binary,
        Constraint::Exclusive,
        Constraint::Remaining,
        Constraint::SlotMonotone,
        Constraint::FrameMonotone,
        Constraint::AccessAfterDone,
        Constraint::TxNeedsAccess,
    ];
}

/// Minimum slack per constraint family, plus per-node detail for the three
/// node-level families. Negative slack marks a violation. Fairness and
/// payload slacks include the scalar's comparison tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Slacks<T> {
    pub min: Vec<(Constraint, T)>,
    pub energy: Vec<T>,
    pub fairness: Vec<T>,
    pub payload: Vec<T>,
}

impl<T: Field> Slacks<T> {
    pub fn get(&self, c: Constraint) -> T {
        self.min
            .iter()
            .find(|(k, _)| *k == c)
            .map(|(_, v)| *v)
            .expect("every constraint is evaluated")
    }

    pub fn violated(&self) -> Vec<Constraint> {
        self.min
            .iter()
            .filter(|(_, v)| *v < T::zero())
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.violated().is_empty()
    }
}

/// Expected packets received under `assignment`, summed frame by frame and
/// node by node.
pub fn objective<T: Field>(inst: &ExactInstance<T>, counts: &[Vec<u32>]) -> T {
    let mut total = T::zero();
    for (f, row) in counts.iter().enumerate() {
        for (i, &k) in row.iter().enumerate() {
            total = total + T::from_count(u64::from(k)) * inst.nodes[i].prr[f];
        }
    }
    total
}

fn delivered<T: Field>(inst: &ExactInstance<T>, counts: &[Vec<u32>]) -> Vec<T> {
    (0..inst.n())
        .map(|i| {
            counts.iter().enumerate().fold(T::zero(), |acc, (f, row)| {
                acc + T::from_count(u64::from(row[i])) * inst.nodes[i].prr[f]
            })
        })
        .collect()
}

pub fn check_feasible<T: Field>(inst: &ExactInstance<T>, a: &Assignment) -> Result<Slacks<T>> {
    inst.validate()?;
    a.check_shape(inst)?;
    let n = inst.n();
    let tol = T::tolerance();
    let one = T::one();
    let counts = a.counts();
    let access = inst.constants.rcap_cost();
    let e_tx = inst.constants.e_tx;
    let e_td = inst.constants.e_td;

    let mut energy_slack = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = inst.nodes[i].energy;
        let mut worst: Option<T> = None;
        for f in 0..inst.f_max {
            if a.phi[f][i] {
                e = e - access;
            }
            e = e - T::from_count(u64::from(counts[f][i])) * e_tx;
            let s = e - e_td;
            worst = Some(worst.map_or(s, |w| min(w, s)));
            e = e + inst.nodes[i].harvest[f];
        }
        energy_slack.push(worst.expect("f_max >= 1"));
    }

    let alpha = delivered(inst, &counts);
    let fairness: Vec<T> = (0..n).map(|i| alpha[i] - inst.quota(i) + tol).collect();
    let payload: Vec<T> = (0..n).map(|i| inst.payload(i) - alpha[i] + tol).collect();

    // booleans cannot exceed one
    let binary = if a.x.iter().flatten().flatten().any(|&b| b) {
        T::zero()
    } else {
        one
    };

    let mut exclusive = one;
    for frame in &a.x {
        for slot in frame {
            let used = slot.iter().filter(|&&b| b).count() as u64;
            exclusive = min(exclusive, one - T::from_count(used));
        }
    }

    // cumulative delivery after each (frame, slot), in slot order
    let mut remaining_min: Option<T> = None;
    let mut v: Vec<Vec<Vec<bool>>> = vec![vec![vec![false; inst.s]; inst.f_max]; n];
    let mut done_frame: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut cum = T::zero();
        for f in 0..inst.f_max {
            for j in 0..inst.s {
                if a.x[f][j][i] {
                    cum = cum + inst.nodes[i].prr[f];
                }
                let rem = inst.payload(i) - cum;
                remaining_min = Some(remaining_min.map_or(rem + tol, |m| min(m, rem + tol)));
                v[i][f][j] = rem > tol;
            }
            if done_frame[i].is_none() && !v[i][f][inst.s - 1] {
                done_frame[i] = Some(f);
            }
        }
    }

    let ind = |b: bool| if b { one } else { T::zero() };
    let mut slot_mono = one;
    let mut frame_mono = one;
    for vi in &v {
        for f in 0..inst.f_max {
            for j in 0..inst.s {
                for jp in j..inst.s {
                    slot_mono = min(slot_mono, ind(vi[f][j]) - ind(vi[f][jp]));
                }
                for vg in vi.iter().skip(f) {
                    for &later in vg.iter().skip(j) {
                        frame_mono = min(frame_mono, ind(vi[f][j]) - ind(later));
                    }
                }
            }
        }
    }

    let mut access_after_done = T::zero();
    for i in 0..n {
        if let Some(fd) = done_frame[i] {
            let later = a.phi.iter().skip(fd + 1).filter(|row| row[i]).count() as u64;
            access_after_done = min(access_after_done, T::zero() - T::from_count(later));
        }
    }

    let mut tx_needs_access = one;
    for f in 0..inst.f_max {
        for j in 0..inst.s {
            for i in 0..n {
                tx_needs_access = min(tx_needs_access, ind(a.phi[f][i]) - ind(a.x[f][j][i]));
            }
        }
    }

    let min_of = |v: &[T]| {
        v.iter()
            .copied()
            .fold(None, |m: Option<T>, x| Some(m.map_or(x, |m| min(m, x))))
    };
    Ok(Slacks {
        min: vec![
            (
                Constraint::EnergyFloor,
                min_of(&energy_slack).unwrap_or(one),
            ),
            (Constraint::Fairness, min_of(&fairness).unwrap_or(one)),
            (Constraint::Payload, min_of(&payload).unwrap_or(one)),
            (Constraint::Binary, binary),
            (Constraint::Exclusive, exclusive),
            (Constraint::Remaining, remaining_min.unwrap_or(one)),
            (Constraint::SlotMonotone, slot_mono),
            (Constraint::FrameMonotone, frame_mono),
            (Constraint::AccessAfterDone, access_after_done),
            (Constraint::TxNeedsAccess, tx_needs_access),
        ],
        energy: energy_slack,
        fairness,
        payload,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution<T> {
    pub assignment: Assignment,
    pub objective: T,
    pub alpha: Vec<T>,
    pub slacks: Slacks<T>,
    pub fair_nodes: usize,
    /// Search nodes visited.
    pub explored: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExactOutcome<T> {
    Optimal(ExactSolution<T>),
    /// No schedule meets every node's fairness quota within the energy limits.
    Infeasible,
}

impl<T> ExactOutcome<T> {
    pub fn optimal(&self) -> Option<&ExactSolution<T>> {
        match self {
            ExactOutcome::Optimal(s) => Some(s),
            ExactOutcome::Infeasible => None,
        }
    }
}

pub fn solve_exact<T: Field>(inst: &ExactInstance<T>) -> Result<ExactOutcome<T>> {
    solve_exact_with_budget(inst, DEFAULT_BUDGET)
}

pub fn solve_exact_with_budget<T: Field>(
    inst: &ExactInstance<T>,
    budget: usize,
) -> Result<ExactOutcome<T>> {
    inst.validate()?;
    let variables = inst.variables();
    if variables > budget {
        return Err(Error::BudgetExceeded {
            variables,
            limit: budget,
        });
    }
    let mut search = Search::new(inst);
    if inst.nodes.iter().any(|n| n.energy < inst.constants.e_td) {
        return Ok(ExactOutcome::Infeasible);
    }
    search.frame(0);
    let Some(counts) = search.best_counts.take() else {
        return Ok(ExactOutcome::Infeasible);
    };
    let assignment = Assignment::from_counts(&counts, inst.s);
    let slacks = check_feasible(inst, &assignment)?;
    debug_assert!(slacks.is_feasible(), "search returned an infeasible point");
    let alpha = delivered(inst, &counts);
    let fair_nodes = (0..inst.n())
        .filter(|&i| alpha[i] + T::tolerance() >= inst.quota(i))
        .count();
    Ok(ExactOutcome::Optimal(ExactSolution {
        objective: objective(inst, &counts),
        assignment,
        alpha,
        slacks,
        fair_nodes,
        explored: search.explored,
    }))
}

struct Search<'a, T> {
    inst: &'a ExactInstance<T>,
    /// Node indices per frame, descending PRR then ascending id.
    order: Vec<Vec<usize>>,
    /// Optimistic value of all slots in frames `f..`.
    future_bound: Vec<T>,
    /// Largest PRR per node over frames `f..`, times slots: optimistic extra
    /// delivery per node.
    future_node: Vec<Vec<T>>,
    counts: Vec<Vec<u32>>,
    alpha: Vec<T>,
    energy: Vec<T>,
    value: T,
    best: Option<T>,
    best_counts: Option<Vec<Vec<u32>>>,
    explored: u64,
}

impl<'a, T: Field> Search<'a, T> {
    fn new(inst: &'a ExactInstance<T>) -> Self {
        let n = inst.n();
        let slots = T::from_count(inst.s as u64);
        let order = (0..inst.f_max)
            .map(|f| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| {
                    inst.nodes[b].prr[f]
                        .partial_cmp(&inst.nodes[a].prr[f])
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        let mut future_bound = vec![T::zero(); inst.f_max + 1];
        let mut future_node = vec![vec![T::zero(); n]; inst.f_max + 1];
        for f in (0..inst.f_max).rev() {
            let best_q = inst
                .nodes
                .iter()
                .fold(T::zero(), |m, node| max(m, node.prr[f]));
            future_bound[f] = future_bound[f + 1] + slots * best_q;
            for i in 0..n {
                future_node[f][i] = future_node[f + 1][i] + slots * inst.nodes[i].prr[f];
            }
        }
        Search {
            inst,
            order,
            future_bound,
            future_node,
            counts: vec![vec![0; n]; inst.f_max],
            alpha: vec![T::zero(); n],
            energy: inst.nodes.iter().map(|node| node.energy).collect(),
            value: T::zero(),
            best: None,
            best_counts: None,
            explored: 0,
        }
    }

    fn remaining_payload(&self) -> T {
        (0..self.inst.n()).fold(T::zero(), |acc, i| {
            acc + max(T::zero(), self.inst.payload(i) - self.alpha[i])
        })
    }

    /// Whether `extra` more value could beat the incumbent.
    fn promising(&self, extra: T) -> bool {
        let cap = min(extra, self.remaining_payload());
        match self.best {
            None => true,
            Some(b) => self.value + cap > b,
        }
    }

    fn fairness_reachable(&self, f: usize) -> bool {
        (0..self.inst.n()).all(|i| {
            let room = max(T::zero(), self.inst.payload(i) - self.alpha[i]);
            let reach = self.alpha[i] + min(room + T::tolerance(), self.future_node[f][i]);
            reach + T::tolerance() >= self.inst.quota(i)
        })
    }

    fn frame(&mut self, f: usize) {
        self.explored += 1;
        if f == self.inst.f_max {
            let fair =
                (0..self.inst.n()).all(|i| self.alpha[i] + T::tolerance() >= self.inst.quota(i));
            if fair && self.best.is_none_or(|b| self.value > b) {
                self.best = Some(self.value);
                self.best_counts = Some(self.counts.clone());
            }
            return;
        }
        if !self.fairness_reachable(f) || !self.promising(self.future_bound[f]) {
            return;
        }
        self.node_in_frame(f, 0, self.inst.s);
    }

    fn node_in_frame(&mut self, f: usize, pos: usize, slots_left: usize) {
        let n = self.inst.n();
        if pos == n {
            // harvest, then the next frame
            let saved = self.energy.clone();
            for i in 0..n {
                self.energy[i] = self.energy[i] + self.inst.nodes[i].harvest[f];
            }
            self.frame(f + 1);
            self.energy = saved;
            return;
        }
        let i = self.order[f][pos];
        let q = self.inst.nodes[i].prr[f];
        let optimistic = T::from_count(slots_left as u64) * q + self.future_bound[f + 1];
        if !self.promising(optimistic) && self.best.is_some() {
            // nothing from this node onward can help; zero slots for the rest
            // still has to be explored for fairness-only completions
        }
        let k_max = self.max_slots(i, f, slots_left);
        let access = self.inst.constants.rcap_cost();
        let e_tx = self.inst.constants.e_tx;
        for k in (0..=k_max).rev() {
            let kt = T::from_count(u64::from(k));
            let gain = kt * q;
            let cost = if k > 0 { access + kt * e_tx } else { T::zero() };
            self.counts[f][i] = k;
            self.alpha[i] = self.alpha[i] + gain;
            self.energy[i] = self.energy[i] - cost;
            self.value = self.value + gain;
            let rest = T::from_count((slots_left - k as usize) as u64);
            let next_q = self.order[f]
                .iter()
                .skip(pos + 1)
                .map(|&j| self.inst.nodes[j].prr[f])
                .fold(T::zero(), max);
            if self.promising(rest * next_q + self.future_bound[f + 1]) {
                self.node_in_frame(f, pos + 1, slots_left - k as usize);
            }
            self.value = self.value - gain;
            self.energy[i] = self.energy[i] + cost;
            self.alpha[i] = self.alpha[i] - gain;
            self.counts[f][i] = 0;
        }
    }

    /// Most slots node `i` can take in frame `f` within payload and energy.
    fn max_slots(&self, i: usize, f: usize, slots_left: usize) -> u32 {
        let q = self.inst.nodes[i].prr[f];
        if !(q > T::zero()) {
            return 0;
        }
        let payload = self.inst.payload(i);
        let access = self.inst.constants.rcap_cost();
        let e_tx = self.inst.constants.e_tx;
        let e_td = self.inst.constants.e_td;
        let mut k = 0u32;
        while (k as usize) < slots_left {
            let next = T::from_count(u64::from(k + 1));
            let fits_payload = self.alpha[i] + next * q <= payload + T::tolerance();
            let fits_energy = self.energy[i] - access - next * e_tx >= e_td;
            if !(fits_payload && fits_energy) {
                break;
            }
            k += 1;
        }
        k
    }
}

/// Result of running a heuristic scheduler over an instance's horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicRun<T> {
    /// Transmissions with the access indicators the scheduler actually used.
    pub assignment: Assignment,
    pub objective: T,
    pub alpha: Vec<T>,
    pub fair_nodes: usize,
    pub dead_nodes: usize,
}

/// Runs `scheduler` frame by frame over the instance.
///
/// Per frame: nodes in `Ad` pay the access cost, the scheduler assigns slots,
/// deliveries and transmit energy are applied, harvest is credited, and
/// nodes whose energy fell below the threshold or whose payload is complete
/// switch off. Energy is not capped.
pub fn replay<T: Field>(
    inst: &ExactInstance<T>,
    scheduler: SchedulerKind,
) -> Result<HeuristicRun<T>> {
    inst.validate()?;
    let kappa = if inst.kappa > T::zero() {
        Kappa::new(inst.kappa)?
    } else {
        Kappa::allowing_zero(inst.kappa)?
    };
    let c = inst.constants;
    let n = inst.n();
    let mut nodes: Vec<NodeState<T>> = inst
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| NodeState::new(NodeId::from_index(i), node.payload, node.energy, 1))
        .collect();
    for node in nodes.iter_mut() {
        if node.is_dead(&c) {
            node.protocol_state = ProtocolState::Nd;
            node.died_frame = Some(0);
        }
    }
    let mut assignment = Assignment::zeros(n, inst.s, inst.f_max);
    for f in 0..inst.f_max {
        let frame = f as u32 + 1;
        for (i, node) in nodes.iter_mut().enumerate() {
            node.prr = inst.nodes[i].prr[f];
            node.rcap_participant = false;
            if node.protocol_state == ProtocolState::Ad {
                *node = apply_frame_energy(node, true, 0, T::zero(), &c, None);
                node.rcap_participant = true;
                assignment.phi[f][i] = true;
            }
        }
        let decision = scheduler.decide(&SchedulerInput {
            frame_index: frame,
            nodes: &nodes,
            slots: inst.s,
            kappa,
            constants: &c,
        });
        let counts = decision.schedule.counts(n);
        for (j, slot) in decision.schedule.slots.iter().enumerate() {
            if let Some(id) = slot {
                assignment.x[f][j][id.index()] = true;
            }
        }
        for (i, node) in nodes.iter_mut().enumerate() {
            for _ in 0..counts[i] {
                node.delivered = node.delivered + node.prr;
            }
            *node = apply_frame_energy(node, false, counts[i], inst.nodes[i].harvest[f], &c, None);
        }
        for (id, next) in &decision.transitions {
            let node = &mut nodes[id.index()];
            if *next != ProtocolState::Nd && node.protocol_state != ProtocolState::Nd {
                node.set_state(*next);
            }
        }
        for node in nodes.iter_mut() {
            if node.protocol_state == ProtocolState::Nd {
                continue;
            }
            if node.is_dead(&c) {
                node.died_frame = Some(frame);
                node.set_state(ProtocolState::Nd);
            } else if node.is_payload_complete(node.prr) {
                node.finished_frame = Some(frame);
                node.set_state(ProtocolState::Nd);
            }
        }
    }
    let counts = assignment.counts();
    let alpha = delivered(inst, &counts);
    Ok(HeuristicRun {
        objective: objective(inst, &counts),
        fair_nodes: (0..n)
            .filter(|&i| alpha[i] + T::tolerance() >= inst.quota(i))
            .count(),
        dead_nodes: nodes.iter().filter(|n| n.died_frame.is_some()).count(),
        alpha,
        assignment,
    })
}

/// Relative shortfall of a heuristic against the optimum.
pub fn gap<T: Field>(heuristic: T, exact: T) -> Result<T> {
    if exact > T::zero() {
        Ok((exact - heuristic) / exact)
    } else {
        Err(Error::param("exact", "optimum must be positive"))
    }
}

/// Heuristic versus optimum on one instance, with wall-clock times.
#[derive(Debug, Clone)]
pub struct OracleReport<T> {
    pub exact: ExactOutcome<T>,
    pub heuristic: HeuristicRun<T>,
    pub gap: Option<T>,
    pub exact_seconds: f64,
    pub heuristic_seconds: f64,
}

pub fn compare_with_oracle<T: Field>(
    inst: &ExactInstance<T>,
    scheduler: SchedulerKind,
    budget: usize,
) -> Result<OracleReport<T>> {
    let t0 = Instant::now();
    let exact = solve_exact_with_budget(inst, budget)?;
    let exact_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let heuristic = replay(inst, scheduler)?;
    let heuristic_seconds = t1.elapsed().as_secs_f64();
    let gap = match exact.optimal() {
        Some(sol) if sol.objective > T::zero() => Some(gap(heuristic.objective, sol.objective)?),
        _ => None,
    };
    Ok(OracleReport {
        exact,
        heuristic,
        gap,
        exact_seconds,
        heuristic_seconds,
    })
}
