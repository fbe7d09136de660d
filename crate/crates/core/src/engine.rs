//! The stage loop.
//!
//! Stage `s`: add pair `s`, step the adversaries, walk the path from the
//! root until it has length `s`, initialize (and homogenize) everything to
//! the right of `π_s`, then snapshot `G` and record the path.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::actions::Ancestry;
use crate::adversary::{CeSet, FunctionalScript};
use crate::bits::{Bits, OracleSnapshot};
use crate::generic::GenericApprox;
use crate::graph::{add_stage_components, BuiltGraph, Homogenized, Side};
use crate::machine::{AgeIndex, Copier, MEdge, MachineView, OracleGraphMachine};
use crate::scenario::{HonestPhi, MiDirective, Scenario};
use crate::strategy::{NodeRecord, NodeState, Outcome, ParamAllocator, TreeAddress};
use crate::trace::{EventKind, TraceEvent};

/// A machine together with its incremental view, age index and copier.
#[derive(Clone, Debug)]
pub struct MachineSlot {
    pub machine: OracleGraphMachine,
    pub view: MachineView,
    pub ages: AgeIndex,
    pub copier: Option<Copier>,
    synced: Option<(usize, usize)>,
}

impl MachineSlot {
    pub fn new(index: usize) -> Self {
        MachineSlot {
            machine: OracleGraphMachine::new(index),
            view: MachineView::new(),
            ages: AgeIndex::new(index),
            copier: None,
            synced: None,
        }
    }

    /// Brings the view up to date with `G` and the stage.
    pub fn sync(&mut self, g: &GenericApprox, stage: usize) {
        let key = (g.change_log().len(), stage);
        if self.synced != Some(key) {
            self.view.refresh(&self.machine, g, stage);
            self.synced = Some(key);
        }
    }

    pub fn add_axiom(&mut self, snapshot: &OracleSnapshot, stage: usize, edge: MEdge, g: &GenericApprox) {
        self.sync(g, stage);
        let (gid, new) = self.machine.add_axiom(snapshot, stage, edge);
        if new {
            self.view.note_axiom(&self.machine, gid, edge, g);
        }
    }

    fn end_stage(&mut self, g: &GenericApprox, stage: usize) {
        self.sync(g, stage);
        let toggled = self.view.take_toggled();
        self.ages
            .update_toggled(&self.view, toggled, stage)
            .expect("stages advance one at a time");
    }
}

/// The adversary side: c.e. sets, functionals and oracle machines.
#[derive(Clone, Debug, Default)]
pub struct World {
    pub ce: BTreeMap<usize, CeSet>,
    pub phi: BTreeMap<usize, FunctionalScript>,
    pub honest: Vec<HonestPhi>,
    pub machines: BTreeMap<usize, MachineSlot>,
    mi_by_stage: BTreeMap<usize, Vec<MiDirective>>,
}

impl World {
    pub fn from_scenario(sc: &Scenario) -> World {
        let mut w = World::default();
        for d in &sc.ce {
            w.ce.entry(d.index)
                .or_insert_with(|| CeSet::new(d.index))
                .enumerate_at(d.stage, d.string.clone());
        }
        for d in &sc.phi {
            w.phi
                .entry(d.index)
                .or_insert_with(|| FunctionalScript::new(d.index))
                .add_axiom(d.stage, crate::graph::NodeId(d.a), crate::graph::NodeId(d.b))
                .expect("parser rejects conflicting phi axioms");
        }
        w.honest = sc.phi_honest.clone();
        for h in &w.honest {
            w.phi.entry(h.index).or_insert_with(|| FunctionalScript::new(h.index));
        }
        for d in &sc.mi {
            w.mi_by_stage.entry(d.stage).or_default().push(d.clone());
            w.slot(d.index);
        }
        for c in &sc.copiers {
            w.slot(c.machine).copier = Some(Copier::new(*c));
        }
        w
    }

    pub fn slot(&mut self, i: usize) -> &mut MachineSlot {
        self.machines.entry(i).or_insert_with(|| MachineSlot::new(i))
    }

    /// Honest functionals and scripted machine axioms due at stage `s`.
    /// Returns warnings for honest axioms that clash with scripted ones.
    pub fn scripted_step(
        &mut self,
        s: usize,
        a: &BuiltGraph,
        b: &BuiltGraph,
        g: &GenericApprox,
        alloc: &mut ParamAllocator,
    ) -> Vec<String> {
        let mut warnings = Vec::new();
        for h in &self.honest {
            if s > h.delay {
                let pair = s - h.delay;
                let phi = self.phi.get_mut(&h.index).expect("created with the directive");
                if let Err(e) = phi.add_honest_pair(a, b, pair, s) {
                    warnings.push(format!("honest phi {} on pair {pair}: {e}", h.index));
                }
            }
        }
        if let Some(ds) = self.mi_by_stage.get(&s).cloned() {
            for d in ds {
                let snap = OracleSnapshot::from_bits(&d.oracle);
                alloc.observe(snap.len);
                self.slot(d.index).add_axiom(&snap, s, (d.x, d.y), g);
            }
        }
        warnings
    }

    /// Machines with a copier, ascending.
    pub fn copier_machines(&self) -> Vec<usize> {
        self.machines
            .iter()
            .filter(|(_, m)| m.copier.is_some())
            .map(|(i, _)| *i)
            .collect()
    }

    pub fn copier_pending(&mut self, i: usize, a: &BuiltGraph, g: &GenericApprox, s: usize) -> Vec<MEdge> {
        let slot = self.slot(i);
        slot.sync(g, s);
        let mut copier = slot.copier.take().expect("copier machine");
        let view = &slot.view;
        let pending = copier.pending(&|e| view.contains(e), a, g, s);
        slot.copier = Some(copier);
        pending
    }

    pub fn copier_apply(&mut self, i: usize, edges: &[MEdge], use_len: usize, g: &GenericApprox, s: usize) {
        let snap = g.prefix_snapshot(use_len);
        let slot = self.slot(i);
        for e in edges {
            slot.add_axiom(&snap, s, *e, g);
        }
    }

    pub fn end_stage(&mut self, g: &GenericApprox, s: usize) {
        for slot in self.machines.values_mut() {
            slot.end_stage(g, s);
        }
    }
}

/// Everything the trace must let a replay reconstruct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSummary {
    pub stage: usize,
    pub a: BuiltGraph,
    pub b: BuiltGraph,
    pub g_history: Vec<Vec<usize>>,
    pub nodes: BTreeMap<TreeAddress, NodeSummary>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeSummary {
    pub last_outcome: Option<Outcome>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub found_tau: Option<Bits>,
    pub challenge: Option<(TreeAddress, usize)>,
    /// `(pair, use)` of every computation, in definition order.
    pub computations: Vec<(usize, usize)>,
}

pub struct Engine {
    pub scenario: Scenario,
    pub stage: usize,
    pub a: BuiltGraph,
    pub b: BuiltGraph,
    pub g: GenericApprox,
    pub alloc: ParamAllocator,
    pub world: World,
    pub nodes: FxHashMap<TreeAddress, NodeRecord>,
    pub trace: Vec<TraceEvent>,
    pub paths: Vec<TreeAddress>,
}

impl Engine {
    pub fn new(scenario: &Scenario) -> Engine {
        Engine {
            scenario: scenario.clone(),
            stage: 0,
            a: BuiltGraph::new(Side::A),
            b: BuiltGraph::new(Side::B),
            g: GenericApprox::new(),
            alloc: ParamAllocator::new(scenario.include_node_ids),
            world: World::from_scenario(scenario),
            nodes: FxHashMap::default(),
            trace: Vec::new(),
            paths: Vec::new(),
        }
    }

    pub(crate) fn emit(&mut self, kind: EventKind) {
        self.trace.push(TraceEvent {
            stage: self.stage,
            kind,
        });
    }

    /// `fresh_large` against the current state.
    pub(crate) fn fresh_large(&mut self) -> usize {
        let max_node = self
            .a
            .max_node_id()
            .into_iter()
            .chain(self.b.max_node_id())
            .map(|x| x.0 as usize)
            .max();
        self.alloc.fresh_large(self.stage, self.g.support(), max_node)
    }

    /// Runs one stage and returns `π_s`.
    pub fn run_stage(&mut self) -> TreeAddress {
        let s = self.stage + 1;
        self.stage = s;
        self.g.begin_stage(s);

        add_stage_components(&mut self.a, &mut self.b, s).expect("pair s is new");
        self.emit(EventKind::ComponentAdded { pair: s });

        let warnings = self
            .world
            .scripted_step(s, &self.a, &self.b, &self.g, &mut self.alloc);
        for message in warnings {
            self.emit(EventKind::Warning { message });
        }
        for i in self.world.copier_machines() {
            let pending = self.world.copier_pending(i, &self.a, &self.g, s);
            let use_len = 1 + self.g.support().max(self.alloc.max_seen());
            if !pending.is_empty() {
                self.alloc.observe(use_len);
                self.world.copier_apply(i, &pending, use_len, &self.g, s);
            }
            self.emit(EventKind::CopierEmitted {
                machine: i,
                use_len,
                count: pending.len(),
            });
        }

        let mut path = TreeAddress::root();
        let mut anc = Ancestry {
            rp_max: Some(0),
            s_inf: Vec::new(),
        };
        while path.level() < s {
            let o = self.act_with(&path, &anc);
            self.extend_ancestry(&mut anc, &path, o);
            path.0.push(o);
        }

        self.initialize_right_of(&path);

        self.g.end_stage(s);
        self.world.end_stage(&self.g, s);
        self.emit(EventKind::PathComputed { path: path.clone() });
        self.paths.push(path.clone());
        path
    }

    pub fn run(&mut self, stages: usize) -> &[TraceEvent] {
        for _ in 0..stages {
            self.run_stage();
        }
        &self.trace
    }

    /// Initializes every node strictly right of `path`, homogenizing the
    /// pairs of diagonalized P nodes among them.
    fn initialize_right_of(&mut self, path: &TreeAddress) {
        let mut victims: Vec<TreeAddress> = self.nodes.keys().filter(|b| path.left_of(b)).cloned().collect();
        victims.sort();
        for beta in victims {
            let rec = self.nodes.remove(&beta).expect("listed above");
            match &rec.state {
                NodeState::RP(st) if matches!(rec.requirement, crate::strategy::Requirement::P(_)) => {
                    if let Some(n) = st.n {
                        if self.a.is_diagonalized_only(n) || self.b.is_diagonalized_only(n) {
                            self.homogenize(n);
                        }
                    }
                }
                NodeState::S(st) => {
                    if st.challenge.is_some() {
                        self.emit(EventKind::ChallengeCleared {
                            target: beta.clone(),
                            reason: "target initialized".into(),
                        });
                    }
                }
                _ => {}
            }
            self.emit(EventKind::Initialized { node: beta.clone() });
            let mut held: Vec<TreeAddress> = self
                .nodes
                .iter()
                .filter(|(_, r)| match &r.state {
                    NodeState::S(st) => st.challenge.as_ref().is_some_and(|c| c.challenger == beta),
                    _ => false,
                })
                .map(|(addr, _)| addr.clone())
                .collect();
            held.sort();
            for target in held {
                if let Some(NodeState::S(st)) = self.nodes.get_mut(&target).map(|r| &mut r.state) {
                    st.challenge = None;
                }
                self.emit(EventKind::ChallengeCleared {
                    target,
                    reason: "challenger initialized".into(),
                });
            }
        }
    }

    pub(crate) fn homogenize(&mut self, n: usize) {
        for side in [Side::A, Side::B] {
            let graph = match side {
                Side::A => &mut self.a,
                Side::B => &mut self.b,
            };
            match graph.homogenize(n) {
                Ok(Homogenized::Applied) => self.emit(EventKind::Homogenized { graph: side, pair: n }),
                Ok(Homogenized::SkippedBase) => self.emit(EventKind::Warning {
                    message: format!("pair {n} of {side} is base; not homogenized"),
                }),
                Ok(Homogenized::AlreadyHomogenized) => {}
                Err(e) => self.emit(EventKind::Warning { message: e.to_string() }),
            }
        }
    }

    pub fn summary(&self) -> StateSummary {
        let nodes = self
            .nodes
            .iter()
            .map(|(addr, rec)| {
                let mut ns = NodeSummary {
                    last_outcome: rec.last_outcome,
                    ..Default::default()
                };
                match &rec.state {
                    NodeState::RP(st) => {
                        ns.m = st.m;
                        ns.n = st.n;
                        ns.found_tau = st.found_tau.clone();
                    }
                    NodeState::S(st) => {
                        ns.n = Some(st.n);
                        ns.challenge = st.challenge.as_ref().map(|c| (c.challenger.clone(), c.bound));
                        ns.computations = st.computations.iter().map(|c| (c.pair, c.use_value())).collect();
                    }
                }
                (addr.clone(), ns)
            })
            .collect();
        StateSummary {
            stage: self.stage,
            a: self.a.clone(),
            b: self.b.clone(),
            g_history: self.g.history().to_vec(),
            nodes,
        }
    }
}

/// Runs a scenario for `stages` stages (its own limit when `None`).
pub fn run_scenario(sc: &Scenario, stages: Option<usize>) -> Engine {
    let n = stages.or(sc.stages).unwrap_or(0);
    let mut e = Engine::new(sc);
    e.run(n);
    e
}

/// Finite-horizon estimate of the true path: starting from the root, extend
/// by the least outcome seen at that level among final-third paths through
/// the current prefix.
pub fn stable_prefix(paths: &[TreeAddress]) -> TreeAddress {
    if paths.is_empty() {
        return TreeAddress::root();
    }
    let finals = &paths[paths.len() * 2 / 3..];
    let mut alpha = TreeAddress::root();
    loop {
        let level = alpha.level();
        let next = finals
            .iter()
            .filter(|p| p.level() > level && alpha.is_prefix_of(p))
            .map(|p| p.0[level])
            .min();
        match next {
            Some(o) => alpha = alpha.child(o),
            None => return alpha,
        }
    }
}
