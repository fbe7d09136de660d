//! Rebuilding engine state from a trace alone.
//!
//! Graphs, `G` and node parameters come straight from the events. With a
//! scenario the adversary world is stepped alongside, so machine views and
//! copier output can be cross-checked against `CopierEmitted`.

use rustc_hash::FxHashMap;

use crate::bits::Bits;
use crate::engine::{NodeSummary, StateSummary, World};
use crate::generic::GenericApprox;
use crate::graph::{add_stage_components, BuiltGraph, Side};
use crate::scenario::Scenario;
use crate::strategy::{Assignment, Computation, Outcome, ParamAllocator, Requirement, TreeAddress};
use crate::trace::{EventKind, Param, TraceEvent};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("stage {stage}: {message}")]
pub struct ReplayError {
    pub stage: usize,
    pub message: String,
}

/// What the trace says about one tree node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayNode {
    /// Distinguishes successive records at one address.
    pub id: u64,
    pub requirement: Requirement,
    pub last_outcome: Option<Outcome>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    /// Stage at which `n` was last set.
    pub n_defined_at: Option<usize>,
    pub found_tau: Option<Bits>,
    pub challenge: Option<(TreeAddress, usize)>,
    pub computations: Vec<Computation>,
}

impl ReplayNode {
    fn new(id: u64, requirement: Requirement) -> Self {
        ReplayNode {
            id,
            requirement,
            last_outcome: None,
            m: None,
            // S nodes start out mapping pair 1
            n: requirement.is_s().then_some(1),
            n_defined_at: None,
            found_tau: None,
            challenge: None,
            computations: Vec::new(),
        }
    }

    /// The newest computation on `pair` whose snapshot `g` still matches.
    pub fn valid_computation(&self, pair: usize, g: &GenericApprox) -> Option<&Computation> {
        self.computations
            .iter()
            .rev()
            .find(|c| c.pair == pair && g.snapshot_matches(&c.snapshot))
    }
}

pub struct Replayer {
    pub stage: usize,
    pub a: BuiltGraph,
    pub b: BuiltGraph,
    pub g: GenericApprox,
    pub nodes: FxHashMap<TreeAddress, ReplayNode>,
    pub paths: Vec<TreeAddress>,
    assignment: Assignment,
    world: Option<World>,
    next_id: u64,
}

impl Replayer {
    /// A fresh replayer. Node kinds follow the scenario's assignment, or the
    /// default one without a scenario.
    pub fn new(scenario: Option<&Scenario>) -> Self {
        let mut r = Replayer::bare(scenario.map(|s| s.assignment.clone()).unwrap_or_default());
        r.world = scenario.map(World::from_scenario);
        r
    }

    /// A replayer that tracks graphs, `G` and nodes but not the adversaries.
    pub fn bare(assignment: Assignment) -> Self {
        Replayer {
            stage: 0,
            a: BuiltGraph::new(Side::A),
            b: BuiltGraph::new(Side::B),
            g: GenericApprox::new(),
            nodes: FxHashMap::default(),
            paths: Vec::new(),
            assignment,
            world: None,
            next_id: 0,
        }
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    fn err(&self, message: impl Into<String>) -> ReplayError {
        ReplayError {
            stage: self.stage,
            message: message.into(),
        }
    }

    fn node(&mut self, addr: &TreeAddress) -> &mut ReplayNode {
        if self.nodes.contains_key(addr) {
            return self.nodes.get_mut(addr).expect("just checked");
        }
        let req = self.assignment.requirement_of(addr.level());
        let id = &mut self.next_id;
        self.nodes.entry(addr.clone()).or_insert_with(|| {
            *id += 1;
            ReplayNode::new(*id, req)
        })
    }

    fn graph(&mut self, side: Side) -> &mut BuiltGraph {
        match side {
            Side::A => &mut self.a,
            Side::B => &mut self.b,
        }
    }

    pub fn apply(&mut self, e: &TraceEvent) -> Result<(), ReplayError> {
        if e.stage < self.stage {
            return Err(self.err(format!("event for stage {} after stage {}", e.stage, self.stage)));
        }
        if e.stage > self.stage {
            if !matches!(e.kind, EventKind::ComponentAdded { .. }) {
                return Err(ReplayError {
                    stage: e.stage,
                    message: format!("stage opens with {} instead of ComponentAdded", e.kind.name()),
                });
            }
            self.stage = e.stage;
            self.g.begin_stage(e.stage);
        }
        let s = self.stage;
        match &e.kind {
            EventKind::ComponentAdded { pair } => {
                add_stage_components(&mut self.a, &mut self.b, *pair).map_err(|x| self.err(x.to_string()))?;
                if let Some(w) = self.world.as_mut() {
                    // allocator observations do not feed back into replay
                    let mut alloc = ParamAllocator::new(false);
                    w.scripted_step(s, &self.a, &self.b, &self.g, &mut alloc);
                }
            }
            EventKind::Diagonalized { graph, pair } => {
                let r = self.graph(*graph).diagonalize(*pair);
                r.map_err(|x| self.err(x.to_string()))?;
            }
            EventKind::Homogenized { graph, pair } => {
                let r = self.graph(*graph).homogenize(*pair);
                r.map_err(|x| self.err(x.to_string()))?;
            }
            EventKind::GTailSet { node, tau } => {
                self.g.set_tail(tau);
                self.node(node).found_tau = Some(tau.clone());
            }
            EventKind::GBitSet { pos, .. } => {
                self.g.enumerate(*pos);
            }
            EventKind::ParamDefined { node, param, value } => {
                let rec = self.node(node);
                match param {
                    Param::M => rec.m = *value,
                    Param::N => {
                        rec.n = *value;
                        rec.n_defined_at = Some(s);
                    }
                }
            }
            EventKind::OutcomeTaken { node, outcome } => {
                self.node(node).last_outcome = Some(*outcome);
            }
            EventKind::ComputationDefined {
                node,
                pair,
                snapshot,
                image_edge_use_max,
                map,
            } => {
                let c = Computation {
                    pair: *pair,
                    node_map: map.clone(),
                    snapshot: snapshot.clone(),
                    defined_at: s,
                    image_edge_use_max: *image_edge_use_max,
                };
                self.node(node).computations.push(c);
            }
            EventKind::ChallengeIssued {
                challenger,
                target,
                bound,
                ..
            } => {
                self.node(target).challenge = Some((challenger.clone(), *bound));
            }
            EventKind::ChallengeCleared { target, .. } => {
                if let Some(rec) = self.nodes.get_mut(target) {
                    rec.challenge = None;
                }
            }
            EventKind::Initialized { node } => {
                self.nodes.remove(node);
            }
            EventKind::CopierEmitted { machine, use_len, count } => {
                if let Some(w) = self.world.as_mut() {
                    let pending = w.copier_pending(*machine, &self.a, &self.g, s);
                    if pending.len() != *count {
                        return Err(self.err(format!(
                            "copier {machine} has {} pending edges, trace says {count}",
                            pending.len()
                        )));
                    }
                    if !pending.is_empty() {
                        w.copier_apply(*machine, &pending, *use_len, &self.g, s);
                    }
                }
            }
            EventKind::Warning { .. } => {}
            EventKind::PathComputed { path } => {
                // nodes whose outcome did not change were not re-announced,
                // and a node's first outcome always is
                self.g.end_stage(s);
                if let Some(w) = self.world.as_mut() {
                    w.end_stage(&self.g, s);
                }
                self.paths.push(path.clone());
            }
        }
        Ok(())
    }

    /// The same summary the engine reports.
    pub fn summary(&self) -> StateSummary {
        let nodes = self
            .nodes
            .iter()
            .map(|(addr, rec)| {
                let s = rec.requirement.is_s();
                let ns = NodeSummary {
                    last_outcome: rec.last_outcome,
                    m: if s { None } else { rec.m },
                    n: rec.n,
                    found_tau: rec.found_tau.clone(),
                    challenge: rec.challenge.clone(),
                    computations: rec.computations.iter().map(|c| (c.pair, c.use_value())).collect(),
                };
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

/// Replays a whole trace.
pub fn replay(events: &[TraceEvent], scenario: Option<&Scenario>) -> Result<Replayer, ReplayError> {
    let mut r = Replayer::new(scenario);
    for e in events {
        r.apply(e)?;
    }
    Ok(r)
}
