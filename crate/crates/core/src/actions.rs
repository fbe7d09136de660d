//! What R, P and S nodes do when they are eligible to act.

use std::collections::BTreeMap;

use rustc_hash::FxHashSet;

use crate::adversary::phi_check_pair;
use crate::engine::Engine;
use crate::graph::{diagonalize_pair, NodeId, Parity, Side};
use crate::machine::{find_in_view, MNode, PairCopy};
use crate::strategy::{
    least_unmapped_from, Challenge, Computation, NodeRecord, NodeState, Outcome, Phase, RPState, Requirement,
    SState, TreeAddress,
};
use crate::trace::{EventKind, Param};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("node {node} is {actual}, not {expected}")]
pub struct WrongKind {
    pub node: TreeAddress,
    pub expected: char,
    pub actual: Requirement,
}

/// What a node needs to know about the nodes above it on the current path.
#[derive(Clone, Debug, Default)]
pub(crate) struct Ancestry {
    /// Largest `n` of R/P ancestors (0 if none); `None` while one is undefined.
    pub rp_max: Option<usize>,
    /// S ancestors `γ` with `γ⌢∞` on the path, top-down.
    pub s_inf: Vec<TreeAddress>,
}

impl Engine {
    /// Ancestry of `addr` read off the stored node states.
    pub(crate) fn ancestry_of(&self, addr: &TreeAddress) -> Ancestry {
        let mut anc = Ancestry {
            rp_max: Some(0),
            s_inf: Vec::new(),
        };
        for level in 0..addr.level() {
            let beta = addr.prefix(level);
            self.extend_ancestry(&mut anc, &beta, addr.0[level]);
        }
        anc
    }

    /// Folds node `beta`, which took outcome `o`, into `anc`.
    pub(crate) fn extend_ancestry(&self, anc: &mut Ancestry, beta: &TreeAddress, o: Outcome) {
        match self.nodes.get(beta).map(|r| &r.state) {
            Some(NodeState::RP(st)) => anc.rp_max = anc.rp_max.zip(st.n).map(|(m, n)| m.max(n)),
            Some(NodeState::S(_)) if o == Outcome::Inf => anc.s_inf.push(beta.clone()),
            _ => {}
        }
    }

    /// Lets the node at `addr` act and records its outcome.
    pub(crate) fn act(&mut self, addr: &TreeAddress) -> Outcome {
        let anc = self.ancestry_of(addr);
        self.act_with(addr, &anc)
    }

    pub(crate) fn act_with(&mut self, addr: &TreeAddress, anc: &Ancestry) -> Outcome {
        let req = self.scenario.assignment.requirement_of(addr.level());
        let mut rec = self.nodes.remove(addr).unwrap_or_else(|| NodeRecord {
            requirement: req,
            state: match req {
                Requirement::S(_) => NodeState::S(SState::fresh()),
                _ => NodeState::RP(RPState::fresh()),
            },
            last_outcome: None,
        });
        let first = rec.last_outcome.is_none();
        let outcome = match (&mut rec.state, req) {
            (NodeState::RP(st), Requirement::R(j)) => self.act_r(addr, anc, j, st),
            (NodeState::RP(st), Requirement::P(e)) => self.act_p(addr, anc, e, st),
            (NodeState::S(st), Requirement::S(i)) => self.act_s(addr, i, st, first),
            _ => unreachable!("record kind follows the assignment"),
        };
        if rec.last_outcome != Some(outcome) {
            self.emit(EventKind::OutcomeTaken {
                node: addr.clone(),
                outcome,
            });
        }
        rec.last_outcome = Some(outcome);
        self.nodes.insert(addr.clone(), rec);
        outcome
    }

    /// Acts with the state of an R node, rejecting other kinds.
    pub fn act_r_checked(&mut self, addr: &TreeAddress) -> Result<Outcome, WrongKind> {
        self.checked(addr, 'R')
    }

    pub fn act_p_checked(&mut self, addr: &TreeAddress) -> Result<Outcome, WrongKind> {
        self.checked(addr, 'P')
    }

    pub fn act_s_checked(&mut self, addr: &TreeAddress) -> Result<Outcome, WrongKind> {
        self.checked(addr, 'S')
    }

    fn checked(&mut self, addr: &TreeAddress, expected: char) -> Result<Outcome, WrongKind> {
        let actual = self.scenario.assignment.requirement_of(addr.level());
        if actual.letter() != expected {
            return Err(WrongKind {
                node: addr.clone(),
                expected,
                actual,
            });
        }
        Ok(self.act(addr))
    }

    /// The currently valid computation of S node `gamma` on `pair`.
    fn valid_computation(&self, gamma: &TreeAddress, pair: usize) -> Option<&Computation> {
        match self.nodes.get(gamma).map(|r| &r.state) {
            Some(NodeState::S(st)) => st
                .computations
                .iter()
                .rev()
                .find(|c| c.pair == pair && self.g.snapshot_matches(&c.snapshot)),
            _ => None,
        }
    }

    fn converged(&self, anc: &Ancestry, m: usize) -> bool {
        m == 0 || anc.s_inf.iter().all(|gamma| self.valid_computation(gamma, m).is_some())
    }

    /// Cases 1 and 2 shared by R and P. Returns `None` once armed.
    fn rp_wait(&mut self, addr: &TreeAddress, anc: &Ancestry, st: &mut RPState) -> Option<Outcome> {
        st.last_act = self.stage;
        if !matches!(st.phase, Phase::Fresh | Phase::WaitingConvergence) {
            return None;
        }
        let first = st.phase == Phase::Fresh;
        if st.m.is_none() {
            if let Some(m) = anc.rp_max {
                st.m = Some(m);
                self.emit(EventKind::ParamDefined {
                    node: addr.clone(),
                    param: Param::M,
                    value: Some(m),
                });
            }
        }
        match st.m {
            Some(m) if !first && self.converged(anc, m) => {
                let n = self.fresh_large();
                st.n = Some(n);
                st.phase = Phase::Armed;
                self.emit(EventKind::ParamDefined {
                    node: addr.clone(),
                    param: Param::N,
                    value: Some(n),
                });
                Some(Outcome::Wait(1))
            }
            _ => {
                st.phase = Phase::WaitingConvergence;
                Some(Outcome::Wait(0))
            }
        }
    }

    fn rp_after_fire(st: &mut RPState) -> Outcome {
        st.phase = Phase::Succeeded;
        Outcome::Succ
    }

    pub(crate) fn act_r(&mut self, addr: &TreeAddress, anc: &Ancestry, j: usize, st: &mut RPState) -> Outcome {
        if let Some(o) = self.rp_wait(addr, anc, st) {
            return o;
        }
        match st.phase {
            Phase::Armed => {
                let n = st.n.expect("armed nodes have n");
                let sigma = self.g.prefix_bits(n);
                let tau = self.world.ce.get(&j).and_then(|w| w.find_extension(self.stage, &sigma));
                let Some(tau) = tau else {
                    return Outcome::Wait(1);
                };
                self.g.set_tail(&tau);
                self.alloc.observe(self.g.support());
                self.emit(EventKind::GTailSet {
                    node: addr.clone(),
                    tau: tau.clone(),
                });
                st.found_tau = Some(tau);
                st.phase = Phase::Fired;
                Outcome::Wait(2)
            }
            _ => Self::rp_after_fire(st),
        }
    }

    pub(crate) fn act_p(&mut self, addr: &TreeAddress, anc: &Ancestry, e: usize, st: &mut RPState) -> Outcome {
        if let Some(o) = self.rp_wait(addr, anc, st) {
            return o;
        }
        match st.phase {
            Phase::Armed => {
                let n = st.n.expect("armed nodes have n");
                let ok = self.a.has_pair(n)
                    && self
                        .world
                        .phi
                        .get(&e)
                        .is_some_and(|phi| phi_check_pair(phi, self.stage, &self.a, &self.b, n));
                if !ok {
                    return Outcome::Wait(1);
                }
                diagonalize_pair(&mut self.a, &mut self.b, n).expect("fresh pairs are base");
                for side in [Side::A, Side::B] {
                    self.emit(EventKind::Diagonalized { graph: side, pair: n });
                }
                // decide who is challenged before touching G
                let targets: Vec<(TreeAddress, usize)> = anc
                    .s_inf
                    .iter()
                    .filter_map(|gamma| {
                        let u = self.valid_computation(gamma, n)?.use_value();
                        Some((gamma.clone(), u))
                    })
                    .collect();
                for (gamma, u) in targets {
                    self.g.enumerate(u);
                    self.alloc.observe(self.g.support());
                    self.emit(EventKind::GBitSet {
                        node: addr.clone(),
                        pos: u,
                    });
                    if let Some(NodeState::S(s)) = self.nodes.get_mut(&gamma).map(|r| &mut r.state) {
                        s.challenge = Some(Challenge {
                            challenger: addr.clone(),
                            bound: n,
                            fresh: true,
                        });
                    }
                    self.emit(EventKind::ChallengeIssued {
                        challenger: addr.clone(),
                        target: gamma,
                        bound: n,
                        use_: u,
                    });
                }
                st.phase = Phase::Fired;
                Outcome::Wait(2)
            }
            _ => Self::rp_after_fire(st),
        }
    }

    fn set_s_n(&mut self, addr: &TreeAddress, st: &mut SState, n: usize) {
        if st.n != n {
            st.n = n;
            self.emit(EventKind::ParamDefined {
                node: addr.clone(),
                param: Param::N,
                value: Some(n),
            });
        }
    }

    pub(crate) fn act_s(&mut self, addr: &TreeAddress, i: usize, st: &mut SState, first: bool) -> Outcome {
        if first {
            self.emit(EventKind::ParamDefined {
                node: addr.clone(),
                param: Param::N,
                value: Some(st.n),
            });
            return Outcome::Wait(0);
        }
        let mut valid = st.valid_by_pair(|snap| self.g.snapshot_matches(snap));
        if let Some(ch) = st.challenge.as_mut() {
            if ch.fresh {
                ch.fresh = false;
                let n = least_unmapped_from(&valid, 1);
                self.set_s_n(addr, st, n);
            }
            self.extend(addr, i, st, &mut valid);
            let bound = st.challenge.as_ref().expect("still challenged").bound;
            if st.n > bound {
                st.challenge = None;
                self.emit(EventKind::ChallengeCleared {
                    target: addr.clone(),
                    reason: "bound exceeded".into(),
                });
                Outcome::Inf
            } else {
                Outcome::Wait(st.n)
            }
        } else {
            if (1..st.n).any(|p| !valid.contains_key(&p)) {
                let n = least_unmapped_from(&valid, 1);
                self.set_s_n(addr, st, n);
            }
            if self.extend(addr, i, st, &mut valid) {
                Outcome::Inf
            } else {
                Outcome::Wait(st.n)
            }
        }
    }

    /// The extension module: map pair `n` onto the oldest, lex-least copy.
    fn extend(&mut self, addr: &TreeAddress, i: usize, st: &mut SState, valid: &mut BTreeMap<usize, usize>) -> bool {
        let n = st.n;
        if !self.a.has_pair(n) {
            return false;
        }
        let even = self.a.component_shape(n, Parity::Even).expect("pair exists");
        let odd = self.a.component_shape(n, Parity::Odd).expect("pair exists");
        let stage = self.stage;
        let slot = self.world.slot(i);
        slot.sync(&self.g, stage);
        if slot.view.edge_count() == 0 {
            return false;
        }
        let live: FxHashSet<usize> = valid.values().copied().collect();
        let excluded = |x: MNode| st.image_owners(x).iter().any(|k| live.contains(k));
        let Some(copy) = find_in_view(&slot.view, &slot.ages, stage, (&even, &odd), &excluded) else {
            return false;
        };
        let node_map = self.copy_map(n, &copy);
        let image_edge_use_max = {
            let slot = &self.world.machines[&i];
            copy.even
                .edges()
                .into_iter()
                .chain(copy.odd.edges())
                .filter_map(|e| slot.machine.edge_use_len(e, &self.g, stage))
                .max()
                .unwrap_or(0)
        };
        let u = self.fresh_large();
        let comp = Computation {
            pair: n,
            node_map,
            snapshot: self.g.prefix_snapshot(u + 1),
            defined_at: stage,
            image_edge_use_max,
        };
        self.emit(EventKind::ComputationDefined {
            node: addr.clone(),
            pair: n,
            snapshot: comp.snapshot.clone(),
            image_edge_use_max,
            map: comp.node_map.clone(),
        });
        st.push(comp);
        valid.insert(n, st.computations.len() - 1);
        let next = least_unmapped_from(valid, n + 1);
        self.set_s_n(addr, st, next);
        true
    }

    /// Component nodes of pair `n` onto the found copy, loop by loop.
    fn copy_map(&self, n: usize, copy: &PairCopy) -> Vec<(NodeId, MNode)> {
        let mut map = Vec::new();
        for (parity, cc) in [(Parity::Even, &copy.even), (Parity::Odd, &copy.odd)] {
            let comp = self.a.component(n, parity).expect("pair exists");
            map.push((comp.root, cc.root));
            for lp in &comp.loops {
                let cycle = cc
                    .cycles
                    .iter()
                    .find(|c| c.len() + 1 == lp.length)
                    .expect("copy has every loop length");
                map.extend(lp.interior.iter().copied().zip(cycle.iter().copied()));
            }
        }
        map
    }
}
