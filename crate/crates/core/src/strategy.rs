//! Outcomes, tree addresses, requirement assignment and per-node state.
//!
//! The action procedures themselves live in [`crate::actions`]; they need
//! the whole engine state.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::{Bits, OracleSnapshot};
use crate::graph::NodeId;
use crate::machine::MNode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Inf,
    Succ,
    Wait(usize),
}

impl Outcome {
    /// Position in the outcome order: `Inf` least, `Wait(n)` for `n >= 3`
    /// descending between `Inf` and `Succ`, then `Wait(2) < Wait(1) < Wait(0)`.
    pub fn rank(self) -> (u8, i64) {
        match self {
            Outcome::Inf => (0, 0),
            Outcome::Wait(n) if n >= 3 => (1, -(n as i64)),
            Outcome::Succ => (2, 0),
            Outcome::Wait(2) => (3, 0),
            Outcome::Wait(1) => (4, 0),
            Outcome::Wait(_) => (5, 0),
        }
    }
}

impl Ord for Outcome {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Outcome {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Inf => write!(f, "inf"),
            Outcome::Succ => write!(f, "s"),
            Outcome::Wait(n) => write!(f, "w{n}"),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("bad outcome or address `{0}`")]
pub struct ParseOutcomeError(pub String);

impl FromStr for Outcome {
    type Err = ParseOutcomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" => Ok(Outcome::Inf),
            "s" => Ok(Outcome::Succ),
            _ => s
                .strip_prefix('w')
                .and_then(|n| n.parse().ok())
                .map(Outcome::Wait)
                .ok_or_else(|| ParseOutcomeError(s.to_string())),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A node of the tree of strategies: the outcomes leading to it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeAddress(pub Vec<Outcome>);

impl TreeAddress {
    pub fn root() -> Self {
        TreeAddress(Vec::new())
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, o: Outcome) -> Self {
        let mut v = self.0.clone();
        v.push(o);
        TreeAddress(v)
    }

    pub fn prefix(&self, len: usize) -> TreeAddress {
        TreeAddress(self.0[..len.min(self.0.len())].to_vec())
    }

    /// `self ⊆ other`.
    pub fn is_prefix_of(&self, other: &TreeAddress) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Whether `self <_L other`: at the first coordinate where they differ,
    /// `self` has the smaller outcome. Comparable addresses are never left
    /// of each other.
    pub fn left_of(&self, other: &TreeAddress) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .find(|(x, y)| x != y)
            .is_some_and(|(x, y)| x < y)
    }

    /// `self ≤_L other`: left of or a prefix of.
    pub fn left_or_prefix(&self, other: &TreeAddress) -> bool {
        self.is_prefix_of(other) || self.left_of(other)
    }
}

impl fmt::Display for TreeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

impl FromStr for TreeAddress {
    type Err = ParseOutcomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(TreeAddress::root());
        }
        s.split('.').map(str::parse).collect::<Result<_, _>>().map(TreeAddress)
    }
}

impl Serialize for TreeAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TreeAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    R(usize),
    P(usize),
    S(usize),
}

impl Requirement {
    pub fn letter(self) -> char {
        match self {
            Requirement::R(_) => 'R',
            Requirement::P(_) => 'P',
            Requirement::S(_) => 'S',
        }
    }

    pub fn index(self) -> usize {
        match self {
            Requirement::R(i) | Requirement::P(i) | Requirement::S(i) => i,
        }
    }

    pub fn is_s(self) -> bool {
        matches!(self, Requirement::S(_))
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter(), self.index())
    }
}

/// Level → requirement, with optional per-level overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub overrides: BTreeMap<usize, Requirement>,
}

impl Assignment {
    pub fn requirement_of(&self, level: usize) -> Requirement {
        self.overrides
            .get(&level)
            .copied()
            .unwrap_or_else(|| requirement_of(level))
    }
}

/// Default round-robin: `S_k, P_k, R_k` at levels `3k, 3k+1, 3k+2`.
pub fn requirement_of(level: usize) -> Requirement {
    let k = level / 3;
    match level % 3 {
        0 => Requirement::S(k),
        1 => Requirement::P(k),
        _ => Requirement::R(k),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Fresh,
    WaitingConvergence,
    Armed,
    Fired,
    Succeeded,
}

/// State shared by R and P strategies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RPState {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub phase: Phase,
    pub found_tau: Option<Bits>,
    /// Stage of the last act.
    pub last_act: usize,
}

impl RPState {
    pub fn fresh() -> Self {
        RPState {
            m: None,
            n: None,
            phase: Phase::Fresh,
            found_tau: None,
            last_act: 0,
        }
    }
}

/// One `f^G` computation on a pair of components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Computation {
    pub pair: usize,
    pub node_map: Vec<(NodeId, MNode)>,
    pub snapshot: OracleSnapshot,
    pub defined_at: usize,
    pub image_edge_use_max: usize,
}

impl Computation {
    pub fn use_value(&self) -> usize {
        self.snapshot.len.saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Challenge {
    pub challenger: TreeAddress,
    pub bound: usize,
    /// Set until the challenged node's first act after the challenge.
    pub fresh: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SState {
    /// The next pair to map; 1 when nothing is mapped.
    pub n: usize,
    pub computations: Vec<Computation>,
    pub challenge: Option<Challenge>,
    /// Machine node → computations whose image contains it.
    owners: FxHashMap<MNode, Vec<usize>>,
}

impl SState {
    pub fn fresh() -> Self {
        SState {
            n: 1,
            computations: Vec::new(),
            challenge: None,
            owners: FxHashMap::default(),
        }
    }

    pub fn push(&mut self, c: Computation) {
        let k = self.computations.len();
        for (_, x) in &c.node_map {
            self.owners.entry(*x).or_default().push(k);
        }
        self.computations.push(c);
    }

    pub fn image_owners(&self, x: MNode) -> &[usize] {
        self.owners.get(&x).map_or(&[], |v| v.as_slice())
    }

    /// The valid computation (if any) per pair under the given validity test.
    pub fn valid_by_pair(&self, valid: impl Fn(&OracleSnapshot) -> bool) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for (i, c) in self.computations.iter().enumerate() {
            if valid(&c.snapshot) {
                out.insert(c.pair, i);
            }
        }
        out
    }
}

/// Least pair `>= from` missing from `mapped`.
pub fn least_unmapped_from(mapped: &BTreeMap<usize, usize>, from: usize) -> usize {
    let mut n = from.max(1);
    while mapped.contains_key(&n) {
        n += 1;
    }
    n
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeState {
    RP(RPState),
    S(SState),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub requirement: Requirement,
    pub state: NodeState,
    pub last_outcome: Option<Outcome>,
}

/// Source of "large" numbers shared by parameters, uses and copier uses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamAllocator {
    max_seen: usize,
    /// Also exceed every node id of the built graphs.
    pub include_node_ids: bool,
}

impl ParamAllocator {
    pub fn new(include_node_ids: bool) -> Self {
        ParamAllocator {
            max_seen: 0,
            include_node_ids,
        }
    }

    /// Registers a number that later values must exceed.
    pub fn observe(&mut self, v: usize) {
        self.max_seen = self.max_seen.max(v);
    }

    pub fn max_seen(&self) -> usize {
        self.max_seen
    }

    /// `1 + max(stage, every earlier value, G support[, max node id])`.
    pub fn fresh_large(&mut self, stage: usize, g_support: usize, max_node_id: Option<usize>) -> usize {
        let mut m = self.max_seen.max(stage).max(g_support);
        if self.include_node_ids {
            if let Some(id) = max_node_id {
                m = m.max(id);
            }
        }
        let v = m + 1;
        self.max_seen = v;
        v
    }
}
