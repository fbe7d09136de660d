//! Oracle graph machines `M_i^G`, their age index, the oldest/lex-least copy
//! search, and the canned faithful copier.
//!
//! A machine is a set of positive axioms `(σ, t, (x, y))`: edge `(x, y)` is
//! present at stage `s` under `G` iff some axiom has `t <= s` and `σ` is an
//! initial segment of `G`. Axioms sharing a snapshot and stage are stored as
//! one group, so validity is decided once per group.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::bits::OracleSnapshot;
use crate::generic::GenericApprox;
use crate::graph::{BuiltGraph, NodeId, Parity, Shape};

pub type MNode = u32;
pub type MEdge = (MNode, MNode);

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("age index for machine {machine} already updated at stage {last}, got stage {got}")]
    OutOfOrder { machine: usize, last: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomGroup {
    pub snapshot: OracleSnapshot,
    pub step_stage: usize,
    pub edges: Vec<MEdge>,
    members: FxHashSet<MEdge>,
}

impl AxiomGroup {
    pub fn is_valid(&self, g: &GenericApprox, stage: usize) -> bool {
        self.step_stage <= stage && g.snapshot_matches(&self.snapshot)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleGraphMachine {
    pub index: usize,
    groups: Vec<AxiomGroup>,
    group_of: FxHashMap<(OracleSnapshot, usize), usize>,
    by_edge: FxHashMap<MEdge, Vec<usize>>,
}

impl OracleGraphMachine {
    pub fn new(index: usize) -> Self {
        OracleGraphMachine {
            index,
            ..Default::default()
        }
    }

    /// Inserts an axiom. Returns the group id it landed in and whether the
    /// axiom was new.
    pub fn add_axiom(&mut self, snapshot: &OracleSnapshot, step_stage: usize, edge: MEdge) -> (usize, bool) {
        // batches share one snapshot: try the newest group before hashing
        let last = self
            .groups
            .len()
            .checked_sub(1)
            .filter(|gid| self.groups[*gid].step_stage == step_stage && self.groups[*gid].snapshot == *snapshot);
        let gid = match last.or_else(|| self.group_of.get(&(snapshot.clone(), step_stage)).copied()) {
            Some(gid) => gid,
            None => {
                let gid = self.groups.len();
                self.groups.push(AxiomGroup {
                    snapshot: snapshot.clone(),
                    step_stage,
                    edges: Vec::new(),
                    members: FxHashSet::default(),
                });
                self.group_of.insert((snapshot.clone(), step_stage), gid);
                gid
            }
        };
        let group = &mut self.groups[gid];
        if !group.members.insert(edge) {
            return (gid, false);
        }
        group.edges.push(edge);
        self.by_edge.entry(edge).or_default().push(gid);
        (gid, true)
    }

    pub fn groups(&self) -> &[AxiomGroup] {
        &self.groups
    }

    pub fn axiom_count(&self) -> usize {
        self.groups.iter().map(|g| g.edges.len()).sum()
    }

    /// Ids of the groups holding an axiom for `edge`.
    pub fn groups_for_edge(&self, edge: MEdge) -> &[usize] {
        self.by_edge.get(&edge).map_or(&[], |v| v.as_slice())
    }

    /// Whether `edge` has a currently valid axiom.
    pub fn edge_present(&self, edge: MEdge, g: &GenericApprox, stage: usize) -> bool {
        self.groups_for_edge(edge)
            .iter()
            .any(|gid| self.groups[*gid].is_valid(g, stage))
    }

    /// The use of `edge`: the shortest valid snapshot certifying it.
    pub fn edge_use_len(&self, edge: MEdge, g: &GenericApprox, stage: usize) -> Option<usize> {
        self.groups_for_edge(edge)
            .iter()
            .map(|gid| &self.groups[*gid])
            .filter(|grp| grp.is_valid(g, stage))
            .map(|grp| grp.snapshot.len)
            .min()
    }

    /// `M_i^G[s]`.
    pub fn edges_at(&self, g: &GenericApprox, stage: usize) -> BTreeSet<MEdge> {
        self.groups
            .iter()
            .filter(|grp| grp.is_valid(g, stage))
            .flat_map(|grp| grp.edges.iter().copied())
            .collect()
    }
}

/// `mi_edges` in free-function form.
pub fn mi_edges(m: &OracleGraphMachine, g: &GenericApprox, stage: usize) -> BTreeSet<MEdge> {
    m.edges_at(g, stage)
}

/// Continuous-presence stage of every edge present at the last update.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgeIndex {
    pub machine: usize,
    last_stage: Option<usize>,
    present_since: FxHashMap<MEdge, usize>,
}

impl AgeIndex {
    pub fn new(machine: usize) -> Self {
        AgeIndex {
            machine,
            ..Default::default()
        }
    }

    pub fn last_stage(&self) -> Option<usize> {
        self.last_stage
    }

    pub fn present_since(&self, edge: MEdge) -> Option<usize> {
        self.present_since.get(&edge).copied()
    }

    pub fn entries(&self) -> BTreeMap<MEdge, usize> {
        self.present_since.iter().map(|(e, t)| (*e, *t)).collect()
    }

    fn check_order(&self, stage: usize) -> Result<(), MachineError> {
        match self.last_stage {
            Some(last) if stage <= last => Err(MachineError::OutOfOrder {
                machine: self.machine,
                last,
                got: stage,
            }),
            _ => Ok(()),
        }
    }

    /// Records the edge set at the end of `stage`.
    pub fn update(&mut self, present: &BTreeSet<MEdge>, stage: usize) -> Result<(), MachineError> {
        self.check_order(stage)?;
        self.present_since.retain(|e, _| present.contains(e));
        for e in present {
            self.present_since.entry(*e).or_insert(stage);
        }
        self.last_stage = Some(stage);
        Ok(())
    }

    /// Same as [`AgeIndex::update`] but only inspects edges whose presence
    /// toggled since the previous update.
    pub fn update_toggled(
        &mut self,
        view: &MachineView,
        toggled: impl IntoIterator<Item = MEdge>,
        stage: usize,
    ) -> Result<(), MachineError> {
        self.check_order(stage)?;
        for e in toggled {
            if view.contains(e) {
                self.present_since.entry(e).or_insert(stage);
            } else {
                self.present_since.remove(&e);
            }
        }
        self.last_stage = Some(stage);
        Ok(())
    }

    /// Age of an edge that is present right now during `stage`.
    pub fn age_now(&self, edge: MEdge, stage: usize) -> usize {
        self.present_since(edge).unwrap_or(stage)
    }
}

/// `age_update`: recompute presence under `G` at `stage` and fold it into
/// the index.
pub fn age_update(
    idx: &mut AgeIndex,
    m: &OracleGraphMachine,
    g: &GenericApprox,
    stage: usize,
) -> Result<(), MachineError> {
    let present = m.edges_at(g, stage);
    idx.update(&present, stage)
}

/// Incrementally maintained `M_i^G[s]` with adjacency lists.
///
/// Nodes get dense indices on first sight so the cycle search can walk
/// plain vectors.
#[derive(Clone, Debug, Default)]
pub struct MachineView {
    stage: usize,
    group_valid: Vec<bool>,
    count: FxHashMap<MEdge, u32>,
    ids: FxHashMap<MNode, u32>,
    names: Vec<MNode>,
    adj: Vec<Vec<u32>>,
    /// Nodes with out-degree at least 2.
    branching: BTreeSet<MNode>,
    toggled: FxHashSet<MEdge>,
    /// Union-find over dense nodes joined by any edge ever present, with a
    /// per-class stamp of the last edge change inside the class.
    parent: Vec<u32>,
    size: Vec<u32>,
    dirty: Vec<u64>,
    epoch: u64,
    cycle_cache: RefCell<FxHashMap<u32, CycleCache>>,
}

#[derive(Clone, Debug)]
struct CycleCache {
    epoch: u64,
    /// Every simple cycle through the root, or `None` when there were too
    /// many to enumerate.
    cycles: Option<Vec<Vec<MNode>>>,
}

/// DFS steps allowed when enumerating every cycle through one root.
const CYCLE_BUDGET: usize = 1 << 16;

impl MachineView {
    pub fn new() -> Self {
        Self::default()
    }

    /// A view built from scratch.
    pub fn build(m: &OracleGraphMachine, g: &GenericApprox, stage: usize) -> Self {
        let mut v = MachineView::new();
        v.refresh(m, g, stage);
        v.toggled.clear();
        v
    }

    pub fn contains(&self, e: MEdge) -> bool {
        self.count.contains_key(&e)
    }

    pub fn edge_count(&self) -> usize {
        self.count.len()
    }

    pub fn out_neighbors(&self, x: MNode) -> Vec<MNode> {
        match self.ids.get(&x) {
            Some(d) => self.adj[*d as usize].iter().map(|y| self.names[*y as usize]).collect(),
            None => Vec::new(),
        }
    }

    pub fn out_degree(&self, x: MNode) -> usize {
        self.ids.get(&x).map_or(0, |d| self.adj[*d as usize].len())
    }

    pub fn edges(&self) -> BTreeSet<MEdge> {
        self.count.keys().copied().collect()
    }

    /// Nodes with at least `k` out-neighbors, ascending.
    pub fn nodes_with_out_degree(&self, k: usize) -> Vec<MNode> {
        if k >= 2 {
            return self
                .branching
                .iter()
                .copied()
                .filter(|x| self.out_degree(*x) >= k)
                .collect();
        }
        let mut v: Vec<MNode> = self
            .adj
            .iter()
            .enumerate()
            .filter(|(_, n)| n.len() >= k)
            .map(|(d, _)| self.names[d])
            .collect();
        v.sort_unstable();
        v
    }

    fn dense(&mut self, x: MNode) -> u32 {
        if let Some(d) = self.ids.get(&x) {
            return *d;
        }
        let d = self.names.len() as u32;
        self.ids.insert(x, d);
        self.names.push(x);
        self.adj.push(Vec::new());
        self.parent.push(d);
        self.size.push(1);
        self.dirty.push(0);
        d
    }

    fn find(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    /// Joins the classes of `x` and `y` and stamps the result as changed.
    fn touch(&mut self, x: u32, y: u32) {
        let (mut a, mut b) = (self.find(x), self.find(y));
        if a != b {
            if self.size[a as usize] < self.size[b as usize] {
                std::mem::swap(&mut a, &mut b);
            }
            self.parent[b as usize] = a;
            self.size[a as usize] += self.size[b as usize];
        }
        self.epoch += 1;
        self.dirty[a as usize] = self.epoch;
    }

    /// The simple cycles through dense `root` with `len` edges, taken from a
    /// cached list of all its cycles while nothing in the root's class
    /// changed. `None` when the full list is too large to keep.
    fn cached_cycles(&self, root: u32, len: usize, on_path: &mut [bool]) -> Option<Vec<Vec<MNode>>> {
        let stamp = self.dirty[self.find(root) as usize];
        let mut cache = self.cycle_cache.borrow_mut();
        let fresh = cache.get(&root).is_some_and(|c| c.epoch >= stamp);
        if !fresh {
            let cycles = enumerate_cycles(self, root, usize::MAX, on_path, CYCLE_BUDGET);
            cache.insert(root, CycleCache { epoch: self.epoch, cycles });
        }
        let all = cache[&root].cycles.as_ref()?;
        Some(all.iter().filter(|c| c.len() + 1 == len).cloned().collect())
    }

    fn add_edge(&mut self, e: MEdge) {
        let c = self.count.entry(e).or_insert(0);
        *c += 1;
        if *c == 1 {
            let (x, y) = (self.dense(e.0), self.dense(e.1));
            self.touch(x, y);
            let out = &mut self.adj[x as usize];
            out.push(y);
            if out.len() == 2 {
                self.branching.insert(e.0);
            }
            if !self.toggled.insert(e) {
                // toggled twice within one window: presence unchanged
                self.toggled.remove(&e);
            }
        }
    }

    fn remove_edge(&mut self, e: MEdge) {
        let Some(c) = self.count.get_mut(&e) else { return };
        *c -= 1;
        if *c == 0 {
            self.count.remove(&e);
            let (x, y) = (self.ids[&e.0], self.ids[&e.1]);
            self.touch(x, y);
            let v = &mut self.adj[x as usize];
            if let Some(pos) = v.iter().position(|z| *z == y) {
                v.swap_remove(pos);
            }
            if v.len() == 1 {
                self.branching.remove(&e.0);
            }
            if !self.toggled.insert(e) {
                self.toggled.remove(&e);
            }
        }
    }

    /// Re-evaluates group validity against `g` at `stage`, applying the
    /// difference.
    pub fn refresh(&mut self, m: &OracleGraphMachine, g: &GenericApprox, stage: usize) {
        self.stage = stage;
        let groups = m.groups();
        for (gid, grp) in groups.iter().enumerate() {
            let now = grp.is_valid(g, stage);
            if gid >= self.group_valid.len() {
                self.group_valid.push(false);
            }
            let before = self.group_valid[gid];
            if now && !before {
                for e in &grp.edges {
                    self.add_edge(*e);
                }
            } else if !now && before {
                for e in &grp.edges {
                    self.remove_edge(*e);
                }
            }
            self.group_valid[gid] = now;
        }
    }

    /// Records a freshly inserted axiom without rescanning every group.
    pub fn note_axiom(&mut self, m: &OracleGraphMachine, gid: usize, edge: MEdge, g: &GenericApprox) {
        while self.group_valid.len() <= gid {
            let id = self.group_valid.len();
            let valid = m.groups()[id].is_valid(g, self.stage);
            self.group_valid.push(valid);
            if valid && id != gid {
                for e in m.groups()[id].edges.clone() {
                    self.add_edge(e);
                }
            }
        }
        if self.group_valid[gid] {
            self.add_edge(edge);
        }
    }

    /// Edges whose presence changed since the last call.
    pub fn take_toggled(&mut self) -> Vec<MEdge> {
        let mut v: Vec<MEdge> = self.toggled.drain().collect();
        v.sort_unstable();
        v
    }
}

/// One embedded component: a root with node-disjoint cycles through it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentCopy {
    pub root: MNode,
    /// Each cycle as its interior nodes in order, sorted by cycle length and
    /// then by node sequence.
    pub cycles: Vec<Vec<MNode>>,
}

impl ComponentCopy {
    pub fn nodes(&self) -> Vec<MNode> {
        let mut v = vec![self.root];
        for c in &self.cycles {
            v.extend_from_slice(c);
        }
        v.sort_unstable();
        v
    }

    pub fn edges(&self) -> Vec<MEdge> {
        let mut out = Vec::new();
        for c in &self.cycles {
            let mut prev = self.root;
            for x in c {
                out.push((prev, *x));
                prev = *x;
            }
            out.push((prev, self.root));
        }
        out.sort_unstable();
        out
    }

    pub fn age(&self, idx: &AgeIndex, stage: usize) -> usize {
        self.edges()
            .into_iter()
            .map(|e| idx.age_now(e, stage))
            .max()
            .unwrap_or(0)
    }
}

/// A copy of a pair of components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCopy {
    pub even: ComponentCopy,
    pub odd: ComponentCopy,
    pub age: usize,
}

impl PairCopy {
    /// Ordering key: oldest first, then lexicographically least sorted node
    /// list, then edge lists as a final tie-break between distinct subgraphs
    /// on the same nodes.
    pub fn key(&self) -> (usize, Vec<MNode>, Vec<MEdge>, Vec<MEdge>) {
        let mut nodes = self.even.nodes();
        nodes.extend(self.odd.nodes());
        nodes.sort_unstable();
        (self.age, nodes, self.even.edges(), self.odd.edges())
    }
}

/// Simple cycles through `root` (a dense index) with `len` edges, or every
/// simple cycle when `len` is `usize::MAX`. Gives up with `None` after
/// `budget` steps. `on_path` is scratch indexed by dense node, all false on
/// entry and on exit.
fn enumerate_cycles(
    view: &MachineView,
    root: u32,
    len: usize,
    on_path: &mut [bool],
    budget: usize,
) -> Option<Vec<Vec<MNode>>> {
    let mut out = Vec::new();
    if len < 2 {
        return Some(out);
    }
    let mut path: Vec<u32> = Vec::new();
    let mut steps = 0usize;
    // iterative DFS over (node, next-neighbor index)
    let mut stack: Vec<(u32, usize)> = vec![(root, 0)];
    while let Some((node, i)) = stack.pop() {
        steps += 1;
        if steps > budget {
            for d in path {
                on_path[d as usize] = false;
            }
            return None;
        }
        let nbrs = &view.adj[node as usize];
        if i >= nbrs.len() {
            if node != root {
                path.pop();
                on_path[node as usize] = false;
            }
            continue;
        }
        stack.push((node, i + 1));
        let next = nbrs[i];
        let depth = path.len();
        if next == root {
            if len == usize::MAX || depth + 1 == len {
                out.push(path.iter().map(|d| view.names[*d as usize]).collect());
            }
            continue;
        }
        if depth + 1 >= len || on_path[next as usize] {
            continue;
        }
        path.push(next);
        on_path[next as usize] = true;
        stack.push((next, 0));
    }
    Some(out)
}

/// All simple cycles through `root` with `len` edges, sorted.
fn cycles_through(view: &MachineView, root: u32, len: usize, on_path: &mut [bool]) -> Vec<Vec<MNode>> {
    let mut out = match view.cached_cycles(root, len, on_path) {
        Some(cs) => cs,
        None => enumerate_cycles(view, root, len, on_path, usize::MAX).unwrap_or_default(),
    };
    out.sort();
    out
}

/// Every copy of a component with loop lengths `shape` rooted anywhere in
/// the view, avoiding `excluded`.
pub fn component_copies(view: &MachineView, shape: &Shape, excluded: &dyn Fn(MNode) -> bool) -> Vec<ComponentCopy> {
    let mut on_path = vec![false; view.names.len()];
    copies_with_scratch(view, shape, excluded, &mut on_path)
}

fn copies_with_scratch(
    view: &MachineView,
    shape: &Shape,
    excluded: &dyn Fn(MNode) -> bool,
    on_path: &mut [bool],
) -> Vec<ComponentCopy> {
    let lengths = shape.lengths();
    let mut copies = Vec::new();
    if lengths.is_empty() {
        return copies;
    }
    let mut distinct: Vec<usize> = lengths.to_vec();
    distinct.dedup();
    for root in view.nodes_with_out_degree(lengths.len()) {
        if excluded(root) {
            continue;
        }
        let rd = view.ids[&root];
        let mut by_len: BTreeMap<usize, Vec<Vec<MNode>>> = BTreeMap::new();
        let mut feasible = true;
        // longest first: long cycles are the rarest
        for len in distinct.iter().rev() {
            let mut cs = cycles_through(view, rd, *len, on_path);
            cs.retain(|c| !c.iter().any(|x| excluded(*x)));
            let need = lengths.iter().filter(|l| *l == len).count();
            if cs.len() < need {
                feasible = false;
                break;
            }
            by_len.insert(*len, cs);
        }
        if !feasible {
            continue;
        }
        let mut chosen: Vec<Vec<MNode>> = Vec::new();
        let mut used: FxHashSet<MNode> = FxHashSet::default();
        choose_cycles(lengths, 0, 0, &by_len, &mut chosen, &mut used, &mut |cycles| {
            copies.push(ComponentCopy {
                root,
                cycles: cycles.to_vec(),
            })
        });
    }
    copies
}

fn choose_cycles(
    lengths: &[usize],
    at: usize,
    min_index: usize,
    by_len: &BTreeMap<usize, Vec<Vec<MNode>>>,
    chosen: &mut Vec<Vec<MNode>>,
    used: &mut FxHashSet<MNode>,
    emit: &mut dyn FnMut(&[Vec<MNode>]),
) {
    if at == lengths.len() {
        emit(chosen);
        return;
    }
    let len = lengths[at];
    let same_as_prev = at > 0 && lengths[at - 1] == len;
    let start = if same_as_prev { min_index } else { 0 };
    let cands = &by_len[&len];
    for (i, c) in cands.iter().enumerate().skip(start) {
        if c.iter().any(|x| used.contains(x)) {
            continue;
        }
        used.extend(c.iter().copied());
        chosen.push(c.clone());
        choose_cycles(lengths, at + 1, i + 1, by_len, chosen, used, emit);
        chosen.pop();
        for x in c {
            used.remove(x);
        }
    }
}

/// The oldest, then lexicographically least, node-disjoint pair of copies of
/// the `(even, odd)` shapes in the view, avoiding `excluded`.
pub fn find_in_view(
    view: &MachineView,
    idx: &AgeIndex,
    stage: usize,
    pattern: (&Shape, &Shape),
    excluded: &dyn Fn(MNode) -> bool,
) -> Option<PairCopy> {
    let mut on_path = vec![false; view.names.len()];
    let evens = copies_with_scratch(view, pattern.0, excluded, &mut on_path);
    if evens.is_empty() {
        return None;
    }
    let odds = copies_with_scratch(view, pattern.1, excluded, &mut on_path);
    let mut best: Option<(PairCopy, (usize, Vec<MNode>, Vec<MEdge>, Vec<MEdge>))> = None;
    let even_ages: Vec<usize> = evens.iter().map(|c| c.age(idx, stage)).collect();
    let odd_ages: Vec<usize> = odds.iter().map(|c| c.age(idx, stage)).collect();
    for (e, ea) in evens.iter().zip(&even_ages) {
        let en: FxHashSet<MNode> = e.nodes().into_iter().collect();
        for (o, oa) in odds.iter().zip(&odd_ages) {
            if o.nodes().iter().any(|x| en.contains(x)) {
                continue;
            }
            let cand = PairCopy {
                even: e.clone(),
                odd: o.clone(),
                age: (*ea).max(*oa),
            };
            let key = cand.key();
            if best.as_ref().is_none_or(|(_, k)| key < *k) {
                best = Some((cand, key));
            }
        }
    }
    best.map(|(c, _)| c)
}

/// `find_oldest_lexleast_pair` evaluated from scratch.
pub fn find_oldest_lexleast_pair(
    m: &OracleGraphMachine,
    idx: &AgeIndex,
    g: &GenericApprox,
    stage: usize,
    pattern: (&Shape, &Shape),
    excluded: &HashSet<MNode>,
) -> Option<PairCopy> {
    let view = MachineView::build(m, g, stage);
    find_in_view(&view, idx, stage, pattern, &|x| excluded.contains(&x))
}

/// Configuration of the canned faithful copier of `A` into machine `machine`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopierConfig {
    pub machine: usize,
    pub delay: usize,
}

/// State of a faithful copier: a persistent node map `A → M`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Copier {
    pub config: CopierConfig,
    image: FxHashMap<NodeId, MNode>,
    next_node: MNode,
    /// Loops (pair, parity, loop index) already emitted at least once.
    emitted_loops: FxHashSet<(usize, Parity, usize)>,
    seen_changes: usize,
}

impl Copier {
    pub fn new(config: CopierConfig) -> Self {
        Copier {
            config,
            ..Default::default()
        }
    }

    pub fn image(&self, node: NodeId) -> Option<MNode> {
        self.image.get(&node).copied()
    }

    fn image_of(&mut self, node: NodeId) -> MNode {
        if let Some(x) = self.image.get(&node) {
            return *x;
        }
        let x = self.next_node;
        self.next_node += 1;
        self.image.insert(node, x);
        x
    }

    /// The image edges that currently lack a valid axiom, in emission order.
    /// Image nodes are allocated component by component as encountered.
    /// `present` reports whether an edge is in `M_i^G[stage]`.
    pub fn pending(
        &mut self,
        present: &dyn Fn(MEdge) -> bool,
        a: &BuiltGraph,
        g: &GenericApprox,
        stage: usize,
    ) -> Vec<MEdge> {
        let rescan = g.change_log().len() != self.seen_changes;
        self.seen_changes = g.change_log().len();
        let mut out = Vec::new();
        let pairs: Vec<usize> = a
            .pairs()
            .take_while(|p| p + self.config.delay <= stage)
            .collect();
        for pair in pairs {
            for parity in Parity::BOTH {
                let comp = a.component(pair, parity).expect("pair listed");
                self.image_of(comp.root);
                for (li, lp) in comp.loops.iter().enumerate() {
                    let fresh = !self.emitted_loops.contains(&(pair, parity, li));
                    if !fresh && !rescan {
                        continue;
                    }
                    for x in &lp.interior {
                        self.image_of(*x);
                    }
                    for (x, y) in lp.edges() {
                        let e = (self.image[&x], self.image[&y]);
                        if fresh || !present(e) {
                            out.push(e);
                        }
                    }
                    self.emitted_loops.insert((pair, parity, li));
                }
            }
        }
        out
    }
}
