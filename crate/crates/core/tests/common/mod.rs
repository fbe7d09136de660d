//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use priority_tree::bits::{Bits, OracleSnapshot};
use priority_tree::codings::{Digraph, SymGraph, Vertex};
use priority_tree::generic::GenericApprox;
use priority_tree::graph::Shape;
use priority_tree::machine::{AgeIndex, ComponentCopy, MEdge, MNode, MachineView, OracleGraphMachine, PairCopy};
use priority_tree::trace::TraceEvent;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random machine history: axioms under a moving `G`, with the edge set
/// recorded at the end of every stage.
pub struct History {
    pub machine: OracleGraphMachine,
    pub g: GenericApprox,
    /// Maintained incrementally alongside, the way the engine does it.
    pub view: MachineView,
    pub idx: AgeIndex,
    pub idx_toggled: AgeIndex,
    /// `per_stage[s - 1]` is the edge set at the end of stage `s`.
    pub per_stage: Vec<BTreeSet<MEdge>>,
    pub nodes: u32,
    pub pattern: (Shape, Shape),
}

impl History {
    pub fn last_stage(&self) -> usize {
        self.per_stage.len()
    }
}

fn random_shape(r: &mut ChaCha8Rng) -> Shape {
    if r.gen_bool(0.3) {
        return Shape::new(vec![2, 6]);
    }
    let k = r.gen_range(1..=2);
    Shape::new((0..k).map(|_| r.gen_range(2..=5)).collect())
}

fn random_bits(r: &mut ChaCha8Rng, max_len: usize) -> Bits {
    let len = r.gen_range(0..=max_len);
    Bits::from_bools((0..len).map(|_| r.gen_bool(0.4)).collect())
}

/// Plants node-disjoint copies of `shapes` on random nodes.
fn plant(r: &mut ChaCha8Rng, nodes: u32, shapes: &[&Shape]) -> Vec<MEdge> {
    let mut pool: Vec<MNode> = (0..nodes).collect();
    pool.shuffle(r);
    let need: usize = shapes
        .iter()
        .map(|s| 1 + s.lengths().iter().map(|l| l - 1).sum::<usize>())
        .sum();
    if need > pool.len() {
        return Vec::new();
    }
    let mut next = 0;
    let mut out = Vec::new();
    for shape in shapes {
        let root = pool[next];
        next += 1;
        for len in shape.lengths() {
            let mut prev = root;
            for _ in 1..*len {
                out.push((prev, pool[next]));
                prev = pool[next];
                next += 1;
            }
            out.push((prev, root));
        }
    }
    out
}

pub fn random_history(seed: u64) -> History {
    let mut r = rng(seed);
    let nodes = r.gen_range(8..=30);
    let pattern = (random_shape(&mut r), random_shape(&mut r));
    let mut h = History {
        machine: OracleGraphMachine::new(0),
        g: GenericApprox::new(),
        view: MachineView::new(),
        idx: AgeIndex::new(0),
        idx_toggled: AgeIndex::new(0),
        per_stage: Vec::new(),
        nodes,
        pattern: pattern.clone(),
    };
    let stages = r.gen_range(1..=8);
    for s in 1..=stages {
        h.g.begin_stage(s);
        match r.gen_range(0..4) {
            0 => {
                let tau = random_bits(&mut r, 6);
                h.g.set_tail(&tau);
            }
            1 => {
                h.g.enumerate(r.gen_range(0..6));
            }
            _ => {}
        }
        let mut edges: Vec<MEdge> = Vec::new();
        match r.gen_range(0..4) {
            0 => edges.extend(plant(&mut r, nodes, &[&pattern.0, &pattern.1])),
            1 => edges.extend(plant(&mut r, nodes, &[&pattern.0])),
            2 => edges.extend(plant(&mut r, nodes, &[&pattern.1])),
            _ => {}
        }
        for _ in 0..r.gen_range(0..=(nodes as usize / 4)) {
            let x = r.gen_range(0..nodes);
            let y = r.gen_range(0..nodes);
            if x != y {
                edges.push((x, y));
            }
        }
        // keep the graph sparse enough for exhaustive search
        if h.machine.axiom_count() > 4 * nodes as usize {
            edges.clear();
        }
        for e in edges {
            // mostly certified by the current G, sometimes by a guess
            let snap = if r.gen_bool(0.85) {
                h.g.prefix_snapshot(r.gen_range(0..=4))
            } else {
                OracleSnapshot::from_bits(&random_bits(&mut r, 6))
            };
            let step = if r.gen_bool(0.9) { s } else { s + 1 };
            let (gid, _) = h.machine.add_axiom(&snap, step, e);
            h.view.note_axiom(&h.machine, gid, e, &h.g);
        }
        h.g.end_stage(s);
        h.view.refresh(&h.machine, &h.g, s);
        let present = h.machine.edges_at(&h.g, s);
        h.idx.update(&present, s).unwrap();
        let toggled = h.view.take_toggled();
        h.idx_toggled.update_toggled(&h.view, toggled, s).unwrap();
        h.per_stage.push(present);
    }
    h
}

/// `present_since` recomputed from the per-stage edge sets.
pub fn brute_ages(per_stage: &[BTreeSet<MEdge>]) -> BTreeMap<MEdge, usize> {
    let Some(last) = per_stage.last() else { return BTreeMap::new() };
    last.iter()
        .map(|e| {
            let mut since = per_stage.len();
            while since > 1 && per_stage[since - 2].contains(e) {
                since -= 1;
            }
            (*e, since)
        })
        .collect()
}

fn adjacency(edges: &BTreeSet<MEdge>) -> BTreeMap<MNode, Vec<MNode>> {
    let mut adj: BTreeMap<MNode, Vec<MNode>> = BTreeMap::new();
    for (x, y) in edges {
        adj.entry(*x).or_default().push(*y);
    }
    adj
}

/// Interiors of the simple cycles through `root` with `len` edges.
fn cycles(adj: &BTreeMap<MNode, Vec<MNode>>, root: MNode, len: usize) -> Vec<Vec<MNode>> {
    fn go(
        adj: &BTreeMap<MNode, Vec<MNode>>,
        root: MNode,
        len: usize,
        path: &mut Vec<MNode>,
        out: &mut Vec<Vec<MNode>>,
    ) {
        let at = *path.last().unwrap_or(&root);
        for y in adj.get(&at).into_iter().flatten() {
            if path.len() + 1 == len {
                if *y == root {
                    out.push(path.clone());
                }
            } else if *y != root && !path.contains(y) {
                path.push(*y);
                go(adj, root, len, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(adj, root, len, &mut Vec::new(), &mut out);
    out
}

/// Every copy of `shape` in `edges`, by exhaustive search.
pub fn brute_copies(edges: &BTreeSet<MEdge>, shape: &Shape) -> Vec<ComponentCopy> {
    let adj = adjacency(edges);
    let mut roots: BTreeSet<MNode> = BTreeSet::new();
    for (x, y) in edges {
        roots.insert(*x);
        roots.insert(*y);
    }
    let mut out = BTreeSet::new();
    let lens = shape.lengths();
    for root in roots {
        let per_len: Vec<Vec<Vec<MNode>>> = lens.iter().map(|l| cycles(&adj, root, *l)).collect();
        // choose one cycle per loop, disjoint interiors
        fn pick(
            k: usize,
            per_len: &[Vec<Vec<MNode>>],
            chosen: &mut Vec<Vec<MNode>>,
            root: MNode,
            out: &mut BTreeSet<ComponentCopy>,
        ) {
            if k == per_len.len() {
                let mut cycles = chosen.clone();
                cycles.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
                out.insert(ComponentCopy { root, cycles });
                return;
            }
            for c in &per_len[k] {
                if chosen.iter().any(|d| d.iter().any(|x| c.contains(x))) {
                    continue;
                }
                chosen.push(c.clone());
                pick(k + 1, per_len, chosen, root, out);
                chosen.pop();
            }
        }
        pick(0, &per_len, &mut Vec::new(), root, &mut out);
    }
    out.into_iter().collect()
}

/// The oldest, then least-keyed, disjoint pair of copies avoiding
/// `excluded`, with ages from `ages`.
pub fn brute_pair(
    edges: &BTreeSet<MEdge>,
    ages: &BTreeMap<MEdge, usize>,
    pattern: (&Shape, &Shape),
    excluded: &BTreeSet<MNode>,
) -> Option<PairCopy> {
    let keep = |c: &ComponentCopy| c.nodes().iter().all(|x| !excluded.contains(x));
    let age = |c: &ComponentCopy| c.edges().iter().map(|e| ages[e]).max().unwrap_or(0);
    let evens: Vec<_> = brute_copies(edges, pattern.0).into_iter().filter(keep).collect();
    let odds: Vec<_> = brute_copies(edges, pattern.1).into_iter().filter(keep).collect();
    let mut best: Option<PairCopy> = None;
    for e in &evens {
        let en = e.nodes();
        for o in &odds {
            if o.nodes().iter().any(|x| en.contains(x)) {
                continue;
            }
            let cand = PairCopy {
                even: e.clone(),
                odd: o.clone(),
                age: age(e).max(age(o)),
            };
            if best.as_ref().is_none_or(|b| cand.key() < b.key()) {
                best = Some(cand);
            }
        }
    }
    best
}

pub fn random_digraph(r: &mut ChaCha8Rng, max_vertices: u32) -> Digraph {
    let n = r.gen_range(0..=max_vertices);
    let p = r.gen_range(0.0..0.6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && r.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Digraph::from_edges(n, edges).unwrap()
}

pub fn permutations(items: &[Vertex]) -> Vec<Vec<Vertex>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Some isomorphism `d0 → d1` by trying every bijection.
pub fn brute_iso(d0: &Digraph, d1: &Digraph) -> Option<BTreeMap<Vertex, Vertex>> {
    if d0.vertices.len() != d1.vertices.len() || d0.edges.len() != d1.edges.len() {
        return None;
    }
    let src: Vec<Vertex> = d0.vertices.iter().copied().collect();
    let dst: Vec<Vertex> = d1.vertices.iter().copied().collect();
    permutations(&dst).into_iter().find_map(|p| {
        let h: BTreeMap<Vertex, Vertex> = src.iter().copied().zip(p).collect();
        d0.edges
            .iter()
            .all(|(u, v)| d1.edges.contains(&(h[u], h[v])))
            .then_some(h)
    })
}

/// Whether `h` is an isomorphism, checked edge by edge.
pub fn is_digraph_iso(h: &BTreeMap<Vertex, Vertex>, d0: &Digraph, d1: &Digraph) -> bool {
    let image: BTreeSet<Vertex> = h.values().copied().collect();
    h.keys().copied().collect::<BTreeSet<_>>() == d0.vertices
        && image == d1.vertices
        && d0.edges.len() == d1.edges.len()
        && d0.edges.iter().all(|(u, v)| d1.edges.contains(&(h[u], h[v])))
}

/// Every automorphism of `s`, by backtracking with degree pruning.
pub fn automorphisms(s: &SymGraph) -> Vec<BTreeMap<Vertex, Vertex>> {
    let adj = s.neighbors();
    let order: Vec<Vertex> = s.vertices.iter().copied().collect();
    let deg = |x: &Vertex| adj[x].len();
    let mut out = Vec::new();
    fn go(
        k: usize,
        order: &[Vertex],
        adj: &BTreeMap<Vertex, BTreeSet<Vertex>>,
        deg: &dyn Fn(&Vertex) -> usize,
        map: &mut BTreeMap<Vertex, Vertex>,
        used: &mut BTreeSet<Vertex>,
        out: &mut Vec<BTreeMap<Vertex, Vertex>>,
    ) {
        if k == order.len() {
            out.push(map.clone());
            return;
        }
        let x = order[k];
        for y in order {
            if used.contains(y) || deg(y) != deg(&x) {
                continue;
            }
            let ok = map
                .iter()
                .all(|(a, b)| adj[&x].contains(a) == adj[y].contains(b));
            if !ok {
                continue;
            }
            map.insert(x, *y);
            used.insert(*y);
            go(k + 1, order, adj, deg, map, used, out);
            map.remove(&x);
            used.remove(y);
        }
    }
    go(0, &order, &adj, &deg, &mut BTreeMap::new(), &mut BTreeSet::new(), &mut out);
    out
}

/// `trace` with `event` inserted at `index`.
pub fn inserted(trace: &[TraceEvent], index: usize, event: TraceEvent) -> Vec<TraceEvent> {
    let mut t = trace.to_vec();
    t.insert(index, event);
    t
}

/// Index of the first event matching `pred`.
pub fn position(trace: &[TraceEvent], pred: impl Fn(&TraceEvent) -> bool) -> usize {
    trace.iter().position(pred).expect("event present in trace")
}
