//! The loop-bundle graphs `A` and `B`.
//!
//! Each stage `s >= 1` contributes a pair of components with roots
//! `a_{2s}`, `a_{2s+1}` (resp. `b_{2s}`, `b_{2s+1}`). A component is a root
//! with directed loops attached; a `k`-loop is a directed cycle of `k` edges
//! through the root whose `k - 1` interior nodes belong to no other loop.
//! The isomorphism type of a component is therefore its multiset of loop
//! lengths, which we call its [`Shape`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("pair index must be at least 1")]
    PairZero,
    #[error("pair {0} already exists in graph {1}")]
    DuplicatePair(usize, Side),
    #[error("pair {0} does not exist in graph {1}")]
    MissingPair(usize, Side),
    #[error("pair {0} in graph {1} is not in base shape")]
    NotBase(usize, Side),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    fn index(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// Root label index: `2n` or `2n + 1`.
    pub fn root_label(self, pair: usize) -> usize {
        2 * pair + self.index()
    }
}

/// Sorted multiset of loop lengths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape(pub Vec<usize>);

impl Shape {
    pub fn new(mut lengths: Vec<usize>) -> Self {
        lengths.sort_unstable();
        Shape(lengths)
    }

    pub fn lengths(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// The three configurations a component may be in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeKind {
    Base,
    Diagonalized,
    Homogenized,
}

/// Loop lengths of the component `(side, parity)` of pair `n` in
/// configuration `kind`.
pub fn legal_shape(side: Side, parity: Parity, n: usize, kind: ShapeKind) -> Shape {
    let k = 5 * n;
    let lengths = match (kind, side, parity) {
        (ShapeKind::Base, _, Parity::Even) => vec![2, k + 1],
        (ShapeKind::Base, _, Parity::Odd) => vec![2, k + 2],
        (ShapeKind::Diagonalized, Side::A, Parity::Even)
        | (ShapeKind::Diagonalized, Side::B, Parity::Odd) => vec![2, k + 1, k + 2, k + 3],
        (ShapeKind::Diagonalized, Side::A, Parity::Odd)
        | (ShapeKind::Diagonalized, Side::B, Parity::Even) => vec![2, k + 1, k + 2, k + 4],
        (ShapeKind::Homogenized, _, _) => vec![2, k + 1, k + 2, k + 3, k + 4],
    };
    Shape(lengths)
}

/// Which legal configuration `shape` is, if any.
pub fn classify_shape(side: Side, parity: Parity, n: usize, shape: &Shape) -> Option<ShapeKind> {
    [ShapeKind::Base, ShapeKind::Diagonalized, ShapeKind::Homogenized]
        .into_iter()
        .find(|kind| &legal_shape(side, parity, n, *kind) == shape)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub root: NodeId,
    pub length: usize,
    pub interior: Vec<NodeId>,
}

impl Loop {
    /// Edges in cycle order, starting and ending at the root.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let n = self.interior.len();
        (0..=n).map(move |i| {
            let from = if i == 0 { self.root } else { self.interior[i - 1] };
            let to = if i == n { self.root } else { self.interior[i] };
            (from, to)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub pair: usize,
    pub side: Side,
    pub parity: Parity,
    pub root: NodeId,
    pub loops: Vec<Loop>,
    pub diagonalized: bool,
    pub homogenized: bool,
}

impl Component {
    pub fn shape(&self) -> Shape {
        Shape::new(self.loops.iter().map(|l| l.length).collect())
    }

    pub fn kind(&self) -> Option<ShapeKind> {
        classify_shape(self.side, self.parity, self.pair, &self.shape())
    }

    /// Root first, then interior nodes in loop order.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut out = vec![self.root];
        for l in &self.loops {
            out.extend_from_slice(&l.interior);
        }
        out
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.loops.iter().flat_map(|l| l.edges())
    }

    pub fn label(&self) -> String {
        let prefix = match self.side {
            Side::A => 'a',
            Side::B => 'b',
        };
        format!("{prefix}{}", self.parity.root_label(self.pair))
    }
}

/// Result of a homogenization request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogenized {
    Applied,
    AlreadyHomogenized,
    /// The pair was never diagonalized; nothing was changed.
    SkippedBase,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuiltGraph {
    side: Side,
    next_node: u32,
    components: BTreeMap<usize, [Component; 2]>,
}

impl BuiltGraph {
    pub fn new(side: Side) -> Self {
        BuiltGraph {
            side,
            next_node: 0,
            components: BTreeMap::new(),
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn node_count(&self) -> usize {
        self.next_node as usize
    }

    /// Largest allocated node id, if any.
    pub fn max_node_id(&self) -> Option<NodeId> {
        self.next_node.checked_sub(1).map(NodeId)
    }

    pub fn pairs(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.keys().copied()
    }

    pub fn has_pair(&self, n: usize) -> bool {
        self.components.contains_key(&n)
    }

    pub fn component(&self, n: usize, parity: Parity) -> Result<&Component, GraphError> {
        self.components
            .get(&n)
            .map(|pair| &pair[parity.index()])
            .ok_or(GraphError::MissingPair(n, self.side))
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> + '_ {
        self.components.values().flat_map(|p| p.iter())
    }

    pub fn component_shape(&self, n: usize, parity: Parity) -> Result<Shape, GraphError> {
        self.component(n, parity).map(Component::shape)
    }

    pub fn edge_count(&self) -> usize {
        self.components()
            .flat_map(|c| c.loops.iter())
            .map(|l| l.length)
            .sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.components().flat_map(|c| c.edges())
    }

    fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        id
    }

    fn new_loop(&mut self, root: NodeId, length: usize) -> Loop {
        let interior = (1..length).map(|_| self.fresh()).collect();
        Loop {
            root,
            length,
            interior,
        }
    }

    /// Adds the base-shape pair `n`: a 2-loop plus a `(5n+1)`-loop on the even
    /// root and a 2-loop plus a `(5n+2)`-loop on the odd root.
    pub fn add_pair(&mut self, n: usize) -> Result<(), GraphError> {
        if n == 0 {
            return Err(GraphError::PairZero);
        }
        if self.has_pair(n) {
            return Err(GraphError::DuplicatePair(n, self.side));
        }
        let build = |g: &mut Self, parity: Parity| {
            let root = g.fresh();
            let loops = legal_shape(g.side, parity, n, ShapeKind::Base)
                .0
                .into_iter()
                .map(|len| g.new_loop(root, len))
                .collect();
            Component {
                pair: n,
                side: g.side,
                parity,
                root,
                loops,
                diagonalized: false,
                homogenized: false,
            }
        };
        let even = build(self, Parity::Even);
        let odd = build(self, Parity::Odd);
        self.components.insert(n, [even, odd]);
        Ok(())
    }

    fn extend_to(&mut self, n: usize, kind: ShapeKind) {
        for parity in Parity::BOTH {
            let target = legal_shape(self.side, parity, n, kind);
            let mut have = self.components[&n][parity.index()].shape().0;
            let mut missing = Vec::new();
            for len in target.0 {
                if let Some(pos) = have.iter().position(|l| *l == len) {
                    have.swap_remove(pos);
                } else {
                    missing.push(len);
                }
            }
            debug_assert!(have.is_empty(), "shape transitions only add loops");
            let root = self.components[&n][parity.index()].root;
            let loops: Vec<Loop> = missing.into_iter().map(|len| self.new_loop(root, len)).collect();
            self.components.get_mut(&n).unwrap()[parity.index()]
                .loops
                .extend(loops);
        }
    }

    /// Adds the diagonalizing loops to pair `n`.
    pub fn diagonalize(&mut self, n: usize) -> Result<(), GraphError> {
        let pair = self.components.get(&n).ok_or(GraphError::MissingPair(n, self.side))?;
        if pair.iter().any(|c| c.diagonalized || c.homogenized) {
            return Err(GraphError::NotBase(n, self.side));
        }
        self.extend_to(n, ShapeKind::Diagonalized);
        for c in self.components.get_mut(&n).unwrap() {
            c.diagonalized = true;
        }
        Ok(())
    }

    /// Brings both components of a diagonalized pair `n` to
    /// `{2, 5n+1, 5n+2, 5n+3, 5n+4}`.
    pub fn homogenize(&mut self, n: usize) -> Result<Homogenized, GraphError> {
        let pair = self.components.get(&n).ok_or(GraphError::MissingPair(n, self.side))?;
        if pair.iter().all(|c| c.homogenized) {
            return Ok(Homogenized::AlreadyHomogenized);
        }
        if !pair.iter().any(|c| c.diagonalized) {
            return Ok(Homogenized::SkippedBase);
        }
        self.extend_to(n, ShapeKind::Homogenized);
        for c in self.components.get_mut(&n).unwrap() {
            c.homogenized = true;
        }
        Ok(Homogenized::Applied)
    }

    /// Whether pair `n` is diagonalized and not yet homogenized.
    pub fn is_diagonalized_only(&self, n: usize) -> bool {
        self.components
            .get(&n)
            .is_some_and(|p| p.iter().all(|c| c.diagonalized && !c.homogenized))
    }

    /// Component label for root nodes (`a<k>`/`b<k>`), numeric id otherwise.
    fn node_labels(&self) -> BTreeMap<NodeId, String> {
        self.components().map(|c| (c.root, c.label())).collect()
    }

    pub fn to_dot(&self, name: &str) -> String {
        let labels = self.node_labels();
        let mut out = format!("digraph {name} {{\n");
        for c in self.components() {
            for node in c.nodes() {
                let label = labels.get(&node).cloned().unwrap_or_else(|| node.to_string());
                out.push_str(&format!("  n{node} [label=\"{label}\"];\n"));
            }
        }
        for (from, to) in self.edges() {
            out.push_str(&format!("  n{from} -> n{to};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Adds pair `s` to both graphs.
pub fn add_stage_components(a: &mut BuiltGraph, b: &mut BuiltGraph, s: usize) -> Result<(), GraphError> {
    if s == 0 {
        return Err(GraphError::PairZero);
    }
    if a.has_pair(s) {
        return Err(GraphError::DuplicatePair(s, a.side));
    }
    if b.has_pair(s) {
        return Err(GraphError::DuplicatePair(s, b.side));
    }
    a.add_pair(s)?;
    b.add_pair(s)
}

pub fn diagonalize_pair(a: &mut BuiltGraph, b: &mut BuiltGraph, n: usize) -> Result<(), GraphError> {
    for g in [&*a, &*b] {
        let pair = g.components.get(&n).ok_or(GraphError::MissingPair(n, g.side))?;
        if pair.iter().any(|c| c.diagonalized || c.homogenized) {
            return Err(GraphError::NotBase(n, g.side));
        }
    }
    a.diagonalize(n)?;
    b.diagonalize(n)
}

pub fn homogenize_pair(a: &mut BuiltGraph, b: &mut BuiltGraph, n: usize) -> Result<Homogenized, GraphError> {
    let ra = a.homogenize(n)?;
    let rb = b.homogenize(n)?;
    Ok(if ra == Homogenized::Applied || rb == Homogenized::Applied {
        Homogenized::Applied
    } else {
        ra
    })
}

/// For every pair index, the multiset of the two `A`-shapes equals the
/// multiset of the two `B`-shapes.
pub fn pairwise_isomorphic(a: &BuiltGraph, b: &BuiltGraph) -> bool {
    a.pairs().eq(b.pairs()) && a.pairs().all(|n| pair_isomorphic(a, b, n))
}

/// Pair `n` of `A` and pair `n` of `B` have the same multiset of shapes.
/// A pair missing on both sides counts as isomorphic.
pub fn pair_isomorphic(a: &BuiltGraph, b: &BuiltGraph, n: usize) -> bool {
    match (a.components.get(&n), b.components.get(&n)) {
        (None, None) => true,
        (Some(pa), Some(pb)) => {
            let mut sa = [pa[0].shape(), pa[1].shape()];
            let mut sb = [pb[0].shape(), pb[1].shape()];
            sa.sort();
            sb.sort();
            sa == sb
        }
        _ => false,
    }
}
