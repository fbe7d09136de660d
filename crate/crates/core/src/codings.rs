//! Coding directed graphs into symmetric irreflexive graphs.
//!
//! A vertex `v` becomes a node `n_v` carrying two triangles that meet only
//! at `n_v`. An edge `(u, v)` becomes a path `n_u - p - c - n_v` plus a
//! chordless 4-cycle `c - q1 - q2 - q3 - c`. The head sits next to `c`, the
//! tail two steps away, which is how decoding recovers direction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub type Vertex = u32;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("self-loop at {0}")]
    SelfLoop(Vertex),
    #[error("not a valid encoding: {0}")]
    InvalidEncoding(String),
    #[error("not an isomorphism: {0}")]
    NotIsomorphism(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A finite irreflexive directed graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Digraph {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<(Vertex, Vertex)>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Vertices `0..n` and the given edges.
    pub fn from_edges(n: u32, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, CodingError> {
        let mut d = Digraph {
            vertices: (0..n).collect(),
            edges: BTreeSet::new(),
        };
        for (u, v) in edges {
            d.add_edge(u, v)?;
        }
        Ok(d)
    }

    /// Adds an edge and its endpoints.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), CodingError> {
        if u == v {
            return Err(CodingError::SelfLoop(u));
        }
        self.vertices.insert(u);
        self.vertices.insert(v);
        self.edges.insert((u, v));
        Ok(())
    }

    /// Relabels the vertices to `0..n` in increasing order.
    pub fn compact(&self) -> (Digraph, BTreeMap<Vertex, Vertex>) {
        let map: BTreeMap<Vertex, Vertex> = self.vertices.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let d = Digraph {
            vertices: map.values().copied().collect(),
            edges: self.edges.iter().map(|(u, v)| (map[u], map[v])).collect(),
        };
        (d, map)
    }

    /// `digraph <n>` followed by one `u v` line per edge. Vertices are
    /// written as `0..n`, so non-contiguous vertex sets should be compacted
    /// first.
    pub fn to_text(&self) -> String {
        let n = self.vertices.iter().next_back().map_or(0, |v| v + 1);
        let mut out = format!("digraph {n}\n");
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  {v};");
        }
        for (u, v) in &self.edges {
            let _ = writeln!(out, "  {u} -> {v};");
        }
        out.push_str("}\n");
        out
    }
}

/// A finite symmetric irreflexive graph; edges are stored as `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymGraph {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<(Vertex, Vertex)>,
}

impl SymGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: Vertex) {
        self.vertices.insert(v);
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), CodingError> {
        if u == v {
            return Err(CodingError::SelfLoop(u));
        }
        self.vertices.insert(u);
        self.vertices.insert(v);
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self) -> BTreeMap<Vertex, BTreeSet<Vertex>> {
        let mut adj: BTreeMap<Vertex, BTreeSet<Vertex>> = self.vertices.iter().map(|v| (*v, BTreeSet::new())).collect();
        for (u, v) in &self.edges {
            adj.entry(*u).or_default().insert(*v);
            adj.entry(*v).or_default().insert(*u);
        }
        adj
    }

    pub fn to_text(&self) -> String {
        let n = self.vertices.iter().next_back().map_or(0, |v| v + 1);
        let mut out = format!("symgraph {n}\n");
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in &self.vertices {
            let _ = writeln!(out, "  {v};");
        }
        for (u, v) in &self.edges {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

/// Either kind of graph read from text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TextGraph {
    Digraph(Digraph),
    SymGraph(SymGraph),
}

/// Parses the `digraph|symgraph <n>` format. Vertices are `0..n`.
pub fn parse_graph(text: &str) -> Result<TextGraph, CodingError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(CodingError::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let perr = |line: usize, message: String| CodingError::Parse { line, message };
    let mut parts = header.split_whitespace();
    let kind = parts.next().unwrap_or_default();
    let n: u32 = parts
        .next()
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| perr(hl, format!("bad header `{header}`")))?;
    if parts.next().is_some() || !matches!(kind, "digraph" | "symgraph") {
        return Err(perr(hl, format!("bad header `{header}`")));
    }
    let mut edges = Vec::new();
    for (line, l) in lines {
        let xs: Vec<u32> = l
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| perr(line, format!("bad vertex `{x}`"))))
            .collect::<Result<_, _>>()?;
        let [u, v] = xs[..] else {
            return Err(perr(line, "expected two vertices".into()));
        };
        if u >= n || v >= n {
            return Err(perr(line, format!("vertex out of range 0..{n}")));
        }
        if u == v {
            return Err(perr(line, format!("self-loop at {u}")));
        }
        edges.push((u, v));
    }
    Ok(if kind == "digraph" {
        TextGraph::Digraph(Digraph::from_edges(n, edges)?)
    } else {
        let mut s = SymGraph {
            vertices: (0..n).collect(),
            edges: BTreeSet::new(),
        };
        for (u, v) in edges {
            s.add_edge(u, v)?;
        }
        TextGraph::SymGraph(s)
    })
}

/// The nodes coding one vertex: `n` and its two triangles `(t1,t2)`,
/// `(t3,t4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexBlock {
    pub n: Vertex,
    pub t: [Vertex; 4],
}

impl VertexBlock {
    pub fn nodes(&self) -> [Vertex; 5] {
        [self.n, self.t[0], self.t[1], self.t[2], self.t[3]]
    }
}

/// The nodes coding one edge: the path node `p`, the centre `c` and the
/// 4-cycle nodes `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeBlock {
    pub p: Vertex,
    pub c: Vertex,
    pub q: [Vertex; 3],
}

impl EdgeBlock {
    pub fn nodes(&self) -> [Vertex; 5] {
        [self.p, self.c, self.q[0], self.q[1], self.q[2]]
    }
}

/// Where each source vertex and edge landed, with blocks in emission order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GadgetRegistry {
    pub vertices: BTreeMap<Vertex, VertexBlock>,
    pub edges: BTreeMap<(Vertex, Vertex), EdgeBlock>,
    /// Source items in the order their gadgets were emitted.
    pub order: Vec<Item>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Item {
    Vertex(Vertex),
    Edge(Vertex, Vertex),
}

/// Emits gadgets as the source digraph is enumerated. Output only ever
/// grows: earlier nodes and edges are never renumbered or removed.
#[derive(Clone, Debug, Default)]
pub struct StreamingEncoder {
    next: Vertex,
    out: SymGraph,
    registry: GadgetRegistry,
}

impl StreamingEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh<const K: usize>(&mut self) -> [Vertex; K] {
        let mut xs = [0; K];
        for x in &mut xs {
            *x = self.next;
            self.next += 1;
            self.out.add_vertex(*x);
        }
        xs
    }

    fn link(&mut self, u: Vertex, v: Vertex) {
        self.out.add_edge(u, v).expect("gadget nodes are distinct");
    }

    /// Emits the gadget for `v` unless it exists.
    pub fn add_vertex(&mut self, v: Vertex) -> VertexBlock {
        if let Some(b) = self.registry.vertices.get(&v) {
            return *b;
        }
        let [n, t1, t2, t3, t4] = self.fresh::<5>();
        for (x, y) in [(n, t1), (n, t2), (t1, t2), (n, t3), (n, t4), (t3, t4)] {
            self.link(x, y);
        }
        let b = VertexBlock { n, t: [t1, t2, t3, t4] };
        self.registry.vertices.insert(v, b);
        self.registry.order.push(Item::Vertex(v));
        b
    }

    /// Emits the gadget for `(u, v)`, and first those of missing endpoints.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<EdgeBlock, CodingError> {
        if u == v {
            return Err(CodingError::SelfLoop(u));
        }
        if let Some(b) = self.registry.edges.get(&(u, v)) {
            return Ok(*b);
        }
        let nu = self.add_vertex(u).n;
        let nv = self.add_vertex(v).n;
        let [p, c, q1, q2, q3] = self.fresh::<5>();
        for (x, y) in [(nu, p), (p, c), (c, nv), (c, q1), (q1, q2), (q2, q3), (q3, c)] {
            self.link(x, y);
        }
        let b = EdgeBlock { p, c, q: [q1, q2, q3] };
        self.registry.edges.insert((u, v), b);
        self.registry.order.push(Item::Edge(u, v));
        Ok(b)
    }

    pub fn add_item(&mut self, item: Item) -> Result<(), CodingError> {
        match item {
            Item::Vertex(v) => {
                self.add_vertex(v);
            }
            Item::Edge(u, v) => {
                self.add_edge(u, v)?;
            }
        }
        Ok(())
    }

    pub fn output(&self) -> &SymGraph {
        &self.out
    }

    pub fn registry(&self) -> &GadgetRegistry {
        &self.registry
    }

    pub fn finish(self) -> (SymGraph, GadgetRegistry) {
        (self.out, self.registry)
    }
}

/// Encodes `d`: vertex gadgets in vertex order, then edge gadgets in edge
/// order.
pub fn encode(d: &Digraph) -> Result<(SymGraph, GadgetRegistry), CodingError> {
    if let Some((u, _)) = d.edges.iter().find(|(u, v)| u == v) {
        return Err(CodingError::SelfLoop(*u));
    }
    let mut enc = StreamingEncoder::new();
    for v in &d.vertices {
        enc.add_vertex(*v);
    }
    for (u, v) in &d.edges {
        enc.add_edge(*u, *v)?;
    }
    Ok(enc.finish())
}

/// Encodes items in the given order.
pub fn encode_stream(items: &[Item]) -> Result<(SymGraph, GadgetRegistry), CodingError> {
    let mut enc = StreamingEncoder::new();
    for it in items {
        enc.add_item(*it)?;
    }
    Ok(enc.finish())
}

/// Every triangle, as sorted triples.
pub fn triangles(s: &SymGraph) -> BTreeSet<[Vertex; 3]> {
    let adj = s.neighbors();
    let mut out = BTreeSet::new();
    for (u, v) in &s.edges {
        for w in adj[u].intersection(&adj[v]) {
            let mut t = [*u, *v, *w];
            t.sort_unstable();
            out.insert(t);
        }
    }
    out
}

/// Every chordless 4-cycle, rotated to start at its least node and read in
/// the direction of the smaller second node.
pub fn chordless_4cycles(s: &SymGraph) -> BTreeSet<[Vertex; 4]> {
    let adj = s.neighbors();
    let mut out = BTreeSet::new();
    for (a, na) in &adj {
        for b in na.iter().filter(|b| *b > a) {
            for d in na.iter().filter(|d| *d > b) {
                if s.has_edge(*b, *d) {
                    continue;
                }
                for c in adj[b].intersection(&adj[d]) {
                    if c > a && !s.has_edge(*a, *c) {
                        out.insert([*a, *b, *c, *d]);
                    }
                }
            }
        }
    }
    out
}

/// The digraph read back from a symmetric graph, on the nodes that carry a
/// vertex flag, with the witnesses found for each vertex and edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub digraph: Digraph,
    pub vertex_witness: BTreeMap<Vertex, VertexBlock>,
    pub edge_witness: BTreeMap<(Vertex, Vertex), EdgeBlock>,
}

/// Decodes an encode image (up to renaming). Vertices of the result are
/// the flag nodes themselves. Nodes left over after matching every gadget,
/// or edges no gadget accounts for, make the input invalid.
pub fn decode(s: &SymGraph) -> Result<Decoded, CodingError> {
    let adj = s.neighbors();
    let tris = triangles(s);
    let mut tri_of: BTreeMap<Vertex, Vec<[Vertex; 3]>> = BTreeMap::new();
    for t in &tris {
        for x in t {
            tri_of.entry(*x).or_default().push(*t);
        }
    }
    // D(x): two triangles through x sharing only x
    let mut vertex_witness = BTreeMap::new();
    for (x, ts) in &tri_of {
        let flag = ts.iter().enumerate().find_map(|(i, t0)| {
            ts[i + 1..].iter().find_map(|t1| {
                let o0: Vec<Vertex> = t0.iter().copied().filter(|y| y != x).collect();
                let o1: Vec<Vertex> = t1.iter().copied().filter(|y| y != x).collect();
                o0.iter().all(|y| !o1.contains(y)).then(|| [o0[0], o0[1], o1[0], o1[1]])
            })
        });
        if let Some(t) = flag {
            vertex_witness.insert(*x, VertexBlock { n: *x, t });
        }
    }
    let is_d = |x: &Vertex| vertex_witness.contains_key(x);
    let cycles = chordless_4cycles(s);
    // R(x,y): x - p - c - y with c on a chordless 4-cycle and in no triangle
    let mut edge_witness = BTreeMap::new();
    for cyc in &cycles {
        for (i, c) in cyc.iter().enumerate() {
            if tri_of.contains_key(c) {
                continue;
            }
            let q = [cyc[(i + 1) % 4], cyc[(i + 2) % 4], cyc[(i + 3) % 4]];
            for y in adj[c].iter().filter(|y| is_d(y)) {
                for p in adj[c].iter().filter(|p| !is_d(p) && !q.contains(p)) {
                    for x in adj[p].iter().filter(|x| is_d(x) && *x != y) {
                        let q = if q[0] < q[2] { q } else { [q[2], q[1], q[0]] };
                        edge_witness.entry((*x, *y)).or_insert(EdgeBlock { p: *p, c: *c, q });
                    }
                }
            }
        }
    }
    let digraph = Digraph {
        vertices: vertex_witness.keys().copied().collect(),
        edges: edge_witness.keys().copied().collect(),
    };
    let decoded = Decoded {
        digraph,
        vertex_witness,
        edge_witness,
    };
    validate(s, &decoded)?;
    Ok(decoded)
}

/// The witnesses must tile `s` exactly: every node used once, and the
/// gadget edges are all the edges.
fn validate(s: &SymGraph, d: &Decoded) -> Result<(), CodingError> {
    let mut used: BTreeSet<Vertex> = BTreeSet::new();
    let mut expect: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    let claim = |x: Vertex, used: &mut BTreeSet<Vertex>| {
        if used.insert(x) {
            Ok(())
        } else {
            Err(CodingError::InvalidEncoding(format!("node {x} lies in two gadgets")))
        }
    };
    let mut link = |u: Vertex, v: Vertex| {
        expect.insert((u.min(v), u.max(v)));
    };
    for b in d.vertex_witness.values() {
        for x in b.nodes() {
            claim(x, &mut used)?;
        }
        let [t1, t2, t3, t4] = b.t;
        for (x, y) in [(b.n, t1), (b.n, t2), (t1, t2), (b.n, t3), (b.n, t4), (t3, t4)] {
            link(x, y);
        }
    }
    for ((u, v), b) in &d.edge_witness {
        for x in b.nodes() {
            claim(x, &mut used)?;
        }
        let [q1, q2, q3] = b.q;
        for (x, y) in [(*u, b.p), (b.p, b.c), (b.c, *v), (b.c, q1), (q1, q2), (q2, q3), (q3, b.c)] {
            link(x, y);
        }
    }
    if let Some(x) = s.vertices.iter().find(|x| !used.contains(x)) {
        return Err(CodingError::InvalidEncoding(format!("node {x} is in no gadget")));
    }
    if let Some((u, v)) = s.edges.iter().find(|e| !expect.contains(e)) {
        return Err(CodingError::InvalidEncoding(format!("edge {u}-{v} is in no gadget")));
    }
    if let Some((u, v)) = expect.iter().find(|e| !s.edges.contains(e)) {
        return Err(CodingError::InvalidEncoding(format!("gadget edge {u}-{v} is missing")));
    }
    Ok(())
}

/// Checks that `h` is a digraph isomorphism `d0 → d1`, naming an offending
/// vertex or edge otherwise.
pub fn verify_digraph_iso(h: &BTreeMap<Vertex, Vertex>, d0: &Digraph, d1: &Digraph) -> Result<(), CodingError> {
    let bad = |m: String| Err(CodingError::NotIsomorphism(m));
    if let Some(v) = d0.vertices.iter().find(|v| !h.contains_key(v)) {
        return bad(format!("vertex {v} is unmapped"));
    }
    if let Some((v, w)) = h.iter().find(|(v, w)| !d0.vertices.contains(v) || !d1.vertices.contains(w)) {
        return bad(format!("pair {v}->{w} leaves the vertex sets"));
    }
    let image: BTreeSet<Vertex> = h.values().copied().collect();
    if image.len() != h.len() || image != d1.vertices {
        return bad("map is not a bijection of the vertex sets".into());
    }
    for (u, v) in &d0.edges {
        if !d1.edges.contains(&(h[u], h[v])) {
            return bad(format!("edge ({u},{v}) goes to non-edge ({},{})", h[u], h[v]));
        }
    }
    let inv: BTreeMap<Vertex, Vertex> = h.iter().map(|(a, b)| (*b, *a)).collect();
    for (u, v) in &d1.edges {
        if !d0.edges.contains(&(inv[u], inv[v])) {
            return bad(format!("non-edge ({},{}) goes to edge ({u},{v})", inv[u], inv[v]));
        }
    }
    Ok(())
}

/// Checks that `h` is an isomorphism of symmetric graphs.
pub fn verify_sym_iso(h: &BTreeMap<Vertex, Vertex>, s0: &SymGraph, s1: &SymGraph) -> Result<(), CodingError> {
    let bad = |m: String| Err(CodingError::NotIsomorphism(m));
    let dom: BTreeSet<Vertex> = h.keys().copied().collect();
    let image: BTreeSet<Vertex> = h.values().copied().collect();
    if dom != s0.vertices || image != s1.vertices || image.len() != h.len() {
        return bad("map is not a bijection of the node sets".into());
    }
    if s0.edges.len() != s1.edges.len() {
        return bad("edge counts differ".into());
    }
    for (u, v) in &s0.edges {
        if !s1.has_edge(h[u], h[v]) {
            return bad(format!("edge {u}-{v} goes to non-edge {}-{}", h[u], h[v]));
        }
    }
    Ok(())
}

/// Encodes and decodes `d`, returning the map `n_v ↦ v` after checking it
/// is an isomorphism from the decoded digraph onto `d`.
pub fn canonical_iso_roundtrip(d: &Digraph) -> Result<BTreeMap<Vertex, Vertex>, CodingError> {
    let (s, reg) = encode(d)?;
    let decoded = decode(&s)?;
    let iso: BTreeMap<Vertex, Vertex> = reg.vertices.iter().map(|(v, b)| (b.n, *v)).collect();
    verify_digraph_iso(&iso, &decoded.digraph, d)?;
    Ok(iso)
}

/// Lifts a digraph isomorphism `h: d0 → d1` to the encodings, block by
/// block, and checks the result.
pub fn transport_iso(
    h: &BTreeMap<Vertex, Vertex>,
    d0: &Digraph,
    d1: &Digraph,
) -> Result<BTreeMap<Vertex, Vertex>, CodingError> {
    verify_digraph_iso(h, d0, d1)?;
    let (s0, r0) = encode(d0)?;
    let (s1, r1) = encode(d1)?;
    let mut map = BTreeMap::new();
    for (v, b0) in &r0.vertices {
        let b1 = r1.vertices[&h[v]];
        map.extend(b0.nodes().into_iter().zip(b1.nodes()));
    }
    for ((u, v), b0) in &r0.edges {
        let b1 = r1.edges[&(h[u], h[v])];
        map.extend(b0.nodes().into_iter().zip(b1.nodes()));
    }
    verify_sym_iso(&map, &s0, &s1)?;
    Ok(map)
}

/// The digraph isomorphism a symmetric-graph isomorphism induces on the
/// decoded vertices.
pub fn restrict_to_vertices(
    hat: &BTreeMap<Vertex, Vertex>,
    a0: &Decoded,
    a1: &Decoded,
) -> Result<BTreeMap<Vertex, Vertex>, CodingError> {
    let h: BTreeMap<Vertex, Vertex> = a0
        .digraph
        .vertices
        .iter()
        .map(|x| {
            hat.get(x)
                .map(|y| (*x, *y))
                .ok_or_else(|| CodingError::NotIsomorphism(format!("node {x} is unmapped")))
        })
        .collect::<Result<_, _>>()?;
    verify_digraph_iso(&h, &a0.digraph, &a1.digraph)?;
    Ok(h)
}
