//! Graph representation, canonical edge ordering, file I/O, and the two
//! classical primitives (Dijkstra SPT, Kruskal MSF) everything else builds on.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type EdgeId = u32;

/// Edge class used by the canonical order. Real edges are the user's; gadget
/// edges (degree reduction) must sort below every real edge, dummy edges
/// (augmentation star) above every real edge, independent of weight scale.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Tier {
    Gadget = 0,
    Real = 1,
    Dummy = 2,
}

#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
    pub tier: Tier,
}

impl Edge {
    pub fn key(&self) -> CanonicalKey {
        CanonicalKey { tier: self.tier, weight: self.weight, id: self.id }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

/// Total order (tier, weight, id). Two distinct edges never compare equal, so
/// every MSF in the system is unique and testable by exact id-set equality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalKey {
    pub tier: Tier,
    pub weight: f64,
    pub id: EdgeId,
}

impl Eq for CanonicalKey {}

impl Ord for CanonicalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tier
            .cmp(&other.tier)
            .then_with(|| self.weight.total_cmp(&other.weight))
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for CanonicalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_EDGE: u32 = u32::MAX;

/// Simple weighted undirected graph with stable edge ids. Ids need not be
/// dense: subgraphs keep the ids of their parent graph.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    n: u32,
    edges: Vec<Edge>,
    adj: Vec<Vec<EdgeId>>,
    index: Vec<u32>, // id -> position in `edges`, NO_EDGE if unused
    pairs: HashMap<(VertexId, VertexId), EdgeId>,
    next_id: EdgeId,
}

impl Graph {
    pub fn new(n: u32) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n as usize],
            index: Vec::new(),
            pairs: HashMap::new(),
            next_id: 0,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.n
    }

    /// Smallest id not yet in use; fresh edges are assigned ids from here up.
    pub fn next_id(&self) -> EdgeId {
        self.next_id
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::VertexRange { v, n: self.n })
        }
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, weight: f64, tier: Tier) -> Result<EdgeId> {
        let id = self.next_id;
        self.add_edge_with_id(id, u, v, weight, tier)?;
        Ok(id)
    }

    /// Insert with a caller-chosen id (subgraphs preserving parent ids).
    pub fn add_edge_with_id(
        &mut self,
        id: EdgeId,
        u: VertexId,
        v: VertexId,
        weight: f64,
        tier: Tier,
    ) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !weight.is_finite() {
            return Err(Error::BadWeight(weight));
        }
        if self.pairs.contains_key(&norm_pair(u, v)) {
            return Err(Error::EdgeExists { u, v });
        }
        if self.lookup(id).is_some() {
            return Err(Error::InvalidParameter(format!("edge id {id} already in use")));
        }
        if self.index.len() <= id as usize {
            self.index.resize(id as usize + 1, NO_EDGE);
        }
        self.index[id as usize] = self.edges.len() as u32;
        self.edges.push(Edge { id, u, v, weight, tier });
        self.adj[u as usize].push(id);
        self.adj[v as usize].push(id);
        self.pairs.insert(norm_pair(u, v), id);
        self.next_id = self.next_id.max(id + 1);
        Ok(())
    }

    fn lookup(&self, id: EdgeId) -> Option<usize> {
        match self.index.get(id as usize) {
            Some(&pos) if pos != NO_EDGE => Some(pos as usize),
            _ => None,
        }
    }

    pub fn has_edge(&self, id: EdgeId) -> bool {
        self.lookup(id).is_some()
    }

    /// Panics on an unknown id; ids flowing here are internal.
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[self.lookup(id).expect("edge id not in graph")]
    }

    pub fn try_edge(&self, id: EdgeId) -> Result<&Edge> {
        self.lookup(id).map(|p| &self.edges[p]).ok_or(Error::UnknownEdge(id))
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<&Edge> {
        self.pairs.get(&norm_pair(u, v)).map(|&id| self.edge(id))
    }

    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = &Edge> {
        self.adj[v as usize].iter().map(move |&id| self.edge(id))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    /// Redirect one endpoint of an existing edge, keeping id, weight and tier.
    /// Used by degree reduction to hand a tree edge to a gadget leaf.
    pub fn remap_endpoint(&mut self, id: EdgeId, from: VertexId, to: VertexId) -> Result<()> {
        self.check_vertex(to)?;
        let pos = self.lookup(id).ok_or(Error::UnknownEdge(id))?;
        let (u, v) = (self.edges[pos].u, self.edges[pos].v);
        if u != from && v != from {
            return Err(Error::InvalidParameter(format!("edge {id} does not touch {from}")));
        }
        let (nu, nv) = if u == from { (to, v) } else { (u, to) };
        if nu == nv {
            return Err(Error::SelfLoop(nu));
        }
        if self.pairs.contains_key(&norm_pair(nu, nv)) {
            return Err(Error::EdgeExists { u: nu, v: nv });
        }
        self.pairs.remove(&norm_pair(u, v));
        self.pairs.insert(norm_pair(nu, nv), id);
        self.adj[from as usize].retain(|&e| e != id);
        self.adj[to as usize].push(id);
        self.edges[pos].u = nu;
        self.edges[pos].v = nv;
        Ok(())
    }

    /// Append a fresh vertex, returning its index.
    pub fn add_vertex(&mut self) -> VertexId {
        self.n += 1;
        self.adj.push(Vec::new());
        self.n - 1
    }
}

fn norm_pair(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Parse the text graph format. Returns the graph and the optional source
/// from the `s` line. Vertices are 1-based in files, 0-based in memory.
pub fn parse_graph(text: &str) -> Result<(Graph, Option<VertexId>)> {
    let mut graph: Option<Graph> = None;
    let mut source = None;
    let mut want_edges = 0usize;
    let mut seen_edges = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut it = content.split_whitespace();
        let tag = it.next().unwrap();
        let fail = |msg: String| Error::Parse { line, msg };
        match tag {
            "p" => {
                if graph.is_some() {
                    return Err(fail("repeated p line".into()));
                }
                let n: u32 = parse_field(it.next(), line, "vertex count")?;
                want_edges = parse_field(it.next(), line, "edge count")?;
                if n == 0 {
                    return Err(fail("vertex count must be at least 1".into()));
                }
                graph = Some(Graph::new(n));
            }
            "s" => {
                let g = graph.as_ref().ok_or_else(|| Error::Parse {
                    line,
                    msg: "s line before p line".into(),
                })?;
                let s: u32 = parse_field(it.next(), line, "source vertex")?;
                if s == 0 || s > g.n() {
                    return Err(fail(format!("source {s} out of range 1..={}", g.n())));
                }
                if source.replace(s - 1).is_some() {
                    return Err(fail("repeated s line".into()));
                }
            }
            "e" => {
                let g = graph.as_mut().ok_or_else(|| Error::Parse {
                    line,
                    msg: "e line before p line".into(),
                })?;
                let u: u32 = parse_field(it.next(), line, "endpoint")?;
                let v: u32 = parse_field(it.next(), line, "endpoint")?;
                let w: f64 = parse_field(it.next(), line, "weight")?;
                if u == 0 || u > g.n() || v == 0 || v > g.n() {
                    return Err(fail(format!("endpoint out of range 1..={}", g.n())));
                }
                if !w.is_finite() {
                    return Err(fail("weight must be a finite number".into()));
                }
                if seen_edges == want_edges {
                    return Err(fail(format!("more than {want_edges} e lines")));
                }
                g.add_edge(u - 1, v - 1, w, Tier::Real).map_err(|e| Error::Parse {
                    line,
                    msg: match e {
                        Error::SelfLoop(_) => "self-loop".into(),
                        Error::EdgeExists { .. } => "duplicate edge".into(),
                        other => other.to_string(),
                    },
                })?;
                seen_edges += 1;
            }
            _ => return Err(fail(format!("unknown line tag `{tag}`"))),
        }
        if it.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing tokens".into() });
        }
    }

    let graph = graph.ok_or_else(|| Error::Parse { line: 0, msg: "missing p line".into() })?;
    if seen_edges != want_edges {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {want_edges} e lines, found {seen_edges}"),
        });
    }
    Ok((graph, source))
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what} `{tok}`") })
}

/// Write a graph in the same format `parse_graph` reads.
pub fn format_graph(g: &Graph, source: Option<VertexId>) -> String {
    let mut out = String::new();
    out.push_str(&format!("p {} {}\n", g.n(), g.m()));
    if let Some(s) = source {
        out.push_str(&format!("s {}\n", s + 1));
    }
    for e in g.edges() {
        out.push_str(&format!("e {} {} {}\n", e.u + 1, e.v + 1, e.weight));
    }
    out
}

#[derive(Clone, Debug)]
pub struct SptResult {
    pub source: VertexId,
    pub dist: Vec<f64>,
    pub parent_edge: Vec<Option<EdgeId>>,
    /// Tree edge ids, ascending.
    pub tree_edges: Vec<EdgeId>,
}

impl SptResult {
    pub fn reachable(&self, v: VertexId) -> bool {
        self.dist[v as usize].is_finite()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    v: VertexId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want smallest distance first.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `s` with deterministic parents: on equal tentative distance
/// the canonically smaller incoming edge wins, so the tree is unique.
/// Unreachable vertices carry ∞ and no parent.
pub fn dijkstra_spt(g: &Graph, s: VertexId) -> Result<SptResult> {
    g.check_vertex(s)?;
    for e in g.edges() {
        if e.tier == Tier::Real && e.weight <= 0.0 {
            return Err(Error::BadWeight(e.weight));
        }
    }
    let n = g.n() as usize;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[s as usize] = 0.0;
    heap.push(HeapEntry { dist: 0.0, v: s });

    while let Some(HeapEntry { v, .. }) = heap.pop() {
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        let dv = dist[v as usize];
        for e in g.incident(v) {
            let to = e.other(v);
            if done[to as usize] {
                continue;
            }
            let cand = dv + e.weight;
            let cur = dist[to as usize];
            if cand < cur {
                dist[to as usize] = cand;
                parent_edge[to as usize] = Some(e.id);
                heap.push(HeapEntry { dist: cand, v: to });
            } else if cand == cur {
                // Equal-distance tie: keep the canonically smallest parent.
                let better = match parent_edge[to as usize] {
                    Some(p) => e.key() < g.edge(p).key(),
                    None => true,
                };
                if better {
                    parent_edge[to as usize] = Some(e.id);
                }
            }
        }
    }

    let mut tree_edges: Vec<EdgeId> = parent_edge.iter().flatten().copied().collect();
    tree_edges.sort_unstable();
    Ok(SptResult { source: s, dist, parent_edge, tree_edges })
}

pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    /// Returns false if already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            Ordering::Less => self.parent[ra as usize] = rb,
            Ordering::Greater => self.parent[rb as usize] = ra,
            Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
        true
    }

    pub fn connected(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Edge ids sorted by CanonicalOrder; the scan order of every Kruskal run.
pub fn canonical_order(g: &Graph) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = g.edges().iter().map(|e| e.id).collect();
    ids.sort_unstable_by_key(|&id| g.edge(id).key());
    ids
}

/// The unique MSF under CanonicalOrder, as an ascending id list.
pub fn kruskal_msf(g: &Graph) -> Vec<EdgeId> {
    kruskal_msf_avoiding(g, &canonical_order(g), |_| false)
}

/// Kruskal over a precomputed canonical order, skipping banned edges.
/// Callers doing many MSFs of one graph reuse the sort.
pub fn kruskal_msf_avoiding(
    g: &Graph,
    order: &[EdgeId],
    banned: impl Fn(EdgeId) -> bool,
) -> Vec<EdgeId> {
    let mut uf = UnionFind::new(g.n() as usize);
    let mut out = Vec::new();
    for &id in order {
        if banned(id) {
            continue;
        }
        let e = g.edge(id);
        if uf.union(e.u, e.v) {
            out.push(id);
            if out.len() + 1 == g.n() as usize {
                break;
            }
        }
    }
    out.sort_unstable();
    out
}

/// Add a dummy vertex adjacent to everything via dummy-tier edges. The MSF of
/// the result is a single tree whose real-tier part is exactly the MSF of `g`.
pub fn augment_with_dummy(g: &Graph) -> Graph {
    let mut out = Graph::new(g.n() + 1);
    for e in g.edges() {
        out.add_edge_with_id(e.id, e.u, e.v, e.weight, e.tier)
            .expect("clone of a valid graph");
    }
    out.next_id = out.next_id.max(g.next_id());
    let x = g.n();
    for v in 0..g.n() {
        out.add_edge(v, x, 0.0, Tier::Dummy).expect("dummy star");
    }
    out
}
