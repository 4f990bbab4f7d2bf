//! Instance factories: seeded simple random graphs, and the layered family
//! that forces any sparse structure missing a base edge into stretch 2, with
//! the failure sets that expose it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Tier, VertexId};

/// Seeded simple graph: n vertices, m distinct edges, weights uniform in
/// [w_lo, w_hi] (strictly positive). Byte-deterministic per seed.
pub fn gen_random(n: u32, m: usize, w_lo: f64, w_hi: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one vertex".into()));
    }
    let max = n as usize * (n as usize - 1) / 2;
    if m > max {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds the {max} edges of a simple {n}-vertex graph"
        )));
    }
    if !(w_lo.is_finite() && w_hi.is_finite()) || w_lo <= 0.0 || w_hi < w_lo {
        return Err(Error::InvalidParameter(format!(
            "weight range [{w_lo}, {w_hi}] must be positive and ordered"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    if m == max {
        // Complete graph, fixed pair order; only the weights are random.
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v, draw_weight(&mut rng, w_lo, w_hi), Tier::Real)?;
            }
        }
        return Ok(g);
    }
    let mut used: HashSet<(u32, u32)> = HashSet::with_capacity(m);
    while g.m() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || !used.insert((u.min(v), u.max(v))) {
            continue;
        }
        g.add_edge(u, v, draw_weight(&mut rng, w_lo, w_hi), Tier::Real)?;
    }
    Ok(g)
}

fn draw_weight(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// The hard family: a complete bipartite core of unit edges (girth 4), a
/// zero-weight binary tree hanging below the source with one leaf per core
/// vertex, and unit-weight attachment edges. Any subgraph dropping a core
/// edge answers some failure query a factor two too long.
pub struct LowerBoundInstance {
    pub graph: Graph,
    pub s: VertexId,
    /// Core size: 2a vertices.
    pub eta: usize,
    /// Shortest core cycle length; 4 for the bipartite core.
    pub girth: usize,
    /// Leaf attachment weight, girth/2 - 1.
    pub x: f64,
    /// Tree height, ceil(log2 eta).
    pub height: usize,
    pub core_vertices: Vec<VertexId>,
    pub core_edges: Vec<EdgeId>,
    pub tree_edges: Vec<EdgeId>,
    pub attach_edges: Vec<EdgeId>,
    /// Left-to-right tree leaves; leaf i attaches to core_vertices[i].
    pub leaves: Vec<VertexId>,
    /// Rooted-at-s parent pointers over the zero-weight tree.
    pub parent: Vec<Option<(VertexId, EdgeId)>>,
}

impl LowerBoundInstance {
    /// The core alone, for brute-force girth verification.
    pub fn core_subgraph(&self) -> Graph {
        let mut g = Graph::new(self.graph.n());
        for &id in &self.core_edges {
            let e = self.graph.edge(id);
            g.add_edge_with_id(e.id, e.u, e.v, e.weight, Tier::Real)
                .expect("subset of a valid graph");
        }
        g
    }

    /// The leaf attached to a core vertex.
    pub fn leaf_of(&self, core: VertexId) -> Option<VertexId> {
        self.core_vertices
            .iter()
            .position(|&c| c == core)
            .map(|i| self.leaves[i])
    }
}

/// Builds the instance for core side size a (so eta = 2a leaves). Total
/// vertex count is 3*eta - 1: eta leaves, eta - 1 internal tree vertices,
/// eta core vertices.
pub fn gen_lower_bound(a: usize) -> Result<LowerBoundInstance> {
    if a < 2 {
        return Err(Error::InvalidParameter("core side size must be at least 2".into()));
    }
    let eta = 2 * a;
    let n = 3 * eta - 1;
    let mut g = Graph::new(n as u32);
    let mut parent: Vec<Option<(VertexId, EdgeId)>> = vec![None; n];
    let mut tree_edges = Vec::new();
    let mut leaves = Vec::new();

    // Full binary tree over vertices 0..2*eta-1, s = 0, built by splitting
    // the leaf count; every internal vertex has exactly two children.
    let mut next_vertex: u32 = 1;
    let mut stack: Vec<(u32, usize)> = vec![(0, eta)];
    while let Some((v, want)) = stack.pop() {
        if want == 1 {
            leaves.push(v);
            continue;
        }
        let left = next_vertex;
        let right = next_vertex + 1;
        next_vertex += 2;
        for child in [left, right] {
            let e = g.add_edge(v, child, 0.0, Tier::Real)?;
            parent[child as usize] = Some((v, e));
            tree_edges.push(e);
        }
        // Pop order: left subtree explored first keeps leaves left-to-right.
        stack.push((right, want / 2));
        stack.push((left, want - want / 2));
    }
    debug_assert_eq!(next_vertex as usize, 2 * eta - 1);
    debug_assert_eq!(leaves.len(), eta);

    let core_base = (2 * eta - 1) as u32;
    let core_vertices: Vec<u32> = (core_base..core_base + eta as u32).collect();
    let girth = 4usize;
    let x = girth as f64 / 2.0 - 1.0;

    let mut attach_edges = Vec::new();
    for (i, &leaf) in leaves.iter().enumerate() {
        attach_edges.push(g.add_edge(leaf, core_vertices[i], x, Tier::Real)?);
    }
    let mut core_edges = Vec::new();
    for i in 0..a {
        for j in 0..a {
            core_edges.push(g.add_edge(core_vertices[i], core_vertices[a + j], 1.0, Tier::Real)?);
        }
    }

    let height = usize::BITS as usize - (eta - 1).leading_zeros() as usize;
    Ok(LowerBoundInstance {
        graph: g,
        s: 0,
        eta,
        girth,
        x,
        height,
        core_vertices,
        core_edges,
        tree_edges,
        attach_edges,
        leaves,
        parent,
    })
}

/// The failure set that funnels every source-to-core route through one leaf:
/// walking from that leaf up to the root, cut the sibling edge at each
/// internal vertex. At most ceil(log2 eta) edges. `e` must be a core edge;
/// the funneled leaf is the one attached to e's smaller endpoint.
pub fn adversarial_failure_set(inst: &LowerBoundInstance, e: EdgeId) -> Result<Vec<EdgeId>> {
    if !inst.core_edges.contains(&e) {
        return Err(Error::InvalidParameter(format!("edge {e} is not a core edge")));
    }
    let edge = inst.graph.edge(e);
    let u = edge.u.min(edge.v);
    let leaf = inst.leaf_of(u).expect("core vertices carry leaves");

    let mut failures = Vec::new();
    let mut v = leaf;
    while let Some((p, along)) = inst.parent[v as usize] {
        for pe in inst.graph.incident(p) {
            let id = pe.id;
            if id == along {
                continue;
            }
            // Sibling child edge: a zero-weight tree edge not leading up.
            let is_tree = inst.parent[pe.other(p) as usize].map(|(q, _)| q) == Some(p);
            if is_tree {
                failures.push(id);
            }
        }
        v = p;
    }
    debug_assert!(failures.len() <= inst.height);
    Ok(failures)
}
