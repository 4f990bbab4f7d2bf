//! Fault-tolerant structure built around the SPT: reweight every non-tree
//! edge to d_T(u) + w + d_T(v), then peel pairwise-disjoint canonical MSF
//! layers of the reweighted graph. The union H of f+1 layers answers
//! up-to-f-failure queries with stretch 2|F|+1.

use crate::error::Result;
use crate::graph::{
    canonical_order, dijkstra_spt, kruskal_msf_avoiding, EdgeId, Graph, SptResult, Tier, VertexId,
};

/// Reweighted view G′ of the base graph: tree edges at 0, non-tree edges at
/// d_T(u) + w + d_T(v). Edges outside the source's component are dropped;
/// ids are shared with the base graph.
pub fn reweight(g: &Graph, spt: &SptResult) -> Graph {
    let mut tree = vec![false; g.next_id() as usize];
    for &id in &spt.tree_edges {
        tree[id as usize] = true;
    }
    let mut out = Graph::new(g.n());
    for e in g.edges() {
        if !spt.reachable(e.u) || !spt.reachable(e.v) {
            continue;
        }
        let w = if tree[e.id as usize] {
            0.0
        } else {
            (spt.dist[e.u as usize] + e.weight) + spt.dist[e.v as usize]
        };
        out.add_edge_with_id(e.id, e.u, e.v, w, Tier::Real).expect("subset of a valid graph");
    }
    out
}

pub struct FtStructure {
    /// None = unbounded budget: peel until the reweighted graph is exhausted,
    /// so H covers every reachable edge and any failure set is in budget.
    pub f: Option<usize>,
    pub spt: SptResult,
    /// G′ (reachable edges, w′ weights, original ids).
    pub reweighted: Graph,
    /// Layer i is the canonical MSF of G′ minus layers 0..i−1. Layer 0 is
    /// exactly the SPT's edge set. Bounded builds pad trailing empty layers
    /// up to f+1 entries.
    pub layers: Vec<Vec<EdgeId>>,
    /// Union of the layers, ascending.
    pub h_edges: Vec<EdgeId>,
    h_member: Vec<bool>,
}

impl FtStructure {
    pub fn in_h(&self, id: EdgeId) -> bool {
        self.h_member.get(id as usize).copied().unwrap_or(false)
    }

    /// The subgraph (V, H) carrying the reweighted weights; the base MST of
    /// the sensitivity oracle the distance oracle queries.
    pub fn h_graph_reweighted(&self) -> Graph {
        let mut out = Graph::new(self.reweighted.n());
        for &id in &self.h_edges {
            let e = self.reweighted.edge(id);
            out.add_edge_with_id(e.id, e.u, e.v, e.weight, Tier::Real)
                .expect("subset of a valid graph");
        }
        out
    }
}

/// Build the structure for budget `f` (None = unbounded). Requires strictly
/// positive weights; disconnected inputs are fine, vertices the source cannot
/// reach simply carry no edges in H.
pub fn build_ft_structure(g: &Graph, s: VertexId, f: Option<usize>) -> Result<FtStructure> {
    let spt = dijkstra_spt(g, s)?;
    let reweighted = reweight(g, &spt);
    let order = canonical_order(&reweighted);
    let mut banned = vec![false; reweighted.next_id() as usize];
    let mut layers: Vec<Vec<EdgeId>> = Vec::new();

    loop {
        if let Some(k) = f {
            if layers.len() == k + 1 {
                break;
            }
        }
        let layer = kruskal_msf_avoiding(&reweighted, &order, |id| banned[id as usize]);
        if layer.is_empty() {
            break;
        }
        for &id in &layer {
            banned[id as usize] = true;
        }
        layers.push(layer);
    }
    if let Some(k) = f {
        while layers.len() < k + 1 {
            layers.push(Vec::new());
        }
    }
    debug_assert!(layers.is_empty() || layers[0] == spt.tree_edges);

    let mut h_edges: Vec<EdgeId> = layers.iter().flatten().copied().collect();
    h_edges.sort_unstable();
    let mut h_member = vec![false; reweighted.next_id() as usize];
    for &id in &h_edges {
        h_member[id as usize] = true;
    }
    Ok(FtStructure { f, spt, reweighted, layers, h_edges, h_member })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn triangle() -> Graph {
        let mut g = Graph::new(3);
        g.add_edge(0, 1, 2.0, Tier::Real).unwrap(); // s-a
        g.add_edge(1, 2, 1.0, Tier::Real).unwrap(); // a-b
        g.add_edge(0, 2, 5.0, Tier::Real).unwrap(); // s-b
        g
    }

    #[test]
    fn reweight_triangle() {
        let g = triangle();
        let spt = dijkstra_spt(&g, 0).unwrap();
        let gp = reweight(&g, &spt);
        assert_eq!(gp.edge(0).weight, 0.0);
        assert_eq!(gp.edge(1).weight, 0.0);
        assert_eq!(gp.edge(2).weight, 8.0); // 0 + 5 + 3
    }

    #[test]
    fn reweight_star_all_zero() {
        let mut g = Graph::new(4);
        for v in 1..4 {
            g.add_edge(0, v, v as f64, Tier::Real).unwrap();
        }
        let spt = dijkstra_spt(&g, 0).unwrap();
        let gp = reweight(&g, &spt);
        assert!(gp.edges().iter().all(|e| e.weight == 0.0));
    }

    #[test]
    fn reweight_drops_unreachable_edges() {
        let mut g = Graph::new(4);
        g.add_edge(0, 1, 1.0, Tier::Real).unwrap();
        g.add_edge(2, 3, 1.0, Tier::Real).unwrap();
        let spt = dijkstra_spt(&g, 0).unwrap();
        let gp = reweight(&g, &spt);
        assert_eq!(gp.m(), 1);
        assert!(gp.has_edge(0));
    }

    #[test]
    fn triangle_layers() {
        let ft = build_ft_structure(&triangle(), 0, Some(1)).unwrap();
        assert_eq!(ft.layers, vec![vec![0, 1], vec![2]]);
        assert_eq!(ft.h_edges, vec![0, 1, 2]);
    }

    #[test]
    fn budget_zero_is_the_tree() {
        let ft = build_ft_structure(&triangle(), 0, Some(0)).unwrap();
        assert_eq!(ft.h_edges, ft.spt.tree_edges);
    }

    #[test]
    fn four_cycle_keeps_everything() {
        let mut g = Graph::new(4);
        g.add_edge(0, 1, 1.0, Tier::Real).unwrap(); // s-a
        g.add_edge(1, 2, 1.0, Tier::Real).unwrap(); // a-t
        g.add_edge(0, 3, 1.0, Tier::Real).unwrap(); // s-b
        g.add_edge(3, 2, 1.0, Tier::Real).unwrap(); // b-t
        let ft = build_ft_structure(&g, 0, Some(1)).unwrap();
        assert_eq!(ft.h_edges, vec![0, 1, 2, 3]);
        assert!(ft.h_edges.len() <= 2 * 3);
    }

    #[test]
    fn tree_input_pads_empty_layers() {
        let mut g = Graph::new(4);
        g.add_edge(0, 1, 1.0, Tier::Real).unwrap();
        g.add_edge(1, 2, 1.0, Tier::Real).unwrap();
        g.add_edge(1, 3, 2.0, Tier::Real).unwrap();
        let ft = build_ft_structure(&g, 0, Some(3)).unwrap();
        assert_eq!(ft.layers.len(), 4);
        assert_eq!(ft.layers[0].len(), 3);
        assert!(ft.layers[1..].iter().all(Vec::is_empty));
    }

    #[test]
    fn unbounded_budget_exhausts_the_graph() {
        let ft = build_ft_structure(&triangle(), 0, None).unwrap();
        assert_eq!(ft.h_edges, vec![0, 1, 2]);
        assert!(ft.layers.iter().all(|l| !l.is_empty()));
    }

    #[test]
    fn layers_are_disjoint() {
        let mut g = Graph::new(5);
        let weights = [3.0, 1.0, 4.0, 1.5, 9.0, 2.5, 6.0];
        let pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 3), (0, 4)];
        for (&(u, v), &w) in pairs.iter().zip(&weights) {
            g.add_edge(u, v, w, Tier::Real).unwrap();
        }
        let ft = build_ft_structure(&g, 0, Some(2)).unwrap();
        let mut seen = std::collections::HashSet::new();
        for layer in &ft.layers {
            for &id in layer {
                assert!(seen.insert(id), "edge {id} in two layers");
            }
        }
        assert!(ft.h_edges.len() <= 3 * 4);
    }
}
