//! Rooted-tree preprocessing for the batch-update oracle: degree reduction,
//! a balanced merge hierarchy of tree clusters, static heaviest-edge-on-path
//! queries, and a dictionary mapping cluster pairs to the non-tree edges
//! joining them.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{
    augment_with_dummy, canonical_order, kruskal_msf, CanonicalKey, EdgeId, Graph, Tier, VertexId,
};

pub type ClusterId = u32;

/// Parent/child/depth view of a spanning tree given by its edge id set.
pub struct TreeIndex {
    pub root: VertexId,
    /// parent vertex and the tree edge reaching it; None at the root.
    pub parent: Vec<Option<(VertexId, EdgeId)>>,
    pub children: Vec<Vec<VertexId>>,
    pub depth: Vec<u32>,
    /// Indexed by edge id.
    pub tree_edge: Vec<bool>,
    /// Vertices in root-first BFS order.
    pub order: Vec<VertexId>,
}

impl TreeIndex {
    pub fn new(g: &Graph, tree: &[EdgeId], root: VertexId) -> Result<Self> {
        let n = g.n() as usize;
        g.check_vertex(root)?;
        if tree.len() + 1 != n {
            return Err(Error::InvalidParameter(format!(
                "{} tree edges cannot span {} vertices",
                tree.len(),
                n
            )));
        }
        let mut tree_edge = vec![false; g.next_id() as usize];
        let mut adj: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); n];
        for &id in tree {
            let e = g.try_edge(id)?;
            tree_edge[id as usize] = true;
            adj[e.u as usize].push((e.v, id));
            adj[e.v as usize].push((e.u, id));
        }
        let mut parent: Vec<Option<(VertexId, EdgeId)>> = vec![None; n];
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut depth = vec![0u32; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        seen[root as usize] = true;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<(VertexId, EdgeId)> =
                adj[v as usize].iter().copied().filter(|&(w, _)| !seen[w as usize]).collect();
            next.sort_by_key(|&(w, _)| w);
            for (w, id) in next {
                seen[w as usize] = true;
                parent[w as usize] = Some((v, id));
                children[v as usize].push(w);
                depth[w as usize] = depth[v as usize] + 1;
                order.push(w);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidParameter("tree edges do not span the graph".into()));
        }
        Ok(TreeIndex { root, parent, children, depth, tree_edge, order })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Tree edges as (child, parent, edge id), one per non-root vertex.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, EdgeId)> + '_ {
        self.order
            .iter()
            .filter_map(move |&v| self.parent[v as usize].map(|(p, id)| (v, p, id)))
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.parent[v as usize].map(|(_, id)| id)
    }
}

/// Dummy-augmented graph whose canonical spanning tree has been rewired so no
/// vertex keeps more than two tree children. Vertices with more children get
/// a balanced binary thicket of weight-zero gadget edges below them, and each
/// original child edge is re-hung from a gadget leaf in place, keeping its id,
/// weight, and tier.
pub struct ReducedInstance {
    pub ghat: Graph,
    pub tree: TreeIndex,
    pub dummy: VertexId,
    pub n_user: usize,
    /// For every ghat vertex, the original vertex it stands for (identity for
    /// non-gadget vertices).
    pub vertex_origin: Vec<VertexId>,
}

/// Augments `g` with a dummy root, takes the canonical spanning tree, and
/// reduces tree degrees to at most three.
pub fn build_reduced(g: &Graph) -> Result<ReducedInstance> {
    let aug = augment_with_dummy(g);
    let dummy = g.n() as VertexId;
    let tree0 = kruskal_msf(&aug);
    let index0 = TreeIndex::new(&aug, &tree0, dummy)?;

    let mut ghat = aug.clone();
    let mut tree_ids: Vec<EdgeId> = tree0.clone();
    let mut vertex_origin: Vec<VertexId> = (0..ghat.n() as VertexId).collect();

    for v in 0..aug.n() as VertexId {
        let kids = &index0.children[v as usize];
        if kids.len() <= 2 {
            continue;
        }
        let mut child_edges: Vec<EdgeId> =
            kids.iter().map(|&c| index0.parent_edge(c).unwrap()).collect();
        child_edges.sort_by_key(|&id| ghat.edge(id).key());
        expand(&mut ghat, &mut tree_ids, &mut vertex_origin, v, v, &child_edges)?;
    }

    let tree = TreeIndex::new(&ghat, &tree_ids, dummy)?;
    debug_assert!({
        let mut want = tree_ids.clone();
        want.sort_unstable();
        kruskal_msf(&ghat) == want
    });
    Ok(ReducedInstance { ghat, tree, dummy, n_user: g.n() as usize, vertex_origin })
}

fn expand(
    ghat: &mut Graph,
    tree_ids: &mut Vec<EdgeId>,
    vertex_origin: &mut Vec<VertexId>,
    center: VertexId,
    at: VertexId,
    edges: &[EdgeId],
) -> Result<()> {
    if edges.len() == 1 {
        if at != center {
            ghat.remap_endpoint(edges[0], center, at)?;
        }
        return Ok(());
    }
    let left = ghat.add_vertex();
    vertex_origin.push(center);
    tree_ids.push(ghat.add_edge(at, left, 0.0, Tier::Gadget)?);
    let right = ghat.add_vertex();
    vertex_origin.push(center);
    tree_ids.push(ghat.add_edge(at, right, 0.0, Tier::Gadget)?);
    let mid = edges.len().div_ceil(2);
    expand(ghat, tree_ids, vertex_origin, center, left, &edges[..mid])?;
    expand(ghat, tree_ids, vertex_origin, center, right, &edges[mid..])?;
    Ok(())
}

#[derive(Debug)]
pub struct ClusterNode {
    pub level: u32,
    /// Cluster one level up that contains this one; None only at the top.
    pub parent: Option<ClusterId>,
    /// Member clusters one level down, ascending; empty at level 0.
    pub children: Vec<ClusterId>,
    /// Tree vertices covered, ascending.
    pub members: Vec<VertexId>,
    /// Tree edges joining two distinct children of this cluster. These are
    /// exactly the edges exposed when the cluster is split, and every tree
    /// edge belongs to exactly one cluster this way.
    pub internal_edges: Vec<EdgeId>,
}

/// Partition hierarchy over a rooted tree of degree at most three. Level 0
/// holds the singletons (cluster id = vertex id); each later level groups
/// every cluster of the previous level with at least one tree neighbor, so
/// the level count is logarithmic.
pub struct ClusterHierarchy {
    pub clusters: Vec<ClusterNode>,
    pub n_vertices: usize,
    /// Number of merge rounds; chains have levels + 1 entries.
    pub levels: usize,
    pub top: ClusterId,
    /// Largest child count over all non-singleton clusters.
    pub max_arity: usize,
    /// chain[level * n + v] = cluster containing v at that level.
    chain: Vec<ClusterId>,
}

impl ClusterHierarchy {
    pub fn node(&self, c: ClusterId) -> &ClusterNode {
        &self.clusters[c as usize]
    }

    pub fn cluster_at(&self, v: VertexId, level: usize) -> ClusterId {
        self.chain[level * self.n_vertices + v as usize]
    }

    /// Lowest level at which u and v share a cluster, with that cluster.
    pub fn meet(&self, u: VertexId, v: VertexId) -> (usize, ClusterId) {
        for level in 0..=self.levels {
            let cu = self.cluster_at(u, level);
            if cu == self.cluster_at(v, level) {
                return (level, cu);
            }
        }
        unreachable!("the top cluster holds every vertex")
    }
}

pub fn build_clustering(tree: &TreeIndex) -> Result<ClusterHierarchy> {
    let n = tree.n();
    for v in 0..n {
        let deg = tree.children[v].len() + usize::from(tree.parent[v].is_some());
        if deg > 3 {
            return Err(Error::DegreeBound(deg));
        }
    }

    let mut clusters: Vec<ClusterNode> = (0..n)
        .map(|v| ClusterNode {
            level: 0,
            parent: None,
            children: Vec::new(),
            members: vec![v as VertexId],
            internal_edges: Vec::new(),
        })
        .collect();
    let mut chain: Vec<ClusterId> = (0..n as ClusterId).collect();

    // Working contracted tree over cluster ids.
    let mut w_parent: Vec<Option<ClusterId>> = vec![None; n];
    let mut w_children: Vec<Vec<ClusterId>> = vec![Vec::new(); n];
    for v in 0..n {
        if let Some((p, _)) = tree.parent[v] {
            w_parent[v] = Some(p);
            w_children[p as usize].push(v as ClusterId);
        }
    }
    let mut w_root: ClusterId = tree.root;
    let mut w_live: Vec<ClusterId> = (0..n as ClusterId).collect();
    let mut level = 0u32;
    let mut max_arity = 0usize;

    while w_live.len() > 1 {
        level += 1;
        // Depths of the current contracted tree.
        let mut w_depth: Vec<(ClusterId, u32)> = Vec::with_capacity(w_live.len());
        let mut stack = vec![(w_root, 0u32)];
        while let Some((c, d)) = stack.pop() {
            w_depth.push((c, d));
            for &k in &w_children[c as usize] {
                stack.push((k, d + 1));
            }
        }
        debug_assert_eq!(w_depth.len(), w_live.len());

        let mut heap: BinaryHeap<(u32, Reverse<ClusterId>)> =
            w_depth.iter().map(|&(c, d)| (d, Reverse(c))).collect();
        let mut removed: Vec<bool> = vec![false; clusters.len()];
        let mut remaining = w_live.len();
        let mut new_live: Vec<ClusterId> = Vec::new();

        while let Some((_, Reverse(c))) = heap.pop() {
            if removed[c as usize] {
                continue;
            }
            let mut members: Vec<ClusterId> = w_children[c as usize]
                .iter()
                .copied()
                .filter(|&k| !removed[k as usize])
                .collect();
            if members.is_empty() {
                continue; // the parent's turn will pick this one up
            }
            members.push(c);
            if remaining == members.len() + 1 {
                // Grouping now would strand exactly one vertex, and it is
                // always the parent of c; absorb it instead.
                let p = w_parent[c as usize].expect("a stranded leftover sits above c");
                members.push(p);
            }
            remaining -= members.len();
            members.sort_unstable();
            let id = clusters.len() as ClusterId;
            let mut member_vertices: Vec<VertexId> = Vec::new();
            for &m in &members {
                removed[m as usize] = true;
                clusters[m as usize].parent = Some(id);
                member_vertices.extend_from_slice(&clusters[m as usize].members);
            }
            member_vertices.sort_unstable();
            max_arity = max_arity.max(members.len());
            clusters.push(ClusterNode {
                level,
                parent: None,
                children: members,
                members: member_vertices,
                internal_edges: Vec::new(),
            });
            new_live.push(id);
        }
        debug_assert_eq!(remaining, 0, "every cluster joins a group each round");
        // Rebuild the contracted tree over the new clusters. The one member
        // whose old parent lies outside the group names the new parent.
        for &id in &new_live {
            w_parent.push(None);
            w_children.push(Vec::new());
            debug_assert_eq!(w_parent.len() - 1, id as usize);
        }
        for &id in &new_live {
            let mut outside: Option<ClusterId> = None;
            for &m in &clusters[id as usize].children {
                if let Some(p) = w_parent[m as usize] {
                    let owner = clusters[p as usize].parent.unwrap();
                    if owner != id {
                        debug_assert!(outside.is_none(), "a cluster meets the rest through one edge");
                        outside = Some(owner);
                    }
                }
            }
            if let Some(p) = outside {
                w_parent[id as usize] = Some(p);
                w_children[p as usize].push(id);
            } else {
                w_root = id;
            }
        }
        for &id in &new_live {
            w_children[id as usize].sort_unstable();
        }
        chain.extend(std::iter::repeat(0).take(n));
        for &id in &new_live {
            for &v in &clusters[id as usize].members {
                chain[level as usize * n + v as usize] = id;
            }
        }
        w_live = new_live;
    }

    let top = w_live[0];
    let levels = level as usize;
    let mut hier = ClusterHierarchy { clusters, n_vertices: n, levels, top, max_arity, chain };

    // Hang every tree edge off the lowest cluster containing both endpoints.
    let mut assignments: Vec<(ClusterId, EdgeId)> = tree
        .edges()
        .map(|(v, p, id)| {
            let (_, c) = hier.meet(v, p);
            (c, id)
        })
        .collect();
    assignments.sort_unstable();
    for (c, id) in assignments {
        hier.clusters[c as usize].internal_edges.push(id);
    }
    Ok(hier)
}

/// Binary-lifting tables answering "heaviest tree edge on the u..v path" in
/// O(log n), by canonical key.
pub struct PathMaxLift {
    up: Vec<Vec<VertexId>>,
    best: Vec<Vec<EdgeId>>,
    depth: Vec<u32>,
}

const NO_EDGE: EdgeId = EdgeId::MAX;

impl PathMaxLift {
    pub fn new(g: &Graph, tree: &TreeIndex) -> Self {
        let n = tree.n();
        let max_depth = tree.depth.iter().copied().max().unwrap_or(0);
        let levels = (u32::BITS - max_depth.leading_zeros()).max(1) as usize;
        let mut up = vec![vec![0 as VertexId; n]; levels];
        let mut best = vec![vec![NO_EDGE; n]; levels];
        for v in 0..n {
            match tree.parent[v] {
                Some((p, id)) => {
                    up[0][v] = p;
                    best[0][v] = id;
                }
                None => up[0][v] = v as VertexId,
            }
        }
        let pick = |a: EdgeId, b: EdgeId| -> EdgeId {
            match (a, b) {
                (NO_EDGE, x) | (x, NO_EDGE) => x,
                (a, b) if g.edge(a).key() >= g.edge(b).key() => a,
                (_, b) => b,
            }
        };
        for k in 1..levels {
            for v in 0..n {
                let mid = up[k - 1][v];
                up[k][v] = up[k - 1][mid as usize];
                best[k][v] = pick(best[k - 1][v], best[k - 1][mid as usize]);
            }
        }
        PathMaxLift { up, best, depth: tree.depth.clone() }
    }

    /// Heaviest edge on the tree path; None when u == v.
    pub fn query(&self, g: &Graph, u: VertexId, v: VertexId) -> Option<(CanonicalKey, EdgeId)> {
        if u == v {
            return None;
        }
        let mut winner: Option<EdgeId> = None;
        let consider = |id: EdgeId, winner: &mut Option<EdgeId>| {
            if id == NO_EDGE {
                return;
            }
            *winner = match *winner {
                Some(w) if g.edge(w).key() >= g.edge(id).key() => Some(w),
                _ => Some(id),
            };
        };
        let (mut a, mut b) = (u, v);
        if self.depth[a as usize] < self.depth[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut gap = self.depth[a as usize] - self.depth[b as usize];
        let mut k = 0;
        while gap > 0 {
            if gap & 1 == 1 {
                consider(self.best[k][a as usize], &mut winner);
                a = self.up[k][a as usize];
            }
            gap >>= 1;
            k += 1;
        }
        if a != b {
            for k in (0..self.up.len()).rev() {
                if self.up[k][a as usize] != self.up[k][b as usize] {
                    consider(self.best[k][a as usize], &mut winner);
                    consider(self.best[k][b as usize], &mut winner);
                    a = self.up[k][a as usize];
                    b = self.up[k][b as usize];
                }
            }
            consider(self.best[0][a as usize], &mut winner);
            consider(self.best[0][b as usize], &mut winner);
        }
        winner.map(|id| (g.edge(id).key(), id))
    }
}

/// For every unordered pair of clusters, the non-tree edges with one endpoint
/// under each, in canonical order. Stored as one sorted array of packed
/// (cluster, cluster, rank) words; a pair's list is a binary-searched slice.
pub struct CrossEdgeDictionary {
    packed: Vec<u64>,
    canon_by_rank: Vec<EdgeId>,
}

const CLUSTER_BITS: u32 = 20;
const RANK_BITS: u32 = 24;

impl CrossEdgeDictionary {
    pub fn new(g: &Graph, tree: &TreeIndex, hier: &ClusterHierarchy) -> Result<Self> {
        if hier.clusters.len() >= 1 << CLUSTER_BITS {
            return Err(Error::InvalidParameter(format!(
                "{} clusters exceed the dictionary's packing range",
                hier.clusters.len()
            )));
        }
        if g.m() >= 1 << RANK_BITS {
            return Err(Error::InvalidParameter(format!(
                "{} edges exceed the dictionary's packing range",
                g.m()
            )));
        }
        let canon_by_rank = canonical_order(g);
        let mut rank_of = vec![0u32; g.next_id() as usize];
        for (r, &id) in canon_by_rank.iter().enumerate() {
            rank_of[id as usize] = r as u32;
        }
        let mut packed = Vec::new();
        for e in g.edges() {
            if tree.tree_edge[e.id as usize] {
                continue;
            }
            let (meet_level, _) = hier.meet(e.u, e.v);
            let rank = rank_of[e.id as usize] as u64;
            for i in 0..meet_level {
                let cu = hier.cluster_at(e.u, i);
                for j in 0..meet_level {
                    let cv = hier.cluster_at(e.v, j);
                    let (a, b) = if cu <= cv { (cu, cv) } else { (cv, cu) };
                    packed.push(
                        ((a as u64) << (CLUSTER_BITS + RANK_BITS)) | ((b as u64) << RANK_BITS) | rank,
                    );
                }
            }
        }
        packed.sort_unstable();
        Ok(CrossEdgeDictionary { packed, canon_by_rank })
    }

    pub fn entries(&self) -> usize {
        self.packed.len()
    }

    /// Edges joining clusters a and b, ascending by canonical key.
    pub fn pair_edges(&self, a: ClusterId, b: ClusterId) -> impl Iterator<Item = EdgeId> + '_ {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let lo = ((a as u64) << (CLUSTER_BITS + RANK_BITS)) | ((b as u64) << RANK_BITS);
        let hi = lo + (1 << RANK_BITS);
        let start = self.packed.partition_point(|&w| w < lo);
        let end = self.packed.partition_point(|&w| w < hi);
        self.packed[start..end]
            .iter()
            .map(move |&w| self.canon_by_rank[(w & ((1 << RANK_BITS) - 1)) as usize])
    }
}
