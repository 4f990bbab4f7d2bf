//! Batch-update sensitivity oracle for the canonical MSF. Preprocess a graph
//! once; each query takes a batch of deletions, insertions, and weight
//! changes and reports the exact symmetric difference against the base MSF,
//! without mutating the oracle. Deletion-only views additionally answer
//! ordered new-edges-on-path queries, which the distance oracle consumes.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::cluster::{
    build_clustering, build_reduced, ClusterHierarchy, ClusterId, CrossEdgeDictionary,
    PathMaxLift, ReducedInstance,
};
use crate::dynforest::LinkCutForest;
use crate::error::{Error, Result};
use crate::graph::{kruskal_msf, CanonicalKey, EdgeId, Graph, Tier, UnionFind, VertexId};

/// Instrumentation for the per-query work bounds. `probes` is every unit of
/// structural work; `edge_touches` only the units that look at an edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounters {
    pub pair_lookups: u64,
    pub entries_examined: u64,
    pub aux_candidates: u64,
    pub split_steps: u64,
    pub walk_steps: u64,
    pub exposures: u64,
}

impl WorkCounters {
    pub fn probes(&self) -> u64 {
        self.pair_lookups + self.entries_examined + self.aux_candidates + self.split_steps
            + self.walk_steps
    }

    pub fn edge_touches(&self) -> u64 {
        self.entries_examined + self.aux_candidates + self.exposures
    }
}

#[derive(Clone, Debug, Default)]
pub struct UpdateBatch {
    pub deletions: Vec<EdgeId>,
    pub insertions: Vec<(VertexId, VertexId, f64)>,
    pub weight_changes: Vec<(EdgeId, f64)>,
}

impl UpdateBatch {
    pub fn deletions_only(ids: &[EdgeId]) -> Self {
        UpdateBatch { deletions: ids.to_vec(), ..Default::default() }
    }

    pub fn k(&self) -> usize {
        self.deletions.len() + self.insertions.len() + self.weight_changes.len()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum UpdateOp {
    Delete(EdgeId),
    Insert(VertexId, VertexId, f64),
    WeightChange(EdgeId, f64),
}

/// Parses the textual batch format: `d <u> <v>`, `i <u> <v> <w>`,
/// `c <u> <v> <w>`, vertices 1-based, `#` starts a comment. Deletions and
/// changes are resolved to edge ids against `base`; errors carry the numbers
/// as written.
pub fn parse_batch(text: &str, base: &Graph) -> Result<UpdateBatch> {
    let mut batch = UpdateBatch::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap();
        let take_vertex = |it: &mut std::str::SplitWhitespace| -> Result<u32> {
            it.next()
                .and_then(|t| t.parse::<u32>().ok())
                .filter(|&v| v >= 1)
                .ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: "expected a 1-based vertex number".into(),
                })
        };
        let take_weight = |it: &mut std::str::SplitWhitespace| -> Result<f64> {
            it.next().and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: "expected a weight".into(),
            })
        };
        let resolve = |u1: u32, v1: u32| -> Result<EdgeId> {
            base.edge_between(u1 - 1, v1 - 1)
                .map(|e| e.id)
                .ok_or(Error::EdgeAbsent { u: u1, v: v1 })
        };
        match tag {
            "d" => {
                let (u, v) = (take_vertex(&mut it)?, take_vertex(&mut it)?);
                batch.deletions.push(resolve(u, v)?);
            }
            "i" => {
                let (u, v) = (take_vertex(&mut it)?, take_vertex(&mut it)?);
                batch.insertions.push((u - 1, v - 1, take_weight(&mut it)?));
            }
            "c" => {
                let (u, v) = (take_vertex(&mut it)?, take_vertex(&mut it)?);
                let id = resolve(u, v)?;
                batch.weight_changes.push((id, take_weight(&mut it)?));
            }
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("unknown update tag '{other}'"),
                })
            }
        }
        if it.next().is_some() {
            return Err(Error::Parse { line: lineno + 1, msg: "trailing tokens".into() });
        }
    }
    Ok(batch)
}

/// Batch after validation: a delete plus an insert of the same vertex pair
/// collapses into a weight change, every id is checked against the base
/// graph, and no edge is touched twice.
struct NormalizedBatch {
    /// Pure deletions, ascending.
    deletions: Vec<EdgeId>,
    /// Weight changes (explicit first, collapsed delete+insert after), batch order.
    changes: Vec<(EdgeId, f64)>,
    /// Fresh insertions, batch order. The i-th gets id base.next_id() + i.
    inserts: Vec<(VertexId, VertexId, f64)>,
    /// deletions ∪ change ids, ascending: everything the structure treats as
    /// removed going into the insertion phase.
    f_del: Vec<EdgeId>,
}

fn normalize(base: &Graph, batch: &UpdateBatch) -> Result<NormalizedBatch> {
    for &id in &batch.deletions {
        base.try_edge(id)?;
    }
    for &(id, w) in &batch.weight_changes {
        base.try_edge(id)?;
        if !w.is_finite() {
            return Err(Error::BadWeight(w));
        }
    }
    let mut deletions = batch.deletions.clone();
    let mut changes = batch.weight_changes.clone();
    let mut inserts: Vec<(VertexId, VertexId, f64)> = Vec::new();
    let mut insert_pairs: HashSet<(VertexId, VertexId)> = HashSet::new();
    for &(u, v, w) in &batch.insertions {
        base.check_vertex(u)?;
        base.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !w.is_finite() {
            return Err(Error::BadWeight(w));
        }
        let pair = if u <= v { (u, v) } else { (v, u) };
        if let Some(e) = base.edge_between(u, v) {
            match deletions.iter().position(|&d| d == e.id) {
                // delete + reinsert of one pair is a weight change
                Some(i) => {
                    deletions.remove(i);
                    changes.push((e.id, w));
                }
                None => return Err(Error::EdgeExists { u, v }),
            }
        } else if !insert_pairs.insert(pair) {
            return Err(Error::EdgeExists { u, v });
        } else {
            inserts.push((u, v, w));
        }
    }
    let mut touched: Vec<EdgeId> =
        deletions.iter().copied().chain(changes.iter().map(|&(id, _)| id)).collect();
    touched.sort_unstable();
    for pair in touched.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::RepeatedUpdate(pair[0]));
        }
    }
    deletions.sort_unstable();
    Ok(NormalizedBatch { deletions, changes, inserts, f_del: touched })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRef {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

/// Symmetric difference against the base MSF, both sides ascending by id:
/// base MSF − removed + added is the canonical MSF of the updated graph.
/// An edge whose membership survives a weight change appears on neither side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MstDelta {
    pub removed: Vec<EdgeRef>,
    pub added: Vec<EdgeRef>,
}

impl MstDelta {
    pub fn removed_ids(&self) -> Vec<EdgeId> {
        self.removed.iter().map(|e| e.id).collect()
    }

    pub fn added_ids(&self) -> Vec<EdgeId> {
        self.added.iter().map(|e| e.id).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }
}

pub struct MsfOracle {
    base: Graph,
    red: ReducedInstance,
    hier: ClusterHierarchy,
    dict: CrossEdgeDictionary,
    lift: PathMaxLift,
    base_msf: Vec<EdgeId>,
    /// Component label per reduced-graph vertex once dummy-tier tree edges
    /// are discounted: labels match iff the vertices share a real component.
    comp_nd: Vec<u32>,
}

pub fn build_oracle(base: &Graph) -> Result<MsfOracle> {
    let red = build_reduced(base)?;
    let hier = build_clustering(&red.tree)?;
    let dict = CrossEdgeDictionary::new(&red.ghat, &red.tree, &hier)?;
    let lift = PathMaxLift::new(&red.ghat, &red.tree);
    let base_msf: Vec<EdgeId> = (0..base.next_id())
        .filter(|&id| {
            red.tree.tree_edge.get(id as usize).copied().unwrap_or(false)
                && red.ghat.edge(id).tier == Tier::Real
        })
        .collect();
    debug_assert_eq!(base_msf, kruskal_msf(base));
    let mut uf = UnionFind::new(red.ghat.n() as usize);
    for (v, p, id) in red.tree.edges() {
        if red.ghat.edge(id).tier != Tier::Dummy {
            uf.union(v, p);
        }
    }
    let comp_nd: Vec<u32> = (0..red.ghat.n()).map(|v| uf.find(v)).collect();
    Ok(MsfOracle { base: base.clone(), red, hier, dict, lift, base_msf, comp_nd })
}

impl MsfOracle {
    pub fn base(&self) -> &Graph {
        &self.base
    }

    /// Canonical MSF of the unmodified graph, ascending ids.
    pub fn base_msf(&self) -> &[EdgeId] {
        &self.base_msf
    }

    pub fn dictionary_entries(&self) -> usize {
        self.dict.entries()
    }

    pub fn hierarchy(&self) -> &ClusterHierarchy {
        &self.hier
    }

    pub fn query(&self, batch: &UpdateBatch) -> Result<MstDelta> {
        self.query_with_stats(batch).map(|(d, _)| d)
    }

    pub fn query_with_stats(&self, batch: &UpdateBatch) -> Result<(MstDelta, WorkCounters)> {
        let norm = normalize(&self.base, batch)?;
        let mut view = DeletionView::new_internal(self, norm.f_del.clone())?;

        let mut removed: BTreeSet<EdgeId> = norm
            .f_del
            .iter()
            .copied()
            .filter(|&id| self.red.tree.tree_edge[id as usize])
            .collect();
        let mut added: BTreeSet<EdgeId> = view
            .session
            .iter()
            .filter(|e| !e.inserted && e.key.tier == Tier::Real)
            .filter(|e| !self.red.tree.tree_edge[e.key.id as usize])
            .map(|e| e.key.id)
            .collect();

        // Insertion phase: weight-changed edges go back first (at their
        // positions in the reduced graph), then fresh edges, in batch order.
        let mut pending: Vec<(CanonicalKey, VertexId, VertexId)> = Vec::new();
        for &(id, w) in &norm.changes {
            let e = self.red.ghat.edge(id);
            pending.push((CanonicalKey { tier: Tier::Real, weight: w, id }, e.u, e.v));
        }
        for (i, &(u, v, w)) in norm.inserts.iter().enumerate() {
            let id = self.base.next_id() + i as u32;
            pending.push((CanonicalKey { tier: Tier::Real, weight: w, id }, u, v));
        }
        for (key, a, b) in pending {
            view.insert_edge(key, a, b, &mut removed, &mut added);
        }

        // A tree edge reinserted and re-accepted cancels its own removal.
        let both: Vec<EdgeId> = removed.intersection(&added).copied().collect();
        for id in &both {
            removed.remove(id);
            added.remove(id);
        }

        let weight_of = |id: EdgeId| -> f64 {
            norm.changes
                .iter()
                .rev()
                .find(|&&(cid, _)| cid == id)
                .map(|&(_, w)| w)
                .unwrap_or_else(|| self.base.edge(id).weight)
        };
        let make_added = |id: EdgeId| -> EdgeRef {
            if id >= self.base.next_id() {
                let (u, v, w) = norm.inserts[(id - self.base.next_id()) as usize];
                EdgeRef { id, u, v, weight: w }
            } else {
                let e = self.base.edge(id);
                EdgeRef { id, u: e.u, v: e.v, weight: weight_of(id) }
            }
        };
        let delta = MstDelta {
            removed: removed
                .into_iter()
                .map(|id| {
                    let e = self.base.edge(id);
                    EdgeRef { id, u: e.u, v: e.v, weight: e.weight }
                })
                .collect(),
            added: added.into_iter().map(make_added).collect(),
        };
        debug_assert!(delta.removed.len() <= batch.k() && delta.added.len() <= batch.k());
        Ok((delta, view.counters))
    }

    /// Deletion-only session for repeated path queries over one failure set.
    pub fn deletion_view(&self, deletions: &[EdgeId]) -> Result<DeletionView<'_>> {
        for &id in deletions {
            self.base.try_edge(id)?;
        }
        let mut f_del = deletions.to_vec();
        f_del.sort_unstable();
        f_del.dedup();
        DeletionView::new_internal(self, f_del)
    }

    /// One-shot form of the path query.
    pub fn path_new_edges(
        &self,
        deletions: &[EdgeId],
        u: VertexId,
        v: VertexId,
    ) -> Result<Option<Vec<Hop>>> {
        let mut view = self.deletion_view(deletions)?;
        Ok(view.path_new_edges(u, v))
    }

    /// Replays a sequence of single updates: the i-th delta answers the batch
    /// of the first i updates, always against the unmodified base graph.
    pub fn dynamic_session(&self, ops: &[UpdateOp]) -> Result<Vec<MstDelta>> {
        let mut out = Vec::with_capacity(ops.len());
        let mut batch = UpdateBatch::default();
        for op in ops {
            match *op {
                UpdateOp::Delete(id) => batch.deletions.push(id),
                UpdateOp::Insert(u, v, w) => batch.insertions.push((u, v, w)),
                UpdateOp::WeightChange(id, w) => batch.weight_changes.push((id, w)),
            }
            out.push(self.query(&batch)?);
        }
        Ok(out)
    }

    fn root_under(&self, split: &HashSet<ClusterId>, v: VertexId) -> ClusterId {
        let mut level = self.hier.levels;
        loop {
            let c = self.hier.cluster_at(v, level);
            if !split.contains(&c) {
                return c;
            }
            level -= 1;
        }
    }
}

/// A new MSF edge on a tree path, oriented: `near` is the endpoint closer to
/// the path's first argument. Weights are the oracle graph's weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hop {
    pub edge: EdgeId,
    pub near: VertexId,
    pub far: VertexId,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
struct SessionEdge {
    key: CanonicalKey,
    a: VertexId,
    b: VertexId,
    /// True for edges existing only in this query's batch; their key.id is
    /// the assigned insertion id, not an id of the reduced graph.
    inserted: bool,
}

/// Ephemeral overlay: the cluster hierarchy with some clusters opened, the
/// surviving-forest edges over the open ("active") clusters, and adjacency
/// for path walks. Splitting is recorded here, never in the oracle.
pub struct DeletionView<'a> {
    o: &'a MsfOracle,
    f_del: Vec<EdgeId>,
    split: HashSet<ClusterId>,
    /// Active clusters, ascending. The session forest spans exactly these.
    active: Vec<ClusterId>,
    session: Vec<SessionEdge>,
    /// Per active index: (session edge index, neighbor active index).
    adj: Vec<Vec<(u32, u32)>>,
    bfs_from: Option<u32>,
    bfs_parent: Vec<Option<(u32, u32)>>,
    pub counters: WorkCounters,
}

impl<'a> DeletionView<'a> {
    fn new_internal(o: &'a MsfOracle, f_del: Vec<EdgeId>) -> Result<Self> {
        let mut view = DeletionView {
            o,
            f_del,
            split: HashSet::new(),
            active: Vec::new(),
            session: Vec::new(),
            adj: Vec::new(),
            bfs_from: None,
            bfs_parent: Vec::new(),
            counters: WorkCounters::default(),
        };
        let mut exposed: Vec<EdgeId> = Vec::new();
        for i in 0..view.f_del.len() {
            let id = view.f_del[i];
            let (u, v) = {
                let e = o.red.ghat.edge(id);
                (e.u, e.v)
            };
            view.split_until_separated(u, v, &mut exposed);
        }
        view.active = view.collect_active();
        view.build_aux(&exposed);
        view.rebuild_adj();
        Ok(view)
    }

    pub fn failed_ids(&self) -> &[EdgeId] {
        &self.f_del
    }

    pub fn active_clusters(&self) -> &[ClusterId] {
        &self.active
    }

    /// Active cluster currently holding `v`.
    pub fn cluster_of(&mut self, v: VertexId) -> ClusterId {
        self.root_of(v)
    }

    /// Forest edges over the active clusters that live in the oracle graph.
    pub fn session_edge_ids(&self) -> Vec<EdgeId> {
        self.session.iter().filter(|e| !e.inserted).map(|e| e.key.id).collect()
    }

    fn root_of(&mut self, v: VertexId) -> ClusterId {
        let mut level = self.o.hier.levels;
        loop {
            let c = self.o.hier.cluster_at(v, level);
            if !self.split.contains(&c) {
                return c;
            }
            self.counters.walk_steps += 1;
            level -= 1;
        }
    }

    fn split(&mut self, c: ClusterId, exposed: &mut Vec<EdgeId>) {
        let o = self.o;
        debug_assert!(!o.hier.node(c).children.is_empty(), "singletons never split");
        self.split.insert(c);
        let node = o.hier.node(c);
        self.counters.split_steps += 1;
        self.counters.exposures += node.internal_edges.len() as u64;
        exposed.extend_from_slice(&node.internal_edges);
    }

    fn split_until_separated(&mut self, u: VertexId, v: VertexId, exposed: &mut Vec<EdgeId>) {
        loop {
            let cu = self.root_of(u);
            if cu != self.root_of(v) {
                return;
            }
            self.split(cu, exposed);
        }
    }

    fn collect_active(&self) -> Vec<ClusterId> {
        let mut active = Vec::new();
        let mut stack = vec![self.o.hier.top];
        while let Some(c) = stack.pop() {
            if self.split.contains(&c) {
                stack.extend_from_slice(&self.o.hier.node(c).children);
            } else {
                active.push(c);
            }
        }
        active.sort_unstable();
        active
    }

    fn active_index(&self, c: ClusterId) -> u32 {
        self.active.binary_search(&c).expect("cluster is active") as u32
    }

    fn is_failed(&self, id: EdgeId) -> bool {
        self.f_del.binary_search(&id).is_ok()
    }

    /// Candidate selection and the auxiliary forest: surviving exposed tree
    /// edges, plus per active pair the first surviving dictionary edge; the
    /// canonical Kruskal over those spans the active clusters.
    fn build_aux(&mut self, exposed: &[EdgeId]) {
        let o = self.o;
        let mut cands: Vec<SessionEdge> = Vec::new();
        for &id in exposed {
            if self.is_failed(id) {
                continue;
            }
            let e = o.red.ghat.edge(id);
            cands.push(SessionEdge { key: e.key(), a: e.u, b: e.v, inserted: false });
        }
        for i in 0..self.active.len() {
            for j in i + 1..self.active.len() {
                self.counters.pair_lookups += 1;
                for id in o.dict.pair_edges(self.active[i], self.active[j]) {
                    self.counters.entries_examined += 1;
                    if self.is_failed(id) {
                        continue;
                    }
                    let e = o.red.ghat.edge(id);
                    cands.push(SessionEdge { key: e.key(), a: e.u, b: e.v, inserted: false });
                    break;
                }
            }
        }
        self.counters.aux_candidates += cands.len() as u64;
        cands.sort_unstable_by_key(|e| e.key);
        let mut uf = UnionFind::new(self.active.len());
        for cand in cands {
            let ca = self.root_of(cand.a);
            let cb = self.root_of(cand.b);
            let (ia, ib) = (self.active_index(ca), self.active_index(cb));
            if uf.union(ia, ib) {
                self.session.push(cand);
            }
        }
        debug_assert!(
            (1..self.active.len() as u32).all(|i| uf.connected(0, i)),
            "the added root vertex keeps the session forest spanning"
        );
    }

    fn rebuild_adj(&mut self) {
        let o = self.o;
        let mut ends = Vec::with_capacity(self.session.len());
        for e in &self.session {
            let a = o.root_under(&self.split, e.a);
            let b = o.root_under(&self.split, e.b);
            ends.push((self.active_index(a), self.active_index(b)));
        }
        self.adj = vec![Vec::new(); self.active.len()];
        for (idx, (ia, ib)) in ends.into_iter().enumerate() {
            self.adj[ia as usize].push((idx as u32, ib));
            self.adj[ib as usize].push((idx as u32, ia));
        }
        self.bfs_from = None;
    }

    fn ensure_bfs(&mut self, from: u32) {
        if self.bfs_from == Some(from) {
            return;
        }
        let n = self.active.len();
        self.bfs_parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[from as usize] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            self.counters.walk_steps += 1;
            for &(eidx, nb) in &self.adj[c as usize] {
                if !seen[nb as usize] {
                    seen[nb as usize] = true;
                    self.bfs_parent[nb as usize] = Some((eidx, c));
                    queue.push_back(nb);
                }
            }
        }
        self.bfs_from = Some(from);
    }

    /// Session edge indices along the unique forest path, in from→to order.
    fn session_path(&mut self, from: u32, to: u32) -> Vec<u32> {
        self.ensure_bfs(from);
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let (eidx, parent) = self.bfs_parent[cur as usize]
                .expect("active clusters are connected through the session forest");
            self.counters.walk_steps += 1;
            path.push(eidx);
            cur = parent;
        }
        path.reverse();
        path
    }

    /// New MSF edges, in order, on the u→v path of the deletion-updated MSF;
    /// None when u and v are disconnected once dummy edges are discounted.
    /// `near` endpoints face u.
    pub fn path_new_edges(&mut self, u: VertexId, v: VertexId) -> Option<Vec<Hop>> {
        let o = self.o;
        let comp = |x: VertexId| o.comp_nd[x as usize];
        let cu = self.root_of(u);
        let cv = self.root_of(v);
        if cu == cv {
            return (comp(u) == comp(v)).then(Vec::new);
        }
        let path = self.session_path(self.active_index(cu), self.active_index(cv));
        let mut hops = Vec::new();
        let mut portal = u;
        let mut cluster = cu;
        for eidx in path {
            let e = self.session[eidx as usize];
            if e.key.tier == Tier::Dummy {
                return None;
            }
            let (near, far) = if self.root_of(e.a) == cluster { (e.a, e.b) } else { (e.b, e.a) };
            if comp(portal) != comp(near) {
                return None;
            }
            if !o.red.tree.tree_edge[e.key.id as usize] {
                hops.push(Hop {
                    edge: e.key.id,
                    near,
                    far,
                    weight: o.red.ghat.edge(e.key.id).weight,
                });
            }
            portal = far;
            cluster = self.root_of(far);
        }
        if comp(portal) != comp(v) {
            return None;
        }
        Some(hops)
    }

    /// Inserts one edge into the evolving forest, netting the delta log.
    /// The replaced edge is the heaviest on the current forest path: either a
    /// session edge or an edge interior to one active cluster.
    fn insert_edge(
        &mut self,
        key: CanonicalKey,
        a: VertexId,
        b: VertexId,
        removed: &mut BTreeSet<EdgeId>,
        added: &mut BTreeSet<EdgeId>,
    ) {
        enum Heaviest {
            Session(usize),
            Intra(EdgeId),
        }
        let o = self.o;
        let cu = self.root_of(a);
        let cv = self.root_of(b);
        let heaviest = if cu == cv {
            self.counters.walk_steps += 1;
            let (pk, pid) = o
                .lift
                .query(&o.red.ghat, a, b)
                .expect("distinct vertices in one cluster have a tree path");
            Some((pk, Heaviest::Intra(pid)))
        } else {
            let (iu, iv) = (self.active_index(cu), self.active_index(cv));
            let path = self.session_path(iu, iv);
            let mut best: Option<(CanonicalKey, Heaviest)> = None;
            let mut portal = a;
            let mut cluster = cu;
            for eidx in path {
                let e = self.session[eidx as usize];
                let (near, far) =
                    if self.root_of(e.a) == cluster { (e.a, e.b) } else { (e.b, e.a) };
                if portal != near {
                    self.counters.walk_steps += 1;
                    if let Some((pk, pid)) = o.lift.query(&o.red.ghat, portal, near) {
                        if best.as_ref().map_or(true, |&(bk, _)| pk > bk) {
                            best = Some((pk, Heaviest::Intra(pid)));
                        }
                    }
                }
                if best.as_ref().map_or(true, |&(bk, _)| e.key > bk) {
                    best = Some((e.key, Heaviest::Session(eidx as usize)));
                }
                portal = far;
                cluster = self.root_of(far);
            }
            if portal != b {
                self.counters.walk_steps += 1;
                if let Some((pk, pid)) = o.lift.query(&o.red.ghat, portal, b) {
                    if best.as_ref().map_or(true, |&(bk, _)| pk > bk) {
                        best = Some((pk, Heaviest::Intra(pid)));
                    }
                }
            }
            debug_assert!(best.is_some(), "a nontrivial forest path has an edge");
            self.check_against_forest(iu, iv, best.as_ref().map(|&(k, _)| k));
            best
        };
        let Some((pm_key, pm_loc)) = heaviest else { return };
        if pm_key < key {
            return;
        }
        match pm_loc {
            Heaviest::Session(idx) => {
                let e = self.session.swap_remove(idx);
                self.net_remove(e, removed, added);
            }
            Heaviest::Intra(pm_id) => {
                let pe = *o.red.ghat.edge(pm_id);
                let mut exposed = Vec::new();
                self.split_until_separated(pe.u, pe.v, &mut exposed);
                self.active = self.collect_active();
                for &id in &exposed {
                    debug_assert!(!self.is_failed(id), "failed edges never sit inside a cluster");
                    if id == pm_id {
                        continue;
                    }
                    let e = o.red.ghat.edge(id);
                    self.session.push(SessionEdge {
                        key: e.key(),
                        a: e.u,
                        b: e.v,
                        inserted: false,
                    });
                }
                self.net_remove(
                    SessionEdge { key: pe.key(), a: pe.u, b: pe.v, inserted: false },
                    removed,
                    added,
                );
            }
        }
        self.session.push(SessionEdge { key, a, b, inserted: true });
        added.insert(key.id);
        self.rebuild_adj();
    }

    fn net_remove(
        &self,
        e: SessionEdge,
        removed: &mut BTreeSet<EdgeId>,
        added: &mut BTreeSet<EdgeId>,
    ) {
        if e.inserted {
            added.remove(&e.key.id);
            return;
        }
        if e.key.tier != Tier::Real {
            return;
        }
        if !added.remove(&e.key.id) && self.o.red.tree.tree_edge[e.key.id as usize] {
            removed.insert(e.key.id);
        }
    }

    /// The dynamic forest mirrors the session edge set; its path maximum can
    /// never exceed the walk's overall maximum. Debug-only cross-check.
    fn check_against_forest(&self, iu: u32, iv: u32, walk_max: Option<CanonicalKey>) {
        if cfg!(debug_assertions) {
            let o = self.o;
            let mut lct = LinkCutForest::new(self.active.len());
            for e in &self.session {
                let a = o.root_under(&self.split, e.a);
                let b = o.root_under(&self.split, e.b);
                lct.link(self.active_index(a) as usize, self.active_index(b) as usize, e.key)
                    .expect("session edges form a forest");
            }
            if let Some((k, _)) = lct.path_max(iu as usize, iv as usize) {
                let w = walk_max.expect("walk saw the same nonempty path");
                debug_assert!(k <= w, "forest max is one of the walk candidates");
            }
        }
    }
}

/// Baseline: rebuilds the updated graph and runs the canonical Kruskal.
/// Returns the MSF ids (ascending) and the updated graph.
pub fn recompute_msf(base: &Graph, batch: &UpdateBatch) -> Result<(Vec<EdgeId>, Graph)> {
    let norm = normalize(base, batch)?;
    let mut g = Graph::new(base.n());
    for e in base.edges() {
        if norm.deletions.binary_search(&e.id).is_ok() {
            continue;
        }
        let w = norm
            .changes
            .iter()
            .rev()
            .find(|&&(id, _)| id == e.id)
            .map(|&(_, w)| w)
            .unwrap_or(e.weight);
        g.add_edge_with_id(e.id, e.u, e.v, w, Tier::Real)?;
    }
    for (i, &(u, v, w)) in norm.inserts.iter().enumerate() {
        g.add_edge_with_id(base.next_id() + i as u32, u, v, w, Tier::Real)?;
    }
    Ok((kruskal_msf(&g), g))
}
