//! Single-source post-failure distance and path queries. The oracle couples
//! the shortest-path tree and its sparse fault-tolerant subgraph with the MSF
//! sensitivity machinery: failing F edges, the replacement path from s to t is
//! read off the updated forest as tree segments stitched together by at most
//! |F| replacement hops, and its weight certifies d(s,t) in G − F up to a
//! factor 2|F|+1.

use crate::aspt::{build_ft_structure, FtStructure};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, SptResult, VertexId};
use crate::msf_oracle::{build_oracle, DeletionView, MsfOracle};

/// Constant-time lowest-common-ancestor queries over a rooted forest, via an
/// Euler tour and a sparse min-depth table. Also the keeper of the parent
/// pointers the path walks climb.
pub struct LcaOracle {
    parent: Vec<Option<(VertexId, EdgeId)>>,
    depth: Vec<u32>,
    comp: Vec<u32>,
    first: Vec<usize>,
    euler: Vec<VertexId>,
    table: Vec<Vec<u32>>,
}

impl LcaOracle {
    pub fn from_parents(parent: Vec<Option<(VertexId, EdgeId)>>) -> Self {
        let n = parent.len();
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for v in 0..n {
            match parent[v] {
                Some((p, _)) => children[p as usize].push(v as u32),
                None => roots.push(v as u32),
            }
        }
        let mut depth = vec![0u32; n];
        let mut comp = vec![0u32; n];
        let mut first = vec![usize::MAX; n];
        let mut euler = Vec::with_capacity(2 * n);
        for (ci, &root) in roots.iter().enumerate() {
            // Tour: emit the vertex on entry and again after each child.
            let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
            comp[root as usize] = ci as u32;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if *next == 0 {
                    first[v as usize] = euler.len();
                    euler.push(v);
                }
                if let Some(&c) = children[v as usize].get(*next) {
                    *next += 1;
                    comp[c as usize] = ci as u32;
                    depth[c as usize] = depth[v as usize] + 1;
                    stack.push((c, 0));
                } else {
                    stack.pop();
                    if let Some(&(p, _)) = stack.last() {
                        euler.push(p);
                    }
                }
            }
        }

        let len = euler.len();
        let log = usize::BITS - len.max(1).leading_zeros();
        let mut table: Vec<Vec<u32>> = Vec::with_capacity(log as usize);
        table.push((0..len as u32).collect());
        let mut span = 1;
        while 2 * span <= len {
            let prev = table.last().expect("seeded above");
            let mut row = Vec::with_capacity(len - 2 * span + 1);
            for i in 0..len - 2 * span + 1 {
                let a = prev[i];
                let b = prev[i + span];
                row.push(if depth[euler[a as usize] as usize] <= depth[euler[b as usize] as usize] {
                    a
                } else {
                    b
                });
            }
            table.push(row);
            span *= 2;
        }
        LcaOracle { parent, depth, comp, first, euler, table }
    }

    pub fn from_spt(g: &Graph, spt: &SptResult) -> Self {
        let parent = (0..g.n())
            .map(|v| spt.parent_edge[v as usize].map(|e| (g.edge(e).other(v), e)))
            .collect();
        Self::from_parents(parent)
    }

    pub fn parent(&self, v: VertexId) -> Option<(VertexId, EdgeId)> {
        self.parent[v as usize]
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v as usize]
    }

    pub fn lca(&self, u: VertexId, v: VertexId) -> Result<VertexId> {
        if self.comp[u as usize] != self.comp[v as usize] {
            return Err(Error::DifferentTrees);
        }
        if u == v {
            return Ok(u);
        }
        let (lo, hi) = {
            let a = self.first[u as usize];
            let b = self.first[v as usize];
            (a.min(b), a.max(b))
        };
        let k = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let a = self.table[k][lo];
        let b = self.table[k][hi + 1 - (1 << k)];
        let pick = if self.depth[self.euler[a as usize] as usize]
            <= self.depth[self.euler[b as usize] as usize]
        {
            a
        } else {
            b
        };
        Ok(self.euler[pick as usize])
    }
}

/// A validated failure set: known ids, deduplicated, within budget. `in_h`
/// is the part that intersects the sparse subgraph; the rest cannot affect
/// any answer and is carried only for bookkeeping.
#[derive(Clone, Debug)]
pub struct FailureSet {
    ids: Vec<EdgeId>,
    in_h: Vec<EdgeId>,
}

impl FailureSet {
    pub fn ids(&self) -> &[EdgeId] {
        &self.ids
    }

    pub fn in_h(&self) -> &[EdgeId] {
        &self.in_h
    }
}

/// One replacement hop of an answer path: the non-tree edge crossed, its
/// orientation along the path (`near` on the s side), and the anchor where
/// the following tree segment turns back down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub edge: EdgeId,
    pub near: VertexId,
    pub far: VertexId,
    pub anchor: VertexId,
}

/// A fully materialized s-to-t answer. The total is the plain left-to-right
/// sum of the edge weights, byte-identical to what `query_distance` returns.
#[derive(Clone, Debug)]
pub struct PathAnswer {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub total: f64,
    pub trace: Vec<TraceStep>,
}

pub struct Ssdo {
    pub base: Graph,
    pub s: VertexId,
    /// None: unbounded budget, every failure set is in budget.
    pub f: Option<usize>,
    pub ft: FtStructure,
    pub q: MsfOracle,
    pub lca: LcaOracle,
}

/// Budgeted build: the subgraph H is sized for at most `f` failures.
pub fn build_ssdo(g: &Graph, s: VertexId, f: usize) -> Result<Ssdo> {
    build_with(g, s, Some(f))
}

/// Unbounded build: H keeps every reachable edge, any failure set queries.
pub fn build_ssdo_any_f(g: &Graph, s: VertexId) -> Result<Ssdo> {
    build_with(g, s, None)
}

fn build_with(g: &Graph, s: VertexId, f: Option<usize>) -> Result<Ssdo> {
    let ft = build_ft_structure(g, s, f)?;
    let q = build_oracle(&ft.h_graph_reweighted())?;
    // Tree edges carry reweighted weight 0 and canonically precede the rest,
    // so the sensitivity oracle's resting forest is exactly the SPT.
    debug_assert_eq!(q.base_msf(), &ft.spt.tree_edges[..]);
    let lca = LcaOracle::from_spt(g, &ft.spt);
    Ok(Ssdo { base: g.clone(), s, f, ft, q, lca })
}

impl Ssdo {
    /// Validates ids against the full graph, deduplicates, and enforces the
    /// budget. Ids outside H are kept in the set but never reach the
    /// sensitivity oracle: removing them from H is a no-op.
    pub fn check_failures(&self, failures: &[EdgeId]) -> Result<FailureSet> {
        let mut ids = failures.to_vec();
        ids.sort_unstable();
        ids.dedup();
        for &id in &ids {
            self.base.try_edge(id)?;
        }
        if let Some(bound) = self.f {
            if ids.len() > bound {
                return Err(Error::TooManyFailures { got: ids.len(), bound });
            }
        }
        let in_h = ids.iter().copied().filter(|&id| self.ft.in_h(id)).collect();
        Ok(FailureSet { ids, in_h })
    }

    /// A reusable per-failure-set session; amortizes the forest surgery over
    /// many targets.
    pub fn session(&self, failures: &[EdgeId]) -> Result<SsdoSession<'_>> {
        let fs = self.check_failures(failures)?;
        let view = self.q.deletion_view(fs.in_h())?;
        Ok(SsdoSession { o: self, fs, view })
    }

    pub fn query_distance(&self, failures: &[EdgeId], t: VertexId) -> Result<f64> {
        self.base.check_vertex(t)?;
        let mut session = self.session(failures)?;
        Ok(session.distance(t))
    }

    pub fn query_path(&self, failures: &[EdgeId], t: VertexId) -> Result<Option<PathAnswer>> {
        self.base.check_vertex(t)?;
        let mut session = self.session(failures)?;
        Ok(session.path(t))
    }
}

pub struct SsdoSession<'a> {
    o: &'a Ssdo,
    fs: FailureSet,
    view: DeletionView<'a>,
}

impl SsdoSession<'_> {
    pub fn failures(&self) -> &FailureSet {
        &self.fs
    }

    pub fn distance(&mut self, t: VertexId) -> f64 {
        self.path(t).map_or(f64::INFINITY, |pa| pa.total)
    }

    /// None when t is unreachable from s in H minus the failures.
    pub fn path(&mut self, t: VertexId) -> Option<PathAnswer> {
        let o = self.o;
        assert!(t < o.base.n());
        if t == o.s {
            return Some(PathAnswer {
                vertices: vec![o.s],
                edges: Vec::new(),
                total: 0.0,
                trace: Vec::new(),
            });
        }
        let hops = self.view.path_new_edges(o.s, t)?;

        let mut vertices = vec![o.s];
        let mut edges = Vec::new();
        let mut seg_anchors = Vec::with_capacity(hops.len() + 1);
        let mut cur = o.s;
        for hop in &hops {
            seg_anchors.push(extend_tree_walk(o, cur, hop.near, &mut vertices, &mut edges));
            edges.push(hop.edge);
            vertices.push(hop.far);
            cur = hop.far;
        }
        seg_anchors.push(extend_tree_walk(o, cur, t, &mut vertices, &mut edges));

        let trace: Vec<TraceStep> = hops
            .iter()
            .enumerate()
            .map(|(i, hop)| TraceStep {
                edge: hop.edge,
                near: hop.near,
                far: hop.far,
                anchor: seg_anchors[i + 1],
            })
            .collect();
        let total = edges.iter().fold(0.0, |acc, &id| acc + o.base.edge(id).weight);

        debug_assert!(trace.len() <= self.fs.ids.len());
        debug_assert!(edges.iter().all(|id| self.fs.ids.binary_search(id).is_err()));
        #[cfg(debug_assertions)]
        {
            // The anchored tree segments measure as root-distance differences;
            // the closed form must agree with the edge sum.
            let d = &o.ft.spt.dist;
            let mut formula = match hops.first() {
                Some(h) => d[h.near as usize],
                None => d[t as usize],
            };
            for (i, hop) in hops.iter().enumerate() {
                let next = if i + 1 < hops.len() { hops[i + 1].near } else { t };
                let r = seg_anchors[i + 1] as usize;
                formula += o.base.edge(hop.edge).weight
                    + (d[hop.far as usize] - d[r])
                    + (d[next as usize] - d[r]);
            }
            debug_assert!(
                (formula - total).abs() <= 1e-9 * total.abs().max(1.0),
                "segment formula {formula} vs edge sum {total}"
            );
        }

        Some(PathAnswer { vertices, edges, total, trace })
    }
}

/// Appends the tree path from `a` (already last in `vertices`) to `b`;
/// returns the meeting ancestor.
fn extend_tree_walk(
    o: &Ssdo,
    a: VertexId,
    b: VertexId,
    vertices: &mut Vec<VertexId>,
    edges: &mut Vec<EdgeId>,
) -> VertexId {
    let l = o.lca.lca(a, b).expect("answer-path segment endpoints share a tree");
    let mut v = a;
    while v != l {
        let (p, e) = o.lca.parent(v).expect("strictly below an ancestor");
        edges.push(e);
        vertices.push(p);
        v = p;
    }
    let mut down: Vec<(VertexId, EdgeId)> = Vec::new();
    let mut v = b;
    while v != l {
        let (p, e) = o.lca.parent(v).expect("strictly below an ancestor");
        down.push((v, e));
        v = p;
    }
    for (v, e) in down.into_iter().rev() {
        edges.push(e);
        vertices.push(v);
    }
    l
}

/// One distance/path query as read from a query file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub failures: Vec<EdgeId>,
    pub target: VertexId,
}

/// Query file lines: `f <edge id> ...` replaces the current failure set
/// (edge ids as in the graph file, 0-based), `t <vertex>` (1-based) emits a
/// query against the current set. `#` starts a comment.
pub fn parse_queries(text: &str) -> Result<Vec<QuerySpec>> {
    let mut current: Vec<EdgeId> = Vec::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let head = tokens.next().expect("nonempty");
        match head {
            "f" => {
                current = tokens
                    .map(|tok| {
                        tok.parse::<EdgeId>().map_err(|_| Error::Parse {
                            line,
                            msg: format!("bad edge id {tok:?}"),
                        })
                    })
                    .collect::<Result<_>>()?;
            }
            "t" => {
                let tok = tokens.next().ok_or_else(|| Error::Parse {
                    line,
                    msg: "t needs a target vertex".into(),
                })?;
                let v: u64 = tok.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad vertex {tok:?}"),
                })?;
                if v == 0 {
                    return Err(Error::Parse { line, msg: "vertex ids are 1-based".into() });
                }
                if tokens.next().is_some() {
                    return Err(Error::Parse { line, msg: "t takes one vertex".into() });
                }
                out.push(QuerySpec { failures: current.clone(), target: (v - 1) as VertexId });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown directive {other:?}"),
                });
            }
        }
    }
    Ok(out)
}
