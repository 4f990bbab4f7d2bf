//! Ground-truth baselines and auditing: rerun-Dijkstra distances on a graph
//! with edges knocked out, a Bellman-Ford cross-check, brute-force girth and
//! component labeling, failure-set sampling, and the stretch auditor that
//! replays oracle answers against the exact values.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeId, Graph, VertexId};
use crate::ssdo::Ssdo;

/// Relative tolerance for float comparisons; every audited quantity is a sum
/// of at most n input weights, so 1e-9 leaves orders of magnitude of slack.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor below which two values are considered equal.
pub const ABS_TOL: f64 = 1e-12;

pub fn slack(x: f64) -> f64 {
    ABS_TOL + REL_TOL * x.abs()
}

fn banned_mask(g: &Graph, failures: &[EdgeId]) -> Vec<bool> {
    let mut mask = vec![false; g.next_id() as usize];
    for &id in failures {
        if let Some(slot) = mask.get_mut(id as usize) {
            *slot = true;
        }
    }
    mask
}

/// Dijkstra on g minus the failed edges. Accepts zero weights (the oracle
/// builder does not, but reference instances may carry them). Parents break
/// distance ties toward the canonically smaller edge so reconstructed paths
/// are deterministic.
pub fn exact_distances_with_parents(
    g: &Graph,
    failures: &[EdgeId],
    s: VertexId,
) -> (Vec<f64>, Vec<Option<EdgeId>>) {
    let banned = banned_mask(g, failures);
    let n = g.n() as usize;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[s as usize] = 0.0;
    heap.push(std::cmp::Reverse((ordered_float(0.0), s)));

    while let Some(std::cmp::Reverse((_, v))) = heap.pop() {
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        let dv = dist[v as usize];
        for e in g.incident(v) {
            debug_assert!(e.weight >= 0.0);
            if banned[e.id as usize] {
                continue;
            }
            let to = e.other(v);
            if done[to as usize] {
                continue;
            }
            let cand = dv + e.weight;
            let cur = dist[to as usize];
            if cand < cur {
                dist[to as usize] = cand;
                parent[to as usize] = Some(e.id);
                heap.push(std::cmp::Reverse((ordered_float(cand), to)));
            } else if cand == cur {
                let better = match parent[to as usize] {
                    Some(p) => e.key() < g.edge(p).key(),
                    None => true,
                };
                if better {
                    parent[to as usize] = Some(e.id);
                }
            }
        }
    }
    (dist, parent)
}

fn ordered_float(x: f64) -> u64 {
    // Nonnegative finite floats sort correctly by their bit pattern.
    x.to_bits()
}

pub fn exact_distances(g: &Graph, failures: &[EdgeId], s: VertexId) -> Vec<f64> {
    exact_distances_with_parents(g, failures, s).0
}

pub fn exact_distance(g: &Graph, failures: &[EdgeId], s: VertexId, t: VertexId) -> f64 {
    exact_distances(g, failures, s)[t as usize]
}

/// Edge ids of one shortest s-t path in g minus the failures, in path order
/// from s; None if t is unreachable, empty if t == s.
pub fn shortest_path_edges(
    g: &Graph,
    failures: &[EdgeId],
    s: VertexId,
    t: VertexId,
) -> Option<Vec<EdgeId>> {
    let (dist, parent) = exact_distances_with_parents(g, failures, s);
    path_from_parents(g, &dist, &parent, s, t)
}

/// Reconstruction from a finished parent array, for callers that batch many
/// targets over one Dijkstra run.
pub fn path_from_parents(
    g: &Graph,
    dist: &[f64],
    parent: &[Option<EdgeId>],
    s: VertexId,
    t: VertexId,
) -> Option<Vec<EdgeId>> {
    if !dist[t as usize].is_finite() {
        return None;
    }
    let mut out = Vec::new();
    let mut v = t;
    while v != s {
        let e = parent[v as usize].expect("finite distance implies a parent chain");
        out.push(e);
        v = g.edge(e).other(v);
    }
    out.reverse();
    Some(out)
}

/// Textbook relaxation rounds; the independent check for the Dijkstra above.
pub fn bellman_ford(g: &Graph, failures: &[EdgeId], s: VertexId) -> Vec<f64> {
    let banned = banned_mask(g, failures);
    let n = g.n() as usize;
    let mut dist = vec![f64::INFINITY; n];
    dist[s as usize] = 0.0;
    for _ in 1..n.max(2) {
        let mut changed = false;
        for e in g.edges() {
            if banned[e.id as usize] {
                continue;
            }
            let (a, b) = (e.u as usize, e.v as usize);
            if dist[a] + e.weight < dist[b] {
                dist[b] = dist[a] + e.weight;
                changed = true;
            }
            if dist[b] + e.weight < dist[a] {
                dist[a] = dist[b] + e.weight;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Component label per vertex (labels are 0..count in first-seen order) and
/// the component count.
pub fn connected_components(g: &Graph) -> (usize, Vec<u32>) {
    let n = g.n() as usize;
    let mut label = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n as u32 {
        if label[start as usize] != u32::MAX {
            continue;
        }
        label[start as usize] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for e in g.incident(v) {
                let to = e.other(v);
                if label[to as usize] == u32::MAX {
                    label[to as usize] = next;
                    queue.push_back(to);
                }
            }
        }
        next += 1;
    }
    (next as usize, label)
}

/// Unweighted girth by BFS from every vertex; None for forests. A shortest
/// cycle passes through some root, and for that root the first non-tree edge
/// closing the two BFS arcs measures it exactly.
pub fn shortest_cycle_len(g: &Graph) -> Option<usize> {
    let n = g.n() as usize;
    let mut best: Option<usize> = None;
    let mut dist = vec![u32::MAX; n];
    let mut pedge: Vec<Option<EdgeId>> = vec![None; n];
    for root in 0..n as u32 {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        pedge.iter_mut().for_each(|p| *p = None);
        dist[root as usize] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for e in g.incident(v) {
                let to = e.other(v);
                if dist[to as usize] == u32::MAX {
                    dist[to as usize] = dist[v as usize] + 1;
                    pedge[to as usize] = Some(e.id);
                    queue.push_back(to);
                }
            }
        }
        for e in g.edges() {
            let (a, b) = (e.u as usize, e.v as usize);
            if dist[a] == u32::MAX || dist[b] == u32::MAX {
                continue;
            }
            if pedge[a] == Some(e.id) || pedge[b] == Some(e.id) {
                continue;
            }
            let len = dist[a] as usize + dist[b] as usize + 1;
            if best.map_or(true, |c| len < c) {
                best = Some(len);
            }
        }
    }
    best
}

/// Failure-set enumeration: always the empty set; exhaustive over sizes 1 and
/// 2 when the pool is small; seeded uniform draws (deduplicated) otherwise.
pub struct FailureSampler {
    pool: Vec<EdgeId>,
    max_size: usize,
    exhaustive_pool_cap: usize,
    random_per_size: usize,
    seed: u64,
}

impl FailureSampler {
    pub fn new(pool: Vec<EdgeId>, max_size: usize, seed: u64) -> Self {
        FailureSampler {
            pool,
            max_size,
            exhaustive_pool_cap: 40,
            random_per_size: 500,
            seed,
        }
    }

    /// Override the per-size random sample count (default 500).
    pub fn with_random_per_size(mut self, k: usize) -> Self {
        self.random_per_size = k;
        self
    }

    pub fn sets(&self) -> Vec<Vec<EdgeId>> {
        let mut out: Vec<Vec<EdgeId>> = vec![Vec::new()];
        let p = self.pool.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for size in 1..=self.max_size.min(p) {
            if size <= 2 && p <= self.exhaustive_pool_cap {
                match size {
                    1 => {
                        for &a in &self.pool {
                            out.push(vec![a]);
                        }
                    }
                    _ => {
                        for i in 0..p {
                            for j in i + 1..p {
                                let mut f = vec![self.pool[i], self.pool[j]];
                                f.sort_unstable();
                                out.push(f);
                            }
                        }
                    }
                }
                continue;
            }
            let total = combinations(p, size);
            let target = (self.random_per_size as u128).min(total) as usize;
            let mut seen: HashSet<Vec<EdgeId>> = HashSet::new();
            let mut attempts = 0usize;
            while seen.len() < target && attempts < target.saturating_mul(30) + 64 {
                attempts += 1;
                let idx = rand::seq::index::sample(&mut rng, p, size);
                let mut f: Vec<EdgeId> = idx.iter().map(|i| self.pool[i]).collect();
                f.sort_unstable();
                if seen.insert(f.clone()) {
                    out.push(f);
                }
            }
        }
        out
    }
}

fn combinations(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > 1 << 40 {
            return 1 << 40;
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct StretchRow {
    pub failures: Vec<EdgeId>,
    pub target: VertexId,
    pub exact: f64,
    pub approx: f64,
    pub ratio: f64,
}

/// Outcome of replaying sampled (F, t) queries against the exact distances.
/// A clean run has an empty violation list; every recorded ratio is the
/// oracle answer over the true distance (1 when both are infinite).
#[derive(Debug, Default)]
pub struct StretchReport {
    pub samples: usize,
    pub max_ratio: f64,
    pub witness: Option<(Vec<EdgeId>, VertexId)>,
    pub violations: Vec<String>,
    pub rows: Vec<StretchRow>,
}

impl StretchReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("F,t,exact,approx,ratio\n");
        for row in &self.rows {
            let ids: Vec<String> = row.failures.iter().map(|id| id.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                ids.join(" "),
                row.target + 1,
                row.exact,
                row.approx,
                row.ratio
            ));
        }
        out
    }
}

/// Replays every sampled failure set against every target: checks the answer
/// against the exact distance from both sides, re-walks the returned path,
/// and bounds the reweighted cost of replacement edges. `keep_rows` retains
/// the per-query table for CSV serialization.
pub fn audit_stretch(o: &Ssdo, sampler: &FailureSampler, keep_rows: bool) -> StretchReport {
    let mut report = StretchReport { max_ratio: 0.0, ..Default::default() };
    let n = o.base.n();
    let tree_ids: HashSet<EdgeId> = o.ft.spt.tree_edges.iter().copied().collect();
    let small = (n as usize) <= 64;

    for failures in sampler.sets() {
        let (dist, parent) = exact_distances_with_parents(&o.base, &failures, o.s);
        if small {
            let bf = bellman_ford(&o.base, &failures, o.s);
            for v in 0..n as usize {
                let agree = if dist[v].is_finite() {
                    bf[v].is_finite() && (dist[v] - bf[v]).abs() <= slack(dist[v])
                } else {
                    !bf[v].is_finite()
                };
                if !agree {
                    report.violations.push(format!(
                        "baseline split at vertex {} under F={:?}: {} vs {}",
                        v, failures, dist[v], bf[v]
                    ));
                }
            }
        }
        let mut session = match o.session(&failures) {
            Ok(s) => s,
            Err(e) => {
                report.violations.push(format!("session rejected F={failures:?}: {e}"));
                continue;
            }
        };
        let scale = (2 * failures.len() + 1) as f64;
        for t in 0..n {
            report.samples += 1;
            let pa = session.path(t);
            let approx = pa.as_ref().map_or(f64::INFINITY, |p| p.total);
            let exact = dist[t as usize];
            let one_shot = o
                .query_distance(&failures, t)
                .expect("session accepted this failure set");
            if one_shot.to_bits() != approx.to_bits() {
                report.violations.push(format!(
                    "distance and path disagree at t={} F={:?}: {} vs {}",
                    t, failures, one_shot, approx
                ));
            }

            let ratio = match (exact.is_finite(), approx.is_finite()) {
                (false, false) => 1.0,
                (false, true) => {
                    report.violations.push(format!(
                        "answer {} for a target {} unreachable under F={:?}",
                        approx, t, failures
                    ));
                    1.0
                }
                (true, false) => {
                    report.violations.push(format!(
                        "no answer for reachable target {} under F={:?} (exact {})",
                        t, failures, exact
                    ));
                    f64::INFINITY
                }
                (true, true) => {
                    if approx < exact - slack(exact) {
                        report.violations.push(format!(
                            "answer {} beats the exact distance {} at t={} F={:?}",
                            approx, exact, t, failures
                        ));
                    }
                    let bound = scale * exact;
                    if approx > bound + slack(bound) {
                        report.violations.push(format!(
                            "answer {} exceeds {}x exact {} at t={} F={:?}",
                            approx, scale, exact, t, failures
                        ));
                    }
                    if exact <= ABS_TOL {
                        if approx <= ABS_TOL {
                            1.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        approx / exact
                    }
                }
            };
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.witness = Some((failures.clone(), t));
            }
            if keep_rows {
                report.rows.push(StretchRow {
                    failures: failures.clone(),
                    target: t,
                    exact,
                    approx,
                    ratio,
                });
            }

            if exact.is_finite() {
                let true_path = path_from_parents(&o.base, &dist, &parent, o.s, t)
                    .expect("finite exact distance");
                let detours: Vec<EdgeId> = true_path
                    .iter()
                    .copied()
                    .filter(|id| !tree_ids.contains(id))
                    .collect();
                let mut max_detour = 0.0f64;
                for &e in &detours {
                    let w = o.ft.reweighted.edge(e).weight;
                    max_detour = max_detour.max(w);
                    let cap = 2.0 * exact;
                    if w > cap + slack(cap) {
                        report.violations.push(format!(
                            "reweighted cost {} of true-path edge {} exceeds twice {} (t={} F={:?})",
                            w, e, exact, t, failures
                        ));
                    }
                }
                if let Some(pa) = &pa {
                    if detours.is_empty() && !pa.trace.is_empty() {
                        report.violations.push(format!(
                            "replacement edges used though the true path kept to the tree (t={} F={:?})",
                            t, failures
                        ));
                    }
                    for step in &pa.trace {
                        let w = o.ft.reweighted.edge(step.edge).weight;
                        if w > max_detour + slack(max_detour) {
                            report.violations.push(format!(
                                "answer-path edge {} reweighted {} above the true-path ceiling {} (t={} F={:?})",
                                step.edge, w, max_detour, t, failures
                            ));
                        }
                    }
                }
            }

            if let Some(pa) = &pa {
                check_path_answer(o, &failures, t, pa, &mut report.violations);
            }
        }
    }
    report
}

/// Structural re-verification of one returned path: endpoint chaining, edge
/// membership in H minus F, hop budget, anchor placement, and the bitwise
/// match between the reported total and a fresh edge-weight sum.
fn check_path_answer(
    o: &Ssdo,
    failures: &[EdgeId],
    t: VertexId,
    pa: &crate::ssdo::PathAnswer,
    violations: &mut Vec<String>,
) {
    let ctx = |msg: String| format!("{msg} (t={t} F={failures:?})");
    if pa.vertices.first() != Some(&o.s) || pa.vertices.last() != Some(&t) {
        violations.push(ctx("path endpoints are not s and t".into()));
        return;
    }
    if pa.vertices.len() != pa.edges.len() + 1 {
        violations.push(ctx("vertex and edge counts disagree".into()));
        return;
    }
    let failed: HashSet<EdgeId> = failures.iter().copied().collect();
    let mut resum = 0.0f64;
    for (i, &id) in pa.edges.iter().enumerate() {
        let e = o.base.edge(id);
        let (a, b) = (pa.vertices[i], pa.vertices[i + 1]);
        if !(e.u == a && e.v == b || e.u == b && e.v == a) {
            violations.push(ctx(format!("edge {id} does not join step {i}")));
        }
        if !o.ft.in_h(id) {
            violations.push(ctx(format!("edge {id} lies outside the sparse subgraph")));
        }
        if failed.contains(&id) {
            violations.push(ctx(format!("edge {id} is a failed edge")));
        }
        resum += e.weight;
    }
    if resum.to_bits() != pa.total.to_bits() {
        violations.push(ctx(format!("re-summed weight {} differs from {}", resum, pa.total)));
    }
    if pa.trace.len() > failures.len() {
        violations.push(ctx(format!("{} replacement hops exceed |F|", pa.trace.len())));
    }
    for (i, step) in pa.trace.iter().enumerate() {
        let next = if i + 1 < pa.trace.len() { pa.trace[i + 1].near } else { t };
        match o.lca.lca(step.far, next) {
            Ok(a) if a == step.anchor => {}
            got => violations.push(ctx(format!(
                "anchor of hop {i} is {:?}, expected {:?}",
                step.anchor, got
            ))),
        }
    }
}
