//! Whole-stack acceptance: ten gates, each summarized as one printed line.
//! The gates replay the structure against exact recomputation (distances,
//! forests, batch deltas, path scans), check the size and shape guarantees,
//! realize the detour lower-bound family, and bound the probe counters.

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftspt::cluster::{build_clustering, build_reduced};
use ftspt::generators::{adversarial_failure_set, gen_lower_bound, gen_random};
use ftspt::graph::{EdgeId, Graph, Tier, VertexId};
use ftspt::msf_oracle::{build_oracle, recompute_msf, MsfOracle, UpdateBatch, UpdateOp};
use ftspt::reference::{exact_distances, slack, FailureSampler, ABS_TOL};
use ftspt::ssdo::build_ssdo;

/// Relative tolerance for every distance-ratio comparison in this suite.
const REL: f64 = 1e-9;
/// Allowed growth of the average probe count when the batch size doubles.
const PROBE_GROWTH_CAP: f64 = 4.5;
/// Required edge-touch advantage of a small query over a from-scratch pass.
const SCRATCH_ADVANTAGE: f64 = 20.0;

struct Gate {
    ok: bool,
    detail: String,
}

fn gate(ok: bool, detail: String) -> Gate {
    Gate { ok, detail }
}

/// One pass over the shared sample: 50 seeded random graphs per size with
/// budgets cycling 1, 2, 3, failure sets exhaustive up to pairs on small
/// pools and 500 per size otherwise, all targets. Feeds gates 1, 2, 3, 6.
fn shared_sample() -> (Gate, Gate, Gate, Gate) {
    let mut builds = 0usize;
    let mut c1_samples = 0usize;
    let mut c1_viol = 0usize;
    let mut worst_norm = 0.0f64;
    let mut c2_viol = 0usize;
    let mut c3_sets = 0usize;
    let mut c3_viol = 0usize;
    let mut c6_paths = 0usize;
    let mut c6_viol = 0usize;
    let mut c6_one_shots = 0usize;

    for &n in &[20u32, 50, 100] {
        for i in 0..50u64 {
            let f = (i % 3) as usize + 1;
            let seed = n as u64 * 1000 + i;
            let g = gen_random(n, 2 * n as usize, 0.5, 9.5, seed).unwrap();
            let o = build_ssdo(&g, 0, f).unwrap();
            builds += 1;

            // Gate 2: edge budget, disjoint layers, layer zero is the tree.
            let cap = (f + 1) * (n as usize - 1);
            let mut layered = 0usize;
            let mut seen: HashSet<EdgeId> = HashSet::new();
            for layer in &o.ft.layers {
                layered += layer.len();
                seen.extend(layer.iter().copied());
            }
            let mut m0 = o.ft.layers[0].clone();
            m0.sort_unstable();
            let mut te = o.ft.spt.tree_edges.clone();
            te.sort_unstable();
            if o.ft.h_edges.len() > cap || seen.len() != layered || m0 != te {
                c2_viol += 1;
            }

            let h_graph = o.ft.h_graph_reweighted();
            let sampler = FailureSampler::new(o.ft.h_edges.clone(), f, seed ^ 0x5eed);
            for fs in sampler.sets() {
                // Gate 3: the kept subgraph loses nothing the full reweighted
                // graph's surviving forest would keep.
                let batch = UpdateBatch::deletions_only(&fs);
                let mut kept = recompute_msf(&h_graph, &batch).unwrap().0;
                let mut full = recompute_msf(&o.ft.reweighted, &batch).unwrap().0;
                kept.sort_unstable();
                full.sort_unstable();
                c3_sets += 1;
                if kept != full {
                    c3_viol += 1;
                }

                let dist = exact_distances(&g, &fs, 0);
                let mut session = o.session(&fs).unwrap();
                let scale = (2 * fs.len() + 1) as f64;
                let spot = (c3_sets as u32) % n;
                for t in 0..n {
                    c1_samples += 1;
                    let pa = session.path(t);
                    let ans = pa.as_ref().map_or(f64::INFINITY, |p| p.total);
                    let exact = dist[t as usize];

                    // Gate 1: answer between exact and the factor bound.
                    let ok1 = match (exact.is_finite(), ans.is_finite()) {
                        (false, false) => true,
                        (true, true) => {
                            let bound = scale * exact;
                            ans >= exact - slack(exact) && ans <= bound + slack(bound)
                        }
                        _ => false,
                    };
                    if !ok1 {
                        c1_viol += 1;
                    } else if exact > ABS_TOL {
                        worst_norm = worst_norm.max(ans / exact / scale);
                    }

                    // Gate 6: the reported total re-sums bitwise from the
                    // edge list and every edge survives inside the structure.
                    if let Some(p) = &pa {
                        c6_paths += 1;
                        let mut okp = p.vertices.first() == Some(&0)
                            && p.vertices.last() == Some(&t)
                            && p.vertices.len() == p.edges.len() + 1;
                        let mut resum = 0.0f64;
                        for (j, &id) in p.edges.iter().enumerate() {
                            let e = g.edge(id);
                            let (a, b) = (p.vertices[j], p.vertices[j + 1]);
                            okp &= (e.u == a && e.v == b) || (e.u == b && e.v == a);
                            okp &= o.ft.in_h(id) && fs.binary_search(&id).is_err();
                            resum += e.weight;
                        }
                        okp &= resum.to_bits() == p.total.to_bits();
                        if !okp {
                            c6_viol += 1;
                        }
                    }
                    if t == spot {
                        c6_one_shots += 1;
                        let fresh = o.query_distance(&fs, t).unwrap();
                        if fresh.to_bits() != ans.to_bits() {
                            c6_viol += 1;
                        }
                    }
                }
            }
        }
    }

    let g1 = gate(
        c1_viol == 0,
        format!(
            "{c1_samples} queries over {builds} builds, {c1_viol} out of bounds, \
             worst answer at {:.3} of its factor cap",
            worst_norm
        ),
    );
    let g2 = gate(
        c2_viol == 0,
        format!("{builds} builds within budget, layers disjoint, layer 0 is the tree ({c2_viol} bad)"),
    );
    let g3 = gate(
        c3_viol == 0,
        format!("{c3_sets} failure sets, kept-subgraph forest always matched ({c3_viol} bad)"),
    );
    let g6 = gate(
        c6_viol == 0,
        format!(
            "{c6_paths} paths re-walked and re-summed, {c6_one_shots} fresh-query spot checks, \
             {c6_viol} inconsistent"
        ),
    );
    (g1, g2, g3, g6)
}

fn fresh_pair(rng: &mut ChaCha8Rng, g: &Graph, taken: &mut HashSet<(VertexId, VertexId)>) -> (VertexId, VertexId) {
    loop {
        let u = rng.gen_range(0..g.n());
        let v = rng.gen_range(0..g.n());
        let pair = (u.min(v), u.max(v));
        if u != v && g.edge_between(u, v).is_none() && taken.insert(pair) {
            return pair;
        }
    }
}

fn random_batch(rng: &mut ChaCha8Rng, g: &Graph, k: usize, deletions_only: bool) -> UpdateBatch {
    let mut batch = UpdateBatch::default();
    let mut used: HashSet<EdgeId> = HashSet::new();
    let mut pairs: HashSet<(VertexId, VertexId)> = HashSet::new();
    for _ in 0..k {
        let roll = if deletions_only { 0 } else { rng.gen_range(0..10u32) };
        if roll < 5 {
            for _ in 0..64 {
                let id = rng.gen_range(0..g.m() as u32);
                if used.insert(id) {
                    batch.deletions.push(id);
                    break;
                }
            }
        } else if roll < 8 {
            let (u, v) = fresh_pair(rng, g, &mut pairs);
            batch.insertions.push((u, v, rng.gen_range(1..=19) as f64 * 0.5));
        } else {
            for _ in 0..64 {
                let id = rng.gen_range(0..g.m() as u32);
                if used.insert(id) {
                    batch.weight_changes.push((id, rng.gen_range(1..=19) as f64 * 0.5));
                    break;
                }
            }
        }
    }
    batch
}

fn delta_matches(oracle: &MsfOracle, delta: &ftspt::msf_oracle::MstDelta, scratch: &[EdgeId]) -> bool {
    let mut set: BTreeSet<EdgeId> = oracle.base_msf().iter().copied().collect();
    for id in delta.removed_ids() {
        if !set.remove(&id) {
            return false;
        }
    }
    for id in delta.added_ids() {
        if !set.insert(id) {
            return false;
        }
    }
    let scratch_set: BTreeSet<EdgeId> = scratch.iter().copied().collect();
    set == scratch_set
}

/// Walks u to v inside the scratch forest and lists the path edges missing
/// from the base forest, oriented away from u. `None` when disconnected.
fn scratch_new_edges(
    updated: &Graph,
    forest: &[EdgeId],
    base: &HashSet<EdgeId>,
    u: VertexId,
    v: VertexId,
) -> Option<Vec<(EdgeId, VertexId, VertexId)>> {
    if u == v {
        return Some(Vec::new());
    }
    let ids: HashSet<EdgeId> = forest.iter().copied().collect();
    let mut parent: Vec<Option<(VertexId, EdgeId)>> = vec![None; updated.n() as usize];
    let mut queue = std::collections::VecDeque::from([u]);
    parent[u as usize] = Some((u, u32::MAX));
    while let Some(x) = queue.pop_front() {
        if x == v {
            break;
        }
        for e in updated.incident(x) {
            if !ids.contains(&e.id) {
                continue;
            }
            let y = e.other(x);
            if parent[y as usize].is_none() {
                parent[y as usize] = Some((x, e.id));
                queue.push_back(y);
            }
        }
    }
    parent[v as usize]?;
    let mut rev = Vec::new();
    let mut cur = v;
    while cur != u {
        let (p, id) = parent[cur as usize].unwrap();
        rev.push((id, p, cur));
        cur = p;
    }
    rev.reverse();
    Some(rev.into_iter().filter(|(id, _, _)| !base.contains(id)).collect())
}

/// 1000 seeded batch trials against from-scratch recomputation; every third
/// trial is deletion-only and additionally replays path scans. Gates 4 and 5.
fn batch_trials() -> (Gate, Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4C5);
    let mut trials = 0usize;
    let mut c4_viol = 0usize;
    let mut c5_trials = 0usize;
    let mut c5_paths = 0usize;
    let mut c5_viol = 0usize;

    for &(n, count) in &[(20u32, 500u64), (50, 300), (200, 200)] {
        for i in 0..count {
            let g = gen_random(n, 2 * n as usize, 0.5, 9.5, 7000 + n as u64 * 10 + i).unwrap();
            let oracle = build_oracle(&g).unwrap();
            let k = rng.gen_range(1..=8usize);
            let deletions_only = i % 3 == 0;
            let batch = random_batch(&mut rng, &g, k, deletions_only);
            let delta = oracle.query(&batch).unwrap();
            let (scratch, updated) = recompute_msf(&g, &batch).unwrap();
            trials += 1;
            if !delta_matches(&oracle, &delta, &scratch)
                || delta.removed.len() > k
                || delta.added.len() > k
            {
                c4_viol += 1;
            }

            if deletions_only {
                c5_trials += 1;
                let mut view = oracle.deletion_view(&batch.deletions).unwrap();
                let base: HashSet<EdgeId> = oracle.base_msf().iter().copied().collect();
                for q in 0..6u32 {
                    let (u, v) = if q == 0 {
                        (0, n - 1)
                    } else {
                        (rng.gen_range(0..n), rng.gen_range(0..n))
                    };
                    let expected = scratch_new_edges(&updated, &scratch, &base, u, v);
                    let got = view.path_new_edges(u, v);
                    c5_paths += 1;
                    let same = match (&expected, &got) {
                        (None, None) => true,
                        (Some(exp), Some(hops)) => {
                            hops.len() == exp.len()
                                && hops
                                    .iter()
                                    .zip(exp)
                                    .all(|(h, &(id, near, far))| {
                                        h.edge == id && h.near == near && h.far == far
                                    })
                        }
                        _ => false,
                    };
                    if !same {
                        c5_viol += 1;
                    }
                }
            }
        }
    }

    let g4 = gate(
        c4_viol == 0,
        format!("{trials} mixed batches matched scratch within the swap caps ({c4_viol} bad)"),
    );
    let g5 = gate(
        c5_viol == 0,
        format!(
            "{c5_paths} path scans over {c5_trials} deletion-only trials, order and \
             orientation matched ({c5_viol} bad)"
        ),
    );
    (g4, g5)
}

fn random_tree(rng: &mut ChaCha8Rng, n: u32, shape: u32) -> Graph {
    let mut g = Graph::new(n);
    for v in 1..n {
        let parent = match shape % 4 {
            0 => rng.gen_range(0..v),
            1 => {
                if rng.gen_bool(0.85) {
                    v - 1
                } else {
                    rng.gen_range(0..v)
                }
            }
            2 => rng.gen_range(0..v).min(rng.gen_range(0..v)),
            _ => (v - 1) / 2,
        };
        let w = rng.gen_range(1..40) as f64 * 0.5;
        g.add_edge(parent, v, w, Tier::Real).unwrap();
    }
    g
}

/// Gate 7: reduction degree cap plus the five shape invariants of the
/// hierarchy on 100 random trees up to ten thousand vertices. The child-count
/// ceiling of three is measured honestly; the builder's grouping rule is
/// known to exceed it, so this gate reports the breach instead of hiding it.
fn clustering_shape() -> Gate {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut degree_viol = 0usize;
    let mut shape_viol = 0usize;
    let mut cap_trees = 0usize;
    let mut max_children = 0usize;

    for i in 0..100u32 {
        let n = (2.0 * (10_000.0f64 / 2.0).powf(f64::from(i) / 99.0)).round() as u32;
        let g = random_tree(&mut rng, n, i);
        let red = build_reduced(&g).unwrap();
        let n_hat = red.tree.n();
        for v in 0..n_hat {
            let deg = red.tree.children[v].len() + usize::from(red.tree.parent[v].is_some());
            if deg > 3 {
                degree_viol += 1;
            }
        }
        let hier = build_clustering(&red.tree).unwrap();
        let mut ok = 1usize << hier.levels <= n_hat.max(1);

        // Partition per level, counted through the per-vertex owner arrays.
        let mut owned = vec![0usize; hier.clusters.len()];
        for v in 0..n_hat as u32 {
            for level in 0..=hier.levels {
                let c = hier.cluster_at(v, level);
                ok &= hier.clusters[c as usize].level as usize == level;
                owned[c as usize] += 1;
            }
        }
        let mut tops = 0usize;
        for (ci, node) in hier.clusters.iter().enumerate() {
            ok &= owned[ci] == node.members.len();
            if node.level == 0 {
                ok &= node.members.len() == 1 && node.children.is_empty();
            } else {
                ok &= node.children.len() >= 2;
                ok &= node
                    .children
                    .iter()
                    .all(|&ch| hier.clusters[ch as usize].level + 1 == node.level);
                max_children = max_children.max(node.children.len());
            }
            if node.level as usize == hier.levels {
                tops += 1;
                ok &= node.parent.is_none() && node.members.len() == n_hat;
            }
            // Connectivity inside the reduced tree.
            let members: HashSet<VertexId> = node.members.iter().copied().collect();
            let mut seen: HashSet<VertexId> = HashSet::new();
            let mut queue = std::collections::VecDeque::from([node.members[0]]);
            seen.insert(node.members[0]);
            while let Some(x) = queue.pop_front() {
                let mut touch = |y: VertexId| {
                    if members.contains(&y) && seen.insert(y) {
                        queue.push_back(y);
                    }
                };
                if let Some((p, _)) = red.tree.parent[x as usize] {
                    touch(p);
                }
                for &ch in &red.tree.children[x as usize] {
                    touch(ch);
                }
            }
            ok &= seen.len() == members.len();
        }
        ok &= tops == 1;
        if !ok {
            shape_viol += 1;
        }
        if hier.max_arity > 3 {
            cap_trees += 1;
        }
    }

    gate(
        degree_viol == 0 && shape_viol == 0 && cap_trees == 0,
        format!(
            "100 trees: {degree_viol} tree-degree breaches, {shape_viol} partition/\
             connectivity/singleton/root/lower-fanout breaches; the three-child \
             ceiling breaks on {cap_trees} trees, worst fan-in {max_children}"
        ),
    )
}

/// Gate 8: on the girth-four family, dropping any one core edge forces the
/// adversarial detour to twice the intact distance, while the intact graph
/// keeps the same queries at the expected distance exactly.
fn lower_bound_family() -> Gate {
    use ftspt::reference::exact_distance;
    let mut checked = 0usize;
    let mut viol = 0usize;
    let mut min_forced = f64::INFINITY;
    let mut max_intact_dev = 0.0f64;

    for &a in &[2usize, 4, 8] {
        let inst = gen_lower_bound(a).unwrap();
        let g = &inst.graph;
        for &e in &inst.core_edges {
            let fset = adversarial_failure_set(&inst, e).unwrap();
            let edge = g.edge(e);
            let target = edge.u.max(edge.v);
            let intact = exact_distance(g, &fset, inst.s, target);
            let mut with_e = fset.clone();
            with_e.push(e);
            let forced = exact_distance(g, &with_e, inst.s, target);
            checked += 1;
            let forced_ratio = forced / intact;
            let intact_dev = (intact / 2.0 - 1.0).abs();
            min_forced = min_forced.min(forced_ratio);
            max_intact_dev = max_intact_dev.max(intact_dev);
            if !(forced_ratio >= 2.0 - REL) || intact_dev > REL {
                viol += 1;
            }
        }
    }

    gate(
        viol == 0,
        format!(
            "{checked} dropped-edge queries, forced ratio always >= {:.6}, intact \
             deviation at most {:.2e} ({viol} bad)",
            min_forced, max_intact_dev
        ),
    )
}

/// Gate 9: five sequences of 32 single updates; every prefix delta is held
/// against a from-scratch pass over the accumulated batch.
fn sequential_sessions() -> Gate {
    let g = gen_random(100, 300, 0.5, 9.5, 0x99).unwrap();
    let oracle = build_oracle(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9999);
    let mut prefixes = 0usize;
    let mut viol = 0usize;

    for _ in 0..5 {
        let mut ops: Vec<UpdateOp> = Vec::new();
        let mut deleted: HashSet<EdgeId> = HashSet::new();
        let mut changed: HashSet<EdgeId> = HashSet::new();
        let mut pairs: HashSet<(VertexId, VertexId)> = HashSet::new();
        for _ in 0..32 {
            let roll = rng.gen_range(0..10u32);
            if roll < 5 {
                loop {
                    let id = rng.gen_range(0..g.m() as u32);
                    if !changed.contains(&id) && deleted.insert(id) {
                        ops.push(UpdateOp::Delete(id));
                        break;
                    }
                }
            } else if roll < 8 {
                let (u, v) = fresh_pair(&mut rng, &g, &mut pairs);
                ops.push(UpdateOp::Insert(u, v, rng.gen_range(1..=19) as f64 * 0.5));
            } else {
                loop {
                    let id = rng.gen_range(0..g.m() as u32);
                    if !deleted.contains(&id) && changed.insert(id) {
                        ops.push(UpdateOp::WeightChange(id, rng.gen_range(1..=19) as f64 * 0.5));
                        break;
                    }
                }
            }
        }
        let deltas = oracle.dynamic_session(&ops).unwrap();
        assert_eq!(deltas.len(), ops.len());
        let mut batch = UpdateBatch::default();
        for (i, op) in ops.iter().enumerate() {
            match *op {
                UpdateOp::Delete(id) => batch.deletions.push(id),
                UpdateOp::Insert(u, v, w) => batch.insertions.push((u, v, w)),
                UpdateOp::WeightChange(id, w) => batch.weight_changes.push((id, w)),
            }
            let scratch = recompute_msf(&g, &batch).unwrap().0;
            prefixes += 1;
            if !delta_matches(&oracle, &deltas[i], &scratch) {
                viol += 1;
            }
        }
    }

    gate(
        viol == 0,
        format!("{prefixes} prefixes across 5 sessions matched scratch ({viol} bad)"),
    )
}

/// Gate 10: average probes grow at most 4.5x per doubling of the batch size
/// at a fixed size, and one small query on a hundred-thousand-vertex sparse
/// graph touches at least twenty times fewer edges than a full rebuild scans.
fn probe_scaling() -> Gate {
    let g = gen_random(2000, 8000, 0.5, 9.5, 0x10A).unwrap();
    let oracle = build_oracle(&g).unwrap();
    let base: Vec<EdgeId> = oracle.base_msf().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x10AA);
    let mut avgs: Vec<f64> = Vec::new();
    for &k in &[1usize, 2, 4, 8] {
        let mut total = 0u64;
        for _ in 0..100 {
            let mut dels: HashSet<EdgeId> = HashSet::new();
            while dels.len() < k {
                dels.insert(base[rng.gen_range(0..base.len())]);
            }
            let ids: Vec<EdgeId> = dels.iter().copied().collect();
            let (_, stats) = oracle
                .query_with_stats(&UpdateBatch::deletions_only(&ids))
                .unwrap();
            total += stats.probes();
        }
        avgs.push(total as f64 / 100.0);
    }
    let growth: Vec<f64> = avgs.windows(2).map(|w| w[1] / w[0]).collect();
    let ok_growth = growth.iter().all(|&r| r <= PROBE_GROWTH_CAP);

    let big = gen_random(100_000, 200_000, 0.5, 9.5, 0x10B).unwrap();
    let big_oracle = build_oracle(&big).unwrap();
    let big_base: Vec<EdgeId> = big_oracle.base_msf().to_vec();
    let mut worst_touch = 0u64;
    for _ in 0..5 {
        let mut dels: HashSet<EdgeId> = HashSet::new();
        while dels.len() < 4 {
            dels.insert(big_base[rng.gen_range(0..big_base.len())]);
        }
        let ids: Vec<EdgeId> = dels.iter().copied().collect();
        let (_, stats) = big_oracle
            .query_with_stats(&UpdateBatch::deletions_only(&ids))
            .unwrap();
        worst_touch = worst_touch.max(stats.edge_touches());
    }
    let advantage = big.m() as f64 / worst_touch.max(1) as f64;

    gate(
        ok_growth && advantage >= SCRATCH_ADVANTAGE,
        format!(
            "probe growth per doubling {:?} (cap {PROBE_GROWTH_CAP}); large-graph query \
             touched {worst_touch} edges vs {} scanned from scratch, advantage {:.0}x \
             (need {SCRATCH_ADVANTAGE}x)",
            growth
                .iter()
                .map(|r| (r * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            big.m(),
            advantage
        ),
    )
}

#[test]
fn all_ten_gates() {
    let (g1, g2, g3, g6) = shared_sample();
    let (g4, g5) = batch_trials();
    let g7 = clustering_shape();
    let g8 = lower_bound_family();
    let g9 = sequential_sessions();
    let g10 = probe_scaling();

    let results = [g1, g2, g3, g4, g5, g6, g7, g8, g9, g10];
    let mut failed: Vec<usize> = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let verdict = if r.ok { "pass" } else { "FAIL" };
        println!("criterion {}: {verdict} ({})", i + 1, r.detail);
        if !r.ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
