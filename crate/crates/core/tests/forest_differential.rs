//! Drives the link-cut forest and the naive forest through the same long
//! random op stream and demands identical answers.

use ftspt::dynforest::{EdgeHandle, LinkCutForest, NaiveForest};
use ftspt::graph::{CanonicalKey, Tier};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn hundred_thousand_random_ops_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0e5);
    for &n in &[2usize, 17, 512] {
        let mut fast = LinkCutForest::new(n);
        let mut slow = NaiveForest::new(n);
        // Parallel handle registry: (fast, slow) pairs of live edges.
        let mut live: Vec<(EdgeHandle, EdgeHandle)> = Vec::new();
        let ops = if n == 512 { 100_000 } else { 20_000 };
        let mut next_id = 0u32;
        for step in 0..ops {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            match rng.gen_range(0..4) {
                0 => {
                    let key = CanonicalKey {
                        tier: Tier::Real,
                        weight: rng.gen_range(1..100) as f64,
                        id: next_id,
                    };
                    next_id += 1;
                    let a = fast.link(u, v, key);
                    let b = slow.link(u, v, key);
                    assert_eq!(a.is_ok(), b.is_ok(), "link {u},{v} at step {step}");
                    if let (Ok(ha), Ok(hb)) = (a, b) {
                        live.push((ha, hb));
                    }
                }
                1 if !live.is_empty() => {
                    let i = rng.gen_range(0..live.len());
                    let (ha, hb) = live.swap_remove(i);
                    fast.cut(ha).unwrap();
                    slow.cut(hb).unwrap();
                }
                2 => {
                    assert_eq!(fast.connected(u, v), slow.connected(u, v), "connected {u},{v} at step {step}");
                }
                _ => {
                    let a = fast.path_max(u, v);
                    let b = slow.path_max(u, v);
                    assert_eq!(a.map(|(k, _)| k), b.map(|(k, _)| k), "path_max {u},{v} at step {step}");
                }
            }
        }
    }
}

#[test]
fn cutting_a_dead_handle_fails_in_both() {
    let mut fast = LinkCutForest::new(2);
    let mut slow = NaiveForest::new(2);
    let key = CanonicalKey { tier: Tier::Real, weight: 1.0, id: 0 };
    let ha = fast.link(0, 1, key).unwrap();
    let hb = slow.link(0, 1, key).unwrap();
    fast.cut(ha).unwrap();
    slow.cut(hb).unwrap();
    assert!(fast.cut(ha).is_err());
    assert!(slow.cut(hb).is_err());
}
