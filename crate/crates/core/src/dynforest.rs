//! Dynamic forest under link/cut with heaviest-edge-on-path queries, the
//! contract the batch-update oracle needs for its insertion phase.
//!
//! Realized as a link-cut tree over an arena in which edges are nodes too:
//! linking u,v inserts a degree-2 edge node between them, so the path
//! aggregate (max canonical key) only ever looks at edge nodes. A naive
//! adjacency + DFS forest with the same interface backs the differential
//! tests and nothing else.

use crate::error::{Error, Result};
use crate::graph::CanonicalKey;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EdgeHandle(pub u32);

const NONE: u32 = u32::MAX;

#[derive(Clone)]
struct Node {
    parent: u32,
    child: [u32; 2],
    rev: bool,
    key: Option<CanonicalKey>,
    /// Node index holding the max key in this splay subtree, NONE if none.
    max: u32,
    alive: bool,
    ends: (u32, u32),
}

impl Node {
    fn vertex() -> Self {
        Node { parent: NONE, child: [NONE; 2], rev: false, key: None, max: NONE, alive: false, ends: (NONE, NONE) }
    }
}

pub struct LinkCutForest {
    nodes: Vec<Node>,
    n_vertices: usize,
}

impl LinkCutForest {
    pub fn new(n_vertices: usize) -> Self {
        LinkCutForest { nodes: vec![Node::vertex(); n_vertices], n_vertices }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    fn push(&mut self, x: u32) {
        if x == NONE || !self.nodes[x as usize].rev {
            return;
        }
        let node = &mut self.nodes[x as usize];
        node.rev = false;
        node.child.swap(0, 1);
        for c in node.child {
            if c != NONE {
                self.nodes[c as usize].rev ^= true;
            }
        }
    }

    fn pull(&mut self, x: u32) {
        let mut best = self.nodes[x as usize].key.map(|_| x);
        for c in self.nodes[x as usize].child {
            if c == NONE {
                continue;
            }
            let cm = self.nodes[c as usize].max;
            if cm == NONE {
                continue;
            }
            best = match best {
                Some(b) if self.key_of(b) >= self.key_of(cm) => Some(b),
                _ => Some(cm),
            };
        }
        self.nodes[x as usize].max = best.unwrap_or(NONE);
    }

    fn key_of(&self, x: u32) -> CanonicalKey {
        self.nodes[x as usize].key.expect("max points at an edge node")
    }

    fn is_splay_root(&self, x: u32) -> bool {
        let p = self.nodes[x as usize].parent;
        p == NONE || (self.nodes[p as usize].child[0] != x && self.nodes[p as usize].child[1] != x)
    }

    fn dir_of(&self, x: u32, p: u32) -> usize {
        usize::from(self.nodes[p as usize].child[1] == x)
    }

    fn rotate(&mut self, x: u32) {
        let p = self.nodes[x as usize].parent;
        let g = self.nodes[p as usize].parent;
        let dir = self.dir_of(x, p);
        let b = self.nodes[x as usize].child[1 - dir];

        if g != NONE && !self.is_splay_root(p) {
            let pd = self.dir_of(p, g);
            self.nodes[g as usize].child[pd] = x;
        }
        self.nodes[x as usize].parent = g;
        self.nodes[x as usize].child[1 - dir] = p;
        self.nodes[p as usize].parent = x;
        self.nodes[p as usize].child[dir] = b;
        if b != NONE {
            self.nodes[b as usize].parent = p;
        }
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: u32) {
        // Clear pending reversals root-to-x before rotating.
        let mut chain = vec![x];
        let mut cur = x;
        while !self.is_splay_root(cur) {
            cur = self.nodes[cur as usize].parent;
            chain.push(cur);
        }
        while let Some(v) = chain.pop() {
            self.push(v);
        }
        while !self.is_splay_root(x) {
            let p = self.nodes[x as usize].parent;
            if !self.is_splay_root(p) {
                let g = self.nodes[p as usize].parent;
                if self.dir_of(p, g) == self.dir_of(x, p) {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    fn access(&mut self, x: u32) {
        self.splay(x);
        self.nodes[x as usize].child[1] = NONE; // right subtree becomes a path child
        self.pull(x);
        loop {
            let p = self.nodes[x as usize].parent;
            if p == NONE {
                break;
            }
            self.splay(p);
            self.nodes[p as usize].child[1] = x;
            self.pull(p);
            self.splay(x);
            // x absorbed p's tree and is its root again; its parent pointer
            // now names the next path parent up
        }
    }

    fn make_root(&mut self, x: u32) {
        self.access(x);
        self.nodes[x as usize].rev ^= true;
        self.push(x);
    }

    fn find_root(&mut self, x: u32) -> u32 {
        self.access(x);
        let mut cur = x;
        loop {
            self.push(cur);
            let l = self.nodes[cur as usize].child[0];
            if l == NONE {
                break;
            }
            cur = l;
        }
        self.splay(cur);
        cur
    }

    pub fn connected(&mut self, u: usize, v: usize) -> bool {
        u == v || self.find_root(u as u32) == self.find_root(v as u32)
    }

    /// Join the trees of u and v through a new edge node carrying `key`.
    pub fn link(&mut self, u: usize, v: usize, key: CanonicalKey) -> Result<EdgeHandle> {
        if self.connected(u, v) {
            return Err(Error::AlreadyConnected);
        }
        let e = self.nodes.len() as u32;
        self.nodes.push(Node {
            parent: NONE,
            child: [NONE; 2],
            rev: false,
            key: Some(key),
            max: e,
            alive: true,
            ends: (u as u32, v as u32),
        });
        self.make_root(u as u32);
        self.splay(u as u32);
        self.nodes[u as usize].parent = e;
        self.make_root(v as u32);
        self.splay(v as u32);
        self.nodes[v as usize].parent = e;
        Ok(EdgeHandle(e))
    }

    pub fn cut(&mut self, h: EdgeHandle) -> Result<()> {
        let e = h.0;
        if e as usize >= self.nodes.len() || !self.nodes[e as usize].alive {
            return Err(Error::NotInForest);
        }
        let (u, v) = self.nodes[e as usize].ends;
        // Detach the u side, then the now-adjacent v side.
        self.make_root(u);
        self.access(e);
        self.splay(e);
        let l = self.nodes[e as usize].child[0];
        debug_assert!(l != NONE);
        self.nodes[e as usize].child[0] = NONE;
        self.nodes[l as usize].parent = NONE;
        self.pull(e);
        self.access(v);
        self.splay(v);
        let l = self.nodes[v as usize].child[0];
        debug_assert_eq!(l, e);
        self.nodes[v as usize].child[0] = NONE;
        self.nodes[e as usize].parent = NONE;
        self.pull(v);
        self.nodes[e as usize].alive = false;
        Ok(())
    }

    /// Heaviest edge (by canonical key) on the u–v path; absent when u = v or
    /// the endpoints are disconnected.
    pub fn path_max(&mut self, u: usize, v: usize) -> Option<(CanonicalKey, EdgeHandle)> {
        if u == v || !self.connected(u, v) {
            return None;
        }
        self.make_root(u as u32);
        self.access(v as u32);
        self.splay(v as u32);
        let m = self.nodes[v as usize].max;
        debug_assert!(m != NONE, "a nontrivial path holds at least one edge node");
        Some((self.key_of(m), EdgeHandle(m)))
    }

    pub fn edge_ends(&self, h: EdgeHandle) -> (usize, usize) {
        let (a, b) = self.nodes[h.0 as usize].ends;
        (a as usize, b as usize)
    }
}

/// Reference forest: adjacency lists plus DFS. Same interface, O(n) per op.
/// Exists for differential testing only.
pub struct NaiveForest {
    adj: Vec<Vec<u32>>,
    edges: Vec<(u32, u32, CanonicalKey, bool)>,
}

impl NaiveForest {
    pub fn new(n_vertices: usize) -> Self {
        NaiveForest { adj: vec![Vec::new(); n_vertices], edges: Vec::new() }
    }

    fn dfs_path(&self, u: usize, v: usize) -> Option<Vec<u32>> {
        // Returns the edge sequence of the u..v path, if connected.
        let mut stack = vec![(u as u32, NONE)];
        let mut seen = vec![false; self.adj.len()];
        let mut via: Vec<u32> = vec![NONE; self.adj.len()];
        let mut from: Vec<u32> = vec![NONE; self.adj.len()];
        seen[u] = true;
        while let Some((x, via_edge)) = stack.pop() {
            if via_edge != NONE {
                via[x as usize] = via_edge;
            }
            if x as usize == v {
                let mut path = Vec::new();
                let mut cur = x;
                while cur as usize != u {
                    path.push(via[cur as usize]);
                    cur = from[cur as usize];
                }
                path.reverse();
                return Some(path);
            }
            for &eid in &self.adj[x as usize] {
                let (a, b, _, alive) = self.edges[eid as usize];
                if !alive {
                    continue;
                }
                let y = if a == x { b } else { a };
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    from[y as usize] = x;
                    stack.push((y, eid));
                }
            }
        }
        None
    }

    pub fn connected(&mut self, u: usize, v: usize) -> bool {
        u == v || self.dfs_path(u, v).is_some()
    }

    pub fn link(&mut self, u: usize, v: usize, key: CanonicalKey) -> Result<EdgeHandle> {
        if self.connected(u, v) {
            return Err(Error::AlreadyConnected);
        }
        let id = self.edges.len() as u32;
        self.edges.push((u as u32, v as u32, key, true));
        self.adj[u].push(id);
        self.adj[v].push(id);
        Ok(EdgeHandle(id))
    }

    pub fn cut(&mut self, h: EdgeHandle) -> Result<()> {
        match self.edges.get_mut(h.0 as usize) {
            Some(e) if e.3 => {
                e.3 = false;
                Ok(())
            }
            _ => Err(Error::NotInForest),
        }
    }

    pub fn path_max(&mut self, u: usize, v: usize) -> Option<(CanonicalKey, EdgeHandle)> {
        if u == v {
            return None;
        }
        let path = self.dfs_path(u, v)?;
        path.into_iter()
            .map(|eid| (self.edges[eid as usize].2, EdgeHandle(eid)))
            .max_by_key(|&(k, _)| k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Tier;

    fn key(w: f64, id: u32) -> CanonicalKey {
        CanonicalKey { tier: Tier::Real, weight: w, id }
    }

    #[test]
    fn link_connects() {
        let mut f = LinkCutForest::new(4);
        assert!(!f.connected(0, 1));
        f.link(0, 1, key(1.0, 0)).unwrap();
        assert!(f.connected(0, 1));
        assert!(!f.connected(0, 2));
    }

    #[test]
    fn link_inside_one_tree_fails() {
        let mut f = LinkCutForest::new(3);
        f.link(0, 1, key(1.0, 0)).unwrap();
        f.link(1, 2, key(1.0, 1)).unwrap();
        assert!(matches!(f.link(0, 2, key(1.0, 2)), Err(Error::AlreadyConnected)));
    }

    #[test]
    fn chain_of_links_is_one_tree() {
        let n = 24;
        let mut f = LinkCutForest::new(n);
        for v in 1..n {
            f.link(v - 1, v, key(v as f64, v as u32)).unwrap();
        }
        assert!(f.connected(0, n - 1));
    }

    #[test]
    fn cut_only_edge_splits() {
        let mut f = LinkCutForest::new(2);
        let h = f.link(0, 1, key(1.0, 0)).unwrap();
        f.cut(h).unwrap();
        assert!(!f.connected(0, 1));
        assert!(matches!(f.cut(h), Err(Error::NotInForest)));
    }

    #[test]
    fn link_cut_roundtrip() {
        let mut f = LinkCutForest::new(3);
        f.link(0, 1, key(1.0, 0)).unwrap();
        let h = f.link(1, 2, key(2.0, 1)).unwrap();
        f.cut(h).unwrap();
        assert!(f.connected(0, 1));
        assert!(!f.connected(0, 2));
        f.link(1, 2, key(2.0, 2)).unwrap();
        assert!(f.connected(0, 2));
    }

    #[test]
    fn path_max_picks_heaviest() {
        let mut f = LinkCutForest::new(3);
        f.link(0, 1, key(1.0, 0)).unwrap();
        let h = f.link(1, 2, key(5.0, 1)).unwrap();
        let (k, hit) = f.path_max(0, 2).unwrap();
        assert_eq!(k, key(5.0, 1));
        assert_eq!(hit, h);
    }

    #[test]
    fn path_max_absent_cases() {
        let mut f = LinkCutForest::new(3);
        f.link(0, 1, key(1.0, 0)).unwrap();
        assert!(f.path_max(0, 0).is_none());
        assert!(f.path_max(0, 2).is_none());
    }

    #[test]
    fn path_max_sees_reattachment() {
        // Exercise make_root/rev propagation: relink from the far side.
        let mut f = LinkCutForest::new(5);
        let mut hs = Vec::new();
        for v in 1..5 {
            hs.push(f.link(v - 1, v, key(v as f64, v as u32)).unwrap());
        }
        f.cut(hs[1]).unwrap(); // split 0-1 | 2-3-4
        f.link(0, 4, key(0.5, 9)).unwrap();
        let (k, _) = f.path_max(1, 2).unwrap();
        assert_eq!(k, key(4.0, 4));
    }
}
