//! Boykov–Kolmogorov max-flow with real capacities. Nodes connect to the
//! source and sink through terminal capacities; arcs between nodes come in
//! residual pairs `e`, `e ^ 1`.

use std::collections::VecDeque;

const NONE: usize = usize::MAX;
const TERMINAL: usize = usize::MAX - 1;
const ORPHAN: usize = usize::MAX - 2;
const EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tree {
    Free,
    Source,
    Sink,
}

#[derive(Debug, Clone)]
pub struct MaxFlow {
    first: Vec<usize>,
    next: Vec<usize>,
    head: Vec<usize>,
    cap: Vec<f64>,
    /// Residual to the sink when negative, from the source when positive.
    terminal: Vec<f64>,
    base_flow: f64,
    tree: Vec<Tree>,
    /// Arc from a node towards its parent, or `TERMINAL`/`ORPHAN`/`NONE`.
    parent: Vec<usize>,
    stamp: Vec<u64>,
    dist: Vec<u32>,
    active: VecDeque<usize>,
    queued: Vec<bool>,
    orphans: VecDeque<usize>,
    time: u64,
}

impl MaxFlow {
    pub fn new(nodes: usize) -> Self {
        Self::with_capacity(nodes, 0)
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        MaxFlow {
            first: vec![NONE; nodes],
            next: Vec::with_capacity(2 * edges),
            head: Vec::with_capacity(2 * edges),
            cap: Vec::with_capacity(2 * edges),
            terminal: vec![0.0; nodes],
            base_flow: 0.0,
            tree: vec![Tree::Free; nodes],
            parent: vec![NONE; nodes],
            stamp: vec![0; nodes],
            dist: vec![0; nodes],
            active: VecDeque::new(),
            queued: vec![false; nodes],
            orphans: VecDeque::new(),
            time: 0,
        }
    }

    fn push(&mut self, u: usize, v: usize, c: f64) {
        self.head.push(v);
        self.cap.push(c);
        self.next.push(self.first[u]);
        self.first[u] = self.head.len() - 1;
    }

    /// Adds `u → v` with capacity `c` and the reverse arc with capacity `rc`.
    pub fn add_edge(&mut self, u: usize, v: usize, c: f64, rc: f64) {
        self.push(u, v, c);
        self.push(v, u, rc);
    }

    /// Adds capacity from the source to `i` and from `i` to the sink.
    pub fn add_terminal(&mut self, i: usize, from_source: f64, to_sink: f64) {
        let both = from_source.min(to_sink);
        self.base_flow += both;
        self.terminal[i] += from_source - to_sink;
    }

    fn activate(&mut self, i: usize) {
        if !self.queued[i] {
            self.queued[i] = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<usize> {
        while let Some(i) = self.active.pop_front() {
            self.queued[i] = false;
            if self.parent[i] != NONE {
                return Some(i);
            }
        }
        None
    }

    /// Grows the tree of `i`; returns an arc from the source tree into the sink tree.
    fn grow(&mut self, i: usize) -> Option<usize> {
        let src = self.tree[i] == Tree::Source;
        let mut a = self.first[i];
        while a != NONE {
            let j = self.head[a];
            let residual = if src { self.cap[a] } else { self.cap[a ^ 1] };
            if residual > EPS {
                if self.parent[j] == NONE {
                    self.tree[j] = self.tree[i];
                    self.parent[j] = a ^ 1;
                    self.stamp[j] = self.stamp[i];
                    self.dist[j] = self.dist[i] + 1;
                    self.activate(j);
                } else if self.tree[j] != self.tree[i] {
                    return Some(if src { a } else { a ^ 1 });
                } else if self.stamp[j] <= self.stamp[i] && self.dist[j] > self.dist[i] {
                    self.parent[j] = a ^ 1;
                    self.stamp[j] = self.stamp[i];
                    self.dist[j] = self.dist[i] + 1;
                }
            }
            a = self.next[a];
        }
        None
    }

    fn augment(&mut self, middle: usize) -> f64 {
        let mut b = self.cap[middle];
        let mut i = self.head[middle ^ 1];
        while self.parent[i] != TERMINAL {
            let a = self.parent[i];
            b = b.min(self.cap[a ^ 1]);
            i = self.head[a];
        }
        b = b.min(self.terminal[i]);
        let mut j = self.head[middle];
        while self.parent[j] != TERMINAL {
            let a = self.parent[j];
            b = b.min(self.cap[a]);
            j = self.head[a];
        }
        b = b.min(-self.terminal[j]);

        self.cap[middle] -= b;
        self.cap[middle ^ 1] += b;
        let mut i = self.head[middle ^ 1];
        while self.parent[i] != TERMINAL {
            let a = self.parent[i];
            self.cap[a] += b;
            self.cap[a ^ 1] -= b;
            if self.cap[a ^ 1] <= EPS {
                self.parent[i] = ORPHAN;
                self.orphans.push_back(i);
            }
            i = self.head[a];
        }
        self.terminal[i] -= b;
        if self.terminal[i] <= EPS {
            self.parent[i] = ORPHAN;
            self.orphans.push_back(i);
        }
        let mut j = self.head[middle];
        while self.parent[j] != TERMINAL {
            let a = self.parent[j];
            self.cap[a ^ 1] += b;
            self.cap[a] -= b;
            if self.cap[a] <= EPS {
                self.parent[j] = ORPHAN;
                self.orphans.push_back(j);
            }
            j = self.head[a];
        }
        self.terminal[j] += b;
        if self.terminal[j] >= -EPS {
            self.parent[j] = ORPHAN;
            self.orphans.push_back(j);
        }
        b
    }

    /// Distance from `j` to its tree root, or `None` if the path meets an orphan.
    fn origin_distance(&mut self, mut j: usize) -> Option<u32> {
        let mut d = 0;
        loop {
            if self.stamp[j] == self.time {
                return Some(d + self.dist[j]);
            }
            let a = self.parent[j];
            d += 1;
            if a == TERMINAL {
                self.stamp[j] = self.time;
                self.dist[j] = 1;
                return Some(d);
            }
            if a == ORPHAN || a == NONE {
                return None;
            }
            j = self.head[a];
        }
    }

    fn adopt(&mut self, i: usize) {
        let src = self.tree[i] == Tree::Source;
        let mut best = NONE;
        let mut best_d = u32::MAX;
        let mut a = self.first[i];
        while a != NONE {
            let j = self.head[a];
            let residual = if src { self.cap[a ^ 1] } else { self.cap[a] };
            if residual > EPS && self.tree[j] == self.tree[i] && self.parent[j] != NONE {
                if let Some(mut d) = self.origin_distance(j) {
                    if d < best_d {
                        best = a;
                        best_d = d;
                    }
                    let mut k = j;
                    while self.stamp[k] != self.time {
                        self.stamp[k] = self.time;
                        self.dist[k] = d;
                        d -= 1;
                        k = self.head[self.parent[k]];
                    }
                }
            }
            a = self.next[a];
        }
        if best != NONE {
            self.parent[i] = best;
            self.stamp[i] = self.time;
            self.dist[i] = best_d + 1;
            return;
        }
        let mut a = self.first[i];
        while a != NONE {
            let j = self.head[a];
            if self.tree[j] == self.tree[i] && self.parent[j] != NONE {
                let residual = if src { self.cap[a ^ 1] } else { self.cap[a] };
                if residual > EPS {
                    self.activate(j);
                }
                let p = self.parent[j];
                if p != TERMINAL && p != ORPHAN && self.head[p] == i {
                    self.parent[j] = ORPHAN;
                    self.orphans.push_back(j);
                }
            }
            a = self.next[a];
        }
        self.tree[i] = Tree::Free;
        self.parent[i] = NONE;
    }

    pub fn max_flow(&mut self) -> f64 {
        let mut flow = self.base_flow;
        for i in 0..self.first.len() {
            if self.terminal[i] > EPS {
                self.tree[i] = Tree::Source;
            } else if self.terminal[i] < -EPS {
                self.tree[i] = Tree::Sink;
            } else {
                continue;
            }
            self.parent[i] = TERMINAL;
            self.dist[i] = 1;
            self.activate(i);
        }
        let mut current: Option<usize> = None;
        loop {
            let i = match current.filter(|&i| self.parent[i] != NONE) {
                Some(i) => i,
                None => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            current = None;
            let Some(middle) = self.grow(i) else { continue };
            current = Some(i);
            self.time += 1;
            flow += self.augment(middle);
            while let Some(o) = self.orphans.pop_front() {
                self.adopt(o);
            }
        }
        flow
    }

    /// Whether `i` ends on the source side of the minimum cut found by `max_flow`.
    pub fn is_source_side(&self, i: usize) -> bool {
        self.tree[i] == Tree::Source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        // CLRS flow network, max flow 23; source and sink become terminal arcs
        let mut g = MaxFlow::new(4);
        g.add_terminal(0, 16.0, 0.0);
        g.add_terminal(1, 13.0, 0.0);
        for (u, v, c) in [(1, 0, 4.0), (0, 2, 12.0), (2, 1, 9.0), (1, 3, 14.0), (3, 2, 7.0)] {
            g.add_edge(u, v, c, 0.0);
        }
        g.add_terminal(2, 0.0, 20.0);
        g.add_terminal(3, 0.0, 4.0);
        assert!((g.max_flow() - 23.0).abs() < 1e-12);
        // the unique minimum cut is {s, v1, v2, v4}
        assert!(g.is_source_side(0) && g.is_source_side(1) && g.is_source_side(3));
        assert!(!g.is_source_side(2));
    }

    #[test]
    fn long_chain_does_not_recurse() {
        let n = 200_000;
        let mut g = MaxFlow::new(n);
        for i in 0..n - 1 {
            g.add_edge(i, i + 1, 1.0 + (i % 3) as f64, 0.0);
        }
        g.add_terminal(0, 5.0, 0.0);
        g.add_terminal(n - 1, 0.0, 5.0);
        assert!((g.max_flow() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_cuts() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg32::seed_from_u64(4);
        for _ in 0..50 {
            let n = 6;
            let mut g = MaxFlow::new(n);
            let mut w = vec![vec![0.0; n]; n];
            let mut ts = vec![(0.0, 0.0); n];
            for (u, row) in w.iter_mut().enumerate() {
                for (v, c) in row.iter_mut().enumerate() {
                    if u != v && rng.random_bool(0.5) {
                        *c = rng.random_range(0.0..3.0);
                    }
                }
            }
            for u in 0..n {
                for v in u + 1..n {
                    g.add_edge(u, v, w[u][v], w[v][u]);
                }
                ts[u] = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
                g.add_terminal(u, ts[u].0, ts[u].1);
            }
            let flow = g.max_flow();
            let cut_of = |s: &dyn Fn(usize) -> bool| {
                let mut c = 0.0;
                for u in 0..n {
                    c += if s(u) { ts[u].1 } else { ts[u].0 };
                    for v in 0..n {
                        if s(u) && !s(v) {
                            c += w[u][v];
                        }
                    }
                }
                c
            };
            let best = (0..1u32 << n).map(|m| cut_of(&|u| m >> u & 1 == 1)).fold(f64::INFINITY, f64::min);
            assert!((flow - best).abs() < 1e-9, "{flow} vs {best}");
            assert!((cut_of(&|u| g.is_source_side(u)) - best).abs() < 1e-9);
        }
    }
}
