//! Simple undirected graphs, their canonical encoding, generators and
//! edge-list I/O.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{LabError, Result};

/// An undirected graph on vertices `0..n`; edges are stored as `(u, v)`
/// with `u < v`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub n: usize,
    edges: BTreeSet<(usize, usize)>,
}

fn norm(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl SimpleGraph {
    pub fn edgeless(n: usize) -> Self {
        SimpleGraph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = SimpleGraph::edgeless(n);
        for (u, v) in edges {
            g.check_pair(u, v)?;
            g.edges.insert(norm(u, v));
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        SimpleGraph { n, edges }
    }

    pub fn ring(n: usize) -> Self {
        let mut g = SimpleGraph::edgeless(n);
        if n >= 2 {
            for u in 0..n {
                g.edges.insert(norm(u, (u + 1) % n));
            }
        }
        g
    }

    /// Erdős–Rényi G(n, p).
    pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut g = SimpleGraph::edgeless(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    g.edges.insert((u, v));
                }
            }
        }
        g
    }

    /// Barabási–Albert preferential attachment: a complete seed on `m + 1`
    /// vertices, then each new vertex attaches to `m` distinct existing
    /// vertices chosen proportionally to degree.
    pub fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(LabError::Topology(format!("ba needs 1 <= m < n, got m={m}, n={n}")));
        }
        let mut g = SimpleGraph::complete(m + 1);
        g.n = n;
        // each endpoint appears once per incident edge
        let mut targets: Vec<usize> = g.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        for new in m + 1..n {
            let mut chosen = BTreeSet::new();
            while chosen.len() < m {
                chosen.insert(*targets.choose(rng).expect("seed graph has edges"));
            }
            for &t in &chosen {
                g.edges.insert((t, new));
                targets.push(t);
                targets.push(new);
            }
        }
        Ok(g)
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(LabError::Domain(format!("self-loop at {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(LabError::Domain(format!("edge ({u}, {v}) outside {} vertices", self.n)));
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&norm(u, v))
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check_pair(u, v)?;
        Ok(self.edges.insert(norm(u, v)))
    }

    pub fn remove(&mut self, u: usize, v: usize) -> bool {
        self.edges.remove(&norm(u, v))
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; adj.len()];
        dist[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let d = dist[u].unwrap();
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || Self::bfs(&self.neighbours(), 0).iter().all(Option::is_some)
    }

    /// Largest shortest-path distance; `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let adj = self.neighbours();
        let mut best = 0;
        for s in 0..self.n {
            for d in Self::bfs(&adj, s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Slot of the pair `u < v` in the upper-triangular, row-major order.
    pub fn slot(&self, u: usize, v: usize) -> usize {
        let (u, v) = norm(u, v);
        u * self.n - u * (u + 1) / 2 + (v - u - 1)
    }

    /// Characteristic sequence over the `n(n-1)/2` unordered pairs, row
    /// by row: `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
    pub fn encode(&self) -> Bits {
        let mut out = Bits::zeros(self.n * self.n.saturating_sub(1) / 2);
        for &(u, v) in &self.edges {
            let s = self.slot(u, v);
            out[s] = true;
        }
        out
    }

    pub fn decode(n: usize, bits: &Bits) -> Result<Self> {
        let slots = n * n.saturating_sub(1) / 2;
        if bits.len() != slots {
            return Err(LabError::Encoding(format!(
                "graph on {n} vertices needs {slots} slots, got {}",
                bits.len()
            )));
        }
        let mut g = SimpleGraph::edgeless(n);
        let mut i = 0;
        for u in 0..n {
            for v in u + 1..n {
                if bits[i] {
                    g.edges.insert((u, v));
                }
                i += 1;
            }
        }
        Ok(g)
    }

    /// Edge-list text: `n` on the first line, then one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let bad = |m: String| LabError::Encoding(format!("edge list: {m}"));
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| bad("missing vertex count".into()))?
            .parse()
            .map_err(|_| bad("bad vertex count".into()))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(bad(format!("bad line {line:?}")));
            };
            let u = a.parse().map_err(|_| bad(format!("bad vertex {a:?}")))?;
            let v = b.parse().map_err(|_| bad(format!("bad vertex {b:?}")))?;
            edges.push((u, v));
        }
        SimpleGraph::from_edges(n, edges)
    }
}
