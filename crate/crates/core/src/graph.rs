//! Undirected sparse graphs, stochastic block model generation, and
//! edge-list file I/O.
//!
//! Edges are stored canonically as `(i, j)` with `i < j`, sorted
//! lexicographically, and neighbor lists are sorted, so everything built on
//! top of a [`Graph`] is order-deterministic.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Maximum number of regeneration attempts when an SBM sample comes out
/// disconnected.
pub const SBM_MAX_RETRIES: u64 = 32;

/// Undirected simple graph: no self-loops, no duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, canonicalizing each pair to
    /// `i < j` and sorting. Self-loops, out-of-range indices and duplicate
    /// edges (including mirrored duplicates) are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut canonical: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if a >= n || b >= n {
                return Err(Error::EdgeOutOfRange { i: a, j: b, n });
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &canonical {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canonical,
            adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, sorted, each pair with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// True iff a breadth-first traversal from node 0 reaches all nodes.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == self.n
    }

    /// Index of the canonical edge `(min, max)` in [`Graph::edges`], if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    /// Reads a graph from the edge-list text format: first significant line
    /// `n <count>`, then one `<i> <j>` pair per line. `#` starts a comment.
    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            match n {
                None => {
                    let mut parts = line.split_whitespace();
                    let tag = parts.next();
                    let count = parts.next();
                    if tag != Some("n") || parts.next().is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected header `n <count>`, got `{line}`"),
                        });
                    }
                    let count: usize = count
                        .ok_or_else(|| Error::Parse {
                            line: line_no,
                            msg: "missing node count".into(),
                        })?
                        .parse()
                        .map_err(|_| Error::Parse {
                            line: line_no,
                            msg: format!("invalid node count in `{line}`"),
                        })?;
                    n = Some(count);
                }
                Some(_) => {
                    let mut parts = line.split_whitespace();
                    let i = parse_index(parts.next(), line_no)?;
                    let j = parse_index(parts.next(), line_no)?;
                    if parts.next().is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("trailing tokens in `{line}`"),
                        });
                    }
                    edges.push((i, j));
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 1,
            msg: "empty edge-list file".into(),
        })?;
        Graph::from_edges(n, &edges)
    }

    /// Writes the edge-list text format; edges come out sorted
    /// lexicographically because that is the canonical storage order.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("n {}\n", self.n));
        for &(i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        fs::write(path, out)?;
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}

fn parse_index(token: Option<&str>, line: usize) -> Result<usize> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        msg: "expected `<i> <j>`".into(),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid node index `{token}`"),
    })
}

/// Assignment of nodes to communities (0-based labels).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityPartition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl CommunityPartition {
    /// Builds a partition from per-node labels. Labels must be contiguous
    /// from 0 and every community must be non-empty.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("no nodes".into()));
        }
        let k = labels.iter().max().unwrap() + 1;
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("community {c} is empty")));
        }
        Ok(CommunityPartition { labels, sizes })
    }

    /// One community covering `n` nodes.
    pub fn single(n: usize) -> Self {
        CommunityPartition {
            labels: vec![0; n],
            sizes: vec![n],
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }
}

/// Samples a stochastic block model graph: each unordered pair is an edge
/// independently with probability `p_in` (same block) or `p_out` (different
/// blocks), under a RNG seeded from `seed`.
///
/// Disconnected samples are regenerated with an incremented seed up to
/// [`SBM_MAX_RETRIES`] times; the whole procedure is deterministic in
/// `(sizes, p_in, p_out, seed)`.
pub fn sbm_generate(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph, CommunityPartition)> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidPartition(
            "every community size must be >= 1".into(),
        ));
    }
    if !(p_out > 0.0 && p_out <= p_in && p_in <= 1.0) {
        return Err(Error::InvalidProbability(format!(
            "need 0 < p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    let n: usize = sizes.iter().sum();
    let mut labels = Vec::with_capacity(n);
    for (c, &sz) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat(c).take(sz));
    }
    let partition = CommunityPartition::from_labels(labels)?;

    for attempt in 0..SBM_MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if partition.community_of(i) == partition.community_of(j) {
                    p_in
                } else {
                    p_out
                };
                if rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n, &edges)?;
        if g.is_connected() {
            return Ok((g, partition));
        }
    }
    Err(Error::SbmDisconnected {
        attempts: SBM_MAX_RETRIES as usize,
    })
}
