use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::GeneratorError;
use crate::rng::{stream_rng, STREAM_TOPOLOGY};

/// Shape of the trade network. An edge `(i, j)` lets buyer `j` pay seller
/// `i`, i.e. allows a nonzero `f_ij`. Self-loops never occur: the diagonal
/// holds savings.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    /// Every buyer trades with every other agent.
    Complete,
    /// Each ordered pair is an edge independently with probability `p_edge`.
    RandomDirected { p_edge: f64 },
    /// Preferential attachment with `m` links per new agent on the undirected
    /// skeleton; every link becomes a trade edge in both directions.
    ScaleFree { m: usize },
    /// Buyer `j` pays agents `j+1, ..., j+k` (mod n).
    Ring { k: usize },
    /// Explicit 0-based `(seller, buyer)` pairs, sorted and deduplicated.
    EdgeList(Vec<(u32, u32)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySpec {
    pub n: usize,
    pub kind: Topology,
}

impl TopologySpec {
    pub fn new(n: usize, kind: Topology) -> Result<Self, GeneratorError> {
        let spec = Self { n, kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn complete(n: usize) -> Self {
        Self {
            n,
            kind: Topology::Complete,
        }
    }

    pub fn ring(n: usize, k: usize) -> Self {
        Self {
            n,
            kind: Topology::Ring { k },
        }
    }

    pub fn random_directed(n: usize, p_edge: f64) -> Self {
        Self {
            n,
            kind: Topology::RandomDirected { p_edge },
        }
    }

    pub fn scale_free(n: usize, m: usize) -> Self {
        Self {
            n,
            kind: Topology::ScaleFree { m },
        }
    }

    /// Edges are `(seller, buyer)` pairs, 0-based.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GeneratorError> {
        let mut list = Vec::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(GeneratorError::spec(
                    "topology.edges",
                    format!("edge ({}, {}) out of range for n = {n}", i + 1, j + 1),
                ));
            }
            if i == j {
                return Err(GeneratorError::spec(
                    "topology.edges",
                    format!("self-loop on agent {}", i + 1),
                ));
            }
            list.push((i as u32, j as u32));
        }
        list.sort_unstable();
        list.dedup();
        Self::new(n, Topology::EdgeList(list))
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.n == 0 {
            return Err(GeneratorError::spec("n", "an economy needs at least one agent"));
        }
        if self.n > u32::MAX as usize {
            return Err(GeneratorError::spec("n", "too many agents"));
        }
        match &self.kind {
            Topology::Complete => {}
            Topology::RandomDirected { p_edge } => {
                if !(0.0..=1.0).contains(p_edge) {
                    return Err(GeneratorError::spec(
                        "topology.p_edge",
                        format!("must lie in [0, 1], got {p_edge}"),
                    ));
                }
            }
            Topology::ScaleFree { m } => {
                if *m < 1 {
                    return Err(GeneratorError::spec("topology.m", "must be at least 1"));
                }
            }
            Topology::Ring { k } => {
                if *k < 1 {
                    return Err(GeneratorError::spec("topology.k", "must be at least 1"));
                }
            }
            Topology::EdgeList(edges) => {
                if let Some(&(i, j)) = edges
                    .iter()
                    .find(|&&(i, j)| i == j || i as usize >= self.n || j as usize >= self.n)
                {
                    return Err(GeneratorError::spec(
                        "topology.edges",
                        format!("invalid edge ({}, {})", i + 1, j + 1),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Prepares per-column seller lookup; draws the scale-free skeleton.
    pub(crate) fn realize(&self, seed: u64) -> Realized {
        match &self.kind {
            Topology::Complete => Realized::Complete,
            Topology::RandomDirected { p_edge } => Realized::Random(*p_edge),
            Topology::Ring { k } => Realized::Ring(*k),
            Topology::ScaleFree { m } => Realized::Lists(scale_free_adjacency(self.n, *m, seed)),
            Topology::EdgeList(edges) => {
                let mut lists = vec![Vec::new(); self.n];
                for &(i, j) in edges {
                    lists[j as usize].push(i);
                }
                for l in &mut lists {
                    l.sort_unstable();
                }
                Realized::Lists(lists)
            }
        }
    }
}

pub(crate) enum Realized {
    Complete,
    Random(f64),
    Ring(usize),
    Lists(Vec<Vec<u32>>),
}

impl Realized {
    /// Writes the sellers of buyer `j`, ascending, into `out`. Only the
    /// random topology draws from `rng`.
    pub(crate) fn sellers(&self, n: usize, j: usize, rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
        out.clear();
        match self {
            Realized::Complete => out.extend((0..n as u32).filter(|&i| i as usize != j)),
            Realized::Ring(k) => {
                let k = (*k).min(n - 1);
                out.extend((1..=k).map(|d| ((j + d) % n) as u32));
                out.sort_unstable();
            }
            Realized::Lists(lists) => out.extend_from_slice(&lists[j]),
            Realized::Random(p) => sample_random_sellers(n, j, *p, rng, out),
        }
    }
}

/// Bernoulli(p) over the `n - 1` candidates `i != j`, by geometric skips.
fn sample_random_sellers(n: usize, j: usize, p: f64, rng: &mut ChaCha8Rng, out: &mut Vec<u32>) {
    let candidates = (n - 1) as u64;
    if p <= 0.0 || candidates == 0 {
        return;
    }
    let to_row = |c: u64| if (c as usize) < j { c as u32 } else { c as u32 + 1 };
    if p >= 1.0 {
        out.extend((0..candidates).map(to_row));
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut next: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        // saturating conversion; huge skips simply end the column
        let c = next.saturating_add(skip as u64);
        if c >= candidates {
            break;
        }
        out.push(to_row(c));
        next = c + 1;
    }
}

fn scale_free_adjacency(n: usize, m: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = stream_rng(seed, STREAM_TOPOLOGY);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut endpoints: Vec<u32> = Vec::new();
    let core = (m + 1).min(n);
    for a in 0..core {
        for b in a + 1..core {
            adj[a].push(b as u32);
            adj[b].push(a as u32);
            endpoints.push(a as u32);
            endpoints.push(b as u32);
        }
    }
    let mut chosen: Vec<u32> = Vec::with_capacity(m);
    for v in core..n {
        chosen.clear();
        let want = m.min(v);
        while chosen.len() < want {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            adj[v].push(t);
            adj[t as usize].push(v as u32);
            endpoints.push(v as u32);
            endpoints.push(t);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    adj
}
