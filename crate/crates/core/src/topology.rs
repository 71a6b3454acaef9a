//! Ring-lattice network construction, Watts-Strogatz rewiring, and the two
//! small-world graph statistics (clustering coefficient and characteristic
//! path length).
//!
//! Networks are directed: every unit owns `k` out-edges, initially split
//! between the `k/2` nearest clockwise and `k/2` nearest counterclockwise
//! ring neighbors. Rewiring redirects each out-edge independently with
//! probability `p`, keeping the source, the weight, and the total edge count
//! fixed. The graph statistics are computed on the undirected projection, as
//! is conventional for small-world analysis.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::neuron::NeuronKind;
use crate::Result;

/// One directed synapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    /// Positive for excitatory sources, negative for inhibitory sources.
    pub weight: f64,
    /// Ring distance between the endpoints at the edge's current position.
    pub ring_distance: u32,
}

/// A directed network over `n` ring positions, remembering the construction
/// parameters so a serialized copy can be identified later.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub edges: Vec<Edge>,
}

/// Shortest walking distance between two positions on an `n`-ring.
pub fn ring_distance(n: usize, a: usize, b: usize) -> u32 {
    let d = a.abs_diff(b);
    d.min(n - d) as u32
}

/// Directed (src, dst) pairs of the pristine ring lattice: for each unit, the
/// `k/2` nearest clockwise neighbors then the `k/2` nearest counterclockwise.
pub fn ring_lattice(n: usize, k: usize) -> Result<Vec<(u32, u32)>> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(Error::config(format!(
            "neighbor count k must be positive and even, got {k}"
        )));
    }
    if k + 1 > n {
        return Err(Error::config(format!(
            "neighbor count k = {k} does not fit in a ring of {n} units"
        )));
    }
    let half = k / 2;
    let mut pairs = Vec::with_capacity(n * k);
    for i in 0..n {
        for off in 1..=half {
            pairs.push((i as u32, ((i + off) % n) as u32));
        }
        for off in 1..=half {
            pairs.push((i as u32, ((i + n - off) % n) as u32));
        }
    }
    Ok(pairs)
}

impl Network {
    /// Build a pristine ring lattice with weights drawn per edge: excitatory
    /// sources project `w_e * U[0,1)`, inhibitory sources `-w_i * U[0,1)`.
    /// Weights are drawn in edge order before any rewiring happens, so a
    /// later [`rewire`](Network::rewire) moves synapses without resampling
    /// their strengths.
    pub fn ring(
        n: usize,
        k: usize,
        kinds: &[NeuronKind],
        w_e: f64,
        w_i: f64,
        rng: &mut impl Rng,
    ) -> Result<Network> {
        if kinds.len() != n {
            return Err(Error::config(format!(
                "got {} unit kinds for a network of {n} units",
                kinds.len()
            )));
        }
        let edges = ring_lattice(n, k)?
            .into_iter()
            .map(|(src, dst)| {
                let scale: f64 = rng.gen();
                let weight = match kinds[src as usize] {
                    NeuronKind::Excitatory => w_e * scale,
                    NeuronKind::Inhibitory => -w_i * scale,
                };
                Edge {
                    src,
                    dst,
                    weight,
                    ring_distance: ring_distance(n, src as usize, dst as usize),
                }
            })
            .collect();
        Ok(Network {
            n,
            k,
            p: 0.0,
            seed: 0,
            edges,
        })
    }

    /// Watts-Strogatz rewiring: visit every directed edge in construction
    /// order and, with probability `p`, redraw its destination uniformly from
    /// all units except the source and the source's other current targets
    /// (the edge's own target is released first, so keeping it is a valid
    /// outcome of the redraw). Collisions are resampled. Weights ride along
    /// unchanged; ring distances are recomputed.
    pub fn rewire(&mut self, p: f64, rng: &mut impl Rng) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config(format!(
                "rewiring probability must lie in [0, 1], got {p}"
            )));
        }
        let mut targets: Vec<HashSet<u32>> = vec![HashSet::new(); self.n];
        for e in &self.edges {
            targets[e.src as usize].insert(e.dst);
        }
        for e in &mut self.edges {
            if !rng.gen_bool(p) {
                continue;
            }
            let taken = &mut targets[e.src as usize];
            taken.remove(&e.dst);
            let dst = loop {
                let candidate = rng.gen_range(0..self.n as u32);
                if candidate != e.src && !taken.contains(&candidate) {
                    break candidate;
                }
            };
            taken.insert(dst);
            e.dst = dst;
            e.ring_distance = ring_distance(self.n, e.src as usize, dst as usize);
        }
        self.p = p;
        Ok(())
    }

    /// Undirected projection as sorted neighbor lists: an (a, b) link exists
    /// if a directed edge runs either way between a and b.
    pub fn undirected_neighbors(&self) -> Vec<Vec<u32>> {
        let mut sets: Vec<HashSet<u32>> = vec![HashSet::new(); self.n];
        for e in &self.edges {
            sets[e.src as usize].insert(e.dst);
            sets[e.dst as usize].insert(e.src);
        }
        sets.into_iter()
            .map(|s| {
                let mut v: Vec<u32> = s.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// Mean clustering coefficient of the undirected projection: for each
    /// unit, the fraction of its neighbor pairs that are themselves linked;
    /// units with fewer than two neighbors contribute zero. Averaged over all
    /// units.
    pub fn clustering_coefficient(&self) -> f64 {
        let neighbors = self.undirected_neighbors();
        let lookup: Vec<HashSet<u32>> = neighbors
            .iter()
            .map(|ns| ns.iter().copied().collect())
            .collect();
        let mut total = 0.0;
        for ns in &neighbors {
            let deg = ns.len();
            if deg < 2 {
                continue;
            }
            let mut linked = 0usize;
            for (i, &a) in ns.iter().enumerate() {
                for &b in &ns[i + 1..] {
                    if lookup[a as usize].contains(&b) {
                        linked += 1;
                    }
                }
            }
            total += linked as f64 / (deg * (deg - 1) / 2) as f64;
        }
        total / self.n as f64
    }

    /// Characteristic path length of the undirected projection: BFS hop
    /// counts averaged over all ordered pairs of distinct units. Returns
    /// `None` when any pair is unreachable. Hop totals are accumulated in
    /// integers, so the result does not depend on traversal or thread order.
    pub fn mean_path_length(&self) -> Option<f64> {
        let neighbors = self.undirected_neighbors();
        let n = self.n;
        let per_source: Vec<Option<u64>> = (0..n)
            .into_par_iter()
            .map(|source| bfs_hop_sum(&neighbors, source))
            .collect();
        let mut total: u64 = 0;
        for s in per_source {
            total += s?;
        }
        Some(total as f64 / (n as f64 * (n as f64 - 1.0)))
    }
}

/// Sum of BFS hop counts from `source` to every other unit, or `None` if some
/// unit is unreachable.
fn bfs_hop_sum(neighbors: &[Vec<u32>], source: usize) -> Option<u64> {
    let n = neighbors.len();
    let mut dist = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[source] = 0;
    queue.push_back(source as u32);
    let mut reached = 1usize;
    let mut sum = 0u64;
    while let Some(node) = queue.pop_front() {
        let d = dist[node as usize];
        for &next in &neighbors[node as usize] {
            if dist[next as usize] == u32::MAX {
                dist[next as usize] = d + 1;
                sum += (d + 1) as u64;
                reached += 1;
                queue.push_back(next);
            }
        }
    }
    (reached == n).then_some(sum)
}

/// Write a network as a plain-text edge list: a `N k p seed` header line,
/// then one `src dst weight ring_dist` line per directed edge. Weights carry
/// 17 significant digits so a read-back reproduces them bit for bit.
pub fn write_edge_list<W: Write>(net: &Network, mut out: W) -> Result<()> {
    writeln!(out, "{} {} {} {}", net.n, net.k, net.p, net.seed)?;
    for e in &net.edges {
        writeln!(
            out,
            "{} {} {:.16e} {}",
            e.src, e.dst, e.weight, e.ring_distance
        )?;
    }
    Ok(())
}

/// Read a network back from the edge-list format of [`write_edge_list`].
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Network> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::parse(1, "empty edge list")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::parse(1, "header must be `N k p seed`"));
    }
    let n: usize = parse_field(fields[0], 1, "N")?;
    let k: usize = parse_field(fields[1], 1, "k")?;
    let p: f64 = parse_field(fields[2], 1, "p")?;
    let seed: u64 = parse_field(fields[3], 1, "seed")?;

    let mut edges = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                "edge line must be `src dst weight ring_dist`",
            ));
        }
        let src: u32 = parse_field(fields[0], lineno, "src")?;
        let dst: u32 = parse_field(fields[1], lineno, "dst")?;
        let weight: f64 = parse_field(fields[2], lineno, "weight")?;
        let ring_dist: u32 = parse_field(fields[3], lineno, "ring_dist")?;
        if src as usize >= n || dst as usize >= n {
            return Err(Error::parse(lineno, format!("unit id out of range 0..{n}")));
        }
        edges.push(Edge {
            src,
            dst,
            weight,
            ring_distance: ring_dist,
        });
    }
    Ok(Network {
        n,
        k,
        p,
        seed,
        edges,
    })
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("bad {what}: {s:?}")))
}
