//! Depth certificates for non-core vertices.
//!
//! The depth of a non-core vertex `v` is the length of a shortest stripping
//! sequence ending with `v` (one degree-deficient vertex deleted per step).
//! Exact depth is only computed exhaustively on tiny instances
//! ([`exact_depth`]); at scale we sandwich it:
//!
//! * lower bound: the round index `I_v` in which the parallel process
//!   removes `v` — every vertex surviving to round `i` needs at least `i`
//!   deletions;
//! * upper bound: `|R(v)|`, where `R(v)` is the layered set grown by
//!   [`build_r`]: start from `{v}`, close under same-round components of the
//!   round hypergraph, then pull in the previous-round vertices adjacent to
//!   what has been collected, and repeat down to round 1. `R(v)` always
//!   contains a valid stripping sequence ending with `v`; [`build_r`]
//!   extracts the canonical one and [`extract_and_validate_sequence`]
//!   replays it against a fresh copy of the graph.

use crate::stripping::{Peelable, RoundBreakdown};
use crate::Error;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Layered certificate for one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthCertificate {
    pub v: u32,
    /// Round in which `v` is removed (`I_v`).
    pub level: usize,
    /// `layers[j-1]` is `R_j`; ascending round order, `layers.len() == level`.
    pub layers: Vec<Vec<u32>>,
    /// Sorted union of all layers.
    pub union_r: Vec<u32>,
    /// Stripping sequence contained in `R(v)`, ending with `v`.
    pub sequence: Vec<u32>,
    pub lower_bound: usize,
    pub upper_bound: usize,
}

/// Where a replayed sequence first breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceViolation {
    pub position: usize,
    pub vertex: u32,
    pub degree_at_removal: u32,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb as usize] = ra;
        }
    }
}

/// Build the layered certificate of `v` from a prior [`round_stats`] run.
///
/// Adjacency in the pull-back step is evaluated in the graph as it stood at
/// the start of the earlier round: for `u` removed in round `j-1`, exactly
/// the edges removed during round `j-1` are still present and incident to
/// `u`, so those are the edges scanned.
///
/// [`round_stats`]: crate::stripping::round_stats
pub fn build_r(bd: &RoundBreakdown, v: u32) -> Result<DepthCertificate, Error> {
    let round_of = &bd.outcome.round_of;
    let level = round_of
        .get(v as usize)
        .copied()
        .ok_or_else(|| Error::Infeasible {
            what: alloc::format!("vertex {v} out of range"),
        })? as usize;
    if level == 0 {
        return Err(Error::CoreVertex { v });
    }

    let n = bd.n as usize;
    // in_w[u]: u already collected into some layer R_j..R_{I_v}.
    let mut in_w = vec![false; n];
    let mut layers_desc: Vec<Vec<u32>> = Vec::with_capacity(level);
    let mut frontier: Vec<u32> = vec![v]; // R'_j seeds, all in round j

    for j in (1..=level).rev() {
        // Components of the round-j hypergraph that meet the seeds, via a
        // union-find over S_j with a local index map.
        let s_j = &bd.outcome.strata[j - 1];
        let mut local = alloc::collections::BTreeMap::new();
        for (i, &u) in s_j.iter().enumerate() {
            local.insert(u, i as u32);
        }
        let mut uf = DisjointSet::new(s_j.len());
        for si_edge in &bd.rounds[j - 1].si_edges {
            if si_edge.len() >= 2 {
                let first = local[&si_edge[0]];
                for &u in &si_edge[1..] {
                    uf.union(first, local[&u]);
                }
            }
        }
        let mut seed_roots = vec![false; s_j.len()];
        for &u in &frontier {
            seed_roots[uf.find(local[&u]) as usize] = true;
        }
        let mut layer: Vec<u32> = Vec::new();
        for (i, &u) in s_j.iter().enumerate() {
            if seed_roots[uf.find(i as u32) as usize] {
                layer.push(u);
                in_w[u as usize] = true;
            }
        }
        layers_desc.push(layer);

        if j == 1 {
            break;
        }
        // Pull back: vertices of S_{j-1} lying on a round-(j-1) edge that
        // touches anything collected so far.
        let mut next: Vec<u32> = Vec::new();
        let mut marked = alloc::collections::BTreeSet::new();
        for &e in &bd.round_edges[j - 2] {
            let edge = bd.edge(e as usize);
            if edge.iter().any(|&u| in_w[u as usize]) {
                for &u in edge {
                    if round_of[u as usize] as usize == j - 1 && marked.insert(u) {
                        next.push(u);
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            // No dependencies below this round; lower layers stay empty.
            for _ in 1..j {
                layers_desc.push(Vec::new());
            }
            break;
        }
    }

    let mut layers: Vec<Vec<u32>> = layers_desc;
    layers.reverse(); // ascending rounds: layers[j-1] = R_j
    let mut union_r: Vec<u32> = layers.iter().flatten().copied().collect();
    union_r.sort_unstable();

    // Canonical sequence: rounds ascending, vertices in index order inside a
    // layer, with v forced last. Any round-ascending order replays validly.
    let mut sequence: Vec<u32> = Vec::with_capacity(union_r.len());
    for (j, layer) in layers.iter().enumerate() {
        let mut sorted = layer.clone();
        sorted.sort_unstable();
        if j + 1 == level {
            sorted.retain(|&u| u != v);
        }
        sequence.extend_from_slice(&sorted);
    }
    sequence.push(v);

    let upper = union_r.len();
    Ok(DepthCertificate {
        v,
        level,
        layers,
        union_r,
        sequence,
        lower_bound: level,
        upper_bound: upper,
    })
}

/// Replay the certificate's sequence on a fresh copy of the graph, checking
/// that every vertex is deletable (degree `< k`) at its removal.
pub fn extract_and_validate_sequence<G: Peelable>(
    g: &G,
    k: u32,
    cert: &DepthCertificate,
) -> Result<Vec<u32>, SequenceViolation> {
    let mut inc = crate::stripping::incidence_of(g);
    for (pos, &u) in cert.sequence.iter().enumerate() {
        let d = inc.deg[u as usize];
        if d >= k {
            return Err(SequenceViolation {
                position: pos,
                vertex: u,
                degree_at_removal: d,
            });
        }
        let start = inc.adj_off[u as usize] as usize;
        let len = inc.adj_len[u as usize] as usize;
        for i in start..start + len {
            let e = inc.adj[i] as usize;
            if !inc.alive[e] {
                continue;
            }
            inc.alive[e] = false;
            for pos in e * inc.r..(e + 1) * inc.r {
                let w = inc.edge_v[pos] as usize;
                inc.deg[w] -= 1;
            }
        }
    }
    Ok(cert.sequence.clone())
}

pub const EXACT_DEPTH_DEFAULT_BUDGET: u64 = 10_000_000;

/// Exhaustive shortest stripping sequence ending with `v`, by breadth-first
/// search over removed-vertex bitmasks. Every reachable mask is reached with
/// `popcount` deletions, so the first mask from which `v` is deletable gives
/// the depth. Intended for `n <= 12`; hard-capped at `n <= 24`.
pub fn exact_depth<G: Peelable>(g: &G, k: u32, v: u32, budget: u64) -> Result<usize, Error> {
    let inc = crate::stripping::incidence_of(g);
    let n = inc.n;
    if n > 24 {
        return Err(Error::Infeasible {
            what: alloc::format!("exact_depth supports n <= 24, got n = {n}"),
        });
    }
    // Degree of u with the masked vertices (and their edges) removed.
    let deg_in = |mask: u32, u: usize| -> u32 {
        let start = inc.adj_off[u] as usize;
        let len = inc.adj_len[u] as usize;
        let mut d = 0u32;
        for i in start..start + len {
            let e = inc.adj[i] as usize;
            if inc.edge(e).iter().all(|&w| mask & (1 << w) == 0) {
                d += 1;
            }
        }
        d
    };
    if (v as usize) >= n {
        return Err(Error::Infeasible {
            what: alloc::format!("vertex {v} out of range"),
        });
    }
    // Depth is undefined for core vertices.
    let core = crate::stripping::naive_core(g, k);
    if core.vertices.contains(&v) {
        return Err(Error::CoreVertex { v });
    }

    let mut visited = vec![false; 1usize << n];
    let mut queue: VecDeque<u32> = VecDeque::new();
    visited[0] = true;
    queue.push_back(0);
    let mut states: u64 = 0;
    while let Some(mask) = queue.pop_front() {
        states += 1;
        if states > budget {
            return Err(Error::BudgetExceeded { states });
        }
        if deg_in(mask, v as usize) < k {
            return Ok(mask.count_ones() as usize + 1);
        }
        for u in 0..n {
            if mask & (1 << u) != 0 || u == v as usize {
                continue;
            }
            let next = mask | (1 << u);
            if visited[next as usize] {
                continue;
            }
            if deg_in(mask, u) < k {
                visited[next as usize] = true;
                queue.push_back(next);
            }
        }
    }
    // Unreachable for non-core v: the stripping process itself deletes it.
    Err(Error::BudgetExceeded { states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::SimpleHypergraph;
    use crate::stripping::round_stats;

    fn path3() -> SimpleHypergraph {
        SimpleHypergraph::from_edges(3, 2, &[vec![0, 1], vec![1, 2]]).unwrap()
    }

    #[test]
    fn certificate_on_path_middle() {
        let g = path3();
        let bd = round_stats(&g, 2);
        let cert = build_r(&bd, 1).unwrap();
        assert_eq!(cert.level, 2);
        assert_eq!(cert.layers.len(), 2);
        assert_eq!(cert.layers[1], vec![1]);
        let mut r1 = cert.layers[0].clone();
        r1.sort_unstable();
        assert_eq!(r1, vec![0, 2]);
        assert_eq!(cert.union_r, vec![0, 1, 2]);
        assert_eq!(cert.lower_bound, 2);
        assert_eq!(cert.upper_bound, 3);
        assert_eq!(*cert.sequence.last().unwrap(), 1);
        let replay = extract_and_validate_sequence(&g, 2, &cert).unwrap();
        assert_eq!(replay, cert.sequence);
    }

    #[test]
    fn first_round_vertex_is_its_component() {
        let g = path3();
        let bd = round_stats(&g, 2);
        let cert = build_r(&bd, 0).unwrap();
        assert_eq!(cert.level, 1);
        assert!(cert.sequence.len() >= 1);
        assert_eq!(*cert.sequence.last().unwrap(), 0);
        // The S_1 edges are disjoint singletons here, so R(0) = {0}.
        assert_eq!(cert.union_r, vec![0]);
    }

    #[test]
    fn core_vertex_rejected() {
        let tri = SimpleHypergraph::from_edges(3, 2, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let bd = round_stats(&tri, 2);
        assert!(matches!(build_r(&bd, 0), Err(Error::CoreVertex { v: 0 })));
        assert!(matches!(exact_depth(&tri, 2, 0, 1000), Err(Error::CoreVertex { .. })));
    }

    #[test]
    fn exact_depth_on_path() {
        let g = path3();
        assert_eq!(exact_depth(&g, 2, 1, 1_000_000).unwrap(), 2);
        assert_eq!(exact_depth(&g, 2, 0, 1_000_000).unwrap(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let g = crate::hypergraph::sample_simple(12, 20, 3, 1).unwrap();
        let out = crate::stripping::parallel_strip(&g, 2);
        if let Some(v) = (0..12u32).find(|&v| out.round_of[v as usize] > 0) {
            assert!(matches!(exact_depth(&g, 2, v, 1), Err(Error::BudgetExceeded { .. })));
        }
    }
}
