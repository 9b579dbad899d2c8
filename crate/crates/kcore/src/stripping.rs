//! Peeling engines.
//!
//! Three ways to reach the k-core, all agreeing on the result:
//!
//! * [`parallel_strip`] — remove every vertex of degree `< k` at once, round
//!   after round; `S_i` is the set removed in round `i` and the round count
//!   is the stripping number.
//! * [`slow_strip`] — the sequential refinement: a FIFO queue of light
//!   vertices, one hyperedge removed per step, chosen uniformly among the
//!   live edges at the queue head. Removes vertices in the same order as the
//!   parallel process and records the full `(L_t, N_t, D_t)` trajectory.
//! * [`naive_core`] — repeated full scans; the reference oracle for tests.
//!
//! All engines accept either a [`SimpleHypergraph`] or a [`Configuration`];
//! on configurations, degree means bin size counted with multiplicity and
//! removing an edge deletes all of its copies.

use crate::hypergraph::{Configuration, SimpleHypergraph};
use crate::rng::{self, StripRng};
use crate::Error;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

/// Flat incidence structure shared by the engines.
///
/// Per-vertex adjacency lives in one array of edge ids, one entry per
/// incident copy. Edge removal is lazy: edges carry an alive flag and dead
/// adjacency entries are swapped out when the sampler touches them or when a
/// vertex's live fraction drops below one half.
#[doc(hidden)]
pub struct Incidence {
    pub(crate) n: usize,
    pub(crate) r: usize,
    pub(crate) m: usize,
    /// Vertices of each edge (with multiplicity), `r` per edge.
    pub(crate) edge_v: Vec<u32>,
    /// Start of each vertex's adjacency window.
    pub(crate) adj_off: Vec<u32>,
    /// Edge ids, mutable for lazy compaction.
    pub(crate) adj: Vec<u32>,
    /// Stored window length per vertex (live entries are a subset).
    pub(crate) adj_len: Vec<u32>,
    /// Live degree per vertex, with multiplicity.
    pub(crate) deg: Vec<u32>,
    pub(crate) alive: Vec<bool>,
    pub(crate) edges_alive: usize,
}

impl Incidence {
    fn build(n: usize, r: usize, edge_v: Vec<u32>) -> Incidence {
        let m = edge_v.len() / r;
        let mut deg = vec![0u32; n];
        for &v in &edge_v {
            deg[v as usize] += 1;
        }
        let mut adj_off = vec![0u32; n + 1];
        for v in 0..n {
            adj_off[v + 1] = adj_off[v] + deg[v];
        }
        let mut cursor: Vec<u32> = adj_off[..n].to_vec();
        let mut adj = vec![0u32; edge_v.len()];
        for (pos, &v) in edge_v.iter().enumerate() {
            let e = (pos / r) as u32;
            adj[cursor[v as usize] as usize] = e;
            cursor[v as usize] += 1;
        }
        let adj_len = deg.clone();
        Incidence {
            n,
            r,
            m,
            edge_v,
            adj_off,
            adj,
            adj_len,
            deg,
            alive: vec![true; m],
            edges_alive: m,
        }
    }

    #[inline]
    pub(crate) fn edge(&self, e: usize) -> &[u32] {
        &self.edge_v[e * self.r..(e + 1) * self.r]
    }

    /// Uniform live incident edge of `v`. Caller guarantees `deg[v] > 0`.
    fn sample_live_edge(&mut self, v: usize, rng: &mut StripRng) -> u32 {
        let start = self.adj_off[v] as usize;
        let mut len = self.adj_len[v] as usize;
        // Compact when more than half the stored entries are dead.
        if (self.deg[v] as usize) * 2 < len {
            let mut w = start;
            for i in start..start + len {
                let e = self.adj[i];
                if self.alive[e as usize] {
                    self.adj[w] = e;
                    w += 1;
                }
            }
            len = w - start;
            self.adj_len[v] = len as u32;
        }
        loop {
            let idx = rng.random_range(0..len as u32) as usize;
            let e = self.adj[start + idx];
            if self.alive[e as usize] {
                return e;
            }
            // Swap-purge the dead entry and retry.
            len -= 1;
            self.adj.swap(start + idx, start + len);
            self.adj_len[v] = len as u32;
        }
    }
}

/// Input graphs accepted by the peeling engines.
pub trait Peelable: sealed::Sealed {}

mod sealed {
    pub trait Sealed {
        fn incidence(&self) -> super::Incidence;
        fn vertex_count(&self) -> usize;
    }
}

impl sealed::Sealed for SimpleHypergraph {
    fn incidence(&self) -> Incidence {
        Incidence::build(self.n() as usize, self.r() as usize, self.flat().to_vec())
    }
    fn vertex_count(&self) -> usize {
        self.n() as usize
    }
}
impl Peelable for SimpleHypergraph {}

impl sealed::Sealed for Configuration {
    fn incidence(&self) -> Incidence {
        let rm = self.parts_flat().len();
        let mut edge_v = Vec::with_capacity(rm);
        for i in 0..self.m() {
            edge_v.extend(self.part_bins(i));
        }
        Incidence::build(self.n() as usize, self.r() as usize, edge_v)
    }
    fn vertex_count(&self) -> usize {
        self.n() as usize
    }
}
impl Peelable for Configuration {}

pub(crate) fn incidence_of<G: Peelable>(g: &G) -> Incidence {
    sealed::Sealed::incidence(g)
}

/// Surviving subgraph: sorted vertex ids and sorted surviving edge ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KCore {
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
}

impl KCore {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Result of the parallel stripping process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripOutcome {
    pub core: KCore,
    /// `strata[i-1]` is `S_i`, the set removed in round `i`.
    pub strata: Vec<Vec<u32>>,
    pub rounds: usize,
    /// Per-vertex round index; 0 means the vertex survives in the core.
    pub round_of: Vec<u32>,
}

fn collect_core(inc: &Incidence, removed: impl Fn(usize) -> bool) -> KCore {
    let vertices: Vec<u32> = (0..inc.n as u32).filter(|&v| !removed(v as usize)).collect();
    let edges: Vec<u32> = (0..inc.m as u32).filter(|&e| inc.alive[e as usize]).collect();
    KCore { vertices, edges }
}

fn strata_from_rounds(round_of: &[u32], rounds: usize) -> Vec<Vec<u32>> {
    let mut strata = vec![Vec::new(); rounds];
    for (v, &i) in round_of.iter().enumerate() {
        if i > 0 {
            strata[(i - 1) as usize].push(v as u32);
        }
    }
    strata
}

/// Parallel k-stripping: all light vertices are removed simultaneously each
/// round, along with their incident edges, until only the k-core remains.
pub fn parallel_strip<G: Peelable>(g: &G, k: u32) -> StripOutcome {
    let mut inc = g.incidence();
    let (outcome, _) = parallel_strip_impl(&mut inc, k, false);
    outcome
}

fn parallel_strip_impl(inc: &mut Incidence, k: u32, record_edges: bool) -> (StripOutcome, Vec<Vec<u32>>) {
    let n = inc.n;
    let mut round_of = vec![0u32; n];
    let mut frontier: Vec<u32> = (0..n as u32).filter(|&v| inc.deg[v as usize] < k).collect();
    for &v in &frontier {
        round_of[v as usize] = 1;
    }
    let mut round_edges: Vec<Vec<u32>> = Vec::new();
    let mut round = 0u32;
    while !frontier.is_empty() {
        round += 1;
        let mut removed_here: Vec<u32> = Vec::new();
        let mut next: Vec<u32> = Vec::new();
        for &v in &frontier {
            let v = v as usize;
            let start = inc.adj_off[v] as usize;
            let len = inc.adj_len[v] as usize;
            for i in start..start + len {
                let e = inc.adj[i] as usize;
                if !inc.alive[e] {
                    continue;
                }
                inc.alive[e] = false;
                inc.edges_alive -= 1;
                if record_edges {
                    removed_here.push(e as u32);
                }
                for pos in e * inc.r..(e + 1) * inc.r {
                    let u = inc.edge_v[pos] as usize;
                    let old = inc.deg[u];
                    inc.deg[u] = old - 1;
                    if old == k && round_of[u] == 0 {
                        round_of[u] = round + 1;
                        next.push(u as u32);
                    }
                }
            }
        }
        if record_edges {
            round_edges.push(removed_here);
        }
        frontier = next;
    }
    let rounds = round as usize;
    let core = collect_core(inc, |v| round_of[v] > 0);
    let strata = strata_from_rounds(&round_of, rounds);
    (
        StripOutcome {
            core,
            strata,
            rounds,
            round_of,
        },
        round_edges,
    )
}

/// Naive reference core finder: scan all vertices, delete any of degree
/// `< k`, repeat until a full scan deletes nothing. Quadratic; test use only.
pub fn naive_core<G: Peelable>(g: &G, k: u32) -> KCore {
    let mut inc = g.incidence();
    let n = inc.n;
    let mut removed = vec![false; n];
    loop {
        let mut changed = false;
        for v in 0..n {
            if removed[v] || inc.deg[v] >= k {
                continue;
            }
            removed[v] = true;
            changed = true;
            let start = inc.adj_off[v] as usize;
            let len = inc.adj_len[v] as usize;
            for i in start..start + len {
                let e = inc.adj[i] as usize;
                if !inc.alive[e] {
                    continue;
                }
                inc.alive[e] = false;
                inc.edges_alive -= 1;
                for pos in e * inc.r..(e + 1) * inc.r {
                    let u = inc.edge_v[pos] as usize;
                    inc.deg[u] -= 1;
                }
            }
        }
        if !changed {
            break;
        }
    }
    collect_core(&inc, |v| removed[v])
}

/// One step record: totals over light vertices (`l`) and heavy vertices
/// (count `n_heavy`, total degree `d_heavy`) at the *start* of the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StripStep {
    pub l: u64,
    pub n_heavy: u64,
    pub d_heavy: u64,
}

impl StripStep {
    /// Average heavy degree, when any heavy vertex remains.
    pub fn zeta(&self) -> Option<f64> {
        if self.n_heavy > 0 {
            Some(self.d_heavy as f64 / self.n_heavy as f64)
        } else {
            None
        }
    }
}

/// Full trajectory of one slow strip run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripTrace {
    pub k: u32,
    pub n: usize,
    pub m: usize,
    /// `steps[t]` describes the graph before step `t`; `steps[tau]` is final.
    pub steps: Vec<StripStep>,
    /// `strata[i-1]` is `S_i`.
    pub strata: Vec<Vec<u32>>,
    /// `round_starts[i-1] = t(i)`: the step at which round `i` begins.
    pub round_starts: Vec<u64>,
    /// Number of edge removals until the queue emptied.
    pub tau: u64,
    pub rounds: usize,
    pub core: KCore,
    /// Vertices in deletion order, tagged with the step count at deletion.
    pub removal_order: Vec<(u32, u64)>,
    pub round_of: Vec<u32>,
}

/// Sequential stripping: one uniformly random incident hyperedge of the
/// queue head is removed per step. Requires `k >= 2`.
pub fn slow_strip<G: Peelable>(g: &G, k: u32, seed: u64) -> Result<StripTrace, Error> {
    if k < 2 {
        return Err(Error::domain(
            "slow_strip",
            format!("queue semantics need k >= 2, got {k}"),
        ));
    }
    let mut inc = g.incidence();
    let mut rng = rng::from_seed(seed);
    let n = inc.n;

    let mut round_of = vec![0u32; n];
    let mut initial: Vec<u32> = (0..n as u32).filter(|&v| inc.deg[v as usize] < k).collect();
    initial.shuffle(&mut rng);
    let mut queue: VecDeque<u32> = VecDeque::with_capacity(initial.len());
    let mut light = 0u64;
    for &v in &initial {
        round_of[v as usize] = 1;
        light += inc.deg[v as usize] as u64;
        queue.push_back(v);
    }
    let mut heavy_n = (n - initial.len()) as u64;
    let mut heavy_d: u64 = inc.deg.iter().map(|&d| d as u64).sum::<u64>() - light;

    let mut steps = Vec::with_capacity(inc.m + 1);
    steps.push(StripStep {
        l: light,
        n_heavy: heavy_n,
        d_heavy: heavy_d,
    });
    let mut t: u64 = 0;
    let mut round_starts: Vec<u64> = Vec::new();
    let mut seen_round = 0u32;
    let mut removal_order: Vec<(u32, u64)> = Vec::new();

    while let Some(&head) = queue.front() {
        let hv = head as usize;
        let head_round = round_of[hv];
        if head_round > seen_round {
            round_starts.push(t);
            seen_round = head_round;
        }
        if inc.deg[hv] == 0 {
            queue.pop_front();
            removal_order.push((head, t));
            continue;
        }
        let e = inc.sample_live_edge(hv, &mut rng) as usize;
        inc.alive[e] = false;
        inc.edges_alive -= 1;
        for pos in e * inc.r..(e + 1) * inc.r {
            let u = inc.edge_v[pos] as usize;
            let old = inc.deg[u];
            inc.deg[u] = old - 1;
            if old < k {
                // Copy of an already-light vertex (possibly the head itself).
                light -= 1;
            } else if old == k {
                // Heavy bin drops to k-1 and joins the queue.
                heavy_n -= 1;
                heavy_d -= old as u64;
                light += (old - 1) as u64;
                round_of[u] = head_round + 1;
                queue.push_back(u as u32);
            } else {
                heavy_d -= 1;
            }
        }
        t += 1;
        steps.push(StripStep {
            l: light,
            n_heavy: heavy_n,
            d_heavy: heavy_d,
        });
    }

    let rounds = seen_round as usize;
    let core = collect_core(&inc, |v| round_of[v] > 0);
    let strata = strata_from_rounds(&round_of, rounds);
    Ok(StripTrace {
        k,
        n,
        m: inc.m,
        steps,
        strata,
        round_starts,
        tau: t,
        rounds,
        core,
        removal_order,
        round_of,
    })
}

/// Per-round removal statistics.
///
/// An edge removed in round `i` with `a` copies in `S_i` and `b` copies in
/// `S_{i+1}` is an `(a, b)`-edge; `m_ab` counts them. `d_plus[v]` is the
/// degree of `v in S_i` at the start of round `i`; `d_minus[u]` counts the
/// copies of `u in S_{i+1}` removed during round `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundStats {
    pub index: usize,
    pub d_plus: Vec<(u32, u32)>,
    pub d_minus: Vec<(u32, u32)>,
    pub m_ab: BTreeMap<(u8, u8), u64>,
    /// Edges of the round-i hypergraph: each removed edge restricted to
    /// `S_i`, deduplicated per edge, including singletons.
    pub si_edges: Vec<Vec<u32>>,
}

impl RoundStats {
    pub fn sum_d_plus(&self) -> u64 {
        self.d_plus.iter().map(|&(_, d)| d as u64).sum()
    }

    pub fn sum_d_minus(&self) -> u64 {
        self.d_minus.iter().map(|&(_, d)| d as u64).sum()
    }

    pub fn sum_a_weighted(&self) -> u64 {
        self.m_ab.iter().map(|(&(a, _), &c)| a as u64 * c).sum()
    }

    pub fn sum_b_weighted(&self) -> u64 {
        self.m_ab.iter().map(|(&(_, b), &c)| b as u64 * c).sum()
    }

    pub fn sum_ab_weighted(&self) -> u64 {
        self.m_ab
            .iter()
            .map(|(&(a, b), &c)| a as u64 * b as u64 * c)
            .sum()
    }

    /// `sum_{a>=2,b} a b M^{a,b}`: mass of edges with multiple same-round
    /// vertices.
    pub fn sum_ab_weighted_a_ge2(&self) -> u64 {
        self.m_ab
            .iter()
            .filter(|(&(a, _), _)| a >= 2)
            .map(|(&(a, b), &c)| a as u64 * b as u64 * c)
            .sum()
    }
}

/// Parallel strip plus the per-round bookkeeping needed for depth
/// certificates and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundBreakdown {
    pub k: u32,
    pub n: u32,
    pub r: u32,
    pub outcome: StripOutcome,
    pub rounds: Vec<RoundStats>,
    /// Edge ids removed in each round.
    pub round_edges: Vec<Vec<u32>>,
    /// Flat vertex list of every edge of the input graph.
    pub edge_v: Vec<u32>,
}

impl RoundBreakdown {
    pub fn edge(&self, e: usize) -> &[u32] {
        let r = self.r as usize;
        &self.edge_v[e * r..(e + 1) * r]
    }
}

/// Run the parallel process while classifying every removed edge.
///
/// `d_plus` falls out of the classification: every edge of the round-`i`
/// graph incident to `S_i` is removed during round `i`, so the degree of
/// `v in S_i` at the start of its round equals its copy count among that
/// round's removed edges.
pub fn round_stats<G: Peelable>(g: &G, k: u32) -> RoundBreakdown {
    let mut inc = g.incidence();
    let edge_v = inc.edge_v.clone();
    let n = inc.n;
    let r = inc.r;
    let (outcome, round_edges) = parallel_strip_impl(&mut inc, k, true);
    let round_of = &outcome.round_of;

    let mut stats = Vec::with_capacity(outcome.rounds);
    let mut si_buf: Vec<u32> = Vec::with_capacity(r);
    for i in 1..=outcome.rounds {
        let mut dplus: BTreeMap<u32, u32> =
            outcome.strata[i - 1].iter().map(|&v| (v, 0)).collect();
        let mut dminus: BTreeMap<u32, u32> = BTreeMap::new();
        let mut m_ab: BTreeMap<(u8, u8), u64> = BTreeMap::new();
        let mut si_edges = Vec::with_capacity(round_edges[i - 1].len());
        for &e in &round_edges[i - 1] {
            let mut a = 0u8;
            let mut b = 0u8;
            si_buf.clear();
            for &u in &edge_v[e as usize * r..(e as usize + 1) * r] {
                let ru = round_of[u as usize] as usize;
                if ru == i {
                    a += 1;
                    si_buf.push(u);
                    *dplus.entry(u).or_insert(0) += 1;
                } else if ru == i + 1 {
                    b += 1;
                    *dminus.entry(u).or_insert(0) += 1;
                }
            }
            *m_ab.entry((a, b)).or_insert(0) += 1;
            si_buf.sort_unstable();
            si_buf.dedup();
            si_edges.push(si_buf.clone());
        }
        stats.push(RoundStats {
            index: i,
            d_plus: dplus.into_iter().collect(),
            d_minus: dminus.into_iter().collect(),
            m_ab,
            si_edges,
        });
    }

    RoundBreakdown {
        k,
        n: n as u32,
        r: r as u32,
        outcome,
        rounds: stats,
        round_edges,
        edge_v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::SimpleHypergraph;

    fn path3() -> SimpleHypergraph {
        // u1 - v - u2 with v = 1.
        SimpleHypergraph::from_edges(3, 2, &[vec![0, 1], vec![1, 2]]).unwrap()
    }

    fn triangle() -> SimpleHypergraph {
        SimpleHypergraph::from_edges(3, 2, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    #[test]
    fn parallel_on_path() {
        let out = parallel_strip(&path3(), 2);
        assert_eq!(out.rounds, 2);
        assert_eq!(out.strata[0], vec![0, 2]);
        assert_eq!(out.strata[1], vec![1]);
        assert!(out.core.is_empty());
    }

    #[test]
    fn parallel_on_triangle() {
        let out = parallel_strip(&triangle(), 2);
        assert_eq!(out.rounds, 0);
        assert_eq!(out.core.vertices, vec![0, 1, 2]);
        assert_eq!(out.core.edges.len(), 3);
    }

    #[test]
    fn naive_matches_hand_cases() {
        assert_eq!(naive_core(&triangle(), 2).vertices, vec![0, 1, 2]);
        let p4 = SimpleHypergraph::from_edges(4, 2, &[vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert!(naive_core(&p4, 2).is_empty());
    }

    #[test]
    fn slow_strip_on_path() {
        for seed in 0..5 {
            let tr = slow_strip(&path3(), 2, seed).unwrap();
            assert_eq!(tr.tau, 2);
            assert_eq!(tr.rounds, 2);
            assert!(tr.core.is_empty());
            assert_eq!(tr.steps.last().unwrap().l, 0);
        }
    }

    #[test]
    fn slow_strip_on_core_is_trivial() {
        let tr = slow_strip(&triangle(), 2, 1).unwrap();
        assert_eq!(tr.tau, 0);
        assert_eq!(tr.rounds, 0);
        assert!(tr.strata.is_empty());
        assert_eq!(tr.core.vertices.len(), 3);
    }

    #[test]
    fn slow_strip_rejects_small_k() {
        assert!(slow_strip(&triangle(), 1, 0).is_err());
    }

    #[test]
    fn round_stats_on_path() {
        let bd = round_stats(&path3(), 2);
        assert_eq!(bd.outcome.rounds, 2);
        let r1 = &bd.rounds[0];
        // Both edges are (1,1)-edges in round 1, and d^-(v) = 2.
        assert_eq!(r1.m_ab.get(&(1, 1)), Some(&2));
        assert_eq!(r1.d_minus, vec![(1, 2)]);
        assert_eq!(r1.sum_a_weighted(), r1.sum_d_plus());
        assert_eq!(r1.sum_b_weighted(), r1.sum_d_minus());
    }

    #[test]
    fn engines_agree_on_configurations() {
        let cfg = crate::hypergraph::sample_ap(40, 60, 3, 5).unwrap();
        let a = parallel_strip(&cfg, 2);
        let b = naive_core(&cfg, 2);
        let c = slow_strip(&cfg, 2, 77).unwrap();
        assert_eq!(a.core, b);
        assert_eq!(a.core, c.core);
    }

    #[test]
    fn core_idempotence() {
        let g = crate::hypergraph::sample_simple(200, 260, 3, 11).unwrap();
        let out = parallel_strip(&g, 2);
        if !out.core.is_empty() {
            // Re-strip the surviving subgraph: nothing moves.
            let sub: alloc::vec::Vec<alloc::vec::Vec<u32>> = out
                .core
                .edges
                .iter()
                .map(|&e| g.edge(e as usize).to_vec())
                .collect();
            let core_graph = SimpleHypergraph::from_edges(g.n(), g.r(), &sub).unwrap();
            let again = parallel_strip(&core_graph, 2);
            assert_eq!(again.rounds, 0);
            assert_eq!(again.core.edges.len(), out.core.edges.len());
        }
    }
}
