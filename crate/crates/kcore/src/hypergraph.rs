//! Random hypergraph models and degree-sequence samplers.
//!
//! Three objects are sampled here, all deterministically from a 64-bit seed:
//!
//! * [`sample_simple`] — a uniform simple r-uniform hypergraph with exactly
//!   `m` distinct edges (repeated r-subset draws with duplicate rejection);
//! * [`sample_ap`] — the allocation-partition configuration model: `r*m`
//!   vertex-copies, a uniform partition into r-tuples and an independent
//!   uniform allocation of copies into `n` bins;
//! * [`sample_truncated_multinomial`] — a degree vector distributed as a
//!   multinomial allocation of `D` copies into `N` bins conditioned on every
//!   bin getting at least `k`, realized as i.i.d. k-truncated Poisson draws
//!   rejected until they sum to `D` (both laws weight a vector by
//!   `prod 1/d_i!`, so the conditional draw is exact).

use crate::numeric;
use crate::rng::{self, StripRng};
use crate::{Error, RealTol};
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

/// Simple r-uniform hypergraph: `m` distinct r-subsets of `{0..n-1}`.
///
/// Edges are stored flat, each sorted ascending; the edge list preserves the
/// order of construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleHypergraph {
    n: u32,
    r: u32,
    edge_v: Vec<u32>,
}

impl SimpleHypergraph {
    /// Build from explicit edges, validating arity, vertex range,
    /// distinctness within edges, and distinctness of edges.
    pub fn from_edges(n: u32, r: u32, edges: &[Vec<u32>]) -> Result<Self, Error> {
        let mut flat = Vec::with_capacity(edges.len() * r as usize);
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        for (i, e) in edges.iter().enumerate() {
            if e.len() != r as usize {
                return Err(Error::Infeasible {
                    what: format!("edge {i} has {} vertices, expected r = {r}", e.len()),
                });
            }
            let mut s = e.clone();
            s.sort_unstable();
            if s.iter().any(|&v| v >= n) {
                return Err(Error::Infeasible {
                    what: format!("edge {i} references a vertex >= n = {n}"),
                });
            }
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Infeasible {
                    what: format!("edge {i} repeats a vertex"),
                });
            }
            if !seen.insert(s.clone()) {
                return Err(Error::Infeasible {
                    what: format!("edge {i} duplicates an earlier edge"),
                });
            }
            flat.extend_from_slice(&s);
        }
        Ok(SimpleHypergraph { n, r, edge_v: flat })
    }

    pub(crate) fn from_sorted_flat(n: u32, r: u32, edge_v: Vec<u32>) -> Self {
        SimpleHypergraph { n, r, edge_v }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.edge_v.len() / self.r as usize
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        let r = self.r as usize;
        &self.edge_v[i * r..(i + 1) * r]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> {
        self.edge_v.chunks_exact(self.r as usize)
    }

    pub(crate) fn flat(&self) -> &[u32] {
        &self.edge_v
    }
}

/// Allocation-partition configuration: `r*m` copies partitioned into `m`
/// r-tuples, each copy allocated to one of `n` bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    n: u32,
    r: u32,
    m: usize,
    /// Permutation of copy ids `0..r*m`; part `i` is the slice `[r*i, r*i+r)`.
    parts: Vec<u32>,
    /// `allocation[copy] = bin`.
    allocation: Vec<u32>,
}

impl Configuration {
    pub fn new(n: u32, r: u32, parts: Vec<u32>, allocation: Vec<u32>) -> Result<Self, Error> {
        if r == 0 || n == 0 {
            return Err(Error::Infeasible {
                what: "need n >= 1 and r >= 1".into(),
            });
        }
        if parts.len() != allocation.len() || parts.len() % r as usize != 0 {
            return Err(Error::Infeasible {
                what: "parts/allocation lengths must match and be a multiple of r".into(),
            });
        }
        let rm = parts.len();
        let mut seen = vec![false; rm];
        for &c in &parts {
            if c as usize >= rm || seen[c as usize] {
                return Err(Error::Infeasible {
                    what: "parts must be a permutation of the copy ids".into(),
                });
            }
            seen[c as usize] = true;
        }
        if allocation.iter().any(|&b| b >= n) {
            return Err(Error::Infeasible {
                what: "allocation references a bin >= n".into(),
            });
        }
        Ok(Configuration {
            n,
            r,
            m: rm / r as usize,
            parts,
            allocation,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Copy ids of part `i`.
    pub fn part(&self, i: usize) -> &[u32] {
        let r = self.r as usize;
        &self.parts[i * r..(i + 1) * r]
    }

    pub fn parts_flat(&self) -> &[u32] {
        &self.parts
    }

    pub fn allocation(&self) -> &[u32] {
        &self.allocation
    }

    /// Bins of part `i`, with multiplicity.
    pub fn part_bins(&self, i: usize) -> impl Iterator<Item = u32> + '_ {
        self.part(i).iter().map(move |&c| self.allocation[c as usize])
    }

    /// Bin sizes (= degrees counted with multiplicity).
    pub fn bin_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0u32; self.n as usize];
        for &b in &self.allocation {
            sizes[b as usize] += 1;
        }
        sizes
    }
}

/// Why a configuration failed to project to a simple hypergraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotSimple {
    /// Some part has two copies in one bin.
    RepeatedVertex { part: usize },
    /// Two parts induce the same vertex set.
    DuplicateEdge { part: usize },
}

/// Heavy degree sequence: `bins` entries, all >= `k`, summing to `copies`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeavyDegreeSeq {
    pub bins: u32,
    pub copies: u64,
    pub k: u32,
    pub degrees: Vec<u32>,
}

/// `C(n, r)` saturating at `u128::MAX`.
pub fn binomial(n: u64, r: u32) -> u128 {
    if (r as u64) > n {
        return 0;
    }
    let r = r.min((n - r as u64) as u32);
    let mut acc: u128 = 1;
    for i in 0..r as u64 {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Rejection sampling stays cheap as long as the edge space is either small
/// enough to coupon-collect or at most half full.
const DENSITY_GUARD_SPACE: u128 = 2_000_000;

/// Uniform simple hypergraph with exactly `m` distinct edges.
pub fn sample_simple(n: u32, m: usize, r: u32, seed: u64) -> Result<SimpleHypergraph, Error> {
    let mut rng = rng::from_seed(seed);
    sample_simple_with(n, m, r, &mut rng)
}

fn sample_simple_with(n: u32, m: usize, r: u32, rng: &mut StripRng) -> Result<SimpleHypergraph, Error> {
    if r == 0 || r > n {
        return Err(Error::Infeasible {
            what: format!("need 1 <= r <= n, got r = {r}, n = {n}"),
        });
    }
    if r > 16 {
        return Err(Error::Infeasible {
            what: format!("arity r = {r} exceeds the supported maximum of 16"),
        });
    }
    let choices = binomial(n as u64, r);
    if (m as u128) > choices {
        return Err(Error::Infeasible {
            what: format!("m = {m} exceeds C({n}, {r}) = {choices}"),
        });
    }
    if choices > DENSITY_GUARD_SPACE && (m as u128) * 2 > choices {
        return Err(Error::DensityTooHigh {
            m: m as u64,
            choices,
        });
    }

    let r_us = r as usize;
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut flat = Vec::with_capacity(m * r_us);
    let mut buf = [0u32; 16];
    while seen.len() < m {
        // Sequential distinct draws give a uniform r-subset.
        let mut filled = 0;
        while filled < r_us {
            let v = rng.random_range(0..n);
            if !buf[..filled].contains(&v) {
                buf[filled] = v;
                filled += 1;
            }
        }
        buf[..r_us].sort_unstable();
        if seen.contains(&buf[..r_us]) {
            continue;
        }
        seen.insert(buf[..r_us].to_vec());
        flat.extend_from_slice(&buf[..r_us]);
    }
    Ok(SimpleHypergraph::from_sorted_flat(n, r, flat))
}

/// Uniform configuration from the allocation-partition model.
pub fn sample_ap(n: u32, m: usize, r: u32, seed: u64) -> Result<Configuration, Error> {
    let mut rng = rng::from_seed(seed);
    sample_ap_with(n, m, r, &mut rng)
}

fn sample_ap_with(n: u32, m: usize, r: u32, rng: &mut StripRng) -> Result<Configuration, Error> {
    if n == 0 || m == 0 || r == 0 {
        return Err(Error::Infeasible {
            what: format!("need n, m, r >= 1, got n = {n}, m = {m}, r = {r}"),
        });
    }
    let rm = (r as usize)
        .checked_mul(m)
        .filter(|&x| x < u32::MAX as usize)
        .ok_or_else(|| Error::Infeasible {
            what: format!("r*m = {r}*{m} overflows the copy-id space"),
        })?;
    let mut parts: Vec<u32> = (0..rm as u32).collect();
    parts.shuffle(rng);
    let allocation: Vec<u32> = (0..rm).map(|_| rng.random_range(0..n)).collect();
    Configuration::new(n, r, parts, allocation)
}

/// Contract bins to vertices and parts to edges, checking simplicity.
///
/// Parts are scanned in order; the first violation is reported.
pub fn project_and_check(cfg: &Configuration) -> Result<SimpleHypergraph, NotSimple> {
    let r = cfg.r as usize;
    let mut flat = Vec::with_capacity(cfg.m * r);
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut buf = vec![0u32; r];
    for i in 0..cfg.m {
        for (slot, b) in buf.iter_mut().zip(cfg.part_bins(i)) {
            *slot = b;
        }
        buf.sort_unstable();
        if buf.windows(2).any(|w| w[0] == w[1]) {
            return Err(NotSimple::RepeatedVertex { part: i });
        }
        if !seen.insert(buf.clone()) {
            return Err(NotSimple::DuplicateEdge { part: i });
        }
        flat.extend_from_slice(&buf);
    }
    Ok(SimpleHypergraph::from_sorted_flat(cfg.n, cfg.r, flat))
}

/// Resample configurations until the projection is simple.
///
/// Returns the hypergraph and the number of attempts used. The acceptance
/// probability is roughly `exp(-m r (r-1) / 2n)` at moderate densities, so
/// budget accordingly.
pub fn sample_simple_via_ap(
    n: u32,
    m: usize,
    r: u32,
    seed: u64,
    max_attempts: u64,
) -> Result<(SimpleHypergraph, u64), Error> {
    let mut rng = rng::from_seed(seed);
    for attempt in 1..=max_attempts {
        let cfg = sample_ap_with(n, m, r, &mut rng)?;
        if let Ok(g) = project_and_check(&cfg) {
            return Ok((g, attempt));
        }
    }
    Err(Error::RejectionBudget {
        op: "sample_simple_via_ap",
        attempts: max_attempts,
    })
}

/// Exact inversion sampler for a Poisson(lambda) conditioned on `>= k`.
pub struct TruncatedPoisson {
    k: u32,
    lambda: f64,
    /// Unnormalized tail weight `sum_{j>=k} lambda^j/j!` relative to the
    /// weight of `k` itself, i.e. `sigma_k(lambda)`.
    total_over_wk: f64,
    /// Mode-centered start for large lambda.
    start: u32,
    start_offset: f64,
}

impl TruncatedPoisson {
    pub fn new(k: u32, lambda: f64) -> Result<Self, Error> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(
                "truncated_poisson",
                format!("lambda must be positive, got {lambda}"),
            ));
        }
        if lambda <= 30.0 {
            Ok(TruncatedPoisson {
                k,
                lambda,
                total_over_wk: numeric::sigma_value(k, lambda),
                start: k,
                start_offset: 0.0,
            })
        } else {
            // Walk from the mode; weights relative to w_M.
            let mode = (lambda as u32).max(k);
            let mut below = 0.0; // sum over j in [k, mode)
            let mut term = 1.0;
            let mut j = mode;
            while j > k {
                term *= j as f64 / lambda;
                below += term;
                j -= 1;
            }
            let above = numeric::sigma_value(mode, lambda); // includes w_mode
            Ok(TruncatedPoisson {
                k,
                lambda,
                total_over_wk: below + above,
                start: mode,
                start_offset: below,
            })
        }
    }

    /// Draw one value by inversion of the truncated pmf.
    pub fn sample(&self, rng: &mut StripRng) -> u32 {
        let u: f64 = rng.random();
        let target = u * self.total_over_wk;
        if self.start == self.k {
            // Linear walk up from k; weights relative to w_k.
            let mut j = self.k;
            let mut term = 1.0;
            let mut acc = 1.0;
            while acc < target {
                j += 1;
                term *= self.lambda / j as f64;
                acc += term;
                if term == 0.0 {
                    break;
                }
            }
            j
        } else {
            // Down from the mode first, then up.
            if target < self.start_offset {
                let mut j = self.start;
                let mut term = 1.0;
                let mut acc = 0.0;
                while j > self.k {
                    term *= j as f64 / self.lambda;
                    acc += term;
                    j -= 1;
                    if acc >= self.start_offset - target {
                        break;
                    }
                }
                j
            } else {
                let want = target - self.start_offset;
                let mut j = self.start;
                let mut term = 1.0;
                let mut acc = 1.0;
                while acc < want {
                    j += 1;
                    term *= self.lambda / j as f64;
                    acc += term;
                    if term == 0.0 {
                        break;
                    }
                }
                j
            }
        }
    }
}

pub const MULTINOMIAL_ATTEMPT_CAP: u64 = 1_000_000;

/// Degree vector of `bins` entries `>= k` summing to `copies`, distributed
/// as the conditioned multinomial.
pub fn sample_truncated_multinomial(
    bins: u32,
    copies: u64,
    k: u32,
    seed: u64,
) -> Result<HeavyDegreeSeq, Error> {
    sample_truncated_multinomial_capped(bins, copies, k, seed, MULTINOMIAL_ATTEMPT_CAP)
}

pub fn sample_truncated_multinomial_capped(
    bins: u32,
    copies: u64,
    k: u32,
    seed: u64,
    attempt_cap: u64,
) -> Result<HeavyDegreeSeq, Error> {
    if bins == 0 {
        return Err(Error::Infeasible {
            what: "need at least one bin".into(),
        });
    }
    let floor_total = k as u64 * bins as u64;
    if copies < floor_total {
        return Err(Error::Infeasible {
            what: format!("copies = {copies} is below the floor k*N = {floor_total}"),
        });
    }
    if copies == floor_total {
        return Ok(HeavyDegreeSeq {
            bins,
            copies,
            k,
            degrees: vec![k; bins as usize],
        });
    }

    let mean = copies as f64 / bins as f64;
    let lambda = numeric::lambda_of(k, mean, &RealTol::default())?;
    let sampler = TruncatedPoisson::new(k, lambda)?;
    let mut rng = rng::from_seed(seed);
    let mut degrees = vec![0u32; bins as usize];
    for attempt in 1..=attempt_cap {
        let mut sum: u64 = 0;
        let mut overshoot = false;
        for d in degrees.iter_mut() {
            let x = sampler.sample(&mut rng);
            *d = x;
            sum += x as u64;
            if sum > copies {
                overshoot = true;
                break;
            }
        }
        if !overshoot && sum == copies {
            let _ = attempt;
            return Ok(HeavyDegreeSeq {
                bins,
                copies,
                k,
                degrees,
            });
        }
    }
    Err(Error::RejectionBudget {
        op: "sample_truncated_multinomial",
        attempts: attempt_cap,
    })
}

/// Truncated Poisson pmf used as the reference law for the sampler's
/// marginals: `e^{-lambda} lambda^j / (f_k(lambda) j!)` for `j >= k`.
pub fn truncated_poisson_pmf(k: u32, lambda: f64, j: u32) -> Result<f64, Error> {
    if j < k {
        return Ok(0.0);
    }
    if !(lambda > 0.0) {
        return Err(Error::domain("truncated_poisson_pmf", "lambda must be positive"));
    }
    Ok(numeric::pmf_value(j, lambda) / numeric::tail_value(k, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_forced() {
        let g = sample_simple(5, 10, 2, 123).unwrap();
        assert_eq!(g.m(), 10);
        let set: BTreeSet<Vec<u32>> = g.edges().map(|e| e.to_vec()).collect();
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_simple(10_000, 10_000, 3, 1).unwrap();
        let b = sample_simple(10_000, 10_000, 3, 1).unwrap();
        assert_eq!(a, b);
        let c = sample_ap(1000, 1500, 3, 9).unwrap();
        let d = sample_ap(1000, 1500, 3, 9).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn infeasible_m_rejected() {
        assert!(sample_simple(5, 11, 2, 0).is_err());
        assert!(matches!(
            sample_simple(4000, 4_000_000, 2, 0),
            Err(Error::DensityTooHigh { .. })
        ));
    }

    #[test]
    fn ap_accounting() {
        let cfg = sample_ap(3, 1, 2, 5).unwrap();
        assert_eq!(cfg.part(0).len(), 2);
        assert_eq!(cfg.bin_sizes().iter().sum::<u32>(), 2);
        let big = sample_ap(100, 150, 3, 5).unwrap();
        assert_eq!(big.bin_sizes().iter().sum::<u32>(), 450);
    }

    #[test]
    fn projection_detects_violations() {
        // One part, both copies in distinct bins: simple with one edge.
        let cfg = Configuration::new(3, 2, vec![0, 1], vec![0, 2]).unwrap();
        let g = project_and_check(&cfg).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.edge(0), &[0, 2]);
        // Both copies in the same bin: repeated vertex.
        let cfg = Configuration::new(3, 2, vec![0, 1], vec![1, 1]).unwrap();
        assert_eq!(
            project_and_check(&cfg).unwrap_err(),
            NotSimple::RepeatedVertex { part: 0 }
        );
        // Two identical edges.
        let cfg = Configuration::new(3, 2, vec![0, 1, 2, 3], vec![0, 1, 1, 0]).unwrap();
        assert_eq!(
            project_and_check(&cfg).unwrap_err(),
            NotSimple::DuplicateEdge { part: 1 }
        );
    }

    #[test]
    fn truncated_multinomial_invariants() {
        let seq = sample_truncated_multinomial(50, 160, 2, 77).unwrap();
        assert_eq!(seq.degrees.len(), 50);
        assert_eq!(seq.degrees.iter().map(|&d| d as u64).sum::<u64>(), 160);
        assert!(seq.degrees.iter().all(|&d| d >= 2));
        // Boundary: the all-k vector is forced.
        let seq = sample_truncated_multinomial(4, 8, 2, 0).unwrap();
        assert_eq!(seq.degrees, vec![2, 2, 2, 2]);
        assert!(sample_truncated_multinomial(4, 7, 2, 0).is_err());
    }

    #[test]
    fn truncated_poisson_marginal_matches_pmf() {
        let sampler = TruncatedPoisson::new(2, 1.3).unwrap();
        let mut rng = rng::from_seed(3);
        let n = 200_000;
        let mut counts = [0u64; 12];
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            if (x as usize) < counts.len() {
                counts[x as usize] += 1;
            }
        }
        for j in 2..8u32 {
            let p = truncated_poisson_pmf(2, 1.3, j).unwrap();
            let obs = counts[j as usize] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (obs - p).abs() < 5.0 * sigma + 1e-4,
                "j={j}: obs {obs} vs pmf {p}"
            );
        }
    }

    #[test]
    fn mode_centered_inversion_large_lambda() {
        let sampler = TruncatedPoisson::new(2, 80.0).unwrap();
        let mut rng = rng::from_seed(4);
        let n = 50_000;
        let mut sum = 0u64;
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            assert!(x >= 2);
            sum += x as u64;
        }
        let mean = sum as f64 / n as f64;
        // g_2(80) is 80 up to an exponentially small correction.
        assert!((mean - 80.0).abs() < 0.5, "{mean}");
    }

    #[test]
    fn ap_simple_fraction_near_prediction() {
        // exp(-m r(r-1) / 2n) = e^{-4.5} ~ 0.011 for these sizes.
        let mut simple = 0u32;
        let trials = 4000;
        for seed in 0..trials {
            let cfg = sample_ap(100, 150, 3, seed as u64).unwrap();
            if project_and_check(&cfg).is_ok() {
                simple += 1;
            }
        }
        let frac = simple as f64 / trials as f64;
        assert!(frac > 0.005 && frac < 0.02, "{frac}");
    }

    #[test]
    fn ap_rejection_resampling_terminates() {
        // Acceptance ~ e^{-3} ~ 0.05 at n = m = 1000, r = 3.
        let mut total_attempts = 0u64;
        for seed in 0..30u64 {
            let (_, attempts) = sample_simple_via_ap(1000, 1000, 3, seed, 10_000).unwrap();
            total_attempts += attempts;
        }
        let mean = total_attempts as f64 / 30.0;
        assert!(mean > 5.0 && mean < 60.0, "{mean}");
    }
}
