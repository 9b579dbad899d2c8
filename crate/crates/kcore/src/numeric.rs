//! Poisson tail functions and the special functions built from them.
//!
//! Everything here is a pure function of its arguments. The building blocks:
//!
//! * `f_t(mu) = P(Po(mu) >= t)`, exposed as [`poisson_tail`];
//! * `g_k(lambda) = lambda f_{k-1}(lambda) / f_k(lambda)`, the mean of a
//!   Poisson truncated below `k`, strictly increasing with `g_k(0+) = k`;
//! * `lambda_of(k, x)`, the inverse of `g_k`;
//! * `psi(x) = e^{-L} L^{k-1} / (f_{k-1}(L) (k-1)!)` with `L = lambda_of(k, x)`,
//!   strictly decreasing on `x > k`;
//! * `rho_bar(k, mu) = e^{-mu} mu^k / (f_k(mu) k!)`;
//! * `h(mu) = mu / f_{k-1}(mu)^{r-1}`, whose interior minimum defines the
//!   core-emergence threshold.
//!
//! Ratios of tails are evaluated through the series
//! `sigma_t(x) = sum_{j>=0} x^j t! / (t+j)!`, for which
//! `f_t(x) = pmf(t, x) * sigma_t(x)`. All terms are positive, so the forms
//! `g_k = k sigma_{k-1} / sigma_k`, `psi = 1 / sigma_{k-1}` and
//! `rho_bar = 1 / sigma_k` have no cancellation even as `x -> 0`.

use crate::math::{self, Kahan};
use crate::{Error, RealTol};
use alloc::format;

/// Largest `mu` for which `exp(-mu)` and the sigma series stay comfortably
/// inside f64 range; above it we switch to log-space or plain complements.
const LOG_SPACE_MU: f64 = 700.0;
const SIGMA_MU_LIMIT: f64 = 500.0;

/// Poisson point mass `e^{-mu} mu^j / j!`, stable for any `mu >= 0`.
fn poisson_pmf(j: u32, mu: f64) -> f64 {
    if mu == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    if mu <= LOG_SPACE_MU && j <= 170 {
        math::exp(-mu) * math::powu(mu, j) / math::factorial(j)
    } else {
        math::exp(-mu + j as f64 * math::ln(mu) - math::ln_factorial(j))
    }
}

/// `sigma_t(x) = sum_{j>=0} x^j t! / (t+j)!`. Positive terms only.
fn sigma_tail(t: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = 1.0;
    let mut j = 1u64;
    while j <= 200_000 {
        term *= x / (t as f64 + j as f64);
        acc += term;
        if term <= acc * 1e-18 {
            break;
        }
        j += 1;
    }
    acc
}

/// `f_t(mu)` evaluated without cancellation; used by the ratio functions.
fn tail_stable(t: u32, mu: f64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    if mu >= 2.0 * t as f64 + 10.0 {
        // Far right of t the lower sum is small; the complement is exact.
        return 1.0 - lower_sum(t, mu);
    }
    poisson_pmf(t, mu) * sigma_tail(t, mu)
}

/// `sum_{i < t} e^{-mu} mu^i / i!` with compensated summation.
fn lower_sum(t: u32, mu: f64) -> f64 {
    if mu > LOG_SPACE_MU {
        // Accumulate log-terms; the whole sum is far below f64 resolution
        // whenever t << mu, which is the only case that reaches here.
        let lnmu = math::ln(mu);
        let mut max_ln = f64::NEG_INFINITY;
        for i in 0..t {
            let l = -mu + i as f64 * lnmu - math::ln_factorial(i);
            if l > max_ln {
                max_ln = l;
            }
        }
        if max_ln == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..t {
            let l = -mu + i as f64 * lnmu - math::ln_factorial(i);
            acc += math::exp(l - max_ln);
        }
        return math::exp(max_ln) * acc;
    }
    let mut term = math::exp(-mu);
    let mut sum = Kahan::default();
    for i in 0..t {
        if i > 0 {
            term *= mu / i as f64;
        }
        sum.add(term);
    }
    sum.value()
}

/// Upper tail `f_t(mu) = P(Po(mu) >= t)`, via the complementary lower sum.
pub fn poisson_tail(t: u32, mu: f64) -> Result<f64, Error> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::domain("poisson_tail", format!("mu must be finite and >= 0, got {mu}")));
    }
    if t == 0 {
        return Ok(1.0);
    }
    Ok((1.0 - lower_sum(t, mu)).clamp(0.0, 1.0))
}

/// `h(mu) = mu / f_{k-1}(mu)^{r-1}` for `r >= 2`, `k >= 1`.
pub fn h_density(r: u32, k: u32, mu: f64) -> Result<f64, Error> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain("h_density", format!("mu must be positive, got {mu}")));
    }
    if r < 2 || k < 1 {
        return Err(Error::domain("h_density", format!("need r >= 2, k >= 1, got ({r}, {k})")));
    }
    let f = tail_stable(k - 1, mu);
    let denom = math::powu(f, r - 1);
    if denom == 0.0 {
        return Err(Error::Underflow {
            op: "h_density",
            what: "f_{k-1}(mu)^{r-1} underflowed to zero",
        });
    }
    Ok(mu / denom)
}

/// Mean of a Poisson(lambda) conditioned on being at least `k`.
///
/// Errors on `lambda <= 0`; use [`g_k_with_zero_limit`] to get the removable
/// limit `g_k(0) = k`.
pub fn g_k(k: u32, lambda: f64) -> Result<f64, Error> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain("g_k", format!("lambda must be positive, got {lambda}")));
    }
    Ok(g_k_unchecked(k, lambda))
}

/// Like [`g_k`] but maps `lambda == 0` to the limit value `k`.
pub fn g_k_with_zero_limit(k: u32, lambda: f64) -> Result<f64, Error> {
    if lambda == 0.0 {
        return Ok(k as f64);
    }
    g_k(k, lambda)
}

fn g_k_unchecked(k: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return k as f64;
    }
    if k == 0 {
        // Unconditioned mean.
        return lambda;
    }
    if lambda < SIGMA_MU_LIMIT {
        k as f64 * sigma_tail(k - 1, lambda) / sigma_tail(k, lambda)
    } else {
        lambda * tail_stable(k - 1, lambda) / tail_stable(k, lambda)
    }
}

/// Inverse of `g_k`: the unique `lambda > 0` with `g_k(lambda) = x`, `x > k`.
pub fn lambda_of(k: u32, x: f64, tol: &RealTol) -> Result<f64, Error> {
    tol.validate("lambda_of")?;
    if !(x > k as f64) || !x.is_finite() {
        return Err(Error::domain("lambda_of", format!("need x > k = {k}, got x = {x}")));
    }
    let mut lo = 1e-12;
    if g_k_unchecked(k, lo) >= x {
        lo = 0.0;
    }
    let mut hi = if 4.0 * x > 4.0 * k as f64 { 4.0 * x } else { 4.0 * k as f64 };
    let mut guard = 0;
    while g_k_unchecked(k, hi) <= x {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::BracketFailure {
                op: "lambda_of",
                what: "upper bracket for g_k never exceeded x",
            });
        }
    }
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        let g = g_k_unchecked(k, mid);
        if math::abs(g - x) <= tol.abs_tol {
            return Ok(mid);
        }
        if g < x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + hi) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NonConvergence {
        op: "lambda_of",
        iters: tol.max_iter,
    })
}

/// `psi(x)`: probability that a uniformly chosen heavy copy sits in a bin of
/// size exactly `k`, when the heavy average degree is `x > k`.
pub fn psi(k: u32, x: f64, tol: &RealTol) -> Result<f64, Error> {
    if k < 1 {
        return Err(Error::domain("psi", "need k >= 1"));
    }
    let lambda = lambda_of(k, x, tol)?;
    if lambda < SIGMA_MU_LIMIT {
        Ok(1.0 / sigma_tail(k - 1, lambda))
    } else {
        Ok(poisson_pmf(k - 1, lambda) / tail_stable(k - 1, lambda))
    }
}

/// `rho_bar(k, mu) = e^{-mu} mu^k / (f_k(mu) k!)`: the proportion of mass a
/// k-truncated Poisson(mu) puts on exactly `k`.
pub fn rho_bar(k: u32, mu: f64) -> Result<f64, Error> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain("rho_bar", format!("mu must be positive, got {mu}")));
    }
    if mu < SIGMA_MU_LIMIT {
        Ok(1.0 / sigma_tail(k, mu))
    } else {
        Ok(poisson_pmf(k, mu) / tail_stable(k, mu))
    }
}

/// Central five-point second derivative of `f` at `x` with step `s`.
pub fn second_derivative_5pt<F>(f: F, x: f64, s: f64) -> Result<f64, Error>
where
    F: Fn(f64) -> Result<f64, Error>,
{
    if !(s > 0.0) {
        return Err(Error::domain("second_derivative_5pt", "step must be positive"));
    }
    let fm2 = f(x - 2.0 * s)?;
    let fm1 = f(x - s)?;
    let f0 = f(x)?;
    let fp1 = f(x + s)?;
    let fp2 = f(x + 2.0 * s)?;
    Ok((-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * s * s))
}

/// Finite-difference `h''(mu)`; `step` must lie in `(0, mu/10]`.
pub fn h_second_derivative(r: u32, k: u32, mu: f64, step: f64) -> Result<f64, Error> {
    if !(mu > 0.0) {
        return Err(Error::domain("h_second_derivative", format!("mu must be positive, got {mu}")));
    }
    if !(step > 0.0 && step <= mu / 10.0) {
        return Err(Error::domain(
            "h_second_derivative",
            format!("step must lie in (0, mu/10], got {step} for mu = {mu}"),
        ));
    }
    second_derivative_5pt(|x| h_density(r, k, x), mu, step)
}

/// Richardson-extrapolated `h''(mu)` from steps 1e-3 and 5e-4.
pub fn h_second_derivative_refined(r: u32, k: u32, mu: f64) -> Result<f64, Error> {
    let d1 = h_second_derivative(r, k, mu, 1e-3)?;
    let d2 = h_second_derivative(r, k, mu, 5e-4)?;
    Ok((16.0 * d2 - d1) / 15.0)
}

pub(crate) fn tail_value(t: u32, mu: f64) -> f64 {
    tail_stable(t, mu)
}

pub(crate) fn pmf_value(j: u32, mu: f64) -> f64 {
    poisson_pmf(j, mu)
}

pub(crate) fn sigma_value(t: u32, x: f64) -> f64 {
    sigma_tail(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn tail_empty_truncation_is_one() {
        assert_eq!(poisson_tail(0, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn tail_closed_forms() {
        // 1 - e^-1 and 1 - 2e^-1, from the closed forms.
        let f1 = poisson_tail(1, 1.0).unwrap();
        let f2 = poisson_tail(2, 1.0).unwrap();
        assert!((f1 - 0.63212055882855768).abs() < 1e-15);
        assert!((f2 - 0.26424111765711536).abs() < 1e-15);
    }

    #[test]
    fn tail_rejects_negative_mu() {
        assert!(poisson_tail(1, -0.5).is_err());
    }

    #[test]
    fn tail_log_space_branch() {
        // Far above the log-space cutoff the tail is indistinguishable from 1.
        assert_eq!(poisson_tail(3, 800.0).unwrap(), 1.0);
        // And a lower tail that genuinely matters: t near mu.
        let v = poisson_tail(800, 800.0).unwrap();
        assert!(v > 0.4 && v < 0.6, "{v}");
    }

    #[test]
    fn stable_tail_matches_complement() {
        for t in 1..10u32 {
            for &mu in &[0.3, 1.0, 2.5, 7.0, 20.0, 60.0] {
                let a = tail_stable(t, mu);
                let b = poisson_tail(t, mu).unwrap();
                assert!((a - b).abs() <= 1e-13 * (1.0 + b), "t={t} mu={mu}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn h_closed_forms() {
        let h22 = h_density(2, 2, 1.0).unwrap();
        assert!((h22 - 1.5819767068693264).abs() < 1e-14);
        let h32 = h_density(3, 2, 1.0).unwrap();
        assert!((h32 - 2.5026503010771187).abs() < 1e-14);
        // f_0 == 1, so h is the identity for k = 1.
        assert_eq!(h_density(4, 1, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn h_domain_errors() {
        assert!(h_density(2, 2, 0.0).is_err());
        assert!(h_density(2, 2, -1.0).is_err());
    }

    #[test]
    fn g_closed_form_and_limit() {
        let g = g_k(2, 1.0).unwrap();
        assert!((g - 2.3922111911773328).abs() < 1e-13);
        // Removable limit only behind the explicit variant.
        assert!(g_k(2, 0.0).is_err());
        assert_eq!(g_k_with_zero_limit(2, 0.0).unwrap(), 2.0);
        // g_k(0+) = k + O(lambda).
        let near = g_k(2, 1e-9).unwrap();
        assert!((near - 2.0).abs() < 1e-8);
    }

    #[test]
    fn g_is_increasing_in_lambda() {
        let a = g_k(3, 5.0).unwrap();
        let b = g_k(3, 10.0).unwrap();
        assert!(b > a && a > 3.0);
    }

    #[test]
    fn lambda_of_round_trip() {
        let tol = RealTol::default();
        let l = lambda_of(2, 2.3922111911773328, &tol).unwrap();
        assert!((l - 1.0).abs() < 1e-9, "{l}");
        // Tiny excess over the limit still brackets.
        let x = 2.0 + 1e-9;
        let l = lambda_of(2, x, &tol).unwrap();
        assert!(l > 0.0);
        let g = g_k(2, l).unwrap();
        assert!((g - x).abs() <= 10.0 * tol.abs_tol);
        // Boundary excluded.
        assert!(lambda_of(3, 3.0, &tol).is_err());
    }

    #[test]
    fn psi_is_decreasing() {
        let tol = RealTol::default();
        let a = psi(2, 2.5, &tol).unwrap();
        let b = psi(2, 3.5, &tol).unwrap();
        assert!(a > b, "{a} vs {b}");
        assert!(a < 1.0 && b > 0.0);
    }

    #[test]
    fn rho_bar_values() {
        let v = rho_bar(2, 1.0).unwrap();
        assert!((v - 0.69610559558866641).abs() < 1e-13, "{v}");
        // Tail dominance kills the degree-k share as mu grows.
        assert!(rho_bar(2, 600.0).unwrap() < 1e-100);
        assert!(rho_bar(2, 0.0).is_err());
    }

    #[test]
    fn five_point_on_quadratic() {
        let d = second_derivative_5pt(|x| Ok(x * x), 3.0, 1e-3).unwrap();
        assert!((d - 2.0).abs() < 1e-8);
    }

    #[test]
    fn h2_stability_across_steps() {
        // mu_{2,3} from the threshold solver's oracle value.
        let mu = 1.793282132900761;
        let a = h_second_derivative(2, 3, mu, 1e-3).unwrap();
        let b = h_second_derivative(2, 3, mu, 1e-4).unwrap();
        assert!(a > 0.0 && b > 0.0);
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        let c = h_second_derivative(3, 2, 1.2564312086261697, 1e-3).unwrap();
        assert!(c > 0.0);
    }

    #[test]
    fn e_inv_sanity() {
        assert!((math::exp(-1.0) - E_INV).abs() < 1e-16);
    }
}
