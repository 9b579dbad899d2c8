//! Critical and supercritical solutions of the core-emergence system.
//!
//! The density `h(mu) = mu / f_{k-1}(mu)^{r-1}` diverges at both ends of
//! `(0, inf)` whenever `(r, k) != (2, 2)` and has a unique interior minimum
//! `mu_rk`. The edges-per-vertex threshold is `c_rk = h(mu_rk) / r`; the
//! limiting core fractions are `alpha = f_k(mu_rk)` (vertices) and
//! `beta = mu_rk f_{k-1}(mu_rk) / r` (edges). Above the threshold the same
//! equation `h(mu) = r c` has a larger root `mu(c)`, which plays the role of
//! `mu_rk` for the surviving core.

use crate::math;
use crate::numeric;
use crate::{Error, ParamsRK, RealTol};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

/// Residual threshold for the identity report. The functions involved are
/// smooth and the solver polishes to near machine precision, so 1e-8 has a
/// wide margin.
pub const IDENTITY_THRESHOLD: f64 = 1e-8;

/// Solved critical point for one `(r, k)` pair.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CriticalPoint {
    pub params: ParamsRK,
    /// Interior minimizer of `h`.
    pub mu_rk: f64,
    /// Edges-per-vertex threshold `h(mu_rk) / r`.
    pub c_rk: f64,
    /// Limiting core vertex fraction `f_k(mu_rk)`.
    pub alpha: f64,
    /// Limiting core edge fraction `mu_rk f_{k-1}(mu_rk) / r`.
    pub beta: f64,
    /// Core average degree `r beta / alpha = g_k(mu_rk)`.
    pub zeta: f64,
    /// `psi(zeta) = 1 / ((r-1)(k-1))`.
    pub p_star: f64,
    /// Degree-k share of core vertices.
    pub rho_bar: f64,
    /// Leading constant of `mu(c) - mu_rk ~ k1 sqrt(c - c_rk)`.
    pub k1: f64,
}

/// Core-size prediction above the threshold.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SupercriticalPoint {
    pub params: ParamsRK,
    pub c: f64,
    /// Larger root of `h(mu) = r c`.
    pub mu_c: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
}

impl SupercriticalPoint {
    /// Predicted core vertex count `alpha(c) * n`.
    pub fn predicted_core_vertices(&self, n: u64) -> f64 {
        self.alpha_c * n as f64
    }

    /// Predicted core edge count `beta(c) * n`.
    pub fn predicted_core_edges(&self, n: u64) -> f64 {
        self.beta_c * n as f64
    }
}

/// One named identity check: residual and verdict at [`IDENTITY_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IdentityCheck {
    pub residual: f64,
    pub pass: bool,
}

/// Residual report for the closed-form identities at a critical point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IdentityReport {
    pub threshold: f64,
    pub checks: BTreeMap<String, IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.values().fold(0.0, |m, c| m.max(c.residual))
    }

    fn push(&mut self, name: &str, residual: f64) {
        self.checks.insert(
            String::from(name),
            IdentityCheck {
                residual,
                pass: residual <= self.threshold,
            },
        );
    }
}

/// Stationarity function of `h`: `h'(mu) = 0` iff `phi(mu) = 0`, where
/// `phi(mu) = mu (r-1) pmf(k-2, mu) - f_{k-1}(mu)`. Positive left of the
/// minimum, negative right of it.
fn stationarity(r: u32, k: u32, mu: f64) -> f64 {
    mu * (r - 1) as f64 * numeric::pmf_value(k - 2, mu) - numeric::tail_value(k - 1, mu)
}

/// Locate the interior minimizer of `h` for valid `(r, k)`.
///
/// Golden-section search brackets the minimum (verifying unimodality at the
/// bracket ends); a bisection on the closed-form stationarity equation then
/// polishes the result to near machine precision.
fn minimize_h(p: ParamsRK, tol: &RealTol) -> Result<f64, Error> {
    let (r, k) = (p.r(), p.k());
    let h = |mu: f64| numeric::h_density(r, k, mu);
    let a0 = 1e-6;
    let mut b0 = 10.0 * (r * k) as f64;
    let mut guard = 0;
    while h(b0)? < h(0.5 * (a0 + b0))? {
        b0 *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::BracketFailure {
                op: "solve_critical",
                what: "h kept decreasing; no interior minimum found",
            });
        }
    }

    let inv_phi = 0.5 * (math::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (a0, b0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = h(c)?;
    let mut fd = h(d)?;
    for _ in 0..tol.max_iter {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d)?;
        }
        if b - a <= 1e-9 * (1.0 + b) {
            break;
        }
    }
    let rough = 0.5 * (a + b);
    if !(h(a0)? > h(rough)? && h(b0)? > h(rough)?) {
        return Err(Error::BracketFailure {
            op: "solve_critical",
            what: "bracket ends do not dominate the interior minimum",
        });
    }

    // Polish on the stationarity equation; its root is the minimizer.
    let mut w = 1e-4 * (1.0 + rough);
    let (mut lo, mut hi);
    loop {
        lo = (rough - w).max(a0 * 0.5);
        hi = rough + w;
        if stationarity(r, k, lo) > 0.0 && stationarity(r, k, hi) < 0.0 {
            break;
        }
        w *= 4.0;
        if w > b0 {
            return Err(Error::BracketFailure {
                op: "solve_critical",
                what: "stationarity equation could not be bracketed",
            });
        }
    }
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        if stationarity(r, k, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve the critical system at `(r, k)`.
pub fn solve_critical(p: ParamsRK, tol: &RealTol) -> Result<CriticalPoint, Error> {
    tol.validate("solve_critical")?;
    let (r, k) = (p.r(), p.k());
    let mu = minimize_h(p, tol)?;
    let f_km1 = numeric::tail_value(k - 1, mu);
    let alpha = numeric::tail_value(k, mu);
    let beta = mu * f_km1 / r as f64;
    let c_rk = numeric::h_density(r, k, mu)? / r as f64;
    let zeta = numeric::g_k(k, mu)?;
    let rho = numeric::rho_bar(k, mu)?;
    let p_star = numeric::psi(k, zeta, tol)?;
    // h'' of the unnormalized density; the square-root constant below refers
    // to c measured in edges per vertex, hence the extra factor r.
    let h2 = numeric::h_second_derivative_refined(r, k, mu)?;
    if !(h2 > 0.0) {
        return Err(Error::BracketFailure {
            op: "solve_critical",
            what: "h'' at the minimizer is not positive",
        });
    }
    let k1 = math::sqrt(2.0 * r as f64 / h2);
    Ok(CriticalPoint {
        params: p,
        mu_rk: mu,
        c_rk,
        alpha,
        beta,
        zeta,
        p_star,
        rho_bar: rho,
        k1,
    })
}

/// Solve `h(mu) = r c` for the larger root, given `c >= c_rk`.
pub fn solve_supercritical(p: ParamsRK, c: f64, tol: &RealTol) -> Result<SupercriticalPoint, Error> {
    let crit = solve_critical(p, tol)?;
    solve_supercritical_at(&crit, c, tol)
}

/// Same as [`solve_supercritical`] with a precomputed critical point.
pub fn solve_supercritical_at(
    crit: &CriticalPoint,
    c: f64,
    tol: &RealTol,
) -> Result<SupercriticalPoint, Error> {
    tol.validate("solve_supercritical")?;
    let p = crit.params;
    let (r, k) = (p.r(), p.k());
    if !(c.is_finite()) || c < crit.c_rk - tol.abs_tol {
        return Err(Error::domain(
            "solve_supercritical",
            format!("c = {c} is below the threshold c_rk = {}", crit.c_rk),
        ));
    }
    let mu_c = if c <= crit.c_rk {
        crit.mu_rk
    } else {
        let target = r as f64 * c;
        let mut lo = crit.mu_rk;
        let mut hi = crit.mu_rk + 1.0;
        let mut guard = 0;
        while numeric::h_density(r, k, hi)? <= target {
            hi = crit.mu_rk + (hi - crit.mu_rk) * 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::BracketFailure {
                    op: "solve_supercritical",
                    what: "upper bracket for h never exceeded r*c",
                });
            }
        }
        for _ in 0..tol.max_iter {
            let mid = 0.5 * (lo + hi);
            if numeric::h_density(r, k, mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let f_km1 = numeric::tail_value(k - 1, mu_c);
    Ok(SupercriticalPoint {
        params: p,
        c,
        mu_c,
        alpha_c: numeric::tail_value(k, mu_c),
        beta_c: mu_c * f_km1 / r as f64,
    })
}

/// Evaluate the closed-form identities at the critical point and report
/// residuals. Inequality checks report their violation amount (zero when
/// satisfied).
pub fn verify_identities(p: ParamsRK, tol: &RealTol) -> Result<IdentityReport, Error> {
    let crit = solve_critical(p, tol)?;
    let (r, k) = (p.r(), p.k());
    let rf = r as f64;
    let kf = k as f64;
    let mut report = IdentityReport {
        threshold: IDENTITY_THRESHOLD,
        checks: BTreeMap::new(),
    };

    let target = 1.0 / ((rf - 1.0) * (kf - 1.0));

    // k rho_bar alpha / (r beta) = 1 / ((r-1)(k-1)).
    let lhs = kf * crit.rho_bar * crit.alpha / (rf * crit.beta);
    report.push("degree_k_identity", math::abs(lhs - target));

    // e^{-mu} mu^{k-1} / ((k-1)! f_{k-1}(mu)) = 1 / ((k-1)(r-1)) at mu_rk.
    let lhs = numeric::pmf_value(k - 1, crit.mu_rk) / numeric::tail_value(k - 1, crit.mu_rk);
    report.push("critical_point_identity", math::abs(lhs - target));

    // k < zeta < r(k-1).
    let upper = rf * (kf - 1.0);
    let violation = (kf - crit.zeta).max(crit.zeta - upper).max(0.0);
    report.push("zeta_range", violation);

    // htilde(x*) < 1/(r-1) with htilde(x) = e^{-x} x^{k-1} / (f_{k-1}(x) (k-2)!)
    // and x* = r(k-1) - r/(r-1).
    let x_star = rf * (kf - 1.0) - rf / (rf - 1.0);
    let htilde = (kf - 1.0) * numeric::pmf_value(k - 1, x_star) / numeric::tail_value(k - 1, x_star);
    report.push("htilde_bound", (htilde - 1.0 / (rf - 1.0)).max(0.0));

    // f_k(mu) > 1/2 whenever k < floor(mu), on a fixed grid.
    let mut worst: f64 = 0.0;
    for kk in 2..=8u32 {
        for m in 2..=20u32 {
            let mu = (kk + m) as f64;
            let f = numeric::tail_value(kk, mu);
            worst = worst.max(0.5 - f);
        }
    }
    report.push("tail_above_half_grid", worst.max(0.0));

    // psi(zeta) = 1 / ((r-1)(k-1)).
    report.push("psi_at_zeta", math::abs(crit.p_star - target));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crit(r: u32, k: u32) -> CriticalPoint {
        solve_critical(ParamsRK::new(r, k).unwrap(), &RealTol::default()).unwrap()
    }

    #[test]
    fn critical_2_3_matches_oracle() {
        // Frozen from an independent 40-digit golden-section minimization of
        // mu / (2 f_2(mu)).
        let c = crit(2, 3);
        assert!((c.mu_rk - 1.793282132900761).abs() < 1e-10, "{}", c.mu_rk);
        assert!((c.c_rk - 1.6754594357558364).abs() < 1e-10, "{}", c.c_rk);
        assert!((c.alpha - 0.26758065498789176).abs() < 1e-10);
        assert!((c.beta - 0.47984760769966919).abs() < 1e-10);
        assert!((c.zeta - 3.586564265801522).abs() < 1e-10);
        assert!((c.p_star - 0.5).abs() < 1e-10);
    }

    #[test]
    fn critical_3_2_matches_oracle() {
        let c = crit(3, 2);
        assert!((c.mu_rk - 1.2564312086261697).abs() < 1e-10, "{}", c.mu_rk);
        assert!((c.c_rk - 0.81846916076137598).abs() < 1e-10, "{}", c.c_rk);
        assert!((c.rho_bar - 0.62821560431308484).abs() < 1e-10);
    }

    #[test]
    fn p_star_exact_for_3_3() {
        let c = crit(3, 3);
        assert!((c.p_star - 0.25).abs() <= 1e-10, "{}", c.p_star);
    }

    #[test]
    fn stationarity_holds_at_solution() {
        for (r, k) in [(2u32, 3u32), (3, 2), (4, 4), (6, 6)] {
            let c = crit(r, k);
            // Symmetric difference quotient of h vanishes at the minimizer.
            let s = 1e-5;
            let hp = (c.params.h(c.mu_rk + s).unwrap() - c.params.h(c.mu_rk - s).unwrap()) / (2.0 * s);
            assert!(hp.abs() < 1e-6, "h'({}) = {hp} for ({r},{k})", c.mu_rk);
        }
    }

    #[test]
    fn k1_positive_and_h2_based() {
        let c = crit(2, 3);
        // Oracle h'' = 0.8266, so k1 = sqrt(2*2/h'').
        assert!((c.k1 - 2.1997981074886257).abs() < 1e-4, "{}", c.k1);
    }

    #[test]
    fn supercritical_degenerate_at_threshold() {
        let p = ParamsRK::new(2, 3).unwrap();
        let tol = RealTol::default();
        let c = solve_critical(p, &tol).unwrap();
        let s = solve_supercritical_at(&c, c.c_rk, &tol).unwrap();
        assert!((s.mu_c - c.mu_rk).abs() < 1e-8);
        assert!(solve_supercritical_at(&c, c.c_rk - 1e-3, &tol).is_err());
    }

    #[test]
    fn supercritical_grows_above_threshold() {
        let p = ParamsRK::new(2, 3).unwrap();
        let tol = RealTol::default();
        let c = solve_critical(p, &tol).unwrap();
        let s = solve_supercritical_at(&c, c.c_rk + 0.1, &tol).unwrap();
        assert!(s.mu_c > c.mu_rk);
        assert!(s.alpha_c > c.alpha && s.beta_c > c.beta);
        let back = p.h(s.mu_c).unwrap() / 2.0;
        assert!((back - s.c).abs() < 1e-10);
        assert!((s.predicted_core_vertices(100) - 100.0 * s.alpha_c).abs() < 1e-9);
    }

    #[test]
    fn square_root_departure_scaling() {
        // mu(c) - mu_rk against k1 * sqrt(c - c_rk) at c - c_rk = n^{-0.4},
        // n = 1e6: the two agree within 25% relative error.
        let p = ParamsRK::new(2, 3).unwrap();
        let tol = RealTol::default();
        let c = solve_critical(p, &tol).unwrap();
        let eps = 1e6_f64.powf(-0.4);
        let s = solve_supercritical_at(&c, c.c_rk + eps, &tol).unwrap();
        let observed = s.mu_c - c.mu_rk;
        let predicted = c.k1 * eps.sqrt();
        let rel = ((observed - predicted) / predicted).abs();
        assert!(rel < 0.25, "observed {observed}, predicted {predicted}, rel {rel}");
    }

    #[test]
    fn identities_on_spot_checks() {
        for (r, k) in [(2u32, 3u32), (6, 6)] {
            let rep = verify_identities(ParamsRK::new(r, k).unwrap(), &RealTol::default()).unwrap();
            assert!(rep.all_pass(), "({r},{k}): {:?}", rep.checks);
            assert!(rep.max_residual() <= 1e-8);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ParamsRK::new(2, 2).is_err());
        assert!(ParamsRK::new(1, 3).is_err());
    }
}
