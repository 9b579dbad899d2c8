use crate::Error;
use alloc::format;

/// Edge arity `r` and core threshold `k`.
///
/// Requires `r >= 2`, `k >= 2` and `(r, k) != (2, 2)`; the excluded pair has
/// no interior minimum of the threshold density and its 2-core behaviour is
/// classical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct ParamsRK {
    r: u32,
    k: u32,
}

impl ParamsRK {
    pub fn new(r: u32, k: u32) -> Result<Self, Error> {
        if r < 2 || k < 2 {
            return Err(Error::InvalidParams {
                what: format!("need r >= 2 and k >= 2, got (r, k) = ({r}, {k})"),
            });
        }
        if (r, k) == (2, 2) {
            return Err(Error::InvalidParams {
                what: "(r, k) = (2, 2) is excluded".into(),
            });
        }
        Ok(ParamsRK { r, k })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `h(mu) = mu / f_{k-1}(mu)^{r-1}`.
    pub fn h(&self, mu: f64) -> Result<f64, Error> {
        crate::numeric::h_density(self.r, self.k, mu)
    }

    /// Five-point finite-difference estimate of `h''(mu)`.
    pub fn h_second_derivative(&self, mu: f64, step: f64) -> Result<f64, Error> {
        crate::numeric::h_second_derivative(self.r, self.k, mu, step)
    }

    /// `psi(x)`: the degree-k share of heavy copies at heavy average degree `x`.
    pub fn psi(&self, x: f64, tol: &RealTol) -> Result<f64, Error> {
        crate::numeric::psi(self.k, x, tol)
    }

    /// Proportion of degree-k vertices among k-truncated Poisson(mu) mass.
    pub fn rho_bar(&self, mu: f64) -> Result<f64, Error> {
        crate::numeric::rho_bar(self.k, mu)
    }
}

/// Absolute tolerance and iteration cap for the scalar solvers.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RealTol {
    pub abs_tol: f64,
    pub max_iter: u32,
}

impl Default for RealTol {
    fn default() -> Self {
        RealTol {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl RealTol {
    pub(crate) fn validate(&self, op: &'static str) -> Result<(), Error> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::domain(op, format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::domain(op, "max_iter must be at least 1"));
        }
        Ok(())
    }
}
