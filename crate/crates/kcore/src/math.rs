//! Small float helpers routed through `std` or `libm` depending on features.

#[cfg(feature = "std")]
pub(crate) fn exp(x: f64) -> f64 {
    x.exp()
}
#[cfg(not(feature = "std"))]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
pub(crate) fn ln(x: f64) -> f64 {
    x.ln()
}
#[cfg(not(feature = "std"))]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}
#[cfg(not(feature = "std"))]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// |x| without relying on std-only methods.
pub(crate) fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & (u64::MAX >> 1))
}

/// x^n by binary exponentiation. Exact enough for the small n used here.
pub(crate) fn powu(x: f64, mut n: u32) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// j! as f64; valid for j <= 170.
pub(crate) fn factorial(j: u32) -> f64 {
    let mut acc = 1.0;
    for i in 2..=j {
        acc *= i as f64;
    }
    acc
}

/// ln(j!) by direct summation.
pub(crate) fn ln_factorial(j: u32) -> f64 {
    let mut acc = 0.0;
    for i in 2..=j {
        acc += ln(i as f64);
    }
    acc
}

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}
