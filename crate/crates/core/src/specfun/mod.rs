//! Special functions behind every amplitude evaluation: log-factorials,
//! sign/log-magnitude accumulation of alternating sums, and associated
//! Laguerre polynomials of integer order.

mod double_double;

use std::ops::Mul;
use std::sync::OnceLock;

pub use double_double::DoubleDouble;

use crate::error::{Error, Result};

const TABLE_LEN: usize = 256;

fn factorial_table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; TABLE_LEN];
        // compensated running sum of ln k
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            let term = (k as f64).ln();
            let t = sum + term;
            if sum.abs() >= term.abs() {
                carry += (sum - t) + term;
            } else {
                carry += (term - t) + sum;
            }
            sum = t;
            *slot = sum + carry;
        }
        table
    })
}

/// ln(n!) for any `n`; table lookup below 256, Stirling series above.
pub fn ln_factorial(n: u32) -> f64 {
    let n = n as usize;
    if n < TABLE_LEN {
        return factorial_table()[n];
    }
    // ln Γ(x) with x = n + 1 ≥ 257; the series is truncated well below ulp
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// ln(n!) with a domain check for negative arguments.
pub fn log_factorial(n: i64) -> Result<f64> {
    let n = u32::try_from(n)
        .map_err(|_| Error::Domain(format!("log_factorial of {n} is undefined")))?;
    Ok(ln_factorial(n))
}

/// A real number stored as a sign and the natural log of its magnitude.
///
/// `sign == 0` is exactly zero whatever `log_magnitude` holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    sign: i8,
    log_magnitude: f64,
}

impl SignedLogValue {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    /// Builds a value from its parts; any sign other than ±1 is zero.
    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        match sign.signum() {
            0 => Self::ZERO,
            s => Self {
                sign: s,
                log_magnitude,
            },
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_magnitude(self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }
}

/// Log-magnitudes add.
impl Mul for SignedLogValue {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.sign * other.sign, self.log_magnitude + other.log_magnitude)
    }
}

/// Sums sign/log-magnitude terms and reports the cancellation condition
/// `Σ|t| / |Σ t|`.
///
/// An empty (or all-zero) input gives zero with condition 1. Exact
/// cancellation of nonzero terms gives zero with condition `f64::INFINITY`.
pub fn signed_log_sum(terms: &[SignedLogValue]) -> (SignedLogValue, f64) {
    let peak = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.log_magnitude)
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return (SignedLogValue::ZERO, 1.0);
    }

    // Neumaier summation of the scaled terms
    let (mut sum, mut carry, mut magnitude) = (0.0f64, 0.0f64, 0.0f64);
    for t in terms.iter().filter(|t| !t.is_zero()) {
        let scaled = (t.log_magnitude - peak).exp();
        magnitude += scaled;
        let x = f64::from(t.sign) * scaled;
        let s = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - s) + x;
        } else {
            carry += (x - s) + sum;
        }
        sum = s;
    }
    let total = sum + carry;
    if total == 0.0 {
        return (SignedLogValue::ZERO, f64::INFINITY);
    }
    let value = SignedLogValue::new(
        if total > 0.0 { 1 } else { -1 },
        peak + total.abs().ln(),
    );
    (value, magnitude / total.abs())
}

/// Associated Laguerre polynomial `L_p^alpha(x)` by the three-term recurrence.
pub fn assoc_laguerre(p: u32, alpha: u32, x: f64) -> f64 {
    let a = f64::from(alpha);
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut curr = 1.0 + a - x;
    for k in 1..p {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + a - x) * curr - (k + a) * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// `L_p^alpha(x)` from its explicit alternating power sum.
///
/// Loses digits for large `p·x`; kept as an independent cross-check of
/// [`assoc_laguerre`], not for runtime use.
pub fn assoc_laguerre_explicit(p: u32, alpha: u32, x: f64) -> f64 {
    (0..=p)
        .map(|i| {
            let coeff = (ln_factorial(p + alpha)
                - ln_factorial(p - i)
                - ln_factorial(alpha + i)
                - ln_factorial(i))
            .exp();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * coeff * x.powi(i as i32)
        })
        .sum()
}

/// Binomial coefficient as `f64`; exact while the result fits in 53 bits.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}
