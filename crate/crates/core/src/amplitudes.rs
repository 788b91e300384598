//! Closed-form coincidence amplitudes `C^{ls,li}_{ps,pi}` for a pump mode
//! and a signal/idler mode pair, plus the cheaper special cases and the
//! linear extension to pump superpositions.
//!
//! For a single LG pump the amplitude is
//!
//! ```text
//! C = δ(lp, ls+li) sqrt(2/(π w_p²)) 2^(σ+1) γs^(|ls|+1) γi^(|li|+1) / S^(σ+1)
//!     × sqrt(pp! ps! pi! (|lp|+pp)! (|ls|+ps)! (|li|+pi)!)
//!     × Σ_{k,i,j} (-2)^(k+i+j) γs^(2i) γi^(2j) / S^(k+i+j) × (σ+k+i+j)!
//!       / [(pp-k)! (|lp|+k)! k! (ps-i)! (|ls|+i)! i! (pi-j)! (|li|+j)! j!]
//! ```
//!
//! with `S = 1 + γs² + γi²` and `σ = (|lp|+|ls|+|li|)/2`. The alternating
//! triple sum is accumulated in sign/log-magnitude form; when its
//! cancellation condition is too large for `f64` it is re-evaluated in
//! double-double arithmetic.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modes::{BeamWidths, ModeIndex};
use crate::pumps::PumpSpec;
use crate::specfun::{ln_factorial, signed_log_sum, DoubleDouble, SignedLogValue};

/// Condition number above which the `f64` log-space sum is re-evaluated in
/// double-double. Log-space terms carry relative errors up to ~1e-13, so
/// this keeps the `f64` result within ~1e-10.
pub const ESCALATION_CONDITION: f64 = 1e3;

/// Largest condition the double-double path accepts; its terms are good to
/// ~1e-30, leaving 1e-10 after this much cancellation. Beyond it the sum is
/// evaluated exactly.
pub const EXTENDED_CONDITION_LIMIT: f64 = 1e20;

/// Which formula produced an amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AmplitudePath {
    General,
    GaussianPump,
    PZero,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceAmplitude {
    /// In units of `1/w_p`.
    pub value: Complex64,
    /// Worst cancellation condition met while evaluating; at least 1.
    pub condition: f64,
    pub path: AmplitudePath,
}

impl CoincidenceAmplitude {
    fn real(value: f64, condition: f64, path: AmplitudePath) -> Self {
        Self {
            value: Complex64::new(value, 0.0),
            condition: condition.max(1.0),
            path,
        }
    }

    fn zero(path: AmplitudePath) -> Self {
        Self::real(0.0, 1.0, path)
    }

    pub fn probability(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// `|lp| + |ls| + |li|` when OAM is conserved, `None` otherwise.
fn twice_sigma(pump: ModeIndex, signal: ModeIndex, idler: ModeIndex) -> Option<u32> {
    if i64::from(pump.ell) != i64::from(signal.ell) + i64::from(idler.ell) {
        return None;
    }
    let twice = pump.abs_ell() + signal.abs_ell() + idler.abs_ell();
    assert!(
        twice.is_multiple_of(2),
        "OAM-conserving triple {pump}/{signal}/{idler} has odd |lp|+|ls|+|li| = {twice}"
    );
    Some(twice)
}

/// ln of `sqrt(2/(π w_p²)) 2^(σ+1) γs^(|ls|+1) γi^(|li|+1) / S^(σ+1)`.
fn ln_prefactor(sigma: u32, ls: u32, li: u32, widths: &BeamWidths) -> f64 {
    let (gs, gi) = (widths.gamma_s(), widths.gamma_i());
    let s = 1.0 + gs * gs + gi * gi;
    let n = f64::from(sigma + 1);
    0.5 * (2.0 / PI).ln() - widths.w_p().ln() + n * 2f64.ln() + f64::from(ls + 1) * gs.ln()
        + f64::from(li + 1) * gi.ln()
        - n * s.ln()
}

/// Dispatches to the cheapest formula valid for the triple: the Gaussian
/// pump form, then the all-`p = 0` form, then the general triple sum.
pub fn coincidence(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
) -> Result<CoincidenceAmplitude> {
    let radial_free = pump.p == 0 && signal.p == 0 && idler.p == 0;
    if radial_free
        && pump.ell == 0
        && widths.gamma_s() == widths.gamma_i()
        && signal.ell == -idler.ell
    {
        coincidence_gaussian_pump(signal.ell, widths)
    } else if radial_free {
        Ok(coincidence_p_zero(pump.ell, signal.ell, idler.ell, widths))
    } else {
        coincidence_closed(pump, signal, idler, widths)
    }
}

/// The general closed form for any LG pump, signal and idler.
///
/// Returns exact zero when `lp != ls + li`. The alternating sum is taken
/// in `f64` log space, retried in double-double above
/// [`ESCALATION_CONDITION`], and evaluated exactly in integer arithmetic
/// above [`EXTENDED_CONDITION_LIMIT`].
pub fn coincidence_closed(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
) -> Result<CoincidenceAmplitude> {
    let Some(twice) = twice_sigma(pump, signal, idler) else {
        return Ok(CoincidenceAmplitude::zero(AmplitudePath::General));
    };
    let sigma = twice / 2;
    let (lp, ls, li) = (pump.abs_ell(), signal.abs_ell(), idler.abs_ell());
    let (pp, ps, pi) = (pump.p, signal.p, idler.p);
    let (gs, gi) = (widths.gamma_s(), widths.gamma_i());
    let s = 1.0 + gs * gs + gi * gi;

    let ln_norm = 0.5
        * (ln_factorial(pp)
            + ln_factorial(ps)
            + ln_factorial(pi)
            + ln_factorial(lp + pp)
            + ln_factorial(ls + ps)
            + ln_factorial(li + pi));
    let ln_front = ln_prefactor(sigma, ls, li, widths) + ln_norm;

    let ln_ratio = (2.0 / s).ln();
    let (ln_gs2, ln_gi2) = (2.0 * gs.ln(), 2.0 * gi.ln());
    let mut terms = Vec::with_capacity(((pp + 1) * (ps + 1) * (pi + 1)) as usize);
    for k in 0..=pp {
        let lk = ln_factorial(pp - k) + ln_factorial(lp + k) + ln_factorial(k);
        for i in 0..=ps {
            let li_ = ln_factorial(ps - i) + ln_factorial(ls + i) + ln_factorial(i);
            for j in 0..=pi {
                let lj = ln_factorial(pi - j) + ln_factorial(li + j) + ln_factorial(j);
                let n = k + i + j;
                let log = f64::from(n) * ln_ratio
                    + f64::from(i) * ln_gs2
                    + f64::from(j) * ln_gi2
                    + ln_factorial(sigma + n)
                    - lk
                    - li_
                    - lj;
                terms.push(SignedLogValue::new(if n % 2 == 0 { 1 } else { -1 }, log));
            }
        }
    }
    let (sum, condition) = signed_log_sum(&terms);

    let (sum, condition) = if condition > ESCALATION_CONDITION {
        match extended_sum(pump, signal, idler, sigma, widths)? {
            (sum, cond) if cond <= EXTENDED_CONDITION_LIMIT => (sum, cond),
            (_, cond) => (exact_sum(pump, signal, idler, sigma, widths), cond),
        }
    } else {
        (sum, condition)
    };
    let value = f64::from(sum.sign()) * (ln_front + sum.log_magnitude()).exp();
    Ok(CoincidenceAmplitude::real(value, condition, AmplitudePath::General))
}

/// Double-double re-evaluation of the triple sum.
///
/// Every term is formed as a ratio to the `k = i = j = 0` term using only
/// small-integer products and powers of `γ²` and `2/S`, so no factorial
/// ever leaves the exponent range.
fn extended_sum(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    sigma: u32,
    widths: &BeamWidths,
) -> Result<(SignedLogValue, f64)> {
    let dd = |x: u32| DoubleDouble::from(f64::from(x));
    let (gs, gi) = (widths.gamma_s(), widths.gamma_i());
    let gs2 = DoubleDouble::from(gs) * DoubleDouble::from(gs);
    let gi2 = DoubleDouble::from(gi) * DoubleDouble::from(gi);
    let s = DoubleDouble::ONE + gs2 + gi2;
    let step = -(DoubleDouble::from(2.0) / s);

    // ratio of the (p-m)! (|l|+m)! m! denominator at m to that at 0,
    // inverted, times x^m
    let factors = |p: u32, l: u32, x: DoubleDouble| -> Vec<DoubleDouble> {
        let mut out = Vec::with_capacity(p as usize + 1);
        let mut acc = DoubleDouble::ONE;
        out.push(acc);
        for m in 1..=p {
            acc = acc * x * dd(p - m + 1) / (dd(l + m) * dd(m));
            out.push(acc);
        }
        out
    };
    let a = factors(pump.p, pump.abs_ell(), step);
    let b = factors(signal.p, signal.abs_ell(), step * gs2);
    let c = factors(idler.p, idler.abs_ell(), step * gi2);

    let n_max = pump.p + signal.p + idler.p;
    let mut rising = Vec::with_capacity(n_max as usize + 1);
    let mut acc = DoubleDouble::ONE;
    rising.push(acc);
    for n in 1..=n_max {
        acc = acc * dd(sigma + n);
        rising.push(acc);
    }

    let mut total = DoubleDouble::ZERO;
    let mut magnitude = DoubleDouble::ZERO;
    for (k, ak) in a.iter().enumerate() {
        for (i, bi) in b.iter().enumerate() {
            let abi = *ak * *bi;
            for (j, cj) in c.iter().enumerate() {
                let term = abi * *cj * rising[k + i + j];
                total += term;
                magnitude += term.abs();
            }
        }
    }
    if !total.is_finite() || !magnitude.is_finite() {
        return Err(Error::Domain(format!(
            "amplitude {pump}/{signal}/{idler} overflows the extended-precision range"
        )));
    }
    if total.is_zero() {
        return Ok((SignedLogValue::ZERO, f64::INFINITY));
    }
    let condition = (magnitude / total.abs()).to_f64();
    let ln_base = ln_factorial(sigma)
        - ln_factorial(pump.p)
        - ln_factorial(pump.abs_ell())
        - ln_factorial(signal.p)
        - ln_factorial(signal.abs_ell())
        - ln_factorial(idler.p)
        - ln_factorial(idler.abs_ell());
    Ok((
        SignedLogValue::new(total.signum(), ln_base + total.ln_abs()),
        condition,
    ))
}

/// `ln |x|` for integers of any size.
fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `γ² = mantissa² 2^(2e)` as an exact integer numerator over `2^-e_min`.
fn gamma_squared_numerator(gamma: f64, e_min: i32) -> BigUint {
    let (mantissa, exponent, _) = gamma.integer_decode();
    let m = BigUint::from(mantissa);
    (&m * &m) << (2 * i32::from(exponent) - e_min) as u32
}

/// The triple sum in exact integer arithmetic.
///
/// Binary floating-point ratios are exact binary fractions: with
/// `γs² = Ns/D`, `γi² = Ni/D` and `S = M/D`, the sum times
/// `M^N pp!(|lp|+pp)! ps!(|ls|+ps)! pi!(|li|+pi)! / σ!` (`N = pp+ps+pi`) is
/// the integer
///
/// ```text
/// Σ_n M^(N-n) (σ+1)…(σ+n) Σ_{k+i+j=n} a_k b_i c_j,
/// a_k = (-2D)^k C(pp,k) (|lp|+pp)!/(|lp|+k)!   (b, c likewise with Ns, Ni)
/// ```
///
/// evaluated as a convolution of the three per-mode sequences.
fn exact_sum(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    sigma: u32,
    widths: &BeamWidths,
) -> SignedLogValue {
    let (gs, gi) = (widths.gamma_s(), widths.gamma_i());
    let e_min = [gs, gi]
        .iter()
        .map(|g| 2 * i32::from(g.integer_decode().1))
        .fold(0, i32::min);
    let d = BigUint::one() << (-e_min) as u32;
    let ns = gamma_squared_numerator(gs, e_min);
    let ni = gamma_squared_numerator(gi, e_min);
    let m = &d + &ns + &ni;

    // a_m = (-2x)^m C(p,m) (l+p)!/(l+m)!, built from a_p = (-2x)^p downwards
    let sequence = |p: u32, l: u32, x: &BigUint| -> Vec<BigInt> {
        let base = BigInt::from(x.clone()) * -2;
        let mut out = vec![BigInt::zero(); p as usize + 1];
        // c_m = C(p,m) (l+p)!/(l+m)!, c_p = 1, c_{m-1} = c_m m (l+m) / (p-m+1)
        let mut coeff = BigInt::one();
        for mm in (0..=p).rev() {
            out[mm as usize] = coeff.clone();
            if mm > 0 {
                coeff = coeff * (mm * (l + mm)) / (p - mm + 1);
            }
        }
        let mut power = BigInt::one();
        for term in out.iter_mut() {
            *term *= &power;
            power *= &base;
        }
        out
    };
    let convolve = |u: &[BigInt], v: &[BigInt]| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); u.len() + v.len() - 1];
        for (a, x) in u.iter().enumerate() {
            for (b, y) in v.iter().enumerate() {
                out[a + b] += x * y;
            }
        }
        out
    };
    let a = sequence(pump.p, pump.abs_ell(), &d);
    let b = sequence(signal.p, signal.abs_ell(), &ns);
    let c = sequence(idler.p, idler.abs_ell(), &ni);
    let by_order = convolve(&convolve(&a, &b), &c);

    let n_max = by_order.len() - 1;
    let m = BigInt::from(m);
    let mut total = BigInt::zero();
    // Horner in M: order n picks up M^(N-n)
    let mut rising = vec![BigInt::one(); n_max + 1];
    for n in 1..=n_max {
        rising[n] = &rising[n - 1] * (sigma + n as u32);
    }
    for n in 0..=n_max {
        total = total * &m + &by_order[n] * &rising[n];
    }
    if total.is_zero() {
        return SignedLogValue::ZERO;
    }

    let ln_scale = f64::from(pump.p + signal.p + idler.p) * ln_big(m.magnitude())
        + ln_factorial(pump.p)
        + ln_factorial(pump.abs_ell() + pump.p)
        + ln_factorial(signal.p)
        + ln_factorial(signal.abs_ell() + signal.p)
        + ln_factorial(idler.p)
        + ln_factorial(idler.abs_ell() + idler.p)
        - ln_factorial(sigma);
    let sign = if total.is_negative() { -1 } else { 1 };
    SignedLogValue::new(sign, ln_big(total.magnitude()) - ln_scale)
}

/// Gaussian pump with `p_s = p_i = 0` and equal signal/idler ratios:
/// `C = sqrt(2/(π w_p²)) (2γ²/(1+2γ²))^(|ell|+1)` for `ls = ell = -li`.
pub fn coincidence_gaussian_pump(ell: i32, widths: &BeamWidths) -> Result<CoincidenceAmplitude> {
    if widths.gamma_s() != widths.gamma_i() {
        return Err(Error::Contract(format!(
            "Gaussian-pump form needs gamma_s == gamma_i, got {} and {}",
            widths.gamma_s(),
            widths.gamma_i()
        )));
    }
    let g2 = widths.gamma_s() * widths.gamma_s();
    let ratio = 2.0 * g2 / (1.0 + 2.0 * g2);
    let ln_value = 0.5 * (2.0 / PI).ln() - widths.w_p().ln()
        + f64::from(ell.unsigned_abs() + 1) * ratio.ln();
    Ok(CoincidenceAmplitude::real(
        ln_value.exp(),
        1.0,
        AmplitudePath::GaussianPump,
    ))
}

/// All radial indices zero: a single term of the triple sum survives,
/// `C = ... 2^(σ+1) σ! / sqrt(|lp|! |ls|! |li|!) ...`.
pub fn coincidence_p_zero(
    ell_p: i32,
    ell_s: i32,
    ell_i: i32,
    widths: &BeamWidths,
) -> CoincidenceAmplitude {
    let (pump, signal, idler) = (
        ModeIndex::new(ell_p, 0),
        ModeIndex::new(ell_s, 0),
        ModeIndex::new(ell_i, 0),
    );
    let Some(twice) = twice_sigma(pump, signal, idler) else {
        return CoincidenceAmplitude::zero(AmplitudePath::PZero);
    };
    let sigma = twice / 2;
    let (lp, ls, li) = (pump.abs_ell(), signal.abs_ell(), idler.abs_ell());
    let ln_value = ln_prefactor(sigma, ls, li, widths) + ln_factorial(sigma)
        - 0.5 * (ln_factorial(lp) + ln_factorial(ls) + ln_factorial(li));
    CoincidenceAmplitude::real(ln_value.exp(), 1.0, AmplitudePath::PZero)
}

/// `Σ_n a_n C_n` over the LG components of any pump.
///
/// The reported path is that of the first nonzero component (or of the
/// first component when all vanish); the condition is the worst met.
pub fn coincidence_superposition(
    pump: &PumpSpec,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
) -> Result<CoincidenceAmplitude> {
    let components = pump.components(widths.w_p())?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut condition: f64 = 1.0;
    let mut path = None;
    for c in &components {
        if c.mode.ell != signal.ell + idler.ell {
            continue;
        }
        let amp = coincidence(c.mode, signal, idler, widths)?;
        value += c.amplitude * amp.value;
        condition = condition.max(amp.condition);
        path.get_or_insert(amp.path);
    }
    Ok(CoincidenceAmplitude {
        value,
        condition,
        path: path.unwrap_or(AmplitudePath::General),
    })
}
