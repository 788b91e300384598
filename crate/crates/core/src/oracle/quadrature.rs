//! Globally adaptive 21-point Gauss-Kronrod quadrature on a finite interval.
//!
//! Panels are bisected worst-first until the summed `|K21 - G10|` error
//! estimate meets the target. Evaluation order is fixed, so results are
//! bitwise reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_931_644_297,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Target error relative to the magnitude of the integral.
    pub rel_tol: f64,
    /// Absolute error that is always acceptable.
    pub abs_tol: f64,
    /// Refinement budget.
    pub max_panels: usize,
    /// Uniform panels to start from.
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_panels: 4000,
            initial_panels: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    /// Summed `|K21 - G10|` over all panels.
    pub error_estimate: f64,
    /// `∫|f|`, the scale against which round-off is judged.
    pub abs_integral: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod_panel<F>(f: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut abs_sum = fc.norm() * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
        abs_value: abs_sum * half.abs(),
    }
}

/// Integrates a complex-valued `f` over `[a, b]`.
///
/// Converges when the error estimate is below
/// `max(rel_tol·|I|, abs_tol, 50·ε·∫|f|)`; the last term is the round-off
/// floor, which governs integrals that vanish by cancellation.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("invalid integration interval [{a}, {b}]")));
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap: BinaryHeap<Panel> = (0..n0)
        .map(|k| {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == n0 { b } else { lo + width };
            kronrod_panel(&f, lo, hi)
        })
        .collect();

    let mut value: Complex64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    let mut abs_integral: f64 = heap.iter().map(|p| p.abs_value).sum();
    loop {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        let target = (opts.rel_tol * value.norm())
            .max(opts.abs_tol)
            .max(50.0 * f64::EPSILON * abs_integral);
        if error <= target {
            return Ok(finish(heap));
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                error_estimate: error,
                target,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // the panel cannot be split further in f64
            return Err(Error::Quadrature {
                error_estimate: error,
                target,
                panels: heap.len() + 1,
            });
        }
        let left = kronrod_panel(&f, worst.a, mid);
        let right = kronrod_panel(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_integral += left.abs_value + right.abs_value - worst.abs_value;
        // running error sums can drift below zero through round-off
        if error < 0.0 {
            error = heap.iter().map(|p| p.error).sum::<f64>() + left.error + right.error;
        }
        heap.push(left);
        heap.push(right);
    }
}

/// Sums the panels in left-to-right order.
fn finish(heap: BinaryHeap<Panel>) -> Quadrature {
    let panels = heap.into_sorted_vec();
    let mut ordered: Vec<&Panel> = panels.iter().collect();
    ordered.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = Complex64::new(0.0, 0.0);
    let mut error_estimate = 0.0;
    let mut abs_integral = 0.0;
    for p in &ordered {
        value += p.value;
        error_estimate += p.error;
        abs_integral += p.abs_value;
    }
    Quadrature {
        value,
        error_estimate,
        abs_integral,
        panels: ordered.len(),
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts)
}

/// Radius beyond which `exp(-decay·rho²)·poly(rho)` is negligible.
///
/// The Gaussian exponent reaches -50 at the base radius, which is then
/// inflated by `1 + 0.1·index_spread` (`|ell|_max + 2 p_max`) to cover the
/// polynomial growth of high-order modes.
pub fn gaussian_cutoff(decay: f64, index_spread: u32) -> f64 {
    (50.0 / decay).sqrt() * (1.0 + 0.1 * f64::from(index_spread))
}
