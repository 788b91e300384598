//! Numerical quadrature of the defining overlap integral
//!
//! ```text
//! C = ∫dφ ∫ρ dρ  LG_pump(ρ,φ) conj(LG_signal(ρ,φ)) conj(LG_idler(ρ,φ))
//! ```
//!
//! used to validate the closed-form amplitudes. The mode profiles here are
//! evaluated by code private to this module (own factorials, own Laguerre
//! recurrence), so agreement with [`crate::amplitudes`] is a check of two
//! independent routes rather than of one route against itself.

pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::amplitudes::{AmplitudePath, CoincidenceAmplitude};
use crate::error::{Error, Result};
use crate::modes::{BeamWidths, ModeIndex};
use quadrature::{gaussian_cutoff, integrate, Quadrature, QuadratureOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub quadrature: QuadratureOptions,
    /// Multiplies the automatic radial cutoff.
    pub cutoff_scale: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureOptions::default(),
            cutoff_scale: 1.0,
        }
    }
}

/// Radial profile of one mode with its normalization folded in.
#[derive(Debug, Clone, Copy)]
struct RadialProfile {
    abs_ell: u32,
    p: u32,
    /// `2/w²`, so the Laguerre argument is `scale·ρ²`.
    scale: f64,
    ln_norm: f64,
}

impl RadialProfile {
    fn new(mode: ModeIndex, width: f64) -> Self {
        let abs_ell = mode.ell.unsigned_abs();
        // ln sqrt(2 p! / (π (p+|l|)!)) / w, factorial ratio by direct product
        let ln_ratio: f64 = (mode.p + 1..=mode.p + abs_ell).map(|k| -f64::from(k).ln()).sum();
        Self {
            abs_ell,
            p: mode.p,
            scale: 2.0 / (width * width),
            ln_norm: 0.5 * ((2.0 / PI).ln() + ln_ratio) - width.ln(),
        }
    }

    /// `x^(|l|/2) L_p^|l|(x)` times the normalization; the Gaussian factor
    /// is applied once for all three modes by the caller.
    fn polynomial_part(&self, rho2: f64) -> f64 {
        let x = self.scale * rho2;
        let power = if self.abs_ell == 0 {
            0.0
        } else {
            0.5 * f64::from(self.abs_ell) * x.ln()
        };
        (self.ln_norm + power).exp() * laguerre(self.p, self.abs_ell, x)
    }
}

fn laguerre(n: u32, alpha: u32, x: f64) -> f64 {
    // L_0 = 1, L_1 = 1 + α - x, (k+1) L_{k+1} = (2k+1+α-x) L_k - (k+α) L_{k-1}
    let a = f64::from(alpha);
    let (mut lower, mut upper) = (0.0, 1.0);
    for k in 0..n {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + a - x) * upper - (k + a) * lower) / (k + 1.0);
        lower = upper;
        upper = next;
    }
    upper
}

struct Integrand {
    profiles: [RadialProfile; 3],
    decay: f64,
    cutoff: f64,
}

impl Integrand {
    fn new(
        pump: ModeIndex,
        signal: ModeIndex,
        idler: ModeIndex,
        widths: &BeamWidths,
        opts: &OracleOptions,
    ) -> Self {
        let profiles = [
            RadialProfile::new(pump, widths.w_p()),
            RadialProfile::new(signal, widths.w_s()),
            RadialProfile::new(idler, widths.w_i()),
        ];
        let decay = profiles.iter().map(|p| 0.5 * p.scale).sum::<f64>();
        let max_ell = profiles.iter().map(|p| p.abs_ell).max().unwrap_or(0);
        let max_p = profiles.iter().map(|p| p.p).max().unwrap_or(0);
        let cutoff = gaussian_cutoff(decay, max_ell + 2 * max_p) * opts.cutoff_scale;
        Self {
            profiles,
            decay,
            cutoff,
        }
    }

    /// `ρ R_p(ρ) R_s(ρ) R_i(ρ)`.
    fn radial(&self, rho: f64) -> f64 {
        let rho2 = rho * rho;
        let poly: f64 = self.profiles.iter().map(|p| p.polynomial_part(rho2)).product();
        rho * poly * (-self.decay * rho2).exp()
    }
}

fn to_amplitude(q: &Quadrature) -> CoincidenceAmplitude {
    let magnitude = q.value.norm();
    let condition = if magnitude > 0.0 {
        (q.abs_integral / magnitude).max(1.0)
    } else if q.abs_integral > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    CoincidenceAmplitude {
        value: q.value,
        condition,
        path: AmplitudePath::Quadrature,
    }
}

/// `2π ∫ ρ R_p R_s R_i dρ` for an OAM-conserving triple, with the full
/// quadrature record (error estimate, panel count).
pub fn radial_overlap(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
    opts: &OracleOptions,
) -> Result<Quadrature> {
    if i64::from(pump.ell) != i64::from(signal.ell) + i64::from(idler.ell) {
        return Err(Error::Contract(format!(
            "radial oracle needs ell_p = ell_s + ell_i, got {pump}/{signal}/{idler}"
        )));
    }
    let integrand = Integrand::new(pump, signal, idler, widths, opts);
    let mut q = integrate(
        |rho| Complex64::new(integrand.radial(rho), 0.0),
        0.0,
        integrand.cutoff,
        &opts.quadrature,
    )?;
    q.value *= 2.0 * PI;
    q.error_estimate *= 2.0 * PI;
    q.abs_integral *= 2.0 * PI;
    Ok(q)
}

/// Full two-dimensional overlap for any triple: periodic trapezoid in φ
/// with `2(|lp|+|ls|+|li|) + 32` nodes, adaptive quadrature in ρ.
pub fn overlap_2d(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
    opts: &OracleOptions,
) -> Result<Quadrature> {
    let integrand = Integrand::new(pump, signal, idler, widths, opts);
    let nodes = 2 * (integrand.profiles.iter().map(|p| p.abs_ell).sum::<u32>() as usize) + 32;
    let dphi = 2.0 * PI / nodes as f64;
    // Σ_nodes e^{i lp φ} conj(e^{i ls φ}) conj(e^{i li φ}) dφ; the integrand
    // separates, so the azimuthal sum is the same at every radius
    let azimuthal: Complex64 = (0..nodes)
        .map(|m| {
            let phi = m as f64 * dphi;
            let p = Complex64::from_polar(1.0, f64::from(pump.ell) * phi);
            let s = Complex64::from_polar(1.0, f64::from(signal.ell) * phi);
            let i = Complex64::from_polar(1.0, f64::from(idler.ell) * phi);
            p * s.conj() * i.conj()
        })
        .sum::<Complex64>()
        * dphi;
    // ∫∫|f| sets the round-off floor; the azimuthal sum may cancel to
    // nothing, which would otherwise leave no floor at all
    let magnitude = integrate(
        |rho| Complex64::new(integrand.radial(rho).abs(), 0.0),
        0.0,
        integrand.cutoff,
        &opts.quadrature,
    )?;
    let abs_integral = 2.0 * PI * magnitude.value.re;
    let quad_opts = QuadratureOptions {
        abs_tol: opts.quadrature.abs_tol.max(50.0 * f64::EPSILON * abs_integral),
        ..opts.quadrature
    };
    let mut q = integrate(
        |rho| azimuthal * integrand.radial(rho),
        0.0,
        integrand.cutoff,
        &quad_opts,
    )?;
    q.abs_integral = abs_integral;
    Ok(q)
}

/// Quadrature amplitude for an OAM-conserving triple (azimuth done
/// analytically). Fails with a contract violation otherwise.
pub fn coincidence_quadrature_radial(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
) -> Result<CoincidenceAmplitude> {
    radial_overlap(pump, signal, idler, widths, &OracleOptions::default()).map(|q| to_amplitude(&q))
}

/// Quadrature amplitude from the full 2-D integral; OAM-violating triples
/// come out at round-off level.
pub fn coincidence_quadrature_2d(
    pump: ModeIndex,
    signal: ModeIndex,
    idler: ModeIndex,
    widths: &BeamWidths,
) -> Result<CoincidenceAmplitude> {
    overlap_2d(pump, signal, idler, widths, &OracleOptions::default()).map(|q| to_amplitude(&q))
}
