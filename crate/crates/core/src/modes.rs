//! Laguerre-Gauss mode labels and field values at the beam waist.
//!
//! The pump waist `w_p` is the unit of length throughout; fields carry
//! units of 1/length through the `1/w` normalization prefactor.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::quadrature::{self, QuadratureOptions};
use crate::specfun::{assoc_laguerre, ln_factorial};

/// One Laguerre-Gauss mode label: OAM index `ell` and radial index `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub ell: i32,
    pub p: u32,
}

impl ModeIndex {
    pub const GAUSSIAN: ModeIndex = ModeIndex { ell: 0, p: 0 };

    pub const fn new(ell: i32, p: u32) -> Self {
        Self { ell, p }
    }

    pub fn abs_ell(self) -> u32 {
        self.ell.unsigned_abs()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.ell, self.p)
    }
}

/// Pump waist and the two pump-to-mode width ratios
/// `gamma_s = w_p / w_s`, `gamma_i = w_p / w_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamWidths {
    w_p: f64,
    gamma_s: f64,
    gamma_i: f64,
}

impl BeamWidths {
    pub fn new(w_p: f64, gamma_s: f64, gamma_i: f64) -> Result<Self> {
        for (name, v) in [("w_p", w_p), ("gamma_s", gamma_s), ("gamma_i", gamma_i)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            w_p,
            gamma_s,
            gamma_i,
        })
    }

    /// Unit pump waist with equal signal and idler ratios.
    pub fn equal(gamma: f64) -> Result<Self> {
        Self::new(1.0, gamma, gamma)
    }

    pub fn w_p(&self) -> f64 {
        self.w_p
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_i(&self) -> f64 {
        self.gamma_i
    }

    pub fn w_s(&self) -> f64 {
        self.w_p / self.gamma_s
    }

    pub fn w_i(&self) -> f64 {
        self.w_p / self.gamma_i
    }

    /// Exchanges the signal and idler ratios.
    pub fn swapped(&self) -> Self {
        Self {
            w_p: self.w_p,
            gamma_s: self.gamma_i,
            gamma_i: self.gamma_s,
        }
    }
}

impl Default for BeamWidths {
    fn default() -> Self {
        Self {
            w_p: 1.0,
            gamma_s: 1.0,
            gamma_i: 1.0,
        }
    }
}

/// Real radial part of `LG_p^ell` at radius `rho` for waist `width`.
pub(crate) fn lg_radial(mode: ModeIndex, width: f64, rho: f64) -> f64 {
    let l = mode.abs_ell();
    let x = 2.0 * rho * rho / (width * width);
    let log_norm = 0.5
        * ((2.0 / PI).ln() + ln_factorial(mode.p) - ln_factorial(mode.p + l))
        - width.ln();
    // (rho sqrt2 / w)^|l| = x^(|l|/2); 0^0 = 1 on axis
    let log_power = if l == 0 { 0.0 } else { 0.5 * f64::from(l) * x.ln() };
    let envelope = (log_norm + log_power - rho * rho / (width * width)).exp();
    envelope * assoc_laguerre(mode.p, l, x)
}

/// Field value `LG_p^ell(rho, phi)` at the waist, including `e^{i ell phi}`.
pub fn lg_amplitude(mode: ModeIndex, width: f64, rho: f64, phi: f64) -> Result<Complex64> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Domain(format!("mode width must be positive and finite, got {width}")));
    }
    if !(rho.is_finite() && rho >= 0.0) || !phi.is_finite() {
        return Err(Error::Domain(format!("field point (rho={rho}, phi={phi}) is not valid")));
    }
    let radial = lg_radial(mode, width, rho);
    Ok(Complex64::from_polar(1.0, f64::from(mode.ell) * phi) * radial)
}

/// Overlap `∫ LG_a conj(LG_b) rho drho dphi` of two modes of equal width.
///
/// The azimuth uses a periodic trapezoid rule that is exact for the
/// harmonics present; the radius uses the oracle's adaptive quadrature.
pub fn mode_overlap(a: ModeIndex, b: ModeIndex, width: f64) -> Result<Complex64> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::Domain(format!("mode width must be positive and finite, got {width}")));
    }
    let nodes = 2 * (a.abs_ell() + b.abs_ell()) as usize + 32;
    let dphi = 2.0 * PI / nodes as f64;
    let phase: Vec<Complex64> = (0..nodes)
        .map(|m| Complex64::from_polar(dphi, f64::from(a.ell - b.ell) * m as f64 * dphi))
        .collect();
    let azimuthal_sum: Complex64 = phase.iter().sum();

    let degree = 2 * (a.p.max(b.p)) + a.abs_ell().max(b.abs_ell());
    let cutoff = quadrature::gaussian_cutoff(2.0 / (width * width), degree);
    let result = quadrature::integrate(
        |rho| {
            let r = lg_radial(a, width, rho) * lg_radial(b, width, rho) * rho;
            azimuthal_sum * r
        },
        0.0,
        cutoff,
        &QuadratureOptions::default(),
    )?;
    Ok(result.value)
}

/// `∫ |LG|² rho drho dphi`, which should be 1 for every mode and width.
pub fn mode_norm(mode: ModeIndex, width: f64) -> Result<f64> {
    Ok(mode_overlap(mode, mode, width)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn gaussian_on_axis() {
        let v = lg_amplitude(ModeIndex::GAUSSIAN, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(v.re, (2.0 / PI).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(v.re, 0.797_884_56, epsilon = 1e-8);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn vortex_vanishes_on_axis() {
        for phi in [0.0, 1.0, 4.0] {
            let v = lg_amplitude(ModeIndex::new(1, 0), 1.0, 0.0, phi).unwrap();
            assert_eq!(v.norm(), 0.0);
        }
    }

    #[test]
    fn quarter_turn_multiplies_by_i() {
        let m = ModeIndex::new(1, 0);
        let at0 = lg_amplitude(m, 1.0, 0.7, 0.0).unwrap();
        let at90 = lg_amplitude(m, 1.0, 0.7, FRAC_PI_2).unwrap();
        let expected = Complex64::i() * at0;
        assert!((at90 - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = ModeIndex::GAUSSIAN;
        assert!(lg_amplitude(m, 0.0, 1.0, 0.0).is_err());
        assert!(lg_amplitude(m, 1.0, -1.0, 0.0).is_err());
        assert!(lg_amplitude(m, 1.0, f64::NAN, 0.0).is_err());
        assert!(lg_amplitude(m, 1.0, 1.0, f64::INFINITY).is_err());
        assert!(BeamWidths::new(1.0, 0.0, 1.0).is_err());
        assert!(BeamWidths::new(f64::INFINITY, 1.0, 1.0).is_err());
    }

    #[test]
    fn norm_examples() {
        for (mode, w) in [
            (ModeIndex::new(0, 0), 1.0),
            (ModeIndex::new(3, 2), 1.0),
            (ModeIndex::new(0, 0), 0.25),
        ] {
            let n = mode_norm(mode, w).unwrap();
            assert!((n - 1.0).abs() < 1e-10, "{mode} w={w}: {n}");
        }
    }

    #[test]
    fn distinct_modes_are_orthogonal() {
        let pairs = [
            (ModeIndex::new(0, 0), ModeIndex::new(0, 1)),
            (ModeIndex::new(2, 1), ModeIndex::new(2, 3)),
            (ModeIndex::new(1, 0), ModeIndex::new(-1, 0)),
            (ModeIndex::new(3, 2), ModeIndex::new(1, 2)),
        ];
        for (a, b) in pairs {
            let o = mode_overlap(a, b, 1.3).unwrap();
            assert!(o.norm() < 1e-10, "{a} vs {b}: {o}");
        }
    }

    #[test]
    fn conjugation_flips_ell() {
        for ell in 1..5 {
            for p in 0..3 {
                let plus = lg_amplitude(ModeIndex::new(ell, p), 0.8, 0.9, 0.37).unwrap();
                let minus = lg_amplitude(ModeIndex::new(-ell, p), 0.8, 0.9, 0.37).unwrap();
                assert!((plus - minus.conj()).norm() < 1e-15);
            }
        }
    }
}
