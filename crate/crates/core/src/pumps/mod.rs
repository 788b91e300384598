//! Pump beams: single LG modes, normalized LG superpositions, and fields
//! carrying unit-charge phase singularities.
//!
//! A field with `N` singularities at `z_k = rho_k e^{i phi_k}` (positions
//! in units of `w_p`) is `∏ (z - z_k)` times the Gaussian envelope. Since
//! `z^l e^{-rho²/w²} ∝ sqrt(l!) (w/√2)^l LG_0^l`, the field is exactly a
//! finite sum of `LG_0^l`, `l = 0..N`, with weights built from the
//! elementary symmetric polynomials `b_m = e_m(z_1..z_N)`.

mod file;

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

pub use file::{format_pump_file, parse_pump_file};

use crate::error::{Error, Result};
use crate::modes::{lg_amplitude, ModeIndex};
use crate::specfun::ln_factorial;

/// Allowed deviation of `Σ|a|²` from 1.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpComponent {
    pub amplitude: Complex64,
    pub mode: ModeIndex,
}

impl PumpComponent {
    pub fn new(amplitude: Complex64, mode: ModeIndex) -> Self {
        Self { amplitude, mode }
    }
}

/// A normalized, non-empty LG superposition with distinct mode labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition {
    components: Vec<PumpComponent>,
}

impl Superposition {
    /// Validates an already-normalized component list.
    pub fn new(components: Vec<PumpComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Contract("superposition has no components".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &components {
            if !seen.insert(c.mode) {
                return Err(Error::Contract(format!("mode {} appears twice", c.mode)));
            }
            if !(c.amplitude.re.is_finite() && c.amplitude.im.is_finite()) {
                return Err(Error::Domain(format!("amplitude of {} is not finite", c.mode)));
            }
        }
        let norm: f64 = components.iter().map(|c| c.amplitude.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Contract(format!("superposition norm is {norm}, not 1")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[PumpComponent] {
        &self.components
    }
}

/// A unit-charge phase singularity at `(rho, phi)`, `rho` in units of `w_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub rho: f64,
    pub phi: f64,
}

impl Singularity {
    pub fn new(rho: f64, phi: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0 && phi.is_finite()) {
            return Err(Error::Domain(format!("singularity at ({rho}, {phi}) is not valid")));
        }
        Ok(Self { rho, phi })
    }

    pub fn from_degrees(rho: f64, phi_degrees: f64) -> Result<Self> {
        Self::new(rho, phi_degrees.to_radians())
    }

    fn position(&self, w_p: f64) -> Complex64 {
        Complex64::from_polar(self.rho * w_p, self.phi)
    }
}

/// A pump beam; every LG component shares the pump waist `w_p`.
#[derive(Debug, Clone, PartialEq)]
pub enum PumpSpec {
    Single(ModeIndex),
    Superposition(Superposition),
    Singularities(Vec<Singularity>),
}

impl PumpSpec {
    /// The LG components with their amplitudes. Singularity pumps are
    /// decomposed on the fly.
    pub fn components(&self, w_p: f64) -> Result<Vec<PumpComponent>> {
        match self {
            PumpSpec::Single(mode) => Ok(vec![PumpComponent::new(Complex64::new(1.0, 0.0), *mode)]),
            PumpSpec::Superposition(s) => Ok(s.components.clone()),
            PumpSpec::Singularities(sings) => singularities_to_lg(sings, w_p)?.components(w_p),
        }
    }

    /// Distinct pump OAM values, ascending.
    pub fn ell_values(&self, w_p: f64) -> Result<Vec<i32>> {
        let mut ells: Vec<i32> = self.components(w_p)?.iter().map(|c| c.mode.ell).collect();
        ells.sort_unstable();
        ells.dedup();
        Ok(ells)
    }
}

impl From<ModeIndex> for PumpSpec {
    fn from(mode: ModeIndex) -> Self {
        PumpSpec::Single(mode)
    }
}

/// Coefficients `[e_0, …, e_N]` of `∏ (1 + z_k x)`, i.e. the elementary
/// symmetric polynomials of `zs`.
pub fn elementary_symmetric(zs: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = Vec::with_capacity(zs.len() + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    for &z in zs {
        coeffs.push(Complex64::new(0.0, 0.0));
        for m in (1..coeffs.len()).rev() {
            let lower = coeffs[m - 1];
            coeffs[m] += z * lower;
        }
    }
    coeffs
}

/// Exact `LG_0^l` decomposition (`l = 0..N`) of a field with unit-charge
/// phase singularities at the given positions, normalized to unit power.
///
/// Raw weights are `a_l = √π (-1)^(N-l) (w_p/√2)^(l-1) sqrt(l!) b_(N-l)`.
pub fn singularities_to_lg(sings: &[Singularity], w_p: f64) -> Result<PumpSpec> {
    if !(w_p.is_finite() && w_p > 0.0) {
        return Err(Error::Domain(format!("pump waist must be positive, got {w_p}")));
    }
    let zs: Vec<Complex64> = sings.iter().map(|s| s.position(w_p)).collect();
    let b = elementary_symmetric(&zs);
    let n = sings.len();
    let raw = (0..=n)
        .map(|l| {
            let sign = if (n - l).is_multiple_of(2) { 1.0 } else { -1.0 };
            let scale = sign
                * PI.sqrt()
                * (w_p / SQRT_2).powi(l as i32 - 1)
                * (0.5 * ln_factorial(l as u32)).exp();
            (b[n - l] * scale, ModeIndex::new(l as i32, 0))
        })
        .collect::<Vec<_>>();
    normalize_pump(&raw)
}

/// Merges duplicate modes (summing amplitudes), drops exact zeros, and
/// rescales to `Σ|a|² = 1`, keeping first-appearance order.
pub fn normalize_pump(raw: &[(Complex64, ModeIndex)]) -> Result<PumpSpec> {
    let mut merged: BTreeMap<ModeIndex, (usize, Complex64)> = BTreeMap::new();
    for (order, (a, mode)) in raw.iter().enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::Domain(format!("amplitude of {mode} is not finite")));
        }
        merged.entry(*mode).or_insert((order, Complex64::new(0.0, 0.0))).1 += a;
    }
    // first-appearance order
    let mut entries: Vec<(usize, ModeIndex, Complex64)> = merged
        .into_iter()
        .filter(|(_, (_, a))| a.norm_sqr() > 0.0)
        .map(|(mode, (order, a))| (order, mode, a))
        .collect();
    entries.sort_by_key(|e| e.0);

    let norm: f64 = entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::DegeneratePump);
    }
    let components = entries
        .into_iter()
        .map(|(_, mode, a)| PumpComponent::new(a / norm, mode))
        .collect();
    Ok(PumpSpec::Superposition(Superposition::new(components)?))
}

/// Pump field at `(rho, phi)`: `Σ a_n LG_n(rho, phi)`.
pub fn pump_field_value(pump: &PumpSpec, w_p: f64, rho: f64, phi: f64) -> Result<Complex64> {
    pump.components(w_p)?
        .iter()
        .map(|c| Ok(c.amplitude * lg_amplitude(c.mode, w_p, rho, phi)?))
        .sum()
}

/// The six-singularity pump that produces an equal-weight four-dimensional
/// OAM state at `gamma = 1`: radii 0.65, 1.85, 1.06, 0.54, 1.53, 1.24 (in
/// units of `w_p`) at angles `k·π/3`, `k = 1..6`.
pub fn six_singularity_pump() -> PumpSpec {
    const RADII: [f64; 6] = [0.65, 1.85, 1.06, 0.54, 1.53, 1.24];
    PumpSpec::Singularities(
        RADII
            .iter()
            .enumerate()
            .map(|(k, &rho)| Singularity {
                rho,
                phi: (k + 1) as f64 * PI / 3.0,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn elementary_symmetric_examples() {
        assert_eq!(elementary_symmetric(&[]), vec![c(1.0, 0.0)]);
        let e = elementary_symmetric(&[c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(e, vec![c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)]);
    }

    #[test]
    fn on_axis_vortex_is_pure_charge_one() {
        let pump = singularities_to_lg(&[Singularity::new(0.0, 0.3).unwrap()], 1.0).unwrap();
        let comps = pump.components(1.0).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].mode, ModeIndex::new(1, 0));
        assert_relative_eq!(comps[0].amplitude.norm(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn no_singularities_is_gaussian() {
        let pump = singularities_to_lg(&[], 1.0).unwrap();
        let comps = pump.components(1.0).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].mode, ModeIndex::GAUSSIAN);
        assert_relative_eq!(comps[0].amplitude.norm(), 1.0);
    }

    #[test]
    fn decomposition_is_independent_of_waist() {
        let sings = [Singularity::new(0.4, 1.0).unwrap(), Singularity::new(1.2, -2.0).unwrap()];
        let a = singularities_to_lg(&sings, 1.0).unwrap().components(1.0).unwrap();
        let b = singularities_to_lg(&sings, 3.5).unwrap().components(3.5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mode, y.mode);
            assert!((x.amplitude - y.amplitude).norm() < 1e-14);
        }
    }

    #[test]
    fn normalize_examples() {
        let p = normalize_pump(&[(c(2.0, 0.0), ModeIndex::GAUSSIAN)]).unwrap();
        let comps = p.components(1.0).unwrap();
        assert_eq!(comps, vec![PumpComponent::new(c(1.0, 0.0), ModeIndex::GAUSSIAN)]);

        let p = normalize_pump(&[
            (c(1.0, 0.0), ModeIndex::GAUSSIAN),
            (c(1.0, 0.0), ModeIndex::new(1, 0)),
        ])
        .unwrap();
        for comp in p.components(1.0).unwrap() {
            assert_relative_eq!(comp.amplitude.re, std::f64::consts::FRAC_1_SQRT_2);
        }

        let err = normalize_pump(&[
            (c(1.0, 0.0), ModeIndex::GAUSSIAN),
            (c(-1.0, 0.0), ModeIndex::GAUSSIAN),
        ])
        .unwrap_err();
        assert_eq!(err, Error::DegeneratePump);
    }

    #[test]
    fn normalize_merges_duplicates() {
        let p = normalize_pump(&[
            (c(1.0, 0.0), ModeIndex::new(2, 1)),
            (c(0.0, 3.0), ModeIndex::GAUSSIAN),
            (c(2.0, 0.0), ModeIndex::new(2, 1)),
        ])
        .unwrap();
        let comps = p.components(1.0).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].mode, ModeIndex::new(2, 1));
        assert_relative_eq!(comps[0].amplitude.re, 3.0 / 18f64.sqrt());
        assert_relative_eq!(comps[1].amplitude.im, 3.0 / 18f64.sqrt());
    }

    #[test]
    fn superposition_rejects_bad_lists() {
        assert!(Superposition::new(vec![]).is_err());
        let half = PumpComponent::new(c(0.5, 0.0), ModeIndex::GAUSSIAN);
        assert!(Superposition::new(vec![half]).is_err());
        let one = PumpComponent::new(c(1.0, 0.0), ModeIndex::GAUSSIAN);
        assert!(Superposition::new(vec![one, one]).is_err());
    }

    #[test]
    fn field_values() {
        let g = PumpSpec::Single(ModeIndex::GAUSSIAN);
        let v = pump_field_value(&g, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(v.re, (2.0 / PI).sqrt(), max_relative = 1e-15);

        let mode = ModeIndex::new(-2, 1);
        let single = PumpSpec::Single(mode);
        for (rho, phi) in [(0.3, 0.1), (1.1, 2.0), (2.5, -1.0)] {
            let a = pump_field_value(&single, 1.4, rho, phi).unwrap();
            let b = lg_amplitude(mode, 1.4, rho, phi).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn six_singularity_pump_has_seven_modes() {
        let comps = six_singularity_pump().components(1.0).unwrap();
        let ells: Vec<i32> = comps.iter().map(|c| c.mode.ell).collect();
        assert_eq!(ells, (0..=6).collect::<Vec<_>>());
        assert!(comps.iter().all(|c| c.mode.p == 0));
    }
}
