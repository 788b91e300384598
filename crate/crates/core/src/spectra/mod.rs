//! Spiral-bandwidth spectra: coincidence probabilities over the signal OAM,
//! normalized over an adaptively extended OAM support.

mod equalize;

pub use equalize::{
    coefficient_of_variation, find_equal_probability_gammas, EqualizationMode,
    EqualizationOptions, EqualizationResult,
};

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitudes::coincidence;
use crate::error::{Error, Result};
use crate::modes::{BeamWidths, ModeIndex};
use crate::pumps::{PumpComponent, PumpSpec};

/// Hard limit on `|ell_s - center|` during support extension.
pub const MAX_ELL: i32 = 2000;
/// The extension stops once the last [`TAIL_RUN`] values on each side add
/// up to less than this fraction of the running total.
pub const TAIL_THRESHOLD: f64 = 1e-9;
pub const TAIL_RUN: usize = 5;
/// Largest estimated mass beyond the support that is accepted.
pub const MAX_TAIL_MASS: f64 = 1e-6;
/// A wing is suppressed when the opposite side carries this many times
/// its mass.
pub const WING_SUPPRESSION_RATIO: f64 = 10.0;

/// One `(ell_s, p_s, p_i)` cell of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub ell_s: i32,
    pub p_s: u32,
    pub p_i: u32,
    /// Idler OAM, when a single pump OAM contributes.
    pub ell_i: Option<i32>,
    /// Normalized amplitude with `|amplitude|² = probability`; `None` when
    /// several idler OAM values contribute incoherently.
    pub amplitude: Option<Complex64>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiralSpectrum {
    entries: BTreeMap<i32, f64>,
    rows: Vec<SpectrumRow>,
    p_family: Vec<(u32, u32)>,
    window: RangeInclusive<i32>,
    ell_support: RangeInclusive<i32>,
    outside_window: f64,
    tail_mass: f64,
}

impl SpiralSpectrum {
    /// `P(ell_s)` summed over the p family, for every `ell_s` in the window.
    pub fn entries(&self) -> &BTreeMap<i32, f64> {
        &self.entries
    }

    /// Per-`(ell_s, p_s, p_i)` breakdown, ordered by `ell_s` then family order.
    pub fn rows(&self) -> &[SpectrumRow] {
        &self.rows
    }

    pub fn probability(&self, ell_s: i32) -> f64 {
        self.entries.get(&ell_s).copied().unwrap_or(0.0)
    }

    pub fn p_family(&self) -> &[(u32, u32)] {
        &self.p_family
    }

    pub fn window(&self) -> RangeInclusive<i32> {
        self.window.clone()
    }

    /// The `ell_s` range summed for normalization.
    pub fn ell_support(&self) -> RangeInclusive<i32> {
        self.ell_support.clone()
    }

    /// Normalized mass inside the support but outside the window.
    pub fn outside_window(&self) -> f64 {
        self.outside_window
    }

    /// Estimated normalized mass beyond the support.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Entries plus everything outside the window; 1 up to round-off.
    pub fn total(&self) -> f64 {
        self.entries.values().sum::<f64>() + self.outside_window + self.tail_mass
    }

    /// Signal OAM values whose probability is strictly greater than both
    /// neighbours inside the window.
    pub fn local_maxima(&self) -> Vec<i32> {
        self.interior_extrema(|mid, side| mid > side)
    }

    /// Signal OAM values whose probability is strictly less than both
    /// neighbours inside the window.
    pub fn local_minima(&self) -> Vec<i32> {
        self.interior_extrema(|mid, side| mid < side)
    }

    fn interior_extrema(&self, beats: impl Fn(f64, f64) -> bool) -> Vec<i32> {
        let values: Vec<(i32, f64)> = self.entries.iter().map(|(&l, &p)| (l, p)).collect();
        values
            .windows(3)
            .filter(|w| beats(w[1].1, w[0].1) && beats(w[1].1, w[2].1))
            .map(|w| w[1].0)
            .collect()
    }

    /// Ratio of the larger to the smaller window mass on either side of
    /// `center_twice / 2` (the centre itself is excluded). Infinite when
    /// one side is empty.
    pub fn wing_asymmetry(&self, center_twice: i32) -> f64 {
        let (mut left, mut right) = (0.0, 0.0);
        for (&ell, &p) in &self.entries {
            match (2 * ell).cmp(&center_twice) {
                std::cmp::Ordering::Less => left += p,
                std::cmp::Ordering::Greater => right += p,
                std::cmp::Ordering::Equal => {}
            }
        }
        let (hi, lo) = if left > right { (left, right) } else { (right, left) };
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    }
}

/// Inverse participation ratio `1/Σ P²` over the window entries.
pub fn effective_dimension(spectrum: &SpiralSpectrum) -> f64 {
    let sum_sq: f64 = spectrum.entries.values().map(|p| p * p).sum();
    1.0 / sum_sq
}

/// Pump components grouped by OAM, ascending.
pub(crate) struct PumpGroups {
    groups: Vec<(i32, Vec<PumpComponent>)>,
}

impl PumpGroups {
    pub(crate) fn new(pump: &PumpSpec, w_p: f64) -> Result<Self> {
        let mut map: BTreeMap<i32, Vec<PumpComponent>> = BTreeMap::new();
        for c in pump.components(w_p)? {
            map.entry(c.mode.ell).or_default().push(c);
        }
        if map.is_empty() {
            return Err(Error::DegeneratePump);
        }
        Ok(Self {
            groups: map.into_iter().collect(),
        })
    }

    fn ell_range(&self) -> (i32, i32) {
        (self.groups[0].0, self.groups[self.groups.len() - 1].0)
    }

    /// `Σ_n a_n C_n` over the components with `ell_p = signal.ell + idler.ell`.
    pub(crate) fn amplitude(
        &self,
        signal: ModeIndex,
        idler: ModeIndex,
        widths: &BeamWidths,
    ) -> Result<Complex64> {
        let Some(ell_p) = signal.ell.checked_add(idler.ell) else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let Ok(idx) = self.groups.binary_search_by_key(&ell_p, |g| g.0) else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let mut sum = Complex64::new(0.0, 0.0);
        for c in &self.groups[idx].1 {
            sum += c.amplitude * coincidence(c.mode, signal, idler, widths)?.value;
        }
        Ok(sum)
    }

    /// Raw `Σ_{ell_p, (p_s,p_i)} |amplitude|²` for one signal OAM.
    fn raw_probability(
        &self,
        ell_s: i32,
        p_family: &[(u32, u32)],
        widths: &BeamWidths,
    ) -> Result<f64> {
        let mut total = 0.0;
        for (ell_p, _) in &self.groups {
            for &(ps, pi) in p_family {
                let signal = ModeIndex::new(ell_s, ps);
                let idler = ModeIndex::new(ell_p - ell_s, pi);
                total += self.amplitude(signal, idler, widths)?.norm_sqr();
            }
        }
        Ok(total)
    }
}

/// Raw (unnormalized) probabilities over an adaptively grown support.
struct Support {
    start: i32,
    values: Vec<f64>,
    total: f64,
    tail: f64,
}

impl Support {
    fn get(&self, ell: i32) -> f64 {
        usize::try_from(ell - self.start)
            .ok()
            .and_then(|i| self.values.get(i).copied())
            .unwrap_or(0.0)
    }

    fn end(&self) -> i32 {
        self.start + self.values.len() as i32 - 1
    }
}

/// Geometric continuation of a side whose last two values are `prev, last`.
fn geometric_tail(prev: f64, last: f64) -> f64 {
    if last == 0.0 {
        return 0.0;
    }
    let q = last / prev;
    if q < 1.0 {
        last * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

fn extend_support(
    groups: &PumpGroups,
    p_family: &[(u32, u32)],
    widths: &BeamWidths,
    window: &RangeInclusive<i32>,
) -> Result<Support> {
    let (lo, hi) = groups.ell_range();
    // each pump OAM gives a spectrum symmetric about ell_p / 2
    let center = (lo + hi).div_euclid(4);
    let mut left: Vec<f64> = Vec::new(); // center-1, center-2, ...
    let mut right: Vec<f64> = vec![groups.raw_probability(center, p_family, widths)?];
    let mut total = right[0];
    let reach = (center - window.start())
        .max(window.end() - center)
        .max(lo.abs().max(hi.abs()))
        .max(TAIL_RUN as i32);

    let side_done = |side: &[f64], total: f64| {
        let n = side.len();
        n > TAIL_RUN
            && side[n - TAIL_RUN..].iter().sum::<f64>() < TAIL_THRESHOLD * total
            && side[n - 1] <= side[n - 2]
    };

    let mut radius = 0;
    loop {
        if radius >= reach && total > 0.0 && side_done(&left, total) && side_done(&right, total) {
            break;
        }
        if radius >= MAX_ELL {
            let tail = if total > 0.0 {
                1.0
            } else {
                return Err(Error::Domain("spectrum vanishes for every signal OAM".into()));
            };
            return Err(Error::NonConvergentSpectrum {
                tail_mass: tail,
                max_ell: MAX_ELL,
            });
        }
        radius += 1;
        let l = groups.raw_probability(center - radius, p_family, widths)?;
        let r = groups.raw_probability(center + radius, p_family, widths)?;
        left.push(l);
        right.push(r);
        total += l + r;
    }

    let tail_of = |side: &[f64]| geometric_tail(side[side.len() - 2], side[side.len() - 1]);
    let tail = tail_of(&left) + tail_of(&right);
    let relative = tail / (total + tail);
    if !(relative <= MAX_TAIL_MASS) {
        return Err(Error::NonConvergentSpectrum {
            tail_mass: relative,
            max_ell: center.abs() + radius,
        });
    }
    let start = center - radius;
    let mut values: Vec<f64> = left.into_iter().rev().collect();
    values.extend(right);
    // resum in a fixed order for reproducibility
    let total = values.iter().sum();
    Ok(Support {
        start,
        values,
        total,
        tail,
    })
}

fn check_p_family(p_family: &[(u32, u32)]) -> Result<()> {
    if p_family.is_empty() {
        return Err(Error::Contract("p_family must not be empty".into()));
    }
    let distinct: BTreeSet<_> = p_family.iter().collect();
    if distinct.len() != p_family.len() {
        return Err(Error::Contract("p_family contains duplicates".into()));
    }
    Ok(())
}

fn check_window(window: &RangeInclusive<i32>) -> Result<()> {
    if window.is_empty() {
        return Err(Error::Contract(format!(
            "empty ell window {}:{}",
            window.start(),
            window.end()
        )));
    }
    if window.start().abs() > MAX_ELL || window.end().abs() > MAX_ELL {
        return Err(Error::Contract(format!("ell window must lie within ±{MAX_ELL}")));
    }
    Ok(())
}

/// Probability over the signal OAM for the requested radial family.
///
/// `|C|²` is summed over every pump OAM (the idler OAM follows from
/// conservation) and every `(p_s, p_i)` in `p_family`, normalized over a
/// support grown symmetrically about the pump's OAM centre until the last
/// few values on each side are negligible, and reported on `ell_window`.
pub fn spiral_spectrum(
    pump: &PumpSpec,
    widths: &BeamWidths,
    p_family: &[(u32, u32)],
    ell_window: RangeInclusive<i32>,
) -> Result<SpiralSpectrum> {
    check_p_family(p_family)?;
    check_window(&ell_window)?;
    let groups = PumpGroups::new(pump, widths.w_p())?;
    let support = extend_support(&groups, p_family, widths, &ell_window)?;
    let norm = support.total + support.tail;
    let scale = norm.sqrt().recip();

    let mut entries = BTreeMap::new();
    let mut rows = Vec::new();
    let single_group = groups.groups.len() == 1;
    for ell_s in ell_window.clone() {
        let mut cell_total = 0.0;
        for &(ps, pi) in p_family {
            let signal = ModeIndex::new(ell_s, ps);
            let mut prob = 0.0;
            let mut amp = None;
            for (ell_p, _) in &groups.groups {
                let idler = ModeIndex::new(ell_p - ell_s, pi);
                let a = groups.amplitude(signal, idler, widths)? * scale;
                prob += a.norm_sqr();
                amp = Some(a);
            }
            cell_total += prob;
            rows.push(SpectrumRow {
                ell_s,
                p_s: ps,
                p_i: pi,
                ell_i: single_group.then(|| groups.groups[0].0 - ell_s),
                amplitude: if single_group { amp } else { None },
                probability: prob,
            });
        }
        entries.insert(ell_s, cell_total);
    }

    let inside: f64 = ell_window
        .clone()
        .filter(|l| (support.start..=support.end()).contains(l))
        .map(|l| support.get(l))
        .sum();
    let outside_window = ((support.total - inside) / norm).max(0.0);
    let lo = support.start.min(*ell_window.start());
    let hi = support.end().max(*ell_window.end());
    Ok(SpiralSpectrum {
        entries,
        rows,
        p_family: p_family.to_vec(),
        window: ell_window,
        ell_support: lo..=hi,
        outside_window,
        tail_mass: support.tail / norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaScan {
    gammas: Vec<(f64, f64)>,
    spectra: Vec<SpiralSpectrum>,
}

impl GammaScan {
    pub fn gammas(&self) -> &[(f64, f64)] {
        &self.gammas
    }

    pub fn spectra(&self) -> &[SpiralSpectrum] {
        &self.spectra
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(f64, f64), &SpiralSpectrum)> {
        self.gammas.iter().zip(&self.spectra)
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

/// One spectrum per `(γ_s, γ_i)` grid point, computed in parallel.
///
/// Normalized spectra do not depend on the pump waist, so it is fixed to 1.
/// The grid must be strictly increasing in `(γ_s, γ_i)` order.
pub fn gamma_scan(
    pump: &PumpSpec,
    gamma_grid: &[(f64, f64)],
    p_family: &[(u32, u32)],
    ell_window: RangeInclusive<i32>,
) -> Result<GammaScan> {
    if gamma_grid.is_empty() {
        return Err(Error::Contract("gamma grid must not be empty".into()));
    }
    for pair in gamma_grid.windows(2) {
        let ordered = pair[0].0 < pair[1].0 || (pair[0].0 == pair[1].0 && pair[0].1 < pair[1].1);
        if !ordered {
            return Err(Error::Contract(format!(
                "gamma grid must be strictly increasing: {:?} then {:?}",
                pair[0], pair[1]
            )));
        }
    }
    check_p_family(p_family)?;
    check_window(&ell_window)?;
    let spectra = gamma_grid
        .par_iter()
        .map(|&(gs, gi)| {
            BeamWidths::new(1.0, gs, gi)
                .and_then(|w| spiral_spectrum(pump, &w, p_family, ell_window.clone()))
                .map_err(|e| Error::ScanPoint {
                    gamma_s: gs,
                    gamma_i: gi,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaScan {
        gammas: gamma_grid.to_vec(),
        spectra,
    })
}

fn check_states(states: &[(ModeIndex, ModeIndex)]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Contract("state list must not be empty".into()));
    }
    let distinct: BTreeSet<_> = states.iter().collect();
    if distinct.len() != states.len() {
        return Err(Error::Contract("state list contains duplicates".into()));
    }
    Ok(())
}

/// Raw `|C|²` for each state, without normalization.
pub(crate) fn raw_state_probabilities(
    groups: &PumpGroups,
    widths: &BeamWidths,
    states: &[(ModeIndex, ModeIndex)],
) -> Result<Vec<f64>> {
    states
        .iter()
        .map(|&(s, i)| groups.amplitude(s, i, widths).map(|a| a.norm_sqr()))
        .collect()
}

/// `|C|²` for each signal/idler state, normalized over the full spectrum
/// of the radial family spanned by the states.
pub fn subspace_probabilities(
    pump: &PumpSpec,
    widths: &BeamWidths,
    states: &[(ModeIndex, ModeIndex)],
) -> Result<Vec<f64>> {
    check_states(states)?;
    let groups = PumpGroups::new(pump, widths.w_p())?;
    let family: Vec<(u32, u32)> = states
        .iter()
        .map(|(s, i)| (s.p, i.p))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lo = states.iter().map(|(s, _)| s.ell).min().unwrap_or(0);
    let hi = states.iter().map(|(s, _)| s.ell).max().unwrap_or(0);
    let support = extend_support(&groups, &family, widths, &(lo..=hi))?;
    let norm = support.total + support.tail;
    let raw = raw_state_probabilities(&groups, widths, states)?;
    Ok(raw.into_iter().map(|p| p / norm).collect())
}
