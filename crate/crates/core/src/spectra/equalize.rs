//! Width ratios at which a set of signal/idler states is equally likely.

use rayon::prelude::*;

use super::{check_states, raw_state_probabilities, PumpGroups};
use crate::error::{Error, Result};
use crate::modes::{BeamWidths, ModeIndex};
use crate::pumps::PumpSpec;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqualizationMode {
    /// Accept roots with CV below 1e-6.
    #[default]
    Strict,
    /// Accept roots with CV below 1e-2, for inputs known only to a few digits.
    Paper,
}

impl EqualizationMode {
    pub fn tolerance(self) -> f64 {
        match self {
            EqualizationMode::Strict => 1e-6,
            EqualizationMode::Paper => 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizationOptions {
    pub mode: EqualizationMode,
    /// Overrides the mode's tolerance.
    pub tolerance: Option<f64>,
    pub grid_step: f64,
    /// Width of a refined bracket.
    pub bracket_width: f64,
    pub w_p: f64,
}

impl Default for EqualizationOptions {
    fn default() -> Self {
        Self {
            mode: EqualizationMode::Strict,
            tolerance: None,
            grid_step: 0.01,
            bracket_width: 1e-6,
            w_p: 1.0,
        }
    }
}

impl EqualizationOptions {
    pub fn paper() -> Self {
        Self {
            mode: EqualizationMode::Paper,
            ..Self::default()
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.mode.tolerance())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizationResult {
    /// `γ = γ_s = γ_i` values, ascending.
    pub roots: Vec<f64>,
    /// Coefficient of variation of the state probabilities at each root.
    pub residuals: Vec<f64>,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

/// Population standard deviation over mean; infinite when the mean is zero.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if !(mean > 0.0) {
        return f64::INFINITY;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt() / mean
}

struct Objective<'a> {
    groups: PumpGroups,
    states: &'a [(ModeIndex, ModeIndex)],
    w_p: f64,
}

impl Objective<'_> {
    /// CV of the raw probabilities; normalization cancels in the ratio.
    fn cv(&self, gamma: f64) -> Result<f64> {
        let widths = BeamWidths::new(self.w_p, gamma, gamma)?;
        let raw = raw_state_probabilities(&self.groups, &widths, self.states)?;
        Ok(coefficient_of_variation(&raw))
    }

    fn golden_section(&self, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64)> {
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let (mut fc, mut fd) = (self.cv(c)?, self.cv(d)?);
        while b - a > width {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = self.cv(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = self.cv(d)?;
            }
        }
        let x = 0.5 * (a + b);
        Ok((x, self.cv(x)?))
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let round = |x: f64| (x * 1e12).round() / 1e12;
    let mut points: Vec<f64> = (0..=n).map(|i| round(lo + i as f64 * step)).collect();
    if points.last().is_some_and(|&x| x < hi) {
        points.push(hi);
    }
    points
}

/// Scans `γ_s = γ_i = γ` over `interval`, brackets the local minima of the
/// coefficient of variation of the state probabilities, refines each by
/// golden section, and keeps those below the tolerance.
pub fn find_equal_probability_gammas(
    pump: &PumpSpec,
    states: &[(ModeIndex, ModeIndex)],
    interval: (f64, f64),
    opts: &EqualizationOptions,
) -> Result<EqualizationResult> {
    if states.len() < 2 {
        return Err(Error::Contract(format!(
            "equalization needs at least 2 states, got {}",
            states.len()
        )));
    }
    check_states(states)?;
    let (lo, hi) = interval;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Contract(format!("invalid gamma interval ({lo}, {hi})")));
    }
    if !(opts.grid_step > 0.0 && opts.bracket_width > 0.0) {
        return Err(Error::Contract("grid step and bracket width must be positive".into()));
    }
    let objective = Objective {
        groups: PumpGroups::new(pump, opts.w_p)?,
        states,
        w_p: opts.w_p,
    };
    let gammas = grid(lo, hi, opts.grid_step);
    let cvs = gammas
        .par_iter()
        .map(|&g| objective.cv(g))
        .collect::<Result<Vec<_>>>()?;

    let tolerance = opts.tolerance();
    let mut roots = Vec::new();
    let mut residuals = Vec::new();
    for i in 1..gammas.len().saturating_sub(1) {
        if !(cvs[i] < cvs[i - 1] && cvs[i] <= cvs[i + 1]) {
            continue;
        }
        let (x, cv) = objective.golden_section(gammas[i - 1], gammas[i + 1], opts.bracket_width)?;
        if cv < tolerance {
            roots.push(x);
            residuals.push(cv);
        }
    }
    Ok(EqualizationResult {
        roots,
        residuals,
        bracket: interval,
        tolerance,
    })
}
