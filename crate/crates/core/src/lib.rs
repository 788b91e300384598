//! Spectral decomposition of SPDC biphotons over Laguerre-Gauss modes.
//!
//! Closed-form coincidence amplitudes for arbitrary LG pumps, an
//! independent quadrature oracle, spiral-bandwidth spectra, decomposition
//! of phase-singularity pumps into LG modes, and a finder for the width
//! ratios at which a set of OAM states becomes equiprobable.
//!
//! ```
//! use biphoton::{coincidence, BeamWidths, ModeIndex};
//!
//! let w = BeamWidths::equal(1.0).unwrap();
//! let c = coincidence(ModeIndex::new(0, 0), ModeIndex::new(1, 0), ModeIndex::new(-1, 0), &w)
//!     .unwrap();
//! assert!((c.value.re - 0.354_615_4).abs() < 1e-7);
//! ```

// `!(x > 0.0)` is used on purpose to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod error;
pub mod modes;
pub mod oracle;
pub mod pumps;
pub mod specfun;
pub mod spectra;

pub use amplitudes::{coincidence, coincidence_superposition, AmplitudePath, CoincidenceAmplitude};
pub use error::{Error, Result};
pub use modes::{BeamWidths, ModeIndex};
pub use pumps::{PumpComponent, PumpSpec, Singularity, Superposition};
pub use spectra::{
    effective_dimension, find_equal_probability_gammas, gamma_scan, spiral_spectrum,
    subspace_probabilities, EqualizationMode, EqualizationOptions, EqualizationResult, GammaScan,
    SpiralSpectrum,
};
