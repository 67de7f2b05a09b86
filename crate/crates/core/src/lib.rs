//! Secret-key-rate bounds for free-space satellite-to-satellite links where
//! the eavesdropper is kept out of an exclusion zone around the receiver
//! and/or limited to a finite aperture.
//!
//! The crate is layered bottom-up:
//!
//! * [`gaussian`]: covariance-matrix toolkit (symplectic spectra, entropies,
//!   beamsplitters, heterodyne conditioning).
//! * [`channel`]: geometry to `(eta, kappa, n_e)` for the far-field
//!   exclusion-zone model and the Gaussian-beam finite-aperture model.
//! * [`rate`]: direct/reverse reconciliation lower bounds, their large-power
//!   limits, and a pure-loss surrogate upper bound.
//! * [`sweep`]: input-power optimisation and 1-D parameter sweeps.
//! * [`config`], [`table`], [`presets`]: the flat `key=value` run format, CSV
//!   output, and the built-in figure curve families used by the `skr` CLI.

pub mod channel;
pub mod config;
pub mod gaussian;
pub mod presets;
pub mod quadrature;
pub mod rate;
pub mod sweep;
pub mod table;
