//! Detection statistics and device modelling for time-gated single-photon
//! avalanche diodes (SPADs) and spatially-multiplexed photon-number-resolving
//! arrays built from them.
//!
//! The crate is organised by concern:
//!
//! * [`detector`]: per-gate dark-count and photo-count probabilities.
//! * [`npd`]: closed-form click / success / fidelity figures of merit for
//!   photon-number detection and dual-rail qubit detection, plus sweeps.
//! * [`oracle`]: exhaustive enumeration and seeded Monte Carlo used to check
//!   the closed forms.
//! * [`dcr`]: bulk/surface dark-current density fits and geometric DCR
//!   projection.
//! * [`photonic`]: multilayer slab mode solver and eigenmode-expansion QE
//!   estimate for the step-coupled waveguide detector.
//! * [`mesh`]: MZI meshes, permanents and end-to-end detection experiments.

// Range checks are written as `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dcr;
pub mod detector;
mod error;
pub mod format;
pub mod mesh;
pub mod npd;
pub mod oracle;
pub mod photonic;
mod util;

pub use error::{Error, Result};
