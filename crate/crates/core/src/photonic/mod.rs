//! Quantum efficiency of a waveguide GeSi detector in a 2D slab model.
//!
//! [`modes`] finds guided modes of a planar multilayer, [`eme`] propagates
//! the launched input mode through the step coupler, Ge section and gap
//! with eigenmode expansion, and [`sweep`] evaluates grids of geometries
//! described by a [`scene::Scene`].

pub mod eme;
pub mod modes;
pub mod scene;
pub mod stack;
pub mod sweep;

pub use eme::{compute_qe, EmeModel, EmeOptions, Interface, QeBreakdown, SegmentReport};
pub use modes::{beat_length, solve_slab_modes, solve_slab_modes_with, Mode, ModeSet, SolverOptions};
pub use scene::Scene;
pub use stack::{CouplerGeometry, Layer, LayerStack, Mirror, Polarization};
pub use sweep::{dominant_period, local_maxima, mean_peak_spacing, qe_sweep, QeAxes, QeRow, QeSweep};
