//! Multiple-quantum NMR dynamics of dipolar-coupled spin-1/2 pairs and
//! nearest-neighbour chains with phenomenological spin-lattice relaxation.
//!
//! Each observable is available twice: from exact density-matrix propagation
//! ([`dynamics`], [`coherence::extract_spectrum`],
//! [`entanglement::concurrence_numeric`]) and from closed forms
//! ([`coherence::closed_form_pair`], [`coherence::closed_form_chain`],
//! [`entanglement::concurrence_closed_form`]). The two routes share no code
//! beyond the parameter types, so agreement between them is a real check.
//!
//! ```
//! use std::f64::consts::PI;
//! use mqnmr::{closed_form_pair, extract_spectrum, ExperimentParams, SpinSystem};
//!
//! // D = 1 rad/s, Dτ = 1, τ/T_MQ = 0.5, β = 6
//! let params = ExperimentParams::from_dimensionless(1.0, 1.0, 0.5, 6.0)?;
//! let numeric = extract_spectrum(&SpinSystem::pair(), &params, 2)?;
//! let exact = closed_form_pair(&params);
//! assert!((numeric.get(2) - exact.get(2)).abs() < 1e-10);
//! # let _ = PI;
//! # Ok::<(), mqnmr::Error>(())
//! ```

pub mod coherence;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod linalg;
pub mod spin;

pub use coherence::{
    closed_form_chain, closed_form_pair, extract_spectrum, regime_check, CoherenceSpectrum, RegimeDiagnostic,
};
pub use dynamics::{
    longitudinal_magnetization, propagate_full, propagate_preparation, Experiment, ExperimentParams,
    RelaxationTime, StageDensities,
};
pub use entanglement::{
    concurrence_closed_form, concurrence_from_coherences, concurrence_numeric, entanglement_fluctuation,
    onset_temperature, spin_flip, ConcurrenceResult,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use spin::{PhysicalParams, SpinSystem, Thermal};

// The guide under book/ is compiled as doctests so its snippets cannot drift.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/spin-systems.md")]
    mod spin_systems {}
    #[doc = include_str!("../../../book/src/relaxation.md")]
    mod relaxation {}
    #[doc = include_str!("../../../book/src/coherences.md")]
    mod coherences {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
