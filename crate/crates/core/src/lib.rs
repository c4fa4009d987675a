//! Magnetic-field energy harvesting from railway return currents.
//!
//! The crate models the ambient field around electrified track, the power a
//! ferrite-cored induction coil delivers into a matched load, the energy
//! gathered from recorded voltage traces and from timetables, and fits and
//! sweeps of the model against laboratory data.
//!
//! Stored electrical quantities are RMS unless a name says `_peak`.

// Negated comparisons double as NaN rejection in argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod format;
pub mod harvester;
pub mod magnetics;
pub mod optimize;
pub mod plot;
pub mod scenario;
pub mod traces;

pub use error::{Error, Result};
