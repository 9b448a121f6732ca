//! Multiscale scale/averaging operators over grids, Lorentz-norm machinery,
//! Lagrangian (drift-skewed) parabolic cylinders, level-set and trace
//! measurements, and property-based verification suites that exercise them
//! on synthetic fields and toy periodic Navier-Stokes data.

// `!(x > 0.0)` is the NaN-rejecting form of a validation guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cantor;
pub mod error;
pub mod fft;
pub mod field;
pub mod geom;
pub mod graph;
pub mod grid;
pub mod ladder;
pub mod lagrangian;
pub mod msf;
pub mod multiscale;
pub mod norms;
pub mod ns;
pub mod separation;
pub mod summer;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Extension, Field, ScalarField, VectorField};
pub use graph::GraphFamily;
pub use grid::{GridSpec, TimeSpec};
pub use ladder::ScaleLadder;
pub use norms::{LorentzParams, MeasuredSample};
