// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod limit;
pub mod profile;
pub mod quadrature;
pub mod riemann;
pub mod roots;
pub mod scenarios;
pub mod wft;

pub use eos::{ClassifierThresholds, EosParams, StateClass};
pub use error::{Error, Result};
pub use profile::{Datum, Profile};
pub use riemann::{State, Wave, WaveFamily, WaveFan, WaveKind};
pub use wft::{Front, FrontConfiguration, FrontKind, History, InteractionRecord, SimConfig};
