//! Plasmon modes of graphene nanoribbons and colliding-plasmon gate metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod conductivity;
pub mod dispersion;
pub mod error;
pub mod gate;
pub mod numerics;
pub mod rates;
pub mod ribbon;
pub mod scattering;
pub mod units;

pub use conductivity::{LinearModel, Material, Sigma1, Sigma3Model, Sigma3Plugin, Sigma3Table};
pub use error::{Error, Result};
pub use gate::{evaluate_gate_point, GateInputs, GateModel, GatePoint, MaskReason};
pub use ribbon::{ModeCache, RibbonGrid, RibbonModeSet};
pub use scattering::{GaussianPulse, ScatterParams};
