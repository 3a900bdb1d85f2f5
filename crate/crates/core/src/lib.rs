#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::large_enum_variant,
    clippy::too_many_arguments
)]

pub mod covariance;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod foliation;
pub mod generalized;
pub mod presets;
pub mod scenario;
pub mod spacetime;
pub mod wavefunction;
pub use error::{Error, Result};
