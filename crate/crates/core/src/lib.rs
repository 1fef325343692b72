//! Exact motivic classes of moduli of parabolic Higgs bundles, computed by
//! localization to chains and wall-crossing in the chain stability parameter.

pub mod chain;
pub mod cli;
pub mod error;
pub mod higgs;
pub mod motive;
pub mod num;
pub mod oracles;
pub mod parabolic;
pub mod stacks;
pub mod wall;

pub use error::{Error, Result};
pub use motive::{CurveData, MotiveClass};
