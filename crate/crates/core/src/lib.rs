pub mod agf;
pub mod check;
pub mod cli;
pub mod drinfeld;
pub mod error;
pub mod ff;
pub mod laurent;
pub mod partitions;
pub mod periods;
pub mod suite;
pub mod tate;

pub use error::{Error, Result};
