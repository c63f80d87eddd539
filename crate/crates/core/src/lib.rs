pub mod arith;
pub mod asymptotics;
pub mod characters;
pub mod counting;
pub mod enumerate;
pub mod error;
pub mod group;
pub mod interval;
pub mod specfile;
pub mod stats;
pub mod units;
pub mod viability;

pub use error::{Error, Result};
