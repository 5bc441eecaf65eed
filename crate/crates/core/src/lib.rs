pub mod cli;
pub mod error;
pub mod flows;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod hrg;
pub mod io;
pub mod resistance;
pub mod rng;
pub mod stats;
pub mod tiling;
pub mod walks;

pub use error::{Error, Result};
