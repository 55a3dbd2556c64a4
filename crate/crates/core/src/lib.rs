pub mod cli;
pub mod error;
pub mod governor;
pub mod interval;
pub mod lift;
pub mod lp;
pub mod moas;
pub mod pipeline;
pub mod polykron;
pub mod polytope_io;
pub mod problem_file;
pub mod sim;

pub use error::{Error, Result};
