pub mod cli;
pub mod duality;
pub mod error;
pub mod excess;
pub mod frames;
pub mod gallery;
pub mod operator;
pub mod sequence;

pub use error::{FrameError, Result};
