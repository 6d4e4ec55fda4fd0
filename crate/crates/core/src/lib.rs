pub mod cli;
pub mod config;
pub mod embedding;
pub mod error;
pub mod primitives;
pub mod routing;
pub mod sim;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use topology::{NetParams, RouterAddr};
