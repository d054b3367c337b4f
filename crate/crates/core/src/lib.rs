pub mod autodiff;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gradcheck;
pub mod heatmap;
pub mod layers;
pub mod model;
pub mod train;

pub use error::{Error, Result};
