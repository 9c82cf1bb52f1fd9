pub mod error;
pub mod geodesy;
pub mod spatial_index;

pub use error::{Error, Result};
pub mod cli;
pub mod geolocate;
pub mod harness;
pub mod optics;
pub mod terrain;
pub mod uncertainty;
