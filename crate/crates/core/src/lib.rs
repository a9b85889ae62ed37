pub mod algebroid;
pub mod bundle;
pub mod constructions;
pub mod dynamics;
pub mod error;
pub mod grobner;
pub mod modules;
pub mod polyalg;

pub use error::{Error, Result};
