pub mod error;
pub mod cli;
pub mod configs;
pub mod geom;
pub mod incidence;
pub mod linalg;
pub mod partition;
pub mod polyzero;
pub mod quadric;
pub mod seed;
pub mod singular;

pub use error::{Error, Result};
