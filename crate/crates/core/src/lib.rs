pub mod effective;
pub mod error;
pub mod model;
pub mod operator;
pub mod opspec;
pub mod oracle;
pub mod sweep;
pub mod variational;

pub use error::{Error, Result};
