pub mod ansatz;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod io;
pub mod linalg;
pub mod localize;
pub mod scrambling;

pub use error::{Error, Result};
