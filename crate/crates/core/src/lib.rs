pub mod basis;
pub mod eig1d;
pub mod eignd;
pub mod error;
pub mod free;
pub mod hadamard;
pub mod heat;
pub mod identities;
pub mod invariants;
pub mod linalg;
pub mod model;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
