pub mod classical;
pub mod cli;
pub mod credal;
pub mod error;
pub mod game;
pub mod linalg;
pub mod measurement;
pub mod optim;

pub use error::{Error, Result};
