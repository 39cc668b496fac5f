pub mod arith;
pub mod cache;
pub mod classes;
pub mod cli;
pub mod decadic;
pub mod error;
pub mod primes;
pub mod speed;
pub mod verify;

pub use error::{Error, Result};
