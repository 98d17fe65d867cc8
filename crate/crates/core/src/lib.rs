//! Interval type-2 TSK fuzzy classifiers trained with an extreme-learning
//! scheme, plus the fuzzy PD controllers and tank simulator that use them.

pub mod bench;
pub mod control;
pub mod data;
pub mod error;
pub mod fuzzy;
pub mod io;
pub mod reduce;
pub mod rng;
pub mod sim;
pub mod train;
pub mod tsk;

pub use error::{FelmError, Result};
