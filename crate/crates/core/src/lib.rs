//! Wach modules of crystalline representations of `G_{Q_p}` with small
//! Hodge-Tate weights, computed over truncated power series rings.

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod cyclo;
pub mod error;
pub mod linalg;
pub mod padic;
pub mod report;
pub mod ring;
pub mod series;
pub mod wach;

pub use error::{Error, Result};
