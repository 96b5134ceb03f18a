//! Exact arithmetic for truncated Witt vectors, Laurent series over them, formal
//! group laws with their Lubin-Tate deformations, theta-algebra structures on
//! `W_n k((x))`, and the Artin-Schreier tower of the localized cooperations ring.

pub mod cli;
pub mod deformations;
pub mod error;
pub mod fgl;
pub mod laurent;
pub mod ring;
pub mod series;
pub mod theta;
pub mod tower;
pub mod witt;

pub use error::{Error, Result};
