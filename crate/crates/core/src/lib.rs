//! Bregman distances, left and right Bregman projections, and the
//! subdifferential analysis around them, for separable Legendre functions.

pub mod analysis;
pub mod bregman;
pub mod chebyshev;
pub mod cli;
pub mod error;
pub mod legendre;
pub mod projection;
pub mod search;
pub mod sets;
pub mod vector;

pub use error::{Error, Result};
pub use legendre::LegendreFunction;
pub use sets::{ClosedSet, Convexity, Shape};
