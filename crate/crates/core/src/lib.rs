//! Exact moments, spectral densities, free multiplicative convolution and
//! random-matrix Monte Carlo for the `J(r,s,a)` family of laws arising from
//! products of Ginibre and truncated unitary matrices.

pub mod cli;
pub mod error;
pub mod freeconv;
pub mod moments;
pub mod numkit;
pub mod rmt;
pub mod spectral;

pub use error::{Error, Result};
pub use moments::{ModelParams, MomentSequence};
pub use numkit::{FormalSeries, Rational};
