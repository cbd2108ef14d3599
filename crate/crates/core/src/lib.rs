//! Interim cores of cooperative games and exchange economies with
//! asymmetric information on a finite state space.
//!
//! The crate covers the partition model of information ([`probability`]),
//! games and economies with delivery-stage measurability ([`games`]),
//! LP-exact blocking tests for several core concepts ([`blocking`]), the
//! auxiliary game and finitely generated NTU game used to construct core
//! points ([`derived`]), and Scarf's pivoting algorithm ([`scarf`]).

pub mod blocking;
pub mod coalition;
pub mod derived;
pub mod error;
pub mod fixtures;
pub mod games;
mod lp;
pub mod probability;
pub mod scarf;

pub use coalition::Coalition;
pub use error::{Error, Result};
