//! The three worked games plus the one-round matrix-game testbed.

pub mod auction;
pub mod bimatrix;
pub mod guessing;
pub mod ht;
