//! Command line, file formats and parallel Monte Carlo on top of
//! `symbreak-core`.

pub mod cli;
pub mod formats;
pub mod montecarlo;
