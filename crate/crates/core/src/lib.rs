#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod frobman;
pub mod hierarchy;
pub mod jetcalc;
pub mod linalg;
pub mod poisson;
pub mod symcore;
pub mod virasoro;
