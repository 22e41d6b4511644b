// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod listener;
pub mod logging;
pub mod osc;
pub mod session;
pub mod wavefield;
