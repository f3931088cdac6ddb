//! Low-resolution converter modelling for mmWave digital beamforming.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod error;
pub mod network;
pub mod ofdm;
pub mod power;
pub mod quantization;
pub mod sinr;
pub mod tx_chain;
pub mod units;

pub use error::{Error, Result};
