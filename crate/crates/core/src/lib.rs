//! Check-reliability-based bit-flipping (CRBF) decoding of binary LDPC codes,
//! with the classic bit-flipping baselines, a sum-product reference decoder
//! and a Monte Carlo BER harness.

pub mod channel;
pub mod cli;
pub mod decoders;
pub mod error;
pub mod metrics;
pub mod sim;
pub mod tanner;

pub use decoders::{decode, Algorithm, DecodeOutcome, DecoderConfig};
pub use error::{Error, Result};
pub use tanner::{BinaryWord, BipolarWord, TannerGraph};
