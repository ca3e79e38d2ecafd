//! BPSK over AWGN: modulation, noise, hard decisions and the Eb/N0 convention.
//!
//! Energy per coded symbol is 1, so at code rate `R` the noise standard
//! deviation is `sigma = sqrt(1 / (2 R 10^(EbN0/10)))`.
//!
//! Noise streams are counter-based: [`frame_rng`] derives an independent
//! ChaCha8 stream from `(seed, Eb/N0, frame index)` and the samples of one
//! frame are drawn from it in bit order with `rand_distr::StandardNormal`
//! (ziggurat). Any frame can be replayed without generating its
//! predecessors, and results do not depend on how frames are spread over
//! worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::tanner::{BinaryWord, BipolarWord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64) -> Result<Self> {
        Ok(ChannelParams {
            ebn0_db,
            rate,
            sigma: ebn0_to_sigma(ebn0_db, rate)?,
        })
    }
}

/// One channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub codeword: BinaryWord,
    pub y: Vec<f64>,
    pub z: BinaryWord,
}

impl FrameSample {
    pub fn generate<R: Rng + ?Sized>(
        codeword: BinaryWord,
        sigma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let y = transmit(&bpsk_modulate(&codeword), sigma, rng)?;
        let z = hard_decide(&y);
        Ok(FrameSample { codeword, y, z })
    }
}

/// `c_i -> 1 - 2 c_i`.
pub fn bpsk_modulate(c: &BinaryWord) -> BipolarWord {
    c.to_bipolar()
}

/// Adds i.i.d. `N(0, sigma^2)` noise. `sigma = 0` is allowed and returns the
/// symbols unchanged.
pub fn transmit<R: Rng + ?Sized>(c_hat: &BipolarWord, sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!(
            "noise deviation must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(c_hat.values().iter().map(|&v| v as f64).collect());
    }
    Ok(c_hat
        .values()
        .iter()
        .map(|&v| {
            let n: f64 = rng.sample(StandardNormal);
            v as f64 + sigma * n
        })
        .collect())
}

/// `z_i = 0` if `y_i >= 0`, else 1. Zero maps to 0.
pub fn hard_decide(y: &[f64]) -> BinaryWord {
    BinaryWord::new(y.iter().map(|&v| u8::from(v < 0.0)).collect()).expect("0/1 by construction")
}

pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!(
            "code rate must lie in (0, 1], got {rate}"
        )));
    }
    // +inf is the noiseless limit, sigma = 0
    if ebn0_db.is_nan() || ebn0_db == f64::NEG_INFINITY {
        return Err(Error::param(format!("invalid Eb/N0 {ebn0_db}")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

pub fn sigma_to_ebn0(sigma: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!(
            "code rate must lie in (0, 1], got {rate}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::param(format!(
            "noise deviation must be > 0, got {sigma}"
        )));
    }
    Ok(10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10())
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Uncoded hard-decision bit error probability at `ebn0_db` and `rate`.
pub fn raw_ber(ebn0_db: f64, rate: f64) -> f64 {
    q_function((2.0 * rate * 10f64.powf(ebn0_db / 10.0)).sqrt())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Random stream for one frame.
///
/// The ChaCha key is expanded from `seed` mixed with the bit pattern of
/// `ebn0_db`; the 64-bit stream id is the frame index. Every decoder run at
/// the same Eb/N0 with the same seed therefore sees identical noise.
pub fn frame_rng(seed: u64, ebn0_db: f64, frame: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(ebn0_db.to_bits()));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(frame);
    rng
}
