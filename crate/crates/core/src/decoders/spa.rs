//! Log-domain sum-product decoding with a flooding schedule.
//!
//! Channel LLRs are `2 y_i / sigma^2` (positive favors bit 0). Check-to-bit
//! messages use the tanh rule with leave-one-out products taken from prefix
//! and suffix products, so a zero factor never forces a division. Every
//! message and posterior is clamped to `[-LLR_CLAMP, LLR_CLAMP]`.

use super::{DecodeOutcome, DecoderConfig, OpCount, StepStatus};
use crate::error::{check_len, Error, Result};
use crate::tanner::{BinaryWord, TannerGraph};

pub const LLR_CLAMP: f64 = 30.0;

struct Spa<'g> {
    g: &'g TannerGraph,
    channel: Vec<f64>,
    // bit-to-check and check-to-bit messages, edge-id order
    to_check: Vec<f64>,
    to_bit: Vec<f64>,
    posterior: Vec<f64>,
    prefix: Vec<f64>,
    tanh: Vec<f64>,
}

impl<'g> Spa<'g> {
    fn new(y: &[f64], g: &'g TannerGraph, sigma: f64) -> Result<Self> {
        check_len(g.n_vars(), y.len())?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!(
                "SPA needs a positive noise deviation, got {sigma}"
            )));
        }
        let scale = 2.0 / (sigma * sigma);
        let channel: Vec<f64> = y.iter().map(|v| clamp(scale * v)).collect();
        let mut to_check = vec![0.0; g.n_edges()];
        for i in 0..g.n_vars() {
            for &e in g.var_edges(i) {
                to_check[e] = channel[i];
            }
        }
        Ok(Spa {
            g,
            posterior: channel.clone(),
            channel,
            to_check,
            to_bit: vec![0.0; g.n_edges()],
            prefix: Vec::new(),
            tanh: Vec::new(),
        })
    }

    fn iterate(&mut self) {
        let g = self.g;
        for j in 0..g.n_checks() {
            let edges = g.check_edges(j);
            self.tanh.clear();
            self.tanh
                .extend(edges.clone().map(|e| (0.5 * self.to_check[e]).tanh()));
            self.prefix.clear();
            let mut acc = 1.0;
            for &v in &self.tanh {
                self.prefix.push(acc);
                acc *= v;
            }
            let mut suffix = 1.0;
            for (k, e) in edges.enumerate().rev() {
                let p = self.prefix[k] * suffix;
                suffix *= self.tanh[k];
                self.to_bit[e] = clamp(2.0 * p.atanh());
            }
        }
        for i in 0..g.n_vars() {
            let total: f64 =
                self.channel[i] + g.var_edges(i).iter().map(|&e| self.to_bit[e]).sum::<f64>();
            for &e in g.var_edges(i) {
                self.to_check[e] = clamp(total - self.to_bit[e]);
            }
            self.posterior[i] = clamp(total);
        }
    }

    fn decisions(&self) -> BinaryWord {
        BinaryWord::new(self.posterior.iter().map(|&l| u8::from(l < 0.0)).collect()).expect("0/1")
    }
}

fn clamp(v: f64) -> f64 {
    // atanh(+-1) is infinite; NaN cannot arise from finite inputs here
    v.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// Runs SPA until the hard decisions satisfy every check or `cfg.i_max`
/// iterations pass. At least one iteration always runs.
pub fn decode_spa(
    y: &[f64],
    g: &TannerGraph,
    cfg: &DecoderConfig,
    sigma: f64,
) -> Result<DecodeOutcome> {
    cfg.validate()?;
    let mut spa = Spa::new(y, g, sigma)?;
    let mut op_counts = Vec::new();
    let mut status = StepStatus::Running;
    let mut iterations = 0;
    let mut decoded = spa.decisions();
    while status == StepStatus::Running {
        spa.iterate();
        iterations += 1;
        op_counts.push(OpCount {
            reliability_updates: g.n_edges(),
            cost_updates: g.n_vars(),
            flip_cost_updates: 0,
        });
        decoded = spa.decisions();
        if crate::tanner::syndrome(&decoded, g)?.is_zero() {
            status = StepStatus::Converged;
        } else if iterations >= cfg.i_max {
            status = StepStatus::MaxIterations;
        }
    }
    Ok(DecodeOutcome {
        decoded,
        converged: status == StepStatus::Converged,
        iterations,
        flips: Vec::new(),
        op_counts,
        oscillations: 0,
        trace: Vec::new(),
    })
}

/// Posterior LLRs after exactly `iterations` flooding iterations, with no
/// syndrome stop.
pub fn spa_posteriors(
    y: &[f64],
    g: &TannerGraph,
    sigma: f64,
    iterations: usize,
) -> Result<Vec<f64>> {
    let mut spa = Spa::new(y, g, sigma)?;
    for _ in 0..iterations {
        spa.iterate();
    }
    Ok(spa.posterior)
}
