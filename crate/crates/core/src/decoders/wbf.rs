//! Standard bit flipping and the weighted bit-flipping family.
//!
//! WBF flips the bit maximizing `-sum_{j in M(i)} s_j w_ji`, where the check
//! weight `w_ji` is the smallest `|y|` among the other variables of check
//! `j`. MWBF subtracts `|y_i|` from that metric and IMWBF subtracts
//! `alpha |y_i|`. The weights are computed once per frame. Standard BF is the
//! unweighted special case and keeps its own integer path.

use super::{
    bipolar_from_bits, flip_neighborhood, DecodeOutcome, DecoderConfig, FlipLoop, FlipMetric,
    OpCount,
};
use crate::channel::hard_decide;
use crate::error::{check_len, Result};
use crate::tanner::{BinaryWord, TannerGraph};

/// `w_ji = min_{i' in N(j) \ i} |y_i'|` per edge, in edge-id order.
///
/// A check with a single variable gives that edge weight 0.
pub fn wbf_weights(y: &[f64], g: &TannerGraph) -> Result<Vec<f64>> {
    check_len(g.n_vars(), y.len())?;
    let mut w = vec![0.0; g.n_edges()];
    for j in 0..g.n_checks() {
        let nbrs = g.check_neighbors(j);
        let (neg_min, at, neg_second) = super::top_two(nbrs.iter().map(|&i| -y[i].abs()));
        for (k, e) in g.check_edges(j).enumerate() {
            let lo = if k == at { neg_second } else { Some(neg_min) };
            w[e] = lo.map_or(0.0, |v| -v);
        }
    }
    Ok(w)
}

struct BfMetric {
    costs: Vec<i32>,
    scratch: Vec<usize>,
}

impl BfMetric {
    fn cost(g: &TannerGraph, s: &[i8], i: usize) -> i32 {
        -g.var_neighbors(i).iter().map(|&j| s[j] as i32).sum::<i32>()
    }
}

impl FlipMetric for BfMetric {
    type Cost = i32;

    fn costs(&self) -> &[i32] {
        &self.costs
    }

    fn update(
        &mut self,
        g: &TannerGraph,
        _x: &[i8],
        _prev_s: &[i8],
        s: &[i8],
        flipped: &[usize],
        changed: &[usize],
    ) -> OpCount {
        flip_neighborhood(g, flipped, changed, &mut self.scratch);
        for &i in &self.scratch {
            self.costs[i] = Self::cost(g, s, i);
        }
        OpCount {
            reliability_updates: 0,
            cost_updates: self.scratch.len(),
            flip_cost_updates: self.scratch.len(),
        }
    }
}

/// Gallager-style hard-decision bit flipping: the metric of bit `i` is the
/// number of its unsatisfied checks minus the number of satisfied ones.
pub fn decode_bf(z: &BinaryWord, g: &TannerGraph, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    check_len(g.n_vars(), z.len())?;
    cfg.validate()?;
    let x = bipolar_from_bits(z);
    let s = super::bipolar_syndrome(g, &x);
    let costs = (0..g.n_vars()).map(|i| BfMetric::cost(g, &s, i)).collect();
    let metric = BfMetric {
        costs,
        scratch: Vec::new(),
    };
    Ok(FlipLoop::new(g, cfg, x, metric).run())
}

struct WeightedMetric {
    weights: Vec<f64>,
    channel: Vec<f64>,
    costs: Vec<f64>,
    scratch: Vec<usize>,
}

impl WeightedMetric {
    fn new(g: &TannerGraph, s: &[i8], weights: Vec<f64>, channel: Vec<f64>) -> Self {
        let mut m = WeightedMetric {
            weights,
            channel,
            costs: vec![0.0; g.n_vars()],
            scratch: Vec::new(),
        };
        for i in 0..g.n_vars() {
            m.costs[i] = m.cost(g, s, i);
        }
        m
    }

    fn cost(&self, g: &TannerGraph, s: &[i8], i: usize) -> f64 {
        let mut acc = 0.0;
        for (&j, &e) in g.var_neighbors(i).iter().zip(g.var_edges(i)) {
            acc -= s[j] as f64 * self.weights[e];
        }
        acc - self.channel[i]
    }
}

impl FlipMetric for WeightedMetric {
    type Cost = f64;

    fn costs(&self) -> &[f64] {
        &self.costs
    }

    fn update(
        &mut self,
        g: &TannerGraph,
        _x: &[i8],
        _prev_s: &[i8],
        s: &[i8],
        flipped: &[usize],
        changed: &[usize],
    ) -> OpCount {
        let mut scratch = std::mem::take(&mut self.scratch);
        flip_neighborhood(g, flipped, changed, &mut scratch);
        for &i in &scratch {
            self.costs[i] = self.cost(g, s, i);
        }
        let n = scratch.len();
        self.scratch = scratch;
        OpCount {
            reliability_updates: 0,
            cost_updates: n,
            flip_cost_updates: n,
        }
    }
}

fn decode_weighted(
    y: &[f64],
    g: &TannerGraph,
    cfg: &DecoderConfig,
    weights: Vec<f64>,
    channel_weight: f64,
) -> Result<DecodeOutcome> {
    check_len(g.n_vars(), y.len())?;
    check_len(g.n_edges(), weights.len())?;
    cfg.validate()?;
    let x = bipolar_from_bits(&hard_decide(y));
    let s = super::bipolar_syndrome(g, &x);
    let channel = if channel_weight == 0.0 {
        vec![0.0; y.len()]
    } else {
        y.iter().map(|v| channel_weight * v.abs()).collect()
    };
    let metric = WeightedMetric::new(g, &s, weights, channel);
    Ok(FlipLoop::new(g, cfg, x, metric).run())
}

pub fn decode_wbf(y: &[f64], g: &TannerGraph, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    let w = wbf_weights(y, g)?;
    decode_weighted(y, g, cfg, w, 0.0)
}

/// WBF with caller-supplied per-edge weights (edge-id order).
pub fn decode_wbf_with_weights(
    y: &[f64],
    g: &TannerGraph,
    cfg: &DecoderConfig,
    weights: &[f64],
) -> Result<DecodeOutcome> {
    decode_weighted(y, g, cfg, weights.to_vec(), 0.0)
}

pub fn decode_mwbf(y: &[f64], g: &TannerGraph, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    let w = wbf_weights(y, g)?;
    decode_weighted(y, g, cfg, w, 1.0)
}

pub fn decode_imwbf(y: &[f64], g: &TannerGraph, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    let w = wbf_weights(y, g)?;
    decode_weighted(y, g, cfg, w, cfg.imwbf_alpha)
}
