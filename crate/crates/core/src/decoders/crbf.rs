//! Check-reliability-based bit flipping (CRBF).
//!
//! State per iteration `l`: decisions `x`, bipolar syndrome `s`, bit costs
//! `E` and one reliability `R_ji` per edge. Starting from `R = 1` and
//! `E_i = -(x_i y_i + gamma sum_j s_j)`, every iteration
//!
//! 1. flips the bit of largest `E^{l-1}`,
//! 2. stops if the syndrome clears or `l = i_max`,
//! 3. sets `R^l_ji = max(-R*_ji, 0)` with
//!    `R*_ji = max_{i' in N(j) \ i} (E^{l-1}_i' - gamma s^{l-1}_j R^{l-1}_ji')`,
//! 4. sets `E^l_i = -(x^l_i y_i + gamma sum_{j in M(i)} R^l_ji s^l_j)`.
//!
//! Steps 3 and 4 read only `l - 1` buffers before writing `l` buffers. The
//! hard variant substitutes the bipolar hard decisions for `y`.
//!
//! The leave-one-out maximum in step 3 is taken from a per-check
//! (max, argmax, runner-up) triple. A check with a single variable has no
//! other variable to take the maximum over and gives that edge `R = 0`.
//!
//! [`UpdateMode::Incremental`] recomputes a check's reliabilities only when
//! one of their inputs changed bitwise since the previous iteration, and a
//! bit's cost only when its decision, one of its syndromes, or one of its
//! reliabilities changed. Both modes evaluate the same expressions, so they
//! produce identical state.

use super::{
    bipolar_from_bits, bipolar_syndrome, flip_neighborhood, top_two, DecodeOutcome, DecoderConfig,
    FlipLoop, FlipMetric, OpCount, UpdateMode,
};
use crate::error::{check_len, Result};
use crate::tanner::{BinaryWord, TannerGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Running,
    Converged,
    MaxIterations,
}

/// Snapshot of the decoder after the last completed refresh.
///
/// `prev_*` hold the `l - 1` buffers. Before the first refresh both copies
/// hold the initialization. When decoding stops at a flip, `x_hat` and
/// `s_hat` are already at iteration `l` while costs and reliabilities stay
/// at `l - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbfState {
    pub x_hat: Vec<i8>,
    pub s_hat: Vec<i8>,
    pub costs: Vec<f64>,
    pub rel: Vec<f64>,
    pub prev_s_hat: Vec<i8>,
    pub prev_costs: Vec<f64>,
    pub prev_rel: Vec<f64>,
    pub iter: usize,
}

pub(crate) struct CrbfMetric {
    input: Vec<f64>,
    gamma: f64,
    mode: UpdateMode,
    costs: Vec<f64>,
    prev_costs: Vec<f64>,
    rel: Vec<f64>,
    prev_rel: Vec<f64>,
    refreshes: usize,
    // what changed between the last two refreshes
    changed_costs: Vec<usize>,
    changed_rel_checks: Vec<usize>,
    last_changed_checks: Vec<usize>,
    check_mark: Vec<bool>,
    var_mark: Vec<bool>,
    dirty: Vec<usize>,
    neighborhood: Vec<usize>,
}

impl CrbfMetric {
    fn new(g: &TannerGraph, cfg: &DecoderConfig, input: Vec<f64>, x: &[i8]) -> Self {
        let s = bipolar_syndrome(g, x);
        let gamma = cfg.gamma;
        let costs: Vec<f64> = (0..g.n_vars())
            .map(|i| {
                let checks: f64 = g.var_neighbors(i).iter().map(|&j| s[j] as f64).sum();
                if cfg.literal_init {
                    -input[i] - gamma * checks
                } else {
                    -(x[i] as f64 * input[i] + gamma * checks)
                }
            })
            .collect();
        let rel = vec![1.0; g.n_edges()];
        CrbfMetric {
            input,
            gamma,
            mode: cfg.update,
            prev_costs: costs.clone(),
            costs,
            prev_rel: rel.clone(),
            rel,
            refreshes: 0,
            changed_costs: Vec::new(),
            changed_rel_checks: Vec::new(),
            last_changed_checks: Vec::new(),
            check_mark: vec![false; g.n_checks()],
            var_mark: vec![false; g.n_vars()],
            dirty: Vec::new(),
            neighborhood: Vec::new(),
        }
    }

    fn cost(&self, g: &TannerGraph, x: &[i8], s: &[i8], i: usize) -> f64 {
        let mut acc = 0.0;
        for (&j, &e) in g.var_neighbors(i).iter().zip(g.var_edges(i)) {
            acc += self.rel[e] * s[j] as f64;
        }
        -(x[i] as f64 * self.input[i] + self.gamma * acc)
    }

    /// Recomputes `R^l` for check `j` into `rel`; true if any entry changed.
    fn refresh_check(&mut self, g: &TannerGraph, prev_s: &[i8], j: usize) -> bool {
        let edges = g.check_edges(j);
        let sj = prev_s[j] as f64;
        let gamma = self.gamma;
        let (max, at, second) = top_two(
            g.check_neighbors(j)
                .iter()
                .zip(edges.clone())
                .map(|(&i, e)| self.costs[i] - gamma * sj * self.prev_rel[e]),
        );
        let mut changed = false;
        for (k, e) in edges.enumerate() {
            let unreliability = if k == at { second } else { Some(max) };
            let r = unreliability.map_or(0.0, |u| (-u).max(0.0));
            if r.to_bits() != self.prev_rel[e].to_bits() {
                changed = true;
            }
            self.rel[e] = r;
        }
        changed
    }
}

impl FlipMetric for CrbfMetric {
    type Cost = f64;

    fn costs(&self) -> &[f64] {
        &self.costs
    }

    fn update(
        &mut self,
        g: &TannerGraph,
        x: &[i8],
        prev_s: &[i8],
        s: &[i8],
        flipped: &[usize],
        changed_checks: &[usize],
    ) -> OpCount {
        let full = self.mode == UpdateMode::Full || self.refreshes == 0;
        self.prev_rel.copy_from_slice(&self.rel);

        // step 3: reliabilities
        self.dirty.clear();
        if full {
            self.dirty.extend(0..g.n_checks());
        } else {
            for &j in self
                .last_changed_checks
                .iter()
                .chain(&self.changed_rel_checks)
            {
                if !self.check_mark[j] {
                    self.check_mark[j] = true;
                    self.dirty.push(j);
                }
            }
            for &i in &self.changed_costs {
                for &j in g.var_neighbors(i) {
                    if !self.check_mark[j] {
                        self.check_mark[j] = true;
                        self.dirty.push(j);
                    }
                }
            }
            self.dirty.sort_unstable();
        }
        let mut reliability_updates = 0;
        let dirty = std::mem::take(&mut self.dirty);
        self.changed_rel_checks.clear();
        for &j in &dirty {
            self.check_mark[j] = false;
            reliability_updates += g.check_neighbors(j).len();
            if self.refresh_check(g, prev_s, j) {
                self.changed_rel_checks.push(j);
            }
        }
        self.dirty = dirty;

        // step 4: costs
        flip_neighborhood(g, flipped, changed_checks, &mut self.neighborhood);
        let flip_cost_updates = self.neighborhood.len();
        self.prev_costs.copy_from_slice(&self.costs);
        let mut targets = std::mem::take(&mut self.dirty);
        targets.clear();
        if full {
            targets.extend(0..g.n_vars());
        } else {
            for &i in &self.neighborhood {
                self.var_mark[i] = true;
                targets.push(i);
            }
            for &j in &self.changed_rel_checks {
                for (e, &i) in g.check_edges(j).zip(g.check_neighbors(j)) {
                    if !self.var_mark[i] && self.rel[e].to_bits() != self.prev_rel[e].to_bits() {
                        self.var_mark[i] = true;
                        targets.push(i);
                    }
                }
            }
        }
        self.changed_costs.clear();
        for &i in &targets {
            self.var_mark[i] = false;
            let c = self.cost(g, x, s, i);
            if c.to_bits() != self.costs[i].to_bits() {
                self.changed_costs.push(i);
            }
            self.costs[i] = c;
        }
        let cost_updates = targets.len();
        self.dirty = targets;

        self.last_changed_checks.clear();
        self.last_changed_checks.extend_from_slice(changed_checks);
        self.refreshes += 1;
        OpCount {
            reliability_updates,
            cost_updates,
            flip_cost_updates,
        }
    }
}

/// Upper bound on any check reliability: `max_i (|input_i| + gamma |M(i)|)`.
pub fn reliability_ceiling(input: &[f64], g: &TannerGraph, gamma: f64) -> f64 {
    input
        .iter()
        .enumerate()
        .map(|(i, v)| v.abs() + gamma * g.var_neighbors(i).len() as f64)
        .fold(0.0, f64::max)
}

/// Step-by-step CRBF decoder, exposing its state between iterations.
pub struct CrbfDecoder<'g> {
    inner: FlipLoop<'g, CrbfMetric>,
    ceiling: f64,
}

impl<'g> CrbfDecoder<'g> {
    /// Soft CRBF on received values `y`.
    pub fn soft(y: &[f64], g: &'g TannerGraph, cfg: &DecoderConfig) -> Result<Self> {
        check_len(g.n_vars(), y.len())?;
        cfg.validate()?;
        let x = bipolar_from_bits(&crate::channel::hard_decide(y));
        Ok(Self::with_input(g, cfg, x, y.to_vec()))
    }

    /// Hard CRBF on hard decisions `z`; the bipolar `z` replaces `y`.
    pub fn hard(z: &BinaryWord, g: &'g TannerGraph, cfg: &DecoderConfig) -> Result<Self> {
        check_len(g.n_vars(), z.len())?;
        cfg.validate()?;
        let x = bipolar_from_bits(z);
        let input = x.iter().map(|&v| v as f64).collect();
        Ok(Self::with_input(g, cfg, x, input))
    }

    fn with_input(g: &'g TannerGraph, cfg: &DecoderConfig, x: Vec<i8>, input: Vec<f64>) -> Self {
        let ceiling = reliability_ceiling(&input, g, cfg.gamma);
        let metric = CrbfMetric::new(g, cfg, input, &x);
        CrbfDecoder {
            inner: FlipLoop::new(g, cfg, x, metric),
            ceiling,
        }
    }

    pub fn state(&self) -> CrbfState {
        let m = self.inner.metric();
        CrbfState {
            x_hat: self.inner.x().to_vec(),
            s_hat: self.inner.s().to_vec(),
            costs: m.costs.clone(),
            rel: m.rel.clone(),
            prev_s_hat: self.inner.prev_s().to_vec(),
            prev_costs: m.prev_costs.clone(),
            prev_rel: m.prev_rel.clone(),
            iter: self.inner.iteration(),
        }
    }

    pub fn rel(&self) -> &[f64] {
        &self.inner.metric().rel
    }

    pub fn costs(&self) -> &[f64] {
        &self.inner.metric().costs
    }

    pub fn iteration(&self) -> usize {
        self.inner.iteration()
    }

    pub fn status(&self) -> StepStatus {
        self.inner.status()
    }

    /// Bits flipped by the most recent step.
    pub fn last_flipped(&self) -> &[usize] {
        self.inner.last_selection()
    }

    pub fn syndrome_is_zero(&self) -> bool {
        self.inner.syndrome_is_zero()
    }

    /// `max_i (|input_i| + gamma |M(i)|)` for this frame.
    pub fn reliability_ceiling(&self) -> f64 {
        self.ceiling
    }

    /// One pass of flip, syndrome test and refresh. Ignores `pre_check`.
    pub fn step(&mut self) -> StepStatus {
        self.inner.step()
    }

    pub fn run(self) -> DecodeOutcome {
        self.inner.run()
    }

    pub fn into_outcome(self) -> DecodeOutcome {
        self.inner.into_outcome()
    }
}

pub fn decode_soft_crbf(y: &[f64], g: &TannerGraph, cfg: &DecoderConfig) -> Result<DecodeOutcome> {
    Ok(CrbfDecoder::soft(y, g, cfg)?.run())
}

pub fn decode_hard_crbf(
    z: &BinaryWord,
    g: &TannerGraph,
    cfg: &DecoderConfig,
) -> Result<DecodeOutcome> {
    Ok(CrbfDecoder::hard(z, g, cfg)?.run())
}
