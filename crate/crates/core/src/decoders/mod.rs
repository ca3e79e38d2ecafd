//! Iterative decoders behind one configuration type.
//!
//! The bit-flipping decoders (BF, WBF, MWBF, IMWBF and both CRBF variants)
//! share one driver: each iteration flips the bit(s) of largest cost, updates
//! the syndrome, stops on an all-zero syndrome or at `i_max`, and otherwise
//! asks the decoder-specific metric to refresh its costs. SPA is a separate
//! flooding-schedule message passer.

mod crbf;
mod spa;
mod wbf;

use serde::{Deserialize, Serialize};

use crate::channel::hard_decide;
use crate::error::{check_len, Error, Result};
use crate::tanner::{BinaryWord, TannerGraph};

pub use crbf::{
    decode_hard_crbf, decode_soft_crbf, reliability_ceiling, CrbfDecoder, CrbfState, StepStatus,
};
pub use spa::{decode_spa, spa_posteriors, LLR_CLAMP};
pub use wbf::{
    decode_bf, decode_imwbf, decode_mwbf, decode_wbf, decode_wbf_with_weights, wbf_weights,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Bf,
    Wbf,
    Mwbf,
    Imwbf,
    SoftCrbf,
    HardCrbf,
    Spa,
    /// Hard decisions passed through undecoded; for channel checks.
    Identity,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Bf,
        Algorithm::Wbf,
        Algorithm::Mwbf,
        Algorithm::Imwbf,
        Algorithm::SoftCrbf,
        Algorithm::HardCrbf,
        Algorithm::Spa,
        Algorithm::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bf => "bf",
            Algorithm::Wbf => "wbf",
            Algorithm::Mwbf => "mwbf",
            Algorithm::Imwbf => "imwbf",
            Algorithm::SoftCrbf => "soft-crbf",
            Algorithm::HardCrbf => "hard-crbf",
            Algorithm::Spa => "spa",
            Algorithm::Identity => "identity",
        }
    }

    /// Decoders that only see hard decisions.
    pub fn is_hard(self) -> bool {
        matches!(
            self,
            Algorithm::Bf | Algorithm::HardCrbf | Algorithm::Identity
        )
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::param(format!("unknown decoder {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipPolicy {
    /// Flip only the lowest-indexed bit among those of maximal cost.
    SingleLowestIndex,
    /// Flip every bit whose cost equals the maximum.
    AllTied,
}

/// How CRBF refreshes reliabilities and costs after a flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateMode {
    /// Recompute only entries whose inputs changed.
    Incremental,
    /// Recompute every edge reliability and every cost.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub algorithm: Algorithm,
    pub i_max: usize,
    /// Check-penalty weight of the CRBF costs.
    pub gamma: f64,
    /// Channel-term weight of IMWBF.
    pub imwbf_alpha: f64,
    pub flip_policy: FlipPolicy,
    /// Test the received word before the first flip.
    pub pre_check: bool,
    /// Initialize CRBF costs with `-y_i` instead of `-x_i y_i`.
    pub literal_init: bool,
    pub update: UpdateMode,
    /// Collect a per-iteration [`TraceRecord`] list.
    pub trace: bool,
}

impl DecoderConfig {
    /// Defaults for `g`: `gamma = 1 / dc` (mean row weight on irregular
    /// codes), `i_max = 30`, IMWBF `alpha = 1`.
    pub fn new(algorithm: Algorithm, g: &TannerGraph) -> Self {
        let dc = g.dc().map_or_else(|| g.mean_check_degree(), |d| d as f64);
        DecoderConfig {
            algorithm,
            i_max: 30,
            gamma: 1.0 / dc,
            imwbf_alpha: 1.0,
            flip_policy: FlipPolicy::SingleLowestIndex,
            pre_check: true,
            literal_init: false,
            update: UpdateMode::Incremental,
            trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.i_max < 1 {
            return Err(Error::param("i_max must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.imwbf_alpha > 0.0 && self.imwbf_alpha.is_finite()) {
            return Err(Error::param(format!(
                "IMWBF alpha must be positive, got {}",
                self.imwbf_alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flip {
    pub iteration: usize,
    pub bit: usize,
}

/// Work done by one metric refresh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    /// Edge reliabilities (or messages) recomputed.
    pub reliability_updates: usize,
    /// Bit costs recomputed.
    pub cost_updates: usize,
    /// Bits whose cost depends directly on the flip: the flipped bits and
    /// every neighbor of a check whose syndrome changed.
    pub flip_cost_updates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub flipped: Vec<usize>,
    pub max_cost: f64,
    pub syndrome_weight: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub decoded: BinaryWord,
    /// The syndrome of `decoded` is all-zero.
    pub converged: bool,
    pub iterations: usize,
    pub flips: Vec<Flip>,
    /// One entry per metric refresh, in iteration order.
    pub op_counts: Vec<OpCount>,
    /// Iterations that flipped exactly the bits flipped by the one before.
    pub oscillations: usize,
    pub trace: Vec<TraceRecord>,
}

/// Decodes the received soft values `y` with the configured algorithm.
///
/// Hard-decision decoders receive `hard_decide(y)`. `sigma` is used by SPA
/// only.
pub fn decode(
    y: &[f64],
    g: &TannerGraph,
    cfg: &DecoderConfig,
    sigma: f64,
) -> Result<DecodeOutcome> {
    match cfg.algorithm {
        Algorithm::Bf => decode_bf(&hard_decide(y), g, cfg),
        Algorithm::Wbf => decode_wbf(y, g, cfg),
        Algorithm::Mwbf => decode_mwbf(y, g, cfg),
        Algorithm::Imwbf => decode_imwbf(y, g, cfg),
        Algorithm::SoftCrbf => decode_soft_crbf(y, g, cfg),
        Algorithm::HardCrbf => decode_hard_crbf(&hard_decide(y), g, cfg),
        Algorithm::Spa => decode_spa(y, g, cfg, sigma),
        Algorithm::Identity => decode_identity(y, g),
    }
}

fn decode_identity(y: &[f64], g: &TannerGraph) -> Result<DecodeOutcome> {
    check_len(g.n_vars(), y.len())?;
    let decoded = hard_decide(y);
    let converged = crate::tanner::syndrome(&decoded, g)?.is_zero();
    Ok(DecodeOutcome {
        decoded,
        converged,
        iterations: 0,
        flips: Vec::new(),
        op_counts: Vec::new(),
        oscillations: 0,
        trace: Vec::new(),
    })
}

/// Largest cost and the bits to flip under `policy`.
fn select_flips<T: Copy + PartialOrd>(costs: &[T], policy: FlipPolicy) -> (T, Vec<usize>) {
    let mut best = 0;
    for (i, c) in costs.iter().enumerate().skip(1) {
        if *c > costs[best] {
            best = i;
        }
    }
    let max = costs[best];
    let bits = match policy {
        FlipPolicy::SingleLowestIndex => vec![best],
        FlipPolicy::AllTied => (best..costs.len()).filter(|&i| costs[i] == max).collect(),
    };
    (max, bits)
}

/// Per-bit cost that the flip driver maximizes.
pub(crate) trait FlipMetric {
    type Cost: Copy + PartialOrd + Into<f64>;

    fn costs(&self) -> &[Self::Cost];

    /// Refresh after a flip. `x` and `s` hold the new decisions and bipolar
    /// syndrome, `prev_s` the syndrome before the flip. `changed_checks` is
    /// sorted and lists exactly the checks with `s != prev_s`.
    fn update(
        &mut self,
        g: &TannerGraph,
        x: &[i8],
        prev_s: &[i8],
        s: &[i8],
        flipped: &[usize],
        changed_checks: &[usize],
    ) -> OpCount;
}

/// Shared bit-flipping loop, advanced one iteration per [`FlipLoop::step`].
pub(crate) struct FlipLoop<'g, M> {
    g: &'g TannerGraph,
    cfg: DecoderConfig,
    metric: M,
    x: Vec<i8>,
    s: Vec<i8>,
    prev_s: Vec<i8>,
    unsatisfied: usize,
    iter: usize,
    status: StepStatus,
    flips: Vec<Flip>,
    op_counts: Vec<OpCount>,
    oscillations: usize,
    last_selection: Vec<usize>,
    trace: Vec<TraceRecord>,
    touched: Vec<usize>,
    changed: Vec<usize>,
}

impl<'g, M: FlipMetric> FlipLoop<'g, M> {
    /// `x` is the initial bipolar decision; `metric` must already hold the
    /// costs for it.
    pub(crate) fn new(g: &'g TannerGraph, cfg: &DecoderConfig, x: Vec<i8>, metric: M) -> Self {
        let s = bipolar_syndrome(g, &x);
        let unsatisfied = s.iter().filter(|&&v| v < 0).count();
        FlipLoop {
            g,
            cfg: *cfg,
            metric,
            prev_s: s.clone(),
            x,
            s,
            unsatisfied,
            iter: 0,
            status: StepStatus::Running,
            flips: Vec::new(),
            op_counts: Vec::new(),
            oscillations: 0,
            last_selection: Vec::new(),
            trace: Vec::new(),
            touched: Vec::new(),
            changed: Vec::new(),
        }
    }

    pub(crate) fn metric(&self) -> &M {
        &self.metric
    }

    pub(crate) fn x(&self) -> &[i8] {
        &self.x
    }

    pub(crate) fn s(&self) -> &[i8] {
        &self.s
    }

    pub(crate) fn prev_s(&self) -> &[i8] {
        &self.prev_s
    }

    pub(crate) fn iteration(&self) -> usize {
        self.iter
    }

    pub(crate) fn status(&self) -> StepStatus {
        self.status
    }

    pub(crate) fn syndrome_is_zero(&self) -> bool {
        self.unsatisfied == 0
    }

    pub(crate) fn last_selection(&self) -> &[usize] {
        &self.last_selection
    }

    pub(crate) fn step(&mut self) -> StepStatus {
        if self.status != StepStatus::Running {
            return self.status;
        }
        self.iter += 1;
        let (max_cost, selection) = select_flips(self.metric.costs(), self.cfg.flip_policy);

        self.prev_s.copy_from_slice(&self.s);
        self.touched.clear();
        for &e in &selection {
            self.x[e] = -self.x[e];
            for &j in self.g.var_neighbors(e) {
                self.s[j] = -self.s[j];
                self.touched.push(j);
            }
            self.flips.push(Flip {
                iteration: self.iter,
                bit: e,
            });
        }
        self.touched.sort_unstable();
        self.touched.dedup();
        self.changed.clear();
        for &j in &self.touched {
            if self.s[j] != self.prev_s[j] {
                self.changed.push(j);
                if self.s[j] < 0 {
                    self.unsatisfied += 1;
                } else {
                    self.unsatisfied -= 1;
                }
            }
        }

        if selection == self.last_selection {
            self.oscillations += 1;
        }
        if self.cfg.trace {
            self.trace.push(TraceRecord {
                iteration: self.iter,
                flipped: selection.clone(),
                max_cost: max_cost.into(),
                syndrome_weight: self.unsatisfied,
            });
        }
        self.last_selection = selection;

        if self.unsatisfied == 0 {
            self.status = StepStatus::Converged;
        } else if self.iter >= self.cfg.i_max {
            self.status = StepStatus::MaxIterations;
        } else {
            let ops = self.metric.update(
                self.g,
                &self.x,
                &self.prev_s,
                &self.s,
                &self.last_selection,
                &self.changed,
            );
            self.op_counts.push(ops);
        }
        self.status
    }

    /// Runs to completion, honoring `pre_check`.
    pub(crate) fn run(mut self) -> DecodeOutcome {
        if self.cfg.pre_check && self.unsatisfied == 0 {
            self.status = StepStatus::Converged;
        }
        while self.step() == StepStatus::Running {}
        self.into_outcome()
    }

    pub(crate) fn into_outcome(self) -> DecodeOutcome {
        DecodeOutcome {
            decoded: BinaryWord::new(self.x.iter().map(|&v| u8::from(v < 0)).collect())
                .expect("0/1 by construction"),
            converged: self.unsatisfied == 0,
            iterations: self.iter,
            flips: self.flips,
            op_counts: self.op_counts,
            oscillations: self.oscillations,
            trace: self.trace,
        }
    }
}

pub(crate) fn bipolar_syndrome(g: &TannerGraph, x: &[i8]) -> Vec<i8> {
    g.all_check_neighbors()
        .iter()
        .map(|row| row.iter().fold(1i8, |acc, &i| acc * x[i]))
        .collect()
}

pub(crate) fn bipolar_from_bits(z: &BinaryWord) -> Vec<i8> {
    z.bits().iter().map(|&b| 1 - 2 * b as i8).collect()
}

/// Bits whose cost reads a changed decision or syndrome: the flipped bits
/// and the neighbors of every changed check. Sorted, deduplicated.
pub(crate) fn flip_neighborhood(
    g: &TannerGraph,
    flipped: &[usize],
    changed_checks: &[usize],
    out: &mut Vec<usize>,
) {
    out.clear();
    out.extend_from_slice(flipped);
    for &j in changed_checks {
        out.extend_from_slice(g.check_neighbors(j));
    }
    out.sort_unstable();
    out.dedup();
}

/// Largest value, its position, and the largest value at any other position.
///
/// For a single value the runner-up is `None`.
pub(crate) fn top_two(values: impl Iterator<Item = f64>) -> (f64, usize, Option<f64>) {
    let mut best = f64::NEG_INFINITY;
    let mut best_at = 0;
    let mut second: Option<f64> = None;
    for (k, v) in values.enumerate() {
        if k == 0 {
            best = v;
        } else if v > best {
            second = Some(best);
            best = v;
            best_at = k;
        } else {
            second = Some(second.map_or(v, |s| s.max(v)));
        }
    }
    (best, best_at, second)
}
