//! Global and local decoding costs, and an exhaustive ML decoder for tiny
//! codes.
//!
//! For a bipolar candidate `x` and received values `y` the global cost is
//! `E(x) = -sum_i x_i y_i - alpha * sum_j s_j`, where `s_j` is the product of
//! `x` over the variables of check `j`. The local cost of bit `i` is
//! `E_i = -(x_i y_i + gamma * sum_{j in M(i)} s_j)`. On a code with constant
//! row weight `dc`, `sum_i E_i = E(x)` when `alpha = gamma * dc`.
//!
//! All sums run in ascending index order.

use crate::error::{check_len, Error, Result};
use crate::tanner::{combine_basis, null_space_basis, BinaryWord, BipolarWord, TannerGraph};

/// Largest code accepted by [`ml_brute_force`].
pub const ML_MAX_VARS: usize = 24;

/// Penalty weights of the cost functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub gamma: f64,
    pub alpha: f64,
}

impl CostParams {
    /// `alpha = gamma * dc`; fails on irregular rows or non-positive `gamma`.
    pub fn for_regular(gamma: f64, g: &TannerGraph) -> Result<Self> {
        check_positive("gamma", gamma)?;
        let dc = g
            .dc()
            .ok_or_else(|| Error::param("alpha = gamma * dc needs a constant row weight"))?;
        Ok(CostParams {
            gamma,
            alpha: gamma * dc as f64,
        })
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// `s_j = prod_{i in N(j)} x_i` for every check.
pub fn bipolar_syndrome(x_hat: &BipolarWord, g: &TannerGraph) -> Result<BipolarWord> {
    check_len(g.n_vars(), x_hat.len())?;
    let x = x_hat.values();
    Ok(BipolarWord::new(
        g.all_check_neighbors()
            .iter()
            .map(|row| row.iter().fold(1i8, |acc, &i| acc * x[i]))
            .collect(),
    )
    .expect("products of +-1"))
}

/// Correlation `sum_i x_i y_i`, the quantity ML decoding maximizes.
pub fn correlation(x_hat: &BipolarWord, y: &[f64]) -> f64 {
    x_hat
        .values()
        .iter()
        .zip(y)
        .map(|(&x, &v)| x as f64 * v)
        .sum()
}

pub fn global_cost(x_hat: &BipolarWord, y: &[f64], g: &TannerGraph, alpha: f64) -> Result<f64> {
    check_len(g.n_vars(), y.len())?;
    check_positive("alpha", alpha)?;
    let s = bipolar_syndrome(x_hat, g)?;
    let penalty: f64 = s.values().iter().map(|&v| v as f64).sum();
    Ok(-correlation(x_hat, y) - alpha * penalty)
}

pub fn local_costs(
    x_hat: &BipolarWord,
    y: &[f64],
    g: &TannerGraph,
    gamma: f64,
) -> Result<Vec<f64>> {
    check_len(g.n_vars(), y.len())?;
    check_positive("gamma", gamma)?;
    let s = bipolar_syndrome(x_hat, g)?;
    let s = s.values();
    Ok(x_hat
        .values()
        .iter()
        .zip(y)
        .enumerate()
        .map(|(i, (&x, &v))| {
            let checks: f64 = g.var_neighbors(i).iter().map(|&j| s[j] as f64).sum();
            -(x as f64 * v + gamma * checks)
        })
        .collect())
}

/// Exhaustive maximum-likelihood decoding over all codewords.
///
/// Codewords are enumerated from a null-space basis of `H`. Among words with
/// equal correlation the lexicographically smallest bit pattern wins, so
/// `y = 0` decodes to the all-zero word.
pub fn ml_brute_force(y: &[f64], g: &TannerGraph) -> Result<BipolarWord> {
    if g.n_vars() > ML_MAX_VARS {
        return Err(Error::CodeTooLarge {
            n_vars: g.n_vars(),
            limit: ML_MAX_VARS,
        });
    }
    check_len(g.n_vars(), y.len())?;
    let basis = null_space_basis(g);
    let n = g.n_vars();
    let mut best = BinaryWord::zeros(n);
    let mut best_metric = correlation(&best.to_bipolar(), y);
    for mask in 1u64..(1u64 << basis.len()) {
        let w = combine_basis(&basis, n, |k| mask >> k & 1 == 1);
        let metric = correlation(&w.to_bipolar(), y);
        if metric > best_metric || (metric == best_metric && w.bits() < best.bits()) {
            best = w;
            best_metric = metric;
        }
    }
    Ok(best.to_bipolar())
}
