#![allow(dead_code)]

use std::path::PathBuf;

use crbf::channel::{bpsk_modulate, ebn0_to_sigma, frame_rng, transmit};
use crbf::tanner::{parse_alist, BinaryWord, TannerGraph};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> TannerGraph {
    let path = fixture_dir().join(name);
    parse_alist(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// Noisy all-zero frame number `frame`.
pub fn noisy_frame(g: &TannerGraph, seed: u64, ebn0: f64, frame: u64) -> Vec<f64> {
    let sigma = ebn0_to_sigma(ebn0, g.rate()).unwrap();
    let mut rng = frame_rng(seed, ebn0, frame);
    transmit(
        &bpsk_modulate(&BinaryWord::zeros(g.n_vars())),
        sigma,
        &mut rng,
    )
    .unwrap()
}

/// Dense, full-recompute CRBF written directly from the update rules, used as
/// an oracle. Returns the state after initialization and after every
/// iteration: (x, s, R by check-major edge order, E).
pub struct DenseState {
    pub x: Vec<i8>,
    pub s: Vec<i8>,
    pub r: Vec<f64>,
    pub e: Vec<f64>,
    pub flipped: Option<usize>,
}

pub fn dense_crbf(
    g: &TannerGraph,
    input: &[f64],
    gamma: f64,
    literal_init: bool,
    i_max: usize,
) -> Vec<DenseState> {
    let n = g.n_vars();
    let m = g.n_checks();
    let mut h = vec![vec![false; n]; m];
    for (j, row) in h.iter_mut().enumerate() {
        for &i in g.check_neighbors(j) {
            row[i] = true;
        }
    }
    let syn = |x: &[i8]| -> Vec<i8> {
        h.iter()
            .map(|row| (0..n).filter(|&i| row[i]).map(|i| x[i]).product())
            .collect()
    };
    let flatten = |rm: &Vec<Vec<f64>>| -> Vec<f64> {
        let mut out = Vec::new();
        for (j, row) in h.iter().enumerate() {
            for i in 0..n {
                if row[i] {
                    out.push(rm[j][i]);
                }
            }
        }
        out
    };

    let mut x: Vec<i8> = input
        .iter()
        .map(|&v| if v >= 0.0 { 1 } else { -1 })
        .collect();
    let mut s = syn(&x);
    let mut r = vec![vec![1.0; n]; m];
    let mut e: Vec<f64> = (0..n)
        .map(|i| {
            let mut sum = 0.0;
            for j in 0..m {
                if h[j][i] {
                    sum += s[j] as f64;
                }
            }
            if literal_init {
                -input[i] - gamma * sum
            } else {
                -(x[i] as f64 * input[i] + gamma * sum)
            }
        })
        .collect();
    let mut states = vec![DenseState {
        x: x.clone(),
        s: s.clone(),
        r: flatten(&r),
        e: e.clone(),
        flipped: None,
    }];
    for l in 1..=i_max {
        let mut best = 0;
        for i in 1..n {
            if e[i] > e[best] {
                best = i;
            }
        }
        x[best] = -x[best];
        let s_new = syn(&x);
        let done = s_new.iter().all(|&v| v == 1) || l == i_max;
        if !done {
            let mut r_new = vec![vec![0.0; n]; m];
            for j in 0..m {
                for i in 0..n {
                    if !h[j][i] {
                        continue;
                    }
                    let mut worst = f64::NEG_INFINITY;
                    for k in 0..n {
                        if k != i && h[j][k] {
                            worst = worst.max(e[k] - gamma * s[j] as f64 * r[j][k]);
                        }
                    }
                    r_new[j][i] = if worst == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (-worst).max(0.0)
                    };
                }
            }
            let mut e_new = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..m {
                    if h[j][i] {
                        acc += r_new[j][i] * s_new[j] as f64;
                    }
                }
                e_new[i] = -(x[i] as f64 * input[i] + gamma * acc);
            }
            r = r_new;
            e = e_new;
        }
        s = s_new;
        states.push(DenseState {
            x: x.clone(),
            s: s.clone(),
            r: flatten(&r),
            e: e.clone(),
            flipped: Some(best),
        });
        if done {
            break;
        }
    }
    states
}
