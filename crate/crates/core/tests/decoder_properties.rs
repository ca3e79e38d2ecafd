mod common;

use crbf::channel::hard_decide;
use crbf::decoders::{
    decode, decode_bf, decode_hard_crbf, decode_imwbf, decode_mwbf, decode_soft_crbf,
    decode_wbf_with_weights, Algorithm, CrbfDecoder, DecoderConfig, FlipPolicy, StepStatus,
    UpdateMode,
};
use crbf::metrics::{global_cost, ml_brute_force};
use crbf::tanner::{construct_regular, is_codeword, BinaryWord, TannerGraph};
use proptest::prelude::*;

fn crbf_cfg(g: &TannerGraph, i_max: usize) -> DecoderConfig {
    let mut cfg = DecoderConfig::new(Algorithm::SoftCrbf, g);
    cfg.i_max = i_max;
    cfg
}

/// Steps `dec` to completion and compares every state with the dense oracle.
fn assert_matches_oracle(g: &TannerGraph, y: &[f64], cfg: &DecoderConfig) {
    let oracle = common::dense_crbf(g, y, cfg.gamma, cfg.literal_init, cfg.i_max);
    let mut dec = CrbfDecoder::soft(y, g, cfg).unwrap();
    let close = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + q.abs()))
    };
    for (l, want) in oracle.iter().enumerate() {
        if l > 0 {
            dec.step();
            assert_eq!(
                dec.last_flipped(),
                &[want.flipped.unwrap()],
                "iteration {l}"
            );
        }
        let st = dec.state();
        assert_eq!(st.x_hat, want.x, "iteration {l}");
        assert_eq!(st.s_hat, want.s, "iteration {l}");
        assert!(
            close(&st.rel, &want.r),
            "iteration {l}: {:?} vs {:?}",
            st.rel,
            want.r
        );
        assert!(close(&st.costs, &want.e), "iteration {l}");
    }
    assert_ne!(dec.status(), StepStatus::Running);
}

#[test]
fn soft_crbf_matches_dense_oracle_on_fixtures() {
    for (name, ebn0) in [
        ("regular_20_3_4.alist", 2.0),
        ("mackay_96_3_963.alist", 3.0),
    ] {
        let g = common::fixture(name);
        let cfg = crbf_cfg(&g, 30);
        for f in 0..100 {
            let y = common::noisy_frame(&g, 5, ebn0, f);
            assert_matches_oracle(&g, &y, &cfg);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn soft_crbf_matches_dense_oracle(
        seed in 0u64..1000,
        shape in prop::sample::select(vec![(12usize, 3usize, 4usize), (18, 2, 3), (24, 3, 6)]),
        y in prop::collection::vec(-2.0f64..2.0, 24),
        gamma in 0.05f64..1.0,
        literal in any::<bool>(),
    ) {
        let (n, dv, dc) = shape;
        let g = construct_regular(n, dv, dc, seed).unwrap();
        let mut cfg = crbf_cfg(&g, 15);
        cfg.gamma = gamma;
        cfg.literal_init = literal;
        assert_matches_oracle(&g, &y[..n], &cfg);
    }
}

#[test]
fn incremental_and_full_updates_are_bit_identical() {
    let g = common::fixture("regular_504_3_6.alist");
    for (k, ebn0) in [2.0, 3.0, 4.0].into_iter().enumerate() {
        for f in 0..100 {
            let y = common::noisy_frame(&g, 17 + k as u64, ebn0, f);
            let mut inc = crbf_cfg(&g, 70);
            inc.update = UpdateMode::Incremental;
            let mut full = inc;
            full.update = UpdateMode::Full;
            let mut a = CrbfDecoder::soft(&y, &g, &inc).unwrap();
            let mut b = CrbfDecoder::soft(&y, &g, &full).unwrap();
            loop {
                let sa = a.state();
                let sb = b.state();
                assert_eq!(sa.x_hat, sb.x_hat);
                assert_eq!(sa.s_hat, sb.s_hat);
                let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&sa.rel), bits(&sb.rel));
                assert_eq!(bits(&sa.costs), bits(&sb.costs));
                if a.status() != StepStatus::Running {
                    break;
                }
                assert_eq!(a.step(), b.step());
            }
        }
    }
}

#[test]
fn bf_is_wbf_with_unit_weights() {
    let g = common::fixture("regular_504_3_6.alist");
    for f in 0..200 {
        let y = common::noisy_frame(&g, 3, 3.0, f);
        for policy in [FlipPolicy::SingleLowestIndex, FlipPolicy::AllTied] {
            let mut cfg = DecoderConfig::new(Algorithm::Bf, &g);
            cfg.flip_policy = policy;
            let bf = decode_bf(&hard_decide(&y), &g, &cfg).unwrap();
            let wbf = decode_wbf_with_weights(&y, &g, &cfg, &vec![1.0; g.n_edges()]).unwrap();
            assert_eq!(bf.flips, wbf.flips);
            assert_eq!(bf.decoded, wbf.decoded);
        }
    }
}

#[test]
fn mwbf_is_imwbf_with_unit_alpha() {
    let g = common::fixture("regular_504_3_6.alist");
    for f in 0..200 {
        let y = common::noisy_frame(&g, 4, 3.0, f);
        let mut cfg = DecoderConfig::new(Algorithm::Imwbf, &g);
        cfg.imwbf_alpha = 1.0;
        let a = decode_mwbf(&y, &g, &cfg).unwrap();
        let b = decode_imwbf(&y, &g, &cfg).unwrap();
        assert_eq!(a.flips, b.flips);
    }
}

#[test]
fn hard_crbf_is_soft_crbf_on_hard_decisions() {
    let g = common::fixture("regular_504_3_6.alist");
    let cfg = crbf_cfg(&g, 30);
    for f in 0..200 {
        let y = common::noisy_frame(&g, 6, 4.0, f);
        let z = hard_decide(&y);
        let bipolar: Vec<f64> = z.bits().iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
        let hard = decode_hard_crbf(&z, &g, &cfg).unwrap();
        let soft = decode_soft_crbf(&bipolar, &g, &cfg).unwrap();
        assert_eq!(hard.flips, soft.flips);
        assert_eq!(hard.decoded, soft.decoded);
    }
}

#[test]
fn reliabilities_are_nonnegative() {
    let g = common::fixture("regular_504_3_6.alist");
    let cfg = crbf_cfg(&g, 70);
    for f in 0..200 {
        let y = common::noisy_frame(&g, 8, 2.5, f);
        let mut dec = CrbfDecoder::soft(&y, &g, &cfg).unwrap();
        while dec.step() == StepStatus::Running {
            assert!(dec.rel().iter().all(|&r| r >= 0.0));
        }
    }
}

#[test]
fn operation_counts_stay_local() {
    let g = common::fixture("regular_504_3_6.alist");
    let bound = g.n_vars().min(3 * 6);
    for alg in [Algorithm::SoftCrbf, Algorithm::Wbf, Algorithm::Bf] {
        let mut cfg = DecoderConfig::new(alg, &g);
        cfg.i_max = 70;
        for f in 0..100 {
            let y = common::noisy_frame(&g, 9, 2.5, f);
            let out = decode(&y, &g, &cfg, 1.0).unwrap();
            for op in &out.op_counts {
                assert!(op.flip_cost_updates <= bound, "{alg}: {op:?}");
                assert!(op.reliability_updates <= g.n_edges());
                assert!(op.cost_updates <= g.n_vars());
            }
        }
    }
}

#[test]
fn converged_outputs_are_codewords() {
    let g = common::fixture("mackay_96_3_963.alist");
    for alg in Algorithm::ALL {
        let mut cfg = DecoderConfig::new(alg, &g);
        cfg.i_max = 50;
        for f in 0..100 {
            let y = common::noisy_frame(&g, 10, 3.0, f);
            let sigma = crbf::channel::ebn0_to_sigma(3.0, g.rate()).unwrap();
            let out = decode(&y, &g, &cfg, sigma).unwrap();
            assert_eq!(
                out.converged,
                is_codeword(&out.decoded, &g).unwrap(),
                "{alg}"
            );
        }
    }
}

#[test]
fn ml_decision_is_never_worse_than_crbf() {
    let g = common::fixture("regular_20_3_4.alist");
    let cfg = crbf_cfg(&g, 30);
    let mut agree = 0;
    let mut converged = 0;
    for f in 0..200 {
        let y = common::noisy_frame(&g, 12, 5.0, f);
        let ml = ml_brute_force(&y, &g).unwrap();
        let out = decode_soft_crbf(&y, &g, &cfg).unwrap();
        if out.converged {
            converged += 1;
            let ours = out.decoded.to_bipolar();
            let c_ml = global_cost(&ml, &y, &g, 1.0).unwrap();
            let c_ours = global_cost(&ours, &y, &g, 1.0).unwrap();
            assert!(c_ml <= c_ours + 1e-12);
            if ours == ml {
                agree += 1;
            }
        }
    }
    assert!(converged > 100);
    // CRBF is not ML, but on a short code at moderate noise it mostly agrees
    assert!(agree * 10 >= converged * 8, "agree {agree} of {converged}");
}

#[test]
fn decoders_reject_wrong_lengths() {
    let g = common::fixture("regular_20_3_4.alist");
    for alg in Algorithm::ALL {
        let cfg = DecoderConfig::new(alg, &g);
        assert!(decode(&[1.0; 19], &g, &cfg, 0.5).is_err(), "{alg}");
    }
    assert!(decode_hard_crbf(&BinaryWord::zeros(21), &g, &crbf_cfg(&g, 5)).is_err());
}

/// By induction on `R <= B + gamma (dv + 1) R_prev`, reliabilities never
/// exceed `max(1, B / (1 - gamma (dv + 1)))` when `gamma (dv + 1) < 1`.
#[test]
fn reliabilities_respect_the_contraction_bound() {
    let g = common::fixture("regular_504_3_6.alist");
    for gamma in [1.0 / 6.0, 0.2, 0.24] {
        let mut cfg = crbf_cfg(&g, 70);
        cfg.gamma = gamma;
        let c = gamma * (g.max_var_degree() + 1) as f64;
        assert!(c < 1.0);
        for f in 0..100 {
            let y = common::noisy_frame(&g, 13, 3.5, f);
            let b = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let bound = (b / (1.0 - c)).max(1.0);
            let mut dec = CrbfDecoder::soft(&y, &g, &cfg).unwrap();
            while dec.step() == StepStatus::Running {
                assert!(dec.rel().iter().all(|&r| r <= bound * (1.0 + 1e-12)));
            }
        }
    }
}
