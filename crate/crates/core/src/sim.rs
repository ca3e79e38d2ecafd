//! Monte Carlo BER/FER estimation over Eb/N0 sweeps.
//!
//! Frames of one point run in fixed-size batches spread over the rayon pool.
//! The stopping rule is evaluated only between batches and every frame draws
//! from its own counter-based stream, so a point's counts depend on the seed
//! and configuration alone, not on thread count or scheduling.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{bpsk_modulate, ebn0_to_sigma, frame_rng, transmit};
use crate::decoders::{decode, DecoderConfig};
use crate::error::{Error, Result};
use crate::tanner::{combine_basis, null_space_basis, BinaryWord, TannerGraph};

pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;
pub const DEFAULT_MIN_FRAME_ERRORS: u64 = 50;
pub const DEFAULT_BATCH_FRAMES: usize = 256;
/// Per-point frame cap is this many bits divided by the block length.
pub const DEFAULT_MAX_BITS: u64 = 10_000_000;

pub const CSV_HEADER: &str =
    "ebn0_db,frames,bit_errors,frame_errors,ber,fer,mean_iterations,wall_seconds";

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub code: Arc<TannerGraph>,
    pub decoder: DecoderConfig,
    pub ebn0_points: Vec<f64>,
    pub max_frames: u64,
    pub min_bit_errors: u64,
    pub min_frame_errors: u64,
    pub seed: u64,
    pub all_zero_codeword: bool,
    /// Rate used for the Eb/N0 conversion; `None` means `K / N` of the code.
    pub rate: Option<f64>,
    pub batch_frames: usize,
    /// Measure elapsed time; when off, `wall_seconds` is written as 0 so
    /// repeated runs produce identical files.
    pub record_wall_time: bool,
}

impl SweepConfig {
    pub fn new(code: Arc<TannerGraph>, decoder: DecoderConfig) -> Self {
        let max_frames = (DEFAULT_MAX_BITS / code.n_vars().max(1) as u64).max(1);
        SweepConfig {
            code,
            decoder,
            ebn0_points: Vec::new(),
            max_frames,
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            min_frame_errors: DEFAULT_MIN_FRAME_ERRORS,
            seed: 0,
            all_zero_codeword: true,
            rate: None,
            batch_frames: DEFAULT_BATCH_FRAMES,
            record_wall_time: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.decoder.validate()?;
        if self.max_frames < 1 {
            return Err(Error::param("max_frames must be at least 1"));
        }
        if self.batch_frames < 1 {
            return Err(Error::param("batch size must be at least 1"));
        }
        for w in self.ebn0_points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::param(format!(
                    "Eb/N0 points must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::param(format!(
                    "code rate must lie in (0, 1], got {r}"
                )));
            }
        }
        Ok(())
    }

    pub fn effective_rate(&self) -> f64 {
        self.rate.unwrap_or_else(|| self.code.rate())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iterations: f64,
    pub wall_seconds: f64,
    /// Sum over frames of the squared per-frame bit-error count. Not part of
    /// the CSV; `None` for records read back from disk.
    #[serde(skip)]
    pub bit_errors_sq: Option<u64>,
}

impl SweepRecord {
    fn from_tally(ebn0_db: f64, n_vars: usize, t: &Tally, wall_seconds: f64) -> Self {
        let frames = t.frames.max(1) as f64;
        SweepRecord {
            ebn0_db,
            frames: t.frames,
            bit_errors: t.bit_errors,
            frame_errors: t.frame_errors,
            ber: t.bit_errors as f64 / (frames * n_vars as f64),
            fer: t.frame_errors as f64 / frames,
            mean_iterations: t.iterations as f64 / frames,
            wall_seconds,
            bit_errors_sq: Some(t.bit_errors_sq),
        }
    }

    /// Standard error of `ber`.
    ///
    /// Bit errors cluster within frames, so when per-frame second moments are
    /// known the estimate treats frames as the independent unit. Otherwise
    /// the binomial value over all bits is returned, which understates the
    /// spread of decoded BER. `n_vars` is the block length.
    pub fn ber_std_err(&self, n_vars: usize) -> f64 {
        if self.frames == 0 || self.bit_errors == 0 {
            return 0.0;
        }
        let f = self.frames as f64;
        let n = n_vars as f64;
        match self.bit_errors_sq {
            Some(sq) if self.frames > 1 => {
                let mean = self.bit_errors as f64 / f;
                let var = ((sq as f64 - f * mean * mean) / (f - 1.0)).max(0.0);
                (var / f).sqrt() / n
            }
            _ => (self.ber * (1.0 - self.ber) / (f * n)).sqrt(),
        }
    }

    pub fn fer_std_err(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        (self.fer * (1.0 - self.fer) / self.frames as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    bit_errors_sq: u64,
    frame_errors: u64,
    iterations: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.frames += o.frames;
        self.bit_errors += o.bit_errors;
        self.bit_errors_sq += o.bit_errors_sq;
        self.frame_errors += o.frame_errors;
        self.iterations += o.iterations;
        self
    }
}

fn simulate_frame(
    cfg: &SweepConfig,
    basis: &[BinaryWord],
    ebn0_db: f64,
    sigma: f64,
    frame: u64,
) -> Result<Tally> {
    let g = &*cfg.code;
    let mut rng = frame_rng(cfg.seed, ebn0_db, frame);
    let codeword = if cfg.all_zero_codeword {
        BinaryWord::zeros(g.n_vars())
    } else {
        let picks: Vec<bool> = (0..basis.len()).map(|_| rng.gen()).collect();
        combine_basis(basis, g.n_vars(), |k| picks[k])
    };
    let y = transmit(&bpsk_modulate(&codeword), sigma, &mut rng)?;
    let out = decode(&y, g, &cfg.decoder, sigma)?;
    let errs = out.decoded.distance(&codeword) as u64;
    Ok(Tally {
        frames: 1,
        bit_errors: errs,
        bit_errors_sq: errs * errs,
        frame_errors: u64::from(errs > 0),
        iterations: out.iterations as u64,
    })
}

/// Simulates one Eb/N0 point. `f64::INFINITY` is accepted and means a
/// noiseless channel.
pub fn run_point(cfg: &SweepConfig, ebn0_db: f64) -> Result<SweepRecord> {
    cfg.validate()?;
    let sigma = ebn0_to_sigma(ebn0_db, cfg.effective_rate())?;
    let basis = if cfg.all_zero_codeword {
        Vec::new()
    } else {
        null_space_basis(&cfg.code)
    };
    let start = Instant::now();
    let mut total = Tally::default();
    while total.frames < cfg.max_frames {
        let lo = total.frames;
        let hi = (lo + cfg.batch_frames as u64).min(cfg.max_frames);
        let batch = (lo..hi)
            .into_par_iter()
            .map(|f| simulate_frame(cfg, &basis, ebn0_db, sigma, f))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        total = total.merge(batch);
        if total.bit_errors >= cfg.min_bit_errors && total.frame_errors >= cfg.min_frame_errors {
            break;
        }
    }
    let wall = if cfg.record_wall_time {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(SweepRecord::from_tally(
        ebn0_db,
        cfg.code.n_vars(),
        &total,
        wall,
    ))
}

/// One record per configured Eb/N0 point, in order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    cfg.ebn0_points.iter().map(|&e| run_point(cfg, e)).collect()
}

/// `run_point` at a fixed Eb/N0 for each CRBF `gamma`.
pub fn gamma_sweep(
    cfg: &SweepConfig,
    gammas: &[f64],
    ebn0_db: f64,
) -> Result<Vec<(f64, SweepRecord)>> {
    gammas
        .iter()
        .map(|&gamma| {
            let mut c = cfg.clone();
            c.decoder.gamma = gamma;
            Ok((gamma, run_point(&c, ebn0_db)?))
        })
        .collect()
}

/// `run_point` at a fixed Eb/N0 for each IMWBF `alpha`.
pub fn alpha_sweep(
    cfg: &SweepConfig,
    alphas: &[f64],
    ebn0_db: f64,
) -> Result<Vec<(f64, SweepRecord)>> {
    alphas
        .iter()
        .map(|&alpha| {
            let mut c = cfg.clone();
            c.decoder.imwbf_alpha = alpha;
            Ok((alpha, run_point(&c, ebn0_db)?))
        })
        .collect()
}

/// Parameter value of the lowest BER; ties keep the first.
pub fn best_parameter(results: &[(f64, SweepRecord)]) -> Option<f64> {
    results
        .iter()
        .fold(None::<&(f64, SweepRecord)>, |best, r| match best {
            Some(b) if b.1.ber <= r.1.ber => Some(b),
            _ => Some(r),
        })
        .map(|r| r.0)
}

pub fn write_csv_to<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.write_record([
            r.ebn0_db.to_string(),
            r.frames.to_string(),
            r.bit_errors.to_string(),
            r.frame_errors.to_string(),
            r.ber.to_string(),
            r.fer.to_string(),
            r.mean_iterations.to_string(),
            r.wall_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    write_csv_to(records, std::fs::File::create(path)?)
}

pub fn read_csv_from<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::param(format!(
            "unexpected CSV header {:?}",
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    read_csv_from(std::fs::File::open(path)?)
}

/// Eb/N0 at which a BER curve crosses a target, with a standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub ebn0_db: f64,
    pub std_err_db: f64,
}

/// Linear interpolation of `log10(ber)` between the first pair of adjacent
/// points that brackets `target`.
///
/// The BER standard errors are propagated to the log scale and divided by
/// the local slope. A zero-error point below the target is treated as half
/// an observed error. Returns `None` when no pair brackets the target.
pub fn ebn0_at_ber(records: &[SweepRecord], n_vars: usize, target: f64) -> Option<Crossing> {
    let floor = |r: &SweepRecord| {
        if r.bit_errors > 0 {
            r.ber
        } else {
            0.5 / (r.frames.max(1) as f64 * n_vars as f64)
        }
    };
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.bit_errors == 0 || !(a.ber >= target) || !(floor(b) < target) {
            continue;
        }
        let (la, lb) = (a.ber.log10(), floor(b).log10());
        let lt = target.log10();
        let t = if la == lb { 0.0 } else { (la - lt) / (la - lb) };
        let dx = b.ebn0_db - a.ebn0_db;
        let x = a.ebn0_db + t * dx;
        let slope = (la - lb) / dx;
        let ln10 = std::f64::consts::LN_10;
        let sa = a.ber_std_err(n_vars) / (a.ber * ln10);
        let sb = if b.bit_errors > 0 {
            b.ber_std_err(n_vars) / (b.ber * ln10)
        } else {
            1.0
        };
        let s_log = ((1.0 - t).powi(2) * sa * sa + t * t * sb * sb).sqrt();
        let se = if slope > 0.0 {
            s_log / slope
        } else {
            f64::INFINITY
        };
        return Some(Crossing {
            ebn0_db: x,
            std_err_db: se,
        });
    }
    None
}

/// Indices `k` where `ber[k+1]` exceeds `ber[k]` by more than `slack`
/// combined standard errors.
pub fn monotonicity_violations(records: &[SweepRecord], n_vars: usize, slack: f64) -> Vec<usize> {
    records
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let se = (w[0].ber_std_err(n_vars).powi(2) + w[1].ber_std_err(n_vars).powi(2)).sqrt();
            w[1].ber > w[0].ber + slack * se
        })
        .map(|(k, _)| k)
        .collect()
}

/// JSON run description written next to a CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub git_describe: Option<String>,
    pub code: String,
    pub n_vars: usize,
    pub n_checks: usize,
    pub rate: f64,
    pub decoder: DecoderConfig,
    pub ebn0_points: Vec<f64>,
    pub max_frames: u64,
    pub min_bit_errors: u64,
    pub min_frame_errors: u64,
    pub seed: u64,
    pub all_zero_codeword: bool,
    pub batch_frames: usize,
    pub wall_seconds: f64,
    pub stopping_rule: String,
}

impl RunManifest {
    pub fn new(cfg: &SweepConfig, code_label: &str, wall_seconds: f64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            git_describe: git_describe(),
            code: code_label.to_owned(),
            n_vars: cfg.code.n_vars(),
            n_checks: cfg.code.n_checks(),
            rate: cfg.effective_rate(),
            decoder: cfg.decoder,
            ebn0_points: cfg.ebn0_points.clone(),
            max_frames: cfg.max_frames,
            min_bit_errors: cfg.min_bit_errors,
            min_frame_errors: cfg.min_frame_errors,
            seed: cfg.seed,
            all_zero_codeword: cfg.all_zero_codeword,
            batch_frames: cfg.batch_frames,
            wall_seconds,
            stopping_rule: format!(
                "stop at {} frames or once both {} bit errors and {} frame errors are reached, checked every {} frames",
                cfg.max_frames, cfg.min_bit_errors, cfg.min_frame_errors, cfg.batch_frames
            ),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

fn git_describe() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()?;
    if !out.status.success() {
        return None;
    }
    let s = String::from_utf8(out.stdout).ok()?.trim().to_owned();
    (!s.is_empty()).then_some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::q_function;
    use crate::decoders::Algorithm;
    use crate::tanner::construct_regular;

    fn config(alg: Algorithm) -> SweepConfig {
        let g = Arc::new(construct_regular(20, 3, 4, 7).unwrap());
        let dec = DecoderConfig::new(alg, &g);
        let mut cfg = SweepConfig::new(g, dec);
        cfg.record_wall_time = false;
        cfg.seed = 11;
        cfg
    }

    #[test]
    fn noiseless_point() {
        let mut cfg = config(Algorithm::SoftCrbf);
        cfg.max_frames = 300;
        let r = run_point(&cfg, f64::INFINITY).unwrap();
        assert_eq!((r.frames, r.bit_errors, r.frame_errors), (300, 0, 0));
        assert_eq!((r.ber, r.fer, r.mean_iterations), (0.0, 0.0, 0.0));
    }

    #[test]
    fn identity_decoder_matches_raw_channel() {
        let mut cfg = config(Algorithm::Identity);
        cfg.rate = Some(1.0);
        cfg.max_frames = 20_000;
        cfg.min_bit_errors = u64::MAX;
        let r = run_point(&cfg, 0.0).unwrap();
        let q = q_function(2f64.sqrt());
        let se = (q * (1.0 - q) / (r.frames as f64 * 20.0)).sqrt();
        assert!((r.ber - q).abs() < 3.0 * se, "ber {} vs {q}", r.ber);
    }

    #[test]
    fn deterministic_and_batch_independent() {
        let mut cfg = config(Algorithm::Mwbf);
        cfg.max_frames = 2_000;
        let a = run_point(&cfg, 2.0).unwrap();
        let b = run_point(&cfg, 2.0).unwrap();
        assert_eq!(a, b);
        // without early stopping the batch size is irrelevant
        cfg.min_bit_errors = u64::MAX;
        let a = run_point(&cfg, 2.0).unwrap();
        cfg.batch_frames = 7;
        let b = run_point(&cfg, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn early_stop_lands_on_batch_boundary() {
        let mut cfg = config(Algorithm::Bf);
        cfg.batch_frames = 10;
        cfg.min_bit_errors = 5;
        cfg.min_frame_errors = 2;
        let r = run_point(&cfg, 1.0).unwrap();
        assert!(r.bit_errors >= 5 && r.frame_errors >= 2);
        assert_eq!(r.frames % 10, 0);
        assert!(r.frames < cfg.max_frames);
    }

    #[test]
    fn sweep_composition() {
        let mut cfg = config(Algorithm::Wbf);
        cfg.max_frames = 500;
        assert!(run_sweep(&cfg).unwrap().is_empty());
        cfg.ebn0_points = vec![3.0];
        assert_eq!(
            run_sweep(&cfg).unwrap(),
            vec![run_point(&cfg, 3.0).unwrap()]
        );
        cfg.ebn0_points = vec![3.0, 2.0];
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn single_gamma_equals_run_point() {
        let mut cfg = config(Algorithm::SoftCrbf);
        cfg.max_frames = 500;
        let res = gamma_sweep(&cfg, &[0.4], 2.5).unwrap();
        cfg.decoder.gamma = 0.4;
        assert_eq!(res, vec![(0.4, run_point(&cfg, 2.5).unwrap())]);
    }

    #[test]
    fn csv_shapes_and_roundtrip() {
        let mut buf = Vec::new();
        write_csv_to(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));

        let mut cfg = config(Algorithm::Mwbf);
        cfg.max_frames = 300;
        cfg.record_wall_time = true;
        let rec = run_point(&cfg, 1.5).unwrap();
        let mut buf = Vec::new();
        write_csv_to(std::slice::from_ref(&rec), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 2);
        let back = read_csv_from(&buf[..]).unwrap();
        assert_eq!(back.len(), 1);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        let r = &back[0];
        assert!(close(r.ebn0_db, rec.ebn0_db) && close(r.ber, rec.ber) && close(r.fer, rec.fer));
        assert!(
            close(r.mean_iterations, rec.mean_iterations)
                && close(r.wall_seconds, rec.wall_seconds)
        );
        assert_eq!(
            (r.frames, r.bit_errors, r.frame_errors),
            (rec.frames, rec.bit_errors, rec.frame_errors)
        );
        assert!(read_csv_from("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn rec(ebn0: f64, frames: u64, bit_errors: u64, n: usize) -> SweepRecord {
        let t = Tally {
            frames,
            bit_errors,
            bit_errors_sq: bit_errors,
            frame_errors: bit_errors,
            iterations: 0,
        };
        SweepRecord::from_tally(ebn0, n, &t, 0.0)
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        // 1e-2 at 1 dB, 1e-4 at 2 dB: 1e-3 sits halfway
        let recs = [rec(1.0, 1000, 1000, 100), rec(2.0, 100_000, 1000, 100)];
        let c = ebn0_at_ber(&recs, 100, 1e-3).unwrap();
        assert!((c.ebn0_db - 1.5).abs() < 1e-12);
        assert!(c.std_err_db > 0.0 && c.std_err_db < 0.1);
        assert!(ebn0_at_ber(&recs, 100, 1e-6).is_none());
        assert!(ebn0_at_ber(&recs, 100, 0.5).is_none());
    }

    #[test]
    fn std_err_uses_frame_clusters() {
        // one error per frame: per-frame variance p(1-p), n bits each
        let r = rec(0.0, 1000, 100, 50);
        let p: f64 = 0.1;
        let expect = (p * (1.0 - p) * 1000.0 / 999.0 / 1000.0).sqrt() / 50.0;
        assert!((r.ber_std_err(50) - expect).abs() < 1e-15);
        let mut bare = r.clone();
        bare.bit_errors_sq = None;
        let b = (r.ber * (1.0 - r.ber) / 50_000.0).sqrt();
        assert!((bare.ber_std_err(50) - b).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_slack() {
        let recs = [
            rec(1.0, 1000, 500, 10),
            rec(2.0, 1000, 510, 10),
            rec(3.0, 1000, 900, 10),
        ];
        assert_eq!(monotonicity_violations(&recs, 10, 2.0), vec![1]);
    }

    #[test]
    fn best_parameter_prefers_first_on_tie() {
        let r = |b| rec(0.0, 100, b, 10);
        assert_eq!(
            best_parameter(&[(0.1, r(5)), (0.2, r(3)), (0.3, r(3))]),
            Some(0.2)
        );
        assert_eq!(best_parameter(&[]), None);
    }
}
