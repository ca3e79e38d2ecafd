//! Command-line front end.
//!
//! Exit status is 0 on success, 1 for usage errors (unknown flags, values
//! that do not parse or violate a precondition) and 2 for runtime failures
//! such as unreadable or malformed code files.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::channel::{bpsk_modulate, ebn0_to_sigma, frame_rng, hard_decide, transmit};
use crate::decoders::{
    decode, Algorithm, CrbfDecoder, DecoderConfig, FlipPolicy, StepStatus, UpdateMode,
};
use crate::error::Error;
use crate::sim::{self, RunManifest, SweepConfig, SweepRecord, CSV_HEADER};
use crate::tanner::{
    construct_regular, parse_alist, remove_four_cycles, write_alist, BinaryWord, TannerGraph,
};

/// Directory searched for `--code` files that do not exist as given.
pub const FIXTURE_DIR_ENV: &str = "CRBF_FIXTURE_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "crbf",
    version,
    about = "LDPC bit-flipping decoders and BER simulation"
)]
pub struct Cli {
    /// Worker threads for frame simulation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BER/FER over a range of Eb/N0 points.
    Sweep(SweepArgs),
    /// BER at one Eb/N0 for several CRBF gamma values.
    GammaSweep(ParamSweepArgs),
    /// BER at one Eb/N0 for several IMWBF alpha values.
    AlphaSweep(ParamSweepArgs),
    /// Decode a single frame and print every iteration as JSON lines.
    Trace(TraceArgs),
    /// Parse and validate an alist file.
    CheckAlist(CheckArgs),
    /// Construct a random regular code and write it as alist.
    GenCode(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Single,
    AllTied,
}

#[derive(Debug, Args)]
pub struct DecoderArgs {
    /// bf, wbf, mwbf, imwbf, soft-crbf, hard-crbf, spa or identity.
    #[arg(long, value_parser = parse_algorithm)]
    pub decoder: Algorithm,
    /// CRBF check weight (default 1/dc).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// IMWBF channel weight.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = 30)]
    pub imax: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Single)]
    pub flip_policy: PolicyArg,
    /// Flip at least once even if the received word is a codeword.
    #[arg(long)]
    pub no_pre_check: bool,
    /// Start CRBF costs from -y instead of -x*y.
    #[arg(long)]
    pub literal_init: bool,
    /// Recompute all CRBF reliabilities and costs every iteration.
    #[arg(long)]
    pub full_update: bool,
}

impl DecoderArgs {
    fn config(&self, g: &TannerGraph) -> Result<DecoderConfig, Failure> {
        let mut cfg = DecoderConfig::new(self.decoder, g);
        if let Some(gamma) = self.gamma {
            cfg.gamma = gamma;
        }
        cfg.imwbf_alpha = self.alpha;
        cfg.i_max = self.imax;
        cfg.flip_policy = match self.flip_policy {
            PolicyArg::Single => FlipPolicy::SingleLowestIndex,
            PolicyArg::AllTied => FlipPolicy::AllTied,
        };
        cfg.pre_check = !self.no_pre_check;
        cfg.literal_init = self.literal_init;
        cfg.update = if self.full_update {
            UpdateMode::Full
        } else {
            UpdateMode::Incremental
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frame cap per point (default 10^7 / N).
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long, default_value_t = sim::DEFAULT_MIN_BIT_ERRORS)]
    pub min_bit_errors: u64,
    #[arg(long, default_value_t = sim::DEFAULT_MIN_FRAME_ERRORS)]
    pub min_frame_errors: u64,
    /// Frames simulated between stopping-rule checks.
    #[arg(long, default_value_t = sim::DEFAULT_BATCH_FRAMES)]
    pub batch_frames: usize,
    /// Code rate for the Eb/N0 conversion (default K/N of the code).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Transmit random codewords instead of the all-zero word.
    #[arg(long)]
    pub random_codewords: bool,
    /// Write 0 in the wall_seconds column.
    #[arg(long)]
    pub no_wall_time: bool,
    /// JSON manifest path (default: next to --output).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// alist file.
    #[arg(long)]
    pub code: PathBuf,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// Eb/N0 points in dB: `start:stop:step`, a comma list, or one value.
    #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
    pub ebn0: Points,
    #[command(flatten)]
    pub sim: SimArgs,
    /// CSV path (default stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParamSweepArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// Parameter values: `start:stop:step`, a comma list, or one value.
    #[arg(long, value_parser = parse_points, allow_hyphen_values = true)]
    pub values: Points,
    /// Channel point in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// Noise seed of the frame.
    #[arg(long, default_value_t = 0)]
    pub frame_seed: u64,
    /// Frame index within the seed's stream family.
    #[arg(long, default_value_t = 0)]
    pub frame: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    pub ebn0: f64,
    #[arg(long)]
    pub rate: Option<f64>,
    /// Use these received values instead of a noisy all-zero frame.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub received: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub code: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dv: usize,
    #[arg(long)]
    pub dc: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Remove length-4 cycles by degree-preserving edge swaps.
    #[arg(long)]
    pub no_4_cycles: bool,
    #[arg(long, default_value_t = 100_000)]
    pub max_swaps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Points(pub Vec<f64>);

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

fn tidy(v: f64) -> f64 {
    // drop accumulated binary noise such as 0.30000000000000004
    (v * 1e9).round() / 1e9
}

/// `start:stop:step` (stop included within half a step), `a,b,c`, or `a`.
pub fn parse_points(s: &str) -> Result<Points, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("not a number: {t:?}"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let pts = match parts.len() {
        1 => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        3 => {
            let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || !a.is_finite() || !b.is_finite() || !step.is_finite() {
                return Err(format!("bad range {s:?}: step must be positive"));
            }
            if b < a {
                return Err(format!("bad range {s:?}: stop is below start"));
            }
            let n = ((b - a) / step + 0.5).floor() as usize;
            (0..=n).map(|k| tidy(a + k as f64 * step)).collect()
        }
        _ => return Err(format!("expected start:stop:step, got {s:?}")),
    };
    if pts.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite value in {s:?}"));
    }
    Ok(Points(pts))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn resolve_code_path(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let (Some(dir), Some(name)) = (std::env::var_os(FIXTURE_DIR_ENV), path.file_name()) {
        let alt = Path::new(&dir).join(name);
        if alt.exists() {
            return alt;
        }
    }
    path.to_path_buf()
}

fn load_code(path: &Path) -> Result<TannerGraph, Failure> {
    let resolved = resolve_code_path(path);
    let text = std::fs::read_to_string(&resolved)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", resolved.display())))?;
    parse_alist(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", resolved.display())))
}

/// Writes to the file, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn sweep_config(code: TannerGraph, dec: &DecoderArgs, s: &SimArgs) -> Result<SweepConfig, Failure> {
    let decoder = dec.config(&code)?;
    let mut cfg = SweepConfig::new(Arc::new(code), decoder);
    if let Some(m) = s.max_frames {
        cfg.max_frames = m;
    }
    cfg.min_bit_errors = s.min_bit_errors;
    cfg.min_frame_errors = s.min_frame_errors;
    cfg.batch_frames = s.batch_frames;
    cfg.seed = s.seed;
    cfg.rate = s.rate;
    cfg.all_zero_codeword = !s.random_codewords;
    cfg.record_wall_time = !s.no_wall_time;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn manifest_path(s: &SimArgs, output: Option<&Path>) -> Option<PathBuf> {
    s.manifest.clone().or_else(|| {
        output.map(|p| {
            let mut name = p.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        })
    })
}

fn run_sweep_cmd(
    a: &SweepArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let code = load_code(&a.code)?;
    let mut cfg = sweep_config(code, &a.decoder, &a.sim)?;
    cfg.ebn0_points = a.ebn0.0.clone();
    cfg.validate().map_err(usage)?;
    let start = std::time::Instant::now();
    let mut records = Vec::with_capacity(cfg.ebn0_points.len());
    for &e in &cfg.ebn0_points {
        let r = sim::run_point(&cfg, e)?;
        writeln!(
            stderr,
            "{} dB: {} frames, ber {:.3e}, fer {:.3e}",
            r.ebn0_db, r.frames, r.ber, r.fer
        )?;
        records.push(r);
    }
    let mut buf = Vec::new();
    sim::write_csv_to(&records, &mut buf)?;
    emit(a.output.as_deref(), stdout, &buf)?;
    if let Some(p) = manifest_path(&a.sim, a.output.as_deref()) {
        let wall = if cfg.record_wall_time {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        RunManifest::new(&cfg, &a.code.display().to_string(), wall).write(&p)?;
    }
    Ok(())
}

fn param_csv(name: &str, rows: &[(f64, SweepRecord)]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Failure::Runtime(e.to_string());
    let mut header = vec![name.to_owned()];
    header.extend(CSV_HEADER.split(',').map(str::to_owned));
    w.write_record(&header).map_err(map)?;
    for (v, r) in rows {
        w.write_record([
            v.to_string(),
            r.ebn0_db.to_string(),
            r.frames.to_string(),
            r.bit_errors.to_string(),
            r.frame_errors.to_string(),
            r.ber.to_string(),
            r.fer.to_string(),
            r.mean_iterations.to_string(),
            r.wall_seconds.to_string(),
        ])
        .map_err(map)?;
    }
    w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))
}

fn run_param_cmd(
    a: &ParamSweepArgs,
    gamma: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let code = load_code(&a.code)?;
    let mut cfg = sweep_config(code, &a.decoder, &a.sim)?;
    cfg.ebn0_points = vec![a.ebn0];
    if a.ebn0.is_nan() {
        return Err(usage("--ebn0 must be a number"));
    }
    for &v in &a.values.0 {
        if !(v > 0.0) {
            return Err(usage(format!("parameter values must be positive, got {v}")));
        }
    }
    let start = std::time::Instant::now();
    let rows = if gamma {
        sim::gamma_sweep(&cfg, &a.values.0, a.ebn0)?
    } else {
        sim::alpha_sweep(&cfg, &a.values.0, a.ebn0)?
    };
    let name = if gamma { "gamma" } else { "alpha" };
    for (v, r) in &rows {
        writeln!(stderr, "{name} {v}: {} frames, ber {:.3e}", r.frames, r.ber)?;
    }
    if let Some(best) = sim::best_parameter(&rows) {
        writeln!(stderr, "best {name}: {best}")?;
    }
    emit(a.output.as_deref(), stdout, &param_csv(name, &rows)?)?;
    if let Some(p) = manifest_path(&a.sim, a.output.as_deref()) {
        let wall = if cfg.record_wall_time {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        RunManifest::new(&cfg, &a.code.display().to_string(), wall).write(&p)?;
    }
    Ok(())
}

fn json_line(out: &mut Vec<u8>, v: serde_json::Value) {
    out.extend_from_slice(v.to_string().as_bytes());
    out.push(b'\n');
}

fn status_name(s: StepStatus) -> &'static str {
    match s {
        StepStatus::Running => "running",
        StepStatus::Converged => "converged",
        StepStatus::MaxIterations => "max-iterations",
    }
}

fn run_trace_cmd(a: &TraceArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let g = load_code(&a.code)?;
    let mut cfg = a.decoder.config(&g)?;
    cfg.trace = true;
    let rate = a.rate.unwrap_or_else(|| g.rate());
    let sigma = ebn0_to_sigma(a.ebn0, rate).map_err(usage)?;
    let y = match &a.received {
        Some(v) => {
            if v.len() != g.n_vars() {
                return Err(usage(format!(
                    "--received has {} values, code length is {}",
                    v.len(),
                    g.n_vars()
                )));
            }
            v.clone()
        }
        None => {
            let mut rng = frame_rng(a.frame_seed, a.ebn0, a.frame);
            transmit(
                &bpsk_modulate(&BinaryWord::zeros(g.n_vars())),
                sigma,
                &mut rng,
            )?
        }
    };
    let mut out = Vec::new();
    json_line(
        &mut out,
        json!({
            "decoder": cfg.algorithm.name(),
            "n_vars": g.n_vars(),
            "ebn0_db": a.ebn0,
            "sigma": sigma,
            "gamma": cfg.gamma,
            "i_max": cfg.i_max,
            "y": y,
        }),
    );
    let outcome = match cfg.algorithm {
        Algorithm::SoftCrbf | Algorithm::HardCrbf => {
            let mut dec = if cfg.algorithm == Algorithm::SoftCrbf {
                CrbfDecoder::soft(&y, &g, &cfg)?
            } else {
                CrbfDecoder::hard(&hard_decide(&y), &g, &cfg)?
            };
            let snapshot = |dec: &CrbfDecoder, flipped: &[usize]| {
                let st = dec.state();
                json!({
                    "iteration": st.iter,
                    "flipped": flipped,
                    "x_hat": st.x_hat,
                    "syndrome": st.s_hat,
                    "costs": st.costs,
                    "reliabilities": st.rel,
                    "status": status_name(dec.status()),
                })
            };
            json_line(&mut out, snapshot(&dec, &[]));
            let skip = cfg.pre_check && dec.syndrome_is_zero();
            if !skip {
                while dec.status() == StepStatus::Running {
                    dec.step();
                    let flipped = dec.last_flipped().to_vec();
                    json_line(&mut out, snapshot(&dec, &flipped));
                }
            }
            dec.into_outcome()
        }
        _ => {
            let o = decode(&y, &g, &cfg, sigma)?;
            for t in &o.trace {
                json_line(&mut out, serde_json::to_value(t).map_err(Error::from)?);
            }
            o
        }
    };
    json_line(
        &mut out,
        json!({
            "converged": outcome.converged,
            "iterations": outcome.iterations,
            "oscillations": outcome.oscillations,
            "decoded": outcome.decoded.bits(),
        }),
    );
    emit(a.output.as_deref(), stdout, &out)
}

fn run_check_cmd(a: &CheckArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let g = load_code(&a.code)?;
    let deg = |d: Option<usize>| d.map_or_else(|| "irregular".to_owned(), |d| d.to_string());
    writeln!(
        stdout,
        "ok: N={} M={} edges={} dv={} dc={} rate={:.6} design_rate={:.6} four_cycles={}",
        g.n_vars(),
        g.n_checks(),
        g.n_edges(),
        deg(g.dv()),
        deg(g.dc()),
        g.rate(),
        g.design_rate(),
        g.four_cycle_count()
    )?;
    Ok(())
}

fn run_gen_cmd(a: &GenArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut g = construct_regular(a.n, a.dv, a.dc, a.seed).map_err(usage)?;
    if a.no_4_cycles {
        g = remove_four_cycles(&g, a.seed, a.max_swaps)?;
    }
    emit(a.output.as_deref(), stdout, write_alist(&g).as_bytes())
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Sweep(a) => run_sweep_cmd(a, stdout, stderr),
        Command::GammaSweep(a) => run_param_cmd(a, true, stdout, stderr),
        Command::AlphaSweep(a) => run_param_cmd(a, false, stdout, stderr),
        Command::Trace(a) => run_trace_cmd(a, stdout),
        Command::CheckAlist(a) => run_check_cmd(a, stdout),
        Command::GenCode(a) => run_gen_cmd(a, stdout),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                // the pool's closure must be Send, so buffer its output
                let (mut out, mut err) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(&cli, &mut out, &mut err));
                let _ = stdout.write_all(&out);
                let _ = stderr.write_all(&err);
                r
            }
            Err(e) => Err(Failure::Runtime(e.to_string())),
        },
        None => dispatch(&cli, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_RUNTIME
        }
    }
}
