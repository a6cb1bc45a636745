//! The `dtpc-di` command line: `bounds`, `pack`, `simulate` and `verify`.
//!
//! Every subcommand accepts `--config <file.toml>`; flags override values
//! from the file and unknown keys are rejected. Exit status is 0 on success,
//! 1 when a check fails, 2 for invalid configuration and 3 for I/O or file
//! format errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    argmax_reff_lower, check_lemma_separation, kappa_sweep, BoundInputs, BoundsReport,
};
use crate::channel::ChannelParams;
use crate::codebook::{
    admissible_amplitude, verify_packing, Codebook, GreedyPacker, PackingParams, PackingReport,
};
use crate::error::{Error, Result};
use crate::montecarlo::{run_sweep, EstimateKind, ExperimentSpec, TapSpec};
use crate::numeric::fmt17;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const OUT_DIR_ENV: &str = "DTPC_DI_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "dtpc-di",
    version,
    about = "Deterministic identification over the Poisson ISI channel"
)]
pub struct Cli {
    /// Directory for report files.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form capacity, rate and error bounds.
    Bounds(BoundsArgs),
    /// Build a codebook by greedy sphere packing and check it.
    Pack(PackArgs),
    /// Monte Carlo sweep of type I/II error rates over n.
    Simulate(SimulateArgs),
    /// Check a codebook file: packing invariants and converse separation.
    Verify(VerifyArgs),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// ISI rate; required unless `--sweep-kappa` is given.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// `start:stop:step` grid for the effective-rate sweep.
    #[arg(long)]
    pub sweep_kappa: Option<String>,
    #[arg(long)]
    pub t_cir: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long = "c")]
    pub c_const: Option<f64>,
    #[arg(long)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Cube edge `A`; defaults to `min(P_ave, P_max)`.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub p_ave: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long, conflicts_with = "radius")]
    pub a: Option<f64>,
    /// Packing radius `r0`; sets `a` accordingly.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_rejections: Option<u64>,
    #[arg(long)]
    pub max_codewords: Option<usize>,
    #[arg(long)]
    pub cover_samples: Option<u64>,
    /// Codebook file; defaults to `codebook.txt` in the output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// TOML file with any subset of the sweep fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Fixed tap profile, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub p_ave: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long = "c")]
    pub c_const: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pair_budget: Option<usize>,
    #[arg(long)]
    pub message_budget: Option<usize>,
    #[arg(long)]
    pub max_codewords: Option<usize>,
    #[arg(long)]
    pub max_rejections: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    n_grid: Option<Vec<usize>>,
    taps: Option<TapSpec>,
    lambda: Option<f64>,
    p_ave: Option<f64>,
    p_max: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    c_const: Option<f64>,
    trials: Option<u64>,
    base_seed: Option<u64>,
    pair_budget: Option<usize>,
    message_budget: Option<usize>,
    max_codewords: Option<usize>,
    max_rejections: Option<u64>,
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Codebook file written by `pack`.
    #[serde(skip)]
    pub codebook: PathBuf,
    /// Channel taps for the separation check.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Peak rate in the separation scale; defaults to the cube edge `A`.
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub cover_samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn read_config<T: DeserializeOwned + Default>(
    path: Option<&Path>,
) -> std::result::Result<T, Failure> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Writes `<stem>.csv` and/or `<stem>.json` according to `format`.
fn emit(
    out_dir: &Path,
    format: Format,
    stem: &str,
    csv: &str,
    json: &Value,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        let p = out_dir.join(format!("{stem}.csv"));
        fs::write(&p, csv)?;
        written.push(p);
    }
    if matches!(format, Format::Json | Format::Both) {
        let p = out_dir.join(format!("{stem}.json"));
        fs::write(
            &p,
            serde_json::to_string_pretty(json).expect("json value") + "\n",
        )?;
        written.push(p);
    }
    Ok(written)
}

fn key_value_csv(schema: &str, records: &[(&str, f64)]) -> String {
    let mut out = format!("#schema={schema}\nkey,value\n");
    for (k, v) in records {
        out.push_str(&format!("{k},{}\n", fmt17(*v)));
    }
    out
}

fn key_value_json(schema: &str, records: &[(&str, f64)]) -> Value {
    let map: serde_json::Map<String, Value> = records
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    json!({ "schema": schema, "values": map })
}

fn parse_grid(s: &str) -> std::result::Result<(f64, f64, f64), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::Config(format!("sweep_kappa: expected start:stop:step, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    Ok((v[0], v[1], v[2]))
}

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! merge {
    ($flags:expr, $file:expr; $($f:ident),+) => {
        $( if $flags.$f.is_none() { $flags.$f = $file.$f.take(); } )+
    };
}

fn cmd_bounds(mut args: BoundsArgs, out_dir: &Path, format: Format) -> Outcome {
    let mut file: BoundsArgs = read_config(args.config.as_deref())?;
    merge!(args, file; n, kappa, sweep_kappa, t_cir, a, b, c_const, rho0, amplitude, p_max, lambda);
    if args.kappa.is_none() && args.sweep_kappa.is_none() {
        return Err(Failure::Config(
            "kappa: required unless --sweep-kappa is given".into(),
        ));
    }
    let d = BoundInputs::default();
    let n = args.n.unwrap_or(d.n);
    let t_cir = args.t_cir.unwrap_or(d.t_cir);
    let report = args
        .kappa
        .map(|kappa| {
            BoundsReport::evaluate(BoundInputs {
                n,
                kappa,
                t_cir,
                a: args.a.unwrap_or(d.a),
                b: args.b.unwrap_or(d.b),
                c_const: args.c_const.unwrap_or(d.c_const),
                rho0: args.rho0.unwrap_or(d.rho0),
                amplitude: args.amplitude.unwrap_or(d.amplitude),
                p_max: args.p_max.unwrap_or(d.p_max),
                lambda: args.lambda.unwrap_or(d.lambda),
            })
        })
        .transpose()?;
    let sweep = match args.sweep_kappa.as_deref() {
        Some(g) => {
            let (start, stop, step) = parse_grid(g)?;
            Some(kappa_sweep(n, t_cir, start, stop, step)?)
        }
        None => None,
    };

    if let Some(r) = &report {
        let recs = r.records();
        emit(
            out_dir,
            format,
            "bounds",
            &key_value_csv("dtpc-di-bounds/1", &recs),
            &key_value_json("dtpc-di-bounds/1", &recs),
        )?;
        say!(
            "capacity in [{}, {}] x n log2 n; R_eff in [{}, {}] bit/s",
            r.capacity_lower,
            r.capacity_upper,
            r.reff_lower,
            r.reff_upper
        );
    }
    if let Some(points) = &sweep {
        let best = argmax_reff_lower(points);
        let mut csv = String::from("#schema=dtpc-di-kappa-sweep/1\nkappa,capacity_lower,capacity_upper,reff_lower,reff_upper,argmax\n");
        for (k, p) in points.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt17(p.kappa),
                fmt17(p.capacity_lower),
                fmt17(p.capacity_upper),
                fmt17(p.reff_lower),
                fmt17(p.reff_upper),
                Some(k) == best
            ));
        }
        let json = json!({ "schema": "dtpc-di-kappa-sweep/1", "n": n, "t_cir": t_cir, "argmax": best, "points": points });
        emit(out_dir, format, "kappa_sweep", &csv, &json)?;
        if let Some(k) = best {
            say!(
                "R_eff lower bound peaks at kappa = {} (1 - 1/ln n = {})",
                points[k].kappa,
                1.0 - 1.0 / (n as f64).ln()
            );
        }
    }
    Ok(EXIT_OK)
}

fn packing_records(rep: &PackingReport, cb: &Codebook) -> Vec<(&'static str, f64)> {
    let p = cb.params();
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    vec![
        ("n", rep.n as f64),
        ("m", rep.m as f64),
        ("amplitude", p.amplitude()),
        ("a", p.a()),
        ("b", p.b()),
        ("kappa", p.kappa()),
        ("theta_n", p.theta_n()),
        ("r0", rep.r0),
        ("rate", cb.rate().unwrap_or(f64::NAN)),
        ("min_distance", rep.min_distance.unwrap_or(f64::NAN)),
        ("separation_ok", b(rep.separation_ok)),
        ("linf_ok", b(rep.linf_ok)),
        ("average_ok", b(rep.average_ok)),
        ("cover_samples", rep.cover_samples as f64),
        ("covered", rep.covered as f64),
        ("covering_fraction", rep.covering_fraction),
        ("log2_density", rep.log2_density),
        ("density_above_lower", b(rep.density_above_lower)),
        ("density_below_upper", b(rep.density_below_upper)),
        ("log2_size_lower_bound", rep.log2_size_lower_bound),
        ("degenerate", b(rep.degenerate)),
        (
            "rejection_streak",
            cb.saturation_evidence().map_or(f64::NAN, |s| s as f64),
        ),
    ]
}

fn cmd_pack(mut args: PackArgs, out_dir: &Path, format: Format) -> Outcome {
    let mut file: PackArgs = read_config(args.config.as_deref())?;
    merge!(args, file; n, amplitude, p_ave, p_max, a, radius, b, kappa, seed, max_rejections, max_codewords, cover_samples, output);
    let n = args
        .n
        .ok_or_else(|| Failure::Config("n: required".into()))?;
    let amplitude = match (args.amplitude, args.p_ave, args.p_max) {
        (Some(a), None, None) => a,
        (None, Some(ave), Some(max)) => admissible_amplitude(ave, max)?,
        (None, None, None) => 1.0,
        _ => {
            return Err(Failure::Config(
                "amplitude: give either --amplitude or both --p-ave and --p-max".into(),
            ))
        }
    };
    let b = args.b.unwrap_or(crate::codebook::DEFAULT_B);
    let kappa = args.kappa.unwrap_or(0.0);
    let params = match (args.radius, args.a) {
        (Some(_), Some(_)) => return Err(Failure::Config("radius: conflicts with a".into())),
        (Some(r0), None) => PackingParams::with_radius(n, amplitude, r0, b, kappa)?,
        (None, a) => PackingParams::new(
            n,
            amplitude,
            a.unwrap_or(crate::codebook::DEFAULT_A),
            b,
            kappa,
        )?,
    };
    let seed = args.seed.unwrap_or(0);
    let mut packer = GreedyPacker::new(params).max_rejections(
        args.max_rejections
            .unwrap_or(crate::codebook::DEFAULT_MAX_REJECTIONS),
    );
    if let Some(cap) = args.max_codewords {
        if cap == 0 {
            return Err(Failure::Config("max_codewords: must be at least 1".into()));
        }
        packer = packer.max_codewords(cap);
    }
    let cover = args.cover_samples.unwrap_or(100_000);
    let cb = packer.build(seed)?;
    let rep = verify_packing(&cb, cover, seed)?;

    let path = args.output.unwrap_or_else(|| out_dir.join("codebook.txt"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::from)?;
    }
    fs::write(&path, cb.to_text()).map_err(Error::from)?;
    let recs = packing_records(&rep, &cb);
    let mut json = key_value_json("dtpc-di-packing/1", &recs);
    json["stop"] = json!(cb.stop_reason());
    emit(
        out_dir,
        format,
        "packing_report",
        &key_value_csv("dtpc-di-packing/1", &recs),
        &json,
    )?;

    match cb.rate() {
        Some(r) => say!("M={} log2M/(n log2 n)={}", cb.len(), r),
        None => say!("M={}", cb.len()),
    }
    if rep.degenerate {
        eprintln!(
            "warning: degenerate regime, r0 >= A sqrt(n)/2 leaves room for at most one codeword"
        );
    }
    say!("codebook written to {}", path.display());
    Ok(EXIT_OK)
}

fn build_spec(args: &SimulateArgs) -> std::result::Result<ExperimentSpec, Failure> {
    let file: SimulateFile = read_config(args.config.as_deref())?;
    let mut s = ExperimentSpec::demo();
    macro_rules! set {
        ($($src:expr => $dst:ident),+) => { $( if let Some(v) = $src { s.$dst = v; } )+ };
    }
    set!(file.n_grid => n_grid, file.taps => taps, file.lambda => lambda, file.p_ave => p_ave,
        file.p_max => p_max, file.a => a, file.b => b, file.c_const => c_const, file.trials => trials,
        file.base_seed => base_seed, file.pair_budget => pair_budget, file.message_budget => message_budget,
        file.max_rejections => max_rejections);
    if file.max_codewords.is_some() {
        s.max_codewords = file.max_codewords;
    }
    set!(args.n_grid.clone() => n_grid, args.lambda => lambda, args.p_ave => p_ave, args.p_max => p_max,
        args.a => a, args.b => b, args.c_const => c_const, args.trials => trials, args.seed => base_seed,
        args.pair_budget => pair_budget, args.message_budget => message_budget,
        args.max_rejections => max_rejections);
    if let Some(rho) = args.rho.clone() {
        s.taps = TapSpec::Fixed { rho };
    }
    if args.max_codewords.is_some() {
        s.max_codewords = args.max_codewords;
    }
    s.validate()?;
    Ok(s)
}

fn cmd_simulate(args: SimulateArgs, out_dir: &Path, format: Format) -> Outcome {
    let spec = build_spec(&args)?;
    let table = match args.threads {
        Some(0) => return Err(Failure::Config("threads: must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::Config(format!("threads: {e}")))?
            .install(|| run_sweep(&spec))?,
        None => run_sweep(&spec)?,
    };
    let json: Value = serde_json::from_str(&table.to_json()).expect("table json");
    emit(out_dir, format, "sweep", &table.to_csv(), &json)?;
    if matches!(format, Format::Csv | Format::Both) {
        fs::write(out_dir.join("sweep_detail.csv"), table.details_csv()).map_err(Error::from)?;
    }
    for pair in table.rows.chunks(2) {
        let show = |r: &crate::montecarlo::SweepRow| match &r.estimate {
            Some(e) => format!(
                "{} max {:.4} [{:.4}, {:.4}] bound {:.4} {}",
                r.kind.as_str(),
                e.p_hat,
                e.ci_low,
                e.ci_high,
                e.clamped_bound(),
                if r.dominance { "ok" } else { "VIOLATED" }
            ),
            None => format!("{} {}", r.kind.as_str(), r.status),
        };
        let line: Vec<String> = pair.iter().map(show).collect();
        say!("n={} M={} | {}", pair[0].n, pair[0].m, line.join(" | "));
    }
    say!(
        "trend non-increasing: type1 {} type2 {}",
        table.non_increasing(EstimateKind::Type1),
        table.non_increasing(EstimateKind::Type2)
    );
    if !table.rows.is_empty() && table.failed_rows() == table.rows.len() {
        eprintln!("every cell failed");
        return Ok(EXIT_CHECK);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    schema: &'static str,
    packing: &'a PackingReport,
    lemma_theta_prime: f64,
    lemma_passed: bool,
    lemma_passed_padded: bool,
    lemma_failing_pairs: usize,
    passed: bool,
}

fn cmd_verify(mut args: VerifyArgs, out_dir: &Path, format: Format) -> Outcome {
    let mut file: VerifyArgs = read_config(args.config.as_deref())?;
    merge!(args, file; rho, lambda, p_max, cover_samples, seed);
    let channel = ChannelParams::new(
        args.rho.unwrap_or_else(|| vec![1.0]),
        args.lambda.unwrap_or(1.0),
    )?;
    let text = fs::read_to_string(&args.codebook)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.codebook.display())))?;
    let cb = Codebook::from_text(&text)?;
    let p_max = args.p_max.unwrap_or(cb.params().amplitude());
    let rep = verify_packing(
        &cb,
        args.cover_samples.unwrap_or(100_000),
        args.seed.unwrap_or(0),
    )?;
    let lemma = check_lemma_separation(&cb, &channel, cb.params().b(), p_max)?;
    let packing_ok = rep.separation_ok && rep.linf_ok && rep.covering_fraction == 1.0;
    let passed = packing_ok && lemma.passed();

    let b = |v: bool| if v { 1.0 } else { 0.0 };
    let mut recs = packing_records(&rep, &cb);
    recs.extend([
        ("lemma_theta_prime", lemma.theta_prime),
        ("lemma_passed", b(lemma.passed())),
        ("lemma_passed_padded", b(lemma.passed_padded)),
        ("lemma_failing_pairs", lemma.failing_pairs().count() as f64),
        ("passed", b(passed)),
    ]);
    let summary = VerifySummary {
        schema: "dtpc-di-verify/1",
        packing: &rep,
        lemma_theta_prime: lemma.theta_prime,
        lemma_passed: lemma.passed(),
        lemma_passed_padded: lemma.passed_padded,
        lemma_failing_pairs: lemma.failing_pairs().count(),
        passed,
    };
    let json = serde_json::to_value(&summary).expect("summary json");
    emit(
        out_dir,
        format,
        "verify_report",
        &key_value_csv("dtpc-di-verify/1", &recs),
        &json,
    )?;
    say!(
        "M={} separation {} linf {} covering {} lemma {}",
        cb.len(),
        rep.separation_ok,
        rep.linf_ok,
        rep.covering_fraction,
        lemma.passed()
    );
    if let Some(w) = lemma.worst_pair().filter(|_| !lemma.passed()) {
        say!(
            "worst pair ({}, {}) margin {} <= theta' {}",
            w.i,
            w.j,
            w.margin_message,
            lemma.theta_prime
        );
    }
    Ok(if passed { EXIT_OK } else { EXIT_CHECK })
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (out, fmt) = (cli.out_dir.as_path(), cli.format);
    let outcome = match cli.command {
        Command::Bounds(a) => cmd_bounds(a, out, fmt),
        Command::Pack(a) => cmd_pack(a, out, fmt),
        Command::Simulate(a) => cmd_simulate(a, out, fmt),
        Command::Verify(a) => cmd_verify(a, out, fmt),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}
