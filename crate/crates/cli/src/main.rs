//! `ttnn`: phantoms, masks, k-space simulation, reconstruction and checks.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use ttnn::admm::{self, IterationRecord};
use ttnn::check::{run_checks, CheckLevel};
use ttnn::io::{self, KSpaceFile};
use ttnn::mri::{self, PhantomKind, RadialParams, SamplingSpec};
use ttnn::{tt_svd, ttnn as nuclear, transformed_multirank, ComplexTensor3, Dims};

use config::{build_transform, Mode, RunConfig, TransformSpec};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ttnn::Error),
    Input(PathBuf, ttnn::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<ttnn::Error> for CliError {
    fn from(e: ttnn::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ttnn::Error::*;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) | CliError::Input(_, e) => match e {
                Parameter(_) => 2,
                Dimension(_) | Format(_) | Io(_) | NotUnitary { .. } => 3,
                Numeric(_) | Divergence { .. } | SvdNoConvergence { .. } => 4,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Runs a reader and tags its failure with the path.
fn load<T>(p: &Path, read: impl FnOnce(&Path) -> ttnn::Result<T>) -> Result<T> {
    read(p).map_err(|e| CliError::Input(p.to_path_buf(), e))
}

#[derive(Parser)]
#[command(name = "ttnn", version, about = "Transformed tensor nuclear norm reconstruction of dynamic MRI")]
struct Cli {
    /// Seed for every random draw of the command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads. 0 runs sequentially; omitted uses all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dynamic phantom.
    Phantom(PhantomArgs),
    /// Generate a sampling mask.
    Mask(MaskArgs),
    /// Simulate undersampled k-space from an image series.
    Forward(ForwardArgs),
    /// Reconstruct an image series from k-space.
    Recon(ReconArgs),
    /// Transformed tensor SVD of a tensor.
    Tsvd(TsvdArgs),
    /// SNR of a reconstruction against a reference.
    Metrics(MetricsArgs),
    /// Run the built-in invariant suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct PhantomArgs {
    /// moving_ellipse, rotating_bars or low_tubal_rank[:rank[:transform]]
    #[arg(long, default_value = "moving_ellipse")]
    kind: String,
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 64)]
    ny: usize,
    #[arg(long, default_value_t = 8)]
    nt: usize,
    #[arg(long, default_value = "phantom")]
    name: String,
    /// Also write one magnitude PGM per frame.
    #[arg(long)]
    pgm: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pattern {
    Random,
    Radial,
    Vds,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long, value_enum, default_value = "radial")]
    pattern: Pattern,
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 64)]
    ny: usize,
    #[arg(long, default_value_t = 8)]
    nt: usize,
    /// Sampled fraction for the random pattern.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    /// Spokes per frame for the radial pattern.
    #[arg(long, default_value_t = 16)]
    lines: usize,
    /// Use the same spokes in every frame.
    #[arg(long)]
    frozen: bool,
    /// Acceleration factor for the vds pattern.
    #[arg(long, default_value_t = 4.0)]
    accel: f64,
    #[arg(long, default_value = "mask")]
    name: String,
    #[arg(long)]
    pgm: bool,
}

#[derive(Args)]
struct ForwardArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// Standard deviation of complex Gaussian noise on each part.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value = "kspace")]
    name: String,
}

#[derive(Args)]
struct ReconArgs {
    #[arg(long)]
    kspace: PathBuf,
    /// Overrides the mask path stored in the k-space file.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ground truth for reporting SNR.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value = "recon")]
    name: String,
    #[arg(long)]
    pgm: bool,
}

#[derive(Args)]
struct TsvdArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// fft, dct, identity, matrix or random
    #[arg(long, default_value = "fft")]
    transform: String,
    /// n3 x n3 x 1 tensor file holding the matrix for --transform matrix.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Rank cut relative to the largest singular value.
    #[arg(long, default_value_t = ttnn::tsvd::DEFAULT_RANK_TOL)]
    tol: f64,
    #[arg(long, default_value = "tsvd")]
    name: String,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    rec: PathBuf,
    #[arg(long)]
    reference: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(value_parser = ["quick", "full"], default_value = "quick")]
    level: String,
}

/// Collects what a run read, wrote and decided, for its manifest.
struct Run {
    command: &'static str,
    out: PathBuf,
    seed: u64,
    threads: Option<usize>,
    params: Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    start: Instant,
}

impl Run {
    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn write(&mut self, file: &str, bytes: &[u8]) -> Result<()> {
        io::write_atomic(self.path(file), bytes)?;
        self.outputs.push(file.to_string());
        Ok(())
    }

    fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    fn pgms(&mut self, stem: &str, x: &ComplexTensor3) -> Result<()> {
        for (k, img) in io::magnitude_pgms(x).iter().enumerate() {
            self.write(&format!("{stem}_frame{:03}.pgm", k + 1), img)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        let manifest = json!({
            "command": self.command,
            "params": self.params,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "threads": self.threads,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.start.elapsed().as_secs_f64(),
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        io::write_atomic(self.path(&format!("{}.manifest.json", self.command)), text.as_bytes())?;
        Ok(())
    }
}

fn dims(nx: usize, ny: usize, nt: usize) -> Result<Dims> {
    if nx == 0 || ny == 0 || nt == 0 {
        return Err(CliError::Usage("nx, ny and nt must be positive".into()));
    }
    Ok(Dims::new(nx, ny, nt))
}

fn cmd_phantom(run: &mut Run, a: &PhantomArgs) -> Result<()> {
    let kind: PhantomKind = a.kind.parse()?;
    dims(a.nx, a.ny, a.nt)?;
    run.params = json!({"kind": a.kind, "nx": a.nx, "ny": a.ny, "nt": a.nt, "name": a.name, "pgm": a.pgm});
    let x = mri::make_phantom(a.nx, a.ny, a.nt, &kind, run.seed)?;
    run.write(&format!("{}.t2t", a.name), &io::encode_tensor(&x)?)?;
    if a.pgm {
        run.pgms(&a.name, &x)?;
    }
    println!("phantom {} {}", kind.name(), x.dims());
    Ok(())
}

fn cmd_mask(run: &mut Run, a: &MaskArgs) -> Result<()> {
    let d = dims(a.nx, a.ny, a.nt)?;
    let spec = match a.pattern {
        Pattern::Random => {
            run.params = json!({"pattern": "random", "fraction": a.fraction});
            mri::gen_random_mask(d, a.fraction, run.seed)?
        }
        Pattern::Radial => {
            let mut p = RadialParams::seeded(a.lines, run.seed);
            if a.frozen {
                p = p.frozen();
            }
            run.params = json!({"pattern": "radial", "lines": a.lines, "frozen": a.frozen,
                "base_angle": p.base_angle, "angle_increment": p.angle_increment});
            mri::gen_pseudo_radial_mask_with(a.nx, a.ny, a.nt, &p)?
        }
        Pattern::Vds => {
            run.params = json!({"pattern": "vds", "accel": a.accel});
            mri::gen_vds_mask(a.nx, a.ny, a.nt, a.accel, run.seed)?
        }
    };
    let m = spec.mask();
    if let Value::Object(o) = &mut run.params {
        o.insert("nx".into(), a.nx.into());
        o.insert("ny".into(), a.ny.into());
        o.insert("nt".into(), a.nt.into());
        o.insert("name".into(), a.name.clone().into());
        o.insert("count".into(), m.count().into());
    }
    run.write(&format!("{}.t2m", a.name), &io::encode_mask(m)?)?;
    if a.pgm {
        let as_image = ComplexTensor3::from_fn(d, |i, j, k| ttnn::C64::new(m.get(i, j, k) as u8 as f64, 0.0));
        run.pgms(&a.name, &as_image)?;
    }
    println!("mask {} sampled {} of {} ({:.4})", spec.generator, m.count(), d.len(), m.fraction());
    Ok(())
}

fn cmd_forward(run: &mut Run, a: &ForwardArgs) -> Result<()> {
    run.input(&a.image);
    run.input(&a.mask);
    let x = load(&a.image, |p| io::read_tensor(p))?;
    let spec = SamplingSpec::new(load(&a.mask, |p| io::read_mask(p))?, "file", 0);
    run.params = json!({"sigma": a.sigma, "name": a.name});
    let b = mri::add_noise(&mri::forward(&x, &spec)?, a.sigma, run.seed)?;
    let file = KSpaceFile { values: b, mask_path: a.mask.display().to_string() };
    run.write(&format!("{}.t2k", a.name), &io::encode_kspace(&file)?)?;
    println!("forward {} samples", file.values.len());
    Ok(())
}

fn history_csv(history: &[IterationRecord]) -> String {
    let mut s = String::from("iter,objective,fidelity,ttnn,primal_residual,elapsed_ms\n");
    for r in history {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e},{:.3}",
            r.iter, r.objective, r.fidelity, r.ttnn, r.primal_residual, r.elapsed_ms
        );
    }
    s
}

fn cmd_recon(run: &mut Run, a: &ReconArgs) -> Result<()> {
    run.input(&a.kspace);
    let k = load(&a.kspace, |p| io::read_kspace(p))?;
    let mask_path = match &a.mask {
        Some(p) => p.clone(),
        None => {
            let p = PathBuf::from(&k.mask_path);
            if p.is_relative() && !p.exists() {
                a.kspace.parent().unwrap_or(Path::new(".")).join(p)
            } else {
                p
            }
        }
    };
    run.input(&mask_path);
    let spec = SamplingSpec::new(load(&mask_path, |p| io::read_mask(p))?, "file", 0);
    let cfg = match &a.config {
        Some(p) => {
            run.input(p);
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(p.clone(), e.into()))?;
            RunConfig::parse(&text, p.parent().unwrap_or(Path::new(".")))?
        }
        None => RunConfig::parse("{}", Path::new("."))?,
    };
    let seed = cfg.seed.unwrap_or(run.seed);
    let nt = spec.dims().n3;
    run.params = json!({"config": cfg.to_json(), "name": a.name, "pgm": a.pgm});
    let report = match cfg.mode {
        Mode::Classic => admm::solve(&k.values, &spec, &cfg.admm(nt, seed)?)?,
        Mode::Generalized => {
            let schedule = cfg.expand_schedule(nt, seed)?;
            let init = build_transform(&cfg.transform, nt, seed, "transform")?;
            admm::solve_generalized(&k.values, &spec, &schedule, &init)?
        }
    };
    let x = &report.reconstruction;
    run.write(&format!("{}.t2t", a.name), &io::encode_tensor(x)?)?;
    run.write(&format!("{}_history.csv", a.name), history_csv(&report.history).as_bytes())?;
    if a.pgm {
        run.pgms(&a.name, x)?;
    }
    println!("iterations {} converged {}", report.iterations_run, report.converged);
    if let Some(last) = report.history.last() {
        println!("objective {:e}", last.objective);
    }
    if let Some(r) = &a.reference {
        run.input(r);
        println!("snr_db {}", mri::snr(x, &load(r, |p| io::read_tensor(p))?)?);
    }
    Ok(())
}

fn cmd_tsvd(run: &mut Run, a: &TsvdArgs) -> Result<()> {
    run.input(&a.tensor);
    let x = load(&a.tensor, |p| io::read_tensor(p))?;
    let spec = TransformSpec { kind: a.transform.clone(), matrix_path: a.matrix.clone() };
    let t = build_transform(&spec, x.dims().n3, run.seed, "transform")
        .map_err(|e| CliError::Usage(e.to_string().replace("config key 'transform", "option '--transform")))?;
    run.params = json!({"transform": a.transform, "matrix": a.matrix.as_ref().map(|p| p.display().to_string()),
        "tol": a.tol, "name": a.name});
    let f = tt_svd(&x, &t)?;
    for (part, tensor) in [("u", &f.u), ("s", &f.s), ("v", &f.v)] {
        run.write(&format!("{}_{part}.t2t", a.name), &io::encode_tensor(tensor)?)?;
    }
    let listing = io::format_singular_values(&f.singular_values);
    run.write(&format!("{}_singular_values.txt", a.name), listing.as_bytes())?;
    let ranks = transformed_multirank(&x, &t, a.tol)?;
    let ranks_text: Vec<String> = ranks.ranks.iter().map(|r| r.to_string()).collect();
    println!("ttnn {}", nuclear(&x, &t)?);
    println!("multirank {}", ranks_text.join(" "));
    println!("sum_rank {}", ranks.sum());
    Ok(())
}

fn cmd_metrics(run: &mut Run, a: &MetricsArgs) -> Result<()> {
    run.input(&a.rec);
    run.input(&a.reference);
    let snr = mri::snr(&load(&a.rec, |p| io::read_tensor(p))?, &load(&a.reference, |p| io::read_tensor(p))?)?;
    run.params = json!({"snr_db": if snr.is_finite() { json!(snr) } else { json!("inf") }});
    println!("snr_db {snr}");
    Ok(())
}

fn cmd_check(run: &mut Run, a: &CheckArgs) -> Result<bool> {
    let level: CheckLevel = a.level.parse()?;
    let report = run_checks(level);
    for r in &report.results {
        println!("{r}");
    }
    let failed: Vec<&str> = report.failures().map(|r| r.name).collect();
    run.params = json!({"level": a.level, "failed": failed});
    if !failed.is_empty() {
        eprintln!("error: {} invariant(s) violated: {}", failed.len(), failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn execute(cli: &Cli) -> Result<bool> {
    fs::create_dir_all(&cli.out)?;
    let mut run = Run {
        command: match cli.command {
            Command::Phantom(_) => "phantom",
            Command::Mask(_) => "mask",
            Command::Forward(_) => "forward",
            Command::Recon(_) => "recon",
            Command::Tsvd(_) => "tsvd",
            Command::Metrics(_) => "metrics",
            Command::Check(_) => "check",
        },
        out: cli.out.clone(),
        seed: cli.seed,
        threads: cli.threads,
        params: Value::Null,
        inputs: Vec::new(),
        outputs: Vec::new(),
        start: Instant::now(),
    };
    let ok = match &cli.command {
        Command::Phantom(a) => cmd_phantom(&mut run, a).map(|_| true),
        Command::Mask(a) => cmd_mask(&mut run, a).map(|_| true),
        Command::Forward(a) => cmd_forward(&mut run, a).map(|_| true),
        Command::Recon(a) => cmd_recon(&mut run, a).map(|_| true),
        Command::Tsvd(a) => cmd_tsvd(&mut run, a).map(|_| true),
        Command::Metrics(a) => cmd_metrics(&mut run, a).map(|_| true),
        Command::Check(a) => cmd_check(&mut run, a),
    }?;
    run.finish()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // work runs in parallel only inside a pool; 0 stays on this thread
    let result = match cli.threads {
        Some(0) => execute(&cli),
        n => match rayon::ThreadPoolBuilder::new().num_threads(n.unwrap_or(0)).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start thread pool: {e}"))),
        },
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
