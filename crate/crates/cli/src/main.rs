use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cptkit::alignment_protocol::{sweep, sweep_csv};
use cptkit::cpt_operators::{KleinOperators, PhaseConvention, Sector};
use cptkit::dfs_codec::{
    build_code, covariant_noise_trial, decode, encode, parse_message, random_message, DfsCode,
    MessageSpec, NoiseModel,
};
use cptkit::linalg::{MatrixDoc, ALGEBRAIC_TOL, SPECTRAL_TOL};
use cptkit::momentum_grid::{grid_cpt_matrix, GridLayout, MomentumGrid, TestFunction};
use cptkit::seeding::{domain, stream_rng};
use cptkit::spin_spaces::{
    massive_spin_s_space, massless_allowed_states, EmbeddingMode, Spin, SpinSpace, SpinSpaceDoc,
};
use cptkit::suites::{self, PhaseChoice};
use cptkit::{CptError, Report};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

/// Default cap on the dimension of an explicit spin tensor factor 2^(2s).
const DEFAULT_CAP: u64 = 256;

#[derive(Parser)]
#[command(name = "cptkit", version, about = "CPT operators, spin spaces and CPT frameness tools")]
struct Cli {
    /// Root seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (or directory for `build`); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Tolerance for the suite's algebraic checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build C, PT and CPT for a spin space and export them.
    Build(BuildArgs),
    /// Run a verification suite and emit its report.
    #[command(subcommand)]
    Verify(Suite),
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepKind),
    /// Encode a message into a CPT sector, optionally under covariant noise.
    Encode(EncodeArgs),
    /// Decode a state vector against a sector code.
    Decode(DecodeArgs),
    /// Export an artifact in its interchange format.
    Export(ExportArgs),
}

fn parse_spin(s: &str) -> Result<Spin, String> {
    s.parse::<Spin>().map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
struct SpaceArgs {
    /// Spin as "n" or "n/2".
    #[arg(long, value_parser = parse_spin, default_value = "1/2")]
    spin: Spin,
    #[arg(long, conflicts_with = "massless")]
    massive: bool,
    #[arg(long)]
    massless: bool,
}

impl SpaceArgs {
    fn build(&self, explicit: bool) -> cptkit::Result<SpinSpace> {
        let mode = if explicit {
            EmbeddingMode::Explicit {
                max_primitives: max_primitives()?,
            }
        } else {
            EmbeddingMode::Combinatorial
        };
        if self.massless {
            massless_allowed_states(self.spin, mode)
        } else {
            massive_spin_s_space(self.spin, mode)
        }
    }
}

#[derive(Args, Clone)]
struct PhaseArgs {
    /// "zero", "random", or a phase-convention file.
    #[arg(long, default_value = "zero")]
    phases: String,
}

impl PhaseArgs {
    fn convention(&self, space: &SpinSpace, seed: u64) -> cptkit::Result<PhaseConvention> {
        match self.phases.as_str() {
            "zero" => Ok(PhaseConvention::zero()),
            "random" => Ok(PhaseConvention::random_admissible(
                space,
                &mut stream_rng(seed, domain::PHASES, 0),
            )),
            path => PhaseConvention::from_json(&read(Path::new(path))?),
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    phases: PhaseArgs,
    /// Include explicit tensor-product amplitudes in the space manifest.
    #[arg(long)]
    embed: bool,
}

#[derive(Subcommand)]
enum Suite {
    /// Space dimensions and zero-phase CPT form.
    Dimensions,
    /// Klein four-group law for {1, C, PT, CPT}.
    Klein {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        phases: PhaseArgs,
        /// Number of conventions when --phases random.
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Single-site reduced states of Dicke states.
    #[command(name = "lemma1")]
    DickeReduction {
        #[arg(long, value_parser = parse_spin, default_value = "1/2")]
        spin: Spin,
    },
    /// Invariance under sector-block Hamiltonians.
    UnitaryConsistency {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Loss of invariance under an anti-unitary symmetry.
    AntiunitaryDemo {
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        t: f64,
    },
    /// Alignment rate and tau measure properties.
    Measures,
    /// Monte-Carlo alignment against the Helstrom bound.
    Alignment {
        #[arg(long, default_value = "0.6,0.75,0.9")]
        q0_grid: String,
        #[arg(long = "N-grid", default_value = "1..8")]
        n_grid: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Grid CPT on a momentum grid.
    Momentum {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 100)]
        wavepackets: usize,
        /// Grid points per side of the origin.
        #[arg(long, default_value_t = 16)]
        points: usize,
        #[arg(long, default_value_t = 4.0)]
        p_max: f64,
    },
    /// Decoherence-free sector codes.
    Dfs {
        #[arg(long, default_value_t = 100)]
        messages: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
}

#[derive(Subcommand)]
enum SweepKind {
    /// Alignment error over (q0, N).
    Align {
        #[arg(long)]
        q0_grid: String,
        #[arg(long = "N-grid")]
        n_grid: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

#[derive(Args, Clone)]
struct CodeArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    phases: PhaseArgs,
    /// "+" or "-".
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    sector: String,
}

impl CodeArgs {
    fn code(&self, seed: u64) -> cptkit::Result<DfsCode> {
        let space = self.space.build(false)?;
        let conv = self.phases.convention(&space, seed)?;
        let ops = KleinOperators::build(&space, &conv)?;
        build_code(&space, ops.cpt(), self.sector.parse::<Sector>()?)
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// "re,im;re,im;…" or "random".
    #[arg(long)]
    message: String,
    /// twirl, dephase or depolarize(p); runs a noise trial and emits a report.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// State vector file in the matrix interchange format.
    #[arg(long)]
    state: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Artifact {
    Space,
    C,
    Pt,
    Cpt,
    Phases,
    GridCpt,
    Wavepacket,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(value_enum)]
    what: Artifact,
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    phases: PhaseArgs,
    /// Grid points per side (grid artifacts).
    #[arg(long, default_value_t = 16)]
    points: usize,
    #[arg(long, default_value_t = 4.0)]
    p_max: f64,
}

enum Failure {
    Usage(String),
    Capacity(String),
    Checks(Vec<String>),
}

impl From<CptError> for Failure {
    fn from(e: CptError) -> Self {
        match e {
            CptError::Capacity(_) => Failure::Capacity(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> cptkit::Result<String> {
    fs::read_to_string(path).map_err(|e| CptError::Validation(format!("{}: {e}", path.display())))
}

fn write(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn max_primitives() -> cptkit::Result<u32> {
    let cap = match std::env::var("CPTKIT_CAP") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&c| c >= 2)
            .ok_or_else(|| CptError::Parse(format!("CPTKIT_CAP={v:?} is not an integer >= 2")))?,
        Err(_) => DEFAULT_CAP,
    };
    Ok(cap.ilog2())
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn parse_floats(text: &str) -> Result<Vec<f64>, Failure> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let values = values.map_err(|e| Failure::Usage(format!("bad number in {text:?}: {e}")))?;
    if values.is_empty() {
        return Err(Failure::Usage("grid must not be empty".into()));
    }
    Ok(values)
}

/// Comma-separated integers or inclusive ranges "a..b".
fn parse_counts(text: &str) -> Result<Vec<u32>, Failure> {
    let bad = |s: &str| Failure::Usage(format!("bad copy count {s:?}"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| bad(item))?;
                let b: u32 = b.trim().parse().map_err(|_| bad(item))?;
                if a > b {
                    return Err(bad(item));
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad(item))?),
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("grid must not be empty".into()));
    }
    Ok(out)
}

fn report_csv(report: &Report) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["suite", "timestamp", "seed", "name", "pass", "residual", "tolerance", "notes"])
        .map_err(io)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for c in &report.checks {
        w.write_record([
            report.suite.clone(),
            report.timestamp.to_string(),
            report.seed.to_string(),
            c.name.clone(),
            c.pass.to_string(),
            opt(c.residual),
            opt(c.tolerance),
            c.notes.clone(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Usage(e.to_string()))
}

fn emit_report(cli: &Cli, report: Report) -> Outcome {
    let report = report.with_timestamp(timestamp());
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report_csv(&report)?,
    };
    write(cli.out.as_deref(), &text)?;
    let failing: Vec<String> = report.failures().map(|c| c.name.clone()).collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failing))
    }
}

fn run_build(cli: &Cli, args: &BuildArgs) -> Outcome {
    let space = args.space.build(args.embed)?;
    let conv = args.phases.convention(&space, cli.seed)?;
    let ops = KleinOperators::build(&space, &conv)?;
    println!(
        "s={} {} dim {}",
        space.spin,
        if space.massive { "massive" } else { "massless" },
        space.dim()
    );
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        let files = [
            ("space.json", serde_json::to_string_pretty(&SpinSpaceDoc::from_space(&space)).expect("space serialises")),
            ("phases.json", conv.to_json()),
            ("C.json", MatrixDoc::from_matrix(ops.c()).to_json()),
            ("PT.json", MatrixDoc::from_matrix(ops.pt()).to_json()),
            ("CPT.json", MatrixDoc::from_matrix(ops.cpt()).to_json()),
        ];
        for (name, text) in files {
            write(Some(&dir.join(name)), &(text + "\n"))?;
        }
    }
    Ok(())
}

fn run_verify(cli: &Cli, suite: &Suite) -> Outcome {
    let algebraic = cli.tol.unwrap_or(ALGEBRAIC_TOL);
    let report = match suite {
        Suite::Dimensions => suites::dimensions_suite()?,
        Suite::Klein { space, phases, count } => {
            let sp = space.build(false)?;
            let choice = match phases.phases.as_str() {
                "zero" => PhaseChoice::Zero,
                "random" => PhaseChoice::Random(*count),
                _ => PhaseChoice::Given(phases.convention(&sp, cli.seed)?),
            };
            suites::klein_suite(&sp, &choice, cli.seed, algebraic)?
        }
        Suite::DickeReduction { spin } => suites::dicke_reduction_suite(*spin, max_primitives()?)?,
        Suite::UnitaryConsistency { space, trials } => suites::unitary_consistency_suite(
            &space.build(false)?,
            *trials,
            cli.seed,
            cli.tol.unwrap_or(SPECTRAL_TOL),
        )?,
        Suite::AntiunitaryDemo { t } => suites::antiunitary_suite(*t)?,
        Suite::Measures => suites::measures_suite()?,
        Suite::Alignment { q0_grid, n_grid, trials } => suites::alignment_suite(
            &parse_floats(q0_grid)?,
            &parse_counts(n_grid)?,
            *trials,
            cli.seed,
        )?,
        Suite::Momentum { space, wavepackets, points, p_max } => {
            let grid = MomentumGrid::symmetric(*points, *p_max, false)?;
            suites::momentum_suite(&space.build(false)?, &grid, *wavepackets, cli.seed, algebraic)?
        }
        Suite::Dfs { messages, trials } => {
            suites::dfs_suite(&suites::dfs_spaces()?, *messages, *trials, cli.seed, algebraic)?
        }
    };
    emit_report(cli, report)
}

fn run_sweep(cli: &Cli, kind: &SweepKind) -> Outcome {
    let SweepKind::Align { q0_grid, n_grid, trials } = kind;
    let rows = sweep(&parse_floats(q0_grid)?, &parse_counts(n_grid)?, *trials, cli.seed)?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialise") + "\n",
    };
    write(cli.out.as_deref(), &text)
}

fn parse_noise(text: &str) -> Result<NoiseModel, Failure> {
    let t = text.trim();
    match t {
        "twirl" => Ok(NoiseModel::Twirl),
        "dephase" => Ok(NoiseModel::Dephase),
        _ => t
            .strip_prefix("depolarize(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|p| p.trim().parse::<f64>().ok())
            .map(NoiseModel::Depolarize)
            .ok_or_else(|| {
                Failure::Usage(format!("unknown noise {t:?}; expected twirl, dephase or depolarize(p)"))
            }),
    }
}

fn run_encode(cli: &Cli, args: &EncodeArgs) -> Outcome {
    let code = args.code.code(cli.seed)?;
    let random = args.message.trim() == "random";
    if let Some(noise) = &args.noise {
        let noise = parse_noise(noise)?;
        let message = if random {
            MessageSpec::Random
        } else {
            MessageSpec::Fixed(parse_message(&args.message)?)
        };
        let report = covariant_noise_trial(&code, &message, &noise, args.trials, cli.seed)?;
        return emit_report(cli, report);
    }
    let message = if random {
        random_message(code.logical_dim, &mut stream_rng(cli.seed, domain::MESSAGES, 0))
    } else {
        parse_message(&args.message)?
    };
    let state = encode(&message, &code)?;
    write(cli.out.as_deref(), &(MatrixDoc::from_vector(&state).to_json() + "\n"))
}

fn run_decode(cli: &Cli, args: &DecodeArgs) -> Outcome {
    let code = args.code.code(cli.seed)?;
    let state = MatrixDoc::from_json(&read(&args.state)?)?.to_vector()?;
    let (message, residual) = decode(&state, &code)?;
    let doc = serde_json::json!({
        "message": MatrixDoc::from_vector(&message),
        "residual": residual,
    });
    write(
        cli.out.as_deref(),
        &(serde_json::to_string_pretty(&doc).expect("decode result serialises") + "\n"),
    )
}

fn run_export(cli: &Cli, args: &ExportArgs) -> Outcome {
    let space = args.space.build(false)?;
    let conv = args.phases.convention(&space, cli.seed)?;
    let text = match args.what {
        Artifact::Space => {
            serde_json::to_string_pretty(&SpinSpaceDoc::from_space(&space)).expect("space serialises")
        }
        Artifact::Phases => conv.to_json(),
        Artifact::C | Artifact::Pt | Artifact::Cpt => {
            let ops = KleinOperators::build(&space, &conv)?;
            let m = match args.what {
                Artifact::C => ops.c(),
                Artifact::Pt => ops.pt(),
                _ => ops.cpt(),
            };
            MatrixDoc::from_matrix(m).to_json()
        }
        Artifact::GridCpt | Artifact::Wavepacket => {
            let grid = MomentumGrid::symmetric(args.points, args.p_max, false)?;
            let layout = GridLayout::from_space(&space, grid)?;
            if let Artifact::GridCpt = args.what {
                MatrixDoc::from_matrix(&grid_cpt_matrix(&layout, &conv)?).to_json()
            } else {
                let f = TestFunction::random_wavepacket(&layout, &mut stream_rng(cli.seed, domain::MOMENTUM, 0));
                f.to_doc().to_json()
            }
        }
    };
    write(cli.out.as_deref(), &(text + "\n"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Build(args) => run_build(&cli, args),
        Command::Verify(suite) => run_verify(&cli, suite),
        Command::Sweep(kind) => run_sweep(&cli, kind),
        Command::Encode(args) => run_encode(&cli, args),
        Command::Decode(args) => run_decode(&cli, args),
        Command::Export(args) => run_export(&cli, args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(names)) => {
            for n in names {
                eprintln!("FAIL {n}");
            }
            ExitCode::from(EXIT_FAIL)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CAPACITY)
        }
    }
}
