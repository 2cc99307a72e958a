use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anthill::array_model::{
    pattern, AngleGrid, ArrayGeometry, Excitation, RadiationPattern, DEFAULT_FLOOR_DB,
    DEFAULT_STEP_DEG,
};
use anthill::harness::bench;
use anthill::harness::{execute, Algorithm, ObjectiveKind, RunArtifact, RunConfig};
use anthill::objectives::SynthesisMode;
use anthill::pattern_metrics::{analyze, MetricsRecord};
use anthill::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Default directory for run artifacts when `--out` is not given.
const OUT_DIR_ENV: &str = "ANTHILL_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "anthill",
    version,
    about = "Linear array side-lobe synthesis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the normalized radiation pattern of an array to CSV.
    Pattern {
        #[command(flatten)]
        array: ArrayArgs,
        /// Output file (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lobe count, peak side-lobe level and FNBW of a pattern.
    Metrics {
        /// Pattern CSV as written by `pattern`; otherwise the array flags
        /// describe the pattern.
        #[arg(long = "in", value_name = "CSV")]
        input: Option<PathBuf>,
        #[command(flatten)]
        array: ArrayArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an optimizer and write a run artifact.
    Optimize(OptimizeArgs),
    /// Check an artifact: re-evaluate the best vector and replay the run.
    Verify {
        #[arg(long = "in", value_name = "JSON")]
        input: PathBuf,
    },
    /// Run an experiment suite and write its table as CSV.
    Bench {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Largest instance of the packing suite.
        #[arg(long, default_value_t = 6)]
        max_items: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ArrayArgs {
    #[arg(long, default_value_t = 10)]
    elements: usize,
    /// Element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    /// `uniform`, or a file with one `amplitude[,phase_rad]` line per
    /// element in ascending position order.
    #[arg(long, default_value = "uniform")]
    excitation: String,
    #[arg(long, default_value_t = DEFAULT_STEP_DEG)]
    grid_step: f64,
    #[arg(long, default_value_t = DEFAULT_FLOOR_DB, allow_hyphen_values = true)]
    floor_db: f64,
}

#[derive(Args)]
struct OptimizeArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    elements: Option<usize>,
    /// Element spacing (amplitude mode) or aperture (position mode).
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    target_sll: Option<f64>,
    #[arg(long)]
    fnbw_cap: Option<f64>,
    /// Bowl dimension.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    lower: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    upper: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Artifact path; defaults to a file in $ANTHILL_OUT_DIR (or the
    /// working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ahcoa,
    Alo,
    Pso,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Sll,
    Bowl,
    TangentialBowl,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Amplitude,
    Position,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    PaperLobes,
    PaperFnbw,
    Packing,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Parse { .. } => 1,
        Error::Consistency(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pattern { array, out } => {
            let p = array_pattern(&array)?;
            with_output(out.as_deref(), |w| p.write_csv(w))
        }
        Command::Metrics { input, array, out } => {
            let (p, elements, spacing) = match &input {
                Some(path) => {
                    let file = File::open(path).map_err(|e| Error::io(path, e))?;
                    (RadiationPattern::read_csv(file, path)?, None, None)
                }
                None => (
                    array_pattern(&array)?,
                    Some(array.elements),
                    Some(array.spacing),
                ),
            };
            let report = analyze(&p, array.floor_db)?;
            let record = MetricsRecord::from_report(&report, elements, spacing);
            with_output(out.as_deref(), |w| write!(w, "{record}"))
        }
        Command::Optimize(args) => optimize(args),
        Command::Verify { input } => {
            RunArtifact::read(&input)?.verify()?;
            println!("ok: {}", input.display());
            Ok(())
        }
        Command::Bench {
            suite,
            max_items,
            out,
        } => {
            let mut buf = Vec::new();
            match suite {
                SuiteArg::PaperLobes => bench::write_csv(&bench::paper_lobes()?, &mut buf)?,
                SuiteArg::PaperFnbw => bench::write_csv(&bench::paper_fnbw()?, &mut buf)?,
                SuiteArg::Packing => bench::write_csv(&bench::packing_sweep(max_items)?, &mut buf)?,
            }
            with_output(out.as_deref(), |w| w.write_all(&buf))
        }
    }
}

fn array_pattern(args: &ArrayArgs) -> Result<RadiationPattern> {
    let geometry = ArrayGeometry::uniform(args.elements, args.spacing)?;
    let excitation = if args.excitation == "uniform" {
        Excitation::uniform(args.elements)
    } else {
        read_excitation(Path::new(&args.excitation))?
    };
    pattern(
        &geometry,
        &excitation,
        &AngleGrid::full(args.grid_step)?,
        args.floor_db,
    )
}

fn read_excitation(path: &Path) -> Result<Excitation> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (mut amplitudes, mut phases) = (Vec::new(), Vec::new());
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |field: &str| {
            field.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: index as u64 + 1,
                message: format!("`{}`: {e}", field.trim()),
            })
        };
        let mut fields = line.split(',');
        amplitudes.push(parse(fields.next().unwrap_or_default())?);
        phases.push(fields.next().map(parse).transpose()?.unwrap_or(0.0));
        if fields.next().is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: index as u64 + 1,
                message: "expected `amplitude[,phase_rad]`".into(),
            });
        }
    }
    Excitation::new(amplitudes, phases)
}

fn with_output(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w)
                .and_then(|()| w.flush())
                .map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(a) = args.algo {
        config.run.algorithm = match a {
            AlgoArg::Ahcoa => Algorithm::Ahcoa,
            AlgoArg::Alo => Algorithm::Alo,
            AlgoArg::Pso => Algorithm::Pso,
        };
    }
    if let Some(o) = args.objective {
        config.run.objective = match o {
            ObjectiveArg::Sll => ObjectiveKind::Sll,
            ObjectiveArg::Bowl => ObjectiveKind::Bowl,
            ObjectiveArg::TangentialBowl => ObjectiveKind::TangentialBowl,
        };
    }
    if let Some(m) = args.mode {
        config.synthesis.mode = match m {
            ModeArg::Amplitude => SynthesisMode::Amplitude,
            ModeArg::Position => SynthesisMode::Position,
        };
    }
    let s = &mut config.synthesis;
    s.elements = args.elements.unwrap_or(s.elements);
    s.spacing = args.spacing.unwrap_or(s.spacing);
    s.target_sll_db = args.target_sll.unwrap_or(s.target_sll_db);
    s.fnbw_cap_deg = args.fnbw_cap.or(s.fnbw_cap_deg);
    let b = &mut config.bowl;
    b.dim = args.dim.unwrap_or(b.dim);
    b.lower = args.lower.unwrap_or(b.lower);
    b.upper = args.upper.unwrap_or(b.upper);
    if let Some(p) = args.population {
        config.ahcoa.population = p;
        config.alo.population = p;
        config.pso.population = p;
    }
    config.run.seed = args.seed.unwrap_or(config.run.seed);
    config.run.iterations = args.iters.or(config.run.iterations);

    let artifact = execute(&config)?;
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    for line in artifact.log_lines() {
        writeln!(lock, "{line}").map_err(|e| Error::io("<stdout>", e))?;
    }
    let path = args.out.unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(PathBuf::new, PathBuf::from);
        dir.join(format!(
            "{}-{}-seed{}.json",
            config.run.algorithm, config.run.objective, config.run.seed
        ))
    });
    artifact.write(&path)?;
    eprintln!(
        "best fitness {} written to {}",
        artifact.best_fitness,
        path.display()
    );
    Ok(())
}
