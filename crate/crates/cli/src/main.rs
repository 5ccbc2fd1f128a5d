//! Command-line front end for the probabilistic while-language toolkit.

mod output;

use clap::{Parser, Subcommand, ValueEnum};
use pwhile_core::analysis::{
    self, abstract_state, extract_label, initial_config, iterate, point_state, AbstractionSpec,
    AnalysisError,
};
use pwhile_core::interp::{estimate, RunConfig};
use pwhile_core::lang::{parse, Program};
use pwhile_core::los::assemble;
use pwhile_core::synth::{
    self, extract_program, load_flow_free_sketch, optimize, Lambda, Objective, OptConfig,
    ProgramSketch, SynthError,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pwhile",
    about = "Compile probabilistic while-programs to Markov-chain operators; analyze, simulate, and synthesize them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixFormat {
    Mm,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveKind {
    /// Operator distance only.
    Distance,
    /// Operator distance plus read/write penalties.
    Penalized,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a program and write its operator plus a metadata sidecar.
    Compile {
        input: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "mm")]
        format: MatrixFormat,
    },
    /// Iterate a program to its terminal distribution; optionally abstract it.
    Analyze {
        input: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Abstraction spec (JSON) applied to the terminal distribution.
        #[arg(long)]
        abstraction: Option<PathBuf>,
        /// Also extract the sub-distribution at this label.
        #[arg(long)]
        label: Option<u32>,
        /// Renormalize the extracted sub-distribution.
        #[arg(long)]
        renormalize: bool,
        /// Initial valuation, e.g. "d=0,g=1" (unlisted variables start at
        /// their first domain value).
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Estimate the terminal distribution by seeded Monte Carlo runs.
    Simulate {
        input: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        #[arg(long)]
        init: Option<String>,
    },
    /// Evaluate the abstracted terminal objective over a parameter grid.
    Sweep {
        input: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Parameter name (without '#').
        #[arg(long)]
        param: String,
        /// Grid: "start:step:end" or a comma-separated list.
        #[arg(long, default_value = "0:0.1:1")]
        grid: String,
        #[arg(long)]
        abstraction: PathBuf,
        /// 1-based coordinate of the abstracted vector to report.
        #[arg(long, default_value_t = 1)]
        coord: usize,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Minimize a sketch objective over choice probabilities.
    Synthesize {
        /// Flow-free sketch (JSON) or parametric program (.pw).
        sketch: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "penalized")]
        objective: ObjectiveKind,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Stop once the objective reaches this value. For program sketches
        /// (maximization) the target is on the maximized coordinate.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        max_iters: usize,
        /// Initial λ as CSV (one row per step/site); default: uniform rows.
        #[arg(long)]
        lambda0: Option<PathBuf>,
        /// Abstraction spec (JSON); required for program sketches.
        #[arg(long)]
        abstraction: Option<PathBuf>,
        /// 1-based abstract coordinate to maximize (program sketches).
        #[arg(long, default_value_t = 1)]
        maximize_coord: usize,
        /// Vertex-extraction threshold.
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Analysis(AnalysisError::NonConvergence { .. }) => {
                CliError::NonConvergence(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Compile {
            input,
            output,
            format,
        } => cmd_compile(&input, &output, format),
        Command::Analyze {
            input,
            output,
            abstraction,
            label,
            renormalize,
            init,
            eps,
            max_steps,
        } => cmd_analyze(
            &input,
            &output,
            abstraction.as_deref(),
            label,
            renormalize,
            init.as_deref(),
            eps,
            max_steps,
        ),
        Command::Simulate {
            input,
            output,
            runs,
            seed,
            max_steps,
            init,
        } => cmd_simulate(&input, &output, runs, seed, max_steps, init.as_deref()),
        Command::Sweep {
            input,
            output,
            param,
            grid,
            abstraction,
            coord,
            eps,
            max_steps,
        } => cmd_sweep(
            &input,
            &output,
            &param,
            &grid,
            &abstraction,
            coord,
            eps,
            max_steps,
        ),
        Command::Synthesize {
            sketch,
            output,
            objective,
            rho,
            omega,
            tol,
            restarts,
            seed,
            max_iters,
            lambda0,
            abstraction,
            maximize_coord,
            threshold,
        } => cmd_synthesize(SynthArgs {
            sketch,
            output,
            objective,
            rho,
            omega,
            tol,
            restarts,
            seed,
            max_iters,
            lambda0,
            abstraction,
            maximize_coord,
            threshold,
        }),
    }
}

fn load_program(path: &Path) -> Result<Program, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))
}

fn load_abstraction_spec(path: &Path) -> Result<AbstractionSpec, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    AbstractionSpec::from_json(&text).map_err(CliError::from)
}

/// Parses "d=1,g=2"; unlisted variables start at their first domain value.
fn initial_valuation(
    space: &pwhile_core::StateSpace,
    init: Option<&str>,
) -> Result<Vec<i64>, CliError> {
    let mut values: Vec<i64> = space.vars().iter().map(|d| d.domain[0]).collect();
    let Some(init) = init else {
        return Ok(values);
    };
    for binding in init.split(',').filter(|s| !s.trim().is_empty()) {
        let (name, value) = binding
            .split_once('=')
            .ok_or_else(|| input_err(format!("bad --init binding '{binding}'")))?;
        let idx = space
            .var_index(name.trim())
            .ok_or_else(|| input_err(format!("--init: unknown variable '{}'", name.trim())))?;
        let v: i64 = value
            .trim()
            .parse()
            .map_err(|_| input_err(format!("--init: bad value '{}'", value.trim())))?;
        if !space.domain(idx).contains(&v) {
            return Err(input_err(format!(
                "--init: value {v} outside the domain of '{}'",
                name.trim()
            )));
        }
        values[idx] = v;
    }
    Ok(values)
}

fn cmd_compile(input: &Path, output: &Path, format: MatrixFormat) -> Result<(), CliError> {
    let program = load_program(input)?;
    let op = assemble(&program).map_err(input_err)?;
    ensure_dir(output)?;
    let stem = file_stem(input);
    let matrix_path = match format {
        MatrixFormat::Mm => {
            let path = output.join(format!("{stem}.mm"));
            output::write(
                &path,
                &pwhile_core::linalg::matrix_to_matrix_market(&op.matrix),
            )?;
            path
        }
        MatrixFormat::Json => {
            let path = output.join(format!("{stem}.json"));
            output::write(&path, &pwhile_core::linalg::matrix_to_json(&op.matrix))?;
            path
        }
    };
    let meta_path = output.join(format!("{stem}.meta.json"));
    output::write(&meta_path, &output::metadata_json(&op))?;
    let dim = op.dim();
    let nnz = op.matrix.nnz();
    println!(
        "dim={dim} nnz={nnz} density={:.6}",
        nnz as f64 / (dim as f64 * dim as f64)
    );
    println!(
        "wrote {} and {}",
        matrix_path.display(),
        meta_path.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_analyze(
    input: &Path,
    output: &Path,
    abstraction: Option<&Path>,
    label: Option<u32>,
    renormalize: bool,
    init: Option<&str>,
    eps: f64,
    max_steps: usize,
) -> Result<(), CliError> {
    let program = load_program(input)?;
    let op = assemble(&program).map_err(input_err)?;
    let s0 = point_state(&op.space, &initial_valuation(&op.space, init)?)?;
    let x0 = initial_config(&op, &s0)?;
    let result = iterate(&op.matrix, &x0, eps, max_steps)?;
    ensure_dir(output)?;
    let stem = file_stem(input);

    let terminal_path = output.join(format!("{stem}.terminal.csv"));
    output::write(&terminal_path, &output::terminal_csv(&op, &result))?;
    println!(
        "terminal distribution after {} steps (residual {:e}): {}",
        result.steps,
        result.residual,
        terminal_path.display()
    );

    if let Some(spec_path) = abstraction {
        let spec = load_abstraction_spec(spec_path)?;
        let abstraction = spec.compile(&op.space, Some(op.labels.count()))?;
        let abstracted = abstract_state(&result.terminal, &abstraction)?;
        let names = analysis::abstract_coordinate_names(&spec, &op.space, true)?;
        let path = output.join(format!("{stem}.abstract.csv"));
        output::write(&path, &output::abstract_csv(&abstracted, &names))?;
        let values: Vec<String> = (0..abstracted.dim())
            .map(|i| format!("{:.5}", abstracted.get(i)))
            .collect();
        println!("abstracted: ({}) -> {}", values.join(", "), path.display());
    }

    if let Some(l) = label {
        let extracted = extract_label(&result.terminal, l, &op.labels)?;
        let vector = if renormalize {
            extracted.normalized().map_err(input_err)?
        } else {
            extracted
        };
        let path = output.join(format!("{stem}.label{l}.csv"));
        output::write(&path, &output::state_csv(&op.space, &vector, "probability"))?;
        println!("label {l} mass {}: {}", vector.sum(), path.display());
    }
    Ok(())
}

fn cmd_simulate(
    input: &Path,
    output: &Path,
    runs: usize,
    seed: u64,
    max_steps: u64,
    init: Option<&str>,
) -> Result<(), CliError> {
    let program = load_program(input)?;
    let space = pwhile_core::StateSpace::new(&program.decls).map_err(input_err)?;
    let initial = initial_valuation(&space, init)?;
    let config = RunConfig {
        seed,
        runs,
        max_steps,
    };
    let est = estimate(&program, &space, &initial, &config).map_err(input_err)?;
    ensure_dir(output)?;
    let path = output.join(format!("{}.sim.csv", file_stem(input)));
    output::write(&path, &output::simulation_csv(&space, &est, seed))?;
    println!(
        "{} runs (seed {seed}), censored fraction {}: {}",
        est.runs,
        est.censored,
        path.display()
    );
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |s: &str| input_err(format!("bad grid value '{s}'"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(input_err(format!(
                "grid '{spec}' must be start:step:end or a comma list"
            )));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
        let step: f64 = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
        let end: f64 = parts[2].trim().parse().map_err(|_| bad(parts[2]))?;
        if step <= 0.0 {
            return Err(input_err("grid step must be positive"));
        }
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            // Snap accumulated values to 10 decimals so grids like 0:0.1:1
            // yield 0.3 rather than 0.30000000000000004.
            let v = ((start + step * f64::from(k)) * 1e10).round() / 1e10;
            if v > end + step * 1e-9 {
                break;
            }
            out.push(v.min(end));
            k += 1;
        }
        Ok(out)
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| bad(s)))
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    input: &Path,
    output: &Path,
    param: &str,
    grid_spec: &str,
    abstraction_path: &Path,
    coord: usize,
    eps: f64,
    max_steps: usize,
) -> Result<(), CliError> {
    if coord == 0 {
        return Err(input_err("--coord is 1-based"));
    }
    let program = load_program(input)?;
    let space = pwhile_core::StateSpace::new(&program.decls).map_err(input_err)?;
    let spec = load_abstraction_spec(abstraction_path)?;
    let label_count = program.labels().len();
    let abstraction = spec.compile(&space, Some(label_count))?;
    let grid = parse_grid(grid_spec)?;
    let pipeline = synth::PipelineConfig { eps, max_steps };
    let points = synth::sweep(
        &program,
        param,
        &grid,
        &abstraction,
        coord - 1,
        None,
        &pipeline,
    )?;
    ensure_dir(output)?;
    let path = output.join(format!("{}.sweep.csv", file_stem(input)));
    output::write(&path, &output::sweep_csv(param, coord, &points))?;
    println!("{} grid points: {}", points.len(), path.display());
    Ok(())
}

struct SynthArgs {
    sketch: PathBuf,
    output: PathBuf,
    objective: ObjectiveKind,
    rho: f64,
    omega: f64,
    tol: Option<f64>,
    restarts: usize,
    seed: u64,
    max_iters: usize,
    lambda0: Option<PathBuf>,
    abstraction: Option<PathBuf>,
    maximize_coord: usize,
    threshold: f64,
}

fn read_lambda0(path: &Path) -> Result<Lambda, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| input_err(format!("bad lambda value '{s}'")))
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(input_err("lambda0 file has no rows"));
    }
    Ok(rows)
}

fn cmd_synthesize(args: SynthArgs) -> Result<(), CliError> {
    ensure_dir(&args.output)?;
    let stem = file_stem(&args.sketch);
    let config = OptConfig {
        max_iters: args.max_iters,
        restarts: args.restarts,
        seed: args.seed,
        tol: args.tol.unwrap_or(1e-6),
        ..Default::default()
    };

    let is_program_sketch = args.sketch.extension().is_some_and(|e| e == "pw");
    if is_program_sketch {
        let program = load_program(&args.sketch)?;
        let sketch = ProgramSketch::new(program)?;
        let spec_path = args.abstraction.as_deref().ok_or_else(|| {
            input_err("program sketches need --abstraction (the objective maximizes an abstracted coordinate)")
        })?;
        if args.maximize_coord == 0 {
            return Err(input_err("--maximize-coord is 1-based"));
        }
        let space = pwhile_core::StateSpace::new(&sketch.program.decls).map_err(input_err)?;
        let spec = load_abstraction_spec(spec_path)?;
        let abstraction = spec.compile(&space, Some(sketch.program.labels().len()))?;
        let pipeline = synth::PipelineConfig::default();
        let coord = args.maximize_coord - 1;
        let f = |l: &Lambda| -> Result<f64, SynthError> {
            let bound = sketch.bind_unchecked(l)?;
            Ok(-synth::abstracted_terminal_coord(
                &bound,
                &abstraction,
                coord,
                None,
                &pipeline,
            )?)
        };
        let lambda0 = match &args.lambda0 {
            Some(path) => read_lambda0(path)?,
            None => sketch.uniform_lambda(),
        };
        let config = OptConfig {
            // Maximization: the target applies to the maximized value.
            tol: args.tol.map(|t| -t).unwrap_or(f64::NEG_INFINITY),
            ..config
        };
        let result = optimize(f, &lambda0, &config)?;
        output::write_lambda_and_trace(&args.output, &stem, &result)?;
        let values = sketch.bindings_from(&result.lambda)?;
        let bindings: Vec<String> = values.iter().map(|(k, v)| format!("#{k}={v}")).collect();
        println!(
            "best value {} at {} ({} iterations, {} restarts)",
            -result.value,
            bindings.join(", "),
            result.iterations,
            result.restarts_used
        );
        if let Some(target) = args.tol {
            if !result.converged {
                return Err(CliError::Budget(format!(
                    "target {target} not reached; best value {}",
                    -result.value
                )));
            }
        }
        Ok(())
    } else {
        let loaded = load_flow_free_sketch(&args.sketch)?;
        let abstraction = match &args.abstraction {
            Some(path) => load_abstraction_spec(path)?.compile(&loaded.sketch.space, None)?,
            None => loaded
                .abstraction_spec
                .compile(&loaded.sketch.space, None)?,
        };
        let (rho, omega) = match args.objective {
            ObjectiveKind::Distance => (0.0, 0.0),
            ObjectiveKind::Penalized => (args.rho, args.omega),
        };
        let objective = Objective {
            target: loaded.target.clone(),
            abstraction,
            rho,
            omega,
            read_penalty: loaded.read_penalty.clone(),
            write_penalty: loaded.write_penalty.clone(),
        };
        let lambda0 = match &args.lambda0 {
            Some(path) => read_lambda0(path)?,
            None => vec![
                vec![1.0 / loaded.sketch.library.len() as f64; loaded.sketch.library.len()];
                loaded.sketch.steps
            ],
        };
        let f = |l: &Lambda| objective.phi(&loaded.sketch, l);
        let result = optimize(f, &lambda0, &config)?;
        output::write_lambda_and_trace(&args.output, &stem, &result)?;
        let program = extract_program(&loaded.sketch, &result.lambda, args.threshold)?;
        let program_path = args.output.join(format!("{stem}.program.pw"));
        output::write(&program_path, &program.to_source(false))?;
        println!(
            "phi* = {:e} ({} iterations, {} restarts): {}",
            result.value,
            result.iterations,
            result.restarts_used,
            program_path.display()
        );
        if !result.converged {
            return Err(CliError::Budget(format!(
                "objective stayed at {:e} above tolerance {:e}",
                result.value, config.tol
            )));
        }
        Ok(())
    }
}
