//! `tsp-dqes`: encode instances, certify them classically, and run the
//! MUB landscape and VQE experiments from the command line.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input, 3 size cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use tsp_dqes::dqes::{compute_landscape, landscape_csv, run_experiment, ExperimentConfig, ExperimentMode};
use tsp_dqes::encoder::{audit_penalties, encode, suggest_penalties, Layout, PenaltyMode, DEFAULT_AUDIT_CAP};
use tsp_dqes::ising::{spectrum_csv, to_ising, DEFAULT_SPECTRUM_CAP};
use tsp_dqes::oracle::{solve_exact_tsp, validate_bitstring};
use tsp_dqes::rational::{self, Rational};
use tsp_dqes::vqe::{Entangler, Method, OptimizerConfig, DEFAULT_LAYERS, DEFAULT_TOLERANCE};
use tsp_dqes::{load_instance, Error, Format, ProblemInstance};

#[derive(Parser, Debug)]
#[command(name = "tsp-dqes", version, about)]
struct Cli {
    /// Worker threads for parallel enumeration and VQE batches (default: all cores).
    #[arg(long, global = true, env = "TSP_DQES_THREADS")]
    threads: Option<usize>,

    /// Log level: error, warn, info, debug or trace (RUST_LOG also works).
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a penalty Hamiltonian and write it as JSON.
    Encode {
        #[command(flatten)]
        input: Input,
        /// Variable layout: full, fixed or efficient.
        #[arg(long, default_value = "efficient")]
        layout: String,
        #[command(flatten)]
        penalties: Penalties,
        /// Binary (QUBO) or spin (Ising) form.
        #[arg(long, value_enum, default_value_t = Form::Ising)]
        form: Form,
        #[command(flatten)]
        output: Output,
    },
    /// Find every optimal tour by exhaustive enumeration.
    Solve {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Minimize the full-layout TSP Hamiltonian exhaustively and check the minimizer is a tour.
    Audit {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        penalties: Penalties,
        /// Refuse to enumerate more variables than this.
        #[arg(long, default_value_t = DEFAULT_AUDIT_CAP)]
        cap: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Energies of every 3-qubit MUB state embedded in the efficient encoding.
    Landscape {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        penalties: Penalties,
        /// csv (index,positions,basis,element,energy) or json (adds ranks).
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[command(flatten)]
        output: Output,
    },
    /// Run a VQE batch on the efficient encoding.
    Vqe {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        penalties: Penalties,
        /// Initial states: `zeros`, `best-mubs K` or `random K` (`best-mubs:K` also works).
        #[arg(long, num_args = 1..=2, value_names = ["KIND", "K"], default_value = "zeros")]
        init: Vec<String>,
        /// Base seed; run i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ansatz layers.
        #[arg(long, default_value_t = DEFAULT_LAYERS)]
        layers: usize,
        /// Entangler pattern: linear or ring.
        #[arg(long, default_value = "linear_rzz")]
        entangler: String,
        /// Optimizer: sinusoidal, quadratic or linear.
        #[arg(long, default_value = "sinusoidal")]
        optimizer: String,
        /// Objective evaluation budget per run.
        #[arg(long, default_value_t = 2000)]
        max_evals: usize,
        /// Initial trust radius / step.
        #[arg(long, default_value_t = 0.5)]
        rho_start: f64,
        /// Final trust radius / step.
        #[arg(long, default_value_t = 1e-4)]
        rho_end: f64,
        /// Relative convergence tolerance against B * C_opt.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Exhaustive Ising spectrum of an encoding.
    Spectrum {
        #[command(flatten)]
        input: Input,
        /// Variable layout: full, fixed or efficient.
        #[arg(long, default_value = "efficient")]
        layout: String,
        #[command(flatten)]
        penalties: Penalties,
        /// csv (bitstring,energy for every state) or json (ground states with decoded tours).
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        /// Refuse to enumerate more spins than this.
        #[arg(long, default_value_t = DEFAULT_SPECTRUM_CAP)]
        cap: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct Input {
    /// Instance file (.json, otherwise an edge list).
    instance: PathBuf,
    /// Override the format guessed from the extension: json or edge_list.
    #[arg(long)]
    input_format: Option<String>,
}

#[derive(Args, Debug)]
struct Penalties {
    /// Penalty weights: `instance` (from the file), `lucas`, `safe` or `explicit A B`.
    #[arg(long, num_args = 1..=3, value_names = ["MODE", "A", "B"], default_value = "instance")]
    penalties: Vec<String>,
}

#[derive(Args, Debug)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Leave the `generated_at` field out of JSON reports so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Binary,
    Ising,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TableFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::Precondition(_) => 2,
        Error::SizeCap { .. } => 3,
        Error::Io(_) => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    info!("threads: {}", rayon::current_num_threads());

    match cli.command {
        Command::Encode {
            input,
            layout,
            penalties,
            form,
            output,
        } => {
            let layout: Layout = layout.parse()?;
            let instance = apply_penalties(load(&input)?, &penalties)?;
            info!("encode: layout={layout} form={form:?} A={} B={}", fmt(&instance.penalty_a()), fmt(&instance.penalty_b()));
            let poly = encode(&instance, layout)?;
            let body = match form {
                Form::Binary => json!({ "form": "binary", "variables": poly.variable_count(), "polynomial": poly.to_json() }),
                Form::Ising => json!({ "form": "ising", "variables": poly.variable_count(), "polynomial": to_ising(&poly).to_json() }),
            };
            write_json(&output, body)
        }
        Command::Solve { input, output } => {
            let instance = load(&input)?;
            info!("solve: N={}", instance.node_count());
            let solution = solve_exact_tsp(&instance)?;
            let mut body = solution.to_json();
            if solution.optimal_cost.is_none() {
                body["message"] = json!("no valid tour");
            }
            write_json(&output, body)
        }
        Command::Audit {
            input,
            penalties,
            cap,
            output,
        } => {
            let instance = apply_penalties(load(&input)?, &penalties)?;
            info!("audit: A={} B={} cap={cap}", fmt(&instance.penalty_a()), fmt(&instance.penalty_b()));
            let report = audit_penalties(&instance, cap)?;
            let mut body = report.to_json();
            body["verdict"] = json!(if report.minimum_is_valid() { "VALID" } else { "INVALID" });
            write_json(&output, body)
        }
        Command::Landscape {
            input,
            penalties,
            format,
            output,
        } => {
            let instance = apply_penalties(load(&input)?, &penalties)?;
            let ising = to_ising(&encode(&instance, Layout::Efficient)?);
            info!("landscape: qubits={} format={format:?}", ising.variable_count());
            let records = compute_landscape(&ising)?;
            match format {
                TableFormat::Csv => write_text(&output, &landscape_csv(&records)),
                TableFormat::Json => write_json(
                    &output,
                    json!({ "qubits": ising.variable_count(), "records": records }),
                ),
            }
        }
        Command::Vqe {
            input,
            penalties,
            init,
            seed,
            layers,
            entangler,
            optimizer,
            max_evals,
            rho_start,
            rho_end,
            tolerance,
            output,
        } => {
            let instance = apply_penalties(load(&input)?, &penalties)?;
            let mode: ExperimentMode = init.join(":").parse()?;
            let method: Method = optimizer.parse()?;
            if !(rho_start > 0.0 && rho_end > 0.0 && rho_end <= rho_start) {
                return Err(Error::Validation("need 0 < rho_end <= rho_start".into()));
            }
            if max_evals == 0 || tolerance.is_nan() || tolerance < 0.0 {
                return Err(Error::Validation("need max_evals >= 1 and tolerance >= 0".into()));
            }
            let config = ExperimentConfig {
                layers,
                entangler: entangler.parse::<Entangler>()?,
                optimizer: OptimizerConfig {
                    method,
                    rho_start,
                    rho_end,
                    max_evaluations: max_evals,
                },
                tolerance,
            };
            info!(
                "vqe: init={mode} seed={seed} config={}",
                serde_json::to_string(&config).expect("config serializes")
            );
            let report = run_experiment(&instance, mode, &config, seed)?;
            info!(
                "vqe: {}/{} runs converged, mean evaluations to convergence {:?}",
                report.converged_count(),
                report.runs.len(),
                report.mean_iterations_to_convergence()
            );
            write_json(&output, report.to_json())
        }
        Command::Spectrum {
            input,
            layout,
            penalties,
            format,
            cap,
            output,
        } => {
            let layout: Layout = layout.parse()?;
            let instance = apply_penalties(load(&input)?, &penalties)?;
            let ising = to_ising(&encode(&instance, layout)?);
            info!("spectrum: layout={layout} spins={} cap={cap}", ising.variable_count());
            match format {
                TableFormat::Csv => write_text(&output, &spectrum_csv(&ising.spectrum(cap)?)),
                TableFormat::Json => {
                    let (ground, states) = ising.ground_states(cap)?;
                    let ground_states = states
                        .iter()
                        .map(|&z| {
                            let bits = tsp_dqes::Bitstring::from_index(z, ising.variable_count());
                            let decoded = validate_bitstring(&instance, layout, &bits)?;
                            Ok(json!({ "bitstring": bits.to_string(), "decoded": decoded.to_json() }))
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    write_json(
                        &output,
                        json!({
                            "layout": layout.as_str(),
                            "spins": ising.variable_count(),
                            "ground_energy": rational::to_json(&ground),
                            "ground_states": ground_states,
                        }),
                    )
                }
            }
        }
    }
}

fn load(input: &Input) -> Result<ProblemInstance, Error> {
    let format = match &input.input_format {
        Some(f) => f.parse()?,
        None => Format::from_path(&input.instance),
    };
    let file = fs::File::open(&input.instance)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", input.instance.display())))?;
    load_instance(file, format).map_err(|e| match e {
        Error::Parse { locus, message } => Error::Parse {
            locus: format!("{} {locus}", input.instance.display()),
            message,
        },
        other => other,
    })
}

fn apply_penalties(instance: ProblemInstance, penalties: &Penalties) -> Result<ProblemInstance, Error> {
    let args = &penalties.penalties;
    let (a, b) = match args.first().map(String::as_str) {
        Some("instance") | None if args.len() <= 1 => return Ok(instance),
        Some("explicit") if args.len() == 3 => {
            let parse = |s: &str| {
                rational::parse(s).ok_or_else(|| Error::Validation(format!("penalty `{s}` is not a rational number")))
            };
            (parse(&args[1])?, parse(&args[2])?)
        }
        Some(mode @ ("lucas" | "safe")) if args.len() == 1 => {
            suggest_penalties(&instance, mode.parse::<PenaltyMode>()?)?
        }
        _ => {
            return Err(Error::Validation(format!(
                "--penalties expects `instance`, `lucas`, `safe` or `explicit A B`, got `{}`",
                args.join(" ")
            )))
        }
    };
    instance.with_penalties(a, b)
}

fn fmt(r: &Rational) -> String {
    rational::format(r)
}

fn write_json(output: &Output, mut body: Value) -> Result<(), Error> {
    if !output.no_timestamp {
        let seconds = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        body["generated_at"] = json!(seconds);
    }
    let mut text = serde_json::to_string_pretty(&body).expect("report serializes");
    text.push('\n');
    write_text(output, &text)
}

fn write_text(output: &Output, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => write_file(path, text),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                // A closed pipe (e.g. `| head`) is not an error for the caller.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text)?;
    info!("wrote {}", path.display());
    Ok(())
}
