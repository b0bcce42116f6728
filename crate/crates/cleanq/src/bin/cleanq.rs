//! Command-line front end: runs the bound checkers and demos, manages seeds
//! and configuration, and emits JSON or CSV reports.
//!
//! Canonical outputs carry no timestamps, so a fixed seed reproduces them
//! byte for byte; wall-clock data goes to a `.log` sidecar next to `--out`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use cleanq::circuits::{assemble, haar_random, hadamard_test, Circuit, Gate, RepeatedInteractionPlan, TracePart};
use cleanq::linalg::{set_max_qubits, UnitaryMatrix};
use cleanq::registers::RegisterLayout;
use cleanq::thermo::{beta_threshold, spectral_gap, Hamiltonian};
use cleanq::verify::{
    check_araki_lieb, check_cdl, check_discard_nogo, check_entropic, check_gibbs_lemma,
    check_gibbs_nogo, check_lemma00, check_measure_bound, check_robust, run_suite,
    saturation_search, CheckRun, Objective, SearchResult,
};

#[derive(Parser)]
#[command(
    name = "cleanq",
    version,
    about = "Density-matrix simulation and bound verification for k-clean-qubit machines"
)]
struct Cli {
    /// Base seed for all randomness.
    #[arg(long, global = true, env = "CLEANQ_SEED", default_value_t = 0)]
    seed: u64,

    /// Write the canonical report here instead of stdout (a timing sidecar
    /// goes to `<out>.log`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Dense-dimension cap, in qubits.
    #[arg(long, global = true, default_value_t = 12)]
    max_qubits: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct LayoutArgs {
    /// Clean input qubits.
    #[arg(long)]
    a: usize,
    /// Maximally mixed input qubits.
    #[arg(long)]
    b: usize,
    /// Qubits measured or discarded.
    #[arg(long)]
    c: usize,
    /// Output qubits.
    #[arg(long)]
    d: usize,
}

impl LayoutArgs {
    fn build(&self) -> std::result::Result<RegisterLayout, String> {
        RegisterLayout::new(self.a, self.b, self.c, self.d).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Entry00,
    PureProb,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartArg {
    Re,
    Im,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestUnitary {
    Identity,
    Z,
    Haar,
}

#[derive(Subcommand)]
enum Command {
    /// Discarding no-go: max channel (0,0) entry vs 2^(a-d).
    CheckDiscard {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Measurement bound: pure-outcome probability vs 2^(a-d)/(1-2eps').
    CheckMeasure {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0.0)]
        eps_prime: f64,
    },
    /// Noise-robust no-go, parts (a) and (b).
    CheckRobust {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        eps_prime: f64,
    },
    /// Entry stability of partial traces under perturbation.
    CheckLemma00 {
        #[arg(long)]
        n: usize,
        /// Qubits traced out.
        #[arg(long)]
        f: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Gibbs-state synthesis bound for a gapped Hamiltonian on D.
    CheckGibbs {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Hamiltonian JSON ({"d":..,"entries":[[re,im],..]} or
        /// {"d":..,"diagonal":[..]}); default is diag(0,1,…,1) on d qubits.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        /// Inverse temperature; default is 1.05x the eps'=1/4 threshold.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Gibbs proximity lemma on random gapped diagonal Hamiltonians.
    CheckGibbsLemma {
        /// Qubits of the Hamiltonian register.
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.25)]
        eps_prime: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Repeated-interaction lower bound on a random plan.
    CheckCdl {
        #[arg(long, default_value_t = 1)]
        ancillas: usize,
        /// System qubits.
        #[arg(long)]
        n: usize,
        /// Number of interaction steps.
        #[arg(long)]
        k: usize,
    },
    /// Entropy-counting chain over Haar circuits.
    CheckEntropic {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Araki-Lieb subadditivity on random states.
    CheckArakiLieb {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Saturation search: maximize an objective over circuits.
    Search {
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Entry00)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 0.0)]
        eps_prime: f64,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 300)]
        iters: usize,
    },
    /// The SWAP staircase demo: per-step entries and purity.
    Staircase {
        /// System qubits (and number of steps).
        #[arg(long)]
        n: usize,
    },
    /// Monte-Carlo trace estimation on one clean qubit.
    HadamardTest {
        #[arg(long, value_enum, default_value_t = TestUnitary::Identity)]
        u: TestUnitary,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, value_enum, default_value_t = PartArg::Re)]
        part: PartArg,
    },
    /// The default checker matrix over small layouts; one aggregate report.
    Suite,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    set_max_qubits(cli.max_qubits);
    let started = Instant::now();
    match run(&cli) {
        Ok(violations) => {
            write_sidecar(cli.out.as_deref(), started);
            if violations > 0 {
                eprintln!("cleanq: {violations} bound violation(s) observed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Usage(message)) => {
            eprintln!("cleanq: {message}");
            ExitCode::from(2)
        }
        Err(RunError::Other(error)) => {
            eprintln!("cleanq: {error:#}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    Usage(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for RunError {
    fn from(error: anyhow::Error) -> Self {
        RunError::Other(error)
    }
}

fn layout_or_usage(args: &LayoutArgs) -> std::result::Result<RegisterLayout, RunError> {
    args.build().map_err(RunError::Usage)
}

fn run(cli: &Cli) -> std::result::Result<usize, RunError> {
    let seed = cli.seed;
    match &cli.command {
        Command::CheckDiscard { layout, trials } => {
            let layout = layout_or_usage(layout)?;
            let run = check_discard_nogo(&layout, *trials, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckMeasure {
            layout,
            trials,
            eps_prime,
        } => {
            let layout = layout_or_usage(layout)?;
            let run = check_measure_bound(&layout, *trials, seed, *eps_prime).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckRobust {
            layout,
            trials,
            eps,
            eps_prime,
        } => {
            let layout = layout_or_usage(layout)?;
            let (run_a, run_b) =
                check_robust(&layout, *eps, *eps_prime, *trials, seed).map_err(to_other)?;
            emit_check_runs(cli, &[&run_a, &run_b])?;
            Ok(usize::from(run_a.report.violated) + usize::from(run_b.report.violated))
        }
        Command::CheckLemma00 { n, f, eps, trials } => {
            let run = check_lemma00(*n, *f, *eps, *trials, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckGibbs {
            layout,
            trials,
            hamiltonian,
            beta,
        } => {
            let layout = layout_or_usage(layout)?;
            let h = match hamiltonian {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))
                        .map_err(RunError::Other)?;
                    serde_json::from_str::<Hamiltonian>(&text)
                        .context("parsing Hamiltonian JSON")
                        .map_err(RunError::Other)?
                }
                None => {
                    let dim = 1usize << layout.d();
                    let mut energies = vec![1.0; dim];
                    energies[0] = 0.0;
                    Hamiltonian::diagonal(layout.d(), &energies).map_err(to_other)?
                }
            };
            let beta = match beta {
                Some(b) => *b,
                None => {
                    let info = spectral_gap(&h).map_err(to_other)?;
                    beta_threshold(layout.d(), info.gap, 0.25).map_err(to_other)? * 1.05
                }
            };
            let run = check_gibbs_nogo(&layout, &h, beta, *trials, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckGibbsLemma { d, eps_prime, trials } => {
            let run = check_gibbs_lemma(*d, *eps_prime, *trials, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckCdl { ancillas, n, k } => {
            let plan =
                RepeatedInteractionPlan::random(*ancillas, *n, *k, seed).map_err(to_other)?;
            let run = check_cdl(&plan, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckEntropic { layout, trials } => {
            let layout = layout_or_usage(layout)?;
            let run = check_entropic(&layout, *trials, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::CheckArakiLieb { n, trials } => {
            let run = check_araki_lieb(*n, *trials, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::Search {
            layout,
            objective,
            eps_prime,
            restarts,
            iters,
        } => {
            let layout = layout_or_usage(layout)?;
            let objective = match objective {
                ObjectiveArg::Entry00 => Objective::Entry00,
                ObjectiveArg::PureProb => Objective::PureProb {
                    eps_prime: *eps_prime,
                },
            };
            let result =
                saturation_search(&layout, objective, *restarts, *iters, seed).map_err(to_other)?;
            emit_search_result(cli, &result)?;
            Ok(0)
        }
        Command::Staircase { n } => {
            let plan = RepeatedInteractionPlan::staircase(*n).map_err(to_other)?;
            let run = check_cdl(&plan, seed).map_err(to_other)?;
            emit_check_run(cli, &run)?;
            Ok(usize::from(run.report.violated))
        }
        Command::HadamardTest { u, n, shots, part } => {
            let unitary = build_test_unitary(*u, *n, seed).map_err(to_other)?;
            let part_enum = match part {
                PartArg::Re => TracePart::Real,
                PartArg::Im => TracePart::Imaginary,
            };
            let estimate =
                hadamard_test(&unitary, *shots, seed, part_enum).map_err(to_other)?;
            let trace = unitary.matrix().trace();
            let exact = match part_enum {
                TracePart::Real => trace.re,
                TracePart::Imaginary => trace.im,
            } / unitary.dim() as f64;
            let report = HadamardReport {
                n: *n,
                shots: *shots,
                seed,
                part: match part_enum {
                    TracePart::Real => "re",
                    TracePart::Imaginary => "im",
                },
                estimate,
                exact,
                abs_error: (estimate - exact).abs(),
            };
            match cli.format {
                Format::Json => emit_json(cli.out.as_deref(), &report)?,
                Format::Csv => {
                    let rows = vec![
                        vec![
                            "n".to_string(),
                            "shots".to_string(),
                            "seed".to_string(),
                            "part".to_string(),
                            "estimate".to_string(),
                            "exact".to_string(),
                            "abs_error".to_string(),
                        ],
                        vec![
                            report.n.to_string(),
                            report.shots.to_string(),
                            report.seed.to_string(),
                            report.part.to_string(),
                            report.estimate.to_string(),
                            report.exact.to_string(),
                            report.abs_error.to_string(),
                        ],
                    ];
                    emit_csv(cli.out.as_deref(), rows)?;
                }
            }
            Ok(0)
        }
        Command::Suite => {
            let suite = run_suite(seed).map_err(to_other)?;
            match cli.format {
                Format::Json => emit_json(cli.out.as_deref(), &suite)?,
                Format::Csv => {
                    let mut rows = vec![report_csv_header()];
                    for report in &suite.reports {
                        rows.push(report_csv_row(report));
                    }
                    emit_csv(cli.out.as_deref(), rows)?;
                }
            }
            eprintln!(
                "suite: {} reports, {} violation(s)",
                suite.reports.len(),
                suite.violations
            );
            Ok(suite.violations)
        }
    }
}

fn to_other(error: cleanq::Error) -> RunError {
    RunError::Other(anyhow::Error::new(error))
}

fn build_test_unitary(kind: TestUnitary, n: usize, seed: u64) -> cleanq::Result<UnitaryMatrix> {
    match kind {
        TestUnitary::Identity => Ok(UnitaryMatrix::identity(1 << n)),
        TestUnitary::Z => {
            let mut circuit = Circuit::new(n)?;
            // Z = S^2 on wire 0; trace 0 for n = 1.
            circuit.push(Gate::S(0))?;
            circuit.push(Gate::S(0))?;
            assemble(&circuit)
        }
        TestUnitary::Haar => haar_random(n, seed),
    }
}

#[derive(Serialize)]
struct HadamardReport {
    n: usize,
    shots: usize,
    seed: u64,
    part: &'static str,
    estimate: f64,
    exact: f64,
    abs_error: f64,
}

fn emit_check_run(cli: &Cli, run: &CheckRun) -> std::result::Result<(), RunError> {
    emit_check_runs(cli, &[run])
}

fn emit_check_runs(cli: &Cli, runs: &[&CheckRun]) -> std::result::Result<(), RunError> {
    match cli.format {
        Format::Json => {
            if runs.len() == 1 {
                emit_json(cli.out.as_deref(), &runs[0].report)?;
            } else {
                let reports: Vec<_> = runs.iter().map(|r| &r.report).collect();
                emit_json(cli.out.as_deref(), &reports)?;
            }
        }
        Format::Csv => {
            let mut rows = vec![trial_csv_header()];
            for run in runs {
                for obs in &run.observations {
                    rows.push(vec![
                        format!("{:?}", run.report.theorem),
                        obs.label.clone(),
                        obs.value.to_string(),
                        run.report.bound.to_string(),
                        run.report.seed.to_string(),
                    ]);
                }
            }
            emit_csv(cli.out.as_deref(), rows)?;
        }
    }
    for run in runs {
        eprintln!(
            "{:?}: observed {} vs bound {} (margin {}){}",
            run.report.theorem,
            run.report.observed,
            run.report.bound,
            run.report.margin,
            if run.report.violated { " VIOLATED" } else { "" }
        );
    }
    Ok(())
}

fn trial_csv_header() -> Vec<String> {
    ["theorem", "trial", "observed", "bound", "seed"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn report_csv_header() -> Vec<String> {
    [
        "theorem", "a", "b", "c", "d", "n", "f", "eps", "eps_prime", "beta", "gamma", "k",
        "observed", "bound", "margin", "trials", "seed", "violated",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn report_csv_row(report: &cleanq::verify::BoundReport) -> Vec<String> {
    let opt_usize = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_f64 = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    vec![
        format!("{:?}", report.theorem),
        opt_usize(report.config.a),
        opt_usize(report.config.b),
        opt_usize(report.config.c),
        opt_usize(report.config.d),
        opt_usize(report.config.n),
        opt_usize(report.config.f),
        opt_f64(report.config.eps),
        opt_f64(report.config.eps_prime),
        opt_f64(report.config.beta),
        opt_f64(report.config.gamma),
        opt_usize(report.config.k),
        report.observed.to_string(),
        report.bound.to_string(),
        report.margin.to_string(),
        report.trials.to_string(),
        report.seed.to_string(),
        report.violated.to_string(),
    ]
}

fn emit_search_result(cli: &Cli, result: &SearchResult) -> std::result::Result<(), RunError> {
    match cli.format {
        Format::Json => emit_json(cli.out.as_deref(), result)?,
        Format::Csv => {
            // Complex entries as "re+imi" strings, one CSV row per matrix row.
            let mut rows = vec![vec![
                "best_observed".to_string(),
                result.best_observed.to_string(),
                "bound".to_string(),
                result.bound.to_string(),
                "iterations".to_string(),
                result.iterations.to_string(),
            ]];
            let m = result.best_unitary.matrix();
            for r in 0..m.rows() {
                rows.push((0..m.cols()).map(|c| fmt_complex(m.get(r, c))).collect());
            }
            emit_csv(cli.out.as_deref(), rows)?;
        }
    }
    eprintln!(
        "search: best {} vs bound {} after {} iterations",
        result.best_observed, result.bound, result.iterations
    );
    Ok(())
}

fn fmt_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> std::result::Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)
        .context("serializing report")
        .map_err(RunError::Other)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(RunError::Other)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_csv(out: Option<&Path>, rows: Vec<Vec<String>>) -> std::result::Result<(), RunError> {
    let write_rows = |writer: &mut csv::Writer<Box<dyn Write>>| -> Result<()> {
        for row in &rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    };
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(RunError::Other)?,
        ),
        None => Box::new(std::io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    write_rows(&mut writer).map_err(RunError::Other)?;
    Ok(())
}

fn write_sidecar(out: Option<&Path>, started: Instant) {
    let Some(path) = out else { return };
    let log_path = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.log", ext.to_string_lossy()),
        None => "log".to_string(),
    });
    let unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let line = format!(
        "finished_unix_s={unix} duration_ms={}\n",
        started.elapsed().as_millis()
    );
    let _ = std::fs::write(log_path, line);
}
