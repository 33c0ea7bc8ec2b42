//! Command-line front end for the fractional differential equation solver.
//!
//! Three subcommands share one pipeline: build a problem, train the weights,
//! evaluate the trained solution on a reporting grid, and write the results
//! as a CSV error table plus a JSON run record.
//!
//! Exit codes: 0 on convergence, 1 on usage, I/O, or parse failures, 2 when
//! training terminates without meeting the tolerance.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fibfde::optimizer::{train, TrainConfig};
use fibfde::problems::{
    builtin, default_report_grid, error_table, load_problem, sweep_report_grid, Benchmark,
    ErrorRow,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "fibfde",
    version,
    about = "Solve fractional-order differential equations with a Fibonacci polynomial trial solution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a built-in example problem and write its error table.
    Benchmark {
        /// Example id, 1 to 5.
        #[arg(long)]
        example: usize,
        /// Leading differentiation order, for the examples that take one.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train a problem described by a problem file.
    Solve {
        /// Path to the problem file.
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train one example across several leading orders and combine the
    /// per-order error tables into a long-format CSV.
    Sweep {
        /// Example id; only 1 and 4 keep their exact solution across orders.
        #[arg(long)]
        example: usize,
        /// Comma-separated leading orders.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Seed for the initial weights.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Override the number of training points.
    #[arg(long)]
    points: Option<usize>,
    /// Override the number of basis polynomials.
    #[arg(long)]
    basis: Option<usize>,
    /// Iteration budget for the training loop.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Cost threshold that counts as convergence.
    #[arg(long, default_value_t = 1e-28)]
    tol: f64,
    /// Initial damping factor.
    #[arg(long, default_value_t = 1e4)]
    lambda0: f64,
    /// Damping divisor applied after an accepted step.
    #[arg(long, default_value_t = 4.0)]
    decrease_factor: f64,
    /// Damping multiplier applied after a rejected step.
    #[arg(long, default_value_t = 2.0)]
    increase_factor: f64,
    /// Consecutive rejected steps tolerated before giving up.
    #[arg(long, default_value_t = 60)]
    max_inner_retries: usize,
    /// Output directory for the CSV and JSON artifacts.
    #[arg(long, default_value = "./out")]
    out: PathBuf,
    /// Comma-separated reporting grid; defaults to 0.0,0.1,..,1.0 for
    /// benchmark and solve and to 0.1,..,0.9 for sweep.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

impl CommonArgs {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lambda0: self.lambda0,
            max_iter: self.max_iter,
            tol: self.tol,
            decrease_factor: self.decrease_factor,
            increase_factor: self.increase_factor,
            max_inner_retries: self.max_inner_retries,
            seed: self.seed,
        }
    }
}

/// Everything needed to reproduce a run bit-exactly.
#[derive(Serialize)]
struct ConfigEcho {
    seed: u64,
    lambda0: f64,
    max_iter: usize,
    tol: f64,
    decrease_factor: f64,
    increase_factor: f64,
    max_inner_retries: usize,
    points: usize,
    basis: usize,
    domain: (f64, f64),
    orders: Vec<f64>,
    training_points: Vec<f64>,
    report_grid: Vec<f64>,
}

#[derive(Serialize)]
struct ReportEcho {
    iterations: usize,
    final_cost: f64,
    converged: bool,
    termination_reason: String,
    cost_history: Vec<f64>,
}

#[derive(Serialize)]
struct RunRecord {
    label: String,
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    example: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem_file: Option<String>,
    config: ConfigEcho,
    report: ReportEcho,
    weights: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_error: Option<f64>,
    wall_clock_ms: u128,
}

/// In-memory results of one training run, before any file is written.
struct RunOutcome {
    label: String,
    csv: String,
    json: String,
    summary: String,
    converged: bool,
    rows: Vec<ErrorRow>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn fail(message: &str) -> i32 {
    eprintln!("error: {message}");
    1
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Benchmark { example, alpha, common } => {
            let bench = match builtin(example, alpha) {
                Ok(b) => b,
                Err(e) => return fail(&e.to_string()),
            };
            let meta = RunMeta {
                command: "benchmark",
                example: Some(example),
                alpha,
                problem_file: None,
            };
            single_run(&bench, &common, meta, default_report_grid)
        }
        Command::Solve { file, common } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => return fail(&format!("{}: {e}", file.display())),
            };
            let bench = match load_problem(&text) {
                Ok(b) => b,
                Err(e) => return fail(&e.to_string()),
            };
            let meta = RunMeta {
                command: "solve",
                example: None,
                alpha: None,
                problem_file: Some(file.display().to_string()),
            };
            single_run(&bench, &common, meta, default_report_grid)
        }
        Command::Sweep { example, alphas, common } => sweep(example, &alphas, &common),
    }
}

/// Provenance fields echoed into the JSON run record.
struct RunMeta {
    command: &'static str,
    example: Option<usize>,
    alpha: Option<f64>,
    problem_file: Option<String>,
}

fn single_run(
    bench: &Benchmark,
    common: &CommonArgs,
    meta: RunMeta,
    default_grid: fn() -> Vec<f64>,
) -> i32 {
    let grid = common.grid.clone().unwrap_or_else(default_grid);
    let outcome = match compute_run(bench, common, &meta, &grid) {
        Ok(o) => o,
        Err(e) => return fail(&e.to_string()),
    };
    if let Err(e) = emit(&common.out, &outcome) {
        return fail(&e);
    }
    if outcome.converged {
        0
    } else {
        2
    }
}

/// Trains the problem and assembles the artifacts without touching the
/// filesystem.
fn compute_run(
    bench: &Benchmark,
    common: &CommonArgs,
    meta: &RunMeta,
    grid: &[f64],
) -> fibfde::Result<RunOutcome> {
    let mut spec = bench.spec.clone();
    if let Some(p) = common.points {
        spec = spec.with_num_points(p)?;
    }
    if let Some(n) = common.basis {
        spec = spec.with_basis_size(n)?;
    }
    let config = common.train_config();

    let start = Instant::now();
    let (net, report) = train(&spec, &config)?;
    let rows = error_table(&net, bench.exact.as_ref(), grid)?;
    let wall_clock_ms = start.elapsed().as_millis();

    let max_abs_error = rows
        .iter()
        .filter_map(|r| r.abs_error)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));

    let record = RunRecord {
        label: bench.label.clone(),
        command: meta.command.to_string(),
        example: meta.example,
        alpha: meta.alpha,
        problem_file: meta.problem_file.clone(),
        config: ConfigEcho {
            seed: config.seed,
            lambda0: config.lambda0,
            max_iter: config.max_iter,
            tol: config.tol,
            decrease_factor: config.decrease_factor,
            increase_factor: config.increase_factor,
            max_inner_retries: config.max_inner_retries,
            points: spec.num_points(),
            basis: spec.basis_size(),
            domain: spec.domain(),
            orders: spec.orders().to_vec(),
            training_points: spec.training_points(),
            report_grid: grid.to_vec(),
        },
        report: ReportEcho {
            iterations: report.iterations,
            final_cost: report.final_cost,
            converged: report.converged,
            termination_reason: report.termination_reason.as_str().to_string(),
            cost_history: report.cost_history.clone(),
        },
        weights: net.weights().to_vec(),
        max_abs_error,
        wall_clock_ms,
    };

    let summary = format!(
        "{}: final cost {:e}, {} iterations, {}, max abs error {}",
        bench.label,
        report.final_cost,
        report.iterations,
        report.termination_reason.as_str(),
        max_abs_error.map_or_else(|| "n/a".to_string(), |m| format!("{m:e}")),
    );

    let mut json = serde_json::to_string_pretty(&record).expect("record serializes");
    json.push('\n');

    Ok(RunOutcome {
        label: bench.label.clone(),
        csv: render_csv(&rows, bench.exact.is_some()),
        json,
        summary,
        converged: report.converged,
        rows,
    })
}

/// Values use the shortest decimal form that round-trips through f64.
fn render_csv(rows: &[ErrorRow], with_exact: bool) -> String {
    let mut out = String::new();
    if with_exact {
        out.push_str("t,numerical,exact,abs_error\n");
        for r in rows {
            let exact = r.exact.expect("exact column present");
            let abs = r.abs_error.expect("abs_error column present");
            out.push_str(&format!("{},{},{},{}\n", r.t, r.numerical, exact, abs));
        }
    } else {
        out.push_str("t,numerical\n");
        for r in rows {
            out.push_str(&format!("{},{}\n", r.t, r.numerical));
        }
    }
    out
}

/// Writes the per-run artifacts and prints the summary line.
fn emit(out_dir: &Path, outcome: &RunOutcome) -> Result<(), String> {
    let write = |path: PathBuf, data: &str| {
        std::fs::write(&path, data).map_err(|e| format!("{}: {e}", path.display()))
    };
    std::fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    write(out_dir.join(format!("{}_errors.csv", outcome.label)), &outcome.csv)?;
    write(out_dir.join(format!("{}_report.json", outcome.label)), &outcome.json)?;
    println!("{}", outcome.summary);
    Ok(())
}

/// Exit codes ranked by severity: hard failures dominate non-convergence.
fn worse(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        0 => 0,
        2 => 1,
        _ => 2,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn sweep(example: usize, alphas: &[f64], common: &CommonArgs) -> i32 {
    if example != 1 && example != 4 {
        return fail(&format!(
            "sweep supports examples 1 and 4 (parametric order with a fixed exact solution), got {example}"
        ));
    }
    if alphas.is_empty() {
        return fail("at least one alpha is required");
    }
    let grid = common.grid.clone().unwrap_or_else(sweep_report_grid);

    let member = |&alpha: &f64| -> Result<RunOutcome, String> {
        let bench = builtin(example, Some(alpha)).map_err(|e| e.to_string())?;
        let meta = RunMeta {
            command: "sweep",
            example: Some(example),
            alpha: Some(alpha),
            problem_file: None,
        };
        compute_run(&bench, common, &meta, &grid).map_err(|e| e.to_string())
    };

    // Members are independent; results come back in input order either way.
    #[cfg(feature = "parallel")]
    let results: Vec<Result<RunOutcome, String>> = alphas.par_iter().map(member).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<RunOutcome, String>> = alphas.iter().map(member).collect();

    let mut code = 0;
    let mut combined = String::from("alpha,t,abs_error\n");
    for (alpha, result) in alphas.iter().zip(&results) {
        match result {
            Ok(outcome) => {
                if let Err(e) = emit(&common.out, outcome) {
                    code = worse(code, fail(&e));
                    continue;
                }
                if !outcome.converged {
                    code = worse(code, 2);
                }
                for row in &outcome.rows {
                    if let Some(abs) = row.abs_error {
                        combined.push_str(&format!("{},{},{}\n", alpha, row.t, abs));
                    }
                }
            }
            Err(message) => code = worse(code, fail(message)),
        }
    }

    let path = common.out.join(format!("example{example}_sweep.csv"));
    if let Err(e) = std::fs::write(&path, combined) {
        code = worse(code, fail(&format!("{}: {e}", path.display())));
    }
    code
}
