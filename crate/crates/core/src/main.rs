use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pdhg::bench::{run_suite, SuiteOptions};
use pdhg::instance_gen::{gen_pagerank, gen_random_lp, pagerank_lp, read_edge_list, PagerankConfig};
use pdhg::lp_model::{read_problem, write_mps, MpsFormat};
use pdhg::{solve, Exec, ResidualReport, SolveError, SolverParams, Status};

const EXIT_LIMIT: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "pdhg", version, about = "Restarted PDHG linear programming solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single MPS instance.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the solution as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every .mps / .mps.gz file in a directory and report SGM.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Shift of the geometric mean.
        #[arg(long, default_value_t = 10.0)]
        delta: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Instances solved concurrently.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Leave wall-clock fields out of the JSON report.
        #[arg(long)]
        no_timings: bool,
    },
    /// Generate an instance and write it as MPS.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand)]
enum GenCommand {
    /// PageRank feasibility LP on a preferential-attachment graph or an edge list.
    Pagerank {
        #[arg(long, default_value_t = 1000)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value_t = 3)]
        attachment: usize,
        /// Build from a "src dst" edge-list file instead of sampling a graph.
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random bounded feasible LP.
    Random {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// TOML file with solver parameters; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    iter_limit: Option<u64>,
    #[arg(long)]
    no_scaling: bool,
    #[arg(long)]
    no_restarts: bool,
    /// Iterations between termination checks and progress lines.
    #[arg(long)]
    log_every: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use sequential kernels.
    #[arg(long)]
    sequential: bool,
    /// Read MPS with fixed column positions.
    #[arg(long)]
    fixed: bool,
}

impl SolverArgs {
    fn params(&self) -> Result<SolverParams, String> {
        let mut p = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => SolverParams::default(),
        };
        if let Some(v) = self.eps {
            p.eps = v;
        }
        if let Some(v) = self.time_limit {
            p.time_limit = v;
        }
        if self.iter_limit.is_some() {
            p.iter_limit = self.iter_limit;
        }
        if self.no_scaling {
            p.scaling.enabled = false;
        }
        if self.no_restarts {
            p.restarts = false;
        }
        if let Some(v) = self.log_every {
            p.check_every = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if self.sequential {
            p.exec = Exec::Sequential;
        }
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }

    fn format(&self) -> MpsFormat {
        if self.fixed {
            MpsFormat::Fixed
        } else {
            MpsFormat::Free
        }
    }
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    status: Status,
    primal_objective: f64,
    dual_objective: f64,
    iterations: u64,
    restarts: u64,
    x: &'a [f64],
    y: &'a [f64],
    lambda: &'a [f64],
    residuals: &'a ResidualReport,
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExitCode> {
    fs::write(path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn run_solve(file: &Path, args: &SolverArgs, out: Option<&Path>) -> ExitCode {
    let params = match args.params() {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let problem = match read_problem(file, args.format()) {
        Ok(p) => p,
        Err(e) => return input_error(format!("{}: {e}", file.display())),
    };
    let result = match solve(&problem, &params) {
        Ok(r) => r,
        Err(e @ SolveError::NumericalFailure { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
        Err(e) => return input_error(e),
    };
    let primal = problem.user_objective(result.report.primal_obj);
    let dual = problem.user_objective(result.report.dual_obj);
    println!(
        "status={:?} primal_objective={primal:.10e} dual_objective={dual:.10e} iterations={} restarts={} time={:.3}",
        result.status, result.iterations, result.restarts, result.wall_time
    );
    if let Some(path) = out {
        let doc = SolutionJson {
            status: result.status,
            primal_objective: primal,
            dual_objective: dual,
            iterations: result.iterations,
            restarts: result.restarts,
            x: &result.x,
            y: &result.y,
            lambda: &result.lambda,
            residuals: &result.report,
        };
        let text = serde_json::to_string_pretty(&doc).expect("solution serializes");
        if let Err(code) = write_file(path, &text) {
            return code;
        }
    }
    match result.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::IterLimit | Status::TimeLimit => ExitCode::from(EXIT_LIMIT),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_bench(
    dir: &Path,
    args: &SolverArgs,
    delta: f64,
    report: Option<&Path>,
    csv: Option<&Path>,
    workers: usize,
    no_timings: bool,
) -> ExitCode {
    let params = match args.params() {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let opts = SuiteOptions { delta, workers, format: args.format() };
    let summary = match run_suite(dir, &params, &opts) {
        Ok(s) => s,
        Err(e) => return input_error(format!("{}: {e}", dir.display())),
    };
    for r in &summary.records {
        println!(
            "{:<32} {:<10} iters={:<8} time={}",
            r.instance,
            format!("{:?}", r.status),
            r.iterations,
            r.wall_time.map_or("-".to_string(), |t| format!("{t:.3}"))
        );
    }
    println!(
        "solved={}/{} sgm{}={}",
        summary.solved_count,
        summary.records.len(),
        delta,
        summary.sgm10.map_or("-".to_string(), |v| format!("{v:.4}"))
    );
    if let Some(path) = report {
        let doc = if no_timings { summary.without_timings() } else { summary.clone() };
        match doc.to_json() {
            Ok(text) => {
                if let Err(code) = write_file(path, &text) {
                    return code;
                }
            }
            Err(e) => return input_error(e),
        }
    }
    if let Some(path) = csv {
        let res = fs::File::create(path).map_err(Into::into).and_then(|f| summary.write_csv(f));
        if let Err(e) = res {
            return input_error(format!("{}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}

fn run_gen(cmd: GenCommand) -> ExitCode {
    let (problem, out, name) = match cmd {
        GenCommand::Pagerank { nodes, seed, damping, attachment, edges, out } => {
            let p = match edges {
                Some(path) => fs::File::open(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|f| read_edge_list(std::io::BufReader::new(f)).map_err(|e| e.to_string()))
                    .and_then(|g| pagerank_lp(&g, damping).map_err(|e| e.to_string())),
                None => gen_pagerank(&PagerankConfig { n_nodes: nodes, damping, attachment, seed })
                    .map_err(|e| e.to_string()),
            };
            match p {
                Ok(p) => (p, out, "PAGERANK"),
                Err(e) => return input_error(e),
            }
        }
        GenCommand::Random { rows, cols, density, seed, out } => {
            if rows == 0 || cols == 0 || !(density > 0.0 && density <= 1.0) {
                return input_error("need rows, cols >= 1 and density in (0, 1]");
            }
            (gen_random_lp(rows, cols, density, seed), out, "RANDOM")
        }
    };
    match write_file(&out, &write_mps(&problem, name)) {
        Ok(()) => {
            println!("wrote {} (m={}, n={}, nnz={})", out.display(), problem.m(), problem.n(), problem.a().nnz() + problem.g().nnz());
            ExitCode::SUCCESS
        }
        Err(code) => code,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    // progress lines are info-level; show them for single solves only
    let level = if matches!(cli.command, Command::Solve { .. }) { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match cli.command {
        Command::Solve { file, solver, out } => run_solve(&file, &solver, out.as_deref()),
        Command::Bench { dir, solver, delta, report, csv, workers, no_timings } => {
            run_bench(&dir, &solver, delta, report.as_deref(), csv.as_deref(), workers, no_timings)
        }
        Command::Gen(cmd) => run_gen(cmd),
    }
}
