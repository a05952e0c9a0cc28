use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sparrow_core::experiment::{
    baseline_comparison, claim_checks, generate_random_3sat, generate_two_occurrence, prop3_scaling_experiment,
    success_rate_experiment, write_csv, ClaimConfig, GeneratorConfig, BASELINE_SCHEMA, PROP3_SCHEMA,
    SUCCESS_RATE_SCHEMA,
};
use sparrow_core::flip::{three_occurrence_cluster, two_occurrence_cluster};
use sparrow_core::markov::{analyze, ChainLimits};
use sparrow_core::solver::{Move, RunResult};
use sparrow_core::{
    clusterize, emit_dimacs, flip_table, parse_dimacs, schoening_walk, solve_end_to_end, CnfFormula, SparrowParams,
};

const EXIT_SOLVED: u8 = 10;
const EXIT_EXHAUSTED: u8 = 20;

#[derive(Parser)]
#[command(name = "sparrow", version, about = "Clustered Sparrow local search for 3-SAT and its Markov-chain analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a formula so every variable occurs in at most three clauses.
    Transform {
        input: PathBuf,
        /// Clustered DIMACS output.
        #[arg(short, long)]
        out: PathBuf,
        /// Variable map sidecar; defaults to `<out>.map`.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Print the make/break table of one variable over all assignments.
    Fliptable {
        /// DIMACS file, or `prop3` / `cluster3` for the built-in patterns.
        pattern: String,
        /// 1-based variable whose flips are tabulated.
        #[arg(long, default_value_t = 1)]
        var: usize,
    },
    /// Search for a model. Exits 10 when solved and 20 when the budget runs out.
    Solve(SolveArgs),
    /// Exact chain analysis of a small formula, as JSON.
    Analyze {
        input: PathBuf,
        /// Clusterize the input before building the chain.
        #[arg(long)]
        clusterize: bool,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 16)]
        max_vars: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Emit a random 3-CNF instance in DIMACS.
    Gen {
        #[arg(short, long)]
        n: Option<usize>,
        #[arg(short, long)]
        c: usize,
        #[arg(long)]
        planted: bool,
        /// Every variable occurs at most twice (always planted); `n` is derived.
        #[arg(long, conflicts_with_all = ["n", "planted"])]
        two_occurrence: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Benchmark and claim-check experiments.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Sparrow,
    Schoening,
}

#[derive(Args)]
struct SolveArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sparrow")]
    algo: Algo,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    #[arg(long, default_value_t = 9)]
    budget_mult: u64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tries for the Schöning walk.
    #[arg(long, default_value_t = 100)]
    restarts: u64,
    /// Write the trajectory as CSV: step, satisfied_count, flipped_var, class.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a JSON summary to stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Bench {
    /// Success rate of the clustered search within its budget.
    SuccessRate {
        #[command(flatten)]
        common: Common,
        /// Source sizes as `n:c` pairs.
        #[arg(long, value_delimiter = ',', default_value = "8:20,12:48,16:64")]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 9)]
        budget_mult: u64,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
        /// Uniform instances, screened by exhaustive search.
        #[arg(long)]
        unplanted: bool,
    },
    /// Steps to solve formulas with at most two occurrences per variable.
    Prop3 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160")]
        m: Vec<usize>,
    },
    /// Clustered search against Schöning's walk on the same instances.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "10:40,20:80,30:120")]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 100)]
        restarts: u64,
    },
    /// Measured checks of the analytical claims, as JSON.
    Claims {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Runs per sampled size.
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_formula(path: &Path) -> Result<CnfFormula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn parse_sizes(sizes: &[String]) -> Result<Vec<(usize, usize)>> {
    sizes
        .iter()
        .map(|s| {
            let (n, c) = s.split_once(':').with_context(|| format!("size `{s}` is not n:c"))?;
            Ok((n.trim().parse()?, c.trim().parse()?))
        })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_text<T: Serialize>(schema: &str, rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, schema, rows)?;
    Ok(String::from_utf8(buf)?)
}

/// CSV goes to `--out`; with `--json` the summary goes to stdout, otherwise
/// CSV goes to stdout when no file is given.
fn emit_bench<T: Serialize, S: Serialize>(common: &Common, schema: &str, rows: &[T], summary: &S) -> Result<()> {
    let csv = csv_text(schema, rows)?;
    if let Some(p) = &common.out {
        write_out(Some(p), &csv)?;
    }
    if common.json {
        write_out(None, &to_json(summary)?)
    } else if common.out.is_none() {
        write_out(None, &csv)
    } else {
        Ok(())
    }
}

fn trace_csv(run: &RunResult) -> String {
    let mut s = String::from("step,satisfied_count,flipped_var,class\n");
    let (Some(traj), Some(log)) = (&run.trajectory, &run.flip_log) else {
        return s;
    };
    s += &format!("0,{},,\n", traj[0]);
    for (rec, sat) in log.iter().zip(&traj[1..]) {
        let (var, class) = match rec.mv {
            Move::Flip { var, class, .. } => ((var + 1).to_string(), class.as_str()),
            Move::Jump => (String::new(), "jump"),
        };
        s += &format!("{},{sat},{var},{class}\n", rec.step + 1);
    }
    s
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let run = match args.algo {
        Algo::Sparrow => {
            let params = SparrowParams {
                alpha: args.alpha,
                budget_multiplier: args.budget_mult,
                epsilon: args.epsilon,
                seed: args.seed,
                record: args.trace.is_some(),
            };
            solve_end_to_end(&formula, &params)?
        }
        Algo::Schoening => {
            if args.trace.is_some() {
                bail!("--trace is only recorded for --algo sparrow");
            }
            schoening_walk(&formula, args.restarts, args.seed)
        }
    };
    if let Some(p) = &args.trace {
        write_out(Some(p), &trace_csv(&run))?;
    }
    let mut out = format!(
        "c steps {} budget {} restarts {}\n",
        run.steps_used, run.budget, run.restarts_used
    );
    match &run.model {
        Some(model) => {
            out += "s SATISFIABLE\nv";
            for (i, &b) in model.values().iter().enumerate() {
                let lit = i as i64 + 1;
                out += &format!(" {}", if b { lit } else { -lit });
            }
            out += " 0\n";
        }
        None => out += "s UNKNOWN\n",
    }
    write_out(None, &out)?;
    Ok(ExitCode::from(if run.is_solved() { EXIT_SOLVED } else { EXIT_EXHAUSTED }))
}

fn bench(cmd: &Bench) -> Result<()> {
    match cmd {
        Bench::SuccessRate { common, sizes, budget_mult, alpha, unplanted } => {
            let params = SparrowParams {
                alpha: *alpha,
                budget_multiplier: *budget_mult,
                seed: common.seed,
                ..SparrowParams::default()
            };
            let rows = success_rate_experiment(&parse_sizes(sizes)?, common.trials, &params, !unplanted)?;
            emit_bench(common, SUCCESS_RATE_SCHEMA, &rows, &rows)
        }
        Bench::Prop3 { common, m } => {
            let report = prop3_scaling_experiment(m, common.trials, common.seed)?;
            emit_bench(common, PROP3_SCHEMA, &report.rows, &report)
        }
        Bench::Baseline { common, sizes, restarts } => {
            let params = SparrowParams { seed: common.seed, ..SparrowParams::default() };
            let rows = baseline_comparison(&parse_sizes(sizes)?, common.trials, common.seed, *restarts, &params)?;
            emit_bench(common, BASELINE_SCHEMA, &rows, &rows)
        }
        Bench::Claims { seed, trials, out } => {
            let cfg = ClaimConfig { seed: *seed, sampled_runs: *trials, ..ClaimConfig::default() };
            write_out(out.as_deref(), &to_json(&claim_checks(&cfg)?)?)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Transform { input, out, map } => {
            let (clustered, vars) = clusterize(&read_formula(&input)?);
            write_out(Some(&out), &emit_dimacs(&clustered))?;
            let map = map.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".map");
                p.into()
            });
            write_out(Some(&map), &vars.to_sidecar())?;
        }
        Command::Fliptable { pattern, var } => {
            let formula = match pattern.as_str() {
                "prop3" => two_occurrence_cluster(),
                "cluster3" => three_occurrence_cluster(),
                path => read_formula(Path::new(path))?,
            };
            if var == 0 {
                bail!("--var is 1-based");
            }
            write_out(None, &flip_table(&formula, var - 1)?.to_string())?;
        }
        Command::Solve(args) => return solve(&args),
        Command::Analyze { input, clusterize: cl, alpha, epsilon, max_vars, out } => {
            let mut formula = read_formula(&input)?;
            if cl {
                formula = clusterize(&formula).0;
            }
            let limits = ChainLimits { max_vars, ..ChainLimits::default() };
            let report = analyze(&formula, alpha, epsilon, &limits)?;
            write_out(out.as_deref(), &to_json(&report)?)?;
        }
        Command::Gen { n, c, planted, two_occurrence, seed, out } => {
            let inst = if two_occurrence {
                generate_two_occurrence(c, seed)?
            } else {
                let n = n.context("--n is required unless --two-occurrence is set")?;
                generate_random_3sat(&GeneratorConfig { n, c, planted, seed })?
            };
            write_out(out.as_deref(), &emit_dimacs(&inst.formula))?;
        }
        Command::Bench(b) => bench(&b)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
