use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ucvrp::algorithms::{prepare_lp, run_algorithm, AlgorithmId, SolveOptions};
use ucvrp::constants::{constants_report, ConstantsReport, DEFAULT_EPS_FIXED, DEFAULT_EPS_GENERAL};
use ucvrp::generate::{gen_instance, DemandLaw, MetricKind};
use ucvrp::instance::parse_rational;
use ucvrp::io::{instance_from_json, instance_to_json, parse_tsplib};
use ucvrp::lp_round::CatalogVariant;
use ucvrp::oracle::exact_cvrp;
use ucvrp::tsp::{approx_tsp, best_available_tour, exact_tsp};
use ucvrp::Instance;

mod bench;
mod suite;

#[derive(Parser)]
#[command(name = "ucvrp", version, about = "Unsplittable CVRP approximation algorithms, exact baselines and constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen {
        #[arg(long, default_value = "euclidean")]
        kind: MetricKind,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(short = 'k', long)]
        k: u32,
        #[arg(long, default_value = "uniform")]
        law: DemandLaw,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance file (JSON or TSPLIB) and print the report.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "alg1")]
        alg: AlgorithmId,
        /// Threshold such as `1/5` or `0.2`.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include partitions, matching plans and LP summaries.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value = "auto")]
        tour: TourChoice,
        /// Write the tour catalog and LP solution used by the algorithm.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Round TSPLIB EUC_2D lengths to integers.
        #[arg(long)]
        round_euc: bool,
    },
    /// Exact optimum by subset dynamic programming.
    Exact {
        file: PathBuf,
        #[arg(long)]
        round_euc: bool,
    },
    /// Print the analytic constants.
    Constants {
        #[arg(long, default_value_t = DEFAULT_EPS_FIXED)]
        eps_fixed: f64,
        #[arg(long, default_value_t = DEFAULT_EPS_GENERAL)]
        eps_general: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: ConstFormat,
    },
    /// Run the invariant suite on every instance file in a directory.
    Check { dir: PathBuf },
    /// Benchmark the algorithms on a generated suite.
    Bench {
        #[arg(long, value_enum, default_value = "small")]
        suite: bench::Suite,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: bench::Format,
        /// Add wall-clock times (makes the output run-dependent).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TourChoice {
    Auto,
    Exact,
    Approx,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstFormat {
    Json,
    Table,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Violation(String),
    Usage(String),
}

impl From<ucvrp::Error> for Failure {
    fn from(e: ucvrp::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load_instance(path: &Path, round_euc: bool) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let inst = if text.trim_start().starts_with('{') {
        instance_from_json(&text)
    } else {
        parse_tsplib(&text, round_euc)
    };
    inst.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable output"));
}

fn constants_table(r: &ConstantsReport) -> String {
    let mut rows = vec![
        ("y0".to_string(), format!("[{:.15}, {:.15}]", r.y0.enclosure.lo, r.y0.enclosure.hi)),
        ("y1".into(), format!("[{:.15}, {:.15}]", r.y1.enclosure.lo, r.y1.enclosure.hi)),
        ("y2".into(), format!("[{:.15}, {:.15}]", r.y2.lo, r.y2.hi)),
        ("gamma* = ln(2 - y0/2)".into(), format!("{:.15}", r.gamma_star)),
        ("gamma1".into(), format!("{:.15}", r.gamma1)),
        ("gamma2".into(), format!("{:.15}", r.gamma2)),
        ("alg1 ratio, alpha = 1".into(), format!("{:.10}", r.ratio_alg1_alpha_1.hi)),
        ("alg1 ratio, alpha = 1.5".into(), format!("{:.10}", r.ratio_alg1_alpha_1_5.hi)),
        ("alg2 ratio, alpha = 1.5".into(), format!("{:.10}", r.ratio_alg2_alpha_1_5.hi)),
    ];
    let (f, g) = (&r.refinement.fixed, &r.refinement.general);
    rows.extend([
        (format!("f({})", f.eps), format!("{:.10} at tau={:.8} rho={:.8} theta={:.8}", f.f.value, f.f.tau, f.f.rho, f.f.theta)),
        (format!("y0 at eps={}", f.eps), format!("{:.12}", f.y0_eps.enclosure.lo)),
        ("fixed capacity easy / hard".into(), format!("{:.10} / {:.10}", f.easy_ratio, f.hard_ratio)),
        ("fixed capacity final (improvement)".into(), format!("{:.10} ({:.6})", f.final_ratio, f.improvement)),
        (format!("f({})", g.eps), format!("{:.10} at tau={:.8} rho={:.8} theta={:.8}", g.f.value, g.f.tau, g.f.rho, g.f.theta)),
        (format!("y1 at eps={}", g.eps), format!("{:.12}", g.y1_eps.enclosure.lo)),
        ("general capacity easy / hard".into(), format!("{:.10} / {:.10}", g.easy_ratio, g.hard_ratio)),
        ("general capacity final (improvement)".into(), format!("{:.10} ({:.6})", g.final_ratio, g.improvement)),
    ]);
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { kind, n, k, law, seed, out } => {
            if n == 0 || k == 0 {
                return Err(Failure::Usage("n and k must be positive".into()));
            }
            let text = instance_to_json(&gen_instance(kind, n, k, law, seed));
            match out {
                Some(path) => std::fs::write(&path, text + "\n")
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => println!("{text}"),
            }
        }
        Command::Solve { file, alg, delta, gamma, seed, trace, tour, dump_lp, round_euc } => {
            let inst = load_instance(&file, round_euc)?;
            let delta = delta.map(|d| parse_rational(&d)).transpose()?;
            let all: Vec<usize> = inst.customers().collect();
            let tour = match tour {
                TourChoice::Auto => best_available_tour(&inst, &all)?,
                TourChoice::Exact => exact_tsp(&inst, &all)?,
                TourChoice::Approx => approx_tsp(&inst, &all)?,
            };
            let opts = SolveOptions { delta, gamma, seed, tour: Some(tour) };
            let out = run_algorithm(&inst, alg, &opts)?;
            if let Some(path) = dump_lp {
                let variant = match alg {
                    AlgorithmId::Subalg2 | AlgorithmId::Alg1 => Some(CatalogVariant::Lp1),
                    AlgorithmId::Subalg3 | AlgorithmId::Subalg4 | AlgorithmId::Alg2 => {
                        Some(CatalogVariant::Lp2 { delta: out.report.params.delta.expect("delta recorded") })
                    }
                    _ => None,
                };
                let dump = match variant {
                    Some(v) => serde_json::to_value(prepare_lp(&inst, v)?).expect("serializable"),
                    None => Value::Null,
                };
                std::fs::write(&path, serde_json::to_string_pretty(&dump).expect("serializable"))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            let mut doc = serde_json::to_value(&out.report).expect("report serializes");
            let tours: Vec<Value> = out
                .solution
                .tours
                .iter()
                .zip(&out.solution.served)
                .map(|(t, s)| json!({"vertices": t.vertices, "cost": t.cost, "served": s}))
                .collect();
            doc["tours"] = Value::Array(tours);
            if trace {
                doc["trace"] = out.trace.clone();
            }
            print_json(&doc);
            if !out.report.feasible {
                return Err(Failure::Violation(out.report.violation.unwrap_or_default()));
            }
            if let Some(b) = out.report.bound_checks.iter().find(|b| !b.holds) {
                return Err(Failure::Violation(format!("bound `{}` violated: {} > {}", b.name, b.cost, b.bound)));
            }
        }
        Command::Exact { file, round_euc } => {
            let inst = load_instance(&file, round_euc)?;
            let r = exact_cvrp(&inst)?;
            let costs: Vec<f64> = r.tours.iter().map(|t| t.cost).collect();
            let tours: Vec<&Vec<usize>> = r.tours.iter().map(|t| &t.vertices).collect();
            print_json(&json!({
                "name": inst.name(),
                "n": inst.n(),
                "opt_cost": r.opt_cost,
                "groups": r.groups(),
                "group_costs": costs,
                "tours": tours,
            }));
        }
        Command::Constants { eps_fixed, eps_general, format } => {
            let r = constants_report(eps_fixed, eps_general)?;
            match format {
                ConstFormat::Json => print_json(&r),
                ConstFormat::Table => print!("{}", constants_table(&r)),
            }
        }
        Command::Check { dir } => {
            let outcome = suite::check_dir(&dir)?;
            print_json(&outcome);
            if !outcome.violations.is_empty() {
                return Err(Failure::Violation(format!("{} invariant violation(s)", outcome.violations.len())));
            }
        }
        Command::Bench { suite, seeds, format, timing } => {
            if seeds == 0 {
                return Err(Failure::Usage("--seeds must be positive".into()));
            }
            let rows = bench::run(suite, seeds, timing)?;
            match format {
                bench::Format::Json => print_json(&rows),
                bench::Format::Csv => print!("{}", bench::to_csv(&rows, timing)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
