use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use jobshop_codec::codec::{parse_binary, qubit_count, qubit_count_time_indexed, t_min, Codec, CodeIndex, DecodeMode};
use jobshop_codec::fvqe::{optimize, FvqeConfig};
use jobshop_codec::instance::{
    even_family, generate_random_fjsp, generate_random_jsp, growing_family, parse_instance, FamilyDurations,
    Instance,
};
use jobshop_codec::oracle::{bijection_report, ground_state, OracleError, DEFAULT_CAP};
use jobshop_codec::schedule::{evaluate_makespan, render_gantt, Schedule};

/// Compact qubit encoding of job-shop schedules: generate instances, map
/// between integers and schedules, and solve by brute force or F-VQE.
#[derive(Parser)]
#[command(name = "jobshop", version)]
struct Cli {
    /// Largest schedule count the exhaustive oracle will enumerate.
    #[arg(long, global = true, env = "JOBSHOP_ORACLE_CAP", default_value_t = DEFAULT_CAP)]
    oracle_cap: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance as JSON.
    Generate {
        #[arg(long)]
        n_ops: usize,
        /// Flexible instance (several admissible machines per operation).
        #[arg(long)]
        fjsp: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the code index of a schedule.
    Encode {
        #[arg(long)]
        instance: PathBuf,
        /// Schedule JSON file, as printed by `decode`.
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Print the schedule named by an index or bitstring.
    Decode {
        #[arg(long)]
        instance: PathBuf,
        /// Index in decimal, or binary with a `0b` prefix.
        #[arg(long, conflicts_with = "bitstring", required_unless_present = "bitstring")]
        index: Option<String>,
        /// Register bitstring, most significant bit first.
        #[arg(long)]
        bitstring: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        mode: Mode,
    },
    /// Find a short schedule by exhaustive search or F-VQE.
    Solve(SolveArgs),
    /// Exhaustively check that decoding is a bijection onto valid schedules.
    Check {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Qubit counts of the compact and the time-indexed encodings as CSV.
    ///
    /// Columns: instance, n_ops, n_qubits, n_qubits_time_indexed, horizon,
    /// horizon_source (c_gs when the oracle fits under the cap, else t_min),
    /// ratio (time-indexed over compact).
    CompareEncodings(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Total,
}

impl From<Mode> for DecodeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strict => DecodeMode::Strict,
            Mode::Total => DecodeMode::Total,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Fvqe,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Brute)]
    method: Method,
    /// Shots per circuit; 0 uses exact expectations. Defaults to the
    /// size-dependent policy.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ansatz repetitions.
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// Result JSON file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration CSV trace (F-VQE only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// n jobs of n operations on n machines.
    Nxnxn,
    /// `--jobs` jobs (and machines) of n operations each.
    Growing,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory of instance JSON files.
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    instances: Option<PathBuf>,
    #[arg(long, value_enum, requires = "n")]
    family: Option<Family>,
    /// Family sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Job count of the growing family.
    #[arg(long, default_value_t = 2)]
    jobs: usize,
    /// Draw family durations uniformly from 1..=n_ops instead of unit.
    #[arg(long)]
    random_durations: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    let text = if text.ends_with('\n') { text.to_owned() } else { format!("{text}\n") };
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { n_ops, fjsp, seed, out } => {
            if n_ops == 0 {
                bail!("--n-ops must be at least 1");
            }
            let inst = if fjsp { generate_random_fjsp(n_ops, seed) } else { generate_random_jsp(n_ops, seed) };
            emit(out.as_deref(), &inst.to_json())
        }
        Command::Encode { instance, schedule } => {
            let inst = read_instance(&instance)?;
            let text = fs::read_to_string(&schedule).with_context(|| format!("reading {}", schedule.display()))?;
            let s = Schedule::from_json(&text).context("parsing schedule")?;
            let idx = Codec::new(&inst).encode(&s)?;
            emit(None, &serde_json::to_string(&idx)?)
        }
        Command::Decode { instance, index, bitstring, mode } => {
            let inst = read_instance(&instance)?;
            let codec = Codec::new(&inst);
            let value = match (index, bitstring) {
                (Some(i), _) => parse_index(&i)?,
                (None, Some(b)) => CodeIndex::from_bitstring(&b, codec.width())?.value().clone(),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let s = codec.decode(&value, mode.into())?;
            emit(None, &s.to_json())
        }
        Command::Solve(args) => solve(&args, cli.oracle_cap),
        Command::Check { instance } => {
            let inst = read_instance(&instance)?;
            let report = bijection_report(&inst, cli.oracle_cap)?;
            emit(None, &report.to_json())?;
            if !report.is_clean() {
                bail!("decoding is not a bijection on this instance");
            }
            Ok(())
        }
        Command::CompareEncodings(args) => compare(&args, cli.oracle_cap),
    }
}

fn timing_value(inst: &Instance, s: &Schedule) -> Result<(Value, String)> {
    let t = evaluate_makespan(inst, s)?;
    Ok((serde_json::from_str(&t.to_json())?, render_gantt(inst, &t)))
}

fn solve(args: &SolveArgs, oracle_cap: u64) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let (doc, summary, gantt) = match args.method {
        Method::Brute => {
            let gs = ground_state(&inst, oracle_cap)?;
            let best = gs.optimal_indices().remove(0);
            let s = Codec::new(&inst).decode(best.value(), DecodeMode::Strict)?;
            let (timing, gantt) = timing_value(&inst, &s)?;
            let doc = json!({
                "method": "brute",
                "c_gs": gs.c_gs,
                "optimal_count": gs.optimal.len(),
                "best_index": best,
                "schedule": s,
                "timing": timing,
                "gantt": gantt,
            });
            (doc, format!("C_gs = {} ({} optimal indices)", gs.c_gs, gs.optimal.len()), gantt)
        }
        Method::Fvqe => {
            let cfg = FvqeConfig {
                max_iterations: args.iters,
                shots: args.shots,
                layers: args.layers,
                seed: args.seed,
                oracle_cap,
                ..FvqeConfig::default()
            };
            let r = optimize(&inst, &cfg)?;
            if let Some(p) = &args.trace {
                fs::write(p, r.trace_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            let (timing, gantt) = timing_value(&inst, &r.best_schedule)?;
            let summary = match (r.c_gs, r.alpha, r.ground_state_probability) {
                (Some(gs), Some(a), Some(p)) => format!("C_opt = {}, C_gs = {gs}, alpha = {a:.4}, P_gs = {p:.4}", r.c_opt),
                _ => format!("C_opt = {} (oracle skipped: schedule count above cap)", r.c_opt),
            };
            let doc = json!({
                "method": "fvqe",
                "result": r,
                "timing": timing,
                "gantt": gantt,
            });
            (doc, summary, gantt)
        }
    };
    let text = serde_json::to_string_pretty(&doc)?;
    match &args.out {
        Some(p) => {
            fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
            println!("{summary}");
            print!("{gantt}");
            Ok(())
        }
        None => emit(None, &text),
    }
}

struct Row {
    id: String,
    inst: Instance,
}

fn compare(args: &CompareArgs, oracle_cap: u64) -> Result<()> {
    let rows: Vec<Row> = if let Some(dir) = &args.instances {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        paths
            .iter()
            .map(|p| {
                Ok(Row {
                    id: p.file_stem().unwrap().to_string_lossy().into_owned(),
                    inst: read_instance(p)?,
                })
            })
            .collect::<Result<_>>()?
    } else {
        let durations = if args.random_durations {
            FamilyDurations::Random(args.seed)
        } else {
            FamilyDurations::Unit
        };
        let family = args.family.expect("clap requires a source");
        if args.jobs == 0 || args.n.contains(&0) {
            bail!("family sizes must be positive");
        }
        args.n
            .iter()
            .map(|&n| match family {
                Family::Nxnxn => Row {
                    id: format!("nxnxn-{n}"),
                    inst: even_family(n, durations),
                },
                Family::Growing => Row {
                    id: format!("growing-{}x{n}", args.jobs),
                    inst: growing_family(args.jobs, n, durations),
                },
            })
            .collect()
    };

    let mut csv = String::from("instance,n_ops,n_qubits,n_qubits_time_indexed,horizon,horizon_source,ratio\n");
    for row in rows {
        let (horizon, source) = match ground_state(&row.inst, oracle_cap) {
            Ok(gs) => (gs.c_gs, "c_gs"),
            Err(OracleError::CapExceeded { .. }) => (t_min(&row.inst), "t_min"),
        };
        let compact = qubit_count(&row.inst);
        let indexed = qubit_count_time_indexed(&row.inst, horizon)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.id,
            row.inst.n_ops(),
            compact,
            indexed,
            horizon,
            source,
            indexed as f64 / f64::from(compact)
        ));
    }
    emit(args.out.as_deref(), &csv)
}

/// Decimal, or binary with a `0b` prefix.
fn parse_index(text: &str) -> Result<BigUint> {
    match text.strip_prefix("0b") {
        Some(bits) => Ok(parse_binary(bits)?),
        None => text.parse().with_context(|| format!("invalid index {text:?}")),
    }
}
