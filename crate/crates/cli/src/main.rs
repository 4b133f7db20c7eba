//! Command-line front end: analysis, partitioning, priority search,
//! simulation, task-set generation, sweeps and trace checking.
//!
//! Exit status: 0 on success or a schedulable verdict, 1 on an unschedulable
//! verdict or a failed check, 2 on usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dagspin::analysis_fifo::{check_assignment_fifo, partition_fifo};
use dagspin::analysis_priority::{
    check_assignment_priority, partition_priority, search_priority_assignment, DEFAULT_PERMUTATION_CAP,
};
use dagspin::analysis_unordered::{check_assignment_unordered, partition_unordered};
use dagspin::framework::{ceil_time, Unschedulable};
use dagspin::harness::{acceptance_ratio, SweepSpec};
use dagspin::simulator::{audit_trace, parse_trace, replay_trace, simulate, Discipline, SimConfig, UnorderedMode};
use dagspin::workload::{gen_openmp_taskset, gen_taskset, place_all, GenConfig};
use dagspin::{AnalysisError, Bound, TaskSet, Time, Verdict};

#[derive(Parser)]
#[command(name = "dagspin", version, about = "Schedulability analysis and simulation of DAG tasks sharing spin locks")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-task response-time bounds for a given processor assignment.
    Analyze {
        taskset: PathBuf,
        /// Lock discipline: unordered, fifo or priority.
        #[arg(long)]
        order: Discipline,
        /// Processors per task, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        /// Priority order, highest first; overrides the task-set file.
        #[arg(long, value_delimiter = ',')]
        priority_order: Option<Vec<usize>>,
    },
    /// Assigns processors to tasks with the algorithm for the discipline.
    Partition {
        taskset: PathBuf,
        #[arg(long)]
        order: Discipline,
        #[arg(long, value_delimiter = ',')]
        priority_order: Option<Vec<usize>>,
        /// Largest task count for which priority orders are searched.
        #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
        cap: usize,
        /// Also write the per-task result as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tries priority orders lexicographically until one is schedulable.
    SearchPriorities {
        taskset: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
        cap: usize,
    },
    /// Simulates a task set and writes the interval trace.
    Simulate {
        taskset: PathBuf,
        #[arg(long)]
        order: Discipline,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        priority_order: Option<Vec<usize>>,
        /// Simulated time; defaults to six times the largest period.
        #[arg(long)]
        horizon: Option<Time>,
        /// First release per task, comma separated.
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<Time>>,
        /// Unordered locks only: starve this task instead of granting randomly.
        #[arg(long)]
        adversarial: Option<usize>,
        /// Trace file; the trace goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generates a random task set as JSON.
    Generate {
        /// Flat key = value generator configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Build tasks from the measured benchmark programs.
        #[arg(long)]
        openmp: bool,
        /// Also place every request on a vertex.
        #[arg(long)]
        place: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Acceptance ratios over one generator parameter, as CSV.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replays a trace and reports each job's time accounting.
    Replay {
        taskset: PathBuf,
        trace: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
    /// Checks a trace for consistency and the accounting identities.
    CheckTrace {
        taskset: PathBuf,
        trace: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Bulk output to stdout; a closed pipe just ends the output.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load_taskset(path: &Path, priority_order: Option<Vec<usize>>) -> Result<TaskSet> {
    let ts = TaskSet::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    match priority_order {
        Some(order) => Ok(ts.with_priority_order(order)?),
        None => Ok(ts),
    }
}

fn show(b: &Bound) -> String {
    if b.is_integer() {
        b.to_integer().to_string()
    } else {
        format!("{b} (~{})", ceil_time(b))
    }
}

fn reason(r: &Unschedulable) -> String {
    match r {
        Unschedulable::DenominatorNonpositive { task } => {
            format!("task {task} cannot meet its deadline on any processor count")
        }
        Unschedulable::BudgetExhausted => "processor budget exhausted".into(),
    }
}

fn print_verdict(ts: &TaskSet, v: &Verdict) {
    println!("task,processors,bound,deadline,meets_deadline");
    for (i, t) in ts.tasks().iter().enumerate() {
        let (b, meets) = match &v.bounds[i] {
            Some(b) => (show(b), (*b <= Bound::from_integer(t.deadline() as i128)).to_string()),
            None => ("-".into(), "-".into()),
        };
        println!("{i},{},{b},{},{meets}", v.assignment[i], t.deadline());
    }
    println!("m = {:?} ({} of {} processors)", v.assignment, v.processors_used(), ts.processors());
    match (&v.schedulable, &v.reason) {
        (true, _) => println!("verdict: schedulable"),
        (false, Some(r)) => println!("verdict: unschedulable ({})", reason(r)),
        (false, None) => println!("verdict: unschedulable"),
    }
}

fn verdict_csv(ts: &TaskSet, v: &Verdict) -> String {
    let mut s = String::from("task,processors,bound,deadline\n");
    for (i, t) in ts.tasks().iter().enumerate() {
        let b = v.bounds[i].map_or_else(|| "-".to_string(), |b| b.to_string());
        s.push_str(&format!("{i},{},{b},{}\n", v.assignment[i], t.deadline()));
    }
    s
}

/// A deadline at or below the longest path is a verdict, not an input error.
fn verdict_or_unschedulable(r: Result<Verdict, AnalysisError>) -> Result<Option<Verdict>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ AnalysisError::DeadlineNotAboveLongestPath { .. }) => {
            println!("verdict: unschedulable ({e})");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn analyze(path: &Path, order: Discipline, m: &[u64], priority_order: Option<Vec<usize>>) -> Result<bool> {
    let ts = load_taskset(path, priority_order)?;
    let v = match order {
        Discipline::Unordered => check_assignment_unordered(&ts, m)?,
        Discipline::Fifo => check_assignment_fifo(&ts, m)?,
        Discipline::Priority => check_assignment_priority(&ts, m)?,
    };
    print_verdict(&ts, &v);
    Ok(v.schedulable)
}

fn partition(
    path: &Path,
    order: Discipline,
    priority_order: Option<Vec<usize>>,
    cap: usize,
    out: Option<&Path>,
) -> Result<bool> {
    let mut ts = load_taskset(path, priority_order)?;
    let v = match order {
        Discipline::Unordered => Some(partition_unordered(&ts)),
        Discipline::Fifo => verdict_or_unschedulable(partition_fifo(&ts))?,
        Discipline::Priority if ts.priority_order().is_some() => verdict_or_unschedulable(partition_priority(&ts))?,
        Discipline::Priority => {
            let found = search_priority_assignment(&ts, cap)?;
            println!("searched {} priority orders", found.orders_tried);
            match (found.order, found.verdict) {
                (Some(order), Some(v)) => {
                    println!("priority order: {order:?}");
                    ts = ts.with_priority_order(order)?;
                    Some(v)
                }
                _ => {
                    println!("verdict: unschedulable (no priority order works)");
                    None
                }
            }
        }
    };
    let Some(v) = v else { return Ok(false) };
    print_verdict(&ts, &v);
    if let Some(out) = out {
        write(out, &verdict_csv(&ts, &v))?;
    }
    Ok(v.schedulable)
}

fn search_priorities(path: &Path, cap: usize) -> Result<bool> {
    let ts = load_taskset(path, None)?;
    let found = search_priority_assignment(&ts, cap)?;
    println!("orders tried: {}", found.orders_tried);
    match (found.order, found.verdict) {
        (Some(order), Some(v)) => {
            println!("priority order: {}", order.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","));
            print_verdict(&ts.with_priority_order(order)?, &v);
            Ok(true)
        }
        _ => {
            println!("verdict: unschedulable (no priority order works)");
            Ok(false)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_simulation(
    path: &Path,
    order: Discipline,
    m: &[u64],
    priority_order: Option<Vec<usize>>,
    horizon: Option<Time>,
    offsets: Option<Vec<Time>>,
    adversarial: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let mut ts = load_taskset(path, priority_order)?;
    if ts.tasks().iter().any(|t| !t.has_placements()) {
        ts = place_all(&ts, seed)?;
    }
    let mut config = SimConfig::new(order, seed);
    config.horizon = horizon;
    config.release_offsets = offsets;
    if let Some(victim) = adversarial {
        if order != Discipline::Unordered {
            bail!("--adversarial applies to unordered locks only");
        }
        config.unordered_mode = UnorderedMode::Adversarial { victim };
    }
    let trace = simulate(&ts, m, &config)?;
    let summary = |line: String| {
        if out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    for (i, t) in ts.tasks().iter().enumerate() {
        let finished: Vec<Time> =
            trace.jobs.iter().filter(|j| j.id.task == i).filter_map(|j| j.response_time()).collect();
        let misses = finished.iter().filter(|&&r| r > t.deadline()).count();
        let worst = finished.iter().max().map_or_else(|| "-".to_string(), |r| r.to_string());
        summary(format!(
            "task {i}: {} jobs finished, max response {worst}, deadline {}, misses {misses}",
            finished.len(),
            t.deadline()
        ));
    }
    match out {
        Some(out) => write(out, &trace.to_text())?,
        None => emit(&trace.to_text())?,
    }
    Ok(true)
}

fn generate(
    config_path: Option<&Path>,
    openmp: bool,
    place: bool,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<bool> {
    let config = match config_path {
        Some(p) => GenConfig::from_config(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => GenConfig::desk_scale(),
    };
    let seed = seed.unwrap_or(config.seed);
    let mut ts = if openmp { gen_openmp_taskset(&config, seed)? } else { gen_taskset(&config, seed)? };
    if place {
        ts = place_all(&ts, seed)?;
    }
    let json = ts.to_json();
    match out {
        Some(out) => write(out, &json)?,
        None => emit(&format!("{json}\n"))?,
    }
    Ok(true)
}

fn sweep(spec_path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<bool> {
    let mut spec =
        SweepSpec::from_config(&read(spec_path)?).with_context(|| format!("parsing {}", spec_path.display()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
        spec.base.seed = seed;
    }
    let table = acceptance_ratio(&spec)?;
    for (value, failed) in table.generation_failures.iter().filter(|(_, n)| *n > 0) {
        eprintln!("{} = {value}: {failed} task sets could not be generated", spec.axis.name());
    }
    match out {
        Some(out) => write(out, &table.to_csv())?,
        None => emit(&table.to_csv())?,
    }
    Ok(true)
}

fn replay(ts_path: &Path, trace_path: &Path, m: &[u64], verbose: bool) -> Result<bool> {
    let ts = load_taskset(ts_path, None)?;
    let records = parse_trace(&read(trace_path)?).with_context(|| format!("parsing {}", trace_path.display()))?;
    let trace = match replay_trace(&ts, m, records) {
        Ok(t) => t,
        Err(e) if !verbose => {
            println!("invalid trace: {e}");
            return Ok(false);
        }
        Err(e) => return Err(e).with_context(|| format!("replaying {}", trace_path.display())),
    };
    let reports = audit_trace(&trace);
    let mut ok = true;
    if verbose {
        println!("job,release,finish,blocking,working,idle,key_path_length,key_intra,key_inter,delay_intra,delay_inter,parallel_intra,parallel_inter,observed_bound,identities");
    }
    for r in &reports {
        ok &= r.is_ok();
        if verbose {
            let d = &r.decomposition;
            println!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.job,
                r.release,
                r.finish,
                r.blocking,
                r.working,
                r.idle,
                r.key_busy,
                d.key_intra,
                d.key_inter,
                d.delay_intra,
                d.delay_inter,
                d.parallel_intra,
                d.parallel_inter,
                r.observed_bound,
                if r.is_ok() { "ok" } else { "violated" }
            );
        }
        for v in &r.violations {
            eprintln!("job {}: {v}", r.job);
        }
    }
    if !verbose {
        let bad = reports.iter().filter(|r| !r.is_ok()).count();
        if ok {
            println!("ok: {} jobs checked", reports.len());
        } else {
            println!("{bad} of {} jobs violate the accounting identities", reports.len());
        }
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Analyze { taskset, order, m, priority_order } => analyze(&taskset, order, &m, priority_order),
        Command::Partition { taskset, order, priority_order, cap, out } => {
            partition(&taskset, order, priority_order, cap, out.as_deref())
        }
        Command::SearchPriorities { taskset, cap } => search_priorities(&taskset, cap),
        Command::Simulate { taskset, order, m, priority_order, horizon, offsets, adversarial, out } => run_simulation(
            &taskset,
            order,
            &m,
            priority_order,
            horizon,
            offsets,
            adversarial,
            seed.unwrap_or(0),
            out.as_deref(),
        ),
        Command::Generate { config, openmp, place, out } => {
            generate(config.as_deref(), openmp, place, seed, out.as_deref())
        }
        Command::Sweep { spec, out } => sweep(&spec, seed, out.as_deref()),
        Command::Replay { taskset, trace, m } => replay(&taskset, &trace, &m, true),
        Command::CheckTrace { taskset, trace, m } => replay(&taskset, &trace, &m, false),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
