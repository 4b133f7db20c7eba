//! Experiment orchestration: analyzer dispatch, acceptance-ratio sweeps,
//! soundness campaigns that compare simulated response times to analytical
//! bounds, and identity fuzzing of simulated traces.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis_fifo::{federated_init, partition_fifo};
use crate::analysis_priority::{search_priority_assignment, DEFAULT_PERMUTATION_CAP};
use crate::analysis_unordered::partition_unordered;
use crate::framework::{bound, AnalysisError, Bound, Verdict};
use crate::model::{TaskSet, Time};
use crate::simulator::{audit_trace, simulate, Discipline, IdentityReport, SimConfig, SimError, UnorderedMode};
use crate::workload::{gen_taskset, parse_key_values, parse_list, parse_num, place_all, GenConfig, GenError, Span};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid sweep: {0}")]
    Invalid(String),
}

/// The three partitioning analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Analyzer {
    /// XU-U: unordered requests.
    Unordered,
    /// XU-F: FIFO-ordered requests.
    Fifo,
    /// XU-P: priority-ordered requests with a search over priority orders.
    Priority,
}

impl Analyzer {
    pub const ALL: [Analyzer; 3] = [Analyzer::Unordered, Analyzer::Fifo, Analyzer::Priority];

    pub fn label(self) -> &'static str {
        match self {
            Analyzer::Unordered => "XU-U",
            Analyzer::Fifo => "XU-F",
            Analyzer::Priority => "XU-P",
        }
    }

    pub fn discipline(self) -> Discipline {
        match self {
            Analyzer::Unordered => Discipline::Unordered,
            Analyzer::Fifo => Discipline::Fifo,
            Analyzer::Priority => Discipline::Priority,
        }
    }
}

impl fmt::Display for Analyzer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Analyzer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "XU-U" | "unordered" => Ok(Analyzer::Unordered),
            "XU-F" | "fifo" => Ok(Analyzer::Fifo),
            "XU-P" | "priority" => Ok(Analyzer::Priority),
            other => Err(format!("unknown analyzer `{other}` (expected XU-U, XU-F or XU-P)")),
        }
    }
}

/// What one analyzer concluded about one task set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Partitioned. For the priority analyzer `taskset` carries the order
    /// that worked.
    Schedulable {
        taskset: TaskSet,
        verdict: Verdict,
    },
    Unschedulable,
    /// Priority search refused: too many tasks.
    Skipped,
}

impl Outcome {
    pub fn is_schedulable(&self) -> bool {
        matches!(self, Outcome::Schedulable { .. })
    }
}

/// Runs one analyzer. Analysis errors raised by a task whose deadline does
/// not exceed its longest path count as unschedulable.
pub fn run_analyzer(ts: &TaskSet, analyzer: Analyzer, permutation_cap: usize) -> Result<Outcome, AnalysisError> {
    let unschedulable_on = |e: AnalysisError| match e {
        AnalysisError::DeadlineNotAboveLongestPath { .. } => Ok(Outcome::Unschedulable),
        other => Err(other),
    };
    match analyzer {
        Analyzer::Unordered => {
            let v = partition_unordered(ts);
            Ok(if v.schedulable {
                Outcome::Schedulable { taskset: ts.clone(), verdict: v }
            } else {
                Outcome::Unschedulable
            })
        }
        Analyzer::Fifo => match partition_fifo(ts) {
            Ok(v) if v.schedulable => Ok(Outcome::Schedulable { taskset: ts.clone(), verdict: v }),
            Ok(_) => Ok(Outcome::Unschedulable),
            Err(e) => unschedulable_on(e),
        },
        Analyzer::Priority => match search_priority_assignment(ts, permutation_cap) {
            Ok(found) => Ok(match (found.order, found.verdict) {
                (Some(order), Some(verdict)) => Outcome::Schedulable {
                    taskset: ts.clone().with_priority_order(order).expect("search returns a permutation"),
                    verdict,
                },
                _ => Outcome::Unschedulable,
            }),
            Err(AnalysisError::TooManyTasks { .. }) => Ok(Outcome::Skipped),
            Err(e) => unschedulable_on(e),
        },
    }
}

/// Seed of the `index`-th task set under `master`. It does not depend on
/// the sweep point, so every point sees the same random stream per set.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    UNorm,
    TotalAccesses,
    ResourceTypes,
    MaxHold,
    TaskCount,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::UNorm => "u_norm",
            SweepAxis::TotalAccesses => "total_accesses",
            SweepAxis::ResourceTypes => "resource_types",
            SweepAxis::MaxHold => "max_hold",
            SweepAxis::TaskCount => "task_count",
        }
    }

    /// `base` with this knob fixed to `value`.
    pub fn apply(self, base: &GenConfig, value: f64) -> GenConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::UNorm => c.u_norm = value,
            SweepAxis::TotalAccesses => c.total_accesses = Span::fixed(value as u64),
            SweepAxis::ResourceTypes => c.resource_types = Span::fixed(value as usize),
            SweepAxis::MaxHold => c.max_hold = Span::fixed(value as Time),
            SweepAxis::TaskCount => c.tasks = value as usize,
        }
        c
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "u_norm" => Ok(SweepAxis::UNorm),
            "total_accesses" => Ok(SweepAxis::TotalAccesses),
            "resource_types" => Ok(SweepAxis::ResourceTypes),
            "max_hold" => Ok(SweepAxis::MaxHold),
            "task_count" => Ok(SweepAxis::TaskCount),
            other => Err(format!("unknown axis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: GenConfig,
    pub sets_per_point: usize,
    pub analyzers: Vec<Analyzer>,
    pub seed: u64,
    pub permutation_cap: usize,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Self {
        Self {
            axis,
            values,
            base: GenConfig::default(),
            sets_per_point: 100,
            analyzers: Analyzer::ALL.to_vec(),
            seed: 0,
            permutation_cap: DEFAULT_PERMUTATION_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.values.is_empty() || self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Invalid("axis values must be strictly increasing".into()));
        }
        if self.sets_per_point == 0 {
            return Err(HarnessError::Invalid("sets_per_point must be at least 1".into()));
        }
        if self.analyzers.is_empty() {
            return Err(HarnessError::Invalid("no analyzers selected".into()));
        }
        for &v in &self.values {
            self.axis.apply(&self.base, v).validate()?;
        }
        Ok(())
    }

    /// Flat config: `axis`, `values`, `sets_per_point`, `analyzers`, `seed`
    /// and `permutation_cap`, plus any generator key, applied on top of the
    /// full-scale generator configuration.
    pub fn from_config(text: &str) -> Result<Self, HarnessError> {
        let mut spec = SweepSpec::new(SweepAxis::UNorm, Vec::new());
        let mut axis_seen = false;
        for e in parse_key_values(text)? {
            let err = |message: String| HarnessError::Config { line: e.line, message };
            match e.key.as_str() {
                "axis" => {
                    spec.axis = e.value.parse().map_err(err)?;
                    axis_seen = true;
                }
                "values" => spec.values = parse_list(&e.value).map_err(err)?,
                "sets_per_point" => spec.sets_per_point = parse_num(&e.value).map_err(err)?,
                "analyzers" => spec.analyzers = parse_list(&e.value).map_err(err)?,
                "permutation_cap" => spec.permutation_cap = parse_num(&e.value).map_err(err)?,
                "seed" => {
                    spec.seed = parse_num(&e.value).map_err(err)?;
                    spec.base.seed = spec.seed;
                }
                key => match spec.base.set(key, &e.value) {
                    Ok(true) => {}
                    Ok(false) => return Err(err(format!("unknown key `{key}`"))),
                    Err(m) => return Err(err(m)),
                },
            }
        }
        if !axis_seen {
            return Err(HarnessError::Invalid("missing `axis`".into()));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub analyzer: Analyzer,
    pub accepted: usize,
    /// Task sets analyzed (generation failures excluded).
    pub total: usize,
    /// The analyzer declined every set at this point.
    pub skipped: bool,
}

impl SweepRow {
    pub fn ratio(&self) -> Option<f64> {
        (!self.skipped && self.total > 0).then(|| self.accepted as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Per axis value, task sets whose generation failed.
    pub generation_failures: Vec<(f64, usize)>,
}

pub const CSV_HEADER: &str = "axis,value,analyzer,accepted,total,ratio";

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let ratio = match r.ratio() {
                Some(x) => format!("{x:.4}"),
                None if r.skipped => "skipped".to_string(),
                None => "nan".to_string(),
            };
            s.push_str(&format!("{},{},{},{},{},{}\n", r.axis.name(), r.value, r.analyzer, r.accepted, r.total, ratio));
        }
        s
    }

    /// Ratios of one analyzer in axis order.
    pub fn curve(&self, analyzer: Analyzer) -> Vec<Option<f64>> {
        self.rows.iter().filter(|r| r.analyzer == analyzer).map(SweepRow::ratio).collect()
    }
}

/// Per task set: which analyzers accepted it, or `None` if generation failed.
type SetResult = Option<Vec<Outcome>>;

/// Generates `sets_per_point` task sets per axis value and records how many
/// each analyzer accepts. All analyzers see the same task sets.
pub fn acceptance_ratio(spec: &SweepSpec) -> Result<SweepTable, HarnessError> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..spec.values.len()).flat_map(|p| (0..spec.sets_per_point).map(move |s| (p, s))).collect();
    let results: Vec<Result<SetResult, HarnessError>> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let config = spec.axis.apply(&spec.base, spec.values[p]);
            let ts = match gen_taskset(&config, derive_seed(spec.seed, s as u64)) {
                Ok(ts) => ts,
                Err(GenError::Density { .. }) | Err(GenError::Placement { .. }) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let outcomes = spec
                .analyzers
                .iter()
                .map(|&a| run_analyzer(&ts, a, spec.permutation_cap))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Some(outcomes))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (p, &value) in spec.values.iter().enumerate() {
        let point = &results[p * spec.sets_per_point..(p + 1) * spec.sets_per_point];
        failures.push((value, point.iter().filter(|r| r.is_none()).count()));
        for (k, &analyzer) in spec.analyzers.iter().enumerate() {
            let outcomes: Vec<&Outcome> = point.iter().flatten().map(|o| &o[k]).collect();
            let skipped = !outcomes.is_empty() && outcomes.iter().all(|o| matches!(o, Outcome::Skipped));
            rows.push(SweepRow {
                axis: spec.axis,
                value,
                analyzer,
                accepted: outcomes.iter().filter(|o| o.is_schedulable()).count(),
                total: outcomes.iter().filter(|o| !matches!(o, Outcome::Skipped)).count(),
                skipped,
            });
        }
    }
    Ok(SweepTable { rows, generation_failures: failures })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub base: GenConfig,
    pub sets: usize,
    pub seeds_per_set: usize,
    pub analyzers: Vec<Analyzer>,
    /// Simulated time per run; defaults to six times the largest period.
    pub horizon: Option<Time>,
    pub seed: u64,
    pub permutation_cap: usize,
}

impl CampaignSpec {
    pub fn new(base: GenConfig, sets: usize, seeds_per_set: usize) -> Self {
        Self {
            base,
            sets,
            seeds_per_set,
            analyzers: Analyzer::ALL.to_vec(),
            horizon: None,
            seed: 0,
            permutation_cap: DEFAULT_PERMUTATION_CAP,
        }
    }
}

/// Everything needed to reproduce one failed check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureArtifact {
    pub analyzer: Option<Analyzer>,
    pub assignment: Vec<u64>,
    pub sim_seed: u64,
    pub taskset_json: String,
    pub trace: String,
    pub report: Option<IdentityReport>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CampaignReport {
    /// Analyzer-schedulable (task set, analyzer) pairs simulated.
    pub pairs: usize,
    pub runs: usize,
    pub jobs: usize,
    /// Observed response over bound, maximized over all jobs.
    pub max_tightness: f64,
    pub generation_failures: usize,
    pub failures: Vec<FailureArtifact>,
}

impl CampaignReport {
    fn merge(mut self, other: CampaignReport) -> CampaignReport {
        self.pairs += other.pairs;
        self.runs += other.runs;
        self.jobs += other.jobs;
        self.max_tightness = self.max_tightness.max(other.max_tightness);
        self.generation_failures += other.generation_failures;
        self.failures.extend(other.failures);
        self
    }

    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One simulation run of a campaign.
#[derive(Debug, Clone, Copy)]
struct RunSpec {
    discipline: Discipline,
    sim_seed: u64,
    /// Position among the runs of one task set; odd unordered runs are
    /// adversarial.
    index: usize,
    horizon: Option<Time>,
}

/// Fresh placement, random release offsets within one period, and for the
/// unordered discipline alternating random and adversarial grants.
fn run_config(ts: &TaskSet, run: RunSpec) -> (SimConfig, u64) {
    let RunSpec { discipline, sim_seed, index, horizon } = run;
    let mut rng = ChaCha8Rng::seed_from_u64(sim_seed);
    let placement_seed = rng.next_u64();
    let mut config = SimConfig::new(discipline, rng.next_u64());
    config.release_offsets = Some(ts.tasks().iter().map(|t| rng.gen_range(0..t.period())).collect());
    config.horizon = horizon;
    if discipline == Discipline::Unordered && index % 2 == 1 {
        config.unordered_mode = UnorderedMode::Adversarial { victim: rng.gen_range(0..ts.len()) };
    }
    (config, placement_seed)
}

/// Simulates `ts` once and checks identities for every scorable job, plus
/// `bounds` (per task) when given.
fn check_run(
    ts: &TaskSet,
    m: &[u64],
    analyzer: Option<Analyzer>,
    bounds: Option<&[Bound]>,
    run: RunSpec,
) -> Result<CampaignReport, HarnessError> {
    let sim_seed = run.sim_seed;
    let (config, placement_seed) = run_config(ts, run);
    let placed = match place_all(ts, placement_seed) {
        Ok(p) => p,
        Err(GenError::Placement { .. }) => {
            return Ok(CampaignReport { generation_failures: 1, ..Default::default() });
        }
        Err(e) => return Err(e.into()),
    };
    let trace = simulate(&placed, m, &config)?;
    let mut report = CampaignReport { runs: 1, ..Default::default() };
    let artifact = |report: Option<IdentityReport>, message: String| FailureArtifact {
        analyzer,
        assignment: m.to_vec(),
        sim_seed,
        taskset_json: placed.to_json(),
        trace: trace.to_text(),
        report,
        message,
    };
    for r in audit_trace(&trace) {
        report.jobs += 1;
        if !r.is_ok() {
            report.failures.push(artifact(Some(r.clone()), r.violations.join("; ")));
            continue;
        }
        if let Some(bounds) = bounds {
            let b = bounds[r.job.task];
            let observed = bound(r.response_time());
            let tightness = r.response_time() as f64 / (*b.numer() as f64 / *b.denom() as f64);
            report.max_tightness = report.max_tightness.max(tightness);
            if observed > b {
                report.failures.push(artifact(
                    Some(r.clone()),
                    format!("job {} responded in {} above the bound {b}", r.job, r.response_time()),
                ));
            }
        }
    }
    Ok(report)
}

/// For each generated task set and each analyzer that accepts it, simulates
/// under the matching discipline with the analyzer's processor counts across
/// `seeds_per_set` seeds, checking every job against its bound and against
/// the trace identities.
pub fn soundness_campaign(spec: &CampaignSpec) -> Result<CampaignReport, HarnessError> {
    let per_set: Vec<Result<CampaignReport, HarnessError>> = (0..spec.sets)
        .into_par_iter()
        .map(|s| {
            let set_seed = derive_seed(spec.seed, s as u64);
            let ts = match gen_taskset(&spec.base, set_seed) {
                Ok(ts) => ts,
                Err(GenError::Density { .. }) => {
                    return Ok(CampaignReport { generation_failures: 1, ..Default::default() })
                }
                Err(e) => return Err(e.into()),
            };
            let mut report = CampaignReport::default();
            for &analyzer in &spec.analyzers {
                let Outcome::Schedulable { taskset, verdict } = run_analyzer(&ts, analyzer, spec.permutation_cap)?
                else {
                    continue;
                };
                report.pairs += 1;
                let bounds: Vec<Bound> =
                    verdict.bounds.iter().map(|b| b.expect("schedulable verdicts carry bounds")).collect();
                for k in 0..spec.seeds_per_set {
                    let run = RunSpec {
                        discipline: analyzer.discipline(),
                        sim_seed: derive_seed(set_seed, (k * Analyzer::ALL.len() + analyzer as usize) as u64),
                        index: k,
                        horizon: spec.horizon,
                    };
                    report =
                        report.merge(check_run(&taskset, &verdict.assignment, Some(analyzer), Some(&bounds), run)?);
                }
            }
            Ok(report)
        })
        .collect();
    per_set.into_iter().try_fold(CampaignReport::default(), |acc, r| Ok(acc.merge(r?)))
}

/// Simulates generated task sets (schedulable or not) on the lock-free
/// processor counts under every discipline, random and adversarial, with a
/// random priority order, and checks the trace identities of every job.
/// Stops adding task sets once `min_jobs` jobs have been checked.
pub fn identity_campaign(base: &GenConfig, min_jobs: usize, seed: u64) -> Result<CampaignReport, HarnessError> {
    const BATCH: usize = 8;
    let mut total = CampaignReport::default();
    let mut next = 0u64;
    while total.jobs < min_jobs {
        let batch: Vec<Result<CampaignReport, HarnessError>> = (next..next + BATCH as u64)
            .into_par_iter()
            .map(|s| {
                let set_seed = derive_seed(seed, s);
                let ts = match gen_taskset(base, set_seed) {
                    Ok(ts) => ts,
                    Err(GenError::Density { .. }) => {
                        return Ok(CampaignReport { generation_failures: 1, ..Default::default() })
                    }
                    Err(e) => return Err(e.into()),
                };
                let m = (0..ts.len()).map(|i| federated_init(&ts, i)).collect::<Result<Vec<_>, _>>()?;
                let mut rng = ChaCha8Rng::seed_from_u64(set_seed);
                let mut order: Vec<usize> = (0..ts.len()).collect();
                order.shuffle(&mut rng);
                let ts = ts
                    .with_processors(m.iter().sum())
                    .expect("positive")
                    .with_priority_order(order)
                    .expect("permutation");
                let mut report = CampaignReport::default();
                for (k, d) in [Discipline::Unordered, Discipline::Unordered, Discipline::Fifo, Discipline::Priority]
                    .into_iter()
                    .enumerate()
                {
                    let run = RunSpec { discipline: d, sim_seed: rng.next_u64(), index: k, horizon: None };
                    report = report.merge(check_run(&ts, &m, None, None, run)?);
                }
                Ok(report)
            })
            .collect();
        for r in batch {
            total = total.merge(r?);
        }
        next += BATCH as u64;
        if next > 64 * (min_jobs as u64 + 1) {
            break;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DagTask, ResourceUsage};

    #[test]
    fn analyzer_names() {
        for a in Analyzer::ALL {
            assert_eq!(a.label().parse::<Analyzer>(), Ok(a));
        }
        assert_eq!("fifo".parse::<Analyzer>(), Ok(Analyzer::Fifo));
        assert!("XU-Z".parse::<Analyzer>().is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(1, 2), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
        assert_ne!(derive_seed(1, 2), derive_seed(2, 2));
    }

    #[test]
    fn axis_application() {
        let base = GenConfig::desk_scale();
        assert_eq!(SweepAxis::UNorm.apply(&base, 0.3).u_norm, 0.3);
        assert_eq!(SweepAxis::TotalAccesses.apply(&base, 64.0).total_accesses, Span::fixed(64));
        assert_eq!(SweepAxis::ResourceTypes.apply(&base, 8.0).resource_types, Span::fixed(8));
        assert_eq!(SweepAxis::MaxHold.apply(&base, 30.0).max_hold, Span::fixed(30));
        assert_eq!(SweepAxis::TaskCount.apply(&base, 6.0).tasks, 6);
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec::new(SweepAxis::UNorm, vec![0.2, 0.2]);
        assert!(matches!(spec.validate(), Err(HarnessError::Invalid(_))));
        spec.values = vec![0.2, 0.4];
        spec.sets_per_point = 0;
        assert!(matches!(spec.validate(), Err(HarnessError::Invalid(_))));
        spec.sets_per_point = 1;
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn spec_from_config() {
        let spec = SweepSpec::from_config(
            "axis = max_hold\nvalues = 5, 10, 20\nsets_per_point = 7\nanalyzers = XU-U, XU-F\nseed = 9\ntasks = 3\n",
        )
        .unwrap();
        assert_eq!(spec.axis, SweepAxis::MaxHold);
        assert_eq!(spec.values, vec![5.0, 10.0, 20.0]);
        assert_eq!(spec.sets_per_point, 7);
        assert_eq!(spec.analyzers, vec![Analyzer::Unordered, Analyzer::Fifo]);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.base.tasks, 3);
        assert!(matches!(
            SweepSpec::from_config("axis = u_norm\nvalues = 0.1\nbogus = 1\n"),
            Err(HarnessError::Config { line: 3, .. })
        ));
        assert!(matches!(SweepSpec::from_config("values = 0.1\n"), Err(HarnessError::Invalid(_))));
    }

    #[test]
    fn sweep_is_deterministic_and_paired() {
        let mut spec = SweepSpec::new(SweepAxis::UNorm, vec![0.3, 0.6]);
        spec.sets_per_point = 6;
        spec.seed = 4;
        let a = acceptance_ratio(&spec).unwrap();
        let b = acceptance_ratio(&spec).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 6);
        assert!(a.to_csv().starts_with(CSV_HEADER));
        for (u, f) in a.curve(Analyzer::Unordered).iter().zip(a.curve(Analyzer::Fifo)) {
            assert!(f.unwrap() >= u.unwrap());
        }
    }

    #[test]
    fn priority_rows_are_skipped_above_cap() {
        let mut spec = SweepSpec::new(SweepAxis::TaskCount, vec![3.0]);
        spec.sets_per_point = 2;
        spec.permutation_cap = 2;
        spec.analyzers = vec![Analyzer::Priority];
        let t = acceptance_ratio(&spec).unwrap();
        assert!(t.rows[0].skipped);
        assert!(t.to_csv().lines().nth(1).unwrap().ends_with(",skipped"));
    }

    #[test]
    fn deadline_below_longest_path_is_unschedulable() {
        let t = DagTask::synthesize(0, 10, 10, 10, 10, [(0, ResourceUsage::new(1, 1))]).unwrap();
        let ts = TaskSet::new(vec![t], [0], 4).unwrap();
        assert_eq!(run_analyzer(&ts, Analyzer::Fifo, 8), Ok(Outcome::Unschedulable));
        assert_eq!(run_analyzer(&ts, Analyzer::Priority, 8), Ok(Outcome::Unschedulable));
        assert_eq!(run_analyzer(&ts, Analyzer::Unordered, 8), Ok(Outcome::Unschedulable));
    }

    #[test]
    fn small_campaigns_are_clean() {
        let base = GenConfig { total_accesses: Span::fixed(32), u_norm: 0.3, ..GenConfig::desk_scale() };
        let mut spec = CampaignSpec::new(base.clone(), 3, 2);
        spec.seed = 1;
        let r = soundness_campaign(&spec).unwrap();
        assert!(r.is_clean(), "{:?}", r.failures.first().map(|f| &f.message));
        assert!(r.max_tightness <= 1.0);
        let r = identity_campaign(&base, 20, 2).unwrap();
        assert!(r.jobs >= 20);
        assert!(r.is_clean(), "{:?}", r.failures.first().map(|f| &f.message));
    }
}
