//! Discrete-event simulation of federated scheduling with spin locks, trace
//! replay, key-path extraction and blocking decomposition.
//!
//! Each task owns a contiguous cluster of processors. Within a cluster a list
//! scheduler dispatches eligible vertices (oldest job first, then lowest
//! vertex id) to idle processors. A vertex runs exactly its WCET, split into
//! plain segments and critical sections by its request placement. A vertex
//! that requests a busy lock spins on its processor until granted.
//!
//! Traces are lists of labeled intervals, one text record per line:
//!
//! ```text
//! job,processor,start,end,kind,vertex,resource,holder_task
//! 0:0,2,3,4,spin,3,0,0
//! ```
//!
//! `job` is `<task>:<index>`, `kind` is `exec`, `spin` or `idle`, and `-`
//! marks an absent field. An `exec` record with a resource holds that lock; a
//! `spin` record names the awaited lock and the task holding it. Lines that
//! are empty or start with `#` are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::framework::{bound, graham_bound, BlockingDecomposition, Bound};
use crate::model::{ResourceId, TaskId, TaskSet, Time, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JobId {
    pub task: TaskId,
    pub index: usize,
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.task, self.index)
    }
}

impl FromStr for JobId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (task, index) = s.split_once(':').ok_or_else(|| format!("job id `{s}` is not <task>:<index>"))?;
        Ok(Self {
            task: task.trim().parse().map_err(|_| format!("bad task in job id `{s}`"))?,
            index: index.trim().parse().map_err(|_| format!("bad index in job id `{s}`"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalKind {
    Exec,
    Spin,
    Idle,
}

impl IntervalKind {
    fn as_str(self) -> &'static str {
        match self {
            IntervalKind::Exec => "exec",
            IntervalKind::Spin => "spin",
            IntervalKind::Idle => "idle",
        }
    }
}

/// One labeled stretch `[start, end)` of one processor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub job: JobId,
    pub processor: usize,
    pub start: Time,
    pub end: Time,
    pub kind: IntervalKind,
    pub vertex: Option<VertexId>,
    pub resource: Option<ResourceId>,
    pub holder_task: Option<TaskId>,
}

impl Interval {
    pub fn len(&self) -> Time {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn is_busy(&self) -> bool {
        self.kind != IntervalKind::Idle
    }

    pub fn holds(&self) -> Option<ResourceId> {
        (self.kind == IntervalKind::Exec).then_some(self.resource).flatten()
    }
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.job,
            self.processor,
            self.start,
            self.end,
            self.kind.as_str(),
            opt(self.vertex),
            opt(self.resource),
            opt(self.holder_task)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("job {job}: unknown task")]
    UnknownTask { job: JobId },
    #[error("job {job}: vertex {vertex} does not exist")]
    UnknownVertex { job: JobId, vertex: VertexId },
    #[error("job {job}: processor {processor} is outside the task's cluster")]
    Cluster { job: JobId, processor: usize },
    #[error("processor {processor}: intervals overlap at time {at}")]
    Overlap { processor: usize, at: Time },
    #[error("resource {resource}: two holders at time {at}")]
    MutualExclusion { resource: ResourceId, at: Time },
    #[error("job {job}: {message}")]
    Label { job: JobId, message: String },
    #[error("job {job}: spin on resource {resource} at {at} names holder task {named} but the lock is not held by it")]
    HolderMismatch { job: JobId, resource: ResourceId, at: Time, named: TaskId },
    #[error("job {job}: vertex {vertex} starts at {start} before its predecessors finish at {ready}")]
    Precedence { job: JobId, vertex: VertexId, start: Time, ready: Time },
    #[error("job {job}: vertex {vertex} executes for {got}, expected WCET {expected}")]
    Wcet { job: JobId, vertex: VertexId, expected: Time, got: Time },
    #[error("expected {expected} processor counts, got {got}")]
    MVectorLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("task {task} accesses resources but has no request placement")]
    MissingPlacement { task: TaskId },
    #[error("the priority discipline needs a priority order")]
    MissingPriorityOrder,
    #[error("expected {expected} processor counts, got {got}")]
    MVectorLength { expected: usize, got: usize },
    #[error("task {task} has no processors")]
    ZeroProcessors { task: TaskId },
    #[error("clusters need {used} processors but the platform has {available}")]
    TooManyProcessors { used: u64, available: u64 },
    #[error("expected {expected} release offsets, got {got}")]
    OffsetLength { expected: usize, got: usize },
}

/// Parses trace records. Blank lines and `#` comments are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<Interval>, TraceError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let err = |message: String| TraceError::Parse { line, message };
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", fields.len())));
        }
        let num = |i: usize, name: &str| -> Result<u64, TraceError> {
            fields[i].parse().map_err(|_| err(format!("bad {name} `{}`", fields[i])))
        };
        let opt_num = |i: usize, name: &str| -> Result<Option<usize>, TraceError> {
            if fields[i] == "-" {
                Ok(None)
            } else {
                fields[i].parse().map(Some).map_err(|_| err(format!("bad {name} `{}`", fields[i])))
            }
        };
        let kind = match fields[4] {
            "exec" => IntervalKind::Exec,
            "spin" => IntervalKind::Spin,
            "idle" => IntervalKind::Idle,
            other => return Err(err(format!("bad kind `{other}`"))),
        };
        let interval = Interval {
            job: fields[0].parse().map_err(err)?,
            processor: num(1, "processor")? as usize,
            start: num(2, "start")?,
            end: num(3, "end")?,
            kind,
            vertex: opt_num(5, "vertex")?,
            resource: opt_num(6, "resource")?,
            holder_task: opt_num(7, "holder task")?,
        };
        if interval.end <= interval.start {
            return Err(err("interval must have end > start".into()));
        }
        out.push(interval);
    }
    Ok(out)
}

/// Start and finish of one job and of each of its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRecord {
    pub id: JobId,
    pub release: Time,
    /// `None` if the job did not finish within the trace.
    pub finish: Option<Time>,
    pub vertex_start: Vec<Option<Time>>,
    pub vertex_finish: Vec<Option<Time>>,
    /// Another job of the same task was active at some point in
    /// `[release, finish)`.
    pub overlaps: bool,
}

impl JobRecord {
    pub fn response_time(&self) -> Option<Time> {
        self.finish.map(|f| f - self.release)
    }

    /// Finished and alone in its cluster: safe to score.
    pub fn is_scorable(&self) -> bool {
        self.finish.is_some() && !self.overlaps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockEventKind {
    Enqueue,
    Acquire,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LockEvent {
    pub time: Time,
    pub resource: ResourceId,
    pub job: JobId,
    pub vertex: VertexId,
    pub kind: LockEventKind,
}

/// A simulated or replayed schedule together with the task set it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub taskset: TaskSet,
    pub processors: Vec<u64>,
    pub intervals: Vec<Interval>,
    pub jobs: Vec<JobRecord>,
    pub lock_events: Vec<LockEvent>,
    pub horizon: Time,
}

impl SimTrace {
    pub fn job(&self, id: JobId) -> Option<&JobRecord> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn job_intervals(&self, id: JobId) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |iv| iv.job == id)
    }

    pub fn scorable_jobs(&self) -> impl Iterator<Item = &JobRecord> + '_ {
        self.jobs.iter().filter(|j| j.is_scorable())
    }

    /// First processor of each task's cluster.
    pub fn cluster_starts(&self) -> Vec<usize> {
        cluster_starts(&self.processors)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# job,processor,start,end,kind,vertex,resource,holder_task\n");
        for iv in &self.intervals {
            s.push_str(&iv.to_string());
            s.push('\n');
        }
        s
    }
}

fn cluster_starts(m: &[u64]) -> Vec<usize> {
    m.iter()
        .scan(0usize, |acc, &k| {
            let start = *acc;
            *acc += k as usize;
            Some(start)
        })
        .collect()
}

/// How lock requests are granted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    Unordered,
    Fifo,
    Priority,
}

impl FromStr for Discipline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unordered" => Ok(Discipline::Unordered),
            "fifo" => Ok(Discipline::Fifo),
            "priority" => Ok(Discipline::Priority),
            other => Err(format!("unknown order `{other}` (expected unordered, fifo or priority)")),
        }
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Unordered => "unordered",
            Discipline::Fifo => "fifo",
            Discipline::Priority => "priority",
        })
    }
}

/// Grant choice under [`Discipline::Unordered`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnorderedMode {
    /// Uniformly random among current waiters.
    Random,
    /// Starve `victim`: grant other tasks first, longest section first.
    Adversarial { victim: TaskId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub discipline: Discipline,
    pub unordered_mode: UnorderedMode,
    /// Defaults to six times the largest period.
    pub horizon: Option<Time>,
    pub seed: u64,
    /// Per-task first release; defaults to all zero.
    pub release_offsets: Option<Vec<Time>>,
}

impl SimConfig {
    pub fn new(discipline: Discipline, seed: u64) -> Self {
        Self { discipline, unordered_mode: UnorderedMode::Random, horizon: None, seed, release_offsets: None }
    }
}

pub fn default_horizon(ts: &TaskSet) -> Time {
    6 * ts.tasks().iter().map(|t| t.period()).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    len: Time,
    resource: Option<ResourceId>,
}

fn vertex_segments(ts: &TaskSet) -> Vec<Vec<Vec<Segment>>> {
    ts.tasks()
        .iter()
        .map(|task| {
            let mut per_vertex: Vec<Vec<Segment>> = vec![Vec::new(); task.vertex_count()];
            let mut cursor = vec![0; task.vertex_count()];
            for p in task.placements() {
                let v = p.vertex;
                if p.offset_in_vertex > cursor[v] {
                    per_vertex[v].push(Segment { len: p.offset_in_vertex - cursor[v], resource: None });
                }
                per_vertex[v].push(Segment { len: p.length, resource: Some(p.resource) });
                cursor[v] = p.offset_in_vertex + p.length;
            }
            for (v, segs) in per_vertex.iter_mut().enumerate() {
                if task.wcet(v) > cursor[v] {
                    segs.push(Segment { len: task.wcet(v) - cursor[v], resource: None });
                }
            }
            per_vertex
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Proc {
    Idle,
    Run { job: usize, vertex: VertexId, seg: usize, end: Time },
    Spin { job: usize, vertex: VertexId, seg: usize, resource: ResourceId },
}

#[derive(Debug, Clone, Copy)]
struct Waiter {
    seq: u64,
    processor: usize,
    task: TaskId,
    length: Time,
}

#[derive(Debug, Default)]
struct Lock {
    holder: Option<usize>,
    waiters: Vec<Waiter>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Label {
    job: usize,
    kind: IntervalKind,
    vertex: Option<VertexId>,
    resource: Option<ResourceId>,
    holder_task: Option<TaskId>,
}

struct Engine<'a> {
    ts: &'a TaskSet,
    config: &'a SimConfig,
    segments: Vec<Vec<Vec<Segment>>>,
    starts: Vec<usize>,
    owner: Vec<TaskId>,
    procs: Vec<Proc>,
    labels: Vec<Option<(Label, Time)>>,
    locks: BTreeMap<ResourceId, Lock>,
    jobs: Vec<JobRecord>,
    pending_preds: Vec<Vec<usize>>,
    remaining: Vec<usize>,
    /// Ready vertices per task, ordered by (job index, vertex id).
    ready: Vec<BTreeSet<(usize, VertexId)>>,
    active: Vec<Vec<usize>>,
    job_count: Vec<usize>,
    intervals: Vec<Interval>,
    lock_events: Vec<LockEvent>,
    rng: ChaCha8Rng,
    seq: u64,
}

impl Engine<'_> {
    fn release(&mut self, task: TaskId, now: Time) {
        let t = self.ts.task(task);
        let idx = self.jobs.len();
        let id = JobId { task, index: self.job_count[task] };
        self.job_count[task] += 1;
        let n = t.vertex_count();
        let overlaps = !self.active[task].is_empty();
        for &other in &self.active[task] {
            self.jobs[other].overlaps = true;
        }
        self.jobs.push(JobRecord {
            id,
            release: now,
            finish: None,
            vertex_start: vec![None; n],
            vertex_finish: vec![None; n],
            overlaps,
        });
        self.pending_preds.push((0..n).map(|v| t.predecessors(v).len()).collect());
        self.remaining.push(n);
        self.active[task].push(idx);
        self.ready[task].insert((idx, t.head()));
    }

    fn task_of(&self, job: usize) -> TaskId {
        self.jobs[job].id.task
    }

    fn complete_vertex(&mut self, job: usize, vertex: VertexId, now: Time) {
        let task = self.task_of(job);
        self.jobs[job].vertex_finish[vertex] = Some(now);
        self.remaining[job] -= 1;
        for &s in self.ts.task(task).successors(vertex) {
            self.pending_preds[job][s] -= 1;
            if self.pending_preds[job][s] == 0 {
                self.ready[task].insert((job, s));
            }
        }
        if self.remaining[job] == 0 {
            self.jobs[job].finish = Some(now);
            self.active[task].retain(|&j| j != job);
        }
    }

    /// Starts segment `seg` of `vertex` on processor `p`, or completes the
    /// vertex if no segment is left.
    fn enter_segment(&mut self, p: usize, job: usize, vertex: VertexId, seg: usize, now: Time) {
        let task = self.task_of(job);
        match self.segments[task][vertex].get(seg).copied() {
            None => {
                self.procs[p] = Proc::Idle;
                self.complete_vertex(job, vertex, now);
            }
            Some(Segment { len, resource: None }) => {
                self.procs[p] = Proc::Run { job, vertex, seg, end: now + len };
            }
            Some(Segment { len, resource: Some(q) }) => {
                self.seq += 1;
                self.locks.entry(q).or_default().waiters.push(Waiter {
                    seq: self.seq,
                    processor: p,
                    task,
                    length: len,
                });
                self.lock_events.push(LockEvent {
                    time: now,
                    resource: q,
                    job: self.jobs[job].id,
                    vertex,
                    kind: LockEventKind::Enqueue,
                });
                self.procs[p] = Proc::Spin { job, vertex, seg, resource: q };
            }
        }
    }

    fn finish_segments(&mut self, now: Time) {
        for p in 0..self.procs.len() {
            if let Proc::Run { job, vertex, seg, end } = self.procs[p] {
                if end != now {
                    continue;
                }
                let task = self.task_of(job);
                if let Some(q) = self.segments[task][vertex][seg].resource {
                    self.locks.get_mut(&q).expect("held lock exists").holder = None;
                    self.lock_events.push(LockEvent {
                        time: now,
                        resource: q,
                        job: self.jobs[job].id,
                        vertex,
                        kind: LockEventKind::Release,
                    });
                }
                self.enter_segment(p, job, vertex, seg + 1, now);
            }
        }
    }

    fn pick_waiter(&mut self, waiters: &[Waiter]) -> usize {
        let by_seq = |w: &Waiter| w.seq;
        let best = match self.config.discipline {
            Discipline::Fifo => waiters.iter().min_by_key(|w| by_seq(w)),
            Discipline::Priority => {
                let rank = |w: &Waiter| self.ts.priority_rank(w.task).expect("order checked");
                waiters.iter().min_by_key(|w| (rank(w), w.seq))
            }
            Discipline::Unordered => match self.config.unordered_mode {
                UnorderedMode::Random => {
                    return self.rng.gen_range(0..waiters.len());
                }
                UnorderedMode::Adversarial { victim } => {
                    waiters.iter().min_by_key(|w| (w.task == victim, std::cmp::Reverse(w.length), w.seq))
                }
            },
        };
        let chosen = best.expect("non-empty waiters").seq;
        waiters.iter().position(|w| w.seq == chosen).expect("chosen waiter present")
    }

    fn grant(&mut self, now: Time) -> bool {
        let mut changed = false;
        let resources: Vec<ResourceId> = self.locks.keys().copied().collect();
        for q in resources {
            let lock = &self.locks[&q];
            if lock.holder.is_some() || lock.waiters.is_empty() {
                continue;
            }
            let waiters = lock.waiters.clone();
            let k = self.pick_waiter(&waiters);
            let w = self.locks.get_mut(&q).expect("lock exists").waiters.remove(k);
            self.locks.get_mut(&q).expect("lock exists").holder = Some(w.processor);
            let Proc::Spin { job, vertex, seg, .. } = self.procs[w.processor] else {
                unreachable!("waiter processor is spinning")
            };
            self.lock_events.push(LockEvent {
                time: now,
                resource: q,
                job: self.jobs[job].id,
                vertex,
                kind: LockEventKind::Acquire,
            });
            self.procs[w.processor] = Proc::Run { job, vertex, seg, end: now + w.length };
            changed = true;
        }
        changed
    }

    fn dispatch(&mut self, now: Time) -> bool {
        let mut changed = false;
        for task in 0..self.ts.len() {
            // Zero-WCET vertices complete without a processor.
            loop {
                let zero = self.ready[task].iter().copied().find(|&(_, v)| self.ts.task(task).wcet(v) == 0);
                let Some((job, v)) = zero else { break };
                self.ready[task].remove(&(job, v));
                self.jobs[job].vertex_start[v] = Some(now);
                self.complete_vertex(job, v, now);
                changed = true;
            }
            let first = self.starts[task];
            for p in first..first + self.config_m(task) {
                if self.procs[p] != Proc::Idle {
                    continue;
                }
                let Some((job, v)) = self.ready[task].pop_first() else { break };
                self.jobs[job].vertex_start[v] = Some(now);
                self.enter_segment(p, job, v, 0, now);
                changed = true;
            }
        }
        changed
    }

    fn config_m(&self, task: TaskId) -> usize {
        self.owner.iter().filter(|&&t| t == task).count()
    }

    fn label_of(&self, p: usize) -> Option<Label> {
        match self.procs[p] {
            Proc::Idle => {
                let task = self.owner[p];
                self.active[task].iter().min().map(|&job| Label {
                    job,
                    kind: IntervalKind::Idle,
                    vertex: None,
                    resource: None,
                    holder_task: None,
                })
            }
            Proc::Run { job, vertex, seg, .. } => Some(Label {
                job,
                kind: IntervalKind::Exec,
                vertex: Some(vertex),
                resource: self.segments[self.task_of(job)][vertex][seg].resource,
                holder_task: None,
            }),
            Proc::Spin { job, vertex, resource, .. } => {
                let holder = self.locks[&resource].holder.map(|hp| match self.procs[hp] {
                    Proc::Run { job, .. } => self.task_of(job),
                    _ => unreachable!("lock holder is running"),
                });
                Some(Label {
                    job,
                    kind: IntervalKind::Spin,
                    vertex: Some(vertex),
                    resource: Some(resource),
                    holder_task: holder,
                })
            }
        }
    }

    fn close(&mut self, p: usize, now: Time) {
        if let Some((label, start)) = self.labels[p].take() {
            if now > start {
                self.intervals.push(Interval {
                    job: self.jobs[label.job].id,
                    processor: p,
                    start,
                    end: now,
                    kind: label.kind,
                    vertex: label.vertex,
                    resource: label.resource,
                    holder_task: label.holder_task,
                });
            }
        }
    }

    fn relabel(&mut self, now: Time) {
        for p in 0..self.procs.len() {
            let next = self.label_of(p);
            let same = match (&self.labels[p], &next) {
                (Some((cur, _)), Some(n)) => cur == n,
                (None, None) => true,
                _ => false,
            };
            if !same {
                self.close(p, now);
                self.labels[p] = next.map(|l| (l, now));
            }
        }
    }
}

/// Simulates `ts` with cluster sizes `m` from time 0 up to the horizon.
pub fn simulate(ts: &TaskSet, m: &[u64], config: &SimConfig) -> Result<SimTrace, SimError> {
    if m.len() != ts.len() {
        return Err(SimError::MVectorLength { expected: ts.len(), got: m.len() });
    }
    if let Some(task) = m.iter().position(|&k| k == 0) {
        return Err(SimError::ZeroProcessors { task });
    }
    let used: u64 = m.iter().sum();
    if used > ts.processors() {
        return Err(SimError::TooManyProcessors { used, available: ts.processors() });
    }
    if let Some(t) = ts.tasks().iter().find(|t| t.resources().next().is_some() && !t.has_placements()) {
        return Err(SimError::MissingPlacement { task: t.id() });
    }
    if config.discipline == Discipline::Priority && ts.priority_order().is_none() {
        return Err(SimError::MissingPriorityOrder);
    }
    let offsets = match &config.release_offsets {
        Some(o) if o.len() != ts.len() => return Err(SimError::OffsetLength { expected: ts.len(), got: o.len() }),
        Some(o) => o.clone(),
        None => vec![0; ts.len()],
    };
    let horizon = config.horizon.unwrap_or_else(|| default_horizon(ts));
    let starts = cluster_starts(m);
    let owner: Vec<TaskId> = m.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
    let total = owner.len();
    let mut engine = Engine {
        ts,
        config,
        segments: vertex_segments(ts),
        starts,
        owner,
        procs: vec![Proc::Idle; total],
        labels: vec![None; total],
        locks: BTreeMap::new(),
        jobs: Vec::new(),
        pending_preds: Vec::new(),
        remaining: Vec::new(),
        ready: vec![BTreeSet::new(); ts.len()],
        active: vec![Vec::new(); ts.len()],
        job_count: vec![0; ts.len()],
        intervals: Vec::new(),
        lock_events: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        seq: 0,
    };
    let mut next_release = offsets;

    let mut now = 0;
    while now < horizon {
        for (task, next) in next_release.iter_mut().enumerate() {
            if *next == now {
                engine.release(task, now);
                *next += ts.task(task).period();
            }
        }
        engine.finish_segments(now);
        loop {
            let granted = engine.grant(now);
            let dispatched = engine.dispatch(now);
            if !granted && !dispatched {
                break;
            }
        }
        engine.relabel(now);

        let next_end = engine
            .procs
            .iter()
            .filter_map(|p| match p {
                Proc::Run { end, .. } => Some(*end),
                _ => None,
            })
            .min();
        let next_rel = next_release.iter().copied().min().unwrap_or(Time::MAX);
        now = next_end.map_or(next_rel, |e| e.min(next_rel)).min(horizon);
    }
    for p in 0..total {
        engine.close(p, horizon);
    }
    engine.intervals.sort_by_key(|iv| (iv.processor, iv.start));
    Ok(SimTrace {
        taskset: ts.clone(),
        processors: m.to_vec(),
        intervals: engine.intervals,
        jobs: engine.jobs,
        lock_events: engine.lock_events,
        horizon,
    })
}

/// Builds a trace verbatim from interval records and validates it against
/// the task set: cluster membership, no overlap per processor, one lock
/// holder at a time, spin records naming the actual holder, precedence, and
/// per-vertex execution equal to WCET (or less for a vertex still running
/// when the trace ends).
pub fn replay_trace(ts: &TaskSet, m: &[u64], records: Vec<Interval>) -> Result<SimTrace, TraceError> {
    if m.len() != ts.len() {
        return Err(TraceError::MVectorLength { expected: ts.len(), got: m.len() });
    }
    let starts = cluster_starts(m);
    for iv in &records {
        let job = iv.job;
        if job.task >= ts.len() {
            return Err(TraceError::UnknownTask { job });
        }
        let task = ts.task(job.task);
        let lo = starts[job.task];
        if iv.processor < lo || iv.processor >= lo + m[job.task] as usize {
            return Err(TraceError::Cluster { job, processor: iv.processor });
        }
        let label = |message: &str| TraceError::Label { job, message: message.to_string() };
        match iv.kind {
            IntervalKind::Idle => {
                if iv.vertex.is_some() || iv.resource.is_some() || iv.holder_task.is_some() {
                    return Err(label("idle records carry no vertex, resource or holder"));
                }
            }
            IntervalKind::Exec | IntervalKind::Spin => {
                let v = iv.vertex.ok_or_else(|| label("busy records need a vertex"))?;
                if v >= task.vertex_count() {
                    return Err(TraceError::UnknownVertex { job, vertex: v });
                }
                if let Some(q) = iv.resource {
                    if !task.accesses(q) {
                        return Err(label(&format!("task does not use resource {q}")));
                    }
                }
                if iv.kind == IntervalKind::Spin && (iv.resource.is_none() || iv.holder_task.is_none()) {
                    return Err(label("spin records need a resource and a holder task"));
                }
                if iv.kind == IntervalKind::Exec && iv.holder_task.is_some() {
                    return Err(label("exec records carry no holder task"));
                }
            }
        }
    }

    let mut by_proc = records.clone();
    by_proc.sort_by_key(|iv| (iv.processor, iv.start));
    for w in by_proc.windows(2) {
        if w[0].processor == w[1].processor && w[1].start < w[0].end {
            return Err(TraceError::Overlap { processor: w[0].processor, at: w[1].start });
        }
    }

    let mut holds: BTreeMap<ResourceId, Vec<(Time, Time, TaskId)>> = BTreeMap::new();
    for iv in &records {
        if let Some(q) = iv.holds() {
            holds.entry(q).or_default().push((iv.start, iv.end, iv.job.task));
        }
    }
    for (&q, list) in holds.iter_mut() {
        list.sort_unstable();
        for w in list.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(TraceError::MutualExclusion { resource: q, at: w[1].0 });
            }
        }
    }
    for iv in records.iter().filter(|iv| iv.kind == IntervalKind::Spin) {
        let (q, named) = (iv.resource.expect("checked"), iv.holder_task.expect("checked"));
        let mut covered = iv.start;
        for &(s, e, t) in holds.get(&q).map(Vec::as_slice).unwrap_or(&[]) {
            if t == named && s <= covered && e > covered {
                covered = e;
            }
        }
        if covered < iv.end {
            return Err(TraceError::HolderMismatch { job: iv.job, resource: q, at: covered, named });
        }
    }

    let horizon = records.iter().map(|iv| iv.end).max().unwrap_or(0);
    let mut ids: Vec<JobId> = records.iter().map(|iv| iv.job).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut jobs = Vec::with_capacity(ids.len());
    for id in ids {
        let task = ts.task(id.task);
        let n = task.vertex_count();
        let mine: Vec<&Interval> = records.iter().filter(|iv| iv.job == id).collect();
        let release = mine.iter().map(|iv| iv.start).min().expect("job has records");
        let mut vertex_start = vec![None; n];
        let mut vertex_finish = vec![None; n];
        let mut executed = vec![0; n];
        for iv in mine.iter().filter(|iv| iv.is_busy()) {
            let v = iv.vertex.expect("checked");
            vertex_start[v] = Some(vertex_start[v].map_or(iv.start, |s: Time| s.min(iv.start)));
            vertex_finish[v] = Some(vertex_finish[v].map_or(iv.end, |f: Time| f.max(iv.end)));
            if iv.kind == IntervalKind::Exec {
                executed[v] += iv.len();
            }
        }
        // A vertex may fall short of its WCET, or not have run at all, only
        // when the trace ends while the job is still active; the job then
        // counts as unfinished.
        let active_at_end = mine.iter().any(|iv| iv.end == horizon);
        let mut complete = vec![false; n];
        for &v in task.topological_order() {
            let preds = task.predecessors(v);
            let open = preds.iter().find(|&&u| !complete[u]).copied();
            if let Some(u) = open {
                if let Some(start) = vertex_start[v] {
                    return Err(TraceError::Label {
                        job: id,
                        message: format!("vertex {v} starts at {start} before predecessor {u} completes"),
                    });
                }
                continue;
            }
            let ready = preds
                .iter()
                .map(|&u| vertex_finish[u].expect("complete predecessors have a finish"))
                .max()
                .unwrap_or(release);
            if task.wcet(v) == 0 {
                vertex_start[v] = Some(ready);
                vertex_finish[v] = Some(ready);
                complete[v] = true;
                continue;
            }
            let cut = executed[v] < task.wcet(v) && active_at_end && vertex_finish[v].is_none_or(|f| f == horizon);
            if executed[v] != task.wcet(v) && !cut {
                return Err(TraceError::Wcet { job: id, vertex: v, expected: task.wcet(v), got: executed[v] });
            }
            if let Some(start) = vertex_start[v].filter(|&start| start < ready) {
                return Err(TraceError::Precedence { job: id, vertex: v, start, ready });
            }
            if cut {
                vertex_finish[v] = None;
            } else {
                complete[v] = true;
            }
        }
        let finish = complete.iter().all(|&c| c).then(|| vertex_finish.iter().flatten().copied().max()).flatten();
        jobs.push(JobRecord { id, release, finish, vertex_start, vertex_finish, overlaps: false });
    }
    for a in 0..jobs.len() {
        for b in 0..jobs.len() {
            let (ja, jb) = (&jobs[a], &jobs[b]);
            if a != b
                && ja.id.task == jb.id.task
                && ja.release < jb.finish.unwrap_or(Time::MAX)
                && jb.release < ja.finish.unwrap_or(Time::MAX)
            {
                jobs[a].overlaps = true;
            }
        }
    }
    Ok(SimTrace {
        taskset: ts.clone(),
        processors: m.to_vec(),
        intervals: by_proc,
        jobs,
        lock_events: Vec::new(),
        horizon,
    })
}

/// Walks back from the tail, each time to the predecessor that finished
/// last (lowest id on ties), and returns the path head to tail.
pub fn extract_key_path(trace: &SimTrace, job: JobId) -> Vec<VertexId> {
    let record = trace.job(job).expect("job in trace");
    let task = trace.taskset.task(job.task);
    let finish = |v: VertexId| record.vertex_finish[v].unwrap_or(0);
    let mut path = vec![task.tail()];
    let mut v = task.tail();
    while let Some(&u) = task.predecessors(v).iter().min_by_key(|&&u| (std::cmp::Reverse(finish(u)), u)) {
        path.push(u);
        v = u;
    }
    path.reverse();
    path
}

/// Disjoint, sorted union of `[start, end)` spans.
fn union(mut spans: Vec<(Time, Time)>) -> Vec<(Time, Time)> {
    spans.sort_unstable();
    let mut out: Vec<(Time, Time)> = Vec::new();
    for (s, e) in spans {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

fn overlap_with(spans: &[(Time, Time)], s: Time, e: Time) -> Time {
    spans.iter().map(|&(a, b)| b.min(e).saturating_sub(a.max(s))).sum()
}

fn key_busy_spans(trace: &SimTrace, job: JobId, key_path: &[VertexId]) -> Vec<(Time, Time)> {
    union(
        trace
            .job_intervals(job)
            .filter(|iv| iv.is_busy() && iv.vertex.is_some_and(|v| key_path.contains(&v)))
            .map(|iv| (iv.start, iv.end))
            .collect(),
    )
}

/// Splits the job's spinning into key-path, delay and parallel blocking,
/// each by whether the lock holder belongs to the same task.
pub fn decompose_blocking(trace: &SimTrace, job: JobId, key_path: &[VertexId]) -> BlockingDecomposition {
    let key = key_busy_spans(trace, job, key_path);
    let mut d = BlockingDecomposition::default();
    for iv in trace.job_intervals(job).filter(|iv| iv.kind == IntervalKind::Spin) {
        let intra = iv.holder_task == Some(job.task);
        let len = iv.len();
        if iv.vertex.is_some_and(|v| key_path.contains(&v)) {
            *if intra { &mut d.key_intra } else { &mut d.key_inter } += len;
        } else {
            let parallel = overlap_with(&key, iv.start, iv.end);
            if intra {
                d.parallel_intra += parallel;
                d.delay_intra += len - parallel;
            } else {
                d.parallel_inter += parallel;
                d.delay_inter += len - parallel;
            }
        }
    }
    d
}

/// Measured quantities of one job and the identities they must satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub job: JobId,
    pub processors: u64,
    pub release: Time,
    pub finish: Time,
    pub blocking: Time,
    pub working: Time,
    pub idle: Time,
    pub key_path_length: Time,
    /// Total time some key-path vertex is executing or spinning.
    pub key_busy: Time,
    pub decomposition: BlockingDecomposition,
    /// Response-time bound evaluated with the observed interference.
    pub observed_bound: Bound,
    pub violations: Vec<String>,
}

impl IdentityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn response_time(&self) -> Time {
        self.finish - self.release
    }

    /// `len* (m - 1) - B^{λ,I} - B^{~λ,I} - B^{~λ,O}`, saturating at zero.
    pub fn idle_cap(&self) -> i128 {
        let d = &self.decomposition;
        self.key_busy as i128 * (self.processors as i128 - 1)
            - d.key_intra as i128
            - d.parallel_intra as i128
            - d.parallel_inter as i128
    }
}

/// Checks the accounting identities of one finished job:
/// (a) `m (f - r) = B + W + Γ` with all three summed from raw intervals,
/// (b) `len* = len(λ) + B^{λ,I} + B^{λ,O}`,
/// (c) `Γ ≤ len* (m - 1) - B^{λ,I} - B^{~λ,I} - B^{~λ,O}`,
/// (d) `f - r ≤ (C + (m - 1) L + I) / m` with observed `I`,
/// plus: the six parts sum to `B`, and all `m` processors are busy with the
/// job whenever no key-path vertex is.
pub fn check_identities(
    trace: &SimTrace,
    job: JobId,
    key_path: &[VertexId],
    decomposition: &BlockingDecomposition,
) -> IdentityReport {
    let record = trace.job(job).expect("job in trace");
    let task = trace.taskset.task(job.task);
    let m = trace.processors[job.task];
    let release = record.release;
    let finish = record.finish.expect("job finished");
    let mut violations = Vec::new();

    let (mut blocking, mut working, mut idle) = (0, 0, 0);
    for iv in trace.job_intervals(job) {
        let inside = iv.end.min(finish).saturating_sub(iv.start.max(release));
        if inside != iv.len() {
            violations.push(format!("record {iv} lies outside [{release}, {finish})"));
        }
        match iv.kind {
            IntervalKind::Exec => working += inside,
            IntervalKind::Spin => blocking += inside,
            IntervalKind::Idle => idle += inside,
        }
    }
    if m * (finish - release) != blocking + working + idle {
        violations.push(format!(
            "m(f - r) = {} but B + W + Γ = {} + {} + {}",
            m * (finish - release),
            blocking,
            working,
            idle
        ));
    }
    if decomposition.total() != blocking {
        violations.push(format!("six-part sum {} differs from spinning total {}", decomposition.total(), blocking));
    }

    let key = key_busy_spans(trace, job, key_path);
    let key_busy: Time = key.iter().map(|(s, e)| e - s).sum();
    let key_path_length: Time = key_path.iter().map(|&v| task.wcet(v)).sum();
    if key_busy != key_path_length + decomposition.key_intra + decomposition.key_inter {
        violations.push(format!(
            "len* = {key_busy} but len(λ) + B^(λ,I) + B^(λ,O) = {} + {} + {}",
            key_path_length, decomposition.key_intra, decomposition.key_inter
        ));
    }

    // Processors busy with this job over each elementary stretch.
    let mut events: Vec<(Time, i64)> = Vec::new();
    for iv in trace.job_intervals(job).filter(|iv| iv.is_busy()) {
        events.push((iv.start, 1));
        events.push((iv.end, -1));
    }
    events.sort_unstable();
    let mut busy = 0i64;
    let mut cursor = release;
    let mut k = 0;
    while cursor < finish {
        while k < events.len() && events[k].0 <= cursor {
            busy += events[k].1;
            k += 1;
        }
        let next = events.get(k).map_or(finish, |e| e.0.min(finish));
        if overlap_with(&key, cursor, next) == 0 && busy < m as i64 {
            violations
                .push(format!("only {busy} of {m} processors busy in [{cursor}, {next}) with no key-path vertex busy"));
        }
        cursor = next;
    }

    let report_cap = {
        let d = decomposition;
        key_busy as i128 * (m as i128 - 1) - d.key_intra as i128 - d.parallel_intra as i128 - d.parallel_inter as i128
    };
    if idle as i128 > report_cap {
        violations.push(format!("Γ = {idle} exceeds len*(m - 1) - B^(λ,I) - B^(~λ,I) - B^(~λ,O) = {report_cap}"));
    }
    let observed_bound = graham_bound(task.volume(), task.longest_path(), bound(decomposition.interference(m)), m)
        .expect("cluster has processors");
    if bound(finish - release) > observed_bound {
        violations
            .push(format!("response {} exceeds bound {observed_bound} with observed interference", finish - release));
    }

    IdentityReport {
        job,
        processors: m,
        release,
        finish,
        blocking,
        working,
        idle,
        key_path_length,
        key_busy,
        decomposition: *decomposition,
        observed_bound,
        violations,
    }
}

/// Key path, decomposition and identity report for every scorable job.
pub fn audit_trace(trace: &SimTrace) -> Vec<IdentityReport> {
    trace
        .scorable_jobs()
        .map(|j| {
            let path = extract_key_path(trace, j.id);
            let d = decompose_blocking(trace, j.id, &path);
            check_identities(trace, j.id, &path, &d)
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{DagTask, RequestPlacement, ResourceUsage};

    fn fixture(json: &str, trace: &str) -> SimTrace {
        let ts = TaskSet::from_json(json).unwrap();
        replay_trace(&ts, &[3, 2], parse_trace(trace).unwrap()).unwrap()
    }

    const JOB: JobId = JobId { task: 0, index: 0 };

    #[test]
    fn blocking_example_replay() {
        let trace = fixture(
            include_str!("../tests/data/blocking_example.json"),
            include_str!("../tests/data/blocking_example.trace"),
        );
        let path = extract_key_path(&trace, JOB);
        assert_eq!(path, vec![0, 3, 5, 6]);
        let d = decompose_blocking(&trace, JOB, &path);
        assert_eq!(d.as_tuple(), (2, 1, 1, 2, 1, 1));
        let r = check_identities(&trace, JOB, &path, &d);
        assert!(r.is_ok(), "{:?}", r.violations);
        assert_eq!((r.key_busy, r.idle_cap(), r.idle), (8, 12, 12));
        assert_eq!((r.blocking, r.working, r.release, r.finish), (8, 10, 0, 10));
        assert_eq!(r.observed_bound, bound(10));
        let other = JobId { task: 1, index: 0 };
        let path = extract_key_path(&trace, other);
        assert_eq!(path, vec![0, 2, 3]);
        let r = check_identities(&trace, other, &path, &decompose_blocking(&trace, other, &path));
        assert!(r.is_ok(), "{:?}", r.violations);
    }

    #[test]
    fn time_accounting_example_replay() {
        let trace = fixture(
            include_str!("../tests/data/time_accounting_example.json"),
            include_str!("../tests/data/time_accounting_example.trace"),
        );
        let r = &audit_trace(&trace)[0];
        assert!(r.is_ok(), "{:?}", r.violations);
        assert_eq!((r.blocking, r.idle, r.working), (5, 9, 10));
        assert_eq!((r.release, r.finish, r.processors), (0, 8, 3));
    }

    #[test]
    fn identity_violations_are_reported() {
        let mut trace = fixture(
            include_str!("../tests/data/blocking_example.json"),
            include_str!("../tests/data/blocking_example.trace"),
        );
        trace.intervals.retain(|iv| !(iv.job == JOB && iv.kind == IntervalKind::Idle && iv.processor == 0));
        let path = extract_key_path(&trace, JOB);
        let d = decompose_blocking(&trace, JOB, &path);
        let r = check_identities(&trace, JOB, &path, &d);
        assert_eq!(r.violations.len(), 1, "{:?}", r.violations);
        assert!(r.violations[0].starts_with("m(f - r) = 30"));
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        job: (usize, usize),
        p: usize,
        s: Time,
        e: Time,
        kind: IntervalKind,
        v: Option<usize>,
        q: Option<usize>,
        h: Option<usize>,
    ) -> Interval {
        Interval {
            job: JobId { task: job.0, index: job.1 },
            processor: p,
            start: s,
            end: e,
            kind,
            vertex: v,
            resource: q,
            holder_task: h,
        }
    }

    #[test]
    fn record_round_trip() {
        let text = "# header\n0:0,2,3,4,spin,3,0,0\n\n1:2,0,0,5,idle,-,-,-\n";
        let parsed = parse_trace(text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].to_string(), "0:0,2,3,4,spin,3,0,0");
        assert_eq!(parsed[1].to_string(), "1:2,0,0,5,idle,-,-,-");
        assert_eq!(
            parse_trace("0:0,1,2").unwrap_err(),
            TraceError::Parse { line: 1, message: "expected 8 fields, found 3".into() }
        );
        assert!(matches!(parse_trace("\n0:0,0,4,4,exec,1,-,-"), Err(TraceError::Parse { line: 2, .. })));
        assert!(matches!(parse_trace("0:0,0,0,4,work,1,-,-"), Err(TraceError::Parse { line: 1, .. })));
    }

    #[test]
    fn chain_runs_sequentially() {
        let t = DagTask::new(0, vec![2, 3, 4], vec![(0, 1), (1, 2)], 20, 20, []).unwrap();
        let ts = TaskSet::new(vec![t], [], 4).unwrap();
        for m in 1..=4 {
            let trace = simulate(&ts, &[m], &SimConfig::new(Discipline::Fifo, 0)).unwrap();
            let first = &trace.jobs[0];
            assert_eq!(first.response_time(), Some(9));
            assert_eq!(extract_key_path(&trace, first.id), vec![0, 1, 2]);
            for r in audit_trace(&trace) {
                assert!(r.is_ok(), "{:?}", r.violations);
            }
        }
    }

    #[test]
    fn diamond_runs_in_parallel() {
        let ts = TaskSet::new(vec![crate::model::tests::diamond(0, 10, 10)], [], 2).unwrap();
        let trace = simulate(&ts, &[2], &SimConfig::new(Discipline::Fifo, 0)).unwrap();
        assert_eq!(trace.jobs.len(), 6);
        assert!(trace.jobs.iter().all(|j| j.response_time() == Some(3)));
        let r = &audit_trace(&trace)[0];
        assert!(r.is_ok(), "{:?}", r.violations);
        assert_eq!(r.decomposition, BlockingDecomposition::default());
        assert_eq!((r.blocking, r.working, r.idle), (0, 4, 2));
    }

    #[test]
    fn simulate_rejects_bad_input() {
        let t = DagTask::synthesize(0, 10, 5, 20, 20, [(0, ResourceUsage::new(1, 1))]).unwrap();
        let ts = TaskSet::new(vec![t.clone()], [0], 2).unwrap();
        let cfg = SimConfig::new(Discipline::Fifo, 0);
        assert_eq!(simulate(&ts, &[1], &cfg), Err(SimError::MissingPlacement { task: 0 }));
        let placed = t
            .with_placements(vec![RequestPlacement { vertex: 0, resource: 0, offset_in_vertex: 0, length: 1 }])
            .unwrap();
        let ts = TaskSet::new(vec![placed], [0], 2).unwrap();
        assert_eq!(simulate(&ts, &[3], &cfg), Err(SimError::TooManyProcessors { used: 3, available: 2 }));
        assert_eq!(simulate(&ts, &[0], &cfg), Err(SimError::ZeroProcessors { task: 0 }));
        assert_eq!(simulate(&ts, &[1], &SimConfig::new(Discipline::Priority, 0)), Err(SimError::MissingPriorityOrder));
        assert!(simulate(&ts, &[2], &cfg).is_ok());
    }

    /// Two single-vertex tasks contending for one lock on one processor each.
    fn contention_set(order: Option<Vec<TaskId>>) -> TaskSet {
        let mk = |id, c: Time| {
            DagTask::new(id, vec![c], vec![], 40, 40, [(0, ResourceUsage::new(1, c))])
                .unwrap()
                .with_placements(vec![RequestPlacement { vertex: 0, resource: 0, offset_in_vertex: 0, length: c }])
                .unwrap()
        };
        let ts = TaskSet::new(vec![mk(0, 3), mk(1, 2), mk(2, 4)], [0], 3).unwrap();
        match order {
            Some(o) => ts.with_priority_order(o).unwrap(),
            None => ts,
        }
    }

    fn grant_order(trace: &SimTrace) -> Vec<TaskId> {
        trace
            .lock_events
            .iter()
            .filter(|e| e.kind == LockEventKind::Acquire && e.job.index == 0)
            .map(|e| e.job.task)
            .collect()
    }

    #[test]
    fn fifo_grants_in_enqueue_order() {
        let ts = contention_set(None);
        let trace = simulate(&ts, &[1, 1, 1], &SimConfig::new(Discipline::Fifo, 0)).unwrap();
        assert_eq!(grant_order(&trace), vec![0, 1, 2]);
        assert_eq!(
            trace.jobs.iter().filter(|j| j.id.index == 0).map(|j| j.finish).collect::<Vec<_>>(),
            vec![Some(3), Some(5), Some(9)]
        );
    }

    #[test]
    fn priority_grants_highest_first() {
        let ts = contention_set(Some(vec![0, 2, 1]));
        let trace = simulate(&ts, &[1, 1, 1], &SimConfig::new(Discipline::Priority, 0)).unwrap();
        // All three enqueue at 0; τ0 wins, then τ2 outranks τ1.
        assert_eq!(grant_order(&trace), vec![0, 2, 1]);
    }

    #[test]
    fn adversarial_mode_starves_victim() {
        let ts = contention_set(None);
        let mut cfg = SimConfig::new(Discipline::Unordered, 0);
        cfg.unordered_mode = UnorderedMode::Adversarial { victim: 0 };
        let trace = simulate(&ts, &[1, 1, 1], &cfg).unwrap();
        assert_eq!(grant_order(&trace), vec![2, 1, 0]);
        let victim = trace.jobs.iter().find(|j| j.id == JobId { task: 0, index: 0 }).unwrap();
        assert_eq!(victim.response_time(), Some(9));
    }

    #[test]
    fn simulation_is_deterministic() {
        let ts = contention_set(None);
        let cfg = SimConfig::new(Discipline::Unordered, 7);
        let a = simulate(&ts, &[1, 1, 1], &cfg).unwrap();
        let b = simulate(&ts, &[1, 1, 1], &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn spin_records_name_the_holder() {
        let ts = contention_set(None);
        let trace = simulate(&ts, &[1, 1, 1], &SimConfig::new(Discipline::Fifo, 0)).unwrap();
        let spins: Vec<_> = trace
            .intervals
            .iter()
            .filter(|iv| iv.kind == IntervalKind::Spin && iv.job.index == 0)
            .map(|iv| (iv.job.task, iv.start, iv.end, iv.holder_task))
            .collect();
        assert_eq!(spins, vec![(1, 0, 3, Some(0)), (2, 0, 3, Some(0)), (2, 3, 5, Some(1))]);
        let replayed = replay_trace(&ts, &[1, 1, 1], trace.intervals.clone()).unwrap();
        assert_eq!(replayed.intervals, trace.intervals);
    }

    #[test]
    fn replay_rejects_double_holder() {
        let ts = contention_set(None);
        let recs = vec![
            record((0, 0), 0, 0, 3, IntervalKind::Exec, Some(0), Some(0), None),
            record((1, 0), 1, 1, 3, IntervalKind::Exec, Some(0), Some(0), None),
            record((1, 0), 1, 0, 1, IntervalKind::Spin, Some(0), Some(0), Some(0)),
        ];
        assert_eq!(replay_trace(&ts, &[1, 1, 1], recs), Err(TraceError::MutualExclusion { resource: 0, at: 1 }));
    }

    #[test]
    fn replay_rejects_precedence_violation() {
        let t = DagTask::new(0, vec![1, 1], vec![(0, 1)], 10, 10, []).unwrap();
        let ts = TaskSet::new(vec![t], [], 2).unwrap();
        let recs = vec![
            record((0, 0), 0, 0, 1, IntervalKind::Exec, Some(0), None, None),
            record((0, 0), 1, 0, 1, IntervalKind::Exec, Some(1), None, None),
        ];
        assert_eq!(
            replay_trace(&ts, &[2], recs),
            Err(TraceError::Precedence { job: JobId { task: 0, index: 0 }, vertex: 1, start: 0, ready: 1 })
        );
    }

    #[test]
    fn replay_rejects_wrong_holder_and_wcet() {
        let ts = contention_set(None);
        let recs = vec![
            record((0, 0), 0, 0, 3, IntervalKind::Exec, Some(0), Some(0), None),
            record((1, 0), 1, 0, 3, IntervalKind::Spin, Some(0), Some(0), Some(2)),
            record((1, 0), 1, 3, 5, IntervalKind::Exec, Some(0), Some(0), None),
        ];
        assert!(matches!(replay_trace(&ts, &[1, 1, 1], recs), Err(TraceError::HolderMismatch { .. })));
        let short = vec![
            record((0, 0), 0, 0, 2, IntervalKind::Exec, Some(0), Some(0), None),
            record((0, 0), 0, 2, 4, IntervalKind::Idle, None, None, None),
        ];
        assert_eq!(
            replay_trace(&ts, &[1, 1, 1], short),
            Err(TraceError::Wcet { job: JobId { task: 0, index: 0 }, vertex: 0, expected: 3, got: 2 })
        );
        let outside = vec![record((0, 0), 2, 0, 3, IntervalKind::Exec, Some(0), Some(0), None)];
        assert!(matches!(replay_trace(&ts, &[1, 1, 1], outside), Err(TraceError::Cluster { .. })));
    }

    #[test]
    fn replay_accepts_a_vertex_cut_by_the_trace_end() {
        let t = DagTask::new(0, vec![2, 3], vec![(0, 1)], 10, 10, []).unwrap();
        let ts = TaskSet::new(vec![t], [], 1).unwrap();
        let cut = vec![
            record((0, 0), 0, 0, 2, IntervalKind::Exec, Some(0), None, None),
            record((0, 0), 0, 2, 4, IntervalKind::Exec, Some(1), None, None),
        ];
        let trace = replay_trace(&ts, &[1], cut).unwrap();
        assert_eq!(trace.jobs[0].finish, None);
        assert_eq!(trace.scorable_jobs().count(), 0);
        let ts = ts.with_processors(2).unwrap();
        let early = vec![
            record((0, 0), 0, 0, 1, IntervalKind::Exec, Some(0), None, None),
            record((0, 0), 1, 0, 1, IntervalKind::Exec, Some(1), None, None),
        ];
        assert!(matches!(replay_trace(&ts, &[2], early), Err(TraceError::Label { .. })));
    }

    #[test]
    fn union_and_overlap() {
        assert_eq!(union(vec![(3, 5), (0, 1), (1, 2), (4, 8)]), vec![(0, 2), (3, 8)]);
        assert_eq!(overlap_with(&[(0, 2), (3, 8)], 1, 4), 2);
        assert_eq!(overlap_with(&[], 1, 4), 0);
    }

    #[test]
    fn key_path_ties_take_lowest_id() {
        let ts = TaskSet::new(vec![crate::model::tests::diamond(0, 10, 10)], [], 2).unwrap();
        let trace = simulate(&ts, &[2], &SimConfig::new(Discipline::Fifo, 0)).unwrap();
        // Vertices 1 and 2 both finish at 2.
        assert_eq!(extract_key_path(&trace, trace.jobs[0].id), vec![0, 1, 3]);
    }
}
