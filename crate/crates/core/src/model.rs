//! Task, resource and platform model.
//!
//! A [`DagTask`] is immutable once built: construction validates the graph,
//! inserts zero-WCET dummy head/tail vertices when the raw graph has several
//! entry or exit points, and caches the volume and longest path.
//!
//! The JSON interchange format is described by [`TaskSetFile`]; everything in
//! the crate reads and writes task sets through it.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Abstract integer time units.
pub type Time = u64;
pub type TaskId = usize;
pub type VertexId = usize;
pub type ResourceId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("task {task}: graph contains a cycle through vertex {vertex}")]
    Cycle { task: TaskId, vertex: VertexId },
    #[error("task {task}: vertex ids must be dense 0..n in order (found {found} at position {position})")]
    VertexIds { task: TaskId, position: usize, found: VertexId },
    #[error("task {task}: edge ({pred}, {succ}) references an unknown vertex")]
    UnknownVertex { task: TaskId, pred: VertexId, succ: VertexId },
    #[error("task {task}: graph has no vertices")]
    EmptyGraph { task: TaskId },
    #[error("task {task}: period must be positive")]
    ZeroPeriod { task: TaskId },
    #[error("task {task}: deadline must be positive")]
    ZeroDeadline { task: TaskId },
    #[error("task {task}: deadline {deadline} exceeds period {period}")]
    DeadlineExceedsPeriod { task: TaskId, deadline: Time, period: Time },
    #[error("task {task}: resource {resource} listed twice")]
    DuplicateResource { task: TaskId, resource: ResourceId },
    #[error("task {task}: resource {resource} is not declared in the platform resource set")]
    UndeclaredResource { task: TaskId, resource: ResourceId },
    #[error("task {task}: invalid request placement: {reason}")]
    Placement { task: TaskId, reason: String },
    #[error("task ids must be dense 0..n in order (found {found} at position {position})")]
    TaskIds { position: usize, found: TaskId },
    #[error("platform must have at least one processor")]
    NoProcessors,
    #[error("invalid priority order: {0}")]
    PriorityOrder(String),
    #[error("malformed task-set JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub wcet: Time,
}

/// Access profile of one task on one resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceUsage {
    /// Worst-case number of requests per job.
    pub count: u64,
    /// Worst-case length of a single critical section.
    pub hold_time: Time,
}

impl ResourceUsage {
    pub fn new(count: u64, hold_time: Time) -> Self {
        if count == 0 {
            return Self::default();
        }
        Self { count, hold_time }
    }

    /// Total lock-holding time per job, `N * L`.
    pub fn demand(&self) -> Time {
        self.count * self.hold_time
    }
}

/// Where one critical section sits inside a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RequestPlacement {
    pub vertex: VertexId,
    pub resource: ResourceId,
    pub offset_in_vertex: Time,
    pub length: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEntry {
    pub resource: ResourceId,
    pub count: u64,
    pub hold_time: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskFile {
    pub id: TaskId,
    pub period: Time,
    pub deadline: Time,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(default)]
    pub resource_usage: Vec<UsageEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub request_placement: Vec<RequestPlacement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSetFile {
    pub processors: u64,
    pub resources: Vec<ResourceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority_order: Option<Vec<TaskId>>,
    pub tasks: Vec<TaskFile>,
}

/// A validated periodic DAG task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagTask {
    id: TaskId,
    wcets: Vec<Time>,
    edges: Vec<(VertexId, VertexId)>,
    preds: Vec<Vec<VertexId>>,
    succs: Vec<Vec<VertexId>>,
    topo: Vec<VertexId>,
    head: VertexId,
    tail: VertexId,
    period: Time,
    deadline: Time,
    usage: BTreeMap<ResourceId, ResourceUsage>,
    placements: Vec<RequestPlacement>,
    volume: Time,
    longest_path: Time,
}

impl DagTask {
    /// Builds a task from per-vertex WCETs (vertex `k` has WCET `wcets[k]`)
    /// and precedence edges. Usage entries with a zero count are dropped.
    pub fn new(
        id: TaskId,
        wcets: Vec<Time>,
        edges: Vec<(VertexId, VertexId)>,
        period: Time,
        deadline: Time,
        usage: impl IntoIterator<Item = (ResourceId, ResourceUsage)>,
    ) -> Result<Self, ModelError> {
        if period == 0 {
            return Err(ModelError::ZeroPeriod { task: id });
        }
        if deadline == 0 {
            return Err(ModelError::ZeroDeadline { task: id });
        }
        if deadline > period {
            return Err(ModelError::DeadlineExceedsPeriod { task: id, deadline, period });
        }
        if wcets.is_empty() {
            return Err(ModelError::EmptyGraph { task: id });
        }
        let n = wcets.len();
        for &(pred, succ) in &edges {
            if pred >= n || succ >= n {
                return Err(ModelError::UnknownVertex { task: id, pred, succ });
            }
        }
        let mut usage_map = BTreeMap::new();
        for (resource, u) in usage {
            if usage_map.contains_key(&resource) {
                return Err(ModelError::DuplicateResource { task: id, resource });
            }
            if u.count > 0 {
                usage_map.insert(resource, ResourceUsage::new(u.count, u.hold_time));
            }
        }

        let mut wcets = wcets;
        let mut edges = dedup_edges(edges);
        if let Err(vertex) = topological_order(n, &edges) {
            return Err(ModelError::Cycle { task: id, vertex });
        }
        insert_dummies(&mut wcets, &mut edges);

        let n = wcets.len();
        let (preds, succs) = adjacency(n, &edges);
        let topo = topological_order(n, &edges).expect("acyclic graph stays acyclic");
        let head = (0..n).find(|&v| preds[v].is_empty()).expect("unique head");
        let tail = (0..n).find(|&v| succs[v].is_empty()).expect("unique tail");
        let volume = wcets.iter().sum();
        let longest_path = longest_path_dp(&wcets, &preds, &topo);

        Ok(Self {
            id,
            wcets,
            edges,
            preds,
            succs,
            topo,
            head,
            tail,
            period,
            deadline,
            usage: usage_map,
            placements: Vec::new(),
            volume,
            longest_path,
        })
    }

    /// A fork-join stand-in realizing an exact `(volume, longest_path)` pair:
    /// one path vertex of WCET `longest` plus parallel vertices, each no
    /// longer than `longest`, absorbing the remaining volume.
    pub fn synthesize(
        id: TaskId,
        volume: Time,
        longest: Time,
        period: Time,
        deadline: Time,
        usage: impl IntoIterator<Item = (ResourceId, ResourceUsage)>,
    ) -> Result<Self, ModelError> {
        assert!(longest > 0 && longest <= volume, "need 0 < L <= C");
        let mut wcets = vec![longest];
        let mut rest = volume - longest;
        while rest > 0 {
            let w = rest.min(longest);
            wcets.push(w);
            rest -= w;
        }
        Self::new(id, wcets, Vec::new(), period, deadline, usage)
    }

    /// Returns a copy carrying the given request placement, validated against
    /// the graph and the usage profile.
    pub fn with_placements(mut self, mut placements: Vec<RequestPlacement>) -> Result<Self, ModelError> {
        placements.sort_by_key(|p| (p.vertex, p.offset_in_vertex));
        self.check_placements(&placements)?;
        self.placements = placements;
        Ok(self)
    }

    fn check_placements(&self, placements: &[RequestPlacement]) -> Result<(), ModelError> {
        let fail = |reason: String| ModelError::Placement { task: self.id, reason };
        let mut counts: BTreeMap<ResourceId, u64> = BTreeMap::new();
        let mut prev: Option<&RequestPlacement> = None;
        for p in placements {
            if p.vertex >= self.wcets.len() {
                return Err(fail(format!("vertex {} does not exist", p.vertex)));
            }
            let usage = self
                .usage
                .get(&p.resource)
                .ok_or_else(|| fail(format!("resource {} is not used by this task", p.resource)))?;
            if p.length == 0 || p.length > usage.hold_time {
                return Err(fail(format!(
                    "request on resource {} in vertex {} has length {} outside [1, {}]",
                    p.resource, p.vertex, p.length, usage.hold_time
                )));
            }
            if p.offset_in_vertex + p.length > self.wcets[p.vertex] {
                return Err(fail(format!(
                    "request at offset {} of length {} exceeds the WCET {} of vertex {}",
                    p.offset_in_vertex, p.length, self.wcets[p.vertex], p.vertex
                )));
            }
            if let Some(q) = prev {
                if q.vertex == p.vertex && q.offset_in_vertex + q.length > p.offset_in_vertex {
                    return Err(fail(format!("overlapping requests in vertex {}", p.vertex)));
                }
            }
            *counts.entry(p.resource).or_default() += 1;
            prev = Some(p);
        }
        if !placements.is_empty() {
            for (&r, u) in &self.usage {
                let placed = counts.get(&r).copied().unwrap_or(0);
                if placed != u.count {
                    return Err(fail(format!(
                        "resource {r}: {placed} requests placed but the usage declares {}",
                        u.count
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> TaskId {
        self.id
    }

    pub fn period(&self) -> Time {
        self.period
    }

    pub fn deadline(&self) -> Time {
        self.deadline
    }

    pub fn vertex_count(&self) -> usize {
        self.wcets.len()
    }

    pub fn wcet(&self, v: VertexId) -> Time {
        self.wcets[v]
    }

    pub fn wcets(&self) -> &[Time] {
        &self.wcets
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.preds[v]
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succs[v]
    }

    /// Vertices in topological order (Kahn's algorithm, lowest id first).
    pub fn topological_order(&self) -> &[VertexId] {
        &self.topo
    }

    pub fn head(&self) -> VertexId {
        self.head
    }

    pub fn tail(&self) -> VertexId {
        self.tail
    }

    /// `C_i`: sum of all vertex WCETs.
    pub fn volume(&self) -> Time {
        self.volume
    }

    /// `L_i`: length of the longest complete path.
    pub fn longest_path(&self) -> Time {
        self.longest_path
    }

    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.volume, self.deadline)
    }

    pub fn utilization(&self) -> Ratio<u64> {
        Ratio::new(self.volume, self.period)
    }

    /// Usage on `resource`; all-zero when the task never accesses it.
    pub fn usage(&self, resource: ResourceId) -> ResourceUsage {
        self.usage.get(&resource).copied().unwrap_or_default()
    }

    pub fn accesses(&self, resource: ResourceId) -> bool {
        self.usage(resource).count > 0
    }

    /// `Θ_i` with its usage, in ascending resource order.
    pub fn resources(&self) -> impl Iterator<Item = (ResourceId, ResourceUsage)> + '_ {
        self.usage.iter().map(|(&r, &u)| (r, u))
    }

    pub fn placements(&self) -> &[RequestPlacement] {
        &self.placements
    }

    pub fn has_placements(&self) -> bool {
        !self.placements.is_empty() || self.usage.is_empty()
    }

    pub fn to_file(&self) -> TaskFile {
        TaskFile {
            id: self.id,
            period: self.period,
            deadline: self.deadline,
            vertices: self.wcets.iter().enumerate().map(|(id, &wcet)| Vertex { id, wcet }).collect(),
            edges: self.edges.clone(),
            resource_usage: self
                .usage
                .iter()
                .map(|(&resource, u)| UsageEntry { resource, count: u.count, hold_time: u.hold_time })
                .collect(),
            request_placement: self.placements.clone(),
        }
    }
}

impl TryFrom<&TaskFile> for DagTask {
    type Error = ModelError;

    fn try_from(file: &TaskFile) -> Result<Self, Self::Error> {
        for (position, v) in file.vertices.iter().enumerate() {
            if v.id != position {
                return Err(ModelError::VertexIds { task: file.id, position, found: v.id });
            }
        }
        let task = DagTask::new(
            file.id,
            file.vertices.iter().map(|v| v.wcet).collect(),
            file.edges.clone(),
            file.period,
            file.deadline,
            file.resource_usage.iter().map(|u| (u.resource, ResourceUsage::new(u.count, u.hold_time))),
        )?;
        if file.request_placement.is_empty() {
            Ok(task)
        } else {
            task.with_placements(file.request_placement.clone())
        }
    }
}

fn dedup_edges(mut edges: Vec<(VertexId, VertexId)>) -> Vec<(VertexId, VertexId)> {
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn adjacency(n: usize, edges: &[(VertexId, VertexId)]) -> (Vec<Vec<VertexId>>, Vec<Vec<VertexId>>) {
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for &(u, v) in edges {
        succs[u].push(v);
        preds[v].push(u);
    }
    for list in preds.iter_mut().chain(succs.iter_mut()) {
        list.sort_unstable();
    }
    (preds, succs)
}

/// Kahn's algorithm, lowest ready id first. On a cycle returns the lowest
/// vertex that could never be scheduled.
fn topological_order(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Vec<VertexId>, VertexId> {
    let (_, succs) = adjacency(n, edges);
    let mut indeg = vec![0usize; n];
    for &(_, v) in edges {
        indeg[v] += 1;
    }
    let mut ready: BinaryHeap<Reverse<VertexId>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &succs[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&v| indeg[v] > 0).unwrap_or(0))
    }
}

fn insert_dummies(wcets: &mut Vec<Time>, edges: &mut Vec<(VertexId, VertexId)>) {
    let n = wcets.len();
    let (preds, succs) = adjacency(n, edges);
    let heads: Vec<_> = (0..n).filter(|&v| preds[v].is_empty()).collect();
    let tails: Vec<_> = (0..n).filter(|&v| succs[v].is_empty()).collect();
    if heads.len() > 1 {
        let head = wcets.len();
        wcets.push(0);
        edges.extend(heads.iter().map(|&v| (head, v)));
    }
    if tails.len() > 1 {
        let tail = wcets.len();
        wcets.push(0);
        edges.extend(tails.iter().map(|&v| (v, tail)));
    }
    edges.sort_unstable();
}

fn longest_path_dp(wcets: &[Time], preds: &[Vec<VertexId>], topo: &[VertexId]) -> Time {
    let mut finish = vec![0; wcets.len()];
    for &v in topo {
        let start = preds[v].iter().map(|&u| finish[u]).max().unwrap_or(0);
        finish[v] = start + wcets[v];
    }
    finish.into_iter().max().unwrap_or(0)
}

/// Longest complete path of a raw graph, by dynamic programming over a
/// topological order. Fails on a cycle.
pub fn longest_path_of(wcets: &[Time], edges: &[(VertexId, VertexId)]) -> Result<Time, VertexId> {
    let (preds, _) = adjacency(wcets.len(), edges);
    let topo = topological_order(wcets.len(), edges)?;
    Ok(longest_path_dp(wcets, &preds, &topo))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    Cycle {
        vertex: VertexId,
    },
    BadVertexIds,
    UnknownVertex {
        pred: VertexId,
        succ: VertexId,
    },
    EmptyGraph,
    ZeroPeriod,
    ZeroDeadline,
    DeadlineExceedsPeriod,
    /// Several entry points; a dummy head will be inserted.
    MultipleHeads(usize),
    /// Several exit points; a dummy tail will be inserted.
    MultipleTails(usize),
    /// Density at most one: the task can run sequentially and is outside the
    /// scope of the parallel analysis.
    Sequential,
    Placement(String),
}

impl Finding {
    pub fn is_error(&self) -> bool {
        !matches!(self, Finding::MultipleHeads(_) | Finding::MultipleTails(_) | Finding::Sequential)
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Cycle { vertex } => write!(f, "invalid: cycle through vertex {vertex}"),
            Finding::BadVertexIds => write!(f, "invalid: vertex ids are not dense 0..n"),
            Finding::UnknownVertex { pred, succ } => {
                write!(f, "invalid: edge ({pred}, {succ}) names an unknown vertex")
            }
            Finding::EmptyGraph => write!(f, "invalid: no vertices"),
            Finding::ZeroPeriod => write!(f, "invalid: period is zero"),
            Finding::ZeroDeadline => write!(f, "invalid: deadline is zero"),
            Finding::DeadlineExceedsPeriod => write!(f, "invalid: deadline exceeds period"),
            Finding::MultipleHeads(k) => write!(f, "note: {k} entry vertices, dummy head inserted"),
            Finding::MultipleTails(k) => write!(f, "note: {k} exit vertices, dummy tail inserted"),
            Finding::Sequential => write!(f, "note: sequential (density <= 1), outside analysis scope"),
            Finding::Placement(reason) => write!(f, "invalid placement: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub task: TaskId,
    pub findings: Vec<Finding>,
    pub volume: Time,
    pub longest_path: Option<Time>,
    /// `C_i / D_i`, absent when the deadline is zero.
    pub density: Option<Ratio<u64>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        !self.findings.iter().any(Finding::is_error)
    }

    pub fn is_sequential(&self) -> bool {
        self.findings.contains(&Finding::Sequential)
    }
}

/// Checks a raw task description without building it.
pub fn validate(file: &TaskFile) -> ValidationReport {
    let mut findings = Vec::new();
    let n = file.vertices.len();
    let wcets: Vec<Time> = file.vertices.iter().map(|v| v.wcet).collect();
    let volume = wcets.iter().sum();

    if n == 0 {
        findings.push(Finding::EmptyGraph);
    }
    if file.vertices.iter().enumerate().any(|(k, v)| v.id != k) {
        findings.push(Finding::BadVertexIds);
    }
    let mut edges_ok = true;
    for &(pred, succ) in &file.edges {
        if pred >= n || succ >= n {
            findings.push(Finding::UnknownVertex { pred, succ });
            edges_ok = false;
        }
    }
    let mut longest_path = None;
    if edges_ok && n > 0 {
        match longest_path_of(&wcets, &file.edges) {
            Ok(l) => {
                longest_path = Some(l);
                let (preds, succs) = adjacency(n, &file.edges);
                let heads = preds.iter().filter(|p| p.is_empty()).count();
                let tails = succs.iter().filter(|s| s.is_empty()).count();
                if heads > 1 {
                    findings.push(Finding::MultipleHeads(heads));
                }
                if tails > 1 {
                    findings.push(Finding::MultipleTails(tails));
                }
            }
            Err(vertex) => findings.push(Finding::Cycle { vertex }),
        }
    }
    if file.period == 0 {
        findings.push(Finding::ZeroPeriod);
    }
    if file.deadline == 0 {
        findings.push(Finding::ZeroDeadline);
    } else if file.deadline > file.period {
        findings.push(Finding::DeadlineExceedsPeriod);
    }
    let density = (file.deadline > 0).then(|| Ratio::new(volume, file.deadline));
    if let Some(d) = density {
        if d <= Ratio::from_integer(1) {
            findings.push(Finding::Sequential);
        }
    }
    if !findings.iter().any(Finding::is_error) && !file.request_placement.is_empty() {
        if let Err(ModelError::Placement { reason, .. }) = DagTask::try_from(file) {
            findings.push(Finding::Placement(reason));
        }
    }
    ValidationReport { task: file.id, findings, volume, longest_path, density }
}

/// The analyzed system: tasks, resource catalog and processor budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    tasks: Vec<DagTask>,
    resources: BTreeSet<ResourceId>,
    processors: u64,
    priority_order: Option<Vec<TaskId>>,
}

impl TaskSet {
    /// Task ids must equal their position in `tasks`.
    pub fn new(
        tasks: Vec<DagTask>,
        resources: impl IntoIterator<Item = ResourceId>,
        processors: u64,
    ) -> Result<Self, ModelError> {
        if processors == 0 {
            return Err(ModelError::NoProcessors);
        }
        let resources: BTreeSet<_> = resources.into_iter().collect();
        for (position, t) in tasks.iter().enumerate() {
            if t.id() != position {
                return Err(ModelError::TaskIds { position, found: t.id() });
            }
            for (r, _) in t.resources() {
                if !resources.contains(&r) {
                    return Err(ModelError::UndeclaredResource { task: t.id(), resource: r });
                }
            }
        }
        Ok(Self { tasks, resources, processors, priority_order: None })
    }

    /// Attaches a strict priority order, highest priority first.
    pub fn with_priority_order(mut self, order: Vec<TaskId>) -> Result<Self, ModelError> {
        let n = self.tasks.len();
        if order.len() != n {
            return Err(ModelError::PriorityOrder(format!("expected {n} task ids, got {}", order.len())));
        }
        let mut seen = vec![false; n];
        for &t in &order {
            if t >= n || seen[t] {
                return Err(ModelError::PriorityOrder(format!("{order:?} is not a permutation of 0..{n}")));
            }
            seen[t] = true;
        }
        self.priority_order = Some(order);
        Ok(self)
    }

    pub fn without_priority_order(mut self) -> Self {
        self.priority_order = None;
        self
    }

    pub fn with_processors(mut self, processors: u64) -> Result<Self, ModelError> {
        if processors == 0 {
            return Err(ModelError::NoProcessors);
        }
        self.processors = processors;
        Ok(self)
    }

    /// Replaces one task, e.g. to attach a request placement.
    pub fn with_task(mut self, task: DagTask) -> Self {
        let id = task.id();
        self.tasks[id] = task;
        self
    }

    pub fn tasks(&self) -> &[DagTask] {
        &self.tasks
    }

    pub fn task(&self, id: TaskId) -> &DagTask {
        &self.tasks[id]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn resources(&self) -> &BTreeSet<ResourceId> {
        &self.resources
    }

    pub fn processors(&self) -> u64 {
        self.processors
    }

    pub fn priority_order(&self) -> Option<&[TaskId]> {
        self.priority_order.as_deref()
    }

    /// Position of `task` in the priority order (0 = highest).
    pub fn priority_rank(&self, task: TaskId) -> Option<usize> {
        self.priority_order.as_ref()?.iter().position(|&t| t == task)
    }

    /// Exact `Σ C_i / T_i`; a big rational because the common denominator
    /// grows with the product of periods.
    pub fn total_utilization(&self) -> BigRational {
        self.tasks.iter().fold(BigRational::zero(), |acc, t| {
            acc + BigRational::new(BigInt::from(t.volume()), BigInt::from(t.period()))
        })
    }

    pub fn to_file(&self) -> TaskSetFile {
        TaskSetFile {
            processors: self.processors,
            resources: self.resources.iter().copied().collect(),
            priority_order: self.priority_order.clone(),
            tasks: self.tasks.iter().map(DagTask::to_file).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("task sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: TaskSetFile = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::try_from(&file)
    }
}

impl TryFrom<&TaskSetFile> for TaskSet {
    type Error = ModelError;

    fn try_from(file: &TaskSetFile) -> Result<Self, Self::Error> {
        let tasks = file.tasks.iter().map(DagTask::try_from).collect::<Result<Vec<_>, _>>()?;
        let set = TaskSet::new(tasks, file.resources.iter().copied(), file.processors)?;
        match &file.priority_order {
            Some(order) => set.with_priority_order(order.clone()),
            None => Ok(set),
        }
    }
}
