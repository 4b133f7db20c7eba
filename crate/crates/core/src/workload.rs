//! Synthetic task-set generation, request placement, the bundled OpenMP
//! program dataset, and flat `key = value` configuration files.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{DagTask, ModelError, RequestPlacement, ResourceId, ResourceUsage, TaskId, TaskSet, Time, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("task {task}: no heavy task (density > 1) after {attempts} attempts")]
    Density { task: TaskId, attempts: usize },
    #[error("task {task}: no vertex has room for a request on resource {resource}")]
    Placement { task: TaskId, resource: ResourceId },
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Copy + PartialOrd + fmt::Display> Span<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn fixed(v: T) -> Self {
        Self { lo: v, hi: v }
    }

    fn check(&self, name: &str) -> Result<(), GenError> {
        if self.lo > self.hi {
            return Err(GenError::Invalid(format!("{name} range {}..{} is empty", self.lo, self.hi)));
        }
        Ok(())
    }
}

impl<T: fmt::Display + PartialEq> fmt::Display for Span<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub tasks: usize,
    pub edge_probability: f64,
    pub vertices: Span<usize>,
    pub wcet: Span<Time>,
    /// Choices for `L_i / D_i`.
    pub ld_ratios: Vec<f64>,
    pub resource_types: Span<usize>,
    /// Requests per resource, summed over all tasks.
    pub total_accesses: Span<u64>,
    /// Upper limit for critical-section lengths, drawn per resource.
    pub max_hold: Span<Time>,
    pub u_norm: f64,
    pub seed: u64,
    /// Attempts per task at drawing a graph with density above 1.
    pub max_retries: usize,
}

impl Default for GenConfig {
    /// Full-scale graphs with the basic configuration: 4 tasks, `U_norm`
    /// 0.5, 4 resources, 256 accesses per resource, holds up to 15.
    fn default() -> Self {
        Self {
            tasks: 4,
            edge_probability: 0.1,
            vertices: Span::new(100, 400),
            wcet: Span::new(250, 600),
            ld_ratios: vec![0.125, 0.25],
            resource_types: Span::fixed(4),
            total_accesses: Span::fixed(256),
            max_hold: Span::fixed(15),
            u_norm: 0.5,
            seed: 0,
            max_retries: 1000,
        }
    }
}

impl GenConfig {
    /// The basic configuration with 20 to 60 vertices per graph.
    pub fn desk_scale() -> Self {
        Self { vertices: Span::new(20, 60), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Invalid(m.to_string()));
        if self.tasks == 0 {
            return bad("tasks must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return bad("edge_probability must lie in [0, 1]");
        }
        self.vertices.check("vertices")?;
        self.wcet.check("wcet")?;
        self.resource_types.check("resource_types")?;
        self.total_accesses.check("total_accesses")?;
        self.max_hold.check("max_hold")?;
        if self.vertices.lo == 0 || self.wcet.lo == 0 || self.max_hold.lo == 0 {
            return bad("vertices, wcet and max_hold must be positive");
        }
        if self.ld_ratios.is_empty() || self.ld_ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return bad("ld_ratios must be a non-empty list of values in (0, 1)");
        }
        if self.u_norm.is_nan() || self.u_norm <= 0.0 || !self.u_norm.is_finite() {
            return bad("u_norm must be positive");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1");
        }
        Ok(())
    }

    /// Sets one field from its textual value; `Ok(false)` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, String> {
        match key {
            "tasks" => self.tasks = parse_num(value)?,
            "edge_probability" => self.edge_probability = parse_num(value)?,
            "vertices" => self.vertices = parse_span(value)?,
            "wcet" => self.wcet = parse_span(value)?,
            "ld_ratios" => self.ld_ratios = parse_list(value)?,
            "resource_types" => self.resource_types = parse_span(value)?,
            "total_accesses" => self.total_accesses = parse_span(value)?,
            "max_hold" => self.max_hold = parse_span(value)?,
            "u_norm" => self.u_norm = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "max_retries" => self.max_retries = parse_num(value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Reads a flat config file on top of [`GenConfig::desk_scale`].
    pub fn from_config(text: &str) -> Result<Self, GenError> {
        let mut config = Self::desk_scale();
        for entry in parse_key_values(text)? {
            match config.set(&entry.key, &entry.value) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(GenError::Config { line: entry.line, message: format!("unknown key `{}`", entry.key) })
                }
                Err(message) => return Err(GenError::Config { line: entry.line, message }),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_config(&self) -> String {
        let ratios: Vec<String> = self.ld_ratios.iter().map(f64::to_string).collect();
        format!(
            "tasks = {}\nedge_probability = {}\nvertices = {}\nwcet = {}\nld_ratios = {}\nresource_types = {}\n\
             total_accesses = {}\nmax_hold = {}\nu_norm = {}\nseed = {}\nmax_retries = {}\n",
            self.tasks,
            self.edge_probability,
            self.vertices,
            self.wcet,
            ratios.join(", "),
            self.resource_types,
            self.total_accesses,
            self.max_hold,
            self.u_norm,
            self.seed,
            self.max_retries
        )
    }
}

/// One `key = value` line of a flat config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a flat config file into entries. `#` starts a comment; blank
/// lines are skipped; repeated keys are an error.
pub fn parse_key_values(text: &str) -> Result<Vec<ConfigEntry>, GenError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| GenError::Config { line, message: format!("expected `key = value`, found `{body}`") })?;
        let key = key.trim().to_string();
        if !seen.insert(key.clone()) {
            return Err(GenError::Config { line, message: format!("duplicate key `{key}`") });
        }
        out.push(ConfigEntry { line, key, value: value.trim().to_string() });
    }
    Ok(out)
}

pub fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse `{}`", s.trim()))
}

/// `lo..hi` (inclusive) or a single value.
pub fn parse_span<T: std::str::FromStr + Copy + PartialOrd + fmt::Display>(s: &str) -> Result<Span<T>, String> {
    match s.split_once("..") {
        Some((lo, hi)) => Ok(Span::new(parse_num(lo)?, parse_num(hi)?)),
        None => Ok(Span::fixed(parse_num(s)?)),
    }
}

/// Comma-separated values.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(parse_num).collect()
}

/// The value as written in shortest decimal form, as an exact fraction, so
/// that `0.1` means one tenth rather than its binary neighbour.
pub fn decimal_ratio(x: f64) -> BigRational {
    let text = x.to_string();
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("finite float prints as decimal digits");
    BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
}

/// `⌈U_Σ / U_norm⌉`, at least 1.
pub fn platform_size(ts_utilization: &BigRational, u_norm: f64) -> u64 {
    let m = (ts_utilization / decimal_ratio(u_norm)).ceil();
    m.to_integer().to_u64().expect("processor count fits u64").max(1)
}

/// Random graph: forward edges with probability `p`, then the fewest extra
/// edges making it weakly connected (the smallest vertex of each component
/// is linked from the smallest vertex of the previous component, components
/// ordered by smallest vertex). Returns per-vertex WCETs and edges before
/// dummy insertion.
pub fn gen_dag(config: &GenConfig, rng: &mut impl Rng) -> (Vec<Time>, Vec<(VertexId, VertexId)>) {
    let n = rng.gen_range(config.vertices.lo..=config.vertices.hi);
    let wcets: Vec<Time> = (0..n).map(|_| rng.gen_range(config.wcet.lo..=config.wcet.hi)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(config.edge_probability) {
                edges.push((i, j));
            }
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while parent[r] != r {
            r = parent[r];
        }
        let mut v = v;
        while parent[v] != r {
            let next = parent[v];
            parent[v] = r;
            v = next;
        }
        r
    }
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    // With roots merged toward the smaller id, each root is its component's
    // smallest vertex; iterating vertices in order visits roots in order.
    let roots: Vec<usize> = (0..n).filter(|&v| find(&mut parent, v) == v).collect();
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    (wcets, edges)
}

/// `D = ⌈L / ratio⌉`.
fn deadline_for(longest: Time, ratio: f64) -> Time {
    (longest as f64 / ratio).ceil() as Time
}

/// Draws graphs until one is heavy (density above 1 with `T = D`).
pub fn gen_task(config: &GenConfig, id: TaskId, rng: &mut impl Rng) -> Result<DagTask, GenError> {
    for _ in 0..config.max_retries {
        let (wcets, edges) = gen_dag(config, rng);
        let ratio = *config.ld_ratios.choose(rng).expect("ratios validated non-empty");
        let probe = DagTask::new(id, wcets, edges, Time::MAX, Time::MAX, [])?;
        let deadline = deadline_for(probe.longest_path(), ratio);
        if probe.volume() > deadline {
            return Ok(DagTask::new(id, probe.wcets().to_vec(), probe.edges().to_vec(), deadline, deadline, [])?);
        }
    }
    Err(GenError::Density { task: id, attempts: config.max_retries })
}

/// Tasks with graphs, then resources: each resource's accesses are dealt to
/// uniformly random tasks, and each using task gets a hold time in
/// `[1, max_hold]`. The platform has `⌈U_Σ / U_norm⌉` processors.
pub fn gen_taskset(config: &GenConfig, seed: u64) -> Result<TaskSet, GenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs = (0..config.tasks).map(|i| gen_task(config, i, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    let kinds = rng.gen_range(config.resource_types.lo..=config.resource_types.hi);
    let mut usage: Vec<Vec<(ResourceId, ResourceUsage)>> = vec![Vec::new(); config.tasks];
    for q in 0..kinds {
        let total = rng.gen_range(config.total_accesses.lo..=config.total_accesses.hi);
        let max_hold = rng.gen_range(config.max_hold.lo..=config.max_hold.hi);
        let mut counts = vec![0u64; config.tasks];
        for _ in 0..total {
            counts[rng.gen_range(0..config.tasks)] += 1;
        }
        for (i, &n) in counts.iter().enumerate() {
            if n > 0 {
                usage[i].push((q, ResourceUsage::new(n, rng.gen_range(1..=max_hold))));
            }
        }
    }
    let tasks = graphs
        .into_iter()
        .zip(usage)
        .map(|(g, u)| DagTask::new(g.id(), g.wcets().to_vec(), g.edges().to_vec(), g.period(), g.deadline(), u))
        .collect::<Result<Vec<_>, _>>()?;
    let utilization = tasks
        .iter()
        .fold(BigRational::zero(), |acc, t| acc + BigRational::new(BigInt::from(t.volume()), BigInt::from(t.period())));
    let m = platform_size(&utilization, config.u_norm);
    Ok(TaskSet::new(tasks, 0..kinds, m)?)
}

/// Spreads each resource's requests over vertices with room for them:
/// lengths are drawn in `[1, L_{i,q}]` with one request of exactly
/// `L_{i,q}`, each request lands on a uniformly chosen vertex that still
/// fits it, and sections are packed from the start of their vertex.
pub fn place_requests(task: &DagTask, rng: &mut impl Rng) -> Result<Vec<RequestPlacement>, GenError> {
    let mut requests: Vec<(ResourceId, Time)> = Vec::new();
    for (q, u) in task.resources() {
        let mut lengths: Vec<Time> = (0..u.count).map(|_| rng.gen_range(1..=u.hold_time)).collect();
        let k = rng.gen_range(0..lengths.len());
        lengths[k] = u.hold_time;
        requests.extend(lengths.into_iter().map(|l| (q, l)));
    }
    requests.shuffle(rng);
    let mut used = vec![0; task.vertex_count()];
    let mut out = Vec::with_capacity(requests.len());
    for (q, len) in requests {
        let fits: Vec<VertexId> = (0..task.vertex_count()).filter(|&v| task.wcet(v) - used[v] >= len).collect();
        let &v = fits.choose(rng).ok_or(GenError::Placement { task: task.id(), resource: q })?;
        out.push(RequestPlacement { vertex: v, resource: q, offset_in_vertex: used[v], length: len });
        used[v] += len;
    }
    Ok(out)
}

/// Attaches a fresh placement to every task of `ts`.
pub fn place_all(ts: &TaskSet, seed: u64) -> Result<TaskSet, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ts.clone();
    for task in ts.tasks() {
        let placements = place_requests(task, &mut rng)?;
        out = out.with_task(task.clone().with_placements(placements)?);
    }
    Ok(out)
}

/// Measured parameters of one OpenMP benchmark program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramTemplate {
    pub name: &'static str,
    pub volume: Time,
    pub longest_path: Time,
    /// `(resource, N, L)` rows; resources a program never locks are absent.
    pub usage: &'static [(ResourceId, u64, Time)],
}

const DATASET: [ProgramTemplate; 8] = [
    ProgramTemplate {
        name: "alignment.for",
        volume: 313168,
        longest_path: 11446,
        usage: &[(0, 22, 2), (1, 1, 2), (2, 2, 2)],
    },
    ProgramTemplate {
        name: "alignment.single",
        volume: 315981,
        longest_path: 9980,
        usage: &[(0, 22, 2), (1, 1, 2), (2, 2, 2)],
    },
    ProgramTemplate { name: "fft", volume: 274, longest_path: 58, usage: &[(0, 21, 2), (1, 1, 4), (2, 2, 2)] },
    ProgramTemplate { name: "fib", volume: 353, longest_path: 20, usage: &[(0, 20, 2), (2, 2, 2)] },
    ProgramTemplate { name: "sort", volume: 1757, longest_path: 217, usage: &[(0, 20, 2), (1, 2, 4), (2, 2, 2)] },
    ProgramTemplate {
        name: "floorplan",
        volume: 5843,
        longest_path: 92,
        usage: &[(0, 36, 2), (1, 6, 1), (2, 2, 2), (4, 4, 1)],
    },
    ProgramTemplate {
        name: "MatrixMultiplication",
        volume: 5873246,
        longest_path: 106983,
        usage: &[(1, 3, 7), (3, 5, 4)],
    },
    ProgramTemplate {
        name: "Square",
        volume: 50000812,
        longest_path: 1000066,
        usage: &[(5, 20, 5), (6, 50, 1), (7, 50, 105), (8, 50, 79), (9, 50, 1)],
    },
];

/// The eight measured programs, times in microseconds.
pub fn load_openmp_dataset() -> Vec<ProgramTemplate> {
    DATASET.to_vec()
}

impl ProgramTemplate {
    pub fn usage_of(&self, resource: ResourceId) -> Option<ResourceUsage> {
        self.usage.iter().find(|&&(q, _, _)| q == resource).map(|&(_, n, l)| ResourceUsage::new(n, l))
    }

    /// A heavy task with this program's volume, longest path and usage; the
    /// deadline comes from a random `L/D` ratio that leaves density above 1.
    pub fn instantiate(&self, id: TaskId, ratios: &[f64], rng: &mut impl Rng) -> Result<DagTask, GenError> {
        let heavy: Vec<f64> =
            ratios.iter().copied().filter(|&r| self.volume > deadline_for(self.longest_path, r)).collect();
        let &ratio = heavy.choose(rng).ok_or(GenError::Density { task: id, attempts: ratios.len() })?;
        let d = deadline_for(self.longest_path, ratio);
        Ok(DagTask::synthesize(
            id,
            self.volume,
            self.longest_path,
            d,
            d,
            self.usage.iter().map(|&(q, n, l)| (q, ResourceUsage::new(n, l))),
        )?)
    }
}

/// `config.tasks` programs drawn with replacement from the dataset.
pub fn gen_openmp_taskset(config: &GenConfig, seed: u64) -> Result<TaskSet, GenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dataset = load_openmp_dataset();
    let tasks = (0..config.tasks)
        .map(|i| dataset.choose(&mut rng).expect("dataset non-empty").instantiate(i, &config.ld_ratios, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let resources: BTreeSet<ResourceId> = tasks.iter().flat_map(|t| t.resources().map(|(q, _)| q)).collect();
    let utilization = tasks
        .iter()
        .fold(BigRational::zero(), |acc, t| acc + BigRational::new(BigInt::from(t.volume()), BigInt::from(t.period())));
    let m = platform_size(&utilization, config.u_norm);
    Ok(TaskSet::new(tasks, resources, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Weak connectivity by graph search over undirected edges.
    fn weakly_connected(n: usize, edges: &[(VertexId, VertexId)]) -> bool {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn components(n: usize, edges: &[(VertexId, VertexId)]) -> usize {
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for &(a, b) in edges {
                let m = label[a].min(label[b]);
                if label[a] != m || label[b] != m {
                    label[a] = m;
                    label[b] = m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        label.into_iter().collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn gen_dag_is_deterministic() {
        let c = GenConfig::desk_scale();
        assert_eq!(gen_dag(&c, &mut rng(3)), gen_dag(&c, &mut rng(3)));
        assert_ne!(gen_dag(&c, &mut rng(3)), gen_dag(&c, &mut rng(4)));
    }

    #[test]
    fn zero_probability_gives_a_chain() {
        let c = GenConfig { edge_probability: 0.0, vertices: Span::fixed(6), ..GenConfig::default() };
        let (_, edges) = gen_dag(&c, &mut rng(0));
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
    }

    #[test]
    fn full_probability_gives_total_order() {
        let c = GenConfig { edge_probability: 1.0, vertices: Span::fixed(8), ..GenConfig::default() };
        let (w, e) = gen_dag(&c, &mut rng(1));
        let t = DagTask::new(0, w, e, Time::MAX, Time::MAX, []).unwrap();
        assert_eq!(t.longest_path(), t.volume());
    }

    #[test]
    fn basic_config_taskset() {
        let c = GenConfig::desk_scale();
        let ts = gen_taskset(&c, 11).unwrap();
        assert_eq!(ts.len(), 4);
        assert_eq!(ts.resources().len(), 4);
        for q in 0..4 {
            let total: u64 = ts.tasks().iter().map(|t| t.usage(q).count).sum();
            assert_eq!(total, 256);
            assert!(ts.tasks().iter().all(|t| t.usage(q).hold_time <= 15));
        }
        for t in ts.tasks() {
            assert!(t.deadline() > t.longest_path());
            assert!(t.volume() > t.deadline());
            assert_eq!(t.period(), t.deadline());
            assert!(t.deadline() == 8 * t.longest_path() || t.deadline() == 4 * t.longest_path());
        }
        // Audit of m by floating-point division far from integer boundaries.
        let u: f64 = ts.tasks().iter().map(|t| t.volume() as f64 / t.period() as f64).sum();
        let m = (u / 0.5).ceil() as u64;
        if ((u / 0.5) - (u / 0.5).round()).abs() > 1e-9 {
            assert_eq!(ts.processors(), m);
        }
        assert_eq!(gen_taskset(&c, 11).unwrap(), ts);
    }

    #[test]
    fn density_failure_is_reported() {
        let c = GenConfig { edge_probability: 1.0, vertices: Span::new(2, 4), max_retries: 5, ..GenConfig::default() };
        assert_eq!(gen_taskset(&c, 0), Err(GenError::Density { task: 0, attempts: 5 }));
    }

    #[test]
    fn decimal_ratio_is_exact() {
        assert_eq!(decimal_ratio(0.1), BigRational::new(1.into(), 10.into()));
        assert_eq!(decimal_ratio(0.5), BigRational::new(1.into(), 2.into()));
        assert_eq!(decimal_ratio(3.0), BigRational::from_integer(3.into()));
        let u = BigRational::new(3.into(), 10.into());
        assert_eq!(platform_size(&u, 0.1), 3);
        assert_eq!(platform_size(&BigRational::zero(), 0.5), 1);
    }

    #[test]
    fn placement_examples() {
        let t = DagTask::new(0, vec![10], vec![], 20, 20, [(0, ResourceUsage::new(2, 3))]).unwrap();
        let p = place_requests(&t, &mut rng(5)).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.iter().any(|r| r.length == 3));
        assert_eq!(p[0].offset_in_vertex, 0);
        assert_eq!(p[1].offset_in_vertex, p[0].length);
        assert!(t.clone().with_placements(p).is_ok());

        let free = DagTask::new(0, vec![10], vec![], 20, 20, []).unwrap();
        assert!(place_requests(&free, &mut rng(5)).unwrap().is_empty());

        let tight = DagTask::new(0, vec![4], vec![], 20, 20, [(0, ResourceUsage::new(2, 3))]).unwrap();
        assert_eq!(place_requests(&tight, &mut rng(0)), Err(GenError::Placement { task: 0, resource: 0 }));
    }

    #[test]
    fn dataset_rows() {
        let d = load_openmp_dataset();
        assert_eq!(d.len(), 8);
        let fib = d.iter().find(|p| p.name == "fib").unwrap();
        assert_eq!((fib.volume, fib.longest_path), (353, 20));
        assert_eq!(fib.usage_of(0), Some(ResourceUsage::new(20, 2)));
        assert_eq!(fib.usage_of(2), Some(ResourceUsage::new(2, 2)));
        assert_eq!(fib.usage_of(1), None);
        let fft = d.iter().find(|p| p.name == "fft").unwrap();
        // Only D = 4L keeps fft heavy.
        let t = fft.instantiate(0, &[0.125, 0.25], &mut rng(0)).unwrap();
        assert_eq!(t.deadline(), 232);
        assert_eq!((t.volume(), t.longest_path()), (274, 58));
        assert!(matches!(fft.instantiate(0, &[0.125], &mut rng(0)), Err(GenError::Density { .. })));
    }

    #[test]
    fn openmp_taskset() {
        let c = GenConfig { tasks: 3, ..GenConfig::default() };
        let ts = gen_openmp_taskset(&c, 2).unwrap();
        assert_eq!(ts.len(), 3);
        assert!(ts.tasks().iter().all(|t| t.volume() > t.deadline()));
        assert_eq!(ts, gen_openmp_taskset(&c, 2).unwrap());
    }

    #[test]
    fn config_file_round_trip() {
        let c = GenConfig { tasks: 6, u_norm: 0.3, vertices: Span::new(10, 30), ..GenConfig::default() };
        assert_eq!(GenConfig::from_config(&c.to_config()).unwrap(), c);
        let parsed = GenConfig::from_config("# desk\ntasks = 2\nmax_hold = 5..60 # inline\n").unwrap();
        assert_eq!(parsed.tasks, 2);
        assert_eq!(parsed.max_hold, Span::new(5, 60));
        assert_eq!(
            GenConfig::from_config("tasks = 2\ncolour = red\n"),
            Err(GenError::Config { line: 2, message: "unknown key `colour`".into() })
        );
        assert_eq!(
            GenConfig::from_config("tasks = two\n"),
            Err(GenError::Config { line: 1, message: "cannot parse `two`".into() })
        );
        assert!(matches!(GenConfig::from_config("tasks = 1\ntasks = 2\n"), Err(GenError::Config { line: 2, .. })));
        assert!(matches!(GenConfig::from_config("wcet = 9..3\n"), Err(GenError::Invalid(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generated_graphs_are_minimal_and_connected(seed in any::<u64>(), p in 0.0f64..0.3) {
            let c = GenConfig { edge_probability: p, vertices: Span::new(1, 40), ..GenConfig::default() };
            let mut r = rng(seed);
            let n = {
                let mut probe = r.clone();
                probe.gen_range(c.vertices.lo..=c.vertices.hi)
            };
            let (w, e) = gen_dag(&c, &mut r);
            prop_assert_eq!(w.len(), n);
            prop_assert!(e.iter().all(|&(a, b)| a < b));
            prop_assert!(weakly_connected(n, &e));
            // Some split into random edges plus appended links uses exactly
            // one link per extra component.
            prop_assert!((0..=e.len()).any(|s| e.len() - s + 1 == components(n, &e[..s])));
            prop_assert!(w.iter().all(|&x| (250..=600).contains(&x)));
        }

        #[test]
        fn placement_audit(seed in any::<u64>(), n in 1u64..20, l in 1u64..10) {
            let t = DagTask::new(0, vec![50, 60, 70], vec![(0, 1), (1, 2)], 400, 400, [(0, ResourceUsage::new(n, l))]).unwrap();
            let p = place_requests(&t, &mut rng(seed)).unwrap();
            prop_assert_eq!(p.len() as u64, n);
            prop_assert_eq!(p.iter().map(|r| r.length).max(), Some(l));
            prop_assert!(p.iter().all(|r| r.length >= 1 && r.length <= l));
            prop_assert!(t.clone().with_placements(p).is_ok());
        }
    }
}
