//! Response-time bound, processor search and priority-assignment search for
//! priority-ordered spin locks.
//!
//! Requests of one task share that task's locking priority and are FIFO among
//! themselves, so the intra-task term is the FIFO one. Across tasks, a request
//! waits for at most one lower-priority critical section, and for the
//! higher-priority requests issued while it waits. The waiting window is the
//! delay-per-request `dpr(τ_i, ℓ_q)`, found as a least fixed point:
//!
//! ```text
//! t = max_{j ∈ lower} L_{j,q}
//!   + (min(N_{i,q}, m_i) - 1) L_{i,q}
//!   + Σ_{j ∈ higher} ⌈(t + D_j) / T_j⌉ N_{j,q} L_{j,q}
//! ```
//!
//! This recurrence is an implementation choice: one non-preemptive
//! lower-priority section, the task's own requests queued ahead (at most one
//! per other processor), and every higher-priority request of any job that
//! can overlap the window. Any over-approximation of `dpr` keeps the bound
//! safe. When the iteration passes `D_i` the window is declared divergent and
//! the higher-priority term falls back to `m_i η N_{j,q} L_{j,q}`.

use std::collections::BTreeMap;

use crate::analysis_fifo::{federated_init, fifo_intra};
use crate::analysis_unordered::eta_between;
use crate::framework::{
    bound, graham_bound, interference_total, AnalysisError, Bound, InterferenceBound, ResourceTerms, Unschedulable,
    Verdict,
};
use crate::model::{ResourceId, TaskId, TaskSet, Time};

/// Default upper limit on tasks for exhaustive priority search (8! orders).
pub const DEFAULT_PERMUTATION_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dpr {
    Converged(Time),
    /// Exceeded the analyzed task's deadline.
    Divergent,
}

impl Dpr {
    pub fn value(&self) -> Option<Time> {
        match self {
            Dpr::Converged(t) => Some(*t),
            Dpr::Divergent => None,
        }
    }
}

/// Everything the priority-ordered bound needs about one `(τ_i, ℓ_q)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityContext {
    pub task: TaskId,
    pub resource: ResourceId,
    pub higher: Vec<TaskId>,
    pub lower: Vec<TaskId>,
    pub dpr: Dpr,
    /// `varDelta_{i,j}^q` per higher-priority task; absent when divergent.
    pub var_delta: BTreeMap<TaskId, u64>,
}

fn split_by_priority(ts: &TaskSet, i: TaskId) -> Result<(Vec<TaskId>, Vec<TaskId>), AnalysisError> {
    let order = ts.priority_order().ok_or(AnalysisError::MissingPriorityOrder)?;
    let pos = order.iter().position(|&t| t == i).expect("order is a permutation");
    let mut higher = order[..pos].to_vec();
    let mut lower = order[pos + 1..].to_vec();
    higher.sort_unstable();
    lower.sort_unstable();
    Ok((higher, lower))
}

fn max_lower_hold(ts: &TaskSet, lower: &[TaskId], q: ResourceId) -> (Option<TaskId>, Time) {
    lower
        .iter()
        .map(|&j| (j, ts.task(j).usage(q).hold_time))
        .filter(|&(j, _)| ts.task(j).accesses(q))
        .fold((None, 0), |best, (j, h)| if h > best.1 { (Some(j), h) } else { best })
}

/// Least fixed point of the delay-per-request recurrence for task `i` on
/// resource `q` with `m_i` processors.
pub fn dpr_fixpoint(ts: &TaskSet, i: TaskId, q: ResourceId, m_i: u64) -> Result<Dpr, AnalysisError> {
    let (higher, lower) = split_by_priority(ts, i)?;
    let task = ts.task(i);
    let own = task.usage(q);
    let base = max_lower_hold(ts, &lower, q).1 + own.count.min(m_i).saturating_sub(1) * own.hold_time;
    let deadline = task.deadline();
    let higher: Vec<_> = higher.into_iter().map(|j| ts.task(j)).filter(|t| t.accesses(q)).collect();

    let mut t = base;
    loop {
        if t > deadline {
            return Ok(Dpr::Divergent);
        }
        let next = base
            + higher.iter().map(|tj| (t + tj.deadline()).div_ceil(tj.period()) * tj.usage(q).demand()).sum::<Time>();
        if next == t {
            return Ok(Dpr::Converged(t));
        }
        t = next;
    }
}

/// Jobs of `τ_j` that can contend with one request whose wait is `dpr`.
pub fn var_delta(dpr: Time, d_j: Time, t_j: Time, both_access: bool) -> u64 {
    if both_access {
        (dpr + d_j).div_ceil(t_j)
    } else {
        0
    }
}

pub fn priority_context(ts: &TaskSet, i: TaskId, q: ResourceId, m_i: u64) -> Result<PriorityContext, AnalysisError> {
    let (higher, lower) = split_by_priority(ts, i)?;
    let dpr = dpr_fixpoint(ts, i, q, m_i)?;
    let mut var_delta_map = BTreeMap::new();
    if let Dpr::Converged(t) = dpr {
        for &j in &higher {
            let tj = ts.task(j);
            let both = ts.task(i).accesses(q) && tj.accesses(q);
            var_delta_map.insert(j, var_delta(t, tj.deadline(), tj.period(), both));
        }
    }
    Ok(PriorityContext { task: i, resource: q, higher, lower, dpr, var_delta: var_delta_map })
}

/// Same contract as the FIFO intra-task term.
pub fn priority_intra(x: u64, count: u64, hold: Time, m_i: u64) -> Result<Bound, AnalysisError> {
    fifo_intra(x, count, hold, m_i)
}

/// Inter-task term keyed by contending task. The lower-priority share is
/// attributed to the lower task with the longest section (lowest id on ties).
pub fn priority_inter_terms(x: u64, ts: &TaskSet, m_i: u64, ctx: &PriorityContext) -> BTreeMap<TaskId, Time> {
    let i = ctx.task;
    let q = ctx.resource;
    let n_i = ts.task(i).usage(q).count;
    let requests = n_i + m_i.saturating_sub(1) * x;
    let mut out = BTreeMap::new();
    if n_i == 0 {
        return out;
    }
    if let (Some(j), hold) = max_lower_hold(ts, &ctx.lower, q) {
        out.insert(j, requests * hold);
    }
    for &j in &ctx.higher {
        let u = ts.task(j).usage(q);
        let eta = eta_between(ts, i, j, q);
        if eta == 0 {
            continue;
        }
        let by_jobs = m_i * eta * u.count;
        let count = match ctx.var_delta.get(&j) {
            Some(&vd) => by_jobs.min(requests * vd * u.count),
            None => by_jobs,
        };
        out.insert(j, count * u.hold_time);
    }
    out
}

/// `P_L(x) + P_H(x)`.
pub fn priority_inter(x: u64, ts: &TaskSet, m_i: u64, ctx: &PriorityContext) -> Time {
    priority_inter_terms(x, ts, m_i, ctx).values().sum()
}

pub fn interference_priority(ts: &TaskSet, i: TaskId, m_i: u64) -> Result<InterferenceBound, AnalysisError> {
    if m_i == 0 {
        return Err(AnalysisError::ZeroProcessors);
    }
    if ts.priority_order().is_none() {
        return Err(AnalysisError::MissingPriorityOrder);
    }
    let task = ts.task(i);
    let contexts = task
        .resources()
        .map(|(q, _)| priority_context(ts, i, q, m_i).map(|c| (q, c)))
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(interference_total(task.resources().map(|(q, u)| (q, u.count)), |q, x| {
        let own = task.usage(q);
        let mut terms =
            ResourceTerms::intra_only(priority_intra(x, own.count, own.hold_time, m_i).expect("x within [0, N]"));
        for (j, v) in priority_inter_terms(x, ts, m_i, &contexts[&q]) {
            terms.inter.insert(j, bound(v));
        }
        terms
    }))
}

pub fn wcrt_priority(ts: &TaskSet, i: TaskId, m_i: u64) -> Result<Bound, AnalysisError> {
    let task = ts.task(i);
    let interference = interference_priority(ts, i, m_i)?;
    graham_bound(task.volume(), task.longest_path(), interference.total, m_i)
}

/// Per task, the smallest `m_i` at or above the lock-free count whose bound
/// meets the deadline, giving up once `m_i` exceeds the platform.
pub fn partition_priority(ts: &TaskSet) -> Result<Verdict, AnalysisError> {
    if ts.priority_order().is_none() {
        return Err(AnalysisError::MissingPriorityOrder);
    }
    let n = ts.len();
    let mut assignment = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    let mut steps = 0;
    for i in 0..n {
        let deadline = bound(ts.task(i).deadline());
        let mut m_i = federated_init(ts, i)?;
        let mut last = None;
        while m_i <= ts.processors() {
            steps += 1;
            let r = wcrt_priority(ts, i, m_i)?;
            if r <= deadline {
                last = Some(r);
                break;
            }
            m_i += 1;
        }
        assignment.push(m_i);
        bounds.push(last);
    }
    let schedulable = assignment.iter().sum::<u64>() <= ts.processors() && bounds.iter().all(Option::is_some);
    Ok(Verdict {
        assignment,
        bounds,
        schedulable,
        reason: (!schedulable).then_some(Unschedulable::BudgetExhausted),
        iterations: steps,
    })
}

/// Checks a fixed assignment under the task set's priority order.
pub fn check_assignment_priority(ts: &TaskSet, m: &[u64]) -> Result<Verdict, AnalysisError> {
    if m.len() != ts.len() {
        return Err(AnalysisError::MVectorLength { expected: ts.len(), got: m.len() });
    }
    let bounds: Vec<Bound> = (0..ts.len()).map(|i| wcrt_priority(ts, i, m[i])).collect::<Result<_, _>>()?;
    let meets = bounds.iter().enumerate().all(|(i, r)| *r <= bound(ts.task(i).deadline()));
    let fits = m.iter().sum::<u64>() <= ts.processors();
    Ok(Verdict {
        assignment: m.to_vec(),
        bounds: bounds.into_iter().map(Some).collect(),
        schedulable: meets && fits,
        reason: (!fits).then_some(Unschedulable::BudgetExhausted),
        iterations: 1,
    })
}

/// Rearranges `v` into the next lexicographic permutation; false after the
/// last one.
fn next_permutation(v: &mut [TaskId]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Outcome of an exhaustive priority search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritySearch {
    /// First schedulable order in lexicographic order, highest priority first.
    pub order: Option<Vec<TaskId>>,
    pub verdict: Option<Verdict>,
    pub orders_tried: usize,
}

/// Tries every priority order in lexicographic order of task ids and stops
/// at the first one under which [`partition_priority`] succeeds.
pub fn search_priority_assignment(ts: &TaskSet, cap: usize) -> Result<PrioritySearch, AnalysisError> {
    let n = ts.len();
    if n > cap {
        return Err(AnalysisError::TooManyTasks { tasks: n, cap });
    }
    let mut order: Vec<TaskId> = (0..n).collect();
    let mut tried = 0;
    loop {
        tried += 1;
        let candidate = ts.clone().with_priority_order(order.clone()).expect("permutation of task ids");
        let verdict = partition_priority(&candidate)?;
        if verdict.schedulable {
            return Ok(PrioritySearch { order: Some(order), verdict: Some(verdict), orders_tried: tried });
        }
        if !next_permutation(&mut order) {
            return Ok(PrioritySearch { order: None, verdict: None, orders_tried: tried });
        }
    }
}
