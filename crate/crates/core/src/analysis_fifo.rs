//! Response-time bound and iterative processor partitioning for FIFO-ordered
//! spin locks.
//!
//! FIFO queues cap how often a single request can be overtaken: by at most
//! `m_j` requests of each competitor and, for the off-path requests of the
//! task itself, by the triangular count captured in [`delta_cap`]. Because
//! the inter-task term depends on the competitors' `m_j`, partitioning
//! iterates until no task changes.

use crate::analysis_unordered::eta_between;
use crate::framework::{
    bound, graham_bound, interference_total, AnalysisError, Bound, InterferenceBound, ResourceTerms, Unschedulable,
    Verdict,
};
use crate::model::{TaskId, TaskSet, Time};

/// `α (m - (α + 1) / 2)` with `α = min(N, m)`; always a multiple of 1/2.
pub fn delta_cap(count: u64, m_i: u64) -> Bound {
    let alpha = count.min(m_i) as i128;
    Bound::new(alpha * (2 * m_i as i128 - alpha - 1), 2)
}

/// Intra-task contribution for `x` key-path requests. Only `x = 0` gets the
/// `Δ` discount.
pub fn fifo_intra(x: u64, count: u64, hold: Time, m_i: u64) -> Result<Bound, AnalysisError> {
    if x > count {
        return Err(AnalysisError::XOutOfRange { x, n: count });
    }
    if m_i == 0 {
        return Err(AnalysisError::ZeroProcessors);
    }
    let base = bound((count - x) * (m_i - 1));
    let discount = if x == 0 { delta_cap(count, m_i) } else { Bound::from_integer(0) };
    Ok((base - discount) * bound(hold))
}

/// A competing task as seen from the analyzed task on one resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Competitor {
    pub task: TaskId,
    pub processors: u64,
    pub eta: u64,
    pub count: u64,
    pub hold: Time,
}

/// `min(m_i η N_j, (N_i + (m_i - 1) x) m_j) L_j` for one competitor.
pub fn fifo_inter_one(x: u64, count_i: u64, m_i: u64, c: &Competitor) -> Time {
    let by_jobs = m_i * c.eta * c.count;
    let by_queue = (count_i + (m_i - 1) * x) * c.processors;
    by_jobs.min(by_queue) * c.hold
}

pub fn fifo_inter(x: u64, count_i: u64, m_i: u64, competitors: &[Competitor]) -> Time {
    competitors.iter().map(|c| fifo_inter_one(x, count_i, m_i, c)).sum()
}

pub(crate) fn competitors(ts: &TaskSet, i: TaskId, q: usize, m: &[u64]) -> Vec<Competitor> {
    (0..ts.len())
        .filter(|&j| j != i)
        .filter_map(|j| {
            let eta = eta_between(ts, i, j, q);
            let u = ts.task(j).usage(q);
            (eta > 0).then_some(Competitor { task: j, processors: m[j], eta, count: u.count, hold: u.hold_time })
        })
        .collect()
}

fn check_m(ts: &TaskSet, m: &[u64]) -> Result<(), AnalysisError> {
    if m.len() != ts.len() {
        return Err(AnalysisError::MVectorLength { expected: ts.len(), got: m.len() });
    }
    if m.contains(&0) {
        return Err(AnalysisError::ZeroProcessors);
    }
    Ok(())
}

pub fn interference_fifo(ts: &TaskSet, i: TaskId, m: &[u64]) -> Result<InterferenceBound, AnalysisError> {
    check_m(ts, m)?;
    let task = ts.task(i);
    let m_i = m[i];
    Ok(interference_total(task.resources().map(|(q, u)| (q, u.count)), |q, x| {
        let own = task.usage(q);
        let intra = fifo_intra(x, own.count, own.hold_time, m_i).expect("x within [0, N]");
        let mut terms = ResourceTerms::intra_only(intra);
        for c in competitors(ts, i, q, m) {
            terms.inter.insert(c.task, bound(fifo_inter_one(x, own.count, m_i, &c)));
        }
        terms
    }))
}

/// Bound for task `i` under a full assignment `m`.
pub fn wcrt_fifo(ts: &TaskSet, i: TaskId, m: &[u64]) -> Result<Bound, AnalysisError> {
    let task = ts.task(i);
    let interference = interference_fifo(ts, i, m)?;
    graham_bound(task.volume(), task.longest_path(), interference.total, m[i])
}

/// Lock-free federated processor count `⌈(C - L) / (D - L)⌉`, at least 1.
pub fn federated_init(ts: &TaskSet, i: TaskId) -> Result<u64, AnalysisError> {
    let t = ts.task(i);
    if t.deadline() <= t.longest_path() {
        return Err(AnalysisError::DeadlineNotAboveLongestPath {
            task: i,
            deadline: t.deadline(),
            longest: t.longest_path(),
        });
    }
    Ok((t.volume() - t.longest_path()).div_ceil(t.deadline() - t.longest_path()).max(1))
}

/// Mutable state of one partitioning run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FifoIterationState {
    pub m: Vec<u64>,
    pub update: bool,
    pub iterations: usize,
}

/// Starts from the lock-free assignment and, sweeping tasks in id order,
/// bumps every task whose bound misses its deadline by one processor. The
/// vector is updated in place, so later tasks in a sweep see earlier bumps.
pub fn partition_fifo(ts: &TaskSet) -> Result<Verdict, AnalysisError> {
    let n = ts.len();
    let mut state = FifoIterationState {
        m: (0..n).map(|i| federated_init(ts, i)).collect::<Result<_, _>>()?,
        update: true,
        iterations: 0,
    };
    while state.update {
        state.update = false;
        state.iterations += 1;
        for i in 0..n {
            let r = wcrt_fifo(ts, i, &state.m)?;
            if r > bound(ts.task(i).deadline()) {
                state.m[i] += 1;
                state.update = true;
            }
        }
        if state.m.iter().sum::<u64>() > ts.processors() {
            return Ok(Verdict {
                assignment: state.m,
                bounds: vec![None; n],
                schedulable: false,
                reason: Some(Unschedulable::BudgetExhausted),
                iterations: state.iterations,
            });
        }
    }
    let bounds = (0..n).map(|i| wcrt_fifo(ts, i, &state.m).map(Some)).collect::<Result<_, _>>()?;
    Ok(Verdict { assignment: state.m, bounds, schedulable: true, reason: None, iterations: state.iterations })
}

/// Checks a fixed assignment without partitioning.
pub fn check_assignment_fifo(ts: &TaskSet, m: &[u64]) -> Result<Verdict, AnalysisError> {
    check_m(ts, m)?;
    let bounds: Vec<Bound> = (0..ts.len()).map(|i| wcrt_fifo(ts, i, m)).collect::<Result<_, _>>()?;
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
