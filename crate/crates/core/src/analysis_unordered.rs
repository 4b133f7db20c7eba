//! Response-time bound and processor partitioning when lock requests are
//! served in no particular order.
//!
//! Nothing is assumed about queue discipline, so every request of `τ_i` may
//! spin for every competing critical section: intra-task contention costs at
//! most `(m_i - 1) N_{i,q} L_{i,q}` and each competitor `τ_j` at most
//! `m_i η N_{j,q} L_{j,q}`, independent of `x`.

use crate::framework::{
    bound, eta, graham_bound, interference_total, AnalysisError, Bound, InterferenceBound, ResourceTerms,
    Unschedulable, Verdict,
};
use crate::model::{TaskId, TaskSet, Time};

pub fn intra_bound_unordered(count: u64, hold: Time, m_i: u64) -> Time {
    m_i.saturating_sub(1) * count * hold
}

pub fn inter_bound_unordered(m_i: u64, eta: u64, count_j: u64, hold_j: Time) -> Time {
    m_i * eta * count_j * hold_j
}

/// `η_{i,j}^q` for tasks of `ts`.
pub(crate) fn eta_between(ts: &TaskSet, i: TaskId, j: TaskId, q: usize) -> u64 {
    let (ti, tj) = (ts.task(i), ts.task(j));
    eta(ti.deadline(), tj.deadline(), tj.period(), ti.accesses(q) && tj.accesses(q))
        .expect("validated tasks have positive periods")
}

/// `Σ_{j≠i} Σ_{q∈Θ_i} η N_{j,q} L_{j,q}`; does not depend on `m_i`.
pub fn inter_demand(ts: &TaskSet, i: TaskId) -> Time {
    let task = ts.task(i);
    task.resources()
        .map(|(q, _)| {
            (0..ts.len())
                .filter(|&j| j != i)
                .map(|j| eta_between(ts, i, j, q) * ts.task(j).usage(q).demand())
                .sum::<Time>()
        })
        .sum()
}

/// `Σ_{q∈Θ_i} N_{i,q} L_{i,q}`.
pub fn own_demand(ts: &TaskSet, i: TaskId) -> Time {
    ts.task(i).resources().map(|(_, u)| u.demand()).sum()
}

pub fn interference_unordered(ts: &TaskSet, i: TaskId, m_i: u64) -> InterferenceBound {
    let task = ts.task(i);
    interference_total(task.resources().map(|(q, u)| (q, u.count)), |q, _x| {
        let own = task.usage(q);
        let mut terms = ResourceTerms::intra_only(bound(intra_bound_unordered(own.count, own.hold_time, m_i)));
        for j in (0..ts.len()).filter(|&j| j != i) {
            let other = ts.task(j).usage(q);
            let eta = eta_between(ts, i, j, q);
            if eta > 0 {
                terms.inter.insert(j, bound(inter_bound_unordered(m_i, eta, other.count, other.hold_time)));
            }
        }
        terms
    })
}

pub fn wcrt_unordered(ts: &TaskSet, i: TaskId, m_i: u64) -> Result<Bound, AnalysisError> {
    let task = ts.task(i);
    let interference = interference_unordered(ts, i, m_i);
    graham_bound(task.volume(), task.longest_path(), interference.total, m_i)
}

/// Smallest `m_i` meeting the deadline, in closed form.
pub fn min_processors_unordered(ts: &TaskSet, i: TaskId) -> Result<u64, Unschedulable> {
    let task = ts.task(i);
    let serial = task.longest_path() + own_demand(ts, i);
    let reserved = inter_demand(ts, i) + serial;
    if task.deadline() <= reserved {
        return Err(Unschedulable::DenominatorNonpositive { task: i });
    }
    let slack = task.deadline() - reserved;
    let m = task.volume().saturating_sub(serial).div_ceil(slack);
    Ok(m.max(1))
}

/// Tasks are visited in id order; the first infeasible task or an exhausted
/// budget ends the run.
pub fn partition_unordered(ts: &TaskSet) -> Verdict {
    let n = ts.len();
    let mut verdict =
        Verdict { assignment: vec![0; n], bounds: vec![None; n], schedulable: false, reason: None, iterations: 1 };
    let mut available = ts.processors();
    for i in 0..n {
        let m_i = match min_processors_unordered(ts, i) {
            Ok(m) => m,
            Err(reason) => {
                verdict.reason = Some(reason);
                return verdict;
            }
        };
        if m_i > available {
            verdict.reason = Some(Unschedulable::BudgetExhausted);
            return verdict;
        }
        available -= m_i;
        verdict.assignment[i] = m_i;
        verdict.bounds[i] = Some(wcrt_unordered(ts, i, m_i).expect("m_i >= 1"));
    }
    verdict.schedulable = true;
    verdict
}

/// Checks a fixed assignment without partitioning.
pub fn check_assignment_unordered(ts: &TaskSet, m: &[u64]) -> Result<Verdict, AnalysisError> {
    if m.len() != ts.len() {
        return Err(AnalysisError::MVectorLength { expected: ts.len(), got: m.len() });
    }
    if m.contains(&0) {
        return Err(AnalysisError::ZeroProcessors);
    }
    let bounds: Vec<Bound> = (0..ts.len()).map(|i| wcrt_unordered(ts, i, m[i])).collect::<Result<_, _>>()?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DagTask, ResourceUsage};

    fn two_task_set() -> TaskSet {
        let t1 = DagTask::synthesize(0, 10, 5, 20, 20, [(0, ResourceUsage::new(2, 1))]).unwrap();
        let t2 = DagTask::synthesize(1, 40, 10, 20, 20, [(0, ResourceUsage::new(3, 2))]).unwrap();
        TaskSet::new(vec![t1, t2], [0], 16).unwrap()
    }

    /// The closed-form theorem expression, written out term by term.
    fn theorem_oracle(c: i128, l: i128, m: i128, own: &[(i128, i128)], inter: &[(i128, i128, i128)]) -> Bound {
        let own_sum: i128 = own.iter().map(|(n, h)| n * h).sum();
        let inter_sum: i128 = inter.iter().map(|(eta, n, h)| eta * n * h).sum();
        Bound::new(c + (m - 1) * (l + own_sum), m) + Bound::from_integer(inter_sum)
    }

    #[test]
    fn formula_examples() {
        assert_eq!(intra_bound_unordered(2, 1, 2), 2);
        assert_eq!(intra_bound_unordered(9, 9, 1), 0);
        assert_eq!(intra_bound_unordered(3, 2, 4), 18);
        assert_eq!(inter_bound_unordered(2, 2, 3, 2), 24);
        assert_eq!(inter_bound_unordered(5, 0, 3, 2), 0);
        assert_eq!(inter_bound_unordered(1, 1, 1, 7), 7);
    }

    #[test]
    fn lock_free_reduces_to_graham() {
        let t = DagTask::synthesize(0, 10, 5, 20, 20, []).unwrap();
        let ts = TaskSet::new(vec![t], [], 4).unwrap();
        assert_eq!(wcrt_unordered(&ts, 0, 3), Ok(Bound::new(20, 3)));
        assert_eq!(wcrt_unordered(&ts, 0, 1), Ok(bound(10)));
    }

    #[test]
    fn two_task_example() {
        let ts = two_task_set();
        let expected = theorem_oracle(10, 5, 2, &[(2, 1)], &[(2, 3, 2)]);
        assert_eq!(expected, Bound::new(41, 2));
        assert_eq!(wcrt_unordered(&ts, 0, 2), Ok(expected));
    }

    #[test]
    fn min_processors_examples() {
        let t = DagTask::synthesize(0, 10, 5, 6, 6, []).unwrap();
        let ts = TaskSet::new(vec![t], [], 8).unwrap();
        assert_eq!(min_processors_unordered(&ts, 0), Ok(5));

        let t = DagTask::synthesize(0, 10, 5, 8, 7, [(0, ResourceUsage::new(2, 1))]).unwrap();
        let ts = TaskSet::new(vec![t], [0], 8).unwrap();
        assert_eq!(min_processors_unordered(&ts, 0), Err(Unschedulable::DenominatorNonpositive { task: 0 }));
    }

    #[test]
    fn partition_paths() {
        let ts = two_task_set();
        let v = partition_unordered(&ts);
        assert!(!v.schedulable);
        assert_eq!(v.reason, Some(Unschedulable::DenominatorNonpositive { task: 1 }));

        let empty = TaskSet::new(vec![], [], 1).unwrap();
        let v = partition_unordered(&empty);
        assert!(v.schedulable);
        assert_eq!(v.processors_used(), 0);

        let a = DagTask::synthesize(0, 100, 10, 50, 50, []).unwrap();
        let b = DagTask::synthesize(1, 100, 10, 50, 50, []).unwrap();
        let ts = TaskSet::new(vec![a, b], [], 6).unwrap();
        let v = partition_unordered(&ts);
        assert!(v.schedulable);
        assert_eq!(v.assignment, vec![3, 3]);
        assert!(v.bounds.iter().all(|b| b.unwrap() <= bound(50)));
        let tight = ts.with_processors(5).unwrap();
        assert_eq!(partition_unordered(&tight).reason, Some(Unschedulable::BudgetExhausted));
    }

    #[test]
    fn fixed_assignment_check() {
        let a = DagTask::synthesize(0, 100, 10, 50, 50, [(0, ResourceUsage::new(2, 1))]).unwrap();
        let b = DagTask::synthesize(1, 100, 10, 50, 50, [(0, ResourceUsage::new(1, 2))]).unwrap();
        let ts = TaskSet::new(vec![a, b], [0], 16).unwrap();
        let partitioned = partition_unordered(&ts);
        let checked = check_assignment_unordered(&ts, &partitioned.assignment).unwrap();
        assert!(checked.schedulable);
        assert_eq!(checked.bounds, partitioned.bounds);
        let small = check_assignment_unordered(&ts, &[1, 1]).unwrap();
        assert!(!small.schedulable);
        assert!(matches!(check_assignment_unordered(&ts, &[1]), Err(AnalysisError::MVectorLength { .. })));
        assert!(matches!(check_assignment_unordered(&ts, &[0, 1]), Err(AnalysisError::ZeroProcessors)));
    }
}
