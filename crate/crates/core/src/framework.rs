//! Order-agnostic response-time scaffolding shared by all three analyzers.
//!
//! Every analyzer bounds the same quantity: the interference term `I_i` in
//!
//! ```text
//! R_i <= (C_i + (m_i - 1) L_i + I_i) / m_i
//! I_i  = (m_i - 1) B^{key,intra} + B^{delay,intra} + m_i B^{key,inter} + B^{delay,inter}
//! ```
//!
//! Parallel blocking never enters `I_i`. Per resource, the analyzers express
//! their share of `I_i` as a function of `x`, the unknown number of key-path
//! requests, and [`interference_total`] maximizes it by scanning
//! `x = 0..=N_{i,q}`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use thiserror::Error;

use crate::model::{ResourceId, TaskId, Time};

/// Exact rational time used for every analytical bound.
pub type Bound = Ratio<i128>;

pub fn bound(t: Time) -> Bound {
    Bound::from_integer(t as i128)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("period must be positive")]
    NonPositivePeriod,
    #[error("a task needs at least one processor")]
    ZeroProcessors,
    #[error("x = {x} outside [0, {n}]")]
    XOutOfRange { x: u64, n: u64 },
    #[error("priority-ordered analysis needs a priority order")]
    MissingPriorityOrder,
    #[error("task {task}: deadline {deadline} does not exceed the longest path {longest}")]
    DeadlineNotAboveLongestPath { task: TaskId, deadline: Time, longest: Time },
    #[error("m vector has {got} entries for {expected} tasks")]
    MVectorLength { expected: usize, got: usize },
    #[error("priority search over {tasks} tasks exceeds the permutation cap of {cap}")]
    TooManyTasks { tasks: usize, cap: usize },
}

/// Maximum number of jobs of `τ_j` that can contend with one job of `τ_i`
/// on a resource both of them access: `⌈(D_i + D_j) / T_j⌉`, else 0.
pub fn eta(d_i: Time, d_j: Time, t_j: Time, both_access: bool) -> Result<u64, AnalysisError> {
    if t_j == 0 {
        return Err(AnalysisError::NonPositivePeriod);
    }
    Ok(if both_access { (d_i + d_j).div_ceil(t_j) } else { 0 })
}

/// `(C + (m - 1) L + I) / m`, exact.
pub fn graham_bound(volume: Time, longest: Time, interference: Bound, m: u64) -> Result<Bound, AnalysisError> {
    if m == 0 {
        return Err(AnalysisError::ZeroProcessors);
    }
    let m = m as i128;
    Ok((bound(volume) + bound(longest) * (m - 1) + interference) / m)
}

/// Rounds a bound up to whole time units.
pub fn ceil_time(b: &Bound) -> Time {
    b.ceil().to_integer().max(0) as Time
}

/// Spinning time of one job split by where it happened and who held the
/// lock. `key_*` is spinning by key-path vertices, `delay_*` is spinning
/// while no key-path vertex is busy, `parallel_*` is off-path spinning while
/// a key-path vertex is busy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockingDecomposition {
    pub key_intra: Time,
    pub key_inter: Time,
    pub delay_intra: Time,
    pub delay_inter: Time,
    pub parallel_intra: Time,
    pub parallel_inter: Time,
}

impl BlockingDecomposition {
    pub fn total(&self) -> Time {
        self.key_intra
            + self.key_inter
            + self.delay_intra
            + self.delay_inter
            + self.parallel_intra
            + self.parallel_inter
    }

    pub fn as_tuple(&self) -> (Time, Time, Time, Time, Time, Time) {
        (self.key_intra, self.key_inter, self.delay_intra, self.delay_inter, self.parallel_intra, self.parallel_inter)
    }

    /// Observed `I_i` for a job on `m` processors. Intra-task key-path
    /// blocking is weighted by `m - 1`, inter-task key-path blocking by `m`.
    pub fn interference(&self, m: u64) -> Time {
        let w = InterferenceWeights::for_processors(m);
        w.key_intra * self.key_intra + self.delay_intra + w.key_inter * self.key_inter + self.delay_inter
    }
}

/// Weights of the key-path terms in `I_i`. Kept as named fields so the
/// intra and inter weights cannot be swapped by accident.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterferenceWeights {
    pub key_intra: u64,
    pub key_inter: u64,
}

impl InterferenceWeights {
    pub fn for_processors(m: u64) -> Self {
        Self { key_intra: m.saturating_sub(1), key_inter: m }
    }
}

/// One resource's contribution to `I_i` for a fixed `x`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResourceTerms {
    pub intra: Bound,
    /// Inter-task contribution keyed by the contending task.
    pub inter: BTreeMap<TaskId, Bound>,
}

impl ResourceTerms {
    pub fn intra_only(intra: Bound) -> Self {
        Self { intra, inter: BTreeMap::new() }
    }

    pub fn inter_total(&self) -> Bound {
        self.inter.values().copied().fold(Bound::from_integer(0), |a, b| a + b)
    }

    pub fn total(&self) -> Bound {
        self.intra + self.inter_total()
    }
}

/// The maximized contribution of one resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceInterference {
    pub resource: ResourceId,
    /// Maximizing `x` (lowest on ties).
    pub x_star: u64,
    pub terms: ResourceTerms,
}

impl ResourceInterference {
    pub fn value(&self) -> Bound {
        self.terms.total()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InterferenceBound {
    pub per_resource: Vec<ResourceInterference>,
    pub total: Bound,
}

impl InterferenceBound {
    pub fn resource(&self, q: ResourceId) -> Option<&ResourceInterference> {
        self.per_resource.iter().find(|r| r.resource == q)
    }

    pub fn intra(&self, q: ResourceId) -> Bound {
        self.resource(q).map(|r| r.terms.intra).unwrap_or_default()
    }

    pub fn inter(&self, q: ResourceId) -> Bound {
        self.resource(q).map(|r| r.terms.inter_total()).unwrap_or_default()
    }

    pub fn contribution(&self, q: ResourceId, j: TaskId) -> Bound {
        self.resource(q).and_then(|r| r.terms.inter.get(&j).copied()).unwrap_or_default()
    }
}

/// Why a partitioning run gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unschedulable {
    /// The closed-form processor count has a non-positive denominator: no
    /// number of processors makes this task meet its deadline.
    DenominatorNonpositive { task: TaskId },
    /// The processors requested so far exceed the platform.
    BudgetExhausted,
}

/// Result of a processor-partitioning run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// `m_i` per task; tasks never reached by a failed run hold 0.
    pub assignment: Vec<u64>,
    /// `R_i` under the final assignment, where one was computed.
    pub bounds: Vec<Option<Bound>>,
    pub schedulable: bool,
    pub reason: Option<Unschedulable>,
    /// Sweeps or search steps taken (1 for single-pass algorithms).
    pub iterations: usize,
}

impl Verdict {
    pub fn processors_used(&self) -> u64 {
        self.assignment.iter().sum()
    }
}

/// Scans `x = 0..=n` and returns the lowest maximizer of `f` with its value.
pub fn max_over_x<F>(n: u64, mut f: F) -> (u64, Bound)
where
    F: FnMut(u64) -> Bound,
{
    let mut best = (0, f(0));
    for x in 1..=n {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// `Σ_q max_{x ∈ [0, N_q]} f(q, x)`, keeping the maximizing breakdown per
/// resource.
pub fn interference_total<L, F>(limits: L, mut per_resource: F) -> InterferenceBound
where
    L: IntoIterator<Item = (ResourceId, u64)>,
    F: FnMut(ResourceId, u64) -> ResourceTerms,
{
    let mut out = InterferenceBound::default();
    for (q, n) in limits {
        let mut best_x = 0;
        let mut best = per_resource(q, 0);
        let mut best_value = best.total();
        for x in 1..=n {
            let terms = per_resource(q, x);
            let value = terms.total();
            if value > best_value {
                best_x = x;
                best = terms;
                best_value = value;
            }
        }
        out.total += best_value;
        out.per_resource.push(ResourceInterference { resource: q, x_star: best_x, terms: best });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i128, d: i128) -> Bound {
        Bound::new(n, d)
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(10, 10, 10, true), Ok(2));
        assert_eq!(eta(10, 10, 10, false), Ok(0));
        assert_eq!(eta(5, 3, 4, true), Ok(2));
        assert_eq!(eta(5, 3, 0, true), Err(AnalysisError::NonPositivePeriod));
    }

    #[test]
    fn graham_examples() {
        assert_eq!(graham_bound(10, 5, bound(0), 3), Ok(r(20, 3)));
        assert_eq!(graham_bound(10, 5, bound(17), 2), Ok(bound(16)));
        assert_eq!(graham_bound(9, 9, bound(0), 1), Ok(bound(9)));
        assert_eq!(graham_bound(9, 9, bound(0), 0), Err(AnalysisError::ZeroProcessors));
    }

    #[test]
    fn constant_maximand_picks_lowest_x() {
        let b = interference_total([(0, 3)], |_, _| ResourceTerms::intra_only(bound(7)));
        assert_eq!(b.total, bound(7));
        assert_eq!(b.per_resource[0].x_star, 0);
    }

    #[test]
    fn fifo_intra_shape_maximized_at_one() {
        // Independent evaluation of ((N - x)(m - 1) - [x = 0] Δ) L for
        // N = 3, m = 4, L = 2, Δ = 3 (4 - 2) = 6.
        let table = [6, 12, 6, 0];
        let b = interference_total([(0, 3)], |_, x| ResourceTerms::intra_only(bound(table[x as usize])));
        assert_eq!(b.total, bound(12));
        assert_eq!(b.per_resource[0].x_star, 1);
    }

    #[test]
    fn additive_over_resources() {
        let b = interference_total([(0, 2), (1, 4)], |q, x| {
            let peak = if q == 0 { 5 } else { 9 };
            ResourceTerms::intra_only(bound(if x == 1 { peak } else { 0 }))
        });
        assert_eq!(b.total, bound(14));
        assert_eq!(b.intra(1), bound(9));
        assert_eq!(b.inter(1), bound(0));
    }

    #[test]
    fn breakdown_is_kept() {
        let b = interference_total([(2, 1)], |_, x| {
            let mut t = ResourceTerms::intra_only(bound(x));
            t.inter.insert(5, bound(3 * x));
            t
        });
        assert_eq!(b.contribution(2, 5), bound(3));
        assert_eq!(b.intra(2), bound(1));
        assert_eq!(b.total, bound(4));
    }

    #[test]
    fn decomposition_weights() {
        let d = BlockingDecomposition {
            key_intra: 2,
            key_inter: 1,
            delay_intra: 1,
            delay_inter: 2,
            parallel_intra: 1,
            parallel_inter: 1,
        };
        assert_eq!(d.total(), 8);
        // (3 - 1) * 2 + 1 + 3 * 1 + 2
        assert_eq!(d.interference(3), 10);
    }

    proptest! {
        #[test]
        fn graham_non_increasing_in_m(l in 0u64..100, extra in 0u64..100, i in 0i128..500, m in 1u64..64) {
            let c = l + extra;
            let a = graham_bound(c, l, bound(i as u64), m).unwrap();
            let b = graham_bound(c, l, bound(i as u64), m + 1).unwrap();
            prop_assert!(b <= a);
        }

        #[test]
        fn superset_range_never_decreases(vals in proptest::collection::vec(0i128..1000, 1..20), extra in 0usize..10) {
            let n = vals.len() as u64 - 1;
            let mut wide = vals.clone();
            wide.extend(std::iter::repeat_n(0, extra));
            let narrow = interference_total([(0, n)], |_, x| ResourceTerms::intra_only(Bound::from_integer(vals[x as usize])));
            let broad = interference_total([(0, n + extra as u64)], |_, x| ResourceTerms::intra_only(Bound::from_integer(wide[x as usize])));
            prop_assert!(broad.total >= narrow.total);
            let brute = vals.iter().copied().max().unwrap();
            prop_assert_eq!(narrow.total, Bound::from_integer(brute));
        }
    }
}
