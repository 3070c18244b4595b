//! Single-pass execution of the threshold algorithms against one realization.
//!
//! All single-selection rules share one shape: compute `BSF(tau)`, then
//! accept the earliest post-`tau` arrival whose weight meets a (possibly
//! time-dependent) threshold. The kernels below therefore scan the elements
//! once and keep the earliest qualifying arrival, without sorting.

use std::cmp::Ordering;

use crate::error::{check_non_negative, check_tau, ensure, Error, Result};
use crate::model::{
    arrives_before, bsf_unchecked, check_matching, Acceptance, ArrivalDraw, SelectionOutcome,
    WeightProfile,
};

/// Waiting time `tau` and hedging window `gamma` of the robust-consistent
/// rule. The gap is trusted on `(tau, 1 - gamma]` and ignored afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySchedule {
    tau: f64,
    gamma: f64,
}

impl PolicySchedule {
    pub fn new(tau: f64, gamma: f64) -> Result<Self> {
        check_tau(tau)?;
        ensure(
            gamma >= 0.0 && gamma < 1.0 - tau,
            "gamma",
            "[0,1-tau)",
            gamma,
        )?;
        Ok(Self { tau, gamma })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Time `1 - gamma` after which the gap is dropped.
    pub fn switch_time(&self) -> f64 {
        1.0 - self.gamma
    }
}

/// Earliest element with `t > tau` for which `accepts(t, w)` holds.
#[inline]
fn earliest_accepted(
    weights: &[f64],
    times: &[f64],
    tau: f64,
    accepts: impl Fn(f64, f64) -> bool,
) -> SelectionOutcome {
    let mut best: Option<Acceptance> = None;
    for (index, (&weight, &time)) in weights.iter().zip(times).enumerate() {
        if time <= tau || !accepts(time, weight) {
            continue;
        }
        let earlier = match best {
            None => true,
            Some(b) => arrives_before(time, index, b.time, b.index) == Ordering::Less,
        };
        if earlier {
            best = Some(Acceptance {
                index,
                weight,
                time,
            });
        }
    }
    SelectionOutcome { accepted: best }
}

pub(crate) fn classical_kernel(weights: &[f64], times: &[f64], tau: f64) -> SelectionOutcome {
    let bsf = bsf_unchecked(weights, times, tau);
    earliest_accepted(weights, times, tau, |_, w| w >= bsf)
}

pub(crate) fn strict_kernel(weights: &[f64], times: &[f64], tau: f64) -> SelectionOutcome {
    let bsf = bsf_unchecked(weights, times, tau);
    earliest_accepted(weights, times, tau, |_, w| w > bsf)
}

pub(crate) fn exact_gap_kernel(
    weights: &[f64],
    times: &[f64],
    tau: f64,
    c: f64,
) -> SelectionOutcome {
    let threshold = bsf_unchecked(weights, times, tau).max(c);
    earliest_accepted(weights, times, tau, |_, w| w >= threshold)
}

pub(crate) fn robust_kernel(
    weights: &[f64],
    times: &[f64],
    schedule: PolicySchedule,
    c_hat: f64,
) -> SelectionOutcome {
    let bsf = bsf_unchecked(weights, times, schedule.tau);
    let trusting = bsf.max(c_hat);
    let switch = schedule.switch_time();
    earliest_accepted(weights, times, schedule.tau, |t, w| {
        if t <= switch {
            w >= trusting
        } else {
            w >= bsf
        }
    })
}

/// Effective additive threshold of the bounded-error rule, clamped at 0.
pub fn bounded_error_threshold(c_tilde: f64, epsilon: f64) -> f64 {
    (c_tilde - epsilon).max(0.0)
}

fn checked(profile: &WeightProfile, arrivals: &ArrivalDraw, tau: f64) -> Result<()> {
    check_matching(profile, arrivals)?;
    check_tau(tau)
}

/// Classical secretary rule: accept the first post-`tau` element with
/// weight `>= BSF(tau)`.
pub fn run_classical(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
) -> Result<SelectionOutcome> {
    checked(profile, arrivals, tau)?;
    Ok(classical_kernel(profile.weights(), arrivals.times(), tau))
}

/// Exact-gap rule: threshold `max(BSF(tau), c)`.
pub fn run_exact_gap(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
    c: f64,
) -> Result<SelectionOutcome> {
    checked(profile, arrivals, tau)?;
    check_non_negative("gap", c)?;
    Ok(exact_gap_kernel(
        profile.weights(),
        arrivals.times(),
        tau,
        c,
    ))
}

/// Robust-consistent rule: threshold `max(BSF(tau), c_hat)` up to and
/// including time `1 - gamma`, `BSF(tau)` afterwards.
pub fn run_robust_consistent(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    schedule: PolicySchedule,
    c_hat: f64,
) -> Result<SelectionOutcome> {
    check_matching(profile, arrivals)?;
    check_non_negative("gap", c_hat)?;
    Ok(robust_kernel(
        profile.weights(),
        arrivals.times(),
        schedule,
        c_hat,
    ))
}

/// Bounded-error rule: threshold `max(BSF(tau), c_tilde - epsilon)`, with
/// a negative gap term clamped to 0.
pub fn run_bounded_error(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
    c_tilde: f64,
    epsilon: f64,
) -> Result<SelectionOutcome> {
    checked(profile, arrivals, tau)?;
    check_non_negative("gap", c_tilde)?;
    check_non_negative("epsilon", epsilon)?;
    let c = bounded_error_threshold(c_tilde, epsilon);
    Ok(exact_gap_kernel(
        profile.weights(),
        arrivals.times(),
        tau,
        c,
    ))
}

/// Classical rule with strict comparison: ties with `BSF(tau)` are rejected.
pub fn run_strict_classical(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
) -> Result<SelectionOutcome> {
    checked(profile, arrivals, tau)?;
    Ok(strict_kernel(profile.weights(), arrivals.times(), tau))
}

/// The single-selection rules as one dispatchable value. `gap` passed to
/// [`run`](Self::run) is `c`, `c_hat` or `c_tilde` depending on the rule and
/// is ignored by the classical variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleSelection {
    Classical { tau: f64 },
    StrictClassical { tau: f64 },
    ExactGap { tau: f64 },
    BoundedError { tau: f64, epsilon: f64 },
    RobustConsistent { schedule: PolicySchedule },
}

impl SingleSelection {
    pub fn tau(&self) -> f64 {
        match *self {
            Self::Classical { tau }
            | Self::StrictClassical { tau }
            | Self::ExactGap { tau }
            | Self::BoundedError { tau, .. } => tau,
            Self::RobustConsistent { schedule } => schedule.tau(),
        }
    }

    pub fn uses_gap(&self) -> bool {
        !matches!(self, Self::Classical { .. } | Self::StrictClassical { .. })
    }

    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau())?;
        if let Self::BoundedError { epsilon, .. } = *self {
            check_non_negative("epsilon", epsilon)?;
        }
        if let Self::RobustConsistent { schedule } = *self {
            PolicySchedule::new(schedule.tau(), schedule.gamma())?;
        }
        Ok(())
    }

    pub fn run(
        &self,
        profile: &WeightProfile,
        arrivals: &ArrivalDraw,
        gap: f64,
    ) -> Result<SelectionOutcome> {
        self.validate()?;
        check_matching(profile, arrivals)?;
        if self.uses_gap() {
            check_non_negative("gap", gap)?;
        }
        Ok(self.run_slices(profile.weights(), arrivals.times(), gap))
    }

    /// Unchecked variant for hot loops; inputs must already be validated.
    pub(crate) fn run_slices(&self, weights: &[f64], times: &[f64], gap: f64) -> SelectionOutcome {
        match *self {
            Self::Classical { tau } => classical_kernel(weights, times, tau),
            Self::StrictClassical { tau } => strict_kernel(weights, times, tau),
            Self::ExactGap { tau } => exact_gap_kernel(weights, times, tau, gap),
            Self::BoundedError { tau, epsilon } => {
                exact_gap_kernel(weights, times, tau, bounded_error_threshold(gap, epsilon))
            }
            Self::RobustConsistent { schedule } => robust_kernel(weights, times, schedule, gap),
        }
    }
}

/// One member of the L-selection reference set. Placeholders stand in for
/// missing members while fewer than `L` real elements are tracked; they
/// have weight 0 and count as having arrived before `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMember {
    pub element: Option<usize>,
    pub weight: f64,
    pub before_tau: bool,
}

impl ReferenceMember {
    const PLACEHOLDER: Self = Self {
        element: None,
        weight: 0.0,
        before_tau: true,
    };

    /// Ordering inside the reference set: heavier first, real elements
    /// before placeholders, then lower element index.
    fn outranks(&self, other: &Self) -> bool {
        match self.weight.total_cmp(&other.weight) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match (self.element, other.element) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                (None, _) => false,
            },
        }
    }
}

/// Reference set after one update.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSnapshot {
    pub time: f64,
    pub members: Vec<ReferenceMember>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiSelectionOutcome {
    /// Accepted elements in arrival order.
    pub accepted: Vec<Acceptance>,
    /// Reference set at the end of the run, heaviest first.
    pub final_reference: Vec<ReferenceMember>,
    pub reference_set_trace: Option<Vec<ReferenceSnapshot>>,
}

impl MultiSelectionOutcome {
    pub fn total_weight(&self) -> f64 {
        self.accepted.iter().map(|a| a.weight).sum()
    }
}

/// L-selection with an additive gap (virtual-algorithm style).
///
/// At `tau` the reference set `R` holds the `L` heaviest arrivals so far,
/// padded with placeholders. Each later arrival with
/// `w >= max(r_L, c)` enters `R` and evicts `r_L`; it is accepted exactly
/// when the evicted `r_L` arrived before `tau`.
pub fn run_l_selection_gap(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
    c: f64,
    l: usize,
) -> Result<MultiSelectionOutcome> {
    l_selection(profile, arrivals, tau, c, l, false)
}

/// As [`run_l_selection_gap`], recording the reference set after every
/// change.
pub fn run_l_selection_gap_traced(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
    c: f64,
    l: usize,
) -> Result<MultiSelectionOutcome> {
    l_selection(profile, arrivals, tau, c, l, true)
}

fn l_selection(
    profile: &WeightProfile,
    arrivals: &ArrivalDraw,
    tau: f64,
    c: f64,
    l: usize,
    trace: bool,
) -> Result<MultiSelectionOutcome> {
    checked(profile, arrivals, tau)?;
    check_non_negative("gap", c)?;
    if !(1..=profile.n()).contains(&l) {
        return Err(Error::SelectionCountOutOfRange {
            l,
            min: 1,
            max: profile.n(),
        });
    }
    let times = arrivals.times();

    let mut reference: Vec<ReferenceMember> = profile
        .order()
        .iter()
        .filter(|&&i| times[i] <= tau)
        .take(l)
        .map(|&i| ReferenceMember {
            element: Some(i),
            weight: profile.weight(i),
            before_tau: true,
        })
        .collect();
    reference.resize(l, ReferenceMember::PLACEHOLDER);

    let mut snapshots = trace.then(|| {
        vec![ReferenceSnapshot {
            time: tau,
            members: reference.clone(),
        }]
    });

    let mut accepted = Vec::new();
    for i in arrivals.arrival_order() {
        let time = times[i];
        if time <= tau {
            continue;
        }
        let weight = profile.weight(i);
        let r_l = reference[l - 1];
        if weight < r_l.weight.max(c) {
            continue;
        }
        if r_l.before_tau {
            accepted.push(Acceptance {
                index: i,
                weight,
                time,
            });
        }
        reference.pop();
        let entry = ReferenceMember {
            element: Some(i),
            weight,
            before_tau: false,
        };
        let pos = reference.partition_point(|m| m.outranks(&entry));
        reference.insert(pos, entry);
        if let Some(s) = snapshots.as_mut() {
            s.push(ReferenceSnapshot {
                time,
                members: reference.clone(),
            });
        }
    }

    Ok(MultiSelectionOutcome {
        accepted,
        final_reference: reference,
        reference_set_trace: snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn p(w: &[f64]) -> WeightProfile {
        WeightProfile::from_weights(w.to_vec()).unwrap()
    }

    fn a(t: &[f64]) -> ArrivalDraw {
        ArrivalDraw::new(t.to_vec()).unwrap()
    }

    fn idx(o: SelectionOutcome) -> Option<usize> {
        o.accepted_index()
    }

    #[test]
    fn classical_examples() {
        let w = p(&[10.0, 4.0]);
        let o = run_classical(&w, &a(&[0.5, 0.1]), 1.0 / E).unwrap();
        assert_eq!(idx(o), Some(0));
        assert_eq!(o.accept_time(), Some(0.5));
        assert_eq!(o.accepted_weight(), 10.0);
        assert_eq!(
            idx(run_classical(&w, &a(&[0.1, 0.5]), 1.0 / E).unwrap()),
            None
        );
        let single = run_classical(&p(&[3.0]), &a(&[0.9]), 0.5).unwrap();
        assert_eq!(idx(single), Some(0));
    }

    #[test]
    fn exact_gap_examples() {
        let w = p(&[10.0, 4.0]);
        assert_eq!(
            idx(run_exact_gap(&w, &a(&[0.5, 0.1]), 0.2, 6.0).unwrap()),
            Some(0)
        );
        let o = run_exact_gap(&w, &a(&[0.5, 0.3]), 0.2, 0.0).unwrap();
        assert_eq!(idx(o), Some(1));
        assert_eq!(o.accept_time(), Some(0.3));
        for t in [[0.5, 0.3], [0.1, 0.9], [0.7, 0.6]] {
            let o = run_exact_gap(&w, &a(&t), 0.2, 11.0).unwrap();
            assert_eq!(o, SelectionOutcome::none());
            assert_eq!(o.accepted_weight(), 0.0);
        }
    }

    #[test]
    fn robust_consistent_phase_switch() {
        let w = p(&[10.0, 4.0]);
        let s = PolicySchedule::new(0.2, 0.05).unwrap();
        let o = run_robust_consistent(&w, &a(&[0.97, 0.5]), s, 100.0).unwrap();
        assert_eq!(idx(o), Some(0));
        assert_eq!(o.accept_time(), Some(0.97));
    }

    #[test]
    fn robust_consistent_switch_time_belongs_to_trusting_phase() {
        let w = p(&[10.0, 4.0]);
        let s = PolicySchedule::new(0.2, 0.5).unwrap();
        assert_eq!(
            idx(run_robust_consistent(&w, &a(&[0.9, 0.5]), s, 7.0).unwrap()),
            Some(0)
        );
        assert_eq!(
            idx(run_robust_consistent(&w, &a(&[0.9, 0.51]), s, 7.0).unwrap()),
            Some(1)
        );
    }

    #[test]
    fn bounded_error_examples() {
        let w = p(&[10.0, 4.0]);
        let o = run_bounded_error(&w, &a(&[0.5, 0.3]), 0.2, 7.0, 4.0).unwrap();
        assert_eq!(idx(o), Some(1));
        assert_eq!(o.accept_time(), Some(0.3));
        assert_eq!(bounded_error_threshold(1.0, 5.0), 0.0);
        assert_eq!(bounded_error_threshold(7.0, 4.0), 3.0);
    }

    #[test]
    fn strict_classical_examples() {
        assert_eq!(
            idx(run_strict_classical(&p(&[5.0, 5.0]), &a(&[0.1, 0.6]), 0.3).unwrap()),
            None
        );
        let o = run_strict_classical(&p(&[10.0, 5.0, 5.0]), &a(&[0.6, 0.1, 0.9]), 0.3).unwrap();
        assert_eq!(idx(o), Some(0));
        assert_eq!(o.accept_time(), Some(0.6));
        let o = run_strict_classical(&p(&[5.0, 5.0]), &a(&[0.4, 0.6]), 0.3).unwrap();
        assert_eq!(idx(o), Some(0));
        assert_eq!(o.accept_time(), Some(0.4));
    }

    #[test]
    fn equal_arrival_times_accept_lower_index() {
        let o = run_classical(&p(&[1.0, 2.0]), &a(&[0.5, 0.5]), 0.2).unwrap();
        assert_eq!(idx(o), Some(0));
    }

    #[test]
    fn parameter_validation() {
        let w = p(&[1.0, 2.0]);
        let t = a(&[0.3, 0.6]);
        assert!(run_classical(&w, &t, 1.0).is_err());
        assert!(run_classical(&w, &t, -0.1).is_err());
        assert!(run_exact_gap(&w, &t, 0.2, -1.0).is_err());
        assert!(run_classical(&w, &a(&[0.1]), 0.2).is_err());
        assert!(PolicySchedule::new(0.2, 0.8).is_err());
        assert!(PolicySchedule::new(0.2, 0.79).is_ok());
        assert!(PolicySchedule::new(0.2, -0.01).is_err());
        assert!(PolicySchedule::new(1.0, 0.0).is_err());
        let msg = run_classical(&w, &t, 1.5).unwrap_err().to_string();
        assert!(msg.starts_with("tau must lie in [0,1)"), "{msg}");
    }

    #[test]
    fn l_selection_trace_example() {
        let w = p(&[10.0, 8.0, 5.0]);
        let t = a(&[0.5, 0.6, 0.1]);
        let o = run_l_selection_gap_traced(&w, &t, 0.25, 3.0, 2).unwrap();
        let got: Vec<usize> = o.accepted.iter().map(|x| x.index).collect();
        assert_eq!(got, vec![0, 1]);
        assert_eq!(o.total_weight(), 18.0);
        let trace = o.reference_set_trace.unwrap();
        let elems = |s: &ReferenceSnapshot| s.members.iter().map(|m| m.element).collect::<Vec<_>>();
        assert_eq!(elems(&trace[0]), vec![Some(2), None]);
        assert_eq!(elems(&trace[1]), vec![Some(0), Some(2)]);
        assert_eq!(elems(&trace[2]), vec![Some(0), Some(1)]);
    }

    #[test]
    fn l_selection_nothing_after_tau() {
        let w = p(&[10.0, 8.0, 5.0]);
        let o = run_l_selection_gap(&w, &a(&[0.1, 0.2, 0.05]), 0.25, 3.0, 2).unwrap();
        assert!(o.accepted.is_empty());
    }

    #[test]
    fn l_selection_range_checks() {
        let w = p(&[10.0, 8.0, 5.0]);
        let t = a(&[0.1, 0.2, 0.05]);
        assert!(matches!(
            run_l_selection_gap(&w, &t, 0.25, 0.0, 0),
            Err(Error::SelectionCountOutOfRange { .. })
        ));
        assert!(run_l_selection_gap(&w, &t, 0.25, 0.0, 4).is_err());
        assert!(run_l_selection_gap(&w, &t, 0.25, 0.0, 3).is_ok());
    }

    #[test]
    fn l_selection_stops_once_pre_tau_members_are_gone() {
        // R = {9, 1} at tau; 5 evicts 1 (accepted), 6 evicts 5 (post-tau,
        // not accepted), 10 evicts 6 (post-tau, not accepted).
        let w = p(&[9.0, 1.0, 5.0, 6.0, 10.0]);
        let t = a(&[0.1, 0.2, 0.4, 0.5, 0.6]);
        let o = run_l_selection_gap(&w, &t, 0.3, 0.0, 2).unwrap();
        let got: Vec<usize> = o.accepted.iter().map(|x| x.index).collect();
        assert_eq!(got, vec![2]);
        let fin: Vec<Option<usize>> = o.final_reference.iter().map(|m| m.element).collect();
        assert_eq!(fin, vec![Some(4), Some(0)]);
    }

    #[test]
    fn l_selection_gap_filters_small_arrivals() {
        let w = p(&[10.0, 2.0, 1.0]);
        let t = a(&[0.9, 0.5, 0.6]);
        let o = run_l_selection_gap(&w, &t, 0.25, 3.0, 2).unwrap();
        let got: Vec<usize> = o.accepted.iter().map(|x| x.index).collect();
        assert_eq!(got, vec![0]);
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let w = p(&[3.0, 7.0, 5.0, 1.0]);
        let t = a(&[0.1, 0.7, 0.4, 0.95]);
        let s = PolicySchedule::new(0.2, 0.1).unwrap();
        assert_eq!(
            SingleSelection::RobustConsistent { schedule: s }
                .run(&w, &t, 6.0)
                .unwrap(),
            run_robust_consistent(&w, &t, s, 6.0).unwrap()
        );
        assert_eq!(
            SingleSelection::BoundedError {
                tau: 0.2,
                epsilon: 1.0
            }
            .run(&w, &t, 6.0)
            .unwrap(),
            run_bounded_error(&w, &t, 0.2, 6.0, 1.0).unwrap()
        );
        assert!(SingleSelection::ExactGap { tau: 0.2 }
            .run(&w, &t, -1.0)
            .is_err());
        assert!(SingleSelection::Classical { tau: 0.2 }
            .run(&w, &t, -1.0)
            .is_ok());
    }
}
