//! Exact expected accepted weight for tiny instances by exhaustive
//! enumeration.
//!
//! With i.i.d. uniform arrivals, each element independently lands in the
//! waiting phase `[0, tau]` with probability `tau`, in the trusting phase
//! `(tau, 1 - gamma]` with probability `1 - gamma - tau`, or in the final
//! phase with probability `gamma`, and the order within each later phase is
//! a uniform permutation. Summing over every phase assignment and every
//! ordering gives the exact expectation. Two-phase rules use `gamma = 0`.
//!
//! The acceptance logic below is a direct restatement of each rule and
//! deliberately shares no code with [`crate::algorithms`].

use crate::algorithms::{bounded_error_threshold, SingleSelection};
use crate::error::{check_non_negative, Error, Result};
use crate::model::WeightProfile;

/// Largest supported instance size.
pub const MAX_ORACLE_N: usize = 6;

struct Rule {
    tau: f64,
    gamma: f64,
    strict: bool,
    /// Extra threshold during the trusting phase.
    trust_gap: f64,
    /// Extra threshold after the switch time.
    late_gap: f64,
}

impl Rule {
    fn from(algorithm: &SingleSelection, gap: f64) -> Self {
        let two_phase = |tau, strict, c| Rule {
            tau,
            gamma: 0.0,
            strict,
            trust_gap: c,
            late_gap: c,
        };
        match *algorithm {
            SingleSelection::Classical { tau } => two_phase(tau, false, 0.0),
            SingleSelection::StrictClassical { tau } => two_phase(tau, true, 0.0),
            SingleSelection::ExactGap { tau } => two_phase(tau, false, gap),
            SingleSelection::BoundedError { tau, epsilon } => {
                two_phase(tau, false, bounded_error_threshold(gap, epsilon))
            }
            SingleSelection::RobustConsistent { schedule } => Rule {
                tau: schedule.tau(),
                gamma: schedule.gamma(),
                strict: false,
                trust_gap: gap,
                late_gap: 0.0,
            },
        }
    }

    /// Weight accepted in one scenario: first `trusting` then `late`, each
    /// already in arrival order.
    fn accepted(&self, w: &[f64], waiting: &[usize], trusting: &[usize], late: &[usize]) -> f64 {
        let bsf = waiting.iter().map(|&i| w[i]).fold(0.0, f64::max);
        let passes = |x: f64, threshold: f64| {
            if self.strict {
                x > threshold
            } else {
                x >= threshold
            }
        };
        let phases = [
            (trusting, bsf.max(self.trust_gap)),
            (late, bsf.max(self.late_gap)),
        ];
        for (items, threshold) in phases {
            if let Some(&i) = items.iter().find(|&&i| passes(w[i], threshold)) {
                return w[i];
            }
        }
        0.0
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|x| x as f64).product()
}

/// Calls `visit` with every permutation of `items` (Heap's algorithm).
fn for_each_permutation(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    fn go(k: usize, items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            visit(items);
            return;
        }
        for i in 0..k - 1 {
            go(k - 1, items, visit);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        go(k - 1, items, visit);
    }
    let k = items.len();
    go(k, items, visit);
}

/// Exact `E[accepted weight]` of `algorithm` on `profile` with gap input
/// `gap` (`c`, `c_hat` or `c_tilde`), for `n <= 6`.
///
/// Panics if the scenario probabilities fail to sum to 1, which would mean
/// the enumeration itself is wrong.
pub fn exact_expectation_small_n(
    profile: &WeightProfile,
    algorithm: &SingleSelection,
    gap: f64,
) -> Result<f64> {
    let n = profile.n();
    if n > MAX_ORACLE_N {
        return Err(Error::InstanceTooLarge {
            n,
            max: MAX_ORACLE_N,
        });
    }
    algorithm.validate()?;
    check_non_negative("gap", gap)?;
    let rule = Rule::from(algorithm, gap);
    let w = profile.weights();
    let phase_p = [rule.tau, 1.0 - rule.gamma - rule.tau, rule.gamma];

    let mut expectation = 0.0;
    let mut total_probability = 0.0;
    let mut phase = vec![0usize; n];
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        for p in phase.iter_mut() {
            *p = c % 3;
            c /= 3;
        }
        let members =
            |which: usize| -> Vec<usize> { (0..n).filter(|&i| phase[i] == which).collect() };
        let (waiting, mut trusting, mut late) = (members(0), members(1), members(2));
        let weight: f64 = phase_p[0].powi(waiting.len() as i32)
            * phase_p[1].powi(trusting.len() as i32)
            * phase_p[2].powi(late.len() as i32);
        if weight == 0.0 {
            continue;
        }
        let per_order = weight / (factorial(trusting.len()) * factorial(late.len()));
        for_each_permutation(&mut trusting, &mut |t| {
            let t = t.to_vec();
            for_each_permutation(&mut late, &mut |l| {
                total_probability += per_order;
                expectation += per_order * rule.accepted(w, &waiting, &t, l);
            });
        });
    }
    assert!(
        (total_probability - 1.0).abs() < 1e-9,
        "scenario probabilities sum to {total_probability}"
    );
    Ok(expectation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::PolicySchedule;

    fn profile(w: &[f64]) -> WeightProfile {
        WeightProfile::from_weights(w.to_vec()).unwrap()
    }

    #[test]
    fn hand_checked_two_elements() {
        let e = exact_expectation_small_n(
            &profile(&[2.0, 1.0]),
            &SingleSelection::ExactGap { tau: 0.5 },
            0.0,
        )
        .unwrap();
        assert!((e - 0.875).abs() < 1e-12);
    }

    #[test]
    fn single_element() {
        for (tau, c) in [(0.3, 0.0), (0.7, 1.5), (0.0, 2.0)] {
            let e =
                exact_expectation_small_n(&profile(&[2.0]), &SingleSelection::ExactGap { tau }, c)
                    .unwrap();
            assert!((e - (1.0 - tau) * 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_above_max_selects_nothing() {
        let e = exact_expectation_small_n(
            &profile(&[3.0, 1.0, 2.0]),
            &SingleSelection::ExactGap { tau: 0.2 },
            3.5,
        )
        .unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn classical_two_distinct_elements() {
        // Accept w1 unless it arrives in the waiting phase; a lone w2 after
        // tau is taken when w1 is later and nothing arrived before tau.
        let t: f64 = 0.4;
        let e = exact_expectation_small_n(
            &profile(&[5.0, 1.0]),
            &SingleSelection::Classical { tau: t },
            0.0,
        )
        .unwrap();
        let p_w1 = t * (1.0 - t) + (1.0 - t) * (1.0 - t) / 2.0;
        let p_w2 = (1.0 - t) * (1.0 - t) / 2.0;
        assert!((e - (5.0 * p_w1 + p_w2)).abs() < 1e-12);
    }

    #[test]
    fn strict_rule_rejects_ties() {
        let w = profile(&[1.0, 1.0]);
        let t = 0.5;
        let strict =
            exact_expectation_small_n(&w, &SingleSelection::StrictClassical { tau: t }, 0.0)
                .unwrap();
        let weak =
            exact_expectation_small_n(&w, &SingleSelection::Classical { tau: t }, 0.0).unwrap();
        // Strict accepts only when nothing arrived before tau.
        assert!((strict - (1.0 - t) * (1.0 - t)).abs() < 1e-12);
        assert!((weak - (1.0 - t * t)).abs() < 1e-12);
    }

    #[test]
    fn robust_with_zero_gamma_is_exact_gap() {
        let w = profile(&[4.0, 2.5, 1.0, 3.0]);
        let rc = SingleSelection::RobustConsistent {
            schedule: PolicySchedule::new(0.3, 0.0).unwrap(),
        };
        let a = exact_expectation_small_n(&w, &rc, 1.2).unwrap();
        let b =
            exact_expectation_small_n(&w, &SingleSelection::ExactGap { tau: 0.3 }, 1.2).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn robust_late_phase_falls_back_to_classical() {
        // With an impossible gap only the late phase can accept.
        let w = profile(&[2.0]);
        let rc = SingleSelection::RobustConsistent {
            schedule: PolicySchedule::new(0.2, 0.5).unwrap(),
        };
        let e = exact_expectation_small_n(&w, &rc, 10.0).unwrap();
        assert!((e - 0.5 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn size_cap() {
        let w = profile(&[1.0; 7]);
        assert!(matches!(
            exact_expectation_small_n(&w, &SingleSelection::Classical { tau: 0.3 }, 0.0),
            Err(Error::InstanceTooLarge { n: 7, max: 6 })
        ));
        let w6 = profile(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let rc = SingleSelection::RobustConsistent {
            schedule: PolicySchedule::new(0.2, 0.3).unwrap(),
        };
        assert!(exact_expectation_small_n(&w6, &rc, 2.0).is_ok());
    }

    #[test]
    fn permutations_are_complete() {
        let mut seen = std::collections::BTreeSet::new();
        let mut items = vec![0, 1, 2, 3];
        for_each_permutation(&mut items, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }
}
