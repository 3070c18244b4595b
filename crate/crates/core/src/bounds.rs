//! Closed-form competitive-ratio guarantees and the robustness/consistency
//! frontier.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Error, Result};

/// Best possible ratio when `w_1 = w_2` is known (two-best secretary). Kept
/// as a reference value; nothing here computes it.
pub const TWO_BEST_UPPER_BOUND: f64 = 0.5736;

/// Largest finite `k` scanned by [`KAggregation::WorstCase`] by default.
pub const DEFAULT_K_MAX: usize = 10_000;

/// A named sub-term of a guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
}

/// A guarantee together with the terms it was composed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub alpha: f64,
    pub components: Vec<Term>,
    pub binding_term: &'static str,
}

impl GuaranteeReport {
    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }
}

/// `min(a, max(b, c))`, reporting which term attains it.
fn min_of_max(a: Term, b: Term, c: Term) -> (f64, &'static str) {
    let hi = if c.value > b.value { c } else { b };
    if a.value <= hi.value {
        (a.value, a.name)
    } else {
        (hi.value, hi.name)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "gap index k must be at least 2, got {k}"
        )))
    }
}

fn check_open_tau(tau: f64) -> Result<()> {
    ensure(tau > 0.0 && tau < 1.0, "tau", "(0,1)", tau)
}

/// `(1/(k+1))^(1/k)`, i.e. `1 - tau_for_k(k)`.
fn survival_for_k(k: usize) -> f64 {
    (-((k as f64) + 1.0).ln() / k as f64).exp()
}

/// Waiting time `1 - (1/(k+1))^(1/k)` for a known gap index `k >= 2`.
pub fn tau_for_k(k: usize) -> Result<f64> {
    check_k(k)?;
    Ok(-(-((k as f64) + 1.0).ln() / k as f64).exp_m1())
}

/// The `w_k < w_1/2` term `(1 - tau) k / (2 (k - 1))`.
fn case1_term(tau: f64, k: usize) -> f64 {
    let k = k as f64;
    (1.0 - tau) * k / (2.0 * (k - 1.0))
}

/// `((k+1)/(2k)) (1 - tau - (1 - tau)^(k+1))`.
pub(crate) fn alpha3(tau: f64, k: usize) -> f64 {
    let kf = k as f64;
    let tail = ((kf + 1.0) * (-tau).ln_1p()).exp();
    (kf + 1.0) / (2.0 * kf) * (1.0 - tau - tail)
}

/// Limit of [`alpha3`] as `k -> inf`.
fn alpha3_limit(tau: f64) -> f64 {
    (1.0 - tau) / 2.0
}

/// `(3/2) tau ln(1/tau) - (1/2) tau (1 - tau)`.
fn alpha4(tau: f64) -> f64 {
    1.5 * tau * (-tau.ln()) - 0.5 * tau * (1.0 - tau)
}

/// Exact-gap guarantee `alpha` for waiting time `tau` and gap index `k`:
/// `min(case1, max(alpha3, alpha4))`.
pub fn alpha_exact(tau: f64, k: usize) -> Result<GuaranteeReport> {
    check_open_tau(tau)?;
    check_k(k)?;
    let case1 = Term {
        name: "case1",
        value: case1_term(tau, k),
    };
    let a3 = Term {
        name: "alpha3",
        value: alpha3(tau, k),
    };
    let a4 = Term {
        name: "alpha4",
        value: alpha4(tau),
    };
    let (alpha, binding_term) = min_of_max(case1, a3, a4);
    Ok(GuaranteeReport {
        alpha,
        components: vec![case1, a3, a4],
        binding_term,
    })
}

/// Headline exact-gap ratio `max(0.4, (1/2)(1/(k+1))^(1/k))`.
pub fn guarantee_exact_gap(k: usize) -> Result<f64> {
    check_k(k)?;
    Ok(0.4f64.max(0.5 * survival_for_k(k)))
}

fn check_rc_domain(tau: f64, gamma: f64) -> Result<()> {
    ensure((0.0..1.0).contains(&tau), "tau", "[0,1)", tau)?;
    // The closed end gamma = 1 - tau is allowed: the trusting phase is then
    // empty and both formulas stay finite.
    ensure(
        (0.0..1.0).contains(&gamma) && gamma <= 1.0 - tau + 1e-12,
        "gamma",
        "[0,1-tau]",
        gamma,
    )
}

/// Robustness `tau ln(1/(1 - gamma))` of the robust-consistent rule.
pub fn robustness(tau: f64, gamma: f64) -> Result<f64> {
    check_rc_domain(tau, gamma)?;
    Ok(robustness_unchecked(tau, gamma))
}

fn robustness_unchecked(tau: f64, gamma: f64) -> f64 {
    -tau * (-gamma).ln_1p()
}

/// How the gap index enters the consistency bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KAggregation {
    /// A specific, known `k >= 2`.
    Index(usize),
    /// Infimum over `k` in `2..=k_max` together with the `k -> inf` limit.
    WorstCase { k_max: usize },
}

impl KAggregation {
    pub fn worst_case() -> Self {
        Self::WorstCase {
            k_max: DEFAULT_K_MAX,
        }
    }
}

impl fmt::Display for KAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Index(k) => write!(f, "k={k}"),
            Self::WorstCase { k_max } => write!(f, "worst-case(k<={k_max},k->inf)"),
        }
    }
}

/// Smallest `alpha3(tau, k)` over `k in 2..=k_max` and the limit; returns
/// the minimizing `k` (`None` for the limit).
pub fn worst_case_alpha3(tau: f64, k_max: usize) -> (f64, Option<usize>) {
    let mut best = (alpha3_limit(tau), None);
    for k in 2..=k_max {
        let v = alpha3(tau, k);
        if v < best.0 {
            best = (v, Some(k));
        }
    }
    best
}

fn aggregated_alpha3(tau: f64, aggregation: KAggregation) -> Result<f64> {
    match aggregation {
        KAggregation::Index(k) => {
            check_k(k)?;
            Ok(alpha3(tau, k))
        }
        KAggregation::WorstCase { k_max } => Ok(worst_case_alpha3(tau, k_max).0),
    }
}

fn consistency_from_parts(tau: f64, gamma: f64, a3: f64, a4: f64) -> GuaranteeReport {
    let trust = robustness_unchecked(tau, gamma);
    let a1 = Term {
        name: "alpha1",
        value: 1.0 - gamma - tau + trust,
    };
    let a2 = Term {
        name: "alpha2",
        value: 0.5 * ((1.0 + gamma) * (1.0 - tau - gamma) - tau * tau.ln() + trust),
    };
    let a3 = Term {
        name: "alpha3",
        value: a3,
    };
    let a4 = Term {
        name: "alpha4",
        value: a4,
    };
    let low = if a2.value < a1.value { a2 } else { a1 };
    let (alpha, binding_term) = min_of_max(low, a3, a4);
    GuaranteeReport {
        alpha,
        components: vec![a1, a2, a3, a4],
        binding_term,
    }
}

/// Consistency `min(min(alpha1, alpha2), max(alpha3, alpha4))` of the
/// robust-consistent rule.
pub fn consistency(tau: f64, gamma: f64, aggregation: KAggregation) -> Result<GuaranteeReport> {
    check_open_tau(tau)?;
    check_rc_domain(tau, gamma)?;
    let a3 = aggregated_alpha3(tau, aggregation)?;
    Ok(consistency_from_parts(tau, gamma, a3, alpha4(tau)))
}

/// Best grid point for one robustness target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierOptimum {
    pub tau: f64,
    pub gamma: f64,
    pub consistency: f64,
    pub robustness: f64,
}

/// One row of the frontier; `optimum` is `None` when no grid point reaches
/// the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub robustness_target: f64,
    pub optimum: Option<FrontierOptimum>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frontier {
    pub aggregation: KAggregation,
    pub grid_step: f64,
    pub points: Vec<FrontierPoint>,
}

/// Grid values `step, 2 step, ...` below 1, snapped to `i/m` when `1/step`
/// is an integer `m` so that e.g. 0.2 and 0.6 are hit exactly.
fn grid_values(step: f64, start: usize) -> Vec<f64> {
    let inv = 1.0 / step;
    let m = inv.round();
    let snapped = (inv - m).abs() < 1e-9;
    (start..)
        .map(|i| {
            if snapped {
                i as f64 / m
            } else {
                i as f64 * step
            }
        })
        .take_while(|&v| v < 1.0 - 1e-12)
        .collect()
}

/// Maximizes worst-case consistency over a `(tau, gamma)` grid subject to
/// `robustness >= target`, for each target.
///
/// The grid covers `tau in {step, 2 step, ...} < 1` and
/// `gamma in {0, step, ...}` with `tau + gamma < 1`. Ties go to the
/// lexicographically smallest `(tau, gamma)`.
pub fn frontier(targets: &[f64], grid_step: f64) -> Result<Frontier> {
    frontier_with(targets, grid_step, KAggregation::worst_case())
}

pub fn frontier_with(
    targets: &[f64],
    grid_step: f64,
    aggregation: KAggregation,
) -> Result<Frontier> {
    if targets.is_empty() {
        return Err(Error::InvalidConfig(
            "frontier needs at least one robustness target".into(),
        ));
    }
    ensure(
        grid_step > 0.0 && grid_step <= 0.1,
        "grid_step",
        "(0,0.1]",
        grid_step,
    )?;
    for &r in targets {
        ensure(r >= 0.0 && r.is_finite(), "robustness target", "[0,inf)", r)?;
    }
    if let KAggregation::Index(k) = aggregation {
        check_k(k)?;
    }

    let taus = grid_values(grid_step, 1);
    let gammas = grid_values(grid_step, 0);
    let grid: Vec<FrontierOptimum> = taus
        .par_iter()
        .flat_map_iter(|&tau| {
            let a3 = aggregated_alpha3(tau, aggregation).expect("k validated above");
            let a4 = alpha4(tau);
            gammas
                .iter()
                .take_while(move |&&gamma| gamma < 1.0 - tau)
                .map(move |&gamma| FrontierOptimum {
                    tau,
                    gamma,
                    consistency: consistency_from_parts(tau, gamma, a3, a4).alpha,
                    robustness: robustness_unchecked(tau, gamma),
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let points = targets
        .par_iter()
        .map(|&target| {
            let mut best: Option<FrontierOptimum> = None;
            for cell in grid.iter().filter(|c| c.robustness >= target) {
                if best.is_none_or(|b| cell.consistency > b.consistency) {
                    best = Some(*cell);
                }
            }
            FrontierPoint {
                robustness_target: target,
                optimum: best,
            }
        })
        .collect();

    Ok(Frontier {
        aggregation,
        grid_step,
        points,
    })
}

/// Exact-gap guarantee carried over to a gap known up to `+-epsilon`:
/// `E[ALG] >= alpha w_1 - 2 epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedErrorGuarantee {
    pub report: GuaranteeReport,
}

impl BoundedErrorGuarantee {
    pub fn alpha(&self) -> f64 {
        self.report.alpha
    }

    /// Lower bound on the expected accepted weight.
    pub fn lower_bound(&self, w1: f64, epsilon: f64) -> f64 {
        self.report.alpha * w1 - 2.0 * epsilon
    }
}

impl fmt::Display for BoundedErrorGuarantee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E[ALG] >= {:.4}*w1 - 2*eps", self.report.alpha)
    }
}

pub fn guarantee_bounded_error(tau: f64, k: usize) -> Result<BoundedErrorGuarantee> {
    Ok(BoundedErrorGuarantee {
        report: alpha_exact(tau, k)?,
    })
}

/// Large-`n` probability that the strict classical rule picks `w_1` when
/// `w_2 = w_3`: `(1/2) tau (1 - tau)^2 + tau ln(1/tau)`.
pub fn two_three_tie_prob(tau: f64) -> Result<f64> {
    ensure(tau > 0.0 && tau <= 1.0, "tau", "(0,1]", tau)?;
    Ok(0.5 * tau * (1.0 - tau).powi(2) - tau * tau.ln())
}

/// Finite-`n` version of [`two_three_tie_prob`]:
/// `(1/2) tau (1-tau)^2 + sum_{i=1}^{n-1} tau (1-tau)^i / i + (1-tau)^n / n`.
pub fn two_three_tie_prob_exact(tau: f64, n: usize) -> Result<f64> {
    ensure((0.0..=1.0).contains(&tau), "tau", "[0,1]", tau)?;
    if n < 3 {
        return Err(Error::InvalidConfig(format!(
            "w2 = w3 needs n >= 3, got n={n}"
        )));
    }
    let s = 1.0 - tau;
    let mut power = 1.0;
    let mut sum = 0.0;
    for i in 1..n {
        power *= s;
        sum += tau * power / i as f64;
    }
    power *= s;
    Ok(0.5 * tau * s * s + sum + power / n as f64)
}

/// L-selection guarantee `1/e + (beta/(2e)) (1 - 1/L + 1/(L e^L))`, where
/// `beta = w_L / OPT`.
pub fn l_selection_bound(l: usize, beta: f64) -> Result<f64> {
    if l < 2 {
        return Err(Error::SelectionCountOutOfRange {
            l,
            min: 2,
            max: usize::MAX,
        });
    }
    let lf = l as f64;
    ensure(beta >= 0.0 && beta <= 1.0 / lf, "beta", "[0,1/L]", beta)?;
    let e = std::f64::consts::E;
    Ok(1.0 / e + beta / (2.0 * e) * (1.0 - 1.0 / lf + 1.0 / (lf * lf.exp())))
}
