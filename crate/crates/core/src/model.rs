//! Domain types shared by every algorithm: weight profiles, arrival draws,
//! gap predictions and selection outcomes.
//!
//! Element indices are 0-based throughout. Ranks (the `k` of a gap, the `j`
//! of [`WeightProfile::sorted_index`]) are 1-based, so rank 1 is the largest
//! weight.

use std::cmp::Ordering;

use crate::error::{check_non_negative, check_tau, Error, Result};

/// The adversary's weights, kept both as natural logs and as a linear view.
///
/// Heavy-tailed instance families raise uniforms to powers in the
/// thousands, so construction from log-weights never goes through a linear
/// intermediate. [`normalized`](Self::normalized) shifts the logs so the
/// maximum linear weight is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    order: Vec<usize>,
}

impl WeightProfile {
    /// Builds a profile from linear weights. The linear view keeps the
    /// given values bit for bit.
    pub fn from_weights(weights: impl Into<Vec<f64>>) -> Result<Self> {
        let weights = weights.into();
        if weights.is_empty() {
            return Err(Error::EmptyProfile);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self::assemble(log_weights, weights))
    }

    /// Builds a profile from natural-log weights; `-inf` encodes weight 0.
    pub fn from_log_weights(log_weights: impl Into<Vec<f64>>) -> Result<Self> {
        let log_weights = log_weights.into();
        if log_weights.is_empty() {
            return Err(Error::EmptyProfile);
        }
        for (index, &value) in log_weights.iter().enumerate() {
            if value.is_nan() || value == f64::INFINITY {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let weights = log_weights.iter().map(|l| l.exp()).collect();
        Ok(Self::assemble(log_weights, weights))
    }

    fn assemble(log_weights: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| {
            weights[b]
                .total_cmp(&weights[a])
                .then(log_weights[b].total_cmp(&log_weights[a]))
                .then(a.cmp(&b))
        });
        Self {
            log_weights,
            weights,
            order,
        }
    }

    /// Number of elements.
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Linear weight of element `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Element index of the `j`-th largest weight (`j` is 1-based). Ties go
    /// to the lower element index.
    pub fn sorted_index(&self, j: usize) -> usize {
        self.order[j - 1]
    }

    /// Weight of rank `j` (1-based), i.e. `w_j` in sorted notation.
    pub fn ranked_weight(&self, j: usize) -> f64 {
        self.weights[self.order[j - 1]]
    }

    /// Element indices from largest to smallest weight.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn argmax(&self) -> usize {
        self.order[0]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights[self.order[0]]
    }

    /// Shifts all log-weights so the largest linear weight is exactly 1.
    ///
    /// All-zero profiles come back unchanged. When the linear view is usable
    /// the shift is done by division so that e.g. `[10, 4]` becomes exactly
    /// `[1, 0.4]`; otherwise the linear view is rebuilt from shifted logs and
    /// tiny weights may underflow to 0.
    pub fn normalized(&self) -> Self {
        let top = self.argmax();
        let log_max = self.log_weights[top];
        if log_max == f64::NEG_INFINITY {
            return self.clone();
        }
        let max = self.weights[top];
        let log_weights: Vec<f64> = self.log_weights.iter().map(|l| l - log_max).collect();
        let weights: Vec<f64> = if max > 0.0 && max.is_finite() {
            self.weights.iter().map(|w| w / max).collect()
        } else {
            log_weights.iter().map(|l| l.exp()).collect()
        };
        Self {
            log_weights,
            weights,
            order: self.order.clone(),
        }
    }

    /// Multiplies every weight by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        crate::error::ensure(
            lambda > 0.0 && lambda.is_finite(),
            "lambda",
            "(0,inf)",
            lambda,
        )?;
        let shift = lambda.ln();
        Ok(Self {
            log_weights: self.log_weights.iter().map(|l| l + shift).collect(),
            weights: self.weights.iter().map(|w| w * lambda).collect(),
            order: self.order.clone(),
        })
    }

    fn check_rank(&self, k: usize) -> Result<()> {
        if (2..=self.n()).contains(&k) {
            Ok(())
        } else {
            Err(Error::GapIndexOutOfRange { k, n: self.n() })
        }
    }
}

/// One realization of i.i.d. arrival times in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalDraw {
    times: Vec<f64>,
}

impl ArrivalDraw {
    pub fn new(times: impl Into<Vec<f64>>) -> Result<Self> {
        let times = times.into();
        for (index, &value) in times.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidArrival { index, value });
            }
        }
        Ok(Self { times })
    }

    pub(crate) fn from_trusted(times: Vec<f64>) -> Self {
        debug_assert!(times.iter().all(|t| (0.0..=1.0).contains(t)));
        Self { times }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Element indices in arrival order; equal times go to the lower index.
    pub fn arrival_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.times.len()).collect();
        idx.sort_by(|&a, &b| arrives_before(self.times[a], a, self.times[b], b));
        idx
    }
}

/// Total arrival order: earlier time first, then lower index.
pub(crate) fn arrives_before(ta: f64, a: usize, tb: f64, b: usize) -> Ordering {
    ta.total_cmp(&tb).then(a.cmp(&b))
}

pub(crate) fn check_matching(profile: &WeightProfile, arrivals: &ArrivalDraw) -> Result<()> {
    if profile.n() == arrivals.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            weights: profile.n(),
            arrivals: arrivals.len(),
        })
    }
}

/// A (possibly erroneous) additive-gap prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapInfo {
    value: f64,
    k: Option<usize>,
    error_bound: Option<f64>,
}

impl GapInfo {
    pub fn new(value: f64) -> Result<Self> {
        check_non_negative("gap", value)?;
        Ok(Self {
            value,
            k: None,
            error_bound: None,
        })
    }

    /// Attaches the rank `k >= 2` the gap refers to.
    pub fn with_index(mut self, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::GapIndexOutOfRange { k, n: usize::MAX });
        }
        self.k = Some(k);
        Ok(self)
    }

    pub fn with_error_bound(mut self, epsilon: f64) -> Result<Self> {
        check_non_negative("epsilon", epsilon)?;
        self.error_bound = Some(epsilon);
        Ok(self)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn error_bound(&self) -> Option<f64> {
        self.error_bound
    }
}

/// An accepted element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    pub index: usize,
    pub weight: f64,
    pub time: f64,
}

/// What a single-selection algorithm did on one realization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelectionOutcome {
    pub accepted: Option<Acceptance>,
}

impl SelectionOutcome {
    pub fn none() -> Self {
        Self { accepted: None }
    }

    pub fn accepted_index(&self) -> Option<usize> {
        self.accepted.map(|a| a.index)
    }

    /// Accepted weight, or 0 when nothing was accepted.
    pub fn accepted_weight(&self) -> f64 {
        self.accepted.map_or(0.0, |a| a.weight)
    }

    pub fn accept_time(&self) -> Option<f64> {
        self.accepted.map(|a| a.time)
    }
}

/// Largest weight among elements with arrival time `<= tau`, or 0 when
/// nothing has arrived yet.
pub fn best_so_far(profile: &WeightProfile, arrivals: &ArrivalDraw, tau: f64) -> Result<f64> {
    check_matching(profile, arrivals)?;
    Ok(bsf_unchecked(profile.weights(), arrivals.times(), tau))
}

pub(crate) fn bsf_unchecked(weights: &[f64], times: &[f64], tau: f64) -> f64 {
    weights
        .iter()
        .zip(times)
        .filter(|(_, &t)| t <= tau)
        .fold(0.0, |acc, (&w, _)| if w > acc { w } else { acc })
}

/// `w_1 - w_k` for rank `k` in `[2, n]`.
pub fn true_gap(profile: &WeightProfile, k: usize) -> Result<f64> {
    profile.check_rank(k)?;
    Ok(profile.max_weight() - profile.ranked_weight(k))
}

/// `|predicted - true|` for the gap's own rank.
pub fn prediction_error(gap: &GapInfo, profile: &WeightProfile) -> Result<f64> {
    let k = gap.k.ok_or(Error::MissingGapIndex)?;
    Ok((gap.value - true_gap(profile, k)?).abs())
}

/// Validates a waiting time; exposed for callers assembling parameters.
pub fn validate_tau(tau: f64) -> Result<()> {
    check_tau(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(w: &[f64]) -> WeightProfile {
        WeightProfile::from_weights(w.to_vec()).unwrap()
    }

    fn draw(t: &[f64]) -> ArrivalDraw {
        ArrivalDraw::new(t.to_vec()).unwrap()
    }

    #[test]
    fn bsf_examples() {
        let p = profile(&[10.0, 4.0]);
        assert_eq!(best_so_far(&p, &draw(&[0.5, 0.1]), 0.2).unwrap(), 4.0);
        assert_eq!(best_so_far(&p, &draw(&[0.5, 0.3]), 0.2).unwrap(), 0.0);
        assert_eq!(best_so_far(&p, &draw(&[0.5, 0.3]), 1.0).unwrap(), 10.0);
    }

    #[test]
    fn bsf_counts_arrival_exactly_at_tau() {
        let p = profile(&[3.0, 1.0]);
        assert_eq!(best_so_far(&p, &draw(&[0.25, 0.9]), 0.25).unwrap(), 3.0);
    }

    #[test]
    fn bsf_rejects_dimension_mismatch() {
        let p = profile(&[10.0, 4.0]);
        let err = best_so_far(&p, &draw(&[0.5]), 0.2).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                weights: 2,
                arrivals: 1
            }
        ));
    }

    #[test]
    fn true_gap_examples() {
        let p = profile(&[10.0, 4.0, 1.0]);
        assert_eq!(true_gap(&p, 2).unwrap(), 6.0);
        assert_eq!(true_gap(&p, 3).unwrap(), 9.0);
        let flat = profile(&[5.0, 5.0, 5.0]);
        assert_eq!(true_gap(&flat, 2).unwrap(), 0.0);
        assert_eq!(true_gap(&flat, 3).unwrap(), 0.0);
        assert!(true_gap(&p, 1).is_err());
        assert!(true_gap(&p, 4).is_err());
    }

    #[test]
    fn true_gap_uses_sorted_rank_not_position() {
        let p = profile(&[1.0, 10.0, 4.0]);
        assert_eq!(true_gap(&p, 2).unwrap(), 6.0);
    }

    #[test]
    fn prediction_error_examples() {
        let p = profile(&[10.0, 4.0]);
        let g = |v: f64| GapInfo::new(v).unwrap().with_index(2).unwrap();
        assert_eq!(prediction_error(&g(6.0), &p).unwrap(), 0.0);
        assert_eq!(prediction_error(&g(9.0), &p).unwrap(), 3.0);
        assert_eq!(prediction_error(&g(0.0), &p).unwrap(), 6.0);
        let no_k = GapInfo::new(6.0).unwrap();
        assert!(matches!(
            prediction_error(&no_k, &p),
            Err(Error::MissingGapIndex)
        ));
    }

    #[test]
    fn gap_info_validation() {
        assert!(GapInfo::new(-1.0).is_err());
        assert!(GapInfo::new(f64::NAN).is_err());
        assert!(GapInfo::new(1.0).unwrap().with_index(1).is_err());
        assert!(GapInfo::new(1.0).unwrap().with_error_bound(-0.1).is_err());
        let g = GapInfo::new(1.0).unwrap().with_error_bound(0.5).unwrap();
        assert_eq!(g.error_bound(), Some(0.5));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(profile(&[10.0, 4.0]).normalized().weights(), &[1.0, 0.4]);
        assert_eq!(profile(&[1.0]).normalized().weights(), &[1.0]);
        let logs = WeightProfile::from_log_weights(vec![-2000.0, -2828.0]).unwrap();
        assert_eq!(logs.weights(), &[0.0, 0.0]);
        let n = logs.normalized();
        assert_eq!(n.weights()[0], 1.0);
        assert_eq!(n.weights()[1], 0.0);
        assert_eq!(n.log_weights(), &[0.0, -828.0]);
        assert_eq!(n.sorted_index(1), 0);
    }

    #[test]
    fn normalize_all_zero_passes_through() {
        let z = profile(&[0.0, 0.0]);
        assert_eq!(z.normalized(), z);
    }

    #[test]
    fn sorted_index_breaks_ties_by_lower_index() {
        let p = profile(&[3.0, 5.0, 5.0, 1.0]);
        let order: Vec<usize> = (1..=4).map(|j| p.sorted_index(j)).collect();
        assert_eq!(order, vec![1, 2, 0, 3]);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            WeightProfile::from_weights(vec![]),
            Err(Error::EmptyProfile)
        ));
        assert!(WeightProfile::from_weights(vec![1.0, -0.5]).is_err());
        assert!(WeightProfile::from_weights(vec![f64::NAN]).is_err());
        assert!(WeightProfile::from_weights(vec![f64::INFINITY]).is_err());
        assert!(WeightProfile::from_log_weights(vec![f64::INFINITY]).is_err());
        assert!(WeightProfile::from_log_weights(vec![f64::NEG_INFINITY, 0.0]).is_ok());
        assert!(ArrivalDraw::new(vec![0.5, 1.5]).is_err());
        assert!(ArrivalDraw::new(vec![-0.0, 1.0]).is_ok());
    }

    #[test]
    fn arrival_order_ties_go_to_lower_index() {
        let a = draw(&[0.5, 0.2, 0.5, 0.1]);
        assert_eq!(a.arrival_order(), vec![3, 1, 0, 2]);
    }
}
