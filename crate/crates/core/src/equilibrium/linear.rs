use serde::{Deserialize, Serialize};

use super::{EquilibriumOutcome, FirmGroup};
use crate::error::{Error, Result};
use crate::numeric::golden_max;
use crate::sequence::PeriodSequence;

/// Closed-form equilibrium under linear net demand `a (xbar_c - X)`:
/// a firm in period `t` produces `xbar_c / prod_{s<=t} (1 + n_s)`.
pub fn solve_linear_closed_form(n: &PeriodSequence, xbar_c: f64) -> Result<EquilibriumOutcome> {
    if !(xbar_c > 0.0 && xbar_c.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "competitive quantity {xbar_c} must be positive"
        )));
    }
    let mut product = 1.0;
    let mut groups = Vec::with_capacity(n.periods());
    for (i, &count) in n.counts().iter().enumerate() {
        product *= 1.0 + count as f64;
        groups.push(FirmGroup {
            period: i + 1,
            count,
            quantity: xbar_c / product,
            profit: None,
        });
    }
    Ok(EquilibriumOutcome {
        total: (1.0 - 1.0 / product) * xbar_c,
        groups,
        residual: 0.0,
        price: None,
        competitive_quantity: Some(xbar_c),
    })
}

/// Leader quantities when some later period grows without bound:
/// `xbar_c / prod_{k<=s} (1 + n_k)` for each period `s` of `prefix`.
pub fn competitive_limit_quantities(prefix: &[u32], xbar_c: f64) -> Vec<f64> {
    prefix
        .iter()
        .scan(1.0, |product, &n| {
            *product *= 1.0 + n as f64;
            Some(xbar_c / *product)
        })
        .collect()
}

/// Finite-support belief over the arrival sequence that follows a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefDistribution {
    support: Vec<(Vec<u32>, f64)>,
}

impl BeliefDistribution {
    pub fn new(support: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::BadBelief("empty support".into()));
        }
        let mut total = 0.0;
        for (suffix, p) in &support {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::BadBelief(format!("probability {p} is invalid")));
            }
            if suffix.contains(&0) {
                return Err(Error::BadBelief(format!(
                    "suffix {suffix:?} has an empty period"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadBelief(format!("probabilities sum to {total}")));
        }
        Ok(BeliefDistribution { support })
    }

    /// Certainty about one follower sequence (possibly empty).
    pub fn degenerate(suffix: Vec<u32>) -> Result<Self> {
        BeliefDistribution::new(vec![(suffix, 1.0)])
    }

    pub fn support(&self) -> &[(Vec<u32>, f64)] {
        &self.support
    }

    /// `E[1 / prod_s (1 + n_s)]` over the follower sequences.
    pub fn expected_discount(&self) -> f64 {
        self.support
            .iter()
            .map(|(suffix, p)| {
                let product: f64 = suffix.iter().map(|&n| 1.0 + n as f64).product();
                p / product
            })
            .sum()
    }
}

/// Best response of one period-1 firm that holds `belief` about followers,
/// found by golden-section search on its expected profit while the other
/// `n1 - 1` period-1 firms play `xbar_c / (1 + n1)`.
pub fn expected_best_response_linear(
    n1: u32,
    xbar_c: f64,
    belief: &BeliefDistribution,
) -> Result<f64> {
    if n1 == 0 {
        return Err(Error::InvalidSequence("period 1 needs a firm".into()));
    }
    if !(xbar_c > 0.0 && xbar_c.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "competitive quantity {xbar_c} must be positive"
        )));
    }
    let others = (n1 - 1) as f64 * xbar_c / (1.0 + n1 as f64);
    let profit = |x: f64| -> f64 {
        let cumulative = x + others;
        belief
            .support()
            .iter()
            .map(|(suffix, p)| {
                let product: f64 = suffix.iter().map(|&n| 1.0 + n as f64).product();
                p * x * (xbar_c - cumulative) / product
            })
            .sum()
    };
    Ok(golden_max(&profit, 0.0, xbar_c, 1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u32]) -> PeriodSequence {
        PeriodSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let out = solve_linear_closed_form(&seq(&[1, 1]), 1.0).unwrap();
        assert_eq!(out.total, 0.75);
        assert_eq!(out.period_quantities(1), vec![0.5]);
        assert_eq!(out.period_quantities(2), vec![0.25]);

        let out = solve_linear_closed_form(&seq(&[2, 2]), 1.0).unwrap();
        assert!((out.total - 8.0 / 9.0).abs() < 1e-15);
        assert!((out.groups[0].quantity - 1.0 / 3.0).abs() < 1e-15);
        assert!((out.groups[1].quantity - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn single_leader_is_monopolist() {
        for m in 2..40 {
            let out = solve_linear_closed_form(&seq(&[1, m - 1]), 3.0).unwrap();
            assert_eq!(out.groups[0].quantity, 1.5);
        }
    }

    #[test]
    fn limits() {
        assert_eq!(competitive_limit_quantities(&[1], 1.0), vec![0.5]);
        assert_eq!(competitive_limit_quantities(&[1, 1], 1.0), vec![0.5, 0.25]);
        let q = competitive_limit_quantities(&[2, 3], 1.0);
        assert!((q[0] - 1.0 / 3.0).abs() < 1e-15 && (q[1] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn best_response_ignores_beliefs() {
        let b = BeliefDistribution::new(vec![(vec![], 0.2), (vec![3, 1], 0.5), (vec![9], 0.3)])
            .unwrap();
        assert!((expected_best_response_linear(1, 1.0, &b).unwrap() - 0.5).abs() < 1e-7);
        let empty = BeliefDistribution::degenerate(vec![]).unwrap();
        let x = expected_best_response_linear(2, 1.0, &empty).unwrap();
        assert!((x - 1.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn malformed_beliefs() {
        assert!(BeliefDistribution::new(vec![]).is_err());
        assert!(BeliefDistribution::new(vec![(vec![1], 0.5)]).is_err());
        assert!(BeliefDistribution::new(vec![(vec![1], 1.5), (vec![2], -0.5)]).is_err());
        assert!(BeliefDistribution::new(vec![(vec![0], 1.0)]).is_err());
    }

    #[test]
    fn rejects_nonpositive_competitive_quantity() {
        assert!(solve_linear_closed_form(&seq(&[1]), 0.0).is_err());
    }
}
