use serde::{Deserialize, Serialize};

use super::{interior, EquilibriumOutcome, FirmGroup};
use crate::error::{Error, Result};

const SI_TOL: f64 = 1e-12;

/// Symmetric quadratic payoff
/// `alpha0 + alpha1 x_i - alpha2/2 x_i^2 + beta1 sum_{j!=i} x_j - beta2 x_i sum_{j!=i} x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPayoff {
    #[serde(default)]
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(default)]
    pub beta1: f64,
    pub beta2: f64,
}

impl QuadraticPayoff {
    pub fn new(alpha0: f64, alpha1: f64, alpha2: f64, beta1: f64, beta2: f64) -> Self {
        QuadraticPayoff {
            alpha0,
            alpha1,
            alpha2,
            beta1,
            beta2,
        }
    }

    /// Payoff as a function of own quantity and the total.
    pub fn payoff(&self, own: f64, total: f64) -> f64 {
        let others = total - own;
        self.alpha0 + self.alpha1 * own - 0.5 * self.alpha2 * own * own + self.beta1 * others
            - self.beta2 * own * others
    }

    pub fn is_trivial(&self) -> bool {
        self.alpha1 == 0.0 || self.alpha2 == self.beta2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticSolution {
    pub leaders_total: f64,
    pub total: f64,
    pub leader_quantity: f64,
    /// `None` when no firms arrive in period 2.
    pub follower_quantity: Option<f64>,
    pub n1: u32,
    pub n2: u32,
}

impl QuadraticSolution {
    pub fn to_outcome(&self, payoff: &QuadraticPayoff) -> EquilibriumOutcome {
        let mut groups = vec![FirmGroup {
            period: 1,
            count: self.n1,
            quantity: self.leader_quantity,
            profit: Some(payoff.payoff(self.leader_quantity, self.total)),
        }];
        if let Some(q) = self.follower_quantity {
            groups.push(FirmGroup {
                period: 2,
                count: self.n2,
                quantity: q,
                profit: Some(payoff.payoff(q, self.total)),
            });
        }
        EquilibriumOutcome {
            total: self.total,
            groups,
            residual: 0.0,
            price: None,
            competitive_quantity: None,
        }
    }
}

/// Two-period equilibrium with `n1` leaders and `n2` followers.
///
/// With `d = alpha2 - beta2`, the followers' first-order conditions give
/// `X(X_1) = (n2 alpha1 + d X_1) / (n2 beta2 + d)`. Substituting into the
/// leaders' symmetric conditions yields
/// `X_1 = n1 (alpha1 d - beta1 beta2 n2) / (d^2 + d beta2 (n1 + n2) - n2 beta2^2)`.
pub fn solve_quadratic_two_period(
    p: &QuadraticPayoff,
    n1: u32,
    n2: u32,
) -> Result<QuadraticSolution> {
    if n1 == 0 {
        return Err(Error::InvalidSequence("period 1 needs a firm".into()));
    }
    let (a1, b1, b2) = (p.alpha1, p.beta1, p.beta2);
    let d = p.alpha2 - p.beta2;
    let (f1, f2) = (n1 as f64, n2 as f64);
    let follower_denominator = f2 * b2 + d;
    let leader_denominator = d * d + d * b2 * (f1 + f2) - f2 * b2 * b2;
    if d == 0.0 || follower_denominator == 0.0 || leader_denominator == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let leaders_total = f1 * (a1 * d - b1 * b2 * f2) / leader_denominator;
    let total = (f2 * a1 + d * leaders_total) / follower_denominator;
    let leader_quantity = interior(1, leaders_total / f1)?;
    let follower_quantity = if n2 > 0 {
        Some(interior(2, (total - leaders_total) / f2)?)
    } else {
        None
    };
    Ok(QuadraticSolution {
        leaders_total,
        total,
        leader_quantity,
        follower_quantity,
        n1,
        n2,
    })
}

/// Whether the payoff reduces to linear net demand: `alpha2 = 2 beta2` and `beta1 = 0`.
pub fn quadratic_si_condition(p: &QuadraticPayoff) -> Result<bool> {
    if p.is_trivial() {
        return Err(Error::TrivialModel);
    }
    Ok((p.alpha2 - 2.0 * p.beta2).abs() <= SI_TOL && p.beta1.abs() <= SI_TOL)
}
