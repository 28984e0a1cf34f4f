use serde::{Deserialize, Serialize};

use super::{interior, EquilibriumOutcome, FirmGroup};
use crate::error::{Error, Result};
use crate::sequence::PeriodSequence;

/// Firm `i` earns `x_i a_i (xbar_c_i - X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmParams {
    pub a: f64,
    pub xbar_c: f64,
}

impl FirmParams {
    pub fn new(a: f64, xbar_c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidModel(format!("firm scale a = {a} must be > 0")));
        }
        if !(xbar_c > 0.0 && xbar_c.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "zero-profit quantity {xbar_c} must be > 0"
            )));
        }
        Ok(FirmParams { a, xbar_c })
    }

    pub fn payoff(&self, own: f64, total: f64) -> f64 {
        own * self.a * (self.xbar_c - total)
    }
}

/// Firms in arrival order; a period sequence assigns them to periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneousLinearModel {
    pub firms: Vec<FirmParams>,
}

impl HeterogeneousLinearModel {
    pub fn new(firms: Vec<FirmParams>) -> Result<Self> {
        for f in &firms {
            FirmParams::new(f.a, f.xbar_c)?;
        }
        Ok(HeterogeneousLinearModel { firms })
    }

    /// Splits the firm list by period.
    pub fn assign<'a>(&'a self, n: &PeriodSequence) -> Result<Vec<&'a [FirmParams]>> {
        if self.firms.len() as u64 != n.total_firms() {
            return Err(Error::InvalidModel(format!(
                "{} firms given for a sequence with {} firms",
                self.firms.len(),
                n.total_firms()
            )));
        }
        let mut rest = self.firms.as_slice();
        let mut out = Vec::with_capacity(n.periods());
        for &count in n.counts() {
            let (head, tail) = rest.split_at(count as usize);
            out.push(head);
            rest = tail;
        }
        Ok(out)
    }
}

/// Backward induction with affine continuation maps.
///
/// After period `t` the final total is `A_t + B_t X_t`. Period-`t` first-order
/// conditions `x_i = (xbar_c_i - A_t - B_t X_t) / B_t` sum to
/// `X_t = C_t + D_t X_{t-1}` with `D_t = 1 / (1 + n_t)`, which composes into
/// `A_{t-1} = A_t + B_t C_t`, `B_{t-1} = B_t D_t`.
pub fn solve_heterogeneous_linear(
    model: &HeterogeneousLinearModel,
    n: &PeriodSequence,
) -> Result<EquilibriumOutcome> {
    let periods = model.assign(n)?;
    let t_max = periods.len();
    // (A_t, B_t, C_t, D_t) per period
    let mut maps = vec![(0.0, 0.0, 0.0, 0.0); t_max];
    let (mut a_cont, mut b_cont) = (0.0, 1.0);
    for t in (0..t_max).rev() {
        if !(b_cont > 0.0) {
            return Err(Error::DegenerateSlope {
                period: t + 1,
                slope: b_cont,
            });
        }
        let firms = periods[t];
        let d = 1.0 / (1.0 + firms.len() as f64);
        let c = firms.iter().map(|f| f.xbar_c - a_cont).sum::<f64>() / b_cont * d;
        maps[t] = (a_cont, b_cont, c, d);
        a_cont += b_cont * c;
        b_cont *= d;
    }

    let mut cumulative = 0.0;
    let mut quantities = Vec::with_capacity(model.firms.len());
    let mut residual: f64 = 0.0;
    for (t, firms) in periods.iter().enumerate() {
        let (a, b, c, d) = maps[t];
        let next = c + d * cumulative;
        let mut period_sum = 0.0;
        for f in firms.iter() {
            let x = (f.xbar_c - a - b * next) / b;
            residual = residual.max((f.xbar_c - a - b * next - b * x).abs());
            period_sum += x;
            quantities.push((t + 1, interior(t + 1, x)?, *f));
        }
        residual = residual.max((cumulative + period_sum - next).abs());
        cumulative = next;
    }
    let total = cumulative;
    let groups = quantities
        .into_iter()
        .map(|(period, quantity, f)| FirmGroup {
            period,
            count: 1,
            quantity,
            profit: Some(f.payoff(quantity, total)),
        })
        .collect();
    Ok(EquilibriumOutcome {
        total,
        groups,
        residual,
        price: None,
        competitive_quantity: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_linear_closed_form;

    fn firms(params: &[(f64, f64)]) -> HeterogeneousLinearModel {
        HeterogeneousLinearModel::new(
            params
                .iter()
                .map(|&(a, x)| FirmParams::new(a, x).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn seq(v: &[u32]) -> PeriodSequence {
        PeriodSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_firms_reduce_to_closed_form() {
        let n = seq(&[2, 1, 3]);
        let model = firms(&[(1.0, 0.9); 6]);
        let het = solve_heterogeneous_linear(&model, &n).unwrap();
        let closed = solve_linear_closed_form(&n, 0.9).unwrap();
        assert!((het.total - closed.total).abs() < 1e-14);
        for t in 1..=3 {
            for q in het.period_quantities(t) {
                assert!((q - closed.quantity_in_period(t).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn leader_reacts_to_cheaper_follower() {
        let mono = solve_heterogeneous_linear(&firms(&[(1.0, 1.0)]), &seq(&[1])).unwrap();
        assert_eq!(mono.groups[0].quantity, 0.5);
        let duo =
            solve_heterogeneous_linear(&firms(&[(1.0, 1.0), (1.0, 0.8)]), &seq(&[1, 1])).unwrap();
        assert!((duo.groups[0].quantity - 0.6).abs() < 1e-15);
        assert!((duo.groups[1].quantity - 0.1).abs() < 1e-15);
        let same =
            solve_heterogeneous_linear(&firms(&[(1.0, 1.0), (3.0, 1.0)]), &seq(&[1, 1])).unwrap();
        assert_eq!(same.groups[0].quantity, 0.5);
    }

    #[test]
    fn scale_parameters_only_move_profits() {
        let n = seq(&[1, 2]);
        let base = solve_heterogeneous_linear(&firms(&[(1.0, 1.0), (1.0, 0.9), (1.0, 1.1)]), &n)
            .unwrap();
        let scaled = solve_heterogeneous_linear(&firms(&[(5.0, 1.0), (0.2, 0.9), (1.0, 1.1)]), &n)
            .unwrap();
        for (a, b) in base.groups.iter().zip(&scaled.groups) {
            assert_eq!(a.quantity, b.quantity);
        }
        assert_ne!(base.groups[0].profit, scaled.groups[0].profit);
    }

    #[test]
    fn corner_solutions_are_rejected() {
        // follower with far larger zero-profit quantity makes the leader's FOC negative
        let model = firms(&[(1.0, 0.2), (1.0, 2.0)]);
        assert!(matches!(
            solve_heterogeneous_linear(&model, &seq(&[1, 1])),
            Err(Error::NonInterior { period: 1, .. })
        ));
    }

    #[test]
    fn firm_count_must_match() {
        assert!(solve_heterogeneous_linear(&firms(&[(1.0, 1.0)]), &seq(&[1, 1])).is_err());
    }
}
