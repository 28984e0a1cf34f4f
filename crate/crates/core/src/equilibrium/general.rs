//! Equilibria under general smooth demand via the `g_k` recursion
//! `g_1 = g = -(P - c) / P'`, `g_{k+1} = -g_k' g`.

use std::cell::Cell;

use super::{interior, EquilibriumOutcome, FirmGroup, ROOT_SCAN_CELLS};
use crate::demand::DemandModel;
use crate::error::{Error, Result};
use crate::jet::JetError;
use crate::numeric::scan_roots;
use crate::sequence::{s_measures, suffix_measures, PeriodSequence, SMeasures};

/// Longest sequence the jet recursion supports.
pub const MAX_PERIODS: usize = 10;

/// `(g_k(X), g_k'(X))` for `k = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GValues(pub Vec<(f64, f64)>);

impl GValues {
    /// `g_k(X)`, 1-based.
    pub fn value(&self, k: usize) -> f64 {
        self.0[k - 1].0
    }

    /// `g_k'(X)`, 1-based.
    pub fn slope(&self, k: usize) -> f64 {
        self.0[k - 1].1
    }
}

pub fn g_sequence(model: &DemandModel, x: f64, periods: usize) -> Result<GValues> {
    if periods == 0 || periods > MAX_PERIODS {
        return Err(Error::InvalidSequence(format!(
            "g recursion supports 1..={MAX_PERIODS} periods, got {periods}"
        )));
    }
    let g = model.g_jet(x, periods + 2)?;
    let mut out = Vec::with_capacity(periods);
    let mut current = g.clone();
    for k in 1..=periods {
        let slope = current.derivative()?;
        out.push((current.value(), slope.value()));
        if k < periods {
            current = slope.checked_mul(&g.truncate(slope.order()))?.scale(-1.0);
        }
    }
    Ok(GValues(out))
}

/// Every root of an equilibrium condition found by the scan-and-bisect
/// search. An error raised while evaluating the condition is passed on.
pub(crate) fn all_roots<F>(condition: F, lo: f64, hi: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> std::result::Result<f64, Error>,
{
    let failure: Cell<Option<Error>> = Cell::new(None);
    let f = |x: f64| match condition(x) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let roots = scan_roots(&f, lo, hi, ROOT_SCAN_CELLS);
    match failure.take() {
        Some(e) => Err(e),
        None => Ok(roots),
    }
}

/// Like [`all_roots`] but exactly one root is accepted.
pub(crate) fn unique_root<F>(condition: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> std::result::Result<f64, Error>,
{
    let roots = all_roots(condition, lo, hi)?;
    match roots.as_slice() {
        [root] => Ok(*root),
        _ => Err(Error::RegularityViolated { roots }),
    }
}

/// Picks the equilibrium among the roots of a condition.
///
/// Roots whose implied quantities are negative are not equilibria and are
/// dropped. If several remain and period 1 holds a single firm facing at most
/// one later period, the leader picks the one it likes best; otherwise the
/// candidates are reported as a regularity violation.
fn select_equilibrium<F>(roots: Vec<f64>, single_leader: bool, build: F) -> Result<EquilibriumOutcome>
where
    F: Fn(f64) -> Result<EquilibriumOutcome>,
{
    let mut first_error = None;
    let mut candidates = Vec::new();
    for &root in &roots {
        match build(root) {
            Ok(out) => candidates.push(out),
            Err(e @ Error::NonInterior { .. }) => {
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if candidates.len() > 1 && !single_leader {
        return Err(Error::RegularityViolated {
            roots: candidates.iter().map(|c| c.total).collect(),
        });
    }
    let leader_profit = |c: &EquilibriumOutcome| c.groups[0].profit.unwrap_or(f64::NEG_INFINITY);
    candidates
        .into_iter()
        .reduce(|best, c| if leader_profit(&c) > leader_profit(&best) { c } else { best })
        .ok_or_else(|| first_error.unwrap_or(Error::RegularityViolated { roots }))
}

/// `X - sum_k S_k g_k(X)`.
fn aggregate_condition(model: &DemandModel, s: &SMeasures, x: f64) -> Result<f64> {
    let g = g_sequence(model, x, s.len())?;
    let weighted: f64 = (1..=s.len()).map(|k| s.get(k) as f64 * g.value(k)).sum();
    Ok(x - weighted)
}

/// Solves `X = sum_k S_k(n) g_k(X)` on `[0, xbar_c]`, then recovers each
/// period's quantity `g(X*) [1 - sum_{k<=T-s} S_k(n^s) g_k'(X*)]`.
pub fn solve_general(model: &DemandModel, n: &PeriodSequence) -> Result<EquilibriumOutcome> {
    let periods = n.periods();
    let s = s_measures(n)?;
    let xbar_c = model.competitive_quantity()?.xbar_c;
    let roots = all_roots(|x| aggregate_condition(model, &s, x), 0.0, xbar_c)?;
    let single_leader = n.count(1) == 1 && periods <= 2;
    select_equilibrium(roots, single_leader, |total| {
        let g = g_sequence(model, total, periods)?;
        let mut groups = Vec::with_capacity(periods);
        for period in 1..=periods {
            let remainder = suffix_measures(n, period)?;
            let discouragement: f64 = (1..=remainder.len())
                .map(|k| remainder.get(k) as f64 * g.slope(k))
                .sum();
            let quantity = interior(period, g.value(1) * (1.0 - discouragement))?;
            groups.push(FirmGroup {
                period,
                count: n.count(period),
                quantity,
                profit: None,
            });
        }
        let residual = aggregate_condition(model, &s, total)?.abs();
        Ok(EquilibriumOutcome {
            total,
            groups,
            residual,
            price: None,
            competitive_quantity: Some(xbar_c),
        }
        .priced(model))
    })
}

/// One leader followed by `total_firms - 1` simultaneous followers. Solves
/// `X = n g(X) - (n - 1) g'(X) g(X)`; the leader produces `X - (n - 1) g(X)`
/// and each follower `g(X)`.
pub fn solve_two_period_single_leader(
    model: &DemandModel,
    total_firms: u32,
) -> Result<EquilibriumOutcome> {
    if total_firms == 0 {
        return Err(Error::InvalidSequence("at least one firm required".into()));
    }
    let n = total_firms as f64;
    let followers = n - 1.0;
    let condition = |x: f64| -> std::result::Result<f64, Error> {
        let jet = model.g_jet(x, 1)?;
        let (g, dg) = (jet.value(), jet.coeffs()[1]);
        Ok(x - n * g + followers * dg * g)
    };
    let xbar_c = model.competitive_quantity()?.xbar_c;
    let roots = all_roots(condition, 0.0, xbar_c)?;
    select_equilibrium(roots, true, |total| {
        let g = model.g(total);
        if !g.is_finite() {
            return Err(JetError::DivisionByZero(model.price_slope(total)).into());
        }
        let mut groups = vec![FirmGroup {
            period: 1,
            count: 1,
            quantity: interior(1, total - followers * g)?,
            profit: None,
        }];
        if total_firms > 1 {
            groups.push(FirmGroup {
                period: 2,
                count: total_firms - 1,
                quantity: interior(2, g)?,
                profit: None,
            });
        }
        Ok(EquilibriumOutcome {
            total,
            groups,
            residual: condition(total)?.abs(),
            price: None,
            competitive_quantity: Some(xbar_c),
        }
        .priced(model))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_linear_closed_form;
    use std::f64::consts::PI;

    fn seq(v: &[u32]) -> PeriodSequence {
        PeriodSequence::new(v.to_vec()).unwrap()
    }

    fn fig2(eps: f64) -> DemandModel {
        DemandModel::sine(1.0, 1.0, eps, 5, 0.0).unwrap()
    }

    #[test]
    fn linear_g_chain_is_flat() {
        let g = g_sequence(&DemandModel::unit_linear(), 0.4, 3).unwrap();
        for k in 1..=3 {
            assert!((g.value(k) - 0.6).abs() < 1e-15);
            assert!((g.slope(k) + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn g_chain_at_competitive_quantity() {
        for m in [fig2(0.023), fig2(-0.023), DemandModel::unit_linear()] {
            let g = g_sequence(&m, m.xbar_c(), 5).unwrap();
            for k in 1..=5 {
                assert!(g.value(k).abs() <= 1e-10, "g_{k}");
                assert!((g.slope(k) + 1.0).abs() <= 1e-8, "g_{k}'");
            }
        }
    }

    #[test]
    fn second_g_matches_hand_derivatives() {
        // g = -p / p', g' = -1 + p p'' / p'^2, g_2 = -g' g,
        // g_2' = -g'' g - g'^2 with g'' from differentiating g' once more.
        let x = 0.5;
        let (e, w) = (0.023, 5.0 * PI);
        let p = 1.0 - x - e * (w * x).sin();
        let p1 = -1.0 - e * w * (w * x).cos();
        let p2 = e * w * w * (w * x).sin();
        let p3 = e * w * w * w * (w * x).cos();
        let g = -p / p1;
        let g1 = -1.0 + p * p2 / (p1 * p1);
        let g2 = (p1 * p2 + p * p3) / (p1 * p1) - 2.0 * p * p2 * p2 / (p1 * p1 * p1);
        let vals = g_sequence(&fig2(0.023), x, 2).unwrap();
        assert!((vals.value(1) - g).abs() < 1e-14);
        assert!((vals.slope(1) - g1).abs() < 1e-13);
        assert!((vals.value(2) + g1 * g).abs() < 1e-13);
        assert!((vals.slope(2) - (-g2 * g - g1 * g1)).abs() < 1e-12);
    }

    #[test]
    fn general_solver_reproduces_closed_form() {
        let m = DemandModel::linear(2.0, 1.5, 1.0).unwrap();
        for counts in [vec![1], vec![1, 1], vec![2, 3, 1], vec![1, 4, 2, 3]] {
            let n = seq(&counts);
            let general = solve_general(&m, &n).unwrap();
            let closed = solve_linear_closed_form(&n, m.xbar_c()).unwrap();
            assert!((general.total - closed.total).abs() < 1e-10);
            for (a, b) in general.groups.iter().zip(&closed.groups) {
                assert!((a.quantity - b.quantity).abs() < 1e-10);
            }
            assert!(general.residual <= 1e-10);
            assert!((general.quantity_sum() - general.total).abs() < 1e-10);
        }
    }

    #[test]
    fn two_period_linear_examples() {
        let m = DemandModel::unit_linear();
        let mono = solve_two_period_single_leader(&m, 1).unwrap();
        assert!((mono.total - 0.5).abs() < 1e-12);
        assert_eq!(mono.groups.len(), 1);
        let four = solve_two_period_single_leader(&m, 4).unwrap();
        assert!((four.total - 0.875).abs() < 1e-12);
        assert!((four.groups[0].quantity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_period_agrees_with_general() {
        for eps in [0.023, -0.023] {
            let m = fig2(eps);
            for total in 2..=50u32 {
                let a = solve_two_period_single_leader(&m, total).unwrap();
                let b = solve_general(&m, &seq(&[1, total - 1])).unwrap();
                assert!((a.total - b.total).abs() < 1e-9);
                assert!((a.groups[0].quantity - b.groups[0].quantity).abs() < 1e-9);
                assert!((a.groups[1].quantity - b.groups[1].quantity).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sine_leader_deviates_from_monopoly_half() {
        let up = solve_general(&fig2(0.023), &seq(&[1, 1])).unwrap();
        let down = solve_general(&fig2(-0.023), &seq(&[1, 1])).unwrap();
        let (xu, xd) = (up.groups[0].quantity, down.groups[0].quantity);
        assert!((xu - 0.5).abs() > 1e-3 && (xd - 0.5).abs() > 1e-3);
        assert!((xu - xd).abs() > 1e-3);
    }

    #[test]
    fn too_many_periods() {
        let n = seq(&[1; 11]);
        assert!(matches!(
            solve_general(&DemandModel::unit_linear(), &n),
            Err(Error::InvalidSequence(_))
        ));
    }
}
