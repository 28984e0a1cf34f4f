//! Diagnostics built on the solvers: independence checks, observer
//! inference, limit sweeps and figure tables.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::DemandModel;
use crate::equilibrium::{
    solve_general, solve_heterogeneous_linear, solve_linear_closed_form,
    solve_quadratic_two_period, solve_two_period_single_leader, EquilibriumOutcome, FirmParams,
    HeterogeneousLinearModel, QuadraticPayoff,
};
use crate::error::{Error, Result};
use crate::oracle::PayoffModel;
use crate::sequence::PeriodSequence;

/// Default tolerance for independence verdicts.
pub const DEFAULT_INDEPENDENCE_TOL: f64 = 1e-9;

/// Firms in arrival order; sequences longer than `firms` are padded with `entrant`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneousSpec {
    pub firms: Vec<FirmParams>,
    #[serde(default)]
    pub entrant: Option<FirmParams>,
}

impl HeterogeneousSpec {
    /// The concrete firm list for `n`.
    pub fn model_for(&self, n: &PeriodSequence) -> Result<HeterogeneousLinearModel> {
        let needed = n.total_firms() as usize;
        let mut firms: Vec<FirmParams> = self.firms.iter().take(needed).copied().collect();
        while firms.len() < needed {
            match self.entrant {
                Some(e) => firms.push(e),
                None => {
                    return Err(Error::InvalidModel(format!(
                        "{} firms given, {needed} needed and no entrant specified",
                        self.firms.len()
                    )))
                }
            }
        }
        HeterogeneousLinearModel::new(firms)
    }
}

/// Any payoff specification the CLI accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum GameModel {
    Demand(DemandModel),
    Quadratic(QuadraticPayoff),
    Heterogeneous(HeterogeneousSpec),
}

impl GameModel {
    /// Reads a JSON object whose `family` is `linear`, `sine`, `quadratic` or `heterogeneous`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        let family = value
            .get("family")
            .and_then(|f| f.as_str())
            .ok_or_else(|| Error::InvalidModel("missing string field `family`".into()))?
            .to_string();
        let bad = |e: serde_json::Error| Error::InvalidModel(e.to_string());
        match family.as_str() {
            "linear" | "sine" => Ok(GameModel::Demand(
                serde_json::from_value(value).map_err(bad)?,
            )),
            "quadratic" => Ok(GameModel::Quadratic(
                serde_json::from_value(value).map_err(bad)?,
            )),
            "heterogeneous" => {
                let spec: HeterogeneousSpec = serde_json::from_value(value).map_err(bad)?;
                for f in spec.firms.iter().chain(spec.entrant.iter()) {
                    FirmParams::new(f.a, f.xbar_c)?;
                }
                Ok(GameModel::Heterogeneous(spec))
            }
            other => Err(Error::InvalidModel(format!("unknown family `{other}`"))),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut value = match self {
            GameModel::Demand(m) => serde_json::to_value(m),
            GameModel::Quadratic(p) => serde_json::to_value(p),
            GameModel::Heterogeneous(h) => serde_json::to_value(h),
        }
        .expect("models serialize");
        let family = match self {
            GameModel::Demand(m) => serde_json::to_value(m.family()).expect("family serializes"),
            GameModel::Quadratic(_) => "quadratic".into(),
            GameModel::Heterogeneous(_) => "heterogeneous".into(),
        };
        value["family"] = family;
        value
    }

    /// The payoff model the grid oracle needs for `n`.
    pub fn payoff_model(&self, n: &PeriodSequence) -> Result<PayoffModel> {
        Ok(match self {
            GameModel::Demand(m) => PayoffModel::Demand(*m),
            GameModel::Quadratic(p) => PayoffModel::Quadratic(*p),
            GameModel::Heterogeneous(h) => PayoffModel::Heterogeneous(h.model_for(n)?),
        })
    }

    /// Natural quantity scale: the largest zero-profit quantity.
    pub fn scale(&self) -> Result<f64> {
        match self {
            GameModel::Demand(m) => Ok(m.competitive_quantity()?.xbar_c),
            GameModel::Quadratic(p) => {
                if p.beta2 == 0.0 || p.alpha1 / p.beta2 <= 0.0 {
                    Ok(p.alpha1.abs().max(1.0))
                } else {
                    Ok(p.alpha1 / p.beta2)
                }
            }
            GameModel::Heterogeneous(h) => Ok(h
                .firms
                .iter()
                .chain(h.entrant.iter())
                .map(|f| f.xbar_c)
                .fold(0.0, f64::max)),
        }
    }
}

/// Solves the game `n` with the solver matching the payoff family.
pub fn solve(model: &GameModel, n: &PeriodSequence) -> Result<EquilibriumOutcome> {
    match model {
        GameModel::Demand(m) if m.is_linear() => {
            Ok(solve_linear_closed_form(n, m.competitive_quantity()?.xbar_c)?.priced(m))
        }
        GameModel::Demand(m) => match n.counts() {
            [1, followers] => solve_two_period_single_leader(m, 1 + followers),
            _ => solve_general(m, n),
        },
        GameModel::Quadratic(p) => {
            let (n1, n2) = match n.counts() {
                [n1] => (*n1, 0),
                [n1, n2] => (*n1, *n2),
                _ => {
                    return Err(Error::InvalidSequence(
                        "quadratic payoffs are solved for at most two periods".into(),
                    ))
                }
            };
            Ok(solve_quadratic_two_period(p, n1, n2)?.to_outcome(p))
        }
        GameModel::Heterogeneous(h) => solve_heterogeneous_linear(&h.model_for(n)?, n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub prefix: PeriodSequence,
    pub extensions: Vec<Vec<u32>>,
    /// On-path quantities of the prefix firms, one row per extension.
    pub quantities: Vec<Vec<f64>>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Solves `prefix` extended by each suffix and compares the prefix firms'
/// on-path quantities across all pairs of extensions.
pub fn check_independence(
    model: &GameModel,
    prefix: &PeriodSequence,
    extensions: &[Vec<u32>],
    tol: f64,
) -> Result<IndependenceReport> {
    if extensions.is_empty() {
        return Err(Error::InvalidSequence("no extensions to compare".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidModel(format!("tolerance {tol} must be >= 0")));
    }
    let prefix_firms = prefix.total_firms() as usize;
    let quantities: Vec<Vec<f64>> = extensions
        .par_iter()
        .map(|suffix| {
            let annotate = |e: Error| e.context(format!("extension {suffix:?}"));
            let n = prefix.extend(suffix).map_err(annotate)?;
            let out = solve(model, &n).map_err(annotate)?;
            Ok(out
                .firms()
                .iter()
                .take(prefix_firms)
                .map(|f| f.quantity)
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut max_deviation: f64 = 0.0;
    for (i, a) in quantities.iter().enumerate() {
        for b in &quantities[i + 1..] {
            for (x, y) in a.iter().zip(b) {
                max_deviation = max_deviation.max((x - y).abs());
            }
        }
    }
    Ok(IndependenceReport {
        prefix: prefix.clone(),
        extensions: extensions.to_vec(),
        quantities,
        max_deviation,
        tolerance: tol,
        verdict: if max_deviation <= tol {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        },
    })
}

/// Competitive quantity implied by one firm's quantity under linear demand:
/// `x prod_{s<=t} (1 + n_s)`.
pub fn infer_competitive_quantity(x_observed: f64, prefix: &[u32]) -> f64 {
    prefix.iter().fold(x_observed, |acc, &n| acc * (1.0 + n as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub n_t: u32,
    pub total: f64,
    /// Individual quantity in each period before `t`.
    pub prefix_quantities: Vec<f64>,
    /// `xbar_c - X*`
    pub gap: f64,
    /// `n_t g(X*)`
    pub scaled_g: f64,
}

/// Solves `base` with `n_t` replaced by each value of `grid`.
pub fn limit_sweep(
    model: &DemandModel,
    base: &PeriodSequence,
    t: usize,
    grid: &[u32],
) -> Result<Vec<LimitRow>> {
    base.prefix(t)?;
    let xbar_c = model.competitive_quantity()?.xbar_c;
    let game = GameModel::Demand(*model);
    grid.par_iter()
        .map(|&n_t| {
            let mut counts = base.counts().to_vec();
            counts[t - 1] = n_t;
            let n = PeriodSequence::new(counts)?;
            let out = solve(&game, &n).map_err(|e| e.context(format!("n_{t} = {n_t}")))?;
            Ok(LimitRow {
                n_t,
                total: out.total,
                prefix_quantities: (1..t)
                    .map(|s| out.quantity_in_period(s).unwrap_or(0.0))
                    .collect(),
                // closed form avoids cancellation in xbar_c - X*
                gap: if model.is_linear() {
                    xbar_c / n.prefix_product(n.periods())
                } else {
                    xbar_c - out.total
                },
                scaled_g: n_t as f64 * model.g(out.total),
            })
        })
        .collect()
}

/// Header plus rows of numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, enough to round-trip any `f64`. Integers print plainly.
pub fn format_float(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

/// Solve output, one row per firm.
pub fn outcome_csv(out: &EquilibriumOutcome) -> String {
    let mut csv = String::from("period,firm_index,quantity,price,profit\n");
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for f in out.firms() {
        let _ = writeln!(
            csv,
            "{},{},{:.16e},{},{}",
            f.period,
            f.firm_index,
            f.quantity,
            opt(out.price),
            opt(f.profit)
        );
    }
    csv
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

impl std::str::FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            other => Err(Error::InvalidModel(format!("unknown figure `{other}`"))),
        }
    }
}

/// Overrides for the figure models; `None` keeps the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FigureOptions {
    /// Largest total number of firms.
    pub n_max: Option<u32>,
    /// Perturbation amplitude (both signs for fig2).
    pub eps: Option<f64>,
    /// Perturbation frequency.
    pub k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub figure: Figure,
    /// Leader and total quantity by number of firms.
    pub series: Table,
    /// Inverse demand samples, for the figures that show them.
    pub demand: Option<Table>,
}

/// Leader quantity and total for one leader and `n - 1` followers, `n = 1..=n_max`.
pub fn figure_data(figure: Figure, opts: FigureOptions) -> Result<FigureData> {
    match figure {
        Figure::Fig1 => {
            let n_max = opts.n_max.unwrap_or(10);
            let mut series = Table::new(&["n", "leader_quantity", "total_quantity"]);
            for n in 1..=n_max {
                let seq = PeriodSequence::new(single_leader_counts(n))?;
                let out = solve_linear_closed_form(&seq, 1.0)?;
                series
                    .rows
                    .push(vec![n as f64, out.groups[0].quantity, out.total]);
            }
            Ok(FigureData {
                figure,
                series,
                demand: None,
            })
        }
        Figure::Fig2 => {
            let eps = opts.eps.unwrap_or(0.023).abs();
            let k = opts.k.unwrap_or(5);
            let models = [
                DemandModel::sine(1.0, 1.0, eps, k, 0.0)?,
                DemandModel::sine(1.0, 1.0, -eps, k, 0.0)?,
            ];
            let series = leader_series(
                &models,
                opts.n_max.unwrap_or(20),
                &["leader_pos", "total_pos", "leader_neg", "total_neg"],
            )?;
            let demand = demand_samples(&models, &["price_pos", "price_neg"]);
            Ok(FigureData {
                figure,
                series,
                demand: Some(demand),
            })
        }
        Figure::Fig3 => {
            let models = [DemandModel::sine(
                1.0,
                1.0,
                opts.eps.unwrap_or(0.00025),
                opts.k.unwrap_or(100),
                0.0,
            )?];
            let series = leader_series(
                &models,
                opts.n_max.unwrap_or(50),
                &["leader_quantity", "total_quantity"],
            )?;
            let demand = demand_samples(&models, &["price"]);
            Ok(FigureData {
                figure,
                series,
                demand: Some(demand),
            })
        }
    }
}

fn single_leader_counts(n: u32) -> Vec<u32> {
    if n == 1 {
        vec![1]
    } else {
        vec![1, n - 1]
    }
}

fn leader_series(models: &[DemandModel], n_max: u32, columns: &[&str]) -> Result<Table> {
    let mut header = vec!["n"];
    header.extend_from_slice(columns);
    let mut table = Table::new(&header);
    let rows: Vec<Vec<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut row = vec![n as f64];
            for m in models {
                let out = solve_two_period_single_leader(m, n)
                    .map_err(|e| e.context(format!("n = {n}")))?;
                row.push(out.groups[0].quantity);
                row.push(out.total);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    table.rows = rows;
    Ok(table)
}

fn demand_samples(models: &[DemandModel], columns: &[&str]) -> Table {
    let mut header = vec!["x"];
    header.extend_from_slice(columns);
    let mut table = Table::new(&header);
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let mut row = vec![x];
        row.extend(models.iter().map(|m| m.price(x)));
        table.rows.push(row);
    }
    table
}

/// Minimal SVG line chart: one polyline per `(name, points)` series.
pub fn render_svg(title: &str, x_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 56.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
    ];
    let points = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {} H{} M{M} {} V{}" stroke="black" fill="none"/>"#,
        H - M,
        W - M,
        M,
        H - M
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            sx(fx),
            H - M + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            M - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        W / 2.0,
        H - 14.0,
        escape(x_label)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        let ly = M + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            W - M - 120.0,
            W - M - 100.0,
            W - M - 94.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl FigureData {
    /// Every non-`n` column against `n`.
    pub fn to_svg(&self) -> String {
        let n = self.series.column("n").unwrap_or_default();
        let series: Vec<(String, Vec<(f64, f64)>)> = self
            .series
            .header
            .iter()
            .skip(1)
            .map(|name| {
                let ys = self.series.column(name).unwrap_or_default();
                (name.clone(), n.iter().copied().zip(ys).collect())
            })
            .collect();
        let title = match self.figure {
            Figure::Fig1 => "Linear demand, one leader and n - 1 followers",
            Figure::Fig2 => "Perturbed demand, eps = +/-0.023, k = 5",
            Figure::Fig3 => "Perturbed demand, eps = 0.00025, k = 100",
        };
        render_svg(title, "n", &series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u32]) -> PeriodSequence {
        PeriodSequence::new(v.to_vec()).unwrap()
    }

    fn unit() -> GameModel {
        GameModel::Demand(DemandModel::unit_linear())
    }

    #[test]
    fn linear_independence_holds() {
        let r = check_independence(
            &unit(),
            &seq(&[1]),
            &[vec![], vec![1], vec![2], vec![1, 1]],
            DEFAULT_INDEPENDENCE_TOL,
        )
        .unwrap();
        assert!(r.max_deviation <= 1e-10);
        assert_eq!(r.verdict, Verdict::Satisfied);
        assert_eq!(r.quantities.len(), 4);
    }

    #[test]
    fn sine_independence_fails() {
        let m = GameModel::Demand(DemandModel::sine(1.0, 1.0, 0.023, 5, 0.0).unwrap());
        let r = check_independence(&m, &seq(&[1]), &[vec![], vec![1], vec![2]], 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
    }

    #[test]
    fn quadratic_independence_iff_condition() {
        let ext: Vec<Vec<u32>> = std::iter::once(vec![])
            .chain((1..=5).map(|n2| vec![n2]))
            .collect();
        for n1 in 1..=3 {
            let si = GameModel::Quadratic(QuadraticPayoff::new(0.0, 1.0, 2.0, 0.0, 1.0));
            let r = check_independence(&si, &seq(&[n1]), &ext, 1e-9).unwrap();
            assert_eq!(r.verdict, Verdict::Satisfied);
        }
    }

    #[test]
    fn errors_name_the_extension() {
        let q = GameModel::Quadratic(QuadraticPayoff::new(0.0, 1.0, 2.0, 0.0, 1.0));
        let err = check_independence(&q, &seq(&[1]), &[vec![1, 1]], 1e-9).unwrap_err();
        assert!(err.to_string().contains("[1, 1]"));
        assert!(matches!(err.root(), Error::InvalidSequence(_)));
    }

    #[test]
    fn inference_examples() {
        assert_eq!(infer_competitive_quantity(0.5, &[1]), 1.0);
        assert!((infer_competitive_quantity(1.0 / 9.0, &[2, 2]) - 1.0).abs() < 1e-15);
        let n = seq(&[2, 1, 3]);
        let out = solve_linear_closed_form(&n, 1.7).unwrap();
        for t in 1..=3 {
            let x = out.quantity_in_period(t).unwrap();
            let inferred = infer_competitive_quantity(x, n.prefix(t).unwrap().counts());
            assert!((inferred - 1.7).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_limit_sweep() {
        let grid: Vec<u32> = (1..=10).map(|k| (1u32 << k) - 1).collect();
        let rows = limit_sweep(&DemandModel::unit_linear(), &seq(&[1, 1]), 2, &grid).unwrap();
        for r in rows {
            assert_eq!(r.prefix_quantities, vec![0.5]);
            // n_t + 1 is a power of two here, so the product is exact
            assert_eq!((r.n_t + 1) as f64 * r.gap, 0.5);
        }
    }

    #[test]
    fn figure_one_is_exact() {
        let fig = figure_data(Figure::Fig1, FigureOptions::default()).unwrap();
        for row in &fig.series.rows {
            assert_eq!(row[1], 0.5);
            assert_eq!(row[2], 1.0 - 1.0 / (2.0 * row[0]));
        }
    }

    #[test]
    fn figure_two_demand_samples() {
        let fig = figure_data(
            Figure::Fig2,
            FigureOptions {
                n_max: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        let demand = fig.demand.unwrap();
        for row in demand.rows.iter().step_by(10) {
            let x = row[0];
            let s = 0.023 * (5.0 * std::f64::consts::PI * x).sin();
            assert!((row[1] - (1.0 - x - s)).abs() < 1e-15);
            assert!((row[2] - (1.0 - x + s)).abs() < 1e-15);
        }
        assert_eq!(fig.series.rows.len(), 3);
    }

    #[test]
    fn csv_is_deterministic_and_lossless() {
        let a = figure_data(Figure::Fig3, FigureOptions { n_max: Some(5), ..Default::default() })
            .unwrap();
        let b = figure_data(Figure::Fig3, FigureOptions { n_max: Some(5), ..Default::default() })
            .unwrap();
        assert_eq!(a.series.to_csv(), b.series.to_csv());
        let v = 0.1 + 0.2;
        assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        assert_eq!(format_float(3.0), "3");
    }

    #[test]
    fn solve_csv_layout() {
        let out = solve(&unit(), &seq(&[1, 2])).unwrap();
        let csv = outcome_csv(&out);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "period,firm_index,quantity,price,profit");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,3,"));
    }

    #[test]
    fn model_json_round_trip() {
        for text in [
            r#"{"family":"linear","a":2,"xbar":1.5,"c":1}"#,
            r#"{"family":"sine","a":1,"xbar":1,"eps":0.023,"k":5}"#,
            r#"{"family":"quadratic","alpha1":1,"alpha2":2,"beta1":0.5,"beta2":1}"#,
            r#"{"family":"heterogeneous","firms":[{"a":1,"xbar_c":1}],"entrant":{"a":1,"xbar_c":0.8}}"#,
        ] {
            let m = GameModel::from_json(text).unwrap();
            let back = GameModel::from_json(&m.to_json().to_string()).unwrap();
            assert_eq!(m, back);
        }
        assert!(GameModel::from_json(r#"{"family":"cubic"}"#).is_err());
        assert!(GameModel::from_json(r#"{"a":1}"#).is_err());
    }

    #[test]
    fn heterogeneous_entrant_padding() {
        let spec = HeterogeneousSpec {
            firms: vec![FirmParams::new(1.0, 1.0).unwrap()],
            entrant: Some(FirmParams::new(1.0, 0.8).unwrap()),
        };
        let out = solve(&GameModel::Heterogeneous(spec), &seq(&[1, 1])).unwrap();
        assert!((out.groups[0].quantity - 0.6).abs() < 1e-15);
    }

    #[test]
    fn svg_has_one_line_per_series() {
        let fig = figure_data(Figure::Fig1, FigureOptions::default()).unwrap();
        let svg = fig.to_svg();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
