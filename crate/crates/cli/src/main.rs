use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use stackgame::analysis::{
    check_independence, figure_data, format_float, infer_competitive_quantity, limit_sweep,
    outcome_csv, render_svg, solve, Figure, FigureOptions, GameModel, Table,
    DEFAULT_INDEPENDENCE_TOL,
};
use stackgame::sequence::parse_counts;
use stackgame::{
    backward_induction_grid, DemandModel, EquilibriumOutcome, Error, GridSpec, PeriodSequence,
    QuadraticPayoff,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_REGULARITY: u8 = 2;
const EXIT_NON_INTERIOR: u8 = 3;
const EXIT_BAD_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "stackgame", version, about = "Sequential quantity-choice oligopoly solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Subgame-perfect equilibrium of one game.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_sequence)]
        periods: PeriodSequence,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the prefix firms' quantities across several continuations.
    Independence {
        #[command(flatten)]
        model: ModelArgs,
        /// The prefix sequence.
        #[arg(long, value_parser = parse_sequence)]
        periods: PeriodSequence,
        /// A continuation, e.g. `--suffix 1,2`; pass `--suffix ""` for none. Repeatable.
        #[arg(long = "suffix", value_parser = parse_suffix, required = true, allow_hyphen_values = true)]
        suffixes: Vec<Vec<u32>>,
        #[arg(long, default_value_t = DEFAULT_INDEPENDENCE_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Grow the number of firms in one period.
    Limits {
        #[command(flatten)]
        model: ModelArgs,
        /// Base sequence; period `t` is overwritten by each grid value.
        #[arg(long, value_parser = parse_sequence)]
        periods: PeriodSequence,
        /// 1-based period to grow. Defaults to the last.
        #[arg(long)]
        t: Option<usize>,
        /// Values of n_t, e.g. `1,3,7,15`.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Competitive quantity implied by one observed quantity under linear demand.
    Infer {
        /// Observed quantity of a firm in the last period of `periods`.
        #[arg(long)]
        x: f64,
        /// Counts of the periods up to and including the observed firm's.
        #[arg(long, value_parser = parse_sequence)]
        periods: PeriodSequence,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Data behind the figures: leader and total quantity by number of firms.
    Figure {
        #[arg(value_enum)]
        figure: FigureName,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
        /// Also write the inverse-demand samples as CSV.
        #[arg(long)]
        demand_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Brute-force backward induction on a quantity grid.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_sequence)]
        periods: PeriodSequence,
        /// Grid step. Defaults to a 2000th of the model's quantity scale.
        #[arg(long)]
        step: Option<f64>,
        /// Largest action. Defaults to the model's quantity scale.
        #[arg(long)]
        max_action: Option<f64>,
        #[arg(long, default_value_t = 200)]
        max_sweeps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureName {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Linear,
    Sine,
    Quadratic,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

/// Either `--model file.json` or inline parameters.
#[derive(Args)]
struct ModelArgs {
    /// JSON model file.
    #[arg(long, conflicts_with_all = ["family", "a", "xbar", "eps", "k", "c", "alpha0", "alpha1", "alpha2", "beta1", "beta2"])]
    model: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xbar: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write an SVG line chart here.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BAD_INPUT,
            message: message.into(),
        }
    }

    fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::RegularityViolated { .. }
            | Error::DegenerateSlope { .. }
            | Error::DegenerateDenominator => EXIT_REGULARITY,
            Error::NonInterior { .. } => EXIT_NON_INTERIOR,
            Error::NoConvergence { .. } | Error::Jet(_) => EXIT_FAILURE,
            _ => EXIT_BAD_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_sequence(s: &str) -> std::result::Result<PeriodSequence, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suffix(s: &str) -> std::result::Result<Vec<u32>, String> {
    parse_counts(s).map_err(|e| e.to_string())
}

impl ModelArgs {
    fn load(&self) -> CliResult<GameModel> {
        if let Some(path) = &self.model {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            return Ok(GameModel::from_json(&text)?);
        }
        let family = self.family.unwrap_or(if self.eps.is_some() {
            Family::Sine
        } else if self.alpha1.is_some() {
            Family::Quadratic
        } else {
            Family::Linear
        });
        let (a, xbar, c) = (
            self.a.unwrap_or(1.0),
            self.xbar.unwrap_or(1.0),
            self.c.unwrap_or(0.0),
        );
        Ok(match family {
            Family::Linear => {
                if self.eps.is_some_and(|e| e != 0.0) {
                    return Err(Failure::input("--eps needs --family sine"));
                }
                GameModel::Demand(DemandModel::linear(a, xbar, c)?)
            }
            Family::Sine => GameModel::Demand(DemandModel::sine(
                a,
                xbar,
                self.eps.unwrap_or(0.0),
                self.k.unwrap_or(5),
                c,
            )?),
            Family::Quadratic => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| Failure::input(format!("quadratic model needs --{name}")))
                };
                GameModel::Quadratic(QuadraticPayoff::new(
                    self.alpha0.unwrap_or(0.0),
                    need(self.alpha1, "alpha1")?,
                    need(self.alpha2, "alpha2")?,
                    self.beta1.unwrap_or(0.0),
                    need(self.beta2, "beta2")?,
                ))
            }
        })
    }

    fn demand(&self) -> CliResult<DemandModel> {
        match self.load()? {
            GameModel::Demand(m) => Ok(m),
            _ => Err(Failure::input("this command needs a linear or sine demand model")),
        }
    }
}

impl OutputArgs {
    fn emit(&self, csv: String, json: serde_json::Value) -> CliResult<()> {
        let text = match self.format {
            Format::Csv => csv,
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&json).expect("json serializes");
                s.push('\n');
                s
            }
        };
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::io(path, e)),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn plot(&self, svg: impl FnOnce() -> String) -> CliResult<()> {
        match &self.plot {
            Some(path) => std::fs::write(path, svg()).map_err(|e| Failure::io(path, e)),
            None => Ok(()),
        }
    }
}

fn outcome_json(periods: &PeriodSequence, out: &EquilibriumOutcome) -> serde_json::Value {
    let firms: Vec<_> = out
        .firms()
        .iter()
        .map(|f| {
            json!({
                "period": f.period,
                "firm_index": f.firm_index,
                "quantity": f.quantity,
                "price": out.price,
                "profit": f.profit,
            })
        })
        .collect();
    json!({ "periods": periods, "outcome": out, "firms": firms })
}

fn quantity_plot(title: &str, out: &EquilibriumOutcome) -> String {
    let points = out
        .firms()
        .iter()
        .map(|f| (f.firm_index as f64, f.quantity))
        .collect();
    render_svg(title, "firm index", &[("quantity".to_string(), points)])
}

fn table_plot(title: &str, table: &Table) -> String {
    let x = &table.header[0];
    let xs = table.column(x).unwrap_or_default();
    let series: Vec<_> = table.header[1..]
        .iter()
        .map(|h| {
            let ys = table.column(h).unwrap_or_default();
            (h.clone(), xs.iter().copied().zip(ys).collect())
        })
        .collect();
    render_svg(title, x, &series)
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Solve {
            model,
            periods,
            output,
        } => {
            let out = solve(&model.load()?, &periods)?;
            output.plot(|| quantity_plot(&format!("equilibrium ({periods})"), &out))?;
            output.emit(outcome_csv(&out), outcome_json(&periods, &out))
        }
        Command::Independence {
            model,
            periods,
            suffixes,
            tol,
            output,
        } => {
            let report = check_independence(&model.load()?, &periods, &suffixes, tol)?;
            let mut csv = String::from("extension,firm_index,quantity\n");
            for (suffix, row) in report.extensions.iter().zip(&report.quantities) {
                let label: Vec<String> = suffix.iter().map(|n| n.to_string()).collect();
                for (i, q) in row.iter().enumerate() {
                    csv.push_str(&format!("\"{}\",{},{q:.16e}\n", label.join(","), i + 1));
                }
            }
            eprintln!(
                "max_deviation={:.16e} tolerance={:e} verdict={}",
                report.max_deviation,
                report.tolerance,
                serde_json::to_value(report.verdict).expect("verdict serializes").as_str().unwrap_or("")
            );
            output.emit(csv, serde_json::to_value(&report).expect("report serializes"))
        }
        Command::Limits {
            model,
            periods,
            t,
            grid,
            output,
        } => {
            let demand = model.demand()?;
            let t = t.unwrap_or(periods.periods());
            let rows = limit_sweep(&demand, &periods, t, &grid)?;
            let mut header = vec!["n_t".to_string(), "total".to_string()];
            header.extend((1..t).map(|s| format!("x_{s}")));
            header.extend(["gap".to_string(), "scaled_g".to_string()]);
            let mut table = Table {
                header,
                rows: Vec::with_capacity(rows.len()),
            };
            for r in &rows {
                let mut row = vec![r.n_t as f64, r.total];
                row.extend(&r.prefix_quantities);
                row.extend([r.gap, r.scaled_g]);
                table.rows.push(row);
            }
            output.plot(|| table_plot(&format!("growing period {t}"), &table))?;
            output.emit(
                table.to_csv(),
                json!({ "base": periods, "t": t, "rows": rows }),
            )
        }
        Command::Infer { x, periods, output } => {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Failure::input(format!("observed quantity {x} must be > 0")));
            }
            let xbar_c = infer_competitive_quantity(x, periods.counts());
            output.emit(
                format!("x_observed,xbar_c\n{},{}\n", format_float(x), format_float(xbar_c)),
                json!({ "x_observed": x, "periods": periods, "xbar_c": xbar_c }),
            )
        }
        Command::Figure {
            figure,
            n_max,
            eps,
            k,
            demand_out,
            output,
        } => {
            let figure = match figure {
                FigureName::Fig1 => Figure::Fig1,
                FigureName::Fig2 => Figure::Fig2,
                FigureName::Fig3 => Figure::Fig3,
            };
            let data = figure_data(figure, FigureOptions { n_max, eps, k })?;
            if let Some(path) = &demand_out {
                let csv = data.demand.as_ref().map(Table::to_csv).ok_or_else(|| {
                    Failure::input("this figure has no demand panel")
                })?;
                std::fs::write(path, csv).map_err(|e| Failure::io(path, e))?;
            }
            output.plot(|| data.to_svg())?;
            output.emit(
                data.series.to_csv(),
                serde_json::to_value(&data).expect("figure serializes"),
            )
        }
        Command::Oracle {
            model,
            periods,
            step,
            max_action,
            max_sweeps,
            output,
        } => {
            let game = model.load()?;
            let scale = game.scale()?;
            let max_action = max_action.unwrap_or(scale);
            let grid = GridSpec::new(step.unwrap_or(max_action / 2000.0), max_action, max_sweeps)?;
            let result = backward_induction_grid(&game.payoff_model(&periods)?, &periods, &grid)?;
            eprintln!("converged={} gap={:e}", result.converged, result.gap);
            output.plot(|| quantity_plot(&format!("grid equilibrium ({periods})"), &result.outcome))?;
            output.emit(
                outcome_csv(&result.outcome),
                json!({ "periods": periods, "grid": grid, "result": result }),
            )
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("STACKGAME_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::input(format!("STACKGAME_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_BAD_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("stackgame").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn context_does_not_hide_the_exit_code() {
        let e = Error::NonInterior {
            period: 2,
            quantity: -0.1,
        }
        .context("extension [1]");
        assert_eq!(Failure::from(e).code, EXIT_NON_INTERIOR);
        let e = Error::RegularityViolated { roots: vec![0.1, 0.2] };
        assert_eq!(Failure::from(e).code, EXIT_REGULARITY);
        assert_eq!(Failure::from(Error::InvalidModel("x".into())).code, EXIT_BAD_INPUT);
    }

    #[test]
    fn inline_family_is_inferred() {
        let Command::Solve { model, .. } = parse(&["solve", "--periods", "1", "--eps", "0.01"]) else {
            panic!()
        };
        let GameModel::Demand(m) = model.load().ok().unwrap() else { panic!() };
        assert_eq!((m.eps(), m.k()), (0.01, 5));
        let Command::Solve { model, .. } = parse(&["solve", "--periods", "1"]) else { panic!() };
        assert!(matches!(model.load().ok().unwrap(), GameModel::Demand(m) if m.is_linear()));
    }

    #[test]
    fn suffixes_accept_the_empty_continuation() {
        let Command::Independence { suffixes, .. } =
            parse(&["independence", "--periods", "1", "--suffix", "", "--suffix", "[2,1]"])
        else {
            panic!()
        };
        assert_eq!(suffixes, vec![vec![], vec![2, 1]]);
    }
}
