//! Subgame-perfect equilibria of sequential quantity-setting oligopolies.
//!
//! Firms arrive in periods `n = (n_1, ..., n_T)`; each observes the cumulative
//! quantity of all earlier firms. The crate solves these games for linear,
//! sinusoidally perturbed, heterogeneous-linear and quadratic payoffs, and
//! checks whether early firms' quantities depend on who arrives later.

pub mod analysis;
pub mod demand;
pub mod equilibrium;
pub mod error;
pub mod jet;
pub mod numeric;
pub mod oracle;
pub mod sequence;

pub use analysis::{
    check_independence, figure_data, infer_competitive_quantity, limit_sweep, solve, Figure,
    FigureData, FigureOptions, GameModel, HeterogeneousSpec, IndependenceReport, LimitRow, Table,
    Verdict,
};
pub use demand::{DemandFamily, DemandModel};
pub use equilibrium::{
    competitive_limit_quantities, expected_best_response_linear, g_sequence, quadratic_si_condition,
    solve_general, solve_heterogeneous_linear, solve_linear_closed_form, solve_quadratic_two_period,
    solve_two_period_single_leader, BeliefDistribution, EquilibriumOutcome, FirmGroup, FirmParams,
    HeterogeneousLinearModel, QuadraticPayoff,
};
pub use error::{Error, Result};
pub use jet::{Jet, JetError};
pub use oracle::{backward_induction_grid, cournot_fixed_point, nested_leader_optimum, GridSpec};
pub use sequence::{s_measures, PeriodSequence, SMeasures};
