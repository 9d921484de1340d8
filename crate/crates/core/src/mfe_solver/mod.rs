//! Newton solver and ρ-continuation for the mean field equation.

mod branch;
mod closed_form;
mod newton;
mod problem;
mod test_function;

pub use branch::{
    continue_branch, discrete_critical_mass, fit_blowup_rate, fit_blowup_tail, linear_fit, Branch, BranchOptions,
    Termination, DEFAULT_LAMBDA_CAP,
};
pub use closed_form::DiskBubble;
pub use newton::{
    linearized_spectrum, newton_solve, solution_point, Jacobian, Newton, NewtonOutcome, SolutionPoint, Spectrum,
    NEWTON_TOLERANCE,
};
pub use problem::{evaluate_i, MfeProblem, Moments, RULE};
pub use test_function::{test_function_energy, TestFunctionEnergy};
