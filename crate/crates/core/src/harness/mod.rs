//! Batch driver: problem setup, configuration, error norms, convergence
//! studies, flux counts, operator checks and CSV output.

pub mod config;
pub mod norms;
pub mod problems;
pub mod report;
pub mod run;

pub use config::RunConfig;
pub use problems::{Problem, ProblemSetup};
pub use run::{convergence_study, count_fluxes, run_case, verify_operators, CaseResult, Outcome, Sweep};
