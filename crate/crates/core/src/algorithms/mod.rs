//! ADM, the distributed gradient play baseline, step-size tuning and the
//! trace driver.

mod adm;
mod estimation;
mod run;
mod tuning;

pub use adm::{adm_init, adm_step, ddp_step, AdmState};
pub use estimation::{gradient_diag, project_augmented, EstimationMatrix};
pub use run::{run, Algorithm, RunConfig, RunRecord, RunStatus, RunTrace};
pub use tuning::{
    epsilon_of, eta_of, prop_constants, theorem_bound, thresholds, tune_parameters, AdmParams,
    PropConstants, StepSize, Thresholds,
};
