//! Model specifications, the admissible moduli, sampled assumption checks
//! and the built-in zoo.

mod assumptions;
mod spec;
pub mod uclass;
mod zoo;

pub use assumptions::{
    check_assumptions, check_one, u_class_violation, Assumption, AssumptionCheck, AssumptionReport, CheckStatus,
    SamplingPlan, Witness,
};
pub use spec::{Coefficients, FnCoefficients, ModelSpec, RegimeTimeFn, TimeFn};
pub use uclass::UClass;
pub use zoo::{log_modulus_drift, params, zoo, zoo_model, zoo_names, Params, ZooModel};
