//! Built-in models and reproducible numerical studies.
//!
//! [`builtins`] catalogs small reaction networks, each packaged with a
//! simplex cover and a volume-indexed initial condition, so that every
//! study and command-line run can name a model instead of re-entering it.
//! [`studies`] runs the headline computations over ladders of volumes or
//! resolutions and returns [`result::StudyResult`] tables that serialize
//! to CSV and JSON byte-identically across reruns with the same seed.

pub mod builtins;
pub mod result;
pub mod studies;

pub use builtins::{builtin, ex2_4_with_k, BuiltinModel, BUILTIN_IDS};
pub use result::StudyResult;
pub use studies::{
    divergence_probe, escape_event_study, ldp_marginal_study, minimize_endpoint_action,
    threshold_event, MarginalMode, MinimizeOpts, MinimizeReport, DIVERGENCE_GROWTH,
};
