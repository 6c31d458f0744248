//! Path geometry over polytope covers: segmentation, the boundary-escape
//! shift with its verification report, escape costs, and the boundary
//! auditors (rate decay exponents, fast reactions, cone obstructions,
//! escape-sequence checks).

pub mod boundary;
pub mod cover;
pub mod escape;
mod sampling;
pub mod segment;
pub mod shift;

pub use boundary::{
    cone_obstruction, decay_exponent, fast_set, ConeReport, DecayExponentResult, DecayReport,
    DecayRung, FacetConeCheck, FastSetReport, FAST_THRESHOLD,
};
pub use cover::{
    check_coverage, sample_near_facet, sample_region, Cover, CoverRegion, CoverageReport,
    Halfspace, RegionSpec,
};
pub use escape::{
    escape_cost, escape_event_bound, escape_sequence_audit, EscapeAudit, EscapeEventBound,
    EscapeIntegralLadder, MonotonicityCheck, MonotonicityWitness, PrefixRateRung,
};
pub use segment::{segment_path, Span};
pub use shift::{build_shifted_path, verify_breakup, BreakupReport, ShiftPlan, ShiftSpan};
