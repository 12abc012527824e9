//! The construction iteration: change calculus, step selection, the
//! preparatory lemmas and the driver loop.

mod calculus;
mod engine;
mod lemmas;
mod step;

pub use calculus::{
    dilation_change, first_order_oracle, linear_change_z, pairing_change, pairing_form,
    perturbed_datum, restriction_sequence, ChangeFunctionals, LinearForm, Prediction,
};
pub use step::{
    autocorrelation_witnesses, build_restriction, change_triple, dominance_slack,
    fallback_ab_solve, independence_measure, min_norm_solve, select_step, FallbackReport, McStep,
    RestrictionSet, StepMode, StepOptions, Witnesses,
};
pub use engine::{
    run_mc, McConfig, McTrace, Phase, StepRecord, TerminalStatus, TraceRow,
};
pub use lemmas::{
    case_dichotomy, case_pairing, dominance_renormalize, h_bound, h_curve, lemma1_scan,
    CaseOutcome, DominanceOptions, DominanceReport, LemmaOptions,
};
