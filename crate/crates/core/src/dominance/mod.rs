//! Empirical-mean dominance testing.
//!
//! The central question: over many independent trials, how often does Y's
//! m-sample mean strictly exceed X's, minus the reverse? A strategy passes
//! a dominance check when that score stays below the threshold 1/κ^c with
//! statistical margin. Everything else in this crate reduces its questions
//! to this test.

mod bounds;
mod distinguisher;
mod ensemble;
mod finite;
mod score;

pub use bounds::{berry_esseen_tie_bound, hoeffding_sample_threshold, planned_samples};
pub use distinguisher::mean_distinguisher_advantage;
pub use ensemble::UtilityEnsemble;
pub use finite::{exact_dominance_score, FiniteDist, STATE_CAP};
pub use score::{
    dominance_trend, draw_empirical_mean, em_dominance_score, em_dominance_score_tagged,
    DominanceParams, DominanceReport, Verdict, DEFAULT_SAMPLE_CAP,
};
