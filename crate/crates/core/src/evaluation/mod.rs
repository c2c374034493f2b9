//! Metrics, cross-validation plans and paired model comparisons.

pub mod compare;
pub mod cv;
pub mod metrics;
pub mod stats;

pub use compare::{
    comparison_text, paired_comparisons, performance_text, question_groups, ComparisonEntry, ComparisonReport,
    ModelSummary, RoundMetrics, RoundTable,
};
pub use cv::{default_rounds, make_cv_plan, CvPlan, CvRound};
pub use metrics::{
    compute_metrics, estimates_from_predictions, GroundTruth, MessageEstimate, MessageTruth, Metric, MetricsReport,
    SessionTruth, PER_ERROR_MIN_SECS,
};
pub use stats::{holm_sidak, paired_t_test, significance_marker, PairedTTest};
