//! Reality-gap metrics between the two backends.
//!
//! Spike infill and matching score per layer, thrust RMSE, summary
//! statistics, and Kolmogorov–Smirnov comparisons over batches of episodes.

mod ks;
mod metrics;
mod report;

pub use ks::{kolmogorov_survival, ks_normality, ks_statistic, ks_two_sample, KsResult};
pub use metrics::{infill, match_score, summarize, thrust_rmse, Summary};
pub use report::{build_gap_report, replay_episode, EpisodeGap, GapReport, LayerGap, GAP_CSV_HEADER};
