//! Weakest preconditions for relational databases: direct substitution
//! and the resolution-based rewriting system producing simplified
//! preconditions.

mod bound;
mod confluence;
mod expl;
mod rewrite;
mod substitute;

pub use bound::step_bound;
pub use confluence::{check_confluence_sample, ConfluenceVerdict};
pub use expl::Expl;
pub use rewrite::{
    rewrite_swp, DropReason, Dropped, DroppedJson, ReportJson, Strategy, SwpOptions, SwpReport, TraceStep,
};
pub use substitute::{assume_empty, substitute, wp_full, wp_full_normalized, SubstMode};
