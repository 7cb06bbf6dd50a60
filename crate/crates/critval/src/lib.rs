//! Criterion-validity toolkit for multi-dimensional dialogue rubrics.
//!
//! The crate scores conversations under configurable weight schemes, measures
//! dimension-outcome associations (tie-aware Spearman, Cohen's d, partial rank
//! correlation, IRLS logistic regression, VIF), searches and cross-validates
//! conversion-informed weights, enforces pacing hard-caps and Trust-Gate rules,
//! and issues three-layer GO/NO-GO deployment decisions.
//!
//! Entry points by concern:
//! - [`dataset`]: domain types, CSV/JSONL loading, the built-in scored fixture
//! - [`stats`]: the statistical kernel (pure functions, no shared state)
//! - [`composite`]: weighted composite scores, missing-data policies, hard caps
//! - [`weights`]: scheme evaluation, grid search, temporal cross-validation
//! - [`funnel`]: rule-based funnel detection, rejection tiers, Trust Gate
//! - [`gate`]: L3 safety gate, L2 quality scoring, GO/NO-GO decisions
//! - [`report`]: JSON / markdown / CSV report emission with provenance

pub mod cli;
pub mod composite;
pub mod dataset;
pub mod error;
pub mod funnel;
pub mod gate;
pub mod report;
pub mod stats;
pub mod validation;
pub mod weights;

pub use error::Error;
