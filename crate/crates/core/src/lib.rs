//! Finite projections of stationary time-series causal graphs.
//!
//! A [`TsGraphTemplate`] describes an infinite ts-ADMG by its repeating edges.
//! [`marginal_ts_admg`] and [`marginal_ts_dmag`] project it onto an observed
//! set of variables over the window `t-p ..= t`, deciding the confounding
//! edges that stem from the unobserved past with a number-theoretic
//! common-ancestor test.

pub mod ancestor_query;
pub mod diophantine;
pub mod error;
pub mod finite_projection;
pub mod graph_model;
pub mod oracle_testkit;
pub mod summary_mwdg;
pub mod ts_projection;
pub mod verify;

pub use ancestor_query::{have_common_ancestor, CommonAncestorSolver};
pub use error::{Error, Result};
pub use graph_model::{parse_template, FiniteMixedGraph, LaggedEdge, TsGraphTemplate, Vertex};
pub use summary_mwdg::ConeTuple;
pub use ts_projection::{
    canonical_ts_dag, cutoff_bound, marginal_ts_admg, marginal_ts_admg_with, marginal_ts_dmag, marginal_ts_dmag_with,
    Method, ProjectionOptions,
};
