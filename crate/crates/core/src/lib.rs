//! Generates C programs with a planted, path-gated memory bug, records the
//! ground truth for each, and simulates greybox fuzzing campaigns against
//! them.
//!
//! The pipeline runs skeleton extraction ([`skeleton`]), call-graph
//! normalization and bug-path selection ([`fcg`]), condition planning
//! ([`planner`]) and C emission ([`codegen`]). [`oracle`] decides verdicts
//! from a [`manifest`] alone and [`fuzzsim`] runs power-schedule campaigns
//! on top of it. [`harness`] batches all of it.

pub mod codegen;
pub mod fcg;
pub mod fuzzsim;
pub mod harness;
pub mod manifest;
pub mod oracle;
pub mod par;
pub mod planner;
pub mod skeleton;
pub mod synth;
pub mod templates;

pub use codegen::{CodegenError, GeneratedProgram};
pub use fcg::{BugPathSelection, Fcg, FcgError};
pub use harness::{ExperimentPlan, HarnessError};
pub use manifest::{Manifest, ManifestError};
pub use oracle::{OracleError, PathId, Verdict};
pub use planner::{BugPathSpec, FeatureConfig, PlanError};
pub use skeleton::{FunctionSkeleton, SkeletonError};
pub use templates::TemplateError;
