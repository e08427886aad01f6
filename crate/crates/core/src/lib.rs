//! Screening toolkit for signing videos reduced to keypoint streams.
//!
//! The pipeline runs from pose and face keypoints to clip-level MCI/Healthy
//! confidences:
//!
//! - [`keypoints`] parses recordings and cuts them into fixed-length clips;
//! - [`trajectory`], [`facial`] and [`elbow`] compute the motion descriptors;
//! - [`features`] flattens them into one vector per clip;
//! - [`classifier`] trains logistic, shallow-network and linear-SVM models;
//! - [`evaluation`] splits data, scores predictions and aggregates per participant;
//! - [`synth`] generates labelled synthetic cohorts;
//! - [`pipeline`] wires the stages together through files for the CLI.

pub mod classifier;
pub mod elbow;
pub mod error;
pub mod evaluation;
pub mod facial;
pub mod features;
pub mod keypoints;
pub mod pipeline;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
