//! Numerical kernels for domain-adaptive object detection.
//!
//! Everything here works on plain `f64` slices: box geometry and potential
//! instance mining, the image/instance/consistency domain losses, class
//! relation matrices, the feature-and-logit domain discriminator, the
//! combined objective, and a small adversarial trainer on 2-D point clouds
//! that exhibits the min-max behaviour.

mod disc;
mod geometry;
mod losses;
mod relation;
pub mod toy;

pub use disc::{eagr_disc_grad, eagr_disc_loss, DiscParams, DiscSample, EagrGrad};
pub use geometry::{iou, pim_filter, BBox, Proposal, DEFAULT_PIM_TAU};
pub use losses::{
    consistency_grad, consistency_loss, image_domain_grad, image_domain_loss, instance_domain_grad,
    instance_domain_loss, total_loss, BatchGrad, Domain, DomainBatch, DomainImage, PROB_EPS,
};
pub use relation::{build_relation_matrix, mgrm_grad, mgrm_loss, update_grm, RelationMatrix};
pub use toy::{toy_adapt, Point, ToyAdaptState, ToyConfig, ToyDomains, ToyRecord};

use thiserror::Error;

/// Default weight on the summed domain-classifier losses.
pub const DEFAULT_LAMBDA1: f64 = 0.1;
/// Default weight on the relation-matrix loss.
pub const DEFAULT_LAMBDA2: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum DaodError {
    #[error("invalid box ({x1}, {y1}, {x2}, {y2}): need x1 < x2 and y1 < y2")]
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("objectness {0} outside [0, 1]")]
    InvalidObjectness(f64),
    #[error("image {0} has no activations")]
    NoActivations(usize),
    #[error("probability {value} at image {image} is not a finite value in [0, 1]")]
    InvalidProbability { image: usize, value: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },
    #[error("row {row} of relation matrix sums to {sum}, expected 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("momentum {0} outside [0, 1)")]
    InvalidMomentum(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },
}
