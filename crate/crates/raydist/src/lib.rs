//! Ray distance fields over triangle meshes.
//!
//! The crate covers the full pipeline around directed ray distance
//! functions: ground-truth ray/scene distance evaluation over camera
//! frusta ([`ray_fields`]), closed-form expectations of those fields under
//! Gaussian surface uncertainty with Monte-Carlo oracles ([`expectation`]),
//! the decoding strategies that turn sampled fields back into surfaces
//! ([`decoding`]), and the Chamfer / accuracy / completeness evaluation
//! suite ([`metrics`]). [`geometry`] supplies meshes, cameras, and
//! BVH-accelerated queries; [`scene_io`] covers OBJ ingestion, synthetic
//! scene generation, and binary volume files.

pub mod decoding;
pub mod expectation;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod ray_fields;
pub mod scene_io;
