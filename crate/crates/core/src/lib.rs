//! Laboratory for long cycles of prescribed length in random and
//! pseudo-random graphs.
//!
//! The crate is organised bottom-up: [`graph`] holds the substrate and exact
//! verifiers, [`oracle`] gives small-instance ground truth, [`extremal`] the
//! closed-form thresholds and constructions. [`generators`] and [`spectral`]
//! produce and judge random hosts, [`regularity`] builds cluster partitions
//! and the auxiliary cluster graphs, [`expander`] and [`embedder`] supply the
//! tree machinery that [`stitcher`] turns into certified cycles. [`ramsey`]
//! covers edge colourings and monochromatic odd cycles, and [`experiments`]
//! drives batch runs.
//!
//! Density arithmetic is generic over [`Scalar`]; [`Rational`] gives exact
//! verdicts and [`Real`] the floating-point ones.

pub mod embedder;
pub mod error;
pub mod expander;
pub mod experiments;
pub mod extremal;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod ramsey;
pub mod regularity;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod stitcher;
pub mod verdict;

pub use error::{Error, Result};
pub use graph::{Graph, Vertex, VertexSeq};
pub use rng::RngStream;
pub use scalar::Scalar;

/// Exact rational used for extremal values and exact verdicts.
pub type Rational = num_rational::Ratio<i128>;
/// Floating-point scalar used for spectral estimates and sampled reports.
pub type Real = f64;
