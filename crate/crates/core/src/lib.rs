//! Skeletonization and digital topology for 3D tubular structures.
//!
//! The crate bundles three skeletonization methods and the instruments used
//! to compare them:
//!
//! * [`morphology`]: min/max-filter soft skeleton,
//! * [`thinning`]: sequential simple-point thinning with either an
//!   Euler-characteristic or a topological-number simplicity test,
//! * [`topology`]: component labeling, Euler characteristic and Betti numbers
//!   under (26, 6) adjacency,
//! * [`metrics`]: Dice, clDice and topological error scores,
//! * [`phantom`]: synthetic tubes, tori and vessel trees with known topology,
//! * [`volio`]: NIfTI-1 and raw volume files,
//! * [`bench`]: the runtime/accuracy comparison harness.
//!
//! Data-parallel kernels take an [`Execution`] policy. With the default
//! `parallel` feature they run on rayon; without it everything is sequential.

pub mod bench;
mod error;
pub mod euler;
pub mod grid;
pub mod metrics;
pub mod morphology;
mod par;
pub mod phantom;
pub mod simple;
pub mod thinning;
pub mod topology;
pub mod volio;

pub use error::{Error, Result};
pub use grid::{BinaryVolume, Connectivity, Dims, Neighborhood, ScalarVolume, Voxel};
pub use metrics::{MetricsReport, SkeletonMethod};
pub use par::Execution;
pub use phantom::{PhantomKind, PhantomSpec};
pub use thinning::{skeletonize, SimplePointTest, ThinningMethod};
pub use topology::{betti_numbers, BettiTriple};
