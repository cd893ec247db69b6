//! Verification, benchmarking, and reporting for the CCL toolkit.
//!
//! - [`verify`]: label-invariant partition equivalence between label maps.
//! - [`output`]: label-map serialization formats for the CLI.
//! - [`bench`]: the timing harness; every (algorithm, image, size)
//!   combination is verified against the flood-fill oracle before any
//!   timing is recorded.
//! - [`report`]: min/max/mean tables in markdown and CSV, plus speedup
//!   ratios against the optimized pipeline.

pub mod bench;
pub mod output;
pub mod report;
pub mod verify;

pub use bench::{bench, BenchError, BenchImage, BenchOptions, BenchRecord, BenchSource};
pub use output::LabelFormat;
pub use verify::{canonicalize, equivalent, Partition, VerifyError};
