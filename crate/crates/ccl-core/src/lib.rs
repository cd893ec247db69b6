//! Connected components labeling (CCL) over 2D grids.
//!
//! The crate is built around a small set of pieces:
//!
//! - [`grid`]: immutable 8-bit images, deterministic synthetic generators,
//!   and binary PGM I/O.
//! - [`dsf`]: a disjoint-set forest over cell indices with a minimum-root
//!   union that is safe under concurrent use.
//! - [`block_engine`]: a bulk-synchronous executor that emulates the
//!   grid/block/barrier structure of GPU kernels on the CPU, with
//!   selectable intra-phase ordering so order-sensitivity bugs are
//!   reproducible.
//! - [`optimized`]: the optimized three-phase labeling pipeline (local
//!   merge with coarse labeling, boundary analysis, final link).
//! - [`baselines`]: label equivalence, conventional block union-find,
//!   line-based union-find, and a sequential flood-fill oracle.
//!
//! Cells are 4-connected when they are adjacent along exactly one axis and
//! hold equal pixel values. Every labeler produces the same canonical
//! output: after flattening, each cell's label is the minimum linear index
//! of its component.

pub mod baselines;
pub mod block_engine;
pub mod dsf;
pub mod grid;
pub mod labelmap;
pub mod optimized;
pub mod rng;

pub use baselines::{flood_fill_oracle, label_conventional_uf, label_le, label_line_uf, AlgoId};
pub use block_engine::{BlockConfig, ExecMode, OrderPolicy};
pub use dsf::ParentArray;
pub use grid::{generate, read_pgm, write_pgm, GenParams, GridError, Image, Pattern};
pub use labelmap::LabelMap;
pub use optimized::{boundary_cell_counts, label_optimized};
