//! Timing harness.
//!
//! Every (algorithm, image, size) combination is verified against the
//! flood-fill oracle before any timing is recorded; a mismatch aborts that
//! combination with the first differing cell. Timing covers the labeling
//! pipeline only — no file I/O, no verification — and the verification
//! run doubles as the excluded warm-up.

use std::time::Instant;

use ccl_core::{flood_fill_oracle, AlgoId, BlockConfig, ExecMode, Image, LabelMap, OrderPolicy};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verify::{canonicalize, Partition};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no runs requested (runs must be >= 1)")]
    NoRuns,
    #[error(
        "{algo} disagrees with the oracle on {image} at {width}x{height}: \
         first differing cell {cell} (x={x}, y={y})"
    )]
    VerificationFailed {
        algo: String,
        image: String,
        width: u32,
        height: u32,
        cell: usize,
        x: u32,
        y: u32,
    },
    #[error("cannot resize {image}: {source}")]
    Resize {
        image: String,
        source: ccl_core::GridError,
    },
}

/// Timing statistics for one (algorithm, image, size) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algo: String,
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub runs: u32,
    pub min_ms: f64,
    pub max_ms: f64,
    pub mean_ms: f64,
}

/// Where a benchmark image comes from when a target size is requested.
pub enum BenchSource {
    /// A fixed base image, nearest-neighbor resampled to each size (the
    /// protocol for photographs, preserving region topology).
    Base(Image),
    /// A generator invoked natively at each size.
    Pattern {
        pattern: ccl_core::Pattern,
        params: ccl_core::GenParams,
        seed: u64,
    },
}

/// A named benchmark image.
pub struct BenchImage {
    pub name: String,
    pub source: BenchSource,
    /// Threshold applied after sizing, when set.
    pub binarize: Option<u8>,
}

impl BenchImage {
    /// A fixed base image resampled to each benchmark size.
    pub fn from_base(name: impl Into<String>, image: Image) -> Self {
        Self {
            name: name.into(),
            source: BenchSource::Base(image),
            binarize: None,
        }
    }

    /// A pattern generated natively at each benchmark size.
    pub fn from_pattern(
        name: impl Into<String>,
        pattern: ccl_core::Pattern,
        params: ccl_core::GenParams,
        seed: u64,
    ) -> Self {
        Self {
            name: name.into(),
            source: BenchSource::Pattern {
                pattern,
                params,
                seed,
            },
            binarize: None,
        }
    }

    pub fn binarized(mut self, threshold: u8) -> Self {
        self.binarize = Some(threshold);
        self
    }

    fn at_size(&self, side: u32) -> Result<Image, ccl_core::GridError> {
        let img = match &self.source {
            BenchSource::Base(base) => base.resize_nearest(side, side)?,
            BenchSource::Pattern {
                pattern,
                params,
                seed,
            } => ccl_core::generate(*pattern, side, side, params, *seed)?,
        };
        Ok(match self.binarize {
            Some(t) => img.binarize(t),
            None => img,
        })
    }
}

pub struct BenchOptions {
    /// Timed repetitions per combination.
    pub runs: u32,
    /// Block config for the 2D-block algorithms.
    pub cfg: BlockConfig,
    /// Block config for the line kernel.
    pub cfg_line: BlockConfig,
    pub order: OrderPolicy,
    pub mode: ExecMode,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            runs: 20,
            cfg: BlockConfig::default_2d(),
            cfg_line: BlockConfig::default_line(),
            order: OrderPolicy::Parallel { workers: 0 },
            mode: ExecMode::Fast,
        }
    }
}

/// Run the benchmark protocol: for each image, each square size, and each
/// algorithm, verify once against the oracle and then time `runs`
/// executions. Records are emitted in input order.
pub fn bench(
    algos: &[AlgoId],
    images: &[BenchImage],
    sizes: &[u32],
    opts: &BenchOptions,
) -> Result<Vec<BenchRecord>, BenchError> {
    if opts.runs == 0 {
        return Err(BenchError::NoRuns);
    }
    let mut records = Vec::new();
    for base in images {
        for &size in sizes {
            let img = base.at_size(size).map_err(|source| BenchError::Resize {
                image: base.name.clone(),
                source,
            })?;
            let oracle = canonicalize(&flood_fill_oracle(&img));
            for &algo in algos {
                let record = bench_one(algo, &base.name, &img, &oracle, opts)?;
                records.push(record);
            }
        }
    }
    Ok(records)
}

fn run_algo(algo: AlgoId, img: &Image, opts: &BenchOptions) -> LabelMap {
    algo.run(img, opts.cfg, opts.cfg_line, opts.order, opts.mode)
}

fn bench_one(
    algo: AlgoId,
    image_name: &str,
    img: &Image,
    oracle: &Partition,
    opts: &BenchOptions,
) -> Result<BenchRecord, BenchError> {
    // Verification run; also the warm-up.
    let labels = canonicalize(&run_algo(algo, img, opts));
    if let Some(cell) = oracle.first_difference(&labels) {
        return Err(BenchError::VerificationFailed {
            algo: algo.name().to_string(),
            image: image_name.to_string(),
            width: img.width(),
            height: img.height(),
            cell,
            x: cell as u32 % img.width(),
            y: cell as u32 / img.width(),
        });
    }

    let mut min_ms = f64::INFINITY;
    let mut max_ms = 0.0f64;
    let mut total_ms = 0.0f64;
    for _ in 0..opts.runs {
        let start = Instant::now();
        let out = run_algo(algo, img, opts);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(out);
        min_ms = min_ms.min(ms);
        max_ms = max_ms.max(ms);
        total_ms += ms;
    }
    Ok(BenchRecord {
        algo: algo.name().to_string(),
        image: image_name.to_string(),
        width: img.width(),
        height: img.height(),
        runs: opts.runs,
        min_ms,
        max_ms,
        mean_ms: total_ms / opts.runs as f64,
    })
}
