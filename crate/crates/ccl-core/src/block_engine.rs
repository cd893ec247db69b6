//! Bulk-synchronous block executor.
//!
//! Emulates the grid/block/barrier structure that GPU-style labeling
//! kernels assume: the image is tiled into rectangular thread blocks, each
//! block owns a private scratch value ("shared memory"), and a program is
//! a sequence of phases separated by barriers. Within one phase the
//! block's threads may run in any order or interleaving; a barrier
//! completes only when every thread of the block has finished the phase.
//!
//! The intra-phase order is selectable so that programs whose output
//! depends on scheduling can be caught by tests rather than by luck:
//! [`OrderPolicy::Sequential`] runs threads in thread-id order,
//! [`OrderPolicy::Shuffled`] applies a seeded per-block per-phase
//! permutation, and [`OrderPolicy::Parallel`] runs them concurrently.
//!
//! Block isolation is structural: each block's scratch is a distinct value
//! created by the program's scratch constructor and handed only to that
//! block's threads. Cross-block communication must go through whatever
//! shared state the phases capture (in this crate, atomics).

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{mix, shuffle, SplitMix64};

/// Most threads a single block may hold, mirroring the hardware limit the
/// emulated runtime imposes.
pub const MAX_BLOCK_THREADS: u32 = 1024;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid block config {bx}x{by}: {reason}")]
    InvalidBlockConfig {
        bx: u32,
        by: u32,
        reason: &'static str,
    },
}

/// Thread-block dimensions `(bx, by)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    bx: u32,
    by: u32,
}

impl BlockConfig {
    pub fn new(bx: u32, by: u32) -> Result<Self, EngineError> {
        if bx == 0 || by == 0 {
            return Err(EngineError::InvalidBlockConfig {
                bx,
                by,
                reason: "both dimensions must be at least 1",
            });
        }
        if bx as u64 * by as u64 > MAX_BLOCK_THREADS as u64 {
            return Err(EngineError::InvalidBlockConfig {
                bx,
                by,
                reason: "block exceeds the 1024-thread limit",
            });
        }
        Ok(Self { bx, by })
    }

    /// Default for 2D kernels.
    pub fn default_2d() -> Self {
        Self { bx: 32, by: 16 }
    }

    /// Default for line (single-row) kernels.
    pub fn default_line() -> Self {
        Self { bx: 512, by: 1 }
    }

    #[inline]
    pub fn bx(&self) -> u32 {
        self.bx
    }

    #[inline]
    pub fn by(&self) -> u32 {
        self.by
    }

    #[inline]
    pub fn threads(&self) -> u32 {
        self.bx * self.by
    }
}

impl std::fmt::Display for BlockConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.bx, self.by)
    }
}

/// Intra-phase thread ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderPolicy {
    /// Threads run one after another in ascending thread-id order.
    Sequential,
    /// Threads run one after another in a seeded permutation that varies
    /// per block and per phase.
    Shuffled(u64),
    /// Threads run concurrently on a work-stealing pool. `workers == 0`
    /// uses the ambient pool; otherwise a dedicated pool of that size is
    /// used for the launch.
    Parallel { workers: usize },
}

/// Engine checking level. `Checked` enables the per-launch structural
/// audits (guard coverage) and the programs' own post-phase block audits;
/// `Fast` skips all of them, for benchmarking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Checked,
    Fast,
}

/// Grid decomposition of an image under a block config: ceil-division
/// block counts, with partial edge blocks cut down by the guard.
#[derive(Debug, Clone, Copy)]
pub struct GridPlan {
    pub width: u32,
    pub height: u32,
    pub cfg: BlockConfig,
    pub blocks_x: u32,
    pub blocks_y: u32,
}

impl GridPlan {
    pub fn new(width: u32, height: u32, cfg: BlockConfig) -> Self {
        Self {
            width,
            height,
            cfg,
            blocks_x: width.div_ceil(cfg.bx),
            blocks_y: height.div_ceil(cfg.by),
        }
    }

    pub fn block_count(&self) -> u32 {
        self.blocks_x * self.blocks_y
    }

    fn block_ctx(&self, linear: u32) -> BlockCtx {
        let index_x = linear % self.blocks_x;
        let index_y = linear / self.blocks_x;
        let origin_x = index_x * self.cfg.bx;
        let origin_y = index_y * self.cfg.by;
        BlockCtx {
            index_x,
            index_y,
            origin_x,
            origin_y,
            guard_w: self.cfg.bx.min(self.width - origin_x),
            guard_h: self.cfg.by.min(self.height - origin_y),
            cfg: self.cfg,
        }
    }
}

/// Identity of one block within a launch.
#[derive(Debug, Clone, Copy)]
pub struct BlockCtx {
    pub index_x: u32,
    pub index_y: u32,
    /// Image coordinates of the block's top-left cell.
    pub origin_x: u32,
    pub origin_y: u32,
    /// In-guard extent; smaller than `cfg` for partial edge blocks.
    pub guard_w: u32,
    pub guard_h: u32,
    pub cfg: BlockConfig,
}

impl BlockCtx {
    /// Number of in-guard threads.
    pub fn guard_threads(&self) -> u32 {
        self.guard_w * self.guard_h
    }
}

/// Identity of one in-guard thread. Out-of-guard threads are never run.
#[derive(Debug, Clone, Copy)]
pub struct ThreadCtx {
    pub block: BlockCtx,
    /// Thread coordinates within the block.
    pub tx: u32,
    pub ty: u32,
    /// 1D thread id within the block: `tx + ty * bx`.
    pub tid: u32,
    /// Global cell coordinates.
    pub x: u32,
    pub y: u32,
}

type PhaseFn<'a, S> = Box<dyn Fn(&ThreadCtx, &S) + Sync + 'a>;
type AuditFn<'a, S> = Box<dyn Fn(&BlockCtx, &S) + Sync + 'a>;
type ScratchFn<'a, S> = Box<dyn Fn(&BlockCtx) -> S + Sync + 'a>;

/// One barrier-delimited phase, optionally with a block-level audit that
/// checked mode runs after the barrier.
pub struct BlockPhase<'a, S> {
    run: PhaseFn<'a, S>,
    audit: Option<AuditFn<'a, S>>,
}

/// An ordered list of phases plus a per-block scratch constructor.
pub struct BlockProgram<'a, S> {
    make_scratch: ScratchFn<'a, S>,
    phases: Vec<BlockPhase<'a, S>>,
}

impl<'a, S> BlockProgram<'a, S> {
    pub fn new(make_scratch: impl Fn(&BlockCtx) -> S + Sync + 'a) -> Self {
        Self {
            make_scratch: Box::new(make_scratch),
            phases: Vec::new(),
        }
    }

    pub fn phase(mut self, run: impl Fn(&ThreadCtx, &S) + Sync + 'a) -> Self {
        self.phases.push(BlockPhase {
            run: Box::new(run),
            audit: None,
        });
        self
    }

    pub fn phase_with_audit(
        mut self,
        run: impl Fn(&ThreadCtx, &S) + Sync + 'a,
        audit: impl Fn(&BlockCtx, &S) + Sync + 'a,
    ) -> Self {
        self.phases.push(BlockPhase {
            run: Box::new(run),
            audit: Some(Box::new(audit)),
        });
        self
    }
}

/// Execute `program` over every block of the grid and return the per-block
/// scratches in block row-major order.
///
/// Barrier semantics: within a block, no phase `k+1` work starts until all
/// of that block's phase-`k` work has finished. Distinct blocks are
/// independent and may run concurrently under the parallel policy.
pub fn run_blocked<S: Send + Sync>(
    dims: (u32, u32),
    cfg: BlockConfig,
    order: OrderPolicy,
    mode: ExecMode,
    program: &BlockProgram<'_, S>,
) -> Vec<S> {
    let plan = GridPlan::new(dims.0, dims.1, cfg);
    if mode == ExecMode::Checked {
        assert_guard_coverage(&plan);
    }
    match order {
        OrderPolicy::Parallel { workers } => with_pool(workers, || {
            (0..plan.block_count())
                .into_par_iter()
                .map(|b| run_block(&plan, b, order, mode, program))
                .collect()
        }),
        _ => (0..plan.block_count())
            .map(|b| run_block(&plan, b, order, mode, program))
            .collect(),
    }
}

fn run_block<S: Send + Sync>(
    plan: &GridPlan,
    block_linear: u32,
    order: OrderPolicy,
    mode: ExecMode,
    program: &BlockProgram<'_, S>,
) -> S {
    let block = plan.block_ctx(block_linear);
    let scratch = (program.make_scratch)(&block);
    let guard = block.guard_threads();

    let thread_ctx = |k: u32| {
        let tx = k % block.guard_w;
        let ty = k / block.guard_w;
        ThreadCtx {
            block,
            tx,
            ty,
            tid: tx + ty * block.cfg.bx,
            x: block.origin_x + tx,
            y: block.origin_y + ty,
        }
    };

    for (phase_idx, phase) in program.phases.iter().enumerate() {
        match order {
            OrderPolicy::Sequential => {
                for k in 0..guard {
                    (phase.run)(&thread_ctx(k), &scratch);
                }
            }
            OrderPolicy::Shuffled(seed) => {
                let mut ids: Vec<u32> = (0..guard).collect();
                let mut rng = SplitMix64::new(mix(seed, block_linear as u64, phase_idx as u64));
                shuffle(&mut ids, &mut rng);
                for k in ids {
                    (phase.run)(&thread_ctx(k), &scratch);
                }
            }
            OrderPolicy::Parallel { .. } => {
                // Already inside the pool installed by run_blocked.
                (0..guard)
                    .into_par_iter()
                    .with_min_len(256)
                    .for_each(|k| (phase.run)(&thread_ctx(k), &scratch));
            }
        }
        // Barrier: the phase loop does not advance until every thread of
        // this block has returned.
        if mode == ExecMode::Checked {
            if let Some(audit) = &phase.audit {
                audit(&block, &scratch);
            }
        }
    }
    scratch
}

/// Execute one phase over a flat range of global thread ids, in any order.
pub fn run_flat(total: u64, order: OrderPolicy, body: impl Fn(u64) + Sync) {
    match order {
        OrderPolicy::Sequential => {
            for id in 0..total {
                body(id);
            }
        }
        OrderPolicy::Shuffled(seed) => {
            let mut ids: Vec<u64> = (0..total).collect();
            let mut rng = SplitMix64::new(seed);
            shuffle(&mut ids, &mut rng);
            for id in ids {
                body(id);
            }
        }
        OrderPolicy::Parallel { workers } => with_pool(workers, || {
            // Cell counts fit in usize; rayon only indexes usize ranges.
            (0..total as usize)
                .into_par_iter()
                .with_min_len(4096)
                .for_each(|id| body(id as u64));
        }),
    }
}

fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("pool construction")
            .install(f)
    }
}

/// Checked-mode structural audit: every image cell must be owned by
/// exactly one in-guard thread.
fn assert_guard_coverage(plan: &GridPlan) {
    let mut owners = vec![0u8; plan.width as usize * plan.height as usize];
    for b in 0..plan.block_count() {
        let block = plan.block_ctx(b);
        for ty in 0..block.guard_h {
            for tx in 0..block.guard_w {
                let x = block.origin_x + tx;
                let y = block.origin_y + ty;
                let cell = (y as usize) * plan.width as usize + x as usize;
                owners[cell] += 1;
            }
        }
    }
    assert!(
        owners.iter().all(|&c| c == 1),
        "grid plan does not cover every cell exactly once"
    );
}
