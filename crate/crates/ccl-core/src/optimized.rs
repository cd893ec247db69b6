//! The optimized labeling pipeline: block-local union-find merge with a
//! coarse-labeling pre-pass, a boundary analysis that only touches cells
//! on block boundaries, and a final link that flattens the forest.
//!
//! The block-local kernel runs as seven barrier-delimited phases:
//!
//! 1. init - `label[tid] = tid`, pixels staged into block scratch
//! 2. row scan - take the left neighbor's label on equal pixels
//! 3. column scan - take the upper neighbor's label on equal pixels
//! 4. row-column unification - walk each label chain to its fixpoint
//! 5. union with the left neighbor
//! 6. union with the upper neighbor
//! 7. local-to-global conversion into the shared [`LabelMap`]
//!
//! Phases 2-4 are the coarse labeling. They do not need to capture every
//! equivalence (a later scan may overwrite an earlier link); their job is
//! to shorten the chains the union phases will walk. Phases 5-6 establish
//! the complete intra-block connectivity, and with the minimum root
//! surviving every union, each block piece ends up labeled by its smallest
//! thread id regardless of scheduling.
//!
//! Boundary analysis then unions equal-pixel pairs across block edges
//! using one flat launch of `max(P_x, P_y)` ids, where `P_x = floor(N /
//! bx) * M` and `P_y = floor(M / by) * N` count boundary cells along each
//! axis. Each id serves double duty, covering one vertical-boundary cell
//! and one horizontal-boundary cell when those exist.

use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};

use crate::block_engine::{
    run_blocked, run_flat, BlockConfig, BlockCtx, BlockProgram, EngineError, ExecMode, OrderPolicy,
    ThreadCtx,
};
use crate::dsf::ParentArray;
use crate::grid::Image;
use crate::labelmap::LabelMap;

/// Counters accumulated by a labeling pipeline run.
#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineStats {
    /// `find` traversals performed during the local union phases.
    pub local_find_calls: u64,
    /// Total parent hops across those traversals.
    pub local_find_steps: u64,
    /// Flat-launch ids spawned for the cross-block merge.
    pub merge_work_items: u64,
    /// Equal-pixel boundary pairs that were actually unioned.
    pub boundary_unions: u64,
}

impl PipelineStats {
    /// Mean parent hops per `find` during local union; the quantity the
    /// coarse labeling exists to suppress.
    pub fn mean_local_find_path(&self) -> f64 {
        if self.local_find_calls == 0 {
            0.0
        } else {
            self.local_find_steps as f64 / self.local_find_calls as f64
        }
    }
}

/// Block-private scratch of the local merge kernel: the label forest and
/// staged pixels, both sized `bx * by`, plus find-cost counters.
pub(crate) struct LocalScratch {
    labels: ParentArray,
    pixels: Vec<AtomicU8>,
    find_calls: AtomicU64,
    find_steps: AtomicU64,
}

impl LocalScratch {
    fn new(cfg: BlockConfig) -> Self {
        let threads = cfg.threads() as usize;
        Self {
            labels: ParentArray::new(threads),
            pixels: (0..threads).map(|_| AtomicU8::new(0)).collect(),
            find_calls: AtomicU64::new(0),
            find_steps: AtomicU64::new(0),
        }
    }

    #[inline]
    fn pixel(&self, tid: u32) -> u8 {
        self.pixels[tid as usize].load(Ordering::Relaxed)
    }
}

#[inline]
fn init_phase(img: &Image, t: &ThreadCtx, s: &LocalScratch) {
    s.labels.set(t.tid, t.tid);
    s.pixels[t.tid as usize].store(img.pixel(t.x, t.y), Ordering::Relaxed);
}

#[inline]
fn row_scan_phase(t: &ThreadCtx, s: &LocalScratch) {
    if t.tx > 0 && s.pixel(t.tid) == s.pixel(t.tid - 1) {
        s.labels.set(t.tid, s.labels.get(t.tid - 1));
    }
}

#[inline]
fn column_scan_phase(t: &ThreadCtx, s: &LocalScratch) {
    let bx = t.block.cfg.bx();
    if t.ty > 0 && s.pixel(t.tid) == s.pixel(t.tid - bx) {
        s.labels.set(t.tid, s.labels.get(t.tid - bx));
    }
}

/// Walk the chain from `tid` to its current fixpoint, publishing each step
/// into `label[tid]`. Labels never exceed their index, so the walk
/// strictly descends and terminates.
#[inline]
fn unify_phase(t: &ThreadCtx, s: &LocalScratch) {
    let mut temp = t.tid;
    loop {
        let next = s.labels.get(temp);
        if next == temp {
            break;
        }
        temp = next;
        s.labels.set(t.tid, temp);
    }
}

#[inline]
fn union_left_phase(t: &ThreadCtx, s: &LocalScratch) {
    if t.tx > 0 && s.pixel(t.tid) == s.pixel(t.tid - 1) {
        let cost = s.labels.union_min_traced(t.tid, t.tid - 1);
        s.find_calls.fetch_add(cost.calls, Ordering::Relaxed);
        s.find_steps.fetch_add(cost.steps, Ordering::Relaxed);
    }
}

#[inline]
fn union_up_phase(t: &ThreadCtx, s: &LocalScratch) {
    let bx = t.block.cfg.bx();
    if t.ty > 0 && s.pixel(t.tid) == s.pixel(t.tid - bx) {
        let cost = s.labels.union_min_traced(t.tid, t.tid - bx);
        s.find_calls.fetch_add(cost.calls, Ordering::Relaxed);
        s.find_steps.fetch_add(cost.steps, Ordering::Relaxed);
    }
}

/// Map a block-local root tid to its global linear cell index.
#[inline]
fn local_root_to_global(root: u32, block: &BlockCtx, img_width: u32) -> u32 {
    let bx = block.cfg.bx();
    let gx = block.origin_x + root % bx;
    let gy = block.origin_y + root / bx;
    gx + gy * img_width
}

#[inline]
fn to_global_phase(img_width: u32, out: &LabelMap, t: &ThreadCtx, s: &LocalScratch) {
    let root = s.labels.find(t.tid);
    let global = local_root_to_global(root, &t.block, img_width);
    out.parents().set(t.x + t.y * img_width, global);
}

/// Checked-mode invariant: labels never exceed their thread id.
fn audit_labels_bounded(block: &BlockCtx, s: &LocalScratch) {
    for_each_guard_tid(block, |tid| {
        let l = s.labels.get(tid);
        assert!(l <= tid, "label {l} exceeds tid {tid} at a barrier");
    });
}

/// Checked-mode invariant after coarse labeling: every label refers to an
/// in-guard cell of equal pixel value that is 4-connected to its owner
/// within the block.
fn audit_coarse_soundness(block: &BlockCtx, s: &LocalScratch) {
    let classes = block_flood_classes(block, s);
    for_each_guard_tid(block, |tid| {
        let l = s.labels.get(tid);
        assert!(l <= tid);
        let bx = block.cfg.bx();
        let (lx, ly) = (l % bx, l / bx);
        assert!(
            lx < block.guard_w && ly < block.guard_h,
            "label {l} points outside the guard"
        );
        assert_eq!(s.pixel(l), s.pixel(tid), "label crosses a pixel boundary");
        assert_eq!(
            classes[&tid], classes[&l],
            "label {l} not 4-connected to {tid} within the block"
        );
    });
}

/// Checked-mode invariant after local union: the forest's classes match a
/// per-block flood fill exactly, with minimum-tid roots.
fn audit_local_classes(block: &BlockCtx, s: &LocalScratch) {
    let classes = block_flood_classes(block, s);
    for_each_guard_tid(block, |tid| {
        assert_eq!(
            s.labels.find(tid),
            classes[&tid],
            "local union disagrees with block flood fill at tid {tid}"
        );
    });
}

fn for_each_guard_tid(block: &BlockCtx, mut f: impl FnMut(u32)) {
    for ty in 0..block.guard_h {
        for tx in 0..block.guard_w {
            f(tx + ty * block.cfg.bx());
        }
    }
}

/// Sequential flood fill of one block's guard rectangle over the staged
/// pixels; returns tid -> minimum tid of its equal-pixel component.
fn block_flood_classes(block: &BlockCtx, s: &LocalScratch) -> std::collections::HashMap<u32, u32> {
    let bx = block.cfg.bx();
    let (w, h) = (block.guard_w, block.guard_h);
    let mut class = std::collections::HashMap::new();
    for ty in 0..h {
        for tx in 0..w {
            let seed = tx + ty * bx;
            if class.contains_key(&seed) {
                continue;
            }
            let mut stack = vec![(tx, ty)];
            class.insert(seed, seed);
            while let Some((cx, cy)) = stack.pop() {
                let ct = cx + cy * bx;
                let neighbors = [
                    (cx.wrapping_sub(1), cy),
                    (cx + 1, cy),
                    (cx, cy.wrapping_sub(1)),
                    (cx, cy + 1),
                ];
                for (nx, ny) in neighbors {
                    if nx >= w || ny >= h {
                        continue;
                    }
                    let nt = nx + ny * bx;
                    if !class.contains_key(&nt) && s.pixel(nt) == s.pixel(ct) {
                        class.insert(nt, seed);
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    class
}

/// Totals from the block-local merge.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LocalStats {
    pub find_calls: u64,
    pub find_steps: u64,
}

/// Run the block-local merge kernel over the whole image, writing global
/// labels into `out`. With `coarse` false the scan/unification phases are
/// skipped, which is exactly the conventional union-find local merge.
pub(crate) fn run_local_merge(
    img: &Image,
    out: &LabelMap,
    cfg: BlockConfig,
    order: OrderPolicy,
    mode: ExecMode,
    coarse: bool,
) -> LocalStats {
    let width = img.width();
    let mut program = BlockProgram::new(move |b: &BlockCtx| LocalScratch::new(b.cfg))
        .phase_with_audit(|t, s| init_phase(img, t, s), audit_labels_bounded);
    if coarse {
        program = program
            .phase_with_audit(row_scan_phase, audit_labels_bounded)
            .phase_with_audit(column_scan_phase, audit_labels_bounded)
            .phase_with_audit(unify_phase, audit_coarse_soundness);
    }
    program = program
        .phase_with_audit(union_left_phase, audit_labels_bounded)
        .phase_with_audit(union_up_phase, audit_local_classes)
        .phase(move |t, s| to_global_phase(width, out, t, s));

    let scratches = run_blocked((img.width(), img.height()), cfg, order, mode, &program);
    let mut stats = LocalStats::default();
    for s in &scratches {
        stats.find_calls += s.find_calls.load(Ordering::Relaxed);
        stats.find_steps += s.find_steps.load(Ordering::Relaxed);
    }
    stats
}

/// Number of cells on block boundaries along each axis for an `N x M`
/// image under blocks of `bx x by`: `P_x = floor(N / bx) * M` and
/// `P_y = floor(M / by) * N`. The cross-block merge launches
/// `max(P_x, P_y)` threads.
pub fn boundary_cell_counts(
    width: u32,
    height: u32,
    bx: u32,
    by: u32,
) -> Result<(u64, u64), EngineError> {
    if bx == 0 || by == 0 {
        return Err(EngineError::InvalidBlockConfig {
            bx,
            by,
            reason: "both dimensions must be at least 1",
        });
    }
    let p_x = (width / bx) as u64 * height as u64;
    let p_y = (height / by) as u64 * width as u64;
    Ok((p_x, p_y))
}

/// Counters from one boundary-analysis launch.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundaryStats {
    /// Ids spawned: `max(P_x, P_y)`.
    pub work_items: u64,
    /// Equal-pixel boundary pairs unioned.
    pub unions: u64,
}

/// Cross-block merge: one flat launch of `max(P_x, P_y)` ids. Id `j`
/// covers the vertical-boundary cell `(((j mod K) + 1) * bx, j div K)`
/// with `K = floor(N / bx)`, unioning it with its left neighbor on equal
/// pixels, and the horizontal-boundary cell `(j mod N, ((j div N) + 1) *
/// by)`, unioning it with its upper neighbor. Out-of-range cells are
/// guarded out; cells in column 0 / row 0 have no cross-block neighbor and
/// are never produced by the mapping.
pub fn boundary_merge(
    img: &Image,
    cfg: BlockConfig,
    labels: &LabelMap,
    order: OrderPolicy,
) -> BoundaryStats {
    let n = img.width() as u64;
    let m = img.height() as u64;
    let (bx, by) = (cfg.bx() as u64, cfg.by() as u64);
    let (p_x, p_y) =
        boundary_cell_counts(img.width(), img.height(), cfg.bx(), cfg.by()).expect("valid config");
    let k = n / bx;
    let total = p_x.max(p_y);
    let unions = AtomicU64::new(0);

    run_flat(total, order, |id| {
        // Vertical block boundary: union with the left neighbor.
        if k > 0 {
            let vx = ((id % k) + 1) * bx;
            let vy = id / k;
            if vx < n && vy < m {
                let (x, y) = (vx as u32, vy as u32);
                if img.pixel(x, y) == img.pixel(x - 1, y) {
                    let cell = x + y * n as u32;
                    labels.parents().union_min(cell, cell - 1);
                    unions.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        // Horizontal block boundary: union with the upper neighbor.
        let hx = (id % n) as u32;
        let hy = ((id / n) + 1) * by;
        if hy < m {
            let y = hy as u32;
            if img.pixel(hx, y) == img.pixel(hx, y - 1) {
                let cell = hx + y * n as u32;
                labels.parents().union_min(cell, cell - n as u32);
                unions.fetch_add(1, Ordering::Relaxed);
            }
        }
    });

    BoundaryStats {
        work_items: total,
        unions: unions.into_inner(),
    }
}

/// Final link: point every cell at its component root. After this, each
/// label is the minimum linear index of its component.
pub fn link_flatten(labels: &mut LabelMap) {
    labels.flatten();
}

/// The full optimized pipeline: local merge with coarse labeling, boundary
/// analysis, final link. Output is deterministic regardless of the order
/// policy and worker count.
pub fn label_optimized(img: &Image, cfg: BlockConfig, order: OrderPolicy) -> LabelMap {
    label_optimized_full(img, cfg, order, ExecMode::Fast).0
}

/// [`label_optimized`] with an execution mode and run counters.
pub fn label_optimized_full(
    img: &Image,
    cfg: BlockConfig,
    order: OrderPolicy,
    mode: ExecMode,
) -> (LabelMap, PipelineStats) {
    let mut labels = LabelMap::new_identity(img.width(), img.height());
    let local = run_local_merge(img, &labels, cfg, order, mode, true);
    let boundary = boundary_merge(img, cfg, &labels, order);
    link_flatten(&mut labels);
    (
        labels,
        PipelineStats {
            local_find_calls: local.find_calls,
            local_find_steps: local.find_steps,
            merge_work_items: boundary.work_items,
            boundary_unions: boundary.unions,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{generate, GenParams, Pattern};

    fn image_from(width: u32, height: u32, pixels: &[u8]) -> Image {
        Image::new(width, height, pixels.to_vec()).unwrap()
    }

    /// Run only the first `phases` kernel-1 phases (coarse variant) over
    /// one image, sequentially, returning the per-block scratches.
    fn run_partial_kernel1(img: &Image, cfg: BlockConfig, phases: usize) -> Vec<LocalScratch> {
        let all: Vec<Box<dyn Fn(&ThreadCtx, &LocalScratch) + Sync>> = vec![
            Box::new(|t, s| init_phase(img, t, s)),
            Box::new(row_scan_phase),
            Box::new(column_scan_phase),
            Box::new(unify_phase),
            Box::new(union_left_phase),
            Box::new(union_up_phase),
        ];
        let mut program = BlockProgram::new(move |b: &BlockCtx| LocalScratch::new(b.cfg));
        for phase in all.into_iter().take(phases) {
            program = program.phase(move |t, s| phase(t, s));
        }
        run_blocked(
            (img.width(), img.height()),
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            &program,
        )
    }

    #[test]
    fn boundary_counts_match_the_formulas() {
        assert_eq!(
            boundary_cell_counts(4096, 4096, 32, 16).unwrap(),
            (524288, 1048576)
        );
        assert_eq!(
            boundary_cell_counts(512, 512, 512, 512).unwrap(),
            (512, 512)
        );
        assert_eq!(boundary_cell_counts(10, 10, 3, 3).unwrap(), (30, 30));
        assert!(boundary_cell_counts(8, 8, 0, 3).is_err());
        assert!(boundary_cell_counts(8, 8, 3, 0).is_err());
    }

    #[test]
    fn init_fills_identity_labels() {
        let img = generate(Pattern::Uniform, 4, 4, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(4, 4).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 1)[0];
        assert_eq!(s.labels.to_vec(), (0..16).collect::<Vec<u32>>());
        assert!(s.pixels.iter().all(|p| p.load(Ordering::Relaxed) == 0));
    }

    #[test]
    fn init_touches_only_in_guard_entries() {
        // 4x4 block over a 3x3 image of 7s: only 9 pixel slots staged.
        let img = image_from(3, 3, &[7; 9]);
        let cfg = BlockConfig::new(4, 4).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 1)[0];
        let staged: Vec<usize> = s
            .pixels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.load(Ordering::Relaxed) == 7)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(staged, vec![0, 1, 2, 4, 5, 6, 8, 9, 10]);
    }

    #[test]
    fn row_scan_links_equal_runs() {
        // One block row, pixels [A, A, B, B, A].
        let img = image_from(5, 1, &[10, 10, 20, 20, 10]);
        let cfg = BlockConfig::new(5, 1).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 2)[0];
        assert_eq!(s.labels.to_vec(), vec![0, 0, 2, 2, 4]);
    }

    #[test]
    fn scans_leave_checkerboard_untouched() {
        let img = generate(Pattern::Checkerboard, 4, 4, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(4, 4).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 3)[0];
        assert_eq!(s.labels.to_vec(), (0..16).collect::<Vec<u32>>());
    }

    #[test]
    fn sequential_scans_on_uniform_block() {
        let img = generate(Pattern::Uniform, 4, 4, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(4, 4).unwrap();
        // Ascending sequential order: the row scan chains each row to its
        // first cell, so row r holds 4r everywhere.
        let s = &run_partial_kernel1(&img, cfg, 2)[0];
        assert_eq!(
            s.labels.to_vec(),
            vec![0, 0, 0, 0, 4, 4, 4, 4, 8, 8, 8, 8, 12, 12, 12, 12]
        );
        // The column scan then chains rows through column 0 down to 0.
        let s = &run_partial_kernel1(&img, cfg, 3)[0];
        assert!(s.labels.to_vec().iter().all(|&l| l == 0));
    }

    #[test]
    fn unify_collapses_chains() {
        // Hand-built scratch: chain labels [0, 0, 1, 2, 3] on one row.
        let cfg = BlockConfig::new(5, 1).unwrap();
        let program = BlockProgram::new(move |b: &BlockCtx| {
            let s = LocalScratch::new(b.cfg);
            for (tid, &l) in [0u32, 0, 1, 2, 3].iter().enumerate() {
                s.labels.set(tid as u32, l);
            }
            s
        })
        .phase(unify_phase);
        let s = &run_blocked(
            (5, 1),
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            &program,
        )[0];
        assert_eq!(s.labels.to_vec(), vec![0; 5]);
    }

    #[test]
    fn unify_keeps_flat_maps_unchanged() {
        let img = image_from(5, 1, &[10, 10, 20, 20, 10]);
        let cfg = BlockConfig::new(5, 1).unwrap();
        // Depth <= 1 already: [0, 0, 2, 2, 4] stays put.
        let s = &run_partial_kernel1(&img, cfg, 4)[0];
        assert_eq!(s.labels.to_vec(), vec![0, 0, 2, 2, 4]);
    }

    #[test]
    fn unify_flattens_uniform_block_to_zero() {
        let img = generate(Pattern::Uniform, 8, 8, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(8, 8).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 4)[0];
        assert!(s.labels.to_vec().iter().all(|&l| l == 0));
    }

    #[test]
    fn local_union_reunites_u_shape() {
        // U shape of 7s inside a 4x3 block; the two arms get distinct
        // coarse labels and the union phases must reconnect them.
        // 7 . 7
        // 7 . 7
        // 7 7 7
        let img = image_from(3, 3, &[7, 0, 7, 7, 0, 7, 7, 7, 7]);
        let cfg = BlockConfig::new(4, 4).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 6)[0];
        // All U cells resolve to tid 0 (the minimum of the region).
        for tid in [0u32, 2, 4, 6, 8, 9, 10] {
            assert_eq!(s.labels.find(tid), 0, "tid {tid}");
        }
        // The hole is its own region rooted at its minimum, tid 1.
        assert_eq!(s.labels.find(1), 1);
        assert_eq!(s.labels.find(5), 1);
    }

    #[test]
    fn local_union_is_a_noop_on_checkerboard() {
        let img = generate(Pattern::Checkerboard, 8, 8, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(8, 8).unwrap();
        let s = &run_partial_kernel1(&img, cfg, 6)[0];
        assert_eq!(s.labels.to_vec(), (0..64).collect::<Vec<u32>>());
    }

    #[test]
    fn local_root_to_global_matches_hand_arithmetic() {
        let cfg = BlockConfig::new(4, 4).unwrap();
        let block = BlockCtx {
            index_x: 1,
            index_y: 0,
            origin_x: 4,
            origin_y: 0,
            guard_w: 4,
            guard_h: 4,
            cfg,
        };
        // Local root 5 = (1, 1) in block (1, 0) of a 16-wide image.
        assert_eq!(local_root_to_global(5, &block, 16), 21);
        let origin = BlockCtx {
            index_x: 0,
            origin_x: 0,
            ..block
        };
        assert_eq!(local_root_to_global(0, &origin, 16), 0);
    }

    #[test]
    fn local_merge_labels_each_block_by_its_origin() {
        // Uniform 8x8 with 4x4 blocks: after the local kernel every cell
        // holds the linear index of its block's top-left cell.
        let img = generate(Pattern::Uniform, 8, 8, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(4, 4).unwrap();
        let labels = LabelMap::new_identity(8, 8);
        run_local_merge(
            &img,
            &labels,
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            true,
        );
        for y in 0..8u32 {
            for x in 0..8u32 {
                let expected = (x / 4) * 4 + (y / 4) * 4 * 8;
                assert_eq!(labels.label(x + y * 8), expected, "cell ({x},{y})");
            }
        }
    }

    #[test]
    fn boundary_merge_unites_uniform_blocks() {
        let img = generate(Pattern::Uniform, 8, 8, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(4, 4).unwrap();
        let labels = LabelMap::new_identity(8, 8);
        run_local_merge(
            &img,
            &labels,
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            true,
        );
        boundary_merge(&img, cfg, &labels, OrderPolicy::Sequential);
        for cell in 0..64u32 {
            assert_eq!(labels.parents().find(cell), 0);
        }
    }

    #[test]
    fn stripes_on_block_boundaries_trigger_no_unions() {
        // Stripe width == bx and a single block row: every cross-block
        // pair straddles a value change, so no union fires.
        let params = GenParams {
            stripe_period: 4,
            ..GenParams::default()
        };
        let img = generate(Pattern::Stripes, 8, 4, &params, 0).unwrap();
        let cfg = BlockConfig::new(4, 4).unwrap();
        let labels = LabelMap::new_identity(8, 4);
        run_local_merge(
            &img,
            &labels,
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            true,
        );
        let stats = boundary_merge(&img, cfg, &labels, OrderPolicy::Sequential);
        assert_eq!(stats.unions, 0);
    }

    #[test]
    fn bar_across_one_boundary_unions_exactly_its_rows() {
        // Two 4x4 blocks with different background values and a bar of
        // 200s crossing the vertical boundary on rows 1-2.
        let mut pixels = Vec::new();
        for y in 0..4u32 {
            for x in 0..8u32 {
                let bg = if x < 4 { 10 } else { 20 };
                pixels.push(if y == 1 || y == 2 { 200 } else { bg });
            }
        }
        let img = image_from(8, 4, &pixels);
        let cfg = BlockConfig::new(4, 4).unwrap();

        // Independent count: enumerate cross-block equal-value edges.
        let mut expected = 0u64;
        for y in 0..4u32 {
            for x in 1..8u32 {
                if x % 4 == 0 && img.pixel(x, y) == img.pixel(x - 1, y) {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 2);

        let labels = LabelMap::new_identity(8, 4);
        run_local_merge(
            &img,
            &labels,
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            true,
        );
        let stats = boundary_merge(&img, cfg, &labels, OrderPolicy::Sequential);
        assert_eq!(stats.unions, expected);
    }

    #[test]
    fn boundary_merge_reaches_partial_edge_blocks() {
        // 10 wide, bx = 3: boundary columns 3, 6, and 9 (the partial
        // block) must all be merged.
        let img = generate(Pattern::Uniform, 10, 5, &GenParams::default(), 0).unwrap();
        let cfg = BlockConfig::new(3, 3).unwrap();
        let (labels, _) =
            label_optimized_full(&img, cfg, OrderPolicy::Sequential, ExecMode::Checked);
        assert!(labels.to_vec().iter().all(|&l| l == 0));
    }

    #[test]
    fn single_cell_image_labels_zero() {
        let img = image_from(1, 1, &[42]);
        let labels = label_optimized(&img, BlockConfig::default_2d(), OrderPolicy::Sequential);
        assert_eq!(labels.to_vec(), vec![0]);
    }

    #[test]
    fn checkerboard_labels_are_identity() {
        let img = generate(Pattern::Checkerboard, 9, 7, &GenParams::default(), 0).unwrap();
        let (labels, _) = label_optimized_full(
            &img,
            BlockConfig::new(4, 4).unwrap(),
            OrderPolicy::Sequential,
            ExecMode::Checked,
        );
        assert_eq!(labels.to_vec(), (0..63).collect::<Vec<u32>>());
    }

    #[test]
    fn uniform_image_labels_zero_everywhere() {
        let img = generate(Pattern::Uniform, 33, 17, &GenParams::default(), 0).unwrap();
        let (labels, _) = label_optimized_full(
            &img,
            BlockConfig::default_2d(),
            OrderPolicy::Sequential,
            ExecMode::Checked,
        );
        assert!(labels.to_vec().iter().all(|&l| l == 0));
    }

    #[test]
    fn flatten_is_idempotent_on_pipeline_output() {
        let params = GenParams {
            density: 0.5,
            ..GenParams::default()
        };
        let img = generate(Pattern::Noise, 40, 30, &params, 5).unwrap();
        let mut labels = label_optimized(
            &img,
            BlockConfig::new(8, 8).unwrap(),
            OrderPolicy::Sequential,
        );
        let once = labels.to_vec();
        link_flatten(&mut labels);
        assert_eq!(labels.to_vec(), once);
    }
}
