//! Comparison labelers and the sequential ground-truth oracle.
//!
//! The three parallel baselines are deliberate reconstructions from the
//! classic algorithm families rather than line-by-line ports of any
//! particular published implementation. What they preserve is the cost
//! structure that matters for comparison:
//!
//! - label equivalence is multi-pass: scan / analysis / relabel sweeps
//!   repeat until nothing changes, so its iteration count depends on the
//!   image's structure;
//! - conventional block union-find is the optimized pipeline minus the
//!   coarse-labeling phases, with a cross-block merge that spawns one work
//!   item per image cell;
//! - line-based union-find merges within single-row segments, then runs a
//!   global union-find pass over all cells.
//!
//! Every labeler, the oracle included, resolves to the same canonical
//! output: each cell labeled with the minimum linear index of its
//! 4-connected equal-value component.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use crate::block_engine::{run_flat, BlockConfig, ExecMode, OrderPolicy};
use crate::grid::Image;
use crate::labelmap::LabelMap;
use crate::optimized::{self, run_local_merge, PipelineStats};

/// Identifier for one labeling algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoId {
    LabelEquivalence,
    ConventionalUf,
    LineUf,
    OptimizedUf,
    Oracle,
}

impl AlgoId {
    pub const ALL: [AlgoId; 5] = [
        AlgoId::LabelEquivalence,
        AlgoId::ConventionalUf,
        AlgoId::LineUf,
        AlgoId::OptimizedUf,
        AlgoId::Oracle,
    ];

    /// The four parallel algorithms, excluding the sequential oracle.
    pub const PARALLEL: [AlgoId; 4] = [
        AlgoId::LabelEquivalence,
        AlgoId::ConventionalUf,
        AlgoId::LineUf,
        AlgoId::OptimizedUf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgoId::LabelEquivalence => "label-equivalence",
            AlgoId::ConventionalUf => "conventional-uf",
            AlgoId::LineUf => "line-uf",
            AlgoId::OptimizedUf => "optimized-uf",
            AlgoId::Oracle => "oracle",
        }
    }

    /// Run the algorithm. `cfg` applies to the 2D-block algorithms and
    /// `cfg_line` to the line kernel; the oracle ignores both.
    pub fn run(
        self,
        img: &Image,
        cfg: BlockConfig,
        cfg_line: BlockConfig,
        order: OrderPolicy,
        mode: ExecMode,
    ) -> LabelMap {
        match self {
            AlgoId::LabelEquivalence => label_le_full(img, order).0,
            AlgoId::ConventionalUf => label_conventional_uf_full(img, cfg, order, mode).0,
            AlgoId::LineUf => label_line_uf_full(img, cfg_line, order, mode).0,
            AlgoId::OptimizedUf => optimized::label_optimized_full(img, cfg, order, mode).0,
            AlgoId::Oracle => flood_fill_oracle(img),
        }
    }
}

impl std::fmt::Display for AlgoId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AlgoId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "label-equivalence" | "label_equivalence" | "le" => Ok(AlgoId::LabelEquivalence),
            "conventional-uf" | "conventional_uf" | "uf" => Ok(AlgoId::ConventionalUf),
            "line-uf" | "line_uf" | "line" => Ok(AlgoId::LineUf),
            "optimized-uf" | "optimized_uf" | "optimized" | "ours" => Ok(AlgoId::OptimizedUf),
            "oracle" => Ok(AlgoId::Oracle),
            other => Err(format!(
                "unknown algorithm {other:?} (expected one of label-equivalence, \
                 conventional-uf, line-uf, optimized-uf, oracle)"
            )),
        }
    }
}

/// Sequential BFS flood fill, the ground truth every parallel labeler is
/// checked against. Seeding in ascending index order makes each label the
/// minimum linear index of its component, so the output is already
/// canonical.
pub fn flood_fill_oracle(img: &Image) -> LabelMap {
    let width = img.width();
    let height = img.height();
    let labels = LabelMap::new_identity(width, height);
    let total = labels.len() as u32;
    let mut visited = vec![false; labels.len()];
    let mut queue = VecDeque::new();

    for seed in 0..total {
        if visited[seed as usize] {
            continue;
        }
        visited[seed as usize] = true;
        labels.parents().set(seed, seed);
        queue.push_back(seed);
        while let Some(cell) = queue.pop_front() {
            let value = img.pixel_at(cell);
            let x = cell % width;
            let y = cell / width;
            let mut try_neighbor = |n: u32| {
                if !visited[n as usize] && img.pixel_at(n) == value {
                    visited[n as usize] = true;
                    labels.parents().set(n, seed);
                    queue.push_back(n);
                }
            };
            if x > 0 {
                try_neighbor(cell - 1);
            }
            if x + 1 < width {
                try_neighbor(cell + 1);
            }
            if y > 0 {
                try_neighbor(cell - width);
            }
            if y + 1 < height {
                try_neighbor(cell + width);
            }
        }
    }
    labels
}

/// Multi-pass label equivalence. Each iteration runs barrier-separated
/// flat sweeps: scan (each cell offers the minimum label among itself and
/// its equal-valued 4-neighbors to its current label's equivalence slot),
/// analysis (every equivalence chain resolved to its root), relabel, and
/// a slot reset for the next round. The loop ends when a scan sweep
/// changes nothing; the returned count includes that final sweep.
///
/// Offered labels never exceed the slot they are offered to, so chains
/// strictly descend and the analysis walk terminates. The minimum offers
/// are commutative and the analysis reads a fixed chain structure, so the
/// result is identical under any ordering. Sweep counts track image
/// structure: no equal neighbors converge in one sweep, solid regions in
/// two, shapes whose coarse pieces merge through intermediaries in more.
pub fn label_le_full(img: &Image, order: OrderPolicy) -> (LabelMap, u64) {
    let width = img.width();
    let height = img.height();
    let labels = LabelMap::new_identity(width, height);
    let total = labels.len() as u64;
    let refs: Vec<AtomicU32> = (0..total as u32).map(AtomicU32::new).collect();
    let mut iterations = 0u64;

    loop {
        iterations += 1;
        let changed = AtomicBool::new(false);

        // Scan: offer the neighborhood minimum to the current label's slot.
        run_flat(total, order, |id| {
            let cell = id as u32;
            let x = cell % width;
            let y = cell / width;
            let value = img.pixel_at(cell);
            let own = labels.label(cell);
            let mut min = own;
            let mut consider = |n: u32| {
                if img.pixel_at(n) == value {
                    min = min.min(labels.label(n));
                }
            };
            if x > 0 {
                consider(cell - 1);
            }
            if x + 1 < width {
                consider(cell + 1);
            }
            if y > 0 {
                consider(cell - width);
            }
            if y + 1 < height {
                consider(cell + width);
            }
            if min < own {
                refs[own as usize].fetch_min(min, Ordering::Relaxed);
                changed.store(true, Ordering::Relaxed);
            }
        });

        if !changed.load(Ordering::Relaxed) {
            break;
        }

        // Analysis: resolve every chain to its root. Concurrent
        // compression stores only shortcut toward roots that cannot
        // change during this sweep, so the walk stays deterministic.
        run_flat(total, order, |id| {
            let mut root = refs[id as usize].load(Ordering::Relaxed);
            loop {
                let next = refs[root as usize].load(Ordering::Relaxed);
                if next == root {
                    break;
                }
                root = next;
            }
            refs[id as usize].store(root, Ordering::Relaxed);
        });

        // Relabel through the resolved slots, then reset them.
        run_flat(total, order, |id| {
            let cell = id as u32;
            let resolved = refs[labels.label(cell) as usize].load(Ordering::Relaxed);
            labels.parents().set(cell, resolved);
        });
        run_flat(total, order, |id| {
            refs[id as usize].store(id as u32, Ordering::Relaxed);
        });
    }

    (labels, iterations)
}

/// Label equivalence with the default ordering. See [`label_le_full`].
pub fn label_le(img: &Image, order: OrderPolicy) -> LabelMap {
    label_le_full(img, order).0
}

/// Conventional block union-find: the optimized pipeline minus the
/// coarse-labeling phases, with a cross-block merge that launches one work
/// item per image cell (guards select the boundary cells).
pub fn label_conventional_uf_full(
    img: &Image,
    cfg: BlockConfig,
    order: OrderPolicy,
    mode: ExecMode,
) -> (LabelMap, PipelineStats) {
    let width = img.width();
    let height = img.height();
    let mut labels = LabelMap::new_identity(width, height);
    let local = run_local_merge(img, &labels, cfg, order, mode, false);

    let (bx, by) = (cfg.bx(), cfg.by());
    let total = labels.len() as u64;
    run_flat(total, order, |id| {
        let cell = id as u32;
        let x = cell % width;
        let y = cell / width;
        if x > 0 && x % bx == 0 && img.pixel(x, y) == img.pixel(x - 1, y) {
            labels.parents().union_min(cell, cell - 1);
        }
        if y > 0 && y % by == 0 && img.pixel(x, y) == img.pixel(x, y - 1) {
            labels.parents().union_min(cell, cell - width);
        }
    });
    labels.flatten();

    (
        labels,
        PipelineStats {
            local_find_calls: local.find_calls,
            local_find_steps: local.find_steps,
            merge_work_items: total,
            boundary_unions: 0,
        },
    )
}

pub fn label_conventional_uf(img: &Image, cfg: BlockConfig, order: OrderPolicy) -> LabelMap {
    label_conventional_uf_full(img, cfg, order, ExecMode::Fast).0
}

/// Line-based union-find: local merge within single-row segments of
/// `cfg_line.bx()` cells (left-neighbor unions only), then a global
/// union-find pass over all cells (upper neighbors everywhere, left
/// neighbors across segment boundaries), then the flatten.
///
/// Requires `cfg_line.by() == 1`.
pub fn label_line_uf_full(
    img: &Image,
    cfg_line: BlockConfig,
    order: OrderPolicy,
    mode: ExecMode,
) -> (LabelMap, PipelineStats) {
    assert!(
        cfg_line.by() == 1,
        "line kernel requires blocks of height 1, got {cfg_line}"
    );
    let width = img.width();
    let mut labels = LabelMap::new_identity(width, img.height());
    // With by == 1 the upper-neighbor phase never fires, leaving exactly
    // the left-neighbor segment merge.
    let local = run_local_merge(img, &labels, cfg_line, order, mode, false);

    let bx = cfg_line.bx();
    let total = labels.len() as u64;
    run_flat(total, order, |id| {
        let cell = id as u32;
        let x = cell % width;
        let y = cell / width;
        if y > 0 && img.pixel(x, y) == img.pixel(x, y - 1) {
            labels.parents().union_min(cell, cell - width);
        }
        if x > 0 && x % bx == 0 && img.pixel(x, y) == img.pixel(x - 1, y) {
            labels.parents().union_min(cell, cell - 1);
        }
    });
    labels.flatten();

    (
        labels,
        PipelineStats {
            local_find_calls: local.find_calls,
            local_find_steps: local.find_steps,
            merge_work_items: total,
            boundary_unions: 0,
        },
    )
}

pub fn label_line_uf(img: &Image, cfg_line: BlockConfig, order: OrderPolicy) -> LabelMap {
    label_line_uf_full(img, cfg_line, order, ExecMode::Fast).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{generate, GenParams, Pattern};

    fn image_from(width: u32, height: u32, pixels: &[u8]) -> Image {
        Image::new(width, height, pixels.to_vec()).unwrap()
    }

    /// Independent check of the oracle: a tiny sequential union-find over
    /// explicitly enumerated equal-value edges.
    fn edge_union_labels(img: &Image) -> Vec<u32> {
        let w = img.width();
        let h = img.height();
        let mut parent: Vec<u32> = (0..w * h).collect();
        fn find(parent: &mut [u32], mut i: u32) -> u32 {
            while parent[i as usize] != i {
                i = parent[i as usize];
            }
            i
        }
        let union = |parent: &mut Vec<u32>, a: u32, b: u32| {
            let (ra, rb) = (find(parent, a), find(parent, b));
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi as usize] = lo;
        };
        for y in 0..h {
            for x in 0..w {
                let cell = x + y * w;
                if x > 0 && img.pixel(x, y) == img.pixel(x - 1, y) {
                    union(&mut parent, cell, cell - 1);
                }
                if y > 0 && img.pixel(x, y) == img.pixel(x, y - 1) {
                    union(&mut parent, cell, cell - w);
                }
            }
        }
        (0..w * h).map(|i| find(&mut parent, i)).collect()
    }

    #[test]
    fn oracle_labels_single_cell() {
        let img = image_from(1, 1, &[9]);
        assert_eq!(flood_fill_oracle(&img).to_vec(), vec![0]);
    }

    #[test]
    fn oracle_labels_uniform_image_zero() {
        let img = generate(Pattern::Uniform, 6, 4, &GenParams::default(), 0).unwrap();
        assert!(flood_fill_oracle(&img).to_vec().iter().all(|&l| l == 0));
    }

    #[test]
    fn oracle_fixture_4x4() {
        // 1 1 0 0
        // 0 1 0 1
        // 0 1 1 1
        // 1 0 0 1
        let img = image_from(4, 4, &[1, 1, 0, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 1]);
        let labels = flood_fill_oracle(&img).to_vec();
        let expected = vec![0, 0, 2, 2, 4, 0, 2, 0, 4, 0, 0, 0, 12, 13, 13, 0];
        assert_eq!(labels, expected);
        // Double-check with an independent union-find over enumerated
        // equal-value edges.
        assert_eq!(labels, edge_union_labels(&img));
    }

    #[test]
    fn oracle_matches_edge_union_on_noise() {
        let params = GenParams {
            density: 0.4,
            ..GenParams::default()
        };
        for seed in 0..5 {
            let img = generate(Pattern::Noise, 37, 23, &params, seed).unwrap();
            assert_eq!(flood_fill_oracle(&img).to_vec(), edge_union_labels(&img));
        }
    }

    #[test]
    fn le_converges_immediately_on_checkerboard() {
        let img = generate(Pattern::Checkerboard, 8, 8, &GenParams::default(), 0).unwrap();
        let (labels, iterations) = label_le_full(&img, OrderPolicy::Sequential);
        assert_eq!(iterations, 1);
        assert_eq!(labels.to_vec(), (0..64).collect::<Vec<u32>>());
    }

    #[test]
    fn le_labels_uniform_zero() {
        let img = generate(Pattern::Uniform, 16, 9, &GenParams::default(), 0).unwrap();
        let (labels, iterations) = label_le_full(&img, OrderPolicy::Sequential);
        assert!(labels.to_vec().iter().all(|&l| l == 0));
        assert!(iterations as usize <= 16 * 9);
    }

    #[test]
    fn le_matches_oracle_on_spiral() {
        let img = generate(Pattern::Spiral, 33, 33, &GenParams::default(), 0).unwrap();
        let (labels, iterations) = label_le_full(&img, OrderPolicy::Sequential);
        assert_eq!(labels.to_vec(), flood_fill_oracle(&img).to_vec());
        assert!(iterations >= 2, "spiral should take multiple sweeps");
    }

    #[test]
    fn le_iterations_track_image_complexity() {
        let sweep_count = |pattern: Pattern, s: u32| {
            let img = generate(pattern, s, s, &GenParams::default(), 0).unwrap();
            label_le_full(&img, OrderPolicy::Sequential).1
        };
        // Monotone in spiral size: a larger spiral never takes fewer
        // sweeps.
        let (a, b, c) = (
            sweep_count(Pattern::Spiral, 17),
            sweep_count(Pattern::Spiral, 65),
            sweep_count(Pattern::Spiral, 257),
        );
        assert!(a <= b && b <= c, "iterations not monotone: {a}, {b}, {c}");
        // And ordered by structural complexity: spiral > uniform >
        // checkerboard.
        let uniform = sweep_count(Pattern::Uniform, 65);
        let checker = sweep_count(Pattern::Checkerboard, 65);
        assert!(
            c > uniform && uniform > checker,
            "complexity ordering violated: spiral {c}, uniform {uniform}, checkerboard {checker}"
        );
    }

    #[test]
    fn conventional_uf_matches_oracle() {
        let params = GenParams {
            density: 0.5,
            ..GenParams::default()
        };
        let img = generate(Pattern::Noise, 50, 34, &params, 11).unwrap();
        let cfg = BlockConfig::new(8, 8).unwrap();
        let (labels, stats) =
            label_conventional_uf_full(&img, cfg, OrderPolicy::Sequential, ExecMode::Checked);
        assert_eq!(labels.to_vec(), flood_fill_oracle(&img).to_vec());
        assert_eq!(stats.merge_work_items, 50 * 34);
    }

    #[test]
    fn line_uf_single_row_local_phase_suffices() {
        let img = image_from(7, 1, &[5, 5, 9, 9, 9, 5, 5]);
        let cfg = BlockConfig::default_line();
        let mut labels = LabelMap::new_identity(7, 1);
        run_local_merge(
            &img,
            &labels,
            cfg,
            OrderPolicy::Sequential,
            ExecMode::Checked,
            false,
        );
        labels.flatten();
        assert_eq!(labels.to_vec(), flood_fill_oracle(&img).to_vec());
    }

    #[test]
    fn line_uf_vertical_stripes_rely_on_global_phase() {
        // Width-1 stripes: the segment merge finds nothing, the global
        // pass does all the vertical joining.
        let params = GenParams {
            stripe_period: 1,
            ..GenParams::default()
        };
        let img = generate(Pattern::Stripes, 12, 6, &params, 0).unwrap();
        let cfg = BlockConfig::new(4, 1).unwrap();
        let (labels, _) = label_line_uf_full(&img, cfg, OrderPolicy::Sequential, ExecMode::Checked);
        let expected: Vec<u32> = (0..12 * 6).map(|i| i % 12).collect();
        assert_eq!(labels.to_vec(), expected);
    }

    #[test]
    fn line_uf_matches_oracle_on_noise() {
        let params = GenParams {
            density: 0.5,
            ..GenParams::default()
        };
        let img = generate(Pattern::Noise, 64, 48, &params, 3).unwrap();
        let (labels, stats) = label_line_uf_full(
            &img,
            BlockConfig::new(16, 1).unwrap(),
            OrderPolicy::Sequential,
            ExecMode::Checked,
        );
        assert_eq!(labels.to_vec(), flood_fill_oracle(&img).to_vec());
        assert_eq!(stats.merge_work_items, 64 * 48);
    }

    #[test]
    #[should_panic(expected = "height 1")]
    fn line_uf_rejects_tall_blocks() {
        let img = generate(Pattern::Uniform, 8, 8, &GenParams::default(), 0).unwrap();
        label_line_uf(
            &img,
            BlockConfig::new(8, 2).unwrap(),
            OrderPolicy::Sequential,
        );
    }

    #[test]
    fn algo_ids_parse_and_print() {
        for algo in AlgoId::ALL {
            assert_eq!(algo.name().parse::<AlgoId>().unwrap(), algo);
        }
        assert_eq!("le".parse::<AlgoId>().unwrap(), AlgoId::LabelEquivalence);
        assert!("fancy".parse::<AlgoId>().is_err());
    }

    #[test]
    fn all_algorithms_agree_on_a_small_image() {
        let params = GenParams {
            density: 0.5,
            ..GenParams::default()
        };
        let img = generate(Pattern::Noise, 41, 29, &params, 77).unwrap();
        let expected = flood_fill_oracle(&img).to_vec();
        for algo in AlgoId::PARALLEL {
            let labels = algo.run(
                &img,
                BlockConfig::new(8, 8).unwrap(),
                BlockConfig::new(16, 1).unwrap(),
                OrderPolicy::Sequential,
                ExecMode::Checked,
            );
            assert_eq!(labels.to_vec(), expected, "{algo}");
        }
    }
}
