//! Disjoint-set forest over cell indices with a minimum-root union.
//!
//! The union policy attaches the larger root under the smaller one, so the
//! surviving representative of a set is always its minimum element. That
//! makes the final labeling canonical no matter how unions are scheduled,
//! which is what lets racing workers share one forest: `find` and
//! `union_min` may be called concurrently from any number of threads,
//! while `flatten` requires exclusive access.
//!
//! Stored parents never exceed their index (entries start at `parent[i]
//! == i` and every write moves a value downward), so parent chains are
//! acyclic and every walk terminates.

use std::sync::atomic::{AtomicU32, Ordering};

/// Flat parent array: `parent[i]` is the current label of cell `i`, and a
/// cell with `parent[i] == i` is a root.
pub struct ParentArray {
    parent: Vec<AtomicU32>,
}

/// Parent-pointer hops performed by a traced operation, used to measure
/// how compressed the label-equivalence chains are.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FindCost {
    /// Number of `find` traversals.
    pub calls: u64,
    /// Total parent hops across those traversals (0 hops = already root).
    pub steps: u64,
}

impl FindCost {
    pub fn add(&mut self, other: FindCost) {
        self.calls += other.calls;
        self.steps += other.steps;
    }
}

impl ParentArray {
    /// Forest of `len` singleton sets.
    pub fn new(len: usize) -> Self {
        assert!(len <= u32::MAX as usize, "cell index must fit in u32");
        Self {
            parent: (0..len as u32).map(AtomicU32::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Raw load of one entry (no root resolution).
    #[inline]
    pub fn get(&self, i: u32) -> u32 {
        self.parent[i as usize].load(Ordering::Relaxed)
    }

    /// Raw store to one entry. The scan phases of the labeling kernels
    /// assign neighbor labels directly, bypassing union semantics.
    #[inline]
    pub fn set(&self, i: u32, value: u32) {
        self.parent[i as usize].store(value, Ordering::Relaxed);
    }

    /// Root of `i`'s chain, with opportunistic path halving: while
    /// walking, each visited entry is pointed at its grandparent when the
    /// CAS happens to succeed. Compression is never required for
    /// correctness and halving only ever writes an ancestor, so set
    /// membership is preserved.
    #[inline]
    pub fn find(&self, i: u32) -> u32 {
        self.find_traced(i).0
    }

    /// [`find`](Self::find) that also reports the length of the
    /// label-equivalence chain it had to chase: the number of additional
    /// links followed after loading the stored label. A label that is
    /// already a root (or whose referent is one) costs zero.
    pub fn find_traced(&self, mut i: u32) -> (u32, u64) {
        let mut moves = 0u64;
        loop {
            let p = self.parent[i as usize].load(Ordering::Relaxed);
            if p == i {
                return (i, moves.saturating_sub(1));
            }
            let gp = self.parent[p as usize].load(Ordering::Relaxed);
            if gp != p {
                // May lose the race; that's fine.
                let _ = self.parent[i as usize].compare_exchange_weak(
                    p,
                    gp,
                    Ordering::Relaxed,
                    Ordering::Relaxed,
                );
            }
            i = p;
            moves += 1;
        }
    }

    /// Connect the sets containing `a` and `b`; the smaller of the two
    /// prior roots survives. Lock-free: on interference the roots are
    /// re-resolved and the swing retried. Each failed attempt means some
    /// root just got smaller, so the loop terminates.
    pub fn union_min(&self, a: u32, b: u32) {
        self.union_min_traced(a, b);
    }

    /// [`union_min`](Self::union_min) reporting the find cost spent,
    /// including retries.
    pub fn union_min_traced(&self, a: u32, b: u32) -> FindCost {
        let mut cost = FindCost::default();
        let mut x = a;
        let mut y = b;
        loop {
            let (rx, hx) = self.find_traced(x);
            let (ry, hy) = self.find_traced(y);
            cost.calls += 2;
            cost.steps += hx + hy;
            if rx == ry {
                return cost;
            }
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            if self.parent[hi as usize]
                .compare_exchange(hi, lo, Ordering::AcqRel, Ordering::Acquire)
                .is_ok()
            {
                return cost;
            }
            x = hi;
            y = lo;
        }
    }

    /// Point every entry directly at its root: `parent[i] == find(i)` for
    /// all `i`. Idempotent. Requires exclusive access (no concurrent
    /// unions).
    ///
    /// Because stored parents never exceed their index, one ascending pass
    /// suffices: by the time `i` is visited, `parent[i] < i` has already
    /// been flattened.
    pub fn flatten(&mut self) {
        for i in 0..self.parent.len() {
            let p = *self.parent[i].get_mut() as usize;
            if p != i {
                debug_assert!(p < i, "parent invariant violated at {i}");
                let root = *self.parent[p].get_mut();
                *self.parent[i].get_mut() = root;
            }
        }
    }

    /// Copy of the current entries.
    pub fn to_vec(&self) -> Vec<u32> {
        self.parent
            .iter()
            .map(|p| p.load(Ordering::Relaxed))
            .collect()
    }
}

impl std::fmt::Debug for ParentArray {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.to_vec()).finish()
    }
}
