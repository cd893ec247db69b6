//! Global label map: a [`ParentArray`] over linear cell indices plus the
//! grid dimensions it describes.

use crate::dsf::ParentArray;

/// Per-cell labels for an `width x height` grid. Labels are global linear
/// cell indices, and the array doubles as a disjoint-set parent array
/// during merging. After the owning pipeline flattens it, `label(i)` is
/// the minimum linear index of `i`'s 4-connected equal-value component.
pub struct LabelMap {
    parents: ParentArray,
    width: u32,
    height: u32,
}

impl LabelMap {
    /// Identity labeling: every cell its own label.
    pub fn new_identity(width: u32, height: u32) -> Self {
        Self {
            parents: ParentArray::new(width as usize * height as usize),
            width,
            height,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// The underlying disjoint-set forest, shareable across workers.
    pub fn parents(&self) -> &ParentArray {
        &self.parents
    }

    #[inline]
    pub fn label(&self, linear: u32) -> u32 {
        self.parents.get(linear)
    }

    /// Point every cell at its component root.
    pub fn flatten(&mut self) {
        self.parents.flatten();
    }

    /// Snapshot of the label values, row-major.
    pub fn to_vec(&self) -> Vec<u32> {
        self.parents.to_vec()
    }

    #[inline]
    pub fn linear(&self, x: u32, y: u32) -> u32 {
        debug_assert!(x < self.width && y < self.height);
        x + y * self.width
    }
}

impl std::fmt::Debug for LabelMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LabelMap({}x{})", self.width, self.height)
    }
}
