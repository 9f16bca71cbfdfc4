//! Meshes: conforming triangulations refined by newest-vertex bisection and
//! closed polygonal boundary meshes refined by 1D bisection.

mod boundary;
mod marked;
mod mesh2;
mod tree;

pub use boundary::{BoundaryMesh, NodeFrame, Panel, MAX_PANEL_RATIO};
pub use marked::MarkedSet;
pub use mesh2::{edge_key, DumpedTriangle, EdgeKey, Mesh2, MeshDump, Point, Triangle};
pub use tree::TreePath;

/// Common view of meshes for the adaptive loop.
pub trait AdaptiveMesh: Clone + Send + Sync {
    fn num_elements(&self) -> usize;
    /// `h_T`: `|T|^{1/2}` for triangles, the length for panels.
    fn element_size(&self, t: usize) -> f64;
    fn refine_marked(&self, marked: &MarkedSet) -> crate::Result<Self>;
    /// Identity of element `t` that survives refinement of other elements.
    fn element_id(&self, t: usize) -> (usize, TreePath);
}

impl AdaptiveMesh for Mesh2 {
    fn num_elements(&self) -> usize {
        Mesh2::num_elements(self)
    }
    fn element_size(&self, t: usize) -> f64 {
        Mesh2::element_size(self, t)
    }
    fn refine_marked(&self, marked: &MarkedSet) -> crate::Result<Self> {
        self.refine(marked)
    }
    fn element_id(&self, t: usize) -> (usize, TreePath) {
        self.element_key(t)
    }
}

impl AdaptiveMesh for BoundaryMesh {
    fn num_elements(&self) -> usize {
        self.num_panels()
    }
    fn element_size(&self, t: usize) -> f64 {
        BoundaryMesh::element_size(self, t)
    }
    fn refine_marked(&self, marked: &MarkedSet) -> crate::Result<Self> {
        self.bisect(marked)
    }
    fn element_id(&self, t: usize) -> (usize, TreePath) {
        let p = self.panel_key(t);
        (p.root, p.path)
    }
}
