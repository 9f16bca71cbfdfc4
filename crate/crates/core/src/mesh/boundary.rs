use std::sync::Arc;

use super::{MarkedSet, Point, TreePath};
use crate::error::{input, Result};

/// Largest admissible length ratio of neighbouring panels.
pub const MAX_PANEL_RATIO: f64 = 2.0;

#[derive(Debug, PartialEq)]
struct Roots {
    vertices: Vec<Point>,
    tangents: Vec<Point>,
    lengths: Vec<f64>,
    starts: Vec<f64>,
    total: f64,
}

/// Node position relative to its nearest root vertex: `delta` is the signed
/// arclength from vertex `anchor`, negative on the panel before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFrame {
    pub anchor: usize,
    pub delta: f64,
}

/// Panel of a [`BoundaryMesh`]: the segment from node `i` to node `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Panel {
    pub root: usize,
    pub path: TreePath,
}

/// Polygonal mesh of a closed curve. Node `i` and node `i + 1` (cyclically)
/// bound panel `i`. Every node carries its arclength coordinate measured
/// from node 0 of the initial mesh and its offset from the nearest vertex of
/// the initial mesh, which stays accurate on arbitrarily small panels.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    nodes: Vec<Point>,
    arclength: Vec<f64>,
    frames: Vec<NodeFrame>,
    panels: Vec<Panel>,
    roots: Arc<Roots>,
}

impl BoundaryMesh {
    /// Initial mesh whose panels are the edges of the closed polygon
    /// `nodes[0] -> nodes[1] -> ... -> nodes[0]`.
    pub fn polygon(nodes: Vec<Point>) -> Result<Self> {
        if nodes.len() < 3 {
            return input("a closed polygon needs at least three nodes");
        }
        let n = nodes.len();
        let lengths: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = (nodes[i], nodes[(i + 1) % n]);
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .collect();
        if let Some(i) = lengths.iter().position(|&l| !(l > 0.0)) {
            return input(format!("panel {i} has zero length"));
        }
        let mut starts = Vec::with_capacity(n);
        let mut s = 0.0;
        for l in &lengths {
            starts.push(s);
            s += l;
        }
        let tangents = (0..n)
            .map(|i| {
                let (a, b) = (nodes[i], nodes[(i + 1) % n]);
                [(b[0] - a[0]) / lengths[i], (b[1] - a[1]) / lengths[i]]
            })
            .collect();
        let roots = Arc::new(Roots {
            vertices: nodes,
            tangents,
            lengths,
            starts,
            total: s,
        });
        let panels = (0..n)
            .map(|root| Panel {
                root,
                path: TreePath::root(),
            })
            .collect();
        Ok(Self::from_panels(panels, roots))
    }

    fn from_panels(panels: Vec<Panel>, roots: Arc<Roots>) -> Self {
        let n = roots.vertices.len();
        let frames: Vec<NodeFrame> = panels
            .iter()
            .map(|p| {
                // start of the panel: index m of 2^d equal parts of its root
                let d = p.path.depth() as i32;
                let m = p.path.index();
                let l = roots.lengths[p.root];
                let scale = l * 0.5f64.powi(d);
                let before = m as f64;
                let after = ((1u128 << d) - m) as f64;
                if before <= after {
                    NodeFrame {
                        anchor: p.root,
                        delta: before * scale,
                    }
                } else {
                    NodeFrame {
                        anchor: (p.root + 1) % n,
                        delta: -after * scale,
                    }
                }
            })
            .collect();
        let nodes = frames
            .iter()
            .map(|f| {
                let (v, o) = (roots.vertices[f.anchor], Self::offset_in(&roots, *f));
                [v[0] + o[0], v[1] + o[1]]
            })
            .collect();
        let arclength = frames
            .iter()
            .map(|f| {
                let s = roots.starts[f.anchor] + f.delta;
                if s < 0.0 {
                    s + roots.total
                } else {
                    s
                }
            })
            .collect();
        BoundaryMesh {
            nodes,
            arclength,
            frames,
            panels,
            roots,
        }
    }

    fn offset_in(roots: &Roots, f: NodeFrame) -> Point {
        let n = roots.vertices.len();
        let t = if f.delta >= 0.0 {
            roots.tangents[f.anchor]
        } else {
            roots.tangents[(f.anchor + n - 1) % n]
        };
        [f.delta * t[0], f.delta * t[1]]
    }

    /// Number of panels of the initial mesh.
    pub fn num_roots(&self) -> usize {
        self.roots.vertices.len()
    }

    /// Vertex `k` of the initial mesh.
    pub fn root_vertex(&self, k: usize) -> Point {
        self.roots.vertices[k]
    }

    /// Arclength of vertex `k` of the initial mesh.
    pub fn root_arclength(&self, k: usize) -> f64 {
        self.roots.starts[k]
    }

    /// Position of node `i` relative to its nearest initial vertex.
    pub fn node_frame(&self, i: usize) -> NodeFrame {
        self.frames[i]
    }

    /// Node `i` in coordinates centred at initial vertex `origin`.
    pub fn node_in(&self, i: usize, origin: usize) -> Point {
        let f = self.frames[i];
        let o = Self::offset_in(&self.roots, f);
        if f.anchor == origin {
            return o;
        }
        let (v, w) = (self.roots.vertices[f.anchor], self.roots.vertices[origin]);
        [(v[0] - w[0]) + o[0], (v[1] - w[1]) + o[1]]
    }

    /// Initial vertex nearest to panel `i`: the anchor of its endpoint
    /// closest to an initial vertex.
    pub fn panel_origin(&self, i: usize) -> usize {
        let (a, b) = (self.frames[i], self.frames[(i + 1) % self.frames.len()]);
        if a.delta.abs() <= b.delta.abs() {
            a.anchor
        } else {
            b.anchor
        }
    }

    /// Endpoints of panel `i` in coordinates centred at initial vertex `origin`.
    pub fn endpoints_in(&self, i: usize, origin: usize) -> (Point, Point) {
        (self.node_in(i, origin), self.node_in((i + 1) % self.frames.len(), origin))
    }

    /// Sign of `arclength(node) - s` for `s` in `[0, L)`, exact when `s` is
    /// the arclength of an initial vertex.
    pub fn compare_arclength(&self, node: usize, s: f64) -> std::cmp::Ordering {
        let f = self.frames[node];
        let mut base = self.roots.starts[f.anchor] - s;
        if f.anchor == 0 && f.delta < 0.0 {
            base += self.roots.total;
        }
        base.partial_cmp(&-f.delta).unwrap_or(std::cmp::Ordering::Equal)
    }

    pub fn num_panels(&self) -> usize {
        self.panels.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn perimeter(&self) -> f64 {
        self.roots.total
    }

    /// Endpoints of panel `i`.
    pub fn endpoints(&self, i: usize) -> (Point, Point) {
        (self.nodes[i], self.nodes[(i + 1) % self.nodes.len()])
    }

    /// Arclength coordinates of the endpoints of panel `i`; the last panel
    /// ends at the perimeter.
    pub fn arclength_range(&self, i: usize) -> (f64, f64) {
        let end = if i + 1 == self.nodes.len() {
            self.roots.total
        } else {
            self.arclength[i + 1]
        };
        (self.arclength[i], end)
    }

    pub fn node_arclength(&self, i: usize) -> f64 {
        self.arclength[i]
    }

    /// Panel length `h_T`, exact: root length times `2^-generation`.
    pub fn element_size(&self, i: usize) -> f64 {
        let p = self.panels[i];
        self.roots.lengths[p.root] * 0.5f64.powi(p.path.depth() as i32)
    }

    pub fn generation(&self, i: usize) -> u32 {
        self.panels[i].path.depth()
    }

    /// Unit tangent of panel `i` (direction of increasing arclength).
    pub fn tangent(&self, i: usize) -> Point {
        self.roots.tangents[self.panels[i].root]
    }

    /// Unit normal of panel `i`, the tangent rotated clockwise. For a
    /// counter-clockwise curve this points out of the enclosed domain.
    pub fn normal(&self, i: usize) -> Point {
        let t = self.tangent(i);
        [t[1], -t[0]]
    }

    /// Signed enclosed area (positive for counter-clockwise orientation).
    pub fn signed_area(&self) -> f64 {
        let v = &self.roots.vertices;
        let n = v.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    /// Largest distance between two vertices of the initial polygon.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.roots.vertices {
            for b in &self.roots.vertices {
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        d
    }

    /// Largest length ratio between neighbouring panels.
    pub fn max_neighbor_ratio(&self) -> f64 {
        let n = self.num_panels();
        (0..n)
            .map(|i| {
                let (a, b) = (self.element_size(i), self.element_size((i + 1) % n));
                (a / b).max(b / a)
            })
            .fold(1.0, f64::max)
    }

    /// Stable identity of a panel within its refinement family.
    pub fn panel_key(&self, i: usize) -> Panel {
        self.panels[i]
    }

    /// Bisects every marked panel at its midpoint. Neighbours longer than a
    /// marked panel are marked as well (recursively), which keeps the
    /// neighbour ratio at most [`MAX_PANEL_RATIO`].
    pub fn bisect(&self, marked: &MarkedSet) -> Result<BoundaryMesh> {
        let n = self.num_panels();
        marked.validate(n)?;
        if marked.is_empty() {
            return Ok(self.clone());
        }
        let mut mask = marked.mask(n);
        let mut stack: Vec<usize> = marked.iter().collect();
        while let Some(i) = stack.pop() {
            let h = self.element_size(i);
            for j in [(i + n - 1) % n, (i + 1) % n] {
                if !mask[j] && self.element_size(j) > h {
                    mask[j] = true;
                    stack.push(j);
                }
            }
        }
        let extra = mask.iter().filter(|&&m| m).count();
        let mut panels = Vec::with_capacity(n + extra);
        for i in 0..n {
            let p = self.panels[i];
            if mask[i] {
                if p.path.depth() >= TreePath::MAX_DEPTH as u32 {
                    return input(format!("panel {i} is at the bisection depth limit"));
                }
                panels.push(Panel { root: p.root, path: p.path.child(0) });
                panels.push(Panel { root: p.root, path: p.path.child(1) });
            } else {
                panels.push(p);
            }
        }
        Ok(Self::from_panels(panels, Arc::clone(&self.roots)))
    }

    /// Uniform refinement.
    pub fn bisect_all(&self) -> Result<BoundaryMesh> {
        self.bisect(&MarkedSet::all(self.num_panels()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n_per_side: usize) -> BoundaryMesh {
        let mut nodes = Vec::new();
        let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        for c in 0..4 {
            let (a, b): (Point, Point) = (corners[c], corners[(c + 1) % 4]);
            for k in 0..n_per_side {
                let t = k as f64 / n_per_side as f64;
                nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        BoundaryMesh::polygon(nodes).unwrap()
    }

    #[test]
    fn mark_one_of_uniform_four() {
        let m = square(1);
        let r = m.bisect(&MarkedSet::new([2])).unwrap();
        assert_eq!(r.num_panels(), 5);
        assert!(r.max_neighbor_ratio() <= 2.0);
        assert_eq!(r.element_size(2), 0.5);
        assert_eq!(r.nodes()[3], [0.5, 1.0]);
        assert_eq!(r.node_arclength(3), 2.5);
    }

    #[test]
    fn closure_propagates() {
        let mut m = square(1);
        // refine panel 0 three times at its left end
        for _ in 0..3 {
            m = m.bisect(&MarkedSet::new([0])).unwrap();
            assert!(m.max_neighbor_ratio() <= 2.0, "{}", m.max_neighbor_ratio());
        }
        assert!(m.num_panels() > 7);
    }

    #[test]
    fn empty_and_full_marking() {
        let m = square(2);
        assert_eq!(m.bisect(&MarkedSet::empty()).unwrap().nodes(), m.nodes());
        let r = m.bisect_all().unwrap();
        assert_eq!(r.num_panels(), 16);
        for i in 0..16 {
            assert_eq!(r.element_size(i), 0.25);
        }
    }

    #[test]
    fn geometry_helpers() {
        let m = square(1);
        assert!((m.signed_area() - 1.0).abs() < 1e-15);
        assert_eq!(m.normal(0), [0.0, -1.0]);
        assert!((m.diameter() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.arclength_range(3), (3.0, 4.0));
        assert!(m.bisect(&MarkedSet::new([4])).is_err());
    }

    #[test]
    fn frames_follow_the_nearest_vertex() {
        let m = square(1).bisect_all().unwrap().bisect(&MarkedSet::new([1])).unwrap();
        for i in 0..m.num_panels() {
            let f = m.node_frame(i);
            let v = m.root_vertex(f.anchor);
            let x = m.nodes()[i];
            assert_eq!(m.node_in(i, f.anchor), [x[0] - v[0], x[1] - v[1]]);
            assert!(f.delta.abs() <= 0.5);
        }
        // nodes at arclength 0.75 and 1 are anchored at vertex 1
        assert_eq!(m.node_frame(2), NodeFrame { anchor: 1, delta: -0.25 });
        assert_eq!(m.node_frame(3), NodeFrame { anchor: 1, delta: 0.0 });
        assert!(m.compare_arclength(3, 1.0).is_eq());
        assert!(m.compare_arclength(4, 1.0).is_gt());
        assert!(m.compare_arclength(2, 1.0).is_lt());
    }

    #[test]
    fn deep_grading_keeps_relative_positions() {
        let mut m = square(1);
        for _ in 0..100 {
            let at_corner: Vec<usize> = (0..m.num_panels())
                .filter(|&i| {
                    let n = m.num_panels();
                    m.node_frame(i) == NodeFrame { anchor: 1, delta: 0.0 }
                        || m.node_frame((i + 1) % n) == NodeFrame { anchor: 1, delta: 0.0 }
                })
                .collect();
            m = m.bisect(&MarkedSet::new(at_corner)).unwrap();
        }
        let n = m.num_panels();
        assert!(m.max_neighbor_ratio() <= 2.0);
        for i in 0..n {
            let (a, b) = m.endpoints_in(i, m.panel_origin(i));
            let h = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            assert!((h - m.element_size(i)).abs() <= 1e-15 * h, "panel {i}");
        }
        let smallest = (0..n).map(|i| m.element_size(i)).fold(1.0, f64::min);
        assert_eq!(smallest, 0.5f64.powi(100));
    }
}
