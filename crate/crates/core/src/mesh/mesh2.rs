use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{MarkedSet, TreePath};
use crate::error::{input, Error, Result};

pub type Point = [f64; 2];

/// Sorted vertex pair identifying an edge.
pub type EdgeKey = (usize, usize);

pub fn edge_key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A triangle of a [`Mesh2`].
///
/// Vertices are stored counter-clockwise and rotated such that the reference
/// edge is `vertices[0]`–`vertices[1]`, i.e. the edge opposite local vertex 2.
/// `vertices[2]` is the newest vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub generation: u32,
}

impl Triangle {
    /// Local index of the reference edge (edge `k` is opposite vertex `k`).
    pub const REFERENCE_EDGE: u8 = 2;

    pub fn reference_edge(&self) -> EdgeKey {
        edge_key(self.vertices[0], self.vertices[1])
    }

    /// Local edge `k` as the ordered pair of its endpoints (`k` = opposite vertex).
    pub fn edge(&self, k: usize) -> [usize; 2] {
        let v = self.vertices;
        [v[(k + 1) % 3], v[(k + 2) % 3]]
    }
}

/// The coarsest triangulation all meshes of one refinement family descend from.
#[derive(Debug, PartialEq)]
struct Forest {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: BTreeMap<EdgeKey, usize>,
}

/// Conforming triangulation of a polygonal domain with NVB bookkeeping.
///
/// Every element knows the root element it descends from and its path in the
/// binary bisection tree of that root. Meshes are immutable; refinement
/// returns a new mesh.
#[derive(Debug, Clone)]
pub struct Mesh2 {
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    roots: Vec<usize>,
    paths: Vec<TreePath>,
    /// Boundary edge -> index of the root boundary edge it lies on.
    boundary: BTreeMap<EdgeKey, usize>,
    forest: Arc<Forest>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

impl Mesh2 {
    /// Builds an initial mesh; reference edges are the longest edges, ties
    /// broken by the lowest global index of the opposite vertex.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut with_ref = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return input(format!("triangle {t} references missing vertex {v}"));
                }
            }
            let mut best = 0;
            for k in 1..3 {
                let len = |k: usize| dist2(vertices[tri[(k + 1) % 3]], vertices[tri[(k + 2) % 3]]);
                if len(k) > len(best) || (len(k) == len(best) && tri[k] < tri[best]) {
                    best = k;
                }
            }
            with_ref.push((*tri, best as u8));
        }
        Self::with_reference_edges(vertices, with_ref)
    }

    /// Builds an initial mesh with explicitly chosen reference edges
    /// (local index `k` = edge opposite vertex `k`).
    pub fn with_reference_edges(vertices: Vec<Point>, triangles: Vec<([usize; 3], u8)>) -> Result<Self> {
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, (tri, refedge)) in triangles.into_iter().enumerate() {
            if refedge > 2 {
                return input(format!("triangle {t}: reference edge index {refedge} not in 0..=2"));
            }
            if tri.iter().any(|&v| v >= vertices.len()) {
                return input(format!("triangle {t} references a missing vertex"));
            }
            let mut v = tri;
            let area = signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
            let mut opposite = refedge as usize;
            if area == 0.0 || !area.is_finite() {
                return input(format!("triangle {t} is degenerate"));
            }
            if area < 0.0 {
                // swap two vertices; keep track of where the opposite vertex went
                v.swap(0, 1);
                opposite = match opposite {
                    0 => 1,
                    1 => 0,
                    k => k,
                };
            }
            // cyclic rotation so that the opposite vertex is local vertex 2
            let shift = (opposite + 1) % 3;
            let rotated = [v[shift], v[(shift + 1) % 3], v[(shift + 2) % 3]];
            tris.push(rotated);
        }

        let mut counts: HashMap<EdgeKey, usize> = HashMap::new();
        for tri in &tris {
            for k in 0..3 {
                *counts.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((e, _)) = counts.iter().find(|(_, &c)| c > 2) {
            return input(format!("edge {e:?} shared by more than two triangles"));
        }
        let mut boundary_edges: Vec<EdgeKey> =
            counts.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
        boundary_edges.sort_unstable();
        // hanging nodes on the boundary of the root mesh
        for &(a, b) in &boundary_edges {
            for (i, &p) in vertices.iter().enumerate() {
                if i == a || i == b {
                    continue;
                }
                let (pa, pb) = (vertices[a], vertices[b]);
                let cross = signed_area(pa, pb, p);
                let t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / dist2(pa, pb);
                if cross.abs() <= 1e-14 * dist2(pa, pb) && t > 0.0 && t < 1.0 {
                    return input(format!("vertex {i} hangs on edge ({a}, {b})"));
                }
            }
        }
        let boundary: BTreeMap<EdgeKey, usize> =
            boundary_edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let forest = Arc::new(Forest {
            vertices: vertices.clone(),
            triangles: tris.clone(),
            boundary: boundary.clone(),
        });
        let n = tris.len();
        Ok(Mesh2 {
            vertices,
            triangles: tris
                .into_iter()
                .map(|v| Triangle {
                    vertices: v,
                    generation: 0,
                })
                .collect(),
            roots: (0..n).collect(),
            paths: vec![TreePath::root(); n],
            boundary,
            forest,
        })
    }

    /// Structured mesh of `[x0, x1] x [y0, y1]` with `nx * ny` cells, each
    /// cut along its anti-diagonal (lower-right to upper-left).
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || x1 <= x0 || y1 <= y0 {
            return input("rectangle needs positive extent and cell counts");
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    x0 + (x1 - x0) * i as f64 / nx as f64,
                    y0 + (y1 - y0) * j as f64 / ny as f64,
                ]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_roots(&self) -> usize {
        self.forest.triangles.len()
    }

    /// Root element `t` descends from.
    pub fn root_of(&self, t: usize) -> usize {
        self.roots[t]
    }

    pub fn path_of(&self, t: usize) -> TreePath {
        self.paths[t]
    }

    /// Boundary edges with the index of the root boundary edge they lie on.
    pub fn boundary_edges(&self) -> &BTreeMap<EdgeKey, usize> {
        &self.boundary
    }

    /// Endpoints of root boundary edge `label`.
    pub fn root_boundary_edge(&self, label: usize) -> Option<(Point, Point)> {
        self.forest
            .boundary
            .iter()
            .find(|(_, &l)| l == label)
            .map(|(&(a, b), _)| (self.forest.vertices[a], self.forest.vertices[b]))
    }

    pub fn num_root_boundary_edges(&self) -> usize {
        self.forest.boundary.len()
    }

    pub fn coords(&self, t: usize) -> [Point; 3] {
        let v = self.triangles[t].vertices;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.coords(t);
        signed_area(a, b, c)
    }

    /// `h_T = |T|^{1/2}`.
    pub fn element_size(&self, t: usize) -> f64 {
        self.area(t).sqrt()
    }

    /// Stable identity of element `t` within its refinement family.
    pub fn element_key(&self, t: usize) -> (usize, TreePath) {
        (self.roots[t], self.paths[t])
    }

    /// True if both meshes descend from the same initial mesh.
    pub fn same_family(&self, other: &Mesh2) -> bool {
        Arc::ptr_eq(&self.forest, &other.forest) || *self.forest == *other.forest
    }

    /// True if both meshes consist of the same elements (in any order).
    pub fn same_partition(&self, other: &Mesh2) -> bool {
        if !self.same_family(other) || self.num_elements() != other.num_elements() {
            return false;
        }
        let mut a: Vec<_> = (0..self.num_elements()).map(|t| self.element_key(t)).collect();
        let mut b: Vec<_> = (0..other.num_elements()).map(|t| other.element_key(t)).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// Map from each edge to the (one or two) elements containing it together
    /// with the local edge index in each element.
    pub fn edge_map(&self) -> HashMap<EdgeKey, Vec<(usize, usize)>> {
        let mut map: HashMap<EdgeKey, Vec<(usize, usize)>> = HashMap::with_capacity(2 * self.num_elements());
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let [a, b] = tri.edge(k);
                map.entry(edge_key(a, b)).or_default().push((t, k));
            }
        }
        map
    }

    /// Verifies conformity: positive areas, every edge shared by one or two
    /// elements, and single-element edges exactly the labelled boundary edges.
    pub fn check_conformity(&self) -> Result<()> {
        for t in 0..self.num_elements() {
            if !(self.area(t) > 0.0) {
                return input(format!("element {t} has non-positive area"));
            }
        }
        let map = self.edge_map();
        let mut boundary_seen = 0;
        for (e, elems) in &map {
            match elems.len() {
                1 => {
                    if !self.boundary.contains_key(e) {
                        return input(format!("edge {e:?} has one neighbour but is not on the boundary (hanging node)"));
                    }
                    boundary_seen += 1;
                }
                2 => {
                    if self.boundary.contains_key(e) {
                        return input(format!("boundary edge {e:?} is shared by two elements"));
                    }
                }
                n => return input(format!("edge {e:?} shared by {n} elements")),
            }
        }
        if boundary_seen != self.boundary.len() {
            return input("boundary table lists edges missing from the mesh");
        }
        Ok(())
    }

    /// Newest-vertex bisection of all marked elements plus the closure needed
    /// for conformity. Returns the coarsest conforming refinement in which
    /// every marked element has been bisected at least once.
    pub fn refine(&self, marked: &MarkedSet) -> Result<Mesh2> {
        marked.validate(self.num_elements())?;
        if marked.is_empty() {
            return Ok(self.clone());
        }
        let edges = self.edge_map();
        let mut marked_edges: HashSet<EdgeKey> = HashSet::new();
        let mut stack: Vec<EdgeKey> = Vec::new();
        for t in marked.iter() {
            let e = self.triangles[t].reference_edge();
            if marked_edges.insert(e) {
                stack.push(e);
            }
        }
        // closure: an element with a marked edge must have its reference edge marked
        while let Some(e) = stack.pop() {
            for &(t, _) in &edges[&e] {
                let r = self.triangles[t].reference_edge();
                if marked_edges.insert(r) {
                    stack.push(r);
                }
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<EdgeKey, usize> = HashMap::with_capacity(marked_edges.len());
        let mut triangles = Vec::with_capacity(self.num_elements() + 2 * marked_edges.len());
        let mut roots = Vec::with_capacity(triangles.capacity());
        let mut paths = Vec::with_capacity(triangles.capacity());
        let mut boundary = self.boundary.clone();

        let mut new_vertex = |e: EdgeKey, vertices: &mut Vec<Point>, boundary: &mut BTreeMap<EdgeKey, usize>| -> usize {
            *midpoints.entry(e).or_insert_with(|| {
                let m = vertices.len();
                vertices.push(midpoint(vertices[e.0], vertices[e.1]));
                if let Some(label) = boundary.remove(&e) {
                    boundary.insert(edge_key(e.0, m), label);
                    boundary.insert(edge_key(m, e.1), label);
                }
                m
            })
        };

        for (t, tri) in self.triangles.iter().enumerate() {
            if !marked_edges.contains(&tri.reference_edge()) {
                triangles.push(*tri);
                roots.push(self.roots[t]);
                paths.push(self.paths[t]);
                continue;
            }
            let [v0, v1, v2] = tri.vertices;
            let m = new_vertex(edge_key(v0, v1), &mut vertices, &mut boundary);
            let gen = tri.generation + 1;
            let children = [([v2, v0, m], 0u8), ([v1, v2, m], 1u8)];
            for (child, bit) in children {
                let path = self.paths[t].child(bit);
                let ref_e = edge_key(child[0], child[1]);
                if marked_edges.contains(&ref_e) {
                    let [w0, w1, w2] = child;
                    let mm = new_vertex(ref_e, &mut vertices, &mut boundary);
                    for (grand, gbit) in [([w2, w0, mm], 0u8), ([w1, w2, mm], 1u8)] {
                        triangles.push(Triangle {
                            vertices: grand,
                            generation: gen + 1,
                        });
                        roots.push(self.roots[t]);
                        paths.push(path.child(gbit));
                    }
                } else {
                    triangles.push(Triangle {
                        vertices: child,
                        generation: gen,
                    });
                    roots.push(self.roots[t]);
                    paths.push(path);
                }
            }
        }
        Ok(Mesh2 {
            vertices,
            triangles,
            roots,
            paths,
            boundary,
            forest: Arc::clone(&self.forest),
        })
    }

    /// Uniform refinement: every element bisected twice (one NVB "red" step).
    pub fn refine_uniform(&self) -> Result<Mesh2> {
        let once = self.refine(&MarkedSet::all(self.num_elements()))?;
        once.refine(&MarkedSet::all(once.num_elements()))
    }

    /// Coarsest common refinement of two meshes of the same family.
    pub fn overlay(&self, other: &Mesh2) -> Result<Mesh2> {
        if !self.same_family(other) {
            return input("overlay requires meshes refined from the same initial mesh");
        }
        let mut nodes: HashSet<(usize, TreePath)> = HashSet::new();
        for mesh in [self, other] {
            for t in 0..mesh.num_elements() {
                let (root, mut path) = mesh.element_key(t);
                loop {
                    if !nodes.insert((root, path)) {
                        break;
                    }
                    match path.parent() {
                        Some(p) => path = p,
                        None => break,
                    }
                }
            }
        }
        Ok(Self::from_tree_nodes(&self.forest, &nodes))
    }

    /// Rebuilds the mesh whose elements are the leaves of the given
    /// ancestor-closed set of bisection-tree nodes.
    fn from_tree_nodes(forest: &Arc<Forest>, nodes: &HashSet<(usize, TreePath)>) -> Mesh2 {
        let mut vertices = forest.vertices.clone();
        let mut boundary = forest.boundary.clone();
        let mut midpoints: HashMap<EdgeKey, usize> = HashMap::new();
        let mut triangles = Vec::new();
        let mut roots = Vec::new();
        let mut paths = Vec::new();
        for (r, &tri) in forest.triangles.iter().enumerate() {
            // depth-first, child 0 before child 1
            let mut stack = vec![(tri, TreePath::root())];
            while let Some((v, path)) = stack.pop() {
                if nodes.contains(&(r, path.child(0))) {
                    let e = edge_key(v[0], v[1]);
                    let m = *midpoints.entry(e).or_insert_with(|| {
                        let m = vertices.len();
                        vertices.push(midpoint(vertices[e.0], vertices[e.1]));
                        if let Some(label) = boundary.remove(&e) {
                            boundary.insert(edge_key(e.0, m), label);
                            boundary.insert(edge_key(m, e.1), label);
                        }
                        m
                    });
                    stack.push(([v[1], v[2], m], path.child(1)));
                    stack.push(([v[2], v[0], m], path.child(0)));
                } else {
                    triangles.push(Triangle {
                        vertices: v,
                        generation: path.depth(),
                    });
                    roots.push(r);
                    paths.push(path);
                }
            }
        }
        Mesh2 {
            vertices,
            triangles,
            roots,
            paths,
            boundary,
            forest: Arc::clone(forest),
        }
    }

    /// Writes the plain-text dump: header `vertices N triangles M`, then
    /// `x y` per vertex and `v0 v1 v2 refedge generation` per triangle.
    pub fn write_dump(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "vertices {} triangles {}", self.num_vertices(), self.num_elements())?;
        for p in &self.vertices {
            writeln!(w, "{:?} {:?}", p[0], p[1])?;
        }
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            writeln!(w, "{a} {b} {c} {} {}", Triangle::REFERENCE_EDGE, t.generation)?;
        }
        Ok(())
    }

    /// Parses a dump written by [`Mesh2::write_dump`].
    pub fn read_dump(r: impl BufRead) -> Result<MeshDump> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Input("empty mesh dump".into()))??;
        let tok: Vec<&str> = header.split_whitespace().collect();
        let (nv, nt) = match tok.as_slice() {
            ["vertices", nv, "triangles", nt] => (
                nv.parse::<usize>().map_err(|e| Error::Input(e.to_string()))?,
                nt.parse::<usize>().map_err(|e| Error::Input(e.to_string()))?,
            ),
            _ => return input(format!("bad mesh dump header `{header}`")),
        };
        let bad = |l: &str| Error::Input(format!("malformed mesh dump line `{l}`"));
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let l = lines.next().ok_or_else(|| Error::Input("truncated vertex block".into()))??;
            let xs: Vec<f64> = l.split_whitespace().map(|s| s.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad(&l))?;
            if xs.len() != 2 {
                return Err(bad(&l));
            }
            vertices.push([xs[0], xs[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let l = lines.next().ok_or_else(|| Error::Input("truncated triangle block".into()))??;
            let xs: Vec<u64> = l.split_whitespace().map(|s| s.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad(&l))?;
            if xs.len() != 5 || xs[3] > 2 {
                return Err(bad(&l));
            }
            triangles.push(DumpedTriangle {
                vertices: [xs[0] as usize, xs[1] as usize, xs[2] as usize],
                refedge: xs[3] as u8,
                generation: xs[4] as u32,
            });
        }
        Ok(MeshDump { vertices, triangles })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpedTriangle {
    pub vertices: [usize; 3],
    pub refedge: u8,
    pub generation: u32,
}

/// Contents of a mesh dump file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshDump {
    pub vertices: Vec<Point>,
    pub triangles: Vec<DumpedTriangle>,
}

impl MeshDump {
    /// Uses the dumped triangulation as a new initial mesh.
    pub fn into_mesh(self) -> Result<Mesh2> {
        Mesh2::with_reference_edges(
            self.vertices,
            self.triangles.into_iter().map(|t| (t.vertices, t.refedge)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangle_square() -> Mesh2 {
        // diagonal (0,0)-(1,1) is the reference edge of both triangles
        Mesh2::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn initial_reference_edge_is_longest() {
        let m = two_triangle_square();
        for t in m.triangles() {
            assert_eq!(t.reference_edge(), (0, 2));
            assert_eq!(t.generation, 0);
        }
        m.check_conformity().unwrap();
        assert_eq!(m.boundary_edges().len(), 4);
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = two_triangle_square();
        let r = m.refine(&MarkedSet::empty()).unwrap();
        assert!(r.same_partition(&m));
        assert_eq!(r.vertices(), m.vertices());
    }

    #[test]
    fn marking_one_triangle_bisects_both() {
        let m = two_triangle_square();
        let r = m.refine(&MarkedSet::new([0])).unwrap();
        assert_eq!(r.num_elements(), 4);
        assert_eq!(r.num_vertices(), 5);
        assert_eq!(r.vertices()[4], [0.5, 0.5]);
        r.check_conformity().unwrap();
        for t in r.triangles() {
            assert_eq!(t.generation, 1);
            assert_eq!(t.vertices[2], 4, "midpoint is the newest vertex");
        }
    }

    #[test]
    fn child_area_halves() {
        let m = two_triangle_square();
        let r = m.refine(&MarkedSet::new([1])).unwrap();
        let h_parent = m.element_size(0);
        for t in 0..r.num_elements() {
            assert!((r.element_size(t) - h_parent * 0.5f64.sqrt()).abs() < 1e-15);
        }
        assert!((m.element_size(0) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_mark_rejected() {
        let m = two_triangle_square();
        assert!(matches!(m.refine(&MarkedSet::new([2])), Err(Error::Input(_))));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = Mesh2::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        assert!(m.area(0) > 0.0);
        assert_eq!(m.triangles()[0].reference_edge(), (1, 2));
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let r = Mesh2::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]);
        assert!(r.is_err());
    }

    #[test]
    fn boundary_labels_follow_bisection() {
        let m = Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
        let mut r = m.clone();
        for _ in 0..4 {
            r = r.refine(&MarkedSet::all(r.num_elements())).unwrap();
        }
        r.check_conformity().unwrap();
        let total: f64 = r
            .boundary_edges()
            .keys()
            .map(|&(a, b)| dist2(r.vertices()[a], r.vertices()[b]).sqrt())
            .sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn overlay_identities() {
        let m = Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 1, 2).unwrap();
        let a = m.refine(&MarkedSet::new([0])).unwrap();
        let b = a.refine(&MarkedSet::new([1, 2])).unwrap();
        assert!(a.overlay(&a).unwrap().same_partition(&a));
        assert!(a.overlay(&b).unwrap().same_partition(&b));
        assert!(b.overlay(&a).unwrap().same_partition(&b));
        let o = a.overlay(&b).unwrap();
        o.check_conformity().unwrap();
    }

    #[test]
    fn overlay_rejects_foreign_meshes() {
        let a = Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 1, 1).unwrap();
        let b = Mesh2::rectangle(0.0, 2.0, 0.0, 1.0, 1, 1).unwrap();
        assert!(a.overlay(&b).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let m = Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 2, 1).unwrap();
        let r = m.refine(&MarkedSet::new([0, 3])).unwrap();
        let mut buf = Vec::new();
        r.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("vertices {} triangles {}\n", r.num_vertices(), r.num_elements())));
        let dump = Mesh2::read_dump(buf.as_slice()).unwrap();
        assert_eq!(dump.vertices, r.vertices());
        for (d, t) in dump.triangles.iter().zip(r.triangles()) {
            assert_eq!(d.vertices, t.vertices);
            assert_eq!(d.generation, t.generation);
        }
        let again = dump.into_mesh().unwrap();
        assert_eq!(again.triangles()[0].vertices, r.triangles()[0].vertices);
    }
}
