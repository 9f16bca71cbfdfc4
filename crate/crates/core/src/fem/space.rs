use std::collections::HashMap;
use std::sync::Arc;

use super::basis::{barycentric_gradients, LagrangeBasis};
use crate::mesh::{edge_key, Mesh2, Point};

/// Continuous Lagrange space `S^p(T)` on a conforming mesh.
///
/// Global numbering: mesh vertices first (same indices), then `p - 1` dofs
/// per edge ordered from the lower to the higher vertex index, then the
/// interior dof of each element for `p = 3`.
#[derive(Debug, Clone)]
pub struct FESpace {
    mesh: Arc<Mesh2>,
    basis: LagrangeBasis,
    element_dofs: Vec<usize>,
    num_dofs: usize,
    dof_points: Vec<Point>,
    dof_label: Vec<Option<usize>>,
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
    neighbours: Vec<[Option<(usize, usize)>; 3]>,
}

impl FESpace {
    pub fn new(mesh: Arc<Mesh2>, degree: usize) -> crate::Result<Self> {
        if !(1..=3).contains(&degree) {
            return crate::error::input(format!("polynomial degree {degree} not in 1..=3"));
        }
        let basis = LagrangeBasis::new(degree);
        let nloc = basis.len();
        let p = degree;
        let nv = mesh.num_vertices();
        let nt = mesh.num_elements();

        let mut dof_points: Vec<Point> = mesh.vertices().to_vec();
        let mut dof_label: Vec<Option<usize>> = vec![None; nv];
        for (&(a, b), &label) in mesh.boundary_edges() {
            dof_label[a] = Some(label);
            dof_label[b] = Some(label);
        }

        let mut edge_first: HashMap<(usize, usize), usize> = HashMap::with_capacity(if p > 1 { 2 * nt } else { 0 });
        let mut element_dofs = vec![0usize; nt * nloc];
        let mut neighbours = vec![[None; 3]; nt];
        let mut edge_owner: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(2 * nt);

        for (t, tri) in mesh.triangles().iter().enumerate() {
            let dofs = &mut element_dofs[t * nloc..(t + 1) * nloc];
            dofs[..3].copy_from_slice(&tri.vertices);
            for k in 0..3 {
                let [from, to] = tri.edge(k);
                let key = edge_key(from, to);
                match edge_owner.remove(&key) {
                    Some((s, ks)) => {
                        neighbours[t][k] = Some((s, ks));
                        neighbours[s][ks] = Some((t, k));
                    }
                    None => {
                        edge_owner.insert(key, (t, k));
                    }
                }
                if p == 1 {
                    continue;
                }
                let first = *edge_first.entry(key).or_insert_with(|| {
                    let first = dof_points.len();
                    let (lo, hi) = (mesh.vertices()[key.0], mesh.vertices()[key.1]);
                    let label = mesh.boundary_edges().get(&key).copied();
                    for j in 1..p {
                        let s = j as f64 / p as f64;
                        dof_points.push([lo[0] + s * (hi[0] - lo[0]), lo[1] + s * (hi[1] - lo[1])]);
                        dof_label.push(label);
                    }
                    first
                });
                for j in 0..p - 1 {
                    let g = if from < to { first + j } else { first + p - 2 - j };
                    dofs[3 + k * (p - 1) + j] = g;
                }
            }
            if p == 3 {
                let x = mesh.coords(t);
                dofs[9] = dof_points.len();
                dof_points.push([
                    (x[0][0] + x[1][0] + x[2][0]) / 3.0,
                    (x[0][1] + x[1][1] + x[2][1]) / 3.0,
                ]);
                dof_label.push(None);
            }
        }

        let num_dofs = dof_points.len();
        let mut free_index = vec![None; num_dofs];
        let mut free_dofs = Vec::new();
        for d in 0..num_dofs {
            if dof_label[d].is_none() {
                free_index[d] = Some(free_dofs.len());
                free_dofs.push(d);
            }
        }
        Ok(FESpace {
            mesh,
            basis,
            element_dofs,
            num_dofs,
            dof_points,
            dof_label,
            free_index,
            free_dofs,
            neighbours,
        })
    }

    pub fn mesh(&self) -> &Mesh2 {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh2> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    /// Global dofs of element `t` in local node order.
    pub fn element_dofs(&self, t: usize) -> &[usize] {
        let n = self.basis.len();
        &self.element_dofs[t * n..(t + 1) * n]
    }

    /// Location of the Lagrange node of dof `d`.
    pub fn dof_point(&self, d: usize) -> Point {
        self.dof_points[d]
    }

    /// Root boundary edge carrying dof `d`, `None` for interior dofs.
    pub fn boundary_label(&self, d: usize) -> Option<usize> {
        self.dof_label[d]
    }

    pub fn is_boundary_dof(&self, d: usize) -> bool {
        self.dof_label[d].is_some()
    }

    pub fn free_index(&self, d: usize) -> Option<usize> {
        self.free_index[d]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Neighbour across local edge `k` of element `t` and its local index
    /// of the shared edge; `None` on the boundary.
    pub fn neighbour(&self, t: usize, k: usize) -> Option<(usize, usize)> {
        self.neighbours[t][k]
    }

    /// Barycentric gradients of element `t`.
    pub fn barycentric_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        barycentric_gradients(self.mesh.coords(t))
    }

    /// Cartesian point of barycentric coordinates `l` in element `t`.
    pub fn map_point(&self, t: usize, l: [f64; 3]) -> Point {
        let x = self.mesh.coords(t);
        [
            l[0] * x[0][0] + l[1] * x[1][0] + l[2] * x[2][0],
            l[0] * x[0][1] + l[1] * x[1][1] + l[2] * x[2][1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_counts() {
        let mesh = Arc::new(Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 3, 2).unwrap());
        let nv = mesh.num_vertices();
        let nt = mesh.num_elements();
        let ne = mesh.edge_map().len();
        let nb = mesh.boundary_edges().len();
        for p in 1..=3 {
            let s = FESpace::new(mesh.clone(), p).unwrap();
            let expect = nv + (p - 1) * ne + if p == 3 { nt } else { 0 };
            assert_eq!(s.num_dofs(), expect);
            assert_eq!(s.num_dofs() - s.num_free(), nb * p);
        }
    }

    #[test]
    fn shared_edge_dofs_coincide() {
        let mesh = Arc::new(Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap());
        let s = FESpace::new(mesh.clone(), 3).unwrap();
        let basis = s.basis().clone();
        for t in 0..mesh.num_elements() {
            for (i, &d) in s.element_dofs(t).iter().enumerate() {
                let x = s.map_point(t, basis.node(i));
                let y = s.dof_point(d);
                assert!((x[0] - y[0]).abs() < 1e-15 && (x[1] - y[1]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn neighbours_symmetric() {
        let mesh = Arc::new(Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 2, 3).unwrap());
        let s = FESpace::new(mesh.clone(), 1).unwrap();
        let mut boundary = 0;
        for t in 0..mesh.num_elements() {
            for k in 0..3 {
                match s.neighbour(t, k) {
                    Some((u, ku)) => assert_eq!(s.neighbour(u, ku), Some((t, k))),
                    None => boundary += 1,
                }
            }
        }
        assert_eq!(boundary, mesh.boundary_edges().len());
    }
}
