use std::sync::Mutex;

use crate::bem::{
    eta_bem_pair, lshape_dirichlet, lshape_mesh, rhs_vector, solve_single_layer, BemGoalWeight, CachedData,
    DirichletData, SingleLayer,
};
use crate::error::{input, Result};
use crate::marking::{GoalProblem, LevelResult};
use crate::mesh::BoundaryMesh;

/// Weighted boundary flux of the L-shaped Dirichlet benchmark.
#[derive(Debug)]
pub struct BemProblem {
    pub mesh: BoundaryMesh,
    pub weight: BemGoalWeight,
    /// Rescaling parameter of the estimators.
    pub epsilon: f64,
    pub reference: Option<f64>,
    data: CachedData<DirichletData>,
    operator: Mutex<Option<SingleLayer>>,
}

impl BemProblem {
    pub fn lshape(weight: BemGoalWeight, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon < 1.0) {
            return input(format!("rescaling parameter {epsilon} outside [0, 1)"));
        }
        Ok(BemProblem {
            mesh: lshape_mesh(),
            reference: Some(weight.lshape_reference()?.value),
            weight,
            epsilon,
            data: CachedData::new(lshape_dirichlet()),
            operator: Mutex::new(None),
        })
    }
}

impl GoalProblem for BemProblem {
    type Mesh = BoundaryMesh;

    fn initial_mesh(&self) -> Result<BoundaryMesh> {
        Ok(self.mesh.clone())
    }

    fn solve_level(&self, mesh: &BoundaryMesh) -> Result<LevelResult> {
        let v = {
            let mut cache = self.operator.lock().unwrap();
            let v = SingleLayer::assemble(mesh, cache.as_ref())?;
            *cache = Some(v.clone());
            v
        };
        let (lambda, forced) = self.weight.interp_weight(mesh, &self.mesh);
        let f = rhs_vector(mesh, &self.data)?;
        let g = rhs_vector(mesh, &lambda)?;
        let u = solve_single_layer(&v, &f)?;
        let z = solve_single_layer(&v, &g)?;
        let (eta_u, eta_z) = eta_bem_pair(mesh, &u, &self.data, &z, &lambda, self.epsilon)?;
        Ok(LevelResult {
            eta_u,
            eta_z,
            goal: Some(self.weight.goal(mesh, &self.mesh, &u)),
            forced,
        })
    }

    fn reference(&self) -> Option<f64> {
        self.reference
    }
}
