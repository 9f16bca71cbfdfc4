use std::sync::Arc;

use crate::error::Result;
use crate::estimators::{eta_dual, eta_primal};
use crate::fem::{
    assemble_dual, assemble_primal, lift_dirichlet, solve, AffineField, DiscreteFunction, EllipticCoefficients, FESpace,
    LoadData, Piecewise, RootTrace,
};
use crate::goals::{goal_flux_lifted, goal_volume};
use crate::marking::{GoalProblem, LevelResult};
use crate::mesh::{MarkedSet, Mesh2, Point};

/// Goal functional of a finite element problem.
#[derive(Debug, Clone)]
pub enum FemGoal {
    /// `g(u) = int g1 u - g2 . grad u`.
    Volume(LoadData),
    /// Weighted boundary flux with weight `lambda`.
    Flux(RootTrace),
}

/// Primal problem, goal and discretization degree on a fixed initial mesh.
#[derive(Debug, Clone)]
pub struct FemProblem {
    pub mesh: Mesh2,
    pub degree: usize,
    pub coeffs: EllipticCoefficients,
    pub load: LoadData,
    /// Primal Dirichlet trace; homogeneous if `None`.
    pub dirichlet: Option<RootTrace>,
    pub goal: FemGoal,
    pub reference: Option<f64>,
}

/// Primal and dual discrete solutions of one level.
#[derive(Debug, Clone)]
pub struct FemSolution {
    pub space: Arc<FESpace>,
    pub u: DiscreteFunction,
    pub z: DiscreteFunction,
    pub u_dir: Option<DiscreteFunction>,
}

impl FemProblem {
    /// Unit square with 8 root triangles; `f2 = (chi_Tf, 0)` and
    /// `g2 = (chi_Tg, 0)` with `T_f` at the origin and `T_g` at `(1, 1)`.
    pub fn experiment_one(degree: usize) -> Result<Self> {
        let mesh = Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 2, 2)?;
        let find = |corners: [Point; 3]| {
            (0..mesh.num_elements())
                .find(|&t| corners.iter().all(|c| mesh.coords(t).contains(c)))
                .expect("root triangle present")
        };
        let tf = find([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]);
        let tg = find([[1.0, 1.0], [0.5, 1.0], [1.0, 0.5]]);
        let n = mesh.num_roots();
        Ok(FemProblem {
            degree,
            coeffs: EllipticCoefficients::laplace(),
            load: LoadData::indicator_x(n, &[tf], 1.0),
            dirichlet: None,
            goal: FemGoal::Volume(LoadData::indicator_x(n, &[tg], 1.0)),
            reference: None,
            mesh,
        })
    }

    /// Rotating convection-diffusion on the unit square: `A = nu I`,
    /// `b = (y, 1/2 - x)`, a boundary pulse as primal Dirichlet data and a
    /// shifted pulse as flux weight.
    pub fn experiment_two(nu: f64, degree: usize) -> Result<Self> {
        let mesh = Mesh2::rectangle(0.0, 1.0, 0.0, 1.0, 6, 6)?;
        let pulse = |start: f64| {
            move |x: Point| {
                if x[1] != 0.0 {
                    return 0.0;
                }
                let s = x[0] - start;
                if (1.0 / 6.0..1.0 / 3.0).contains(&s) || (0.0..1.0 / 6.0).contains(&s) {
                    (1.0 - (6.0 * s - 1.0).abs()).max(0.0)
                } else {
                    0.0
                }
            }
        };
        let dirichlet = RootTrace::from_fn(&mesh, 1, pulse(1.0 / 6.0))?;
        let lambda = RootTrace::from_fn(&mesh, 1, pulse(2.0 / 3.0))?;
        Ok(FemProblem {
            degree,
            coeffs: EllipticCoefficients {
                diffusion: Piecewise::Constant([[nu, 0.0], [0.0, nu]]),
                convection: AffineField {
                    offset: [0.0, 0.5],
                    jacobian: [[0.0, 1.0], [-1.0, 0.0]],
                },
                reaction: Piecewise::Constant(0.0),
            },
            load: LoadData::zero(),
            dirichlet: Some(dirichlet),
            goal: FemGoal::Flux(lambda),
            reference: None,
            mesh,
        })
    }

    /// Discrete primal and dual solutions on `mesh`.
    pub fn solve_pair(&self, mesh: &Mesh2) -> Result<FemSolution> {
        let space = Arc::new(FESpace::new(Arc::new(mesh.clone()), self.degree)?);
        let u_dir = match &self.dirichlet {
            Some(trace) => Some(lift_dirichlet(&space, trace)?),
            None => None,
        };
        let u = solve(&assemble_primal(&space, &self.coeffs, &self.load, u_dir.as_ref())?)?;
        let z = match &self.goal {
            FemGoal::Volume(g) => solve(&assemble_dual(&space, &self.coeffs, g, None)?)?,
            FemGoal::Flux(lambda) => {
                let lift = lift_dirichlet(&space, lambda)?;
                solve(&assemble_dual(&space, &self.coeffs, &LoadData::zero(), Some(&lift))?)?
            }
        };
        Ok(FemSolution { space, u, z, u_dir })
    }

    /// Discrete goal value.
    pub fn goal_value(&self, sol: &FemSolution) -> Result<f64> {
        match &self.goal {
            FemGoal::Volume(g) => Ok(goal_volume(&sol.u, g)),
            FemGoal::Flux(lambda) => {
                let zero = DiscreteFunction::zeros(Arc::clone(&sol.space));
                let u_dir = sol.u_dir.as_ref().unwrap_or(&zero);
                goal_flux_lifted(&sol.z, &self.load, lambda, &self.coeffs, u_dir)
            }
        }
    }

    fn dual_load(&self) -> LoadData {
        match &self.goal {
            FemGoal::Volume(g) => g.clone(),
            FemGoal::Flux(_) => LoadData::zero(),
        }
    }
}

impl GoalProblem for FemProblem {
    type Mesh = Mesh2;

    fn initial_mesh(&self) -> Result<Mesh2> {
        Ok(self.mesh.clone())
    }

    fn solve_level(&self, mesh: &Mesh2) -> Result<LevelResult> {
        let sol = self.solve_pair(mesh)?;
        let (eta_u, eta_z) = rayon::join(
            || eta_primal(&sol.space, &self.coeffs, &self.load, &sol.u),
            || eta_dual(&sol.space, &self.coeffs, &self.dual_load(), &sol.z),
        );
        Ok(LevelResult {
            eta_u: eta_u?,
            eta_z: eta_z?,
            goal: Some(self.goal_value(&sol)?),
            forced: MarkedSet::empty(),
        })
    }

    fn reference(&self) -> Option<f64> {
        self.reference
    }
}
