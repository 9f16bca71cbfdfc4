use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// A value that is either global or constant on each root element.
#[derive(Debug, Clone, PartialEq)]
pub enum Piecewise<T> {
    Constant(T),
    PerRoot(Vec<T>),
}

impl<T: Copy> Piecewise<T> {
    pub fn get(&self, root: usize) -> T {
        match self {
            Piecewise::Constant(v) => *v,
            Piecewise::PerRoot(v) => v[root],
        }
    }

    fn check_len(&self, num_roots: usize, what: &str) -> Result<()> {
        match self {
            Piecewise::PerRoot(v) if v.len() != num_roots => Err(Error::Config(format!(
                "{what}: {} root values for {num_roots} root elements",
                v.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Affine vector field `b(x) = offset + jacobian * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineField {
    pub offset: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
}

impl AffineField {
    pub const ZERO: AffineField = AffineField {
        offset: [0.0; 2],
        jacobian: [[0.0; 2]; 2],
    };

    pub fn constant(v: [f64; 2]) -> Self {
        AffineField {
            offset: v,
            jacobian: [[0.0; 2]; 2],
        }
    }

    pub fn eval(&self, x: Point) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.offset[0] + j[0][0] * x[0] + j[0][1] * x[1],
            self.offset[1] + j[1][0] * x[0] + j[1][1] * x[1],
        ]
    }

    pub fn divergence(&self) -> f64 {
        self.jacobian[0][0] + self.jacobian[1][1]
    }
}

/// Coefficients of `L u = -div(A grad u) + b . grad u + c u`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticCoefficients {
    pub diffusion: Piecewise<[[f64; 2]; 2]>,
    pub convection: AffineField,
    pub reaction: Piecewise<f64>,
}

impl EllipticCoefficients {
    pub fn laplace() -> Self {
        EllipticCoefficients {
            diffusion: Piecewise::Constant([[1.0, 0.0], [0.0, 1.0]]),
            convection: AffineField::ZERO,
            reaction: Piecewise::Constant(0.0),
        }
    }

    /// Checks symmetry and positive definiteness of `A` on every root.
    pub fn validate(&self, num_roots: usize) -> Result<()> {
        self.diffusion.check_len(num_roots, "diffusion")?;
        self.reaction.check_len(num_roots, "reaction")?;
        for r in 0..num_roots {
            let a = self.diffusion.get(r);
            let scale = a[0][0].abs().max(a[1][1].abs()).max(a[0][1].abs());
            if (a[0][1] - a[1][0]).abs() > 1e-14 * scale {
                return Err(Error::Config(format!("diffusion on root {r} is not symmetric")));
            }
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if !(a[0][0] > 0.0 && det > 0.0) {
                return Err(Error::Config(format!("diffusion on root {r} is not positive definite")));
            }
            if !self.reaction.get(r).is_finite() {
                return Err(Error::Config(format!("reaction on root {r} is not finite")));
            }
        }
        Ok(())
    }
}

/// Scalar data field such as `f1`.
#[derive(Clone)]
pub enum ScalarField {
    Zero,
    Constant(f64),
    Function(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl ScalarField {
    pub fn function(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Function(Arc::new(f))
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            ScalarField::Zero => 0.0,
            ScalarField::Constant(c) => *c,
            ScalarField::Function(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Zero)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Zero => write!(f, "Zero"),
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Right-hand side `f(v) = int f1 v - f2 . grad v` with `f2` constant on
/// every root element.
#[derive(Debug, Clone)]
pub struct LoadData {
    pub f1: ScalarField,
    pub f2: Piecewise<[f64; 2]>,
}

impl LoadData {
    pub fn zero() -> Self {
        LoadData {
            f1: ScalarField::Zero,
            f2: Piecewise::Constant([0.0, 0.0]),
        }
    }

    /// `f2 = (value, 0)` on the listed roots and zero elsewhere.
    pub fn indicator_x(num_roots: usize, roots: &[usize], value: f64) -> Self {
        let mut f2 = vec![[0.0, 0.0]; num_roots];
        for &r in roots {
            f2[r] = [value, 0.0];
        }
        LoadData {
            f1: ScalarField::Zero,
            f2: Piecewise::PerRoot(f2),
        }
    }

    pub fn validate(&self, num_roots: usize) -> Result<()> {
        self.f2.check_len(num_roots, "f2")
    }

    /// Scales both parts of the load.
    pub fn scaled(&self, s: f64) -> Self {
        let f1 = match &self.f1 {
            ScalarField::Zero => ScalarField::Zero,
            ScalarField::Constant(c) => ScalarField::Constant(s * c),
            ScalarField::Function(f) => {
                let f = Arc::clone(f);
                ScalarField::function(move |x| s * f(x))
            }
        };
        let f2 = match &self.f2 {
            Piecewise::Constant(v) => Piecewise::Constant([s * v[0], s * v[1]]),
            Piecewise::PerRoot(v) => Piecewise::PerRoot(v.iter().map(|v| [s * v[0], s * v[1]]).collect()),
        };
        LoadData { f1, f2 }
    }
}
