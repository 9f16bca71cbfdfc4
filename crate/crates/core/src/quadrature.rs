//! Quadrature rules: symmetric triangle rules, Gauss-Legendre on intervals
//! and an adaptive Gauss-Kronrod integrator.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// A quadrature rule on a triangle in barycentric coordinates.
///
/// Weights sum to one, so `sum w_k f(x_k) * area` approximates the integral.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// 7-point rule exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let mut rule = TriangleRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![9.0 / 40.0],
            degree: 5,
        };
        // orbits (a, a, 1 - 2a)
        rule.push_s21(1.0 - 2.0 * a1, w1);
        rule.push_s21(1.0 - 2.0 * a2, w2);
        rule
    }

    /// 16-point rule with positive weights, exact for polynomials of degree 8.
    pub fn degree8() -> Self {
        let mut rule = TriangleRule {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![0.144315607677787],
            degree: 8,
        };
        rule.push_s21(0.081414823414554, 0.095091634267285);
        rule.push_s21(0.658861384496480, 0.103217370534718);
        rule.push_s21(0.898905543365938, 0.032458497623198);
        let (a, b) = (0.008394777409958, 0.263112829634638);
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            rule.points.push(p);
            rule.weights.push(0.027230314174435);
        }
        rule
    }

    /// Smallest tabulated rule that integrates polynomials of `degree` exactly.
    pub fn for_degree(degree: usize) -> Self {
        if degree <= 5 {
            Self::degree5()
        } else if degree <= 8 {
            Self::degree8()
        } else {
            panic!("no triangle rule tabulated for degree {degree}")
        }
    }

    fn push_s21(&mut self, a: f64, w: f64) {
        let b = (1.0 - a) / 2.0;
        for p in [[a, b, b], [b, a, b], [b, b, a]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(n: usize) -> Self {
        let g = GaussLegendre::new(n.try_into().expect("at least one node"));
        let (nodes, weights) = g
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .unzip();
        LineRule { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + h * t))
            .sum::<f64>()
            * h
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod value, Gauss-Kronrod difference and a roundoff floor.
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut kabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        let s = f1 + f2;
        k += WGK[j] * s;
        kabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), 50.0 * f64::EPSILON * (kabs * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature with global error control.
///
/// Subintervals are bisected (largest error first) until the summed error
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }
}

impl Adaptive {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Adaptive {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    /// Integrate over `[a, b]` split at the given interior breakpoints.
    pub fn integrate(
        &self,
        mut f: impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        breaks: &[f64],
    ) -> Result<f64> {
        let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
        cuts.push(a);
        let mut inner: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&x| x > a.min(b) && x < a.max(b))
            .collect();
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if b < a {
            inner.reverse();
        }
        cuts.extend(inner);
        cuts.push(b);

        // (a, b, value, error, roundoff)
        let mut pieces: Vec<(f64, f64, f64, f64, f64)> = cuts
            .windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| {
                let (v, e, r) = gk15(&mut f, w[0], w[1]);
                (w[0], w[1], v, e, r)
            })
            .collect();
        loop {
            let total: f64 = pieces.iter().map(|p| p.2).sum();
            let err: f64 = pieces.iter().map(|p| p.3).sum();
            let roundoff: f64 = pieces.iter().map(|p| p.4).sum();
            if !total.is_finite() {
                return Err(Error::Numerical(format!("adaptive quadrature produced {total} on [{a}, {b}]")));
            }
            if err <= self.abs_tol.max(self.rel_tol * total.abs()).max(roundoff) {
                return Ok(total);
            }
            if pieces.len() >= self.max_intervals {
                return Err(Error::Numerical(format!(
                    "adaptive quadrature did not converge: value {total:e}, error estimate {err:e}"
                )));
            }
            let (idx, _) = pieces
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
                .unwrap();
            let (lo, hi, _, _, _) = pieces.swap_remove(idx);
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                // interval exhausted at machine resolution; accept its contribution
                let (v, _, r) = gk15(&mut f, lo, hi);
                pieces.push((lo, hi, v, 0.0, r));
                continue;
            }
            let (v1, e1, r1) = gk15(&mut f, lo, mid);
            let (v2, e2, r2) = gk15(&mut f, mid, hi);
            pieces.push((lo, mid, v1, e1, r1));
            pieces.push((mid, hi, v2, e2, r2));
        }
    }
}
