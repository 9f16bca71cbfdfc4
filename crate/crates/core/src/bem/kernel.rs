//! Closed-form segment integrals of the logarithmic and dipole kernels.

use std::sync::OnceLock;

use crate::mesh::Point;
use crate::quadrature::LineRule;

fn far_rule() -> &'static LineRule {
    static RULE: OnceLock<LineRule> = OnceLock::new();
    RULE.get_or_init(|| LineRule::gauss(10))
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Local coordinates of `x` relative to the segment `[a, b]`: length `h`,
/// tangential offset `p` and signed normal offset `d` (normal = tangent
/// rotated clockwise).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Local {
    pub h: f64,
    pub p: f64,
    pub d: f64,
    pub t: Point,
    pub nu: Point,
}

impl Local {
    pub fn new(a: Point, b: Point, x: Point) -> Self {
        let e = sub(b, a);
        let h = norm(e);
        let t = [e[0] / h, e[1] / h];
        let nu = [t[1], -t[0]];
        let w = sub(x, a);
        Local {
            h,
            p: dot(w, t),
            d: dot(w, nu),
            t,
            nu,
        }
    }

    /// Signed angle under which the segment is seen from `x`.
    pub fn angle(&self) -> f64 {
        let (h, p, d) = (self.h, self.p, self.d);
        (d * h).atan2(d * d + p * (p - h))
    }
}

fn xlog(u: f64, d2: f64) -> f64 {
    let r = u * u + d2;
    if r == 0.0 {
        0.0
    } else {
        u * r.ln()
    }
}

/// `int_a^b ln|x - y| ds_y`. Closed form near the segment, Gauss
/// quadrature away from it where the closed form cancels.
pub fn log_potential(a: Point, b: Point, x: Point) -> f64 {
    let l = Local::new(a, b, x);
    let d2 = l.d * l.d;
    let gap = if l.p < 0.0 {
        l.p * l.p
    } else if l.p > l.h {
        (l.p - l.h) * (l.p - l.h)
    } else {
        0.0
    };
    if gap + d2 >= 9.0 * l.h * l.h {
        let rule = far_rule();
        let sum: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * ((l.p - t * l.h).powi(2) + d2).ln())
            .sum();
        return 0.5 * l.h * sum;
    }
    0.5 * (xlog(l.h - l.p, d2) + xlog(l.p, d2)) - l.h + l.d * l.angle()
}

/// `grad_x int_a^b ln|x - y| ds_y`; finite off the segment endpoints. For
/// `x` on the open segment the normal part is the one-sided limit.
pub fn log_potential_gradient(a: Point, b: Point, x: Point) -> Point {
    let l = Local::new(a, b, x);
    let d2 = l.d * l.d;
    let tang = 0.5 * ((l.p * l.p + d2) / ((l.p - l.h).powi(2) + d2)).ln();
    let ang = l.angle();
    [tang * l.t[0] + ang * l.nu[0], tang * l.t[1] + ang * l.nu[1]]
}

/// Tangential derivative `t . grad_x int_a^b ln|x - y| ds_y`. Exact zero
/// normal contribution when `t` is the segment tangent.
pub fn log_potential_derivative(a: Point, b: Point, x: Point, t: Point) -> f64 {
    let l = Local::new(a, b, x);
    let d2 = l.d * l.d;
    let tang = 0.5 * ((l.p * l.p + d2) / ((l.p - l.h).powi(2) + d2)).ln();
    let tn = dot(t, l.nu);
    let normal = if tn == 0.0 { 0.0 } else { tn * l.angle() };
    tang * dot(t, l.t) + normal
}

/// `int_a^b (x - y) . n / |x - y|^2 ds_x` for a fixed source point `y`
/// and a fixed direction `n`.
pub fn dipole_segment(a: Point, b: Point, y: Point, n: Point) -> f64 {
    // x = a + s t, x - y = w + s t with w = a - y
    let e = sub(b, a);
    let h = norm(e);
    let t = [e[0] / h, e[1] / h];
    let nu = [t[1], -t[0]];
    let w = sub(a, y);
    let p = dot(w, t);
    let d = dot(w, nu);
    let beta = dot(t, n);
    let d2 = d * d;
    let log_part = if beta == 0.0 {
        0.0
    } else {
        // zero at the two endpoint singularities, which have measure zero
        let den = p * p + d2;
        let x = h * (h + 2.0 * p) / den;
        let v = 0.5 * beta * if x.abs() < 0.5 { x.ln_1p() } else { (((h + p) * (h + p) + d2) / den).ln() };
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let gamma = dot(nu, n);
    let ang_part = if gamma == 0.0 || d == 0.0 {
        0.0
    } else {
        // angle subtended by [a, b] seen from y, oriented like d
        gamma * (h * d).atan2(d2 + p * (p + h))
    };
    log_part + ang_part
}

/// Self entry `int_T int_T ln|x - y|` of a straight panel of length `h`.
pub fn self_log_integral(h: f64) -> f64 {
    h * h * (h.ln() - 1.5)
}
