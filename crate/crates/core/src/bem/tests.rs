use std::f64::consts::PI;

use super::kernel::{dot, norm, sub};
use super::*;
use crate::error::Error;
use crate::mesh::{BoundaryMesh, MarkedSet, Point};
use crate::quadrature::{Adaptive, LineRule};

fn circle(n: usize, radius: f64) -> BoundaryMesh {
    BoundaryMesh::polygon(
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect(),
    )
    .unwrap()
}

fn midpoint(mesh: &BoundaryMesh, i: usize) -> Point {
    let (a, b) = mesh.endpoints(i);
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// `-1/(2 pi) int_Ti int_Tj ln|x - y|` by nested adaptive quadrature.
fn brute_entry(mesh: &BoundaryMesh, i: usize, j: usize) -> f64 {
    let (a, b) = mesh.endpoints(i);
    let (c, d) = mesh.endpoints(j);
    let q = Adaptive::new(1e-15, 1e-13);
    let outer = q
        .integrate(
            |s| {
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let breaks = if i == j { vec![s] } else { vec![] };
                q.integrate(
                    |t| {
                        let y = [c[0] + t * (d[0] - c[0]), c[1] + t * (d[1] - c[1])];
                        norm(sub(x, y)).ln()
                    },
                    0.0,
                    1.0,
                    &breaks,
                )
                .unwrap()
            },
            0.0,
            1.0,
            &[],
        )
        .unwrap();
    -outer * mesh.element_size(i) * mesh.element_size(j) / (2.0 * PI)
}

#[test]
fn self_entry_closed_form() {
    let m = lshape_mesh().bisect_all().unwrap();
    for i in [0, 5] {
        let h = m.element_size(i);
        let closed = h * h / (2.0 * PI) * (1.5 - h.ln());
        let v = single_layer_entry(&m, i, i).unwrap();
        assert!((v - closed).abs() <= 1e-10 * closed.abs());
        assert!((brute_entry(&m, i, i) - closed).abs() <= 1e-10 * closed.abs());
    }
}

#[test]
fn entries_match_nested_quadrature() {
    let m = lshape_mesh().bisect(&MarkedSet::new([3, 4])).unwrap();
    let v = SingleLayer::assemble(&m, None).unwrap();
    let n = m.num_panels();
    for (i, j) in [(0, 1), (4, 5), (5, 6), (3, 5), (0, 6), (2, 9), (1, 7)] {
        let (i, j) = (i % n, j % n);
        let b = brute_entry(&m, i, j);
        assert!((v.matrix[(i, j)] - b).abs() <= 1e-10 * b.abs(), "({i},{j}): {} vs {b}", v.matrix[(i, j)]);
    }
    for i in 0..n {
        for j in 0..n {
            assert_eq!(v.matrix[(i, j)], v.matrix[(j, i)]);
        }
    }
}

#[test]
fn reuse_matches_fresh_assembly() {
    let m0 = lshape_mesh().bisect_all().unwrap();
    let v0 = SingleLayer::assemble(&m0, None).unwrap();
    let m1 = m0.bisect(&MarkedSet::new([7, 8])).unwrap();
    let fresh = SingleLayer::assemble(&m1, None).unwrap();
    let reused = SingleLayer::assemble(&m1, Some(&v0)).unwrap();
    assert_eq!(fresh.matrix, reused.matrix);
}

#[test]
fn large_diameter_rejected() {
    let m = circle(8, 0.6);
    assert!(matches!(SingleLayer::assemble(&m, None), Err(Error::Config(_))));
}

#[test]
fn disk_fourier_modes() {
    // V cos(k theta) = R / (2k) cos(k theta) on the circle of radius R
    let radius = 0.4;
    for k in [1usize, 3] {
        let mut errors = Vec::new();
        for n in [16, 32, 64, 128] {
            let m = circle(n, radius);
            let v = SingleLayer::assemble(&m, None).unwrap();
            let theta = |i: usize| 2.0 * PI * (i as f64 + 0.5) / n as f64;
            let c: Vec<f64> = (0..n).map(|i| (k as f64 * theta(i)).cos()).collect();
            let vc = v.apply(&c);
            let err = (0..n)
                .map(|i| (vc[i] / m.element_size(i) - radius / (2.0 * k as f64) * c[i]).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        for w in errors.windows(2) {
            assert!(w[1] < 0.6 * w[0], "k = {k}: {errors:?}");
        }
        assert!(errors[3] < 2e-3, "{errors:?}");
    }
}

#[test]
fn constant_jump_relation() {
    let c = 1.7;
    let data = DirichletData::new(TraceFunction::new(move |_| c, |_| [0.0, 0.0]), lshape_mesh());
    let m = lshape_mesh().bisect_all().unwrap().bisect_all().unwrap();
    for i in 0..m.num_panels() {
        // (K + 1/2) c = 0 in the convention where V d_n P = (K + 1/2) P
        let f = data.double_layer_integral(&m, i).unwrap();
        assert!(f.abs() < 1e-8 * c * m.element_size(i), "{i}: {f}");
        assert_eq!(data.panel_integral(&m, i).unwrap(), 0.0);
        let x = midpoint(&m, i);
        let k = data.double_layer(x).unwrap();
        assert!((0.5 * c - k - c).abs() < 1e-8, "{i}: {k}");
    }
}

#[test]
fn linear_potential_is_reproduced() {
    // P = 2x - y is harmonic with piecewise constant normal derivative, so
    // the Galerkin solution is exact and the residual vanishes
    let grad = [2.0, -1.0];
    let data = DirichletData::new(
        TraceFunction::new(move |x| dot(grad, x), move |_| grad),
        lshape_mesh(),
    );
    let m = lshape_mesh().bisect(&MarkedSet::new([0, 4])).unwrap();
    let v = SingleLayer::assemble(&m, None).unwrap();
    let u = solve_bem(&m, &v, &data).unwrap();
    for i in 0..m.num_panels() {
        assert!((u[i] - dot(grad, m.normal(i))).abs() < 1e-9, "{i}: {}", u[i]);
    }
    let exact: Vec<f64> = (0..m.num_panels()).map(|i| dot(grad, m.normal(i))).collect();
    let eta = eta_bem(&m, &exact, &data, 0.0, BemSide::Primal).unwrap();
    assert!(eta.norm() < 1e-8, "{}", eta.norm());
}

#[test]
fn disk_cosine_data() {
    // phi = cos(theta) on the circle: F = cos(theta) / 2
    let radius = 0.4;
    let m = circle(256, radius);
    let data = DirichletData::new(
        TraceFunction::new(move |x| x[0] / radius, move |_| [1.0 / radius, 0.0]),
        m.clone(),
    );
    for i in [0, 17, 100] {
        let x = midpoint(&m, i);
        let r = norm(x);
        let f = 0.5 * x[0] / r + data.double_layer(x).unwrap();
        assert!((f - 0.5 * x[0] / r).abs() < 1e-3, "{f}");
    }
}

#[test]
fn data_derivative_matches_finite_differences() {
    let data = lshape_dirichlet();
    let m = lshape_mesh();
    let eps = 1e-5;
    for (i, s) in [(0, 0.3), (1, 0.5), (2, 0.7), (3, 0.4), (5, 0.6), (7, 0.2)] {
        let (a, b) = m.endpoints(i);
        let at = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let f = |s: f64| lshape_phi(at(s)) * 0.5 + data.double_layer(at(s)).unwrap();
        let h = m.element_size(i);
        let fd = (f(s + eps) - f(s - eps)) / (2.0 * eps * h);
        let d = data.derivative(&m, i, s).unwrap();
        assert!((d - fd).abs() < 1e-6 * (1.0 + fd.abs()), "panel {i}: {d} vs {fd}");
    }
}

#[test]
fn calderon_consistency_on_lshape() {
    // rhs from (K + 1/2) phi against V applied to the panel means of u
    let data = lshape_dirichlet();
    let q = Adaptive::new(1e-14, 1e-12);
    let mut m = lshape_mesh();
    let mut errs = Vec::new();
    for _ in 0..4 {
        m = m.bisect_all().unwrap();
        let n = m.num_panels();
        let means: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = m.endpoints(i);
                let f = |s: f64| lshape_exact([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]).unwrap();
                if norm(a) == 0.0 {
                    q.integrate(|t| 3.0 * t * t * f(t * t * t), 0.0, 1.0, &[]).unwrap()
                } else if norm(b) == 0.0 {
                    q.integrate(|t| 3.0 * t * t * f(1.0 - t * t * t), 0.0, 1.0, &[]).unwrap()
                } else {
                    q.integrate(f, 0.0, 1.0, &[]).unwrap()
                }
            })
            .collect();
        let v = SingleLayer::assemble(&m, None).unwrap();
        let vu = v.apply(&means);
        let rhs = rhs_vector(&m, &data).unwrap();
        let num: f64 = vu.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        errs.push(num / den);
    }
    for w in errs.windows(2) {
        assert!(w[1] < 0.7 * w[0], "{errs:?}");
    }
}

#[test]
fn density_and_double_layer_forms_agree() {
    let data = lshape_dirichlet();
    let mut m = lshape_mesh().bisect_all().unwrap();
    // grade towards the reentrant corner and the convex corner at s = 0.5
    for _ in 0..6 {
        let marked: Vec<usize> = (0..m.num_panels())
            .filter(|&i| {
                let (s0, s1) = m.arclength_range(i);
                s0 == 1.0 || s1 == 1.0 || s0 == 0.5 || s1 == 0.5
            })
            .collect();
        m = m.bisect(&MarkedSet::new(marked)).unwrap();
    }
    for i in 0..m.num_panels() {
        let h = m.element_size(i);
        let a = data.panel_integral(&m, i).unwrap();
        let b = data.double_layer_integral(&m, i).unwrap();
        assert!((a - b).abs() <= 1e-9 * h, "panel {i}, h {h}: {a} vs {b}");
    }
}

struct SingleLayerData {
    w: Vec<f64>,
    v: SingleLayer,
}

impl BoundaryData for SingleLayerData {
    fn panel_integral(&self, _mesh: &BoundaryMesh, i: usize) -> crate::error::Result<f64> {
        Ok(self.v.apply(&self.w)[i])
    }

    fn derivative(&self, mesh: &BoundaryMesh, i: usize, s: f64) -> crate::error::Result<f64> {
        Ok(single_layer_derivative(mesh, &self.w, i, s))
    }
}

#[test]
fn exact_discrete_data_gives_zero_estimator() {
    let m = lshape_mesh().bisect(&MarkedSet::new([1, 4])).unwrap();
    let w: Vec<f64> = (0..m.num_panels()).map(|i| (i as f64 * 0.7).sin()).collect();
    let data = SingleLayerData {
        w: w.clone(),
        v: SingleLayer::assemble(&m, None).unwrap(),
    };
    let u = solve_bem(&m, &data.v, &data).unwrap();
    for (a, b) in u.iter().zip(&w) {
        assert!((a - b).abs() < 1e-10);
    }
    let eta = eta_bem(&m, &w, &data, 0.0, BemSide::Primal).unwrap();
    assert!(eta.total() == 0.0);
}

#[test]
fn estimator_scaling_exponent() {
    // F' = 1 everywhere and w = 0: eta(T)^2 = h^(1 -+ eps) * h
    let m = lshape_mesh();
    let s: Vec<f64> = (0..m.num_panels()).map(|i| m.node_arclength(i)).collect();
    let data = |m: &BoundaryMesh| NodalData {
        values: (0..m.num_panels()).map(|i| m.node_arclength(i) - if i == 0 { 0.0 } else { 0.0 }).collect(),
    };
    let zero = vec![0.0; m.num_panels()];
    let fine = m.bisect(&MarkedSet::new([2])).unwrap();
    let zero_fine = vec![0.0; fine.num_panels()];
    assert_eq!(s.len(), 8);
    for eps in [0.0, 0.3] {
        for side in [BemSide::Primal, BemSide::Dual] {
            let coarse = eta_bem(&m, &zero, &data(&m), eps, side).unwrap();
            let refined = eta_bem(&fine, &zero_fine, &data(&fine), eps, side).unwrap();
            let ratio = refined.indicators()[2] / coarse.indicators()[2];
            let expected = 0.5f64.powf(1.0 + side.exponent(eps));
            assert!((ratio - expected).abs() < 1e-12, "{ratio} vs {expected}");
        }
    }
}

#[test]
fn zero_epsilon_is_standard_estimator() {
    let m = lshape_mesh().bisect(&MarkedSet::new([4])).unwrap();
    let data = lshape_dirichlet();
    let v = SingleLayer::assemble(&m, None).unwrap();
    let u = solve_bem(&m, &v, &data).unwrap();
    let a = eta_bem(&m, &u, &data, 0.0, BemSide::Primal).unwrap();
    let b = eta_bem(&m, &u, &data, 0.0, BemSide::Dual).unwrap();
    assert_eq!(a.indicators(), b.indicators());
    let (c, _) = eta_bem_pair(&m, &u, &data, &u, &data, 0.0).unwrap();
    assert_eq!(a.indicators(), c.indicators());
    // h |R'|^2 by direct quadrature
    let rule = LineRule::gauss(ESTIMATOR_POINTS);
    for i in 0..m.num_panels() {
        let h = m.element_size(i);
        let direct = h * h
            * rule.integrate(0.0, 1.0, |s| {
                let r = single_layer_derivative(&m, &u, i, s) - data.derivative(&m, i, s).unwrap();
                r * r
            });
        assert!((direct - a.indicators()[i]).abs() <= 1e-12 * direct);
    }
}

#[test]
fn galerkin_residual_and_spd() {
    let data = lshape_dirichlet();
    let m = lshape_mesh().bisect_all().unwrap().bisect(&MarkedSet::new([7, 8, 9])).unwrap();
    let v = SingleLayer::assemble(&m, None).unwrap();
    let rhs = rhs_vector(&m, &data).unwrap();
    let u = solve_single_layer(&v, &rhs).unwrap();
    let r = v.apply(&u);
    for i in 0..m.num_panels() {
        assert!((r[i] - rhs[i]).abs() <= 1e-10 * rhs.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }
}

#[test]
fn exact_density_finite_differences() {
    let nodes = lshape_nodes();
    let eps = 1e-6;
    for (i, s) in [(0, 0.3), (1, 0.6), (2, 0.5), (3, 0.4), (4, 0.7), (6, 0.2)] {
        let (a, b) = (nodes[i], nodes[(i + 1) % 8]);
        let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let e = sub(b, a);
        let l = norm(e);
        let n = [e[1] / l, -e[0] / l];
        let fd = (lshape_phi([x[0] + eps * n[0], x[1] + eps * n[1]]) - lshape_phi([x[0] - eps * n[0], x[1] - eps * n[1]]))
            / (2.0 * eps);
        let u = lshape_exact(x).unwrap();
        assert!((u - fd).abs() < 1e-6, "edge {i}: {u} vs {fd}");
        let mirrored = lshape_exact([x[0], -x[1]]).unwrap();
        assert!((u - mirrored).abs() < 1e-13);
    }
    for c in [0, 2, 3, 4, 5, 6] {
        assert!(lshape_exact(nodes[c]).is_err());
    }
    assert!(lshape_exact([0.01, 0.0]).is_err());
}

#[test]
fn reentrant_blow_up_exponent() {
    let dir = [-FRAC, -FRAC];
    let pts: Vec<(f64, f64)> = (3..=7)
        .map(|k| {
            let r = 10f64.powi(-k);
            (r.ln(), lshape_exact([r * dir[0], r * dir[1]]).unwrap().abs().ln())
        })
        .collect();
    let slope = (pts[4].1 - pts[0].1) / (pts[4].0 - pts[0].0);
    assert!((slope + 1.0 / 3.0).abs() < 0.01, "{slope}");
}

const FRAC: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
fn weights_and_forced_panels() {
    let m0 = lshape_mesh();
    let hat = BemGoalWeight::lshape_hat();
    let (lambda, forced) = hat.interp_weight(&m0, &m0);
    assert!(forced.is_empty());
    assert_eq!(lambda.values, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let fine = m0.bisect(&MarkedSet::new([0, 1])).unwrap();
    let (lf, _) = hat.interp_weight(&fine, &m0);
    assert_eq!(&lf.values[..5], &[0.0, 0.5, 1.0, 0.5, 0.0]);

    let chi = BemGoalWeight::lshape_characteristic();
    let (l0, f0) = chi.interp_weight(&m0, &m0);
    assert_eq!(l0.values, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(f0.as_slice(), &[0, 2]);
    let mut m = m0.clone();
    let mut f = f0;
    for step in 1..6 {
        m = m.bisect(&f).unwrap();
        let (_, next) = chi.interp_weight(&m, &m0);
        assert_eq!(next.len(), 2);
        for i in next.iter() {
            assert!((m.element_size(i) - 0.25 * 0.5f64.powi(step)).abs() < 1e-15);
        }
        f = next;
    }
    // goal of the constant one is the weight's mass
    let ones = vec![1.0; m.num_panels()];
    assert!((chi.goal(&m, &m0, &ones) - 0.25).abs() < 1e-15);
    assert!((hat.goal(&m, &m0, &ones) - 0.25).abs() < 1e-15);
}

#[test]
fn references_are_finite_and_stable() {
    let hat = BemGoalWeight::lshape_hat().lshape_reference().unwrap();
    let chi = BemGoalWeight::lshape_characteristic().lshape_reference().unwrap();
    assert!(hat.value.is_finite() && chi.value.is_finite());
    // total flux of a harmonic function vanishes
    let total = {
        let m = lshape_mesh();
        let q = Adaptive::new(1e-16, 1e-14);
        (0..8)
            .map(|i| {
                let (a, b) = m.endpoints(i);
                let f = |s: f64| lshape_exact([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]).unwrap();
                let v = if norm(a) == 0.0 {
                    q.integrate(|t| 3.0 * t * t * f(t * t * t), 0.0, 1.0, &[]).unwrap()
                } else if norm(b) == 0.0 {
                    q.integrate(|t| 3.0 * t * t * f(1.0 - t * t * t), 0.0, 1.0, &[]).unwrap()
                } else {
                    q.integrate(f, 0.0, 1.0, &[]).unwrap()
                };
                v * m.element_size(i)
            })
            .sum::<f64>()
    };
    assert!(total.abs() < 1e-13, "{total}");
}


#[test]
fn deep_grading_stays_positive_definite() {
    let mut m = lshape_mesh();
    for _ in 0..90 {
        let n = m.num_panels();
        let touching: Vec<usize> = (0..n)
            .filter(|&i| [m.node_frame(i), m.node_frame((i + 1) % n)].iter().any(|f| f.delta == 0.0 && f.anchor == 1))
            .collect();
        m = m.bisect(&MarkedSet::new(touching)).unwrap();
    }
    let v = SingleLayer::assemble(&m, None).unwrap();
    let n = v.len();
    let d: Vec<f64> = (0..n).map(|i| v.matrix[(i, i)].sqrt().recip()).collect();
    let s = faer::Mat::from_fn(n, n, |i, j| d[i] * v.matrix[(i, j)] * d[j]);
    let ev = s.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    assert!(ev[0] > 1e-2, "smallest scaled eigenvalue {}", ev[0]);
    let data = NodalData {
        values: (0..n).map(|i| m.node_arclength(i)).collect(),
    };
    solve_bem(&m, &v, &data).unwrap();
}
