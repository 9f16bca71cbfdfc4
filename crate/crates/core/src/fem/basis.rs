//! Nodal Lagrange basis on a triangle, written in barycentric coordinates.
//!
//! The node with lattice index `a = (a0, a1, a2)`, `|a| = p`, has the shape
//! function `prod_k g_{a_k}(l_k)` with `g_n(x) = prod_{m<n} (p x - m) / (m + 1)`.

/// Local node ordering: the three vertices, then `p - 1` nodes on each local
/// edge `k` (opposite vertex `k`, walked from vertex `k+1` to vertex `k+2`),
/// then interior nodes.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    lattice: Vec<[usize; 3]>,
    /// Coefficients (ascending powers) of `g_n`, `n = 0..=p`.
    factors: Vec<Vec<f64>>,
}

fn poly_eval(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for (k, &ck) in c.iter().enumerate().rev() {
        dd = dd * x + 2.0 * d;
        d = d * x + v;
        v = v * x + ck;
        let _ = k;
    }
    (v, d, dd)
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!((1..=3).contains(&degree), "degree must be 1, 2 or 3");
        let p = degree;
        let mut lattice = Vec::new();
        for k in 0..3 {
            let mut a = [0; 3];
            a[k] = p;
            lattice.push(a);
        }
        for k in 0..3 {
            let (from, to) = ((k + 1) % 3, (k + 2) % 3);
            for j in 1..p {
                let mut a = [0; 3];
                a[from] = p - j;
                a[to] = j;
                lattice.push(a);
            }
        }
        if p == 3 {
            lattice.push([1, 1, 1]);
        }
        let mut factors = vec![vec![1.0]];
        for n in 1..=p {
            // g_n = g_{n-1} * (p x - (n-1)) / n
            let prev = &factors[n - 1];
            let mut next = vec![0.0; prev.len() + 1];
            let m = (n - 1) as f64;
            for (i, &c) in prev.iter().enumerate() {
                next[i] += -m * c / n as f64;
                next[i + 1] += p as f64 * c / n as f64;
            }
            factors.push(next);
        }
        LagrangeBasis {
            degree,
            lattice,
            factors,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Barycentric coordinates of local node `i`.
    pub fn node(&self, i: usize) -> [f64; 3] {
        let p = self.degree as f64;
        let a = self.lattice[i];
        [a[0] as f64 / p, a[1] as f64 / p, a[2] as f64 / p]
    }

    /// Values, first and second barycentric derivatives of all shape
    /// functions at `l`.
    pub fn eval(&self, l: [f64; 3]) -> Vec<ShapeValue> {
        let g: Vec<[(f64, f64, f64); 3]> = (0..=self.degree)
            .map(|n| {
                [
                    poly_eval(&self.factors[n], l[0]),
                    poly_eval(&self.factors[n], l[1]),
                    poly_eval(&self.factors[n], l[2]),
                ]
            })
            .collect();
        self.lattice
            .iter()
            .map(|a| {
                let f = [g[a[0]][0], g[a[1]][1], g[a[2]][2]];
                let value = f[0].0 * f[1].0 * f[2].0;
                let mut d = [0.0; 3];
                let mut dd = [[0.0; 3]; 3];
                for i in 0..3 {
                    let mut prod = f[i].1;
                    let mut prod2 = f[i].2;
                    for j in 0..3 {
                        if j != i {
                            prod *= f[j].0;
                            prod2 *= f[j].0;
                        }
                    }
                    d[i] = prod;
                    dd[i][i] = prod2;
                    for j in 0..3 {
                        if j != i {
                            let k = 3 - i - j;
                            dd[i][j] = f[i].1 * f[j].1 * f[k].0;
                        }
                    }
                }
                ShapeValue {
                    value,
                    dlambda: d,
                    d2lambda: dd,
                }
            })
            .collect()
    }
}

/// One shape function evaluated at a point.
#[derive(Debug, Clone, Copy)]
pub struct ShapeValue {
    pub value: f64,
    pub dlambda: [f64; 3],
    pub d2lambda: [[f64; 3]; 3],
}

impl ShapeValue {
    /// Cartesian gradient given the (constant) barycentric gradients.
    pub fn gradient(&self, grad_l: &[[f64; 2]; 3]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for a in 0..3 {
            g[0] += self.dlambda[a] * grad_l[a][0];
            g[1] += self.dlambda[a] * grad_l[a][1];
        }
        g
    }

    /// Cartesian Hessian given the barycentric gradients.
    pub fn hessian(&self, grad_l: &[[f64; 2]; 3]) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for a in 0..3 {
            for b in 0..3 {
                let c = self.d2lambda[a][b];
                if c == 0.0 {
                    continue;
                }
                for i in 0..2 {
                    for j in 0..2 {
                        h[i][j] += c * grad_l[a][i] * grad_l[b][j];
                    }
                }
            }
        }
        h
    }
}

/// Gradients of the barycentric coordinates of the triangle `[a, b, c]`.
pub fn barycentric_gradients(x: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let det = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[1][1] - x[0][1]) * (x[2][0] - x[0][0]);
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        // gradient of l_k is the inward normal of the opposite edge over its height
        g[k] = [(x[i][1] - x[j][1]) / det, (x[j][0] - x[i][0]) / det];
    }
    g
}
