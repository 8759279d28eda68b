//! Gauss-Jacobi rules computed by the Golub-Welsch eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::special::ln_gamma;

/// Nodes and weights integrating `(1-x)^a (1+x)^b f(x)` over `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobi {
    /// `n`-point rule; requires `a, b > -1` and `a + b > -1`.
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1 && a > -1.0 && b > -1.0 && a + b > -1.0);
        let ab = a + b;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let diag = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
            jac[(k, k)] = diag;
            if k + 1 < n {
                let j = kf + 1.0;
                let s = 2.0 * j + ab;
                let off = (4.0 * j * (j + a) * (j + b) * (j + ab)
                    / (s * s * (s + 1.0) * (s - 1.0)))
                    .sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(ab + 2.0))
        .exp();
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (nodes, mut weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        // eigenvector rounding shows up as a common scale error
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w *= mu0 / total);
        GaussJacobi { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
