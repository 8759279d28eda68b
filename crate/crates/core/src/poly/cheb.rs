use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::poly::bary::BaryPoly;

/// Zeros of `T_n`, increasing: `y_k = -cos((2k+1)π / 2n)`.
pub fn chebyshev_zeros(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    // sin form keeps the set exactly antisymmetric
    (0..n)
        .map(|k| ((2.0 * k as f64 + 1.0 - n as f64) * PI / (2.0 * n as f64)).sin())
        .collect()
}

/// Chebyshev points of the second kind, `z_k = -cos(kπ / n)`, `k = 0..=n`.
pub fn chebyshev_second_kind_points(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|k| ((2.0 * k as f64 - n as f64) * PI / (2.0 * n as f64)).sin())
        .collect()
}

/// `[T_0(x), ..., T_n(x)]` by the three-term recurrence.
pub fn chebyshev_t_values(n: usize, x: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(1.0);
    if n >= 1 {
        t.push(x);
    }
    for k in 2..=n {
        let next = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(next);
    }
    t
}

/// Polynomial in the Chebyshev basis, `Σ c_k T_k(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebPoly {
    pub coeffs: Vec<f64>,
}

impl ChebPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ChebPoly { coeffs }
    }

    /// Degree-`n` interpolant of `f` at the first-kind points.
    pub fn interpolate(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let count = n + 1;
        let angles: Vec<f64> = (0..count)
            .map(|j| (j as f64 + 0.5) * PI / count as f64)
            .collect();
        let samples: Vec<f64> = angles.iter().map(|&t| f(t.cos())).collect();
        let coeffs = (0..count)
            .map(|k| {
                let s: f64 = samples
                    .iter()
                    .zip(&angles)
                    .map(|(&v, &t)| v * (k as f64 * t).cos())
                    .sum();
                let c = 2.0 * s / count as f64;
                if k == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        ChebPoly { coeffs }
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Barycentric form on `nodes` (needs at least `degree + 1` nodes).
    pub fn to_bary(&self, nodes: Vec<f64>) -> BaryPoly {
        assert!(nodes.len() > self.degree());
        BaryPoly::from_fn(nodes, |x| self.eval(x)).expect("nodes must be strictly increasing")
    }
}
