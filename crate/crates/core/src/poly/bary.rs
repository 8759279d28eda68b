use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::cheb::ChebPoly;

/// Points closer than this fraction of the node-set diameter evaluate to the
/// stored value.
const NODE_GUARD: f64 = 1e-14;
const PROXY_POINTS: usize = 64;
const REFINE_CANDIDATES: usize = 3;
const X_TOL: f64 = 1e-12;

/// Barycentric weights `1 / ∏_{j≠k} (y_k - y_j)`, scaled so the largest has
/// magnitude one. Products are accumulated as sums of logarithms, so no
/// intermediate value can overflow or underflow.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let logs: Vec<f64> = (0..n)
        .map(|k| {
            -nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &y)| (nodes[k] - y).abs().ln())
                .sum::<f64>()
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .enumerate()
        .map(|(k, &l)| {
            // sign of ∏_{j≠k}(y_k - y_j) is (-1)^(#j>k) for sorted nodes
            let sign = if (n - 1 - k).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * (l - top).exp()
        })
        .collect()
}

/// A location and signed value of `p` where `|p|` is maximal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

impl Extremum {
    pub fn abs(&self) -> f64 {
        self.value.abs()
    }
}

/// Polynomial of degree at most `len - 1` in barycentric Lagrange form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaryPoly {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl BaryPoly {
    /// Interpolant of `values` on strictly increasing `nodes`.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::InvalidArgument(
                "nodes and values must be non-empty and of equal length".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "interpolation nodes must be strictly increasing".into(),
            ));
        }
        let weights = barycentric_weights(&nodes);
        Ok(BaryPoly {
            nodes,
            values,
            weights,
        })
    }

    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    /// Same nodes and weights, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.nodes.len());
        BaryPoly {
            nodes: self.nodes.clone(),
            values,
            weights: self.weights.clone(),
        }
    }

    pub(crate) fn from_parts(nodes: Vec<f64>, values: Vec<f64>, weights: Vec<f64>) -> Self {
        BaryPoly {
            nodes,
            values,
            weights,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree_bound(&self) -> usize {
        self.nodes.len() - 1
    }

    fn diameter(&self) -> f64 {
        self.nodes[self.nodes.len() - 1] - self.nodes[0]
    }

    fn near_node(&self, x: f64) -> Option<usize> {
        let guard = NODE_GUARD * self.diameter();
        let k = self.nodes.partition_point(|&y| y < x);
        [k.wrapping_sub(1), k]
            .into_iter()
            .filter(|&i| i < self.nodes.len())
            .find(|&i| (x - self.nodes[i]).abs() <= guard)
    }

    /// Evaluates `p(x)` by the second barycentric formula.
    pub fn eval(&self, x: f64) -> f64 {
        if self.nodes.len() == 1 {
            return self.values[0];
        }
        if let Some(k) = self.near_node(x) {
            return self.values[k];
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&y, &f), &w) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let t = w / (x - y);
            num += t * f;
            den += t;
        }
        num / den
    }

    /// `(p, p', p'')` at `x`. At a node `p''` is reported as NaN.
    pub fn eval_derivs(&self, x: f64) -> (f64, f64, f64) {
        if self.nodes.len() == 1 {
            return (self.values[0], 0.0, 0.0);
        }
        if let Some(j) = self.near_node(x) {
            let (yj, fj, wj) = (self.nodes[j], self.values[j], self.weights[j]);
            let d1: f64 = (0..self.nodes.len())
                .filter(|&k| k != j)
                .map(|k| (self.weights[k] / wj) * (self.values[k] - fj) / (yj - self.nodes[k]))
                .sum();
            return (fj, d1, f64::NAN);
        }
        let p = self.eval(x);
        let mut den = 0.0;
        let mut s = 0.0;
        let mut dden = 0.0;
        let mut cube = 0.0;
        for ((&y, &f), &w) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let r = 1.0 / (x - y);
            den += w * r;
            s += w * (p - f) * r * r;
            dden += w * r * r;
            cube += w * (p - f) * r * r * r;
        }
        let d1 = s / den;
        // S' = p' Σ w r² - 2 Σ w (p-f) r³ and D' = -Σ w r²
        let ds = d1 * dden - 2.0 * cube;
        let d2 = (ds * den + s * dden) / (den * den);
        (p, d1, d2)
    }

    /// Largest `|p|` on `[a, b]`: a 64-point Chebyshev proxy grid, then the
    /// best three grid candidates refined by safeguarded Newton on `p'`.
    pub fn max_abs_on(&self, a: f64, b: f64) -> Extremum {
        if !(b > a) {
            return Extremum {
                x: a,
                value: self.eval(a),
            };
        }
        let grid: Vec<f64> = (0..PROXY_POINTS)
            .map(|i| {
                let c = (i as f64 * std::f64::consts::PI / (PROXY_POINTS - 1) as f64).cos();
                (a + 0.5 * (b - a) * (1.0 - c)).clamp(a, b)
            })
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&x| self.eval(x)).collect();
        let mut cands: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let v = vals[i].abs();
                (i == 0 || v >= vals[i - 1].abs())
                    && (i + 1 == grid.len() || v >= vals[i + 1].abs())
            })
            .collect();
        cands.sort_by(|&i, &j| vals[j].abs().total_cmp(&vals[i].abs()).then(i.cmp(&j)));
        cands.truncate(REFINE_CANDIDATES);
        let mut best = Extremum {
            x: grid[cands[0]],
            value: vals[cands[0]],
        };
        let tol = X_TOL * (b - a);
        for &i in &cands {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            let sign = if vals[i] < 0.0 { -1.0 } else { 1.0 };
            let e = self.refine_max(lo, hi, grid[i], sign, tol);
            if e.abs() > best.abs() {
                best = e;
            }
        }
        best
    }

    fn refine_max(&self, mut lo: f64, mut hi: f64, start: f64, sign: f64, tol: f64) -> Extremum {
        let slope = |x: f64| sign * self.eval_derivs(x).1;
        let mut best = Extremum {
            x: start,
            value: self.eval(start),
        };
        let consider = |x: f64, best: &mut Extremum| {
            let v = self.eval(x);
            if v.abs() > best.abs() {
                *best = Extremum { x, value: v };
            }
        };
        consider(lo, &mut best);
        consider(hi, &mut best);
        if !(slope(lo) > 0.0 && slope(hi) < 0.0) {
            // maximum sits at a bracket end
            return best;
        }
        let mut x = start.clamp(lo, hi);
        for _ in 0..100 {
            if hi - lo <= tol {
                break;
            }
            let (_, d1, d2) = self.eval_derivs(x);
            if d1 == 0.0 {
                break;
            }
            if sign * d1 > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let next = x - d1 / d2;
            x = if next.is_finite() && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        consider(x, &mut best);
        best
    }

    /// Largest `|p|` on `[a, b]`, searching every gap between interpolation
    /// nodes separately.
    pub fn sup_norm_on(&self, a: f64, b: f64) -> Extremum {
        let mut cuts = vec![a];
        cuts.extend(self.nodes.iter().cloned().filter(|&y| y > a && y < b));
        cuts.push(b);
        cuts.windows(2).map(|w| self.max_abs_on(w[0], w[1])).fold(
            Extremum {
                x: a,
                value: self.eval(a),
            },
            |acc, e| if e.abs() > acc.abs() { e } else { acc },
        )
    }

    /// `q(x) = p(-x)`.
    pub fn mirrored(&self) -> BaryPoly {
        let nodes: Vec<f64> = self.nodes.iter().rev().map(|&y| -y).collect();
        let values: Vec<f64> = self.values.iter().rev().cloned().collect();
        BaryPoly::new(nodes, values).expect("mirror of sorted nodes is sorted")
    }

    /// Chebyshev coefficients by sampling at first-kind points.
    pub fn to_cheb(&self) -> ChebPoly {
        let n = self.degree_bound();
        ChebPoly::interpolate(n, |x| self.eval(x))
    }
}
