//! Grid subsets that imitate Chebyshev points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::zeta;
use crate::nodes::NodeSet;
use crate::poly::chebyshev_second_kind_points;

/// Slack on the `Nζ < π` test.
const PI_MARGIN: f64 = 1e-12;
/// Angles this close below a cut `nπ/N` count as on it.
const CUT_MARGIN: f64 = 1e-12;

/// `N` grid points `x*_1 < ... < x*_N` with `z_{n-1} < x*_n < z_n`, where
/// `z_n = -cos(nπ/N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MockChebyshev {
    pub indices: Vec<usize>,
    pub points: Vec<f64>,
    pub cheb: Vec<f64>,
}

impl MockChebyshev {
    /// True when every point sits strictly between its two Chebyshev
    /// neighbours and the indices are increasing.
    pub fn interlaces(&self) -> bool {
        let n = self.points.len();
        self.cheb.len() == n + 1
            && self.indices.windows(2).all(|w| w[0] < w[1])
            && (0..n).all(|i| self.cheb[i] < self.points[i] && self.points[i] < self.cheb[i + 1])
    }

    /// CSV with header `n,x,z_lo,z_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,z_lo,z_hi\n");
        for (i, x) in self.points.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                x,
                self.cheb[i],
                self.cheb[i + 1]
            ));
        }
        out
    }
}

/// The interlacing subset, built greedily in angle: `x*_n` is the last node
/// with `θ_m < nπ/N`. Returns `None` unless `Nζ < π`.
pub fn mock_chebyshev_subset(nodes: &NodeSet, n: usize) -> Option<MockChebyshev> {
    if n == 0 || n as f64 * zeta(nodes) >= PI - PI_MARGIN {
        return None;
    }
    let found = interlacing_subset(nodes, n);
    debug_assert!(found.as_ref().is_some_and(|s| s.interlaces()));
    found
}

/// The same greedy construction without the `Nζ < π` precondition. It
/// succeeds exactly when every gap `(z_{n-1}, z_n)` holds a node.
pub fn interlacing_subset(nodes: &NodeSet, n: usize) -> Option<MockChebyshev> {
    if n == 0 {
        return None;
    }
    let theta = nodes.angles();
    let mut indices = Vec::with_capacity(n);
    for k in 1..=n {
        let cut = k as f64 * PI / n as f64 - CUT_MARGIN;
        let m = theta.partition_point(|&t| t < cut).checked_sub(1)?;
        indices.push(m);
    }
    let subset = MockChebyshev {
        points: indices.iter().map(|&m| nodes.x(m)).collect(),
        indices,
        cheb: chebyshev_second_kind_points(n),
    };
    subset.interlaces().then_some(subset)
}

/// Indices of `N+1` distinct nodes closest to `-cos(kπ/N)`, in order. Both
/// endpoints are always included.
pub fn nearest_chebyshev_indices(nodes: &NodeSet, n: usize) -> Vec<usize> {
    let big_m = nodes.intervals();
    assert!(n <= big_m);
    if n == 0 {
        return vec![0];
    }
    let targets = chebyshev_second_kind_points(n);
    let pts = nodes.points();
    let mut out: Vec<usize> = Vec::with_capacity(n + 1);
    for (k, &z) in targets.iter().enumerate() {
        // keep room for the remaining n - k targets
        let lo = out.last().map_or(0, |&i| i + 1);
        let hi = big_m - (n - k);
        let j = pts.partition_point(|&p| p < z).clamp(lo, hi);
        let pick = if j > lo && (z - pts[j - 1]) <= (pts[j] - z) {
            j - 1
        } else {
            j
        };
        out.push(pick);
    }
    out
}
