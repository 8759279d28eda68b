//! Sorted node sets on `[-1, 1]` and their generation from a weight.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::{Preset, WeightSpec};

/// Where a node set came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Weight {
        preset: Option<Preset>,
        alpha: f64,
        beta: f64,
        #[serde(rename = "M")]
        m: usize,
    },
    Explicit {
        #[serde(rename = "M")]
        m: usize,
    },
}

/// Points `-1 = x_0 < x_1 < ... < x_M = 1` with cached angles `arccos(-x_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    points: Vec<f64>,
    angles: Vec<f64>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct NodeSetJson {
    provenance: Provenance,
    points: Vec<f64>,
    angles: Vec<f64>,
}

/// `arccos(-x)` evaluated without cancellation near the endpoints.
pub fn angle_of(x: f64) -> f64 {
    if x <= 0.0 {
        2.0 * (0.5 * (1.0 + x)).sqrt().asin()
    } else {
        PI - 2.0 * (0.5 * (1.0 - x)).sqrt().asin()
    }
}

impl NodeSet {
    /// Builds a node set from explicit points.
    pub fn explicit(points: Vec<f64>) -> Result<Self> {
        let m = points.len().saturating_sub(1);
        Self::build(points, Provenance::Explicit { m })
    }

    fn build(points: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidNodes("need at least two points".into()));
        }
        if points[0] != -1.0 || *points.last().unwrap() != 1.0 {
            return Err(Error::InvalidNodes(
                "endpoints must be exactly -1 and 1".into(),
            ));
        }
        if let Some(i) = points.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidNodes(format!(
                "points not strictly increasing at index {i}"
            )));
        }
        let mut angles: Vec<f64> = points.iter().map(|&x| angle_of(x)).collect();
        angles[0] = 0.0;
        *angles.last_mut().unwrap() = PI;
        Ok(NodeSet {
            points,
            angles,
            provenance,
        })
    }

    /// Nodes equidistributed with respect to `w`: `cdf(x_m) = m / M`.
    #[allow(clippy::needless_range_loop)]
    pub fn from_weight(w: &WeightSpec, m_intervals: usize) -> Result<Self> {
        if m_intervals == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        let big_m = m_intervals;
        let mut points = vec![0.0; big_m + 1];
        points[0] = -1.0;
        points[big_m] = 1.0;
        let split = w.mass_below(0.0);
        let symmetric = w.is_symmetric();
        let mut left_v = 0.0;
        let upper = if symmetric { big_m / 2 } else { big_m - 1 };
        let mut right: Vec<usize> = Vec::new();
        for m in 1..=upper {
            if symmetric && 2 * m == big_m {
                points[m] = 0.0;
                continue;
            }
            let t = m as f64 / big_m as f64;
            if t <= split {
                let (x, v) = invert_left(w, t, left_v)?;
                points[m] = x;
                left_v = v;
            } else {
                right.push(m);
            }
        }
        // right-side targets are solved from the right end, largest m first
        let mut right_u = 0.0;
        for &m in right.iter().rev() {
            let tail = (big_m - m) as f64 / big_m as f64;
            let (x, u) = invert_right(w, tail, right_u)?;
            points[m] = x;
            right_u = u;
        }
        if symmetric {
            for m in 1..big_m - upper {
                points[big_m - m] = -points[m];
            }
        }
        if let Some(i) = points.windows(2).position(|p| !(p[0] < p[1])) {
            return Err(Error::Inversion {
                target: (i + 1) as f64 / big_m as f64,
                reason: "neighbouring nodes coincide in double precision".into(),
            });
        }
        let provenance = Provenance::Weight {
            preset: w.preset_name(),
            alpha: w.alpha(),
            beta: w.beta(),
            m: big_m,
        };
        Self::build(points, provenance)
    }

    /// Shorthand for `from_weight(&WeightSpec::preset(p), m)`.
    pub fn preset(p: Preset, m_intervals: usize) -> Result<Self> {
        Self::from_weight(&WeightSpec::preset(p), m_intervals)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of subintervals `M` (one less than the number of points).
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn x(&self, m: usize) -> f64 {
        self.points[m]
    }

    /// `x_m = -x_{M-m}` for all m.
    pub fn is_symmetric(&self) -> bool {
        let n = self.points.len();
        (0..n).all(|m| self.points[m] == -self.points[n - 1 - m])
    }

    /// Index `m` of the subinterval `[x_m, x_{m+1}]` containing `x`.
    pub fn bracket(&self, x: f64) -> Result<usize> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        let m = self.points.partition_point(|&p| p <= x);
        Ok(m.saturating_sub(1).min(self.intervals() - 1))
    }

    /// Index of the node equal to `x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        self.points.binary_search_by(|p| p.total_cmp(&x)).ok()
    }

    /// CSV with header `m,x,theta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,x,theta\n");
        for (m, (x, t)) in self.points.iter().zip(&self.angles).enumerate() {
            out.push_str(&format!("{m},{x},{t}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NodeSetJson {
            provenance: self.provenance.clone(),
            points: self.points.clone(),
            angles: self.angles.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let parsed: NodeSetJson = serde_json::from_str(s)?;
        Self::build(parsed.points, parsed.provenance)
    }
}

const BISECTION_WIDTH: f64 = 1e-3;
const CDF_TOL: f64 = 1e-13;
const MAX_STEPS: usize = 300;

/// Solves `mass_below(x) = t` for `x <= 0` in the variable `v = (1+x)^(1+β)`,
/// in which the mass is close to linear near the singular end.
fn invert_left(w: &WeightSpec, t: f64, v_lo: f64) -> Result<(f64, f64)> {
    let p = 1.0 / (1.0 + w.beta());
    let to_x = |v: f64| (-1.0 + v.powf(p)).min(0.0);
    let g = |v: f64| w.mass_below(to_x(v)) - t;
    let dg = |v: f64| {
        let x = to_x(v);
        w.mu(x) * p * v.powf(p - 1.0)
    };
    safeguarded_newton(t, v_lo, 1.0, to_x, g, dg)
}

/// Solves `mass_above(x) = tail` for `x >= 0` in `u = (1-x)^(1+α)`.
fn invert_right(w: &WeightSpec, tail: f64, u_lo: f64) -> Result<(f64, f64)> {
    let q = 1.0 / (1.0 + w.alpha());
    let to_x = |u: f64| (1.0 - u.powf(q)).max(0.0);
    let h = |u: f64| w.mass_above(to_x(u)) - tail;
    let dh = |u: f64| {
        let x = to_x(u);
        w.mu(x) * q * u.powf(q - 1.0)
    };
    safeguarded_newton(tail, u_lo, 1.0, to_x, h, dh)
}

/// Root of an increasing `f` on `[lo, hi]`: bisection to a width of 1e-3,
/// then Newton steps that fall back to bisection when they leave the bracket.
/// Stops on `|f| <= 1e-13` or once the bracket maps onto adjacent floats in x.
fn safeguarded_newton(
    target: f64,
    mut lo: f64,
    mut hi: f64,
    to_x: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let fail = |reason: &str| Error::Inversion {
        target,
        reason: reason.to_string(),
    };
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(fail("target not bracketed"));
    }
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..MAX_STEPS {
        let fv = f(v);
        if fv.abs() <= CDF_TOL {
            // polish while the residual keeps shrinking
            let (mut best, mut fbest) = (v, fv);
            for _ in 0..3 {
                let next = best - fbest / df(best);
                if !next.is_finite() || next < lo || next > hi {
                    break;
                }
                let fnext = f(next);
                if fnext.abs() >= fbest.abs() {
                    break;
                }
                (best, fbest) = (next, fnext);
            }
            return Ok((to_x(best), best));
        }
        if fv < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let (xl, xh) = (to_x(lo), to_x(hi));
        if (xh - xl).abs() <= 2.0 * f64::EPSILON * xl.abs().max(xh.abs()).max(f64::MIN_POSITIVE)
            || hi - lo <= f64::EPSILON * hi
        {
            // x is resolved to the last representable digit
            let (fl, fh) = (f(lo).abs(), f(hi).abs());
            let pick = if fl <= fh { lo } else { hi };
            return Ok((to_x(pick), pick));
        }
        let step = fv / df(v);
        let next = v - step;
        v = if step.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(fail("no convergence within the step budget"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_closed_form() {
        let nodes = NodeSet::preset(Preset::C1, 4).unwrap();
        let h = 0.5f64.sqrt();
        let expect = [-1.0, -h, 0.0, h, 1.0];
        for (a, b) in nodes.points().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        for m in [3usize, 17, 64, 255] {
            let nodes = NodeSet::preset(Preset::C1, m).unwrap();
            for (i, &x) in nodes.points().iter().enumerate() {
                let exact = -(i as f64 * PI / m as f64).cos();
                assert!((x - exact).abs() < 1e-12, "M={m} i={i}");
            }
        }
    }

    #[test]
    fn uniform_is_equispaced() {
        let nodes = NodeSet::preset(Preset::U, 4).unwrap();
        for (a, b) in nodes.points().iter().zip([-1.0, -0.5, 0.0, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let nodes = NodeSet::preset(Preset::U, 37).unwrap();
        for (i, &x) in nodes.points().iter().enumerate() {
            assert!((x - (-1.0 + 2.0 * i as f64 / 37.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn cdf_hits_targets() {
        for p in Preset::ALL {
            let w = WeightSpec::preset(p);
            for m in [1usize, 2, 7, 40, 64] {
                let nodes = NodeSet::from_weight(&w, m).unwrap();
                for (i, &x) in nodes.points().iter().enumerate() {
                    let err = (w.cdf(x).unwrap() - i as f64 / m as f64).abs();
                    assert!(err <= 1e-12, "{p} M={m} i={i} err={err:e}");
                }
            }
        }
    }

    #[test]
    fn asymmetric_weight_nodes() {
        let w = WeightSpec::new(0.4, -0.6).unwrap();
        let nodes = NodeSet::from_weight(&w, 33).unwrap();
        assert!(!nodes.is_symmetric());
        for (i, &x) in nodes.points().iter().enumerate() {
            assert!((w.cdf(x).unwrap() - i as f64 / 33.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetric_presets_mirror() {
        for p in Preset::ALL {
            for m in [5usize, 6, 51] {
                assert!(NodeSet::preset(p, m).unwrap().is_symmetric());
            }
        }
    }

    #[test]
    fn angles_cover_zero_to_pi() {
        let nodes = NodeSet::preset(Preset::OC, 50).unwrap();
        let a = nodes.angles();
        assert_eq!(a[0], 0.0);
        assert_eq!(a[50], PI);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn explicit_validation() {
        assert!(NodeSet::explicit(vec![-1.0, 0.0, 1.0]).is_ok());
        assert!(NodeSet::explicit(vec![-1.0, 0.5, 0.5, 1.0]).is_err());
        assert!(NodeSet::explicit(vec![-0.9, 1.0]).is_err());
        assert!(NodeSet::explicit(vec![1.0]).is_err());
    }

    #[test]
    fn bracket_locates_subinterval() {
        let nodes = NodeSet::preset(Preset::U, 4).unwrap();
        assert_eq!(nodes.bracket(-1.0).unwrap(), 0);
        assert_eq!(nodes.bracket(-0.25).unwrap(), 1);
        assert_eq!(nodes.bracket(0.0).unwrap(), 2);
        assert_eq!(nodes.bracket(1.0).unwrap(), 3);
        assert!(nodes.bracket(1.2).is_err());
    }

    #[test]
    fn csv_layout() {
        let nodes = NodeSet::preset(Preset::U, 2).unwrap();
        let csv = nodes.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("m,x,theta"));
        assert_eq!(lines.next(), Some("0,-1,0"));
        assert!(lines.next().unwrap().starts_with("1,0,1.5707963267948"));
    }

    #[test]
    fn json_round_trip_keeps_provenance() {
        let nodes = NodeSet::preset(Preset::UC, 9).unwrap();
        let back = NodeSet::from_json(&nodes.to_json().unwrap()).unwrap();
        assert_eq!(back, nodes);
        let json: serde_json::Value = serde_json::from_str(&nodes.to_json().unwrap()).unwrap();
        assert_eq!(json["provenance"]["M"], 9);
        assert_eq!(json["provenance"]["alpha"], -0.25);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        for m in [12, 37, 100] {
            let nodes = NodeSet::preset(Preset::OC, m).unwrap();
            let back = NodeSet::from_json(&nodes.to_json().unwrap()).unwrap();
            assert_eq!(back.points(), nodes.points());
        }
    }
}
