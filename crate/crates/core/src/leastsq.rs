//! Discrete polynomial least squares on a grid and its max-norm condition
//! number.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodes::NodeSet;
use crate::poly::{chebyshev_t_values, ChebPoly};
use crate::remez::{compute_b, BOptions};
use crate::weight::WeightSpec;

/// Pivots below this multiple of the largest are treated as zero.
const RANK_TOL: f64 = 1e-13;
const REFINE_CANDIDATES: usize = 5;

/// Least-squares fit of degree `N` on an `(M+1)`-point grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsqFit {
    pub degree: usize,
    pub poly: ChebPoly,
    /// `sqrt(2/(M+1) Σ (f(x_m) - p(x_m))^2)`.
    pub residual_discrete: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

impl LsqFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Chebyshev design matrix factored once; solves for any data vector.
pub struct Projector {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    degree: usize,
}

impl Projector {
    pub fn new(nodes: &NodeSet, n: usize) -> Result<Self> {
        let big_m = nodes.intervals();
        if n > big_m {
            return Err(Error::InvalidArgument(format!(
                "need N <= M, got N = {n}, M = {big_m}"
            )));
        }
        let rows: Vec<Vec<f64>> = nodes
            .points()
            .iter()
            .map(|&x| chebyshev_t_values(n, x))
            .collect();
        let a = DMatrix::from_fn(big_m + 1, n + 1, |i, k| rows[i][k]);
        let qr = a.qr();
        let r = qr.r();
        let top = r.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if let Some(p) = r.diagonal().iter().find(|v| v.abs() <= RANK_TOL * top) {
            return Err(Error::RankDeficient { pivot: p.abs() });
        }
        Ok(Projector {
            q: qr.q(),
            r,
            degree: n,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Chebyshev coefficients of the fit to `samples`.
    pub fn coefficients(&self, samples: &[f64]) -> Vec<f64> {
        let rhs = self.q.transpose() * DVector::from_column_slice(samples);
        self.r
            .solve_upper_triangular(&rhs)
            .expect("pivots checked at construction")
            .iter()
            .cloned()
            .collect()
    }

    /// Column `j` holds the coefficients of the fit to the `j`-th unit impulse.
    pub fn cardinal_matrix(&self) -> DMatrix<f64> {
        self.r
            .solve_upper_triangular(&self.q.transpose())
            .expect("pivots checked at construction")
    }
}

/// The least-squares polynomial of degree `N` through `samples` at the nodes.
pub fn fit(nodes: &NodeSet, n: usize, samples: &[f64]) -> Result<LsqFit> {
    if samples.len() != nodes.points().len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} samples, got {}",
            nodes.points().len(),
            samples.len()
        )));
    }
    let proj = Projector::new(nodes, n)?;
    let poly = ChebPoly::new(proj.coefficients(samples));
    let big_m = nodes.intervals();
    let sq: f64 = nodes
        .points()
        .iter()
        .zip(samples)
        .map(|(&x, &f)| (f - poly.eval(x)).powi(2))
        .sum();
    Ok(LsqFit {
        degree: n,
        residual_discrete: (2.0 / (big_m + 1) as f64 * sq).sqrt(),
        poly,
        m: big_m,
    })
}

/// Sampled operator norm of the fit from max-norm data to `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub kappa_inf: f64,
    pub argmax_x: f64,
    /// Number of probe points before refinement.
    pub grid_resolution: usize,
    /// `(B, sqrt(M+1) B)`, when `B(M, N)` was computed.
    pub bracket: Option<(f64, f64)>,
}

/// `κ(x) = Σ_j |(F e_j)(x)|` for the cardinal matrix `c`.
fn kappa_at(c: &DMatrix<f64>, x: f64) -> f64 {
    let t = DVector::from_vec(chebyshev_t_values(c.nrows() - 1, x));
    (c.transpose() * t).iter().map(|v| v.abs()).sum()
}

/// Maximises `κ(x)` over a Chebyshev-distributed probe grid, then refines the
/// best candidates by golden-section search between their neighbours.
pub fn condition_number_inf(
    nodes: &NodeSet,
    n: usize,
    probe_grid_size: usize,
) -> Result<ConditionEstimate> {
    let proj = Projector::new(nodes, n)?;
    let c = proj.cardinal_matrix();
    let size = probe_grid_size.max(2);
    let grid: Vec<f64> = (0..size)
        .map(|i| -(std::f64::consts::PI * i as f64 / (size - 1) as f64).cos())
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&x| kappa_at(&c, x)).collect();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    let mut kappa = vals[order[0]];
    let mut argmax = grid[order[0]];
    for &i in order.iter().take(REFINE_CANDIDATES) {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(size - 1)];
        let (x, v) = golden_max(|x| kappa_at(&c, x), lo, hi);
        if v > kappa {
            kappa = v;
            argmax = x;
        }
    }
    Ok(ConditionEstimate {
        kappa_inf: kappa,
        argmax_x: argmax,
        grid_resolution: size,
        bracket: None,
    })
}

/// [`condition_number_inf`] with the default `20 M` probe points and the
/// bracket from `B(M, N)`.
pub fn condition_with_bracket(nodes: &NodeSet, n: usize) -> Result<ConditionEstimate> {
    let mut est = condition_number_inf(nodes, n, 20 * nodes.intervals())?;
    let b = compute_b(nodes, n, &BOptions::default())?.b;
    est.bracket = Some((b, ((nodes.intervals() + 1) as f64).sqrt() * b));
    Ok(est)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `max(1, round(c M^{1/(2(γ+1))}))`, capped at `M`.
pub fn stable_degree(w: &WeightSpec, big_m: usize, c: f64) -> usize {
    let nu = 1.0 / (2.0 * (w.gamma() + 1.0));
    let n = (c * (big_m as f64).powf(nu)).round();
    (n.max(1.0) as usize).min(big_m.max(1))
}

/// `max |f - p|` over the nodes and a Chebyshev probe grid of `probe` points.
pub fn sup_error(nodes: &NodeSet, fit: &LsqFit, f: impl Fn(f64) -> f64, probe: usize) -> f64 {
    let probe = probe.max(2);
    let grid = (0..probe).map(|i| -(std::f64::consts::PI * i as f64 / (probe - 1) as f64).cos());
    nodes
        .points()
        .iter()
        .cloned()
        .chain(grid)
        .map(|x| (f(x) - fit.eval(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::lebesgue_constant;
    use crate::weight::Preset;

    #[test]
    fn reproduces_polynomials() {
        let nodes = NodeSet::preset(Preset::C2, 30).unwrap();
        let p = ChebPoly::new(vec![0.3, -1.0, 0.25, 0.0, 2.0]);
        let samples: Vec<f64> = nodes.points().iter().map(|&x| p.eval(x)).collect();
        let f = fit(&nodes, 6, &samples).unwrap();
        for (k, c) in f.poly.coeffs.iter().enumerate() {
            let want = p.coeffs.get(k).cloned().unwrap_or(0.0);
            assert!((c - want).abs() < 1e-10);
        }
        assert!(f.residual_discrete < 1e-12);
    }

    #[test]
    fn square_system_interpolates() {
        let nodes = NodeSet::preset(Preset::U, 9).unwrap();
        let samples: Vec<f64> = nodes.points().iter().map(|&x| (3.0 * x).sin()).collect();
        let f = fit(&nodes, 9, &samples).unwrap();
        for (&x, &s) in nodes.points().iter().zip(&samples) {
            assert!((f.eval(x) - s).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_fit_has_unit_condition() {
        let nodes = NodeSet::preset(Preset::U, 12).unwrap();
        let k = condition_number_inf(&nodes, 0, 240).unwrap();
        assert!((k.kappa_inf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_condition_is_lebesgue_constant() {
        for p in [Preset::U, Preset::C1, Preset::OC] {
            let nodes = NodeSet::preset(p, 10).unwrap();
            let k = condition_number_inf(&nodes, 10, 200).unwrap();
            let lam = lebesgue_constant(nodes.points()).value;
            assert!(
                (k.kappa_inf - lam).abs() < 1e-8 * lam,
                "{p}: {} vs {lam}",
                k.kappa_inf
            );
        }
    }

    #[test]
    fn stable_degrees() {
        assert_eq!(stable_degree(&WeightSpec::preset(Preset::U), 100, 3.0), 30);
        assert_eq!(
            stable_degree(&WeightSpec::preset(Preset::C2), 1000, 3.0),
            30
        );
        assert_eq!(stable_degree(&WeightSpec::preset(Preset::C1), 40, 0.5), 20);
        assert_eq!(stable_degree(&WeightSpec::preset(Preset::U), 4, 3.0), 4);
        assert_eq!(stable_degree(&WeightSpec::preset(Preset::U), 1, 0.01), 1);
    }

    #[test]
    fn wrong_sample_count_is_rejected() {
        let nodes = NodeSet::preset(Preset::U, 5).unwrap();
        assert!(fit(&nodes, 2, &[1.0; 5]).is_err());
    }
}
