//! Lower bounds from Chebyshev-zero comparisons, the witness polynomial,
//! the arccos-gap upper bound and the condition-number certificate.

use std::f64::consts::{LN_10, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodes::{NodeSet, Provenance};
use crate::poly::{chebyshev_second_kind_points, chebyshev_zeros, BaryPoly, Extremum};
use crate::remez::{compute_b, BOptions};
use crate::special::ln_gamma;

/// Which end of the interval a bound looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minus" | "-" | "left" => Ok(Side::Minus),
            "plus" | "+" | "right" => Ok(Side::Plus),
            _ => Err(Error::InvalidArgument(format!("unknown side `{s}`"))),
        }
    }
}

fn check_degree(nodes: &NodeSet, n: usize) -> Result<()> {
    if n == 0 || n > nodes.intervals() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= N <= M, got N = {n}, M = {}",
            nodes.intervals()
        )));
    }
    Ok(())
}

/// Largest `K` in `[2, N]` with `0 >= x_n > y_n` (minus side) or
/// `0 <= x_{M-n} < y_{N-1-n}` (plus side, the reflection of the minus
/// condition) for `n = 1..K-1`, else 1.
pub fn find_k(nodes: &NodeSet, n: usize, side: Side) -> usize {
    let big_m = nodes.intervals();
    if n < 2 || n > big_m {
        return 1;
    }
    let y = chebyshev_zeros(n);
    let ok = |i: usize| match side {
        Side::Minus => {
            let x = nodes.x(i);
            x <= 0.0 && x > y[i]
        }
        Side::Plus => {
            let x = nodes.x(big_m - i);
            x >= 0.0 && x < y[n - 1 - i]
        }
    };
    let run = (1..n).take_while(|&i| ok(i)).count();
    if run == 0 {
        1
    } else {
        run + 1
    }
}

/// `ln Q_±(K, N)`; zero for `K = 1`.
pub fn ln_q(nodes: &NodeSet, n: usize, k: usize, side: Side) -> f64 {
    if k <= 1 {
        return 0.0;
    }
    let big_m = nodes.intervals();
    let nf = n as f64;
    let gaps: f64 = (1..k)
        .map(|i| match side {
            Side::Minus => (1.0 + nodes.x(i)).ln(),
            Side::Plus => (1.0 - nodes.x(big_m - i)).ln(),
        })
        .sum();
    (PI / 8.0).ln() + (k - 1) as f64 * (2.0 * nf * nf / (PI * PI)).ln()
        - 2.0 * ln_gamma(k as f64 + 0.5)
        + gaps
}

/// Largest arccos gap `max_m (θ_{m+1} - θ_m)`.
pub fn zeta(nodes: &NodeSet) -> f64 {
    nodes
        .angles()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

/// `1 / (1 - Nζ)` when `Nζ < 1`.
pub fn zeta_upper_bound(nodes: &NodeSet, n: usize) -> Option<f64> {
    let nz = n as f64 * zeta(nodes);
    (nz < 1.0).then(|| 1.0 / (1.0 - nz))
}

/// Bracket quantities for `B(M, N)`. Logarithms are base 10.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub k_minus: usize,
    pub k_plus: usize,
    pub log10_q_minus: f64,
    pub log10_q_plus: f64,
    /// `max(log10 Q_-, log10 Q_+)`.
    pub log10_lower: f64,
    pub zeta: f64,
    pub n_zeta: f64,
    pub upper: Option<f64>,
    pub log10_upper: Option<f64>,
    /// `(N^{2(γ+1)} / M)^{1/(2γ+1)}`, only for weight-generated nodes with
    /// `γ > -1/2`.
    pub nu: Option<f64>,
}

impl BoundReport {
    pub fn ln_lower(&self) -> f64 {
        self.log10_lower * LN_10
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn bound_report(nodes: &NodeSet, n: usize) -> Result<BoundReport> {
    check_degree(nodes, n)?;
    let k_minus = find_k(nodes, n, Side::Minus);
    let k_plus = find_k(nodes, n, Side::Plus);
    let qm = ln_q(nodes, n, k_minus, Side::Minus) / LN_10;
    let qp = ln_q(nodes, n, k_plus, Side::Plus) / LN_10;
    let z = zeta(nodes);
    let upper = zeta_upper_bound(nodes, n);
    let nu = match nodes.provenance() {
        Provenance::Weight { alpha, beta, .. } => {
            let gamma = alpha.max(*beta).max(-0.5);
            let denom = 2.0 * gamma + 1.0;
            (denom > 0.0).then(|| {
                ((n as f64).powf(2.0 * (gamma + 1.0)) / nodes.intervals() as f64).powf(1.0 / denom)
            })
        }
        Provenance::Explicit { .. } => None,
    };
    Ok(BoundReport {
        m: nodes.intervals(),
        n,
        k_minus,
        k_plus,
        log10_q_minus: qm,
        log10_q_plus: qp,
        log10_lower: qm.max(qp),
        zeta: z,
        n_zeta: n as f64 * z,
        upper,
        log10_upper: upper.map(f64::log10),
        nu,
    })
}

/// The explicit polynomial behind the lower bound on one side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub side: Side,
    pub k: usize,
    pub log10_q: f64,
    pub poly: BaryPoly,
    /// `max_m |p(x_m)|`.
    pub grid_max: f64,
    /// `-cos(π/N)` on the minus side, `cos(π/N)` on the plus side.
    pub probe: f64,
    pub probe_value: f64,
    pub sup: Extremum,
}

fn mirror(nodes: &NodeSet) -> NodeSet {
    let pts: Vec<f64> = nodes.points().iter().rev().map(|&x| -x).collect();
    NodeSet::explicit(pts).expect("mirror of a node set is a node set")
}

/// `p(x) = ½ q(x) ∏_{n<K} (x - x_n)/(x - y_n)` with `q = T_N`, or its
/// mirror image for the plus side.
pub fn witness_polynomial(nodes: &NodeSet, n: usize, side: Side) -> Result<Witness> {
    check_degree(nodes, n)?;
    let k = find_k(nodes, n, side);
    if k < 2 {
        return Err(Error::NoWitness { side: side.name() });
    }
    let left = match side {
        Side::Minus => nodes.clone(),
        Side::Plus => mirror(nodes),
    };
    let y = chebyshev_zeros(n);
    // p = 2^{N-2} ∏ (x - r_i) over the K swapped roots and the untouched zeros
    let roots: Vec<f64> = (0..k)
        .map(|i| left.x(i))
        .chain(y[k..].iter().cloned())
        .collect();
    let eval = |x: f64| 0.25 * roots.iter().map(|&r| 2.0 * (x - r)).product::<f64>();
    let mut poly = BaryPoly::from_fn(chebyshev_second_kind_points(n), eval)?;
    if side == Side::Plus {
        poly = poly.mirrored();
    }
    let grid_max = nodes
        .points()
        .iter()
        .map(|&x| poly.eval(x).abs())
        .fold(0.0, f64::max);
    let probe = match side {
        Side::Minus => -(PI / n as f64).cos(),
        Side::Plus => (PI / n as f64).cos(),
    };
    Ok(Witness {
        side,
        k,
        log10_q: ln_q(nodes, n, k, side) / LN_10,
        probe_value: poly.eval(probe),
        sup: poly.sup_norm_on(-1.0, 1.0),
        grid_max,
        probe,
        poly,
    })
}

/// A lower bound `κ >= B(M, N) / 2` on the condition number of any method
/// reaching the rate `C ρ^{-M^τ}` on functions analytic in `E_θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "N")]
    pub n: usize,
    pub threshold: f64,
    pub b: f64,
    pub kappa_lower: f64,
}

/// Largest `N < (M^τ ln ρ - ln 2C) / ln θ`, capped at `M`, with the
/// resulting `B(M, N) / 2`. `None` when no `N >= 1` qualifies.
pub fn impossibility_certificate(
    nodes: &NodeSet,
    tau: f64,
    rho: f64,
    c: f64,
    theta: f64,
    opts: &BOptions,
) -> Result<Option<Certificate>> {
    if !(tau > 0.0 && rho > 1.0 && c > 0.0 && theta > 1.0) {
        return Err(Error::InvalidArgument(
            "need tau > 0, rho > 1, C > 0, theta > 1".into(),
        ));
    }
    let big_m = nodes.intervals();
    let threshold = ((big_m as f64).powf(tau) * rho.ln() - (2.0 * c).ln()) / theta.ln();
    let n = largest_integer_below(threshold).min(big_m as i64);
    if n < 1 {
        return Ok(None);
    }
    let n = n as usize;
    let b = compute_b(nodes, n, opts)?.b;
    Ok(Some(Certificate {
        n,
        threshold,
        b,
        kappa_lower: b / 2.0,
    }))
}

/// Largest integer strictly below `t`, treating values within 1e-9 of an
/// integer as that integer.
fn largest_integer_below(t: f64) -> i64 {
    if !t.is_finite() {
        return if t > 0.0 { i64::MAX } else { i64::MIN };
    }
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as i64 - 1
    } else {
        t.floor() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use crate::weight::Preset;

    #[test]
    fn chebyshev_nodes_give_k_one() {
        for n in [2, 5, 17] {
            let nodes = NodeSet::preset(Preset::C1, 2 * n).unwrap();
            assert_eq!(find_k(&nodes, n, Side::Minus), 1);
            assert_eq!(find_k(&nodes, n, Side::Plus), 1);
        }
    }

    #[test]
    fn k_values_for_semicircle_nodes() {
        let nodes = NodeSet::preset(Preset::C2, 14).unwrap();
        assert_eq!(find_k(&nodes, 9, Side::Minus), 3);
        let nodes = NodeSet::preset(Preset::C2, 30).unwrap();
        assert_eq!(find_k(&nodes, 15, Side::Minus), 4);
    }

    #[test]
    fn q_for_k_two_matches_hand_formula() {
        let nodes = NodeSet::preset(Preset::U, 20).unwrap();
        let n = 10;
        let g = 3.0 * PI.sqrt() / 4.0;
        assert!((gamma(2.5) - g).abs() < 1e-14);
        let nf = n as f64;
        let q = PI / 8.0 * (2.0 * nf * nf / (PI * PI)) / (g * g) * (1.0 + nodes.x(1));
        assert!((ln_q(&nodes, n, 2, Side::Minus) - q.ln()).abs() < 1e-12);
        assert_eq!(ln_q(&nodes, n, 1, Side::Minus), 0.0);
    }

    #[test]
    fn zeta_values() {
        for m in [3, 10, 64] {
            let nodes = NodeSet::preset(Preset::C1, m).unwrap();
            assert!((zeta(&nodes) - PI / m as f64).abs() < 1e-13);
        }
        let nodes = NodeSet::explicit(vec![-1.0, 0.0, 1.0]).unwrap();
        assert!((zeta(&nodes) - PI / 2.0).abs() < 1e-15);
        assert!(zeta_upper_bound(&nodes, 1).is_none());
    }

    #[test]
    fn integer_threshold_is_excluded() {
        assert_eq!(largest_integer_below(19.0), 18);
        assert_eq!(largest_integer_below(19.0 + 1e-12), 18);
        assert_eq!(largest_integer_below(18.7), 18);
        assert_eq!(largest_integer_below(0.5), 0);
    }

    #[test]
    fn witness_is_bounded_on_grid() {
        for (n, m) in [(9, 14), (15, 30)] {
            let nodes = NodeSet::preset(Preset::C2, m).unwrap();
            let w = witness_polynomial(&nodes, n, Side::Minus).unwrap();
            assert!(w.grid_max <= 1.0 + 1e-9, "grid max {}", w.grid_max);
            assert!(w.sup.abs().log10() >= w.log10_q);
            assert!(w.probe_value.abs().log10() >= w.log10_q - 1e-12);
        }
    }

    #[test]
    fn plus_witness_mirrors_minus() {
        let nodes = NodeSet::preset(Preset::C2, 30).unwrap();
        let a = witness_polynomial(&nodes, 15, Side::Minus).unwrap();
        let b = witness_polynomial(&nodes, 15, Side::Plus).unwrap();
        assert_eq!(a.k, b.k);
        for x in [-0.9, -0.3, 0.2, 0.95] {
            assert!((a.poly.eval(x) - b.poly.eval(-x)).abs() < 1e-10);
        }
    }

    #[test]
    fn no_witness_without_k() {
        let nodes = NodeSet::preset(Preset::C1, 20).unwrap();
        assert!(matches!(
            witness_polynomial(&nodes, 10, Side::Minus),
            Err(Error::NoWitness { .. })
        ));
    }
}
