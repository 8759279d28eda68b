//! Brute-force `B(M, N, x)` by enumerating reference sets, for small cases.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::nodes::NodeSet;

/// Largest number of reference sets enumerated per point.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// `L_Y(x)` from the product form of the Lagrange basis.
pub fn lebesgue_product_form(y: &[f64], x: f64) -> f64 {
    (0..y.len())
        .map(|k| {
            y.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &yj)| (x - yj) / (y[k] - yj))
                .product::<f64>()
                .abs()
        })
        .sum()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Visits every increasing `k`-subset of `pool`.
fn for_each_subset(pool: &[usize], k: usize, mut f: impl FnMut(&[usize])) {
    let n = pool.len();
    if k > n {
        return;
    }
    let mut pos: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (b, &p) in buf.iter_mut().zip(&pos) {
            *b = pool[p];
        }
        f(&buf);
        let Some(i) = (0..k).rev().find(|&i| pos[i] != i + n - k) else {
            return;
        };
        pos[i] += 1;
        for j in i + 1..k {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

/// The minimising reference set, as sorted grid indices.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub indices: Vec<usize>,
}

fn check_guard(big_m: usize, n: usize) -> Result<()> {
    if n > big_m {
        return Err(Error::InvalidArgument("need N <= M".into()));
    }
    if n == 0 {
        return Ok(());
    }
    let count = binomial(big_m as u128 - 1, n as u128 - 1);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// `min_Y L_Y(x)` over all `N+1`-point subsets holding the nodes around `x`.
/// At a node the value is 1 and the set is that node alone.
pub fn oracle_b_point(nodes: &NodeSet, n: usize, x: f64) -> Result<OracleValue> {
    let big_m = nodes.intervals();
    check_guard(big_m, n)?;
    let m = nodes.bracket(x)?;
    if n == 0 {
        return Ok(OracleValue {
            value: 1.0,
            indices: vec![m],
        });
    }
    if let Some(j) = nodes.node_index(x) {
        return Ok(OracleValue {
            value: 1.0,
            indices: vec![j],
        });
    }
    Ok(minimise_at(nodes, n, m, x))
}

fn minimise_at(nodes: &NodeSet, n: usize, m: usize, x: f64) -> OracleValue {
    let big_m = nodes.intervals();
    let pool: Vec<usize> = (0..=big_m).filter(|&i| i != m && i != m + 1).collect();
    let mut best = OracleValue {
        value: f64::INFINITY,
        indices: Vec::new(),
    };
    for_each_subset(&pool, n - 1, |rest| {
        let mut idx: Vec<usize> = rest.iter().cloned().chain([m, m + 1]).collect();
        idx.sort_unstable();
        let y: Vec<f64> = idx.iter().map(|&i| nodes.x(i)).collect();
        let v = lebesgue_product_form(&y, x);
        if v < best.value {
            best = OracleValue {
                value: v,
                indices: idx,
            };
        }
    });
    best
}

/// Brute-force `B(M, N)`: the pointwise minimum over reference sets is
/// maximised on each subinterval by dense sampling and golden-section
/// refinement.
pub fn oracle_b(nodes: &NodeSet, n: usize) -> Result<f64> {
    let big_m = nodes.intervals();
    check_guard(big_m, n)?;
    if n == 0 {
        return Ok(1.0);
    }
    let mut best: f64 = 1.0;
    for m in 0..big_m {
        let (a, b) = (nodes.x(m), nodes.x(m + 1));
        best = best.max(maximise(|t| minimise_at(nodes, n, m, t).value, a, b));
    }
    Ok(best)
}

/// Maximum of a function that is unimodal near its peak on `[a, b]`.
fn maximise(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const SAMPLES: usize = 200;
    let h = (b - a) / SAMPLES as f64;
    let (i, _) = (0..=SAMPLES).map(|i| f(a + i as f64 * h)).enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
    );
    let mut lo = a + (i.saturating_sub(1)) as f64 * h;
    let mut hi = (a + (i + 1) as f64 * h).min(b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 * (b - a) {
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
    fc.max(fd).max(f(a)).max(f(b))
}

/// `max p(x)` subject to `|p(x_j)| <= 1`, `deg p <= N`, solved as a linear
/// program over monomial coefficients by visiting every vertex: each choice
/// of `N+1` active grid constraints and signs. Only for `N <= 5`.
pub fn lp_b_point(nodes: &NodeSet, n: usize, x: f64) -> Result<f64> {
    if n > 5 {
        return Err(Error::InvalidArgument(
            "vertex enumeration is limited to N <= 5".into(),
        ));
    }
    let big_m = nodes.intervals();
    if n > big_m {
        return Err(Error::InvalidArgument("need N <= M".into()));
    }
    let pts = nodes.points();
    let pool: Vec<usize> = (0..=big_m).collect();
    let k = n + 1;
    let monomials = |t: f64| -> Vec<f64> { (0..k).map(|e| t.powi(e as i32)).collect() };
    let target = DVector::from_vec(monomials(x));
    let mut best = f64::NEG_INFINITY;
    for_each_subset(&pool, k, |active| {
        let a = DMatrix::from_fn(k, k, |r, c| pts[active[r]].powi(c as i32));
        let Some(lu) = Some(a.lu()).filter(|lu| lu.is_invertible()) else {
            return;
        };
        for signs in 0..(1u32 << k) {
            let rhs = DVector::from_fn(k, |r, _| if signs >> r & 1 == 1 { 1.0 } else { -1.0 });
            let Some(c) = lu.solve(&rhs) else { continue };
            let feasible = pts.iter().all(|&t| {
                let v: f64 = monomials(t).iter().zip(c.iter()).map(|(a, b)| a * b).sum();
                v.abs() <= 1.0 + 1e-10
            });
            if feasible {
                best = best.max(target.dot(&c));
            }
        }
    });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::Preset;

    #[test]
    fn subsets_are_enumerated_once() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 3, 5, 7, 9], 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![1, 3, 5]);
        assert_eq!(seen[9], vec![5, 7, 9]);
        let mut count = 0;
        for_each_subset(&[4, 2], 0, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn three_point_grid() {
        let nodes = NodeSet::preset(Preset::U, 2).unwrap();
        assert!((oracle_b(&nodes, 2).unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(oracle_b(&nodes, 0).unwrap(), 1.0);
    }

    #[test]
    fn node_values_are_one() {
        let nodes = NodeSet::preset(Preset::U, 6).unwrap();
        assert_eq!(oracle_b_point(&nodes, 3, nodes.x(2)).unwrap().value, 1.0);
    }

    #[test]
    fn lp_agrees_with_enumeration() {
        let nodes = NodeSet::preset(Preset::U, 6).unwrap();
        let a = oracle_b_point(&nodes, 3, 0.4).unwrap().value;
        let b = lp_b_point(&nodes, 3, 0.4).unwrap();
        assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn guard_refuses_large_cases() {
        let nodes = NodeSet::preset(Preset::U, 60).unwrap();
        assert!(matches!(
            oracle_b_point(&nodes, 20, 0.01),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }
}
