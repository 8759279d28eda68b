use crate::poly::bary::{barycentric_weights, BaryPoly, Extremum};

/// `L_Y(x) = Σ_k |ℓ_k(x)|`.
pub fn lebesgue_function(y: &[f64], x: f64) -> f64 {
    let w = barycentric_weights(y);
    lebesgue_with_weights(y, &w, x)
}

pub(crate) fn lebesgue_with_weights(y: &[f64], w: &[f64], x: f64) -> f64 {
    let diam = y[y.len() - 1] - y[0];
    if y.iter().any(|&v| (x - v).abs() <= 1e-14 * diam) {
        return 1.0;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&v, &wk) in y.iter().zip(w) {
        let t = wk / (x - v);
        num += t.abs();
        den += t;
    }
    num / den.abs()
}

/// Values `(-1)^(n-k)` for `k <= n` and `(-1)^(n+1-k)` for `k > n`.
pub fn alternating_values(len: usize, n: usize) -> Vec<f64> {
    (0..len)
        .map(|k| {
            let e = if k <= n { n - k } else { k - n - 1 };
            if e % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// The polynomial equal to `L_Y` on `[y_n, y_{n+1}]`.
pub fn alternating_poly(y: &[f64], n: usize) -> BaryPoly {
    assert!(y.len() >= 2 && n + 1 < y.len());
    BaryPoly::new(y.to_vec(), alternating_values(y.len(), n))
        .expect("interpolation nodes must be strictly increasing")
}

/// Maximum of `L_Y` over `[y_0, y_N]`, found gap by gap on the
/// alternating polynomials.
pub fn lebesgue_constant(y: &[f64]) -> Extremum {
    assert!(y.len() >= 2);
    let base = alternating_poly(y, 0);
    (0..y.len() - 1)
        .map(|n| {
            base.with_values(alternating_values(y.len(), n))
                .max_abs_on(y[n], y[n + 1])
        })
        .fold(
            Extremum {
                x: y[0],
                value: 1.0,
            },
            |acc, e| if e.value > acc.value { e } else { acc },
        )
}
