//! Modified Jacobi weights `μ(x) = c g(x) (1-x)^α (1+x)^β` on `[-1, 1]`.
//!
//! Integrals of `μ` are evaluated with Gauss-Jacobi rules anchored at the
//! singular endpoint: integrals starting at `-1` use the `(1+x)^β` rule on
//! `[-1, t]`, integrals ending at `+1` use the `(1-x)^α` rule on `[t, 1]`.
//! The other factor is analytic on the mapped interval, so a fixed rule
//! converges geometrically regardless of the exponents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussJacobi;

const RULE_POINTS: usize = 40;

/// The named ultraspherical weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// α = β = 0, equispaced nodes.
    U,
    /// α = β = -1/2, Chebyshev nodes.
    C1,
    /// α = β = 1/2.
    C2,
    /// α = β = -1/4.
    UC,
    /// α = β = -3/4.
    OC,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::U, Preset::C1, Preset::C2, Preset::UC, Preset::OC];

    pub fn exponent(self) -> f64 {
        match self {
            Preset::U => 0.0,
            Preset::C1 => -0.5,
            Preset::C2 => 0.5,
            Preset::UC => -0.25,
            Preset::OC => -0.75,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::U => "U",
            Preset::C1 => "C1",
            Preset::C2 => "C2",
            Preset::UC => "UC",
            Preset::OC => "OC",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "U" => Ok(Preset::U),
            "C1" => Ok(Preset::C1),
            "C2" => Ok(Preset::C2),
            "UC" => Ok(Preset::UC),
            "OC" => Ok(Preset::OC),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

/// Bounded positive factor `g` of the weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// `g ≡ 1`.
    One,
    /// Piecewise polynomial with monomial coefficients per piece and declared
    /// bounds `lower <= g <= upper`.
    Piecewise {
        breaks: Vec<f64>,
        pieces: Vec<Vec<f64>>,
        lower: f64,
        upper: f64,
    },
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl Density {
    fn validate(&self) -> Result<()> {
        let Density::Piecewise {
            breaks,
            pieces,
            lower,
            upper,
        } = self
        else {
            return Ok(());
        };
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("density: {msg}")));
        if breaks.len() < 2 || pieces.len() + 1 != breaks.len() {
            return bad("need one polynomial per break interval");
        }
        if breaks[0] != -1.0 || *breaks.last().unwrap() != 1.0 {
            return bad("breaks must start at -1 and end at 1");
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breaks must be strictly increasing");
        }
        if !(*lower > 0.0 && upper >= lower) {
            return bad("bounds must satisfy 0 < lower <= upper");
        }
        for (piece, w) in pieces.iter().zip(breaks.windows(2)) {
            if piece.is_empty() {
                return bad("empty polynomial piece");
            }
            for i in 0..=32 {
                let x = w[0] + (w[1] - w[0]) * i as f64 / 32.0;
                let g = horner(piece, x);
                if g < lower * (1.0 - 1e-12) || g > upper * (1.0 + 1e-12) {
                    return bad(&format!("g({x}) = {g} violates the declared bounds"));
                }
            }
        }
        Ok(())
    }

    /// Evaluates `g(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::One => 1.0,
            Density::Piecewise { breaks, pieces, .. } => {
                let j = breaks[1..breaks.len() - 1].partition_point(|&b| b <= x);
                horner(&pieces[j], x)
            }
        }
    }

    fn pieces(&self) -> Vec<(f64, f64, Vec<f64>)> {
        match self {
            Density::One => vec![(-1.0, 1.0, vec![1.0])],
            Density::Piecewise { breaks, pieces, .. } => breaks
                .windows(2)
                .zip(pieces)
                .map(|(w, p)| (w[0], w[1], p.clone()))
                .collect(),
        }
    }
}

/// A normalized modified Jacobi weight.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    alpha: f64,
    beta: f64,
    density: Density,
    preset: Option<Preset>,
    norm_constant: f64,
    pieces: Vec<(f64, f64, Vec<f64>)>,
    left_rule: GaussJacobi,
    right_rule: GaussJacobi,
}

/// Serializable summary of a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub preset: Option<Preset>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub norm_constant: f64,
    pub density: Density,
}

impl WeightSpec {
    /// Jacobi weight with `g ≡ 1`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Self::with_density(alpha, beta, Density::One)
    }

    pub fn with_density(alpha: f64, beta: f64, density: Density) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
            )));
        }
        density.validate()?;
        let pieces = density.pieces();
        let mut spec = WeightSpec {
            alpha,
            beta,
            density,
            preset: None,
            norm_constant: 1.0,
            pieces,
            left_rule: GaussJacobi::new(RULE_POINTS, 0.0, beta),
            right_rule: GaussJacobi::new(RULE_POINTS, alpha, 0.0),
        };
        spec.norm_constant = 1.0 / (spec.left_integral(0.0) + spec.right_integral(0.0));
        Ok(spec)
    }

    pub fn preset(preset: Preset) -> Self {
        let e = preset.exponent();
        let mut spec = Self::new(e, e).expect("preset exponents are valid");
        spec.preset = Some(preset);
        spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `max{α, β, -1/2}`.
    pub fn gamma(&self) -> f64 {
        self.alpha.max(self.beta).max(-0.5)
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn preset_name(&self) -> Option<Preset> {
        self.preset
    }

    pub fn params(&self) -> WeightParams {
        WeightParams {
            preset: self.preset,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma(),
            norm_constant: self.norm_constant,
            density: self.density.clone(),
        }
    }

    /// Mirror symmetric about the origin (equal exponents and `g ≡ 1`).
    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta && self.density == Density::One
    }

    /// Normalized density `μ(x)`.
    pub fn mu(&self, x: f64) -> f64 {
        self.norm_constant
            * self.density.eval(x)
            * (1.0 - x).powf(self.alpha)
            * (1.0 + x).powf(self.beta)
    }

    // ∫_{-1}^{u} (1-s)^α (1+s)^β p(s) ds for u <= 0
    fn integral_from_left(&self, p: &[f64], u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        let h = 0.5 * (1.0 + u);
        let sum: f64 = self
            .left_rule
            .nodes
            .iter()
            .zip(&self.left_rule.weights)
            .map(|(&xi, &w)| {
                let s = -1.0 + h * (1.0 + xi);
                w * (1.0 - s).powf(self.alpha) * horner(p, s)
            })
            .sum();
        h.powf(self.beta + 1.0) * sum
    }

    // ∫_{u}^{1} (1-s)^α (1+s)^β p(s) ds for u >= 0
    fn to_right(&self, p: &[f64], u: f64) -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        let h = 0.5 * (1.0 - u);
        let sum: f64 = self
            .right_rule
            .nodes
            .iter()
            .zip(&self.right_rule.weights)
            .map(|(&xi, &w)| {
                let s = 1.0 - h * (1.0 - xi);
                w * (1.0 + s).powf(self.beta) * horner(p, s)
            })
            .sum();
        h.powf(self.alpha + 1.0) * sum
    }

    fn piece_integral(&self, p: &[f64], a: f64, b: f64) -> f64 {
        if b <= 0.0 {
            self.integral_from_left(p, b) - self.integral_from_left(p, a)
        } else if a >= 0.0 {
            self.to_right(p, a) - self.to_right(p, b)
        } else {
            (self.integral_from_left(p, 0.0) - self.integral_from_left(p, a))
                + (self.to_right(p, 0.0) - self.to_right(p, b))
        }
    }

    /// Unnormalized `∫_{-1}^{t} μ / c`.
    pub(crate) fn left_integral(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|(a, _, _)| *a < t)
            .map(|(a, b, p)| self.piece_integral(p, *a, b.min(t)))
            .sum()
    }

    /// Unnormalized `∫_{t}^{1} μ / c`.
    pub(crate) fn right_integral(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|(_, b, _)| *b > t)
            .map(|(a, b, p)| self.piece_integral(p, a.max(t), *b))
            .sum()
    }

    /// Normalized mass to the left of `t`, evaluated from the left end.
    pub(crate) fn mass_below(&self, t: f64) -> f64 {
        self.norm_constant * self.left_integral(t)
    }

    /// Normalized mass to the right of `t`, evaluated from the right end.
    pub(crate) fn mass_above(&self, t: f64) -> f64 {
        self.norm_constant * self.right_integral(t)
    }

    /// `∫_{-1}^{x} μ`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        Ok(if x <= 0.0 {
            self.mass_below(x)
        } else {
            1.0 - self.mass_above(x)
        })
    }
}
