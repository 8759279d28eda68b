//! Parameter sweeps behind the figures, written as deterministic CSV files.
//!
//! Every experiment is described by a TOML config; the SHA-256 of its
//! canonical form is stored in `manifest.json` next to the outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{bound_report, witness_polynomial, Side};
use crate::error::{Error, Result};
use crate::leastsq::{condition_number_inf, fit, stable_degree, sup_error};
use crate::nodes::NodeSet;
use crate::remez::{
    b_exceeds, compute_b, smallest_m_for_bounded_b, solve_subinterval, BOptions, RemezOptions,
    Variant,
};
use crate::weight::{Preset, WeightSpec};

/// `log10 B` above which a value is reported as saturated.
pub const SATURATION_LOG10: f64 = 13.0;

fn map_grid<T: Send, U: Sync>(items: &[U], f: impl Fn(&U) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Outcome of a single `B(M, N)` evaluation in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// Some subintervals failed; the value is a lower estimate.
    Partial,
    Saturated,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Partial => "partial",
            Status::Saturated => "saturated",
            Status::Failed => "failed",
        }
    }
}

/// `log10 B(M, N)` with saturation handling.
fn classified_log10_b(nodes: &NodeSet, n: usize, opts: &BOptions) -> (Option<f64>, Status) {
    if n == 0 {
        return (Some(0.0), Status::Ok);
    }
    let lower = bound_report(nodes, n).map(|r| r.log10_lower).unwrap_or(0.0);
    if lower > SATURATION_LOG10 {
        return (Some(lower), Status::Saturated);
    }
    match compute_b(nodes, n, opts) {
        Ok(r) if r.log10_b > SATURATION_LOG10 => (Some(r.log10_b), Status::Saturated),
        Ok(r) if r.partial() => (Some(r.log10_b), Status::Partial),
        Ok(r) => (Some(r.log10_b), Status::Ok),
        Err(_) => match b_exceeds(nodes, n, 10f64.powf(SATURATION_LOG10), &opts.remez) {
            Ok(true) => (None, Status::Saturated),
            _ => (None, Status::Failed),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub log10_b: Option<f64>,
    pub log10_q: f64,
    /// `log10` of the larger witness sup-norm, when a witness exists.
    pub log10_witness: Option<f64>,
    pub status: Status,
}

/// `B(M, N)`, `Q` and the witness norm along `N = round(ratio · M)`.
pub fn growth_sweep(
    preset: Preset,
    ratio: f64,
    m_list: &[usize],
    opts: &BOptions,
) -> Result<Vec<GrowthRow>> {
    let mut rows = map_grid(m_list, |&m| -> Result<GrowthRow> {
        let n = ((ratio * m as f64).round() as usize).clamp(1, m);
        let nodes = NodeSet::preset(preset, m)?;
        let rep = bound_report(&nodes, n)?;
        let witness = [Side::Minus, Side::Plus]
            .into_iter()
            .filter_map(|s| witness_polynomial(&nodes, n, s).ok())
            .map(|w| w.sup.abs().log10())
            .reduce(f64::max);
        let (log10_b, status) = classified_log10_b(&nodes, n, opts);
        Ok(GrowthRow {
            m,
            n,
            log10_b,
            log10_q: rep.log10_lower,
            log10_witness: witness,
            status,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.m, r.n));
    Ok(rows)
}

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("M,N,log10_B,log10_Q,log10_witness,status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.m,
            r.n,
            fmt_opt(r.log10_b),
            r.log10_q,
            fmt_opt(r.log10_witness),
            r.status.name()
        );
    }
    out
}

/// Least-squares fit of `ln y = slope · ln x + intercept`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Ordinary least-squares line `(slope, intercept)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Pearson correlation coefficient.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub preset: Preset,
    pub threshold: f64,
    /// `(N, M*)` pairs.
    pub rows: Vec<(usize, usize)>,
    /// Slope of `ln M*` against `ln N`.
    pub slope: f64,
    pub intercept: f64,
    /// `c` in the least-squares fit `M* ≈ c N` through the origin.
    pub linear_c: f64,
}

/// Smallest `M` with `B(M, N) <= threshold` for each `N`, with fitted rates.
pub fn scaling_fit(
    preset: Preset,
    n_list: &[usize],
    threshold: f64,
    cap: usize,
    opts: &RemezOptions,
) -> Result<ScalingFit> {
    let w = WeightSpec::preset(preset);
    let mut rows = map_grid(n_list, |&n| {
        smallest_m_for_bounded_b(&w, n, threshold, opts, cap).map(|s| (n, s.m))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.sort_unstable();
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
    let (slope, intercept) = loglog_slope(&xs, &ys);
    let linear_c =
        xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / xs.iter().map(|x| x * x).sum::<f64>();
    Ok(ScalingFit {
        preset,
        threshold,
        rows,
        slope,
        intercept,
        linear_c,
    })
}

pub fn scaling_csv(fit: &ScalingFit) -> String {
    let mut out = String::from("N,M_star\n");
    for (n, m) in &fit.rows {
        let _ = writeln!(out, "{n},{m}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub log10_b: Option<f64>,
    pub status: Status,
}

/// `log10 B(M, N)` over a grid; cells with `N > M` are skipped.
pub fn contour_grid(
    preset: Preset,
    m_values: &[usize],
    n_values: &[usize],
    opts: &BOptions,
) -> Result<Vec<ContourRow>> {
    let cells: Vec<(usize, usize)> = m_values
        .iter()
        .flat_map(|&m| {
            n_values
                .iter()
                .filter(move |&&n| n <= m)
                .map(move |&n| (m, n))
        })
        .collect();
    let mut rows = map_grid(&cells, |&(m, n)| -> Result<ContourRow> {
        let nodes = NodeSet::preset(preset, m)?;
        let (log10_b, status) = classified_log10_b(&nodes, n, opts);
        Ok(ContourRow {
            m,
            n,
            log10_b,
            status,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.m, r.n));
    Ok(rows)
}

pub fn contour_csv(rows: &[ContourRow]) -> String {
    let mut out = String::from("M,N,log10_B,status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.m,
            r.n,
            fmt_opt(r.log10_b),
            r.status.name()
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    pub first_iterations: usize,
    pub second_iterations: usize,
    /// Largest difference between the two polynomials on the grid and the
    /// target subinterval.
    pub max_difference: f64,
    pub local_max: f64,
    pub csv: String,
}

/// Both exchange variants on one subinterval, with per-iteration traces.
pub fn remez_convergence(
    preset: Preset,
    big_m: usize,
    n: usize,
    m: usize,
) -> Result<ConvergenceRun> {
    let nodes = NodeSet::preset(preset, big_m)?;
    let first = solve_subinterval(
        &nodes,
        n,
        m,
        &RemezOptions::with_variant(Variant::First),
        None,
    )?;
    let second = solve_subinterval(
        &nodes,
        n,
        m,
        &RemezOptions::with_variant(Variant::Second),
        None,
    )?;
    let (a, b) = (nodes.x(m), nodes.x(m + 1));
    let probes = nodes
        .points()
        .iter()
        .cloned()
        .chain((0..=100).map(|i| a + (b - a) * i as f64 / 100.0));
    let max_difference = probes
        .map(|x| (first.poly.eval(x) - second.poly.eval(x)).abs())
        .fold(0.0, f64::max);
    let mut csv = String::from("variant,iteration,lvalue,grid_max\n");
    for (name, s) in [("first", &first), ("second", &second)] {
        for (i, (l, g)) in s.trace.lvalues.iter().zip(&s.trace.grid_max).enumerate() {
            let _ = writeln!(csv, "{name},{i},{l},{g}");
        }
    }
    Ok(ConvergenceRun {
        first_iterations: first.trace.iterations,
        second_iterations: second.trace.iterations,
        max_difference,
        local_max: second.local.abs(),
        csv,
    })
}

/// How the least-squares degree follows `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum DegreeRule {
    /// `round(c M^{1/(2(γ+1))})`.
    Stable { c: f64 },
    /// `ceil(sqrt(M))`.
    Sqrt,
    /// `N = M` (interpolation).
    Square,
}

impl DegreeRule {
    pub fn degree(&self, w: &WeightSpec, big_m: usize) -> usize {
        match *self {
            DegreeRule::Stable { c } => stable_degree(w, big_m, c),
            DegreeRule::Sqrt => ((big_m as f64).sqrt().ceil() as usize).min(big_m),
            DegreeRule::Square => big_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsqRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub kappa: f64,
    pub err_exp: f64,
    pub err_runge: f64,
}

pub fn runge(x: f64) -> f64 {
    1.0 / (1.0 + 25.0 * x * x)
}

/// Condition number and sup-errors for `e^x` and the Runge function.
pub fn lsq_stability_sweep(
    preset: Preset,
    m_list: &[usize],
    rule: DegreeRule,
) -> Result<Vec<LsqRow>> {
    let w = WeightSpec::preset(preset);
    let mut rows = map_grid(m_list, |&m| -> Result<LsqRow> {
        let nodes = NodeSet::preset(preset, m)?;
        let n = rule.degree(&w, m);
        let kappa = condition_number_inf(&nodes, n, 20 * m)?.kappa_inf;
        let probe = 20 * m + 1000;
        let err = |f: fn(f64) -> f64| -> Result<f64> {
            let samples: Vec<f64> = nodes.points().iter().map(|&x| f(x)).collect();
            Ok(sup_error(&nodes, &fit(&nodes, n, &samples)?, f, probe))
        };
        Ok(LsqRow {
            m,
            n,
            kappa,
            err_exp: err(f64::exp)?,
            err_runge: err(runge)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.m, r.n));
    Ok(rows)
}

pub fn lsq_csv(rows: &[LsqRow]) -> String {
    let mut out = String::from("M,N,kappa,sup_error_exp,sup_error_runge\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.m, r.n, r.kappa, r.err_exp, r.err_runge
        );
    }
    out
}

/// Node layouts with their CDF values, one block per preset.
pub fn node_layouts(presets: &[Preset], big_m: usize) -> Result<String> {
    let mut out = String::from("preset,m,x,theta,cdf\n");
    for &p in presets {
        let w = WeightSpec::preset(p);
        let nodes = NodeSet::from_weight(&w, big_m)?;
        for (m, (&x, &t)) in nodes.points().iter().zip(nodes.angles()).enumerate() {
            let _ = writeln!(out, "{p},{m},{x},{t},{}", w.cdf(x)?);
        }
    }
    Ok(out)
}

/// The maximal polynomial sampled on `[-1, 1]` (`kind = curve`) and at the
/// nodes (`kind = grid`).
pub fn maximal_portrait(
    preset: Preset,
    big_m: usize,
    n: usize,
    samples: usize,
    opts: &BOptions,
) -> Result<String> {
    let nodes = NodeSet::preset(preset, big_m)?;
    let r = compute_b(&nodes, n, opts)?;
    let mut out = String::from("kind,x,p\n");
    let samples = samples.max(2);
    for i in 0..samples {
        let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        let _ = writeln!(out, "curve,{x},{}", r.polynomial.eval(x));
    }
    for &x in nodes.points() {
        let _ = writeln!(out, "grid,{x},{}", r.polynomial.eval(x));
    }
    Ok(out)
}

/// The lower-bound witness sampled on `[-1, 1]` and at the nodes, plus the
/// level `Q` as `kind = q`.
pub fn witness_portrait(preset: Preset, big_m: usize, n: usize, samples: usize) -> Result<String> {
    let nodes = NodeSet::preset(preset, big_m)?;
    let w = witness_polynomial(&nodes, n, Side::Minus)?;
    let mut out = String::from("kind,x,p\n");
    let samples = samples.max(2);
    for i in 0..samples {
        let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        let _ = writeln!(out, "curve,{x},{}", w.poly.eval(x));
    }
    for &x in nodes.points() {
        let _ = writeln!(out, "grid,{x},{}", w.poly.eval(x));
    }
    let _ = writeln!(out, "q,{},{}", w.probe, 10f64.powf(w.log10_q));
    Ok(out)
}

fn default_threshold() -> f64 {
    10.0
}

fn default_cap() -> usize {
    1 << 16
}

fn default_samples() -> usize {
    1001
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub name: String,
    pub preset: Preset,
    pub ratio: f64,
    pub m_list: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub name: String,
    pub preset: Preset,
    pub n_list: Vec<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    pub name: String,
    pub preset: Preset,
    pub m_list: Vec<usize>,
    pub n_list: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemezConfig {
    pub name: String,
    pub preset: Preset,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub interval: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsqConfig {
    pub name: String,
    pub preset: Preset,
    pub m_list: Vec<usize>,
    pub degree: DegreeRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodesConfig {
    pub name: String,
    pub presets: Vec<Preset>,
    #[serde(rename = "M")]
    pub big_m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    pub name: String,
    pub preset: Preset,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// Parameter blocks for every experiment, keyed by output name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub nodes: Vec<NodesConfig>,
    #[serde(default)]
    pub growth: Vec<GrowthConfig>,
    #[serde(default)]
    pub scaling: Vec<ScalingConfig>,
    #[serde(default)]
    pub contour: Vec<ContourConfig>,
    #[serde(default)]
    pub remez: Vec<RemezConfig>,
    #[serde(default)]
    pub lsq: Vec<LsqConfig>,
    #[serde(default)]
    pub maximal: Vec<PortraitConfig>,
    #[serde(default)]
    pub witness: Vec<PortraitConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    fn names(&self) -> Vec<(&'static str, &str)> {
        let mut v: Vec<(&'static str, &str)> = Vec::new();
        v.extend(self.nodes.iter().map(|c| ("nodes", c.name.as_str())));
        v.extend(self.growth.iter().map(|c| ("growth", c.name.as_str())));
        v.extend(self.scaling.iter().map(|c| ("scaling", c.name.as_str())));
        v.extend(self.contour.iter().map(|c| ("contour", c.name.as_str())));
        v.extend(self.remez.iter().map(|c| ("remez", c.name.as_str())));
        v.extend(self.lsq.iter().map(|c| ("lsq", c.name.as_str())));
        v.extend(self.maximal.iter().map(|c| ("maximal", c.name.as_str())));
        v.extend(self.witness.iter().map(|c| ("witness", c.name.as_str())));
        v
    }

    fn validate(&self) -> Result<()> {
        let mut names: Vec<&str> = self.names().into_iter().map(|(_, n)| n).collect();
        if let Some(bad) = names.iter().find(|n| {
            n.is_empty()
                || !n
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        }) {
            return Err(Error::Config(format!("invalid experiment name `{bad}`")));
        }
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "duplicate experiment name `{}`",
                w[0]
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, as lowercase hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub name: String,
    pub kind: String,
    pub file: String,
    pub rows: usize,
    /// Fitted quantities for scaling and convergence runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub version: u32,
    pub outputs: Vec<OutputEntry>,
}

/// Runs every experiment whose name matches `only` (all when `None`) and
/// writes `<name>.csv` files plus `manifest.json` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, only: Option<&str>) -> Result<Manifest> {
    let known = cfg.names();
    if let Some(o) = only {
        if !known.iter().any(|(kind, name)| *name == o || *kind == o) {
            return Err(Error::InvalidArgument(format!(
                "no experiment named `{o}` in the config"
            )));
        }
    }
    let wanted = |kind: &str, name: &str| only.is_none_or(|o| o == name || o == kind);
    fs::create_dir_all(out_dir)?;
    let opts = BOptions::default();
    let mut outputs = Vec::new();
    let mut emit =
        |name: &str, kind: &str, csv: String, summary: Option<serde_json::Value>| -> Result<()> {
            let file = format!("{name}.csv");
            fs::write(out_dir.join(&file), &csv)?;
            outputs.push(OutputEntry {
                name: name.to_string(),
                kind: kind.to_string(),
                file,
                rows: csv.lines().count().saturating_sub(1),
                summary,
            });
            Ok(())
        };
    for c in cfg.nodes.iter().filter(|c| wanted("nodes", &c.name)) {
        emit(&c.name, "nodes", node_layouts(&c.presets, c.big_m)?, None)?;
    }
    for c in cfg.growth.iter().filter(|c| wanted("growth", &c.name)) {
        let rows = growth_sweep(c.preset, c.ratio, &c.m_list, &opts)?;
        emit(&c.name, "growth", growth_csv(&rows), None)?;
    }
    for c in cfg.scaling.iter().filter(|c| wanted("scaling", &c.name)) {
        let fit = scaling_fit(c.preset, &c.n_list, c.threshold, c.cap, &opts.remez)?;
        let summary = serde_json::json!({
            "preset": fit.preset,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "linear_c": fit.linear_c,
        });
        emit(&c.name, "scaling", scaling_csv(&fit), Some(summary))?;
    }
    for c in cfg.contour.iter().filter(|c| wanted("contour", &c.name)) {
        let rows = contour_grid(c.preset, &c.m_list, &c.n_list, &opts)?;
        emit(&c.name, "contour", contour_csv(&rows), None)?;
    }
    for c in cfg.remez.iter().filter(|c| wanted("remez", &c.name)) {
        let run = remez_convergence(c.preset, c.big_m, c.n, c.interval)?;
        let summary = serde_json::json!({
            "first_iterations": run.first_iterations,
            "second_iterations": run.second_iterations,
            "max_difference": run.max_difference,
            "local_max": run.local_max,
        });
        emit(&c.name, "remez", run.csv, Some(summary))?;
    }
    for c in cfg.lsq.iter().filter(|c| wanted("lsq", &c.name)) {
        let rows = lsq_stability_sweep(c.preset, &c.m_list, c.degree)?;
        emit(&c.name, "lsq", lsq_csv(&rows), None)?;
    }
    for c in cfg.maximal.iter().filter(|c| wanted("maximal", &c.name)) {
        emit(
            &c.name,
            "maximal",
            maximal_portrait(c.preset, c.big_m, c.n, c.samples, &opts)?,
            None,
        )?;
    }
    for c in cfg.witness.iter().filter(|c| wanted("witness", &c.name)) {
        emit(
            &c.name,
            "witness",
            witness_portrait(c.preset, c.big_m, c.n, c.samples)?,
            None,
        )?;
    }
    let manifest = Manifest {
        config_hash: cfg.hash(),
        version: cfg.version,
        outputs,
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
version = 1

[[growth]]
name = "growth_u"
preset = "U"
ratio = 0.5
m_list = [8, 12]

[[lsq]]
name = "lsq_u"
preset = "U"
m_list = [16]
degree = { rule = "sqrt" }
"#;

    #[test]
    fn config_round_trip_and_hash() {
        let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
        assert_eq!(cfg.growth[0].m_list, vec![8, 12]);
        assert_eq!(cfg.lsq[0].degree, DegreeRule::Sqrt);
        let h = cfg.hash();
        assert_eq!(h.len(), 64);
        assert_eq!(h, ExperimentConfig::from_toml(SMALL).unwrap().hash());
    }

    #[test]
    fn unknown_keys_and_duplicates_are_rejected() {
        assert!(ExperimentConfig::from_toml("version = 1\nbogus = 3\n").is_err());
        let dup = "version = 1\n[[growth]]\nname='a'\npreset='U'\nratio=0.5\nm_list=[4]\n[[contour]]\nname='a'\npreset='U'\nm_list=[4]\nn_list=[2]\n";
        assert!(matches!(
            ExperimentConfig::from_toml(dup),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_degree_cell_is_zero() {
        let rows = contour_grid(Preset::U, &[6], &[0, 3], &BOptions::default()).unwrap();
        assert_eq!(rows[0].log10_b, Some(0.0));
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn fits_recover_known_rates() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let (s, i) = loglog_slope(&xs, &ys);
        assert!((s - 1.5).abs() < 1e-12);
        assert!((i - 3f64.ln()).abs() < 1e-12);
        assert!((correlation(&xs, &xs.map(|x| 2.0 - x)) + 1.0).abs() < 1e-12);
    }
}
