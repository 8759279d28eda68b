//! Exchange algorithms for `B(M, N, x)` and the maximal polynomial.
//!
//! On a subinterval `[x_m, x_{m+1}]` the maximal value is `min_Y L_Y(x)` over
//! reference sets `Y` of `N+1` grid points containing both ends. Each
//! exchange swaps a violating grid point into `Y` and lowers `L_Y` there.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_report, zeta_upper_bound};
use crate::error::{Error, Result};
use crate::mockcheb::nearest_chebyshev_indices;
use crate::nodes::NodeSet;
use crate::poly::{alternating_values, barycentric_weights, BaryPoly, Extremum};
use crate::weight::WeightSpec;

/// Single or multiple exchanges per iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    First,
    #[default]
    Second,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::First => "first",
            Variant::Second => "second",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "first" | "1" => Ok(Variant::First),
            "second" | "2" => Ok(Variant::Second),
            _ => Err(Error::InvalidArgument(format!("unknown variant `{s}`"))),
        }
    }
}

/// Starting reference set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Init {
    /// Nodes nearest the second-kind Chebyshev points, adjusted to hold the
    /// anchor pair.
    #[default]
    MockChebyshev,
    /// Uniformly random subset, seeded per subinterval.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemezOptions {
    pub variant: Variant,
    pub init: Init,
    /// Stop once `max_j |p(x_j)| <= 1 + tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Abort when `L_Y` on the grid exceeds this.
    pub lebesgue_limit: f64,
}

impl Default for RemezOptions {
    fn default() -> Self {
        RemezOptions {
            variant: Variant::Second,
            init: Init::MockChebyshev,
            tol: 1e-9,
            max_iters: 10_000,
            lebesgue_limit: 1e16,
        }
    }
}

impl RemezOptions {
    pub fn with_variant(variant: Variant) -> Self {
        RemezOptions {
            variant,
            ..Self::default()
        }
    }
}

/// Options for the sweep over all subintervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BOptions {
    pub remez: RemezOptions,
    /// Solve half the subintervals when the nodes are symmetric.
    pub symmetry: bool,
    /// Seed each subinterval with its left neighbour's solution. Forces a
    /// sequential sweep.
    pub warm_start: bool,
}

impl Default for BOptions {
    fn default() -> Self {
        BOptions {
            remez: RemezOptions::default(),
            symmetry: true,
            warm_start: true,
        }
    }
}

/// `N+1` grid indices containing the anchor pair `(m, m+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSet {
    pub indices: Vec<usize>,
    /// The subinterval `m`.
    pub anchor: usize,
    /// Position of `m` within `indices`.
    pub n_anchor: usize,
    pub weights: Vec<f64>,
}

impl ReferenceSet {
    pub fn new(nodes: &NodeSet, indices: Vec<usize>, anchor: usize) -> Result<Self> {
        let big_m = nodes.intervals();
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.last().is_some_and(|&i| i > big_m) {
            return Err(Error::InvalidArgument(
                "reference indices must be strictly increasing and within 0..=M".into(),
            ));
        }
        let n_anchor = indices
            .iter()
            .position(|&i| i == anchor)
            .filter(|&p| indices.get(p + 1) == Some(&(anchor + 1)))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "reference set must contain {anchor} and {}",
                    anchor + 1
                ))
            })?;
        let pts: Vec<f64> = indices.iter().map(|&i| nodes.x(i)).collect();
        Ok(ReferenceSet {
            weights: barycentric_weights(&pts),
            indices,
            anchor,
            n_anchor,
        })
    }

    pub fn points(&self, nodes: &NodeSet) -> Vec<f64> {
        self.indices.iter().map(|&i| nodes.x(i)).collect()
    }

    /// `p_{Y,n}`: `+1` on the anchor pair, alternating away from it.
    pub fn polynomial(&self, nodes: &NodeSet) -> BaryPoly {
        let len = self.indices.len();
        if len == 1 {
            return BaryPoly::new(self.points(nodes), vec![1.0]).expect("single node");
        }
        BaryPoly::from_parts(
            self.points(nodes),
            alternating_values(len, self.n_anchor),
            self.weights.clone(),
        )
    }

    /// Moves the anchor from `m` to `m + 1`, keeping the rest of the set.
    fn shifted_right(&self, nodes: &NodeSet) -> ReferenceSet {
        let m = self.anchor + 1;
        let mut idx = self.indices.clone();
        if !idx.contains(&(m + 1)) {
            let p = idx
                .iter()
                .position(|&i| i == m)
                .expect("old anchor pair present");
            if p + 1 < idx.len() {
                idx[p + 1] = m + 1;
            } else {
                idx.remove(0);
                idx.push(m + 1);
            }
        }
        ReferenceSet::new(nodes, idx, m).expect("shifted set keeps its anchor pair")
    }

    /// The reflected set for subinterval `M - 1 - m`.
    fn mirrored(&self, nodes: &NodeSet) -> ReferenceSet {
        let big_m = nodes.intervals();
        let idx: Vec<usize> = self.indices.iter().rev().map(|&i| big_m - i).collect();
        ReferenceSet::new(nodes, idx, big_m - 1 - self.anchor)
            .expect("mirror keeps the anchor pair")
    }
}

/// Per-iteration record of one subinterval solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RemezTrace {
    pub iterations: usize,
    /// `L_Y` at the subinterval midpoint, one entry per reference set visited.
    pub lvalues: Vec<f64>,
    /// `L_Y - 1` at the same point. Near a node `L_Y` sits within a few ulps
    /// of one, so progress is only visible here.
    pub excess: Vec<f64>,
    /// `max_j |p(x_j)|` for each visited reference set.
    pub grid_max: Vec<f64>,
    /// `(removed, added)` grid indices per iteration.
    pub exchanges: Vec<Vec<(usize, usize)>>,
    pub converged: bool,
    pub failure_reason: Option<String>,
}

impl RemezTrace {
    /// CSV with header `iteration,lvalue,grid_max,exchanges`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,lvalue,grid_max,exchanges\n");
        for (i, (l, g)) in self.lvalues.iter().zip(&self.grid_max).enumerate() {
            let ex = self.exchanges.get(i).map_or(0, Vec::len);
            out.push_str(&format!("{i},{l},{g},{ex}\n"));
        }
        out
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.excess.windows(2).all(|w| w[1] < w[0])
    }
}

/// Solution on one subinterval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subinterval {
    pub m: usize,
    /// Location and value of the maximum of `B(M, N, ·)` on `[x_m, x_{m+1}]`.
    pub local: Extremum,
    pub reference: ReferenceSet,
    pub trace: RemezTrace,
    pub poly: BaryPoly,
}

struct Evaluation {
    weights: Vec<f64>,
    values: Vec<f64>,
    probe: f64,
    /// `probe - 1` without the cancellation.
    excess: f64,
    /// `p(x_j)` on the whole grid, exact at reference points.
    grid: Vec<f64>,
    grid_lebesgue: f64,
}

fn evaluate(pts: &[f64], idx: &[usize], n_anchor: usize, probe: f64) -> Evaluation {
    let y: Vec<f64> = idx.iter().map(|&i| pts[i]).collect();
    let weights = barycentric_weights(&y);
    let values = alternating_values(y.len(), n_anchor);
    let mut grid = vec![0.0; pts.len()];
    let mut grid_lebesgue: f64 = 1.0;
    let mut next = 0;
    for (j, &x) in pts.iter().enumerate() {
        if next < idx.len() && idx[next] == j {
            grid[j] = values[next];
            next += 1;
            continue;
        }
        let (mut num, mut den, mut abs) = (0.0, 0.0, 0.0);
        for ((&yk, &wk), &vk) in y.iter().zip(&weights).zip(&values) {
            let t = wk / (x - yk);
            num += t * vk;
            den += t;
            abs += t.abs();
        }
        grid[j] = num / den;
        grid_lebesgue = grid_lebesgue.max(abs / den.abs());
    }
    // the anchor pair carries +1; the -1 terms all share one sign in the gap
    let (mut minus, mut total) = (0.0, 0.0);
    for ((&yk, &wk), &vk) in y.iter().zip(&weights).zip(&values) {
        let t = wk / (probe - yk);
        total += t;
        if vk < 0.0 {
            minus += t;
        }
    }
    let excess = -2.0 * minus / total;
    let probe = BaryPoly::from_parts(y, values.clone(), weights.clone()).eval(probe);
    Evaluation {
        weights,
        values,
        probe,
        excess,
        grid,
        grid_lebesgue,
    }
}

/// Position in `idx` that the violator `j` replaces, following the sign rules.
fn replaced_position(idx: &[usize], values: &[f64], j: usize, pj: f64) -> usize {
    let last = idx.len() - 1;
    let k = idx.partition_point(|&i| i < j);
    let s = pj.signum();
    if k == 0 {
        if s == values[0] {
            0
        } else {
            last
        }
    } else if k > last {
        if s == values[last] {
            last
        } else {
            0
        }
    } else if s == values[k - 1] {
        k - 1
    } else {
        k
    }
}

fn apply(idx: &[usize], moves: &[(usize, usize)]) -> Vec<usize> {
    let mut out = idx.to_vec();
    for &(r, j) in moves {
        out[r] = j;
    }
    out.sort_unstable();
    out
}

fn initial_indices(nodes: &NodeSet, n: usize, m: usize, init: Init) -> Vec<usize> {
    let big_m = nodes.intervals();
    match init {
        Init::MockChebyshev => {
            let mut set: Vec<usize> = nearest_chebyshev_indices(nodes, n);
            for a in [m, m + 1] {
                if let Err(p) = set.binary_search(&a) {
                    set.insert(p, a);
                }
            }
            // drop the non-anchor points nearest the anchor pair
            while set.len() > n + 1 {
                let (p, _) = set
                    .iter()
                    .enumerate()
                    .filter(|&(_, &i)| i != m && i != m + 1)
                    .min_by_key(|&(_, &i)| if i < m { m - i } else { i - m - 1 })
                    .expect("more than two points");
                set.remove(p);
            }
            set
        }
        Init::Random { seed } => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let others: Vec<usize> = (0..=big_m).filter(|&i| i != m && i != m + 1).collect();
            let mut set: Vec<usize> = rand::seq::index::sample(&mut rng, others.len(), n - 1)
                .into_iter()
                .map(|k| others[k])
                .chain([m, m + 1])
                .collect();
            set.sort_unstable();
            set
        }
    }
}

fn check_args(nodes: &NodeSet, n: usize, m: usize) -> Result<()> {
    let big_m = nodes.intervals();
    if n > big_m {
        return Err(Error::InvalidArgument(format!(
            "need N <= M, got N = {n}, M = {big_m}"
        )));
    }
    if m >= big_m {
        return Err(Error::InvalidArgument(format!(
            "subinterval {m} out of range 0..{big_m}"
        )));
    }
    Ok(())
}

fn constant_solution(nodes: &NodeSet, m: usize) -> Subinterval {
    let x = nodes.x(m);
    Subinterval {
        m,
        local: Extremum { x, value: 1.0 },
        reference: ReferenceSet {
            indices: vec![m],
            anchor: m,
            n_anchor: 0,
            weights: vec![1.0],
        },
        trace: RemezTrace {
            converged: true,
            ..RemezTrace::default()
        },
        poly: BaryPoly::new(vec![x], vec![1.0]).expect("single node"),
    }
}

/// Runs the exchange on `[x_m, x_{m+1}]` until the alternating polynomial
/// of the reference set is bounded by `1 + tol` on the whole grid.
pub fn solve_subinterval(
    nodes: &NodeSet,
    n: usize,
    m: usize,
    opts: &RemezOptions,
    init: Option<&ReferenceSet>,
) -> Result<Subinterval> {
    check_args(nodes, n, m)?;
    if n == 0 {
        return Ok(constant_solution(nodes, m));
    }
    let pts = nodes.points();
    let mut idx = match init {
        Some(r) if r.anchor == m && r.indices.len() == n + 1 => r.indices.clone(),
        Some(_) => {
            return Err(Error::InvalidArgument(
                "initial reference set does not match the subinterval or degree".into(),
            ))
        }
        None => initial_indices(nodes, n, m, opts.init),
    };
    let anchor_pos = |idx: &[usize]| idx.partition_point(|&i| i < m);
    let mut n_anchor = anchor_pos(&idx);
    let probe_x = 0.5 * (pts[m] + pts[m + 1]);
    let mut trace = RemezTrace::default();
    let mut ev = evaluate(pts, &idx, n_anchor, probe_x);
    let fail = |trace: &mut RemezTrace, reason: String| {
        trace.failure_reason = Some(reason.clone());
        Error::NonConvergence {
            interval: m,
            iterations: trace.iterations,
            reason,
        }
    };
    loop {
        trace.lvalues.push(ev.probe);
        trace.excess.push(ev.excess);
        if !(ev.grid_lebesgue <= opts.lebesgue_limit) {
            trace.failure_reason = Some("ill-conditioned reference set".into());
            return Err(Error::Conditioning {
                interval: m,
                lebesgue: ev.grid_lebesgue,
            });
        }
        let bound = 1.0 + opts.tol;
        let mut grid_max: f64 = 0.0;
        // violators with their region: 0 left of y_0, k for (y_{k-1}, y_k)
        let mut by_region: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
        let mut violators: Vec<(usize, f64)> = Vec::new();
        for (j, &pj) in ev.grid.iter().enumerate() {
            grid_max = grid_max.max(pj.abs());
            if pj.abs() > bound {
                violators.push((j, pj));
                let region = idx.partition_point(|&i| i < j);
                let e = by_region.entry(region).or_insert((j, pj));
                if pj.abs() > e.1.abs() {
                    *e = (j, pj);
                }
            }
        }
        trace.grid_max.push(grid_max);
        if violators.is_empty() {
            trace.converged = true;
            break;
        }
        if trace.iterations >= opts.max_iters {
            return Err(fail(&mut trace, "iteration limit reached".into()));
        }
        let admissible = |j: usize, pj: f64| {
            let r = replaced_position(&idx, &ev.values, j, pj);
            (r != n_anchor && r != n_anchor + 1).then_some(r)
        };
        // largest violation first, smallest index on ties
        violators.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        let single: Option<(usize, usize)> = violators
            .iter()
            .find_map(|&(j, pj)| admissible(j, pj).map(|r| (r, j)));
        let Some(single) = single else {
            return Err(fail(
                &mut trace,
                "every violation would remove an anchor".into(),
            ));
        };
        let mut moves = vec![single];
        if opts.variant == Variant::Second {
            let mut chosen: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
            for &(j, pj) in by_region.values() {
                if let Some(r) = admissible(j, pj) {
                    let e = chosen.entry(r).or_insert((j, pj));
                    if pj.abs() > e.1.abs() {
                        *e = (j, pj);
                    }
                }
            }
            if chosen.len() > 1 {
                moves = chosen.into_iter().map(|(r, (j, _))| (r, j)).collect();
            }
        }
        let mut next = apply(&idx, &moves);
        let mut next_anchor = anchor_pos(&next);
        let mut next_ev = evaluate(pts, &next, next_anchor, probe_x);
        if moves.len() > 1 && !(next_ev.excess < ev.excess) {
            moves = vec![single];
            next = apply(&idx, &moves);
            next_anchor = anchor_pos(&next);
            next_ev = evaluate(pts, &next, next_anchor, probe_x);
        }
        if !(next_ev.excess < ev.excess) {
            return Err(fail(
                &mut trace,
                format!("exchange no longer lowers L_Y (grid max {grid_max:.3e})"),
            ));
        }
        trace
            .exchanges
            .push(moves.iter().map(|&(r, j)| (idx[r], j)).collect());
        trace.iterations += 1;
        idx = next;
        n_anchor = next_anchor;
        ev = next_ev;
    }
    let y: Vec<f64> = idx.iter().map(|&i| pts[i]).collect();
    let poly = BaryPoly::from_parts(y, ev.values, ev.weights.clone());
    let local = poly.max_abs_on(pts[m], pts[m + 1]);
    Ok(Subinterval {
        m,
        local,
        reference: ReferenceSet {
            indices: idx,
            anchor: m,
            n_anchor,
            weights: ev.weights,
        },
        trace,
        poly,
    })
}

/// Warm-started solve that falls back to the default start if the seeded
/// run fails.
fn solve_seeded(
    nodes: &NodeSet,
    n: usize,
    m: usize,
    opts: &RemezOptions,
    seed: Option<&ReferenceSet>,
) -> Result<Subinterval> {
    match seed {
        Some(s) => solve_subinterval(nodes, n, m, opts, Some(s))
            .or_else(|_| solve_subinterval(nodes, n, m, opts, None)),
        None => solve_subinterval(nodes, n, m, opts, None),
    }
}

/// `B(M, N, x)`.
pub fn compute_b_point(nodes: &NodeSet, n: usize, x: f64, opts: &RemezOptions) -> Result<f64> {
    let m = nodes.bracket(x)?;
    if n > nodes.intervals() {
        return Err(Error::InvalidArgument("need N <= M".into()));
    }
    if n == 0 || nodes.node_index(x).is_some() {
        return Ok(1.0);
    }
    let sol = solve_subinterval(nodes, n, m, opts, None)?;
    Ok(sol.poly.eval(x).abs())
}

/// Summary of one subinterval inside a full sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub m: usize,
    pub local_max: f64,
    pub argmax_x: f64,
    pub reference: ReferenceSet,
    pub trace: RemezTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalFailure {
    pub m: usize,
    pub reason: String,
}

/// `B(M, N)` with its maximal polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalResult {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub b: f64,
    pub log10_b: f64,
    pub argmax_x: f64,
    pub argmax_interval: usize,
    pub per_interval: Vec<IntervalResult>,
    pub polynomial: BaryPoly,
    pub failures: Vec<IntervalFailure>,
}

#[derive(Serialize)]
struct IntervalRow {
    m: usize,
    local_max: f64,
    argmax_x: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "log10_B")]
    log10_b: f64,
    argmax_x: f64,
    argmax_interval: usize,
    partial: bool,
    failures: &'a [IntervalFailure],
    per_interval: Vec<IntervalRow>,
}

impl MaximalResult {
    /// True if some subinterval failed and `b` is a lower estimate.
    pub fn partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ResultJson {
            m: self.m,
            n: self.n,
            b: self.b,
            log10_b: self.log10_b,
            argmax_x: self.argmax_x,
            argmax_interval: self.argmax_interval,
            partial: self.partial(),
            failures: &self.failures,
            per_interval: self
                .per_interval
                .iter()
                .map(|r| IntervalRow {
                    m: r.m,
                    local_max: r.local_max,
                    argmax_x: r.argmax_x,
                    iterations: r.trace.iterations,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// CSV with header `m,local_max,iterations`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,local_max,iterations\n");
        for r in &self.per_interval {
            out.push_str(&format!("{},{},{}\n", r.m, r.local_max, r.trace.iterations));
        }
        out
    }
}

fn map_intervals<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Number of subintervals to solve; the rest follow by reflection.
fn solved_count(nodes: &NodeSet, symmetry: bool) -> (usize, bool) {
    let big_m = nodes.intervals();
    if symmetry && nodes.is_symmetric() {
        (big_m.div_ceil(2), true)
    } else {
        (big_m, false)
    }
}

/// `B(M, N)`: the exchange on every subinterval, then the largest local
/// maximum (smallest `m` on ties).
pub fn compute_b(nodes: &NodeSet, n: usize, opts: &BOptions) -> Result<MaximalResult> {
    let big_m = nodes.intervals();
    if n > big_m {
        return Err(Error::InvalidArgument(format!(
            "need N <= M, got N = {n}, M = {big_m}"
        )));
    }
    let (count, mirrored) = solved_count(nodes, opts.symmetry);
    let solved: Vec<Result<Subinterval>> = if opts.warm_start {
        let mut out = Vec::with_capacity(count);
        let mut prev: Option<ReferenceSet> = None;
        for m in 0..count {
            let seed = prev
                .as_ref()
                .filter(|r| n > 0 && r.anchor + 1 == m && r.indices.len() == n + 1)
                .map(|r| r.shifted_right(nodes));
            let res = solve_seeded(nodes, n, m, &opts.remez, seed.as_ref());
            prev = res.as_ref().ok().map(|s| s.reference.clone());
            out.push(res);
        }
        out
    } else {
        map_intervals(count, |m| solve_subinterval(nodes, n, m, &opts.remez, None))
    };

    let mut slots: Vec<Option<(IntervalResult, BaryPoly)>> = vec![None; big_m];
    let mut failures = Vec::new();
    let mut first_err = None;
    for (m, res) in solved.into_iter().enumerate() {
        match res {
            Ok(s) => {
                let r = IntervalResult {
                    m,
                    local_max: s.local.abs(),
                    argmax_x: s.local.x,
                    reference: s.reference,
                    trace: s.trace,
                };
                if mirrored && big_m - 1 - m != m {
                    let twin = IntervalResult {
                        m: big_m - 1 - m,
                        local_max: r.local_max,
                        argmax_x: -r.argmax_x,
                        reference: if n == 0 {
                            constant_solution(nodes, big_m - 1 - m).reference
                        } else {
                            r.reference.mirrored(nodes)
                        },
                        trace: r.trace.clone(),
                    };
                    slots[big_m - 1 - m] = Some((twin, s.poly.mirrored()));
                }
                slots[m] = Some((r, s.poly));
            }
            Err(e) => {
                let reason = e.to_string();
                failures.push(IntervalFailure {
                    m,
                    reason: reason.clone(),
                });
                if mirrored && big_m - 1 - m != m {
                    failures.push(IntervalFailure {
                        m: big_m - 1 - m,
                        reason: format!("mirror of subinterval {m}: {reason}"),
                    });
                }
                first_err.get_or_insert(e);
            }
        }
    }
    failures.sort_by_key(|f| f.m);
    let mut best: Option<(usize, f64, f64, BaryPoly)> = None;
    let mut per_interval = Vec::with_capacity(big_m);
    for slot in slots.into_iter().flatten() {
        let (r, poly) = slot;
        if best.as_ref().is_none_or(|b| r.local_max > b.1) {
            best = Some((r.m, r.local_max, r.argmax_x, poly));
        }
        per_interval.push(r);
    }
    let Some((argmax_interval, b, argmax_x, polynomial)) = best else {
        return Err(first_err.expect("no interval solved and no error recorded"));
    };
    Ok(MaximalResult {
        m: big_m,
        n,
        b,
        log10_b: b.log10(),
        argmax_x,
        argmax_interval,
        per_interval,
        polynomial,
        failures,
    })
}

/// Whether `B(M, N) > threshold`. Each subinterval is first checked with the
/// neighbour's reference set, which gives an upper bound; the exchange runs
/// only where that bound is too weak. Returns early on the first excess.
pub fn b_exceeds(nodes: &NodeSet, n: usize, threshold: f64, opts: &RemezOptions) -> Result<bool> {
    let big_m = nodes.intervals();
    if n > big_m {
        return Err(Error::InvalidArgument("need N <= M".into()));
    }
    if n == 0 {
        return Ok(1.0 > threshold);
    }
    let (count, _) = solved_count(nodes, true);
    let mut prev: Option<ReferenceSet> = None;
    for m in 0..count {
        let seed = match &prev {
            Some(r) => r.shifted_right(nodes),
            None => ReferenceSet::new(nodes, initial_indices(nodes, n, m, opts.init), m)?,
        };
        let upper = seed
            .polynomial(nodes)
            .max_abs_on(nodes.x(m), nodes.x(m + 1))
            .abs();
        if upper <= threshold {
            prev = Some(seed);
            continue;
        }
        let sol = solve_seeded(nodes, n, m, opts, Some(&seed))?;
        if sol.local.abs() > threshold {
            return Ok(true);
        }
        prev = Some(sol.reference);
    }
    Ok(false)
}

/// Outcome of the search for the smallest `M` with `B(M, N) <= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MSearch {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Every `(M, bounded)` pair evaluated, in evaluation order.
    pub checked: Vec<(usize, bool)>,
}

/// Smallest `M >= N` with `B(M, N) <= threshold` for nodes drawn from `w`.
///
/// Brackets by doubling, bisects, then scans a short window below the
/// bisection result in case `B` is not monotone in `M` there.
pub fn smallest_m_for_bounded_b(
    w: &WeightSpec,
    n: usize,
    threshold: f64,
    opts: &RemezOptions,
    cap: usize,
) -> Result<MSearch> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let mut checked = Vec::new();
    let mut bounded = |big_m: usize| -> Result<bool> {
        let nodes = NodeSet::from_weight(w, big_m)?;
        let ok = if zeta_upper_bound(&nodes, n).is_some_and(|u| u <= threshold) {
            true
        } else if bound_report(&nodes, n)?.ln_lower() > threshold.ln() + 1e-9 {
            false
        } else {
            !b_exceeds(&nodes, n, threshold, opts)?
        };
        checked.push((big_m, ok));
        Ok(ok)
    };
    if bounded(n)? {
        return Ok(MSearch { m: n, n, checked });
    }
    let mut lo = n;
    let mut hi = 2 * n;
    loop {
        if hi > cap {
            return Err(Error::SearchCapExceeded { cap });
        }
        if bounded(hi)? {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bounded(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let window = (hi / 50).max(2);
    for big_m in hi.saturating_sub(window).max(n + 1)..hi {
        if bounded(big_m)? {
            hi = big_m;
            break;
        }
    }
    Ok(MSearch { m: hi, n, checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{lebesgue_constant, lebesgue_function};
    use crate::weight::Preset;

    #[test]
    fn interpolation_case_is_forced() {
        let nodes = NodeSet::preset(Preset::U, 6).unwrap();
        let pts = nodes.points().to_vec();
        for m in 0..6 {
            let s = solve_subinterval(&nodes, 6, m, &RemezOptions::default(), None).unwrap();
            assert_eq!(s.trace.iterations, 0);
            let x = 0.5 * (pts[m] + pts[m + 1]);
            assert!((s.poly.eval(x) - lebesgue_function(&pts, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn three_point_lebesgue_constant() {
        let nodes = NodeSet::preset(Preset::U, 2).unwrap();
        let r = compute_b(&nodes, 2, &BOptions::default()).unwrap();
        assert!((r.b - 1.25).abs() < 1e-12);
    }

    #[test]
    fn square_case_matches_lebesgue_constant() {
        let nodes = NodeSet::preset(Preset::U, 12).unwrap();
        let r = compute_b(&nodes, 12, &BOptions::default()).unwrap();
        let lam = lebesgue_constant(nodes.points()).value;
        assert!((r.b - lam).abs() < 1e-10 * lam);
    }

    #[test]
    fn constants_give_one() {
        let nodes = NodeSet::preset(Preset::C2, 7).unwrap();
        assert_eq!(compute_b(&nodes, 0, &BOptions::default()).unwrap().b, 1.0);
        assert_eq!(
            compute_b_point(&nodes, 0, 0.123, &RemezOptions::default()).unwrap(),
            1.0
        );
    }

    #[test]
    fn grid_points_give_one() {
        let nodes = NodeSet::preset(Preset::U, 10).unwrap();
        for m in 0..=10 {
            let v = compute_b_point(&nodes, 4, nodes.x(m), &RemezOptions::default()).unwrap();
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn variants_and_starts_agree() {
        let nodes = NodeSet::preset(Preset::UC, 40).unwrap();
        let a = solve_subinterval(
            &nodes,
            15,
            3,
            &RemezOptions::with_variant(Variant::First),
            None,
        )
        .unwrap();
        let b = solve_subinterval(&nodes, 15, 3, &RemezOptions::default(), None).unwrap();
        let opts = RemezOptions {
            init: Init::Random { seed: 7 },
            ..RemezOptions::default()
        };
        let c = solve_subinterval(&nodes, 15, 3, &opts, None).unwrap();
        for s in [&b, &c] {
            assert!((s.local.abs() - a.local.abs()).abs() < 1e-9 * a.local.abs());
        }
        assert!(a.trace.strictly_decreasing());
    }

    #[test]
    fn converged_polynomial_is_bounded_and_equioscillates() {
        let nodes = NodeSet::preset(Preset::U, 30).unwrap();
        let s = solve_subinterval(&nodes, 12, 1, &RemezOptions::default(), None).unwrap();
        for &x in nodes.points() {
            assert!(s.poly.eval(x).abs() <= 1.0 + 1e-9);
        }
        for &i in &s.reference.indices {
            assert!((s.poly.eval(nodes.x(i)).abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_and_full_sweeps_agree() {
        let nodes = NodeSet::preset(Preset::C2, 21).unwrap();
        let full = compute_b(
            &nodes,
            9,
            &BOptions {
                symmetry: false,
                warm_start: false,
                ..BOptions::default()
            },
        )
        .unwrap();
        let half = compute_b(&nodes, 9, &BOptions::default()).unwrap();
        assert!((full.b - half.b).abs() < 1e-9 * full.b);
        for (a, b) in full.per_interval.iter().zip(&half.per_interval) {
            assert_eq!(a.m, b.m);
            assert!((a.local_max - b.local_max).abs() < 1e-8 * a.local_max);
        }
    }

    #[test]
    fn threshold_predicate_matches_full_computation() {
        let nodes = NodeSet::preset(Preset::U, 40).unwrap();
        for n in [5, 8, 12, 16] {
            let b = compute_b(&nodes, n, &BOptions::default()).unwrap().b;
            let opts = RemezOptions::default();
            assert_eq!(
                b_exceeds(&nodes, n, 10.0, &opts).unwrap(),
                b > 10.0,
                "N = {n}, B = {b}"
            );
        }
    }

    #[test]
    fn warm_reference_shift_keeps_size() {
        let nodes = NodeSet::preset(Preset::U, 10).unwrap();
        let r = ReferenceSet::new(&nodes, vec![0, 2, 3, 9, 10], 2).unwrap();
        let s = r.shifted_right(&nodes);
        assert_eq!(s.indices, vec![0, 2, 3, 4, 10]);
        let r = ReferenceSet::new(&nodes, vec![0, 5, 8, 9], 8).unwrap();
        let s = r.shifted_right(&nodes);
        assert_eq!(s.indices, vec![5, 8, 9, 10]);
    }

    #[test]
    fn progress_below_one_ulp_of_lebesgue_still_counts() {
        // the end gap is ~2e-7 wide, so L_Y at its midpoint is 1 + 7e-12
        let nodes = NodeSet::preset(Preset::OC, 100).unwrap();
        for v in [Variant::First, Variant::Second] {
            let s = solve_subinterval(&nodes, 10, 0, &RemezOptions::with_variant(v), None).unwrap();
            assert!(s.trace.strictly_decreasing());
            assert!(s.trace.excess[0] < 1e-10);
        }
        assert!(!compute_b(&nodes, 10, &BOptions::default())
            .unwrap()
            .partial());
    }
}
