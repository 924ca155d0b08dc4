//! Unrestricted Riemann–Stieltjes sums over boxes, mixed differentials, and
//! the calculus identities built on them.
//!
//! Every integral here is a tagged sum over a tensor partition. Axes split
//! into *Stieltjes* axes, where the integrator contributes a rectangular
//! increment across the cell, and *Lebesgue* axes, where the integrator is
//! evaluated at the tag and the cell width is the measure. A full Stieltjes
//! set is the ordinary `∫ g df`; an empty one is a plain Riemann integral of
//! `g·f`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Differentiable, Integrand, Restrict};
use crate::grid::{locate_breakpoint, rect_increment, rect_increment_on, strides_of, Rect};
use crate::indexkit::{compose, MultiIndexSet, MAX_DIM};
use crate::numeric::{par_sum, CompositeRule};

/// Where inside each cell the integrand is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TagPolicy {
    LowerCorner,
    UpperCorner,
    #[default]
    Midpoint,
    /// Independent uniform tags per axis and cell.
    Randomized {
        seed: u64,
    },
}

/// Refinement ladder and tag choice.
///
/// Level `k` (0-based) of a callable integral uses `base_cells · 2^k` cells
/// per axis. Axes on which an input is a sampled grid use that grid,
/// coarsened by powers of two, with the native grid as the finest level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsOptions {
    pub tags: TagPolicy,
    pub refinements: usize,
    pub base_cells: usize,
    /// Report the Richardson extrapolation of the two finest levels as the
    /// value. The ladder itself is unchanged.
    #[serde(default)]
    pub extrapolate: bool,
}

impl Default for RsOptions {
    fn default() -> Self {
        Self {
            tags: TagPolicy::Midpoint,
            refinements: 4,
            base_cells: 8,
            extrapolate: false,
        }
    }
}

impl RsOptions {
    /// A ladder of `levels` dyadic levels ending at `cells` per axis.
    pub fn finest(cells: usize, levels: usize) -> Self {
        let levels = levels.max(1);
        Self {
            base_cells: (cells >> (levels - 1)).max(1),
            refinements: levels,
            ..Self::default()
        }
    }

    pub fn with_tags(mut self, tags: TagPolicy) -> Self {
        self.tags = tags;
        self
    }

    pub fn with_extrapolation(mut self) -> Self {
        self.extrapolate = true;
        self
    }

    pub(crate) fn finish(&self, r: IntegralResult) -> IntegralResult {
        if self.extrapolate {
            r.extrapolated()
        } else {
            r
        }
    }

    pub fn finest_cells(&self) -> usize {
        self.base_cells << (self.refinements.max(1) - 1)
    }

    fn validate(&self) -> Result<()> {
        if self.refinements == 0 {
            return Err(Error::InvalidParameter("refinements must be at least 1".into()));
        }
        if self.base_cells == 0 {
            return Err(Error::InvalidParameter("base_cells must be at least 1".into()));
        }
        if self.refinements > 24 {
            return Err(Error::InvalidParameter(format!(
                "{} refinement levels is beyond any usable grid",
                self.refinements
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub norm: f64,
    pub value: f64,
}

/// Value at the finest level, the change from the previous level, and the
/// whole ladder from coarse to fine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub levels: Vec<Level>,
}

impl IntegralResult {
    pub fn from_levels(levels: Vec<Level>) -> Result<Self> {
        let last = levels
            .last()
            .ok_or_else(|| Error::InvalidParameter("an integral needs at least one level".into()))?;
        if levels.iter().any(|l| !l.value.is_finite()) {
            return Err(Error::NonFinite("Riemann–Stieltjes sum".into()));
        }
        let error_estimate = match levels.len() {
            1 => 0.0,
            n => (last.value - levels[n - 2].value).abs(),
        };
        Ok(Self {
            value: last.value,
            error_estimate,
            levels,
        })
    }

    /// A value known without discretization (degenerate boxes, corner terms).
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            levels: vec![Level { norm: 0.0, value }],
        }
    }

    pub fn is_exact(&self) -> bool {
        self.levels.len() == 1 && self.levels[0].norm == 0.0
    }

    /// `constant + Σ c_k · part_k`, level by level, aligned at the finest
    /// level. Exact parts contribute the same value to every level.
    pub fn combine(parts: &[(f64, &IntegralResult)], constant: f64) -> Self {
        let ladder = parts
            .iter()
            .filter(|(_, p)| !p.is_exact())
            .map(|(_, p)| p.levels.len())
            .min();
        let Some(n) = ladder else {
            let v = constant + parts.iter().map(|(c, p)| c * p.value).sum::<f64>();
            return Self::exact(v);
        };
        let mut levels = Vec::with_capacity(n);
        for k in 0..n {
            let mut norm: f64 = 0.0;
            let mut acc = crate::numeric::Neumaier::default();
            acc.add(constant);
            for (c, p) in parts {
                if p.is_exact() {
                    acc.add(c * p.value);
                } else {
                    let l = p.levels[p.levels.len() - n + k];
                    norm = norm.max(l.norm);
                    acc.add(c * l.value);
                }
            }
            levels.push(Level {
                norm,
                value: acc.total(),
            });
        }
        let value = levels[n - 1].value;
        let error_estimate = if n > 1 {
            (value - levels[n - 2].value).abs()
        } else {
            0.0
        };
        Self {
            value,
            error_estimate,
            levels,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::combine(&[(c, self)], 0.0)
    }

    /// Richardson extrapolation of the two finest levels for an error that
    /// expands in even powers of the partition norm:
    /// `I_h + (I_h − I_{rh}) / (r² − 1)`. The correction becomes the error
    /// estimate; levels are kept as computed.
    pub fn extrapolated(&self) -> Self {
        let n = self.levels.len();
        if n < 2 {
            return self.clone();
        }
        let (coarse, fine) = (self.levels[n - 2], self.levels[n - 1]);
        if !(fine.norm > 0.0 && coarse.norm > fine.norm) {
            return self.clone();
        }
        let r = coarse.norm / fine.norm;
        let correction = (fine.value - coarse.value) / (r * r - 1.0);
        Self {
            value: fine.value + correction,
            error_estimate: correction.abs(),
            levels: self.levels.clone(),
        }
    }

    /// `|self − other|` at each aligned level, coarse to fine.
    pub fn gaps(&self, other: &IntegralResult) -> Vec<f64> {
        Self::combine(&[(1.0, self), (-1.0, other)], 0.0)
            .levels
            .iter()
            .map(|l| l.value.abs())
            .collect()
    }
}

fn check_dims(s: &[f64], t: &[f64]) -> Result<usize> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: t.len(),
        });
    }
    if s.is_empty() || s.len() > MAX_DIM {
        return Err(Error::DimensionOutOfRange(s.len()));
    }
    if s.iter().chain(t).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("integration bound".into()));
    }
    Ok(s.len())
}

fn require_proper(s: &[f64], t: &[f64]) -> Result<()> {
    check_dims(s, t)?;
    if let Some(a) = s.iter().zip(t).position(|(a, b)| a == b) {
        return Err(Error::EmptyBox(format!("zero width on axis {a}")));
    }
    Ok(())
}

/// Breakpoints per axis for every level of the ladder on the oriented box.
pub(crate) fn build_ladder(
    lo: &[f64],
    hi: &[f64],
    natives: &[Option<&[f64]>],
    opts: &RsOptions,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let dim = lo.len();
    let mut sliced: Vec<Option<Vec<f64>>> = Vec::with_capacity(dim);
    let mut levels = opts.refinements;
    for a in 0..dim {
        match natives[a] {
            Some(ax) => {
                let i = locate_breakpoint(ax, lo[a]);
                let j = locate_breakpoint(ax, hi[a]);
                let (Some(i), Some(j)) = (i, j) else {
                    return Err(Error::Misaligned(format!(
                        "box [{}, {}] on axis {a} does not end on grid nodes",
                        lo[a], hi[a]
                    )));
                };
                let cells = j - i;
                levels = levels.min(cells.ilog2() as usize + 1);
                sliced.push(Some(ax[i..=j].to_vec()));
            }
            None => sliced.push(None),
        }
    }
    let skipped = opts.refinements - levels;
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let axes = (0..dim)
            .map(|a| match &sliced[a] {
                Some(ax) => coarsen_axis(ax, 1 << (levels - 1 - k)),
                None => {
                    let n = opts.base_cells << (skipped + k);
                    uniform_axis(lo[a], hi[a], n)
                }
            })
            .collect();
        out.push(axes);
    }
    Ok(out)
}

fn coarsen_axis(ax: &[f64], stride: usize) -> Vec<f64> {
    let last = ax.len() - 1;
    let mut out: Vec<f64> = ax.iter().step_by(stride).copied().collect();
    if last % stride != 0 {
        out.push(ax[last]);
    }
    out
}

pub(crate) fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            if k == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / n as f64
            }
        })
        .collect()
}

fn tags_for(xs: &[f64], policy: TagPolicy, level: usize, axis: usize) -> Vec<f64> {
    match policy {
        TagPolicy::LowerCorner => xs[..xs.len() - 1].to_vec(),
        TagPolicy::UpperCorner => xs[1..].to_vec(),
        TagPolicy::Midpoint => xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
        TagPolicy::Randomized { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((level as u64) << 8 | axis as u64);
            xs.windows(2)
                .map(|w| w[0] + rng.random::<f64>() * (w[1] - w[0]))
                .collect()
        }
    }
}

/// Transpose of the backward difference along `axis`: a cell tensor of
/// length `n` on that axis becomes a node tensor of length `n + 1` with
/// `out[j] = in[j-1] − in[j]` (out-of-range entries read as zero).
fn adjoint_difference(values: &[f64], shape: &[usize], axis: usize) -> (Vec<f64>, Vec<usize>) {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let n = shape[axis];
    let mut out = vec![0.0; outer * (n + 1) * inner];
    for o in 0..outer {
        for j in 0..=n {
            let dst = (o * (n + 1) + j) * inner;
            for k in 0..inner {
                let prev = if j > 0 {
                    values[(o * n + j - 1) * inner + k]
                } else {
                    0.0
                };
                let cur = if j < n { values[(o * n + j) * inner + k] } else { 0.0 };
                out[dst + k] = prev - cur;
            }
        }
    }
    let mut next_shape = shape.to_vec();
    next_shape[axis] += 1;
    (out, next_shape)
}

/// One tagged sum `Σ_i h(ξ_i) · [f(ξ_i)]_{cell, S} · ∏_{a∉S} |I_{i,a}|`.
///
/// Evaluated in summation-by-parts form: cell weights are pushed onto the
/// integrator's nodes, so a constant integrand touches only the `2^|S|`
/// corners and reproduces the box bracket exactly.
fn hybrid_level<H, F>(h: &H, f: &F, stieltjes: MultiIndexSet, xs: &[Vec<f64>], taus: &[Vec<f64>]) -> f64
where
    H: Integrand + ?Sized,
    F: Integrand + ?Sized,
{
    let dim = xs.len();
    let cells: Vec<usize> = xs.iter().map(|x| x.len() - 1).collect();
    let ncell: usize = cells.iter().product();
    let weights: Vec<f64> = (0..ncell)
        .into_par_iter()
        .map(|flat| {
            let mut p = [0.0; MAX_DIM];
            let mut w = 1.0;
            let mut rest = flat;
            for a in (0..dim).rev() {
                let i = rest % cells[a];
                rest /= cells[a];
                p[a] = taus[a][i];
                if !stieltjes.contains(a) {
                    w *= xs[a][i + 1] - xs[a][i];
                }
            }
            w * h.eval(&p[..dim])
        })
        .collect();
    let mut node_weights = weights;
    let mut shape = cells;
    for a in stieltjes.axes() {
        let (w, s) = adjoint_difference(&node_weights, &shape, a);
        node_weights = w;
        shape = s;
    }
    let coords: Vec<&[f64]> = (0..dim)
        .map(|a| {
            if stieltjes.contains(a) {
                xs[a].as_slice()
            } else {
                taus[a].as_slice()
            }
        })
        .collect();
    let strides = strides_of(&shape);
    par_sum(node_weights.len(), |flat| {
        let c = node_weights[flat];
        if c == 0.0 {
            return 0.0;
        }
        let mut p = [0.0; MAX_DIM];
        for a in 0..dim {
            p[a] = coords[a][(flat / strides[a]) % shape[a]];
        }
        c * f.eval(&p[..dim])
    })
}

/// The general tagged-sum integral with Stieltjes axes `stieltjes` over the
/// box from `s` to `t`. Reversed axes contribute a factor `-1` each; a
/// degenerate box gives an exact zero.
pub fn hybrid_integral<H, F>(
    h: &H,
    f: &F,
    stieltjes: MultiIndexSet,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<IntegralResult>
where
    H: Integrand + ?Sized,
    F: Integrand + ?Sized,
{
    let dim = check_dims(s, t)?;
    opts.validate()?;
    if stieltjes.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: stieltjes.dim(),
        });
    }
    if s.iter().zip(t).any(|(a, b)| a == b) {
        return Ok(IntegralResult::exact(0.0));
    }
    let (rect, sign) = Rect::new(s.to_vec(), t.to_vec())?.oriented();
    for corner in [&rect.lower, &rect.upper] {
        if !h.contains(corner) || !f.contains(corner) {
            return Err(Error::OutsideDomain { point: corner.clone() });
        }
    }
    let natives: Vec<Option<&[f64]>> = (0..dim)
        .map(|a| f.native_axis(a).or_else(|| h.native_axis(a)))
        .collect();
    let ladder = build_ladder(&rect.lower, &rect.upper, &natives, opts)?;
    let mut levels = Vec::with_capacity(ladder.len());
    for (k, xs) in ladder.iter().enumerate() {
        let taus: Vec<Vec<f64>> = xs
            .iter()
            .enumerate()
            .map(|(a, ax)| tags_for(ax, opts.tags, k, a))
            .collect();
        let value = sign * hybrid_level(h, f, stieltjes, xs, &taus);
        let norm = xs
            .iter()
            .flat_map(|ax| ax.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max);
        levels.push(Level { norm, value });
    }
    Ok(opts.finish(IntegralResult::from_levels(levels)?))
}

/// `∫_s^t g df` as a limit of tagged sums `Σ g(ξ_i)·[f]_{cell i}`.
pub fn rs_integral<G, F>(g: &G, f: &F, s: &[f64], t: &[f64], opts: &RsOptions) -> Result<IntegralResult>
where
    G: Integrand + ?Sized,
    F: Integrand + ?Sized,
{
    require_proper(s, t)?;
    hybrid_integral(g, f, MultiIndexSet::full(s.len()), s, t, opts)
}

/// `∫_{s_v}^{t_v} [g(r) d_v f(r)]_{s_{-v}}^{t_{-v}}`: the `2^{|-v|}` signed
/// `|v|`-variate integrals with the `-v` coordinates pinned at box corners.
pub fn mixed_integral<G, F>(
    g: &G,
    f: &F,
    v: MultiIndexSet,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<IntegralResult>
where
    G: Integrand + ?Sized,
    F: Integrand + ?Sized,
{
    require_proper(s, t)?;
    mixed_unchecked(g, f, v, s, t, opts)
}

fn mixed_unchecked<G, F>(
    g: &G,
    f: &F,
    v: MultiIndexSet,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<IntegralResult>
where
    G: Integrand + ?Sized,
    F: Integrand + ?Sized,
{
    let dim = s.len();
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    if v.is_empty() {
        return Err(Error::InvalidParameter("mixed differential over the empty set".into()));
    }
    let (sv, tv) = (v.pick(s), v.pick(t));
    let full = MultiIndexSet::full(v.len());
    let mut parts = Vec::new();
    for w in v.complement().subsets() {
        let base = compose(s, t, w)?;
        let gr = Restrict::new(g, base.clone(), v);
        let fr = Restrict::new(f, base, v);
        parts.push((w.sign(), hybrid_integral(&gr, &fr, full, &sv, &tv, opts)?));
    }
    let refs: Vec<(f64, &IntegralResult)> = parts.iter().map(|(c, r)| (*c, r)).collect();
    Ok(opts.finish(IntegralResult::combine(&refs, 0.0)))
}

fn check_corners(fns: &[&dyn Integrand], s: &[f64], t: &[f64]) -> Result<()> {
    let (rect, _) = Rect::new(s.to_vec(), t.to_vec())?.oriented();
    for f in fns {
        for c in [&rect.lower, &rect.upper] {
            if !f.contains(c) {
                return Err(Error::OutsideDomain { point: c.clone() });
            }
        }
    }
    Ok(())
}

/// Right-hand side of integration by parts:
/// `[fg]_s^t + Σ_{∅≠v} (-1)^{|v|} ∫_{s_v}^{t_v} [g d_v f]_{s_{-v}}^{t_{-v}}`,
/// which equals `∫_s^t f dg`.
pub fn ibp_rhs<F, G>(f: &F, g: &G, s: &[f64], t: &[f64], opts: &RsOptions) -> Result<IntegralResult>
where
    F: Integrand,
    G: Integrand,
{
    require_proper(s, t)?;
    check_corners(&[f as &dyn Integrand, g], s, t)?;
    let fg = |x: &[f64]| f.eval(x) * g.eval(x);
    let bracket = rect_increment(&fg, s, t)?;
    let mut parts = Vec::new();
    for v in MultiIndexSet::full(s.len()).subsets().filter(|v| !v.is_empty()) {
        parts.push((v.sign(), mixed_unchecked(g, f, v, s, t, opts)?));
    }
    let refs: Vec<(f64, &IntegralResult)> = parts.iter().map(|(c, r)| (*c, r)).collect();
    Ok(opts.finish(IntegralResult::combine(&refs, bracket)))
}

/// `∫ g(r) f_t(r) dr` as a plain Riemann integral, where `f_t` is the full
/// mixed partial of an integrator.
pub fn substitute_derivative<G, D>(g: &G, f_t: &D, s: &[f64], t: &[f64], opts: &RsOptions) -> Result<IntegralResult>
where
    G: Integrand + ?Sized,
    D: Integrand + ?Sized,
{
    require_proper(s, t)?;
    hybrid_integral(g, f_t, MultiIndexSet::empty(s.len()), s, t, opts)
}

/// `∫ g(r) d_{-v} f_{t_v}(r) dr_v`: Stieltjes in `-v`, Lebesgue in `v`, with
/// `f_tv` the mixed partial of the integrator over `v`.
pub fn substitute_partial<G, D>(
    g: &G,
    f_tv: &D,
    v: MultiIndexSet,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<IntegralResult>
where
    G: Integrand + ?Sized,
    D: Integrand + ?Sized,
{
    require_proper(s, t)?;
    hybrid_integral(g, f_tv, v.complement(), s, t, opts)
}

/// Both sides of `∫ h d(fg) = Σ_u ∫ h f_{t_u} d_{-u}g dr_u`.
pub fn product_rule_check<H, F, G>(
    h: &H,
    f: &F,
    g: &G,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<(IntegralResult, IntegralResult)>
where
    H: Integrand,
    F: Differentiable,
    G: Integrand,
{
    require_proper(s, t)?;
    let fg = |x: &[f64]| f.eval(x) * g.eval(x);
    let lhs = rs_integral(h, &fg, s, t, opts)?;
    let mut parts = Vec::new();
    for u in MultiIndexSet::full(s.len()).subsets() {
        let hf = |x: &[f64]| h.eval(x) * f.partial(x, u);
        parts.push(hybrid_integral(&hf, g, u.complement(), s, t, opts)?);
    }
    let refs: Vec<(f64, &IntegralResult)> = parts.iter().map(|r| (1.0, r)).collect();
    Ok((lhs, opts.finish(IntegralResult::combine(&refs, 0.0))))
}

/// `F_v(x) = ∫_{s_v}^{x_v} [f(r)]_{s_{-v}}^{x_{-v}} dr_v`, by composite
/// Gauss–Legendre in the `v` coordinates.
pub struct PartialPrimitive<'a, F: ?Sized> {
    f: &'a F,
    v: MultiIndexSet,
    s: Vec<f64>,
    rule: CompositeRule,
    panels: usize,
}

impl<'a, F: Integrand + ?Sized> PartialPrimitive<'a, F> {
    pub fn new(f: &'a F, v: MultiIndexSet, s: &[f64]) -> Result<Self> {
        Ok(Self {
            f,
            v,
            s: s.to_vec(),
            rule: CompositeRule::new(10)?,
            panels: 4,
        })
    }
}

impl<F: Integrand + ?Sized> Integrand for PartialPrimitive<'_, F> {
    fn eval(&self, x: &[f64]) -> f64 {
        let dim = x.len();
        let nv = self.v.complement();
        let lo = self.v.pick(&self.s);
        let hi = self.v.pick(x);
        let axes: Vec<usize> = self.v.axes().collect();
        let bracket = |r: &[f64]| {
            let mut p = [0.0; MAX_DIM];
            p[..dim].copy_from_slice(x);
            for (k, &a) in axes.iter().enumerate() {
                p[a] = r[k];
            }
            rect_increment_on(self.f, &p[..dim], &self.s, x, nv)
        };
        if self.v.is_empty() {
            return bracket(&[]);
        }
        self.rule.integrate_box(bracket, &lo, &hi, self.panels)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.f.contains(x)
    }
}

/// Both sides of `∫ g dF_v = ∫ g d_{-v} f dt_v` for a test integrand `g`.
pub fn fundamental_lemma_check<F, G>(
    f: &F,
    g: &G,
    v: MultiIndexSet,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<(IntegralResult, IntegralResult)>
where
    F: Integrand,
    G: Integrand,
{
    require_proper(s, t)?;
    let prim = PartialPrimitive::new(f, v, s)?;
    let lhs = rs_integral(g, &prim, s, t, opts)?;
    let rhs = hybrid_integral(g, f, v.complement(), s, t, opts)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::SeparableSum;
    use crate::grid::{GridField, GridPartition};

    fn one(_: &[f64]) -> f64 {
        1.0
    }

    #[test]
    fn constant_integrand_gives_bracket_at_every_level() {
        let f = |x: &[f64]| (x[0] * 1.7).sin() * (0.3 * x[1]).exp() + x[0] * x[1];
        let s = [0.1, -0.5];
        let t = [1.3, 0.8];
        let r = rs_integral(&one, &f, &s, &t, &RsOptions::default()).unwrap();
        let b = rect_increment(&f, &s, &t).unwrap();
        assert_eq!(r.levels.len(), 4);
        for l in &r.levels {
            assert!((l.value - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn one_dimensional_closed_form() {
        // ∫_0^1 x d(x²) = 2/3
        let r = rs_integral(
            &|x: &[f64]| x[0],
            &|x: &[f64]| x[0] * x[0],
            &[0.0],
            &[1.0],
            &RsOptions::finest(1024, 4),
        )
        .unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-6);
        // Midpoint error is exactly -h²/6 here.
        let h = 1.0 / 1024.0;
        assert!((r.value - (2.0 / 3.0 - h * h / 6.0)).abs() < 1e-13);
    }

    #[test]
    fn extrapolation_removes_the_quadratic_error() {
        let g = |x: &[f64]| x[0];
        let f = |x: &[f64]| x[0] * x[0];
        let plain = RsOptions::finest(16, 3);
        let r = rs_integral(&g, &f, &[0.0], &[1.0], &plain.with_extrapolation()).unwrap();
        let raw = rs_integral(&g, &f, &[0.0], &[1.0], &plain).unwrap();
        assert_eq!(r.levels, raw.levels);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.error_estimate - (1.0 / 16.0f64).powi(2) / 6.0).abs() < 1e-14);
        // A single level has nothing to extrapolate from.
        let single = IntegralResult::from_levels(vec![Level { norm: 0.5, value: 1.0 }]).unwrap();
        assert_eq!(single.extrapolated(), single);
    }

    #[test]
    fn bilinear_integrand_and_integrator() {
        let p = SeparableSum::product(2);
        let r = rs_integral(&p, &p, &[0.0, 0.0], &[1.0, 1.0], &RsOptions::default()).unwrap();
        for l in &r.levels {
            assert!((l.value - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn reversed_box_flips_sign() {
        let g = |x: &[f64]| x[0].cos() + x[1];
        let f = |x: &[f64]| (x[0] * x[1]).exp();
        let o = RsOptions::default();
        let a = rs_integral(&g, &f, &[0.0, 0.0], &[1.0, 1.0], &o).unwrap().value;
        let b = rs_integral(&g, &f, &[1.0, 0.0], &[0.0, 1.0], &o).unwrap().value;
        let c = rs_integral(&g, &f, &[1.0, 1.0], &[0.0, 0.0], &o).unwrap().value;
        assert!((a + b).abs() < 1e-14 && (a - c).abs() < 1e-14);
    }

    #[test]
    fn degenerate_box_is_an_error() {
        assert!(matches!(
            rs_integral(&one, &one, &[0.0, 1.0], &[1.0, 1.0], &RsOptions::default()),
            Err(Error::EmptyBox(_))
        ));
    }

    #[test]
    fn tag_policies_converge_together() {
        let g = |x: &[f64]| (x[0] - x[1]).sin() + 2.0;
        let f = |x: &[f64]| (x[0] + 0.5 * x[1]).exp();
        let s = [0.0, 0.0];
        let t = [1.0, 1.0];
        let policies = [
            TagPolicy::LowerCorner,
            TagPolicy::UpperCorner,
            TagPolicy::Midpoint,
            TagPolicy::Randomized { seed: 5 },
        ];
        let results: Vec<IntegralResult> = policies
            .iter()
            .map(|&p| rs_integral(&g, &f, &s, &t, &RsOptions::default().with_tags(p)).unwrap())
            .collect();
        let spread = |k: usize| {
            let vals: Vec<f64> = results.iter().map(|r| r.levels[k].value).collect();
            vals.iter().fold(f64::MIN, |a, &b| a.max(b)) - vals.iter().fold(f64::MAX, |a, &b| a.min(b))
        };
        // Corner tags differ at O(h); random tags sit between them.
        assert!(spread(3) < spread(0) / 4.0);
        assert!(spread(3) < 0.05);
    }

    #[test]
    fn mixed_over_all_axes_is_rs_integral() {
        let g = |x: &[f64]| x[0] + x[1] * x[2];
        let f = |x: &[f64]| (x[0] * x[1] + x[2]).sin();
        let (s, t) = ([0.0; 3], [1.0, 0.5, 0.7]);
        let o = RsOptions::default();
        let a = mixed_integral(&g, &f, MultiIndexSet::full(3), &s, &t, &o).unwrap();
        let b = rs_integral(&g, &f, &s, &t, &o).unwrap();
        assert_eq!(a.value, b.value);
        assert!(mixed_integral(&g, &f, MultiIndexSet::empty(3), &s, &t, &o).is_err());
    }

    #[test]
    fn mixed_with_inert_axis_vanishes() {
        // Neither function sees x2, so the bracket over axis 2 is zero.
        let f = |x: &[f64]| x[0].exp();
        let v = MultiIndexSet::from_members(&[1], 2).unwrap();
        let r = mixed_integral(
            &|x: &[f64]| x[0],
            &f,
            v,
            &[0.0, 0.0],
            &[1.0, 1.0],
            &RsOptions::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn one_dimensional_integration_by_parts() {
        let f = |x: &[f64]| x[0].sin();
        let g = |x: &[f64]| x[0] * x[0];
        let o = RsOptions::finest(256, 4);
        let lhs = rs_integral(&f, &g, &[0.0], &[2.0], &o).unwrap();
        let rhs = ibp_rhs(&f, &g, &[0.0], &[2.0], &o).unwrap();
        // ∫_0^2 sin(x)·2x dx = 2(sin 2 − 2 cos 2)
        let exact = 2.0 * (2f64.sin() - 2.0 * 2f64.cos());
        assert!((lhs.value - exact).abs() < 1e-4);
        assert!((rhs.value - exact).abs() < 1e-4);
    }

    #[test]
    fn ibp_with_unit_f_is_bracket() {
        let g = |x: &[f64]| (x[0] - 2.0 * x[1]).cos();
        let rhs = ibp_rhs(&one, &g, &[0.0, 0.0], &[1.0, 1.0], &RsOptions::default()).unwrap();
        let b = rect_increment(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((rhs.value - b).abs() < 1e-14);
    }

    #[test]
    fn substitution_closed_form() {
        let g = SeparableSum::product(2);
        let r = substitute_derivative(&g, &one, &[0.0, 0.0], &[1.0, 1.0], &RsOptions::default()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-14);
    }

    #[test]
    fn product_rule_trivial_cases() {
        let h = |x: &[f64]| x[0].exp() * (1.0 + x[1]);
        let g = |x: &[f64]| (x[0] * x[1]).sin() + x[1];
        let o = RsOptions::default();
        let unit = SeparableSum::constant(2, 1.0);
        let (l, r) = product_rule_check(&h, &unit, &g, &[0.0, 0.0], &[1.0, 1.0], &o).unwrap();
        assert!((l.value - r.value).abs() < 1e-13);
    }

    #[test]
    fn fundamental_lemma_example() {
        let f = SeparableSum::exp_linear(&[1.0, 1.0]);
        let g = |x: &[f64]| 1.0 + x[0] * x[1];
        let v = MultiIndexSet::from_members(&[1], 2).unwrap();
        let (l, r) = fundamental_lemma_check(&f, &g, v, &[0.0, 0.0], &[1.0, 1.0], &RsOptions::default()).unwrap();
        assert!((l.value - r.value).abs() < 1e-3 * r.value.abs());
    }

    #[test]
    fn native_grid_is_the_finest_level() {
        let p = GridPartition::uniform_cube(&Rect::cube(0.0, 1.0, 2).unwrap(), 12).unwrap();
        let f = GridField::sample(&|x: &[f64]| x[0] * x[1] * x[1], &p).unwrap();
        let r = rs_integral(&one, &f, &[0.0, 0.0], &[1.0, 1.0], &RsOptions::default()).unwrap();
        // 12 cells allow strides 8, 4, 2, 1.
        assert_eq!(r.levels.len(), 4);
        assert!((r.levels[3].norm - 1.0 / 12.0).abs() < 1e-15);
        assert!((r.levels[0].norm - 8.0 / 12.0).abs() < 1e-15);
        assert!(rs_integral(&one, &f, &[0.0, 0.0], &[0.95, 1.0], &RsOptions::default()).is_err());
    }

    #[test]
    fn combine_aligns_at_finest() {
        let a = IntegralResult::from_levels(vec![
            Level { norm: 0.5, value: 1.0 },
            Level { norm: 0.25, value: 2.0 },
            Level {
                norm: 0.125,
                value: 3.0,
            },
        ])
        .unwrap();
        let b = IntegralResult::from_levels(vec![
            Level {
                norm: 0.25,
                value: 10.0,
            },
            Level {
                norm: 0.125,
                value: 20.0,
            },
        ])
        .unwrap();
        let c = IntegralResult::combine(&[(1.0, &a), (2.0, &b), (1.0, &IntegralResult::exact(7.0))], 1.0);
        assert_eq!(c.levels.len(), 2);
        assert_eq!(c.value, 3.0 + 40.0 + 7.0 + 1.0);
        assert_eq!(c.error_estimate, 21.0);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("error_estimate") && json.contains("levels"));
    }
}
