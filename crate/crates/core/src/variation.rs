//! Vitali and Hardy–Krause variation over partition ladders, and the integral
//! formula for smooth functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Differentiable, Integrand, Restrict};
use crate::grid::{difference_all_axes, Rect};
use crate::indexkit::{MultiIndexSet, MAX_DIM};
use crate::numeric::{neumaier_sum, CompositeRule};
use crate::rsint::{build_ladder, Level, RsOptions};

/// Partition variation: the largest value seen on the tested ladder. Since
/// the ladder is nested this is the finest level, and it can only bound the
/// true supremum from below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationEstimate {
    pub value: f64,
    pub partition_norm: f64,
    pub is_lower_bound: bool,
    pub levels: Vec<Level>,
}

impl VariationEstimate {
    fn zero() -> Self {
        Self {
            value: 0.0,
            partition_norm: 0.0,
            is_lower_bound: false,
            levels: vec![Level { norm: 0.0, value: 0.0 }],
        }
    }
}

fn sum_abs_increments<F: Integrand + ?Sized>(f: &F, axes: &[Vec<f64>]) -> Result<f64> {
    let dim = axes.len();
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = shape.iter().product();
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut p = [0.0; MAX_DIM];
            let mut rest = flat;
            for a in (0..dim).rev() {
                p[a] = axes[a][rest % shape[a]];
                rest /= shape[a];
            }
            f.eval(&p[..dim])
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("function value while measuring variation".into()));
    }
    let (inc, _) = difference_all_axes(&values, &shape);
    Ok(neumaier_sum(inc.iter().map(|x| x.abs())))
}

/// `Σ_cells |[F]_cell|` on each level of the ladder over the box.
pub fn vitali_variation<F: Integrand + ?Sized>(
    f: &F,
    s: &[f64],
    t: &[f64],
    opts: &RsOptions,
) -> Result<VariationEstimate> {
    let rect = Rect::new(s.to_vec(), t.to_vec())?;
    if rect.is_degenerate() {
        return Ok(VariationEstimate::zero());
    }
    let (rect, _) = rect.oriented();
    for c in [&rect.lower, &rect.upper] {
        if !f.contains(c) {
            return Err(Error::OutsideDomain { point: c.clone() });
        }
    }
    let natives: Vec<Option<&[f64]>> = (0..rect.dim()).map(|a| f.native_axis(a)).collect();
    let ladder = build_ladder(&rect.lower, &rect.upper, &natives, opts)?;
    let mut levels = Vec::with_capacity(ladder.len());
    for axes in &ladder {
        let norm = axes
            .iter()
            .flat_map(|ax| ax.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max);
        levels.push(Level {
            norm,
            value: sum_abs_increments(f, axes)?,
        });
    }
    let best = levels.iter().map(|l| l.value).fold(0.0, f64::max);
    Ok(VariationEstimate {
        value: best,
        partition_norm: levels.last().map_or(0.0, |l| l.norm),
        is_lower_bound: true,
        levels,
    })
}

/// `Σ_{∅≠v}` Vitali variation of `r_v ↦ F(r_v : t_{-v})` over `[s_v, t_v]`,
/// anchored at the upper corner.
pub fn hk_variation<F: Integrand + ?Sized>(f: &F, s: &[f64], t: &[f64], opts: &RsOptions) -> Result<VariationEstimate> {
    let rect = Rect::new(s.to_vec(), t.to_vec())?;
    if rect.is_degenerate() {
        return Ok(VariationEstimate::zero());
    }
    let (rect, _) = rect.oriented();
    let dim = rect.dim();
    let mut parts = Vec::new();
    for v in MultiIndexSet::full(dim).subsets().filter(|v| !v.is_empty()) {
        let face = Restrict::new(f, rect.upper.clone(), v);
        parts.push(vitali_variation(
            &face,
            &v.pick(&rect.lower),
            &v.pick(&rect.upper),
            opts,
        )?);
    }
    let n = parts.iter().map(|p| p.levels.len()).min().unwrap_or(1);
    let levels: Vec<Level> = (0..n)
        .map(|k| {
            let mut norm: f64 = 0.0;
            let value = neumaier_sum(parts.iter().map(|p| {
                let l = p.levels[p.levels.len() - n + k];
                norm = norm.max(l.norm);
                l.value
            }));
            Level { norm, value }
        })
        .collect();
    Ok(VariationEstimate {
        value: parts.iter().map(|p| p.value).sum(),
        partition_norm: levels.last().map_or(0.0, |l| l.norm),
        is_lower_bound: true,
        levels,
    })
}

/// Largest total number of quadrature points per face integral.
const SMOOTH_POINT_BUDGET: usize = 1 << 22;

/// `Σ_{∅≠v} ∫_{s_v}^{t_v} |f_{t_v}(r_v : t_{-v})| dr_v` by a Gauss–Legendre
/// panel ladder, each face converged to about `1e-9` relative.
pub fn hk_variation_smooth<F: Differentiable + ?Sized>(f: &F, s: &[f64], t: &[f64]) -> Result<f64> {
    let rect = Rect::new(s.to_vec(), t.to_vec())?;
    if rect.is_degenerate() {
        return Ok(0.0);
    }
    let (rect, _) = rect.oriented();
    let dim = rect.dim();
    let order = 8;
    let rule = CompositeRule::new(order)?;
    let mut terms = Vec::new();
    for v in MultiIndexSet::full(dim).subsets().filter(|v| !v.is_empty()) {
        let axes: Vec<usize> = v.axes().collect();
        let integrand = |r: &[f64]| {
            let mut p = [0.0; MAX_DIM];
            p[..dim].copy_from_slice(&rect.upper);
            for (k, &a) in axes.iter().enumerate() {
                p[a] = r[k];
            }
            f.partial(&p[..dim], v).abs()
        };
        let per_axis = (SMOOTH_POINT_BUDGET as f64).powf(1.0 / v.len() as f64) / order as f64;
        let max_panels = 1usize << (per_axis.max(1.0).log2().floor() as u32);
        terms.push(rule.integrate_box_converged(
            integrand,
            &v.pick(&rect.lower),
            &v.pick(&rect.upper),
            1e-9,
            max_panels,
        )?);
    }
    Ok(neumaier_sum(terms))
}
