//! Compensated summation and tensor-product Gauss–Legendre quadrature.

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indexkit::MAX_DIM;

/// Neumaier's compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for x in xs {
        acc.add(x);
    }
    acc.total()
}

const CHUNK: usize = 4096;

/// `Σ_{i<n} term(i)`, computed in fixed-size parallel chunks whose partial
/// sums are merged in index order, so the result does not depend on the
/// thread count.
pub fn par_sum(n: usize, term: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Neumaier> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Neumaier::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc.add(term(i));
            }
            acc
        })
        .collect();
    let mut total = Neumaier::default();
    for p in partials {
        total.merge(p);
    }
    total.total()
}

/// Composite Gauss–Legendre rule on `[-1, 1]` nodes, reused across panels.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(order: usize) -> Result<Self> {
        let rule = GaussLegendre::new(order)
            .map_err(|e| Error::InvalidParameter(format!("Gauss–Legendre order {order}: {e}")))?;
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Ok(Self { nodes, weights })
    }

    /// Nodes and weights on `[a, b]` split into `panels` equal pieces.
    pub fn points(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(lo + 0.5 * h * (x + 1.0));
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    /// Tensor-product integral of `f` over the box `[lo, hi]`; the box may be
    /// given in either orientation per axis.
    pub fn integrate_box(&self, f: impl Fn(&[f64]) -> f64 + Sync, lo: &[f64], hi: &[f64], panels: usize) -> f64 {
        let dim = lo.len();
        if dim == 0 {
            return f(&[]);
        }
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..dim).map(|a| self.points(lo[a], hi[a], panels)).collect();
        let per_axis = axes[0].0.len();
        let total = per_axis.pow(dim as u32);
        par_sum(total, |flat| {
            let mut x = [0.0; MAX_DIM];
            let mut w = 1.0;
            let mut rest = flat;
            for a in (0..dim).rev() {
                let i = rest % per_axis;
                rest /= per_axis;
                x[a] = axes[a].0[i];
                w *= axes[a].1[i];
            }
            w * f(&x[..dim])
        })
    }

    /// Doubles the panel count until successive values agree to
    /// `tol · max(1, |I|)`.
    pub fn integrate_box_converged(
        &self,
        f: impl Fn(&[f64]) -> f64 + Sync,
        lo: &[f64],
        hi: &[f64],
        tol: f64,
        max_panels: usize,
    ) -> Result<f64> {
        let mut panels = 1;
        let mut prev = self.integrate_box(&f, lo, hi, panels);
        while panels < max_panels {
            panels *= 2;
            let next = self.integrate_box(&f, lo, hi, panels);
            if !next.is_finite() {
                return Err(Error::NonFinite("quadrature value".into()));
            }
            if (next - prev).abs() <= tol * next.abs().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::QuadratureNonConvergence(format!(
            "no agreement to {tol:e} after {max_panels} panels per axis"
        )))
    }
}
