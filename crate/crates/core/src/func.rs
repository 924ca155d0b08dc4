//! Scalar functions on `R^N`: the [`Integrand`] and [`Differentiable`] traits,
//! coordinate restriction, finite-difference partials, and a closed family of
//! separable smooth functions with analytic mixed partials.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::indexkit::{MultiIndexSet, MAX_DIM};

/// Anything that can be evaluated pointwise: closures, sampled grid fields,
/// restrictions.
pub trait Integrand: Sync {
    fn eval(&self, x: &[f64]) -> f64;

    /// Whether `x` lies in the domain of definition. Callables are global.
    fn contains(&self, _x: &[f64]) -> bool {
        true
    }

    /// Breakpoints of the sampling grid along `axis` when the function is a
    /// sampled path. Integration never refines below this resolution.
    fn native_axis(&self, _axis: usize) -> Option<&[f64]> {
        None
    }
}

impl<F> Integrand for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A function with continuous mixed partial derivatives.
pub trait Differentiable: Integrand {
    /// Mixed partial `f_{t_v}(x)`; the empty set returns `f(x)`.
    fn partial(&self, x: &[f64], v: MultiIndexSet) -> f64;
}

/// A value closure paired with an analytic mixed-partial closure.
pub struct Smooth<F, D> {
    pub value: F,
    pub partial: D,
}

impl<F, D> Smooth<F, D>
where
    F: Fn(&[f64]) -> f64 + Sync,
    D: Fn(&[f64], MultiIndexSet) -> f64 + Sync,
{
    pub fn new(value: F, partial: D) -> Self {
        Self { value, partial }
    }
}

impl<F, D> Integrand for Smooth<F, D>
where
    F: Fn(&[f64]) -> f64 + Sync,
    D: Fn(&[f64], MultiIndexSet) -> f64 + Sync,
{
    fn eval(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
}

impl<F, D> Differentiable for Smooth<F, D>
where
    F: Fn(&[f64]) -> f64 + Sync,
    D: Fn(&[f64], MultiIndexSet) -> f64 + Sync,
{
    fn partial(&self, x: &[f64], v: MultiIndexSet) -> f64 {
        if v.is_empty() {
            (self.value)(x)
        } else {
            (self.partial)(x, v)
        }
    }
}

/// Central finite-difference mixed partials of a plain callable.
///
/// The step on axis `a` for a partial of order `k` is
/// `L_a * max(1e-4, ε^{1/(k+2)})`, where `L_a` is the axis length supplied at
/// construction. For `k ≤ 2` this is the usual `1e-4` relative step.
pub struct FiniteDifference<F> {
    f: F,
    scales: Vec<f64>,
}

impl<F: Integrand> FiniteDifference<F> {
    pub fn new(f: F, axis_lengths: Vec<f64>) -> Self {
        Self {
            f,
            scales: axis_lengths,
        }
    }

    pub fn step(&self, axis: usize, order: usize) -> f64 {
        let rel = f64::EPSILON.powf(1.0 / (order as f64 + 2.0)).max(1e-4);
        self.scales[axis].abs().max(f64::MIN_POSITIVE) * rel
    }
}

impl<F: Integrand> Integrand for FiniteDifference<F> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.f.eval(x)
    }
}

impl<F: Integrand> Differentiable for FiniteDifference<F> {
    fn partial(&self, x: &[f64], v: MultiIndexSet) -> f64 {
        if v.is_empty() {
            return self.f.eval(x);
        }
        let order = v.len();
        let n = x.len();
        let mut buf = [0.0; MAX_DIM];
        let mut total = 0.0;
        let mut denom = 1.0;
        for a in v.axes() {
            denom *= 2.0 * self.step(a, order);
        }
        // Each subset w of v takes the backward step on w, forward on v - w.
        for w in v.subsets() {
            buf[..n].copy_from_slice(x);
            for a in v.axes() {
                let h = self.step(a, order);
                buf[a] += if w.contains(a) { -h } else { h };
            }
            total += w.sign() * self.f.eval(&buf[..n]);
        }
        total / denom
    }
}

/// `f` viewed as a function of the `free` axes, the remaining coordinates
/// pinned to `base`.
pub struct Restrict<'a, F: ?Sized> {
    inner: &'a F,
    base: Vec<f64>,
    free: Vec<usize>,
}

impl<'a, F: ?Sized> Restrict<'a, F> {
    pub fn new(inner: &'a F, base: Vec<f64>, free: MultiIndexSet) -> Self {
        debug_assert_eq!(base.len(), free.dim());
        Self {
            inner,
            base,
            free: free.axes().collect(),
        }
    }

    #[inline]
    fn lift<R>(&self, x: &[f64], k: impl FnOnce(&[f64]) -> R) -> R {
        let n = self.base.len();
        let mut buf = [0.0; MAX_DIM];
        buf[..n].copy_from_slice(&self.base);
        for (slot, &a) in self.free.iter().enumerate() {
            buf[a] = x[slot];
        }
        k(&buf[..n])
    }
}

impl<F: Integrand + ?Sized> Integrand for Restrict<'_, F> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.lift(x, |p| self.inner.eval(p))
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.lift(x, |p| self.inner.contains(p))
    }

    fn native_axis(&self, axis: usize) -> Option<&[f64]> {
        self.inner.native_axis(self.free[axis])
    }
}

impl<F: Differentiable + ?Sized> Differentiable for Restrict<'_, F> {
    fn partial(&self, x: &[f64], v: MultiIndexSet) -> f64 {
        let lifted = MultiIndexSet::from_axes(v.axes().map(|k| self.free[k]), self.base.len())
            .expect("restricted axes lie inside the ambient dimension");
        self.lift(x, |p| self.inner.partial(p, lifted))
    }
}

/// One-dimensional building block with a closed-form derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Univariate {
    /// `e^{rate·x}`
    Exp { rate: f64 },
    /// `sin(freq·x + phase)`
    Sin { freq: f64, phase: f64 },
    /// `Σ c_k x^k`
    Poly { coeffs: Vec<f64> },
}

impl Univariate {
    pub fn identity() -> Self {
        Univariate::Poly { coeffs: vec![0.0, 1.0] }
    }

    pub fn one() -> Self {
        Univariate::Poly { coeffs: vec![1.0] }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Univariate::Exp { rate } => (rate * x).exp(),
            Univariate::Sin { freq, phase } => (freq * x + phase).sin(),
            Univariate::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Univariate::Exp { rate } => rate * (rate * x).exp(),
            Univariate::Sin { freq, phase } => freq * (freq * x + phase).cos(),
            Univariate::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
        }
    }
}

/// `Σ_j c_j ∏_l φ_{j,l}(x_l)`: closed under mixed partial differentiation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableSum {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<Univariate>)>,
}

impl SeparableSum {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn with_term(mut self, coef: f64, factors: Vec<Univariate>) -> Self {
        assert_eq!(factors.len(), self.dim, "one factor per axis");
        self.terms.push((coef, factors));
        self
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim).with_term(c, vec![Univariate::one(); dim])
    }

    /// `∏_l x_l`.
    pub fn product(dim: usize) -> Self {
        Self::new(dim).with_term(1.0, vec![Univariate::identity(); dim])
    }

    /// `e^{a·x}`.
    pub fn exp_linear(rates: &[f64]) -> Self {
        Self::new(rates.len()).with_term(1.0, rates.iter().map(|&rate| Univariate::Exp { rate }).collect())
    }

    /// A random smooth function: a few separable terms built from bounded
    /// exponentials, sinusoids, and low-degree polynomials.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let n_terms = rng.random_range(1..=3);
        let mut out = Self::new(dim);
        for _ in 0..n_terms {
            let coef = rng.random_range(-2.0..2.0);
            let factors = (0..dim)
                .map(|_| match rng.random_range(0..3) {
                    0 => Univariate::Exp {
                        rate: rng.random_range(-1.5..1.5),
                    },
                    1 => Univariate::Sin {
                        freq: rng.random_range(0.5..3.0),
                        phase: rng.random_range(0.0..std::f64::consts::TAU),
                    },
                    _ => Univariate::Poly {
                        coeffs: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    },
                })
                .collect();
            out.terms.push((coef, factors));
        }
        out
    }
}

impl Integrand for SeparableSum {
    fn eval(&self, x: &[f64]) -> f64 {
        self.partial(x, MultiIndexSet::empty(self.dim))
    }
}

impl Differentiable for SeparableSum {
    fn partial(&self, x: &[f64], v: MultiIndexSet) -> f64 {
        self.terms
            .iter()
            .map(|(c, factors)| {
                c * factors
                    .iter()
                    .enumerate()
                    .map(|(l, phi)| {
                        if v.contains(l) {
                            phi.derivative(x[l])
                        } else {
                            phi.value(x[l])
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    }
}
