//! Hypertriangles `T(t)` cut from the box between `t` and its reflection
//! `t̃`, with integrals over `T` and over the rest of the box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Differentiable, Integrand, Restrict};
use crate::grid::Rect;
use crate::indexkit::{compose, MultiIndexSet, MAX_DIM};
use crate::numeric::{neumaier_sum, par_sum};
use crate::rsint::{hybrid_integral, rs_integral, IntegralResult, Level, RsOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `Σt ≥ 0`: `T = {x ≤ t, Σx ≥ 0}`.
    NonNegative,
    /// `Σt < 0`: `T = {x ≥ t, Σx ≤ 0}`.
    Negative,
}

/// Iterated bounds of the facet `T_v`: coordinates of `v` in ascending order,
/// the remaining ones pinned at the apex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub axes: MultiIndexSet,
    apex: Vec<f64>,
    /// `rest[k] = Σ t_l` over the axes outside `{v_0, …, v_k}`.
    rest: Vec<f64>,
    orientation: Orientation,
}

impl Facet {
    fn new(t: &[f64], v: MultiIndexSet, orientation: Orientation) -> Self {
        let axes: Vec<usize> = v.axes().collect();
        let total: f64 = neumaier_sum(t.iter().copied());
        let mut rest = Vec::with_capacity(axes.len());
        let mut used = 0.0;
        for &a in &axes {
            used += t[a];
            rest.push(total - used);
        }
        Self {
            axes: v,
            apex: v.pick(t),
            rest,
            orientation,
        }
    }

    pub fn len(&self) -> usize {
        self.apex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.apex.is_empty()
    }

    /// Range of the `k`-th facet coordinate given the sum of the outer ones.
    pub fn bounds(&self, k: usize, outer_sum: f64) -> (f64, f64) {
        let cut = -outer_sum - self.rest[k];
        match self.orientation {
            Orientation::NonNegative => (cut, self.apex[k]),
            Orientation::Negative => (self.apex[k], cut),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        let s: f64 = u.iter().sum::<f64>() + self.rest.last().copied().unwrap_or(0.0);
        match self.orientation {
            Orientation::NonNegative => u.iter().zip(&self.apex).all(|(x, a)| x <= a) && s >= 0.0,
            Orientation::Negative => u.iter().zip(&self.apex).all(|(x, a)| x >= a) && s <= 0.0,
        }
    }

    /// Nested composite midpoint rule with `cells` cells on every level of
    /// the iteration. `f` receives the facet coordinates only.
    pub fn integrate_midpoint(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), cells: usize) -> f64 {
        let m = self.len();
        let (lo, hi) = self.bounds(0, 0.0);
        let w = (hi - lo) / cells as f64;
        if w == 0.0 {
            return 0.0;
        }
        par_sum(cells, |i| {
            let mut x = [0.0; MAX_DIM];
            x[0] = lo + (i as f64 + 0.5) * w;
            w * self.nest(1, x[0], &mut x, m, cells, f)
        })
    }

    fn nest(
        &self,
        k: usize,
        outer_sum: f64,
        x: &mut [f64; MAX_DIM],
        m: usize,
        cells: usize,
        f: &(dyn Fn(&[f64]) -> f64 + Sync),
    ) -> f64 {
        if k == m {
            return f(&x[..m]);
        }
        let (lo, hi) = self.bounds(k, outer_sum);
        let w = (hi - lo) / cells as f64;
        let mut acc = 0.0;
        for i in 0..cells {
            x[k] = lo + (i as f64 + 0.5) * w;
            acc += self.nest(k + 1, outer_sum + x[k], x, m, cells, f);
        }
        acc * w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleDomain {
    pub apex: Vec<f64>,
    /// `t̃_l = -Σ_{j≠l} t_j`.
    pub reflected: Vec<f64>,
    pub orientation: Orientation,
    /// One entry per nonempty `v`, in the order of [`MultiIndexSet::subsets`].
    pub facets: Vec<Facet>,
}

/// Builds `T(t)`; on `Σt = 0` the reflected corner is `t` itself.
pub fn build_domain(t: &[f64]) -> Result<TriangleDomain> {
    let dim = t.len();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DimensionOutOfRange(dim));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("apex".into()));
    }
    let total = neumaier_sum(t.iter().copied());
    let orientation = if total >= 0.0 {
        Orientation::NonNegative
    } else {
        Orientation::Negative
    };
    let reflected = if total == 0.0 {
        t.to_vec()
    } else {
        t.iter().map(|&tl| tl - total).collect()
    };
    let facets = MultiIndexSet::full(dim)
        .subsets()
        .filter(|v| !v.is_empty())
        .map(|v| Facet::new(t, v, orientation))
        .collect();
    Ok(TriangleDomain {
        apex: t.to_vec(),
        reflected,
        orientation,
        facets,
    })
}

impl TriangleDomain {
    pub fn dim(&self) -> usize {
        self.apex.len()
    }

    pub fn apex_sum(&self) -> f64 {
        neumaier_sum(self.apex.iter().copied())
    }

    pub fn is_degenerate(&self) -> bool {
        self.apex_sum() == 0.0
    }

    /// `(-1)^N` for the negative orientation, `1` otherwise.
    pub fn orientation_sign(&self) -> f64 {
        match self.orientation {
            Orientation::NonNegative => 1.0,
            Orientation::Negative => {
                if self.dim() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let s: f64 = x.iter().sum();
        match self.orientation {
            Orientation::NonNegative => x.iter().zip(&self.apex).all(|(a, b)| a <= b) && s >= 0.0,
            Orientation::Negative => x.iter().zip(&self.apex).all(|(a, b)| a >= b) && s <= 0.0,
        }
    }

    /// The enclosing box `R`, lower corner first.
    pub fn bounding_box(&self) -> Rect {
        let lower = self.apex.iter().zip(&self.reflected).map(|(a, b)| a.min(*b)).collect();
        let upper = self.apex.iter().zip(&self.reflected).map(|(a, b)| a.max(*b)).collect();
        Rect { lower, upper }
    }

    /// `t` and its neighbours `(t_{-l} : t̃_l)`.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.apex.clone()];
        for l in 0..self.dim() {
            let mut p = self.apex.clone();
            p[l] = self.reflected[l];
            out.push(p);
        }
        out
    }

    pub fn facet(&self, v: MultiIndexSet) -> &Facet {
        self.facets
            .iter()
            .find(|f| f.axes == v)
            .expect("every nonempty subset has a facet")
    }

    /// `t_{-v} : t̃_v`.
    fn corner(&self, v: MultiIndexSet) -> Vec<f64> {
        compose(&self.reflected, &self.apex, v).expect("dimensions agree")
    }

    /// Sign in front of the `v`-indexed integral terms.
    fn term_sign(&self, v: MultiIndexSet) -> f64 {
        match self.orientation {
            Orientation::NonNegative => v.sign(),
            Orientation::Negative => 1.0,
        }
    }

    /// Whether `fns` are all defined on every vertex of `T`, hence on `T`.
    pub fn covered_by(&self, fns: &[&dyn Integrand]) -> Result<()> {
        for p in self.vertices() {
            for f in fns {
                if !f.contains(&p) {
                    return Err(Error::OutsideDomain { point: p });
                }
            }
        }
        Ok(())
    }

    /// `∫_{T_v} q(t_{-v} : u_v) du_v` on each level of the ladder.
    fn facet_integral(
        &self,
        v: MultiIndexSet,
        q: &(dyn Fn(&[f64]) -> f64 + Sync),
        opts: &RsOptions,
    ) -> Result<IntegralResult> {
        let dim = self.dim();
        let facet = self.facet(v);
        let axes: Vec<usize> = v.axes().collect();
        let lifted = |u: &[f64]| {
            let mut p = [0.0; MAX_DIM];
            p[..dim].copy_from_slice(&self.apex);
            for (k, &a) in axes.iter().enumerate() {
                p[a] = u[k];
            }
            q(&p[..dim])
        };
        let extent = self.apex_sum().abs();
        let levels = (0..opts.refinements)
            .map(|k| {
                let cells = opts.base_cells << k;
                Level {
                    norm: extent / cells as f64,
                    value: facet.integrate_midpoint(&lifted, cells),
                }
            })
            .collect();
        IntegralResult::from_levels(levels)
    }
}

/// Terms shared by the two integrals: corner weights and facet integrals.
struct Pieces {
    apex_term: f64,
    axis_corners: f64,
    far_corners: f64,
    facets: Vec<(f64, IntegralResult)>,
}

fn pieces<F, G>(dom: &TriangleDomain, f: &F, g: &G, opts: &RsOptions) -> Result<Pieces>
where
    F: Differentiable + ?Sized,
    G: Integrand + ?Sized,
{
    let dim = dom.dim();
    let h = |x: &[f64]| f.eval(x) * g.eval(x);
    let mut axis_corners = Vec::new();
    let mut far_corners = Vec::new();
    let mut facets = Vec::new();
    for v in MultiIndexSet::full(dim).subsets().filter(|v| !v.is_empty()) {
        let hv = h(&dom.corner(v));
        if v.len() == 1 {
            axis_corners.push(hv);
        } else {
            far_corners.push(v.sign() * hv);
        }
        let q = |x: &[f64]| f.partial(x, v) * g.eval(x);
        facets.push((dom.term_sign(v), dom.facet_integral(v, &q, opts)?));
    }
    Ok(Pieces {
        apex_term: h(&dom.apex),
        axis_corners: neumaier_sum(axis_corners),
        far_corners: neumaier_sum(far_corners),
        facets,
    })
}

/// `T` is the simplex spanned by its vertices, so covering them is enough for
/// the triangle integral; the complement also needs the corners of `R`.
fn validate<F, G>(dom: &TriangleDomain, f: &F, g: &G, opts: &RsOptions, whole_box: bool) -> Result<()>
where
    F: Integrand + ?Sized,
    G: Integrand + ?Sized,
{
    if opts.refinements == 0 || opts.base_cells == 0 {
        return Err(Error::InvalidParameter("empty refinement ladder".into()));
    }
    let mut points = dom.vertices();
    if whole_box {
        let r = dom.bounding_box();
        points.extend([r.lower, r.upper]);
    }
    for p in points {
        if !f.contains(&p) || !g.contains(&p) {
            return Err(Error::OutsideDomain { point: p });
        }
    }
    Ok(())
}

/// `∫_{T(t)} f dg` for `f` with continuous mixed partials and continuous `g`.
///
/// For `Σt ≥ 0`:
/// `f g(t) − (1/N) Σ_{|v|=1} f g(t_{-v}:t̃_v) + Σ_{v≠∅} (-1)^{|v|} ∫_{T_v} f_{t_v} g`.
/// For `Σt < 0` the facet signs are dropped and the whole expression is
/// multiplied by `(-1)^N`. On `Σt = 0` the result is exactly zero.
pub fn triangle_integral<F, G>(f: &F, g: &G, t: &[f64], opts: &RsOptions) -> Result<IntegralResult>
where
    F: Differentiable + ?Sized,
    G: Integrand + ?Sized,
{
    let dom = build_domain(t)?;
    triangle_on(&dom, f, g, opts)
}

pub fn triangle_on<F, G>(dom: &TriangleDomain, f: &F, g: &G, opts: &RsOptions) -> Result<IntegralResult>
where
    F: Differentiable + ?Sized,
    G: Integrand + ?Sized,
{
    if dom.is_degenerate() {
        return Ok(IntegralResult::exact(0.0));
    }
    validate(dom, f, g, opts, false)?;
    let n = dom.dim() as f64;
    let p = pieces(dom, f, g, opts)?;
    let sign = dom.orientation_sign();
    let parts: Vec<(f64, &IntegralResult)> = p.facets.iter().map(|(c, r)| (sign * c, r)).collect();
    let constant = sign * (p.apex_term - p.axis_corners / n);
    Ok(opts.finish(IntegralResult::combine(&parts, constant)))
}

/// `∫_{R \ T(t)} f dg`, the remainder of the box integral over `R`.
pub fn complement_integral<F, G>(f: &F, g: &G, t: &[f64], opts: &RsOptions) -> Result<IntegralResult>
where
    F: Differentiable + ?Sized,
    G: Integrand + ?Sized,
{
    let dom = build_domain(t)?;
    if dom.is_degenerate() {
        return Ok(IntegralResult::exact(0.0));
    }
    validate(&dom, f, g, opts, true)?;
    let dim = dom.dim();
    let n = dim as f64;
    let p = pieces(&dom, f, g, opts)?;
    let sign = dom.orientation_sign();
    let r = dom.bounding_box();
    let one = |_: &[f64]| 1.0;
    let mut owned: Vec<(f64, IntegralResult)> = Vec::new();
    for (v, (c, tri)) in MultiIndexSet::full(dim)
        .subsets()
        .filter(|v| !v.is_empty())
        .zip(p.facets)
    {
        let hv = |x: &[f64]| f.partial(x, v) * g.eval(x);
        for w in v.complement().subsets() {
            let base = compose(&dom.reflected, &dom.apex, w)?;
            let face = Restrict::new(&hv, base, v);
            let full_box = hybrid_integral(
                &one,
                &face,
                MultiIndexSet::empty(v.len()),
                &v.pick(&r.lower),
                &v.pick(&r.upper),
                opts,
            )?;
            owned.push((sign * c * w.sign(), full_box));
        }
        owned.push((-sign * c, tri));
    }
    let parts: Vec<(f64, &IntegralResult)> = owned.iter().map(|(c, r)| (*c, r)).collect();
    let constant = sign * (-(n - 1.0) / n * p.axis_corners + p.far_corners);
    Ok(opts.finish(IntegralResult::combine(&parts, constant)))
}

/// `∫_R f dg` over the box spanned by `t` and `t̃`, taken with its natural
/// (lower-to-upper) orientation.
pub fn box_integral<F, G>(f: &F, g: &G, t: &[f64], opts: &RsOptions) -> Result<IntegralResult>
where
    F: Integrand + ?Sized,
    G: Integrand + ?Sized,
{
    let dom = build_domain(t)?;
    if dom.is_degenerate() {
        return Ok(IntegralResult::exact(0.0));
    }
    let r = dom.bounding_box();
    rs_integral(f, g, &r.lower, &r.upper, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::SeparableSum;
    use gauss_quad::GaussLegendre;

    #[test]
    fn unit_apex_geometry() {
        let d = build_domain(&[1.0, 1.0]).unwrap();
        assert_eq!(d.reflected, vec![-1.0, -1.0]);
        assert_eq!(d.orientation, Orientation::NonNegative);
        assert_eq!(d.vertices(), vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![1.0, -1.0]]);
        assert!(d.contains(&[1.0, 1.0]));
        assert!(d.contains(&[-1.0, 1.0]));
        assert!(!d.contains(&[-0.9, -0.9]));
        let b = d.bounding_box();
        assert_eq!((b.lower, b.upper), (vec![-1.0, -1.0], vec![1.0, 1.0]));
    }

    #[test]
    fn zero_sum_apex_collapses() {
        let d = build_domain(&[0.5, -0.5]).unwrap();
        assert_eq!(d.reflected, d.apex);
        assert_eq!(d.bounding_box().volume(), 0.0);
        assert!(d.contains(&[0.5, -0.5]));
    }

    #[test]
    fn tetrahedron_vertices() {
        let d = build_domain(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.reflected, vec![-2.0, -2.0, -2.0]);
        for v in d.vertices() {
            assert!(d.contains(&v));
        }
        assert!(!d.contains(&[-2.0, -2.0, 1.0]));
        assert_eq!(d.facets.len(), 7);
    }

    #[test]
    fn negative_orientation_membership() {
        let d = build_domain(&[-1.0, -0.5]).unwrap();
        assert_eq!(d.orientation, Orientation::Negative);
        assert!(d.contains(&[-1.0, -0.5]));
        assert!(d.contains(&[0.5, -0.5]));
        assert!(!d.contains(&[0.6, 0.0]));
    }

    #[test]
    fn facet_area_of_unit_triangle() {
        let d = build_domain(&[1.0, 1.0]).unwrap();
        let full = d.facet(MultiIndexSet::full(2));
        // Triangle with legs 2: area 2, exact for the midpoint rule.
        assert!((full.integrate_midpoint(&|_| 1.0, 16) - 2.0).abs() < 1e-13);
        let side = d.facet(MultiIndexSet::singleton(0, 2));
        assert!((side.integrate_midpoint(&|_| 1.0, 16) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn zero_sum_integrals_are_exactly_zero() {
        let f = SeparableSum::exp_linear(&[-1.0, -1.0]);
        let g = |x: &[f64]| x[0] * x[1] + x[0].sin();
        let o = RsOptions::default();
        assert_eq!(triangle_integral(&f, &g, &[0.7, -0.7], &o).unwrap().value, 0.0);
        assert_eq!(complement_integral(&f, &g, &[0.7, -0.7], &o).unwrap().value, 0.0);
    }

    #[test]
    fn unit_integrand_corner_value() {
        let one = SeparableSum::constant(2, 1.0);
        let g = SeparableSum::product(2);
        let r = triangle_integral(&one, &g, &[1.0, 1.0], &RsOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_reduces_to_ordinary_integral() {
        let f = SeparableSum::new(1).with_term(1.0, vec![crate::func::Univariate::Sin { freq: 1.0, phase: 0.0 }]);
        let g = |x: &[f64]| x[0] * x[0];
        let o = RsOptions::finest(512, 4);
        // ∫_0^2 sin(x)·2x dx, and the same integrand over [-1.5, 0].
        let pos = triangle_integral(&f, &g, &[2.0], &o).unwrap();
        let exact_pos = 2.0 * (2f64.sin() - 2.0 * 2f64.cos());
        assert!((pos.value - exact_pos).abs() < 1e-5);
        let neg = triangle_integral(&f, &g, &[-1.5], &o).unwrap();
        let exact_neg = 2.0 * (1.5f64.sin() - 1.5 * 1.5f64.cos());
        assert!((neg.value - exact_neg).abs() < 1e-5);
    }

    /// Facet integrals by nested Gauss–Legendre, for N = 2.
    fn oracle_two_dim(f: &SeparableSum, g: &SeparableSum, t: [f64; 2]) -> f64 {
        let gl = GaussLegendre::new(40).unwrap();
        let tt = [-t[1], -t[0]];
        let h = |x: &[f64]| f.eval(x) * g.eval(x);
        let hv = |x: &[f64], v: MultiIndexSet| f.partial(x, v) * g.eval(x);
        let v1 = MultiIndexSet::singleton(0, 2);
        let v2 = MultiIndexSet::singleton(1, 2);
        let v12 = MultiIndexSet::full(2);
        let corners = h(&t) - 0.5 * (h(&[tt[0], t[1]]) + h(&[t[0], tt[1]]));
        let i1 = gl.integrate(tt[0], t[0], |u| hv(&[u, t[1]], v1));
        let i2 = gl.integrate(tt[1], t[1], |u| hv(&[t[0], u], v2));
        let i12 = gl.integrate(tt[0], t[0], |u| gl.integrate(-u, t[1], |w| hv(&[u, w], v12)));
        // For Σt < 0 each facet runs the other way: the 1-D pieces flip
        // sign once and the 2-D piece twice, which absorbs the dropped
        // facet signs. With N even the global sign is +1.
        corners - i1 - i2 + i12
    }

    #[test]
    fn two_dimensional_against_gauss_legendre() {
        let f = SeparableSum::exp_linear(&[-0.7, 0.4]);
        let g = SeparableSum::new(2)
            .with_term(1.0, vec![crate::func::Univariate::identity(); 2])
            .with_term(
                0.5,
                vec![
                    crate::func::Univariate::Sin { freq: 1.3, phase: 0.2 },
                    crate::func::Univariate::one(),
                ],
            );
        let o = RsOptions::finest(256, 4);
        for t in [[1.0, 0.6], [0.3, -0.1], [-0.8, 0.2], [-0.5, -0.4]] {
            let got = triangle_integral(&f, &g, &t, &o).unwrap();
            let want = oracle_two_dim(&f, &g, t);
            assert!((got.value - want).abs() < 1e-4, "t = {t:?}: {} vs {want}", got.value);
        }
    }

    #[test]
    fn additivity_on_a_few_apexes() {
        let f = SeparableSum::exp_linear(&[0.5, -0.3]);
        let g = |x: &[f64]| (x[0] * x[1]).sin() + x[0];
        let o = RsOptions::finest(128, 4);
        for t in [[1.0, 0.5], [-0.4, -0.6], [0.9, -0.2], [-1.2, 0.7]] {
            let whole = box_integral(&f, &g, &t, &o).unwrap();
            let tri = triangle_integral(&f, &g, &t, &o).unwrap();
            let rest = complement_integral(&f, &g, &t, &o).unwrap();
            let gap = (whole.value - tri.value - rest.value).abs();
            assert!(gap < 1e-4, "t = {t:?}: gap {gap}");
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reflected_sum_identity(t in proptest::collection::vec(-5.0f64..5.0, 1..6)) {
                let d = build_domain(&t).unwrap();
                let n = t.len() as f64;
                let st: f64 = t.iter().sum();
                let sr: f64 = d.reflected.iter().sum();
                prop_assert!((sr + (n - 1.0) * st).abs() < 1e-12 * (1.0 + st.abs() * n));
            }

            #[test]
            fn triangle_sits_inside_its_box(
                t in proptest::collection::vec(-3.0f64..3.0, 2..4),
                u in proptest::collection::vec(0.0f64..1.0, 3),
            ) {
                let d = build_domain(&t).unwrap();
                let r = d.bounding_box();
                let x: Vec<f64> = (0..t.len())
                    .map(|a| r.lower[a] + u[a] * (r.upper[a] - r.lower[a]))
                    .collect();
                if d.contains(&x) {
                    for a in 0..t.len() {
                        prop_assert!(x[a] >= r.lower[a] - 1e-12 && x[a] <= r.upper[a] + 1e-12);
                    }
                }
                for v in d.vertices() {
                    for a in 0..t.len() {
                        prop_assert!(v[a] >= r.lower[a] - 1e-12 && v[a] <= r.upper[a] + 1e-12);
                    }
                }
            }

            #[test]
            fn facet_points_lie_in_the_triangle(
                t in proptest::collection::vec(-3.0f64..3.0, 2..4),
                fr in proptest::collection::vec(0.0f64..1.0, 3),
            ) {
                let d = build_domain(&t).unwrap();
                for facet in &d.facets {
                    let mut u = Vec::new();
                    let mut outer = 0.0;
                    for k in 0..facet.len() {
                        let (lo, hi) = facet.bounds(k, outer);
                        let x = lo + fr[k] * (hi - lo);
                        u.push(x);
                        outer += x;
                    }
                    let mut p = t.clone();
                    for (k, a) in facet.axes.axes().enumerate() {
                        p[a] = u[k];
                    }
                    let s: f64 = p.iter().sum();
                    let ok = match d.orientation {
                        Orientation::NonNegative => p.iter().zip(&t).all(|(x, y)| *x <= y + 1e-12) && s >= -1e-9,
                        Orientation::Negative => p.iter().zip(&t).all(|(x, y)| *x >= y - 1e-12) && s <= 1e-9,
                    };
                    prop_assert!(ok);
                }
            }

            #[test]
            fn corner_weights_cancel_on_the_hyperplane(n in 1usize..8, fg in -10.0f64..10.0) {
                let a = 1.0 / n as f64;
                prop_assert!(((1.0 - a * n as f64) * fg).abs() < 1e-12);
            }
        }
    }
}
