//! Fixtures shared by the integration suites.
#![allow(dead_code)]

use gauss_quad::GaussLegendre;
use oufield::{
    brownian_sheet, ou_solve, FieldEnsemble, GridField, GridPartition, Rect, Result, SeparableSum, ThetaVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` smooth pairs `(f, g)` in dimension `dim` from a fixed seed.
pub fn smooth_pairs(dim: usize, count: usize, seed: u64) -> Vec<(SeparableSum, SeparableSum)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| (SeparableSum::random(dim, &mut r), SeparableSum::random(dim, &mut r)))
        .collect()
}

/// A random box with corners in `[-1.5, 1.5]^dim`, each axis of width at
/// least `0.2` and in random orientation.
pub fn random_box<R: Rng>(dim: usize, r: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut s = Vec::with_capacity(dim);
    let mut t = Vec::with_capacity(dim);
    for _ in 0..dim {
        let a: f64 = r.random_range(-1.5..1.3);
        let b: f64 = r.random_range(a + 0.2..1.5);
        if r.random_bool(0.5) {
            s.push(a);
            t.push(b);
        } else {
            s.push(b);
            t.push(a);
        }
    }
    (s, t)
}

/// Stationary covariance of the Ornstein–Uhlenbeck field driven by a
/// Brownian sheet: `∏ e^{-θ_i |t_i - s_i|} / (2 θ_i)`.
pub fn ou_kernel(theta: &[f64], s: &[f64], t: &[f64]) -> f64 {
    theta
        .iter()
        .zip(s.iter().zip(t))
        .map(|(&th, (&a, &b))| (-th * (b - a).abs()).exp() / (2.0 * th))
        .product()
}

/// `∫∫_{u ≤ s∧t} e^{-Θ·(s-u)} e^{-Θ·(t-u)} du` in two dimensions by tensor
/// Gauss–Legendre on `[-lower_cut, s_i ∧ t_i]`, independent of the closed form.
pub fn ou_kernel_quadrature(theta: &[f64; 2], s: &[f64; 2], t: &[f64; 2]) -> f64 {
    let rule = GaussLegendre::new(20).expect("valid order");
    let panels = 40;
    let cut = 40.0;
    let hi = [s[0].min(t[0]), s[1].min(t[1])];
    let mut nodes: Vec<Vec<(f64, f64)>> = Vec::new();
    for a in 0..2 {
        let lo = -cut;
        let w = (hi[a] - lo) / panels as f64;
        let mut pts = Vec::new();
        for p in 0..panels {
            let (pa, pb) = (lo + p as f64 * w, lo + (p + 1) as f64 * w);
            for (x, wt) in rule.as_node_weight_pairs() {
                pts.push((0.5 * (pa + pb) + 0.5 * (pb - pa) * x, 0.5 * (pb - pa) * wt));
            }
        }
        nodes.push(pts);
    }
    let mut total = 0.0;
    for &(u1, w1) in &nodes[0] {
        for &(u2, w2) in &nodes[1] {
            let e = -theta[0] * ((s[0] - u1) + (t[0] - u1)) - theta[1] * ((s[1] - u2) + (t[1] - u2));
            total += w1 * w2 * e.exp();
        }
    }
    total
}

/// Grid over `[-truncation, hi]^2` with `per_unit` cells per unit length.
pub fn driver_grid(truncation: f64, hi: f64, per_unit: usize) -> GridPartition {
    let cells = ((hi + truncation) * per_unit as f64).round() as usize;
    GridPartition::uniform_cube(&Rect::cube(-truncation, hi, 2).unwrap(), cells).unwrap()
}

/// OU ensemble on `[0, hi]^2` driven by a Brownian sheet on
/// `[-truncation, hi]^2`.
pub fn ou_ensemble(
    theta: &ThetaVector,
    truncation: f64,
    hi: f64,
    per_unit: usize,
    m: usize,
    seed: u64,
) -> Result<FieldEnsemble> {
    let sheet = brownian_sheet(&driver_grid(truncation, hi, per_unit), m, seed)?;
    let window = Rect::cube(0.0, hi, 2)?;
    sheet.map(|g: GridField| ou_solve(&g, theta, truncation)?.base.slice_to(&window))
}
