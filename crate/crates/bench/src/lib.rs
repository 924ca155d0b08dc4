//! Shared inputs for the benchmarks.

use oufield::{GridPartition, Rect, SeparableSum, Univariate};

/// `e^{Σx/2} + ∏ sin(2x)`, smooth and non-separable across terms.
pub fn smooth(dim: usize) -> SeparableSum {
    SeparableSum::exp_linear(&vec![0.5; dim]).with_term(1.0, vec![Univariate::Sin { freq: 2.0, phase: 0.0 }; dim])
}

/// `[lo, hi]^dim` with `cells` cells per axis.
pub fn cube(lo: f64, hi: f64, dim: usize, cells: usize) -> GridPartition {
    GridPartition::uniform_cube(&Rect::cube(lo, hi, dim).expect("valid cube"), cells).expect("valid grid")
}
