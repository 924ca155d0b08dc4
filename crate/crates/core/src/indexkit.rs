//! Index algebra for coordinate subsets.
//!
//! Every formula in this crate sums over subsets `u ⊆ {1, …, N}` and builds
//! points by mixing coordinates from several vectors. [`MultiIndexSet`] stores a
//! subset as a bitmask together with its ambient dimension, so complements and
//! enumeration are cheap. Axes are 0-based in the Rust API; [`MultiIndexSet::members`]
//! reports the conventional 1-based labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension supported by the bitmask representation.
pub const MAX_DIM: usize = 16;

/// An ordered subset of the coordinate axes `{0, …, dim-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndexSet {
    mask: u32,
    dim: u8,
}

impl MultiIndexSet {
    pub fn empty(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            mask: 0,
            dim: dim as u8,
        }
    }

    pub fn full(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        Self {
            mask: (1u32 << dim) - 1,
            dim: dim as u8,
        }
    }

    /// Builds a subset from a raw bitmask (bit `i` selects axis `i`).
    pub fn from_mask(mask: u32, dim: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::DimensionOutOfRange(dim));
        }
        if mask >> dim != 0 {
            return Err(Error::InvalidIndex(format!(
                "mask {mask:#b} has bits beyond dimension {dim}"
            )));
        }
        Ok(Self { mask, dim: dim as u8 })
    }

    /// Builds a subset from 1-based coordinate labels.
    pub fn from_members(members: &[usize], dim: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &m in members {
            if m == 0 || m > dim {
                return Err(Error::InvalidIndex(format!("member {m} not in 1..={dim}")));
            }
            mask |= 1 << (m - 1);
        }
        Self::from_mask(mask, dim)
    }

    /// Builds a subset from 0-based axis indices.
    pub fn from_axes(axes: impl IntoIterator<Item = usize>, dim: usize) -> Result<Self> {
        let mut mask = 0u32;
        for a in axes {
            if a >= dim {
                return Err(Error::InvalidIndex(format!("axis {a} not below {dim}")));
            }
            mask |= 1 << a;
        }
        Self::from_mask(mask, dim)
    }

    pub fn singleton(axis: usize, dim: usize) -> Self {
        Self::from_axes([axis], dim).expect("axis within dimension")
    }

    #[inline]
    pub fn mask(&self) -> u32 {
        self.mask
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.len() == self.dim()
    }

    #[inline]
    pub fn contains(&self, axis: usize) -> bool {
        axis < self.dim() && self.mask & (1 << axis) != 0
    }

    /// `(-1)^{|u|}`.
    #[inline]
    pub fn sign(&self) -> f64 {
        if self.len() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// The complement `-u` with respect to all axes.
    #[inline]
    pub fn complement(&self) -> Self {
        Self {
            mask: !self.mask & ((1u32 << self.dim) - 1),
            dim: self.dim,
        }
    }

    /// `self - other`.
    #[inline]
    pub fn minus(&self, other: &Self) -> Self {
        Self {
            mask: self.mask & !other.mask,
            dim: self.dim,
        }
    }

    #[inline]
    pub fn union(&self, other: &Self) -> Self {
        Self {
            mask: self.mask | other.mask,
            dim: self.dim,
        }
    }

    #[inline]
    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            mask: self.mask & other.mask,
            dim: self.dim,
        }
    }

    #[inline]
    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask & other.mask == 0
    }

    #[inline]
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.mask & !other.mask == 0
    }

    /// 0-based axes in ascending order.
    pub fn axes(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.dim()).filter(move |&i| mask & (1 << i) != 0)
    }

    /// 1-based members in ascending order.
    pub fn members(&self) -> Vec<usize> {
        self.axes().map(|a| a + 1).collect()
    }

    /// All subsets of `self`, including the empty set and `self`.
    ///
    /// Enumerated in increasing bitmask order (not the canonical order of
    /// [`subsets`]); used for inner alternating sums where order is irrelevant.
    pub fn subsets(&self) -> SubmaskIter {
        SubmaskIter {
            full: self.mask,
            next: Some(0),
            dim: self.dim,
        }
    }

    /// `t_u`: the coordinates of `t` on this subset.
    pub fn pick(&self, t: &[f64]) -> Vec<f64> {
        self.axes().map(|a| t[a]).collect()
    }
}

impl fmt::Debug for MultiIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.members().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}/{}", self.dim)
    }
}

impl fmt::Display for MultiIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Iterator over all submasks of a mask.
pub struct SubmaskIter {
    full: u32,
    next: Option<u32>,
    dim: u8,
}

impl Iterator for SubmaskIter {
    type Item = MultiIndexSet;

    fn next(&mut self) -> Option<MultiIndexSet> {
        let cur = self.next?;
        // Standard "next submask" step: (cur - full) & full walks submasks upward.
        self.next = if cur == self.full {
            None
        } else {
            Some((cur.wrapping_sub(self.full)) & self.full)
        };
        Some(MultiIndexSet {
            mask: cur,
            dim: self.dim,
        })
    }
}

/// A point in `R^N` with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionOutOfRange(0));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("point coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn splat(value: f64, dim: usize) -> Self {
        Self(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

/// `s_u : t_{-u}`: coordinates of `s` on `u`, of `t` elsewhere.
pub fn compose(s: &[f64], t: &[f64], u: MultiIndexSet) -> Result<Vec<f64>> {
    if s.len() != u.dim() || t.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: if s.len() != u.dim() { s.len() } else { t.len() },
        });
    }
    let mut y = t.to_vec();
    compose_into(s, u, &mut y);
    Ok(y)
}

/// Overwrites the `u` coordinates of `target` with those of `s`.
#[inline]
pub fn compose_into(s: &[f64], u: MultiIndexSet, target: &mut [f64]) {
    let mut m = u.mask();
    while m != 0 {
        let a = m.trailing_zeros() as usize;
        target[a] = s[a];
        m &= m - 1;
    }
}

/// `t_u : s_w : r_{-u-w}`.
pub fn compose3(r: &[f64], s: &[f64], t: &[f64], u: MultiIndexSet, w: MultiIndexSet) -> Result<Vec<f64>> {
    if !u.is_disjoint(&w) {
        return Err(Error::InvalidIndex(format!("{u} and {w} overlap")));
    }
    if u.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: w.dim(),
        });
    }
    let mut y = compose(s, r, w)?;
    if t.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: t.len(),
        });
    }
    compose_into(t, u, &mut y);
    Ok(y)
}

/// All `2^N` subsets of `{1, …, N}`, ordered by size and then lexicographically
/// by their ascending member lists.
pub fn subsets(dim: usize) -> Result<Vec<MultiIndexSet>> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::DimensionOutOfRange(dim));
    }
    let mut out: Vec<MultiIndexSet> = (0..(1u32 << dim))
        .map(|mask| MultiIndexSet { mask, dim: dim as u8 })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.members().cmp(&b.members())));
    Ok(out)
}

/// Nonempty subsets in canonical order.
pub fn nonempty_subsets(dim: usize) -> Result<Vec<MultiIndexSet>> {
    Ok(subsets(dim)?.into_iter().filter(|v| !v.is_empty()).collect())
}

/// `Σ_{m=0}^{M} (-1)^m C(M, m)`, evaluated term by term. Zero for every `M ≥ 1`.
pub fn alternating_sum_check(m: u32) -> f64 {
    let mut binom = 1.0f64;
    let mut total = 0.0;
    for k in 0..=m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom;
        binom = binom * f64::from(m - k) / f64::from(k + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pick_matches_worked_example() {
        // N=5, u={2,4,5}: t_u = (t2, t4, t5).
        let t = [10.0, 20.0, 30.0, 40.0, 50.0];
        let u = MultiIndexSet::from_members(&[2, 4, 5], 5).unwrap();
        assert_eq!(u.pick(&t), vec![20.0, 40.0, 50.0]);
        let v = MultiIndexSet::from_members(&[2, 3], 5).unwrap();
        assert_eq!(u.minus(&v).members(), vec![4, 5]);
    }

    #[test]
    fn compose_identity_cases() {
        let s = [1.0, 2.0, 3.0];
        let t = [4.0, 5.0, 6.0];
        assert_eq!(compose(&s, &t, MultiIndexSet::empty(3)).unwrap(), t.to_vec());
        assert_eq!(compose(&s, &t, MultiIndexSet::full(3)).unwrap(), s.to_vec());
        assert!(compose(&s, &t[..2], MultiIndexSet::full(3)).is_err());
    }

    #[test]
    fn compose3_worked_example() {
        let r = [1.0, 2.0, 3.0, 4.0, 5.0];
        let s = [10.0, 20.0, 30.0, 40.0, 50.0];
        let t = [100.0, 200.0, 300.0, 400.0, 500.0];
        let u = MultiIndexSet::from_members(&[2, 4, 5], 5).unwrap();
        let w = MultiIndexSet::from_members(&[3], 5).unwrap();
        let y = compose3(&r, &s, &t, u, w).unwrap();
        assert_eq!(y, vec![1.0, 200.0, 30.0, 400.0, 500.0]);

        // w = ∅ reduces to compose(t, r, u).
        let e = MultiIndexSet::empty(5);
        assert_eq!(compose3(&r, &s, &t, u, e).unwrap(), compose(&t, &r, u).unwrap());

        // Overlap is rejected.
        assert!(compose3(&r, &s, &t, u, u).is_err());
    }

    #[test]
    fn compose3_full_cover_ignores_r() {
        let s = [1.0, 2.0];
        let t = [3.0, 4.0];
        let u = MultiIndexSet::from_members(&[1], 2).unwrap();
        let w = MultiIndexSet::from_members(&[2], 2).unwrap();
        let a = compose3(&[7.0, 7.0], &s, &t, u, w).unwrap();
        let b = compose3(&[-9.0, 9.0], &s, &t, u, w).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![3.0, 2.0]);
    }

    #[test]
    fn subsets_order_and_count() {
        let one = subsets(1).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one[0].is_empty());
        assert_eq!(one[1].members(), vec![1]);

        assert_eq!(subsets(2).unwrap().len(), 4);

        let three = subsets(3).unwrap();
        let labels: Vec<Vec<usize>> = three.iter().map(|u| u.members()).collect();
        assert_eq!(
            labels,
            vec![
                vec![],
                vec![1],
                vec![2],
                vec![3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![1, 2, 3]
            ]
        );
        let signed: f64 = three.iter().map(|u| u.sign()).sum();
        assert_eq!(signed, 0.0);

        assert!(subsets(0).is_err());
        assert!(subsets(17).is_err());
    }

    #[test]
    fn alternating_binomial_sums_vanish() {
        assert_eq!(alternating_sum_check(1), 0.0);
        assert_eq!(alternating_sum_check(3), 0.0);
        // Independent oracle: exact integer binomials.
        let mut exact: i64 = 0;
        let mut c: i64 = 1;
        for k in 0..=10i64 {
            exact += if k % 2 == 0 { c } else { -c };
            c = c * (10 - k) / (k + 1);
        }
        assert_eq!(exact, 0);
        assert_eq!(alternating_sum_check(10), exact as f64);
    }

    #[test]
    fn submask_iteration_covers_all() {
        let u = MultiIndexSet::from_members(&[1, 3, 4], 5).unwrap();
        let subs: Vec<_> = u.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|w| w.is_subset_of(&u)));
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
        assert_eq!(Point::new(vec![1.0, 2.0]).unwrap().sum(), 3.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn complement_is_involution(dim in 1usize..=16, raw in any::<u32>()) {
                let u = MultiIndexSet::from_mask(raw & ((1u32 << dim) - 1), dim).unwrap();
                prop_assert_eq!(u.complement().complement(), u);
                prop_assert_eq!(u.len() + u.complement().len(), dim);
            }

            #[test]
            fn compose_swaps_with_complement(
                s in proptest::collection::vec(-10.0f64..10.0, 4),
                t in proptest::collection::vec(-10.0f64..10.0, 4),
                raw in 0u32..16,
            ) {
                let u = MultiIndexSet::from_mask(raw, 4).unwrap();
                prop_assert_eq!(
                    compose(&s, &t, u).unwrap(),
                    compose(&t, &s, u.complement()).unwrap()
                );
            }

            #[test]
            fn subsets_are_distinct(dim in 1usize..=10) {
                let all = subsets(dim).unwrap();
                prop_assert_eq!(all.len(), 1usize << dim);
                let mut masks: Vec<u32> = all.iter().map(|u| u.mask()).collect();
                masks.sort_unstable();
                masks.dedup();
                prop_assert_eq!(masks.len(), 1usize << dim);
            }
        }
    }
}
