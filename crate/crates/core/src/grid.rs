//! Tensor-grid partitions of hyperrectangles, sampled fields, and rectangular
//! increments.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::Integrand;
use crate::indexkit::{MultiIndexSet, MAX_DIM};
use crate::numeric::Neumaier;

/// Relative slack used when matching coordinates against breakpoints.
const SNAP_TOL: f64 = 1e-9;

/// A closed box `[lower, upper]`; bounds may be given in either order per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Rect {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::DimensionOutOfRange(lower.len()));
        }
        if lower.iter().chain(&upper).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("box corner".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(a, b)| a == b)
    }

    /// The same box with `lower ≤ upper` on every axis, and `(-1)^m` where `m`
    /// counts the swapped axes.
    pub fn oriented(&self) -> (Rect, f64) {
        let mut lo = self.lower.clone();
        let mut hi = self.upper.clone();
        let mut sign = 1.0;
        for a in 0..lo.len() {
            if lo[a] > hi[a] {
                std::mem::swap(&mut lo[a], &mut hi[a]);
                sign = -sign;
            }
        }
        (Rect { lower: lo, upper: hi }, sign)
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| (b - a).abs()).product()
    }

    /// Corner `s_v : t_{-v}` (lower on `v`, upper elsewhere).
    pub fn corner(&self, v: MultiIndexSet) -> Vec<f64> {
        let mut p = self.upper.clone();
        crate::indexkit::compose_into(&self.lower, v, &mut p);
        p
    }

    /// The sub-box on the axes of `v`.
    pub fn project(&self, v: MultiIndexSet) -> Rect {
        Rect {
            lower: v.pick(&self.lower),
            upper: v.pick(&self.upper),
        }
    }
}

/// Per-axis strictly increasing breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPartition {
    axes: Vec<Vec<f64>>,
}

impl GridPartition {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::DimensionOutOfRange(axes.len()));
        }
        for (a, ax) in axes.iter().enumerate() {
            if ax.len() < 2 {
                return Err(Error::InvalidPartition(format!(
                    "axis {a} has {} breakpoints, need at least 2",
                    ax.len()
                )));
            }
            if ax.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("breakpoint on axis {a}")));
            }
            if ax.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidPartition(format!("axis {a} is not strictly increasing")));
            }
        }
        Ok(Self { axes })
    }

    /// Uniform partition with `cells[a]` cells on axis `a`.
    pub fn uniform(rect: &Rect, cells: &[usize]) -> Result<Self> {
        if cells.len() != rect.dim() {
            return Err(Error::DimensionMismatch {
                expected: rect.dim(),
                found: cells.len(),
            });
        }
        let axes = (0..rect.dim())
            .map(|a| {
                let (lo, hi) = (rect.lower[a], rect.upper[a]);
                let n = cells[a];
                (0..=n)
                    .map(|k| {
                        if k == n {
                            hi
                        } else {
                            lo + (hi - lo) * (k as f64) / (n as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(axes)
    }

    pub fn uniform_cube(rect: &Rect, cells: usize) -> Result<Self> {
        Self::uniform(rect, &vec![cells; rect.dim()])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &[f64] {
        &self.axes[a]
    }

    pub fn lower(&self) -> Vec<f64> {
        self.axes.iter().map(|ax| ax[0]).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.axes.iter().map(|ax| *ax.last().unwrap()).collect()
    }

    pub fn rect(&self) -> Rect {
        Rect {
            lower: self.lower(),
            upper: self.upper(),
        }
    }

    /// `‖P‖`: the largest gap between consecutive breakpoints on any axis.
    pub fn norm(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|ax| ax.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    pub fn cells_per_axis(&self) -> Vec<usize> {
        self.axes.iter().map(|ax| ax.len() - 1).collect()
    }

    pub fn nodes_per_axis(&self) -> Vec<usize> {
        self.axes.iter().map(|ax| ax.len()).collect()
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|ax| ax.len()).product()
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|ax| ax.len() - 1).product()
    }

    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.axes[a][i]).collect()
    }

    /// Splits every cell uniformly into `factor` pieces per axis.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::InvalidParameter(format!(
                "refinement factor {factor} must be at least 2"
            )));
        }
        let axes = self
            .axes
            .iter()
            .map(|ax| {
                let mut out = Vec::with_capacity((ax.len() - 1) * factor + 1);
                for w in ax.windows(2) {
                    for k in 0..factor {
                        out.push(w[0] + (w[1] - w[0]) * (k as f64) / (factor as f64));
                    }
                }
                out.push(*ax.last().unwrap());
                out
            })
            .collect();
        Self::new(axes)
    }

    /// Keeps every `stride`-th breakpoint and both endpoints.
    pub fn coarsen(&self, stride: usize) -> Self {
        let axes = self
            .axes
            .iter()
            .map(|ax| {
                let last = ax.len() - 1;
                let mut out: Vec<f64> = ax.iter().step_by(stride.max(1)).copied().collect();
                if (last % stride.max(1)) != 0 {
                    out.push(ax[last]);
                }
                out
            })
            .collect();
        Self { axes }
    }

    /// Index of the breakpoint equal to `x` on `axis`, within a small relative
    /// tolerance.
    pub fn locate(&self, axis: usize, x: f64) -> Option<usize> {
        locate_breakpoint(&self.axes[axis], x)
    }

    /// The sub-partition spanning breakpoints `lo[a]..=hi[a]` on each axis.
    pub fn slice(&self, lo: &[usize], hi: &[usize]) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .enumerate()
            .map(|(a, ax)| ax[lo[a]..=hi[a]].to_vec())
            .collect();
        Self::new(axes)
    }

    /// The sub-partition between the breakpoints matching `rect`'s corners.
    pub fn slice_to(&self, rect: &Rect) -> Result<Self> {
        let (r, _) = rect.oriented();
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let i = self
                .locate(a, r.lower[a])
                .ok_or_else(|| Error::Misaligned(format!("{} is not a breakpoint on axis {a}", r.lower[a])))?;
            let j = self
                .locate(a, r.upper[a])
                .ok_or_else(|| Error::Misaligned(format!("{} is not a breakpoint on axis {a}", r.upper[a])))?;
            lo.push(i);
            hi.push(j);
        }
        self.slice(&lo, &hi)
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        strides_of(&self.nodes_per_axis())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self.axes.iter().zip(x).all(|(ax, &xi)| {
                let lo = ax[0];
                let hi = ax[ax.len() - 1];
                let tol = SNAP_TOL * (hi - lo).abs().max(1.0);
                xi >= lo - tol && xi <= hi + tol
            })
    }

    /// Calls `visit(flat_index, multi_index)` for every node in row-major order.
    pub fn for_each_node(&self, mut visit: impl FnMut(usize, &[usize])) {
        let shape = self.nodes_per_axis();
        for_each_index(&shape, |flat, idx| visit(flat, idx));
    }
}

/// Index of the breakpoint of `ax` equal to `x` within a small relative
/// tolerance.
pub fn locate_breakpoint(ax: &[f64], x: f64) -> Option<usize> {
    let span = (ax[ax.len() - 1] - ax[0]).abs().max(1.0);
    let tol = SNAP_TOL * span;
    let i = ax.partition_point(|&b| b < x - tol);
    (i < ax.len() && (ax[i] - x).abs() <= tol).then_some(i)
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Row-major odometer over `shape` (last axis fastest).
pub(crate) fn for_each_index(shape: &[usize], mut visit: impl FnMut(usize, &[usize])) {
    if shape.iter().any(|&n| n == 0) {
        return;
    }
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        visit(flat, &idx);
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Applies the backward difference along every axis: node tensor of shape
/// `n_a + 1` becomes the cell-increment tensor of shape `n_a`.
pub(crate) fn difference_all_axes(values: &[f64], shape: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let mut cur = values.to_vec();
    let mut cur_shape = shape.to_vec();
    for a in 0..shape.len() {
        let mut next_shape = cur_shape.clone();
        next_shape[a] -= 1;
        let outer: usize = cur_shape[..a].iter().product();
        let inner: usize = cur_shape[a + 1..].iter().product();
        let n = cur_shape[a];
        let mut next = Vec::with_capacity(outer * (n - 1) * inner);
        for o in 0..outer {
            for i in 1..n {
                let hi = (o * n + i) * inner;
                let lo = (o * n + i - 1) * inner;
                for k in 0..inner {
                    next.push(cur[hi + k] - cur[lo + k]);
                }
            }
        }
        cur = next;
        cur_shape = next_shape;
    }
    (cur, cur_shape)
}

/// Inverse of [`difference_all_axes`] pinned at `anchor`: a node tensor whose
/// cell increments are `cells` and which vanishes on every node sharing a
/// coordinate with the anchor node. Nodes before the anchor on an axis get
/// the oriented (negated) partial sum.
pub(crate) fn integrate_cells(cells: &[f64], cell_shape: &[usize], anchor: &[usize]) -> Vec<f64> {
    let mut cur = cells.to_vec();
    let mut shape = cell_shape.to_vec();
    for a in 0..shape.len() {
        let outer: usize = shape[..a].iter().product();
        let inner: usize = shape[a + 1..].iter().product();
        let n = shape[a];
        let z = anchor[a];
        let mut next = vec![0.0; outer * (n + 1) * inner];
        for o in 0..outer {
            for k in 0..inner {
                let at = |j: usize| (o * (n + 1) + j) * inner + k;
                let cell = |i: usize| cur[(o * n + i) * inner + k];
                let mut acc = 0.0;
                for j in z + 1..=n {
                    acc += cell(j - 1);
                    next[at(j)] = acc;
                }
                acc = 0.0;
                for j in (0..z).rev() {
                    acc -= cell(j);
                    next[at(j)] = acc;
                }
            }
        }
        cur = next;
        shape[a] += 1;
    }
    cur
}

/// Scalar values on every node of a [`GridPartition`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    partition: GridPartition,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(partition: GridPartition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.node_count() {
            return Err(Error::Format(format!(
                "{} values for {} grid nodes",
                values.len(),
                partition.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid field value".into()));
        }
        Ok(Self { partition, values })
    }

    pub fn zeros(partition: GridPartition) -> Self {
        let n = partition.node_count();
        Self {
            partition,
            values: vec![0.0; n],
        }
    }

    /// Evaluates `f` at every node.
    pub fn sample(f: &impl Integrand, partition: &GridPartition) -> Result<Self> {
        let mut values = vec![0.0; partition.node_count()];
        let mut bad = None;
        partition.for_each_node(|flat, idx| {
            let x = partition.node(idx);
            let v = f.eval(&x);
            if !v.is_finite() && bad.is_none() {
                bad = Some(x);
            }
            values[flat] = v;
        });
        if let Some(x) = bad {
            return Err(Error::NonFinite(format!("sample at {x:?}")));
        }
        Ok(Self {
            partition: partition.clone(),
            values,
        })
    }

    /// Builds a field from `(node coordinates, current value) -> new value`.
    pub fn map_nodes(&self, mut f: impl FnMut(&[f64], f64) -> f64) -> Result<Self> {
        let mut values = self.values.clone();
        self.partition.for_each_node(|flat, idx| {
            let x = self.partition.node(idx);
            values[flat] = f(&x, self.values[flat]);
        });
        Self::new(self.partition.clone(), values)
    }

    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.partition != other.partition {
            return Err(Error::Misaligned("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.partition.clone(), values)
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn value_at(&self, idx: &[usize]) -> f64 {
        let strides = self.partition.strides();
        let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.values[flat]
    }

    /// The value at node `x`, if `x` is (within tolerance) a grid node.
    pub fn value_at_point(&self, x: &[f64]) -> Option<f64> {
        let idx: Option<Vec<usize>> = (0..self.dim()).map(|a| self.partition.locate(a, x[a])).collect();
        idx.map(|i| self.value_at(&i))
    }

    /// Restriction to the sub-grid spanned by `rect` (corners must be nodes).
    pub fn slice_to(&self, rect: &Rect) -> Result<Self> {
        let sub = self.partition.slice_to(rect)?;
        Self::sample(self, &sub)
    }

    /// Increment over cell `cell` (`cell[a]` indexes the gap between
    /// breakpoints `cell[a]` and `cell[a] + 1`).
    pub fn cell_increment(&self, cell: &[usize]) -> Result<f64> {
        let dim = self.dim();
        if cell.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: cell.len(),
            });
        }
        for (a, &c) in cell.iter().enumerate() {
            if c + 1 >= self.partition.axes[a].len() {
                return Err(Error::InvalidIndex(format!("cell index {c} out of range on axis {a}")));
            }
        }
        let strides = self.partition.strides();
        let base: usize = cell.iter().zip(&strides).map(|(i, s)| i * s).sum();
        let mut total = 0.0;
        // v selects the lower breakpoint on its axes.
        for raw in 0..(1u32 << dim) {
            let v = MultiIndexSet::from_mask(raw, dim)?;
            let mut flat = base;
            for a in 0..dim {
                if !v.contains(a) {
                    flat += strides[a];
                }
            }
            total += v.sign() * self.values[flat];
        }
        Ok(total)
    }

    /// Increments of every cell, row-major over the cell tensor.
    pub fn cell_increments(&self) -> Vec<f64> {
        difference_all_axes(&self.values, &self.partition.nodes_per_axis()).0
    }

    /// Multilinear interpolation; `x` is clamped onto the grid box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let dim = self.dim();
        debug_assert_eq!(x.len(), dim);
        let strides = self.partition.strides();
        let mut base = 0usize;
        let mut frac = [0.0f64; MAX_DIM];
        for a in 0..dim {
            let ax = &self.partition.axes[a];
            let n = ax.len();
            let xa = x[a].clamp(ax[0], ax[n - 1]);
            let i = ax.partition_point(|&b| b <= xa).clamp(1, n - 1) - 1;
            frac[a] = (xa - ax[i]) / (ax[i + 1] - ax[i]);
            base += i * strides[a];
        }
        let mut total = 0.0;
        for raw in 0..(1u32 << dim) {
            let mut w = 1.0;
            let mut flat = base;
            for a in 0..dim {
                if raw & (1 << a) != 0 {
                    w *= frac[a];
                    flat += strides[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                total += w * self.values[flat];
            }
        }
        total
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            dim: self.dim(),
            axes: self.partition.axes.clone(),
        }
    }

    /// CSV body: `x1,…,xN,value`, one row per node in row-major order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.dim();
        let mut header: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(dim + 1);
        let mut err = None;
        self.partition.for_each_node(|flat, idx| {
            if err.is_some() {
                return;
            }
            row.clear();
            for (a, &i) in idx.iter().enumerate() {
                row.push(self.partition.axes[a][i].to_string());
            }
            row.push(self.values[flat].to_string());
            if let Err(e) = w.write_record(&row) {
                err = Some(e);
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(header: &GridHeader, input: R) -> Result<Self> {
        let partition = GridPartition::new(header.axes.clone())?;
        if header.dim != partition.dim() {
            return Err(Error::Format("header dimension disagrees with axes".into()));
        }
        let mut rdr = csv::Reader::from_reader(input);
        let dim = partition.dim();
        let mut values = Vec::with_capacity(partition.node_count());
        let mut expected = Vec::with_capacity(partition.node_count());
        partition.for_each_node(|_, idx| expected.push(partition.node(idx)));
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != dim + 1 {
                return Err(Error::Format(format!(
                    "row {k} has {} columns, expected {}",
                    rec.len(),
                    dim + 1
                )));
            }
            let node = expected
                .get(k)
                .ok_or_else(|| Error::Format("more rows than grid nodes".into()))?;
            for a in 0..dim {
                let x: f64 = rec[a]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Format(format!("row {k} column {a}: {e}")))?;
                if x != node[a] {
                    return Err(Error::Format(format!(
                        "row {k} coordinate {a} is {x}, header says {}",
                        node[a]
                    )));
                }
            }
            let v: f64 = rec[dim]
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("row {k} value: {e}")))?;
            values.push(v);
        }
        Self::new(partition, values)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let mut body = Vec::new();
        self.write_csv(&mut body)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        write_atomic(&csv_path, &body)?;
        write_atomic(&json_path, serde_json::to_string_pretty(&self.header())?.as_bytes())?;
        Ok((csv_path, json_path))
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let header: GridHeader = serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json")))?)?;
        let file = fs::File::open(dir.join(format!("{stem}.csv")))?;
        Self::read_csv(&header, file)
    }
}

impl Integrand for GridField {
    fn eval(&self, x: &[f64]) -> f64 {
        self.interpolate(x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.partition.contains(x)
    }

    fn native_axis(&self, axis: usize) -> Option<&[f64]> {
        Some(&self.partition.axes[axis])
    }
}

/// JSON sidecar describing the grid of a CSV field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub dim: usize,
    pub axes: Vec<Vec<f64>>,
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `[F]_s^t = Σ_{v} (-1)^{|v|} F(s_v : t_{-v})`.
///
/// Valid for any ordering of `s` and `t`; swapped axes contribute the sign
/// automatically. A box that is degenerate in some coordinate returns exactly
/// zero without evaluating `F`.
pub fn rect_increment(f: &(impl Integrand + ?Sized), s: &[f64], t: &[f64]) -> Result<f64> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            found: t.len(),
        });
    }
    let dim = s.len();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DimensionOutOfRange(dim));
    }
    if s.iter().zip(t).any(|(a, b)| a == b) {
        return Ok(0.0);
    }
    for p in [s, t] {
        if !f.contains(p) {
            return Err(Error::OutsideDomain { point: p.to_vec() });
        }
    }
    let mut buf = [0.0; MAX_DIM];
    let mut total = Neumaier::default();
    for raw in 0..(1u32 << dim) {
        buf[..dim].copy_from_slice(t);
        let v = MultiIndexSet::from_mask(raw, dim)?;
        crate::indexkit::compose_into(s, v, &mut buf[..dim]);
        total.add(v.sign() * f.eval(&buf[..dim]));
    }
    Ok(total.total())
}

/// Bracket over a sub-box: `[F(r)]_{s_u}^{t_u}` with `r_{-u}` held fixed.
pub fn rect_increment_on(f: &(impl Integrand + ?Sized), r: &[f64], s: &[f64], t: &[f64], u: MultiIndexSet) -> f64 {
    let dim = r.len();
    if u.axes().any(|a| s[a] == t[a]) {
        return 0.0;
    }
    let mut buf = [0.0; MAX_DIM];
    let mut total = 0.0;
    for v in u.subsets() {
        buf[..dim].copy_from_slice(r);
        crate::indexkit::compose_into(t, u.minus(&v), &mut buf[..dim]);
        crate::indexkit::compose_into(s, v, &mut buf[..dim]);
        total += v.sign() * f.eval(&buf[..dim]);
    }
    total
}
