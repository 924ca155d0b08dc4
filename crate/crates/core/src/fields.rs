//! Gaussian driver ensembles on tensor grids (Brownian sheet, fractional
//! Brownian sheet, arbitrary covariance) and structural checks for drivers
//! of the Ornstein–Uhlenbeck transforms.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{difference_all_axes, integrate_cells, strides_of, write_atomic, GridField, GridPartition, Rect};
use crate::indexkit::{MultiIndexSet, MAX_DIM};
use crate::stats::{paired_mean_difference, paired_scaled_cov_difference, TestReport, MIN_REPLICATIONS};

/// Largest grid accepted by the dense covariance factorization.
pub const MAX_DENSE_NODES: usize = 4096;

/// Derives an independent seed for the named stream from a master seed.
pub fn sub_seed(seed: u64, name: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed.to_le_bytes().iter().chain(name.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// The generator for replication `rep` of an ensemble seeded with `seed`.
pub(crate) fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Strictly positive drift rates `θ_1, …, θ_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_DIM {
            return Err(Error::DimensionOutOfRange(components.len()));
        }
        if let Some(bad) = components.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "theta component {bad} must be positive"
            )));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.len(),
            });
        }
        Ok(self.0.iter().zip(t).map(|(a, b)| a * b).sum())
    }

    /// `∏_{i∈u} θ_i`.
    pub fn product_over(&self, u: MultiIndexSet) -> f64 {
        u.axes().map(|a| self.0[a]).product()
    }

    /// Smallest whole truncation `s̄` with `max_i e^{-θ_i s̄} < 1e-6`.
    pub fn default_truncation(&self) -> f64 {
        let min = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        (1e6f64.ln() / min).floor() + 1.0
    }

    /// `max_i e^{-θ_i s̄}`, the decay of the dropped tail at truncation `s̄`.
    pub fn truncation_bound(&self, s_bar: f64) -> f64 {
        self.0.iter().map(|th| (-th * s_bar).exp()).fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for ThetaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ThetaVector> for Vec<f64> {
    fn from(t: ThetaVector) -> Self {
        t.0
    }
}

/// Hurst indices, each in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HurstVector(Vec<f64>);

impl HurstVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_DIM {
            return Err(Error::DimensionOutOfRange(components.len()));
        }
        if let Some(bad) = components.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(Error::InvalidParameter(format!("Hurst index {bad} must lie in (0, 1)")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for HurstVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<HurstVector> for Vec<f64> {
    fn from(h: HurstVector) -> Self {
        h.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub driver: String,
    pub parameters: serde_json::Value,
}

impl EnsembleMeta {
    pub fn new(driver: impl Into<String>, parameters: serde_json::Value) -> Self {
        Self {
            driver: driver.into(),
            parameters,
        }
    }
}

/// `M` sampled fields on one shared partition.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEnsemble {
    partition: GridPartition,
    replications: Vec<Vec<f64>>,
    seed: u64,
    meta: EnsembleMeta,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    driver: String,
    parameters: serde_json::Value,
    seed: u64,
    replications: usize,
    dim: usize,
    axes: Vec<Vec<f64>>,
    files: Vec<String>,
}

impl FieldEnsemble {
    pub fn new(partition: GridPartition, replications: Vec<Vec<f64>>, seed: u64, meta: EnsembleMeta) -> Result<Self> {
        if replications.is_empty() {
            return Err(Error::InvalidParameter(
                "an ensemble needs at least one replication".into(),
            ));
        }
        let n = partition.node_count();
        for (i, r) in replications.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Format(format!(
                    "replication {i} has {} values for {n} nodes",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("replication {i}")));
            }
        }
        Ok(Self {
            partition,
            replications,
            seed,
            meta,
        })
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.replications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replications.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn meta(&self) -> &EnsembleMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: EnsembleMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn values(&self, rep: usize) -> &[f64] {
        &self.replications[rep]
    }

    pub fn field(&self, rep: usize) -> GridField {
        GridField::new(self.partition.clone(), self.replications[rep].clone())
            .expect("replications are validated on construction")
    }

    /// Flat index of the grid node at `x`.
    pub fn node_index(&self, x: &[f64]) -> Result<usize> {
        node_index(&self.partition, x)
    }

    /// `X_m(x)` for every replication `m`.
    pub fn node_samples(&self, x: &[f64]) -> Result<Vec<f64>> {
        let i = self.node_index(x)?;
        Ok(self.replications.iter().map(|r| r[i]).collect())
    }

    /// `[X_m]_s^t` for every replication `m`; the corners must be nodes.
    pub fn increment_samples(&self, s: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        let dim = self.partition.dim();
        if s.len() != dim || t.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.len().min(t.len()),
            });
        }
        if s.iter().zip(t).any(|(a, b)| a == b) {
            return Ok(vec![0.0; self.len()]);
        }
        let mut corners = Vec::with_capacity(1 << dim);
        for v in MultiIndexSet::full(dim).subsets() {
            let p = crate::indexkit::compose(s, t, v)?;
            corners.push((v.sign(), node_index(&self.partition, &p)?));
        }
        Ok(self
            .replications
            .iter()
            .map(|r| crate::numeric::neumaier_sum(corners.iter().map(|(sg, i)| sg * r[*i])))
            .collect())
    }

    /// Applies `f` to every replication in parallel. All outputs must share
    /// one partition.
    pub fn map<F>(&self, f: F) -> Result<FieldEnsemble>
    where
        F: Fn(GridField) -> Result<GridField> + Sync,
    {
        let fields: Vec<GridField> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.field(i)))
            .collect::<Result<_>>()?;
        let partition = fields[0].partition().clone();
        if fields.iter().any(|g| g.partition() != &partition) {
            return Err(Error::Misaligned("mapped replications disagree on the grid".into()));
        }
        let reps = fields.into_iter().map(GridField::into_values).collect();
        FieldEnsemble::new(partition, reps, self.seed, self.meta.clone())
    }

    /// Restriction of every replication to the sub-grid spanned by `rect`.
    pub fn slice_to(&self, rect: &Rect) -> Result<FieldEnsemble> {
        self.map(|g| g.slice_to(rect))
    }

    /// Writes `rep_00000.csv`, … and `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let name = format!("rep_{i:05}.csv");
            let mut body = Vec::new();
            self.field(i).write_csv(&mut body)?;
            write_atomic(&dir.join(&name), &body)?;
            files.push(name);
        }
        let manifest = Manifest {
            driver: self.meta.driver.clone(),
            parameters: self.meta.parameters.clone(),
            seed: self.seed,
            replications: self.len(),
            dim: self.partition.dim(),
            axes: self.partition.axes().to_vec(),
            files,
        };
        write_atomic(
            &dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?.as_bytes(),
        )
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
        if manifest.files.len() != manifest.replications {
            return Err(Error::Format(
                "manifest file list does not match the replication count".into(),
            ));
        }
        let header = crate::grid::GridHeader {
            dim: manifest.dim,
            axes: manifest.axes,
        };
        let mut reps = Vec::with_capacity(manifest.replications);
        let mut partition = None;
        for name in &manifest.files {
            let f = GridField::read_csv(&header, fs::File::open(dir.join(name))?)?;
            partition.get_or_insert_with(|| f.partition().clone());
            reps.push(f.into_values());
        }
        let partition = partition.ok_or_else(|| Error::Format("empty ensemble".into()))?;
        Self::new(
            partition,
            reps,
            manifest.seed,
            EnsembleMeta::new(manifest.driver, manifest.parameters),
        )
    }
}

pub(crate) fn node_index(p: &GridPartition, x: &[f64]) -> Result<usize> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x.len(),
        });
    }
    if !p.contains(x) {
        return Err(Error::Coverage(format!("{x:?} lies outside the grid")));
    }
    let strides = p.strides();
    let mut flat = 0;
    for (a, &xa) in x.iter().enumerate() {
        let i = p
            .locate(a, xa)
            .ok_or_else(|| Error::Misaligned(format!("{xa} is not a breakpoint on axis {a}")))?;
        flat += i * strides[a];
    }
    Ok(flat)
}

/// Lower Cholesky factor of `cov` with the smallest diagonal jitter that
/// makes it factorizable.
fn jittered_cholesky(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    let scale = (0..n).map(|i| cov[(i, i)]).fold(0.0, f64::max);
    let mut jitter = 0.0;
    loop {
        let mut m = cov.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok(ch.unpack());
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 10.0 };
        if jitter > 1e-6 * scale {
            return Err(Error::Factorization(format!(
                "covariance on {n} nodes is not positive semidefinite (jitter up to {:.1e})",
                1e-6 * scale
            )));
        }
    }
}

/// `M` independent mean-zero Gaussian fields on `p` with covariance `cov`.
///
/// Nodes with zero variance are held at zero exactly. Replication `m` uses
/// its own stream of the seeded generator, so results do not depend on
/// scheduling.
pub fn gaussian_field<C>(cov: &C, p: &GridPartition, m: usize, seed: u64) -> Result<FieldEnsemble>
where
    C: Fn(&[f64], &[f64]) -> f64 + Sync + ?Sized,
{
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let n = p.node_count();
    if n > MAX_DENSE_NODES {
        return Err(Error::InvalidParameter(format!(
            "{n} grid nodes exceed the dense sampling limit of {MAX_DENSE_NODES}"
        )));
    }
    let mut nodes = Vec::with_capacity(n);
    p.for_each_node(|_, idx| nodes.push(p.node(idx)));
    let active: Vec<usize> = (0..n).filter(|&i| cov(&nodes[i], &nodes[i]) != 0.0).collect();
    let k = active.len();
    let mut reps = vec![vec![0.0; n]; m];
    if k > 0 {
        let mut c = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = cov(&nodes[active[i]], &nodes[active[j]]);
                if !v.is_finite() {
                    return Err(Error::NonFinite("covariance value".into()));
                }
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        let l = jittered_cholesky(c)?;
        reps.par_iter_mut().enumerate().for_each(|(rep, out)| {
            let mut rng = replication_rng(seed, rep);
            let z = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
            let x = &l * z;
            for (slot, &i) in active.iter().enumerate() {
                out[i] = x[slot];
            }
        });
    }
    FieldEnsemble::new(
        p.clone(),
        reps,
        seed,
        EnsembleMeta::new("gaussian", serde_json::Value::Null),
    )
}

/// Brownian sheet `W` on `p`: covariance `∏ min(s_i, t_i)` on the nonnegative
/// orthant, independent sheets on the other orthants, zero on every
/// coordinate hyperplane.
///
/// Sampled through independent cell increments with variance equal to the
/// cell volume, summed outward from the origin. This gives the same law as
/// the dense construction without its node limit.
pub fn brownian_sheet(p: &GridPartition, m: usize, seed: u64) -> Result<FieldEnsemble> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one replication".into()));
    }
    let dim = p.dim();
    let mut axes = Vec::with_capacity(dim);
    let mut anchor = Vec::with_capacity(dim);
    let mut keep: Vec<Vec<usize>> = Vec::with_capacity(dim);
    for a in 0..dim {
        let ax = p.axis(a);
        let (ext, z, kept) = match p.locate(a, 0.0) {
            Some(z) => {
                let mut ext = ax.to_vec();
                ext[z] = 0.0;
                (ext, z, (0..ax.len()).collect())
            }
            None => {
                let z = ax.partition_point(|&x| x < 0.0);
                let mut ext = ax.to_vec();
                ext.insert(z, 0.0);
                let kept = (0..ext.len()).filter(|&i| i != z).collect();
                (ext, z, kept)
            }
        };
        axes.push(ext);
        anchor.push(z);
        keep.push(kept);
    }
    let ext = GridPartition::new(axes)?;
    let cell_shape = ext.cells_per_axis();
    let n_cells: usize = cell_shape.iter().product();
    let mut sd = vec![1.0; n_cells];
    crate::grid::for_each_index(&cell_shape, |flat, idx| {
        sd[flat] = (0..dim)
            .map(|a| ext.axis(a)[idx[a] + 1] - ext.axis(a)[idx[a]])
            .product::<f64>()
            .sqrt();
    });
    let ext_strides = strides_of(&ext.nodes_per_axis());
    let out_shape = p.nodes_per_axis();
    let mut gather = Vec::with_capacity(p.node_count());
    crate::grid::for_each_index(&out_shape, |_, idx| {
        gather.push((0..dim).map(|a| keep[a][idx[a]] * ext_strides[a]).sum::<usize>());
    });
    let reps: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let cells: Vec<f64> = sd
                .iter()
                .map(|s| s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let full = integrate_cells(&cells, &cell_shape, &anchor);
            gather.iter().map(|&i| full[i]).collect()
        })
        .collect();
    FieldEnsemble::new(
        p.clone(),
        reps,
        seed,
        EnsembleMeta::new("brownian-sheet", serde_json::Value::Null),
    )
}

/// `∏_i ½(|s_i|^{2H_i} + |t_i|^{2H_i} − |t_i − s_i|^{2H_i})`.
pub fn fbm_covariance(h: &HurstVector, s: &[f64], t: &[f64]) -> f64 {
    h.0.iter()
        .zip(s.iter().zip(t))
        .map(|(&hi, (&si, &ti))| {
            let e = 2.0 * hi;
            0.5 * (si.abs().powf(e) + ti.abs().powf(e) - (ti - si).abs().powf(e))
        })
        .product()
}

/// Anisotropic fractional Brownian sheet with the product covariance
/// [`fbm_covariance`].
pub fn fbm_sheet(h: &HurstVector, p: &GridPartition, m: usize, seed: u64) -> Result<FieldEnsemble> {
    if h.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: h.dim(),
        });
    }
    let cov = |s: &[f64], t: &[f64]| fbm_covariance(h, s, t);
    let e = gaussian_field(&cov, p, m, seed)?;
    Ok(e.with_meta(EnsembleMeta::new(
        "fbm-sheet",
        serde_json::json!({ "hurst": h.components() }),
    )))
}

/// z-tests that the mean and the variance of `[X]_{s+h}^{t+h}` match those of
/// `[X]_s^t` for every probe box and shift.
pub fn check_stationary_increments(
    e: &FieldEnsemble,
    shifts: &[Vec<f64>],
    probes: &[Rect],
    alpha: f64,
) -> Result<TestReport> {
    if e.len() < MIN_REPLICATIONS {
        return Err(Error::TooFewReplications {
            needed: MIN_REPLICATIONS,
            have: e.len(),
        });
    }
    let mut stats = Vec::with_capacity(2 * shifts.len() * probes.len());
    for h in shifts {
        for r in probes {
            let sh: Vec<f64> = r.lower.iter().zip(h).map(|(a, b)| a + b).collect();
            let th: Vec<f64> = r.upper.iter().zip(h).map(|(a, b)| a + b).collect();
            let moved = e.increment_samples(&sh, &th)?;
            let base = e.increment_samples(&r.lower, &r.upper)?;
            let label = format!("[{:?},{:?}] +{:?}", r.lower, r.upper, h);
            stats.push(paired_mean_difference(&moved, &base, format!("mean {label}")));
            stats.push(paired_scaled_cov_difference(
                (&moved, &moved),
                (&base, &base),
                1.0,
                format!("var {label}"),
            ));
        }
    }
    TestReport::new("stationary-increments", alpha, stats)
}

/// Cell increments of `g` weighted by `e^{Θ·ξ}` at cell midpoints, with the
/// cell shape.
pub(crate) fn exp_weighted_cells(g: &GridField, theta: &ThetaVector) -> Result<(Vec<f64>, Vec<usize>)> {
    let p = g.partition();
    if theta.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: theta.dim(),
        });
    }
    let (mut cells, shape) = difference_all_axes(g.values(), &p.nodes_per_axis());
    let th = theta.components();
    let factors: Vec<Vec<f64>> = (0..p.dim())
        .map(|a| {
            p.axis(a)
                .windows(2)
                .map(|w| (th[a] * 0.5 * (w[0] + w[1])).exp())
                .collect()
        })
        .collect();
    crate::grid::for_each_index(&shape, |flat, idx| {
        cells[flat] *= idx.iter().enumerate().map(|(a, &i)| factors[a][i]).product::<f64>();
    });
    Ok((cells, shape))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationProbe {
    pub levels: Vec<f64>,
    /// `∫_{-s·1}^{t} e^{Θ·u} dG(u)` for each level `s`.
    pub values: Vec<f64>,
    /// Successive differences of `values`.
    pub differences: Vec<f64>,
}

/// Truncated weighted integrals `∫_{-s·1}^{t} e^{Θ·u} dG(u)` for increasing
/// `s`, whose differences show whether the integral from `-∞` settles.
pub fn g_theta_truncation_probe(
    g: &GridField,
    theta: &ThetaVector,
    t: &[f64],
    s_levels: &[f64],
) -> Result<TruncationProbe> {
    let p = g.partition();
    let dim = p.dim();
    let (cells, shape) = exp_weighted_cells(g, theta)?;
    let hi = locate_all(p, t)?;
    let strides = strides_of(&shape);
    let mut values = Vec::with_capacity(s_levels.len());
    for &s in s_levels {
        let lo = locate_all(p, &vec![-s; dim])?;
        let mut sign = 1.0;
        let mut ranges = Vec::with_capacity(dim);
        for a in 0..dim {
            if lo[a] > hi[a] {
                sign = -sign;
            }
            ranges.push(lo[a].min(hi[a])..lo[a].max(hi[a]));
        }
        let sub: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
        let mut acc = crate::numeric::Neumaier::default();
        crate::grid::for_each_index(&sub, |_, idx| {
            let flat: usize = (0..dim).map(|a| (ranges[a].start + idx[a]) * strides[a]).sum();
            acc.add(cells[flat]);
        });
        values.push(sign * acc.total());
    }
    let differences = values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(TruncationProbe {
        levels: s_levels.to_vec(),
        values,
        differences,
    })
}

/// Node indices of `x`, with coverage and alignment errors.
pub(crate) fn locate_all(p: &GridPartition, x: &[f64]) -> Result<Vec<usize>> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x.len(),
        });
    }
    if !p.contains(x) {
        return Err(Error::Coverage(format!("{x:?} lies outside the grid")));
    }
    (0..p.dim())
        .map(|a| {
            p.locate(a, x[a])
                .ok_or_else(|| Error::Misaligned(format!("{} is not a breakpoint on axis {a}", x[a])))
        })
        .collect()
}

/// Subtracts `F(t) = (1/|L|) Σ_{l∈L} G(t_{-l} : t̃_l)`, `t̃_l = -Σ_{j≠l} t_j`,
/// which matches `G` on `Σt = 0` and is a sum of functions of fewer than `N`
/// variables, so rectangular increments are unchanged.
///
/// `L` holds the axes along which the whole grid reflects into itself.
/// Values off the grid nodes are read by linear interpolation along axis `l`.
pub fn g_theta_zero_normalize(g: &GridField) -> Result<GridField> {
    let p = g.partition();
    let dim = p.dim();
    let total = |x: &[f64]| crate::numeric::neumaier_sum(x.iter().copied());
    let lo = p.lower();
    let hi = p.upper();
    let tol = |a: usize| 1e-12 * (hi[a] - lo[a]).abs().max(1.0);
    let mut admissible = Vec::new();
    for l in 0..dim {
        // t̃_l ranges over [-(Σ_{j≠l} hi_j), -(Σ_{j≠l} lo_j)].
        let rest_lo: f64 = (0..dim).filter(|&j| j != l).map(|j| lo[j]).sum();
        let rest_hi: f64 = (0..dim).filter(|&j| j != l).map(|j| hi[j]).sum();
        if -rest_hi >= lo[l] - tol(l) && -rest_lo <= hi[l] + tol(l) {
            admissible.push(l);
        }
    }
    if admissible.is_empty() {
        return Err(Error::Coverage(
            "no axis along which the grid contains every reflection onto the zero-sum hyperplane".into(),
        ));
    }
    let weight = 1.0 / admissible.len() as f64;
    g.map_nodes(|x, value| {
        let s = total(x);
        let mut buf = [0.0; MAX_DIM];
        let mut f = 0.0;
        for &l in &admissible {
            buf[..dim].copy_from_slice(x);
            buf[l] = x[l] - s;
            f += g.interpolate(&buf[..dim]);
        }
        value - weight * f
    })
}
