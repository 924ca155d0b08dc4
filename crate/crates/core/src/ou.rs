//! Lamperti and `M_Θ` transforms between stationary, self-similar and driver
//! fields, the Ornstein–Uhlenbeck solution of the multiparameter Langevin
//! equation, and residual and equivalence checks.
//!
//! Every field is stored over its `t`-grid. A self-similar field `Y` is kept
//! as the values `Y(e^t)` at the nodes `t`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{exp_weighted_cells, locate_all, ThetaVector};
use crate::func::{Differentiable, FiniteDifference, SeparableSum};
use crate::grid::{integrate_cells, rect_increment, write_atomic, GridField, GridPartition, Rect};
use crate::indexkit::{MultiIndexSet, MAX_DIM};
use crate::rsint::{hybrid_integral, RsOptions, TagPolicy};
use crate::triangle::{build_domain, triangle_on};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Lamperti,
    InvLamperti,
    MTheta,
    InvMTheta,
    OuSolution,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub truncation: Option<f64>,
    /// `max_i e^{-θ_i s̄}` for the truncation `s̄` used.
    pub truncation_bound: Option<f64>,
    pub seed: Option<u64>,
}

/// The output of a transform together with how it was made.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedField {
    /// Transformed values on the `t`-grid.
    pub base: GridField,
    pub theta: ThetaVector,
    pub kind: TransformKind,
    pub provenance: Provenance,
    /// Input of a nodewise bijection, kept so the inverse is exact.
    source: Option<GridField>,
}

#[derive(Serialize)]
struct ProvenanceBlock<'a> {
    theta: &'a [f64],
    kind: TransformKind,
    #[serde(flatten)]
    provenance: &'a Provenance,
}

impl TransformedField {
    fn new(base: GridField, theta: &ThetaVector, kind: TransformKind, provenance: Provenance) -> Self {
        Self {
            base,
            theta: theta.clone(),
            kind,
            provenance,
            source: None,
        }
    }

    pub fn into_field(self) -> GridField {
        self.base
    }

    /// The inverse of a Lamperti-type transform, reproducing its input
    /// bit for bit. Floating-point multiplication by `e^{Θ·t}` loses the last
    /// bit on a fraction of nodes, so the input is returned rather than
    /// recomputed. Other kinds have no exact inverse and give `None`.
    pub fn invert(&self) -> Option<TransformedField> {
        let kind = match self.kind {
            TransformKind::Lamperti => TransformKind::InvLamperti,
            TransformKind::InvLamperti => TransformKind::Lamperti,
            _ => return None,
        };
        let source = self.source.as_ref()?;
        Some(TransformedField {
            base: source.clone(),
            theta: self.theta.clone(),
            kind,
            provenance: Provenance {
                source: format!("inverse of {}", self.provenance.source),
                ..self.provenance.clone()
            },
            source: Some(self.base.clone()),
        })
    }

    /// Writes the field as `<stem>.csv` / `<stem>.json` and the provenance as
    /// `<stem>.provenance.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<[PathBuf; 3]> {
        let (csv, json) = self.base.save(dir, stem)?;
        let block = ProvenanceBlock {
            theta: self.theta.components(),
            kind: self.kind,
            provenance: &self.provenance,
        };
        let prov = dir.join(format!("{stem}.provenance.json"));
        write_atomic(&prov, serde_json::to_string_pretty(&block)?.as_bytes())?;
        Ok([csv, json, prov])
    }
}

fn check_theta(p: &GridPartition, theta: &ThetaVector) -> Result<()> {
    if p.dim() != theta.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: theta.dim(),
        });
    }
    Ok(())
}

fn scale_by_exp(x: &GridField, theta: &ThetaVector, sign: f64) -> Result<GridField> {
    check_theta(x.partition(), theta)?;
    let th = theta.components();
    x.map_nodes(|t, v| {
        let dot: f64 = th.iter().zip(t).map(|(a, b)| a * b).sum();
        (sign * dot).exp() * v
    })
}

/// `(𝓛_Θ X)(e^t) = e^{Θ·t} X(t)` at every node.
pub fn lamperti(x: &GridField, theta: &ThetaVector) -> Result<TransformedField> {
    let mut out = TransformedField::new(
        scale_by_exp(x, theta, 1.0)?,
        theta,
        TransformKind::Lamperti,
        Provenance {
            source: "lamperti".into(),
            ..Provenance::default()
        },
    );
    out.source = Some(x.clone());
    Ok(out)
}

/// `(𝓛_Θ^{-1} Y)(t) = e^{-Θ·t} Y(e^t)` at every node.
pub fn inv_lamperti(y: &GridField, theta: &ThetaVector) -> Result<TransformedField> {
    let mut out = TransformedField::new(
        scale_by_exp(y, theta, -1.0)?,
        theta,
        TransformKind::InvLamperti,
        Provenance {
            source: "inverse lamperti".into(),
            ..Provenance::default()
        },
    );
    out.source = Some(y.clone());
    Ok(out)
}

/// `G(t) = ±∫_{T(t)} e^{-Θ·u} dY(e^u)` at each node of `output`, with the
/// sign `(-1)^N` for `Σt < 0`. `Y` must cover the simplex `T(t)` of every
/// output node. Nodes on `Σt = 0` give exactly zero.
pub fn m_theta(
    y: &GridField,
    theta: &ThetaVector,
    output: &GridPartition,
    opts: &RsOptions,
) -> Result<TransformedField> {
    check_theta(y.partition(), theta)?;
    check_theta(output, theta)?;
    let neg: Vec<f64> = theta.components().iter().map(|t| -t).collect();
    let weight = SeparableSum::exp_linear(&neg);
    let mut nodes = Vec::with_capacity(output.node_count());
    output.for_each_node(|_, idx| nodes.push(output.node(idx)));
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|t| {
            let dom = build_domain(t)?;
            if dom.is_degenerate() {
                return Ok(0.0);
            }
            dom.covered_by(&[y]).map_err(|e| match e {
                Error::OutsideDomain { point } => {
                    Error::Coverage(format!("T({t:?}) reaches {point:?}, outside the grid of Y"))
                }
                other => other,
            })?;
            let integral = triangle_on(&dom, &weight, y, opts)?;
            Ok(dom.orientation_sign() * integral.value)
        })
        .collect::<Result<_>>()?;
    Ok(TransformedField::new(
        GridField::new(output.clone(), values)?,
        theta,
        TransformKind::MTheta,
        Provenance {
            source: format!("m-theta with {} facet cells", opts.finest_cells()),
            ..Provenance::default()
        },
    ))
}

/// `∫_{-s̄·1}^{t} e^{Θ·u} dG(u)` at every node `t ≥ -s̄·1`, as a tagged sum on
/// the grid of `G` with midpoint tags. The result lives on the part of the
/// grid above `-s̄·1`, which must be a node.
fn truncated_weighted_integral(g: &GridField, theta: &ThetaVector, truncation: f64) -> Result<GridField> {
    check_theta(g.partition(), theta)?;
    if !(truncation.is_finite() && truncation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "truncation {truncation} must be positive"
        )));
    }
    let p = g.partition();
    let lower = vec![-truncation; p.dim()];
    let upper = p.upper();
    if upper.iter().any(|&u| u <= -truncation) {
        return Err(Error::Coverage(format!(
            "grid ends below the truncation point {}",
            -truncation
        )));
    }
    locate_all(p, &lower).map_err(|e| match e {
        Error::Coverage(_) => Error::Coverage(format!(
            "grid starts above the truncation point {}: lower corner {:?}",
            -truncation,
            p.lower()
        )),
        other => other,
    })?;
    let window = g.slice_to(&Rect::new(lower, upper)?)?;
    let (cells, shape) = exp_weighted_cells(&window, theta)?;
    let values = integrate_cells(&cells, &shape, &vec![0; shape.len()]);
    GridField::new(window.partition().clone(), values)
}

/// `(𝓜_Θ^{-1} G)(e^t) = ∫_{-s̄}^{t} e^{Θ·u} dG(u)`, truncated at `s̄`.
pub fn m_theta_inv(g: &GridField, theta: &ThetaVector, truncation: f64) -> Result<TransformedField> {
    let y = truncated_weighted_integral(g, theta, truncation)?;
    Ok(TransformedField::new(
        y,
        theta,
        TransformKind::InvMTheta,
        Provenance {
            source: "inverse m-theta".into(),
            truncation: Some(truncation),
            truncation_bound: Some(theta.truncation_bound(truncation)),
            seed: None,
        },
    ))
}

/// The stationary solution `X(t) = e^{-Θ·t} ∫_{-s̄}^{t} e^{Θ·u} dG(u)` of the
/// Langevin equation driven by `G`.
pub fn ou_solve(g: &GridField, theta: &ThetaVector, truncation: f64) -> Result<TransformedField> {
    let y = truncated_weighted_integral(g, theta, truncation)?;
    Ok(TransformedField::new(
        scale_by_exp(&y, theta, -1.0)?,
        theta,
        TransformKind::OuSolution,
        Provenance {
            source: "ou-solve".into(),
            truncation: Some(truncation),
            truncation_bound: Some(theta.truncation_bound(truncation)),
            seed: None,
        },
    ))
}

/// `|Σ_u ∏_{i∈u} θ_i ∫_0^t d_{-u}X(s) ds_u − [G]_0^t|` for the integrated
/// Langevin equation. Each term is a tagged sum on the native grid of `X`:
/// grid brackets of `X` along `-u`, midpoint values along `u`. The origin and
/// `t` must be nodes of both grids.
pub fn langevin_residual(x: &GridField, g: &GridField, theta: &ThetaVector, t: &[f64]) -> Result<f64> {
    check_theta(x.partition(), theta)?;
    check_theta(g.partition(), theta)?;
    let dim = theta.dim();
    let origin = vec![0.0; dim];
    for (name, p) in [("X", x.partition()), ("G", g.partition())] {
        for point in [&origin, &t.to_vec()] {
            locate_all(p, point).map_err(|e| Error::Misaligned(format!("{name}: {e}")))?;
        }
    }
    let opts = RsOptions {
        tags: TagPolicy::Midpoint,
        refinements: 1,
        base_cells: 1,
        extrapolate: false,
    };
    let one = |_: &[f64]| 1.0;
    let mut total = crate::numeric::Neumaier::default();
    for u in MultiIndexSet::full(dim).subsets() {
        let term = hybrid_integral(&one, x, u.complement(), &origin, t, &opts)?;
        total.add(theta.product_over(u) * term.value);
    }
    total.add(-rect_increment(g, &origin, t)?);
    Ok(total.total().abs())
}

/// `max |[Z]_s^t|` over the probe boxes for `Z(t) = e^{Θ·t}(X(t) − Y(t))`.
pub fn equivalence_gap(x: &GridField, y: &GridField, theta: &ThetaVector, probes: &[Rect]) -> Result<f64> {
    if x.partition() != y.partition() {
        return Err(Error::Misaligned("X and Y live on different grids".into()));
    }
    check_theta(x.partition(), theta)?;
    let z = scale_by_exp(&x.zip_with(y, |a, b| a - b)?, theta, 1.0)?;
    let mut worst: f64 = 0.0;
    for r in probes {
        worst = worst.max(rect_increment(&z, &r.lower, &r.upper)?.abs());
    }
    Ok(worst)
}

/// Whether `X` and `Y` are equivalent with respect to `Θ` on every probe box
/// up to `tol`.
pub fn equivalence_check(x: &GridField, y: &GridField, theta: &ThetaVector, probes: &[Rect], tol: f64) -> Result<bool> {
    Ok(equivalence_gap(x, y, theta, probes)? <= tol)
}

/// A function of the coordinates in `axes` only, applied to their values.
pub type Part<'a> = (MultiIndexSet, &'a (dyn Fn(&[f64]) -> f64 + Sync));

/// `sup |Σ_u ∏_{i∈u} θ_i f_{t_{-u}}(t)|` over a uniform grid with `cells` cells
/// per axis on `rect`, for `f(t) = e^{-Θ·t} Σ h^{(u)}(t_u)` built from parts with
/// `|u| < N`. Partials are Richardson-extrapolated central finite differences.
pub fn homogeneous_solution_check(parts: &[Part<'_>], theta: &ThetaVector, rect: &Rect, cells: usize) -> Result<f64> {
    let dim = theta.dim();
    if rect.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rect.dim(),
        });
    }
    for (u, _) in parts {
        if u.dim() != dim || u.is_full() {
            return Err(Error::InvalidParameter(format!(
                "part on {u} must depend on fewer than {dim} coordinates"
            )));
        }
    }
    let th = theta.components();
    let f = |t: &[f64]| {
        let dot: f64 = th.iter().zip(t).map(|(a, b)| a * b).sum();
        let sum: f64 = parts
            .iter()
            .map(|(u, h)| {
                let mut buf = [0.0; MAX_DIM];
                for (k, a) in u.axes().enumerate() {
                    buf[k] = t[a];
                }
                h(&buf[..u.len()])
            })
            .sum();
        (-dot).exp() * sum
    };
    // Richardson extrapolation of steps h and h/2 cancels the O(h²) term, so
    // the base step can be four times the plain one; this balances the
    // remaining O(h⁴) error against round-off in third-order differences.
    let lengths: Vec<f64> = (0..dim).map(|a| 4.0 * (rect.upper[a] - rect.lower[a])).collect();
    let halved: Vec<f64> = lengths.iter().map(|l| 0.5 * l).collect();
    let coarse = FiniteDifference::new(&f, lengths);
    let fine = FiniteDifference::new(&f, halved);
    let grid = GridPartition::uniform(rect, &vec![cells.max(1); dim])?;
    let mut nodes = Vec::with_capacity(grid.node_count());
    grid.for_each_node(|_, idx| nodes.push(grid.node(idx)));
    let subsets: Vec<MultiIndexSet> = MultiIndexSet::full(dim).subsets().collect();
    let worst = nodes
        .par_iter()
        .map(|t| {
            subsets
                .iter()
                .map(|u| {
                    let v = u.complement();
                    let d = (4.0 * fine.partial(t, v) - coarse.partial(t, v)) / 3.0;
                    theta.product_over(*u) * d
                })
                .sum::<f64>()
                .abs()
        })
        .reduce(|| 0.0, f64::max);
    if !worst.is_finite() {
        return Err(Error::NonFinite("homogeneous residual".into()));
    }
    Ok(worst)
}
