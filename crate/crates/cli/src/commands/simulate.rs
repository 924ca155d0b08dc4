use oufield::{
    brownian_sheet, fbm_sheet, lamperti, ou_solve, sub_seed, EnsembleMeta, FieldEnsemble, GridPartition, Rect,
    ThetaVector,
};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{config, CliResult};
use crate::output::write_json;

pub const DRIVERS: &[&str] = &["bsheet", "fbm"];
pub const TRANSFORMS: &[&str] = &["ou", "lamperti", "none"];

/// Output window and the grid the driver lives on.
pub struct Layout {
    pub window: Rect,
    pub window_grid: GridPartition,
    /// `[-truncation, upper]` on every axis, containing every window node.
    pub driver_grid: GridPartition,
    pub truncation: f64,
}

/// Window `[lower, upper]` with `cells` cells per axis. The driver grid
/// continues the window spacing down to `-truncation`, where one shorter
/// cell closes the axis.
pub fn layout(cfg: &RunConfig, theta: &ThetaVector, default_cells: usize) -> CliResult<Layout> {
    let lower = cfg.list_or("lower", 0.0)?;
    let upper = cfg.list_or("upper", 1.0)?;
    let cells = cfg.cells_or(default_cells)?;
    let truncation = cfg.f64_or("truncation", theta.default_truncation())?;
    let window = Rect::new(lower.clone(), upper.clone()).map_err(|e| config(format!("window: {e}")))?;
    if lower.iter().zip(&upper).any(|(a, b)| a >= b) {
        return Err(config("`lower` must lie below `upper` on every axis"));
    }
    if lower.iter().any(|&a| a <= -truncation) {
        return Err(config(format!("`lower` must lie above -truncation = {}", -truncation)));
    }
    let mut window_axes = Vec::new();
    let mut driver_axes = Vec::new();
    for a in 0..lower.len() {
        let n = cells[a];
        let h = (upper[a] - lower[a]) / n as f64;
        let mut axis: Vec<f64> = (0..n).map(|j| lower[a] + h * j as f64).collect();
        axis.push(upper[a]);
        let mut below = Vec::new();
        let mut j = 1;
        loop {
            let x = lower[a] - h * j as f64;
            // Merge a node closer than a tenth of a cell into the end point.
            if x <= -truncation + 0.1 * h {
                break;
            }
            below.push(x);
            j += 1;
        }
        below.push(-truncation);
        below.reverse();
        window_axes.push(axis.clone());
        below.extend(axis);
        driver_axes.push(below);
    }
    Ok(Layout {
        window,
        window_grid: GridPartition::new(window_axes)?,
        driver_grid: GridPartition::new(driver_axes)?,
        truncation,
    })
}

/// Driver ensemble on the driver grid, seeded from the `driver` sub-stream.
pub fn driver(cfg: &RunConfig, layout: &Layout, name: &str, m: usize, seed: u64) -> CliResult<FieldEnsemble> {
    let stream = sub_seed(seed, "driver");
    Ok(match name {
        "bsheet" => brownian_sheet(&layout.driver_grid, m, stream)?,
        "fbm" => fbm_sheet(&cfg.hurst()?, &layout.driver_grid, m, stream)?,
        other => return Err(config(format!("unknown driver `{other}`"))),
    })
}

/// `transform` applied to every replication of the driver, restricted to
/// the window.
pub fn transform(e: &FieldEnsemble, name: &str, theta: &ThetaVector, layout: &Layout) -> CliResult<FieldEnsemble> {
    let s_bar = layout.truncation;
    let window = &layout.window;
    Ok(match name {
        "ou" => e.map(|g| ou_solve(&g, theta, s_bar)?.base.slice_to(window))?,
        "lamperti" => {
            e.map(|g| Ok(lamperti(&ou_solve(&g, theta, s_bar)?.base.slice_to(window)?, theta)?.into_field()))?
        }
        "none" => e.slice_to(window)?,
        other => return Err(config(format!("unknown transform `{other}`"))),
    })
}

pub fn run(cfg: &RunConfig) -> CliResult<bool> {
    let driver_name = cfg.choice("driver", "bsheet", DRIVERS)?;
    let transform_name = cfg.choice("transform", "ou", TRANSFORMS)?;
    let theta = cfg.theta()?;
    let m = cfg.replications_or(100)?;
    let seed = cfg.seed()?;
    let layout = layout(cfg, &theta, 8)?;
    let e = driver(cfg, &layout, driver_name, m, seed)?;
    let out = transform(&e, transform_name, &theta, &layout)?;
    let hurst = if driver_name == "fbm" {
        Some(cfg.hurst()?.components().to_vec())
    } else {
        None
    };
    let parameters = json!({
        "theta": theta.components(),
        "hurst": hurst,
        "truncation": layout.truncation,
        "truncation_bound": theta.truncation_bound(layout.truncation),
        "window": layout.window,
    });
    let out = out.with_meta(EnsembleMeta::new(
        format!("{driver_name}/{transform_name}"),
        parameters.clone(),
    ));
    let dir = cfg.out_dir().join("ensemble");
    out.save(&dir)?;
    let record = json!({
        "command": "simulate",
        "driver": driver_name,
        "transform": transform_name,
        "replications": m,
        "seed": seed,
        "parameters": parameters,
        "config": cfg.entries(),
        "pass": true,
    });
    let path = write_json(&cfg.out_dir(), "simulate.json", &record)?;
    println!(
        "{m} replications of {driver_name}/{transform_name} on {} nodes, truncation {} (bound {:.2e})",
        out.partition().node_count(),
        layout.truncation,
        theta.truncation_bound(layout.truncation)
    );
    println!("wrote {} and {}", dir.display(), path.display());
    Ok(true)
}
