use oufield::{
    brownian_sheet, ibp_rhs, lamperti, langevin_residual, m_theta, m_theta_inv, ou_solve, product_rule_check,
    rect_increment, rs_integral, stationarity_test, sub_seed, substitute_derivative, Differentiable, FieldEnsemble,
    GridField, GridPartition, MultiIndexSet, Rect, RsOptions, TestReport, ThetaVector,
};
use serde_json::json;

use crate::commands::simulate::{driver, layout, transform};
use crate::config::RunConfig;
use crate::error::{config, CliResult};
use crate::integrands::builtin;
use crate::output::{check_table, write_json, Check};

pub const SUITES: &[&str] = &["identities", "round-trips", "stationarity", "langevin", "all"];

struct SuiteResult {
    checks: Vec<Check>,
    reports: Vec<TestReport>,
}

fn require_plane(cfg: &RunConfig, suite: &str) -> CliResult<()> {
    match cfg.dim()? {
        2 => Ok(()),
        d => Err(config(format!("the {suite} suite runs in two dimensions, not {d}"))),
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Bracket identity, integration by parts, derivative substitution, and the
/// product rule on built-in smooth pairs.
fn identities(cfg: &RunConfig) -> CliResult<SuiteResult> {
    let dim = cfg.dim()?;
    let tol = cfg.f64_or("tolerance", 1e-3)?;
    let opts = if ["refinements", "base_cells", "extrapolate"]
        .iter()
        .any(|k| cfg.get(k).is_some())
    {
        cfg.rs_options()?
    } else {
        RsOptions::finest(if dim == 2 { 128 } else { 32 }, 4).with_extrapolation()
    };
    let s = cfg.list_or("lower", 0.0)?;
    let t = cfg.list_or("upper", 1.0)?;
    let one = |_: &[f64]| 1.0;
    let mut checks = Vec::new();
    for (fname, gname) in [("mix", "exp"), ("sin", "product"), ("exp", "sin"), ("product", "mix")] {
        let f = builtin(fname, dim)?;
        let g = builtin(gname, dim)?;
        let bracket = rect_increment(&f, &s, &t)?;
        let unit = rs_integral(&one, &f, &s, &t, &opts)?;
        let worst = unit
            .levels
            .iter()
            .map(|l| (l.value - bracket).abs() / bracket.abs().max(1.0))
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("bracket identity d{fname}"), worst, 1e-12));
        let lhs = rs_integral(&f, &g, &s, &t, &opts)?;
        let rhs = ibp_rhs(&f, &g, &s, &t, &opts)?;
        checks.push(Check::at_most(
            format!("by parts {fname} d{gname}"),
            relative(rhs.value, lhs.value),
            tol,
        ));
        let lhs = rs_integral(&g, &f, &s, &t, &opts)?;
        let f_t = |x: &[f64]| f.partial(x, MultiIndexSet::full(dim));
        let rhs = substitute_derivative(&g, &f_t, &s, &t, &opts)?;
        checks.push(Check::at_most(
            format!("substitution {gname} d{fname}"),
            relative(rhs.value, lhs.value),
            tol,
        ));
        let (lhs, rhs) = product_rule_check(&g, &f, &g, &s, &t, &opts)?;
        checks.push(Check::at_most(
            format!("product rule {gname} d({fname}·{gname})"),
            relative(rhs.value, lhs.value),
            tol,
        ));
    }
    Ok(SuiteResult {
        checks,
        reports: Vec::new(),
    })
}

fn square(lo: f64, hi: f64, cells: usize) -> CliResult<GridPartition> {
    Ok(GridPartition::uniform_cube(&Rect::cube(lo, hi, 2)?, cells)?)
}

/// Exact Lamperti inversion, `M_Θ ∘ M_Θ^{-1}` on increments, and vanishing on
/// the anti-diagonal.
fn round_trips(cfg: &RunConfig) -> CliResult<SuiteResult> {
    require_plane(cfg, "round-trips")?;
    let theta = cfg.theta()?;
    let tol = cfg.f64_or("tolerance", 1e-2)?;
    let s_bar = cfg.f64_or("truncation", 6.0)?;
    let mut checks = Vec::new();
    let x = GridField::sample(&builtin("sin", 2)?, &square(-2.0, 2.0, 16)?)?;
    let exact = lamperti(&x, &theta)?.invert().is_some_and(|b| b.base == x);
    checks.push(Check::holds("Lamperti inverse is exact", exact));
    let g_fn = builtin(cfg.get("g").unwrap_or("mix"), 2)?;
    let cells = ((s_bar + 3.0) * 16.0).round() as usize;
    let g = GridField::sample(
        &g_fn,
        &GridPartition::uniform_cube(&Rect::cube(-s_bar, 3.0, 2)?, cells)?,
    )?;
    let y = m_theta_inv(&g, &theta, s_bar)?.base;
    let back = m_theta(&y, &theta, &square(-1.0, 1.0, 8)?, &RsOptions::default())?.base;
    let boxes = [
        ([-1.0, -1.0], [1.0, 1.0]),
        ([0.0, 0.0], [1.0, 1.0]),
        ([-1.0, 0.0], [0.0, 1.0]),
        ([-0.5, -0.75], [0.5, 0.25]),
        ([0.25, -1.0], [1.0, 0.0]),
    ];
    for (s, t) in boxes {
        let err = relative(rect_increment(&back, &s, &t)?, rect_increment(&g_fn, &s, &t)?);
        checks.push(Check::at_most(
            format!("increment round trip on {s:?}..{t:?}"),
            err,
            tol,
        ));
    }
    let diag = (0..=8)
        .map(|k| {
            let v = -1.0 + 0.25 * k as f64;
            back.value_at_point(&[v, -v]).map_or(f64::INFINITY, f64::abs)
        })
        .fold(0.0, f64::max);
    checks.push(Check::at_most("M_Θ output on Σt = 0", diag, 1e-10));
    Ok(SuiteResult {
        checks,
        reports: Vec::new(),
    })
}

/// Integrated Langevin residual for `dG = e^{u_1+u_2} du` under refinement.
fn langevin(cfg: &RunConfig) -> CliResult<SuiteResult> {
    require_plane(cfg, "langevin")?;
    let theta = cfg.theta()?;
    let tol = cfg.f64_or("tolerance", 1e-2)?;
    let s_bar = cfg.f64_or("truncation", 7.0)?;
    let levels = cfg.usize_or("refinements", 4)?.max(2);
    let driver = |t: &[f64]| (t[0].exp() - 1.0) * (t[1].exp() - 1.0);
    let probes = [[0.5, 0.5], [1.0, 0.5], [0.5, 1.0], [1.0, 1.0], [-0.5, 0.5], [0.5, -1.0]];
    let mut history = vec![Vec::new(); probes.len()];
    for k in 0..levels {
        let per_unit = 2usize << k;
        let cells = ((s_bar + 1.0) * per_unit as f64).round() as usize;
        let p = GridPartition::uniform_cube(&Rect::cube(-s_bar, 1.0, 2)?, cells)?;
        let g = GridField::sample(&driver, &p)?;
        let x = ou_solve(&g, &theta, s_bar)?.base;
        for (i, t) in probes.iter().enumerate() {
            let r = langevin_residual(&x, &g, &theta, t)?;
            history[i].push(r / rect_increment(&g, &[0.0, 0.0], t)?.abs());
        }
    }
    let mut checks = Vec::new();
    for (t, h) in probes.iter().zip(&history) {
        checks.push(Check::holds(
            format!("residual at {t:?} shrinks"),
            h.windows(2).all(|w| w[1] < w[0]),
        ));
        checks.push(Check::at_most(
            format!("final relative residual at {t:?}"),
            h[h.len() - 1],
            tol,
        ));
    }
    Ok(SuiteResult {
        checks,
        reports: Vec::new(),
    })
}

/// Node pairs and shifts on a window of at least 16 cells per axis.
fn probe_geometry(e: &FieldEnsemble) -> CliResult<(Vec<(Vec<f64>, Vec<f64>)>, Vec<Vec<f64>>)> {
    let p = e.partition();
    let cells = p.cells_per_axis();
    if cells.iter().any(|&c| c < 16) {
        return Err(config("the stationarity suite needs at least 16 cells per axis"));
    }
    let node = |i: usize, j: usize| p.node(&[i, j]);
    let pairs = vec![
        (node(0, 0), node(0, 0)),
        (node(0, 0), node(2, 0)),
        (node(0, 0), node(0, 4)),
        (node(1, 1), node(3, 7)),
        (node(0, 4), node(4, 0)),
    ];
    let (hx, hy) = (cells[0] / 2, cells[1] / 2);
    let origin = node(0, 0);
    let shift = |i: usize, j: usize| -> Vec<f64> { node(i, j).iter().zip(&origin).map(|(a, b)| a - b).collect() };
    let shifts = vec![shift(hx, hy), shift(hx, 0), shift(0, hy)];
    Ok((pairs, shifts))
}

/// Covariance stationarity of the OU ensemble, or of the raw Brownian sheet
/// with `source = bsheet` as a control that must fail.
fn stationarity(cfg: &RunConfig) -> CliResult<SuiteResult> {
    require_plane(cfg, "stationarity")?;
    let theta: ThetaVector = cfg.theta()?;
    let source = cfg.choice("source", "ou", &["ou", "bsheet"])?;
    let m = cfg.replications_or(1000)?;
    let alpha = cfg.f64_or("alpha", 0.01)?;
    let seed = cfg.seed()?;
    let e = if source == "ou" {
        let l = layout(cfg, &theta, 16)?;
        let d = driver(cfg, &l, cfg.choice("driver", "bsheet", &["bsheet", "fbm"])?, m, seed)?;
        transform(&d, "ou", &theta, &l)?
    } else {
        let l = layout(cfg, &theta, 16)?;
        brownian_sheet(&l.window_grid, m, sub_seed(seed, "driver"))?
    };
    let (pairs, shifts) = probe_geometry(&e)?;
    let report = stationarity_test(&e, &shifts, &pairs, alpha)?;
    Ok(SuiteResult {
        checks: vec![Check::holds(
            format!("{source} covariances are shift invariant"),
            report.pass,
        )],
        reports: vec![report],
    })
}

fn run_suite(cfg: &RunConfig, suite: &str) -> CliResult<bool> {
    let result = match suite {
        "identities" => identities(cfg)?,
        "round-trips" => round_trips(cfg)?,
        "langevin" => langevin(cfg)?,
        "stationarity" => stationarity(cfg)?,
        _ => unreachable!("suite validated by the caller"),
    };
    let pass = result.checks.iter().all(|c| c.pass);
    println!("suite {suite}: {}", if pass { "PASS" } else { "FAIL" });
    print!("{}", check_table(&result.checks));
    for r in &result.reports {
        print!("{r}");
    }
    let record = json!({
        "command": "verify",
        "suite": suite,
        "pass": pass,
        "checks": result.checks,
        "reports": result.reports,
        "config": cfg.entries(),
    });
    let path = write_json(&cfg.out_dir(), &format!("verify-{suite}.json"), &record)?;
    println!("wrote {}", path.display());
    Ok(pass)
}

pub fn run(cfg: &RunConfig) -> CliResult<bool> {
    let suite = cfg.choice("suite", "identities", SUITES)?;
    if suite != "all" {
        return run_suite(cfg, suite);
    }
    let mut pass = true;
    for s in SUITES.iter().filter(|s| **s != "all") {
        pass &= run_suite(cfg, s)?;
    }
    Ok(pass)
}
