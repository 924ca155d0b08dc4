use std::path::Path;

use oufield::{
    box_integral, complement_integral, mixed_integral, rs_integral, triangle_integral, FieldEnsemble, GridField,
    IntegralResult, Integrand, MultiIndexSet,
};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{config, CliResult};
use crate::integrands::builtin;
use crate::output::{check_table, write_json, Check};

pub const KINDS: &[&str] = &["box", "mixed", "triangle", "complement", "additivity"];

/// `field = DIR/STEM` loads a saved grid field as the integrator. A stem
/// `rep_NNNNN` in a saved ensemble directory picks that replication.
fn load_field(spec: &str) -> CliResult<GridField> {
    let path = Path::new(spec);
    let stem = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| config(format!("`field`: `{spec}` has no file stem")))?;
    let stem = stem.strip_suffix(".csv").unwrap_or(stem);
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let rep = stem.strip_prefix("rep_").and_then(|n| n.parse::<usize>().ok());
    if let (Some(rep), true) = (rep, dir.join("manifest.json").exists()) {
        let e = FieldEnsemble::load(dir)?;
        if rep >= e.len() {
            return Err(config(format!("`field`: ensemble has {} replications", e.len())));
        }
        return Ok(e.field(rep));
    }
    Ok(GridField::load(dir, stem)?)
}

fn describe(label: &str, r: &IntegralResult) -> String {
    format!("{label} = {:.12e} (error estimate {:.3e})\n", r.value, r.error_estimate)
}

/// Runs one integral of `g` against `f` (`∫ g df`). Returns whether every
/// check passed; plain integrals always pass.
pub fn run(cfg: &RunConfig) -> CliResult<bool> {
    let kind = cfg.choice("kind", "box", KINDS)?;
    let dim = cfg.dim()?;
    let opts = cfg.rs_options()?;
    let g_name = cfg.get("g").unwrap_or("one");
    let g = builtin(g_name, dim)?;
    let field;
    let f_builtin;
    let (f, f_name): (&dyn Integrand, String) = match cfg.get("field") {
        Some(spec) => {
            field = load_field(spec)?;
            if field.dim() != dim {
                return Err(config(format!("field has dimension {}, run has {dim}", field.dim())));
            }
            (&field, format!("field:{spec}"))
        }
        None => {
            let name = cfg.get("f").unwrap_or("product");
            f_builtin = builtin(name, dim)?;
            (&f_builtin, name.to_string())
        }
    };
    let lower = cfg.list_or("lower", 0.0)?;
    let upper = cfg.list_or("upper", 1.0)?;
    let apex = cfg.list_or("apex", 1.0)?;
    let mut checks = Vec::new();
    let mut text = String::new();
    let mut record = json!({
        "command": "integrate",
        "kind": kind,
        "integrand": g_name,
        "integrator": f_name,
        "options": opts,
        "config": cfg.entries(),
    });
    match kind {
        "box" => {
            let r = rs_integral(&g, f, &lower, &upper, &opts)?;
            text += &describe("∫ g df over the box", &r);
            record["result"] = json!(r);
        }
        "mixed" => {
            let axes: Vec<usize> = match cfg.get("axes") {
                Some(v) => v
                    .split(',')
                    .map(|a| {
                        a.trim()
                            .parse()
                            .map_err(|_| config(format!("`axes`: cannot parse `{a}`")))
                    })
                    .collect::<CliResult<_>>()?,
                None => (1..=dim).collect(),
            };
            let v = MultiIndexSet::from_members(&axes, dim).map_err(|e| config(format!("`axes`: {e}")))?;
            let r = mixed_integral(&g, f, v, &lower, &upper, &opts)?;
            text += &describe(&format!("mixed integral over {v}"), &r);
            record["axes"] = json!(axes);
            record["result"] = json!(r);
        }
        "triangle" => {
            let r = triangle_integral(&g, f, &apex, &opts)?;
            text += &describe("∫ g df over the triangle", &r);
            record["result"] = json!(r);
        }
        "complement" => {
            let r = complement_integral(&g, f, &apex, &opts)?;
            text += &describe("∫ g df over box minus triangle", &r);
            record["result"] = json!(r);
        }
        "additivity" => {
            let whole = box_integral(&g, f, &apex, &opts)?;
            let tri = triangle_integral(&g, f, &apex, &opts)?;
            let rest = complement_integral(&g, f, &apex, &opts)?;
            let gap = (whole.value - tri.value - rest.value).abs();
            let floor = cfg.f64_or("tolerance", 1e-6)?;
            let budget = floor.max(10.0 * (whole.error_estimate + tri.error_estimate + rest.error_estimate));
            text += &describe("box", &whole);
            text += &describe("triangle", &tri);
            text += &describe("complement", &rest);
            checks.push(Check::at_most("|box - triangle - complement|", gap, budget));
            record["box"] = json!(whole);
            record["triangle"] = json!(tri);
            record["complement"] = json!(rest);
        }
        _ => unreachable!("kind validated above"),
    }
    let pass = checks.iter().all(|c| c.pass);
    record["checks"] = json!(checks);
    record["pass"] = json!(pass);
    let path = write_json(&cfg.out_dir(), &format!("integrate-{kind}.json"), &record)?;
    print!("{text}");
    if !checks.is_empty() {
        print!("{}", check_table(&checks));
    }
    println!("wrote {}", path.display());
    Ok(pass)
}
