use std::path::PathBuf;

use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{config, CliResult};
use crate::output::write_text;

/// Summarizes every JSON report in the output directory into `report.txt`.
/// Passes when every report does.
pub fn run(cfg: &RunConfig) -> CliResult<bool> {
    let dir = cfg.out_dir();
    let entries = std::fs::read_dir(&dir).map_err(|e| config(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let Ok(v) = serde_json::from_str::<Value>(&text) else {
            continue;
        };
        let Some(pass) = v.get("pass").and_then(Value::as_bool) else {
            continue;
        };
        let command = v.get("command").and_then(Value::as_str).unwrap_or("?");
        let detail = v
            .get("suite")
            .or_else(|| v.get("kind"))
            .or_else(|| v.get("driver"))
            .and_then(Value::as_str)
            .unwrap_or("");
        let failed: Vec<String> = v
            .get("checks")
            .and_then(Value::as_array)
            .map(|cs| {
                cs.iter()
                    .filter(|c| c.get("pass").and_then(Value::as_bool) == Some(false))
                    .filter_map(|c| c.get("name").and_then(Value::as_str).map(String::from))
                    .collect()
            })
            .unwrap_or_default();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        rows.push((name, command.to_string(), detail.to_string(), pass, failed));
    }
    if rows.is_empty() {
        return Err(config(format!("no reports found in {}", dir.display())));
    }
    let mut text = format!("{:<32} {:<10} {:<14} result\n", "report", "command", "detail");
    for (name, command, detail, pass, failed) in &rows {
        text.push_str(&format!(
            "{name:<32} {command:<10} {detail:<14} {}\n",
            if *pass { "pass" } else { "FAIL" }
        ));
        for f in failed {
            text.push_str(&format!("    failed: {f}\n"));
        }
    }
    let all = rows.iter().all(|r| r.3);
    text.push_str(&format!(
        "{} of {} reports pass\n",
        rows.iter().filter(|r| r.3).count(),
        rows.len()
    ));
    print!("{text}");
    write_text(&dir, "report.txt", &text)?;
    Ok(all)
}
