use super::Outcome;
use crate::config::RunConfig;
use crate::criteria::{registry, run, Context, CriterionResult};
use crate::error::{CliError, CliResult};
use crate::provenance::Provenance;
use crate::report::{aligned, write_artifact, write_json};

/// One line per criterion: id, key, statement.
pub fn list_criteria() -> String {
    let rows: Vec<Vec<String>> =
        registry().iter().map(|c| vec![c.id.to_string(), c.key.to_string(), c.statement.to_string()]).collect();
    aligned(&["id", "key", "criterion"], &rows)
}

/// Runs the selected criteria (all when `ids` is empty), printing each
/// verdict line as it completes.
pub fn cmd_verify(cfg: &RunConfig, ids: &[u32]) -> CliResult<(Outcome, Vec<CriterionResult>)> {
    if let Some(bad) = ids.iter().find(|&&i| !registry().iter().any(|c| c.id == i)) {
        return Err(CliError::Validation(format!("no criterion {bad}; see verify --list")));
    }
    let prov = Provenance::new("verify", cfg);
    let mut ctx = Context::new(cfg);
    let mut results = Vec::new();
    for c in registry().iter().filter(|c| ids.is_empty() || ids.contains(&c.id)) {
        let r = run(c, cfg, &mut ctx);
        println!("{}", r.line());
        results.push(r);
    }
    let failures: Vec<String> = results.iter().filter(|r| !r.pass).map(CriterionResult::line).collect();
    let dir = &cfg.output.dir;
    let report = serde_json::json!({
        "provenance": prov.json(),
        "passed": results.len() - failures.len(),
        "total": results.len(),
        "results": results,
    });
    let json_path = write_json(dir, "verify.json", &report)?;
    let text = prov.text_header() + &results.iter().map(|r| r.line() + "\n").collect::<String>();
    let txt_path = write_artifact(dir, "verify.txt", text.as_bytes())?;
    let summary = format!("{}/{} criteria passed\n", results.len() - failures.len(), results.len());
    Ok((Outcome { files: vec![json_path, txt_path], failures, summary }, results))
}
