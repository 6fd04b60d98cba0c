use lmsm_core::kernel::{dual_moment, fourier_check, gram_matrix, log_spaced, FourierReport, GramReport};
use lmsm_core::wavelet::build_wavelet;
use lmsm_core::WaveletDD;
use serde::Serialize;

use super::{wavelet, Outcome};
use crate::cache::kernel_table;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::provenance::Provenance;
use crate::report::{aligned, num, write_artifact, write_json};

#[derive(Debug, Serialize)]
pub struct KernelSummary {
    pub fourier: Vec<FourierReport>,
    pub gram: GramReport,
    /// `(v, ∫ dual)` at each Fourier v.
    pub dual_moments: Vec<(f64, f64)>,
    pub fourier_max: f64,
    pub pass: bool,
}

/// Builds (or loads) the kernel table, writes it with provenance, and checks
/// the Fourier identity, biorthogonality and the dual's zero moment.
pub fn cmd_kernel(cfg: &RunConfig) -> CliResult<(Outcome, KernelSummary)> {
    let prov = Provenance::new("kernel", cfg);
    let w = wavelet(cfg)?;
    let mut table = kernel_table(&w, &cfg.table_grid())?;
    table.provenance = prov.json();
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| crate::CliError::io(dir, e))?;
    let table_path = dir.join("kernel.lmsmkt");
    table.save(&table_path).map_err(|e| crate::CliError::io(&table_path, e))?;

    // psi_hat is tiny at low frequency for long filters, so the check runs
    // in double-double.
    let wd: WaveletDD = build_wavelet(cfg.wavelet_order)?;
    let k = &cfg.kernel;
    let xi = log_spaced(k.fourier_xi.0, k.fourier_xi.1, k.fourier_points);
    let fourier = k
        .fourier_v
        .iter()
        .map(|&v| fourier_check(&wd, cfg.alpha, v, &xi, k.fourier_level, k.x_max))
        .collect::<Result<Vec<_>, _>>()?;
    let gram = gram_matrix(&table, k.gram_v, (-k.gram_levels, k.gram_levels), (-k.gram_shifts, k.gram_shifts))?;
    let dual_moments =
        k.fourier_v.iter().map(|&v| dual_moment(&table, v).map(|m| (v, m))).collect::<Result<Vec<_>, _>>()?;

    let tol = &cfg.tolerances;
    let fourier_max = fourier.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let mut failures = Vec::new();
    if !(fourier_max < tol.fourier) {
        failures.push(format!("Fourier identity: max relative error {fourier_max:e} >= {:e}", tol.fourier));
    }
    if !(gram.max_abs_error < tol.gram) {
        failures.push(format!(
            "biorthogonality: max |G - I| {:e} >= {:e} at {:?}",
            gram.max_abs_error, tol.gram, gram.worst_entry
        ));
    }
    for &(v, m) in &dual_moments {
        if !(m.abs() < tol.dual_moment) {
            failures.push(format!("dual moment at v = {v}: {m:e}, bound {:e}", tol.dual_moment));
        }
    }
    let summary = KernelSummary { fourier, gram, dual_moments, fourier_max, pass: failures.is_empty() };

    let report = serde_json::json!({
        "provenance": prov.json(),
        "table": { "path": table_path, "header": table.header() },
        "checks": summary,
        "tolerances": tol,
        "failures": failures,
    });
    let json_path = write_json(dir, "kernel_report.json", &report)?;
    let mut rows: Vec<Vec<String>> = summary
        .fourier
        .iter()
        .map(|r| vec!["fourier".into(), format!("v={}", r.v), num(r.max_rel_error), num(tol.fourier)])
        .collect();
    rows.push(vec!["gram".into(), format!("v={}", summary.gram.v), num(summary.gram.max_abs_error), num(tol.gram)]);
    for &(v, m) in &summary.dual_moments {
        rows.push(vec!["dual-moment".into(), format!("v={v}"), num(m.abs()), num(tol.dual_moment)]);
    }
    let text = prov.text_header() + &aligned(&["check", "at", "error", "bound"], &rows);
    let txt_path = write_artifact(dir, "kernel_report.txt", text.as_bytes())?;
    Ok((Outcome { files: vec![table_path, json_path, txt_path], failures, summary: text }, summary))
}
