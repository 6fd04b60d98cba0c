use lmsm_core::kernel::KernelTable;
use lmsm_core::synthesis::{lmsm_path, synthesize_field, PathSample};
use lmsm_core::Wavelet;

use super::{field, wavelet, Outcome};
use crate::cache::kernel_table;
use crate::config::{RunConfig, SampleKind};
use crate::error::CliResult;
use crate::provenance::Provenance;
use crate::report::{write_artifact, write_json};

/// `Y` on the configured t grid for one seed.
pub fn simulate_path(cfg: &RunConfig, w: &Wavelet, table: &KernelTable, seed: u64) -> CliResult<PathSample> {
    let f = field(cfg, w, seed)?;
    Ok(lmsm_path(table, &f, cfg.truncation, &cfg.hurst, &cfg.grid.t_grid())?)
}

/// Writes `path.csv` + `path.json`, or `field.csv` + `field.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<Outcome> {
    let prov = Provenance::new("simulate", cfg);
    let w = wavelet(cfg)?;
    let table = kernel_table(&w, &cfg.table_grid())?;
    let dir = &cfg.output.dir;
    let (stem, csv, sidecar, warning) = match cfg.grid.kind {
        SampleKind::Path => {
            let p = simulate_path(cfg, &w, &table, cfg.seed)?;
            (
                "path",
                p.to_csv(&prov.csv_lines()),
                p.sidecar(prov.json()),
                p.meta.truncation_warning.then_some(p.meta.shell_fraction),
            )
        }
        SampleKind::Field => {
            let f = field(cfg, &w, cfg.seed)?;
            let s = synthesize_field(&table, &f, cfg.truncation, cfg.grid.q, &cfg.grid.t_grid(), &cfg.grid.v_grid)?;
            (
                "field",
                s.to_csv(&prov.csv_lines()),
                s.sidecar(prov.json()),
                s.meta.truncation_warning.then_some(s.meta.shell_fraction),
            )
        }
    };
    let csv_path = write_artifact(dir, &format!("{stem}.csv"), csv.as_bytes())?;
    let json_path = write_json(dir, &format!("{stem}.json"), &sidecar)?;
    let mut summary = format!("wrote {} and {}\n", csv_path.display(), json_path.display());
    if let Some(frac) = warning {
        summary.push_str(&format!(
            "warning: outermost level carries {frac:.3e} of the sup norm; raise --levels for a converged sum\n"
        ));
    }
    Ok(Outcome { files: vec![csv_path, json_path], failures: Vec::new(), summary })
}
