//! Runs every acceptance criterion at its stated tolerance with the default
//! configuration and prints one verdict line per criterion.

use std::process::ExitCode;

use lmsm_lab::criteria::{registry, run, Context};
use lmsm_lab::RunConfig;

fn main() -> ExitCode {
    let out = tempfile::tempdir().expect("temporary output directory");
    let mut cfg = RunConfig::default();
    cfg.output.dir = out.path().to_path_buf();
    let mut ctx = Context::new(&cfg);
    let mut failed = 0;
    for c in registry() {
        let r = run(c, &cfg, &mut ctx);
        println!("{}", r.line());
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {}/{} criteria passed", registry().len() - failed, registry().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
