//! Config-driven benchmark run, equivalent to `dpoem run <config>`.
//!
//! Writes `<name>__<algorithm>.csv` traces and `<name>__summary.json`.
//! Real LIBSVM files are read from `$DPOEM_DATA_DIR` (default `data/`);
//! without them the bundled configs fall back to the seeded surrogates.
//!
//! ```text
//! cargo run --release --example benchmark [config.toml] [out_dir]
//! ```

use std::path::PathBuf;

use dpoem::experiment::{run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/mushrooms.toml"), PathBuf::from);
    let out = args.next().map(PathBuf::from);

    let cfg = ExperimentConfig::load(&config)?;
    let outcome = run_experiment(&cfg, out.as_deref())?;
    let s = &outcome.summary;
    println!("{}: n = {}, d = {}, sigma = {:.4}, data {:?}", s.name, s.agents, s.dim, s.sigma, s.data);
    for a in &s.algorithms {
        println!(
            "{:>6}: f(xbar_T) = {:.5}  f(xtilde_tau) = {:.5}  tau = {:?}",
            a.algorithm,
            a.final_f_xbar,
            a.f_xtilde_tau.unwrap_or(f64::NAN),
            a.tau
        );
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
