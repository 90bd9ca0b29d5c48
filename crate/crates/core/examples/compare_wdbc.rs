//! Runs every method on one split of the bundled data and writes the report,
//! ROC and cutoff files to a directory.
//!
//!   cargo run --release -p wdbc --example compare_wdbc -- [out_dir] [seed]

use wdbc::experiment::{cmd_compare, ExperimentConfig};

fn main() -> wdbc::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "wdbc_report".into());
    let seed = args
        .next()
        .map_or(0, |s| s.parse().expect("seed must be an integer"));

    let mut cfg =
        ExperimentConfig::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/wdbc.data"), seed);
    cfg.out_dir = Some(out.clone().into());
    let report = cmd_compare(&cfg)?;
    print!("{}", report.table());
    println!("files written to {out}/");
    Ok(())
}
