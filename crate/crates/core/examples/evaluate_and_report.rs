//! Evaluate a directory of images, then summarize the records into tables
//! and a PSNR plot.

use std::path::Path;

use qgac::harness::{evaluate_dataset, read_records_csv, write_records_csv, write_report, RunConfig};
use qgac::metrics::MetricsConvention;

fn main() -> qgac::error::Result<()> {
    let out = std::env::temp_dir().join("qgac-eval-example");
    std::fs::create_dir_all(&out)?;
    let config = RunConfig {
        input_dirs: vec![Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/photos")],
        dataset: Some("photos".into()),
        qualities: vec![10, 20, 50],
        conventions: vec![MetricsConvention::Standard, MetricsConvention::Luma],
        ..RunConfig::default()
    };
    let run = evaluate_dataset(&config)?;
    let csv = out.join("eval.csv");
    write_records_csv(&csv, &run)?;
    println!("{} records, {} failures -> {}", run.records.len(), run.failures.len(), csv.display());
    for f in write_report(&read_records_csv(&csv)?, &out)? {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(out.join("summary.md"))?);
    Ok(())
}
