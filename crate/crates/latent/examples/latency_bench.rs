//! Per-record perturbation latency on the 28x28 chain (r = 9216, 92160-bit
//! merged strings) and encode/randomize scaling against the feature count.
//!
//! ```text
//! cargo run --release -p latent --example latency_bench
//! ```

use std::path::Path;

use latent::config::{ExperimentConfig, TOY_CONFIG_TEMPLATE};
use latent::pipeline::bench;

fn main() {
    let mut config =
        ExperimentConfig::from_toml_str(TOY_CONFIG_TEMPLATE, Path::new("toy.toml")).unwrap();
    config.conv.preset = "mnist".into();
    config.io.image_height = 28;
    config.io.image_width = 28;

    let report = bench(&config, 10).unwrap();
    println!(
        "{} records: mean {:.4} s, median {:.4} s, p95 {:.4} s per record",
        report.records, report.mean_seconds, report.median_seconds, report.p95_seconds
    );
    println!(
        "stage means: extract {:.4} s, encode {:.4} s, randomize {:.4} s",
        report.mean_extract_seconds, report.mean_encode_seconds, report.mean_randomize_seconds
    );
    println!("\nscaling (doubling the feature count should double the time):");
    for row in &report.scaling {
        println!(
            "  r = {:>5}: encode {:.6} s, randomize {:.6} s",
            row.feature_count, row.encode_seconds, row.randomize_seconds
        );
    }
    println!(
        "doubling ratios: encode {:?}, randomize {:?}",
        report
            .encode_doubling_ratios
            .iter()
            .map(|r| (r * 100.0).round() / 100.0)
            .collect::<Vec<_>>(),
        report
            .randomize_doubling_ratios
            .iter()
            .map(|r| (r * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );
}
