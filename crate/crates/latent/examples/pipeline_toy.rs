//! The whole pipeline on the in-repo toy data: extract, normalize, encode,
//! randomize once under UER, train the dense module on the noisy bits.
//!
//! ```text
//! cargo run --release -p latent --example pipeline_toy
//! ```

use std::path::Path;

use latent::config::{ExperimentConfig, TOY_CONFIG_TEMPLATE};
use latent::dataset::two_class_bars;
use latent::pipeline::{run_pipeline_on, PipelineInputs};

fn main() {
    let config =
        ExperimentConfig::from_toml_str(TOY_CONFIG_TEMPLATE, Path::new("toy.toml")).unwrap();
    let (train_images, train_labels) = two_class_bars(100, 4242);
    let (test_images, test_labels) = two_class_bars(30, 4343);
    let inputs = PipelineInputs {
        train_images,
        train_labels,
        test_images,
        test_labels,
    };

    let outcome = run_pipeline_on(&inputs, &config).unwrap();
    let report = &outcome.report;
    println!(
        "r = {}, l = {}, sensitivity = {}",
        report.feature_count, report.string_length, report.sensitivity
    );
    println!(
        "protocol {} at eps = {}, alpha = {}: keep-1 even {:.4} / odd {:.4}, keep-0 {:.4}",
        report.protocol,
        report.epsilon,
        report.alpha,
        report.keep_one_even,
        report.keep_one_odd,
        report.keep_zero
    );
    println!(
        "trained {} records for {} epochs: train {:.4}, test {:.4} (majority baseline {:.4})",
        report.train_records,
        report.epochs,
        report.train_accuracy,
        report.test_accuracy,
        report.majority_baseline
    );

    // The non-private override (p = 1) shows the randomization cost.
    let mut clean = config.clone();
    clean.privacy.randomize = false;
    let clean_outcome = run_pipeline_on(&inputs, &clean).unwrap();
    println!(
        "without randomization the same run reaches test {:.4}",
        clean_outcome.report.test_accuracy
    );
}
