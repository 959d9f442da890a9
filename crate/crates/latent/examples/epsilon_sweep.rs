//! Accuracy against the privacy budget: with sensitivity r*l far above ε,
//! the keep probabilities barely move, so accuracy stays nearly constant.
//!
//! ```text
//! cargo run --release -p latent --example epsilon_sweep
//! ```

use std::path::Path;

use latent::config::{ExperimentConfig, TOY_CONFIG_TEMPLATE};
use latent::dataset::two_class_bars;
use latent::pipeline::{sweep_epsilon, PipelineInputs};

fn main() {
    let mut config =
        ExperimentConfig::from_toml_str(TOY_CONFIG_TEMPLATE, Path::new("toy.toml")).unwrap();
    config.dense.epochs = 25;
    let (train_images, train_labels) = two_class_bars(60, 4242);
    let (test_images, test_labels) = two_class_bars(20, 4343);
    let inputs = PipelineInputs {
        train_images,
        train_labels,
        test_images,
        test_labels,
    };

    let report = sweep_epsilon(&config, &inputs, &[0.5, 2.0, 4.0, 8.0], &[1, 2, 3]).unwrap();
    println!("epsilon  mean test accuracy (3 seeds)");
    for (eps, acc) in report.epsilons.iter().zip(&report.mean_accuracies) {
        println!("{eps:>7}  {acc:.4}");
    }
    println!("spread: {:.4} accuracy points", report.accuracy_spread);
}
