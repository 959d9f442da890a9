//! Training the dense classifier from scratch: XOR and gradient checking.
//!
//! ```text
//! cargo run -p latent --example train_dense
//! ```

use latent::activation::Activation;
use latent::dense::{
    evaluate, gradient_check, train, DenseNet, DenseNetConfig, LabeledData, Optimizer,
};

fn main() {
    let xor = LabeledData {
        inputs: vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ],
        labels: vec![0, 1, 1, 0],
        classes: 2,
    };
    let config = DenseNetConfig {
        input_len: 2,
        hidden: vec![8],
        hidden_activations: vec![Activation::Tanh],
        classes: 2,
        dropout: vec![0.0],
        optimizer: Optimizer::adam_default(0.05),
        batch_size: 4,
        epochs: 300,
        seed: 7,
    };

    let net = DenseNet::init(&config).unwrap();
    let err = gradient_check(&net, &[0.3, 0.8], 1).unwrap();
    println!("gradient check before training: max relative error {err:.3e}");

    let (net, trace) = train(net, &xor, None, &config).unwrap();
    for row in trace.iter().step_by(50) {
        println!(
            "epoch {:>3}: loss {:.4}, train accuracy {:.2}",
            row.epoch, row.loss, row.train_accuracy
        );
    }
    println!(
        "final XOR accuracy: {:.2}",
        evaluate(&net, &xor).unwrap()
    );
}
