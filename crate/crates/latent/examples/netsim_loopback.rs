//! In-process aggregator with three data-owner clients: owners extract,
//! encode and randomize locally; only randomized records cross the socket.
//!
//! ```text
//! cargo run --release -p latent --example netsim_loopback
//! ```

use std::net::TcpListener;
use std::time::Duration;

use latent::activation::Activation;
use latent::conv::{build_conv_module, extract, ConvConfig};
use latent::dataset::two_class_bars;
use latent::dense::{DenseNetConfig, Optimizer};
use latent::encoding::{fit_zscore, sensitivity_of, EncodingSpec};
use latent::ldp::{PrivacyParams, ProtocolKind};
use latent::netsim::{run_client, run_server, ClientConfig, ServerConfig, SessionParams};

fn main() {
    let spec = EncodingSpec::new(4, 5).unwrap();
    let conv_config = ConvConfig::toy8(77);
    let module = build_conv_module(&conv_config).unwrap();
    let (images, labels) = two_class_bars(75, 555);

    // Server-side calibration on the public split.
    let features: Vec<Vec<f64>> = images
        .iter()
        .map(|image| extract(&module, image).unwrap())
        .collect();
    let stats = fit_zscore(&features).unwrap();
    let sensitivity = sensitivity_of(&spec, module.output_len());

    let server_config = ServerConfig {
        session: SessionParams {
            spec,
            params: PrivacyParams::new(0.5, 7.0, sensitivity).unwrap(),
            protocol: ProtocolKind::Uer,
            stats,
        },
        trainer: DenseNetConfig {
            input_len: sensitivity as usize,
            hidden: vec![16],
            hidden_activations: vec![Activation::Relu],
            classes: 2,
            dropout: vec![0.0],
            optimizer: Optimizer::adam_default(0.01),
            batch_size: 32,
            epochs: 10,
            seed: 5,
        },
        expected_clients: 3,
        read_timeout: Duration::from_secs(30),
        deadline: Some(Duration::from_secs(120)),
    };

    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    println!("aggregator listening on {addr}");
    let server = std::thread::spawn(move || run_server(listener, &server_config));

    let mut clients = Vec::new();
    for client in 0..3u64 {
        let start = client as usize * 50;
        let images = images[start..start + 50].to_vec();
        let labels = labels[start..start + 50].to_vec();
        let conv_config = conv_config.clone();
        clients.push(std::thread::spawn(move || {
            let module = build_conv_module(&conv_config).unwrap();
            let config = ClientConfig::new(addr.to_string(), client + 1, 1000 + client);
            run_client(&config, &module, &images, &labels).unwrap()
        }));
    }
    for handle in clients {
        let summary = handle.join().unwrap();
        println!(
            "client {} sent {} records, mean perturbation {:.5} s",
            summary.client_id, summary.records_sent, summary.mean_perturb_seconds
        );
    }

    let outcome = server.join().unwrap().unwrap();
    println!(
        "\naggregator trained on {} randomized records from {} clients",
        outcome.records.len(),
        outcome.audit.len()
    );
    for entry in &outcome.audit {
        println!(
            "audit: client {} sent {} records under {} (eps = {}, alpha = {})",
            entry.client_id, entry.records, entry.protocol, entry.epsilon, entry.alpha
        );
    }
    if let Some(last) = outcome.trace.last() {
        println!("final training accuracy on randomized bits: {:.4}", last.train_accuracy);
    }
}
