//! Session-level integration tests for the client/server simulation.

use std::net::TcpListener;
use std::time::Duration;

use latent::activation::Activation;
use latent::conv::{build_conv_module, extract, ConvConfig};
use latent::dataset::two_class_bars;
use latent::dense::{DenseNetConfig, Optimizer};
use latent::encoding::{encode_vector, fit_zscore, sensitivity_of, EncodingSpec};
use latent::ldp::{randomize, PrivacyParams, ProtocolKind, ProtocolProbs};
use latent::netsim::{
    evaluate_records, run_client, run_server, ClientConfig, RandomizedRecord, ServerConfig,
    SessionError, SessionParams,
};
use latent::rng::RngStream;

fn toy_session(sensitivity: u64, stats: latent::encoding::NormStats) -> SessionParams {
    SessionParams {
        spec: EncodingSpec::new(4, 5).unwrap(),
        params: PrivacyParams::new(0.5, 7.0, sensitivity).unwrap(),
        protocol: ProtocolKind::Uer,
        stats,
    }
}

fn toy_trainer(input_len: usize, epochs: usize) -> DenseNetConfig {
    DenseNetConfig {
        input_len,
        hidden: vec![24],
        hidden_activations: vec![Activation::Relu],
        classes: 2,
        dropout: vec![0.0],
        optimizer: Optimizer::adam_default(0.01),
        batch_size: 32,
        epochs,
        seed: 3,
    }
}

#[test]
fn end_to_end_training_beats_majority_baseline() {
    let conv_config = ConvConfig::toy8(21);
    let module = build_conv_module(&conv_config).unwrap();
    let spec = EncodingSpec::new(4, 5).unwrap();
    let sensitivity = sensitivity_of(&spec, module.output_len());

    let (train_images, train_labels) = two_class_bars(60, 91);
    let features: Vec<Vec<f64>> = train_images
        .iter()
        .map(|image| extract(&module, image).unwrap())
        .collect();
    let stats = fit_zscore(&features).unwrap();

    let session = toy_session(sensitivity, stats.clone());
    let server_config = ServerConfig {
        session: session.clone(),
        trainer: toy_trainer(sensitivity as usize, 25),
        expected_clients: 2,
        read_timeout: Duration::from_secs(20),
        deadline: Some(Duration::from_secs(120)),
    };
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || run_server(listener, &server_config));

    let mut clients = Vec::new();
    for client in 0..2u64 {
        let start = client as usize * 60;
        let images = train_images[start..start + 60].to_vec();
        let labels = train_labels[start..start + 60].to_vec();
        let conv_config = conv_config.clone();
        clients.push(std::thread::spawn(move || {
            let module = build_conv_module(&conv_config).unwrap();
            let config = ClientConfig::new(addr.to_string(), client, 70 + client);
            run_client(&config, &module, &images, &labels).unwrap()
        }));
    }
    for handle in clients {
        let summary = handle.join().unwrap();
        assert_eq!(summary.records_sent, 60);
        assert!(summary.mean_perturb_seconds < 0.1655);
    }
    let outcome = server.join().unwrap().unwrap();
    assert_eq!(outcome.records.len(), 120);
    assert_eq!(outcome.audit.len(), 2);

    // Held-out randomized test records, produced the same way an owner would.
    let (test_images, test_labels) = two_class_bars(25, 92);
    let probs = ProtocolProbs::for_protocol(session.protocol, &session.params).unwrap();
    let test_records: Vec<RandomizedRecord> = test_images
        .iter()
        .zip(&test_labels)
        .enumerate()
        .map(|(i, (image, &label))| {
            let feature = extract(&module, image).unwrap();
            let normalized = stats.normalize(&feature).unwrap();
            let merged = encode_vector(&normalized, &session.spec).unwrap();
            let mut rng = RngStream::for_record(9000, i as u64);
            RandomizedRecord {
                client_id: 99,
                label,
                bits: randomize(merged.payload(), &probs, &mut rng),
                protocol: session.protocol,
                epsilon: session.params.epsilon(),
                alpha: session.params.alpha(),
            }
        })
        .collect();

    let accuracy = evaluate_records(&outcome.model, &test_records, 2).unwrap();
    let baseline = test_labels
        .iter()
        .filter(|&&l| l == 0)
        .count()
        .max(test_labels.iter().filter(|&&l| l == 1).count()) as f64
        / test_labels.len() as f64;
    assert!(
        accuracy > baseline,
        "model accuracy {accuracy} vs baseline {baseline}"
    );
}

#[test]
fn client_rejects_sensitivity_mismatch() {
    let conv_config = ConvConfig::toy8(3);
    let module = build_conv_module(&conv_config).unwrap();
    let stats = fit_zscore(&[vec![0.0; 36], vec![1.0; 36]]).unwrap();
    // Declared sensitivity does not match the client's r*l = 360.
    let session = toy_session(100, stats);
    let server_config = ServerConfig {
        session,
        trainer: toy_trainer(100, 1),
        expected_clients: 1,
        read_timeout: Duration::from_secs(5),
        deadline: Some(Duration::from_millis(1500)),
    };
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || run_server(listener, &server_config));

    let (images, labels) = two_class_bars(2, 5);
    let config = ClientConfig::new(addr.to_string(), 7, 0);
    let err = run_client(&config, &module, &images[..2], &labels[..2]).unwrap_err();
    assert!(matches!(
        err,
        SessionError::SensitivityMismatch {
            declared: 100,
            computed: 360
        }
    ));

    // The aborted session never sends done, so the server hits its deadline.
    let outcome = server.join().unwrap();
    assert!(matches!(outcome, Err(SessionError::DeadlineElapsed(_))));
}

#[test]
fn server_deadline_elapses_without_clients() {
    let stats = fit_zscore(&[vec![0.0; 2], vec![1.0; 2]]).unwrap();
    let server_config = ServerConfig {
        session: toy_session(20, stats),
        trainer: toy_trainer(20, 1),
        expected_clients: 1,
        read_timeout: Duration::from_secs(1),
        deadline: Some(Duration::from_millis(200)),
    };
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let outcome = run_server(listener, &server_config);
    assert!(matches!(outcome, Err(SessionError::DeadlineElapsed(_))));
}

#[test]
fn short_record_rejects_only_that_session() {
    // A hand-rolled client sends a record whose bit count disagrees with
    // the session sensitivity; the server rejects that session while an
    // honest client completes normally.
    use latent::bits::BitString;
    use latent::netsim::{read_frame, write_frame, Message};

    let conv_config = ConvConfig::toy8(17);
    let module = build_conv_module(&conv_config).unwrap();
    let spec = EncodingSpec::new(4, 5).unwrap();
    let sensitivity = sensitivity_of(&spec, module.output_len());

    let (images, labels) = two_class_bars(30, 33);
    let features: Vec<Vec<f64>> = images
        .iter()
        .map(|image| extract(&module, image).unwrap())
        .collect();
    let stats = fit_zscore(&features).unwrap();

    let server_config = ServerConfig {
        session: toy_session(sensitivity, stats),
        trainer: toy_trainer(sensitivity as usize, 2),
        expected_clients: 1,
        read_timeout: Duration::from_secs(10),
        deadline: Some(Duration::from_secs(60)),
    };
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || run_server(listener, &server_config));

    // Dishonest session: correct handshake, wrong record length.
    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    write_frame(&mut stream, &Message::Hello { client_id: 66 }).unwrap();
    let session = match read_frame(&mut stream).unwrap() {
        Message::SessionParams(p) => *p,
        other => panic!("unexpected {other:?}"),
    };
    write_frame(
        &mut stream,
        &Message::Record(RandomizedRecord {
            client_id: 66,
            label: 0,
            bits: BitString::zeros(8),
            protocol: session.protocol,
            epsilon: session.params.epsilon(),
            alpha: session.params.alpha(),
        }),
    )
    .unwrap();
    // The server answers with an error frame and drops the session.
    match read_frame(&mut stream) {
        Ok(Message::Error { message }) => assert!(message.contains("bits")),
        other => panic!("expected error frame, got {other:?}"),
    }
    drop(stream);

    let good_client = ClientConfig::new(addr.to_string(), 1, 2);
    let summary = run_client(&good_client, &module, &images[..30], &labels[..30]).unwrap();
    assert_eq!(summary.records_sent, 30);

    let outcome = server.join().unwrap().unwrap();
    assert_eq!(outcome.records.len(), 30);
    assert_eq!(outcome.audit.len(), 1);
    assert_eq!(outcome.audit[0].client_id, 1);
    assert_eq!(outcome.rejected_sessions, 1);
}
