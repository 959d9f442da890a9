//! Command-line front end. Each subcommand is a thin wrapper over the
//! library: `pipeline`, `sweep`, `bench`, `audit`, `serve`, `client`,
//! `encode`, `randomize`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use latent::bits::BitString;
use latent::config::ExperimentConfig;
use latent::conv::build_conv_module;
use latent::dense::{save_checkpoint, write_trace_csv};
use latent::encoding::{encode_vector, encode_value, fit_zscore, EncodingSpec};
use latent::ldp::{randomize, PrivacyParams, ProtocolKind, ProtocolProbs};
use latent::netsim::{
    run_client, serve, write_audit_log, ClientConfig, ServerConfig, SessionParams,
};
use latent::pipeline::{
    audit_protocol, bench, load_inputs, run_pipeline, sweep_alpha, sweep_epsilon,
    write_sweep_csv, PipelineError,
};
use latent::rng::RngStream;

#[derive(Parser)]
#[command(name = "latent", about = "Locally differentially private training pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: extract, normalize, encode, randomize, train.
    Pipeline(PipelineArgs),
    /// Sweep the privacy budget (or the budget coefficient) and tabulate accuracy.
    Sweep(SweepArgs),
    /// Measure per-record perturbation latency and encode/randomize scaling.
    Bench(BenchArgs),
    /// Audit a protocol's ε-LDP ratio bounds analytically and by brute force.
    Audit(AuditArgs),
    /// Run the aggregator: accept client sessions, then train on the records.
    Serve(ServeArgs),
    /// Run one data-owner client against an aggregator.
    Client(ClientArgs),
    /// Encode values or a dataset into fixed-point bit strings.
    Encode(EncodeArgs),
    /// Randomize encoded bit strings under a protocol.
    Randomize(RandomizeArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Privacy budgets to sweep (needs at least two).
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    /// Budget coefficients to sweep instead (emits per-α convergence traces).
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Seeds averaged per sweep point.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of synthetic records to time.
    #[arg(long, default_value_t = 10)]
    records: usize,
}

#[derive(Args)]
struct AuditArgs {
    /// Protocol: ue, oue, moue, uer.
    #[arg(long)]
    protocol: ProtocolKind,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Bit-string length audited exhaustively (at most 12).
    #[arg(long)]
    length: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Listen address, e.g. 127.0.0.1:7070.
    #[arg(long)]
    listen: String,
    #[arg(long)]
    expected_clients: usize,
    /// Overall deadline in seconds (0 waits indefinitely).
    #[arg(long, default_value_t = 0)]
    deadline_seconds: u64,
}

#[derive(Args)]
struct ClientArgs {
    #[arg(long)]
    config: PathBuf,
    /// Aggregator address.
    #[arg(long)]
    server: String,
    #[arg(long)]
    client_id: u64,
    /// Slice of the training CSV to send, as start..end.
    #[arg(long, default_value = "0..0")]
    slice: String,
    /// Base seed for per-record randomization streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EncodeArgs {
    /// Values to encode directly (repeatable); prints one bit string per line.
    #[arg(long = "value", allow_negative_numbers = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    whole_bits: u32,
    #[arg(long, default_value_t = 5)]
    frac_bits: u32,
    /// Encode a whole dataset instead: requires --config and --output.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Which split of the config to encode: train or test.
    #[arg(long, default_value = "train")]
    split: String,
    /// Output file of `label,bits` lines.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RandomizeArgs {
    /// Input file of `label,bits` lines (as written by `encode`).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    protocol: ProtocolKind,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            let mut source = std::error::Error::source(&error);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(error.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Pipeline(args) => cmd_pipeline(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Audit(args) => cmd_audit(&args),
        Command::Serve(args) => cmd_serve(&args),
        Command::Client(args) => cmd_client(&args),
        Command::Encode(args) => cmd_encode(&args),
        Command::Randomize(args) => cmd_randomize(&args),
    }
}

fn runtime<E: std::error::Error + Send + Sync + 'static>(
    stage: &'static str,
) -> impl FnOnce(E) -> PipelineError {
    move |source| PipelineError::Stage {
        stage,
        source: Box::new(source),
    }
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<(), PipelineError> {
    let config = ExperimentConfig::load(&args.config)?;
    let artifacts = run_pipeline(&config)?;
    let report = &artifacts.outcome.report;
    println!(
        "features r = {}, string length l = {}, sensitivity r*l = {}",
        report.feature_count, report.string_length, report.sensitivity
    );
    println!(
        "protocol {} (eps = {}, alpha = {}, randomized = {})",
        report.protocol, report.epsilon, report.alpha, report.randomized
    );
    println!(
        "train accuracy {:.4}, test accuracy {:.4}, majority baseline {:.4}",
        report.train_accuracy, report.test_accuracy, report.majority_baseline
    );
    println!(
        "artifacts: {} {} {} {}",
        artifacts.stats_path.display(),
        artifacts.model_path.display(),
        artifacts.trace_path.display(),
        artifacts.metrics_path.display()
    );
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), PipelineError> {
    let config = ExperimentConfig::load(&args.config)?;
    let inputs = load_inputs(&config)?;
    std::fs::create_dir_all(&config.io.output_dir)?;

    if !args.alphas.is_empty() {
        let outcomes = sweep_alpha(&config, &inputs, &args.alphas)?;
        let mut summary = String::from("alpha,accuracy\n");
        for (alpha, outcome) in &outcomes {
            let trace_path = config
                .io
                .output_dir
                .join(format!("trace_alpha_{alpha}.csv"));
            write_trace_csv(&trace_path, &outcome.trace).map_err(runtime("sweep"))?;
            summary.push_str(&format!("{alpha},{}\n", outcome.report.test_accuracy));
            println!(
                "alpha = {alpha}: test accuracy {:.4} (trace: {})",
                outcome.report.test_accuracy,
                trace_path.display()
            );
        }
        std::fs::write(config.io.output_dir.join("sweep_alpha.csv"), summary)?;
        return Ok(());
    }

    let report = sweep_epsilon(&config, &inputs, &args.epsilons, &args.seeds)?;
    let csv_path = config.io.output_dir.join("sweep_epsilon.csv");
    write_sweep_csv(&csv_path, &report)?;
    for (eps, acc) in report.epsilons.iter().zip(&report.mean_accuracies) {
        println!("epsilon = {eps}: mean test accuracy {acc:.4}");
    }
    println!(
        "accuracy spread {:.4} ({} runs, table: {})",
        report.accuracy_spread,
        report.runs.len(),
        csv_path.display()
    );
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), PipelineError> {
    let config = ExperimentConfig::load(&args.config)?;
    let report = bench(&config, args.records)?;
    println!(
        "{} record(s): mean {:.6} s, median {:.6} s, p95 {:.6} s",
        report.records, report.mean_seconds, report.median_seconds, report.p95_seconds
    );
    println!(
        "stages: extract {:.6} s, encode {:.6} s, randomize {:.6} s",
        report.mean_extract_seconds, report.mean_encode_seconds, report.mean_randomize_seconds
    );
    for row in &report.scaling {
        println!(
            "r = {}: encode {:.6} s, randomize {:.6} s",
            row.feature_count, row.encode_seconds, row.randomize_seconds
        );
    }
    if !report.encode_doubling_ratios.is_empty() {
        println!(
            "doubling ratios: encode {:?}, randomize {:?}",
            report.encode_doubling_ratios, report.randomize_doubling_ratios
        );
    }
    let out = config.io.output_dir.join("bench.json");
    std::fs::create_dir_all(&config.io.output_dir)?;
    std::fs::write(&out, serde_json::to_string_pretty(&report).unwrap())?;
    println!("report: {}", out.display());
    Ok(())
}

fn cmd_audit(args: &AuditArgs) -> Result<(), PipelineError> {
    let report = audit_protocol(args.protocol, args.epsilon, args.alpha, args.length)?;
    println!(
        "audit {} (eps = {}, alpha = {}, length = {}), e^eps = {:.9}",
        report.protocol, report.epsilon, report.alpha, report.length, report.e_epsilon
    );
    for identity in &report.identities {
        println!(
            "  {:<36} value {:+.12}  expected {:+.12}  [{}]",
            identity.name,
            identity.value,
            identity.expected,
            if identity.ok { "ok" } else { "FAIL" }
        );
    }
    println!(
        "  paired-pattern ratio        {:.9}  [{}]",
        report.paired_pattern_ratio,
        if report.paired_matches_budget { "= e^eps" } else { "differs" }
    );
    println!(
        "  unconstrained-pattern ratio {:.9}",
        report.unconstrained_pattern_ratio
    );
    println!(
        "  brute-force max ratio       {:.9}  [{}]",
        report.brute_force_ratio,
        if report.brute_force_within_budget {
            "<= e^eps"
        } else {
            "exceeds e^eps"
        }
    );
    for note in &report.notes {
        println!("  note: {note}");
    }
    println!("  overall: {}", if report.pass { "PASS" } else { "FAIL" });
    if let Some(path) = &args.output {
        std::fs::write(path, serde_json::to_string_pretty(&report).unwrap())?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(PipelineError::Invalid("audit failed".into()))
    }
}

fn cmd_serve(args: &ServeArgs) -> Result<(), PipelineError> {
    let config = ExperimentConfig::load(&args.config)?;
    let inputs = load_inputs(&config)?;
    let spec = config.encoding_spec();
    let module = build_conv_module(&config.conv_config()).map_err(runtime("build-conv"))?;

    // Calibration: fit z-score stats on the public training split.
    let features: Vec<Vec<f64>> = inputs
        .train_images
        .iter()
        .map(|image| latent::conv::extract(&module, image))
        .collect::<Result<_, _>>()
        .map_err(runtime("extract"))?;
    let stats = fit_zscore(&features).map_err(runtime("normalize"))?;

    let sensitivity = module.output_len() as u64 * spec.string_length() as u64;
    let params = PrivacyParams::new(config.privacy.epsilon, config.privacy.alpha, sensitivity)
        .map_err(runtime("probabilities"))?;
    let classes = inputs
        .train_labels
        .iter()
        .chain(&inputs.test_labels)
        .map(|&l| l as usize + 1)
        .max()
        .unwrap_or(2)
        .max(2);
    let trainer = config.dense_config(sensitivity as usize, classes);

    let server_config = ServerConfig {
        session: SessionParams {
            spec,
            params,
            protocol: config.privacy.protocol,
            stats,
        },
        trainer,
        expected_clients: args.expected_clients,
        read_timeout: Duration::from_secs(60),
        deadline: (args.deadline_seconds > 0)
            .then(|| Duration::from_secs(args.deadline_seconds)),
    };
    println!("listening on {}", args.listen);
    let (_, outcome) = serve(&args.listen, &server_config).map_err(runtime("serve"))?;

    std::fs::create_dir_all(&config.io.output_dir)?;
    let model_path = config.io.output_dir.join("server_model.bin");
    let audit_path = config.io.output_dir.join("server_audit.jsonl");
    save_checkpoint(&outcome.model, &model_path).map_err(runtime("artifacts"))?;
    write_audit_log(&audit_path, &outcome.audit).map_err(runtime("artifacts"))?;
    println!(
        "trained on {} records from {} client(s); {} session(s) rejected",
        outcome.records.len(),
        outcome.audit.len(),
        outcome.rejected_sessions
    );
    println!("model: {}", model_path.display());
    println!("audit log: {}", audit_path.display());
    Ok(())
}

fn cmd_client(args: &ClientArgs) -> Result<(), PipelineError> {
    let config = ExperimentConfig::load(&args.config)?;
    let inputs = load_inputs(&config)?;
    let module = build_conv_module(&config.conv_config()).map_err(runtime("build-conv"))?;

    let (start, end) = parse_slice(&args.slice, inputs.train_images.len())?;
    let images = &inputs.train_images[start..end];
    let labels = &inputs.train_labels[start..end];

    let client_config = ClientConfig::new(args.server.clone(), args.client_id, args.seed);
    let summary =
        run_client(&client_config, &module, images, labels).map_err(runtime("client"))?;
    println!(
        "client {}: sent {} record(s), mean perturbation {:.6} s (max {:.6} s)",
        summary.client_id,
        summary.records_sent,
        summary.mean_perturb_seconds,
        summary.max_perturb_seconds
    );
    Ok(())
}

fn parse_slice(text: &str, len: usize) -> Result<(usize, usize), PipelineError> {
    let parts: Vec<&str> = text.split("..").collect();
    let bad = || PipelineError::Invalid(format!("bad slice {text:?}, expected start..end"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let start: usize = parts[0].parse().map_err(|_| bad())?;
    let end: usize = if parts[1].is_empty() {
        len
    } else {
        parts[1].parse().map_err(|_| bad())?
    };
    let end = if end == 0 { len } else { end };
    if start > end || end > len {
        return Err(PipelineError::Invalid(format!(
            "slice {start}..{end} out of range for {len} records"
        )));
    }
    Ok((start, end))
}

fn cmd_encode(args: &EncodeArgs) -> Result<(), PipelineError> {
    let spec = EncodingSpec::new(args.whole_bits, args.frac_bits)
        .map_err(|e| PipelineError::Invalid(e.to_string()))?;

    if let (Some(config_path), Some(output)) = (&args.config, &args.output) {
        let config = ExperimentConfig::load(config_path)?;
        let inputs = load_inputs(&config)?;
        let (images, labels) = match args.split.as_str() {
            "train" => (&inputs.train_images, &inputs.train_labels),
            "test" => (&inputs.test_images, &inputs.test_labels),
            other => {
                return Err(PipelineError::Invalid(format!(
                    "unknown split {other:?} (expected train or test)"
                )))
            }
        };
        let spec = config.encoding_spec();
        let module = build_conv_module(&config.conv_config()).map_err(runtime("build-conv"))?;
        let features: Vec<Vec<f64>> = images
            .iter()
            .map(|image| latent::conv::extract(&module, image))
            .collect::<Result<_, _>>()
            .map_err(runtime("extract"))?;
        let stats = fit_zscore(&features).map_err(runtime("normalize"))?;
        let mut out = String::new();
        for (feature, label) in features.iter().zip(labels) {
            let normalized = stats.normalize(feature).map_err(runtime("normalize"))?;
            let merged = encode_vector(&normalized, &spec).map_err(runtime("encode"))?;
            out.push_str(&format!("{label},{}\n", merged.payload()));
        }
        std::fs::write(output, out)?;
        println!("encoded {} record(s) to {}", images.len(), output.display());
        return Ok(());
    }

    if args.values.is_empty() {
        return Err(PipelineError::Invalid(
            "nothing to encode: pass --value or (--config and --output)".into(),
        ));
    }
    for &value in &args.values {
        let bits = encode_value(value, &spec).map_err(runtime("encode"))?;
        println!("{bits}");
    }
    Ok(())
}

fn cmd_randomize(args: &RandomizeArgs) -> Result<(), PipelineError> {
    let text = std::fs::read_to_string(&args.input)?;
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, bits_text) = line.split_once(',').ok_or_else(|| {
            PipelineError::Invalid(format!("line {}: expected label,bits", idx + 1))
        })?;
        let bits = BitString::from_bit_str(bits_text.trim())
            .map_err(|e| PipelineError::Invalid(format!("line {}: {e}", idx + 1)))?;
        lines.push((label.to_string(), bits));
    }
    if lines.is_empty() {
        return Err(PipelineError::Invalid("input has no records".into()));
    }
    let length = lines[0].1.len();
    if lines.iter().any(|(_, b)| b.len() != length) {
        return Err(PipelineError::Invalid(
            "records have inconsistent bit lengths".into(),
        ));
    }

    let params = PrivacyParams::new(args.epsilon, args.alpha, length as u64)
        .map_err(|e| PipelineError::Invalid(e.to_string()))?;
    let probs = ProtocolProbs::for_protocol(args.protocol, &params)
        .map_err(|e| PipelineError::Invalid(e.to_string()))?;

    let mut out = String::new();
    for (index, (label, bits)) in lines.iter().enumerate() {
        let mut rng = RngStream::for_record(args.seed, index as u64);
        let randomized = randomize(bits, &probs, &mut rng);
        out.push_str(&format!("{label},{randomized}\n"));
    }
    std::fs::write(&args.output, out)?;
    println!(
        "randomized {} record(s) of {} bits under {} to {}",
        lines.len(),
        length,
        args.protocol.name(),
        args.output.display()
    );
    Ok(())
}
