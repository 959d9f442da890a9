//! Client/server simulation of the untrusted-aggregator deployment.
//!
//! Data owners run feature extraction, encoding and randomization locally;
//! only randomized records ever reach the transport. The aggregator
//! accumulates records from many concurrent clients and trains the dense
//! classifier once every expected session has finished.
//!
//! # Wire format
//!
//! Every frame is `magic "LTNT" | version u8 | type u8 | payload_len u32 LE |
//! payload`. Message types: 0 hello, 1 norm-stats, 2 record, 3 done,
//! 4 error. The record payload is, in order and little-endian:
//!
//! ```text
//! client_id u64 | label u16 | bit_count u32 | packed bits (MSB-first,
//! zero-padded) | protocol kind u8 | epsilon f64 | alpha f64
//! ```
//!
//! The norm-stats payload is a JSON document carrying the encoding spec,
//! privacy parameters, protocol kind and per-feature normalization stats;
//! the server sends it once at session start so clients normalize with the
//! aggregator's calibration. Hello carries the client id; done carries the
//! client id and its record count; error carries a UTF-8 message.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, BitsError};
use crate::conv::{extract, ConvError, ConvModule, Tensor3};
use crate::dense::{
    evaluate, train, DenseNet, DenseNetConfig, EpochStats, LabeledData, TrainError,
};
use crate::encoding::{encode_vector, EncodingError, EncodingSpec, NormStats};
use crate::ldp::{randomize, LdpError, PrivacyParams, ProtocolKind, ProtocolProbs};
use crate::rng::RngStream;

pub const FRAME_MAGIC: [u8; 4] = *b"LTNT";
pub const PROTOCOL_VERSION: u8 = 1;
const HEADER_LEN: usize = 10;
const MAX_PAYLOAD: u32 = 64 << 20;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("bad frame magic {found:02x?} at offset 0 (expected {:02x?})", FRAME_MAGIC)]
    BadMagic { found: [u8; 4] },
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown message type {0}")]
    UnknownMessageType(u8),
    #[error("truncated frame: {missing} more byte(s) needed")]
    Truncated { missing: usize },
    #[error("declared payload length {0} exceeds the {max}-byte cap", max = MAX_PAYLOAD)]
    PayloadTooLarge(u32),
    #[error("malformed {message} payload at offset {offset}: {reason}")]
    BadPayload {
        message: &'static str,
        offset: usize,
        reason: String,
    },
    #[error("record bit string: {0}")]
    Bits(#[from] BitsError),
    #[error("norm-stats payload: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Session-scoped agreement the server sends in the norm-stats message.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionParams {
    pub spec: EncodingSpec,
    pub params: PrivacyParams,
    pub protocol: ProtocolKind,
    pub stats: NormStats,
}

/// One randomized training record as shipped over the wire.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedRecord {
    pub client_id: u64,
    pub label: u16,
    pub bits: BitString,
    pub protocol: ProtocolKind,
    pub epsilon: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug)]
pub enum Message {
    Hello { client_id: u64 },
    SessionParams(Box<SessionParams>),
    Record(RandomizedRecord),
    Done { client_id: u64, records_sent: u32 },
    Error { message: String },
}

impl Message {
    fn type_code(&self) -> u8 {
        match self {
            Message::Hello { .. } => 0,
            Message::SessionParams(_) => 1,
            Message::Record(_) => 2,
            Message::Done { .. } => 3,
            Message::Error { .. } => 4,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "hello",
            Message::SessionParams(_) => "norm-stats",
            Message::Record(_) => "record",
            Message::Done { .. } => "done",
            Message::Error { .. } => "error",
        }
    }
}

fn payload_bytes(message: &Message) -> Result<Vec<u8>, ProtocolError> {
    Ok(match message {
        Message::Hello { client_id } => client_id.to_le_bytes().to_vec(),
        Message::SessionParams(params) => serde_json::to_vec(params)?,
        Message::Record(record) => {
            let packed = record.bits.as_bytes();
            let mut out = Vec::with_capacity(31 + packed.len());
            out.extend_from_slice(&record.client_id.to_le_bytes());
            out.extend_from_slice(&record.label.to_le_bytes());
            out.extend_from_slice(&(record.bits.len() as u32).to_le_bytes());
            out.extend_from_slice(packed);
            out.push(record.protocol.wire_code());
            out.extend_from_slice(&record.epsilon.to_le_bytes());
            out.extend_from_slice(&record.alpha.to_le_bytes());
            out
        }
        Message::Done {
            client_id,
            records_sent,
        } => {
            let mut out = Vec::with_capacity(12);
            out.extend_from_slice(&client_id.to_le_bytes());
            out.extend_from_slice(&records_sent.to_le_bytes());
            out
        }
        Message::Error { message } => message.as_bytes().to_vec(),
    })
}

/// Serializes a message into one length-prefixed frame.
pub fn frame_encode(message: &Message) -> Result<Vec<u8>, ProtocolError> {
    let payload = payload_bytes(message)?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&FRAME_MAGIC);
    out.push(PROTOCOL_VERSION);
    out.push(message.type_code());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Decodes one frame from the front of `bytes`, returning the message and
/// the number of bytes consumed.
pub fn frame_decode(bytes: &[u8]) -> Result<(Message, usize), ProtocolError> {
    if bytes.len() < HEADER_LEN {
        return Err(ProtocolError::Truncated {
            missing: HEADER_LEN - bytes.len(),
        });
    }
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&bytes[..4]);
    if magic != FRAME_MAGIC {
        return Err(ProtocolError::BadMagic { found: magic });
    }
    if bytes[4] != PROTOCOL_VERSION {
        return Err(ProtocolError::UnsupportedVersion(bytes[4]));
    }
    let type_code = bytes[5];
    let len = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::PayloadTooLarge(len));
    }
    let total = HEADER_LEN + len as usize;
    if bytes.len() < total {
        return Err(ProtocolError::Truncated {
            missing: total - bytes.len(),
        });
    }
    let payload = &bytes[HEADER_LEN..total];
    Ok((decode_payload(type_code, payload)?, total))
}

fn decode_payload(type_code: u8, payload: &[u8]) -> Result<Message, ProtocolError> {
    fn take<'a>(
        payload: &'a [u8],
        offset: &mut usize,
        n: usize,
        message: &'static str,
        field: &str,
    ) -> Result<&'a [u8], ProtocolError> {
        let end = *offset + n;
        if end > payload.len() {
            return Err(ProtocolError::BadPayload {
                message,
                offset: *offset,
                reason: format!(
                    "{field} needs {n} bytes, {} available",
                    payload.len() - *offset
                ),
            });
        }
        let slice = &payload[*offset..end];
        *offset = end;
        Ok(slice)
    }

    match type_code {
        0 => {
            let mut offset = 0;
            let id = take(payload, &mut offset, 8, "hello", "client id")?;
            Ok(Message::Hello {
                client_id: u64::from_le_bytes(id.try_into().unwrap()),
            })
        }
        1 => Ok(Message::SessionParams(Box::new(serde_json::from_slice(
            payload,
        )?))),
        2 => {
            let m = "record";
            let mut offset = 0;
            let client_id =
                u64::from_le_bytes(take(payload, &mut offset, 8, m, "client id")?.try_into().unwrap());
            let label =
                u16::from_le_bytes(take(payload, &mut offset, 2, m, "label")?.try_into().unwrap());
            let bit_count =
                u32::from_le_bytes(take(payload, &mut offset, 4, m, "bit count")?.try_into().unwrap())
                    as usize;
            let packed_len = bit_count.div_ceil(8);
            let packed = take(payload, &mut offset, packed_len, m, "packed bits")?;
            let bits = BitString::from_packed_bytes(packed, bit_count)?;
            let code = take(payload, &mut offset, 1, m, "protocol kind")?[0];
            let protocol = ProtocolKind::from_wire_code(code).ok_or(ProtocolError::BadPayload {
                message: m,
                offset: offset - 1,
                reason: format!("unknown protocol code {code}"),
            })?;
            let epsilon =
                f64::from_le_bytes(take(payload, &mut offset, 8, m, "epsilon")?.try_into().unwrap());
            let alpha =
                f64::from_le_bytes(take(payload, &mut offset, 8, m, "alpha")?.try_into().unwrap());
            if offset != payload.len() {
                return Err(ProtocolError::BadPayload {
                    message: m,
                    offset,
                    reason: format!("{} trailing byte(s)", payload.len() - offset),
                });
            }
            Ok(Message::Record(RandomizedRecord {
                client_id,
                label,
                bits,
                protocol,
                epsilon,
                alpha,
            }))
        }
        3 => {
            let m = "done";
            let mut offset = 0;
            let client_id =
                u64::from_le_bytes(take(payload, &mut offset, 8, m, "client id")?.try_into().unwrap());
            let records_sent =
                u32::from_le_bytes(take(payload, &mut offset, 4, m, "record count")?.try_into().unwrap());
            Ok(Message::Done {
                client_id,
                records_sent,
            })
        }
        4 => Ok(Message::Error {
            message: String::from_utf8_lossy(payload).into_owned(),
        }),
        other => Err(ProtocolError::UnknownMessageType(other)),
    }
}

/// Reads one frame from a byte stream.
pub fn read_frame<R: Read>(reader: &mut R) -> Result<Message, ProtocolError> {
    let mut header = [0u8; HEADER_LEN];
    reader.read_exact(&mut header)?;
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&header[..4]);
    if magic != FRAME_MAGIC {
        return Err(ProtocolError::BadMagic { found: magic });
    }
    if header[4] != PROTOCOL_VERSION {
        return Err(ProtocolError::UnsupportedVersion(header[4]));
    }
    let len = u32::from_le_bytes(header[6..10].try_into().unwrap());
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::PayloadTooLarge(len));
    }
    let mut payload = vec![0u8; len as usize];
    reader.read_exact(&mut payload)?;
    decode_payload(header[5], &payload)
}

/// Writes one frame to a byte stream.
pub fn write_frame<W: Write>(writer: &mut W, message: &Message) -> Result<(), ProtocolError> {
    writer.write_all(&frame_encode(message)?)?;
    writer.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("could not connect after {attempts} attempt(s): {last}")]
    ConnectFailed { attempts: u32, last: std::io::Error },
    #[error("server declared sensitivity {declared}, client computes r*l = {computed}")]
    SensitivityMismatch { declared: u64, computed: u64 },
    #[error("expected a {expected} frame, received {found}")]
    UnexpectedMessage {
        expected: &'static str,
        found: &'static str,
    },
    #[error("peer reported: {0}")]
    PeerError(String),
    #[error("dataset slice has {images} images but {labels} labels")]
    SliceMismatch { images: usize, labels: usize },
    #[error("record from client {client_id} carries {found} bits, session expects {expected}")]
    RecordLengthMismatch {
        client_id: u64,
        expected: u64,
        found: u64,
    },
    #[error("server deadline of {0:?} elapsed before all sessions completed")]
    DeadlineElapsed(Duration),
    #[error("no records were collected")]
    NoRecords,
    #[error("feature extraction: {0}")]
    Conv(#[from] ConvError),
    #[error("encoding: {0}")]
    Encoding(#[from] EncodingError),
    #[error("randomization: {0}")]
    Ldp(#[from] LdpError),
    #[error("training: {0}")]
    Train(#[from] TrainError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Connection and perturbation settings for one data owner.
#[derive(Clone, Debug)]
pub struct ClientConfig {
    pub server_addr: String,
    pub client_id: u64,
    /// Base seed for per-record randomization streams.
    pub randomize_seed: u64,
    pub connect_attempts: u32,
    pub initial_backoff: Duration,
    pub read_timeout: Duration,
}

impl ClientConfig {
    pub fn new(server_addr: impl Into<String>, client_id: u64, randomize_seed: u64) -> Self {
        ClientConfig {
            server_addr: server_addr.into(),
            client_id,
            randomize_seed,
            connect_attempts: 5,
            initial_backoff: Duration::from_millis(50),
            read_timeout: Duration::from_secs(30),
        }
    }
}

/// What a completed client session reports.
#[derive(Clone, Debug, Serialize)]
pub struct ClientSummary {
    pub client_id: u64,
    pub records_sent: u64,
    /// Mean seconds for extract + encode + randomize, per record.
    pub mean_perturb_seconds: f64,
    pub max_perturb_seconds: f64,
}

fn connect_with_backoff(config: &ClientConfig) -> Result<TcpStream, SessionError> {
    let mut backoff = config.initial_backoff;
    let mut last = None;
    for attempt in 0..config.connect_attempts.max(1) {
        if attempt > 0 {
            std::thread::sleep(backoff);
            backoff = (backoff * 2).min(Duration::from_secs(2));
        }
        match TcpStream::connect(&config.server_addr) {
            Ok(stream) => return Ok(stream),
            Err(e) => last = Some(e),
        }
    }
    Err(SessionError::ConnectFailed {
        attempts: config.connect_attempts.max(1),
        last: last.unwrap_or_else(|| std::io::Error::other("no attempt made")),
    })
}

/// Runs one data-owner session: handshake, then one record frame per image.
///
/// Every record leaves this function only after randomization; the
/// pre-randomization merged strings never escape the loop body.
pub fn run_client(
    config: &ClientConfig,
    module: &ConvModule,
    images: &[Tensor3],
    labels: &[u16],
) -> Result<ClientSummary, SessionError> {
    if images.len() != labels.len() {
        return Err(SessionError::SliceMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    let mut stream = connect_with_backoff(config)?;
    stream.set_read_timeout(Some(config.read_timeout))?;
    stream.set_nodelay(true)?;

    write_frame(
        &mut stream,
        &Message::Hello {
            client_id: config.client_id,
        },
    )?;
    let session = match read_frame(&mut stream)? {
        Message::SessionParams(params) => *params,
        Message::Error { message } => return Err(SessionError::PeerError(message)),
        other => {
            return Err(SessionError::UnexpectedMessage {
                expected: "norm-stats",
                found: other.type_name(),
            })
        }
    };

    let computed = module.output_len() as u64 * session.spec.string_length() as u64;
    if session.params.sensitivity() != computed {
        return Err(SessionError::SensitivityMismatch {
            declared: session.params.sensitivity(),
            computed,
        });
    }
    // Deserialized parameters bypass the constructor; revalidate what the
    // server declared before deriving probabilities from it.
    let params = PrivacyParams::new(
        session.params.epsilon(),
        session.params.alpha(),
        session.params.sensitivity(),
    )?;
    let probs = ProtocolProbs::for_protocol(session.protocol, &params)?;

    let mut total_seconds = 0.0f64;
    let mut max_seconds = 0.0f64;
    for (index, (image, &label)) in images.iter().zip(labels).enumerate() {
        let started = Instant::now();
        let features = extract(module, image)?;
        let normalized = session.stats.normalize(&features)?;
        let merged = encode_vector(&normalized, &session.spec)?;
        let mut rng = RngStream::for_record(config.randomize_seed, index as u64);
        let randomized = randomize(merged.payload(), &probs, &mut rng);
        let elapsed = started.elapsed().as_secs_f64();
        total_seconds += elapsed;
        max_seconds = max_seconds.max(elapsed);

        write_frame(
            &mut stream,
            &Message::Record(RandomizedRecord {
                client_id: config.client_id,
                label,
                bits: randomized,
                protocol: session.protocol,
                epsilon: session.params.epsilon(),
                alpha: session.params.alpha(),
            }),
        )?;
    }
    write_frame(
        &mut stream,
        &Message::Done {
            client_id: config.client_id,
            records_sent: images.len() as u32,
        },
    )?;

    Ok(ClientSummary {
        client_id: config.client_id,
        records_sent: images.len() as u64,
        mean_perturb_seconds: if images.is_empty() {
            0.0
        } else {
            total_seconds / images.len() as f64
        },
        max_perturb_seconds: max_seconds,
    })
}

/// Aggregator settings: session agreement, trainer, and stop conditions.
#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub session: SessionParams,
    pub trainer: DenseNetConfig,
    pub expected_clients: usize,
    pub read_timeout: Duration,
    /// Overall wall-clock bound; `None` waits indefinitely.
    pub deadline: Option<Duration>,
}

/// One line of the server's JSONL audit log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp_ms: u64,
    pub client_id: u64,
    pub records: u64,
    pub epsilon: f64,
    pub alpha: f64,
    pub protocol: String,
}

/// Result of a completed aggregation run.
#[derive(Debug)]
pub struct ServerOutcome {
    pub model: DenseNet,
    pub trace: Vec<EpochStats>,
    pub records: Vec<RandomizedRecord>,
    pub audit: Vec<AuditEntry>,
    pub rejected_sessions: usize,
}

enum SessionEvent {
    Completed {
        client_id: u64,
        records: Vec<RandomizedRecord>,
    },
    Rejected,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Serves one client connection. Records are buffered and surrendered to the
/// collector only when the session ends with a done frame; malformed traffic
/// rejects this session alone.
fn handle_session(
    mut stream: TcpStream,
    session: SessionParams,
    read_timeout: Duration,
    events: mpsc::Sender<SessionEvent>,
) {
    let result = (|| -> Result<(u64, Vec<RandomizedRecord>), SessionError> {
        stream.set_read_timeout(Some(read_timeout))?;
        stream.set_nodelay(true)?;
        let client_id = match read_frame(&mut stream)? {
            Message::Hello { client_id } => client_id,
            other => {
                return Err(SessionError::UnexpectedMessage {
                    expected: "hello",
                    found: other.type_name(),
                })
            }
        };
        write_frame(&mut stream, &Message::SessionParams(Box::new(session.clone())))?;

        let expected_bits = session.params.sensitivity();
        let mut records = Vec::new();
        loop {
            match read_frame(&mut stream)? {
                Message::Record(record) => {
                    if record.bits.len() as u64 != expected_bits {
                        return Err(SessionError::RecordLengthMismatch {
                            client_id,
                            expected: expected_bits,
                            found: record.bits.len() as u64,
                        });
                    }
                    records.push(record);
                }
                Message::Done { .. } => return Ok((client_id, records)),
                Message::Error { message } => return Err(SessionError::PeerError(message)),
                other => {
                    return Err(SessionError::UnexpectedMessage {
                        expected: "record or done",
                        found: other.type_name(),
                    })
                }
            }
        }
    })();

    match result {
        Ok((client_id, records)) => {
            let _ = events.send(SessionEvent::Completed { client_id, records });
        }
        Err(error) => {
            log::warn!("session rejected: {error}");
            let _ = write_frame(
                &mut stream,
                &Message::Error {
                    message: error.to_string(),
                },
            );
            let _ = events.send(SessionEvent::Rejected);
        }
    }
}

/// Accepts sessions until `expected_clients` complete, then trains the dense
/// classifier on the collected randomized records.
pub fn run_server(listener: TcpListener, config: &ServerConfig) -> Result<ServerOutcome, SessionError> {
    listener.set_nonblocking(true)?;
    let (events_tx, events_rx) = mpsc::channel();
    let started = Instant::now();
    let mut completed: Vec<(u64, Vec<RandomizedRecord>)> = Vec::new();
    let mut rejected = 0usize;
    let mut handles = Vec::new();

    while completed.len() < config.expected_clients {
        if let Some(deadline) = config.deadline {
            if started.elapsed() > deadline {
                return Err(SessionError::DeadlineElapsed(deadline));
            }
        }
        match listener.accept() {
            Ok((stream, _)) => {
                let session = config.session.clone();
                let timeout = config.read_timeout;
                let tx = events_tx.clone();
                handles.push(std::thread::spawn(move || {
                    handle_session(stream, session, timeout, tx)
                }));
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => return Err(e.into()),
        }
        while let Ok(event) = events_rx.try_recv() {
            match event {
                SessionEvent::Completed { client_id, records } => {
                    completed.push((client_id, records))
                }
                SessionEvent::Rejected => rejected += 1,
            }
        }
    }
    drop(events_tx);
    for handle in handles {
        let _ = handle.join();
    }
    // Sessions that finished after the stop condition are drained too.
    while let Ok(event) = events_rx.try_recv() {
        if let SessionEvent::Completed { client_id, records } = event {
            completed.push((client_id, records));
        } else {
            rejected += 1;
        }
    }

    let mut audit = Vec::new();
    let mut records = Vec::new();
    for (client_id, client_records) in completed {
        let (epsilon, alpha, protocol) = client_records
            .first()
            .map(|r| (r.epsilon, r.alpha, r.protocol.name().to_string()))
            .unwrap_or((
                config.session.params.epsilon(),
                config.session.params.alpha(),
                config.session.protocol.name().to_string(),
            ));
        audit.push(AuditEntry {
            timestamp_ms: now_ms(),
            client_id,
            records: client_records.len() as u64,
            epsilon,
            alpha,
            protocol,
        });
        records.extend(client_records);
    }
    if records.is_empty() {
        return Err(SessionError::NoRecords);
    }

    let data = records_to_labeled(&records, config.trainer.classes);
    let net = DenseNet::init(&config.trainer)?;
    let (model, trace) = train(net, &data, None, &config.trainer)?;
    Ok(ServerOutcome {
        model,
        trace,
        records,
        audit,
        rejected_sessions: rejected,
    })
}

/// Binds an address and runs the server on it. Returns the outcome together
/// with the bound local address (useful with port 0).
pub fn serve<A: ToSocketAddrs>(
    addr: A,
    config: &ServerConfig,
) -> Result<(std::net::SocketAddr, ServerOutcome), SessionError> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let outcome = run_server(listener, config)?;
    Ok((local, outcome))
}

/// Converts randomized records to 0/1 training vectors.
pub fn records_to_labeled(records: &[RandomizedRecord], classes: usize) -> LabeledData {
    LabeledData {
        inputs: records
            .iter()
            .map(|r| r.bits.iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
            .collect(),
        labels: records.iter().map(|r| r.label as usize).collect(),
        classes,
    }
}

/// Writes the audit log as JSON lines.
pub fn write_audit_log(path: &std::path::Path, entries: &[AuditEntry]) -> Result<(), SessionError> {
    let mut out = String::new();
    for entry in entries {
        out.push_str(&serde_json::to_string(entry).expect("audit entry serialize"));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Evaluates a trained model against labeled records (e.g. a held-out,
/// also-randomized test slice).
pub fn evaluate_records(
    model: &DenseNet,
    records: &[RandomizedRecord],
    classes: usize,
) -> Result<f64, SessionError> {
    Ok(evaluate(model, &records_to_labeled(records, classes))?)
}
