//! The four randomized-response protocols and their keep probabilities.
//!
//! ```text
//! cargo run -p latent --example randomize_bits
//! ```

use latent::bits::BitString;
use latent::ldp::{randomize, PrivacyParams, ProtocolKind, ProtocolProbs};
use latent::rng::RngStream;

fn main() {
    let params = PrivacyParams::new(0.5, 7.0, 100).unwrap();
    println!("eps = 0.5, alpha = 7, sensitivity = 100\n");
    println!("{:<6} {:>14} {:>14} {:>14}", "kind", "keep 1 (even)", "keep 1 (odd)", "keep 0");
    for kind in [
        ProtocolKind::Ue,
        ProtocolKind::Oue,
        ProtocolKind::Moue,
        ProtocolKind::Uer,
    ] {
        let probs = ProtocolProbs::for_protocol(kind, &params).unwrap();
        println!(
            "{:<6} {:>14.6} {:>14.6} {:>14.6}",
            kind.name(),
            probs.keep_one_even(),
            probs.keep_one_odd(),
            probs.keep_zero()
        );
    }

    // Randomize a 100-bit string; same seed, same output.
    let bits = BitString::from_bits((0..100).map(|i| i % 3 == 0));
    let probs = ProtocolProbs::for_protocol(ProtocolKind::Uer, &params).unwrap();
    let out_a = randomize(&bits, &probs, &mut RngStream::for_record(7, 0));
    let out_b = randomize(&bits, &probs, &mut RngStream::for_record(7, 0));
    assert_eq!(out_a, out_b);
    println!("\ninput:      {bits}");
    println!("randomized: {out_a}");
    println!(
        "flipped {} of {} bits (replayable: identical under the same seed)",
        bits.hamming_distance(&out_a).unwrap(),
        bits.len()
    );
}
