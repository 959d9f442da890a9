//! ε-LDP auditing: closed-form identities against the exhaustive oracle.
//!
//! ```text
//! cargo run --release -p latent --example audit_protocols
//! ```

use latent::ldp::ProtocolKind;
use latent::pipeline::audit_protocol;

fn main() {
    let length = 4;
    for (kind, epsilon, alpha) in [
        (ProtocolKind::Ue, 1.0, 1.0),
        (ProtocolKind::Oue, 1.0, 1.0),
        (ProtocolKind::Moue, 0.5, 7.0),
        (ProtocolKind::Uer, 0.5, 7.0),
    ] {
        let report = audit_protocol(kind, epsilon, alpha, length).unwrap();
        println!(
            "{} (eps = {epsilon}, alpha = {alpha}, length = {length}): e^eps = {:.6}",
            report.protocol, report.e_epsilon
        );
        for identity in &report.identities {
            println!(
                "  {:<36} {:+.12} vs {:+.12} [{}]",
                identity.name,
                identity.value,
                identity.expected,
                if identity.ok { "ok" } else { "FAIL" }
            );
        }
        println!(
            "  brute-force max ratio {:.6} ({})",
            report.brute_force_ratio,
            if report.brute_force_within_budget {
                "within budget"
            } else {
                "exceeds budget"
            }
        );
        println!(
            "  pattern ratios: paired {:.6}, unconstrained {:.6}",
            report.paired_pattern_ratio, report.unconstrained_pattern_ratio
        );
        for note in &report.notes {
            println!("  note: {note}");
        }
        println!("  => {}\n", if report.pass { "PASS" } else { "FAIL" });
    }
}
