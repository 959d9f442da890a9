//! Fixed-point encoding: sign bit, whole bits, fraction bits.
//!
//! ```text
//! cargo run -p latent --example encode_values
//! ```

use latent::encoding::{decode_value, encode_value, encode_vector, EncodingSpec};

fn main() {
    // 4 whole bits + 5 fraction bits + sign = 10-bit strings.
    let spec = EncodingSpec::new(4, 5).unwrap();
    println!(
        "layout: l = {} bits, resolution 2^-5 = {}, max magnitude {}",
        spec.string_length(),
        spec.resolution(),
        spec.max_magnitude()
    );

    for x in [-1.40625, 2.5, 0.0, 3.21, -15.96875, 99.0] {
        let bits = encode_value(x, &spec).unwrap();
        let back = decode_value(&bits, &spec).unwrap();
        println!("{x:>10}  ->  {bits}  ->  {back}");
    }

    // A whole vector merges into one long string; its length r*l is the
    // sensitivity of the merged representation.
    let merged = encode_vector(&[0.5, -2.25, 1.0], &spec).unwrap();
    println!(
        "\nmerged 3 features: {} ({} bits, sensitivity {})",
        merged.payload(),
        merged.payload().len(),
        merged.sensitivity()
    );
}
