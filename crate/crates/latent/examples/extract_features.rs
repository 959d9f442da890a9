//! The untrained convolutional feature extractor.
//!
//! ```text
//! cargo run -p latent --example extract_features
//! ```

use latent::conv::{build_conv_module, extract, ConvConfig, Tensor3};
use latent::dataset::two_class_bars;

fn main() {
    // The 28x28 chain flattens to r = 9216 features; with 10-bit encodings
    // a merged string carries 92160 bits.
    let mnist = build_conv_module(&ConvConfig::mnist_baseline(7)).unwrap();
    println!("28x28 grayscale chain: r = {}", mnist.output_len());

    let cifar = build_conv_module(&ConvConfig::cifar_baseline(7)).unwrap();
    println!("32x32 RGB chain:       r = {}", cifar.output_len());

    let mut upscaled = ConvConfig::cifar_baseline(7);
    upscaled.input_height = 56;
    upscaled.input_width = 56;
    let upscaled = build_conv_module(&upscaled).unwrap();
    println!("56x56 RGB chain:       r = {}", upscaled.output_len());

    // Extraction is deterministic: the filters come from the seed and are
    // never trained.
    let toy = build_conv_module(&ConvConfig::toy8(7)).unwrap();
    let (images, labels) = two_class_bars(1, 3);
    let features = extract(&toy, &images[0]).unwrap();
    println!(
        "\ntoy 8x8 image (class {}): r = {} features, first five: {:?}",
        labels[0],
        features.len(),
        features[..5].iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    );

    // Upscaling an image before extraction enlarges the feature space.
    let big: Tensor3 = images[0].resize_nearest(16, 16);
    println!("nearest-neighbor upscale: {:?} -> {:?}", images[0].shape(), big.shape());
}
