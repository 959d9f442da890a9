//! Regenerates the in-repo toy datasets under `data/`.
//!
//! Generation is fully deterministic (fixed seeds), so the checked-in CSVs
//! can always be reproduced byte for byte:
//!
//! ```text
//! cargo run -p latent --example make_toy_data
//! ```
//!
//! Writes:
//! * `data/toy_train.csv`, `data/toy_test.csv` — two-class 8x8 bar images
//!   (horizontal vs vertical), 100/30 per class.
//! * `data/digits_train.csv`, `data/digits_test.csv` — four-class 8x8
//!   digit-like stencils with jitter, 60/20 per class.

use std::path::Path;

use latent::dataset::{digitlike, two_class_bars, write_images_csv};

fn main() {
    let out = Path::new("data");
    std::fs::create_dir_all(out).unwrap();

    let (images, labels) = two_class_bars(100, 4242);
    write_images_csv(&out.join("toy_train.csv"), &images, &labels).unwrap();
    let (images, labels) = two_class_bars(30, 4343);
    write_images_csv(&out.join("toy_test.csv"), &images, &labels).unwrap();

    let (images, labels) = digitlike(60, 2024);
    write_images_csv(&out.join("digits_train.csv"), &images, &labels).unwrap();
    let (images, labels) = digitlike(20, 2025);
    write_images_csv(&out.join("digits_test.csv"), &images, &labels).unwrap();

    println!("wrote data/toy_train.csv (200 records), data/toy_test.csv (60 records)");
    println!("wrote data/digits_train.csv (240 records), data/digits_test.csv (80 records)");
}
