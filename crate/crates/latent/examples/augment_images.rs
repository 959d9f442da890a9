//! Image augmentation: shifts, rotation, flips.
//!
//! ```text
//! cargo run -p latent --example augment_images
//! ```

use latent::augment::{augment, flip_horizontal, rotate_image, shift_image, AugmentParams};
use latent::conv::Tensor3;
use latent::rng::RngStream;

fn render(image: &Tensor3) -> String {
    let (h, w, _) = image.shape();
    let mut out = String::new();
    for y in 0..h {
        for x in 0..w {
            out.push(if image.get(y, x, 0) > 0.5 { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}

fn main() {
    // An L-shaped 5x5 glyph.
    let mut image = Tensor3::zeros(5, 5, 1);
    for y in 0..4 {
        image.set(y, 1, 0, 1.0);
    }
    for x in 1..4 {
        image.set(3, x, 0, 1.0);
    }
    println!("original:\n{}", render(&image));
    println!("shift right by 1:\n{}", render(&shift_image(&image, 0, 1)));
    println!("flipped:\n{}", render(&flip_horizontal(&image)));
    println!("rotated 45 degrees:\n{}", render(&rotate_image(&image, 45.0)));

    let params = AugmentParams {
        max_shift_x: 0.2,
        max_shift_y: 0.2,
        max_rotation_degrees: 30.0,
        horizontal_flip: true,
        seed: 5,
    };
    params.validate().unwrap();
    let mut rng = RngStream::new(params.seed);
    for i in 0..2 {
        println!("random augmentation {i}:\n{}", render(&augment(&image, &params, &mut rng)));
    }
}
