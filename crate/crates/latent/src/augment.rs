//! Image augmentation: random shifts, rotation and horizontal flips.
//!
//! Transforms keep the image shape; pixels shifted or rotated out of frame
//! are replaced with zeros. Rotation samples the source image with nearest
//! neighbors, so a zero-degree rotation is an exact identity.

use serde::{Deserialize, Serialize};

use crate::conv::Tensor3;
use crate::rng::RngStream;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("shift fractions must lie in [0, 0.5], got ({x}, {y})")]
    BadShift { x: f64, y: f64 },
    #[error("max rotation must lie in [0, 45] degrees, got {0}")]
    BadRotation(f64),
}

/// Bounds for the random transforms applied to each image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    /// Maximum horizontal shift as a fraction of the width.
    pub max_shift_x: f64,
    /// Maximum vertical shift as a fraction of the height.
    pub max_shift_y: f64,
    pub max_rotation_degrees: f64,
    pub horizontal_flip: bool,
    pub seed: u64,
}

impl AugmentParams {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=0.5).contains(&self.max_shift_x) || !(0.0..=0.5).contains(&self.max_shift_y) {
            return Err(AugmentError::BadShift {
                x: self.max_shift_x,
                y: self.max_shift_y,
            });
        }
        if !(0.0..=45.0).contains(&self.max_rotation_degrees) {
            return Err(AugmentError::BadRotation(self.max_rotation_degrees));
        }
        Ok(())
    }

    /// No shifts, no rotation, no flips: `augment` becomes the identity.
    pub fn disabled() -> Self {
        AugmentParams {
            max_shift_x: 0.0,
            max_shift_y: 0.0,
            max_rotation_degrees: 0.0,
            horizontal_flip: false,
            seed: 0,
        }
    }
}

/// Translates by whole pixels; vacated pixels become zero.
pub fn shift_image(image: &Tensor3, dy: i64, dx: i64) -> Tensor3 {
    let (h, w, c) = image.shape();
    let mut out = Tensor3::zeros(h, w, c);
    for y in 0..h as i64 {
        let sy = y - dy;
        if sy < 0 || sy >= h as i64 {
            continue;
        }
        for x in 0..w as i64 {
            let sx = x - dx;
            if sx < 0 || sx >= w as i64 {
                continue;
            }
            for ch in 0..c {
                out.set(y as usize, x as usize, ch, image.get(sy as usize, sx as usize, ch));
            }
        }
    }
    out
}

/// Mirrors left-right. Applying it twice restores the original image.
pub fn flip_horizontal(image: &Tensor3) -> Tensor3 {
    let (h, w, c) = image.shape();
    let mut out = Tensor3::zeros(h, w, c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                out.set(y, x, ch, image.get(y, w - 1 - x, ch));
            }
        }
    }
    out
}

/// Rotates counter-clockwise about the image center, nearest-neighbor
/// sampling, zero fill outside the frame.
pub fn rotate_image(image: &Tensor3, degrees: f64) -> Tensor3 {
    let (h, w, c) = image.shape();
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut out = Tensor3::zeros(h, w, c);
    for y in 0..h {
        for x in 0..w {
            let rel_y = y as f64 - cy;
            let rel_x = x as f64 - cx;
            let sy = (cy + sin * rel_x + cos * rel_y).round();
            let sx = (cx + cos * rel_x - sin * rel_y).round();
            if sy < 0.0 || sx < 0.0 || sy >= h as f64 || sx >= w as f64 {
                continue;
            }
            for ch in 0..c {
                out.set(y, x, ch, image.get(sy as usize, sx as usize, ch));
            }
        }
    }
    out
}

/// Applies a random shift, rotation and (optionally) flip within the bounds.
pub fn augment(image: &Tensor3, params: &AugmentParams, rng: &mut RngStream) -> Tensor3 {
    let (h, w, _) = image.shape();
    let max_dx = params.max_shift_x * w as f64;
    let max_dy = params.max_shift_y * h as f64;
    let dx = rng.next_range(-max_dx, max_dx).round() as i64;
    let dy = rng.next_range(-max_dy, max_dy).round() as i64;
    let degrees = rng.next_range(-params.max_rotation_degrees, params.max_rotation_degrees);

    let mut out = shift_image(image, dy, dx);
    if degrees != 0.0 {
        out = rotate_image(&out, degrees);
    }
    if params.horizontal_flip && rng.next_bool(0.5) {
        out = flip_horizontal(&out);
    }
    out
}
