//! Dataset ingestion and the in-repo toy image sets.
//!
//! Images travel either as CSV (one record per row, label in a configurable
//! column, pixels flattened row-major) or as a binary tensor file:
//! magic `LTEN`, `u32` dimension count, the dimensions as `u32`, then the
//! values as little-endian `f32`, all little-endian.
//!
//! The toy sets are generated deterministically from a seed so every run of
//! the acceptance suite and the examples works offline with identical data.

use std::path::Path;

use crate::conv::Tensor3;
use crate::rng::RngStream;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: expected {expected} pixel columns for {height}x{width}x{channels}, found {found}")]
    PixelCount {
        row: usize,
        expected: usize,
        found: usize,
        height: usize,
        width: usize,
        channels: usize,
    },
    #[error("row {row}: label column {column} missing or not an integer: {reason}")]
    BadLabel {
        row: usize,
        column: usize,
        reason: String,
    },
    #[error("row {row}, column {column}: not a number: {reason}")]
    BadPixel {
        row: usize,
        column: usize,
        reason: String,
    },
    #[error("tensor file: bad magic {0:02x?}")]
    BadTensorMagic([u8; 4]),
    #[error("tensor file: {0}")]
    BadTensorLayout(String),
}

/// Writes images as CSV with the label in column 0 and a header row.
pub fn write_images_csv(
    path: &Path,
    images: &[Tensor3],
    labels: &[u16],
) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_path(path)?;
    let pixel_count = images.first().map_or(0, |t| t.as_slice().len());
    let mut header = vec!["label".to_string()];
    header.extend((0..pixel_count).map(|i| format!("p{i}")));
    writer.write_record(&header)?;
    for (image, label) in images.iter().zip(labels) {
        let mut row = vec![label.to_string()];
        row.extend(image.as_slice().iter().map(|v| v.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads images from CSV. `label_column` selects the label; every other
/// column is a pixel, consumed left to right into a row-major tensor.
pub fn read_images_csv(
    path: &Path,
    height: usize,
    width: usize,
    channels: usize,
    label_column: usize,
) -> Result<(Vec<Tensor3>, Vec<u16>), DatasetError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let expected = height * width * channels;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row?;
        let label_field = row.get(label_column).ok_or(DatasetError::BadLabel {
            row: row_idx,
            column: label_column,
            reason: "column out of range".into(),
        })?;
        let label: u16 = label_field.trim().parse().map_err(|e| DatasetError::BadLabel {
            row: row_idx,
            column: label_column,
            reason: format!("{e}"),
        })?;
        let mut pixels = Vec::with_capacity(expected);
        for (col_idx, field) in row.iter().enumerate() {
            if col_idx == label_column {
                continue;
            }
            let value: f64 = field.trim().parse().map_err(|e| DatasetError::BadPixel {
                row: row_idx,
                column: col_idx,
                reason: format!("{e}"),
            })?;
            pixels.push(value);
        }
        if pixels.len() != expected {
            return Err(DatasetError::PixelCount {
                row: row_idx,
                expected,
                found: pixels.len(),
                height,
                width,
                channels,
            });
        }
        images.push(Tensor3::from_flat(height, width, channels, pixels).unwrap());
        labels.push(label);
    }
    Ok((images, labels))
}

const TENSOR_MAGIC: [u8; 4] = *b"LTEN";

/// Writes a tensor stack: magic, dims, then f32 little-endian values.
pub fn write_tensor_file(path: &Path, dims: &[u32], data: &[f32]) -> Result<(), DatasetError> {
    let expected: usize = dims.iter().map(|&d| d as usize).product();
    if expected != data.len() {
        return Err(DatasetError::BadTensorLayout(format!(
            "dims {dims:?} imply {expected} values, got {}",
            data.len()
        )));
    }
    let mut out = Vec::with_capacity(8 + dims.len() * 4 + data.len() * 4);
    out.extend_from_slice(&TENSOR_MAGIC);
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a tensor file written by [`write_tensor_file`].
pub fn read_tensor_file(path: &Path) -> Result<(Vec<u32>, Vec<f32>), DatasetError> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 {
        return Err(DatasetError::BadTensorLayout("file shorter than header".into()));
    }
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&bytes[..4]);
    if magic != TENSOR_MAGIC {
        return Err(DatasetError::BadTensorMagic(magic));
    }
    let ndim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dims_end = 8 + ndim * 4;
    if bytes.len() < dims_end {
        return Err(DatasetError::BadTensorLayout("dims truncated".into()));
    }
    let dims: Vec<u32> = (0..ndim)
        .map(|i| u32::from_le_bytes(bytes[8 + i * 4..12 + i * 4].try_into().unwrap()))
        .collect();
    let count: usize = dims.iter().map(|&d| d as usize).product();
    let expected_len = dims_end + count * 4;
    if bytes.len() != expected_len {
        return Err(DatasetError::BadTensorLayout(format!(
            "expected {expected_len} bytes for dims {dims:?}, file has {}",
            bytes.len()
        )));
    }
    let data: Vec<f32> = (0..count)
        .map(|i| {
            f32::from_le_bytes(bytes[dims_end + i * 4..dims_end + i * 4 + 4].try_into().unwrap())
        })
        .collect();
    Ok((dims, data))
}

/// Two-class 8x8 synthetic set: horizontal bars (class 0) versus vertical
/// bars (class 1) over low background noise, balanced and shuffled.
pub fn two_class_bars(per_class: usize, seed: u64) -> (Vec<Tensor3>, Vec<u16>) {
    let mut rng = RngStream::for_record(seed, 0);
    let mut images = Vec::with_capacity(per_class * 2);
    let mut labels = Vec::with_capacity(per_class * 2);
    for class in 0..2u16 {
        for _ in 0..per_class {
            let mut image = Tensor3::zeros(8, 8, 1);
            for y in 0..8 {
                for x in 0..8 {
                    image.set(y, x, 0, rng.next_range(0.0, 0.25));
                }
            }
            let start = rng.next_index(6);
            for lane in start..start + 2 {
                for i in 0..8 {
                    let v = 0.75 + rng.next_range(0.0, 0.25);
                    if class == 0 {
                        image.set(lane, i, 0, v);
                    } else {
                        image.set(i, lane, 0, v);
                    }
                }
            }
            images.push(image);
            labels.push(class);
        }
    }
    shuffle_pairs(&mut images, &mut labels, &mut rng);
    (images, labels)
}

/// Four-class 8x8 digit-like set: noisy renders of the stencils 0-3 with
/// one-pixel jitter.
pub fn digitlike(per_class: usize, seed: u64) -> (Vec<Tensor3>, Vec<u16>) {
    const STENCILS: [[u8; 8]; 4] = [
        // Each row is a bit mask, MSB = leftmost pixel.
        [0x3c, 0x42, 0x42, 0x42, 0x42, 0x42, 0x42, 0x3c], // 0
        [0x08, 0x18, 0x28, 0x08, 0x08, 0x08, 0x08, 0x3e], // 1
        [0x3c, 0x42, 0x02, 0x04, 0x08, 0x10, 0x20, 0x7e], // 2
        [0x3c, 0x42, 0x02, 0x1c, 0x02, 0x02, 0x42, 0x3c], // 3
    ];
    let mut rng = RngStream::for_record(seed, 1);
    let mut images = Vec::with_capacity(per_class * 4);
    let mut labels = Vec::with_capacity(per_class * 4);
    for (digit, stencil) in STENCILS.iter().enumerate() {
        for _ in 0..per_class {
            let dy = rng.next_index(3) as i64 - 1;
            let dx = rng.next_index(3) as i64 - 1;
            let mut image = Tensor3::zeros(8, 8, 1);
            for y in 0..8i64 {
                for x in 0..8i64 {
                    let sy = y - dy;
                    let sx = x - dx;
                    let on = (0..8).contains(&sy)
                        && (0..8).contains(&sx)
                        && (stencil[sy as usize] >> (7 - sx as usize)) & 1 == 1;
                    let v = if on {
                        0.7 + rng.next_range(0.0, 0.3)
                    } else {
                        rng.next_range(0.0, 0.15)
                    };
                    image.set(y as usize, x as usize, 0, v);
                }
            }
            images.push(image);
            labels.push(digit as u16);
        }
    }
    shuffle_pairs(&mut images, &mut labels, &mut rng);
    (images, labels)
}

fn shuffle_pairs(images: &mut [Tensor3], labels: &mut [u16], rng: &mut RngStream) {
    for i in (1..images.len()).rev() {
        let j = rng.next_index(i + 1);
        images.swap(i, j);
        labels.swap(i, j);
    }
}
