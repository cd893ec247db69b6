//! Label-map serialization formats for the CLI.

use ccl_core::{write_pgm, Image, LabelMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("raw-u32le output supports at most 65535 cells per side, got {0}x{1}")]
    DimsTooLarge(u32, u32),
    #[error("malformed label data: {0}")]
    Malformed(String),
}

/// On-disk encodings of a label map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFormat {
    /// One little-endian u32 per cell, row-major.
    RawU32le,
    /// One text row per image row, comma-separated label values.
    Csv,
    /// Binary PGM with label classes spread over the 8-bit range, for a
    /// quick visual check. Lossy when there are more than 256 classes.
    PgmRecolor,
}

impl std::str::FromStr for LabelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw-u32le" | "raw" => Ok(LabelFormat::RawU32le),
            "csv" => Ok(LabelFormat::Csv),
            "pgm-recolor" | "pgm" => Ok(LabelFormat::PgmRecolor),
            other => Err(format!(
                "unknown label format {other:?} (expected raw-u32le, csv, or pgm-recolor)"
            )),
        }
    }
}

/// Serialize labels in the requested format.
pub fn encode_labels(labels: &LabelMap, format: LabelFormat) -> Result<Vec<u8>, OutputError> {
    match format {
        LabelFormat::RawU32le => {
            if labels.width() > 65535 || labels.height() > 65535 {
                return Err(OutputError::DimsTooLarge(labels.width(), labels.height()));
            }
            let mut out = Vec::with_capacity(labels.len() * 4);
            for cell in 0..labels.len() as u32 {
                out.extend_from_slice(&labels.label(cell).to_le_bytes());
            }
            Ok(out)
        }
        LabelFormat::Csv => {
            let width = labels.width() as usize;
            let values = labels.to_vec();
            let mut out = String::new();
            for row in values.chunks(width) {
                let line: Vec<String> = row.iter().map(u32::to_string).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        LabelFormat::PgmRecolor => Ok(write_pgm(&recolor(labels))),
    }
}

/// Decode a raw-u32le label dump back into per-cell labels.
pub fn decode_raw_u32le(bytes: &[u8], width: u32, height: u32) -> Result<Vec<u32>, OutputError> {
    let expected = width as usize * height as usize * 4;
    if bytes.len() != expected {
        return Err(OutputError::Malformed(format!(
            "expected {expected} bytes for {width}x{height}, got {}",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Decode the CSV label format back into per-cell labels.
pub fn decode_csv(bytes: &[u8]) -> Result<Vec<u32>, OutputError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| OutputError::Malformed(format!("not utf-8: {e}")))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        for field in line.split(',') {
            let value = field.trim().parse::<u32>().map_err(|e| {
                OutputError::Malformed(format!("line {}: bad label {field:?}: {e}", lineno + 1))
            })?;
            out.push(value);
        }
    }
    Ok(out)
}

/// Renumber label classes in first-appearance order and spread them over
/// the 8-bit range for display.
fn recolor(labels: &LabelMap) -> Image {
    let values = labels.to_vec();
    let mut order: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    for &l in &values {
        let next = order.len() as u32;
        order.entry(l).or_insert(next);
    }
    let classes = order.len().max(1) as u64;
    let pixels: Vec<u8> = values
        .iter()
        .map(|l| {
            let k = order[l] as u64;
            if classes == 1 {
                0
            } else {
                (k * 255 / (classes - 1)) as u8
            }
        })
        .collect();
    Image::new(labels.width(), labels.height(), pixels).expect("dims already valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ccl_core::{flood_fill_oracle, generate, read_pgm, GenParams, Pattern};

    fn sample_labels() -> LabelMap {
        let params = GenParams {
            density: 0.4,
            ..GenParams::default()
        };
        let img = generate(Pattern::Noise, 19, 7, &params, 5).unwrap();
        flood_fill_oracle(&img)
    }

    #[test]
    fn raw_and_csv_decode_to_identical_labels() {
        let labels = sample_labels();
        let raw = encode_labels(&labels, LabelFormat::RawU32le).unwrap();
        let csv = encode_labels(&labels, LabelFormat::Csv).unwrap();
        let from_raw = decode_raw_u32le(&raw, labels.width(), labels.height()).unwrap();
        let from_csv = decode_csv(&csv).unwrap();
        assert_eq!(from_raw, labels.to_vec());
        assert_eq!(from_csv, labels.to_vec());
    }

    #[test]
    fn raw_encoding_is_little_endian_row_major() {
        let labels = LabelMap::new_identity(2, 1);
        labels.parents().set(1, 0x01020304);
        let raw = encode_labels(&labels, LabelFormat::RawU32le).unwrap();
        assert_eq!(raw, vec![0, 0, 0, 0, 0x04, 0x03, 0x02, 0x01]);
    }

    #[test]
    fn truncated_raw_data_is_rejected() {
        assert!(decode_raw_u32le(&[0u8; 7], 2, 1).is_err());
    }

    #[test]
    fn recolored_output_is_a_valid_pgm() {
        let labels = sample_labels();
        let pgm = encode_labels(&labels, LabelFormat::PgmRecolor).unwrap();
        let img = read_pgm(&pgm).unwrap();
        assert_eq!(
            (img.width(), img.height()),
            (labels.width(), labels.height())
        );
    }

    #[test]
    fn recolor_of_uniform_labels_is_uniform() {
        let labels = LabelMap::new_identity(3, 1);
        for i in 0..3 {
            labels.parents().set(i, 0);
        }
        let pgm = encode_labels(&labels, LabelFormat::PgmRecolor).unwrap();
        let img = read_pgm(&pgm).unwrap();
        assert_eq!(img.pixels(), &[0, 0, 0]);
    }
}
