//! Image representation, synthetic test-image generation, and PGM I/O.
//!
//! Pixel equality is what drives connectivity downstream, so images are
//! plain 8-bit grids with no notion of foreground or background: every
//! maximal equal-valued region is a component, background included.

use std::fmt;

use thiserror::Error;

use crate::rng::{mix, SplitMix64};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid image dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: u64,
        height: u64,
        reason: &'static str,
    },
    #[error("invalid generator parameter: {0}")]
    InvalidParam(String),
    #[error("malformed PGM: {0}")]
    PgmParse(String),
}

/// Immutable 2D grid of 8-bit pixel values, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Image({}x{})", self.width, self.height)
    }
}

fn check_dims(width: u64, height: u64) -> Result<(u32, u32), GridError> {
    if width == 0 || height == 0 {
        return Err(GridError::InvalidDimensions {
            width,
            height,
            reason: "both sides must be at least 1",
        });
    }
    // Cell indices must fit in u32 so labels can be stored as u32.
    if width > u32::MAX as u64 || height > u32::MAX as u64 || width * height > u32::MAX as u64 {
        return Err(GridError::InvalidDimensions {
            width,
            height,
            reason: "total cell count exceeds u32 range",
        });
    }
    Ok((width as u32, height as u32))
}

impl Image {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, GridError> {
        let (width, height) = check_dims(width as u64, height as u64)?;
        if pixels.len() != width as usize * height as usize {
            return Err(GridError::InvalidDimensions {
                width: width as u64,
                height: height as u64,
                reason: "pixel buffer length does not match width * height",
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // width, height >= 1 by construction
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn pixel_at(&self, linear: u32) -> u8 {
        self.pixels[linear as usize]
    }

    /// Threshold to a two-valued image: 255 where `pixel >= threshold`,
    /// else 0. Idempotent for any threshold in 1..=255.
    pub fn binarize(&self, threshold: u8) -> Image {
        let pixels = self
            .pixels
            .iter()
            .map(|&p| if p >= threshold { 255 } else { 0 })
            .collect();
        Image {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Nearest-neighbor resample. Exact replication for integer upscale
    /// factors, which preserves region topology.
    pub fn resize_nearest(&self, width: u32, height: u32) -> Result<Image, GridError> {
        let (width, height) = check_dims(width as u64, height as u64)?;
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            let sy = (y as u64 * self.height as u64 / height as u64) as u32;
            for x in 0..width {
                let sx = (x as u64 * self.width as u64 / width as u64) as u32;
                pixels.push(self.pixel(sx, sy));
            }
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }
}

/// Synthetic test patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Each cell independently 255 with probability `density`, else 0.
    Noise,
    /// Vertical stripes: value alternates every `stripe_period` columns.
    Stripes,
    /// `(x + y) % 2 == 0` cells are 0, the rest 255.
    Checkerboard,
    /// Every cell equals `fill_value`.
    Uniform,
    /// A single-cell-wide 255 spiral on a 0 background, arms one cell
    /// apart. One long 4-connected path whose length grows with the
    /// image size.
    Spiral,
    /// Smooth grayscale value-noise blobs; binarized it yields large
    /// irregular regions, a stand-in for natural test photographs.
    Plasma,
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [
        Pattern::Noise,
        Pattern::Stripes,
        Pattern::Checkerboard,
        Pattern::Uniform,
        Pattern::Spiral,
        Pattern::Plasma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Noise => "noise",
            Pattern::Stripes => "stripes",
            Pattern::Checkerboard => "checkerboard",
            Pattern::Uniform => "uniform",
            Pattern::Spiral => "spiral",
            Pattern::Plasma => "plasma",
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown pattern {s:?} (expected one of {})",
                    Pattern::ALL.map(Pattern::name).join(", ")
                )
            })
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters consumed by [`generate`]; each pattern reads the fields it
/// needs and ignores the rest.
#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    /// Noise: probability that a cell is 255. Must lie in [0, 1].
    pub density: f64,
    /// Stripes: width of one stripe in columns. Must be >= 1.
    pub stripe_period: u32,
    /// Uniform: the constant pixel value.
    pub fill_value: u8,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            density: 0.5,
            stripe_period: 4,
            fill_value: 0,
        }
    }
}

/// Deterministically generate a test image: the same arguments always
/// produce the same pixels, across processes and thread counts.
pub fn generate(
    pattern: Pattern,
    width: u32,
    height: u32,
    params: &GenParams,
    seed: u64,
) -> Result<Image, GridError> {
    let (width, height) = check_dims(width as u64, height as u64)?;
    let n = width as usize * height as usize;
    let pixels = match pattern {
        Pattern::Noise => {
            if !(0.0..=1.0).contains(&params.density) {
                return Err(GridError::InvalidParam(format!(
                    "noise density {} outside [0, 1]",
                    params.density
                )));
            }
            let mut rng = SplitMix64::new(seed);
            (0..n)
                .map(|_| {
                    if rng.next_f64() < params.density {
                        255
                    } else {
                        0
                    }
                })
                .collect()
        }
        Pattern::Stripes => {
            if params.stripe_period == 0 {
                return Err(GridError::InvalidParam("stripe period must be >= 1".into()));
            }
            let mut pixels = Vec::with_capacity(n);
            for _y in 0..height {
                for x in 0..width {
                    let stripe = x / params.stripe_period;
                    pixels.push(if stripe % 2 == 0 { 0 } else { 255 });
                }
            }
            pixels
        }
        Pattern::Checkerboard => {
            let mut pixels = Vec::with_capacity(n);
            for y in 0..height {
                for x in 0..width {
                    pixels.push(if (x + y) % 2 == 0 { 0 } else { 255 });
                }
            }
            pixels
        }
        Pattern::Uniform => vec![params.fill_value; n],
        Pattern::Spiral => spiral_pixels(width, height),
        Pattern::Plasma => plasma_pixels(width, height, seed),
    };
    Ok(Image {
        width,
        height,
        pixels,
    })
}

/// Turtle walk marking an inward spiral. The turtle advances while the
/// next cell is free and the cell two steps ahead is unmarked (keeping a
/// one-cell gap to the previous arm), otherwise it turns clockwise; it
/// stops when boxed in.
fn spiral_pixels(width: u32, height: u32) -> Vec<u8> {
    let (w, h) = (width as i64, height as i64);
    let mut pixels = vec![0u8; (w * h) as usize];
    let marked = |px: &[u8], x: i64, y: i64| px[(y * w + x) as usize] == 255;
    // right, down, left, up
    const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

    let (mut x, mut y) = (0i64, 0i64);
    let mut dir = 0usize;
    pixels[0] = 255;
    'walk: loop {
        for turn in 0..4 {
            let (dx, dy) = DIRS[(dir + turn) % 4];
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h || marked(&pixels, nx, ny) {
                continue;
            }
            let (fx, fy) = (nx + dx, ny + dy);
            let two_ahead_blocked =
                fx >= 0 && fy >= 0 && fx < w && fy < h && marked(&pixels, fx, fy);
            if two_ahead_blocked {
                continue;
            }
            dir = (dir + turn) % 4;
            x = nx;
            y = ny;
            pixels[(y * w + x) as usize] = 255;
            continue 'walk;
        }
        break;
    }
    pixels
}

/// Two-octave lattice value noise, smoothstep-interpolated.
fn plasma_pixels(width: u32, height: u32, seed: u64) -> Vec<u8> {
    fn lattice(seed: u64, gx: i64, gy: i64) -> f64 {
        (mix(seed, gx as u64, gy as u64) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
    fn octave(seed: u64, x: u32, y: u32, cell: f64) -> f64 {
        let fx = x as f64 / cell;
        let fy = y as f64 / cell;
        let gx = fx.floor() as i64;
        let gy = fy.floor() as i64;
        let tx = fx - gx as f64;
        let ty = fy - gy as f64;
        let sx = tx * tx * (3.0 - 2.0 * tx);
        let sy = ty * ty * (3.0 - 2.0 * ty);
        let v00 = lattice(seed, gx, gy);
        let v10 = lattice(seed, gx + 1, gy);
        let v01 = lattice(seed, gx, gy + 1);
        let v11 = lattice(seed, gx + 1, gy + 1);
        let top = v00 + (v10 - v00) * sx;
        let bottom = v01 + (v11 - v01) * sx;
        top + (bottom - top) * sy
    }
    let mut pixels = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            let v = 0.7 * octave(seed, x, y, 61.0) + 0.3 * octave(seed ^ 0x5EED, x, y, 13.0);
            pixels.push((v * 256.0).min(255.0) as u8);
        }
    }
    pixels
}

/// Parse a binary (P5) PGM with maxval <= 255. Header whitespace is
/// flexible and `#` comments are skipped, per the format.
pub fn read_pgm(bytes: &[u8]) -> Result<Image, GridError> {
    fn skip_separators(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u64, GridError> {
        skip_separators(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return Err(GridError::PgmParse(format!("missing {what} in header")));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .expect("digits are valid utf-8")
            .parse::<u64>()
            .map_err(|_| GridError::PgmParse(format!("{what} out of range")))
    }

    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(GridError::PgmParse("expected magic \"P5\"".into()));
    }
    let mut pos = 2usize;
    let width = read_number(bytes, &mut pos, "width")?;
    let height = read_number(bytes, &mut pos, "height")?;
    let maxval = read_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(GridError::PgmParse(format!(
            "maxval {maxval} unsupported (want 1..=255)"
        )));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(GridError::PgmParse("missing separator after maxval".into()));
    }
    pos += 1;

    let (width, height) = check_dims(width, height)
        .map_err(|e| GridError::PgmParse(format!("bad dimensions: {e}")))?;
    let expected = width as usize * height as usize;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(GridError::PgmParse(format!(
            "truncated payload: expected {expected} bytes, found {}",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(GridError::PgmParse(format!(
            "trailing data: expected {expected} payload bytes, found {}",
            payload.len()
        )));
    }
    Ok(Image {
        width,
        height,
        pixels: payload.to_vec(),
    })
}

/// Serialize to canonical binary PGM: single-space separators, maxval 255,
/// one newline after each header line. `read_pgm(write_pgm(img))`
/// reproduces `img` exactly, and the bytes of a canonical file survive a
/// read/write round trip unchanged.
pub fn write_pgm(img: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}
