//! 8-bit grayscale PGM (P2/P5) reading and writing, plus a procedurally
//! generated test image so the repository ships no binary assets.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::ExperimentError;

/// Grayscale image with pixel values in `[0, 1]`, row-major, top-left
/// origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count must equal width*height");
        Self { width, height, pixels }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }
}

/// Closed-form test pattern on `[-1,1]^2`: a radial chirp (frequency grows
/// with radius) over soft edge bands, clamped to `[0, 1]`. Continuous, so
/// a clean reference exists at any resolution.
pub fn synthetic_image_value(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let chirp = (8.0 * r2 + 3.0 * x).sin();
    let bands = (4.0 * (y - 0.2)).tanh() * (6.0 * (x + 0.3)).tanh();
    let v = 0.5 + 0.3 * chirp + 0.15 * bands;
    v.clamp(0.0, 1.0)
}

/// Sample the synthetic pattern on an `size x size` pixel-centered grid.
pub fn synthetic_image(size: usize) -> GrayImage {
    let mut pixels = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let (x, y) = pixel_center(size, row, col);
            pixels.push(synthetic_image_value(x, y));
        }
    }
    GrayImage::new(size, size, pixels)
}

/// Pixel-centered coordinates on `[-1,1]^2`: `x = -1 + (2c+1)/M`.
/// The spacing `2/M` makes the grid Nyquist frequency `M/4` cycles per
/// unit length.
pub fn pixel_center(size: usize, row: usize, col: usize) -> (f64, f64) {
    let x = -1.0 + (2.0 * col as f64 + 1.0) / size as f64;
    let y = -1.0 + (2.0 * row as f64 + 1.0) / size as f64;
    (x, y)
}

pub fn read_pgm(path: &Path) -> Result<GrayImage, ExperimentError> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes).map_err(|msg| ExperimentError::PgmFormat {
        path: path.display().to_string(),
        msg,
    })
}

fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, String> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or("missing magic number")?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(format!("unsupported magic '{other}' (want P2 or P5)")),
    };
    let width: usize = next_token(bytes, &mut pos)
        .ok_or("missing width")?
        .parse()
        .map_err(|_| "bad width")?;
    let height: usize = next_token(bytes, &mut pos)
        .ok_or("missing height")?
        .parse()
        .map_err(|_| "bad height")?;
    let maxval: u32 = next_token(bytes, &mut pos)
        .ok_or("missing maxval")?
        .parse()
        .map_err(|_| "bad maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (8-bit only)"));
    }
    let n = width * height;
    let mut pixels = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from raster.
        let raster = &bytes[pos + 1..];
        if raster.len() < n {
            return Err(format!("raster too short: {} < {n}", raster.len()));
        }
        pixels.extend(raster[..n].iter().map(|&b| b as f64 / maxval as f64));
    } else {
        for _ in 0..n {
            let v: u32 = next_token(bytes, &mut pos)
                .ok_or("raster too short")?
                .parse()
                .map_err(|_| "bad pixel value")?;
            pixels.push(v as f64 / maxval as f64);
        }
    }
    Ok(GrayImage::new(width, height, pixels))
}

/// Whitespace-delimited token scanner that skips `#` comment lines.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    while *pos < bytes.len() {
        let b = bytes[*pos];
        if b == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

pub fn write_pgm(image: &GrayImage, path: &Path, binary: bool) -> Result<(), ExperimentError> {
    let mut out = Vec::new();
    let quantize = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    if binary {
        write!(out, "P5\n{} {}\n255\n", image.width, image.height)?;
        out.extend(image.pixels.iter().map(|&v| quantize(v)));
    } else {
        write!(out, "P2\n{} {}\n255\n", image.width, image.height)?;
        for row in 0..image.height {
            let line: Vec<String> = (0..image.width)
                .map(|c| quantize(image.get(row, c)).to_string())
                .collect();
            writeln!(out, "{}", line.join(" "))?;
        }
    }
    fs::write(path, out)?;
    Ok(())
}
