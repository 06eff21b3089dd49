use serde::Serialize;

use super::geometry::Point;
use super::{LabelError, Result};

/// Row-major 8-bit raster. Binary masks hold 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Mask {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn or_assign(&mut self, other: &Mask) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a |= b;
        }
    }

    /// Binary PGM (P5); nonzero pixels become 255.
    pub fn to_pgm_binary(&self) -> Vec<u8> {
        self.pgm(|v| if v != 0 { 255 } else { 0 })
    }

    /// PGM (P5) with the stored values as grey levels.
    pub fn to_pgm_values(&self) -> Vec<u8> {
        self.pgm(|v| v)
    }

    fn pgm(&self, f: impl Fn(u8) -> u8) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.data.iter().map(|&v| f(v)));
        out
    }

    /// Row-major runs as `(value, length)` pairs.
    pub fn runs(&self) -> Vec<(u8, usize)> {
        let mut out: Vec<(u8, usize)> = Vec::new();
        for &v in &self.data {
            match out.last_mut() {
                Some((last, n)) if *last == v => *n += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    /// Alternating zero/nonzero run lengths, starting with zeros (possibly 0).
    pub fn binary_counts(&self) -> Vec<usize> {
        let mut out = vec![0usize];
        let mut on = false;
        for &v in &self.data {
            if (v != 0) != on {
                on = !on;
                out.push(0);
            }
            *out.last_mut().expect("non-empty") += 1;
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct BinaryRle {
    pub width: usize,
    pub height: usize,
    pub counts: Vec<usize>,
}

impl From<&Mask> for BinaryRle {
    fn from(m: &Mask) -> Self {
        Self {
            width: m.width,
            height: m.height,
            counts: m.binary_counts(),
        }
    }
}

fn check_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(LabelError::InvalidRaster(format!("{width}x{height}")));
    }
    Ok(())
}

/// Even-odd fill over any number of rings (holes are just more rings).
/// Pixel `(r, c)` is set when a ray from its centre `(c + 0.5, r + 0.5)`
/// towards +x crosses the boundary an odd number of times.
pub fn rasterize_rings(rings: &[&[Point]], width: usize, height: usize) -> Result<Mask> {
    check_size(width, height)?;
    let mut mask = Mask::filled(width, height, 0);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in rings.iter().flat_map(|r| r.iter()) {
        ymin = ymin.min(p.1);
        ymax = ymax.max(p.1);
    }
    if !(ymin <= ymax) {
        return Ok(mask);
    }
    let r0 = (ymin - 0.5).ceil().max(0.0) as usize;
    let r1 = ((ymax - 0.5).floor() + 1.0).clamp(0.0, height as f64) as usize;
    let mut xs: Vec<f64> = Vec::new();
    for row in r0..r1 {
        let y = row as f64 + 0.5;
        xs.clear();
        for ring in rings {
            let n = ring.len();
            if n < 3 {
                continue;
            }
            let mut j = n - 1;
            for i in 0..n {
                let (xi, yi) = ring[i];
                let (xj, yj) = ring[j];
                if (yi > y) != (yj > y) {
                    xs.push((xj - xi) * (y - yi) / (yj - yi) + xi);
                }
                j = i;
            }
        }
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        let line = &mut mask.data[row * width..(row + 1) * width];
        let mut k = 0;
        for (c, px) in line.iter_mut().enumerate() {
            let x = c as f64 + 0.5;
            while k < xs.len() && !(x < xs[k]) {
                k += 1;
            }
            if (xs.len() - k) % 2 == 1 {
                *px = 1;
            }
        }
    }
    Ok(mask)
}

pub fn rasterize_mask(polygon: &[Point], width: usize, height: usize) -> Result<Mask> {
    rasterize_rings(&[polygon], width, height)
}
