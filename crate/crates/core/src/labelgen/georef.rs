use serde::{Deserialize, Serialize};

use super::geometry::{signed_area, Geometry, Point, Ring};
use super::{LabelError, Result};

/// Six-term affine from pixel `(col, row)` to world `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_width: f64,
    /// Usually negative for north-up imagery.
    pub pixel_height: f64,
    #[serde(default)]
    pub row_rotation: f64,
    #[serde(default)]
    pub col_rotation: f64,
}

impl GeoTransform {
    pub fn identity() -> Self {
        Self::north_up(0.0, 0.0, 1.0, 1.0)
    }

    pub fn north_up(origin_x: f64, origin_y: f64, pixel_width: f64, pixel_height: f64) -> Self {
        Self {
            origin_x,
            origin_y,
            pixel_width,
            pixel_height,
            row_rotation: 0.0,
            col_rotation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.row_rotation != 0.0 || self.col_rotation != 0.0 {
            return Err(LabelError::Unsupported("rotated geotransforms".into()));
        }
        if self.pixel_width == 0.0 || self.pixel_height == 0.0 || !self.pixel_width.is_finite() || !self.pixel_height.is_finite() {
            return Err(LabelError::DegenerateTransform);
        }
        Ok(())
    }

    pub fn apply(&self, col: f64, row: f64) -> Point {
        (self.origin_x + col * self.pixel_width, self.origin_y + row * self.pixel_height)
    }

    pub fn invert(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.origin_x) / self.pixel_width, (y - self.origin_y) / self.pixel_height)
    }
}

fn default_size() -> u32 {
    1024
}

/// A chip window inside a source image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipSpec {
    pub image_id: String,
    #[serde(default)]
    pub col_off: u32,
    #[serde(default)]
    pub row_off: u32,
    #[serde(default = "default_size")]
    pub width: u32,
    #[serde(default = "default_size")]
    pub height: u32,
    pub transform: GeoTransform,
    #[serde(default)]
    pub crs: String,
}

impl ChipSpec {
    pub fn new(image_id: impl Into<String>, col_off: u32, row_off: u32, width: u32, height: u32, transform: GeoTransform) -> Self {
        Self {
            image_id: image_id.into(),
            col_off,
            row_off,
            width,
            height,
            transform,
            crs: String::new(),
        }
    }

    /// Directory-safe identifier `<image_id>_<col_off>_<row_off>`.
    pub fn chip_id(&self) -> String {
        let safe: String = self
            .image_id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        format!("{safe}_{}_{}", self.col_off, self.row_off)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(LabelError::InvalidChip(format!(
                "{}: width and height must be positive",
                self.image_id
            )));
        }
        self.transform.validate()
    }
}

/// World quadrilateral of the chip's four outer pixel corners, counter-clockwise.
pub fn chip_footprint(chip: &ChipSpec) -> Result<Ring> {
    chip.validate()?;
    let (c0, r0) = (chip.col_off as f64, chip.row_off as f64);
    let (c1, r1) = (c0 + chip.width as f64, r0 + chip.height as f64);
    let t = &chip.transform;
    let mut ring = vec![t.apply(c0, r0), t.apply(c1, r0), t.apply(c1, r1), t.apply(c0, r1)];
    if signed_area(&ring) < 0.0 {
        ring[1..].reverse();
    }
    Ok(ring)
}

/// Inverse affine per vertex, then shifted into chip-local pixels.
pub fn world_to_pixel(geometry: &Geometry, chip: &ChipSpec) -> Result<Geometry> {
    chip.transform.validate()?;
    let (dc, dr) = (chip.col_off as f64, chip.row_off as f64);
    let t = chip.transform;
    Ok(geometry.map_points(&|(x, y)| {
        let (c, r) = t.invert(x, y);
        (c - dc, r - dr)
    }))
}

/// Chip-local pixels back to world coordinates.
pub fn pixel_to_world(geometry: &Geometry, chip: &ChipSpec) -> Result<Geometry> {
    chip.transform.validate()?;
    let (dc, dr) = (chip.col_off as f64, chip.row_off as f64);
    let t = chip.transform;
    Ok(geometry.map_points(&|(c, r)| t.apply(c + dc, r + dr)))
}
