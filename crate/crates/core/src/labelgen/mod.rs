//! Weak labels from tagged vector geometry.
//!
//! Features are matched against an ordered ontology, mapped into chip pixel
//! space through the chip's affine geotransform, clipped to the chip,
//! rasterized with the pixel-centre even-odd rule and boxed with
//! minimum-area rotated rectangles. Lines and points are buffered into
//! polygons first.

mod clip;
mod geometry;
mod georef;
mod ontology;
mod pipeline;
mod raster;
mod rbox;

pub use clip::clip_to_chip;
pub use geometry::{is_self_intersecting, signed_area, Geometry, Point, Ring};
pub use georef::{chip_footprint, pixel_to_world, world_to_pixel, ChipSpec, GeoTransform};
pub use ontology::{filter_ontology, parse_geojson, read_geojson, ClassMap, ClassifiedFeature, Feature, TagRule, BACKGROUND};
pub use pipeline::{generate_all, generate_labels, render_bundle, Instance, LabelBundle};
pub use raster::{rasterize_mask, rasterize_rings, Mask};
pub use rbox::{convex_hull, rotated_bbox, RotatedBox};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabelError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate geotransform: pixel sizes must be non-zero and finite")]
    DegenerateTransform,
    #[error("invalid chip: {0}")]
    InvalidChip(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid raster size {0}")]
    InvalidRaster(String),
    #[error("class map: {0}")]
    ClassMap(String),
    #[error("geojson: {0}")]
    GeoJson(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabelError>;
