use rayon::prelude::*;
use serde::Serialize;

use super::clip::clip_to_chip;
use super::geometry::{Geometry, Point, Ring};
use super::georef::{world_to_pixel, ChipSpec};
use super::ontology::{filter_ontology, ClassMap, Feature, BACKGROUND};
use super::raster::{rasterize_rings, BinaryRle, Mask};
use super::rbox::{rotated_bbox, RotatedBox};
use super::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub class_id: u8,
    /// Index of the ontology rule that matched.
    pub rule: usize,
    pub mask: Mask,
    pub bbox: RotatedBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelBundle {
    pub chip: ChipSpec,
    /// In input feature order.
    pub instances: Vec<Instance>,
    /// Class id per pixel, [`BACKGROUND`] where nothing was drawn.
    pub semantic: Mask,
}

fn octagon(c: Point, r: f64) -> Ring {
    (0..8)
        .map(|k| {
            let a = (k as f64 * 45.0 + 22.5).to_radians();
            (c.0 + r * a.cos(), c.1 + r * a.sin())
        })
        .collect()
}

/// One square-capped rectangle per segment; zero-length lines become an octagon.
fn buffer_line(line: &[Point], r: f64) -> Vec<Ring> {
    let mut out = Vec::new();
    for s in line.windows(2) {
        let (a, b) = (s[0], s[1]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        if len == 0.0 {
            continue;
        }
        let (ux, uy) = ((b.0 - a.0) / len * r, (b.1 - a.1) / len * r);
        let (nx, ny) = (-uy, ux);
        out.push(vec![
            (a.0 - ux - nx, a.1 - uy - ny),
            (b.0 + ux - nx, b.1 + uy - ny),
            (b.0 + ux + nx, b.1 + uy + ny),
            (a.0 - ux + nx, a.1 - uy + ny),
        ]);
    }
    if out.is_empty() {
        if let Some(&p) = line.first() {
            out.push(octagon(p, r));
        }
    }
    out
}

/// Pixel-space parts; rings inside a part combine by even-odd, parts by union.
fn parts(geometry: &Geometry, buffer: f64) -> Vec<Vec<Ring>> {
    match geometry {
        Geometry::Point(p) => vec![vec![octagon(*p, buffer)]],
        Geometry::MultiPoint(ps) => ps.iter().map(|&p| vec![octagon(p, buffer)]).collect(),
        Geometry::LineString(l) => buffer_line(l, buffer).into_iter().map(|r| vec![r]).collect(),
        Geometry::MultiLineString(ls) => ls.iter().flat_map(|l| buffer_line(l, buffer)).map(|r| vec![r]).collect(),
        Geometry::Polygon(rings) => vec![rings.clone()],
        Geometry::MultiPolygon(polys) => polys.clone(),
    }
}

fn clip_part(part: &[Ring], w: f64, h: f64) -> Result<Option<Vec<Ring>>> {
    let Some(outer) = part.first() else { return Ok(None) };
    let outer = clip_to_chip(outer, w, h)?;
    if outer.is_empty() {
        return Ok(None);
    }
    let mut rings = vec![outer];
    for hole in &part[1..] {
        let c = clip_to_chip(hole, w, h)?;
        if !c.is_empty() {
            rings.push(c);
        }
    }
    Ok(Some(rings))
}

/// Filter, reproject, clip, rasterize and box every matching feature.
///
/// Semantic pixels take the class of the last instance drawn, with instances
/// drawn from the last ontology rule to the first (input order within a
/// rule), so earlier rules win overlaps.
pub fn generate_labels(chip: &ChipSpec, features: &[Feature], classmap: &ClassMap) -> Result<LabelBundle> {
    chip.validate()?;
    let (wu, hu) = (chip.width as usize, chip.height as usize);
    let (w, h) = (chip.width as f64, chip.height as f64);
    let mut instances = Vec::new();
    for f in filter_ontology(features, classmap) {
        let pixel = world_to_pixel(&f.geometry, chip)?;
        let mut clipped = Vec::new();
        for part in parts(&pixel, classmap.line_buffer_px) {
            if let Some(p) = clip_part(&part, w, h)? {
                clipped.push(p);
            }
        }
        if clipped.is_empty() {
            continue;
        }
        let mut mask = Mask::filled(wu, hu, 0);
        for part in &clipped {
            let refs: Vec<&[Point]> = part.iter().map(Vec::as_slice).collect();
            mask.or_assign(&rasterize_rings(&refs, wu, hu)?);
        }
        let outline: Vec<Point> = clipped.iter().flat_map(|p| p[0].iter().copied()).collect();
        instances.push(Instance {
            class_id: f.class_id,
            rule: f.rule,
            mask,
            bbox: rotated_bbox(&outline),
        });
    }

    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.sort_by(|&a, &b| instances[b].rule.cmp(&instances[a].rule).then(a.cmp(&b)));
    let mut semantic = Mask::filled(wu, hu, BACKGROUND);
    for i in order {
        let inst = &instances[i];
        for (s, &m) in semantic.data.iter_mut().zip(&inst.mask.data) {
            if m != 0 {
                *s = inst.class_id;
            }
        }
    }
    Ok(LabelBundle {
        chip: chip.clone(),
        instances,
        semantic,
    })
}

/// Bundles for many chips, computed in parallel; results keep chip order.
pub fn generate_all(chips: &[ChipSpec], features: &[Feature], classmap: &ClassMap, parallel: bool) -> Result<Vec<LabelBundle>> {
    if parallel {
        chips.par_iter().map(|c| generate_labels(c, features, classmap)).collect()
    } else {
        chips.iter().map(|c| generate_labels(c, features, classmap)).collect()
    }
}

#[derive(Serialize)]
struct InstanceRle<'a> {
    class: u8,
    #[serde(flatten)]
    rle: BinaryRle,
    bbox: &'a RotatedBox,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    chip_id: String,
    width: usize,
    height: usize,
    background: u8,
    /// `(class, run length)` pairs, row-major.
    semantic: Vec<(u8, usize)>,
    instances: Vec<InstanceRle<'a>>,
}

/// Output files of one chip as `(relative path, bytes)`:
/// `<chip_id>/semantic.pgm`, `<chip_id>/instance_<k>.pgm`,
/// `<chip_id>/boxes.csv` and the `<chip_id>/masks.rle.json` sidecar.
pub fn render_bundle(bundle: &LabelBundle) -> Vec<(String, Vec<u8>)> {
    let id = bundle.chip.chip_id();
    let mut files = vec![(format!("{id}/semantic.pgm"), bundle.semantic.to_pgm_values())];
    let mut boxes = String::from("class,cx,cy,w,h,theta_deg\n");
    for (k, inst) in bundle.instances.iter().enumerate() {
        files.push((format!("{id}/instance_{k}.pgm"), inst.mask.to_pgm_binary()));
        let b = &inst.bbox;
        boxes.push_str(&format!("{},{},{},{},{},{}\n", inst.class_id, b.cx, b.cy, b.w, b.h, b.theta_deg));
    }
    files.push((format!("{id}/boxes.csv"), boxes.into_bytes()));
    let sidecar = Sidecar {
        chip_id: id.clone(),
        width: bundle.semantic.width,
        height: bundle.semantic.height,
        background: BACKGROUND,
        semantic: bundle.semantic.runs(),
        instances: bundle
            .instances
            .iter()
            .map(|i| InstanceRle {
                class: i.class_id,
                rle: BinaryRle::from(&i.mask),
                bbox: &i.bbox,
            })
            .collect(),
    };
    let json = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    files.push((format!("{id}/masks.rle.json"), json));
    files
}
