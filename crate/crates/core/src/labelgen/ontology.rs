use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::geometry::{open_ring, Geometry, Point, Ring};
use super::{LabelError, Result};

/// Tag match: `key` must be present and its value must match the glob `value`
/// (`*` any run of characters, `?` one character).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRule {
    pub key: String,
    #[serde(default = "any_value")]
    pub value: String,
    /// Class name, resolved to an id when the map is loaded.
    pub class: String,
}

fn any_value() -> String {
    "*".into()
}

fn default_buffer() -> f64 {
    1.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassMapFile {
    classes: Vec<String>,
    rules: Vec<TagRule>,
    #[serde(default = "default_buffer")]
    line_buffer_px: f64,
}

/// Ordered ontology rules. Class ids are positions in `classes`; the first
/// matching rule wins and also decides overlap precedence in semantic masks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMap {
    pub classes: Vec<String>,
    pub rules: Vec<TagRule>,
    pub rule_class: Vec<u8>,
    /// Half-width in pixels used to turn lines and points into polygons.
    pub line_buffer_px: f64,
}

/// Ids 0..=254 are classes; 255 marks background in semantic masks.
pub const BACKGROUND: u8 = 255;

impl ClassMap {
    pub fn new(classes: Vec<String>, rules: Vec<TagRule>, line_buffer_px: f64) -> Result<Self> {
        if classes.is_empty() || classes.len() > BACKGROUND as usize {
            return Err(LabelError::ClassMap(format!(
                "between 1 and 255 classes required, got {}",
                classes.len()
            )));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].contains(c) {
                return Err(LabelError::ClassMap(format!("duplicate class {c:?}")));
            }
        }
        if !(line_buffer_px > 0.0) || !line_buffer_px.is_finite() {
            return Err(LabelError::ClassMap("line_buffer_px must be positive".into()));
        }
        let rule_class = rules
            .iter()
            .map(|r| {
                classes
                    .iter()
                    .position(|c| *c == r.class)
                    .map(|p| p as u8)
                    .ok_or_else(|| LabelError::ClassMap(format!("rule {}={} names unknown class {:?}", r.key, r.value, r.class)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            classes,
            rules,
            rule_class,
            line_buffer_px,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: ClassMapFile = toml::from_str(text).map_err(|e| LabelError::ClassMap(e.to_string()))?;
        Self::new(f.classes, f.rules, f.line_buffer_px)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: ClassMapFile = serde_json::from_str(text).map_err(|e| LabelError::ClassMap(e.to_string()))?;
        Self::new(f.classes, f.rules, f.line_buffer_px)
    }

    /// TOML unless the extension is `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabelError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    /// Index of the first rule matching the tags.
    pub fn match_rule(&self, tags: &BTreeMap<String, String>) -> Option<usize> {
        self.rules
            .iter()
            .position(|r| tags.get(&r.key).is_some_and(|v| glob_match(&r.value, v)))
    }
}

fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

/// A geometry with its key/value tags.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub tags: BTreeMap<String, String>,
    pub geometry: Geometry,
}

impl Feature {
    pub fn new(tags: &[(&str, &str)], geometry: Geometry) -> Self {
        Self {
            tags: tags.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            geometry,
        }
    }
}

/// A feature that matched a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedFeature {
    pub class_id: u8,
    pub rule: usize,
    pub geometry: Geometry,
}

/// Maps every feature through its first matching rule, dropping unmatched ones.
/// Output keeps input order.
pub fn filter_ontology(features: &[Feature], classmap: &ClassMap) -> Vec<ClassifiedFeature> {
    features
        .iter()
        .filter_map(|f| {
            classmap.match_rule(&f.tags).map(|rule| ClassifiedFeature {
                class_id: classmap.rule_class[rule],
                rule,
                geometry: f.geometry.clone(),
            })
        })
        .collect()
}

fn position(v: &Value) -> Option<Point> {
    let a = v.as_array()?;
    Some((a.first()?.as_f64()?, a.get(1)?.as_f64()?))
}

fn positions(v: &Value) -> Option<Vec<Point>> {
    v.as_array()?.iter().map(position).collect()
}

fn rings(v: &Value) -> Option<Vec<Ring>> {
    v.as_array()?.iter().map(|r| positions(r).map(open_ring)).collect()
}

fn parse_geometry(v: &Value) -> std::result::Result<Option<Geometry>, String> {
    if v.is_null() {
        return Ok(None);
    }
    let kind = v.get("type").and_then(Value::as_str).ok_or("geometry without type")?;
    let coords = v.get("coordinates").ok_or("geometry without coordinates")?;
    let bad = || format!("malformed {kind} coordinates");
    let g = match kind {
        "Point" => Geometry::Point(position(coords).ok_or_else(bad)?),
        "MultiPoint" => Geometry::MultiPoint(positions(coords).ok_or_else(bad)?),
        "LineString" => Geometry::LineString(positions(coords).ok_or_else(bad)?),
        "MultiLineString" => Geometry::MultiLineString(
            coords
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(positions)
                .collect::<Option<_>>()
                .ok_or_else(bad)?,
        ),
        "Polygon" => Geometry::Polygon(rings(coords).ok_or_else(bad)?),
        "MultiPolygon" => Geometry::MultiPolygon(
            coords
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(rings)
                .collect::<Option<_>>()
                .ok_or_else(bad)?,
        ),
        other => return Err(format!("unsupported geometry type {other}")),
    };
    Ok(Some(g))
}

fn tag_value(v: &Value) -> Option<String> {
    match v {
        Value::Null | Value::Array(_) | Value::Object(_) => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

/// Reads a GeoJSON FeatureCollection. `properties` become tags; nested and
/// null property values are ignored, numbers and booleans are stringified.
/// Features without geometry are skipped.
pub fn parse_geojson(text: &str) -> Result<Vec<Feature>> {
    let root: Value = serde_json::from_str(text).map_err(|e| LabelError::GeoJson(e.to_string()))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(LabelError::GeoJson("expected a FeatureCollection".into()));
    }
    let items = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| LabelError::GeoJson("missing features array".into()))?;
    let mut out = Vec::with_capacity(items.len());
    for (i, f) in items.iter().enumerate() {
        let geometry =
            parse_geometry(f.get("geometry").unwrap_or(&Value::Null)).map_err(|m| LabelError::GeoJson(format!("feature {i}: {m}")))?;
        let Some(geometry) = geometry else { continue };
        let tags = f
            .get("properties")
            .and_then(Value::as_object)
            .map(|m| m.iter().filter_map(|(k, v)| tag_value(v).map(|s| (k.clone(), s))).collect())
            .unwrap_or_default();
        out.push(Feature { tags, geometry });
    }
    Ok(out)
}

pub fn read_geojson(path: &Path) -> Result<Vec<Feature>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabelError::Io(format!("{}: {e}", path.display())))?;
    parse_geojson(&text)
}
