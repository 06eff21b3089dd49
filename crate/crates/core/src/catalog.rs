//! Image-catalog manifests and their balancing attributes.
//!
//! A manifest lists one satellite image per line, either as JSON-lines
//! (canonical) or CSV with a header row. Each record carries its center
//! coordinate, acquisition time and two flat attribute maps: numeric
//! attributes (`num`) and categorical attributes (`cat`). Keys outside those
//! are preserved verbatim in [`ImageRecord::extra`].
//!
//! ```text
//! {"id":"IMG_001","lon":12.5,"lat":-3.25,"time":"2021-06-01T10:30:00Z",
//!  "num":{"gsd_m":0.5,"obliquity_deg":12.0},"cat":{"sensor_type":"WV3"}}
//! ```
//!
//! CSV manifests use the columns `id,lon,lat,time` plus dotted attribute
//! columns such as `num.gsd_m` and `cat.sensor_type`; empty cells mean the
//! attribute is absent.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Datelike, SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::stats::quantile_sorted;

/// Valid ground sample distance range in meters.
pub const GSD_RANGE_M: (f64, f64) = (0.3, 1.2);
const GSD_KEY: &str = "gsd_m";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: duplicate id {id}")]
    DuplicateId { line: usize, id: String },
    #[error("catalog is empty")]
    Empty,
    #[error("schema: {0}")]
    Schema(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CatalogError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

fn default_true() -> bool {
    true
}

/// One declared attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default = "default_true")]
    pub required: bool,
    /// Whether the sampler balances on this attribute.
    #[serde(default = "default_true")]
    pub balance: bool,
    /// Quantile bin count for numeric attributes (sampler default applies when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
}

impl AttributeSpec {
    pub fn numeric(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: AttributeKind::Numeric,
            required: true,
            balance: true,
            bins: None,
        }
    }

    pub fn categorical(name: &str) -> Self {
        Self {
            kind: AttributeKind::Categorical,
            ..Self::numeric(name)
        }
    }

    pub fn optional(mut self) -> Self {
        self.required = false;
        self
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = Some(bins);
        self
    }
}

/// Declared attribute names, kinds and required flags, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    #[serde(default)]
    pub attributes: Vec<AttributeSpec>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeSpec>) -> Result<Self> {
        let schema = Self { attributes };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let schema: Self = toml::from_str(text).map_err(|e| CatalogError::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn get(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for a in &self.attributes {
            if a.name.is_empty() {
                return Err(CatalogError::Schema("attribute with empty name".into()));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(CatalogError::Schema(format!("attribute {} declared twice", a.name)));
            }
            if a.bins == Some(0) {
                return Err(CatalogError::Schema(format!("attribute {}: bins must be >= 1", a.name)));
            }
        }
        Ok(())
    }
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub id: String,
    pub center_lon: f64,
    pub center_lat: f64,
    pub acquisition_time: DateTime<Utc>,
    pub numeric_attrs: BTreeMap<String, f64>,
    pub categorical_attrs: BTreeMap<String, String>,
    /// Unrecognized top-level keys, kept for provenance.
    pub extra: BTreeMap<String, Value>,
}

/// Records in manifest order plus the schema they were validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub records: Vec<ImageRecord>,
    pub schema: AttributeSchema,
}

impl Catalog {
    /// Builds a catalog from records, validating each against `schema`.
    pub fn new(records: Vec<ImageRecord>, schema: AttributeSchema) -> Result<Self> {
        schema.validate()?;
        let mut ids = HashSet::new();
        let mut checked = Vec::with_capacity(records.len());
        for (i, mut rec) in records.into_iter().enumerate() {
            let line = i + 1;
            finish_record(&mut rec, &schema).map_err(|message| CatalogError::Line { line, message })?;
            if !ids.insert(rec.id.clone()) {
                return Err(CatalogError::DuplicateId { line, id: rec.id });
            }
            checked.push(rec);
        }
        Ok(Self { records: checked, schema })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Serializes as JSON-lines, one record per line with a trailing newline.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&record_to_json(rec).to_string());
            out.push('\n');
        }
        out
    }

    /// Serializes as CSV. Extra fields are written as their JSON text unless
    /// they are strings.
    pub fn to_csv(&self) -> Result<String> {
        let mut num_keys = std::collections::BTreeSet::new();
        let mut cat_keys = std::collections::BTreeSet::new();
        let mut extra_keys = std::collections::BTreeSet::new();
        for r in &self.records {
            num_keys.extend(r.numeric_attrs.keys().cloned());
            cat_keys.extend(r.categorical_attrs.keys().cloned());
            extra_keys.extend(r.extra.keys().cloned());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["id", "lon", "lat", "time"].iter().map(|s| s.to_string()).collect();
        header.extend(num_keys.iter().map(|k| format!("num.{k}")));
        header.extend(cat_keys.iter().map(|k| format!("cat.{k}")));
        header.extend(extra_keys.iter().cloned());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.id.clone(),
                r.center_lon.to_string(),
                r.center_lat.to_string(),
                format_time(&r.acquisition_time),
            ];
            row.extend(
                num_keys
                    .iter()
                    .map(|k| r.numeric_attrs.get(k).map(|v| v.to_string()).unwrap_or_default()),
            );
            row.extend(cat_keys.iter().map(|k| r.categorical_attrs.get(k).cloned().unwrap_or_default()));
            row.extend(extra_keys.iter().map(|k| match r.extra.get(k) {
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
                None => String::new(),
            }));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| CatalogError::Schema(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

/// Manifest encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifestFormat {
    JsonLines,
    Csv,
}

impl ManifestFormat {
    /// `.csv` selects CSV; everything else is read as JSON-lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::JsonLines,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a manifest file, choosing the format from its extension.
pub fn parse_manifest(path: &Path, schema: &AttributeSchema) -> Result<Catalog> {
    let text = read_to_string(path)?;
    parse_manifest_str(&text, ManifestFormat::from_path(path), schema)
}

pub fn parse_manifest_reader<R: Read>(mut reader: R, format: ManifestFormat, schema: &AttributeSchema) -> Result<Catalog> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|source| CatalogError::Io {
        path: "<reader>".into(),
        source,
    })?;
    parse_manifest_str(&text, format, schema)
}

pub fn parse_manifest_str(text: &str, format: ManifestFormat, schema: &AttributeSchema) -> Result<Catalog> {
    schema.validate()?;
    let parsed: Vec<(usize, std::result::Result<ImageRecord, String>)> = match format {
        ManifestFormat::JsonLines => {
            let lines: Vec<(usize, &str)> = text
                .lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l))
                .filter(|(_, l)| !l.trim().is_empty())
                .collect();
            lines.par_iter().map(|&(line, l)| (line, parse_json_line(l, schema))).collect()
        }
        ManifestFormat::Csv => parse_csv_rows(text, schema)?,
    };
    let mut ids = HashSet::new();
    let mut records = Vec::with_capacity(parsed.len());
    for (line, rec) in parsed {
        let rec = rec.map_err(|message| CatalogError::Line { line, message })?;
        if !ids.insert(rec.id.clone()) {
            return Err(CatalogError::DuplicateId { line, id: rec.id });
        }
        records.push(rec);
    }
    Ok(Catalog {
        records,
        schema: schema.clone(),
    })
}

fn parse_json_line(line: &str, schema: &AttributeSchema) -> std::result::Result<ImageRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("malformed JSON: {e}"))?;
    let Value::Object(mut obj) = value else {
        return Err("expected a JSON object".into());
    };
    let id = match obj.remove("id") {
        Some(Value::String(s)) => s,
        Some(_) => return Err("id must be a string".into()),
        None => return Err("missing id".into()),
    };
    let center_lon = take_f64(&mut obj, "lon")?;
    let center_lat = take_f64(&mut obj, "lat")?;
    let acquisition_time = match obj.remove("time") {
        Some(Value::String(s)) => parse_time(&s)?,
        Some(_) => return Err("time must be an ISO-8601 string".into()),
        None => return Err("missing time".into()),
    };
    let mut numeric_attrs = BTreeMap::new();
    match obj.remove("num") {
        None | Some(Value::Null) => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let x = v.as_f64().ok_or_else(|| format!("num.{k} must be a number"))?;
                numeric_attrs.insert(k, x);
            }
        }
        Some(_) => return Err("num must be an object".into()),
    }
    let mut categorical_attrs = BTreeMap::new();
    match obj.remove("cat") {
        None | Some(Value::Null) => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let s = match v {
                    Value::String(s) => s,
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    _ => return Err(format!("cat.{k} must be a string")),
                };
                categorical_attrs.insert(k, s);
            }
        }
        Some(_) => return Err("cat must be an object".into()),
    }
    let mut rec = ImageRecord {
        id,
        center_lon,
        center_lat,
        acquisition_time,
        numeric_attrs,
        categorical_attrs,
        extra: obj.into_iter().collect(),
    };
    finish_record(&mut rec, schema)?;
    Ok(rec)
}

type ParsedRows = Vec<(usize, std::result::Result<ImageRecord, String>)>;

fn parse_csv_rows(text: &str, schema: &AttributeSchema) -> Result<ParsedRows> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    for required in ["id", "lon", "lat", "time"] {
        if !headers.iter().any(|h| h == required) {
            return Err(CatalogError::Line {
                line: 1,
                message: format!("header missing column {required}"),
            });
        }
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        let parsed = (|| {
            let mut id = None;
            let mut lon = None;
            let mut lat = None;
            let mut time = None;
            let mut numeric_attrs = BTreeMap::new();
            let mut categorical_attrs = BTreeMap::new();
            let mut extra = BTreeMap::new();
            for (h, cell) in headers.iter().zip(row.iter()) {
                if cell.is_empty() {
                    continue;
                }
                match h {
                    "id" => id = Some(cell.to_string()),
                    "lon" => lon = Some(parse_f64_cell("lon", cell)?),
                    "lat" => lat = Some(parse_f64_cell("lat", cell)?),
                    "time" => time = Some(parse_time(cell)?),
                    _ => {
                        if let Some(k) = h.strip_prefix("num.") {
                            numeric_attrs.insert(k.to_string(), parse_f64_cell(h, cell)?);
                        } else if let Some(k) = h.strip_prefix("cat.") {
                            categorical_attrs.insert(k.to_string(), cell.to_string());
                        } else {
                            extra.insert(h.to_string(), Value::String(cell.to_string()));
                        }
                    }
                }
            }
            let mut rec = ImageRecord {
                id: id.ok_or("missing id")?,
                center_lon: lon.ok_or("missing lon")?,
                center_lat: lat.ok_or("missing lat")?,
                acquisition_time: time.ok_or("missing time")?,
                numeric_attrs,
                categorical_attrs,
                extra,
            };
            finish_record(&mut rec, schema)?;
            Ok::<_, String>(rec)
        })();
        out.push((line, parsed));
    }
    Ok(out)
}

fn parse_f64_cell(name: &str, cell: &str) -> std::result::Result<f64, String> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| format!("{name}: cannot parse {cell:?} as a number"))
}

fn take_f64(obj: &mut Map<String, Value>, key: &str) -> std::result::Result<f64, String> {
    match obj.remove(key) {
        Some(v) => v.as_f64().ok_or_else(|| format!("{key} must be a number")),
        None => Err(format!("missing {key}")),
    }
}

fn parse_time(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("time {s:?}: {e}"))
}

fn format_time(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Derives calendar attributes, then checks ranges and the schema contract.
fn finish_record(rec: &mut ImageRecord, schema: &AttributeSchema) -> std::result::Result<(), String> {
    if rec.id.is_empty() {
        return Err("id must be non-empty".into());
    }
    if !(-180.0..=180.0).contains(&rec.center_lon) {
        return Err(format!("lon {} outside [-180, 180]", rec.center_lon));
    }
    if !(-90.0..=90.0).contains(&rec.center_lat) {
        return Err(format!("lat {} outside [-90, 90]", rec.center_lat));
    }
    for (k, v) in &rec.numeric_attrs {
        if !v.is_finite() {
            return Err(format!("num.{k} is not finite"));
        }
    }
    if let Some(&gsd) = rec.numeric_attrs.get(GSD_KEY) {
        if !(GSD_RANGE_M.0..=GSD_RANGE_M.1).contains(&gsd) {
            return Err(format!("{GSD_KEY} {gsd} outside [{}, {}]", GSD_RANGE_M.0, GSD_RANGE_M.1));
        }
    }
    for spec in &schema.attributes {
        let name = spec.name.as_str();
        if spec.kind == AttributeKind::Categorical && !rec.categorical_attrs.contains_key(name) {
            let derived = match name {
                "month" => Some(format!("{:02}", rec.acquisition_time.month())),
                "year" => Some(rec.acquisition_time.year().to_string()),
                _ => None,
            };
            if let Some(d) = derived {
                rec.categorical_attrs.insert(name.to_string(), d);
            }
        }
        let (present, wrong_kind) = match spec.kind {
            AttributeKind::Numeric => (rec.numeric_attrs.contains_key(name), rec.categorical_attrs.contains_key(name)),
            AttributeKind::Categorical => (rec.categorical_attrs.contains_key(name), rec.numeric_attrs.contains_key(name)),
        };
        if wrong_kind && !present {
            let expected = match spec.kind {
                AttributeKind::Numeric => "numeric",
                AttributeKind::Categorical => "categorical",
            };
            return Err(format!("{name} must be {expected}"));
        }
        if spec.required && !present {
            return Err(format!("missing {name}"));
        }
    }
    Ok(())
}

fn record_to_json(rec: &ImageRecord) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), Value::String(rec.id.clone()));
    obj.insert("lon".into(), json_f64(rec.center_lon));
    obj.insert("lat".into(), json_f64(rec.center_lat));
    obj.insert("time".into(), Value::String(format_time(&rec.acquisition_time)));
    let num: Map<String, Value> = rec.numeric_attrs.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
    obj.insert("num".into(), Value::Object(num));
    let cat: Map<String, Value> = rec
        .categorical_attrs
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    obj.insert("cat".into(), Value::Object(cat));
    for (k, v) in &rec.extra {
        obj.insert(k.clone(), v.clone());
    }
    Value::Object(obj)
}

fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Per-attribute coverage statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeSummary {
    pub record_count: usize,
    pub categorical: BTreeMap<String, CategoricalSummary>,
    pub numeric: BTreeMap<String, NumericSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalSummary {
    pub counts: BTreeMap<String, usize>,
    /// Records that do not carry the attribute.
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericSummary {
    pub count: usize,
    pub missing: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `(probability, value)` pairs at 0.1, 0.25, 0.5, 0.75, 0.9.
    pub quantiles: Vec<(f64, f64)>,
}

impl NumericSummary {
    pub fn median(&self) -> f64 {
        self.quantiles
            .iter()
            .find(|(p, _)| *p == 0.5)
            .map(|(_, v)| *v)
            .expect("median is always reported")
    }
}

pub const SUMMARY_QUANTILES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Histograms for every attribute that appears in the catalog.
pub fn summarize(catalog: &Catalog) -> Result<AttributeSummary> {
    if catalog.is_empty() {
        return Err(CatalogError::Empty);
    }
    let n = catalog.len();
    let mut cat_names = std::collections::BTreeSet::new();
    let mut num_names = std::collections::BTreeSet::new();
    for r in &catalog.records {
        cat_names.extend(r.categorical_attrs.keys().cloned());
        num_names.extend(r.numeric_attrs.keys().cloned());
    }
    let mut categorical = BTreeMap::new();
    for name in cat_names {
        let mut counts = BTreeMap::new();
        let mut missing = 0;
        for r in &catalog.records {
            match r.categorical_attrs.get(&name) {
                Some(v) => *counts.entry(v.clone()).or_insert(0) += 1,
                None => missing += 1,
            }
        }
        categorical.insert(name, CategoricalSummary { counts, missing });
    }
    let mut numeric = BTreeMap::new();
    for name in num_names {
        let mut values: Vec<f64> = catalog.records.iter().filter_map(|r| r.numeric_attrs.get(&name).copied()).collect();
        values.sort_by(f64::total_cmp);
        let count = values.len();
        let quantiles = SUMMARY_QUANTILES
            .iter()
            .map(|&p| (p, quantile_sorted(&values, p).expect("attribute present on some record")))
            .collect();
        numeric.insert(
            name,
            NumericSummary {
                count,
                missing: n - count,
                min: values[0],
                max: values[count - 1],
                mean: values.iter().sum::<f64>() / count as f64,
                quantiles,
            },
        );
    }
    Ok(AttributeSummary {
        record_count: n,
        categorical,
        numeric,
    })
}

impl AttributeSummary {
    /// Long-format CSV: `attribute,kind,statistic,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("attribute,kind,statistic,value\n");
        for (name, s) in &self.categorical {
            for (k, c) in &s.counts {
                out.push_str(&format!("{},categorical,{},{}\n", csv_field(name), csv_field(k), c));
            }
            out.push_str(&format!("{},categorical,<missing>,{}\n", csv_field(name), s.missing));
        }
        for (name, s) in &self.numeric {
            let name = csv_field(name);
            out.push_str(&format!("{name},numeric,count,{}\n", s.count));
            out.push_str(&format!("{name},numeric,missing,{}\n", s.missing));
            out.push_str(&format!("{name},numeric,min,{}\n", s.min));
            for (p, v) in &s.quantiles {
                out.push_str(&format!("{name},numeric,p{},{}\n", (p * 100.0).round(), v));
            }
            out.push_str(&format!("{name},numeric,max,{}\n", s.max));
            out.push_str(&format!("{name},numeric,mean,{}\n", s.mean));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
