//! Plain-text feature files.
//!
//! ```text
//! # catex-features 1
//! # tool_version: 0.1.0
//! # alpha: 0.1
//! # iterations: 20
//! # schedule: 8:1,16:2,24:3,24:4,24:5,24:6,24:7,24:8,24:9
//! # dims: 4410
//! # tagged: false
//! path,label,v1,...,v4410
//! ```
//!
//! With `tagged: true` every row carries a sample tag after the label.
//! Values are written in shortest round-trip form, so reading a file back
//! reproduces the descriptors bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use catex_core::{CatexConfig, DescriptorLayout};

use crate::config::{format_schedule, parse_schedule};
use crate::error::{CliError, Result};

pub const FORMAT_TAG: &str = "catex-features 1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub path: String,
    pub label: String,
    pub sample_tag: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub config: CatexConfig,
    pub tool_version: String,
    pub rows: Vec<FeatureRow>,
}

impl FeatureSet {
    pub fn new(config: CatexConfig, rows: Vec<FeatureRow>) -> Self {
        FeatureSet {
            config,
            tool_version: TOOL_VERSION.to_owned(),
            rows,
        }
    }

    pub fn layout(&self) -> DescriptorLayout {
        self.config.layout()
    }

    pub fn tagged(&self) -> bool {
        self.rows.first().is_some_and(|r| r.sample_tag.is_some())
    }

    pub fn samples(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn sample_tags(&self) -> Option<Vec<&str>> {
        self.rows.iter().map(|r| r.sample_tag.as_deref()).collect()
    }

    /// Checks every row against the layout described by the header: row
    /// length, value range, and that each histogram block sums to one.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let layout = self.layout();
        let tagged = self.tagged();
        for (i, row) in self.rows.iter().enumerate() {
            let n = i + 1;
            if row.sample_tag.is_some() != tagged {
                return Err(format!("row {n}: sample tags must be on every row or none"));
            }
            if row.values.len() != layout.len() {
                return Err(format!(
                    "row {n}: {} values, layout needs {}",
                    row.values.len(),
                    layout.len()
                ));
            }
            if let Some(v) = row.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(format!("row {n}: value {v} outside [0, 1]"));
            }
            for t in 0..layout.time_steps() {
                for e in 0..layout.schedule().len() {
                    let sum: f64 = row.values[layout.block_range(t, e)].iter().sum();
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(format!(
                            "row {n}: histogram (step {t}, entry {e}) sums to {sum}"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_field(what: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.contains([',', '\n', '\r']) {
        return Err(CliError::Usage(format!(
            "{what} '{value}' cannot be stored in a feature file (empty or contains a comma or newline)"
        )));
    }
    Ok(())
}

pub fn to_string(set: &FeatureSet) -> Result<String> {
    let layout = set.layout();
    let mut out = String::new();
    let _ = writeln!(out, "# {FORMAT_TAG}");
    let _ = writeln!(out, "# tool_version: {}", set.tool_version);
    let _ = writeln!(out, "# alpha: {}", set.config.alpha());
    let _ = writeln!(out, "# iterations: {}", set.config.iterations());
    let _ = writeln!(out, "# schedule: {}", format_schedule(set.config.schedule()));
    let _ = writeln!(out, "# dims: {}", layout.len());
    let _ = writeln!(out, "# tagged: {}", set.tagged());
    for row in &set.rows {
        check_field("path", &row.path)?;
        check_field("label", &row.label)?;
        out.push_str(&row.path);
        out.push(',');
        out.push_str(&row.label);
        if let Some(tag) = &row.sample_tag {
            check_field("sample tag", tag)?;
            out.push(',');
            out.push_str(tag);
        }
        for v in &row.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write(set: &FeatureSet, path: &Path) -> Result<()> {
    let text = to_string(set)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<FeatureSet> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|message| CliError::FeatureFile {
        path: path.to_path_buf(),
        message,
    })
}

/// Parses and validates a feature file.
pub fn parse(text: &str) -> std::result::Result<FeatureSet, String> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, l)) if l.trim_start_matches('#').trim() == FORMAT_TAG => {}
        _ => return Err(format!("line 1: expected '# {FORMAT_TAG}'")),
    }
    let mut header = std::collections::HashMap::new();
    while let Some((i, line)) = lines.next_if(|(_, l)| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        let (key, value) = body
            .split_once(':')
            .ok_or_else(|| format!("line {}: malformed header '{line}'", i + 1))?;
        header.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    let get = |key: &str| {
        header
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| format!("missing header field '{key}'"))
    };
    let alpha: f64 = get("alpha")?.parse().map_err(|_| "bad alpha".to_owned())?;
    let iterations: usize = get("iterations")?
        .parse()
        .map_err(|_| "bad iterations".to_owned())?;
    let schedule = parse_schedule(get("schedule")?).map_err(|e| e.to_string())?;
    let config = CatexConfig::new(alpha, iterations, schedule).map_err(|e| e.to_string())?;
    let dims: usize = get("dims")?.parse().map_err(|_| "bad dims".to_owned())?;
    if dims != config.layout().len() {
        return Err(format!(
            "dims {dims} disagrees with the configured layout ({} values)",
            config.layout().len()
        ));
    }
    let tagged = match get("tagged")? {
        "true" => true,
        "false" => false,
        other => return Err(format!("bad tagged flag '{other}'")),
    };
    let tool_version = get("tool_version")?.to_owned();

    let lead = if tagged { 3 } else { 2 };
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != lead + dims {
            return Err(format!(
                "line {}: {} fields, expected {}",
                i + 1,
                fields.len(),
                lead + dims
            ));
        }
        let values = fields[lead..]
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        rows.push(FeatureRow {
            path: fields[0].to_owned(),
            label: fields[1].to_owned(),
            sample_tag: tagged.then(|| fields[2].to_owned()),
            values,
        });
    }
    let set = FeatureSet {
        config,
        tool_version,
        rows,
    };
    set.validate()?;
    Ok(set)
}
