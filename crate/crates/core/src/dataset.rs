//! Labeled image listings, train/test split protocols and a synthetic
//! texture generator.
//!
//! Manifests are UTF-8 text, one entry per line:
//! `path<TAB>label[<TAB>sample_tag]`. Blank lines and lines starting with `#`
//! are ignored. Relative paths are resolved against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const DEFAULT_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
    pub sample_tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Validates label count, tag consistency and path uniqueness.
    pub fn new(name: impl Into<String>, entries: Vec<ManifestEntry>) -> Result<Self> {
        let labels: BTreeSet<&str> = entries.iter().map(|e| e.label.as_str()).collect();
        if labels.len() < 2 {
            return Err(Error::validation(format!(
                "a manifest needs at least 2 distinct labels, found {}",
                labels.len()
            )));
        }
        let tagged = entries.iter().filter(|e| e.sample_tag.is_some()).count();
        if tagged != 0 && tagged != entries.len() {
            return Err(Error::validation(
                "sample tags must be given on every entry or on none",
            ));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = entries.iter().find(|e| !seen.insert(&e.path)) {
            return Err(Error::validation(format!(
                "duplicate path {}",
                dup.path.display()
            )));
        }
        Ok(DatasetManifest {
            name: name.into(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    /// Per-entry sample tags, or `None` when the manifest is untagged.
    pub fn sample_tags(&self) -> Option<Vec<&str>> {
        self.entries
            .iter()
            .map(|e| e.sample_tag.as_deref())
            .collect()
    }

    /// Distinct labels in sorted order.
    pub fn classes(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.entries.iter().map(|e| e.label.as_str()).collect();
        set.into_iter().collect()
    }
}

/// Reads and validates a manifest; every listed file must exist.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let (file, label, tag) = match fields[..] {
            [f, l] => (f, l, None),
            [f, l, t] => (f, l, Some(t)),
            [_] => return Err(parse_err(lineno, "expected path<TAB>label[<TAB>sample_tag]".into())),
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("unknown field: {} fields given, at most 3 allowed", fields.len()),
                ))
            }
        };
        if file.is_empty() || label.is_empty() || tag.is_some_and(str::is_empty) {
            return Err(parse_err(lineno, "empty field".into()));
        }
        let resolved = base.join(file);
        if !resolved.exists() {
            return Err(parse_err(
                lineno,
                format!("image {} does not exist", resolved.display()),
            ));
        }
        if !seen.insert(resolved.clone()) {
            return Err(parse_err(lineno, format!("duplicate path {file}")));
        }
        entries.push(ManifestEntry {
            path: resolved,
            label: label.to_owned(),
            sample_tag: tag.map(str::to_owned),
        });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    DatasetManifest::new(name, entries).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes a manifest, storing paths relative to its directory when possible.
pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut out = format!("# {}\n", manifest.name);
    for e in &manifest.entries {
        let p = e.path.strip_prefix(base).unwrap_or(&e.path);
        out.push_str(&p.to_string_lossy());
        out.push('\t');
        out.push_str(&e.label);
        if let Some(t) = &e.sample_tag {
            out.push('\t');
            out.push_str(t);
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Per class, half of the entries train and the rest test.
    RandomHalf,
    /// Train on the entries of one sample tag, test on all others.
    SampleHoldout,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-half" => Ok(Protocol::RandomHalf),
            "sample-holdout" => Ok(Protocol::SampleHoldout),
            other => Err(Error::validation(format!(
                "unknown protocol '{other}' (expected random-half or sample-holdout)"
            ))),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::RandomHalf => "random-half",
            Protocol::SampleHoldout => "sample-holdout",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub protocol: Protocol,
    pub rounds: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn random_half(seed: u64) -> Self {
        SplitSpec {
            protocol: Protocol::RandomHalf,
            rounds: DEFAULT_ROUNDS,
            seed,
        }
    }

    pub fn sample_holdout(rounds: usize) -> Self {
        SplitSpec {
            protocol: Protocol::SampleHoldout,
            rounds,
            seed: 0,
        }
    }
}

/// Disjoint, covering index sets of one round, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn make_splits(manifest: &DatasetManifest, spec: &SplitSpec) -> Result<Vec<Split>> {
    split_indices(&manifest.labels(), manifest.sample_tags().as_deref(), spec)
}

/// Splits for entries described by their labels and optional sample tags.
///
/// Random-half: in round `k` each class (in label order) is shuffled by a
/// generator seeded with `seed` on stream `k`, and its first `⌈n/2⌉` members
/// train. Sample-holdout: round `k` trains on the `k`-th tag in sorted order.
pub fn split_indices<L: AsRef<str>, T: AsRef<str>>(
    labels: &[L],
    tags: Option<&[T]>,
    spec: &SplitSpec,
) -> Result<Vec<Split>> {
    if spec.rounds == 0 {
        return Err(Error::validation("at least one round is required"));
    }
    match spec.protocol {
        Protocol::RandomHalf => random_half(labels, spec),
        Protocol::SampleHoldout => {
            let tags = tags.ok_or_else(|| {
                Error::validation("sample-holdout splits need a sample tag on every entry")
            })?;
            if tags.len() != labels.len() {
                return Err(Error::validation("one sample tag per entry is required"));
            }
            sample_holdout(tags, spec.rounds)
        }
    }
}

fn random_half<L: AsRef<str>>(labels: &[L], spec: &SplitSpec) -> Result<Vec<Split>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    if let Some((l, idx)) = groups.iter().find(|(_, idx)| idx.len() < 2) {
        return Err(Error::validation(format!(
            "class '{l}' has {} entry; random-half needs at least 2 per class",
            idx.len()
        )));
    }
    let mut splits = Vec::with_capacity(spec.rounds);
    for round in 0..spec.rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(round as u64);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for idx in groups.values() {
            let mut shuffled = idx.clone();
            shuffled.shuffle(&mut rng);
            let cut = shuffled.len().div_ceil(2);
            train.extend_from_slice(&shuffled[..cut]);
            test.extend_from_slice(&shuffled[cut..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        splits.push(Split { train, test });
    }
    Ok(splits)
}

fn sample_holdout<T: AsRef<str>>(tags: &[T], rounds: usize) -> Result<Vec<Split>> {
    let distinct: BTreeSet<&str> = tags.iter().map(AsRef::as_ref).collect();
    if distinct.len() < 2 {
        return Err(Error::validation(
            "sample-holdout needs at least 2 distinct sample tags",
        ));
    }
    if rounds > distinct.len() {
        return Err(Error::validation(format!(
            "{rounds} rounds requested but only {} sample tags exist",
            distinct.len()
        )));
    }
    Ok(distinct
        .iter()
        .take(rounds)
        .map(|&held| {
            let (train, test) = (0..tags.len()).partition(|&i| tags[i].as_ref() == held);
            Split { train, test }
        })
        .collect())
}

/// Parameters of the synthetic grating textures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    /// Peak deviation of the grating from mid-gray.
    pub amplitude: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            noise: 0.1,
            amplitude: 0.35,
        }
    }
}

/// Orientation (radians) and period (pixels) of class `class`.
///
/// Orientations are spread over a half turn and periods grow with the class
/// index, so neighboring classes differ in both.
pub fn grating_parameters(class: usize, classes: usize) -> (f64, f64) {
    let theta = std::f64::consts::PI * class as f64 / classes as f64;
    let period = 4.0 + 3.0 * class as f64;
    (theta, period)
}

/// One `size x size` grating of class `class`, with noise drawn from `rng`.
pub fn synth_image(
    class: usize,
    classes: usize,
    size: usize,
    params: &SynthParams,
    rng: &mut ChaCha8Rng,
) -> Result<GrayImage> {
    let (theta, period) = grating_parameters(class, classes);
    let (c, s) = (theta.cos(), theta.sin());
    let noise = if params.noise > 0.0 {
        Some(Normal::new(0.0, params.noise).map_err(|e| Error::validation(e.to_string()))?)
    } else {
        None
    };
    GrayImage::from_fn(size, size, |x, y| {
        let u = x as f64 * c + y as f64 * s;
        let mut v = 0.5 + params.amplitude * (2.0 * std::f64::consts::PI * u / period).sin();
        if let Some(n) = &noise {
            v += n.sample(rng);
        }
        v.clamp(0.0, 1.0)
    })
}

pub fn generate_synthetic(
    classes: usize,
    per_class: usize,
    size: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    generate_synthetic_with(classes, per_class, size, seed, &SynthParams::default(), out_dir)
}

/// Writes `classes * per_class` 8-bit PNG gratings plus `manifest.tsv` into
/// `out_dir`. Image `i` of class `c` draws its noise from stream
/// `c * per_class + i` of a generator seeded with `seed`.
pub fn generate_synthetic_with(
    classes: usize,
    per_class: usize,
    size: usize,
    seed: u64,
    params: &SynthParams,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    if classes < 2 {
        return Err(Error::validation(format!("need at least 2 classes, got {classes}")));
    }
    if per_class == 0 || size == 0 {
        return Err(Error::validation("per-class count and size must be positive"));
    }
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut entries = Vec::with_capacity(classes * per_class);
    for class in 0..classes {
        let label = format!("grating{class}");
        for i in 0..per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((class * per_class + i) as u64);
            let img = synth_image(class, classes, size, params, &mut rng)?;
            let path = out_dir.join(format!("{label}_{i:03}.png"));
            save_png(&img, &path)?;
            entries.push(ManifestEntry {
                path,
                label: label.clone(),
                sample_tag: None,
            });
        }
    }
    let manifest = DatasetManifest::new("synthetic", entries)?;
    write_manifest(&manifest, out_dir.join("manifest.tsv"))?;
    Ok(manifest)
}

/// Stores an image as 8-bit grayscale PNG.
pub fn save_png(image: &GrayImage, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = image
        .data()
        .iter()
        .map(|v| (v * 255.0).round() as u8)
        .collect();
    let buf = image::GrayImage::from_raw(image.width() as u32, image.height() as u32, bytes)
        .expect("buffer matches dimensions");
    buf.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}
