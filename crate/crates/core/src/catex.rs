//! The texture automaton: each cell's state is blended with its normalized
//! riu2 code, and the code histograms at every time step form the descriptor.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{pad_symmetric, GrayImage};
use crate::lbp::{histogram, lbp_map, normalize_map, Histogram, LbpConfig};

pub const DEFAULT_ALPHA: f64 = 0.10;
pub const DEFAULT_ITERATIONS: usize = 20;

/// The nine `(P, R)` neighborhoods used by default.
pub const DEFAULT_SCHEDULE: [(usize, f64); 9] = [
    (8, 1.0),
    (16, 2.0),
    (24, 3.0),
    (24, 4.0),
    (24, 5.0),
    (24, 6.0),
    (24, 7.0),
    (24, 8.0),
    (24, 9.0),
];

pub fn default_schedule() -> Vec<LbpConfig> {
    DEFAULT_SCHEDULE
        .iter()
        .map(|&(p, r)| LbpConfig::new(p, r).expect("default schedule is valid"))
        .collect()
}

/// Hyperparameters of one extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatexConfig {
    alpha: f64,
    iterations: usize,
    schedule: Vec<LbpConfig>,
}

impl CatexConfig {
    pub fn new(alpha: f64, iterations: usize, schedule: Vec<LbpConfig>) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::validation(format!("alpha must be in [0, 1], got {alpha}")));
        }
        if schedule.is_empty() {
            return Err(Error::validation("schedule must contain at least one (P, R) pair"));
        }
        Ok(CatexConfig {
            alpha,
            iterations,
            schedule,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn schedule(&self) -> &[LbpConfig] {
        &self.schedule
    }

    /// Smallest image side that every schedule entry can handle.
    pub fn min_image_size(&self) -> usize {
        2 * self.schedule.iter().map(LbpConfig::pad).max().unwrap_or(0) + 1
    }

    pub fn layout(&self) -> DescriptorLayout {
        DescriptorLayout::new(self.iterations, self.schedule.clone())
    }
}

impl Default for CatexConfig {
    fn default() -> Self {
        CatexConfig {
            alpha: DEFAULT_ALPHA,
            iterations: DEFAULT_ITERATIONS,
            schedule: default_schedule(),
        }
    }
}

/// Coordinates of one descriptor entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    /// 0 is the plain LBP histogram of the input image.
    pub iteration: usize,
    pub schedule_index: usize,
    pub bin: usize,
}

/// Iteration-major, then schedule order, then bin index.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorLayout {
    iterations: usize,
    schedule: Vec<LbpConfig>,
    // start of each schedule entry's block inside one iteration
    entry_offsets: Vec<usize>,
    block_len: usize,
}

impl DescriptorLayout {
    pub fn new(iterations: usize, schedule: Vec<LbpConfig>) -> Self {
        let mut entry_offsets = Vec::with_capacity(schedule.len());
        let mut acc = 0;
        for c in &schedule {
            entry_offsets.push(acc);
            acc += c.bins();
        }
        DescriptorLayout {
            iterations,
            schedule,
            entry_offsets,
            block_len: acc,
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn schedule(&self) -> &[LbpConfig] {
        &self.schedule
    }

    /// Number of histogram blocks per schedule entry (`iterations + 1`).
    pub fn time_steps(&self) -> usize {
        self.iterations + 1
    }

    /// Values contributed by one time step.
    pub fn step_len(&self) -> usize {
        self.block_len
    }

    pub fn len(&self) -> usize {
        self.time_steps() * self.block_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All histograms of one time step.
    pub fn step_range(&self, iteration: usize) -> Range<usize> {
        let start = iteration * self.block_len;
        start..start + self.block_len
    }

    /// The histogram of one schedule entry at one time step.
    pub fn block_range(&self, iteration: usize, schedule_index: usize) -> Range<usize> {
        let start = iteration * self.block_len + self.entry_offsets[schedule_index];
        start..start + self.schedule[schedule_index].bins()
    }

    pub fn position(&self, index: usize) -> Option<Position> {
        if index >= self.len() {
            return None;
        }
        let iteration = index / self.block_len;
        let within = index % self.block_len;
        let schedule_index = self.entry_offsets.partition_point(|&o| o <= within) - 1;
        Some(Position {
            iteration,
            schedule_index,
            bin: within - self.entry_offsets[schedule_index],
        })
    }
}

/// Concatenated code histograms with their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector {
    values: Vec<f64>,
    layout: DescriptorLayout,
}

impl DescriptorVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn layout(&self) -> &DescriptorLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, iteration: usize, schedule_index: usize) -> &[f64] {
        &self.values[self.layout.block_range(iteration, schedule_index)]
    }

    pub fn step(&self, iteration: usize) -> &[f64] {
        &self.values[self.layout.step_range(iteration)]
    }
}

/// One automaton step: `(1 - alpha) * state + alpha * codes`, per cell.
pub fn transition(state: &GrayImage, lbp_normalized: &GrayImage, alpha: f64) -> Result<GrayImage> {
    if state.dimensions() != lbp_normalized.dimensions() {
        return Err(Error::validation(format!(
            "state is {:?} but code map is {:?}",
            state.dimensions(),
            lbp_normalized.dimensions()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::validation(format!("alpha must be in [0, 1], got {alpha}")));
    }
    Ok(blend(state, lbp_normalized, alpha))
}

fn blend(state: &GrayImage, codes: &GrayImage, alpha: f64) -> GrayImage {
    let keep = 1.0 - alpha;
    let data = state
        .data()
        .iter()
        .zip(codes.data())
        .map(|(&s, &l)| (keep * s + alpha * l).min(1.0))
        .collect();
    GrayImage::from_raw(state.width(), state.height(), data)
}

fn code_map(image: &GrayImage, config: LbpConfig) -> Result<crate::lbp::LbpMap> {
    lbp_map(&pad_symmetric(image, config.pad())?, config)
}

/// Per-neighborhood state grids of the automaton at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaState {
    stacks: Vec<GrayImage>,
    time: usize,
}

impl CaState {
    pub fn stacks(&self) -> &[GrayImage] {
        &self.stacks
    }

    pub fn time(&self) -> usize {
        self.time
    }
}

/// Runs the automaton one time step at a time.
///
/// Each schedule entry owns an independent state grid. Creation computes the
/// histograms of the input image (time step 0) and seeds every grid with
/// `(1 - alpha) * image + alpha * codes`; each [`Automaton::step`] then
/// histograms the current grids before blending them with their own codes.
#[derive(Debug, Clone)]
pub struct Automaton {
    config: CatexConfig,
    state: CaState,
}

impl Automaton {
    /// Returns the automaton together with the time-step-0 histograms.
    pub fn start(image: &GrayImage, config: &CatexConfig) -> Result<(Self, Vec<Histogram>)> {
        let min = config.min_image_size();
        if image.width() < min || image.height() < min {
            return Err(Error::validation(format!(
                "image is {}x{} but the schedule needs at least {min}x{min}",
                image.width(),
                image.height()
            )));
        }
        let mut hists = Vec::with_capacity(config.schedule.len());
        let mut stacks = Vec::with_capacity(config.schedule.len());
        for &entry in &config.schedule {
            let map = code_map(image, entry)?;
            hists.push(histogram(&map));
            stacks.push(blend(image, &normalize_map(&map), config.alpha));
        }
        let automaton = Automaton {
            config: config.clone(),
            state: CaState { stacks, time: 0 },
        };
        Ok((automaton, hists))
    }

    /// Histograms the current grids, then advances them by one step.
    pub fn step(&mut self) -> Result<Vec<Histogram>> {
        let mut hists = Vec::with_capacity(self.config.schedule.len());
        for (stack, &entry) in self.state.stacks.iter_mut().zip(&self.config.schedule) {
            let map = code_map(stack, entry)?;
            hists.push(histogram(&map));
            *stack = blend(stack, &normalize_map(&map), self.config.alpha);
        }
        self.state.time += 1;
        Ok(hists)
    }

    pub fn state(&self) -> &CaState {
        &self.state
    }

    pub fn config(&self) -> &CatexConfig {
        &self.config
    }
}

/// Full descriptor of one image.
pub fn extract(image: &GrayImage, config: &CatexConfig) -> Result<DescriptorVector> {
    let layout = config.layout();
    let mut values = Vec::with_capacity(layout.len());
    let (mut automaton, first) = Automaton::start(image, config)?;
    values.extend(first.iter().flat_map(|h| h.bins().iter().copied()));
    for _ in 0..config.iterations {
        let hists = automaton.step()?;
        values.extend(hists.iter().flat_map(|h| h.bins().iter().copied()));
    }
    debug_assert_eq!(values.len(), layout.len());
    Ok(DescriptorVector { values, layout })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let v = ((x * 7 + y * 13) % 17) as f64 / 16.0;
            0.5 * v + 0.25 * ((x as f64 * 0.7).sin() + 1.0) * 0.5
        })
        .unwrap()
    }

    #[test]
    fn default_layout_has_4410_values() {
        let layout = CatexConfig::default().layout();
        assert_eq!(layout.step_len(), 210);
        assert_eq!(layout.len(), 4410);
        assert_eq!(CatexConfig::default().min_image_size(), 19);
    }

    #[test]
    fn layout_positions() {
        let layout = CatexConfig::default().layout();
        assert_eq!(
            layout.position(0),
            Some(Position { iteration: 0, schedule_index: 0, bin: 0 })
        );
        assert_eq!(
            layout.position(10),
            Some(Position { iteration: 0, schedule_index: 1, bin: 0 })
        );
        assert_eq!(
            layout.position(210 + 28 + 25),
            Some(Position { iteration: 1, schedule_index: 2, bin: 25 })
        );
        assert_eq!(layout.position(4410), None);
        assert_eq!(layout.block_range(20, 8), 4384..4410);
    }

    #[test]
    fn config_contract() {
        let s = default_schedule();
        assert!(CatexConfig::new(-0.1, 20, s.clone()).is_err());
        assert!(CatexConfig::new(1.1, 20, s.clone()).is_err());
        assert!(CatexConfig::new(0.5, 0, vec![]).is_err());
        assert!(CatexConfig::new(1.0, 0, s).is_ok());
    }

    #[test]
    fn transition_examples() {
        let s = GrayImage::constant(2, 2, 0.5).unwrap();
        let l = GrayImage::constant(2, 2, 0.2).unwrap();
        assert_eq!(transition(&s, &l, 0.0).unwrap(), s);
        assert_eq!(transition(&s, &l, 1.0).unwrap(), l);
        let out = transition(&s, &l, 0.10).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.47).abs() < 1e-12));

        let other = GrayImage::constant(3, 2, 0.2).unwrap();
        assert!(transition(&s, &other, 0.1).is_err());
    }

    #[test]
    fn too_small_image_is_rejected() {
        let img = GrayImage::constant(18, 40, 0.5).unwrap();
        assert!(matches!(
            extract(&img, &CatexConfig::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn first_step_is_plain_lbp() {
        let img = textured(24, 21);
        let config = CatexConfig::default();
        let d = extract(&img, &config).unwrap();
        for (i, &entry) in config.schedule().iter().enumerate() {
            let map = lbp_map(&pad_symmetric(&img, entry.pad()).unwrap(), entry).unwrap();
            assert_eq!(d.block(0, i), histogram(&map).bins());
        }
    }

    #[test]
    fn states_stay_bounded() {
        let img = textured(20, 20);
        let config = CatexConfig::new(0.35, 6, default_schedule()).unwrap();
        let (mut ca, _) = Automaton::start(&img, &config).unwrap();
        for t in 1..=6 {
            ca.step().unwrap();
            assert_eq!(ca.state().time(), t);
            for s in ca.state().stacks() {
                assert_eq!(s.dimensions(), (20, 20));
                assert!(s.data().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn schedule_permutation_permutes_blocks() {
        let img = textured(21, 21);
        let s = default_schedule();
        let forward = CatexConfig::new(0.2, 3, vec![s[0], s[2], s[8]]).unwrap();
        let reversed = CatexConfig::new(0.2, 3, vec![s[8], s[0], s[2]]).unwrap();
        let a = extract(&img, &forward).unwrap();
        let b = extract(&img, &reversed).unwrap();
        for t in 0..=3 {
            assert_eq!(a.block(t, 0), b.block(t, 1));
            assert_eq!(a.block(t, 1), b.block(t, 2));
            assert_eq!(a.block(t, 2), b.block(t, 0));
        }
    }
}
