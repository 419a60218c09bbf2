use catex_core::catex::{DEFAULT_ALPHA, DEFAULT_ITERATIONS};
use catex_core::learn::{Classifier, DEFAULT_PCA_GRID};
use catex_core::{default_schedule, CatexConfig, LbpConfig};

use crate::error::{CliError, Result};

pub const DEFAULT_FOLDS: usize = 5;

/// Every knob of a reproducible run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub iterations: usize,
    pub schedule: Vec<LbpConfig>,
    pub pca_candidates: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub classifier: Classifier,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: DEFAULT_ALPHA,
            iterations: DEFAULT_ITERATIONS,
            schedule: default_schedule(),
            pca_candidates: DEFAULT_PCA_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
            seed: 0,
            classifier: Classifier::Lda,
        }
    }
}

impl RunConfig {
    pub fn catex(&self) -> Result<CatexConfig> {
        Ok(CatexConfig::new(self.alpha, self.iterations, self.schedule.clone())?)
    }
}

/// Parses `p:r` pairs separated by commas, e.g. `8:1,16:2,24:3`.
pub fn parse_schedule(text: &str) -> Result<Vec<LbpConfig>> {
    text.split(',')
        .map(|pair| {
            let (p, r) = pair.trim().split_once(':').ok_or_else(|| {
                CliError::Usage(format!("schedule entry '{pair}' is not of the form p:r"))
            })?;
            let p: usize = p
                .parse()
                .map_err(|_| CliError::Usage(format!("bad neighbor count '{p}' in schedule")))?;
            let r: f64 = r
                .parse()
                .map_err(|_| CliError::Usage(format!("bad radius '{r}' in schedule")))?;
            Ok(LbpConfig::new(p, r)?)
        })
        .collect()
}

pub fn format_schedule(schedule: &[LbpConfig]) -> String {
    schedule
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a comma-separated list of positive component counts.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let grid = text
        .split(',')
        .map(|v| match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(CliError::Usage(format!("bad PCA grid value '{v}'"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(grid)
}

pub fn parse_classifier(text: &str) -> Result<Classifier> {
    match text {
        "lda" => Ok(Classifier::Lda),
        "knn" => Ok(Classifier::Knn),
        other => Err(CliError::Usage(format!("unknown classifier '{other}' (lda or knn)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_round_trip() {
        let s = parse_schedule("8:1,16:2,24:3").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(format_schedule(&s), "8:1,16:2,24:3");
        assert_eq!(format_schedule(&default_schedule()), "8:1,16:2,24:3,24:4,24:5,24:6,24:7,24:8,24:9");
        assert_eq!(parse_schedule("12:2.5").unwrap()[0].r(), 2.5);
    }

    #[test]
    fn bad_schedules() {
        assert!(matches!(parse_schedule("8-1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_schedule("x:1"), Err(CliError::Usage(_))));
        assert!(matches!(parse_schedule("2:1"), Err(CliError::Core(_))));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("10, 20,40").unwrap(), vec![10, 20, 40]);
        assert!(parse_grid("10,0").is_err());
        assert!(parse_grid("ten").is_err());
    }

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.catex().unwrap(), CatexConfig::default());
        assert_eq!(c.folds, 5);
        assert_eq!(parse_classifier("knn").unwrap(), Classifier::Knn);
        assert!(parse_classifier("svm").is_err());
    }
}
