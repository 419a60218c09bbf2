use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_samples, knn_predict, lda_fit, pca_fit, LdaModel, PcaModel};
use crate::error::{Error, Result};

/// Default candidate numbers of principal components.
pub const DEFAULT_PCA_GRID: [usize; 7] = [10, 20, 40, 80, 120, 160, 200];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Lda,
    Knn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedClassifier {
    Lda(LdaModel),
    Knn {
        samples: Vec<Vec<f64>>,
        labels: Vec<String>,
    },
}

/// PCA projection followed by a classifier fitted in the projected space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub pca: PcaModel,
    pub classifier: FittedClassifier,
}

impl Pipeline {
    pub fn fit<S: AsRef<str>>(
        samples: &[Vec<f64>],
        labels: &[S],
        k: usize,
        classifier: Classifier,
    ) -> Result<Self> {
        let pca = pca_fit(samples, k)?;
        let projected = samples
            .iter()
            .map(|s| pca.transform(s))
            .collect::<Result<Vec<_>>>()?;
        let classifier = match classifier {
            Classifier::Lda => FittedClassifier::Lda(lda_fit(&projected, labels)?),
            Classifier::Knn => FittedClassifier::Knn {
                samples: projected,
                labels: labels.iter().map(|l| l.as_ref().to_owned()).collect(),
            },
        };
        Ok(Pipeline { pca, classifier })
    }

    pub fn predict(&self, sample: &[f64]) -> Result<&str> {
        let p = self.pca.transform(sample)?;
        match &self.classifier {
            FittedClassifier::Lda(m) => m.predict(&p),
            FittedClassifier::Knn { samples, labels } => knn_predict(samples, labels, &p),
        }
    }
}

/// Stratified fold id for every sample.
///
/// Within each class (in label order) the members are shuffled with a
/// generator seeded by `seed` and dealt round-robin; the dealing position
/// carries over between classes so fold sizes stay balanced.
pub fn stratified_folds<S: AsRef<str>>(labels: &[S], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::validation(format!("need at least 2 folds, got {folds}")));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    if let Some((l, idx)) = groups.iter().find(|(_, idx)| idx.len() < folds) {
        return Err(Error::validation(format!(
            "class '{l}' has {} samples, fewer than {folds} folds",
            idx.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for idx in groups.values_mut() {
        idx.shuffle(&mut rng);
        for &i in idx.iter() {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Picks the number of principal components for a PCA + LDA pipeline by
/// stratified cross-validation on the given (training) samples only.
pub fn select_components<S: AsRef<str>>(
    samples: &[Vec<f64>],
    labels: &[S],
    candidate_ks: &[usize],
    folds: usize,
    seed: u64,
) -> Result<usize> {
    select_components_with(Classifier::Lda, samples, labels, candidate_ks, folds, seed)
}

/// As [`select_components`], for any pipeline classifier. Candidates that
/// cannot be fitted on some fold are skipped; ties go to the smaller `k`.
pub fn select_components_with<S: AsRef<str>>(
    classifier: Classifier,
    samples: &[Vec<f64>],
    labels: &[S],
    candidate_ks: &[usize],
    folds: usize,
    seed: u64,
) -> Result<usize> {
    let dim = check_samples(samples)?;
    if samples.len() != labels.len() {
        return Err(Error::validation("one label per sample is required"));
    }
    let mut candidates: Vec<usize> = candidate_ks.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    if let [only] = candidates[..] {
        return Ok(only);
    }
    let assignment = stratified_folds(labels, folds, seed)?;

    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| (0..samples.len()).partition(|&i| assignment[i] != f))
        .collect();
    let smallest_train = splits.iter().map(|(t, _)| t.len()).min().unwrap_or(0);

    let mut best: Option<(usize, f64)> = None;
    'candidates: for &k in &candidates {
        if k == 0 || k > dim || k + 1 > smallest_train {
            continue;
        }
        let mut total = 0.0;
        for (train, valid) in &splits {
            let xs: Vec<Vec<f64>> = train.iter().map(|&i| samples[i].clone()).collect();
            let ys: Vec<&str> = train.iter().map(|&i| labels[i].as_ref()).collect();
            let pipeline = match Pipeline::fit(&xs, &ys, k, classifier) {
                Ok(p) => p,
                Err(Error::Validation(_)) => continue 'candidates,
                Err(e) => return Err(e),
            };
            let mut correct = 0;
            for &i in valid {
                if pipeline.predict(&samples[i])? == labels[i].as_ref() {
                    correct += 1;
                }
            }
            total += correct as f64 / valid.len() as f64;
        }
        let mean = total / folds as f64;
        if best.is_none_or(|(_, acc)| mean > acc) {
            best = Some((k, mean));
        }
    }
    best.map(|(k, _)| k).ok_or_else(|| {
        Error::validation(format!(
            "none of the candidate component counts {candidates:?} is feasible \
             with {folds} folds of {} samples",
            samples.len()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<String> = (0..30).map(|i| format!("c{}", i % 3)).collect();
        let a = stratified_folds(&labels, 5, 11).unwrap();
        assert_eq!(a, stratified_folds(&labels, 5, 11).unwrap());
        assert_ne!(a, stratified_folds(&labels, 5, 12).unwrap());
        for f in 0..5 {
            for c in 0..3 {
                let n = (0..30).filter(|&i| a[i] == f && i % 3 == c).count();
                assert_eq!(n, 2);
            }
        }
        assert!(stratified_folds(&labels, 1, 0).is_err());
        assert!(stratified_folds(&labels, 11, 0).is_err());
    }

    #[test]
    fn single_candidate_is_returned() {
        let s = vec![vec![0.0], vec![1.0]];
        assert_eq!(select_components(&s, &["a", "b"], &[7], 5, 0).unwrap(), 7);
    }

    #[test]
    fn infeasible_grid_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<Vec<f64>> = (0..12).map(|_| (0..30).map(|_| rng.random()).collect()).collect();
        let labels: Vec<&str> = (0..12).map(|i| if i < 6 { "a" } else { "b" }).collect();
        assert!(select_components(&s, &labels, &[50, 100], 3, 0).is_err());
        assert!(select_components(&s, &labels, &[2, 100], 3, 0).is_ok());
    }
}
