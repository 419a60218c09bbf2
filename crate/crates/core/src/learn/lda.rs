use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_dim, check_samples};
use crate::error::{Error, Result};

/// Weight of the scaled identity blended into the pooled covariance.
pub const DEFAULT_SHRINKAGE: f64 = 1e-4;

/// Gaussian classifier with one covariance shared by all classes.
///
/// The score of class `c` is the linear discriminant
/// `x' S⁻¹ μ_c - ½ μ_c' S⁻¹ μ_c + ln π_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    labels: Vec<String>,
    class_means: Vec<Vec<f64>>,
    priors: Vec<f64>,
    shrinkage: f64,
    // row-major, dim x dim
    pooled_covariance_inverse: Vec<f64>,
    weights: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl LdaModel {
    /// Class identifiers in sorted order; scores follow the same order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn class_means(&self) -> &[Vec<f64>] {
        &self.class_means
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn dim(&self) -> usize {
        self.class_means[0].len()
    }

    /// Inverse of the regularized pooled covariance, row-major.
    pub fn pooled_covariance_inverse(&self) -> &[f64] {
        &self.pooled_covariance_inverse
    }

    pub fn scores(&self, sample: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), sample.len())?;
        Ok(self
            .weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, b)| w.iter().zip(sample).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect())
    }

    /// Highest-scoring class; the earliest label wins ties.
    pub fn predict(&self, sample: &[f64]) -> Result<&str> {
        let scores = self.scores(sample)?;
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        Ok(&self.labels[best])
    }
}

pub fn lda_fit<S: AsRef<str>>(samples: &[Vec<f64>], labels: &[S]) -> Result<LdaModel> {
    lda_fit_with(samples, labels, DEFAULT_SHRINKAGE)
}

pub fn lda_predict(model: &LdaModel, sample: &[f64]) -> Result<String> {
    model.predict(sample).map(str::to_owned)
}

/// Fits with covariance shrinkage `(1 - γ) S + γ (tr S / d) I`.
pub fn lda_fit_with<S: AsRef<str>>(
    samples: &[Vec<f64>],
    labels: &[S],
    shrinkage: f64,
) -> Result<LdaModel> {
    let d = check_samples(samples)?;
    if samples.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::validation(format!("shrinkage must be in [0, 1], got {shrinkage}")));
    }

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.as_ref()).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(Error::validation("LDA needs at least 2 classes"));
    }
    if let Some((l, idx)) = groups.iter().find(|(_, idx)| idx.len() < 2) {
        return Err(Error::validation(format!(
            "class '{l}' has {} sample(s); LDA needs at least 2 per class",
            idx.len()
        )));
    }

    let n = samples.len();
    let mut means = Vec::with_capacity(groups.len());
    let mut scatter = DMatrix::<f64>::zeros(d, d);
    for idx in groups.values() {
        let mut mean = DVector::<f64>::zeros(d);
        for &i in idx {
            mean += DVector::from_column_slice(&samples[i]);
        }
        mean /= idx.len() as f64;
        for &i in idx {
            let diff = DVector::from_column_slice(&samples[i]) - &mean;
            scatter.ger(1.0, &diff, &diff, 1.0);
        }
        means.push(mean);
    }
    let dof = (n - groups.len()) as f64;
    let pooled = scatter / dof;
    let mut scale = pooled.trace() / d as f64;
    if scale <= 0.0 {
        scale = 1.0;
    }
    let regularized = pooled * (1.0 - shrinkage) + DMatrix::identity(d, d) * (shrinkage * scale);
    let inverse = regularized
        .cholesky()
        .ok_or_else(|| {
            Error::validation("pooled covariance is singular; increase the shrinkage")
        })?
        .inverse();

    let priors: Vec<f64> = groups.values().map(|idx| idx.len() as f64 / n as f64).collect();
    let mut weights = Vec::with_capacity(means.len());
    let mut offsets = Vec::with_capacity(means.len());
    for (mean, prior) in means.iter().zip(&priors) {
        let w = &inverse * mean;
        offsets.push(-0.5 * w.dot(mean) + prior.ln());
        weights.push(w.iter().copied().collect());
    }

    Ok(LdaModel {
        labels: groups.keys().map(|l| l.to_string()).collect(),
        class_means: means.iter().map(|m| m.iter().copied().collect()).collect(),
        priors,
        shrinkage,
        pooled_covariance_inverse: inverse.transpose().iter().copied().collect(),
        weights,
        offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn separated_clusters() {
        let s = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![5.0, 0.0], vec![5.0, 1.0]];
        let m = lda_fit(&s, &["A", "A", "B", "B"]).unwrap();
        assert_eq!(m.predict(&[1.0, 0.0]).unwrap(), "A");
        assert_eq!(m.predict(&[4.0, 1.0]).unwrap(), "B");
        assert!((m.priors().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_boundary_at_midpoint() {
        let s = vec![vec![-3.0], vec![-1.0], vec![1.0], vec![3.0]];
        let m = lda_fit(&s, &["L", "L", "R", "R"]).unwrap();
        // means -2 and 2, equal priors: scores cross at 0
        let at = m.scores(&[0.0]).unwrap();
        assert!((at[0] - at[1]).abs() < 1e-8);
        assert_eq!(m.predict(&[-1e-6]).unwrap(), "L");
        assert_eq!(m.predict(&[1e-6]).unwrap(), "R");
        // exact tie resolves to the first label
        assert_eq!(m.predict(&[0.0]).unwrap(), "L");
    }

    #[test]
    fn class_mean_predicts_its_class() {
        let s = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.5],
            vec![4.0, 4.0],
            vec![5.0, 4.5],
            vec![0.0, 6.0],
            vec![1.0, 6.5],
        ];
        let labels = ["a", "a", "b", "b", "c", "c"];
        let m = lda_fit(&s, &labels).unwrap();
        for (mean, label) in m.class_means().iter().zip(m.labels()) {
            assert_eq!(m.predict(mean).unwrap(), label);
        }
    }

    #[test]
    fn three_blobs_train_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let centers = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]];
        let mut s = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..30 {
                s.push(center.iter().map(|m| m + noise.sample(&mut rng)).collect());
                labels.push(format!("blob{c}"));
            }
        }
        let m = lda_fit(&s, &labels).unwrap();
        for (x, l) in s.iter().zip(&labels) {
            assert_eq!(m.predict(x).unwrap(), l);
        }
    }

    #[test]
    fn scaled_scores_keep_argmax() {
        let s = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![5.0, 0.0], vec![5.0, 1.0]];
        let m = lda_fit(&s, &["A", "A", "B", "B"]).unwrap();
        for x in [[1.0, 0.2], [3.9, 0.7], [2.4, 5.0]] {
            let scores = m.scores(&x).unwrap();
            let argmax = |v: &[f64]| (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
            let scaled: Vec<f64> = scores.iter().map(|s| s * 7.5).collect();
            assert_eq!(argmax(&scores), argmax(&scaled));
        }
    }

    #[test]
    fn fit_errors() {
        let s = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert!(lda_fit(&s, &["a", "a", "b"]).is_err());
        assert!(lda_fit(&s, &["a", "a", "a"]).is_err());
        assert!(lda_fit(&s, &["a", "a"]).is_err());
        let m = lda_fit(&[vec![0.0], vec![1.0], vec![5.0], vec![6.0]], &["a", "a", "b", "b"]).unwrap();
        assert!(m.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn zero_shrinkage_on_singular_data_fails() {
        // second coordinate is constant, so the pooled covariance is singular
        let s = vec![vec![0.0, 1.0], vec![1.0, 1.0], vec![4.0, 1.0], vec![5.0, 1.0]];
        let labels = ["a", "a", "b", "b"];
        assert!(lda_fit_with(&s, &labels, 0.0).is_err());
        assert!(lda_fit(&s, &labels).is_ok());
    }
}
