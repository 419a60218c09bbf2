use super::check_dim;
use crate::error::{Error, Result};

/// Label of the Euclidean-nearest training sample; the first index wins ties.
pub fn knn_predict<'a, S: AsRef<str>>(
    train_samples: &[Vec<f64>],
    train_labels: &'a [S],
    sample: &[f64],
) -> Result<&'a str> {
    if train_samples.is_empty() || train_samples.len() != train_labels.len() {
        return Err(Error::validation(format!(
            "need a non-empty training set with one label per sample ({} samples, {} labels)",
            train_samples.len(),
            train_labels.len()
        )));
    }
    let mut best = (f64::INFINITY, 0);
    for (i, t) in train_samples.iter().enumerate() {
        check_dim(t.len(), sample.len())?;
        let dist: f64 = t.iter().zip(sample).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist < best.0 {
            best = (dist, i);
        }
    }
    Ok(train_labels[best.1].as_ref())
}
