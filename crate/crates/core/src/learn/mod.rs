//! Dimensionality reduction, classifiers and evaluation metrics.

mod knn;
mod lda;
mod metrics;
mod pca;
mod select;

pub use knn::knn_predict;
pub use lda::{lda_fit, lda_fit_with, lda_predict, LdaModel, DEFAULT_SHRINKAGE};
pub use metrics::{evaluate, ConfusionMatrix};
pub use pca::{pca_fit, pca_transform, PcaModel};
pub use select::{
    select_components, select_components_with, stratified_folds, Classifier, FittedClassifier,
    Pipeline, DEFAULT_PCA_GRID,
};

use crate::error::{Error, Result};

/// Checks that `samples` is non-empty and rectangular, returning the dimension.
pub(crate) fn check_samples(samples: &[Vec<f64>]) -> Result<usize> {
    let dim = samples
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::validation("no samples"))?;
    if dim == 0 {
        return Err(Error::validation("samples have zero dimension"));
    }
    if let Some((i, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != dim) {
        return Err(Error::validation(format!(
            "sample {i} has dimension {} but sample 0 has {dim}",
            s.len()
        )));
    }
    Ok(dim)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::validation(format!(
            "expected a {expected}-dimensional sample, got {got}"
        )));
    }
    Ok(())
}
