use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{check_dim, check_samples};
use crate::error::{Error, Result};

/// Fitted principal-component projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    explained_variance: Vec<f64>,
    total_variance: f64,
    degenerate: bool,
}

impl PcaModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Orthonormal directions, largest variance first.
    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Fraction of the total sample variance captured by each component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        if self.total_variance == 0.0 {
            return vec![0.0; self.explained_variance.len()];
        }
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// True when the training samples were all identical.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn transform(&self, sample: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), sample.len())?;
        let centered: Vec<f64> = sample.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(&centered).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Maps projected coordinates back into the input space.
    pub fn inverse_transform(&self, coords: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.k(), coords.len())?;
        let mut out = self.mean.clone();
        for (c, &w) in self.components.iter().zip(coords) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

pub fn pca_transform(model: &PcaModel, sample: &[f64]) -> Result<Vec<f64>> {
    model.transform(sample)
}

/// Fits the top-`k` principal components of `samples`.
///
/// The eigenproblem is solved on whichever is smaller: the `d x d` covariance
/// or the `n x n` Gram matrix of the centered samples. Each component is
/// flipped so that its largest-magnitude entry is positive.
pub fn pca_fit(samples: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let d = check_samples(samples)?;
    let n = samples.len();
    if n < 2 {
        return Err(Error::validation("PCA needs at least 2 samples"));
    }
    let max_k = (n - 1).min(d);
    if k == 0 || k > max_k {
        return Err(Error::validation(format!(
            "number of components must be in 1..={max_k} for {n} samples of dimension {d}, got {k}"
        )));
    }

    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| samples[i][j] - mean[j]);
    let denom = (n - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;

    let (mut components, mut variances) = if d <= n {
        let cov = centered.tr_mul(&centered) / denom;
        let (values, vectors) = sorted_eigen(cov);
        let comps = (0..k)
            .map(|i| vectors.column(i).iter().copied().collect::<Vec<_>>())
            .collect();
        (comps, values[..k].to_vec())
    } else {
        let gram = &centered * centered.transpose();
        let (values, vectors) = sorted_eigen(gram);
        let tol = values[0].max(0.0) * n as f64 * f64::EPSILON * 16.0;
        let mut comps = Vec::with_capacity(k);
        let mut vars = Vec::with_capacity(k);
        for (i, &value) in values.iter().take(k).enumerate() {
            if value <= tol {
                break;
            }
            let v: DVector<f64> = centered.tr_mul(&vectors.column(i)) / value.sqrt();
            comps.push(v.iter().copied().collect::<Vec<_>>());
            vars.push(value / denom);
        }
        (comps, vars)
    };

    orthonormalize(&mut components);
    complete_basis(&mut components, d, k);
    variances.resize(k, 0.0);
    for v in &mut variances {
        *v = v.max(0.0);
    }
    for c in &mut components {
        fix_sign(c);
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance: variances,
        total_variance,
        degenerate: total_variance == 0.0,
    })
}

/// Eigenpairs sorted by decreasing eigenvalue; ties keep the solver order.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Modified Gram-Schmidt, in place.
fn orthonormalize(vectors: &mut [Vec<f64>]) {
    for i in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(i);
        let v = &mut rest[0];
        for u in done.iter() {
            let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Extends an orthonormal set to `k` vectors with directions of zero
/// variance, drawn from the standard basis.
fn complete_basis(vectors: &mut Vec<Vec<f64>>, d: usize, k: usize) {
    let mut axis = 0;
    while vectors.len() < k && axis < d {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        axis += 1;
        for u in vectors.iter() {
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            vectors.push(v);
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
