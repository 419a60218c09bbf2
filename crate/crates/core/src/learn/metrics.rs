use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed by (true class, predicted class).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn get(&self, truth: &str, predicted: &str) -> usize {
        match (self.index(truth), self.index(predicted)) {
            (Some(t), Some(p)) => self.counts[t][p],
            _ => 0,
        }
    }

    fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    /// Adds `other` into `self`, widening the label set as needed.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        let labels: BTreeSet<&String> = self.labels.iter().chain(&other.labels).collect();
        let mut merged = ConfusionMatrix::new(labels.into_iter().cloned().collect());
        for m in [&*self, other] {
            for (t, row) in m.counts.iter().enumerate() {
                for (p, &c) in row.iter().enumerate() {
                    let ti = merged.index(&m.labels[t]).unwrap();
                    let pi = merged.index(&m.labels[p]).unwrap();
                    merged.counts[ti][pi] += c;
                }
            }
        }
        *self = merged;
    }
}

/// Confusion matrix over the sorted union of labels, and the accuracy
/// `trace / total`.
pub fn evaluate<P: AsRef<str>, T: AsRef<str>>(
    predictions: &[P],
    truths: &[T],
) -> Result<(ConfusionMatrix, f64)> {
    if predictions.len() != truths.len() {
        return Err(Error::validation(format!(
            "{} predictions for {} ground-truth labels",
            predictions.len(),
            truths.len()
        )));
    }
    let labels: BTreeSet<&str> = predictions
        .iter()
        .map(AsRef::as_ref)
        .chain(truths.iter().map(AsRef::as_ref))
        .collect();
    let mut cm = ConfusionMatrix::new(labels.into_iter().map(str::to_owned).collect());
    for (p, t) in predictions.iter().zip(truths) {
        let ti = cm.index(t.as_ref()).unwrap();
        let pi = cm.index(p.as_ref()).unwrap();
        cm.counts[ti][pi] += 1;
    }
    let acc = cm.accuracy();
    Ok((cm, acc))
}
