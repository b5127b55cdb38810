//! Per-frame label probability matrix.

use super::CoreError;

/// T × K matrix of per-frame label distributions plus the label vocabulary.
///
/// Probabilities are kept in f64: the matrix is transient pipeline state
/// (only feature stores are persisted) and entropy comparisons downstream
/// are specified at 1e-6 tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    frames: usize,
    labels: usize,
    probs: Vec<f64>,
    label_names: Vec<String>,
}

impl ProbMatrix {
    /// Validates row sums (1 ± 1e-5) and entry ranges before construction.
    pub fn new(
        frames: usize,
        labels: usize,
        probs: Vec<f64>,
        label_names: Vec<String>,
    ) -> Result<Self, CoreError> {
        if labels == 0 {
            return Err(CoreError::InvalidDistribution(
                "label count must be positive".into(),
            ));
        }
        if label_names.len() != labels {
            return Err(CoreError::InvalidDistribution(format!(
                "{} label names for {labels} labels",
                label_names.len()
            )));
        }
        if probs.len() != frames * labels {
            return Err(CoreError::InvalidDistribution(format!(
                "probs length {} != frames {frames} × labels {labels}",
                probs.len()
            )));
        }
        let m = Self {
            frames,
            labels,
            probs,
            label_names,
        };
        for t in 0..frames {
            let row = m.row(t);
            let mut sum = 0.0;
            for (k, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CoreError::InvalidDistribution(format!(
                        "p[{t},{k}] = {p} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-5 {
                return Err(CoreError::InvalidDistribution(format!(
                    "row {t} sums to {sum}"
                )));
            }
        }
        Ok(m)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.probs[t * self.labels..(t + 1) * self.labels]
    }
}
