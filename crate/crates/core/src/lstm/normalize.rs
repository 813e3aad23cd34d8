use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-feature min-max scaling, `z = (x - shift) / scale`.
///
/// Fitted on training data only; later values may fall outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn from_parts(shift: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if shift.len() != scale.len() || shift.is_empty() {
            return Err(invalid("shift and scale must be non-empty and equally long"));
        }
        if scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) || shift.iter().any(|s| !s.is_finite()) {
            return Err(invalid("scales must be positive and finite"));
        }
        Ok(Self { shift, scale })
    }

    /// Fits every feature; a constant feature is an error.
    pub fn fit(features: &[&[f64]]) -> Result<Self> {
        Self::fit_inner(features, false)
    }

    /// Fits like [`Normalizer::fit`] but gives constant features other than
    /// the first one `scale = 1`. The first feature is the regression target
    /// and must still vary.
    pub fn fit_with_feature_fallback(features: &[&[f64]]) -> Result<Self> {
        Self::fit_inner(features, true)
    }

    fn fit_inner(features: &[&[f64]], lenient: bool) -> Result<Self> {
        if features.is_empty() || features.iter().any(|f| f.is_empty()) {
            return Err(invalid("cannot fit a normalizer on empty data"));
        }
        let mut shift = Vec::with_capacity(features.len());
        let mut scale = Vec::with_capacity(features.len());
        for (c, values) in features.iter().enumerate() {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            if !range.is_finite() {
                return Err(Error::DegenerateData(format!("feature {c} is not finite")));
            }
            if range > 0.0 {
                shift.push(lo);
                scale.push(range);
            } else if lenient && c > 0 {
                shift.push(lo);
                scale.push(1.0);
            } else {
                return Err(Error::DegenerateData(format!(
                    "feature {c} is constant, min-max scale would be zero"
                )));
            }
        }
        Ok(Self { shift, scale })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn transform(&self, feature: usize, x: f64) -> f64 {
        (x - self.shift[feature]) / self.scale[feature]
    }

    pub fn inverse(&self, feature: usize, z: f64) -> f64 {
        z * self.scale[feature] + self.shift[feature]
    }

    pub fn transform_vector(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(c, &v)| self.transform(c, v)).collect()
    }
}
