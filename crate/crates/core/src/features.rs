//! Per-utterance feature compression (time average of each cepstral
//! channel), the MLP-side dc-channel removal and z-score normalization, and
//! the feature cache file.

use crate::error::{Error, Result};
use crate::frontend::{CepstralMatrix, NUM_CEPSTRA};

/// Time-averaged cepstral channels of one utterance; index i is channel C_i.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("feature vector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("feature vector has non-finite entries"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `feature(i) = (1/N) sum_j cepstral(i, j)`.
pub fn compress_features(c: &CepstralMatrix) -> Result<FeatureVector> {
    let n = c.num_frames();
    if n == 0 {
        return Err(Error::Empty("cepstral matrix has no frames".into()));
    }
    let mut sums = vec![0.0; c.num_cepstra()];
    for col in c.columns() {
        for (s, v) in sums.iter_mut().zip(col) {
            *s += v;
        }
    }
    FeatureVector::new(sums.into_iter().map(|s| s / n as f64).collect())
}

/// Removes channel 0 (the dc / log-energy-sum channel) from a 13-value
/// vector.
pub fn drop_dc_channel(f: &FeatureVector) -> Result<Vec<f64>> {
    if f.len() != NUM_CEPSTRA {
        return Err(Error::Dimension {
            expected: NUM_CEPSTRA,
            got: f.len(),
        });
    }
    Ok(f.values()[1..].to_vec())
}

/// Per-dimension mean and population standard deviation of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_normalizer(train: &[Vec<f64>]) -> Result<NormalizationStats> {
    if train.len() < 2 {
        return Err(Error::Empty(format!(
            "normalization needs at least 2 training vectors, got {}",
            train.len()
        )));
    }
    let dim = train[0].len();
    if let Some(bad) = train.iter().find(|v| v.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: bad.len(),
        });
    }
    let n = train.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|d| train.iter().map(|v| v[d]).sum::<f64>() / n).collect();
    let std: Vec<f64> = (0..dim)
        .map(|d| (train.iter().map(|v| (v[d] - mean[d]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    if let Some(dim) = std.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateDimension { dim });
    }
    Ok(NormalizationStats { mean, std })
}

impl NormalizationStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f.len())?;
        Ok(f.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }

    pub fn invert(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z.len())?;
        Ok(z.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(z, (m, s))| z * s + m)
            .collect())
    }
}

pub fn apply_normalizer(stats: &NormalizationStats, f: &[f64]) -> Result<Vec<f64>> {
    stats.apply(f)
}

/// One line of the feature cache: `source_id,label,v0,...,v12`.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub source_id: String,
    pub label: String,
    pub features: FeatureVector,
}

/// Values are written in shortest round-trip form, so parsing the cache
/// reproduces every bit.
pub fn write_cache(entries: &[CacheEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.source_id);
        out.push(',');
        out.push_str(&e.label);
        for v in e.features.values() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_cache(text: &str) -> Result<Vec<CacheEntry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 2 + NUM_CEPSTRA {
            return Err(Error::Syntax {
                line,
                reason: format!("expected {} fields, found {}", 2 + NUM_CEPSTRA, fields.len()),
            });
        }
        let values = fields[2..]
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Syntax {
                    line,
                    reason: format!("'{s}': {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(CacheEntry {
            source_id: fields[0].to_string(),
            label: fields[1].to_string(),
            features: FeatureVector::new(values).map_err(|e| Error::Syntax {
                line,
                reason: e.to_string(),
            })?,
        });
    }
    Ok(out)
}
