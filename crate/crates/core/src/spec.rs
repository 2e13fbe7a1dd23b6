//! JSON model specs.
//!
//! ```json
//! {
//!   "name": "bsc",
//!   "source": [0.39, 0.11, 0.11, 0.39],
//!   "codebook": [0.5, 0.5],
//!   "distortion": [[0, 1], [0, -1], [-1, 0], [1, 0]],
//!   "channel": [[0.78, 0.22], [0.22, 0.78]],
//!   "d_scale": {"log_odds": 0.22},
//!   "levels": [0.11, 0, -0.22]
//! }
//! ```
//!
//! Every field is optional; which ones are needed depends on the exponent
//! kind. `d_scale` multiplies both the distortion matrix and `levels`; it is
//! a number or `{"log_odds": p}` for the factor `ln((1−p)/p)`. With
//! `"normalize": true` the distributions are rescaled to sum to one instead
//! of being checked against the 1e-12 tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::exponent::{ExponentKind, Model};
use crate::prob::{Channel, Distribution, DistortionModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DScale {
    Factor(f64),
    LogOdds { log_odds: f64 },
}

impl DScale {
    pub fn factor(self) -> Result<f64> {
        let f = match self {
            DScale::Factor(f) => f,
            DScale::LogOdds { log_odds: p } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Spec(format!("log_odds needs 0 < p < 1, got {p}")));
                }
                ((1.0 - p) / p).ln()
            }
        };
        if !f.is_finite() {
            return Err(Error::Spec(format!("non-finite d_scale {f}")));
        }
        Ok(f)
    }
}

/// The spec as written. Serialising it back gives a document that parses to
/// the same model: floats are printed in shortest round-trip form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codebook: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_scale: Option<DScale>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
    /// Free-form annotations, carried through untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl ModelSpec {
    /// Parse errors carry serde_json's line/column position.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    fn scale(&self) -> Result<f64> {
        self.d_scale.map_or(Ok(1.0), DScale::factor)
    }

    /// Distortion levels after `d_scale`.
    pub fn scaled_levels(&self) -> Result<Vec<f64>> {
        let f = self.scale()?;
        check_finite("levels", self.levels.iter())?;
        Ok(self.levels.iter().map(|l| l * f).collect())
    }

    /// Scale a level given on the command line the same way as `levels`.
    pub fn scale_level(&self, level: f64) -> Result<f64> {
        Ok(level * self.scale()?)
    }

    fn dist(&self, field: &str, v: &Option<Vec<f64>>) -> Result<Distribution> {
        let v = v.clone().ok_or_else(|| Error::Spec(format!("missing `{field}`")))?;
        if v.is_empty() {
            return Err(mismatch(format!("`{field}` is empty")));
        }
        check_finite(field, v.iter())?;
        if self.normalize {
            Distribution::normalized(v)
        } else {
            Distribution::new(v)
        }
    }

    pub fn source_dist(&self) -> Result<Distribution> {
        self.dist("source", &self.source)
    }

    pub fn codebook_dist(&self) -> Result<Distribution> {
        self.dist("codebook", &self.codebook)
    }

    pub fn channel_matrix(&self) -> Result<Channel> {
        let rows = self.channel.clone().ok_or_else(|| Error::Spec("missing `channel`".into()))?;
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(mismatch("`channel` must be a non-empty rectangular matrix"));
        }
        check_finite("channel", rows.iter().flatten())?;
        if self.normalize {
            let rows = rows
                .into_iter()
                .map(|r| Distribution::normalized(r).map(|d| d.probs().to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Channel::new(rows)
        } else {
            Channel::new(rows)
        }
    }

    pub fn distortion_matrix(&self) -> Result<DistortionModel> {
        let rows = self.distortion.clone().ok_or_else(|| Error::Spec("missing `distortion`".into()))?;
        check_finite("distortion", rows.iter().flatten())?;
        let f = self.scale()?;
        DistortionModel::new(rows.into_iter().map(|r| r.into_iter().map(|v| v * f).collect()).collect())
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some() && self.distortion.is_some()
    }

    pub fn has_channel(&self) -> bool {
        self.channel.is_some()
    }

    /// Lossy-source model from `source`, `codebook`, `distortion`.
    pub fn source_model(&self) -> Result<Model> {
        let (p, q, d) = (self.source_dist()?, self.codebook_dist()?, self.distortion_matrix()?);
        d.check_shape(p.alphabet_size(), q.alphabet_size())?;
        Ok(Model::Source { p, q, d })
    }

    /// Channel model from `channel` with `codebook` as the input distribution.
    pub fn channel_model(&self) -> Result<Model> {
        let (q, p) = (self.codebook_dist()?, self.channel_matrix()?);
        p.check_input(&q)?;
        Ok(Model::Channel { q, p })
    }

    /// The model an exponent kind should be evaluated on: source kinds prefer
    /// an explicit source and fall back to the channel's induced source.
    pub fn model_for(&self, kind: ExponentKind) -> Result<Model> {
        if kind.is_source() && (self.has_source() || !self.has_channel()) {
            self.source_model()
        } else {
            self.channel_model()
        }
    }

    /// Every part present in the spec is well formed and shapes agree.
    pub fn validate(&self) -> Result<()> {
        let _ = self.scaled_levels()?;
        if self.source.is_some() || self.distortion.is_some() {
            self.source_model()?;
        }
        if self.channel.is_some() {
            self.channel_model()?;
        }
        if self.source.is_none() && self.channel.is_none() && self.codebook.is_some() {
            self.codebook_dist()?;
        }
        Ok(())
    }
}

fn check_finite<'a>(field: &str, mut v: impl Iterator<Item = &'a f64>) -> Result<()> {
    match v.find(|x| !x.is_finite()) {
        Some(x) => Err(Error::Spec(format!("non-finite value {x} in `{field}`"))),
        None => Ok(()),
    }
}
