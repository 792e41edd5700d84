use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{standard_normal, uniform01};

/// Axis-aligned compact box `[lower_k, upper_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = BoxDomain { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn unit(dim: usize) -> Self {
        BoxDomain {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        BoxDomain {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::config(
                "box bounds must be non-empty and of equal length",
            ));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::config(
                "box bounds must be finite with lower <= upper",
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Euclidean distance from the center to a corner.
    pub fn radius(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (0.5 * (u - l)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + (u - l) * uniform01(rng))
            .collect()
    }
}

/// Distribution of simulated model inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputLaw {
    /// Uniform on the model's input box.
    UniformBox,
    /// Independent `N(mean_k, sd^2)` coordinates, conditioned on the box by rejection.
    TruncatedGaussian { mean: Vec<f64>, sd: f64 },
    /// Independent `N(mean_k, sd^2)` coordinates with no restriction.
    Gaussian { mean: Vec<f64>, sd: f64 },
}

const MAX_REJECTIONS: usize = 100_000;

impl InputLaw {
    pub fn validate(&self, domain: &BoxDomain) -> Result<()> {
        match self {
            InputLaw::UniformBox => Ok(()),
            InputLaw::TruncatedGaussian { mean, sd } | InputLaw::Gaussian { mean, sd } => {
                if mean.len() != domain.dim() {
                    Err(Error::shape(format!(
                        "input law mean has {} coordinates, domain has {}",
                        mean.len(),
                        domain.dim()
                    )))
                } else if !(*sd > 0.0 && sd.is_finite()) {
                    Err(Error::config("input law sd must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, domain: &BoxDomain, rng: &mut R) -> Result<Vec<f64>> {
        let gaussian = |rng: &mut R, mean: &[f64], sd: f64| -> Vec<f64> {
            mean.iter().map(|m| m + sd * standard_normal(rng)).collect()
        };
        match self {
            InputLaw::UniformBox => Ok(domain.sample_uniform(rng)),
            InputLaw::Gaussian { mean, sd } => Ok(gaussian(rng, mean, *sd)),
            InputLaw::TruncatedGaussian { mean, sd } => {
                for _ in 0..MAX_REJECTIONS {
                    let x = gaussian(rng, mean, *sd);
                    if domain.contains(&x) {
                        return Ok(x);
                    }
                }
                Err(Error::Resource(format!(
                    "truncated gaussian: no draw inside the box after {MAX_REJECTIONS} attempts"
                )))
            }
        }
    }
}
