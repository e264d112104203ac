use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::rng_from_seed;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// `L(0, b)`
    Laplace,
    /// `N(0, b^2)`
    Gaussian,
    /// `U(-b, b)`
    Uniform,
}

impl NoiseFamily {
    pub const ALL: [NoiseFamily; 3] = [
        NoiseFamily::Laplace,
        NoiseFamily::Gaussian,
        NoiseFamily::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Laplace => "laplace",
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Uniform => "uniform",
        }
    }
}

impl std::fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, scale: f64) -> Result<Self> {
        let spec = Self {
            family,
            scale,
            epsilon: None,
            delta: None,
            sensitivity: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn laplace(b: f64) -> Result<Self> {
        Self::new(NoiseFamily::Laplace, b)
    }

    pub fn gaussian(b: f64) -> Result<Self> {
        Self::new(NoiseFamily::Gaussian, b)
    }

    pub fn uniform(b: f64) -> Result<Self> {
        Self::new(NoiseFamily::Uniform, b)
    }

    /// Laplace mechanism with scale `sensitivity / epsilon`.
    pub fn laplace_dp(sensitivity: f64, epsilon: f64) -> Result<Self> {
        positive("sensitivity", sensitivity)?;
        positive("epsilon", epsilon)?;
        let spec = Self {
            family: NoiseFamily::Laplace,
            scale: sensitivity / epsilon,
            epsilon: Some(epsilon),
            delta: None,
            sensitivity: Some(sensitivity),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Gaussian mechanism at the smallest admissible sigma.
    pub fn gaussian_dp(sensitivity: f64, epsilon: f64, delta: f64) -> Result<Self> {
        let sigma = gaussian_sigma(sensitivity, epsilon, delta)?;
        let spec = Self {
            family: NoiseFamily::Gaussian,
            scale: sigma,
            epsilon: Some(epsilon),
            delta: Some(delta),
            sensitivity: Some(sensitivity),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::param(
                "scale",
                format!("must be finite and >= 0, got {}", self.scale),
            ));
        }
        if let Some(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        if let Some(s) = self.sensitivity {
            positive("sensitivity", s)?;
        }
        if let Some(d) = self.delta {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::param(
                    "delta",
                    format!("must lie in [0, 1), got {d}"),
                ));
            }
        }
        if self.family == NoiseFamily::Gaussian
            && self.epsilon.is_some()
            && !self.delta.is_some_and(|d| d > 0.0)
        {
            return Err(Error::CalibrationImpossible(
                "the Gaussian mechanism needs delta > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let b = self.scale;
        match self.family {
            NoiseFamily::Laplace => {
                // inverse CDF on u in (-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                if b == 0.0 {
                    return 0.0;
                }
                -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
            }
            NoiseFamily::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                b * z
            }
            NoiseFamily::Uniform => {
                let u: f64 = rng.random_range(-1.0..=1.0);
                b * u
            }
        }
    }

    pub fn noise_matrix<R: Rng + ?Sized>(&self, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.sample(rng)).collect();
        Matrix::from_vec(rows, cols, data)
    }

    /// Mean absolute deviation of the distribution.
    pub fn mean_abs(&self) -> f64 {
        match self.family {
            NoiseFamily::Laplace => self.scale,
            NoiseFamily::Gaussian => self.scale * (2.0 / std::f64::consts::PI).sqrt(),
            NoiseFamily::Uniform => self.scale / 2.0,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

/// `D + W` with i.i.d. draws from `spec`.
pub fn add_noise(values: &Matrix, spec: &NoiseSpec, seed: u64) -> Result<Matrix> {
    spec.validate()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("values", "must be finite"));
    }
    let mut rng = rng_from_seed(seed);
    let w = spec.noise_matrix(values.nrows(), values.ncols(), &mut rng);
    Ok(values + w)
}

/// Privacy budget of the Laplace mechanism at scale `b`.
pub fn laplace_epsilon(sensitivity: f64, b: f64) -> Result<f64> {
    positive("sensitivity", sensitivity)?;
    positive("b", b)?;
    Ok(sensitivity / b)
}

/// Smallest sigma satisfying `sigma >= sqrt(2 ln(1.25 / delta)) * sensitivity / epsilon`.
pub fn gaussian_sigma(sensitivity: f64, epsilon: f64, delta: f64) -> Result<f64> {
    positive("sensitivity", sensitivity)?;
    positive("epsilon", epsilon)?;
    if delta <= 0.0 {
        return Err(Error::CalibrationImpossible(
            "the Gaussian mechanism needs delta > 0".into(),
        ));
    }
    if !(delta < 1.0) {
        return Err(Error::param(
            "delta",
            format!("must be below 1, got {delta}"),
        ));
    }
    Ok((2.0 * (1.25 / delta).ln()).sqrt() * sensitivity / epsilon)
}

/// `max - min` over all observed values.
pub fn empirical_sensitivity(values: &Matrix) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.max() - values.min()
}
