//! Deterministic, splittable random streams and zero-mean innovation laws.
//!
//! A [`StreamKey`] names a stream; [`make_stream`] turns it into a ChaCha8
//! generator without touching any other stream. The master seed and lane are
//! hashed into the 256-bit key, the replication id selects the ChaCha stream
//! (nonce), so every `(replication, lane)` pair is reachable in O(1) and the
//! draws never depend on how replications are scheduled across workers.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Innovation / input noise driving a simulated process.
pub const LANE_INNOVATIONS: u32 = 0;
/// Simulated model inputs (network inputs, kriging test points).
pub const LANE_INPUTS: u32 = 1;
/// Observation noise shared by a coupled surrogate pair.
pub const LANE_NOISE: u32 = 2;
/// i.i.d. field inputs ξ.
pub const LANE_FIELD: u32 = 3;
/// Random design points.
pub const LANE_DESIGN: u32 = 4;
/// Second independent sample in two-sample experiments.
pub const LANE_SECONDARY: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replication_id: u64,
    pub lane_id: u32,
}

impl StreamKey {
    pub fn new(master_seed: u64, replication_id: u64, lane_id: u32) -> Self {
        StreamKey {
            master_seed,
            replication_id,
            lane_id,
        }
    }

    /// Same master seed and lane, different replication.
    pub fn with_replication(self, replication_id: u64) -> Self {
        StreamKey {
            replication_id,
            ..self
        }
    }

    pub fn with_lane(self, lane_id: u32) -> Self {
        StreamKey { lane_id, ..self }
    }
}

/// A random stream. Cheap to create; owned by one worker at a time.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn make_stream(key: StreamKey) -> RandomStream {
    let mut state = key.master_seed ^ (u64::from(key.lane_id)).rotate_left(32);
    // decorrelate nearby seeds before filling the key
    splitmix64(&mut state);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(key.replication_id);
    RandomStream { rng }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A zero-mean innovation law with finite fourth moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnovationSpec {
    Gaussian {
        variance: f64,
    },
    /// Student t with `dof` degrees of freedom, rescaled to `variance`.
    StudentT {
        dof: f64,
        variance: f64,
    },
    /// `Exp(rate) - 1/rate`.
    CenteredExponential {
        rate: f64,
    },
    /// Uniform on `[-half_width, half_width]`; `half_width = 0` is the point mass at 0.
    ScaledUniform {
        half_width: f64,
    },
}

impl Default for InnovationSpec {
    fn default() -> Self {
        InnovationSpec::Gaussian { variance: 1.0 }
    }
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |cond: bool, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::config(msg.to_string()))
            }
        };
        match *self {
            InnovationSpec::Gaussian { variance } => ok(
                variance.is_finite() && variance > 0.0,
                "gaussian variance must be positive and finite",
            ),
            InnovationSpec::StudentT { dof, variance } => {
                ok(dof.is_finite() && dof > 4.0, "student_t dof must exceed 4")?;
                ok(
                    variance.is_finite() && variance > 0.0,
                    "student_t variance must be positive and finite",
                )
            }
            InnovationSpec::CenteredExponential { rate } => ok(
                rate.is_finite() && rate > 0.0,
                "centered_exponential rate must be positive and finite",
            ),
            InnovationSpec::ScaledUniform { half_width } => ok(
                half_width.is_finite() && half_width >= 0.0,
                "scaled_uniform half_width must be non-negative and finite",
            ),
        }
    }

    pub fn variance(&self) -> f64 {
        self.central_moment(2)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    fn central_moment(&self, order: u32) -> f64 {
        match (*self, order) {
            (_, 1) => 0.0,
            (InnovationSpec::Gaussian { variance }, 2) => variance,
            (InnovationSpec::Gaussian { .. }, 3) => 0.0,
            (InnovationSpec::Gaussian { variance }, _) => 3.0 * variance * variance,
            (InnovationSpec::StudentT { variance, .. }, 2) => variance,
            (InnovationSpec::StudentT { .. }, 3) => 0.0,
            // kurtosis of t_ν is 3(ν-2)/(ν-4)
            (InnovationSpec::StudentT { dof, variance }, _) => {
                3.0 * variance * variance * (dof - 2.0) / (dof - 4.0)
            }
            (InnovationSpec::CenteredExponential { rate }, k) => {
                let s = 1.0 / rate;
                match k {
                    2 => s * s,
                    3 => 2.0 * s * s * s,
                    _ => 9.0 * s * s * s * s,
                }
            }
            (InnovationSpec::ScaledUniform { half_width: h }, k) => match k {
                2 => h * h / 3.0,
                3 => 0.0,
                _ => h.powi(4) / 5.0,
            },
        }
    }

    /// Build a sampler with any per-family setup done once.
    pub fn sampler(&self) -> Result<InnovationSampler> {
        self.validate()?;
        Ok(match *self {
            InnovationSpec::Gaussian { variance } => InnovationSampler::Gaussian {
                sd: variance.sqrt(),
            },
            InnovationSpec::StudentT { dof, variance } => InnovationSampler::StudentT {
                dist: StudentT::new(dof).map_err(|e| Error::config(e.to_string()))?,
                scale: (variance * (dof - 2.0) / dof).sqrt(),
            },
            InnovationSpec::CenteredExponential { rate } => {
                InnovationSampler::CenteredExponential { scale: 1.0 / rate }
            }
            InnovationSpec::ScaledUniform { half_width } => {
                InnovationSampler::ScaledUniform { half_width }
            }
        })
    }
}

/// Exact central moment of order 1..=4 of the innovation law.
pub fn moments_of(spec: &InnovationSpec, order: u32) -> Result<f64> {
    spec.validate()?;
    if !(1..=4).contains(&order) {
        return Err(Error::config(format!(
            "moment order {order} unsupported (expected 1..=4)"
        )));
    }
    Ok(spec.central_moment(order))
}

#[derive(Debug, Clone, Copy)]
pub enum InnovationSampler {
    Gaussian { sd: f64 },
    StudentT { dist: StudentT<f64>, scale: f64 },
    CenteredExponential { scale: f64 },
    ScaledUniform { half_width: f64 },
}

impl InnovationSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InnovationSampler::Gaussian { sd } => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            InnovationSampler::StudentT { dist, scale } => scale * dist.sample(rng),
            InnovationSampler::CenteredExponential { scale } => {
                let e: f64 = Exp1.sample(rng);
                scale * (e - 1.0)
            }
            InnovationSampler::ScaledUniform { half_width } => {
                if *half_width == 0.0 {
                    0.0
                } else {
                    let u: f64 = rng.random();
                    half_width * (2.0 * u - 1.0)
                }
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.draw(rng);
        }
    }
}

pub fn sample_innovations(
    spec: &InnovationSpec,
    count: usize,
    stream: &mut RandomStream,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::config("innovation count must be at least 1"));
    }
    let sampler = spec.sampler()?;
    let mut out = vec![0.0; count];
    sampler.fill(stream, &mut out);
    Ok(out)
}

/// Standard normal draw.
#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(key: StreamKey, k: usize) -> Vec<u64> {
        let mut s = make_stream(key);
        (0..k).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn equal_keys_reproduce() {
        let k = StreamKey::new(7, 0, 0);
        assert_eq!(draws(k, 1000), draws(k, 1000));
    }

    #[test]
    fn distinct_replication_lane_or_seed_differ() {
        let base = draws(StreamKey::new(7, 0, 0), 1000);
        assert_ne!(base, draws(StreamKey::new(7, 1, 0), 1000));
        assert_ne!(base, draws(StreamKey::new(7, 0, 1), 1000));
        assert_ne!(base, draws(StreamKey::new(8, 0, 0), 1000));
    }

    #[test]
    fn lane_and_replication_are_not_interchangeable() {
        assert_ne!(
            draws(StreamKey::new(7, 1, 0), 50),
            draws(StreamKey::new(7, 0, 1), 50)
        );
    }

    #[test]
    fn closed_form_moments() {
        let g = InnovationSpec::Gaussian { variance: 1.0 };
        assert_eq!(moments_of(&g, 2).unwrap(), 1.0);
        assert_eq!(moments_of(&g, 4).unwrap(), 3.0);
        let e = InnovationSpec::CenteredExponential { rate: 1.0 };
        assert_eq!(moments_of(&e, 3).unwrap(), 2.0);
        assert_eq!(moments_of(&e, 1).unwrap(), 0.0);
        let t = InnovationSpec::StudentT {
            dof: 6.0,
            variance: 2.0,
        };
        // 3 σ⁴ (ν-2)/(ν-4) = 3·4·4/2
        assert_eq!(moments_of(&t, 4).unwrap(), 24.0);
    }

    #[test]
    fn unsupported_order_and_bad_params_error() {
        let g = InnovationSpec::Gaussian { variance: 1.0 };
        assert!(matches!(moments_of(&g, 0), Err(Error::Config(_))));
        assert!(matches!(moments_of(&g, 5), Err(Error::Config(_))));
        let bad_t = InnovationSpec::StudentT {
            dof: 4.0,
            variance: 1.0,
        };
        assert!(bad_t.validate().is_err());
        assert!(InnovationSpec::Gaussian { variance: 0.0 }
            .validate()
            .is_err());
        let mut s = make_stream(StreamKey::new(1, 0, 0));
        assert!(sample_innovations(&bad_t, 10, &mut s).is_err());
        assert!(sample_innovations(&g, 0, &mut s).is_err());
    }

    #[test]
    fn degenerate_uniform_is_zero() {
        let spec = InnovationSpec::ScaledUniform { half_width: 0.0 };
        let mut s = make_stream(StreamKey::new(3, 0, 0));
        let xs = sample_innovations(&spec, 1000, &mut s).unwrap();
        assert!(xs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lanes_are_uncorrelated() {
        let g = InnovationSpec::Gaussian { variance: 1.0 };
        let a =
            sample_innovations(&g, 100_000, &mut make_stream(StreamKey::new(11, 4, 0))).unwrap();
        let b =
            sample_innovations(&g, 100_000, &mut make_stream(StreamKey::new(11, 4, 1))).unwrap();
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / n;
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
        assert!((cov / (va * vb).sqrt()).abs() < 0.02);
    }
}
