//! Scenario distributions. All supported distributions are bounded.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::uniform;
use crate::scalar::Scalar;

/// One realization `w` of the random variable `W`, tagged with the iteration that drew it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub payload: Vec<T>,
    pub index: usize,
}

impl<T> Scenario<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.payload
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSampler<T> {
    /// Degenerate distribution at a single point.
    PointMass(Vec<T>),
    /// Uniform over stored samples.
    Empirical(Vec<Vec<T>>),
    /// Independent uniform coordinates on `[lower_i, upper_i]`.
    UniformBox { lower: Vec<T>, upper: Vec<T> },
}

impl<T: Scalar> ScenarioSampler<T> {
    pub fn empirical(samples: Vec<Vec<T>>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::InvalidArgument("empirical measure needs at least one sample".into()));
        };
        let len = first.len();
        if samples.iter().any(|s| s.len() != len) {
            return Err(Error::InvalidArgument("empirical samples must share one dimension".into()));
        }
        Ok(ScenarioSampler::Empirical(samples))
    }

    pub fn uniform_box(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument("uniform box needs lower <= upper".into()));
        }
        Ok(ScenarioSampler::UniformBox { lower, upper })
    }

    pub fn payload_dim(&self) -> usize {
        match self {
            ScenarioSampler::PointMass(w) => w.len(),
            ScenarioSampler::Empirical(s) => s[0].len(),
            ScenarioSampler::UniformBox { lower, .. } => lower.len(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            ScenarioSampler::PointMass(w) => w.clone(),
            ScenarioSampler::Empirical(samples) => samples[rng.random_range(0..samples.len())].clone(),
            ScenarioSampler::UniformBox { lower, upper } => {
                lower.iter().zip(upper).map(|(&l, &h)| uniform(rng, l, h)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn point_mass_always_returns_atom() {
        let s = ScenarioSampler::PointMass(vec![0.25, -1.0]);
        let mut rng = stream(1, 1);
        for _ in 0..100 {
            assert_eq!(s.draw(&mut rng), vec![0.25, -1.0]);
        }
    }

    #[test]
    fn empirical_frequencies_are_uniform() {
        let n_atoms = 10usize;
        let s = ScenarioSampler::empirical((0..n_atoms).map(|i| vec![i as f64]).collect()).unwrap();
        let mut rng = stream(2024, 1);
        let draws = 100_000usize;
        let mut counts = vec![0usize; n_atoms];
        for _ in 0..draws {
            let w = s.draw(&mut rng);
            counts[w[0] as usize] += 1;
        }
        let p = 1.0 / n_atoms as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let mut chi2 = 0.0;
        for &c in &counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sigma, "{counts:?}");
            chi2 += (c as f64 - mean).powi(2) / mean;
        }
        // 99.9% quantile of chi-square with 9 degrees of freedom.
        assert!(chi2 < 27.877, "chi2 = {chi2}");
    }

    #[test]
    fn uniform_box_stays_inside() {
        let s = ScenarioSampler::uniform_box(vec![-1.0, 0.5], vec![1.0, 0.5]).unwrap();
        let mut rng = stream(3, 1);
        for _ in 0..1000 {
            let w = s.draw(&mut rng);
            assert!((-1.0..=1.0).contains(&w[0]));
            assert_eq!(w[1], 0.5);
        }
    }
}
