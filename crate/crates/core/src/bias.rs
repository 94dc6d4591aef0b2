//! Additive gradient error `r_k` with worst-case magnitude `Q_k = q·k^(−ν)`.

use crate::error::{Error, Result};
use crate::rng::{normal_vec, StreamRng};
use crate::scalar::Scalar;
use crate::vector::{DualVector, Norm};

#[derive(Debug, Clone, PartialEq)]
pub enum BiasMode<T> {
    None,
    /// Fixed direction, normalized to unit dual norm.
    Deterministic(Vec<T>),
    /// Fresh direction each step, uniform on the Euclidean sphere then rescaled to unit dual norm.
    RandomDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSchedule<T> {
    mode: BiasMode<T>,
    q: T,
    nu: T,
}

impl<T: Scalar> BiasSchedule<T> {
    pub fn none() -> Self {
        Self {
            mode: BiasMode::None,
            q: T::zero(),
            nu: T::zero(),
        }
    }

    /// `direction` is stored as given and normalized per draw against the dual norm in force.
    pub fn deterministic(direction: Vec<T>, q: T, nu: T) -> Result<Self> {
        if direction.iter().all(|v| v.is_zero()) || direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("bias direction must be finite and non-zero".into()));
        }
        Self::validated(BiasMode::Deterministic(direction), q, nu)
    }

    pub fn random_direction(q: T, nu: T) -> Result<Self> {
        Self::validated(BiasMode::RandomDirection, q, nu)
    }

    fn validated(mode: BiasMode<T>, q: T, nu: T) -> Result<Self> {
        if !(q >= T::zero()) || !q.is_finite() {
            return Err(Error::InvalidArgument("bias magnitude q must be finite and >= 0".into()));
        }
        if !(nu >= T::zero()) || !nu.is_finite() {
            return Err(Error::InvalidArgument("bias decay nu must be finite and >= 0".into()));
        }
        Ok(Self { mode, q, nu })
    }

    pub fn mode(&self) -> &BiasMode<T> {
        &self.mode
    }

    pub fn q(&self) -> T {
        if matches!(self.mode, BiasMode::None) {
            T::zero()
        } else {
            self.q
        }
    }

    pub fn nu(&self) -> T {
        self.nu
    }

    /// `Q_k`; zero when the mode is `None`.
    pub fn magnitude(&self, k: usize) -> T {
        self.q() * T::from_count(k.max(1)).powf(-self.nu)
    }

    /// Σ Q_k ε_k < ∞ for ε_k ∝ k^(−θ): holds iff θ + ν > 1 (or no bias at all).
    pub fn summable_against(&self, theta: T) -> bool {
        self.q().is_zero() || theta + self.nu > T::one()
    }

    /// Draws `r_k` with `‖r_k‖_* = Q_k`.
    pub fn draw(&self, k: usize, dim: usize, norm: Norm, rng: &mut StreamRng) -> DualVector<T> {
        debug_assert!(k >= 1);
        let magnitude = self.magnitude(k);
        let direction = match &self.mode {
            BiasMode::None => return DualVector::zeros(dim, norm),
            BiasMode::Deterministic(d) => d.clone(),
            BiasMode::RandomDirection => {
                let mut z: Vec<T> = normal_vec(rng, dim);
                while z.iter().all(|v| v.is_zero()) {
                    z = normal_vec(rng, dim);
                }
                z
            }
        };
        let scale = magnitude / norm.dual().eval(&direction);
        DualVector::raw(direction.into_iter().map(|v| v * scale).collect(), norm)
    }
}
