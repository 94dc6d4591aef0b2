//! Auxiliary functions (mirror maps) `K`, their gradients and Bregman divergences.

use crate::error::{Error, Result};
use crate::partition::BlockPartition;
use crate::scalar::Scalar;
use crate::vector::{check_dim, dot, DualVector, Norm, Vector};

/// Strongly convex, differentiable auxiliary function.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxiliaryFunction<T> {
    /// `½‖u‖²₂`
    Quadratic,
    /// `½ uᵀ D u` with positive diagonal `D`.
    WeightedQuadratic(Vec<T>),
    /// `Σ u_i log u_i` on the positive orthant.
    NegativeEntropy,
    /// Block-separable sum `Σ K_i(u^i)`.
    Additive(Vec<AuxiliaryFunction<T>>, BlockPartition),
}

impl<T: Scalar> AuxiliaryFunction<T> {
    pub fn weighted_quadratic(diag: Vec<T>) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|d| !(*d > T::zero()) || !d.is_finite()) {
            return Err(Error::InvalidArgument("weighted quadratic needs a positive finite diagonal".into()));
        }
        Ok(AuxiliaryFunction::WeightedQuadratic(diag))
    }

    pub fn additive(parts: Vec<AuxiliaryFunction<T>>, partition: BlockPartition) -> Result<Self> {
        if parts.len() != partition.len() {
            return Err(Error::BlockMismatch(format!(
                "{} auxiliary functions for {} blocks",
                parts.len(),
                partition.len()
            )));
        }
        for (k, r) in parts.iter().zip(partition.blocks()) {
            if let Some(d) = k.fixed_dim() {
                check_dim(r.len(), d).map_err(|e| Error::BlockMismatch(e.to_string()))?;
            }
        }
        Ok(AuxiliaryFunction::Additive(parts, partition))
    }

    fn fixed_dim(&self) -> Option<usize> {
        match self {
            AuxiliaryFunction::WeightedQuadratic(d) => Some(d.len()),
            AuxiliaryFunction::Additive(_, p) => Some(p.dim()),
            _ => None,
        }
    }

    /// Strong convexity modulus `b`, relative to [`Self::convexity_norm`].
    pub fn strong_convexity(&self) -> T {
        match self {
            AuxiliaryFunction::Quadratic | AuxiliaryFunction::NegativeEntropy => T::one(),
            AuxiliaryFunction::WeightedQuadratic(d) => d.iter().copied().fold(T::infinity(), T::min),
            AuxiliaryFunction::Additive(parts, p) if self.convexity_norm() == Norm::L1 => {
                // Σ (c_i/2)‖Δ_i‖₁² ≥ ½(Σ‖Δ_i‖₁)² / Σ 1/c_i, where a Euclidean block of size d_i
                // has l1 modulus b_i/d_i
                let inverse: T = parts
                    .iter()
                    .zip(p.sizes())
                    .map(|(k, d)| match k.convexity_norm() {
                        Norm::L1 => T::one() / k.strong_convexity(),
                        _ => T::from_count(d) / k.strong_convexity(),
                    })
                    .sum();
                T::one() / inverse
            }
            AuxiliaryFunction::Additive(parts, _) => {
                parts.iter().map(|k| k.strong_convexity()).fold(T::infinity(), T::min)
            }
        }
    }

    /// Norm in which `b` is declared: l1 for entropy (Pinsker, on the simplex), l2 otherwise.
    pub fn convexity_norm(&self) -> Norm {
        match self {
            AuxiliaryFunction::NegativeEntropy => Norm::L1,
            AuxiliaryFunction::Additive(parts, _) if parts.iter().any(|k| k.convexity_norm() == Norm::L1) => Norm::L1,
            _ => Norm::Euclidean,
        }
    }

    /// Lipschitz constant of `∇K`; `None` stands for +∞ (entropy).
    pub fn gradient_lipschitz(&self) -> Option<T> {
        match self {
            AuxiliaryFunction::Quadratic => Some(T::one()),
            AuxiliaryFunction::WeightedQuadratic(d) => Some(d.iter().copied().fold(T::zero(), T::max)),
            AuxiliaryFunction::NegativeEntropy => None,
            AuxiliaryFunction::Additive(parts, _) => parts
                .iter()
                .map(|k| k.gradient_lipschitz())
                .try_fold(T::zero(), |m, l| l.map(|l| m.max(l))),
        }
    }

    pub fn is_entropy_based(&self) -> bool {
        match self {
            AuxiliaryFunction::NegativeEntropy => true,
            AuxiliaryFunction::Additive(parts, _) => parts.iter().any(|k| k.is_entropy_based()),
            _ => false,
        }
    }

    fn check(&self, u: &[T]) -> Result<()> {
        if let Some(d) = self.fixed_dim() {
            check_dim(d, u.len())?;
        }
        Ok(())
    }

    pub fn value_slice(&self, u: &[T]) -> Result<T> {
        self.check(u)?;
        match self {
            AuxiliaryFunction::Quadratic => Ok(T::lit(0.5) * dot(u, u)),
            AuxiliaryFunction::WeightedQuadratic(d) => {
                Ok(T::lit(0.5) * d.iter().zip(u).map(|(&di, &x)| di * x * x).sum::<T>())
            }
            AuxiliaryFunction::NegativeEntropy => {
                entropy_domain(u)?;
                Ok(u.iter().map(|&x| if x.is_zero() { T::zero() } else { x * floored_ln(x) }).sum())
            }
            AuxiliaryFunction::Additive(parts, p) => {
                let mut total = T::zero();
                for (k, r) in parts.iter().zip(p.blocks()) {
                    total += k.value_slice(&u[r])?;
                }
                Ok(total)
            }
        }
    }

    pub fn gradient_slice(&self, u: &[T]) -> Result<Vec<T>> {
        self.check(u)?;
        match self {
            AuxiliaryFunction::Quadratic => Ok(u.to_vec()),
            AuxiliaryFunction::WeightedQuadratic(d) => Ok(d.iter().zip(u).map(|(&di, &x)| di * x).collect()),
            AuxiliaryFunction::NegativeEntropy => {
                entropy_domain(u)?;
                Ok(u.iter().map(|&x| T::one() + floored_ln(x)).collect())
            }
            AuxiliaryFunction::Additive(parts, p) => {
                let mut g = Vec::with_capacity(u.len());
                for (k, r) in parts.iter().zip(p.blocks()) {
                    g.extend(k.gradient_slice(&u[r])?);
                }
                Ok(g)
            }
        }
    }

    /// `D_K(v, u) = K(v) − K(u) − ⟨∇K(u), v − u⟩`, i.e. the Lyapunov function `ℓ_v(u)`.
    pub fn bregman_slice(&self, v: &[T], u: &[T]) -> Result<T> {
        check_dim(v.len(), u.len())?;
        self.check(u)?;
        match self {
            AuxiliaryFunction::Quadratic => {
                Ok(T::lit(0.5) * v.iter().zip(u).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>())
            }
            AuxiliaryFunction::WeightedQuadratic(d) => Ok(T::lit(0.5)
                * d.iter().zip(v.iter().zip(u)).map(|(&di, (&a, &b))| di * (a - b) * (a - b)).sum::<T>()),
            AuxiliaryFunction::NegativeEntropy => {
                entropy_domain(v)?;
                entropy_domain(u)?;
                // Σ v log(v/u) − v + u, evaluated termwise to keep it non-negative under rounding.
                Ok(v.iter()
                    .zip(u)
                    .map(|(&a, &b)| {
                        let log_ratio = if a.is_zero() { T::zero() } else { a * (floored_ln(a) - floored_ln(b)) };
                        (log_ratio - a + b).max(T::zero())
                    })
                    .sum())
            }
            AuxiliaryFunction::Additive(parts, p) => {
                let mut total = T::zero();
                for (k, r) in parts.iter().zip(p.blocks()) {
                    total += k.bregman_slice(&v[r.clone()], &u[r])?;
                }
                Ok(total)
            }
        }
    }

    /// Restriction to each block of an additive `K`.
    pub fn blocks(&self) -> Option<(&[AuxiliaryFunction<T>], &BlockPartition)> {
        match self {
            AuxiliaryFunction::Additive(parts, p) => Some((parts, p)),
            _ => None,
        }
    }
}

fn entropy_domain<T: Scalar>(u: &[T]) -> Result<()> {
    match u.iter().position(|x| !(*x >= T::zero()) || !x.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::DomainViolation(format!(
            "negative entropy needs non-negative entries, u[{i}] = {}",
            u[i]
        ))),
    }
}

/// `ln(max(x, tiny))`; guards underflowed entries.
fn floored_ln<T: Scalar>(x: T) -> T {
    let floor = T::lit(1e-300).max(T::min_positive_value());
    x.max(floor).ln()
}

/// `K(u)`
pub fn k_value<T: Scalar>(k: &AuxiliaryFunction<T>, u: &Vector<T>) -> Result<T> {
    k.value_slice(u.as_slice())
}

/// `∇K(u)`
pub fn k_gradient<T: Scalar>(k: &AuxiliaryFunction<T>, u: &Vector<T>) -> Result<DualVector<T>> {
    Ok(DualVector::raw(k.gradient_slice(u.as_slice())?, u.norm_tag()))
}

/// `D_K(v, u)`
pub fn bregman<T: Scalar>(k: &AuxiliaryFunction<T>, v: &Vector<T>, u: &Vector<T>) -> Result<T> {
    k.bregman_slice(v.as_slice(), u.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::FeasibleSet;
    use crate::rng::{stream, uniform};

    fn v(x: &[f64]) -> Vector<f64> {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn values() {
        assert_eq!(k_value(&AuxiliaryFunction::Quadratic, &v(&[3.0, 4.0])).unwrap(), 12.5);
        let e = k_value(&AuxiliaryFunction::NegativeEntropy, &v(&[0.5, 0.5])).unwrap();
        assert!((e + 2f64.ln()).abs() < 1e-15);
        let w = AuxiliaryFunction::weighted_quadratic(vec![2.0, 3.0]).unwrap();
        assert_eq!(k_value(&w, &v(&[1.0, 1.0])).unwrap(), 2.5);
    }

    #[test]
    fn gradients() {
        assert_eq!(k_gradient(&AuxiliaryFunction::Quadratic, &v(&[1.5, -2.0])).unwrap().as_slice(), &[1.5, -2.0]);
        let g = k_gradient(&AuxiliaryFunction::NegativeEntropy, &v(&[0.5, 0.5])).unwrap();
        assert_eq!(g.as_slice(), &[1.0 + 0.5f64.ln(); 2]);
        let w = AuxiliaryFunction::weighted_quadratic(vec![2.0, 3.0]).unwrap();
        assert_eq!(k_gradient(&w, &v(&[1.0, 1.0])).unwrap().as_slice(), &[2.0, 3.0]);
    }

    #[test]
    fn bregman_examples() {
        let q = AuxiliaryFunction::Quadratic;
        assert_eq!(bregman(&q, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), 0.5);
        for k in [AuxiliaryFunction::Quadratic, AuxiliaryFunction::NegativeEntropy] {
            assert_eq!(bregman(&k, &v(&[0.3, 0.7]), &v(&[0.3, 0.7])).unwrap(), 0.0);
        }
        // KL(v‖u) evaluated directly.
        let kl = 0.25 * (0.25f64 / 0.5).ln() + 0.75 * (0.75f64 / 0.5).ln();
        let b = bregman(&AuxiliaryFunction::NegativeEntropy, &v(&[0.25, 0.75]), &v(&[0.5, 0.5])).unwrap();
        assert!((b - kl).abs() < 1e-15);
        assert!((b - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn entropy_domain_violation() {
        let e = AuxiliaryFunction::NegativeEntropy;
        assert!(matches!(k_value(&e, &v(&[-0.1, 1.1])), Err(Error::DomainViolation(_))));
        assert!(matches!(k_gradient(&e, &v(&[-0.1, 1.1])), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn declared_constants() {
        assert_eq!(AuxiliaryFunction::<f64>::Quadratic.strong_convexity(), 1.0);
        let w = AuxiliaryFunction::weighted_quadratic(vec![2.0, 0.5, 3.0]).unwrap();
        assert_eq!(w.strong_convexity(), 0.5);
        assert_eq!(w.gradient_lipschitz(), Some(3.0));
        assert_eq!(AuxiliaryFunction::<f64>::NegativeEntropy.gradient_lipschitz(), None);
        assert_eq!(AuxiliaryFunction::<f64>::NegativeEntropy.convexity_norm(), Norm::L1);
    }

    #[test]
    fn additive_bregman_is_sum_of_blocks() {
        let p = BlockPartition::new(&[2, 3]).unwrap();
        let parts = vec![
            AuxiliaryFunction::weighted_quadratic(vec![1.5, 2.0]).unwrap(),
            AuxiliaryFunction::NegativeEntropy,
        ];
        let k = AuxiliaryFunction::additive(parts.clone(), p.clone()).unwrap();
        let mut rng = stream(4, 0);
        for _ in 0..200 {
            let a: Vec<f64> = (0..5).map(|_| uniform(&mut rng, 0.01, 2.0)).collect();
            let b: Vec<f64> = (0..5).map(|_| uniform(&mut rng, 0.01, 2.0)).collect();
            let total = k.bregman_slice(&a, &b).unwrap();
            let parts_sum = parts[0].bregman_slice(&a[0..2], &b[0..2]).unwrap()
                + parts[1].bregman_slice(&a[2..5], &b[2..5]).unwrap();
            assert_eq!(total, parts_sum);
        }
    }

    #[test]
    fn bregman_identity_of_indiscernibles() {
        let k = AuxiliaryFunction::NegativeEntropy;
        let s = FeasibleSet::<f64>::simplex(4).unwrap();
        let mut rng = stream(12, 0);
        for _ in 0..1000 {
            let a = s.sample_point(&mut rng, 1.0);
            let b = s.sample_point(&mut rng, 1.0);
            assert!(bregman(&k, &a, &b).unwrap() >= 0.0);
            assert!(bregman(&k, &a, &a).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn mismatched_additive_rejected() {
        let p = BlockPartition::new(&[2, 3]).unwrap();
        assert!(AuxiliaryFunction::<f64>::additive(vec![AuxiliaryFunction::Quadratic], p.clone()).is_err());
        let bad = AuxiliaryFunction::weighted_quadratic(vec![1.0; 3]).unwrap();
        assert!(AuxiliaryFunction::additive(vec![bad, AuxiliaryFunction::Quadratic], p).is_err());
    }

    #[test]
    fn additive_l1_modulus_combines_blocks() {
        let p = BlockPartition::new(&[2, 3]).unwrap();
        let two_simplices = AuxiliaryFunction::<f64>::additive(
            vec![AuxiliaryFunction::NegativeEntropy, AuxiliaryFunction::NegativeEntropy],
            p.clone(),
        )
        .unwrap();
        assert_eq!(two_simplices.convexity_norm(), Norm::L1);
        assert!((two_simplices.strong_convexity() - 0.5).abs() < 1e-15);
        let mixed = AuxiliaryFunction::<f64>::additive(
            vec![AuxiliaryFunction::Quadratic, AuxiliaryFunction::NegativeEntropy],
            p.clone(),
        )
        .unwrap();
        assert!((mixed.strong_convexity() - 1.0 / 3.0).abs() < 1e-15);
        let euclid = AuxiliaryFunction::<f64>::additive(
            vec![AuxiliaryFunction::weighted_quadratic(vec![2.0, 3.0]).unwrap(), AuxiliaryFunction::Quadratic],
            p,
        )
        .unwrap();
        assert_eq!(euclid.convexity_norm(), Norm::Euclidean);
        assert_eq!(euclid.strong_convexity(), 1.0);
        // l1 bound is tight: Δ split evenly between two simplices
        let a = [0.6f64, 0.4, 0.2, 0.3, 0.5];
        let b = [0.5, 0.5, 0.3, 0.3, 0.4];
        let dist: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        let d = two_simplices.bregman_slice(&a, &b).unwrap();
        assert!(d >= 0.25 * dist * dist);
    }
}
