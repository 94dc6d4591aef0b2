//! Primal and dual vectors on a finite-dimensional space with a selectable norm.

use std::ops::{Index, Range};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Norm in force on the primal space. The dual space carries the dual norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Norm {
    #[default]
    Euclidean,
    L1,
    Linf,
}

impl Norm {
    pub fn dual(self) -> Norm {
        match self {
            Norm::Euclidean => Norm::Euclidean,
            Norm::L1 => Norm::Linf,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn eval<T: Scalar>(self, x: &[T]) -> T {
        match self {
            Norm::Euclidean => x.iter().map(|&v| v * v).sum::<T>().sqrt(),
            Norm::L1 => x.iter().map(|v| v.abs()).sum(),
            Norm::Linf => x.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        }
    }
}

pub(crate) fn check_finite<T: Scalar>(x: &[T], what: &str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue(what.to_string()))
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Point of the primal space.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T> {
    entries: Vec<T>,
    norm: Norm,
}

/// Element of the dual space, paired with primal vectors by the sum of products.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector<T> {
    entries: Vec<T>,
    /// Norm of the primal space this vector acts on.
    norm: Norm,
}

macro_rules! shared_impl {
    ($ty:ident) => {
        impl<T: Scalar> $ty<T> {
            /// Validated constructor: non-empty, all entries finite.
            pub fn new(entries: Vec<T>, norm: Norm) -> Result<Self> {
                if entries.is_empty() {
                    return Err(Error::InvalidArgument("dimension must be at least 1".into()));
                }
                check_finite(&entries, stringify!($ty))?;
                Ok(Self { entries, norm })
            }

            /// Euclidean-tagged vector from raw entries. Panics on non-finite input.
            pub fn from_vec(entries: Vec<T>) -> Self {
                Self::new(entries, Norm::Euclidean).expect("finite, non-empty entries")
            }

            pub(crate) fn raw(entries: Vec<T>, norm: Norm) -> Self {
                Self { entries, norm }
            }

            pub fn zeros(dim: usize, norm: Norm) -> Self {
                Self {
                    entries: vec![T::zero(); dim],
                    norm,
                }
            }

            pub fn dim(&self) -> usize {
                self.entries.len()
            }

            pub fn norm_tag(&self) -> Norm {
                self.norm
            }

            pub fn with_norm(mut self, norm: Norm) -> Self {
                self.norm = norm;
                self
            }

            pub fn as_slice(&self) -> &[T] {
                &self.entries
            }

            pub fn into_vec(self) -> Vec<T> {
                self.entries
            }

            pub fn is_finite(&self) -> bool {
                self.entries.iter().all(|v| v.is_finite())
            }

            pub fn slice(&self, range: Range<usize>) -> Self {
                Self {
                    entries: self.entries[range].to_vec(),
                    norm: self.norm,
                }
            }

            /// Concatenates blocks in order.
            pub fn concat(blocks: &[Self]) -> Self {
                let norm = blocks.first().map(|b| b.norm).unwrap_or_default();
                let entries = blocks.iter().flat_map(|b| b.entries.iter().copied()).collect();
                Self { entries, norm }
            }

            pub fn scaled(&self, s: T) -> Self {
                Self::raw(self.entries.iter().map(|&v| v * s).collect(), self.norm)
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                check_dim(self.dim(), other.dim())?;
                Ok(Self::raw(
                    self.entries.iter().zip(&other.entries).map(|(&a, &b)| a + b).collect(),
                    self.norm,
                ))
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                check_dim(self.dim(), other.dim())?;
                Ok(Self::raw(
                    self.entries.iter().zip(&other.entries).map(|(&a, &b)| a - b).collect(),
                    self.norm,
                ))
            }

            /// Largest absolute entry difference.
            pub fn max_abs_diff(&self, other: &Self) -> T {
                self.entries
                    .iter()
                    .zip(&other.entries)
                    .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
            }
        }

        impl<T> Index<usize> for $ty<T> {
            type Output = T;
            fn index(&self, i: usize) -> &T {
                &self.entries[i]
            }
        }
    };
}

shared_impl!(Vector);
shared_impl!(DualVector);

impl<T: Scalar> Vector<T> {
    /// ‖u‖ in the tagged norm.
    pub fn norm(&self) -> T {
        self.norm.eval(&self.entries)
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.norm())
    }

    pub fn euclidean_distance(&self, other: &Self) -> T {
        Norm::Euclidean.eval(
            &self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<_>>(),
        )
    }

    /// `self + s·d`, a primal step along a dual direction through the standard identification.
    pub fn step(&self, s: T, d: &DualVector<T>) -> Result<Self> {
        check_dim(self.dim(), d.dim())?;
        Ok(Self::raw(
            self.entries.iter().zip(d.as_slice()).map(|(&u, &g)| u + s * g).collect(),
            self.norm,
        ))
    }
}

impl<T: Scalar> DualVector<T> {
    /// ‖g‖_* for the dual of the tagged primal norm.
    pub fn dual_norm(&self) -> T {
        self.norm.dual().eval(&self.entries)
    }

    /// ⟨g, u⟩.
    pub fn pair(&self, u: &Vector<T>) -> Result<T> {
        check_dim(self.dim(), u.dim())?;
        Ok(dot(&self.entries, u.as_slice()))
    }
}
