//! Admissible sets and their Euclidean projections.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, mat_mul, mat_vec, transpose, Matrix};
use crate::partition::BlockPartition;
use crate::rng::{normal_vec, uniform};
use crate::scalar::Scalar;
use crate::vector::{check_dim, check_finite, Norm, Vector};

/// Non-empty closed convex subset of ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet<T> {
    WholeSpace { dim: usize },
    Box { lower: Vec<T>, upper: Vec<T> },
    Ball { center: Vec<T>, radius: T },
    /// Unit probability simplex.
    Simplex { dim: usize },
    /// `{x : A x = b}` with `A` of full row rank.
    Affine(AffineSet<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSet<T> {
    a: Matrix<T>,
    b: Vec<T>,
    gram_factor: Matrix<T>,
}

impl<T: Scalar> FeasibleSet<T> {
    pub fn whole_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InfeasibleConstruction("dimension must be at least 1".into()));
        }
        Ok(FeasibleSet::WholeSpace { dim })
    }

    pub fn new_box(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InfeasibleConstruction("box bounds must have equal positive length".into()));
        }
        if lower.iter().chain(&upper).any(|v| v.is_nan()) {
            return Err(Error::InfeasibleConstruction("NaN box bound".into()));
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
            return Err(Error::InfeasibleConstruction(format!("lower > upper at coordinate {i}")));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InfeasibleConstruction("dimension must be at least 1".into()));
        }
        check_finite(&center, "ball center").map_err(|e| Error::InfeasibleConstruction(e.to_string()))?;
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::InfeasibleConstruction("ball radius must be finite and non-negative".into()));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InfeasibleConstruction("dimension must be at least 1".into()));
        }
        Ok(FeasibleSet::Simplex { dim })
    }

    /// Affine subspace `{x : A x = b}`. Rank-deficient `A` is rejected.
    pub fn affine(a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        let d = a.first().map(|r| r.len()).unwrap_or(0);
        if a.is_empty() || d == 0 || a.iter().any(|r| r.len() != d) || b.len() != a.len() {
            return Err(Error::InfeasibleConstruction("malformed affine constraint".into()));
        }
        for row in &a {
            check_finite(row, "affine matrix").map_err(|e| Error::InfeasibleConstruction(e.to_string()))?;
        }
        let gram = mat_mul(&a, &transpose(&a));
        let gram_factor = cholesky(&gram)
            .ok_or_else(|| Error::InfeasibleConstruction("affine constraint matrix lacks full row rank".into()))?;
        Ok(FeasibleSet::Affine(AffineSet { a, b, gram_factor }))
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::WholeSpace { dim } | FeasibleSet::Simplex { dim } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Affine(s) => s.a[0].len(),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, FeasibleSet::WholeSpace { .. })
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            FeasibleSet::WholeSpace { .. } | FeasibleSet::Affine(_) => false,
            FeasibleSet::Box { lower, upper } => lower.iter().chain(upper).all(|v| v.is_finite()),
            FeasibleSet::Ball { .. } | FeasibleSet::Simplex { .. } => true,
        }
    }

    /// Euclidean metric projection. Points already in the set (to rounding) are returned unchanged,
    /// so the map is exactly idempotent.
    pub fn project(&self, u: &Vector<T>) -> Result<Vector<T>> {
        check_dim(self.dim(), u.dim())?;
        let x = u.as_slice();
        let out = match self {
            FeasibleSet::WholeSpace { .. } => return Ok(u.clone()),
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&l, &h))| v.max(l).min(h))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let diff: Vec<T> = x.iter().zip(center).map(|(&v, &c)| v - c).collect();
                let r = Norm::Euclidean.eval(&diff);
                if r <= *radius * (T::one() + T::lit(4.0) * T::epsilon()) {
                    return Ok(u.clone());
                }
                let s = *radius / r;
                diff.iter().zip(center).map(|(&v, &c)| c + v * s).collect()
            }
            FeasibleSet::Simplex { dim } => {
                let sum: T = x.iter().copied().sum();
                let slack = T::lit(4.0) * T::epsilon() * T::from_count(*dim);
                if x.iter().all(|&v| v >= T::zero()) && (sum - T::one()).abs() <= slack {
                    return Ok(u.clone());
                }
                project_simplex(x)
            }
            FeasibleSet::Affine(s) => {
                let (mut current, mut moved) = (x.to_vec(), false);
                // one correction plus up to two refinement passes
                for _ in 0..3 {
                    let residual: Vec<T> = mat_vec(&s.a, &current).iter().zip(&s.b).map(|(&ax, &b)| ax - b).collect();
                    let on_plane = residual.iter().zip(s.a.iter().zip(&s.b)).all(|(&r, (row, &b))| {
                        let magnitude: T = row.iter().zip(&current).map(|(&a, &v)| (a * v).abs()).sum::<T>() + b.abs();
                        r.abs() <= T::lit(64.0) * T::epsilon() * magnitude
                    });
                    if on_plane {
                        break;
                    }
                    let lambda = cholesky_solve(&s.gram_factor, &residual);
                    let correction = mat_vec(&transpose(&s.a), &lambda);
                    current.iter_mut().zip(&correction).for_each(|(v, &c)| *v -= c);
                    moved = true;
                }
                if !moved {
                    return Ok(u.clone());
                }
                current
            }
        };
        Ok(Vector::raw(out, u.norm_tag()))
    }

    /// Euclidean distance to the set.
    pub fn distance(&self, u: &Vector<T>) -> Result<T> {
        Ok(self.project(u)?.euclidean_distance(u))
    }

    pub fn contains(&self, u: &Vector<T>, tol: T) -> Result<bool> {
        Ok(self.distance(u)? <= tol)
    }

    /// Errors with [`Error::Infeasible`] when `u` is farther than the feasibility tolerance.
    pub fn require(&self, u: &Vector<T>) -> Result<()> {
        let d = self.distance(u)?;
        if d <= T::feasibility_tol() {
            Ok(())
        } else {
            Err(Error::Infeasible { distance: d.to_f64_lossy() })
        }
    }

    /// Random feasible point; unbounded directions are drawn from `[-scale, scale]`.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, scale: T) -> Vector<T> {
        let d = self.dim();
        let out = match self {
            FeasibleSet::WholeSpace { .. } => (0..d).map(|_| uniform(rng, -scale, scale)).collect(),
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &h)| uniform(rng, l.max(-scale), h.min(scale).max(l.max(-scale))))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                let z: Vec<T> = normal_vec(rng, d);
                let n = Norm::Euclidean.eval(&z);
                let r = *radius * uniform(rng, T::zero(), T::one()).powf(T::one() / T::from_count(d));
                z.iter().zip(center).map(|(&zi, &c)| c + zi / n * r).collect()
            }
            FeasibleSet::Simplex { .. } => {
                let e: Vec<T> = (0..d).map(|_| -uniform(rng, T::epsilon(), T::one()).ln()).collect();
                let s: T = e.iter().copied().sum();
                e.into_iter().map(|v| v / s).collect()
            }
            FeasibleSet::Affine(_) => {
                let z = Vector::raw((0..d).map(|_| uniform(rng, -scale, scale)).collect(), Norm::Euclidean);
                return self.project(&z).expect("dimension matches");
            }
        };
        Vector::raw(out, Norm::Euclidean)
    }

    /// Splits a product-structured set along `partition`.
    pub fn split(&self, partition: &BlockPartition) -> Result<Vec<FeasibleSet<T>>> {
        check_dim(self.dim(), partition.dim())?;
        match self {
            FeasibleSet::WholeSpace { .. } => Ok(partition.blocks().map(|r| FeasibleSet::WholeSpace { dim: r.len() }).collect()),
            FeasibleSet::Box { lower, upper } => Ok(partition
                .blocks()
                .map(|r| FeasibleSet::Box {
                    lower: lower[r.clone()].to_vec(),
                    upper: upper[r].to_vec(),
                })
                .collect()),
            _ if partition.len() == 1 => Ok(vec![self.clone()]),
            _ => Err(Error::BlockMismatch("feasible set is not a product over the block partition".into())),
        }
    }
}

/// Sort-based Euclidean projection onto the unit simplex.
pub(crate) fn project_simplex<T: Scalar>(y: &[T]) -> Vec<T> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumsum = T::zero();
    let mut tau = T::zero();
    for (j, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - T::one()) / T::from_count(j + 1);
        if v - t > T::zero() {
            tau = t;
        }
    }
    y.iter().map(|&v| (v - tau).max(T::zero())).collect()
}
