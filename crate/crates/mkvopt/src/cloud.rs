//! Particle cloud state and empirical moments.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rng::RngStream;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

/// Positions of `N` particles in `R^d`. The shape is fixed at construction;
/// only coordinate values change over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    positions: Array2<f64>,
}

impl ParticleCloud {
    /// Wrap an `N x d` position array. Rejects empty clouds, zero dimension
    /// and non-finite coordinates.
    pub fn new(positions: Array2<f64>) -> Result<Self> {
        if positions.nrows() == 0 {
            return Err(Error::EmptyCloud);
        }
        if positions.ncols() == 0 {
            return Err(Error::ZeroDim);
        }
        for ((i, j), &v) in positions.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    particle: i,
                    coordinate: j,
                });
            }
        }
        Ok(Self { positions })
    }

    pub fn n_particles(&self) -> usize {
        self.positions.nrows()
    }

    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    pub fn positions(&self) -> ArrayView2<'_, f64> {
        self.positions.view()
    }

    pub fn particle(&self, i: usize) -> ArrayView1<'_, f64> {
        self.positions.row(i)
    }

    /// Replace all coordinates. The new array must have the cloud's shape and
    /// stay finite; callers that integrate in time should map numeric blow-up
    /// to a diverged-run error instead of calling this with NaNs.
    pub(crate) fn set_positions(&mut self, positions: Array2<f64>) {
        debug_assert_eq!(positions.dim(), self.positions.dim());
        self.positions = positions;
    }

    /// First particle index with a non-finite coordinate, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.positions
            .indexed_iter()
            .find(|(_, v)| !v.is_finite())
            .map(|(idx, _)| idx)
    }
}

/// Per-coordinate empirical moments of a cloud under the uniform (population)
/// convention `rho = (1/N) sum_i delta_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub mean: Array1<f64>,
    pub second_moment: Array1<f64>,
    /// `second_moment - mean^2`, clamped to `>= 0` against cancellation;
    /// downstream noise coefficients divide by it.
    pub variance: Array1<f64>,
}

/// Population moments of the cloud: `mean[j] = (1/N) sum_i x_i[j]`,
/// `m2[j] = (1/N) sum_i x_i[j]^2`, `var[j] = m2[j] - mean[j]^2` clamped at 0.
pub fn compute_moments(cloud: &ParticleCloud) -> EmpiricalMoments {
    let n = cloud.n_particles() as f64;
    let d = cloud.dim();
    let mut mean = Array1::<f64>::zeros(d);
    let mut second = Array1::<f64>::zeros(d);
    for row in cloud.positions().rows() {
        for j in 0..d {
            mean[j] += row[j];
            second[j] += row[j] * row[j];
        }
    }
    mean.mapv_inplace(|v| v / n);
    second.mapv_inplace(|v| v / n);
    let variance = Array1::from_shape_fn(d, |j| (second[j] - mean[j] * mean[j]).max(0.0));
    EmpiricalMoments {
        mean,
        second_moment: second,
        variance,
    }
}

/// Draw `n` particles i.i.d. uniform over the objective's domain box.
/// Coordinates are drawn particle-major so the layout is part of the
/// determinism contract.
pub fn init_cloud(n: usize, objective: &Objective, stream: &RngStream) -> Result<ParticleCloud> {
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    for (j, &(low, high)) in objective.domain.iter().enumerate() {
        if !(low < high) {
            return Err(Error::DegenerateDomain {
                coordinate: j,
                low,
                high,
            });
        }
    }
    let d = objective.dim;
    let mut rng = stream.rng();
    let mut positions = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..d {
            let (low, high) = objective.domain[j];
            positions[(i, j)] = rng.random_range(low..high);
        }
    }
    ParticleCloud::new(positions)
}
