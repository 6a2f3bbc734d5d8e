//! Geometric common noise: a Gaussian random field with covariance kernel
//! `k_sigma(x, y) I_d`, sampled at the particle locations.
//!
//! For a cloud `X` the field values `(G(x_1), ..., G(x_N))` form an
//! `Nd`-dimensional Gaussian with covariance `K(X) (x) I_d`, where `K` is the
//! `N x N` kernel Gram matrix. Because the Kronecker factor is the identity,
//! `(K (x) I_d)^{1/2} = K^{1/2} (x) I_d`, so a draw costs one `N x N`
//! symmetric square root plus an `N x N * N x d` product instead of an
//! `(Nd)^3` factorization.
//!
//! The square root uses a symmetric eigendecomposition with relative
//! eigenvalue clamping: Gram matrices of nearly coincident particles are
//! numerically rank-deficient, where a Cholesky factorization would fail.

use crate::cloud::ParticleCloud;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcnSpec {
    /// Gaussian covariance kernel bandwidth `sigma`.
    pub bandwidth: f64,
    /// Noise intensity.
    pub beta: f64,
    /// Eigenvalues below `eig_clamp_rel * lambda_max` are clamped to zero in
    /// the square root.
    pub eig_clamp_rel: f64,
    /// Recompute the Gram square root every this many steps. 1 is exact;
    /// larger strides reuse a stale square root as a speed/accuracy trade.
    pub sqrt_refresh_every: usize,
}

impl GcnSpec {
    pub fn new(bandwidth: f64, beta: f64) -> Self {
        Self {
            bandwidth,
            beta,
            eig_clamp_rel: 1e-10,
            sqrt_refresh_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gcn bandwidth must be > 0, got {}",
                self.bandwidth
            )));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gcn beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if self.eig_clamp_rel < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gcn eig_clamp_rel must be >= 0, got {}",
                self.eig_clamp_rel
            )));
        }
        if self.sqrt_refresh_every == 0 {
            return Err(Error::InvalidConfig(
                "gcn sqrt_refresh_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Kernel Gram matrix of a cloud together with its PSD square root.
#[derive(Debug, Clone)]
pub struct KernelGram {
    pub k: Array2<f64>,
    pub sqrt_k: Array2<f64>,
}

impl KernelGram {
    pub fn compute(cloud: &ParticleCloud, bandwidth: f64, eig_clamp_rel: f64) -> Self {
        let n = cloud.n_particles();
        let pos = cloud.positions();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            k[(i, i)] = 1.0;
            for j in (i + 1)..n {
                let mut sq = 0.0;
                for c in 0..cloud.dim() {
                    let diff = pos[(i, c)] - pos[(j, c)];
                    sq += diff * diff;
                }
                let v = (-sq / bandwidth).exp();
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        let sqrt_k = psd_sqrt(&k.view(), eig_clamp_rel).expect("Gram matrix is symmetric");
        Self { k, sqrt_k }
    }
}

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// `clamp_rel * lambda_max` (including small negatives from roundoff) are
/// set to zero. Errors if the input is not symmetric within `1e-10`
/// relative to its largest entry.
pub fn psd_sqrt(k: &ArrayView2<f64>, clamp_rel: f64) -> Result<Array2<f64>> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::InvalidConfig(format!(
            "psd_sqrt expects a square matrix, got {}x{}",
            n,
            k.ncols()
        )));
    }
    let scale = k.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1.0);
    let mut max_asym = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asym = max_asym.max((k[(i, j)] - k[(j, i)]).abs());
        }
    }
    if max_asym > 1e-10 * scale {
        return Err(Error::NotSymmetric {
            max_asymmetry: max_asym,
        });
    }

    let m = DMatrix::from_fn(n, n, |i, j| k[(i, j)]);
    let eig = m.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v));
    let cutoff = clamp_rel * lambda_max;
    let sqrt_vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l <= cutoff { 0.0 } else { l.sqrt() })
        .collect();
    // Q sqrt(Lambda) Q^T, symmetrized against roundoff
    let q = &eig.eigenvectors;
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (l, s) in sqrt_vals.iter().enumerate() {
                acc += q[(i, l)] * s * q[(j, l)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    Ok(out)
}

/// Displacement `sqrt(dt) * beta * (K^{1/2} Xi)` for a given `N x d` draw.
pub fn gcn_displacement(gram: &KernelGram, beta: f64, dt: f64, xi: &ArrayView2<f64>) -> Array2<f64> {
    let scale = dt.sqrt() * beta;
    let mut out = gram.sqrt_k.dot(xi);
    out.mapv_inplace(|v| v * scale);
    out
}

/// Draw the common field increment for one step: an `N x d` standard Gaussian
/// `Xi` from the common-noise stream (row-major: particle, then coordinate),
/// then `sqrt(dt) * beta * K^{1/2} Xi`.
pub fn sample_gcn<R: Rng>(
    cloud: &ParticleCloud,
    spec: &GcnSpec,
    dt: f64,
    rng: &mut R,
) -> Array2<f64> {
    let gram = KernelGram::compute(cloud, spec.bandwidth, spec.eig_clamp_rel);
    let xi = draw_field(cloud.n_particles(), cloud.dim(), rng);
    gcn_displacement(&gram, spec.beta, dt, &xi.view())
}

/// Standard Gaussian `N x d` draw in the fixed row-major order.
pub fn draw_field<R: Rng>(n: usize, d: usize, rng: &mut R) -> Array2<f64> {
    let mut xi = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..d {
            xi[(i, j)] = rng.sample(StandardNormal);
        }
    }
    xi
}

/// Which bandwidth limit of the field to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcnLimitMode {
    /// `sigma -> infinity`: the field degenerates to one shared Gaussian
    /// shift (the mean-forcing limit).
    LargeSigma,
    /// `sigma -> 0`: field values at distinct particles decorrelate
    /// (white-noise limit).
    SmallSigma,
}

#[derive(Debug, Clone)]
pub struct GcnLimitReport {
    pub mode: GcnLimitMode,
    pub bandwidth: f64,
    pub n_samples: usize,
    /// Large sigma: max over draws of the pairwise particle-displacement
    /// difference, normalized by the magnitude of the whole displacement
    /// vector. Small sigma: max absolute cross-particle displacement
    /// correlation.
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Empirical check of the two bandwidth limits on a fixed cloud.
pub fn gcn_limit_check<R: Rng>(
    mode: GcnLimitMode,
    cloud: &ParticleCloud,
    dt: f64,
    n_samples: usize,
    rng: &mut R,
) -> GcnLimitReport {
    let (n, d) = (cloud.n_particles(), cloud.dim());
    let bandwidth = match mode {
        GcnLimitMode::LargeSigma => 1e8,
        GcnLimitMode::SmallSigma => 1e-8,
    };
    let gram = KernelGram::compute(cloud, bandwidth, 1e-10);

    match mode {
        GcnLimitMode::LargeSigma => {
            let threshold = 1e-3;
            let mut worst = 0.0_f64;
            for _ in 0..n_samples {
                let xi = draw_field(n, d, rng);
                let disp = gcn_displacement(&gram, 1.0, dt, &xi.view());
                // magnitude of the whole Nd displacement vector
                let magnitude = disp.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n < 2 || magnitude == 0.0 {
                    continue;
                }
                for a in 0..n {
                    for b in (a + 1)..n {
                        let diff: f64 = (0..d)
                            .map(|j| {
                                let delta = disp[(a, j)] - disp[(b, j)];
                                delta * delta
                            })
                            .sum::<f64>()
                            .sqrt();
                        worst = worst.max(diff / magnitude);
                    }
                }
            }
            GcnLimitReport {
                mode,
                bandwidth,
                n_samples,
                statistic: worst,
                threshold,
                pass: worst < threshold,
            }
        }
        GcnLimitMode::SmallSigma => {
            let threshold = 0.05;
            // per-coordinate displacement samples per particle
            let mut samples = vec![Vec::with_capacity(n_samples); n * d];
            for _ in 0..n_samples {
                let xi = draw_field(n, d, rng);
                let disp = gcn_displacement(&gram, 1.0, dt, &xi.view());
                for i in 0..n {
                    for j in 0..d {
                        samples[i * d + j].push(disp[(i, j)]);
                    }
                }
            }
            let mut worst = 0.0_f64;
            for a in 0..n {
                for b in (a + 1)..n {
                    for j in 0..d {
                        let corr = correlation(&samples[a * d + j], &samples[b * d + j]);
                        worst = worst.max(corr.abs());
                    }
                }
            }
            GcnLimitReport {
                mode,
                bandwidth,
                n_samples,
                statistic: worst,
                threshold,
                pass: worst < threshold || n < 2,
            }
        }
    }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va.sqrt() * vb.sqrt())
    }
}
