//! Baseline interacting drift/diffusion families.
//!
//! Each family maps a particle position and the frozen pre-step empirical
//! measure to a drift vector and an isotropic diffusion scale:
//!
//! * MSGD: `(-grad V, 0)`
//! * Langevin: `(-grad V, sqrt(2 kappa))`
//! * CBO: drift toward the Gibbs-weighted consensus point, diffusion
//!   proportional to the distance from it
//! * SBS: kernel-weighted gradient attraction plus repulsive kernel gradients
//!
//! Measure-dependent quantities (consensus point, per-particle objective
//! values and gradients) are collected once per step into a
//! [`MeasureSnapshot`]; coefficient evaluation never touches a cloud that is
//! being mutated.

use crate::cloud::ParticleCloud;
use crate::error::{Error, Result};
use crate::objectives::Objective;
use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    /// Temperature `kappa`; diffusion is `sqrt(2 kappa) I_d`.
    pub kappa: f64,
}

impl Default for LangevinConfig {
    fn default() -> Self {
        Self { kappa: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CboConfig {
    /// Drift gain toward the consensus point.
    pub lambda: f64,
    /// Diffusion gain; the particle's Brownian increment is scaled by
    /// `gamma * ||x - v_f||` (isotropic formulation).
    pub gamma: f64,
    /// Gibbs weight exponent in the consensus point.
    pub alpha: f64,
    /// Width of the logistic approximation of the Heaviside gate.
    pub heaviside_eps: f64,
}

impl Default for CboConfig {
    fn default() -> Self {
        // benchmark-table settings; `alpha`/`gamma` follow the beta=1,
        // sigma=5.1 convention of the CBO literature
        Self {
            lambda: 1.0,
            gamma: 5.1,
            alpha: 1.0,
            heaviside_eps: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbsConfig {
    /// Temperature weighting the repulsive kernel-gradient term.
    pub kappa: f64,
    /// Gaussian kernel bandwidth; the benchmark default is `1/N^2`.
    pub bandwidth: f64,
}

impl SbsConfig {
    /// Default used by the benchmark harness: `kappa = 1`, bandwidth `1/N^2`.
    pub fn for_particles(n: usize) -> Self {
        Self {
            kappa: 1.0,
            bandwidth: 1.0 / (n as f64 * n as f64),
        }
    }
}

/// Which drift/diffusion family a run uses, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DynamicsSpec {
    Msgd,
    Langevin(LangevinConfig),
    Cbo(CboConfig),
    Sbs(SbsConfig),
}

impl DynamicsSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            DynamicsSpec::Msgd => "msgd",
            DynamicsSpec::Langevin(_) => "langevin",
            DynamicsSpec::Cbo(_) => "cbo",
            DynamicsSpec::Sbs(_) => "sbs",
        }
    }

    pub fn needs_gradients(&self) -> bool {
        !matches!(self, DynamicsSpec::Cbo(_))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match self {
            DynamicsSpec::Msgd => Ok(()),
            DynamicsSpec::Langevin(c) => {
                if c.kappa > 0.0 {
                    Ok(())
                } else {
                    bad(format!("langevin kappa must be > 0, got {}", c.kappa))
                }
            }
            DynamicsSpec::Cbo(c) => {
                if !(c.lambda > 0.0) {
                    return bad(format!("cbo lambda must be > 0, got {}", c.lambda));
                }
                if c.gamma < 0.0 {
                    return bad(format!("cbo gamma must be >= 0, got {}", c.gamma));
                }
                if !(c.alpha > 0.0) {
                    return bad(format!("cbo alpha must be > 0, got {}", c.alpha));
                }
                if !(c.heaviside_eps > 0.0) {
                    return bad(format!(
                        "cbo heaviside_eps must be > 0, got {}",
                        c.heaviside_eps
                    ));
                }
                Ok(())
            }
            DynamicsSpec::Sbs(c) => {
                if !(c.kappa > 0.0) {
                    return bad(format!("sbs kappa must be > 0, got {}", c.kappa));
                }
                if !(c.bandwidth > 0.0) {
                    return bad(format!("sbs bandwidth must be > 0, got {}", c.bandwidth));
                }
                Ok(())
            }
        }
    }
}

/// Gaussian kernel `k(x, y) = exp(-||x - y||^2 / sigma)` and its gradient in
/// the first argument, `-(2/sigma) (x - y) k(x, y)`.
pub fn gaussian_kernel(x: ArrayView1<f64>, y: ArrayView1<f64>, sigma: f64) -> (f64, Array1<f64>) {
    debug_assert!(sigma > 0.0);
    let mut sq = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let diff = a - b;
        sq += diff * diff;
    }
    let value = (-sq / sigma).exp();
    let grad = Array1::from_shape_fn(x.len(), |j| -(2.0 / sigma) * (x[j] - y[j]) * value);
    (value, grad)
}

/// Gibbs-weighted consensus point
/// `v_f = sum_i x_i w_i / sum_i w_i`, `w_i = exp(-alpha (f_i - min_j f_j))`.
/// The min-shift is algebraically exact and keeps the weights finite for any
/// `alpha` and objective scale.
pub fn cbo_consensus(cloud: &ParticleCloud, fvals: &[f64], alpha: f64) -> Array1<f64> {
    debug_assert_eq!(fvals.len(), cloud.n_particles());
    let fmin = fvals.iter().copied().fold(f64::INFINITY, f64::min);
    let d = cloud.dim();
    let mut num = Array1::zeros(d);
    let mut den = 0.0;
    for (i, row) in cloud.positions().rows().into_iter().enumerate() {
        let w = (-alpha * (fvals[i] - fmin)).exp();
        den += w;
        for j in 0..d {
            num[j] += w * row[j];
        }
    }
    num.mapv_inplace(|v| v / den);
    num
}

/// Consensus point plus its objective value, frozen once per step.
#[derive(Debug, Clone)]
pub struct CboSnapshot {
    pub consensus: Array1<f64>,
    pub f_consensus: f64,
}

impl CboSnapshot {
    pub fn compute(
        cloud: &ParticleCloud,
        fvals: &[f64],
        objective: &Objective,
        cfg: &CboConfig,
    ) -> Self {
        let consensus = cbo_consensus(cloud, fvals, cfg.alpha);
        let f_consensus = objective.eval(consensus.as_slice().expect("contiguous"));
        Self {
            consensus,
            f_consensus,
        }
    }
}

/// Logistic approximation of the Heaviside step, `H(0) = 1/2`.
fn heaviside_smooth(z: f64, eps: f64) -> f64 {
    1.0 / (1.0 + (-z / eps).exp())
}

/// CBO drift `-lambda (x - v_f) H^eps(f(x) - f(v_f))` and isotropic diffusion
/// scale `gamma ||x - v_f||`.
pub fn cbo_coefficients(
    x: ArrayView1<f64>,
    fx: f64,
    snapshot: &CboSnapshot,
    cfg: &CboConfig,
) -> (Array1<f64>, f64) {
    let gate = heaviside_smooth(fx - snapshot.f_consensus, cfg.heaviside_eps);
    let d = x.len();
    let mut drift = Array1::zeros(d);
    let mut dist_sq = 0.0;
    for j in 0..d {
        let delta = x[j] - snapshot.consensus[j];
        dist_sq += delta * delta;
        drift[j] = -cfg.lambda * delta * gate;
    }
    (drift, cfg.gamma * dist_sq.sqrt())
}

/// SBS drift over the frozen cloud, with precomputed per-particle gradients:
/// `(1/N) sum_i [ -k(x, x_i) grad V(x_i) + kappa grad_{x_i} k(x, x_i) ]`.
/// The kernel gradient is taken in the integration variable, so the second
/// term pushes `x` away from its neighbors (the repulsion that keeps the
/// cloud from collapsing).
pub fn sbs_drift(
    x: ArrayView1<f64>,
    cloud: &ParticleCloud,
    grads: &Array2<f64>,
    cfg: &SbsConfig,
) -> Array1<f64> {
    let n = cloud.n_particles();
    let d = cloud.dim();
    debug_assert_eq!(grads.dim(), (n, d));
    let mut drift = Array1::zeros(d);
    for (i, xi) in cloud.positions().rows().into_iter().enumerate() {
        let mut sq = 0.0;
        for j in 0..d {
            let diff = x[j] - xi[j];
            sq += diff * diff;
        }
        let k = (-sq / cfg.bandwidth).exp();
        let repulse = cfg.kappa * (2.0 / cfg.bandwidth) * k;
        for j in 0..d {
            drift[j] += -k * grads[(i, j)] + repulse * (x[j] - xi[j]);
        }
    }
    drift.mapv_inplace(|v| v / n as f64);
    drift
}

/// Measure-dependent data for one step, computed from the pre-step cloud
/// before any particle moves.
#[derive(Debug)]
pub struct MeasureSnapshot<'a> {
    pub fvals: &'a [f64],
    pub grads: Option<&'a Array2<f64>>,
    pub cbo: Option<CboSnapshot>,
}

impl<'a> MeasureSnapshot<'a> {
    pub fn prepare(
        spec: &DynamicsSpec,
        cloud: &ParticleCloud,
        objective: &Objective,
        fvals: &'a [f64],
        grads: Option<&'a Array2<f64>>,
    ) -> Self {
        let cbo = match spec {
            DynamicsSpec::Cbo(cfg) => Some(CboSnapshot::compute(cloud, fvals, objective, cfg)),
            _ => None,
        };
        Self { fvals, grads, cbo }
    }
}

/// Dispatch to the family: returns the drift vector and the scalar diffusion
/// applied to the particle's own Brownian increment.
pub fn baseline_coefficients(
    spec: &DynamicsSpec,
    i: usize,
    x: ArrayView1<f64>,
    cloud: &ParticleCloud,
    snapshot: &MeasureSnapshot<'_>,
) -> (Array1<f64>, f64) {
    match spec {
        DynamicsSpec::Msgd => {
            let grads = snapshot.grads.expect("msgd requires gradients");
            (Array1::from_shape_fn(x.len(), |j| -grads[(i, j)]), 0.0)
        }
        DynamicsSpec::Langevin(cfg) => {
            let grads = snapshot.grads.expect("langevin requires gradients");
            (
                Array1::from_shape_fn(x.len(), |j| -grads[(i, j)]),
                (2.0 * cfg.kappa).sqrt(),
            )
        }
        DynamicsSpec::Cbo(cfg) => {
            let snap = snapshot.cbo.as_ref().expect("cbo snapshot prepared");
            cbo_coefficients(x, snapshot.fvals[i], snap, cfg)
        }
        DynamicsSpec::Sbs(cfg) => {
            let grads = snapshot.grads.expect("sbs requires gradients");
            (sbs_drift(x, cloud, grads, cfg), 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::make_objective;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn quad_grads(cloud: &ParticleCloud) -> Array2<f64> {
        // gradients of V = 0.5 ||x||^2
        cloud.positions().to_owned()
    }

    #[test]
    fn kernel_at_coincidence() {
        let x = array![1.0, -2.0];
        let (v, g) = gaussian_kernel(x.view(), x.view(), 0.7);
        assert_eq!(v, 1.0);
        assert!(g.iter().all(|&gi| gi == 0.0));
    }

    #[test]
    fn kernel_scalar_value() {
        let (v, g) = gaussian_kernel(array![0.0].view(), array![1.0].view(), 1.0);
        assert_abs_diff_eq!(v, (-1.0_f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(g[0], 2.0 * (-1.0_f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn kernel_gradient_finite_difference() {
        use rand::Rng;
        let mut rng = crate::rng::RngStream::new(2, 0).rng();
        let h = 1e-6;
        for _ in 0..50 {
            let d = 3;
            let x = Array1::from_shape_fn(d, |_| rng.random_range(-2.0..2.0_f64));
            let y = Array1::from_shape_fn(d, |_| rng.random_range(-2.0..2.0_f64));
            let sigma = rng.random_range(0.5..3.0);
            let (_, g) = gaussian_kernel(x.view(), y.view(), sigma);
            for j in 0..d {
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let fd = (gaussian_kernel(xp.view(), y.view(), sigma).0
                    - gaussian_kernel(xm.view(), y.view(), sigma).0)
                    / (2.0 * h);
                assert!(
                    (g[j] - fd).abs() / (1.0 + g[j].abs()) < 1e-7,
                    "kernel grad mismatch: {} vs {}",
                    g[j],
                    fd
                );
            }
        }
    }

    #[test]
    fn consensus_single_particle() {
        let cloud = ParticleCloud::new(array![[2.0, -3.0]]).unwrap();
        let v = cbo_consensus(&cloud, &[17.0], 5.0);
        assert_eq!(v, array![2.0, -3.0]);
    }

    #[test]
    fn consensus_tiny_alpha_is_mean() {
        let cloud = ParticleCloud::new(array![[0.0], [1.0], [5.0]]).unwrap();
        let v = cbo_consensus(&cloud, &[3.0, 1.0, 2.0], 1e-12);
        assert_abs_diff_eq!(v[0], 2.0, epsilon = 1e-9);
    }

    #[test]
    fn consensus_large_alpha_picks_argmin() {
        let cloud = ParticleCloud::new(array![[0.0], [1.0]]).unwrap();
        let v = cbo_consensus(&cloud, &[5.0, 1.0], 1e3);
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn consensus_invariant_under_fval_shift() {
        use rand::Rng;
        let mut rng = crate::rng::RngStream::new(4, 0).rng();
        for _ in 0..50 {
            let n = rng.random_range(2..20);
            let positions = Array2::from_shape_fn((n, 3), |_| rng.random_range(-5.0..5.0_f64));
            let cloud = ParticleCloud::new(positions).unwrap();
            let fvals: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let shifted: Vec<f64> = fvals.iter().map(|v| v + 123.456).collect();
            let a = cbo_consensus(&cloud, &fvals, 2.0);
            let b = cbo_consensus(&cloud, &shifted, 2.0);
            for j in 0..3 {
                assert!((a[j] - b[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn consensus_approaches_argmin_as_alpha_grows() {
        use rand::Rng;
        let mut rng = crate::rng::RngStream::new(6, 0).rng();
        for _ in 0..20 {
            let n = 12;
            let positions = Array2::from_shape_fn((n, 2), |_| rng.random_range(-3.0..3.0_f64));
            let cloud = ParticleCloud::new(positions).unwrap();
            let fvals: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
            let arg = fvals
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            let target = cloud.particle(arg);
            let mut last = f64::INFINITY;
            for alpha in [10.0, 100.0, 1000.0] {
                let v = cbo_consensus(&cloud, &fvals, alpha);
                let dist: f64 = v
                    .iter()
                    .zip(target.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!(dist <= last + 1e-12, "distance increased: {dist} > {last}");
                last = dist;
            }
        }
    }

    #[test]
    fn cbo_coefficients_at_consensus() {
        let snap = CboSnapshot {
            consensus: array![1.0, 2.0],
            f_consensus: 0.5,
        };
        let cfg = CboConfig::default();
        let (drift, scale) = cbo_coefficients(array![1.0, 2.0].view(), 0.5, &snap, &cfg);
        assert!(drift.iter().all(|&v| v == 0.0));
        assert_eq!(scale, 0.0);
    }

    #[test]
    fn cbo_coefficients_saturated_gate() {
        let snap = CboSnapshot {
            consensus: array![0.0],
            f_consensus: 0.0,
        };
        let cfg = CboConfig {
            lambda: 2.0,
            gamma: 1.0,
            alpha: 1.0,
            heaviside_eps: 1e-2,
        };
        // f(x) >> f(v_f): gate ~ 1
        let (drift, _) = cbo_coefficients(array![3.0].view(), 10.0, &snap, &cfg);
        assert_abs_diff_eq!(drift[0], -6.0, epsilon = 1e-9);
    }

    #[test]
    fn cbo_coefficients_half_gate() {
        // d=1, x=2, v_f=0, lambda=1, gamma=2, f(x)=f(v_f): drift -1, scale 4
        let snap = CboSnapshot {
            consensus: array![0.0],
            f_consensus: 7.0,
        };
        let cfg = CboConfig {
            lambda: 1.0,
            gamma: 2.0,
            alpha: 1.0,
            heaviside_eps: 1e-2,
        };
        let (drift, scale) = cbo_coefficients(array![2.0].view(), 7.0, &snap, &cfg);
        assert_abs_diff_eq!(drift[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scale, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn sbs_single_particle_is_gradient_descent() {
        let cloud = ParticleCloud::new(array![[1.5, -0.5]]).unwrap();
        let grads = quad_grads(&cloud);
        let cfg = SbsConfig {
            kappa: 1.0,
            bandwidth: 1.0,
        };
        let drift = sbs_drift(cloud.particle(0), &cloud, &grads, &cfg);
        assert_abs_diff_eq!(drift[0], -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(drift[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sbs_two_particle_hand_sum() {
        // x = x1 = 0, x2 = 1, sigma = 1, V = x^2/2, kappa = 1:
        // i=1 term vanishes (own gradient 0, repulsion 0 at coincidence);
        // i=2: -k(0,1) grad V(1) + (2/sigma) (0 - 1) k(0,1) = -3 e^-1,
        // so the drift is -3 e^-1 / 2: downhill pull plus repulsion away
        // from the neighbor at +1
        let cloud = ParticleCloud::new(array![[0.0], [1.0]]).unwrap();
        let grads = array![[0.0], [1.0]];
        let cfg = SbsConfig {
            kappa: 1.0,
            bandwidth: 1.0,
        };
        let drift = sbs_drift(cloud.particle(0), &cloud, &grads, &cfg);
        assert_abs_diff_eq!(drift[0], -1.5 * (-1.0_f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn sbs_kernel_term_is_repulsive() {
        // zero gradients isolate the kernel term: the drift on the left
        // particle points further left, away from its neighbor
        let cloud = ParticleCloud::new(array![[0.0], [1.0]]).unwrap();
        let grads = Array2::zeros((2, 1));
        let cfg = SbsConfig {
            kappa: 1.0,
            bandwidth: 1.0,
        };
        let drift = sbs_drift(cloud.particle(0), &cloud, &grads, &cfg);
        assert!(drift[0] < 0.0, "repulsion must point away from the neighbor");
    }

    #[test]
    fn sbs_zero_kappa_zero_grads() {
        let cloud = ParticleCloud::new(array![[0.0], [1.0], [2.0]]).unwrap();
        let grads = Array2::zeros((3, 1));
        let cfg = SbsConfig {
            kappa: 0.0,
            bandwidth: 1.0,
        };
        let drift = sbs_drift(array![0.5].view(), &cloud, &grads, &cfg);
        assert_eq!(drift[0], 0.0);
    }

    #[test]
    fn sbs_symmetric_cloud_zero_drift_at_origin() {
        // cloud symmetric about the origin, even V: drift at 0 vanishes
        let cloud =
            ParticleCloud::new(array![[1.0, 2.0], [-1.0, -2.0], [0.5, -1.0], [-0.5, 1.0]])
                .unwrap();
        let grads = quad_grads(&cloud); // grad of even V is odd
        let cfg = SbsConfig {
            kappa: 1.3,
            bandwidth: 2.0,
        };
        let drift = sbs_drift(array![0.0, 0.0].view(), &cloud, &grads, &cfg);
        for v in drift.iter() {
            assert!(v.abs() < 1e-12, "drift at origin = {v}");
        }
    }

    #[test]
    fn baseline_msgd_quadratic() {
        let obj = make_objective("square", 2).unwrap();
        let cloud = ParticleCloud::new(array![[3.0, 4.0]]).unwrap();
        let fvals = vec![obj.eval(&[3.0, 4.0])];
        // V = 0.5||x||^2 gradients for the worked value (-3, -4)
        let grads = quad_grads(&cloud);
        let snap = MeasureSnapshot::prepare(&DynamicsSpec::Msgd, &cloud, &obj, &fvals, Some(&grads));
        let (drift, diff) =
            baseline_coefficients(&DynamicsSpec::Msgd, 0, cloud.particle(0), &cloud, &snap);
        assert_eq!(drift, array![-3.0, -4.0]);
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn baseline_langevin_diffusion_scale() {
        let obj = make_objective("square", 1).unwrap();
        let cloud = ParticleCloud::new(array![[0.0]]).unwrap();
        let grads = Array2::zeros((1, 1));
        let spec = DynamicsSpec::Langevin(LangevinConfig { kappa: 1.0 });
        let snap = MeasureSnapshot::prepare(&spec, &cloud, &obj, &[0.0], Some(&grads));
        let (_, diff) = baseline_coefficients(&spec, 0, cloud.particle(0), &cloud, &snap);
        assert_abs_diff_eq!(diff, 2.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn all_families_finite_on_random_clouds() {
        use rand::Rng;
        let obj = make_objective("rastrigin", 3).unwrap();
        let mut rng = crate::rng::RngStream::new(9, 0).rng();
        for _ in 0..40 {
            let n = rng.random_range(1..12);
            let positions = Array2::from_shape_fn((n, 3), |_| rng.random_range(-5.0..5.0_f64));
            let cloud = ParticleCloud::new(positions).unwrap();
            let fvals: Vec<f64> = (0..n)
                .map(|i| obj.eval(cloud.particle(i).as_slice().unwrap()))
                .collect();
            let grads = Array2::from_shape_fn((n, 3), |(i, j)| {
                obj.grad(cloud.particle(i).as_slice().unwrap())[j]
            });
            for spec in [
                DynamicsSpec::Msgd,
                DynamicsSpec::Langevin(LangevinConfig { kappa: 0.5 }),
                DynamicsSpec::Cbo(CboConfig::default()),
                DynamicsSpec::Sbs(SbsConfig::for_particles(n)),
            ] {
                let snap = MeasureSnapshot::prepare(&spec, &cloud, &obj, &fvals, Some(&grads));
                for i in 0..n {
                    let (drift, diff) =
                        baseline_coefficients(&spec, i, cloud.particle(i), &cloud, &snap);
                    assert!(drift.iter().all(|v| v.is_finite()), "{spec:?}");
                    assert!(diff.is_finite());
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(DynamicsSpec::Langevin(LangevinConfig { kappa: 0.0 })
            .validate()
            .is_err());
        assert!(DynamicsSpec::Cbo(CboConfig {
            lambda: -1.0,
            ..CboConfig::default()
        })
        .validate()
        .is_err());
        assert!(DynamicsSpec::Sbs(SbsConfig {
            kappa: 1.0,
            bandwidth: 0.0
        })
        .validate()
        .is_err());
    }
}
