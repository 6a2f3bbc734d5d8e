//! Benchmark objective registry.
//!
//! Standard literature definitions with analytic gradients, domain boxes and
//! known global minima. Registry names are lowercase kebab-case; see
//! [`registry_names`]. Every function also accepts an optional
//! `normalize_by_dim` flag (value and gradient divided by `d`) so reported
//! magnitudes can match either the raw or the per-dimension convention.

use crate::error::{Error, Result};
use std::f64::consts::{E, PI};
use std::sync::Arc;

/// Location of the Schwefel per-coordinate maximizer of `x sin(sqrt(x))`.
const SCHWEFEL_X_STAR: f64 = 420.968_746_359_982_05;
/// `SCHWEFEL_X_STAR * sin(sqrt(SCHWEFEL_X_STAR))`; using this constant rather
/// than the rounded 418.9829 of the literature makes the minimum exactly zero.
const SCHWEFEL_C: f64 = 418.982_887_272_433_7;
/// Root of `2x^3 - 16x + 5/2` near -2.9 (Styblinski-Tang minimizer).
const STYBLINSKI_X_STAR: f64 = -2.903_534_027_771_177;
/// Per-coordinate Styblinski-Tang value at the minimizer.
const STYBLINSKI_MIN_PER_DIM: f64 = -39.166_165_703_771_41;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A benchmark function: value, analytic gradient, domain box and one
/// representative global minimum.
#[derive(Clone)]
pub struct Objective {
    pub name: String,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    pub known_min_value: f64,
    pub known_min_location: Vec<f64>,
    pub normalize_by_dim: bool,
    eval_fn: Arc<EvalFn>,
    grad_fn: Arc<GradFn>,
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("known_min_value", &self.known_min_value)
            .finish()
    }
}

impl Objective {
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval_fn)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.grad_fn)(x)
    }

    /// Build an objective outside the registry (test stubs, custom problems).
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: &str,
        dim: usize,
        domain: Vec<(f64, f64)>,
        known_min_value: f64,
        known_min_location: Vec<f64>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            dim,
            domain,
            known_min_value,
            known_min_location,
            normalize_by_dim: false,
            eval_fn: Arc::new(eval),
            grad_fn: Arc::new(grad),
        }
    }
}

/// Registry entry names, in the order of the benchmark tables
/// (seven multimodal, then eight unimodal).
pub fn registry_names() -> &'static [&'static str] {
    &[
        "ackley",
        "deb-n1",
        "griewank",
        "levy",
        "rastrigin",
        "schwefel",
        "styblinski-tang",
        "bent-cigar",
        "dixon-price",
        "hyper-ellipsoid",
        "rosenbrock",
        "square",
        "sumpow",
        "trid",
        "zakharov",
    ]
}

/// Minimum admissible dimension (coupling terms need two coordinates).
pub fn min_dim(name: &str) -> Option<usize> {
    match name {
        "rosenbrock" | "dixon-price" | "trid" => Some(2),
        n if registry_names().contains(&n) => Some(1),
        _ => None,
    }
}

pub fn make_objective(name: &str, dim: usize) -> Result<Objective> {
    make_objective_with(name, dim, false)
}

pub fn make_objective_with(name: &str, dim: usize, normalize_by_dim: bool) -> Result<Objective> {
    let min = min_dim(name).ok_or_else(|| Error::UnknownObjective(name.to_string()))?;
    if dim < min {
        return Err(Error::BadDimension {
            name: name.to_string(),
            min_dim: min,
            dim,
        });
    }
    let obj = match name {
        "ackley" => build(name, dim, (-32.768, 32.768), 0.0, vec![0.0; dim], ackley, ackley_grad),
        "deb-n1" => build(name, dim, (0.0, 1.0), -1.0, vec![0.1; dim], deb_n1, deb_n1_grad),
        "griewank" => build(name, dim, (-600.0, 600.0), 0.0, vec![0.0; dim], griewank, griewank_grad),
        "levy" => build(name, dim, (-10.0, 10.0), 0.0, vec![1.0; dim], levy, levy_grad),
        "rastrigin" => build(name, dim, (-5.12, 5.12), 0.0, vec![0.0; dim], rastrigin, rastrigin_grad),
        "schwefel" => build(
            name,
            dim,
            (-500.0, 500.0),
            0.0,
            vec![SCHWEFEL_X_STAR; dim],
            schwefel,
            schwefel_grad,
        ),
        "styblinski-tang" => build(
            name,
            dim,
            (-5.0, 5.0),
            STYBLINSKI_MIN_PER_DIM * dim as f64,
            vec![STYBLINSKI_X_STAR; dim],
            styblinski_tang,
            styblinski_tang_grad,
        ),
        "bent-cigar" => build(name, dim, (-100.0, 100.0), 0.0, vec![0.0; dim], bent_cigar, bent_cigar_grad),
        "dixon-price" => {
            // x_i = 2^{-(2^i - 2)/2^i} = 2^{-(1 - 2^{1-i})}, the second form
            // stays finite for any dimension
            let loc: Vec<f64> = (1..=dim)
                .map(|i| 2f64.powf(-(1.0 - 2f64.powf(1.0 - i as f64))))
                .collect();
            build(name, dim, (-10.0, 10.0), 0.0, loc, dixon_price, dixon_price_grad)
        }
        "hyper-ellipsoid" => build(
            name,
            dim,
            (-5.0, 5.0),
            0.0,
            vec![0.0; dim],
            hyper_ellipsoid,
            hyper_ellipsoid_grad,
        ),
        "rosenbrock" => build(name, dim, (-5.0, 10.0), 0.0, vec![1.0; dim], rosenbrock, rosenbrock_grad),
        "square" => build(name, dim, (-5.0, 5.0), 0.0, vec![0.0; dim], square, square_grad),
        "sumpow" => build(name, dim, (-5.0, 5.0), 0.0, vec![0.0; dim], sumpow, sumpow_grad),
        "trid" => {
            let d = dim as f64;
            let loc: Vec<f64> = (1..=dim).map(|i| (i as f64) * (d + 1.0 - i as f64)).collect();
            let min = -d * (d + 4.0) * (d - 1.0) / 6.0;
            let box_half = d * d;
            build(name, dim, (-box_half, box_half), min, loc, trid, trid_grad)
        }
        "zakharov" => build(name, dim, (-10.0, 10.0), 0.0, vec![0.0; dim], zakharov, zakharov_grad),
        _ => unreachable!("name validated above"),
    };
    Ok(if normalize_by_dim { normalize(obj) } else { obj })
}

fn build(
    name: &str,
    dim: usize,
    box_: (f64, f64),
    known_min_value: f64,
    known_min_location: Vec<f64>,
    eval: fn(&[f64]) -> f64,
    grad: fn(&[f64]) -> Vec<f64>,
) -> Objective {
    Objective {
        name: name.to_string(),
        dim,
        domain: vec![box_; dim],
        known_min_value,
        known_min_location,
        normalize_by_dim: false,
        eval_fn: Arc::new(eval),
        grad_fn: Arc::new(grad),
    }
}

fn normalize(obj: Objective) -> Objective {
    let d = obj.dim as f64;
    let eval = obj.eval_fn.clone();
    let grad = obj.grad_fn.clone();
    Objective {
        known_min_value: obj.known_min_value / d,
        normalize_by_dim: true,
        eval_fn: Arc::new(move |x| eval(x) / d),
        grad_fn: Arc::new(move |x| {
            let mut g = grad(x);
            g.iter_mut().for_each(|v| *v /= d);
            g
        }),
        ..obj
    }
}

// ---- function definitions ------------------------------------------------

/// `-20 exp(-0.2 sqrt(mean x^2)) - exp(mean cos(2 pi x)) + 20 + e`, min 0 at 0.
fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / d).sqrt();
    let cos_mean = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * rms).exp() - cos_mean.exp() + 20.0 + E
}

fn ackley_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len() as f64;
    let q = x.iter().map(|v| v * v).sum::<f64>();
    let rms = (q / d).sqrt();
    let cos_mean = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    let exp_cos = cos_mean.exp();
    x.iter()
        .map(|&v| {
            // the radial term has a cone at the origin; its gradient is taken as 0 there
            let radial = if rms > 0.0 {
                20.0 * 0.2 * (-0.2 * rms).exp() * v / (d * rms)
            } else {
                0.0
            };
            radial + exp_cos * (2.0 * PI / d) * (2.0 * PI * v).sin()
        })
        .collect()
}

/// Deb's function N.1: `-(1/d) sum sin^6(5 pi x)`; every coordinate peak is a
/// global minimizer, value -1.
fn deb_n1(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    -x.iter().map(|&v| (5.0 * PI * v).sin().powi(6)).sum::<f64>() / d
}

fn deb_n1_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len() as f64;
    x.iter()
        .map(|&v| {
            let s = (5.0 * PI * v).sin();
            let c = (5.0 * PI * v).cos();
            -30.0 * PI / d * s.powi(5) * c
        })
        .collect()
}

fn griewank(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

fn griewank_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    // partial products avoid dividing by a cosine that may vanish
    let cosines: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| (v / ((i + 1) as f64).sqrt()).cos())
        .collect();
    let mut prefix = vec![1.0; d + 1];
    for i in 0..d {
        prefix[i + 1] = prefix[i] * cosines[i];
    }
    let mut suffix = vec![1.0; d + 1];
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1] * cosines[i];
    }
    x.iter()
        .enumerate()
        .map(|(k, &v)| {
            let sk = ((k + 1) as f64).sqrt();
            let others = prefix[k] * suffix[k + 1];
            v / 2000.0 + (v / sk).sin() / sk * others
        })
        .collect()
}

fn levy_w(x: f64) -> f64 {
    1.0 + (x - 1.0) / 4.0
}

fn levy(x: &[f64]) -> f64 {
    let d = x.len();
    let w0 = levy_w(x[0]);
    let mut f = (PI * w0).sin().powi(2);
    for &xi in &x[..d - 1] {
        let w = levy_w(xi);
        f += (w - 1.0).powi(2) * (1.0 + 10.0 * (PI * w + 1.0).sin().powi(2));
    }
    let wd = levy_w(x[d - 1]);
    f + (wd - 1.0).powi(2) * (1.0 + (2.0 * PI * wd).sin().powi(2))
}

fn levy_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut g = vec![0.0; d];
    // d/dw of the terms, then dw/dx = 1/4
    for (k, &xk) in x.iter().enumerate() {
        let w = levy_w(xk);
        let mut dw = 0.0;
        if k == 0 {
            dw += PI * (2.0 * PI * w).sin();
        }
        if k < d - 1 {
            let s = (PI * w + 1.0).sin();
            dw += 2.0 * (w - 1.0) * (1.0 + 10.0 * s * s)
                + (w - 1.0).powi(2) * 10.0 * PI * (2.0 * (PI * w + 1.0)).sin();
        }
        if k == d - 1 {
            let s = (2.0 * PI * w).sin();
            dw += 2.0 * (w - 1.0) * (1.0 + s * s)
                + (w - 1.0).powi(2) * 2.0 * PI * (4.0 * PI * w).sin();
        }
        g[k] = dw / 4.0;
    }
    g
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

fn rastrigin_grad(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| 2.0 * v + 20.0 * PI * (2.0 * PI * v).sin())
        .collect()
}

fn schwefel(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| SCHWEFEL_C - v * v.abs().sqrt().sin())
        .sum()
}

fn schwefel_grad(x: &[f64]) -> Vec<f64> {
    // d/dx [-x sin(sqrt|x|)] = -sin(sqrt|x|) - (sqrt|x|/2) cos(sqrt|x|),
    // an even function of x; the |x| kink at 0 is resolved by the value 0.
    x.iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                let r = v.abs().sqrt();
                -r.sin() - 0.5 * r * r.cos()
            }
        })
        .collect()
}

fn styblinski_tang(x: &[f64]) -> f64 {
    0.5 * x
        .iter()
        .map(|&v| v.powi(4) - 16.0 * v * v + 5.0 * v)
        .sum::<f64>()
}

fn styblinski_tang_grad(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| 2.0 * v.powi(3) - 16.0 * v + 2.5).collect()
}

fn bent_cigar(x: &[f64]) -> f64 {
    x[0] * x[0] + 1e6 * x[1..].iter().map(|v| v * v).sum::<f64>()
}

fn bent_cigar_grad(x: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = x.iter().map(|&v| 2e6 * v).collect();
    g[0] = 2.0 * x[0];
    g
}

fn dixon_price(x: &[f64]) -> f64 {
    let mut f = (x[0] - 1.0).powi(2);
    for i in 1..x.len() {
        f += (i + 1) as f64 * (2.0 * x[i] * x[i] - x[i - 1]).powi(2);
    }
    f
}

fn dixon_price_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut g = vec![0.0; d];
    g[0] = 2.0 * (x[0] - 1.0);
    for i in 1..d {
        let t = 2.0 * x[i] * x[i] - x[i - 1];
        g[i] += 8.0 * (i + 1) as f64 * x[i] * t;
        g[i - 1] += -2.0 * (i + 1) as f64 * t;
    }
    g
}

fn hyper_ellipsoid(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, &v)| (i + 1) as f64 * v * v)
        .sum()
}

fn hyper_ellipsoid_grad(x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| 2.0 * (i + 1) as f64 * v)
        .collect()
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

fn rosenbrock_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut g = vec![0.0; d];
    for k in 0..d - 1 {
        let t = x[k + 1] - x[k] * x[k];
        g[k] += -400.0 * x[k] * t - 2.0 * (1.0 - x[k]);
        g[k + 1] += 200.0 * t;
    }
    g
}

fn square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn square_grad(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| 2.0 * v).collect()
}

fn sumpow(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, &v)| v.abs().powi(i as i32 + 2))
        .sum()
}

fn sumpow_grad(x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let p = i as i32 + 2;
            p as f64 * v.abs().powi(p - 1) * v.signum()
        })
        .collect()
}

fn trid(x: &[f64]) -> f64 {
    let sq: f64 = x.iter().map(|&v| (v - 1.0).powi(2)).sum();
    let cross: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
    sq - cross
}

fn trid_grad(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d)
        .map(|k| {
            let mut g = 2.0 * (x[k] - 1.0);
            if k > 0 {
                g -= x[k - 1];
            }
            if k < d - 1 {
                g -= x[k + 1];
            }
            g
        })
        .collect()
}

fn zakharov(x: &[f64]) -> f64 {
    let q: f64 = x.iter().map(|v| v * v).sum();
    let s: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| 0.5 * (i + 1) as f64 * v)
        .sum();
    q + s * s + s.powi(4)
}

fn zakharov_grad(x: &[f64]) -> Vec<f64> {
    let s: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| 0.5 * (i + 1) as f64 * v)
        .sum();
    let outer = 2.0 * s + 4.0 * s.powi(3);
    x.iter()
        .enumerate()
        .map(|(i, &v)| 2.0 * v + outer * 0.5 * (i + 1) as f64)
        .collect()
}

// ---- gradient verification -----------------------------------------------

/// Max over `points` of `||grad(x) - central_fd(x)|| / (1 + ||grad(x)||)`,
/// with central differences at `h = 1e-5`. Points must be interior and away
/// from non-differentiable sets.
pub fn gradient_check(objective: &Objective, points: &[Vec<f64>]) -> f64 {
    const H: f64 = 1e-5;
    let mut worst = 0.0_f64;
    for p in points {
        let g = objective.grad(p);
        let mut fd = vec![0.0; p.len()];
        let mut x = p.clone();
        for j in 0..p.len() {
            x[j] = p[j] + H;
            let fp = objective.eval(&x);
            x[j] = p[j] - H;
            let fm = objective.eval(&x);
            x[j] = p[j];
            fd[j] = (fp - fm) / (2.0 * H);
        }
        let diff: f64 = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = 1.0 + g.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(diff / scale);
    }
    worst
}

/// Uniform interior points for gradient checks, shrunk 1% inside the box and
/// nudged off each function's non-smooth set.
pub fn interior_points(objective: &Objective, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = crate::rng::RngStream::new(seed, 7).rng();
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let p: Vec<f64> = objective
            .domain
            .iter()
            .map(|&(lo, hi)| {
                let pad = 0.01 * (hi - lo);
                rng.random_range(lo + pad..hi - pad)
            })
            .collect();
        // schwefel has a |x| kink at 0, ackley a cone at the origin
        let ok = match objective.name.as_str() {
            "schwefel" => p.iter().all(|v| v.abs() > 1.0),
            "ackley" => p.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-3,
            _ => true,
        };
        if ok {
            points.push(p);
        }
    }
    points
}
