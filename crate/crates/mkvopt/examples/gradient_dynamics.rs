//! Gradient-based families (MSGD and Langevin) on a multimodal landscape,
//! with and without the common mean shift that lets the whole cloud hop
//! between basins.
//!
//! ```sh
//! cargo run --release --example gradient_dynamics
//! ```

use mkvopt::dynamics::{DynamicsSpec, LangevinConfig};
use mkvopt::integrator::{BoundaryPolicy, NoiseSpec, RunConfig, SingularityPolicy};
use mkvopt::smd::{SmdObservable, SmdSpec};
use mkvopt::StepSchedule;

fn config(dynamics: DynamicsSpec, noise: NoiseSpec, seed: u64) -> RunConfig {
    RunConfig {
        objective: "levy".into(),
        dim: 20,
        normalize_by_dim: false,
        dynamics,
        noise,
        n_particles: 150,
        schedule: StepSchedule::constant(0.1, 300).unwrap(),
        seed,
        record_stride: 1,
        boundary: BoundaryPolicy::Clamp,
        singularity: SingularityPolicy::ClampWarn,
    }
}

fn mean_best(dynamics: &DynamicsSpec, noise: &NoiseSpec, runs: u64) -> mkvopt::Result<f64> {
    let mut total = 0.0;
    for seed in 0..runs {
        total += mkvopt::run(&config(dynamics.clone(), noise.clone(), seed))?.final_best;
    }
    Ok(total / runs as f64)
}

fn main() -> mkvopt::Result<()> {
    let runs = 10;
    let mean_noise = NoiseSpec::Smd(SmdSpec::with_observable(SmdObservable::Mean));
    println!("levy d=20, N=150, 300 iterations, mean over {runs} runs:");
    for (label, dynamics) in [
        ("msgd", DynamicsSpec::Msgd),
        ("langevin", DynamicsSpec::Langevin(LangevinConfig { kappa: 1.0 })),
    ] {
        let vanilla = mean_best(&dynamics, &NoiseSpec::None, runs)?;
        let shifted = mean_best(&dynamics, &mean_noise, runs)?;
        println!("  {label:<10} vanilla {vanilla:8.3}   with mean shift {shifted:8.3}");
    }
    Ok(())
}
