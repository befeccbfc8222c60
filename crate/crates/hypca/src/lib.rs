//! Jacobi-based principal component analysis for hyperspectral image cubes.
//!
//! The pipeline has four stages: band-average removal, covariance of the
//! centered data (direct or pixel-blocked), eigendecomposition by Jacobi
//! rotations (classical, cyclic or parallel-batch pivoting), and projection
//! onto the leading eigenvectors. Around it sit a synthetic-scene generator,
//! a worker-pool execution layer with a deterministic mode that is
//! bit-stable across worker counts, and a benchmark harness that reports
//! per-stage timings and cubes-per-second figures of merit.
//!
//! ```
//! use hypca::cube::{builtin_signatures, generate_synthetic};
//! use hypca::exec::ExecPlan;
//! use hypca::jacobi::{jacobi_eigen, JacobiConfig};
//! use hypca::stages::{covariance, explained_variance, mean_center, project};
//! use hypca::Precision;
//!
//! let plan = ExecPlan::serial();
//! let sigs = builtin_signatures(12, 4, 7).unwrap();
//! let scene = generate_synthetic(&sigs, 16, 16, 4, 60.0, 7, &plan).unwrap();
//!
//! let centered = mean_center(&scene.cube, &plan, Precision::Double);
//! let cov = covariance(&centered, &plan, Precision::Double).unwrap();
//! let eig = jacobi_eigen(&cov, &JacobiConfig::default(), &plan).unwrap();
//! let scores = project(&centered, &eig, 3, &plan, Precision::Double).unwrap();
//!
//! assert_eq!(scores.components, 3);
//! assert!(explained_variance(&eig, 3).unwrap() > 0.9);
//! ```

pub mod bench;
pub mod cli;
pub mod cube;
mod error;
pub mod exec;
pub mod jacobi;
pub mod matrix;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod stages;

pub use error::{Error, Result};

/// Accumulation/working precision for the numeric kernels. `Double` keeps
/// `f64` accumulators over the `f32` data; `Single` runs strictly in `f32`
/// for fidelity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    Single,
}

impl Precision {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "double" => Ok(Precision::Double),
            "single" => Ok(Precision::Single),
            other => Err(Error::invalid(format!(
                "unknown precision {other:?} (expected single or double)"
            ))),
        }
    }
}
