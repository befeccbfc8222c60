//! End-to-end pipeline orchestration shared by the CLI, the benchmark
//! harness and the C API.

use std::time::Instant;

use crate::cube::HyperCube;
use crate::error::Result;
use crate::exec::ExecPlan;
use crate::jacobi::{jacobi_eigen, EigenDecomposition, JacobiConfig};
use crate::matrix::SymMatrix;
use crate::stages::{
    covariance, covariance_blocked, mean_center, project, project_raw, CenteredCube, Projection,
};
use crate::Precision;

/// Pipeline-level options on top of the solver configuration.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub jacobi: JacobiConfig,
    /// `Some(k)` computes the covariance as `k` pixel-blocked partial Gram
    /// matrices; `None` uses the direct path.
    pub blocked_splits: Option<usize>,
    pub precision: Precision,
    /// Project the raw cube instead of the centered one. The variance
    /// identity `var(scores_k) = λ_k` only holds on the centered path.
    pub project_raw: bool,
}

/// Everything the four stages produce.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub centered: CenteredCube,
    pub covariance: SymMatrix,
    pub eigen: EigenDecomposition,
    pub projection: Projection,
}

/// Wall-clock seconds per stage, measured around the stage calls only.
#[derive(Debug, Clone, Copy)]
pub struct StageSeconds {
    pub mean_center: f64,
    pub covariance: f64,
    pub eigen: f64,
    pub projection: f64,
}

/// Runs mean-centering, covariance, eigendecomposition and projection of
/// the first `pcs` components, timing each stage exclusively.
pub fn run(
    cube: &HyperCube,
    pcs: usize,
    cfg: &PipelineConfig,
    plan: &ExecPlan,
) -> Result<(PipelineOutput, StageSeconds)> {
    let t0 = Instant::now();
    let centered = mean_center(cube, plan, cfg.precision);
    let t_mean = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let cov = match cfg.blocked_splits {
        Some(splits) => covariance_blocked(&centered, splits, plan, cfg.precision)?,
        None => covariance(&centered, plan, cfg.precision)?,
    };
    let t_cov = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let eigen = jacobi_eigen(&cov, &cfg.jacobi, plan)?;
    let t_eig = t2.elapsed().as_secs_f64();

    let t3 = Instant::now();
    let projection = if cfg.project_raw {
        project_raw(cube, &eigen, pcs, plan, cfg.precision)?
    } else {
        project(&centered, &eigen, pcs, plan, cfg.precision)?
    };
    let t_proj = t3.elapsed().as_secs_f64();

    Ok((
        PipelineOutput {
            centered,
            covariance: cov,
            eigen,
            projection,
        },
        StageSeconds {
            mean_center: t_mean,
            covariance: t_cov,
            eigen: t_eig,
            projection: t_proj,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{builtin_signatures, generate_synthetic};

    #[test]
    fn blocked_and_direct_paths_agree() {
        let plan = ExecPlan::serial();
        let sigs = builtin_signatures(8, 3, 5).unwrap();
        let scene = generate_synthetic(&sigs, 12, 12, 3, 50.0, 4, &plan).unwrap();
        let direct = run(&scene.cube, 2, &PipelineConfig::default(), &plan)
            .unwrap()
            .0;
        let blocked_cfg = PipelineConfig {
            blocked_splits: Some(4),
            ..PipelineConfig::default()
        };
        let blocked = run(&scene.cube, 2, &blocked_cfg, &plan).unwrap().0;
        let norm = direct.covariance.frobenius_norm();
        let diff: f64 = direct
            .covariance
            .as_slice()
            .iter()
            .zip(blocked.covariance.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-6 * norm);
    }

    #[test]
    fn raw_projection_flag_changes_scores() {
        let plan = ExecPlan::serial();
        let sigs = builtin_signatures(6, 2, 9).unwrap();
        let scene = generate_synthetic(&sigs, 8, 8, 2, f64::INFINITY, 2, &plan).unwrap();
        let centered = run(&scene.cube, 1, &PipelineConfig::default(), &plan)
            .unwrap()
            .0;
        let raw_cfg = PipelineConfig {
            project_raw: true,
            ..PipelineConfig::default()
        };
        let raw = run(&scene.cube, 1, &raw_cfg, &plan).unwrap().0;
        // The two projections differ by the projected mean, a constant
        // per-component shift.
        let shift = raw.projection.scores[0] - centered.projection.scores[0];
        assert!(shift.abs() > 0.0);
        for (r, c) in raw
            .projection
            .scores
            .iter()
            .zip(&centered.projection.scores)
        {
            assert!((r - c - shift).abs() < 1e-3 * shift.abs().max(1.0));
        }
    }
}
