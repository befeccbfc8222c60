//! Pipeline stages around the eigensolver: band-average removal, covariance
//! (direct and pixel-blocked), projection and explained-variance accounting.
//!
//! All heavy loops accumulate in `f64` by default and store results in the
//! cube's native `f32`; `Precision::Single` switches the accumulators to
//! `f32` for fidelity experiments against strictly single-precision
//! implementations.

use std::io::Write;
use std::path::Path;

use crate::cube::HyperCube;
use crate::error::{Error, Result};
use crate::exec::{
    for_each_chunk_mut, parallel_reduce, partition, run_tasks, ExecPlan, PartitionKind,
};
use crate::jacobi::EigenDecomposition;
use crate::matrix::SymMatrix;
use crate::Precision;

/// A cube with per-band averages removed, plus the averages themselves.
#[derive(Debug, Clone)]
pub struct CenteredCube {
    pub cube: HyperCube,
    pub band_means: Vec<f64>,
}

/// Scores of the leading principal components, component-major:
/// `scores[k * pixels + p]` is the k-th component of pixel `p`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub components: usize,
    pub pixels: usize,
    pub scores: Vec<f32>,
}

impl Projection {
    pub fn component(&self, k: usize) -> &[f32] {
        &self.scores[k * self.pixels..(k + 1) * self.pixels]
    }
}

/// Removes each band's average from all of its pixels.
pub fn mean_center(cube: &HyperCube, plan: &ExecPlan, precision: Precision) -> CenteredCube {
    let n = cube.pixels();
    let m = cube.bands();
    let sched = partition(PartitionKind::ByBand, m, plan.workers);
    let means: Vec<f64> = run_tasks(plan, &sched, |_, range| {
        range
            .map(|b| band_mean(cube.band(b), n, precision))
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut data = cube.data().to_vec();
    for_each_chunk_mut(
        plan,
        PartitionKind::ByBand,
        &mut data,
        n,
        |b, slice| match precision {
            Precision::Double => {
                let mu = means[b];
                for v in slice {
                    *v = (*v as f64 - mu) as f32;
                }
            }
            Precision::Single => {
                let mu = means[b] as f32;
                for v in slice {
                    *v -= mu;
                }
            }
        },
    );
    let cube = HyperCube::new(cube.width(), cube.height(), m, data)
        .expect("centering preserves shape and finiteness");
    CenteredCube {
        cube,
        band_means: means,
    }
}

fn band_mean(band: &[f32], n: usize, precision: Precision) -> f64 {
    match precision {
        Precision::Double => band.iter().map(|&v| v as f64).sum::<f64>() / n as f64,
        Precision::Single => (band.iter().sum::<f32>() / n as f32) as f64,
    }
}

fn dot(a: &[f32], b: &[f32], precision: Precision) -> f64 {
    match precision {
        Precision::Double => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| x as f64 * y as f64)
            .sum::<f64>(),
        Precision::Single => a.iter().zip(b).map(|(&x, &y)| x * y).sum::<f32>() as f64,
    }
}

/// Covariance `C[i][j] = Σ_p x_i[p]·x_j[p] / (N−1)` of a centered cube.
/// Only the upper triangle is computed; the lower is mirrored, so symmetry
/// is exact.
pub fn covariance(x: &CenteredCube, plan: &ExecPlan, precision: Precision) -> Result<SymMatrix> {
    let n = x.cube.pixels();
    let m = x.cube.bands();
    if n < 2 {
        return Err(Error::invalid(
            "covariance needs at least 2 pixels (normalization divides by N-1)",
        ));
    }
    let pairs = upper_pairs(m);
    let sched = partition(PartitionKind::ByTriangleEntry, pairs.len(), plan.workers);
    let norm = (n - 1) as f64;
    let values: Vec<f64> = run_tasks(plan, &sched, |_, range| {
        pairs[range]
            .iter()
            .map(|&(i, j)| dot(x.cube.band(i), x.cube.band(j), precision) / norm)
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();
    assemble_upper(m, &pairs, &values)
}

/// Blocked covariance: partial Gram matrices over `splits` contiguous pixel
/// chunks (the last chunk may be short), summed pairwise in chunk order and
/// normalized once. Identical contract to [`covariance`]; with `splits = 1`
/// the summation order matches it exactly.
pub fn covariance_blocked(
    x: &CenteredCube,
    splits: usize,
    plan: &ExecPlan,
    precision: Precision,
) -> Result<SymMatrix> {
    if splits < 1 {
        return Err(Error::invalid("splits must be at least 1"));
    }
    let n = x.cube.pixels();
    let m = x.cube.bands();
    if n < 2 {
        return Err(Error::invalid(
            "covariance needs at least 2 pixels (normalization divides by N-1)",
        ));
    }
    let pairs = upper_pairs(m);
    let chunk_len = n.div_ceil(splits);
    let chunks: Vec<std::ops::Range<usize>> = (0..splits)
        .map(|k| (k * chunk_len).min(n)..((k + 1) * chunk_len).min(n))
        .collect();
    let sched = partition(PartitionKind::ByPixelChunk, chunks.len(), plan.workers);
    let grams: Vec<Vec<f64>> = run_tasks(plan, &sched, |_, range| {
        range
            .map(|c| {
                let px = chunks[c].clone();
                pairs
                    .iter()
                    .map(|&(i, j)| {
                        dot(
                            &x.cube.band(i)[px.clone()],
                            &x.cube.band(j)[px.clone()],
                            precision,
                        )
                    })
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let summed = parallel_reduce(plan, grams, |mut a, b| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    })
    .expect("splits >= 1 so at least one partial Gram exists");
    let norm = (n - 1) as f64;
    let values: Vec<f64> = summed.into_iter().map(|v| v / norm).collect();
    assemble_upper(m, &pairs, &values)
}

fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(m * (m + 1) / 2);
    for i in 0..m {
        for j in i..m {
            pairs.push((i, j));
        }
    }
    pairs
}

fn assemble_upper(m: usize, pairs: &[(usize, usize)], values: &[f64]) -> Result<SymMatrix> {
    let mut c = SymMatrix::zeros(m)?;
    for (&(i, j), &v) in pairs.iter().zip(values) {
        c.set_sym(i, j, v);
    }
    Ok(c)
}

/// Projects a centered cube onto the first `p` descending eigenvectors.
pub fn project(
    x: &CenteredCube,
    eig: &EigenDecomposition,
    p: usize,
    plan: &ExecPlan,
    precision: Precision,
) -> Result<Projection> {
    project_data(&x.cube, eig, p, plan, precision)
}

/// Projects the raw (uncentered) cube instead; the variance identity
/// `var(scores_k) = λ_k` does not hold on this path.
pub fn project_raw(
    cube: &HyperCube,
    eig: &EigenDecomposition,
    p: usize,
    plan: &ExecPlan,
    precision: Precision,
) -> Result<Projection> {
    project_data(cube, eig, p, plan, precision)
}

fn project_data(
    cube: &HyperCube,
    eig: &EigenDecomposition,
    p: usize,
    plan: &ExecPlan,
    precision: Precision,
) -> Result<Projection> {
    let n = cube.pixels();
    let m = cube.bands();
    if eig.dim() != m {
        return Err(Error::invalid(format!(
            "eigendecomposition dimension {} does not match band count {m}",
            eig.dim()
        )));
    }
    if p == 0 || p > m {
        return Err(Error::invalid(format!(
            "component count {p} out of range 1..={m}"
        )));
    }
    let mut scores = vec![0f32; p * n];
    for k in 0..p {
        let evec = eig.eigenvector(k);
        let out_k = &mut scores[k * n..(k + 1) * n];
        let sched = partition(PartitionKind::ByPixelChunk, n, plan.workers);
        let pieces: Vec<Vec<f32>> = run_tasks(plan, &sched, |_, range| {
            let mut piece = match precision {
                Precision::Double => {
                    let mut acc = vec![0f64; range.len()];
                    for (b, &w) in evec.iter().enumerate() {
                        let band = &cube.band(b)[range.clone()];
                        for (a, &v) in acc.iter_mut().zip(band) {
                            *a += v as f64 * w;
                        }
                    }
                    acc.into_iter().map(|v| v as f32).collect::<Vec<f32>>()
                }
                Precision::Single => {
                    let mut acc = vec![0f32; range.len()];
                    for (b, &w) in evec.iter().enumerate() {
                        let w = w as f32;
                        let band = &cube.band(b)[range.clone()];
                        for (a, &v) in acc.iter_mut().zip(band) {
                            *a += v * w;
                        }
                    }
                    acc
                }
            };
            piece.shrink_to_fit();
            piece
        });
        let mut at = 0;
        for piece in pieces {
            out_k[at..at + piece.len()].copy_from_slice(&piece);
            at += piece.len();
        }
    }
    Ok(Projection {
        components: p,
        pixels: n,
        scores,
    })
}

/// Fraction of total eigenvalue mass captured by the leading `p` components.
/// Negative eigenvalues (rounding) are clamped to zero; a zero total yields 1.
pub fn explained_variance(eig: &EigenDecomposition, p: usize) -> Result<f64> {
    let m = eig.dim();
    if p == 0 || p > m {
        return Err(Error::invalid(format!(
            "component count {p} out of range 1..={m}"
        )));
    }
    let clamped = |k: usize| eig.eigenvalue(k).max(0.0);
    let total: f64 = (0..m).map(clamped).sum();
    if total == 0.0 {
        return Ok(1.0);
    }
    Ok((0..p).map(clamped).sum::<f64>() / total)
}

/// Writes component-major scores as little-endian `f32` plus a JSON sidecar
/// describing the layout.
pub fn write_scores(proj: &Projection, raw_path: &Path, sidecar_path: &Path) -> Result<()> {
    let file = std::fs::File::create(raw_path).map_err(|e| Error::io(raw_path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for v in &proj.scores {
        out.write_all(&v.to_le_bytes())
            .map_err(|e| Error::io(raw_path, e))?;
    }
    out.flush().map_err(|e| Error::io(raw_path, e))?;
    let sidecar = serde_json::json!({
        "components": proj.components,
        "pixels": proj.pixels,
        "dtype": "f32",
        "order": "component-major",
        "byteorder": "le",
    });
    std::fs::write(
        sidecar_path,
        serde_json::to_string_pretty(&sidecar).unwrap(),
    )
    .map_err(|e| Error::io(sidecar_path, e))
}

/// Writes band averages as `band,mean` CSV.
pub fn write_band_means_csv(means: &[f64], path: &Path) -> Result<()> {
    let mut text = String::from("band,mean\n");
    for (b, mu) in means.iter().enumerate() {
        text.push_str(&format!("{b},{mu}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
