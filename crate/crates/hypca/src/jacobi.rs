//! Jacobi eigendecomposition of symmetric matrices.
//!
//! A plane rotation `P` differs from the identity only at rows/columns
//! `(i, j)`, where it holds `[[cos α, sin α], [−sin α, cos α]]`. Choosing
//! the angle from the pivot entries,
//!
//! ```text
//! m = 2·c_ij / (c_jj − c_ii)
//! t = m / (1 + √(1 + m²))        (inner rotation, |t| ≤ 1)
//! cos α = 1 / √(1 + t²),  sin α = t · cos α
//! ```
//!
//! makes the similarity `Pᵀ·C·P` annihilate `c_ij`. Repeating the rotation
//! over pivots drives the off-diagonal mass to zero; the diagonal converges
//! to the eigenvalues while the accumulated product `E = P₁·P₂·…·P_K` holds
//! the eigenvectors column-wise.
//!
//! The textbook tangent `t = (−1 + √(1 + m²)) / m` cancels catastrophically
//! for small `m`; the rationalized form above is algebraically identical and
//! stable. When `c_jj = c_ii` the limit `t = sign(c_ij)` applies (a 45°
//! rotation).
//!
//! Three pivot strategies are provided: `classical` rotates on the current
//! largest-magnitude off-diagonal entry, `cyclic` walks the upper triangle
//! row by row, and `parallel` applies batches of rotations whose index pairs
//! are disjoint, in a row-update phase followed by a column-update phase.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::{partition, run_tasks, ExecPlan, PartitionKind};
use crate::matrix::SymMatrix;
use crate::Precision;

/// Pivot selection order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotStrategy {
    /// Largest off-diagonal element each rotation; fewest rotations, but
    /// each selection scans the matrix.
    Classical,
    /// Fixed row-wise order, sweep after sweep.
    Cyclic,
    /// Batches of index-disjoint rotations applied simultaneously.
    Parallel,
}

impl PivotStrategy {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "classical" => Ok(PivotStrategy::Classical),
            "cyclic" => Ok(PivotStrategy::Cyclic),
            "parallel" => Ok(PivotStrategy::Parallel),
            other => Err(Error::invalid(format!(
                "unknown strategy {other:?} (expected classical, cyclic or parallel)"
            ))),
        }
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct JacobiConfig {
    pub strategy: PivotStrategy,
    /// Stop factor relative to the largest initial off-diagonal magnitude;
    /// the absolute threshold ε_abs = epsilon_rel × max|c_ij| is fixed once,
    /// so convergence behaviour is invariant under scaling of the input.
    pub epsilon_rel: f64,
    /// Sweep budget; exceeding it is an error, never silent truncation.
    pub max_sweeps: usize,
    /// Record the off-diagonal norm and rotation count per sweep.
    pub record_history: bool,
    /// Arithmetic the rotation loop runs in.
    pub precision: Precision,
    /// Flip each eigenvector so its largest-magnitude entry is positive.
    pub normalize_signs: bool,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        JacobiConfig {
            strategy: PivotStrategy::Cyclic,
            epsilon_rel: 1e-10,
            max_sweeps: 50,
            record_history: false,
            precision: Precision::Double,
            normalize_signs: false,
        }
    }
}

impl JacobiConfig {
    /// Defaults for the strictly single-precision mode. The stop factor is
    /// widened to what `f32` rounding can actually reach.
    pub fn single_precision() -> Self {
        JacobiConfig {
            precision: Precision::Single,
            epsilon_rel: 1e-6,
            ..JacobiConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_rel <= 0.0 || !self.epsilon_rel.is_finite() {
            return Err(Error::invalid("epsilon_rel must be positive and finite"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::invalid("max_sweeps must be at least 1"));
        }
        Ok(())
    }
}

/// One annihilating rotation: pivot indices plus the `m`, `t`, `cos α`,
/// `sin α` chain derived from the pivot entries.
#[derive(Debug, Clone, Copy)]
pub struct RotationParams {
    pub i: usize,
    pub j: usize,
    pub m: f64,
    pub t: f64,
    pub cos_a: f64,
    pub sin_a: f64,
}

/// Computes the rotation annihilating `c_ij` given the three pivot entries.
/// `c_ij = 0` yields the identity rotation; `c_jj = c_ii` yields the 45°
/// limit `t = sign(c_ij)`.
pub fn rotation_params(c_ii: f64, c_jj: f64, c_ij: f64, i: usize, j: usize) -> RotationParams {
    assert!(i < j, "pivot indices must satisfy i < j");
    let r = plane_params::<f64>(c_ii, c_jj, c_ij, i, j);
    RotationParams {
        i,
        j,
        m: r.m,
        t: r.t,
        cos_a: r.c,
        sin_a: r.s,
    }
}

/// Column-wise accumulator for the eigenvector product `E = P₁·P₂·…·P_K`.
#[derive(Debug, Clone)]
pub struct EigenAccumulator {
    dim: usize,
    /// Column-major: column `k` occupies `data[k*dim..(k+1)*dim]`.
    data: Vec<f64>,
}

impl EigenAccumulator {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for k in 0..dim {
            data[k * dim + k] = 1.0;
        }
        EigenAccumulator { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }
}

/// Applies one rotation in place: `c ← Pᵀ·c·P` touching only rows/columns
/// `(i, j)`, with the pivot pair written to exactly zero and symmetry kept
/// exact; the accumulator picks up `E ← E·P`.
///
/// `r` must have been computed from the current `(i, j)` entries of `c`.
pub fn apply_rotation(
    c: &mut SymMatrix,
    e: &mut EigenAccumulator,
    r: &RotationParams,
) -> Result<()> {
    let dim = c.dim();
    if r.i >= r.j || r.j >= dim {
        return Err(Error::invalid(format!(
            "rotation indices ({}, {}) out of range for dimension {dim}",
            r.i, r.j
        )));
    }
    if e.dim != dim {
        return Err(Error::invalid(format!(
            "accumulator dimension {} does not match matrix dimension {dim}",
            e.dim
        )));
    }
    let rot = Rot {
        i: r.i,
        j: r.j,
        m: r.m,
        t: r.t,
        c: r.cos_a,
        s: r.sin_a,
    };
    rotate_sym(c.as_mut_slice(), dim, &rot);
    rotate_cols(&mut e.data, dim, &rot);
    Ok(())
}

/// `√(Σ_{i≠j} c_ij²)` — the aggregate off-diagonal magnitude the stop rule
/// drives to zero.
pub fn offdiag_norm(c: &SymMatrix) -> f64 {
    offdiag_norm_flat(c.as_slice(), c.dim())
}

fn offdiag_norm_flat<T: Real>(w: &[T], dim: usize) -> f64 {
    let mut sum = 0.0f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = w[i * dim + j].to_f64();
            sum += v * v;
        }
    }
    (2.0 * sum).sqrt()
}

/// Per-sweep convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepStat {
    pub sweep: usize,
    pub offdiag_norm: f64,
    pub rotations: usize,
}

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    dim: usize,
    eigenvalues: Vec<f64>,
    /// Column-major: eigenvector `k` occupies `vectors[k*dim..(k+1)*dim]`.
    vectors: Vec<f64>,
    pub sweeps_used: usize,
    pub rotations_used: usize,
    pub history: Option<Vec<SweepStat>>,
}

impl EigenDecomposition {
    #[cfg(test)]
    pub(crate) fn from_parts(
        dim: usize,
        eigenvalues: Vec<f64>,
        vectors: Vec<f64>,
        sweeps_used: usize,
        rotations_used: usize,
    ) -> Self {
        EigenDecomposition {
            dim,
            eigenvalues,
            vectors,
            sweeps_used,
            rotations_used,
            history: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// Unit eigenvector paired with `eigenvalue(k)`.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// `‖EᵀE − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                let dot: f64 = self
                    .eigenvector(a)
                    .iter()
                    .zip(self.eigenvector(b))
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// `‖E·diag(λ)·Eᵀ − C‖_F`.
    pub fn reconstruction_error(&self, c: &SymMatrix) -> f64 {
        let d = self.dim;
        let mut sum = 0.0f64;
        for r in 0..d {
            for s in 0..d {
                let mut v = 0.0f64;
                for k in 0..d {
                    v += self.vectors[k * d + r] * self.eigenvalues[k] * self.vectors[k * d + s];
                }
                sum += (v - c.get(r, s)).powi(2);
            }
        }
        sum.sqrt()
    }

    /// Flips each eigenvector so its largest-magnitude entry is positive.
    pub fn normalize_signs(&mut self) {
        let d = self.dim;
        for k in 0..d {
            let col = &mut self.vectors[k * d..(k + 1) * d];
            let mut arg = 0;
            for (r, v) in col.iter().enumerate() {
                if v.abs() > col[arg].abs() {
                    arg = r;
                }
            }
            if col[arg] < 0.0 {
                for v in col.iter_mut() {
                    *v = -*v;
                }
            }
        }
    }
}

/// Diagonalizes `c` with the configured strategy, sorting eigenpairs in
/// descending eigenvalue order. The plan is consulted only by the parallel
/// strategy; classical and cyclic run single-threaded.
pub fn jacobi_eigen(
    c: &SymMatrix,
    cfg: &JacobiConfig,
    plan: &ExecPlan,
) -> Result<EigenDecomposition> {
    cfg.validate()?;
    let dim = c.dim();
    match cfg.precision {
        Precision::Double => solve::<f64>(c.as_slice().to_vec(), dim, cfg, plan),
        Precision::Single => solve::<f32>(
            c.as_slice().iter().map(|&v| v as f32).collect(),
            dim,
            cfg,
            plan,
        ),
    }
}

/// Writes `index,eigenvalue,explained_variance` rows, where the last column
/// is the cumulative clamped-eigenvalue fraction through that index.
pub fn write_eigen_csv(eig: &EigenDecomposition, path: &Path) -> Result<()> {
    let total: f64 = eig.eigenvalues().iter().map(|l| l.max(0.0)).sum();
    let mut text = String::from("index,eigenvalue,explained_variance\n");
    let mut running = 0.0;
    for (k, l) in eig.eigenvalues().iter().enumerate() {
        running += l.max(0.0);
        let frac = if total == 0.0 { 1.0 } else { running / total };
        text.push_str(&format!("{k},{l},{frac}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `sweep,offdiag_norm,rotations` rows; errors when the run did not
/// record history.
pub fn write_history_csv(eig: &EigenDecomposition, path: &Path) -> Result<()> {
    let history = eig
        .history
        .as_ref()
        .ok_or_else(|| Error::invalid("no convergence history recorded (enable record_history)"))?;
    let mut text = String::from("sweep,offdiag_norm,rotations\n");
    for s in history {
        text.push_str(&format!("{},{},{}\n", s.sweep, s.offdiag_norm, s.rotations));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Generic solver core (f64 / f32)
// ---------------------------------------------------------------------------

/// The handful of float operations the rotation loop needs, so the same
/// code drives both precisions.
pub(crate) trait Real:
    Copy
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn copysign(self, sign: Self) -> Self;
    fn is_finite(self) -> bool;
    fn infinity() -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn copysign(self, sign: Self) -> Self {
                <$t>::copysign(self, sign)
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn infinity() -> Self {
                <$t>::INFINITY
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

#[derive(Debug, Clone, Copy)]
struct Rot<T> {
    i: usize,
    j: usize,
    #[allow(dead_code)]
    m: T,
    t: T,
    c: T,
    s: T,
}

fn plane_params<T: Real>(aii: T, ajj: T, aij: T, i: usize, j: usize) -> Rot<T> {
    if aij == T::ZERO {
        return Rot {
            i,
            j,
            m: T::ZERO,
            t: T::ZERO,
            c: T::ONE,
            s: T::ZERO,
        };
    }
    let (m, t);
    if ajj == aii {
        m = T::infinity().copysign(aij);
        t = T::ONE.copysign(aij);
    } else {
        m = (aij + aij) / (ajj - aii);
        let m2 = m * m;
        if m2.is_finite() {
            t = m / (T::ONE + (T::ONE + m2).sqrt());
        } else {
            t = T::ONE.copysign(m);
        }
    }
    let c = T::ONE / (T::ONE + t * t).sqrt();
    let s = t * c;
    Rot { i, j, m, t, c, s }
}

/// In-place symmetric update for one rotation: rotate the off-pivot rows and
/// columns as pairs, move the diagonal by `±t·a_ij` (trace-exact), and write
/// the annihilated pair to zero.
fn rotate_sym<T: Real>(w: &mut [T], dim: usize, r: &Rot<T>) {
    let (i, j) = (r.i, r.j);
    let aij = w[i * dim + j];
    for l in 0..dim {
        if l == i || l == j {
            continue;
        }
        let ail = w[i * dim + l];
        let ajl = w[j * dim + l];
        let nil = r.c * ail - r.s * ajl;
        let njl = r.s * ail + r.c * ajl;
        w[i * dim + l] = nil;
        w[l * dim + i] = nil;
        w[j * dim + l] = njl;
        w[l * dim + j] = njl;
    }
    let h = r.t * aij;
    w[i * dim + i] = w[i * dim + i] - h;
    w[j * dim + j] = w[j * dim + j] + h;
    w[i * dim + j] = T::ZERO;
    w[j * dim + i] = T::ZERO;
}

/// `E ← E·P` on the column-major accumulator: columns `i` and `j` mix, all
/// others are untouched.
fn rotate_cols<T: Real>(e: &mut [T], dim: usize, r: &Rot<T>) {
    let (head, tail) = e.split_at_mut(r.j * dim);
    let col_i = &mut head[r.i * dim..(r.i + 1) * dim];
    let col_j = &mut tail[..dim];
    for (vi, vj) in col_i.iter_mut().zip(col_j.iter_mut()) {
        let a = *vi;
        let b = *vj;
        *vi = r.c * a - r.s * b;
        *vj = r.s * a + r.c * b;
    }
}

fn max_offdiag_flat<T: Real>(w: &[T], dim: usize) -> (T, usize, usize) {
    let (mut best, mut bi, mut bj) = (T::ZERO, 0, 1);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let a = w[i * dim + j].abs();
            if a > best {
                best = a;
                bi = i;
                bj = j;
            }
        }
    }
    (best, bi, bj)
}

struct RunOutcome {
    sweeps: usize,
    rotations: usize,
    history: Option<Vec<SweepStat>>,
}

fn solve<T: Real>(
    w: Vec<T>,
    dim: usize,
    cfg: &JacobiConfig,
    plan: &ExecPlan,
) -> Result<EigenDecomposition> {
    let mut w = w;
    let mut e = vec![T::ZERO; dim * dim];
    for k in 0..dim {
        e[k * dim + k] = T::ONE;
    }
    let (mx0, _, _) = max_offdiag_flat(&w, dim);
    let eps = if mx0 > T::ZERO {
        T::from_f64(cfg.epsilon_rel) * mx0
    } else {
        T::from_f64(cfg.epsilon_rel)
    };
    let outcome = match cfg.strategy {
        PivotStrategy::Classical => run_classical(&mut w, &mut e, dim, eps, cfg)?,
        PivotStrategy::Cyclic => run_cyclic(&mut w, &mut e, dim, eps, cfg)?,
        PivotStrategy::Parallel => run_parallel(&mut w, &mut e, dim, eps, cfg, plan)?,
    };

    let diag: Vec<f64> = (0..dim).map(|k| w[k * dim + k].to_f64()).collect();
    let mut order: Vec<usize> = (0..dim).collect();
    // Stable descending sort: ties keep their pre-sort order, so eigenvector
    // pairing is deterministic.
    order.sort_by(|&a, &b| diag[b].partial_cmp(&diag[a]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = vec![0.0f64; dim * dim];
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..dim {
            vectors[dst * dim + r] = e[src * dim + r].to_f64();
        }
    }
    let mut eig = EigenDecomposition {
        dim,
        eigenvalues,
        vectors,
        sweeps_used: outcome.sweeps,
        rotations_used: outcome.rotations,
        history: outcome.history,
    };
    if cfg.normalize_signs {
        eig.normalize_signs();
    }
    Ok(eig)
}

fn run_classical<T: Real>(
    w: &mut [T],
    e: &mut [T],
    dim: usize,
    eps: T,
    cfg: &JacobiConfig,
) -> Result<RunOutcome> {
    let npairs = dim * dim.saturating_sub(1) / 2;
    let cap = cfg.max_sweeps.saturating_mul(npairs.max(1));
    let mut rotations = 0usize;
    let mut history = cfg.record_history.then(Vec::new);
    loop {
        let (mx, i, j) = max_offdiag_flat(w, dim);
        if mx <= eps {
            break;
        }
        if rotations >= cap {
            return Err(Error::NotConverged {
                sweeps: cfg.max_sweeps,
                residual: offdiag_norm_flat(w, dim),
            });
        }
        let r = plane_params(w[i * dim + i], w[j * dim + j], w[i * dim + j], i, j);
        rotate_sym(w, dim, &r);
        rotate_cols(e, dim, &r);
        rotations += 1;
        if let Some(h) = history.as_mut() {
            // One classical "sweep" is a block of n(n−1)/2 rotations.
            if rotations.is_multiple_of(npairs.max(1)) {
                h.push(SweepStat {
                    sweep: rotations / npairs.max(1),
                    offdiag_norm: offdiag_norm_flat(w, dim),
                    rotations: npairs.max(1),
                });
            }
        }
    }
    Ok(RunOutcome {
        sweeps: rotations.div_ceil(npairs.max(1)),
        rotations,
        history,
    })
}

fn run_cyclic<T: Real>(
    w: &mut [T],
    e: &mut [T],
    dim: usize,
    eps: T,
    cfg: &JacobiConfig,
) -> Result<RunOutcome> {
    let mut sweeps = 0usize;
    let mut rotations = 0usize;
    let mut history = cfg.record_history.then(Vec::new);
    loop {
        let (mx, _, _) = max_offdiag_flat(w, dim);
        if mx <= eps {
            break;
        }
        if sweeps >= cfg.max_sweeps {
            return Err(Error::NotConverged {
                sweeps,
                residual: offdiag_norm_flat(w, dim),
            });
        }
        sweeps += 1;
        let mut rotated = 0usize;
        for i in 0..dim {
            for j in (i + 1)..dim {
                if w[i * dim + j].abs() > eps {
                    let r = plane_params(w[i * dim + i], w[j * dim + j], w[i * dim + j], i, j);
                    rotate_sym(w, dim, &r);
                    rotate_cols(e, dim, &r);
                    rotated += 1;
                }
            }
        }
        rotations += rotated;
        if let Some(h) = history.as_mut() {
            h.push(SweepStat {
                sweep: sweeps,
                offdiag_norm: offdiag_norm_flat(w, dim),
                rotations: rotated,
            });
        }
    }
    Ok(RunOutcome {
        sweeps,
        rotations,
        history,
    })
}

/// Greedy row-wise selection of a maximal batch of pivots with pairwise
/// disjoint indices, above threshold and not yet selected this sweep.
fn select_batch<T: Real>(w: &[T], dim: usize, eps: T, pair_used: &mut [bool]) -> Vec<Rot<T>> {
    let mut row_used = vec![false; dim];
    let mut batch = Vec::new();
    for i in 0..dim.saturating_sub(1) {
        if row_used[i] {
            continue;
        }
        for j in (i + 1)..dim {
            if row_used[j] || pair_used[i * dim + j] {
                continue;
            }
            if w[i * dim + j].abs() > eps {
                batch.push(plane_params(
                    w[i * dim + i],
                    w[j * dim + j],
                    w[i * dim + j],
                    i,
                    j,
                ));
                pair_used[i * dim + j] = true;
                row_used[i] = true;
                row_used[j] = true;
                break;
            }
        }
    }
    batch
}

/// Applies a batch of disjoint rotations: all row updates against the
/// pre-batch matrix, a barrier, then all column updates (which also advance
/// the eigenvector columns), then the annihilated pairs are zeroed and the
/// lower triangle mirrored so symmetry stays exact.
fn apply_batch<T: Real>(w: &mut [T], e: &mut [T], dim: usize, batch: &[Rot<T>], plan: &ExecPlan) {
    let sched = partition(PartitionKind::RotationBatch, batch.len(), plan.workers);

    // Row phase: Pᵀ·C. Each pivot reads only rows (i, j) of the pre-batch
    // matrix, so the updates commute.
    let row_updates: Vec<(Vec<T>, Vec<T>)> = run_tasks(plan, &sched, |_, range| {
        batch[range]
            .iter()
            .map(|r| {
                let mut ri = Vec::with_capacity(dim);
                let mut rj = Vec::with_capacity(dim);
                for l in 0..dim {
                    let ail = w[r.i * dim + l];
                    let ajl = w[r.j * dim + l];
                    ri.push(r.c * ail - r.s * ajl);
                    rj.push(r.s * ail + r.c * ajl);
                }
                (ri, rj)
            })
            .collect::<Vec<_>>()
    })
    .concat();
    for (r, (ri, rj)) in batch.iter().zip(&row_updates) {
        w[r.i * dim..(r.i + 1) * dim].copy_from_slice(ri);
        w[r.j * dim..(r.j + 1) * dim].copy_from_slice(rj);
    }

    // Column phase: (PᵀC)·P, plus E ← E·P on the accumulator columns.
    let e_ref: &[T] = e;
    let w_ref: &[T] = w;
    type ColUpdate<T> = (Vec<T>, Vec<T>, Vec<T>, Vec<T>);
    let col_updates: Vec<ColUpdate<T>> = run_tasks(plan, &sched, |_, range| {
        batch[range]
            .iter()
            .map(|r| {
                let mut ci = Vec::with_capacity(dim);
                let mut cj = Vec::with_capacity(dim);
                for l in 0..dim {
                    let ali = w_ref[l * dim + r.i];
                    let alj = w_ref[l * dim + r.j];
                    ci.push(r.c * ali - r.s * alj);
                    cj.push(r.s * ali + r.c * alj);
                }
                let mut ei = Vec::with_capacity(dim);
                let mut ej = Vec::with_capacity(dim);
                for l in 0..dim {
                    let a = e_ref[r.i * dim + l];
                    let b = e_ref[r.j * dim + l];
                    ei.push(r.c * a - r.s * b);
                    ej.push(r.s * a + r.c * b);
                }
                (ci, cj, ei, ej)
            })
            .collect::<Vec<_>>()
    })
    .concat();
    for (r, (ci, cj, ei, ej)) in batch.iter().zip(&col_updates) {
        for l in 0..dim {
            w[l * dim + r.i] = ci[l];
            w[l * dim + r.j] = cj[l];
        }
        e[r.i * dim..(r.i + 1) * dim].copy_from_slice(ei);
        e[r.j * dim..(r.j + 1) * dim].copy_from_slice(ej);
    }

    for r in batch {
        w[r.i * dim + r.j] = T::ZERO;
        w[r.j * dim + r.i] = T::ZERO;
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            w[j * dim + i] = w[i * dim + j];
        }
    }
}

fn run_parallel<T: Real>(
    w: &mut [T],
    e: &mut [T],
    dim: usize,
    eps: T,
    cfg: &JacobiConfig,
    plan: &ExecPlan,
) -> Result<RunOutcome> {
    let mut pair_used = vec![false; dim * dim];
    let mut history = cfg.record_history.then(Vec::new);
    let mut rotations = 0usize;
    let (mx, _, _) = max_offdiag_flat(w, dim);
    if mx <= eps {
        return Ok(RunOutcome {
            sweeps: 0,
            rotations: 0,
            history,
        });
    }
    let mut sweeps = 1usize;
    let mut sweep_rotations = 0usize;
    loop {
        let batch = select_batch(w, dim, eps, &mut pair_used);
        if batch.is_empty() {
            if let Some(h) = history.as_mut() {
                h.push(SweepStat {
                    sweep: sweeps,
                    offdiag_norm: offdiag_norm_flat(w, dim),
                    rotations: sweep_rotations,
                });
            }
            let (mx, _, _) = max_offdiag_flat(w, dim);
            if mx <= eps {
                break;
            }
            // Entries above threshold remain but were all selected this
            // sweep: reset the sweep mask and start the next sweep.
            if sweeps >= cfg.max_sweeps {
                return Err(Error::NotConverged {
                    sweeps,
                    residual: offdiag_norm_flat(w, dim),
                });
            }
            pair_used.fill(false);
            sweeps += 1;
            sweep_rotations = 0;
            continue;
        }
        rotations += batch.len();
        sweep_rotations += batch.len();
        apply_batch(w, e, dim, &batch, plan);
    }
    Ok(RunOutcome {
        sweeps,
        rotations,
        history,
    })
}
