//! Synthetic scene generation from spectral signature libraries.
//!
//! Each pixel is a convex combination of a randomly chosen subset of
//! signatures (abundances drawn uniformly on the simplex), plus zero-mean
//! Gaussian noise sized so that `10·log10(P_signal / σ²)` equals the
//! requested SNR, where `P_signal` is the mean squared value of the
//! noiseless cube. `snr_db = +∞` disables noise entirely.

use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::{partition, run_tasks, ExecPlan, PartitionKind};
use crate::rng::{salt, Stream};

use super::HyperCube;

/// A library of endmember reflectance spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSet {
    bands: usize,
    spectra: Vec<f64>,
    names: Vec<String>,
}

impl SignatureSet {
    /// `spectra` is `count × bands`, one spectrum per row, all values ≥ 0.
    pub fn new(bands: usize, spectra: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if bands == 0 {
            return Err(Error::invalid("signatures need at least one band"));
        }
        if names.is_empty() || spectra.len() != names.len() * bands {
            return Err(Error::invalid(format!(
                "signature matrix must be count × bands ({} names × {bands} bands, got {} values)",
                names.len(),
                spectra.len()
            )));
        }
        if let Some(index) = spectra.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "signature value at flat index {index} is negative or non-finite"
            )));
        }
        Ok(SignatureSet {
            bands,
            spectra,
            names,
        })
    }

    pub fn count(&self) -> usize {
        self.names.len()
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn spectrum(&self, k: usize) -> &[f64] {
        &self.spectra[k * self.bands..(k + 1) * self.bands]
    }

    pub fn name(&self, k: usize) -> &str {
        &self.names[k]
    }

    /// Angle in radians between two spectra.
    pub fn spectral_angle(&self, a: usize, b: usize) -> f64 {
        let (sa, sb) = (self.spectrum(a), self.spectrum(b));
        let dot: f64 = sa.iter().zip(sb).map(|(x, y)| x * y).sum();
        let na: f64 = sa.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = sb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        (dot / (na * nb)).clamp(-1.0, 1.0).acos()
    }
}

/// Loads signatures from CSV: the first row holds the band count `M`, each
/// following row a name and `M` nonnegative values.
pub fn load_signatures_csv(path: &Path) -> Result<SignatureSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let bands: usize = lines
        .next()
        .ok_or_else(|| Error::invalid(format!("{}: empty signature file", path.display())))?
        .parse()
        .map_err(|_| Error::Parse {
            what: format!("{}", path.display()),
            msg: "first row must be the band count".to_string(),
        })?;
    let mut spectra = Vec::new();
    let mut names = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let mut fields = line.split(',').map(str::trim);
        let name = fields.next().unwrap_or_default();
        if name.is_empty() {
            return Err(Error::Parse {
                what: format!("{} row {}", path.display(), lineno + 2),
                msg: "missing signature name".to_string(),
            });
        }
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    what: format!("{} row {}", path.display(), lineno + 2),
                    msg: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != bands {
            return Err(Error::Parse {
                what: format!("{} row {}", path.display(), lineno + 2),
                msg: format!("expected {bands} values, found {}", values.len()),
            });
        }
        names.push(name.to_string());
        spectra.extend(values);
    }
    SignatureSet::new(bands, spectra, names)
}

/// Minimum pairwise spectral angle the builtin library must exhibit.
const MIN_SIGNATURE_ANGLE: f64 = 0.05;
const MAX_SIGNATURE_ATTEMPTS: u64 = 100;

/// Generates `count` smooth, nonnegative, mutually distinct spectra as sums
/// of random Gaussian bumps over a baseline. Deterministic per seed.
///
/// Distinctness means every pairwise spectral angle exceeds 0.05 rad; if a
/// draw violates that, the whole set is regenerated from the next derived
/// seed (up to 100 attempts, after which the best set seen is returned).
/// Sets with one signature or one band skip the check.
pub fn builtin_signatures(bands: usize, count: usize, seed: u64) -> Result<SignatureSet> {
    if bands == 0 || count == 0 {
        return Err(Error::invalid(
            "builtin signatures need bands >= 1 and count >= 1",
        ));
    }
    let mut best: Option<(f64, SignatureSet)> = None;
    for attempt in 0..MAX_SIGNATURE_ATTEMPTS {
        let set = bump_signatures(bands, count, seed, attempt)?;
        if count == 1 || bands == 1 {
            return Ok(set);
        }
        let mut min_angle = f64::INFINITY;
        for a in 0..count {
            for b in (a + 1)..count {
                min_angle = min_angle.min(set.spectral_angle(a, b));
            }
        }
        if min_angle > MIN_SIGNATURE_ANGLE {
            return Ok(set);
        }
        if best.as_ref().is_none_or(|(m, _)| min_angle > *m) {
            best = Some((min_angle, set));
        }
    }
    Ok(best.expect("at least one attempt ran").1)
}

fn bump_signatures(bands: usize, count: usize, seed: u64, attempt: u64) -> Result<SignatureSet> {
    let mut spectra = Vec::with_capacity(count * bands);
    let mut names = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = Stream::new(seed, &[salt::SIGNATURE, attempt, k as u64]);
        let baseline = rng.next_range(0.05, 0.3);
        let bumps = 3 + (rng.next_u64() % 4) as usize;
        let params: Vec<(f64, f64, f64)> = (0..bumps)
            .map(|_| {
                let amp = rng.next_range(0.1, 1.0);
                let center = rng.next_range(0.0, bands as f64);
                let width = rng
                    .next_range(bands as f64 / 30.0, bands as f64 / 6.0)
                    .max(0.5);
                (amp, center, width)
            })
            .collect();
        for b in 0..bands {
            let mut v = baseline;
            for &(amp, center, width) in &params {
                let z = (b as f64 - center) / width;
                v += amp * (-0.5 * z * z).exp();
            }
            spectra.push(v);
        }
        names.push(format!("synthetic-{k}"));
    }
    SignatureSet::new(bands, spectra, names)
}

/// A generated cube together with the power accounting of its own signal
/// and noise buffers.
#[derive(Debug, Clone)]
pub struct SynthCube {
    pub cube: HyperCube,
    /// Mean squared value of the noiseless cube.
    pub signal_power: f64,
    /// Mean squared value of the realized noise (0 when noise is disabled).
    pub noise_power: f64,
    /// `10·log10(signal_power / noise_power)`; +∞ when noise is disabled.
    pub empirical_snr_db: f64,
    /// Indices of the signatures mixed into the scene.
    pub chosen: Vec<usize>,
}

/// Draws one abundance vector uniformly on the `k`-simplex (normalized
/// unit exponentials), keyed by `(seed, pixel)`.
pub(crate) fn abundances(seed: u64, pixel: usize, k: usize) -> Vec<f64> {
    let mut rng = Stream::new(seed, &[salt::ABUNDANCE, pixel as u64]);
    let mut a: Vec<f64> = (0..k).map(|_| rng.next_exp()).collect();
    let total: f64 = a.iter().sum();
    for v in &mut a {
        *v /= total;
    }
    a
}

/// Generates a `width × height × sigs.bands()` cube by mixing `endmembers`
/// randomly chosen signatures per the module description. Deterministic for
/// a fixed seed under any plan.
pub fn generate_synthetic(
    sigs: &SignatureSet,
    width: usize,
    height: usize,
    endmembers: usize,
    snr_db: f64,
    seed: u64,
    plan: &ExecPlan,
) -> Result<SynthCube> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("width and height must be at least 1"));
    }
    if endmembers == 0 {
        return Err(Error::invalid("endmembers must be at least 1"));
    }
    if endmembers > sigs.count() {
        return Err(Error::invalid(format!(
            "requested {endmembers} endmembers but the library holds {}",
            sigs.count()
        )));
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("snr_db must be finite or +inf"));
    }
    let n = width * height;
    let m = sigs.bands();

    // Random distinct endmember choice (partial Fisher-Yates).
    let mut pool: Vec<usize> = (0..sigs.count()).collect();
    let mut rng = Stream::new(seed, &[salt::ENDMEMBER_CHOICE]);
    for i in 0..endmembers {
        let j = i + (rng.next_u64() as usize) % (pool.len() - i);
        pool.swap(i, j);
    }
    let chosen: Vec<usize> = pool[..endmembers].to_vec();
    let spectra: Vec<&[f64]> = chosen.iter().map(|&k| sigs.spectrum(k)).collect();

    // Per-pixel abundances, keyed by pixel index so worker count is moot.
    let sched = partition(PartitionKind::ByPixelChunk, n, plan.workers);
    let abunds: Vec<Vec<f64>> = run_tasks(plan, &sched, |_, range| {
        let mut out = Vec::with_capacity(range.len() * endmembers);
        for p in range {
            out.extend(abundances(seed, p, endmembers));
        }
        out
    });
    let abund: Vec<f64> = abunds.into_iter().flatten().collect();

    let noiseless = |p: usize, b: usize| -> f64 {
        let a = &abund[p * endmembers..(p + 1) * endmembers];
        a.iter().zip(&spectra).map(|(w, s)| w * s[b]).sum::<f64>()
    };

    // Pass 1: signal power, accumulated per band and combined in band order.
    let band_sched = partition(PartitionKind::ByBand, m, plan.workers);
    let partial_sig: Vec<f64> = run_tasks(plan, &band_sched, |_, range| {
        let mut acc = 0.0f64;
        for b in range {
            for p in 0..n {
                let v = noiseless(p, b);
                acc += v * v;
            }
        }
        acc
    });
    let signal_power = partial_sig.iter().sum::<f64>() / (n * m) as f64;

    let sigma = if snr_db.is_infinite() || signal_power == 0.0 {
        0.0
    } else {
        (signal_power / 10f64.powf(snr_db / 10.0)).sqrt()
    };

    // Pass 2: assemble band-major data, drawing noise keyed by (pixel, band).
    let band_chunks: Vec<Vec<(Vec<f32>, f64)>> = run_tasks(plan, &band_sched, |_, range| {
        range
            .map(|b| {
                let mut slice = vec![0f32; n];
                let mut sq = 0.0f64;
                for (p, out) in slice.iter_mut().enumerate() {
                    let v = noiseless(p, b);
                    let nz = if sigma > 0.0 {
                        sigma
                            * Stream::new(seed, &[salt::NOISE, p as u64, b as u64]).next_gaussian()
                    } else {
                        0.0
                    };
                    sq += nz * nz;
                    *out = (v + nz) as f32;
                }
                (slice, sq)
            })
            .collect()
    });
    let mut data = Vec::with_capacity(n * m);
    let mut noise_sq = 0.0f64;
    for (slice, sq) in band_chunks.into_iter().flatten() {
        data.extend_from_slice(&slice);
        noise_sq += sq;
    }
    let noise_power = noise_sq / (n * m) as f64;
    let empirical_snr_db = if noise_power == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal_power / noise_power).log10()
    };

    Ok(SynthCube {
        cube: HyperCube::new(width, height, m, data)?,
        signal_power,
        noise_power,
        empirical_snr_db,
        chosen,
    })
}
