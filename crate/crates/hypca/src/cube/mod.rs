//! Hyperspectral cube data model, raw binary I/O and synthetic scenes.
//!
//! A cube is `N = width × height` spatial samples by `M` spectral bands,
//! stored band-major (band-sequential): all `N` values of band 0, then all
//! of band 1, and so on. The value of pixel `p` in band `b` therefore lives
//! at `data[b * N + p]`.

mod io;
mod synth;

pub use io::{cube_paths, load_cube, render_band_pgm, save_cube, CubeHeader};
pub use synth::{
    builtin_signatures, generate_synthetic, load_signatures_csv, SignatureSet, SynthCube,
};

use crate::error::{Error, Result};

/// An N-pixel × M-band image volume in single-precision, band-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f32>,
}

impl HyperCube {
    /// Validates dimensions, length and finiteness.
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<f32>) -> Result<Self> {
        let pixels = width
            .checked_mul(height)
            .ok_or_else(|| Error::invalid("width × height overflows"))?;
        if pixels == 0 {
            return Err(Error::invalid(format!(
                "cube must have at least one pixel (width {width}, height {height})"
            )));
        }
        if bands == 0 {
            return Err(Error::invalid("cube must have at least one band"));
        }
        let expected = pixels
            .checked_mul(bands)
            .ok_or_else(|| Error::invalid("pixels × bands overflows"))?;
        if data.len() != expected {
            return Err(Error::invalid(format!(
                "cube data has {} values, expected {expected} ({pixels} pixels × {bands} bands)",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "cube data",
                index,
            });
        }
        Ok(HyperCube {
            width,
            height,
            bands,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Spatial sample count N.
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// Spectral band count M.
    pub fn bands(&self) -> usize {
        self.bands
    }

    /// Contiguous values of one band.
    #[inline]
    pub fn band(&self, b: usize) -> &[f32] {
        let n = self.pixels();
        &self.data[b * n..(b + 1) * n]
    }

    /// Value of pixel `p` in band `b`.
    #[inline]
    pub fn value(&self, p: usize, b: usize) -> f32 {
        self.data[b * self.pixels() + p]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}
