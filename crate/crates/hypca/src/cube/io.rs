//! Raw cube files and PGM rendering.
//!
//! A cube on disk is a pair of files sharing a stem:
//!
//! * `<stem>.hdr.json` — header sidecar with fields `width`, `height`,
//!   `bands`, `dtype` (always `"f32"`), `interleave` (always `"bsq"`) and
//!   `byteorder` (always `"le"`);
//! * `<stem>.raw` — headerless little-endian `f32` samples, band-sequential.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::HyperCube;

/// Header sidecar describing a raw cube file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeHeader {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub dtype: String,
    pub interleave: String,
    pub byteorder: String,
}

impl CubeHeader {
    pub fn for_cube(cube: &HyperCube) -> Self {
        CubeHeader {
            width: cube.width(),
            height: cube.height(),
            bands: cube.bands(),
            dtype: "f32".to_string(),
            interleave: "bsq".to_string(),
            byteorder: "le".to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("header serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let header: CubeHeader = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "cube header".to_string(),
            msg: e.to_string(),
        })?;
        for (field, value, want) in [
            ("dtype", header.dtype.as_str(), "f32"),
            ("interleave", header.interleave.as_str(), "bsq"),
            ("byteorder", header.byteorder.as_str(), "le"),
        ] {
            if value != want {
                return Err(Error::Parse {
                    what: "cube header".to_string(),
                    msg: format!("unsupported {field} {value:?} (only {want:?} is understood)"),
                });
            }
        }
        Ok(header)
    }
}

/// Derives `(<stem>.hdr.json, <stem>.raw)` from a path stem.
pub fn cube_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let mut hdr = stem.as_os_str().to_owned();
    hdr.push(".hdr.json");
    let mut raw = stem.as_os_str().to_owned();
    raw.push(".raw");
    (PathBuf::from(hdr), PathBuf::from(raw))
}

/// Writes the header sidecar and the raw band-sequential data file.
pub fn save_cube(cube: &HyperCube, header_path: &Path, data_path: &Path) -> Result<()> {
    std::fs::write(header_path, CubeHeader::for_cube(cube).to_json())
        .map_err(|e| Error::io(header_path, e))?;
    let file = std::fs::File::create(data_path).map_err(|e| Error::io(data_path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for v in cube.data() {
        out.write_all(&v.to_le_bytes())
            .map_err(|e| Error::io(data_path, e))?;
    }
    out.flush().map_err(|e| Error::io(data_path, e))?;
    Ok(())
}

/// Loads a cube, checking that the data file holds exactly
/// `width × height × bands` little-endian `f32` values, all finite.
pub fn load_cube(header_path: &Path, data_path: &Path) -> Result<HyperCube> {
    let text = std::fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header = CubeHeader::parse(&text)?;
    let bytes = std::fs::read(data_path).map_err(|e| Error::io(data_path, e))?;
    let expected = (header.width * header.height * header.bands) as u64 * 4;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: data_path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    HyperCube::new(header.width, header.height, header.bands, data)
}

/// Renders `values` (one scalar per pixel, `width × height` of them) as a
/// binary 8-bit PGM, scaling min → 0 and max → 255. A constant field maps to
/// mid-gray 128.
pub fn render_band_pgm(values: &[f32], width: usize, height: usize, out_path: &Path) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("PGM image must have nonzero area"));
    }
    if values.len() != width * height {
        return Err(Error::invalid(format!(
            "PGM expects {} values ({width}×{height}), got {}",
            width * height,
            values.len()
        )));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "PGM values",
            index,
        });
    }
    let min = values.iter().cloned().fold(f32::INFINITY, f32::min);
    let max = values.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    let mut bytes = Vec::with_capacity(values.len() + 32);
    bytes.extend_from_slice(format!("P5\n{width} {height}\n255\n").as_bytes());
    if max > min {
        let scale = 255.0 / (max - min) as f64;
        for &v in values {
            let g = ((v - min) as f64 * scale).round();
            bytes.push(g.clamp(0.0, 255.0) as u8);
        }
    } else {
        bytes.extend(std::iter::repeat_n(128u8, values.len()));
    }
    std::fs::write(out_path, bytes).map_err(|e| Error::io(out_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_cube(width: usize, height: usize, bands: usize, seed: u64) -> HyperCube {
        let mut rng = Stream::new(seed, &[]);
        let data = (0..width * height * bands)
            .map(|_| rng.next_range(-2.0, 2.0) as f32)
            .collect();
        HyperCube::new(width, height, bands, data).unwrap()
    }

    /// Minimal P5 reader used as the independent side of the render checks.
    fn parse_pgm(bytes: &[u8]) -> (usize, usize, Vec<u8>) {
        let text = String::from_utf8_lossy(&bytes[..32.min(bytes.len())]);
        let mut parts = text.split_ascii_whitespace();
        assert_eq!(parts.next(), Some("P5"));
        let w: usize = parts.next().unwrap().parse().unwrap();
        let h: usize = parts.next().unwrap().parse().unwrap();
        assert_eq!(parts.next(), Some("255"));
        let pixels = bytes[bytes.len() - w * h..].to_vec();
        (w, h, pixels)
    }

    #[test]
    fn header_round_trips_bit_exactly() {
        let cube = random_cube(3, 2, 4, 1);
        let header = CubeHeader::for_cube(&cube);
        let parsed = CubeHeader::parse(&header.to_json()).unwrap();
        assert_eq!(parsed, header);
        // And the canonical serialization is stable.
        assert_eq!(parsed.to_json(), header.to_json());
    }

    #[test]
    fn header_rejects_unknown_dtype() {
        let text =
            r#"{"width":1,"height":1,"bands":1,"dtype":"f64","interleave":"bsq","byteorder":"le"}"#;
        assert!(CubeHeader::parse(text).is_err());
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cube = random_cube(8, 8, 5, 42);
        let (hdr, raw) = cube_paths(&dir.path().join("rt"));
        save_cube(&cube, &hdr, &raw).unwrap();
        let back = load_cube(&hdr, &raw).unwrap();
        assert_eq!(back.width(), 8);
        assert_eq!(back.bands(), 5);
        let same = cube
            .data()
            .iter()
            .zip(back.data())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same, "round trip changed bits");
    }

    #[test]
    fn data_file_size_is_pixels_bands_times_four() {
        let dir = tempfile::tempdir().unwrap();
        let cube = random_cube(100, 100, 50, 3);
        let (hdr, raw) = cube_paths(&dir.path().join("big"));
        save_cube(&cube, &hdr, &raw).unwrap();
        assert_eq!(std::fs::metadata(&raw).unwrap().len(), 2_000_000);
    }

    #[test]
    fn truncated_data_file_reports_expected_and_actual() {
        let dir = tempfile::tempdir().unwrap();
        let cube = random_cube(4, 4, 3, 9);
        let (hdr, raw) = cube_paths(&dir.path().join("short"));
        save_cube(&cube, &hdr, &raw).unwrap();
        let bytes = std::fs::read(&raw).unwrap();
        std::fs::write(&raw, &bytes[..bytes.len() - 4]).unwrap();
        match load_cube(&hdr, &raw).unwrap_err() {
            Error::SizeMismatch {
                expected, actual, ..
            } => {
                assert_eq!(expected, 4 * 4 * 3 * 4);
                assert_eq!(actual, expected - 4);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn load_rejects_non_finite_with_first_index() {
        let dir = tempfile::tempdir().unwrap();
        let cube = random_cube(2, 2, 2, 5);
        let (hdr, raw) = cube_paths(&dir.path().join("nan"));
        save_cube(&cube, &hdr, &raw).unwrap();
        let mut bytes = std::fs::read(&raw).unwrap();
        bytes[3 * 4..4 * 4].copy_from_slice(&f32::NAN.to_le_bytes());
        std::fs::write(&raw, bytes).unwrap();
        match load_cube(&hdr, &raw).unwrap_err() {
            Error::NonFinite { index, .. } => assert_eq!(index, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn constant_field_renders_mid_gray() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.pgm");
        render_band_pgm(&[3.5; 6], 3, 2, &path).unwrap();
        let (w, h, px) = parse_pgm(&std::fs::read(&path).unwrap());
        assert_eq!((w, h), (3, 2));
        assert!(px.iter().all(|&g| g == 128));
    }

    #[test]
    fn endpoints_map_to_zero_and_full_scale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ends.pgm");
        render_band_pgm(&[0.0, 1.0], 2, 1, &path).unwrap();
        let (_, _, px) = parse_pgm(&std::fs::read(&path).unwrap());
        assert_eq!(px, vec![0, 255]);
    }

    #[test]
    fn rendering_is_monotone_in_input_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mono.pgm");
        let mut rng = Stream::new(17, &[]);
        let values: Vec<f32> = (0..16).map(|_| rng.next_range(-5.0, 5.0) as f32).collect();
        render_band_pgm(&values, 4, 4, &path).unwrap();
        let (_, _, px) = parse_pgm(&std::fs::read(&path).unwrap());
        // Rank-order comparison: whenever input a <= input b, gray(a) <= gray(b).
        for a in 0..values.len() {
            for b in 0..values.len() {
                if values[a] <= values[b] {
                    assert!(px[a] <= px[b], "pixel order violated at ({a}, {b})");
                }
            }
        }
    }

    #[test]
    fn zero_area_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(render_band_pgm(&[], 0, 4, &dir.path().join("z.pgm")).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_is_bit_exact_for_finite_inputs(
            width in 1usize..6,
            height in 1usize..6,
            bands in 1usize..5,
            seed in 0u64..1000,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let mut rng = Stream::new(seed, &[width as u64, height as u64, bands as u64]);
            let data: Vec<f32> = (0..width * height * bands)
                .map(|_| rng.next_range(-1e6, 1e6) as f32)
                .collect();
            let cube = HyperCube::new(width, height, bands, data).unwrap();
            let (hdr, raw) = cube_paths(&dir.path().join("p"));
            save_cube(&cube, &hdr, &raw).unwrap();
            let back = load_cube(&hdr, &raw).unwrap();
            for (a, b) in cube.data().iter().zip(back.data()) {
                proptest::prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
