//! Grayscale raster export of value grids.
//!
//! The mapping is fixed and monotone: gray = floor(255 * clamp(v, 0, 1)).
//! Raster rows follow grid scale order (scale index 0 at the top), columns
//! are time, so identical grids always produce identical bytes.

use crate::CliError;

/// Binary PGM (P5) bytes for a scale-major grid.
pub fn grid_to_pgm(
    values_scale_major: &[f64],
    n_times: usize,
    n_scales: usize,
) -> Result<Vec<u8>, CliError> {
    if n_times == 0 || n_scales == 0 || values_scale_major.len() != n_times * n_scales {
        return Err(CliError::Data(format!(
            "malformed grid: {} values for {n_times} x {n_scales}",
            values_scale_major.len()
        )));
    }
    if let Some(bad) = values_scale_major.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Data(format!(
            "malformed grid: non-finite value {bad}"
        )));
    }
    let mut bytes = Vec::with_capacity(32 + n_times * n_scales);
    bytes.extend_from_slice(format!("P5\n{n_times} {n_scales}\n255\n").as_bytes());
    for si in 0..n_scales {
        for t in 0..n_times {
            let v = values_scale_major[si * n_times + t].clamp(0.0, 1.0);
            bytes.push((v * 255.0).floor().min(255.0) as u8);
        }
    }
    Ok(bytes)
}

#[cfg(feature = "png")]
pub fn write_png(
    path: &std::path::Path,
    values_scale_major: &[f64],
    n_times: usize,
    n_scales: usize,
) -> Result<(), CliError> {
    let pgm = grid_to_pgm(values_scale_major, n_times, n_scales)?;
    let pixels = pgm[pgm.len() - n_times * n_scales..].to_vec();
    let img = image::GrayImage::from_raw(n_times as u32, n_scales as u32, pixels)
        .expect("pixel buffer matches dimensions");
    img.save(path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_gray_mapping() {
        // grid rows: scale 0 = {0, 1}, scale 1 = {0.5, 0.5}
        let bytes = grid_to_pgm(&[0.0, 1.0, 0.5, 0.5], 2, 2).unwrap();
        assert_eq!(&bytes[..12], b"P5\n2 2\n255\n\x00");
        assert_eq!(&bytes[11..], &[0u8, 255, 127, 127]);
    }

    #[test]
    fn values_clamp_to_unit_range() {
        let bytes = grid_to_pgm(&[-0.5, 2.0], 2, 1).unwrap();
        assert_eq!(&bytes[bytes.len() - 2..], &[0u8, 255]);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(grid_to_pgm(&[], 0, 0).is_err());
        assert!(grid_to_pgm(&[1.0, 2.0, 3.0], 2, 2).is_err());
        assert!(grid_to_pgm(&[f64::NAN, 0.0], 2, 1).is_err());
    }
}
