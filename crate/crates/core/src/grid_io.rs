//! Deterministic on-disk grid formats.
//!
//! CSV grids: header row holds the scales, the first column holds ISO dates,
//! cells carry 9 significant digits. Identical grids always serialize to
//! identical bytes.
//!
//! Binary scalograms ("CWSG"): a little-endian layout that round-trips the
//! full complex coefficient grid bit-exactly.
//!
//! ```text
//! magic           4 bytes  "CWSG"
//! version         u32      currently 1
//! n_times         u64
//! n_scales        u64
//! anchor          i64      days since 1970-01-01
//! alpha           f64
//! causal          u8       0 or 1
//! mlf_mode        u8       0 = series-auto, 1 = stretched-exp
//! remove_mean     u8       0 or 1
//! series_tol      f64
//! crossover_x     f64
//! support_eps     f64
//! scales          n_scales * f64
//! coefficients    n_times * n_scales * (re f64, im f64), time-major
//! support         n_times * n_scales * f64, time-major
//! ```

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use num_complex::Complex64;
use thiserror::Error;

use crate::kernel::WaveletParams;
use crate::mlf::{MlfMode, MlfParams};
use crate::transform::{PhaseGrid, PowerGrid, ScaleGrid, Scalogram};

const MAGIC: &[u8; 4] = b"CWSG";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GridIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed grid: {0}")]
    Malformed(String),
    #[error("bad magic bytes; not a CWSG scalogram file")]
    BadMagic,
    #[error("unsupported CWSG version {0}")]
    BadVersion(u32),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GridIoError + '_ {
    move |source| GridIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// A value grid read back from CSV: scale-major values plus axes.
#[derive(Debug, Clone)]
pub struct GridData {
    pub scales: Vec<f64>,
    pub start_date: NaiveDate,
    pub n_times: usize,
    /// Scale-major: `values[s * n_times + t]`.
    pub values: Vec<f64>,
}

/// Serialize a grid to CSV with 9-significant-digit cells.
///
/// `values` is scale-major with `n_times` entries per scale row; output rows
/// are dates.
pub fn write_grid_csv<W: Write>(
    mut w: W,
    scales: &[f64],
    start_date: NaiveDate,
    n_times: usize,
    values: &[f64],
) -> std::io::Result<()> {
    write!(w, "date")?;
    for s in scales {
        write!(w, ",{s}")?;
    }
    writeln!(w)?;
    for t in 0..n_times {
        let date = start_date + chrono::Days::new(t as u64);
        write!(w, "{}", date.format("%Y-%m-%d"))?;
        for si in 0..scales.len() {
            write!(w, ",{:.8e}", values[si * n_times + t])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_power_csv(path: &Path, grid: &PowerGrid) -> Result<(), GridIoError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_grid_csv(
        &mut w,
        grid.grid().scales(),
        grid.time_anchor(),
        grid.n_times(),
        grid.values(),
    )
    .map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn write_phase_csv(path: &Path, grid: &PhaseGrid) -> Result<(), GridIoError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_grid_csv(
        &mut w,
        grid.grid().scales(),
        grid.time_anchor(),
        grid.n_times(),
        grid.values(),
    )
    .map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Parse a CSV grid written by [`write_grid_csv`].
pub fn read_grid_csv(path: &Path) -> Result<GridData, GridIoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| GridIoError::Malformed("empty file".to_string()))?;
    let mut scales = Vec::new();
    for (i, field) in header.split(',').enumerate() {
        if i == 0 {
            continue; // date column label
        }
        let s: f64 = field
            .trim()
            .parse()
            .map_err(|_| GridIoError::Malformed(format!("bad scale {field:?} in header")))?;
        scales.push(s);
    }
    if scales.is_empty() {
        return Err(GridIoError::Malformed("header has no scales".to_string()));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut start_date = None;
    let mut prev_date: Option<NaiveDate> = None;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let date_field = fields
            .next()
            .ok_or_else(|| GridIoError::Malformed(format!("line {}: empty row", lineno + 2)))?;
        let date = NaiveDate::parse_from_str(date_field.trim(), "%Y-%m-%d").map_err(|_| {
            GridIoError::Malformed(format!("line {}: bad date {date_field:?}", lineno + 2))
        })?;
        if start_date.is_none() {
            start_date = Some(date);
        }
        if let Some(prev) = prev_date {
            if (date - prev).num_days() != 1 {
                return Err(GridIoError::Malformed(format!(
                    "line {}: dates must be consecutive days",
                    lineno + 2
                )));
            }
        }
        prev_date = Some(date);
        let row: Result<Vec<f64>, GridIoError> = fields
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    GridIoError::Malformed(format!("line {}: bad value {f:?}", lineno + 2))
                })
            })
            .collect();
        let row = row?;
        if row.len() != scales.len() {
            return Err(GridIoError::Malformed(format!(
                "line {}: {} values for {} scales",
                lineno + 2,
                row.len(),
                scales.len()
            )));
        }
        rows.push(row);
    }
    let start_date = start_date.ok_or_else(|| GridIoError::Malformed("no data rows".to_string()))?;
    let n_times = rows.len();
    let mut values = vec![0.0; n_times * scales.len()];
    for (t, row) in rows.iter().enumerate() {
        for (si, &v) in row.iter().enumerate() {
            values[si * n_times + t] = v;
        }
    }
    Ok(GridData {
        scales,
        start_date,
        n_times,
        values,
    })
}

/// Write the full scalogram in the CWSG binary layout.
pub fn write_scalogram(path: &Path, sc: &Scalogram) -> Result<(), GridIoError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(sc.n_times() as u64).to_le_bytes())?;
        w.write_all(&(sc.n_scales() as u64).to_le_bytes())?;
        let anchor = sc
            .time_anchor()
            .signed_duration_since(NaiveDate::from_ymd_opt(1970, 1, 1).unwrap())
            .num_days();
        w.write_all(&anchor.to_le_bytes())?;
        let p = sc.params();
        w.write_all(&p.alpha.to_le_bytes())?;
        w.write_all(&[p.causal as u8])?;
        w.write_all(&[match p.mlf.mode {
            MlfMode::SeriesAuto => 0u8,
            MlfMode::StretchedExp => 1u8,
        }])?;
        w.write_all(&[p.remove_mean as u8])?;
        w.write_all(&p.mlf.series_tol.to_le_bytes())?;
        w.write_all(&p.mlf.crossover_x.to_le_bytes())?;
        w.write_all(&p.support_eps.to_le_bytes())?;
        for &s in sc.grid().scales() {
            w.write_all(&s.to_le_bytes())?;
        }
        for t in 0..sc.n_times() {
            for si in 0..sc.n_scales() {
                let c = sc.coeff(t, si);
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
        for t in 0..sc.n_times() {
            for si in 0..sc.n_scales() {
                w.write_all(&sc.support(t, si).to_le_bytes())?;
            }
        }
        w.flush()
    })();
    res.map_err(io_err(path))
}

/// Read a CWSG binary scalogram.
pub fn read_scalogram(path: &Path) -> Result<Scalogram, GridIoError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let malformed = |what: &str| GridIoError::Malformed(format!("truncated file reading {what}"));

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| malformed("magic"))?;
    if &magic != MAGIC {
        return Err(GridIoError::BadMagic);
    }
    let version = read_u32(&mut r).map_err(|_| malformed("version"))?;
    if version != VERSION {
        return Err(GridIoError::BadVersion(version));
    }
    let n_times = read_u64(&mut r).map_err(|_| malformed("n_times"))? as usize;
    let n_scales = read_u64(&mut r).map_err(|_| malformed("n_scales"))? as usize;
    if n_times == 0 || n_scales == 0 || n_times.saturating_mul(n_scales) > 1 << 32 {
        return Err(GridIoError::Malformed(format!(
            "implausible dimensions {n_times} x {n_scales}"
        )));
    }
    let anchor_days = read_i64(&mut r).map_err(|_| malformed("anchor"))?;
    let anchor = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()
        + chrono::Duration::days(anchor_days);
    let alpha = read_f64(&mut r).map_err(|_| malformed("alpha"))?;
    let mut flags = [0u8; 3];
    r.read_exact(&mut flags).map_err(|_| malformed("flags"))?;
    let causal = flags[0] != 0;
    let mode = match flags[1] {
        0 => MlfMode::SeriesAuto,
        1 => MlfMode::StretchedExp,
        other => {
            return Err(GridIoError::Malformed(format!(
                "unknown modulation mode tag {other}"
            )))
        }
    };
    let remove_mean = flags[2] != 0;
    let series_tol = read_f64(&mut r).map_err(|_| malformed("series_tol"))?;
    let crossover_x = read_f64(&mut r).map_err(|_| malformed("crossover_x"))?;
    let support_eps = read_f64(&mut r).map_err(|_| malformed("support_eps"))?;

    let mut scales = Vec::with_capacity(n_scales);
    for _ in 0..n_scales {
        scales.push(read_f64(&mut r).map_err(|_| malformed("scales"))?);
    }
    let grid = ScaleGrid::new(scales)
        .map_err(|e| GridIoError::Malformed(format!("bad scale grid: {e}")))?;

    let mut coeffs = vec![Complex64::new(0.0, 0.0); n_times * n_scales];
    for t in 0..n_times {
        for si in 0..n_scales {
            let re = read_f64(&mut r).map_err(|_| malformed("coefficients"))?;
            let im = read_f64(&mut r).map_err(|_| malformed("coefficients"))?;
            coeffs[si * n_times + t] = Complex64::new(re, im);
        }
    }
    let mut support = vec![0.0_f64; n_times * n_scales];
    for t in 0..n_times {
        for si in 0..n_scales {
            support[si * n_times + t] = read_f64(&mut r).map_err(|_| malformed("support"))?;
        }
    }

    let mut mlf = MlfParams::new(alpha, mode);
    mlf.series_tol = series_tol;
    mlf.crossover_x = crossover_x;
    let params = WaveletParams {
        alpha,
        causal,
        mlf,
        support_eps,
        remove_mean,
    };
    Ok(Scalogram::from_raw(
        coeffs, support, grid, params, anchor, n_times,
    ))
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_i64<R: Read>(r: &mut R) -> std::io::Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TimeSeries;
    use crate::transform::{cwt, power, Normalization};

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn small_scalogram() -> Scalogram {
        let values: Vec<f64> = (0..40).map(|i| (i as f64 / 4.0).sin() + 0.3).collect();
        let s = TimeSeries::gap_free(values, date("2021-06-01")).unwrap();
        let grid = ScaleGrid::new(vec![2.0, 5.0, 9.0]).unwrap();
        cwt(&s, &grid, &WaveletParams::default()).unwrap()
    }

    #[test]
    fn csv_round_trip_and_exact_format() {
        let values = vec![0.0, 0.5, 1.0, 0.25]; // 2 scales x 2 times, scale-major
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &[2.0, 4.0], date("2020-01-01"), 2, &values).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "date,2,4\n2020-01-01,0.00000000e0,1.00000000e0\n2020-01-02,5.00000000e-1,2.50000000e-1\n"
        );
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(tmp.path(), &buf).unwrap();
        let grid = read_grid_csv(tmp.path()).unwrap();
        assert_eq!(grid.scales, vec![2.0, 4.0]);
        assert_eq!(grid.n_times, 2);
        assert_eq!(grid.start_date, date("2020-01-01"));
        assert_eq!(grid.values, values);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(tmp.path(), "").unwrap();
        assert!(matches!(
            read_grid_csv(tmp.path()),
            Err(GridIoError::Malformed(_))
        ));
        std::fs::write(tmp.path(), "date,2,4\n2020-01-01,1.0\n").unwrap();
        assert!(matches!(
            read_grid_csv(tmp.path()),
            Err(GridIoError::Malformed(_))
        ));
        std::fs::write(tmp.path(), "date,2\n2020-01-01,1.0\n2020-01-05,1.0\n").unwrap();
        assert!(matches!(
            read_grid_csv(tmp.path()),
            Err(GridIoError::Malformed(_))
        ));
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let sc = small_scalogram();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        write_scalogram(tmp.path(), &sc).unwrap();
        let back = read_scalogram(tmp.path()).unwrap();
        assert_eq!(back.n_times(), sc.n_times());
        assert_eq!(back.n_scales(), sc.n_scales());
        assert_eq!(back.time_anchor(), sc.time_anchor());
        assert_eq!(back.params(), sc.params());
        assert_eq!(back.grid().scales(), sc.grid().scales());
        for t in 0..sc.n_times() {
            for si in 0..sc.n_scales() {
                assert_eq!(back.coeff(t, si).re.to_bits(), sc.coeff(t, si).re.to_bits());
                assert_eq!(back.coeff(t, si).im.to_bits(), sc.coeff(t, si).im.to_bits());
                assert_eq!(back.support(t, si).to_bits(), sc.support(t, si).to_bits());
            }
        }
    }

    #[test]
    fn binary_writes_are_deterministic() {
        let sc = small_scalogram();
        let a = tempfile::NamedTempFile::new().unwrap();
        let b = tempfile::NamedTempFile::new().unwrap();
        write_scalogram(a.path(), &sc).unwrap();
        write_scalogram(b.path(), &sc).unwrap();
        assert_eq!(
            std::fs::read(a.path()).unwrap(),
            std::fs::read(b.path()).unwrap()
        );
        // and the CSV writer too
        let p = power(&sc, Normalization::GlobalMax);
        let c = tempfile::NamedTempFile::new().unwrap();
        let d = tempfile::NamedTempFile::new().unwrap();
        write_power_csv(c.path(), &p).unwrap();
        write_power_csv(d.path(), &p).unwrap();
        assert_eq!(
            std::fs::read(c.path()).unwrap(),
            std::fs::read(d.path()).unwrap()
        );
    }

    #[test]
    fn bad_magic_and_version_are_detected() {
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(tmp.path(), b"NOPE").unwrap();
        assert!(matches!(
            read_scalogram(tmp.path()),
            Err(GridIoError::BadMagic)
        ));
        let mut bytes = b"CWSG".to_vec();
        bytes.extend_from_slice(&99u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 64]);
        std::fs::write(tmp.path(), &bytes).unwrap();
        assert!(matches!(
            read_scalogram(tmp.path()),
            Err(GridIoError::BadVersion(99))
        ));
    }
}
