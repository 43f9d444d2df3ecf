//! Subcommand implementations: flag/config merging, pipeline wiring, output.

use std::io::Write;
use std::path::{Path, PathBuf};

use mlwt::grid_io;
use mlwt::mlf::MlfMode;
use mlwt::*;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::raster;
use crate::{AlertsArgs, CliError, CsvArgs, RenderArgs, SliceArgs, StatsArgs, TransformArgs, WaveletArgs};

fn pick<T: Clone>(cli: Option<T>, cfg: Option<T>, default: T) -> T {
    cli.or(cfg).unwrap_or(default)
}

fn csv_settings(args: &CsvArgs, cfg: &ConfigFile) -> Result<(CsvConfig, GapPolicy), CliError> {
    let mut csv = CsvConfig::default();
    csv.date_column = pick(args.date_column.clone(), cfg.date_column.clone(), csv.date_column);
    csv.value_column = pick(
        args.value_column.clone(),
        cfg.value_column.clone(),
        csv.value_column,
    );
    let delim_cfg = match &cfg.delimiter {
        Some(s) if s.chars().count() == 1 => Some(s.chars().next().unwrap()),
        Some(s) => {
            return Err(CliError::Usage(format!(
                "delimiter must be a single character, got {s:?}"
            )))
        }
        None => None,
    };
    if let Some(d) = args.delimiter.or(delim_cfg) {
        if !d.is_ascii() {
            return Err(CliError::Usage(format!(
                "delimiter must be an ASCII character, got {d:?}"
            )));
        }
        csv.delimiter = d as u8;
    }
    csv.date_format = pick(args.date_format.clone(), cfg.date_format.clone(), csv.date_format);
    if !args.sentinels.is_empty() {
        csv.sentinels = args.sentinels.clone();
    } else if let Some(s) = &cfg.sentinels {
        csv.sentinels = s.clone();
    }
    if args.keep_negative {
        csv.negative_as_missing = false;
    } else if let Some(keep) = cfg.keep_negative {
        csv.negative_as_missing = !keep;
    }
    let policy = GapPolicy {
        max_run: pick(args.max_gap_run, cfg.max_gap_run, GapPolicy::default().max_run),
        max_fraction: pick(
            args.max_gap_fraction,
            cfg.max_gap_fraction,
            GapPolicy::default().max_fraction,
        ),
    };
    if !(policy.max_fraction > 0.0 && policy.max_fraction <= 1.0) {
        return Err(CliError::Usage(format!(
            "max-gap-fraction must lie in (0, 1], got {}",
            policy.max_fraction
        )));
    }
    Ok((csv, policy))
}

fn wavelet_settings(args: &WaveletArgs, cfg: &ConfigFile) -> Result<WaveletParams, CliError> {
    let alpha = pick(args.alpha, cfg.alpha, 2.0);
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(CliError::Usage(format!(
            "alpha must be a positive real, got {alpha}"
        )));
    }
    let causal = if args.no_causal {
        false
    } else if args.causal {
        true
    } else {
        cfg.causal.unwrap_or(true)
    };
    let mut params = WaveletParams::new(alpha, causal);
    let mode = pick(args.mlf_mode.clone(), cfg.mlf_mode.clone(), "auto".to_string());
    params.mlf.mode = match mode.as_str() {
        "auto" => params.mlf.mode,
        "series" => MlfMode::SeriesAuto,
        "stretched" => MlfMode::StretchedExp,
        other => {
            return Err(CliError::Usage(format!(
                "mlf-mode must be auto, series, or stretched; got {other:?}"
            )))
        }
    };
    params.support_eps = pick(args.support_eps, cfg.support_eps, params.support_eps);
    params.remove_mean = if args.no_detrend {
        false
    } else if args.detrend {
        true
    } else {
        cfg.detrend.unwrap_or(true)
    };
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(params)
}

fn grid_settings(args: &WaveletArgs, cfg: &ConfigFile) -> Result<ScaleGrid, CliError> {
    let min = pick(args.scales_min, cfg.scales_min, 2.0);
    let max = pick(args.scales_max, cfg.scales_max, 1024.0);
    let count = pick(args.scales_count, cfg.scales_count, 64);
    ScaleGrid::log_spaced(min, max, count).map_err(CliError::from)
}

fn normalization(cli: Option<&str>, cfg: &ConfigFile) -> Result<Normalization, CliError> {
    let name = cli
        .map(str::to_string)
        .or_else(|| cfg.normalize.clone())
        .unwrap_or_else(|| "global-max".to_string());
    match name.as_str() {
        "global-max" => Ok(Normalization::GlobalMax),
        "per-scale-max" => Ok(Normalization::PerScaleMax),
        "none" => Ok(Normalization::None),
        other => Err(CliError::Usage(format!(
            "normalize must be global-max, per-scale-max, or none; got {other:?}"
        ))),
    }
}

fn load_filled(
    input: &Path,
    csv: &CsvConfig,
    policy: &GapPolicy,
) -> Result<(TimeSeries, f64), CliError> {
    let raw = load_csv(input, csv)?;
    let gap_fraction = raw.gap_fraction();
    let filled = fill_gaps(&raw, policy)?;
    Ok((filled, gap_fraction))
}

#[derive(Serialize)]
struct StatsReport {
    n: usize,
    start_date: String,
    gap_fraction_before_fill: f64,
    mean: f64,
    std: f64,
    skewness: Option<f64>,
    excess_kurtosis: Option<f64>,
}

pub fn run_stats(args: &StatsArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let (csv, policy) = csv_settings(&args.csv, cfg)?;
    let format = pick(args.format.clone(), cfg.format.clone(), "json".to_string());
    if format != "json" && format != "text" {
        return Err(CliError::Usage(format!(
            "format must be json or text, got {format:?}"
        )));
    }
    let (series, gap_fraction) = load_filled(&args.input, &csv, &policy)?;
    let stats = summary_stats(&series)?;
    if format == "json" {
        let report = StatsReport {
            n: stats.n,
            start_date: series.start_date().format("%Y-%m-%d").to_string(),
            gap_fraction_before_fill: gap_fraction,
            mean: stats.mean,
            std: stats.std,
            skewness: stats.skewness,
            excess_kurtosis: stats.excess_kurtosis,
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("start_date: {}", series.start_date().format("%Y-%m-%d"));
        println!("gap_fraction_before_fill: {gap_fraction:.6}");
        println!("{stats}");
    }
    Ok(())
}

/// Removes any files this run created if a later step fails.
struct OutputSet {
    written: Vec<PathBuf>,
}

impl OutputSet {
    fn new() -> Self {
        OutputSet { written: Vec::new() }
    }

    fn add(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    fn clean_up(&self) {
        for path in &self.written {
            let _ = std::fs::remove_file(path);
        }
    }
}

pub fn run_transform(args: &TransformArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let (csv, policy) = csv_settings(&args.csv, cfg)?;
    let params = wavelet_settings(&args.wavelet, cfg)?;
    let grid = grid_settings(&args.wavelet, cfg)?;
    let norm = normalization(args.normalize.as_deref(), cfg)?;

    let (series, _) = load_filled(&args.input, &csv, &policy)?;
    let started = std::time::Instant::now();
    let scalogram = cwt(&series, &grid, &params)?;
    let elapsed = started.elapsed();
    let power_grid = power(&scalogram, norm);
    let phase_grid = phase(&scalogram);

    let prefix = args.output.as_os_str().to_string_lossy().to_string();
    let bin_path = PathBuf::from(format!("{prefix}.cwsg"));
    let power_path = PathBuf::from(format!("{prefix}.power.csv"));
    let phase_path = PathBuf::from(format!("{prefix}.phase.csv"));
    let mut outputs = OutputSet::new();
    let result = (|| -> Result<(), CliError> {
        grid_io::write_scalogram(&bin_path, &scalogram)?;
        outputs.add(bin_path.clone());
        grid_io::write_power_csv(&power_path, &power_grid)?;
        outputs.add(power_path.clone());
        grid_io::write_phase_csv(&phase_path, &phase_grid)?;
        outputs.add(phase_path.clone());
        Ok(())
    })();
    if let Err(e) = result {
        outputs.clean_up();
        return Err(e);
    }
    if power_grid.is_degenerate() {
        eprintln!("warning: power normalization was degenerate (all-zero input); values left raw");
    }
    println!(
        "transform: {} samples x {} scales in {:.3}s",
        scalogram.n_times(),
        scalogram.n_scales(),
        elapsed.as_secs_f64()
    );
    println!("wrote {}", bin_path.display());
    println!("wrote {}", power_path.display());
    println!("wrote {}", phase_path.display());
    Ok(())
}

fn write_slice_csv<W: Write>(mut w: W, slice: &ScaleSlice) -> std::io::Result<()> {
    writeln!(w, "date,value,support_fraction")?;
    for (i, (v, f)) in slice
        .values
        .iter()
        .zip(&slice.support_fraction)
        .enumerate()
    {
        let date = slice.start_date + chrono::Days::new(i as u64);
        writeln!(w, "{},{v:.8e},{f:.8e}", date.format("%Y-%m-%d"))?;
    }
    Ok(())
}

fn slice_from_scalogram(
    sc: &Scalogram,
    which: &str,
    norm: Normalization,
    scale: f64,
) -> Result<ScaleSlice, CliError> {
    match which {
        "power" => Ok(power(sc, norm).scale_slice(scale)?),
        "phase" => Ok(phase(sc).scale_slice(scale)?),
        other => Err(CliError::Usage(format!(
            "grid must be power or phase, got {other:?}"
        ))),
    }
}

pub fn run_slice(args: &SliceArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let scale = pick(args.slice_scale, cfg.slice_scale, 40.0);
    let which = args.grid.clone().unwrap_or_else(|| "power".to_string());
    let norm = normalization(args.normalize.as_deref(), cfg)?;
    let sc = grid_io::read_scalogram(&args.input)?;
    let slice = slice_from_scalogram(&sc, &which, norm, scale)?;
    eprintln!(
        "slice: requested scale {}, grid scale {:.6} (index {})",
        slice.requested, slice.scale, slice.scale_index
    );
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
            write_slice_csv(std::io::BufWriter::new(file), &slice)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            write_slice_csv(stdout.lock(), &slice)
                .map_err(|e| CliError::Data(format!("cannot write slice: {e}")))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AlertSummary {
    matches: usize,
    misses: usize,
    false_alarms: usize,
    mean_lead_days: Option<f64>,
}

#[derive(Serialize)]
struct AlertReport {
    scale_days: f64,
    threshold: f64,
    min_separation_days: usize,
    min_support_fraction: f64,
    warnings: Vec<WarningEvent>,
    summary: Option<AlertSummary>,
}

pub fn run_alerts(args: &AlertsArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let config = AlertConfig {
        scale_days: pick(args.slice_scale, cfg.slice_scale, 40.0),
        threshold: pick(args.threshold, cfg.threshold, 0.5),
        min_separation_days: pick(args.min_separation, cfg.min_separation, 30),
        min_support_fraction: pick(args.min_support, cfg.min_support, 0.9),
    };
    config.validate()?;
    let sc = grid_io::read_scalogram(&args.input)?;
    // the detector contract is a globally normalized power slice
    let slice = power(&sc, Normalization::GlobalMax).scale_slice(config.scale_days)?;
    let warnings = detect_warnings(&slice, &config)?;
    let summary = match &args.events_file {
        Some(path) => {
            let official = read_event_dates(path)?;
            let window = pick(args.window_days, cfg.window_days, 7);
            let report = compare_events(&warnings, &official, window);
            Some(AlertSummary {
                matches: report.n_matches(),
                misses: report.misses.len(),
                false_alarms: report.false_alarms.len(),
                mean_lead_days: report.mean_lead_days,
            })
        }
        None => None,
    };
    let report = AlertReport {
        scale_days: slice.scale,
        threshold: config.threshold,
        min_separation_days: config.min_separation_days,
        min_support_fraction: config.min_support_fraction,
        warnings,
        summary,
    };
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    match &args.output {
        Some(path) => std::fs::write(path, json.as_bytes())
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn run_render(args: &RenderArgs, _cfg: &ConfigFile) -> Result<(), CliError> {
    let grid = grid_io::read_grid_csv(&args.input)?;
    let is_png = args
        .output
        .extension()
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false);
    if is_png {
        #[cfg(feature = "png")]
        {
            raster::write_png(&args.output, &grid.values, grid.n_times, grid.scales.len())?;
            println!("wrote {}", args.output.display());
            return Ok(());
        }
        #[cfg(not(feature = "png"))]
        return Err(CliError::Usage(
            "PNG output needs a build with the `png` feature; use a .pgm path instead".to_string(),
        ));
    }
    let bytes = raster::grid_to_pgm(&grid.values, grid.n_times, grid.scales.len())?;
    std::fs::write(&args.output, &bytes)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", args.output.display())))?;
    println!("wrote {}", args.output.display());
    Ok(())
}
