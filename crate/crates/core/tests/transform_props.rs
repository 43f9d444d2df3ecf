//! Transform-level properties that complement the acceptance suite.

use chrono::NaiveDate;
use mlwt::mlf::MlfMode;
use mlwt::*;
use num_complex::Complex64;

fn anchor() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 1, 1).unwrap()
}

fn test_signal(n: usize) -> TimeSeries {
    let values: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            (t / 11.0).sin() + 0.4 * (t / 41.0).cos() + 0.1 * (t / 3.0).sin()
        })
        .collect();
    TimeSeries::gap_free(values, anchor()).unwrap()
}

#[test]
fn halving_support_eps_barely_moves_normalized_power() {
    let series = test_signal(512);
    let grid = ScaleGrid::log_spaced(2.0, 64.0, 16).unwrap();
    let mut coarse = WaveletParams::default();
    coarse.support_eps = 1e-6;
    let mut fine = WaveletParams::default();
    fine.support_eps = 5e-7;
    let pa = power(&cwt(&series, &grid, &coarse).unwrap(), Normalization::GlobalMax);
    let pb = power(&cwt(&series, &grid, &fine).unwrap(), Normalization::GlobalMax);
    let worst = pa
        .values()
        .iter()
        .zip(pb.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    assert!(worst < 1e-4, "normalized power moved by {worst}");
}

#[test]
fn gaussian_bump_phase_is_even_dominated_with_vanishing_odd_part() {
    // quadrature oracle for the odd projection at the bump center: the
    // integrand M(sigma) sin(sigma) g(s sigma) is odd, so W_im should vanish
    let n = 257usize;
    let center = 128usize;
    let width = 10.0;
    let bump = |t: f64| (-(((t - center as f64) / width).powi(2))).exp();
    let values: Vec<f64> = (0..n).map(|t| bump(t as f64)).collect();
    let series = TimeSeries::gap_free(values, anchor()).unwrap();
    let grid = ScaleGrid::new(vec![8.0]).unwrap();
    let mut params = WaveletParams::new(2.0, false);
    params.mlf.mode = MlfMode::StretchedExp;
    params.remove_mean = false;
    let sc = cwt(&series, &grid, &params).unwrap();

    // oracle: dense Simpson over sigma in [-L, L]
    let s = 8.0;
    let panels = 32_768usize;
    let l = 6.0;
    let h = 2.0 * l / panels as f64;
    let f = |sigma: f64| -> Complex64 {
        let m = (-(sigma * sigma)).exp();
        let (sin, cos) = sigma.sin_cos();
        Complex64::new(m * cos, -m * sin) * bump(center as f64 - s * sigma)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..panels / 2 {
        let a = -l + 2.0 * i as f64 * h;
        acc += f(a) + 4.0 * f(a + h) + f(a + 2.0 * h);
    }
    let oracle = acc * Complex64::new(h / 3.0 * s.sqrt(), 0.0);
    assert!(
        oracle.im.abs() < 1e-12,
        "oracle odd projection should vanish, got {}",
        oracle.im
    );
    assert!((sc.coeff(center, 0).re - oracle.re).abs() / oracle.re.abs() < 1e-6);

    let ph = phase(&sc);
    assert!((ph.value(center, 0) - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
}

#[test]
fn causal_coefficients_ignore_the_future_even_at_tiny_scales() {
    let series = test_signal(128);
    let grid = ScaleGrid::new(vec![2.0, 3.0]).unwrap();
    let mut params = WaveletParams::default();
    params.remove_mean = false;
    let sc = cwt(&series, &grid, &params).unwrap();
    // truncate the series hard at index 60 and recompute
    let truncated = TimeSeries::gap_free(series.values()[..61].to_vec(), anchor()).unwrap();
    let sc2 = cwt(&truncated, &grid, &params).unwrap();
    for si in 0..grid.len() {
        for u in 0..=60 {
            assert_eq!(
                sc.coeff(u, si).re.to_bits(),
                sc2.coeff(u, si).re.to_bits(),
                "u={u} scale={si}"
            );
            assert_eq!(sc.coeff(u, si).im.to_bits(), sc2.coeff(u, si).im.to_bits());
        }
    }
}
