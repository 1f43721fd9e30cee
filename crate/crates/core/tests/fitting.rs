use wgm_qed::dit::{spectrum_sweep, DitParams, FanoParams};
use wgm_qed::fitting::{dit_fit, fano_cavity_fit, lorentzian, lorentzian_fit, DitFitInputs, FitResult};
use wgm_qed::spectrum::{SeriesKind, SpectrumSeries};
use wgm_qed::units::{from_ghz, mod_pi};
use wgm_qed::Error;

fn grid(half: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect()
}

fn device() -> DitParams {
    DitParams {
        omega0: from_ghz(0.2),
        kappa: from_ghz(2.8),
        kappa_c: from_ghz(0.9),
        kappa_d: from_ghz(0.5),
        alpha_port: 0.6,
        g1: from_ghz(0.125),
        g2: from_ghz(0.15),
        theta: 2.5,
        phi: 0.8,
        delta: from_ghz(0.19),
        detuning: from_ghz(-0.05),
        gamma1: from_ghz(0.054),
        gamma2: from_ghz(0.063),
    }
}

#[test]
fn staged_fit_from_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = device();
    let fano = FanoParams::new(1.0, 0.1, 0.002, -2.0);
    let bare = DitParams { g1: 0.0, g2: 0.0, ..p };
    let wide_path = dir.path().join("wide.csv");
    let close_path = dir.path().join("close.csv");
    let wide = spectrum_sweep(&grid(12.0, 481), &bare, &fano).unwrap();
    let close = spectrum_sweep(&grid(0.7, 281), &p, &fano).unwrap();
    wide.write_csv(std::fs::File::create(&wide_path).unwrap()).unwrap();
    close.write_csv(std::fs::File::create(&close_path).unwrap()).unwrap();

    let wide = SpectrumSeries::from_csv_path(&wide_path, SeriesKind::Transmission).unwrap();
    let close = SpectrumSeries::from_csv_path(&close_path, SeriesKind::Transmission).unwrap();
    let cavity = fano_cavity_fit(&wide, &bare).unwrap();
    let inputs = DitFitInputs {
        delta_ghz: 0.19,
        detuning_ghz: -0.05,
        g1_ghz: 0.125,
        g2_ghz: 0.15,
        gamma1_ghz: 0.054,
        gamma2_ghz: 0.063,
    };
    let fit = dit_fit(&close, &cavity, &inputs).unwrap();
    let theta = fit.get("theta").unwrap();
    assert!((theta - mod_pi(2.5)).abs() < 0.02, "{theta}");
    assert!((fit.get("phi").unwrap() - 0.8).abs() < 0.02);
    assert!((fit.get("alpha_port").unwrap() / 0.6 - 1.0).abs() < 0.02);

    let back: FitResult = serde_json::from_str(&fit.to_json().unwrap()).unwrap();
    assert_eq!(back, fit);
    let overlay = fit.overlay(&close).unwrap();
    let scale = close.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(overlay.iter().all(|(_, d, m)| (d - m).abs() < 1e-6 * scale));
}

#[test]
fn dit_fit_needs_the_cavity_stage() {
    let line = SpectrumSeries::new(
        "ple",
        SeriesKind::Ple,
        grid(0.3, 121).into_iter().map(|x| (x, lorentzian(x, 1.0, 0.0, 40.0, 0.0))).collect(),
    )
    .unwrap();
    let lorentz = lorentzian_fit(&line).unwrap();
    let inputs = DitFitInputs {
        delta_ghz: 0.2,
        detuning_ghz: 0.0,
        g1_ghz: 0.1,
        g2_ghz: 0.1,
        gamma1_ghz: 0.04,
        gamma2_ghz: 0.04,
    };
    assert!(matches!(dit_fit(&line, &lorentz, &inputs), Err(Error::Fit(_))));
}
