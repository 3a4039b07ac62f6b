//! Size and power under simulated processes. Kept smaller than the
//! acceptance runs so the ordinary test cycle stays quick.

use mdh_core::{avr_test, generate, gs_test, BootstrapConfig, DgpKind, DgpSpec, MaxLag};
use rayon::prelude::*;

fn avr_rejections(kind: DgpKind, len: usize, trials: u64, n_boot: usize, seed: u64) -> f64 {
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&m| {
            let s = generate(&DgpSpec::new(kind, len, seed + m).unwrap()).unwrap();
            avr_test(&s, &BootstrapConfig::new(n_boot, Default::default(), m).unwrap())
                .unwrap()
                .p_value
                < 0.05
        })
        .count();
    hits as f64 / trials as f64
}

fn gs_rejections(kind: DgpKind, len: usize, trials: u64, n_boot: usize, seed: u64) -> f64 {
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&m| {
            let s = generate(&DgpSpec::new(kind, len, seed + m).unwrap()).unwrap();
            let boot = BootstrapConfig::new(n_boot, Default::default(), m).unwrap();
            gs_test(&s, &boot, MaxLag::Full).unwrap().p_value < 0.05
        })
        .count();
    hits as f64 / trials as f64
}

#[test]
fn avr_size_iid() {
    let rate = avr_rejections(DgpKind::IidNormal, 500, 500, 300, 10_000);
    assert!((0.025..=0.08).contains(&rate), "AVR size {rate}");
}

#[test]
fn gs_size_iid() {
    let rate = gs_rejections(DgpKind::IidNormal, 300, 200, 200, 20_000);
    assert!((0.025..=0.08).contains(&rate), "GS size {rate}");
}

#[test]
fn avr_power_grows_with_sample_size() {
    let kind = DgpKind::Ar1 { phi: 0.15 };
    let small = avr_rejections(kind, 100, 150, 200, 30_000);
    let large = avr_rejections(kind, 600, 150, 200, 40_000);
    assert!(large > small + 0.1, "power {small} at T=100, {large} at T=600");
}

#[test]
fn gs_power_grows_with_sample_size() {
    let kind = DgpKind::Bilinear { b: 0.3 };
    let small = gs_rejections(kind, 40, 100, 150, 50_000);
    let large = gs_rejections(kind, 200, 100, 150, 60_000);
    assert!(large > small + 0.1, "power {small} at T=40, {large} at T=200");
}
