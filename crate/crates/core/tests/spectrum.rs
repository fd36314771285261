mod common;

use std::f64::consts::PI;

use common::{c, rng};
use gencheb::cheb_kernel::DEFAULT_MEMBERSHIP_TOL;
use gencheb::genmat::{assemble_normal_system, NormalMatrixSpec};
use gencheb::linalg::dense::cubic_roots_monic;
use gencheb::spectrum::*;
use num_complex::Complex64;
use rand::Rng;

fn truncate3(x: f64) -> f64 {
    (x * 1000.0).floor() / 1000.0
}

/// Largest root modulus of the mu-cubic in its original coefficients, via a
/// generic companion solve.
fn mu_max_companion(lambda: Complex64, alpha: f64) -> f64 {
    let u = (-alpha).exp();
    let a = 1.0 + u + u * u;
    let b = -(u + u * u + u * u * u);
    let cc = u * u * u;
    let roots = cubic_roots_monic(-a * lambda, -b * lambda.conj(), Complex64::from(-cc)).unwrap();
    roots.iter().map(|r| r.norm()).fold(0.0, f64::max)
}

#[test]
fn table_of_disc_bounds() {
    let want = [0.333, 0.577, 0.693, 0.759, 0.802, 0.832, 0.854];
    for (k, w) in (1..=7).zip(want) {
        let v = 3f64.powf(-1.0 / k as f64);
        assert_eq!(truncate3(v), w, "k = {k}: {v}");
        assert_eq!(k_bound_for_ratio(w), Some(k));
    }
}

#[test]
fn table_of_feasibility_thresholds() {
    let want = [0.392, 0.626, 0.732, 0.791, 0.829, 0.855, 0.874];
    for (k, w) in (1..=7).zip(want) {
        let v = feasibility_threshold(k);
        assert_eq!(truncate3(v), w, "k = {k}: {v}");
    }
    let z = feasibility_root();
    assert!((z * z * z + z * z + 2.0 * z - 1.0).abs() <= 1e-12);
}

#[test]
fn g_equals_exp_minus_alpha_sweep() {
    for i in 0..100 {
        let l = 0.05 + 0.94 * i as f64 / 99.0;
        let g = asymptotic_rate_g(l).unwrap();
        let a = alpha_from_lambda1(l).unwrap();
        assert!((g - (-a).exp()).abs() <= 1e-12, "lambda1 = {l}");
        let back = (a.exp() + (-a).exp() + 1.0) / 3.0;
        assert!((back - 1.0 / l).abs() <= 1e-12);
    }
    assert!(alpha_from_lambda1(1.0 - 1e-12).unwrap() < 1e-5);
    assert!((asymptotic_rate_g(1e-6).unwrap() - 1e-6 / 3.0).abs() < 1e-12);
}

#[test]
fn mu_max_at_dominant_eigenvalue_is_exp_minus_alpha() {
    for l in [0.5, 0.7, 0.81, 0.9] {
        let a = alpha_from_lambda1(l).unwrap();
        let mu = mu_max(c(l, 0.0), a);
        assert!((mu - (-a).exp()).abs() <= 1e-8, "lambda1 = {l}: {mu}");
    }
    let a = alpha_from_lambda1(0.81).unwrap();
    assert!((mu_max(c(0.81, 0.0), a) - asymptotic_rate_g(0.81).unwrap()).abs() <= 1e-6);
}

#[test]
fn mu_max_agrees_with_companion_solve_off_the_cusp() {
    let mut r = rng(5);
    for _ in 0..200 {
        let a = 0.1 + 2.0 * r.random::<f64>();
        let lambda = Complex64::from_polar(r.random::<f64>(), 2.0 * PI * r.random::<f64>());
        let (x, y) = (mu_max(lambda, a), mu_max_companion(lambda, a));
        assert!((x - y).abs() <= 1e-7 * (1.0 + y), "lambda = {lambda}, alpha = {a}: {x} vs {y}");
    }
}

#[test]
fn mu_sweep_peaks_at_dominant_eigenvalue() {
    let a = alpha_from_lambda1(0.81).unwrap();
    let spectrum = [c(0.9, 0.0), c(0.4, 0.7), c(0.4, -0.7), c(-0.5, 0.0)];
    let values: Vec<f64> = spectrum.iter().map(|l| mu_max(l * l, a)).collect();
    // quotients inside the deltoid all tie at e^-alpha; none exceeds it
    assert!(values[1..].iter().all(|v| *v <= values[0] + 1e-12), "{values:?}");
    let outside = mu_max(c(-0.9 * 0.81, 0.0), a);
    assert!(outside > values[0]);
    assert!((values[0] - 0.442).abs() < 5e-4);
}

#[test]
fn predicted_rate_reduces_to_mu_max_for_real_lambda1() {
    let mut r = rng(6);
    for _ in 0..100 {
        let l1 = 0.1 + 0.85 * r.random::<f64>();
        let a = alpha_from_lambda1(l1).unwrap();
        let lambda = Complex64::from_polar(l1 * r.random::<f64>(), 2.0 * PI * r.random::<f64>());
        let (p, m) = (predicted_rate(lambda, c(l1, 0.0)), mu_max(lambda, a));
        assert!((p - m).abs() <= 1e-9, "{p} vs {m}");
    }
}

#[test]
fn geometric_never_exceeds_bound() {
    let mut r = rng(7);
    let mut checked = 0;
    for _ in 0..500 {
        let l1 = Complex64::from_polar(0.3 + 0.69 * r.random::<f64>(), 2.0 * PI * r.random::<f64>());
        let n = 2 + r.random_range(0..8);
        let mut eigs = vec![l1];
        for _ in 1..n {
            eigs.push(Complex64::from_polar(l1.norm() * 0.98 * r.random::<f64>(), 2.0 * PI * r.random::<f64>()));
        }
        let info = SpectrumInfo::from_eigenvalues(eigs, SpectrumSource::Exact).unwrap();
        let kb = select_k_bound(&info, EXACT_MOD_TOL).unwrap();
        let kg = select_k_geometric(&info, 1000, DEFAULT_MEMBERSHIP_TOL);
        if let Some(kg) = kg {
            assert!(kg <= kb, "{kg} > {kb} for {:?}", info.eigenvalues);
            checked += 1;
        }
    }
    assert_eq!(checked, 500);
}

#[test]
fn classification_is_rotation_invariant() {
    let mut r = rng(8);
    let sets = [
        vec![c(0.8, 0.0), c(-0.8, 0.0), c(0.1, 0.2)],
        vec![c(0.9, 0.0), c(0.4, 0.7), c(0.4, -0.7), c(-0.5, 0.0)],
        vec![c(0.8, 0.0), Complex64::from_polar(0.8, 2.0 * PI * 2f64.sqrt() / 2.0)],
        vec![c(0.7, 0.0), Complex64::from_polar(0.7, PI / 2.0), c(-0.7, 0.0), Complex64::from_polar(0.7, -PI / 2.0)],
    ];
    for set in sets {
        let base = classify_dominant(
            &SpectrumInfo::from_eigenvalues(set.clone(), SpectrumSource::Exact).unwrap(),
            EXACT_MOD_TOL,
            64,
        );
        for _ in 0..10 {
            let rot = Complex64::from_polar(1.0, 2.0 * PI * r.random::<f64>());
            let rotated: Vec<Complex64> = set.iter().map(|l| l * rot).collect();
            let info = SpectrumInfo::from_eigenvalues(rotated, SpectrumSource::Exact).unwrap();
            assert_eq!(classify_dominant(&info, EXACT_MOD_TOL, 64), base);
        }
    }
}

#[test]
fn minus_one_quotient_needs_even_power() {
    let info = SpectrumInfo::from_eigenvalues(vec![c(0.9, 0.0), c(-0.9, 0.0)], SpectrumSource::Exact).unwrap();
    assert_eq!(select_k_geometric(&info, 10, DEFAULT_MEMBERSHIP_TOL), Some(2));
    let r = build_report(&info, &ReportOptions::default());
    assert_eq!(r.classification, Classification::RootOfUnityFamily { k0: 2 });
    assert_eq!(r.k, Some(2));
}

#[test]
fn family_with_subdominant_part() {
    let info =
        SpectrumInfo::from_eigenvalues(vec![c(0.9, 0.0), c(-0.9, 0.0), c(0.9 * 0.577, 0.0)], SpectrumSource::Exact)
            .unwrap();
    assert_eq!(k_for_family(2, &info, EXACT_MOD_TOL), Some(4));
    let r = build_report(&info, &ReportOptions::default());
    assert_eq!((r.k_bound, r.k_geometric, r.k), (Some(4), Some(2), Some(2)));
    let partial = SpectrumInfo::dominant_only(c(0.9, 0.0), Some(0.9 * 0.577), SpectrumSource::UserSupplied).unwrap();
    assert_eq!(build_report(&partial, &ReportOptions::default()).k, Some(2));
}

#[test]
fn irrational_pair_report_is_inapplicable() {
    let info = SpectrumInfo::from_eigenvalues(
        vec![c(0.8, 0.0), Complex64::from_polar(0.8, 2.0 * PI * 2f64.sqrt() / 2.0), c(0.1, 0.0)],
        SpectrumSource::Exact,
    )
    .unwrap();
    let r = build_report(&info, &ReportOptions::default());
    assert_eq!(r.classification, Classification::Inapplicable);
    assert_eq!(r.k, None);
    assert!(r.to_string().contains("k_bound: none"));
}

#[test]
fn report_for_generated_normal_spectrum() {
    let info = SpectrumInfo::dominant_only(c(0.9, 0.0), Some(0.6), SpectrumSource::UserSupplied).unwrap();
    let r = build_report(&info, &ReportOptions::default());
    assert_eq!(r.k_bound, Some(3));
    assert_eq!(r.k, Some(3));
    assert!((r.predicted_basic_rate.unwrap() - 0.729).abs() < 1e-12);
    assert!((r.predicted_accel_rate.unwrap() - 0.363).abs() < 1e-3);
    assert!((r.fair_comparison_rate.unwrap() - 0.531).abs() < 1e-3);
    assert_eq!(r.practical, Some(true));
}

#[test]
fn power_iteration_on_generated_matrix() {
    let ns = assemble_normal_system(&NormalMatrixSpec::default()).unwrap();
    let (l, res) = estimate_dominant_eigenvalue(ns.system.matrix(), 2000, 1e-9, 3).unwrap();
    assert!((l - 0.9).norm() <= 1e-6, "{l}, residual {res:e}");
}
