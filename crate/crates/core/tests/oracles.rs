//! Module examples checked against independent oracles (statrs
//! distributions, closed forms, brute-force sums, sampling).

mod common;

use common::*;
use ellvar::elliptic::{big_g, solve_quantile, tail_expectation, EllipticModel};
use ellvar::linalg::{cholesky, estimate_moments, SpdMatrix};
use ellvar::mc::{empirical_var_es, sample_elliptic, simulate_pnl, SamplingLaw, SimulationSpec};
use ellvar::mixture::MixtureModel;
use ellvar::portfolio::{equity_weights, RiskModel};
use ellvar::specfun::{beta, hyp2f1, log_gamma, reg_inc_beta};
use ellvar::student::{
    gaussian_generator, student_big_g, student_es_multiplier, student_generator, student_quantile, StudentParams,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn special_function_values() {
    let brute: f64 = (1..50).map(|k| f64::from(k).ln()).sum();
    assert!(rel(log_gamma(50.0).unwrap(), brute) < 1e-14);
    assert!((beta(3.0, 2.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    assert!((beta(0.5, 0.5).unwrap() - std::f64::consts::PI).abs() < 1e-14);
    // ∫_0^{1/2} 12 x (1-x)² dx = 11/16.
    assert!((reg_inc_beta(0.5, 2.0, 3.0).unwrap() - 0.6875).abs() < 1e-15);
}

#[test]
fn hyp2f1_against_direct_series_after_pfaff_map() {
    // ₂F₁(a,b;c;z) = (1-z)^{-b} ₂F₁(c-a, b; c; z/(z-1)), summed naively.
    let (a, b, c, z) = (1.5, 1.0, 2.0, -2.5);
    let w = z / (z - 1.0);
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 0..400 {
        let k = f64::from(k);
        term *= (c - a + k) * (b + k) / ((c + k) * (k + 1.0)) * w;
        sum += term;
    }
    let want = (1.0 - z).powf(-b) * sum;
    assert!(rel(hyp2f1(a, b, c, z).unwrap(), want) < 1e-13);
}

#[test]
fn two_by_two_cholesky() {
    let l = cholesky(2, &[4.0, 2.0, 2.0, 5.0]).unwrap();
    assert_eq!(l.rows(), vec![vec![2.0, 0.0], vec![1.0, 2.0]]);
}

#[test]
fn covariance_estimate_from_simulated_sample() {
    let truth = SpdMatrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 2.0, -0.4], vec![0.0, -0.4, 0.5]]).unwrap();
    let law = SamplingLaw::gaussian(vec![0.1, 0.0, -0.1], &truth).unwrap();
    let paths = sample_elliptic(&law, &SimulationSpec::new(100_000, 5)).unwrap();
    let rows: Vec<Vec<f64>> = (0..paths.paths()).map(|i| paths.row(i).to_vec()).collect();
    let m = estimate_moments(&rows, None).unwrap();
    let t = 100_000f64;
    for i in 0..3 {
        for j in 0..3 {
            // Var of a sample covariance entry is (σ_ii σ_jj + σ_ij²)/T.
            let se = ((truth.get(i, i) * truth.get(j, j) + truth.get(i, j).powi(2)) / t).sqrt();
            assert!((m.covariance.get(i, j) - truth.get(i, j)).abs() < 4.0 * se);
        }
    }
}

#[test]
fn elliptic_tail_matches_normal_and_t() {
    for n in [1, 2, 5] {
        let g = gaussian_generator(n).unwrap();
        for s in [0.3, 1.6449, 3.0] {
            assert!((big_g(s, &g).unwrap() - normal_sf(s)).abs() < 1e-10, "n={n} s={s}");
        }
    }
    let g4 = student_generator(3, 4.0).unwrap();
    assert!((big_g(2.77644, &g4).unwrap() - 0.025).abs() < 1e-6);
    assert!((big_g(2.77644, &g4).unwrap() - t_upper_tail(2.77644, 4.0)).abs() < 1e-10);
}

#[test]
fn gaussian_quantile_is_dimension_free() {
    let z05 = normal_quantile(0.05);
    let qs: Vec<f64> = [1, 2, 5].iter().map(|&n| solve_quantile(0.05, &gaussian_generator(n).unwrap()).unwrap()).collect();
    for q in &qs {
        assert!((q - qs[0]).abs() < 1e-9);
        assert!((q - z05).abs() < 1e-9);
    }
    let q2 = solve_quantile(0.01, &gaussian_generator(2).unwrap()).unwrap();
    assert!((q2 - normal_quantile(0.01)).abs() < 1e-9);
}

#[test]
fn gaussian_es_matches_density_formula() {
    let m = EllipticModel::new(vec![0.0], SpdMatrix::identity(1), gaussian_generator(1).unwrap()).unwrap();
    let z = normal_quantile(0.05);
    assert!(rel(m.expected_shortfall(&[1.0], 0.05).unwrap(), normal_pdf(z) / 0.05) < 1e-9);
}

#[test]
fn closed_form_student_es_matches_engine() {
    for n in [2, 5] {
        for nu in [3.0, 5.0, 10.0] {
            let g = student_generator(n, nu).unwrap();
            for alpha in [0.01, 0.05] {
                let q = solve_quantile(alpha, &g).unwrap();
                let engine = tail_expectation(q, &g).unwrap() / alpha;
                let closed = student_es_multiplier(alpha, nu).unwrap();
                assert!(rel(engine, closed) < 1e-8, "n={n} nu={nu} alpha={alpha}: {engine} vs {closed}");
            }
        }
    }
}

#[test]
fn student_values_against_t_oracle() {
    // The published α = 0.05, ν = 9 cell is misaligned; the oracle decides.
    assert!((student_quantile(0.05, 9.0).unwrap() - t_quantile(0.05, 9.0)).abs() < 1e-9);
    assert!((student_big_g(2.35336, 3.0).unwrap() - 0.05).abs() < 1e-6);
    assert!((student_big_g(1.64638, 1000.0).unwrap() - 0.05).abs() < 5e-4);
    for (alpha, nu) in [(0.01, 2.0), (0.01, 100.0), (0.025, 7.0), (0.05, 3.5)] {
        let m = student_es_multiplier(alpha, nu).unwrap();
        assert!(rel(m, t_es_multiplier(alpha, nu)) < 1e-9);
        assert!(m > student_quantile(alpha, nu).unwrap());
    }
    assert!((student_es_multiplier(0.01, 2.0).unwrap() - 14.071).abs() < 1e-3);
    // Above the normal limit and approaching it.
    let m100 = student_es_multiplier(0.01, 100.0).unwrap();
    assert!(m100 > normal_pdf(normal_quantile(0.01)) / 0.01 && (m100 - 2.72244).abs() < 1e-5);
}

#[test]
fn student_var_matches_generic_engine() {
    let s = SpdMatrix::from_rows(&[vec![1.0, 0.5, 0.1], vec![0.5, 2.0, 0.3], vec![0.1, 0.3, 0.7]]).unwrap();
    let p = StudentParams::new(6.0, vec![0.02, -0.01, 0.0], s).unwrap();
    let e = p.to_elliptic().unwrap();
    let d = [1.0, -2.0, 0.5];
    assert!(rel(p.var(&d, 0.01).unwrap(), e.var(&d, 0.01).unwrap()) < 1e-8);
    assert!(rel(p.expected_shortfall(&d, 0.01).unwrap(), e.expected_shortfall(&d, 0.01).unwrap()) < 1e-8);
}

fn normal_mixture() -> MixtureModel {
    let a = EllipticModel::new(vec![0.0; 2], SpdMatrix::identity(2), gaussian_generator(2).unwrap()).unwrap();
    let b = EllipticModel::new(vec![0.0; 2], SpdMatrix::identity(2).scaled(4.0).unwrap(), gaussian_generator(2).unwrap())
        .unwrap();
    MixtureModel::new(vec![(0.9, a), (0.1, b)]).unwrap()
}

#[test]
fn two_normal_mixture_var() {
    let v = normal_mixture().var(&[1.0, 0.0], 0.01).unwrap();
    let want = normal_mixture_quantile(0.01, &[(0.9, 1.0), (0.1, 2.0)]);
    assert!((v - want).abs() < 1e-8, "{v} vs {want}");
}

#[test]
fn student_mixture_with_equal_moments() {
    let s = SpdMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
    let t3 = EllipticModel::new(vec![0.0; 2], s.clone(), student_generator(2, 3.0).unwrap()).unwrap();
    let t10 = EllipticModel::new(vec![0.0; 2], s, student_generator(2, 10.0).unwrap()).unwrap();
    let mix = MixtureModel::new(vec![(0.5, t3), (0.5, t10)]).unwrap();
    let d = [1.0, 1.0];
    let vol = (2.0f64 + 2.0 * 0.2).sqrt();
    let q = t_mixture_quantile(0.01, &[(0.5, 3.0), (0.5, 10.0)]);
    assert!(rel(mix.var(&d, 0.01).unwrap(), q * vol) < 1e-8);
}

#[test]
fn degenerate_mixture_weight() {
    let mix = {
        let s = SpdMatrix::identity(1);
        let a = EllipticModel::new(vec![0.0], s.clone(), student_generator(1, 4.0).unwrap()).unwrap();
        let b = EllipticModel::new(vec![0.0], s.scaled(9.0).unwrap(), gaussian_generator(1).unwrap()).unwrap();
        MixtureModel::new(vec![(1.0 - 1e-9, a), (1e-9, b)]).unwrap()
    };
    let want = t_quantile(0.05, 4.0);
    assert!(rel(mix.var(&[1.0], 0.05).unwrap(), want) < 1e-6);
}

#[test]
fn equity_linearization_error_is_second_order() {
    let holdings = [(10.0, 100.0), (5.0, 20.0), (-3.0, 55.0)];
    let w = equity_weights(&holdings).unwrap();
    let gross: f64 = w.iter().map(|x| x.abs()).sum();
    for r in [[0.01f64, -0.01, 0.005], [0.001, 0.002, -0.003], [-0.01, -0.01, -0.01]] {
        let exact: f64 = holdings.iter().zip(&r).map(|((s, p), r)| s * p * r.exp_m1()).sum();
        let linear: f64 = w.iter().zip(&r).map(|(w, r)| w * r).sum();
        let rmax = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // Remainder is Σ w_i r_i²/2 + O(r³).
        assert!((exact - linear).abs() <= 0.51 * gross * rmax * rmax);
        // Relative to the gross position value.
        assert!((exact - linear).abs() <= 1e-3 * gross);
    }
}

#[test]
fn student_sample_covariance() {
    let p = StudentParams::new(5.0, vec![0.0; 2], SpdMatrix::identity(2)).unwrap();
    let paths = sample_elliptic(&SamplingLaw::student(&p).unwrap(), &SimulationSpec::new(1_000_000, 9)).unwrap();
    let n = paths.paths() as f64;
    let mut c = [0.0; 3];
    for i in 0..paths.paths() {
        let x = paths.row(i);
        c[0] += x[0] * x[0];
        c[1] += x[0] * x[1];
        c[2] += x[1] * x[1];
    }
    // Cov = ν/(ν-2)·Σ; the sd of each second-moment estimate is ≈ 0.005 here.
    assert!((c[0] / n - 5.0 / 3.0).abs() < 0.03);
    assert!((c[2] / n - 5.0 / 3.0).abs() < 0.03);
    assert!((c[1] / n).abs() < 0.03);
}

#[test]
fn mixture_component_frequencies() {
    let far = |m: f64| {
        EllipticModel::new(vec![m], SpdMatrix::identity(1), gaussian_generator(1).unwrap()).unwrap()
    };
    let mix = MixtureModel::new(vec![(0.9, far(-100.0)), (0.1, far(100.0))]).unwrap();
    let law = SamplingLaw::from_mixture(&mix).unwrap();
    let n = 200_000;
    let pnl = simulate_pnl(&law, &[1.0], &SimulationSpec::new(n, 13)).unwrap();
    let hits = pnl.iter().filter(|&&x| x < 0.0).count() as f64;
    let sd = (0.9 * 0.1 / n as f64).sqrt();
    assert!((hits / n as f64 - 0.9).abs() < 4.0 * sd);
}

#[test]
fn monte_carlo_normal_and_t2() {
    let spec = SimulationSpec::new(10_000_000, 2024);
    let law = SamplingLaw::gaussian(vec![0.0], &SpdMatrix::identity(1)).unwrap();
    let est = empirical_var_es(&simulate_pnl(&law, &[1.0], &spec).unwrap(), 0.05).unwrap();
    assert!((est.var - normal_quantile(0.05)).abs() < 3.0 * est.var_se);
    assert!((est.es - normal_pdf(normal_quantile(0.05)) / 0.05).abs() < 3.0 * est.es_se);

    let t2 = SamplingLaw::from_elliptic(
        &EllipticModel::new(vec![0.0], SpdMatrix::identity(1), student_generator(1, 2.0).unwrap()).unwrap(),
    )
    .unwrap();
    let est = empirical_var_es(&simulate_pnl(&t2, &[1.0], &spec).unwrap(), 0.01).unwrap();
    assert!((est.var - 6.96456).abs() < 3.0 * est.var_se, "{est:?}");
}
