//! Independent reference computations and property suites shared by the
//! `acceptance` and `invariants` targets.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};
use rand::Rng;

use scfde::analysis::bussgang_decompose;
use scfde::detect::{dassd_decide, DetectorParams};
use scfde::fdebank::{fde_equalize, ls_estimate, SymbolRateCsi, UnitaryDft};
use scfde::metrics::gmi_air;
use scfde::pa::{MemoryPolyParams, SalehParams};
use scfde::postdist::{blue_fuse, regressor_matrix, GprHyper, GprSegmentModel, NnModel};
use scfde::rng::{self, SimRng};
use scfde::txchain::QamAlphabet;
use scfde::{ComplexSignal, C64};

fn gaussian_vec(r: &mut SimRng, n: usize, var: f64) -> Vec<C64> {
    (0..n).map(|_| rng::complex_gaussian(r, var)).collect()
}

fn random_symbols(r: &mut SimRng, alphabet: &QamAlphabet, n: usize) -> Vec<C64> {
    (0..n).map(|_| alphabet.point(r.random_range(0..alphabet.order()))).collect()
}

/// Dense circulant matrix whose first column is the CSI placed cyclically.
fn circulant(csi: &SymbolRateCsi, n: usize) -> DMatrix<C64> {
    let mut col = vec![C64::default(); n];
    for (i, &h) in csi.taps.iter().enumerate() {
        col[csi.lag(i).rem_euclid(n as i64) as usize] += h;
    }
    DMatrix::from_fn(n, n, |k, j| col[(k + n - j) % n])
}

/// Worst deviation of the MMSE FDE from `(C^H C + delta I)^{-1} C^H y`
/// solved densely, over zero and positive regularization.
pub fn fde_vs_dense_deconvolution() -> f64 {
    let mut r = rng::stream(61, &[]);
    let alphabet = QamAlphabet::new(64).unwrap();
    let n = 128;
    let mut worst: f64 = 0.0;
    for (trial, delta) in [0.0, 1e-3, 0.1, 1.0].into_iter().enumerate() {
        let csi = SymbolRateCsi {
            taps: gaussian_vec(&mut r, 7, 1.0 / 7.0),
            l_b: 3,
            l_f: 5,
            noise_var: 0.0,
        };
        let c = circulant(&csi, n);
        let a = DVector::from_vec(random_symbols(&mut r, &alphabet, n));
        let y = &c * &a + DVector::from_vec(gaussian_vec(&mut r, n, 1e-2 * trial as f64));
        let gram = c.adjoint() * &c + DMatrix::identity(n, n) * C64::from(delta);
        let oracle = gram.lu().solve(&(c.adjoint() * &y)).unwrap();
        let got = fde_equalize(y.as_slice(), &csi, delta).unwrap().z;
        for (g, o) in got.iter().zip(oracle.iter()) {
            worst = worst.max((g - o).norm());
        }
    }
    worst
}

/// Worst deviation of the LS channel estimate from the SVD pseudo-inverse
/// solution on the cyclic data matrix.
pub fn ls_vs_pseudo_inverse() -> f64 {
    let mut r = rng::stream(62, &[]);
    let alphabet = QamAlphabet::new(16).unwrap();
    let mut worst: f64 = 0.0;
    for (l_b, l_f) in [(1, 1), (2, 4), (4, 9)] {
        let n = 200;
        let ft = random_symbols(&mut r, &alphabet, n);
        let y = gaussian_vec(&mut r, n, 1.0);
        let cols = l_b + l_f - 1;
        let a = DMatrix::from_fn(n, cols, |k, l| ft[(k as i64 - l as i64 + l_b as i64 - 1).rem_euclid(n as i64) as usize]);
        let oracle = a.clone().pseudo_inverse(1e-12).unwrap() * DVector::from_column_slice(&y);
        let got = ls_estimate(&ft, &y, l_b, l_f).unwrap();
        for (g, o) in got.taps.iter().zip(oracle.iter()) {
            worst = worst.max((g - o).norm());
        }
    }
    worst
}

/// Worst deviation of the memory polynomial from a literal triple loop.
pub fn memory_poly_vs_naive() -> f64 {
    let mut r = rng::stream(63, &[]);
    let mut worst: f64 = 0.0;
    for (k_b, p_b, p_c) in [(1, 1, 1), (3, 2, 2), (4, 3, 2)] {
        let mut p = MemoryPolyParams::zeros(k_b, p_b, p_c).unwrap();
        let (pb, pc) = (p_b as i64, p_c as i64);
        for k in 0..k_b {
            for l in -pb + 1..pb {
                for m in -pc + 1..pc {
                    p.set(k, l, m, rng::complex_gaussian(&mut r, 0.1));
                }
            }
        }
        let x = gaussian_vec(&mut r, 300, 0.5);
        let n = x.len() as i64;
        let at = |i: i64| if (0..n).contains(&i) { x[i as usize] } else { C64::default() };
        let got = p.apply(&x);
        for i in 0..n {
            let mut acc = C64::default();
            for k in 0..k_b {
                for l in -pb + 1..pb {
                    for m in -pc + 1..pc {
                        acc += p.get(k, l, m) * at(i - l) * at(i - l - m).norm_sqr().powi(k as i32);
                    }
                }
            }
            worst = worst.max((got[i as usize] - acc).norm());
        }
    }
    worst
}

fn random_detector(r: &mut SimRng, mu: usize) -> (DVector<C64>, DMatrix<C64>) {
    let beta = DVector::from_fn(mu, |_, _| rng::complex_gaussian(r, 1.0));
    let g = DMatrix::from_fn(mu, mu, |_, _| rng::complex_gaussian(r, 1.0));
    (beta, &g * g.adjoint() + DMatrix::identity(mu, mu) * C64::from(0.1))
}

fn quadratic_argmin(soft: &[C64], beta: &DVector<C64>, cov: &DMatrix<C64>, alphabet: &QamAlphabet) -> usize {
    let inv = cov.clone().try_inverse().unwrap();
    let s = DVector::from_column_slice(soft);
    let metric = |a: C64| {
        let e = &s - beta * a;
        e.dotc(&(&inv * &e)).re
    };
    (0..alphabet.order())
        .min_by(|&i, &j| metric(alphabet.point(i)).total_cmp(&metric(alphabet.point(j))))
        .unwrap()
}

/// `(agreements, instances)` of DA-SSD against the exhaustive whitened
/// quadratic metric.
pub fn dassd_vs_brute_force(instances: usize) -> (usize, usize) {
    let mut r = rng::stream(64, &[]);
    let alphabets: Vec<QamAlphabet> = [4, 16, 64, 256].iter().map(|&p| QamAlphabet::new(p).unwrap()).collect();
    let mut agree = 0;
    for k in 0..instances {
        let mu = 1 + k % 4;
        let alphabet = &alphabets[(k / 4) % alphabets.len()];
        let (beta, cov) = random_detector(&mut r, mu);
        let a = alphabet.point(r.random_range(0..alphabet.order()));
        let soft: Vec<C64> = beta.iter().map(|b| b * a + rng::complex_gaussian(&mut r, 0.3)).collect();
        let p = DetectorParams::new(beta.clone(), cov.clone(), 100).unwrap();
        if dassd_decide(&soft, &p, alphabet) == quadratic_argmin(&soft, &beta, &cov, alphabet) {
            agree += 1;
        }
    }
    (agree, instances)
}

/// Worst relative deviation of the analytic NN Jacobian from central
/// differences.
pub fn nn_jacobian_vs_finite_differences() -> f64 {
    let mut r = rng::stream(65, &[]);
    let z = gaussian_vec(&mut r, 30, 1.0);
    let t = gaussian_vec(&mut r, 30, 1.0);
    let inputs = regressor_matrix(&z, 2);
    let model = NnModel::glorot(2, 5, 9);
    let p = model.param_count();
    let rows = 2 * t.len();
    let mut jac = DMatrix::zeros(rows, p);
    model.residuals(&inputs, &t, Some(&mut jac));
    let base = model.params();
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..p {
        let mut m = model.clone();
        let mut shifted = base.clone();
        shifted[k] += eps;
        m.set_params(&shifted);
        let up = m.residuals(&inputs, &t, None);
        shifted[k] -= 2.0 * eps;
        m.set_params(&shifted);
        let down = m.residuals(&inputs, &t, None);
        for row in 0..rows {
            let fd = (up[row] - down[row]) / (2.0 * eps);
            worst = worst.max((fd - jac[(row, k)]).abs() / jac[(row, k)].abs().max(1e-3));
        }
    }
    worst
}

/// Mutual information of one BPSK dimension with amplitude `amp` in real
/// Gaussian noise of variance `var`, by trapezoidal quadrature.
fn bpsk_mi(amp: f64, var: f64) -> f64 {
    let sd = var.sqrt();
    let steps = 20_000;
    let lo = -12.0 * sd;
    let h = 24.0 * sd / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let n = lo + h * i as f64;
        let pdf = (-n * n / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        // Received amp + n; log-likelihood ratio against -amp.
        let llr = 2.0 * amp * (amp + n) / var;
        let loss = if llr > 0.0 { (-llr).exp().ln_1p() } else { -llr + llr.exp().ln_1p() };
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * pdf * loss / std::f64::consts::LN_2;
    }
    1.0 - acc * h
}

/// `|GMI - quadrature|` for QPSK over AWGN at `snr_db`.
pub fn qpsk_gmi_vs_quadrature(snr_db: f64) -> f64 {
    let alphabet = QamAlphabet::new(4).unwrap();
    let n0 = 10f64.powf(-snr_db / 10.0);
    let mut r = rng::stream(66, &[]);
    let n = 200_000;
    let truth: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
    let rx: Vec<C64> = truth.iter().map(|&i| alphabet.point(i) + rng::complex_gaussian(&mut r, n0)).collect();
    let p = DetectorParams::new(DVector::from_element(1, C64::from(1.0)), DMatrix::from_element(1, 1, C64::from(n0)), n).unwrap();
    let est = gmi_air(&[rx], &truth, &p, &alphabet).unwrap();
    let oracle = 2.0 * bpsk_mi(std::f64::consts::FRAC_1_SQRT_2, n0 / 2.0);
    (est.value - oracle).abs()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

/// Bussgang residual is uncorrelated with the input for Saleh drives.
pub fn bussgang_orthogonality(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(any::<u64>(), 0.05f64..3.0), |(seed, drive)| {
            let mut r = rng::stream(seed, &[]);
            let x = ComplexSignal {
                samples: gaussian_vec(&mut r, 4000, drive * drive),
                sps: 1,
                delay: 0,
            };
            let p = SalehParams::REFERENCE;
            let y = ComplexSignal {
                samples: x.samples.iter().map(|&v| p.apply_sample(v)).collect(),
                ..x.clone()
            };
            let split = bussgang_decompose(&x, &y).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let cross: C64 = x.samples.iter().zip(&split.residual.samples).map(|(a, g)| a.conj() * g).sum();
            let scale = (x.mean_power() * split.residual.mean_power()).sqrt() * x.len() as f64;
            prop_assert!(cross.norm() <= 1e-10 * scale.max(f64::MIN_POSITIVE), "{}", cross.norm() / scale);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// BLUE weights sum to one and the fused variance never exceeds the best
/// input variance.
pub fn blue_weight_sum(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&prop::collection::vec((-10.0f64..10.0, 1e-6f64..1e3), 1..12), |est| {
            let (w, _, var) = blue_fuse(&est);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&v| v > 0.0));
            let best = est.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
            prop_assert!(var <= best * (1.0 + 1e-12));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// GP predictive variance is bounded below by the noise variance, at
/// training inputs and away from them.
pub fn gpr_variance_floor(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(any::<u64>(), 1e-4f64..0.5, 0.1f64..5.0, 1usize..4), |(seed, nu, length, dim)| {
            let mut r = rng::stream(seed, &[]);
            let n = 40;
            let x = DMatrix::from_fn(n, dim, |_, _| r.random_range(-1.0..1.0));
            let t = gaussian_vec(&mut r, n, 1.0);
            let hyper = GprHyper::isotropic(dim, 1.0, nu, length);
            let m = GprSegmentModel::new(hyper, x.clone(), t).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let probe = DMatrix::from_fn(20, dim, |_, _| r.random_range(-3.0..3.0));
            for test in [&x, &probe] {
                let (_, vars) = m.predict(test);
                for v in vars {
                    prop_assert!(v >= nu * nu * (1.0 - 1e-12), "{v} < {}", nu * nu);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The unitary DFT preserves norms and inverts exactly.
pub fn dft_unitarity(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(any::<u64>(), 1usize..400), |(seed, n)| {
            let mut r = rng::stream(seed, &[]);
            let v = gaussian_vec(&mut r, n, 1.0);
            let dft = UnitaryDft::new(n);
            let mut f = v.clone();
            dft.forward(&mut f);
            let e0: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let e1: f64 = f.iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((e0 - e1).abs() <= 1e-10 * e0.max(1.0));
            dft.inverse(&mut f);
            for (a, b) in f.iter().zip(&v) {
                prop_assert!((a - b).norm() < 1e-10);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Joint rescaling `(c beta, |c|^2 R, c a~)` leaves DA-SSD decisions unchanged.
pub fn dassd_scale_invariance(cases: u32) -> Result<(), String> {
    let alphabet = QamAlphabet::new(64).unwrap();
    runner(cases)
        .run(&(any::<u64>(), 1usize..5, 0.01f64..100.0, -3.2f64..3.2), |(seed, mu, mag, phase)| {
            let mut r = rng::stream(seed, &[]);
            let (beta, cov) = random_detector(&mut r, mu);
            let c = C64::from_polar(mag, phase);
            let p = DetectorParams::new(beta.clone(), cov.clone(), 100).unwrap();
            let q = DetectorParams::new(&beta * c, &cov * C64::from(mag * mag), 100).unwrap();
            for _ in 0..50 {
                let a = alphabet.point(r.random_range(0..64));
                let soft: Vec<C64> = beta.iter().map(|b| b * a + rng::complex_gaussian(&mut r, 0.2)).collect();
                let scaled: Vec<C64> = soft.iter().map(|s| s * c).collect();
                prop_assert_eq!(dassd_decide(&soft, &p, &alphabet), dassd_decide(&scaled, &q, &alphabet));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// GMI never exceeds `log2 P` by more than three standard errors.
pub fn gmi_bounded_by_log2_order(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(any::<u64>(), 0usize..4, 1usize..4, -10.0f64..40.0), |(seed, order_idx, mu, snr_db)| {
            let order = [4, 16, 64, 256][order_idx];
            let alphabet = QamAlphabet::new(order).unwrap();
            let mut r = rng::stream(seed, &[]);
            let (beta, cov) = random_detector(&mut r, mu);
            let cov = &cov * C64::from(10f64.powf(-snr_db / 10.0));
            let n = 400;
            let truth: Vec<usize> = (0..n).map(|_| r.random_range(0..order)).collect();
            let chol = cov.clone().cholesky().unwrap();
            let mut branches = vec![Vec::with_capacity(n); mu];
            for &t in &truth {
                let w = DVector::from_vec(gaussian_vec(&mut r, mu, 1.0));
                let eta = chol.l() * w;
                for i in 0..mu {
                    branches[i].push(beta[i] * alphabet.point(t) + eta[i]);
                }
            }
            let p = DetectorParams::new(beta, cov, n).unwrap();
            let est = gmi_air(&branches, &truth, &p, &alphabet).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let cap = (order as f64).log2();
            prop_assert!(est.value <= cap + 3.0 * est.stderr + 1e-12, "{} > {cap}", est.value);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
