use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::signal::C64;

/// Condition number above which the data matrix counts as rank deficient.
const MAX_CONDITION: f64 = 1e12;

/// How training symbols outside the block are treated when building the
/// data matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Indices wrap within the block; matches a block carrying a cyclic
    /// prefix and suffix at least as long as the estimate span.
    Cyclic,
    /// Symbols outside the block are zero.
    ZeroPad,
}

/// Symbol-rate channel estimate with taps at lags `-(l_b - 1) ..= l_f - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolRateCsi {
    /// `taps[l]` is the tap at lag `l - (l_b - 1)`.
    pub taps: Vec<C64>,
    pub l_b: usize,
    pub l_f: usize,
    /// Residual power per sample of the LS fit.
    pub noise_var: f64,
}

impl SymbolRateCsi {
    pub fn lag(&self, index: usize) -> i64 {
        index as i64 - (self.l_b as i64 - 1)
    }

    /// `sqrt(n) * lambda_k`: the DFT of the taps placed circularly on an
    /// `n`-point grid.
    pub fn transfer(&self, n: usize) -> Vec<C64> {
        let mut buf = vec![C64::default(); n];
        for (i, &h) in self.taps.iter().enumerate() {
            buf[self.lag(i).rem_euclid(n as i64) as usize] += h;
        }
        let dft = super::UnitaryDft::new(n);
        dft.forward(&mut buf);
        let root = (n as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= root);
        buf
    }

    /// Per-bin responses `lambda_k = n^{-1/2} sum_l h_l e^{-j 2 pi k l / n}`.
    pub fn lambda(&self, n: usize) -> Vec<C64> {
        let inv = 1.0 / (n as f64).sqrt();
        self.transfer(n).into_iter().map(|v| v * inv).collect()
    }
}

/// `A[k][l] = a[k - l + l_b - 1]` for `k < a.len()`, `l < l_b + l_f - 1`.
pub fn data_matrix(ft: &[C64], l_b: usize, l_f: usize, boundary: Boundary) -> DMatrix<C64> {
    let n = ft.len() as i64;
    let cols = l_b + l_f - 1;
    DMatrix::from_fn(ft.len(), cols, |k, l| {
        let idx = k as i64 - l as i64 + l_b as i64 - 1;
        match boundary {
            Boundary::Cyclic => ft[idx.rem_euclid(n) as usize],
            Boundary::ZeroPad if (0..n).contains(&idx) => ft[idx as usize],
            Boundary::ZeroPad => C64::default(),
        }
    })
}

/// Cyclic LS channel estimate, the form used for blocks with guards.
pub fn ls_estimate(ft: &[C64], y: &[C64], l_b: usize, l_f: usize) -> Result<SymbolRateCsi> {
    ls_estimate_with(ft, y, l_b, l_f, Boundary::Cyclic)
}

/// Normal-equation LS solution `(A^H A)^{-1} A^H y`.
pub fn ls_estimate_with(ft: &[C64], y: &[C64], l_b: usize, l_f: usize, boundary: Boundary) -> Result<SymbolRateCsi> {
    if l_b == 0 || l_f == 0 {
        return Err(Error::invalid("estimate spans must be at least 1"));
    }
    let cols = l_b + l_f - 1;
    if ft.len() < cols || y.len() != ft.len() {
        return Err(Error::InsufficientSamples {
            needed: cols.max(ft.len()),
            available: y.len().min(ft.len()),
        });
    }
    let a = data_matrix(ft, l_b, l_f, boundary);
    let yv = DVector::from_column_slice(y);
    let gram = a.ad_mul(&a);
    let condition = linalg::hermitian_condition(&gram);
    if !(condition.is_finite() && condition < MAX_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let rhs = a.ad_mul(&yv);
    let h = linalg::hermitian_solve(gram, &rhs).ok_or(Error::RankDeficient { condition })?;
    let resid = &yv - &a * &h;
    let dof = (ft.len() - cols).max(1) as f64;
    Ok(SymbolRateCsi {
        taps: h.iter().copied().collect(),
        l_b,
        l_f,
        noise_var: resid.norm_squared() / dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::txchain::QamAlphabet;
    use rand::Rng;

    fn random_symbols(n: usize, seed: u64) -> Vec<C64> {
        let a = QamAlphabet::new(16).unwrap();
        let mut r = rng::stream(seed, &[]);
        (0..n).map(|_| a.point(r.random_range(0..16))).collect()
    }

    #[test]
    fn data_matrix_indexing() {
        let ft: Vec<C64> = (0..5).map(|i| C64::new(i as f64, 0.0)).collect();
        let a = data_matrix(&ft, 2, 2, Boundary::ZeroPad);
        // Row k holds a[k+1], a[k], a[k-1].
        assert_eq!(a[(0, 0)].re, 1.0);
        assert_eq!(a[(0, 1)].re, 0.0);
        assert_eq!(a[(0, 2)], C64::default());
        assert_eq!(a[(4, 0)], C64::default());
        let c = data_matrix(&ft, 2, 2, Boundary::Cyclic);
        assert_eq!(c[(0, 2)].re, 4.0);
        assert_eq!(c[(4, 0)].re, 0.0);
    }

    #[test]
    fn exact_recovery_on_consistent_system() {
        let ft = random_symbols(128, 1);
        let (l_b, l_f) = (4, 16);
        let mut truth = vec![C64::default(); l_b + l_f - 1];
        truth[3] = C64::new(0.9, 0.1);
        truth[4] = C64::new(-0.3, 0.2);
        truth[5] = C64::new(0.05, -0.1);
        for boundary in [Boundary::Cyclic, Boundary::ZeroPad] {
            let a = data_matrix(&ft, l_b, l_f, boundary);
            let y = &a * DVector::from_column_slice(&truth);
            let est = ls_estimate_with(&ft, y.as_slice(), l_b, l_f, boundary).unwrap();
            for (e, t) in est.taps.iter().zip(&truth) {
                assert!((e - t).norm() < 1e-6);
            }
            assert!(est.noise_var < 1e-20);
        }
    }

    #[test]
    fn flat_channel_single_tap() {
        let ft = random_symbols(32, 2);
        let c = C64::new(0.3, -0.7);
        let y: Vec<C64> = ft.iter().map(|a| a * c).collect();
        let est = ls_estimate(&ft, &y, 1, 1).unwrap();
        assert_eq!(est.taps.len(), 1);
        assert!((est.taps[0] - c).norm() < 1e-12);
    }

    #[test]
    fn matches_pseudo_inverse() {
        let mut r = rng::stream(3, &[]);
        for trial in 0..10 {
            let ft = random_symbols(50, 10 + trial);
            let y: Vec<C64> = (0..50).map(|_| rng::complex_gaussian(&mut r, 1.0)).collect();
            for boundary in [Boundary::Cyclic, Boundary::ZeroPad] {
                let (l_b, l_f) = (3, 6);
                // Independent construction of the literal matrix.
                let a = DMatrix::from_fn(50, l_b + l_f - 1, |k, l| {
                    let idx = k as i64 - l as i64 + l_b as i64 - 1;
                    match boundary {
                        Boundary::Cyclic => ft[idx.rem_euclid(50) as usize],
                        Boundary::ZeroPad if (0..50).contains(&idx) => ft[idx as usize],
                        Boundary::ZeroPad => C64::default(),
                    }
                });
                let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
                let oracle = pinv * DVector::from_column_slice(&y);
                let est = ls_estimate_with(&ft, &y, l_b, l_f, boundary).unwrap();
                for (e, o) in est.taps.iter().zip(oracle.iter()) {
                    assert!((e - o).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rejects_rank_deficient_training() {
        let ft = vec![C64::new(1.0, 0.0); 40];
        let y = ft.clone();
        assert!(matches!(
            ls_estimate(&ft, &y, 2, 3),
            Err(Error::RankDeficient { .. })
        ));
        assert!(ls_estimate(&ft[..3], &y[..3], 2, 3).is_err());
    }

    #[test]
    fn lambda_scaling_matches_zero_padded_dft() {
        let csi = SymbolRateCsi {
            taps: vec![C64::new(0.1, 0.0), C64::new(1.0, 0.5), C64::new(-0.2, 0.3)],
            l_b: 2,
            l_f: 2,
            noise_var: 0.0,
        };
        let n = 16;
        let lam = csi.lambda(n);
        for (k, lk) in lam.iter().enumerate() {
            let dft: C64 = csi
                .taps
                .iter()
                .enumerate()
                .map(|(i, &h)| {
                    h * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k as f64) * csi.lag(i) as f64 / n as f64)
                })
                .sum();
            assert!((lk * (n as f64).sqrt() - dft).norm() < 1e-12);
        }
    }
}
