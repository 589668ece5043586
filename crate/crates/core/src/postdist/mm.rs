use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::C64;
use crate::txchain::QamAlphabet;

/// Training hits below which a point borrows its amplitude ring's estimate.
pub const MIN_POINT_HITS: usize = 20;

/// Per-point complex gain `E[z / a | a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmTable {
    pub coeffs: Vec<C64>,
}

impl MmTable {
    /// Expected received point `coeff(a) * a` for every alphabet entry.
    pub fn centers(&self, alphabet: &QamAlphabet) -> Vec<C64> {
        self.coeffs.iter().zip(alphabet.points()).map(|(c, a)| c * a).collect()
    }
}

pub fn mm_fit(z: &[C64], truth: &[usize], alphabet: &QamAlphabet) -> Result<MmTable> {
    if z.len() != truth.len() {
        return Err(Error::invalid("soft symbol and label counts differ"));
    }
    let p = alphabet.order();
    let mut sums = vec![C64::default(); p];
    let mut hits = vec![0usize; p];
    for (&v, &t) in z.iter().zip(truth) {
        sums[t] += v / alphabet.point(t);
        hits[t] += 1;
    }
    // Rings of identical amplitude.
    let radius = |i: usize| (alphabet.point(i).norm_sqr() * 1e9).round() as i64;
    let mut coeffs = Vec::with_capacity(p);
    for i in 0..p {
        if hits[i] >= MIN_POINT_HITS {
            coeffs.push(sums[i] / hits[i] as f64);
            continue;
        }
        let r = radius(i);
        let (s, h) = (0..p)
            .filter(|&j| radius(j) == r)
            .fold((C64::default(), 0usize), |(s, h), j| (s + sums[j], h + hits[j]));
        if h == 0 {
            return Err(Error::EmptyBin { index: i });
        }
        coeffs.push(s / h as f64);
    }
    Ok(MmTable { coeffs })
}

/// `argmin_a |z - coeff(a) a|`, lowest index on ties.
pub fn mm_correct(z: C64, centers: &[C64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (z - c).norm_sqr();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa::SalehParams;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn linear_channel_gives_unit_table() {
        let a = QamAlphabet::new(16).unwrap();
        let mut r = rng::stream(1, &[]);
        let truth: Vec<usize> = (0..20_000).map(|_| r.random_range(0..16)).collect();
        let sigma2 = 0.01;
        let z: Vec<C64> = truth.iter().map(|&t| a.point(t) + rng::complex_gaussian(&mut r, sigma2)).collect();
        let table = mm_fit(&z, &truth, &a).unwrap();
        for (i, c) in table.coeffs.iter().enumerate() {
            let hits = truth.iter().filter(|&&t| t == i).count() as f64;
            let tol = 2.0 * (sigma2 / a.point(i).norm_sqr()).sqrt() / hits.sqrt() * 2.0;
            assert!((c - 1.0).norm() < tol.max(2.0 / hits.sqrt()), "{i}: {c}");
        }
        let centers = table.centers(&a);
        for _ in 0..200 {
            let v = rng::complex_gaussian(&mut r, 1.0);
            let by_table = mm_correct(v, &centers);
            let nn = a.nearest(v);
            // Near-unit table: decisions only differ right at boundaries.
            if by_table != nn {
                let gap = (v - a.point(nn)).norm() - (v - a.point(by_table)).norm();
                assert!(gap.abs() < 0.05);
            }
        }
    }

    #[test]
    fn compression_shrinks_outer_points() {
        let a = QamAlphabet::new(64).unwrap();
        let p = SalehParams::REFERENCE;
        let mut r = rng::stream(2, &[]);
        let drive = 0.45;
        let truth: Vec<usize> = (0..30_000).map(|_| r.random_range(0..64)).collect();
        let z: Vec<C64> = truth
            .iter()
            .map(|&t| p.apply_sample(a.point(t) * drive) / (p.g0 * drive) + rng::complex_gaussian(&mut r, 1e-4))
            .collect();
        let table = mm_fit(&z, &truth, &a).unwrap();
        let mut by_radius: Vec<(f64, f64)> = (0..64).map(|i| (a.point(i).norm(), table.coeffs[i].norm())).collect();
        by_radius.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in by_radius.windows(2) {
            if w[1].0 > w[0].0 + 1e-9 {
                assert!(w[1].1 < w[0].1, "{w:?}");
            }
        }
    }

    #[test]
    fn sparse_points_borrow_ring() {
        let a = QamAlphabet::new(16).unwrap();
        // Only index 0 observed; its ring (the four corners) shares it.
        let z = vec![a.point(0) * 0.9; 30];
        let truth = vec![0usize; 30];
        let err = mm_fit(&z, &truth, &a).unwrap_err();
        assert!(matches!(err, Error::EmptyBin { .. }));
        let corners: Vec<usize> = (0..16).filter(|&i| (a.point(i).norm() - a.point(0).norm()).abs() < 1e-12).collect();
        assert_eq!(corners.len(), 4);
        let mut z = Vec::new();
        let mut t = Vec::new();
        for i in 0..16 {
            let n = if i == corners[1] { 3 } else { 25 };
            for _ in 0..n {
                z.push(a.point(i) * 0.8);
                t.push(i);
            }
        }
        let table = mm_fit(&z, &t, &a).unwrap();
        assert!((table.coeffs[corners[1]] - 0.8).norm() < 1e-12);
    }
}
