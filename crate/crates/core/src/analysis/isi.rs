use crate::error::{Error, Result};
use crate::signal::C64;
use crate::txchain::QamAlphabet;

/// Smallest number of samples a conditional bin may hold.
const MIN_HITS: usize = 10;

/// How the neighbor symbol is binned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsiBinning {
    /// One bin per alphabet point.
    PerPoint,
    /// Equal-population amplitude rings; residuals are derotated by the
    /// neighbor's phase before averaging.
    Rings(usize),
}

impl IsiBinning {
    /// Per-point bins up to 64 points, 16 rings beyond.
    pub fn for_order(order: usize) -> Self {
        if order <= 64 {
            IsiBinning::PerPoint
        } else {
            IsiBinning::Rings(16)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsiScores {
    /// Lags `-window..=window` without 0.
    pub lags: Vec<i64>,
    pub scores: Vec<f64>,
}

impl IsiScores {
    pub fn score(&self, lag: i64) -> Option<f64> {
        self.lags.iter().position(|&l| l == lag).map(|i| self.scores[i])
    }
}

/// Dependence of residuals `e_m` on the neighbor `a_{m-k}`.
///
/// Per-point binning scores the population-weighted variance of the
/// conditional means `E[e_m | a_{m-k} = s]`; ring binning scores the
/// weighted power of the derotated conditional means. Both are normalized
/// by the alphabet energy and vanish when there is no dependence.
pub fn nonlinear_isi_probe(
    residuals: &[C64],
    symbols: &[usize],
    alphabet: &QamAlphabet,
    window: usize,
    binning: IsiBinning,
) -> Result<IsiScores> {
    if residuals.len() != symbols.len() {
        return Err(Error::invalid("residual and symbol counts differ"));
    }
    let n = residuals.len();
    if n <= 2 * window {
        return Err(Error::InsufficientSamples {
            needed: 2 * window + 1,
            available: n,
        });
    }
    let energy = alphabet.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / alphabet.order() as f64;
    let ring_of = ring_map(alphabet, binning);
    let bins = match binning {
        IsiBinning::PerPoint => alphabet.order(),
        IsiBinning::Rings(r) => r,
    };
    let mut lags = Vec::new();
    let mut scores = Vec::new();
    for lag in -(window as i64)..=(window as i64) {
        if lag == 0 {
            continue;
        }
        let range = (window..n - window).map(|m| (m, (m as i64 - lag) as usize));
        let mut sums = vec![C64::default(); bins];
        let mut hits = vec![0usize; bins];
        let mut total = C64::default();
        let mut count = 0usize;
        for (m, j) in range {
            let s = symbols[j];
            let (bin, v) = match binning {
                IsiBinning::PerPoint => (s, residuals[m]),
                IsiBinning::Rings(_) => {
                    let p = alphabet.point(s);
                    (ring_of[s], residuals[m] * p.conj() / p.norm())
                }
            };
            sums[bin] += v;
            hits[bin] += 1;
            total += v;
            count += 1;
        }
        if let Some((_, &h)) = hits.iter().enumerate().find(|(_, &h)| h < MIN_HITS) {
            return Err(Error::SparseBin {
                lag,
                hits: h,
                needed: MIN_HITS,
            });
        }
        let center = match binning {
            IsiBinning::PerPoint => total / count as f64,
            IsiBinning::Rings(_) => C64::default(),
        };
        let score: f64 = sums
            .iter()
            .zip(&hits)
            .map(|(s, &h)| {
                let mean = s / h as f64;
                h as f64 / count as f64 * (mean - center).norm_sqr()
            })
            .sum();
        lags.push(lag);
        scores.push(score / energy);
    }
    Ok(IsiScores { lags, scores })
}

/// Ring index per alphabet point, rings holding near-equal point counts
/// ordered by amplitude.
fn ring_map(alphabet: &QamAlphabet, binning: IsiBinning) -> Vec<usize> {
    let IsiBinning::Rings(rings) = binning else {
        return Vec::new();
    };
    let mut order: Vec<usize> = (0..alphabet.order()).collect();
    order.sort_by(|&a, &b| {
        alphabet
            .point(a)
            .norm_sqr()
            .total_cmp(&alphabet.point(b).norm_sqr())
            .then(a.cmp(&b))
    });
    let mut map = vec![0; alphabet.order()];
    for (rank, &idx) in order.iter().enumerate() {
        map[idx] = rank * rings / alphabet.order();
    }
    map
}
