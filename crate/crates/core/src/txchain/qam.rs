use crate::error::{Error, Result};
use crate::signal::C64;

/// Square Gray-labeled QAM alphabet with unit average energy.
///
/// Point `k` carries the bits of `k` MSB first. The upper half of the bits
/// selects the in-phase level and the lower half the quadrature level, each
/// through a reflected-binary code, so horizontally or vertically adjacent
/// points differ in exactly one bit.
#[derive(Clone, Debug, PartialEq)]
pub struct QamAlphabet {
    order: usize,
    bits_per_symbol: usize,
    side: usize,
    scale: f64,
    points: Vec<C64>,
    /// Level position (0 = most positive) to Gray label, per axis.
    axis_label: Vec<usize>,
}

fn gray(n: usize) -> usize {
    n ^ (n >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut n = 0;
    while g != 0 {
        n ^= g;
        g >>= 1;
    }
    n
}

impl QamAlphabet {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64 | 256 | 1024 | 4096) {
            return Err(Error::UnsupportedOrder(order));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let half = bits_per_symbol / 2;
        let side = 1usize << half;
        let scale = (1.5 / (order as f64 - 1.0)).sqrt();
        let level = |label: usize| (side as f64 - 1.0 - 2.0 * gray_inverse(label) as f64) * scale;
        let points = (0..order)
            .map(|k| C64::new(level(k >> half), level(k & (side - 1))))
            .collect();
        let axis_label = (0..side).map(gray).collect();
        Ok(Self {
            order,
            bits_per_symbol,
            side,
            scale,
            points,
            axis_label,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> C64 {
        self.points[index]
    }

    /// Peak amplitude of the grid per axis.
    pub fn max_level(&self) -> f64 {
        (self.side as f64 - 1.0) * self.scale
    }

    pub fn index_from_bits(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b != 0))
    }

    pub fn bits_of(&self, index: usize, out: &mut Vec<u8>) {
        for shift in (0..self.bits_per_symbol).rev() {
            out.push(((index >> shift) & 1) as u8);
        }
    }

    pub fn map_indices(&self, indices: &[usize]) -> Vec<C64> {
        indices.iter().map(|&i| self.points[i]).collect()
    }

    pub fn demap_bits(&self, indices: &[usize]) -> Vec<u8> {
        let mut out = Vec::with_capacity(indices.len() * self.bits_per_symbol);
        for &i in indices {
            self.bits_of(i, &mut out);
        }
        out
    }

    /// Index of the alphabet point nearest to `z`, lowest index on ties.
    ///
    /// Equivalent to an exhaustive search: per axis the nearest level is the
    /// floor or ceiling of the continuous level position, so only up to four
    /// candidates need comparing.
    pub fn nearest(&self, z: C64) -> usize {
        let last = (self.side - 1) as f64;
        let axis = |v: f64| {
            let pos = ((last - v / self.scale) / 2.0).clamp(0.0, last);
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            (lo, hi)
        };
        let (ilo, ihi) = axis(z.re);
        let (qlo, qhi) = axis(z.im);
        let half = self.bits_per_symbol / 2;
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for ip in [ilo, ihi] {
            for qp in [qlo, qhi] {
                let idx = (self.axis_label[ip] << half) | self.axis_label[qp];
                let d = (z - self.points[idx]).norm_sqr();
                if d < best_d || (d == best_d && idx < best) {
                    best = idx;
                    best_d = d;
                }
            }
        }
        best
    }

    /// Exhaustive nearest-point search; the reference for [`Self::nearest`].
    pub fn nearest_exhaustive(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Maps groups of `log2(P)` bits (MSB first, nonzero = 1) to symbols.
pub fn map_bits(bits: &[u8], alphabet: &QamAlphabet) -> Result<Vec<C64>> {
    let k = alphabet.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::BitCount {
            bits: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits
        .chunks(k)
        .map(|c| alphabet.point(alphabet.index_from_bits(c)))
        .collect())
}
