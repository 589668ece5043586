use nalgebra::DMatrix;

use crate::signal::C64;

/// `[Re z_{n+M-1}, ..., Re z_{n-M+1}, Im z_{n+M-1}, ..., Im z_{n-M+1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressorWindow {
    pub values: Vec<f64>,
    pub memory: usize,
}

/// Deepest supported window; a depth-16 window already spans 31 symbols.
pub const MAX_MEMORY: usize = 16;

/// Whether `m` is a usable memory depth.
pub fn valid_memory(m: usize) -> bool {
    (1..=MAX_MEMORY).contains(&m)
}

/// Length of the real regressor for memory depth `m`.
pub fn regressor_len(m: usize) -> usize {
    4 * m - 2
}

/// Writes the window around `n` into `out`, wrapping cyclically in `z`.
pub(crate) fn fill_regressor(z: &[C64], n: usize, m: usize, out: &mut [f64]) {
    let len = z.len() as i64;
    let span = 2 * m - 1;
    for j in 0..span {
        let idx = (n as i64 + m as i64 - 1 - j as i64).rem_euclid(len) as usize;
        out[j] = z[idx].re;
        out[span + j] = z[idx].im;
    }
}

pub fn build_regressor(z: &[C64], n: usize, m: usize) -> RegressorWindow {
    assert!(m >= 1 && z.len() >= 2 * m - 1, "block too short for memory depth {m}");
    let mut values = vec![0.0; regressor_len(m)];
    fill_regressor(z, n, m, &mut values);
    RegressorWindow { values, memory: m }
}

/// One regressor per row for every position of the block.
pub fn regressor_matrix(z: &[C64], m: usize) -> DMatrix<f64> {
    let d = regressor_len(m);
    let mut out = DMatrix::zeros(z.len(), d);
    let mut row = vec![0.0; d];
    for n in 0..z.len() {
        fill_regressor(z, n, m, &mut row);
        for (j, &v) in row.iter().enumerate() {
            out[(n, j)] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n: usize) -> Vec<C64> {
        (0..n).map(|i| C64::new(i as f64, 10.0 + i as f64)).collect()
    }

    #[test]
    fn memoryless_window() {
        let w = build_regressor(&block(4), 2, 1);
        assert_eq!(w.values, vec![2.0, 12.0]);
    }

    #[test]
    fn ordering_for_depth_two() {
        let w = build_regressor(&block(8), 3, 2);
        assert_eq!(w.values, vec![4.0, 3.0, 2.0, 14.0, 13.0, 12.0]);
    }

    #[test]
    fn wraps_cyclically() {
        let w = build_regressor(&block(8), 0, 2);
        assert_eq!(w.values, vec![1.0, 0.0, 7.0, 11.0, 10.0, 17.0]);
        for m in 1..5 {
            assert_eq!(build_regressor(&block(9), 4, m).values.len(), 4 * m - 2);
        }
    }

    #[test]
    fn matrix_rows_match_windows() {
        let z = block(10);
        let x = regressor_matrix(&z, 3);
        for n in 0..10 {
            let w = build_regressor(&z, n, 3);
            for (j, v) in w.values.iter().enumerate() {
                assert_eq!(x[(n, j)], *v);
            }
        }
    }
}
