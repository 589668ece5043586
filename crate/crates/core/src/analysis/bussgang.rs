use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, C64};

const MIN_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct BussgangSplit {
    /// `E[x* y] / E[|x|^2]`.
    pub alpha: C64,
    /// `y - alpha x`, uncorrelated with `x`.
    pub residual: ComplexSignal,
}

pub fn bussgang_decompose(x: &ComplexSignal, y: &ComplexSignal) -> Result<BussgangSplit> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "input and output lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            available: x.len(),
        });
    }
    let power: f64 = x.samples.iter().map(|v| v.norm_sqr()).sum();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    let cross: C64 = x.samples.iter().zip(&y.samples).map(|(a, b)| a.conj() * b).sum();
    let alpha = cross / power;
    let residual = x.samples.iter().zip(&y.samples).map(|(a, b)| b - alpha * a).collect();
    Ok(BussgangSplit {
        alpha,
        residual: ComplexSignal {
            samples: residual,
            sps: y.sps,
            delay: y.delay,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pa::SalehParams;
    use crate::rng;
    use proptest::prelude::*;

    fn gaussian(n: usize, seed: u64, var: f64) -> ComplexSignal {
        let mut r = rng::stream(seed, &[]);
        ComplexSignal::new((0..n).map(|_| rng::complex_gaussian(&mut r, var)).collect(), 1)
    }

    #[test]
    fn identity_and_scaling() {
        let x = gaussian(2000, 1, 1.0);
        let s = bussgang_decompose(&x, &x).unwrap();
        assert!((s.alpha - 1.0).norm() < 1e-12);
        assert!(s.residual.samples.iter().all(|v| v.norm() < 1e-12));
        let s = bussgang_decompose(&x, &x.scaled(3.0)).unwrap();
        assert!((s.alpha - 3.0).norm() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let z = ComplexSignal::new(vec![C64::default(); 2000], 1);
        assert!(matches!(bussgang_decompose(&z, &z), Err(Error::ZeroPower)));
        let x = gaussian(10, 2, 1.0);
        assert!(bussgang_decompose(&x, &x).is_err());
    }

    /// `E[x* f(x)]` by a 2-D midpoint rule over the unit-power complex
    /// Gaussian density.
    fn saleh_alpha_quadrature(p: &SalehParams) -> C64 {
        let n = 800;
        let lim = 5.0;
        let h = 2.0 * lim / n as f64;
        let mut acc = C64::default();
        for i in 0..n {
            for j in 0..n {
                let x = C64::new(-lim + (i as f64 + 0.5) * h, -lim + (j as f64 + 0.5) * h);
                let w = (-x.norm_sqr()).exp() / std::f64::consts::PI * h * h;
                acc += x.conj() * p.apply_sample(x) * w;
            }
        }
        acc
    }

    #[test]
    fn saleh_alpha_matches_quadrature() {
        let p = SalehParams::REFERENCE;
        let oracle = saleh_alpha_quadrature(&p);
        let x = gaussian(400_000, 3, 1.0);
        let y = ComplexSignal::new(x.samples.iter().map(|&v| p.apply_sample(v)).collect(), 1);
        let s = bussgang_decompose(&x, &y).unwrap();
        assert!((s.alpha - oracle).norm() / oracle.norm() < 0.01, "{} vs {}", s.alpha, oracle);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn residual_is_orthogonal(seed in any::<u64>(), drive in 0.1f64..3.0) {
            let p = SalehParams::REFERENCE;
            let x = gaussian(100_000, seed, drive);
            let y = ComplexSignal::new(x.samples.iter().map(|&v| p.apply_sample(v)).collect(), 1);
            let s = bussgang_decompose(&x, &y).unwrap();
            let cross: C64 = x.samples.iter().zip(&s.residual.samples).map(|(a, g)| a.conj() * g).sum();
            let power: f64 = x.samples.iter().map(|v| v.norm_sqr()).sum();
            prop_assert!(cross.norm() / power < 1e-2);
        }
    }
}
