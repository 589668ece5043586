use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::regressor::{valid_memory, MAX_MEMORY};
use crate::linalg;
use crate::signal::C64;

const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolterraTerms {
    /// `z_{n-k}` only.
    Linear,
    /// `z_{n-k}` plus `z_{n-k} |z_{n-l}|^2`.
    LinearCubic,
    /// `z_{n-k}` plus every third-order product `z_{n-k} z_{n-l} conj(z_{n-j})`
    /// with `k <= l`.
    FullCubic,
}

/// Series up to third order over lags `-(memory-1) ..= memory-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolterraModel {
    pub memory: usize,
    pub terms: VolterraTerms,
    pub coeffs: Vec<C64>,
}

pub(crate) fn term_count(memory: usize, terms: VolterraTerms) -> usize {
    let span = 2 * memory - 1;
    match terms {
        VolterraTerms::Linear => span,
        VolterraTerms::LinearCubic => span + span * span,
        VolterraTerms::FullCubic => span + span * span * (span + 1) / 2,
    }
}

fn basis(z: &[C64], n: usize, memory: usize, terms: VolterraTerms, out: &mut Vec<C64>) {
    out.clear();
    let len = z.len() as i64;
    let m = memory as i64 - 1;
    let at = |k: i64| z[(n as i64 - k).rem_euclid(len) as usize];
    for k in -m..=m {
        out.push(at(k));
    }
    match terms {
        VolterraTerms::Linear => {}
        VolterraTerms::LinearCubic => {
            for k in -m..=m {
                for l in -m..=m {
                    out.push(at(k) * at(l).norm_sqr());
                }
            }
        }
        VolterraTerms::FullCubic => {
            for k in -m..=m {
                for l in k..=m {
                    for j in -m..=m {
                        out.push(at(k) * at(l) * at(j).conj());
                    }
                }
            }
        }
    }
}

/// Basis matrix with one row per block position.
pub(crate) fn design_matrix(z: &[C64], memory: usize, terms: VolterraTerms) -> DMatrix<C64> {
    let t = term_count(memory, terms);
    let mut out = DMatrix::zeros(z.len(), t);
    let mut row = Vec::with_capacity(t);
    for n in 0..z.len() {
        basis(z, n, memory, terms, &mut row);
        for (j, &v) in row.iter().enumerate() {
            out[(n, j)] = v;
        }
    }
    out
}

/// Least-squares fit of `targets[n]` on the series terms of `z` around `n`.
pub fn volterra_fit(z: &[C64], targets: &[C64], memory: usize, terms: VolterraTerms) -> Result<VolterraModel> {
    if !valid_memory(memory) {
        return Err(Error::invalid(format!("memory depth must lie in 1..={MAX_MEMORY}")));
    }
    if z.len() != targets.len() {
        return Err(Error::invalid("input and target counts differ"));
    }
    let t = term_count(memory, terms);
    if z.len() < 10 * t {
        return Err(Error::InsufficientSamples {
            needed: 10 * t,
            available: z.len(),
        });
    }
    let phi = design_matrix(z, memory, terms);
    let gram = phi.ad_mul(&phi);
    let condition = linalg::hermitian_condition(&gram);
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let rhs = phi.ad_mul(&DVector::from_column_slice(targets));
    let c = linalg::hermitian_solve(gram, &rhs).ok_or(Error::IllConditioned { condition })?;
    Ok(VolterraModel {
        memory,
        terms,
        coeffs: c.iter().copied().collect(),
    })
}

impl VolterraModel {
    pub fn predict(&self, z: &[C64], n: usize) -> C64 {
        let mut row = Vec::with_capacity(self.coeffs.len());
        basis(z, n, self.memory, self.terms, &mut row);
        row.iter().zip(&self.coeffs).map(|(b, c)| b * c).sum()
    }

    pub fn apply_block(&self, z: &[C64]) -> Vec<C64> {
        let mut row = Vec::with_capacity(self.coeffs.len());
        (0..z.len())
            .map(|n| {
                basis(z, n, self.memory, self.terms, &mut row);
                row.iter().zip(&self.coeffs).map(|(b, c)| b * c).sum()
            })
            .collect()
    }

    /// Coefficient of the unshifted linear term.
    pub fn center_linear(&self) -> C64 {
        self.coeffs[self.memory - 1]
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !valid_memory(self.memory) || self.coeffs.len() != term_count(self.memory, self.terms) {
            return Err(Error::ModelDump("Volterra coefficient count does not match memory depth".into()));
        }
        if self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::ModelDump("non-finite Volterra coefficient".into()));
        }
        Ok(())
    }
}
