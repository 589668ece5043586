use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::regressor::{fill_regressor, regressor_len, regressor_matrix, valid_memory, MAX_MEMORY};
use crate::error::{Error, Result};
use crate::rng;
use crate::signal::C64;

/// Damping beyond which training counts as converged.
const MAX_DAMPING: f64 = 1e10;

/// `2 / (1 + e^{-2x}) - 1`, i.e. `tanh`.
pub fn activation(x: f64) -> f64 {
    x.tanh()
}

/// One hidden layer, two linear outputs (in-phase and quadrature).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnModel {
    pub memory: usize,
    pub hidden: usize,
    /// `hidden x inputs`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w_i: Vec<f64>,
    pub w_q: Vec<f64>,
    pub b2_i: f64,
    pub b2_q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NnConfig {
    pub hidden: usize,
    /// Maximum LM iterations.
    pub epochs: usize,
    pub lambda_init: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// Cost after initialization and after every accepted step.
    pub accepted_costs: Vec<f64>,
    pub epochs_run: usize,
}

impl TrainReport {
    pub fn final_cost(&self) -> f64 {
        *self.accepted_costs.last().expect("initial cost recorded")
    }
}

impl NnModel {
    pub fn zeros(memory: usize, hidden: usize) -> Self {
        let d = regressor_len(memory);
        Self {
            memory,
            hidden,
            w1: vec![0.0; hidden * d],
            b1: vec![0.0; hidden],
            w_i: vec![0.0; hidden],
            w_q: vec![0.0; hidden],
            b2_i: 0.0,
            b2_q: 0.0,
        }
    }

    /// Uniform initialization in `+-sqrt(6 / (fan_in + fan_out))`.
    pub fn glorot(memory: usize, hidden: usize, seed: u64) -> Self {
        let mut m = Self::zeros(memory, hidden);
        let mut r = rng::stream(seed, &[rng::purpose::NN_INIT]);
        let d = m.input_len();
        let l1 = (6.0 / (d + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + 2) as f64).sqrt();
        m.w1.iter_mut().for_each(|w| *w = r.random_range(-l1..l1));
        m.w_i.iter_mut().for_each(|w| *w = r.random_range(-l2..l2));
        m.w_q.iter_mut().for_each(|w| *w = r.random_range(-l2..l2));
        m
    }

    pub fn input_len(&self) -> usize {
        regressor_len(self.memory)
    }

    pub fn param_count(&self) -> usize {
        self.hidden * (self.input_len() + 3) + 2
    }

    /// `[w1, b1, w_i, w_q, b2_i, b2_q]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w_i);
        p.extend_from_slice(&self.w_q);
        p.push(self.b2_i);
        p.push(self.b2_q);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (h, d) = (self.hidden, self.input_len());
        let (w1, rest) = p.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (wi, rest) = rest.split_at(h);
        let (wq, rest) = rest.split_at(h);
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w_i.copy_from_slice(wi);
        self.w_q.copy_from_slice(wq);
        self.b2_i = rest[0];
        self.b2_q = rest[1];
    }

    fn hidden_layer(&self, x: &[f64], g: &mut [f64]) {
        let d = self.input_len();
        for (j, gj) in g.iter_mut().enumerate() {
            let row = &self.w1[j * d..(j + 1) * d];
            let h: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[j];
            *gj = activation(h);
        }
    }

    pub fn forward(&self, x: &[f64]) -> C64 {
        let mut g = vec![0.0; self.hidden];
        self.hidden_layer(x, &mut g);
        let i: f64 = g.iter().zip(&self.w_i).map(|(a, b)| a * b).sum::<f64>() + self.b2_i;
        let q: f64 = g.iter().zip(&self.w_q).map(|(a, b)| a * b).sum::<f64>() + self.b2_q;
        C64::new(i, q)
    }

    pub fn apply_block(&self, z: &[C64]) -> Vec<C64> {
        let mut x = vec![0.0; self.input_len()];
        (0..z.len())
            .map(|n| {
                fill_regressor(z, n, self.memory, &mut x);
                self.forward(&x)
            })
            .collect()
    }

    /// Residuals `[out_I - Re t, out_Q - Im t]` per sample (interleaved) and,
    /// if requested, their Jacobian with respect to [`Self::params`].
    pub fn residuals(&self, inputs: &DMatrix<f64>, targets: &[C64], mut jac: Option<&mut DMatrix<f64>>) -> Vec<f64> {
        let (h, d) = (self.hidden, self.input_len());
        let n = inputs.nrows();
        let mut r = vec![0.0; 2 * n];
        let mut x = vec![0.0; d];
        let mut g = vec![0.0; h];
        let off_b1 = h * d;
        let off_wi = off_b1 + h;
        let off_wq = off_wi + h;
        let off_b2 = off_wq + h;
        for s in 0..n {
            for (k, v) in x.iter_mut().enumerate() {
                *v = inputs[(s, k)];
            }
            self.hidden_layer(&x, &mut g);
            let out_i: f64 = g.iter().zip(&self.w_i).map(|(a, b)| a * b).sum::<f64>() + self.b2_i;
            let out_q: f64 = g.iter().zip(&self.w_q).map(|(a, b)| a * b).sum::<f64>() + self.b2_q;
            r[2 * s] = out_i - targets[s].re;
            r[2 * s + 1] = out_q - targets[s].im;
            if let Some(j) = jac.as_deref_mut() {
                let (ri, rq) = (2 * s, 2 * s + 1);
                for u in 0..h {
                    let slope = 1.0 - g[u] * g[u];
                    let ci = self.w_i[u] * slope;
                    let cq = self.w_q[u] * slope;
                    for k in 0..d {
                        j[(ri, u * d + k)] = ci * x[k];
                        j[(rq, u * d + k)] = cq * x[k];
                    }
                    j[(ri, off_b1 + u)] = ci;
                    j[(rq, off_b1 + u)] = cq;
                    j[(ri, off_wi + u)] = g[u];
                    j[(rq, off_wi + u)] = 0.0;
                    j[(ri, off_wq + u)] = 0.0;
                    j[(rq, off_wq + u)] = g[u];
                }
                j[(ri, off_b2)] = 1.0;
                j[(rq, off_b2)] = 0.0;
                j[(ri, off_b2 + 1)] = 0.0;
                j[(rq, off_b2 + 1)] = 1.0;
            }
        }
        r
    }

    /// `(1 / 2N) sum |out - t|^2`.
    pub fn cost(&self, inputs: &DMatrix<f64>, targets: &[C64]) -> f64 {
        let r = self.residuals(inputs, targets, None);
        r.iter().map(|v| v * v).sum::<f64>() / (2.0 * targets.len() as f64)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !valid_memory(self.memory) {
            return Err(Error::ModelDump(format!("memory depth {} outside 1..={MAX_MEMORY}", self.memory)));
        }
        let d = self.input_len();
        let h = self.hidden;
        let shapes_ok = h >= 1
            && self.w1.len() == h * d
            && self.b1.len() == h
            && self.w_i.len() == h
            && self.w_q.len() == h;
        if !shapes_ok {
            return Err(Error::ModelDump("network weight shapes are inconsistent".into()));
        }
        if self.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelDump("non-finite network weight".into()));
        }
        Ok(())
    }
}

/// Levenberg-Marquardt on the joint in-phase/quadrature squared error of
/// predicting `targets[n]` from the window of `z` around `n`.
pub fn nn_train(z: &[C64], targets: &[C64], memory: usize, cfg: &NnConfig) -> Result<(NnModel, TrainReport)> {
    if z.len() != targets.len() {
        return Err(Error::invalid("input and target counts differ"));
    }
    if !valid_memory(memory) || cfg.hidden == 0 {
        return Err(Error::invalid(format!("memory depth must lie in 1..={MAX_MEMORY} and hidden width be positive")));
    }
    let mut model = NnModel::glorot(memory, cfg.hidden, cfg.seed);
    let p = model.param_count();
    if z.len() < 10 * p {
        return Err(Error::InsufficientSamples {
            needed: 10 * p,
            available: z.len(),
        });
    }
    let inputs = regressor_matrix(z, memory);
    let n = targets.len() as f64;
    let mut jac = DMatrix::zeros(2 * targets.len(), p);
    let mut params = model.params();
    let r = model.residuals(&inputs, targets, Some(&mut jac));
    let mut cost = r.iter().map(|v| v * v).sum::<f64>() / (2.0 * n);
    let mut resid = DVector::from_vec(r);
    let mut lambda = cfg.lambda_init;
    let mut report = TrainReport {
        accepted_costs: vec![cost],
        epochs_run: 0,
    };
    let mut trial = model.clone();
    for _ in 0..cfg.epochs {
        report.epochs_run += 1;
        // Explicit transpose routes both products through the blocked GEMM;
        // `tr_mul` is an unblocked dot-product loop.
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &resid;
        let mut accepted = false;
        let mut factored = false;
        while lambda <= MAX_DAMPING {
            let mut damped = jtj.clone();
            for i in 0..p {
                damped[(i, i)] += lambda;
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            factored = true;
            let step = chol.solve(&(-&grad));
            let candidate: Vec<f64> = params.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            trial.set_params(&candidate);
            let c = trial.cost(&inputs, targets);
            if c.is_finite() && c < cost {
                params = candidate;
                model.set_params(&params);
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            if !factored {
                return Err(Error::SingularDamping { damping: lambda });
            }
            break;
        }
        report.accepted_costs.push(cost);
        if cost < 1e-14 {
            break;
        }
        let r = model.residuals(&inputs, targets, Some(&mut jac));
        resid = DVector::from_vec(r);
    }
    Ok((model, report))
}
