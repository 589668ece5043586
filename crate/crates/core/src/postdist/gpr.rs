use nalgebra::DMatrix;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::regressor::{regressor_len, regressor_matrix, valid_memory, MAX_MEMORY};
use crate::error::{Error, Result};
use crate::rng;
use crate::signal::C64;

/// Kernel-matrix jitter relative to the signal variance.
const JITTER: f64 = 1e-8;
/// Test points per batched prediction.
const BATCH: usize = 1024;
const WHITEN_BLOCK: usize = 128;
/// Ascent stops once the log-parameter step falls below this.
const MIN_STEP: f64 = 1e-4;

/// Hyperparameters of `sf^2 exp(-sum_i (p_i - q_i)^2 / c_i^2)` plus noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GprHyper {
    pub sigma_f: f64,
    pub sigma_nu: f64,
    pub length_scales: Vec<f64>,
}

impl GprHyper {
    pub fn isotropic(dim: usize, sigma_f: f64, sigma_nu: f64, length: f64) -> Self {
        Self {
            sigma_f,
            sigma_nu,
            length_scales: vec![length; dim],
        }
    }

    fn to_log(&self) -> Vec<f64> {
        let mut v = vec![self.sigma_f.ln(), self.sigma_nu.ln()];
        v.extend(self.length_scales.iter().map(|c| c.ln()));
        v
    }

    fn from_log(v: &[f64]) -> Self {
        Self {
            sigma_f: v[0].exp(),
            sigma_nu: v[1].exp(),
            length_scales: v[2..].iter().map(|x| x.exp()).collect(),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.length_scales.len() != dim {
            return Err(Error::invalid(format!(
                "{} length scales for {dim}-dimensional inputs",
                self.length_scales.len()
            )));
        }
        if !(positive(self.sigma_f) && positive(self.sigma_nu) && self.length_scales.iter().all(|&c| positive(c))) {
            return Err(Error::invalid("GPR hyperparameters must be positive and finite"));
        }
        Ok(())
    }

    fn jitter(&self) -> f64 {
        JITTER * self.sigma_f * self.sigma_f
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GprConfig {
    pub segments: usize,
    /// Gradient-ascent iterations on the log marginal likelihood.
    pub iterations: usize,
    /// Segment points used during hyperparameter search; the final model
    /// conditions on the whole segment.
    pub opt_points: usize,
    pub init: Option<GprHyper>,
    pub seed: u64,
}

impl Default for GprConfig {
    fn default() -> Self {
        Self {
            segments: 4,
            iterations: 200,
            opt_points: 256,
            init: None,
            seed: 0,
        }
    }
}

/// Kernel matrix between the rows of `a` and `b`.
fn kernel(hyper: &GprHyper, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let inv: Vec<f64> = hyper.length_scales.iter().map(|c| 1.0 / c).collect();
    let scale = |m: &DMatrix<f64>| {
        let mut s = m.clone();
        for (j, f) in inv.iter().enumerate() {
            s.column_mut(j).scale_mut(*f);
        }
        s
    };
    let (ua, ub) = (scale(a), scale(b));
    let na: Vec<f64> = ua.row_iter().map(|r| r.norm_squared()).collect();
    let nb: Vec<f64> = ub.row_iter().map(|r| r.norm_squared()).collect();
    let mut k = &ua * ub.transpose();
    let sf2 = hyper.sigma_f * hyper.sigma_f;
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            let d2 = (na[i] + nb[j] - 2.0 * k[(i, j)]).max(0.0);
            k[(i, j)] = sf2 * (-d2).exp();
        }
    }
    k
}

/// Exact kernel of a set with itself (zero diagonal distance).
fn self_kernel(hyper: &GprHyper, x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let d = x.ncols();
    let sf2 = hyper.sigma_f * hyper.sigma_f;
    let inv2: Vec<f64> = hyper.length_scales.iter().map(|c| 1.0 / (c * c)).collect();
    let mut k = DMatrix::zeros(n, n);
    for q in 0..n {
        k[(q, q)] = sf2;
        for p in q + 1..n {
            let mut d2 = 0.0;
            for i in 0..d {
                let diff = x[(p, i)] - x[(q, i)];
                d2 += diff * diff * inv2[i];
            }
            let v = sf2 * (-d2).exp();
            k[(p, q)] = v;
            k[(q, p)] = v;
        }
    }
    k
}

fn target_matrix(targets: &[C64]) -> DMatrix<f64> {
    DMatrix::from_fn(targets.len(), 2, |i, j| if j == 0 { targets[i].re } else { targets[i].im })
}

struct Likelihood {
    value: f64,
    gradient: Vec<f64>,
}

/// Joint log marginal likelihood of the in-phase and quadrature targets,
/// which share one kernel, with its gradient in log-parameters.
fn log_likelihood(hyper: &GprHyper, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Option<Likelihood> {
    let n = x.nrows();
    let kf = self_kernel(hyper, x);
    let mut ky = kf.clone();
    let noise = hyper.sigma_nu * hyper.sigma_nu + hyper.jitter();
    for i in 0..n {
        ky[(i, i)] += noise;
    }
    let chol = ky.cholesky()?;
    let alpha = chol.solve(y);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let fit: f64 = y.iter().zip(alpha.iter()).map(|(a, b)| a * b).sum();
    let value = -0.5 * fit - log_det - n as f64 * (2.0 * std::f64::consts::PI).ln();
    let l_inv = chol.l().solve_lower_triangular(&DMatrix::identity(n, n))?;
    let ky_inv = l_inv.transpose() * &l_inv;
    // W = A A^T - 2 K^{-1}; dL/dt = tr(W dK/dt) / 2.
    let mut w = &alpha * alpha.transpose();
    w -= &ky_inv * 2.0;
    let trace_w: f64 = w.diagonal().sum();
    let mut gradient = Vec::with_capacity(2 + x.ncols());
    let wk: f64 = w.iter().zip(kf.iter()).map(|(a, b)| a * b).sum();
    gradient.push(wk + hyper.jitter() * trace_w);
    gradient.push(hyper.sigma_nu * hyper.sigma_nu * trace_w);
    for (i, c) in hyper.length_scales.iter().enumerate() {
        let mut acc = 0.0;
        for q in 0..n {
            for p in q + 1..n {
                let diff = x[(p, i)] - x[(q, i)];
                acc += w[(p, q)] * kf[(p, q)] * diff * diff;
            }
        }
        // Symmetric off-diagonal pairs counted twice, halved by the 1/2.
        gradient.push(acc * 2.0 / (c * c));
    }
    Some(Likelihood { value, gradient })
}

/// Normalized-gradient ascent with a bold-driver step size; only
/// improving steps are taken.
fn maximize(init: &GprHyper, x: &DMatrix<f64>, y: &DMatrix<f64>, iterations: usize, fix_noise: bool) -> Result<(GprHyper, f64)> {
    let mut theta = init.to_log();
    let mut cur = log_likelihood(init, x, y).ok_or(Error::NotPositiveDefinite)?;
    let mut step = 0.1;
    for _ in 0..iterations {
        let mut g = cur.gradient.clone();
        if fix_noise {
            g[1] = 0.0;
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || step < MIN_STEP {
            break;
        }
        let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, d)| (t + step * d / norm).clamp(-12.0, 12.0)).collect();
        match log_likelihood(&GprHyper::from_log(&cand), x, y) {
            Some(l) if l.value > cur.value => {
                theta = cand;
                cur = l;
                step *= 1.2;
            }
            _ => step *= 0.5,
        }
    }
    Ok((GprHyper::from_log(&theta), cur.value))
}

/// One GP conditioned on a training segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SegmentSpec", into = "SegmentSpec")]
pub struct GprSegmentModel {
    pub hyper: GprHyper,
    inputs: DMatrix<f64>,
    targets: Vec<C64>,
    /// `(K + s_nu^2 I)^{-1} [Re a, Im a]`.
    solve: DMatrix<f64>,
    /// `L^{-T}` for `K + s_nu^2 I = L L^T`; upper triangular.
    whiten: DMatrix<f64>,
}

impl GprSegmentModel {
    pub fn new(hyper: GprHyper, inputs: DMatrix<f64>, targets: Vec<C64>) -> Result<Self> {
        hyper.validate(inputs.ncols())?;
        if inputs.nrows() != targets.len() || targets.is_empty() {
            return Err(Error::invalid("GPR inputs and targets must be non-empty and equal in count"));
        }
        let mut ky = self_kernel(&hyper, &inputs);
        let noise = hyper.sigma_nu * hyper.sigma_nu + hyper.jitter();
        for i in 0..ky.nrows() {
            ky[(i, i)] += noise;
        }
        let chol = ky.cholesky().ok_or(Error::NotPositiveDefinite)?;
        let solve = chol.solve(&target_matrix(&targets));
        let n = inputs.nrows();
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            hyper,
            inputs,
            targets,
            solve,
            whiten: l_inv.transpose(),
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Log marginal likelihood of this segment's own data.
    pub fn log_marginal_likelihood(&self) -> f64 {
        log_likelihood(&self.hyper, &self.inputs, &target_matrix(&self.targets))
            .map_or(f64::NEG_INFINITY, |l| l.value)
    }

    /// Predictive means and variances (noise included) for each test row.
    pub fn predict(&self, test: &DMatrix<f64>) -> (Vec<C64>, Vec<f64>) {
        let ks = kernel(&self.hyper, test, &self.inputs);
        let mean = &ks * &self.solve;
        // Explained variance is |L^{-1} k|^2. Column block j of L^{-T} is
        // zero below row `end`, so only the leading columns of `ks` enter.
        let n = self.inputs.nrows();
        let mut explained = vec![0.0; test.nrows()];
        let mut start = 0;
        while start < n {
            let end = (start + WHITEN_BLOCK).min(n);
            let part = ks.columns(0, end) * self.whiten.view((0, start), (end, end - start));
            for (b, e) in explained.iter_mut().enumerate() {
                *e += part.row(b).norm_squared();
            }
            start = end;
        }
        let sf2 = self.hyper.sigma_f * self.hyper.sigma_f;
        let nu2 = self.hyper.sigma_nu * self.hyper.sigma_nu;
        let means = (0..test.nrows()).map(|b| C64::new(mean[(b, 0)], mean[(b, 1)])).collect();
        let vars = explained.iter().map(|e| (sf2 - e).max(0.0) + nu2).collect();
        (means, vars)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSpec {
    hyper: GprHyper,
    dim: usize,
    /// Row-major training inputs.
    inputs: Vec<f64>,
    targets: Vec<C64>,
}

impl TryFrom<SegmentSpec> for GprSegmentModel {
    type Error = Error;

    fn try_from(s: SegmentSpec) -> Result<Self> {
        if s.dim == 0 || s.inputs.len() != s.dim * s.targets.len() {
            return Err(Error::ModelDump("GPR segment input shape does not match its targets".into()));
        }
        if s.inputs.iter().any(|v| !v.is_finite()) || s.targets.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(Error::ModelDump("non-finite GPR training data".into()));
        }
        let inputs = DMatrix::from_row_slice(s.targets.len(), s.dim, &s.inputs);
        GprSegmentModel::new(s.hyper, inputs, s.targets).map_err(|e| Error::ModelDump(e.to_string()))
    }
}

impl From<GprSegmentModel> for SegmentSpec {
    fn from(m: GprSegmentModel) -> Self {
        let dim = m.inputs.ncols();
        let inputs = m.inputs.transpose().iter().copied().collect();
        SegmentSpec {
            hyper: m.hyper,
            dim,
            inputs,
            targets: m.targets,
        }
    }
}

/// Inverse-variance fusion; returns the weights, fused value and variance.
pub fn blue_fuse(estimates: &[(f64, f64)]) -> (Vec<f64>, f64, f64) {
    let precision: f64 = estimates.iter().map(|(_, v)| 1.0 / v).sum();
    let weights: Vec<f64> = estimates.iter().map(|(_, v)| 1.0 / v / precision).collect();
    let mean = estimates.iter().zip(&weights).map(|((m, _), w)| m * w).sum();
    (weights, mean, 1.0 / precision)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub mean: C64,
    pub segment_means: Vec<C64>,
    pub segment_vars: Vec<f64>,
    pub weights: Vec<f64>,
    pub fused_var: f64,
}

/// Segment GPs fused per test point by their predictive variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlueEnsemble {
    pub memory: usize,
    pub segments: Vec<GprSegmentModel>,
}

impl BlueEnsemble {
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn predict_rows(&self, test: &DMatrix<f64>) -> Vec<Prediction> {
        let per_segment: Vec<(Vec<C64>, Vec<f64>)> = self.segments.iter().map(|s| s.predict(test)).collect();
        (0..test.nrows())
            .map(|b| {
                let segment_means: Vec<C64> = per_segment.iter().map(|(m, _)| m[b]).collect();
                let segment_vars: Vec<f64> = per_segment.iter().map(|(_, v)| v[b]).collect();
                // I and Q share the kernel, hence the variances and weights.
                let est: Vec<(f64, f64)> = segment_means.iter().zip(&segment_vars).map(|(m, &v)| (m.re, v)).collect();
                let (weights, re, fused_var) = blue_fuse(&est);
                let im = segment_means.iter().zip(&weights).map(|(m, w)| m.im * w).sum();
                Prediction {
                    mean: C64::new(re, im),
                    segment_means,
                    segment_vars,
                    weights,
                    fused_var,
                }
            })
            .collect()
    }

    /// Prediction for a single regressor window.
    pub fn predict(&self, window: &[f64]) -> Prediction {
        let test = DMatrix::from_row_slice(1, window.len(), window);
        self.predict_rows(&test).pop().expect("one row")
    }

    pub fn predict_block(&self, z: &[C64]) -> Vec<C64> {
        let x = regressor_matrix(z, self.memory);
        let mut out = Vec::with_capacity(z.len());
        let mut start = 0;
        while start < x.nrows() {
            let rows = BATCH.min(x.nrows() - start);
            let batch = x.rows(start, rows).into_owned();
            out.extend(self.predict_rows(&batch).into_iter().map(|p| p.mean));
            start += rows;
        }
        out
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !valid_memory(self.memory) {
            return Err(Error::ModelDump(format!("memory depth {} outside 1..={MAX_MEMORY}", self.memory)));
        }
        let d = regressor_len(self.memory);
        if self.segments.is_empty() || self.segments.iter().any(|s| s.dim() != d) {
            return Err(Error::ModelDump("GPR segment dimensions do not match the memory depth".into()));
        }
        Ok(())
    }
}

/// Fits one GP per contiguous segment of the training pairs. The noise
/// level is learned on the first segment and held fixed for the rest.
pub fn gpr_fit(z: &[C64], targets: &[C64], memory: usize, cfg: &GprConfig) -> Result<BlueEnsemble> {
    if !valid_memory(memory) {
        return Err(Error::invalid(format!("memory depth must lie in 1..={MAX_MEMORY}")));
    }
    let x = regressor_matrix(z, memory);
    let seg = fit_segments(&x, targets, cfg)?;
    Ok(BlueEnsemble { memory, segments: seg })
}

pub(crate) fn fit_segments(x: &DMatrix<f64>, targets: &[C64], cfg: &GprConfig) -> Result<Vec<GprSegmentModel>> {
    let n = targets.len();
    let d = x.ncols();
    if x.nrows() != n {
        return Err(Error::invalid("input and target counts differ"));
    }
    if cfg.segments == 0 || n < cfg.segments * d * 10 {
        return Err(Error::InsufficientSamples {
            needed: cfg.segments.max(1) * d * 10,
            available: n,
        });
    }
    let mut hyper = match &cfg.init {
        Some(h) => h.clone(),
        None => {
            let var = targets.iter().map(|t| t.norm_sqr()).sum::<f64>() / (2.0 * n as f64);
            GprHyper::isotropic(d, var.sqrt().max(1e-3), 0.1 * var.sqrt().max(1e-3), 1.0)
        }
    };
    hyper.validate(d)?;
    let len = n / cfg.segments;
    let mut segments = Vec::with_capacity(cfg.segments);
    for s in 0..cfg.segments {
        let lo = s * len;
        let hi = if s + 1 == cfg.segments { n } else { lo + len };
        let xs = x.rows(lo, hi - lo).into_owned();
        let ts = targets[lo..hi].to_vec();
        let m = cfg.opt_points.min(hi - lo);
        let mut r = rng::stream(cfg.seed, &[rng::purpose::GPR_SUBSAMPLE, s as u64]);
        let mut pick = sample(&mut r, hi - lo, m).into_vec();
        pick.sort_unstable();
        let xo = DMatrix::from_fn(m, d, |i, j| xs[(pick[i], j)]);
        let yo = target_matrix(&pick.iter().map(|&i| ts[i]).collect::<Vec<_>>());
        let (h, _) = maximize(&hyper, &xo, &yo, cfg.iterations, s > 0)?;
        hyper = h;
        segments.push(GprSegmentModel::new(hyper.clone(), xs, ts)?);
    }
    Ok(segments)
}
