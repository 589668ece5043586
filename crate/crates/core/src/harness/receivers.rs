//! Slow-time post-distorter training and per-variant detection on one
//! fast-time block.

use std::collections::BTreeMap;
use std::time::Instant;

use super::config::{Combining, PostdistorterKind, PostdistorterSpec, Scenario};
use super::link::{block_branches, equalize_branch, random_indices, EqualizedBlocks, Link};
use crate::channel::{ChannelRealization, NoiseSpec};
use crate::detect::{conventional_detect, dassd_detect, train_dassd};
use crate::error::Result;
use crate::metrics::{ber, gmi_air, gmi_air_centers, AirEstimate, BerEstimate};
use crate::postdist::{gpr_fit, mm_correct, mm_fit, nn_train, volterra_fit, GprConfig, MmTable, NnConfig, PostdistModel};
use crate::rng;
use crate::signal::C64;

/// Initial LM damping.
const NN_DAMPING: f64 = 1e-3;

/// Equalized slow-time training pairs from the nominal branch.
#[derive(Clone, Debug)]
pub struct SlowTimeData {
    pub z: Vec<C64>,
    pub truth: Vec<usize>,
    pub symbols: Vec<C64>,
}

/// Sends the slow-time sequence through the PA without channel or noise
/// and equalizes the nominal sampling phase.
pub fn slow_time_data(sc: &Scenario, link: &Link) -> Result<SlowTimeData> {
    let mut r = rng::stream(sc.seed, &[rng::purpose::SLOW_TIME]);
    let truth = random_indices(&link.alphabet, sc.layout.n_s, &mut r);
    let symbols = link.alphabet.map_indices(&truth);
    let (tx, offsets) = link.transmit(std::slice::from_ref(&symbols))?;
    let rx = link.receive(&tx, &ChannelRealization::identity(), &NoiseSpec { n0: 0.0, seed: 0 });
    let branches = block_branches(&rx, offsets[0], symbols.len())?;
    let eq = equalize_branch(&branches[0], &symbols, &[], sc.receiver.l_b, sc.receiver.l_f, 0.0)?;
    Ok(SlowTimeData {
        z: eq.training,
        truth,
        symbols,
    })
}

/// Post-distorters trained at one PA operating point.
#[derive(Clone, Debug, Default)]
pub struct TrainedSet {
    pub mm: Option<MmTable>,
    pub models: BTreeMap<(PostdistorterKind, usize), PostdistModel>,
    /// Training wall time per post-distorter label.
    pub seconds: Vec<(String, f64)>,
}

impl TrainedSet {
    fn model(&self, spec: &PostdistorterSpec, default_memory: usize) -> Option<&PostdistModel> {
        self.models.get(&(spec.kind, spec.memory_or(default_memory)))
    }
}

pub fn train_set(sc: &Scenario, st: &SlowTimeData, alphabet: &crate::txchain::QamAlphabet, point: u64) -> Result<TrainedSet> {
    let mut set = TrainedSet::default();
    for spec in &sc.receiver.postdistorters {
        let m = spec.memory_or(sc.receiver.memory);
        let start = Instant::now();
        let model = match spec.kind {
            PostdistorterKind::Conventional => continue,
            PostdistorterKind::Mm => {
                set.mm = Some(mm_fit(&st.z, &st.truth, alphabet)?);
                set.seconds.push((spec.label(), start.elapsed().as_secs_f64()));
                continue;
            }
            PostdistorterKind::Vs => PostdistModel::Volterra(volterra_fit(&st.z, &st.symbols, m, sc.volterra.terms)?),
            PostdistorterKind::Gpr => {
                let cfg = GprConfig {
                    segments: sc.gpr.segments,
                    iterations: sc.gpr.iterations,
                    opt_points: sc.gpr.opt_points,
                    init: None,
                    seed: rng::derive_seed(sc.seed, &[rng::purpose::GPR_SUBSAMPLE, point, m as u64]),
                };
                PostdistModel::Gpr(gpr_fit(&st.z, &st.symbols, m, &cfg)?)
            }
            PostdistorterKind::Nn => {
                let cfg = NnConfig {
                    hidden: sc.nn.hidden,
                    epochs: sc.nn.epochs,
                    lambda_init: NN_DAMPING,
                    seed: rng::derive_seed(sc.seed, &[rng::purpose::NN_INIT, point, m as u64]),
                };
                PostdistModel::Nn(nn_train(&st.z, &st.symbols, m, &cfg)?.0)
            }
        };
        set.models.insert((spec.kind, m), model);
        set.seconds.push((spec.label(), start.elapsed().as_secs_f64()));
    }
    Ok(set)
}

/// One fast-time training block and its data blocks, equalized per branch.
#[derive(Clone, Debug)]
pub struct ReceivedTrial {
    pub ft_truth: Vec<usize>,
    pub ft_symbols: Vec<C64>,
    pub data_truth: Vec<Vec<usize>>,
    pub branches: Vec<EqualizedBlocks>,
}

/// Simulates one channel block: training block then data blocks.
pub fn receive_trial(
    sc: &Scenario,
    link: &Link,
    channel: &ChannelRealization,
    snr_db: f64,
    trial: u64,
    noise_seed: u64,
) -> Result<ReceivedTrial> {
    let alphabet = &link.alphabet;
    let mut r = rng::stream(sc.seed, &[rng::purpose::FT_SYMBOLS, trial]);
    let ft_truth = random_indices(alphabet, sc.layout.n_f, &mut r);
    let mut r = rng::stream(sc.seed, &[rng::purpose::DATA_SYMBOLS, trial]);
    let data_truth: Vec<Vec<usize>> = (0..sc.receiver.data_blocks)
        .map(|_| random_indices(alphabet, sc.layout.n_d, &mut r))
        .collect();
    let ft_symbols = alphabet.map_indices(&ft_truth);
    let mut blocks = vec![ft_symbols.clone()];
    blocks.extend(data_truth.iter().map(|t| alphabet.map_indices(t)));
    let (tx, offsets) = link.transmit(&blocks)?;
    let n0 = link.noise_variance(snr_db);
    let rx = link.receive(&tx, channel, &NoiseSpec { n0, seed: noise_seed });
    let ft_rx = block_branches(&rx, offsets[0], sc.layout.n_f)?;
    let data_rx: Vec<Vec<Vec<C64>>> = offsets[1..]
        .iter()
        .map(|&o| block_branches(&rx, o, sc.layout.n_d))
        .collect::<Result<_>>()?;
    let branches = (0..link.sps())
        .map(|i| {
            let blocks: Vec<Vec<C64>> = data_rx.iter().map(|b| b[i].clone()).collect();
            equalize_branch(&ft_rx[i], &ft_symbols, &blocks, sc.receiver.l_b, sc.receiver.l_f, n0)
        })
        .collect::<Result<_>>()?;
    Ok(ReceivedTrial {
        ft_truth,
        ft_symbols,
        data_truth,
        branches,
    })
}

/// Outcome of one receiver variant on one trial.
#[derive(Clone, Debug)]
pub struct VariantOutcome {
    pub label: String,
    pub ber: BerEstimate,
    pub air: AirEstimate,
    pub branch: Option<usize>,
    pub seconds: f64,
    /// Leading soft symbols of the first data block, for scatter plots.
    pub scatter: Vec<(C64, usize)>,
}

const SCATTER_POINTS: usize = 1024;

/// Soft outputs of one post-distorter for the training block and every
/// data block of a branch; the equalizer output passes through unchanged
/// for the conventional and modified-metric receivers.
struct SoftBranch {
    training: Vec<C64>,
    data: Option<Vec<Vec<C64>>>,
}

fn flatten<T: Clone>(blocks: &[Vec<T>]) -> Vec<T> {
    blocks.iter().flatten().cloned().collect()
}

/// Runs every combining mode of one post-distorter over a received trial.
pub fn evaluate_postdistorter(
    sc: &Scenario,
    spec: &PostdistorterSpec,
    label: &str,
    trained: &TrainedSet,
    combining: &[Combining],
    trial: &ReceivedTrial,
    alphabet: &crate::txchain::QamAlphabet,
) -> Result<Vec<VariantOutcome>> {
    let model = if spec.kind.learned() {
        trained.model(spec, sc.receiver.memory)
    } else {
        None
    };
    let apply = |z: &[C64]| -> Vec<C64> {
        match model {
            Some(m) => m.apply_block(z),
            None => z.to_vec(),
        }
    };
    let truth = flatten(&trial.data_truth);
    let start = Instant::now();
    let mut soft: Vec<SoftBranch> = trial
        .branches
        .iter()
        .map(|b| SoftBranch {
            training: apply(&b.training),
            data: None,
        })
        .collect();
    let prep = start.elapsed().as_secs_f64();
    let data_of = |i: usize, soft: &mut Vec<SoftBranch>| -> Vec<C64> {
        if soft[i].data.is_none() {
            soft[i].data = Some(trial.branches[i].data.iter().map(|b| apply(b)).collect());
        }
        flatten(soft[i].data.as_ref().expect("filled"))
    };
    let mm_centers = trained.mm.as_ref().map(|t| t.centers(alphabet));
    let mut out = Vec::new();
    for &c in combining {
        let t0 = Instant::now();
        let variant = super::config::variant_label(label, c);
        let outcome = if spec.kind == PostdistorterKind::Mm {
            if c == Combining::Dassd {
                continue;
            }
            let centers = mm_centers.as_ref().expect("modified metric trained");
            let var_of = |z: &[C64]| {
                z.iter().zip(&trial.ft_truth).map(|(v, &t)| (v - centers[t]).norm_sqr()).sum::<f64>() / z.len() as f64
            };
            let branch = match c {
                Combining::Single => 0,
                _ => best_by(soft.len(), |i| {
                    let z = &soft[i].training;
                    gmi_air_centers(z, &trial.ft_truth, centers, var_of(z)).map(|a| a.value)
                })?,
            };
            let var = var_of(&soft[branch].training);
            let z = data_of(branch, &mut soft);
            let decisions: Vec<usize> = z.iter().map(|&v| mm_correct(v, centers)).collect();
            finish(
                variant,
                ber(&decisions, &truth, alphabet)?,
                gmi_air_centers(&z, &truth, centers, var)?,
                Some(branch),
                &z,
                &truth,
            )
        } else if c == Combining::Dassd {
            let streams: Vec<Vec<C64>> = (0..soft.len()).map(|i| data_of(i, &mut soft)).collect();
            let ft: Vec<Vec<C64>> = soft.iter().map(|s| s.training.clone()).collect();
            let params = train_dassd(&ft, &trial.ft_symbols)?;
            let decisions = dassd_detect(&streams, &params, alphabet)?;
            finish(
                variant,
                ber(&decisions, &truth, alphabet)?,
                gmi_air(&streams, &truth, &params, alphabet)?,
                None,
                &streams[0],
                &truth,
            )
        } else {
            let fit = |z: &[C64]| train_dassd(&[z.to_vec()], &trial.ft_symbols);
            let branch = match c {
                Combining::Single => 0,
                _ => best_by(soft.len(), |i| {
                    let z = &soft[i].training;
                    gmi_air(&[z.clone()], &trial.ft_truth, &fit(z)?, alphabet).map(|a| a.value)
                })?,
            };
            let params = fit(&soft[branch].training)?;
            let z = data_of(branch, &mut soft);
            let decisions = conventional_detect(&z, alphabet);
            finish(
                variant,
                ber(&decisions, &truth, alphabet)?,
                gmi_air(&[z.clone()], &truth, &params, alphabet)?,
                Some(branch),
                &z,
                &truth,
            )
        };
        // Post-distorter application is charged to the first mode that
        // needs a branch.
        out.push(VariantOutcome {
            seconds: prep + t0.elapsed().as_secs_f64(),
            ..outcome
        });
    }
    Ok(out)
}

fn best_by(n: usize, mut score: impl FnMut(usize) -> Result<f64>) -> Result<usize> {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..n {
        let v = score(i)?;
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    Ok(best)
}

fn finish(
    label: String,
    ber: BerEstimate,
    air: AirEstimate,
    branch: Option<usize>,
    z: &[C64],
    truth: &[usize],
) -> VariantOutcome {
    VariantOutcome {
        label,
        ber,
        air,
        branch,
        seconds: 0.0,
        scatter: z.iter().zip(truth).take(SCATTER_POINTS).map(|(&v, &t)| (v, t)).collect(),
    }
}
