use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{variant_label, Combining, PostdistorterKind, PostdistorterSpec, Scenario};
use super::link::Link;
use super::receivers::{evaluate_postdistorter, receive_trial, slow_time_data, train_set, VariantOutcome};
use crate::analysis::{distortion_spectrum_report, DistortionSpectrumReport, SpectrumReportConfig};
use crate::channel::draw_channel;
use crate::error::Result;
use crate::metrics::{outage, pool_air, BerEstimate};
use crate::postdist::{ModelDump, TrainingMeta};
use crate::rng;
use crate::txchain::{design_rrc, QamAlphabet};

/// One (sweep point, receiver variant) row of the result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub point: usize,
    pub backoff_db: Option<f64>,
    pub snr_db: f64,
    pub variant: String,
    pub ber: f64,
    pub ber_low: f64,
    pub ber_high: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub air: f64,
    pub air_stderr: f64,
    pub p_out: f64,
    pub blocks: usize,
}

/// Wall time per row; kept apart so the result table is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub point: usize,
    pub variant: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub backoff_db: Option<f64>,
    pub postdistorter: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub point: usize,
    pub variant: String,
    pub re: f64,
    pub im: f64,
    pub symbol: usize,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub rows: Vec<ResultRow>,
    pub timing: Vec<TimingRow>,
    pub training: Vec<TrainingRow>,
    pub scatter: Vec<ScatterRow>,
    pub models: Vec<(String, ModelDump)>,
    pub spectrum: Option<DistortionSpectrumReport>,
}

/// Restricts the receiver matrix. A pattern selects a variant label equal
/// to it or extending it by `-...`, so `gpr` covers `gpr-single` and
/// `gpr-m1-dassd`.
#[derive(Clone, Debug, Default)]
pub struct VariantFilter {
    patterns: Vec<String>,
}

impl VariantFilter {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Self {
        Self {
            patterns: patterns.iter().map(|p| p.as_ref().trim().to_string()).filter(|p| !p.is_empty()).collect(),
        }
    }

    pub fn keeps(&self, label: &str) -> bool {
        self.patterns.is_empty()
            || self.patterns.iter().any(|p| label == p || label.strip_prefix(p.as_str()).is_some_and(|r| r.starts_with('-')))
    }
}

/// Post-distorters with the combining modes that survive the filter.
fn selected(sc: &Scenario, filter: &VariantFilter) -> Vec<(PostdistorterSpec, Vec<Combining>)> {
    let mut out: Vec<(PostdistorterSpec, Vec<Combining>)> = Vec::new();
    for (pd, c) in sc.variants() {
        if !filter.keeps(&variant_label(&pd.label(), c)) {
            continue;
        }
        match out.iter_mut().find(|(p, _)| *p == pd) {
            Some((_, cs)) => cs.push(c),
            None => out.push((pd, vec![c])),
        }
    }
    out
}

/// Every stream is keyed by the master seed plus the trial or sweep
/// coordinates, so results do not depend on scheduling or on which other
/// variants run.
pub fn run_scenario(sc: &Scenario, filter: &VariantFilter) -> Result<RunOutput> {
    sc.validate()?;
    let alphabet = QamAlphabet::new(sc.waveform.order)?;
    let pulse = design_rrc(sc.waveform.roll_off, sc.waveform.pulse_span, sc.waveform.sps)?;
    let plan = selected(sc, filter);
    let conventional = PostdistorterSpec {
        kind: PostdistorterKind::Conventional,
        memory: None,
    };
    let linear_modes: Vec<Combining> = if sc.receiver.linear_reference {
        sc.receiver.combining.iter().copied().filter(|&c| filter.keeps(&variant_label("linear", c))).collect()
    } else {
        Vec::new()
    };
    let channels: Vec<_> = (0..sc.trials as u64)
        .map(|t| {
            let seed = rng::derive_seed(sc.seed, &[rng::purpose::CHANNEL, t]);
            draw_channel(sc.channel.profile, sc.channel.span_symbols, sc.waveform.sps, seed)
        })
        .collect();

    let mut out = RunOutput {
        scenario: sc.clone(),
        rows: Vec::new(),
        timing: Vec::new(),
        training: Vec::new(),
        scatter: Vec::new(),
        models: Vec::new(),
        spectrum: None,
    };
    let snrs = &sc.sweep.snr_db;
    for (bi, backoff) in sc.backoffs().into_iter().enumerate() {
        let link = Link::calibrate(alphabet.clone(), pulse.clone(), sc.pa.clone(), sc.layout, backoff, sc.seed)?;
        let twin = link.linear_twin();
        let st = slow_time_data(sc, &link)?;
        let mut restricted = sc.clone();
        restricted.receiver.postdistorters = plan.iter().map(|(p, _)| *p).collect();
        let trained = train_set(&restricted, &st, &alphabet, bi as u64)?;
        for (label, seconds) in &trained.seconds {
            out.training.push(TrainingRow {
                backoff_db: backoff,
                postdistorter: label.clone(),
                seconds: *seconds,
            });
        }
        for ((kind, memory), model) in &trained.models {
            let meta = TrainingMeta {
                pa: sc.pa.label().to_string(),
                backoff_db: link.backoff_db.unwrap_or(f64::NAN),
                order: sc.waveform.order,
                training_symbols: sc.layout.n_s,
                seed: sc.seed,
            };
            let mut dump = ModelDump::new(meta, model.clone());
            dump.mm_table = trained.mm.clone();
            out.models.push((format!("p{bi}-{}-m{memory}", kind.name()), dump));
        }

        for (si, &snr) in snrs.iter().enumerate() {
            let point = bi * snrs.len() + si;
            let per_trial: Vec<Vec<VariantOutcome>> = (0..sc.trials)
                .into_par_iter()
                .map(|t| {
                    let t = t as u64;
                    let noise_seed = rng::derive_seed(sc.seed, &[rng::purpose::DATA_NOISE, point as u64, t]);
                    let ch = &channels[t as usize];
                    let mut outcomes = Vec::new();
                    if !plan.is_empty() {
                        let trial = receive_trial(sc, &link, ch, snr, t, noise_seed)?;
                        for (pd, modes) in &plan {
                            outcomes.extend(evaluate_postdistorter(sc, pd, &pd.label(), &trained, modes, &trial, &alphabet)?);
                        }
                    }
                    if !linear_modes.is_empty() {
                        let trial = receive_trial(sc, &twin, ch, snr, t, noise_seed)?;
                        outcomes.extend(evaluate_postdistorter(sc, &conventional, "linear", &trained, &linear_modes, &trial, &alphabet)?);
                    }
                    Ok(outcomes)
                })
                .collect::<Result<_>>()?;
            aggregate(sc, point, backoff, snr, &per_trial, &mut out);
        }
    }
    if let Some(spec) = &sc.spectrum {
        let cfg = SpectrumReportConfig {
            order: sc.waveform.order,
            pulse: pulse.clone(),
            pa: sc.pa.clone(),
            backoff_db: spec.backoff_db,
            n_symbols: spec.n_symbols,
            segment_len: spec.segment_len,
            seed: sc.seed,
        };
        let ch = channels.get(spec.trial as usize).cloned().unwrap_or_else(|| {
            let seed = rng::derive_seed(sc.seed, &[rng::purpose::CHANNEL, spec.trial]);
            draw_channel(sc.channel.profile, sc.channel.span_symbols, sc.waveform.sps, seed)
        });
        out.spectrum = Some(distortion_spectrum_report(&cfg, &ch)?);
    }
    Ok(out)
}

fn aggregate(sc: &Scenario, point: usize, backoff: Option<f64>, snr: f64, per_trial: &[Vec<VariantOutcome>], out: &mut RunOutput) {
    let Some(first) = per_trial.first() else { return };
    for (v, proto) in first.iter().enumerate() {
        let outcomes: Vec<&VariantOutcome> = per_trial.iter().map(|t| &t[v]).collect();
        let ber = BerEstimate::merge(&outcomes.iter().map(|o| o.ber).collect::<Vec<_>>());
        let airs: Vec<_> = outcomes.iter().map(|o| o.air).collect();
        let pooled = pool_air(&airs).expect("nonempty trials");
        let capacities: Vec<f64> = airs.iter().map(|a| a.value).collect();
        let p_out = outage(&capacities, sc.receiver.outage_threshold).p_out;
        out.rows.push(ResultRow {
            scenario: sc.name.clone(),
            point,
            backoff_db: backoff,
            snr_db: snr,
            variant: proto.label.clone(),
            ber: ber.rate,
            ber_low: ber.lower,
            ber_high: ber.upper,
            bit_errors: ber.errors,
            bits: ber.bits,
            air: pooled.value,
            air_stderr: pooled.stderr,
            p_out,
            blocks: outcomes.len(),
        });
        out.timing.push(TimingRow {
            point,
            variant: proto.label.clone(),
            seconds: outcomes.iter().map(|o| o.seconds).sum(),
        });
        out.scatter.extend(proto.scatter.iter().map(|&(z, s)| ScatterRow {
            point,
            variant: proto.label.clone(),
            re: z.re,
            im: z.im,
            symbol: s,
        }));
    }
}
