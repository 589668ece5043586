use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::pa::PaModel;
use crate::postdist::{valid_memory, VolterraTerms, MAX_MEMORY};
use crate::txchain::{FrameLayout, QamAlphabet, DEFAULT_SPAN, DEFAULT_SPS};

/// One experiment: PA and backoff grid, channel, waveform, block layout,
/// receiver matrix and Monte-Carlo effort.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Channel blocks per sweep point.
    pub trials: usize,
    pub waveform: WaveformConfig,
    pub pa: PaModel,
    pub channel: ChannelConfig,
    pub layout: FrameLayout,
    pub sweep: SweepConfig,
    pub receiver: ReceiverConfig,
    #[serde(default)]
    pub gpr: GprSettings,
    #[serde(default)]
    pub nn: NnSettings,
    #[serde(default)]
    pub volterra: VolterraSettings,
    /// Optional distortion spectrum report over one channel draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSettings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSettings {
    pub backoff_db: f64,
    pub n_symbols: usize,
    pub segment_len: usize,
    /// Trial whose channel draw is analyzed.
    #[serde(default)]
    pub trial: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    pub order: usize,
    #[serde(default = "default_sps")]
    pub sps: usize,
    #[serde(default = "default_roll_off")]
    pub roll_off: f64,
    #[serde(default = "default_span")]
    pub pulse_span: usize,
}

fn default_sps() -> usize {
    DEFAULT_SPS
}

fn default_roll_off() -> f64 {
    0.3
}

fn default_span() -> usize {
    DEFAULT_SPAN
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub profile: ChannelProfile,
    pub span_symbols: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Output backoffs in dB; ignored by a linear PA.
    pub backoff_db: Vec<f64>,
    /// Received Es/N0 values in dB.
    pub snr_db: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    /// Anticausal and causal symbol-rate CSI spans.
    pub l_b: usize,
    pub l_f: usize,
    /// Data blocks following each fast-time training block.
    pub data_blocks: usize,
    /// Default post-distorter memory depth.
    pub memory: usize,
    pub postdistorters: Vec<PostdistorterSpec>,
    pub combining: Vec<Combining>,
    /// Adds a linear-PA benchmark at the same output power.
    #[serde(default)]
    pub linear_reference: bool,
    #[serde(default = "default_outage_threshold")]
    pub outage_threshold: f64,
}

fn default_outage_threshold() -> f64 {
    crate::metrics::OUTAGE_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GprSettings {
    pub segments: usize,
    pub iterations: usize,
    pub opt_points: usize,
}

impl Default for GprSettings {
    fn default() -> Self {
        Self {
            segments: 4,
            iterations: 200,
            opt_points: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnSettings {
    pub hidden: usize,
    pub epochs: usize,
}

impl Default for NnSettings {
    fn default() -> Self {
        Self { hidden: 30, epochs: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolterraSettings {
    pub terms: VolterraTerms,
}

impl Default for VolterraSettings {
    fn default() -> Self {
        Self {
            terms: VolterraTerms::FullCubic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PostdistorterKind {
    /// Hard decisions straight from the equalizer output.
    Conventional,
    /// Memoryless per-point modified metric.
    Mm,
    /// Volterra series.
    Vs,
    Gpr,
    Nn,
}

impl PostdistorterKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Conventional => "conventional",
            Self::Mm => "mm",
            Self::Vs => "vs",
            Self::Gpr => "gpr",
            Self::Nn => "nn",
        }
    }

    pub fn learned(self) -> bool {
        matches!(self, Self::Vs | Self::Gpr | Self::Nn)
    }
}

/// A post-distorter with an optional memory override, written `kind` or
/// `kind:memory` (e.g. `gpr:1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PostdistorterSpec {
    pub kind: PostdistorterKind,
    pub memory: Option<usize>,
}

impl PostdistorterSpec {
    pub fn memory_or(&self, default: usize) -> usize {
        self.memory.unwrap_or(default)
    }

    /// Label used in result tables.
    pub fn label(&self) -> String {
        match self.memory {
            Some(m) => format!("{}-m{m}", self.kind.name()),
            None => self.kind.name().to_string(),
        }
    }
}

impl FromStr for PostdistorterSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, memory) = match s.split_once(':') {
            Some((n, m)) => (n, Some(m.parse::<usize>().map_err(|_| format!("bad memory depth in {s:?}"))?)),
            None => (s, None),
        };
        let kind = match name {
            "conventional" => PostdistorterKind::Conventional,
            "mm" => PostdistorterKind::Mm,
            "vs" => PostdistorterKind::Vs,
            "gpr" => PostdistorterKind::Gpr,
            "nn" => PostdistorterKind::Nn,
            _ => return Err(format!("unknown post-distorter {name:?}")),
        };
        if memory.is_some() && !kind.learned() {
            return Err(format!("{name} takes no memory depth"));
        }
        if memory.is_some_and(|m| !valid_memory(m)) {
            return Err(format!("memory depth must lie in 1..={MAX_MEMORY}"));
        }
        Ok(Self { kind, memory })
    }
}

impl fmt::Display for PostdistorterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.memory {
            Some(m) => write!(f, "{}:{m}", self.kind.name()),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl Serialize for PostdistorterSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PostdistorterSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    /// Nominal sampling phase only.
    Single,
    /// The branch with the highest fast-time achievable rate.
    Best,
    /// DA-SSD over every branch.
    Dassd,
}

impl Combining {
    pub fn name(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::Best => "best",
            Self::Dassd => "dassd",
        }
    }
}

/// Row label of a receiver variant.
pub fn variant_label(pd: &str, combining: Combining) -> String {
    format!("{pd}-{}", combining.name())
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("line {line}, column {col}")
                }
                None => "document".to_string(),
            };
            Error::config(location, e.message().trim().to_string())
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("document", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |loc: &str, msg: String| Err(Error::config(loc, msg));
        if QamAlphabet::new(self.waveform.order).is_err() {
            return fail("waveform.order", format!("unsupported constellation order {}", self.waveform.order));
        }
        if self.waveform.sps < 2 || !(0.0..=1.0).contains(&self.waveform.roll_off) || self.waveform.pulse_span < 4 {
            return fail("waveform", "need sps >= 2, roll_off in [0, 1] and pulse_span >= 4".into());
        }
        if self.trials == 0 {
            return fail("trials", "at least one trial is required".into());
        }
        self.pa.validate().map_err(|e| Error::config("pa", e.to_string()))?;
        if self.pa.peak_output().is_some() && self.sweep.backoff_db.is_empty() {
            return fail("sweep.backoff_db", "a saturating PA needs at least one backoff".into());
        }
        if self.sweep.snr_db.is_empty() {
            return fail("sweep.snr_db", "at least one Es/N0 value is required".into());
        }
        if self.sweep.backoff_db.iter().chain(&self.sweep.snr_db).any(|v| !v.is_finite()) {
            return fail("sweep", "sweep values must be finite".into());
        }
        if self.channel.span_symbols == 0 {
            return fail("channel.span_symbols", "span must be at least one symbol".into());
        }
        let l = &self.layout;
        if l.n_d == 0 || l.n_f == 0 || l.n_s == 0 {
            return fail("layout", "block lengths must be positive".into());
        }
        if l.n_cp > l.n_d.min(l.n_f).min(l.n_s) || l.n_cs > l.n_d.min(l.n_f).min(l.n_s) {
            return fail("layout", "cyclic extensions must be shorter than every block".into());
        }
        l.check_guards(self.channel.span_symbols, self.receiver.l_b)
            .map_err(|e| Error::config("layout", e.to_string()))?;
        let r = &self.receiver;
        if r.l_b == 0 || r.l_f == 0 || l.n_f < r.l_b + r.l_f - 1 {
            return fail("receiver", "CSI spans must be positive and fit in the training block".into());
        }
        if r.data_blocks == 0 {
            return fail("receiver", "data_blocks must be positive".into());
        }
        if !valid_memory(r.memory) {
            return fail("receiver", format!("memory must lie in 1..={MAX_MEMORY}"));
        }
        if r.postdistorters.is_empty() || r.combining.is_empty() {
            return fail("receiver", "at least one post-distorter and one combining mode".into());
        }
        if self.gpr.segments == 0 || self.gpr.opt_points == 0 {
            return fail("gpr", "segments and opt_points must be positive".into());
        }
        if self.nn.hidden == 0 {
            return fail("nn.hidden", "at least one hidden neuron".into());
        }
        Ok(())
    }

    /// Number of (backoff, SNR) points.
    pub fn point_count(&self) -> usize {
        self.backoffs().len() * self.sweep.snr_db.len()
    }

    /// Backoff grid; a linear PA has a single nominal point.
    pub fn backoffs(&self) -> Vec<Option<f64>> {
        if self.pa.peak_output().is_some() {
            self.sweep.backoff_db.iter().map(|&b| Some(b)).collect()
        } else {
            vec![None]
        }
    }

    /// Every (post-distorter, combining) pair, in table order. The modified
    /// metric has no soft output to combine across branches.
    pub fn variants(&self) -> Vec<(PostdistorterSpec, Combining)> {
        let mut out = Vec::new();
        for pd in &self.receiver.postdistorters {
            for &c in &self.receiver.combining {
                if pd.kind == PostdistorterKind::Mm && c == Combining::Dassd {
                    continue;
                }
                out.push((*pd, c));
            }
        }
        out
    }

    pub fn variant_labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self.variants().iter().map(|(p, c)| variant_label(&p.label(), *c)).collect();
        if self.receiver.linear_reference {
            v.extend(self.receiver.combining.iter().map(|&c| variant_label("linear", c)));
        }
        v
    }
}
