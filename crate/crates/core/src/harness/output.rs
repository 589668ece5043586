//! Run directories: result tables, model dumps, manifest and per-figure
//! plot data.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::runner::{ResultRow, RunOutput, ScatterRow};
use crate::error::{Error, Result};
use crate::postdist::DUMP_VERSION;

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const TRAINING_FILE: &str = "training.csv";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SCENARIO_FILE: &str = "scenario.toml";

fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// SHA-256 of the effective scenario document.
pub fn config_hash(scenario_toml: &str) -> String {
    hex::encode(Sha256::digest(scenario_toml.as_bytes()))
}

/// Writes every artifact of a run into `dir`, creating it if needed.
pub fn write_run(dir: &Path, run: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let toml = run.scenario.to_toml_string()?;
    fs::write(dir.join(SCENARIO_FILE), &toml)?;
    write_rows(
        &dir.join(RESULTS_FILE),
        &run.rows,
        &[
            "scenario", "point", "backoff_db", "snr_db", "variant", "ber", "ber_low", "ber_high", "bit_errors", "bits", "air",
            "air_stderr", "p_out", "blocks",
        ],
    )?;
    write_rows(&dir.join(TIMING_FILE), &run.timing, &["point", "variant", "seconds"])?;
    write_rows(&dir.join(TRAINING_FILE), &run.training, &["backoff_db", "postdistorter", "seconds"])?;
    write_rows(&dir.join(SCATTER_FILE), &run.scatter, &["point", "variant", "re", "im", "symbol"])?;
    if let Some(s) = &run.spectrum {
        s.write_csv(fs::File::create(dir.join(SPECTRUM_FILE))?)?;
    }
    if !run.models.is_empty() {
        let models = dir.join("models");
        fs::create_dir_all(&models)?;
        for (name, dump) in &run.models {
            fs::write(models.join(format!("{name}.json")), dump.to_json()?)?;
        }
    }
    let manifest = format!(
        "scenario = {}\nconfig_sha256 = {}\nseed = {}\ntrials = {}\nscfde_version = {}\nmodel_dump_version = {}\nrows = {}\n",
        run.scenario.name,
        config_hash(&toml),
        run.scenario.seed,
        run.scenario.trials,
        env!("CARGO_PKG_VERSION"),
        DUMP_VERSION,
        run.rows.len()
    );
    fs::write(dir.join(MANIFEST_FILE), manifest)?;
    Ok(())
}

/// Parses a result table; any malformed row is an error.
pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize::<ResultRow>() {
        let row = rec.map_err(|e| Error::Results(e.to_string()))?;
        let probabilities = [row.ber, row.ber_low, row.ber_high, row.p_out];
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) || row.bit_errors > row.bits {
            return Err(Error::Results(format!("row for {} at point {} is out of range", row.variant, row.point)));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Plot-data figures, each a long table `(receiver, x, y, err)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Linear and distortion PSD per sampling phase.
    Fig3,
    Fig5a,
    Fig5b,
    Fig6a,
    Fig6b,
    Fig7a,
    Fig7b,
    /// Soft-symbol scatter.
    Fig8,
    Fig9,
    Fig10a,
    Fig10b,
}

#[derive(Clone, Copy)]
enum Axis {
    Backoff,
    Snr,
}

#[derive(Clone, Copy)]
enum Measure {
    Air,
    Ber,
    Outage,
}

impl Figure {
    pub const ALL: [Figure; 11] = [
        Figure::Fig3,
        Figure::Fig5a,
        Figure::Fig5b,
        Figure::Fig6a,
        Figure::Fig6b,
        Figure::Fig7a,
        Figure::Fig7b,
        Figure::Fig8,
        Figure::Fig9,
        Figure::Fig10a,
        Figure::Fig10b,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig5a => "fig5a",
            Figure::Fig5b => "fig5b",
            Figure::Fig6a => "fig6a",
            Figure::Fig6b => "fig6b",
            Figure::Fig7a => "fig7a",
            Figure::Fig7b => "fig7b",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::Fig10a => "fig10a",
            Figure::Fig10b => "fig10b",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == id)
            .ok_or_else(|| Error::invalid(format!("unknown figure id {id:?}")))
    }

    fn curve(self) -> Option<(Axis, Measure)> {
        match self {
            Figure::Fig5a => Some((Axis::Backoff, Measure::Air)),
            Figure::Fig5b | Figure::Fig10a => Some((Axis::Backoff, Measure::Ber)),
            Figure::Fig6a | Figure::Fig7a => Some((Axis::Snr, Measure::Air)),
            Figure::Fig6b | Figure::Fig7b | Figure::Fig10b => Some((Axis::Snr, Measure::Ber)),
            Figure::Fig9 => Some((Axis::Snr, Measure::Outage)),
            Figure::Fig3 | Figure::Fig8 => None,
        }
    }

    /// Column names of the emitted table.
    pub fn header(self) -> [&'static str; 4] {
        match self {
            Figure::Fig3 => ["receiver", "frequency", "psd", "err"],
            Figure::Fig8 => ["receiver", "re", "im", "symbol"],
            _ => {
                let (axis, measure) = self.curve().expect("curve figure");
                let x = match axis {
                    Axis::Backoff => "backoff_db",
                    Axis::Snr => "snr_db",
                };
                let y = match measure {
                    Measure::Air => "air_bps",
                    Measure::Ber => "ber",
                    Measure::Outage => "p_out",
                };
                ["receiver", x, y, "err"]
            }
        }
    }
}

/// Long-format rows of a curve figure.
pub fn plot_rows(rows: &[ResultRow], figure: Figure) -> Vec<[String; 4]> {
    let Some((axis, measure)) = figure.curve() else {
        return Vec::new();
    };
    rows.iter()
        .filter_map(|r| {
            let x = match axis {
                Axis::Backoff => r.backoff_db?,
                Axis::Snr => r.snr_db,
            };
            let (y, err) = match measure {
                Measure::Air => (r.air, r.air_stderr),
                Measure::Ber => (r.ber, (r.ber_high - r.ber_low) / 2.0),
                Measure::Outage => (r.p_out, (r.p_out * (1.0 - r.p_out) / r.blocks.max(1) as f64).sqrt()),
            };
            Some([r.variant.clone(), x.to_string(), y.to_string(), err.to_string()])
        })
        .collect()
}

fn spectrum_rows(path: &Path) -> Result<Vec<[String; 4]>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = rec.get(0).unwrap_or_default().to_string();
        for (name, v) in header.iter().zip(rec.iter()).skip(1) {
            let receiver = name.strip_prefix("psd_").unwrap_or(name);
            out.push([receiver.to_string(), f.clone(), v.to_string(), "0".to_string()]);
        }
    }
    Ok(out)
}

fn scatter_rows(path: &Path) -> Result<Vec<[String; 4]>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize::<ScatterRow>() {
        let s = rec.map_err(|e| Error::Results(e.to_string()))?;
        out.push([format!("{}@{}", s.variant, s.point), s.re.to_string(), s.im.to_string(), s.symbol.to_string()]);
    }
    Ok(out)
}

/// Writes `<run_dir>/<figure>.csv` and returns its path. A run without the
/// underlying data yields a header-only file.
pub fn emit_plotdata(run_dir: &Path, figure: Figure) -> Result<PathBuf> {
    let rows = match figure {
        Figure::Fig3 => {
            let p = run_dir.join(SPECTRUM_FILE);
            if p.exists() {
                spectrum_rows(&p)?
            } else {
                Vec::new()
            }
        }
        Figure::Fig8 => {
            let p = run_dir.join(SCATTER_FILE);
            if p.exists() {
                scatter_rows(&p)?
            } else {
                Vec::new()
            }
        }
        _ => plot_rows(&read_results(fs::File::open(run_dir.join(RESULTS_FILE))?)?, figure),
    };
    let path = run_dir.join(format!("{}.csv", figure.id()));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(figure.header())?;
    for r in &rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}
