use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use scfde::harness::{emit_plotdata, preset, preset_names, run_scenario, write_run, Figure, Scenario, VariantFilter};

#[derive(Parser)]
#[command(name = "scfde", version, about = "Single-carrier FDE link simulator with nonlinear post-distortion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a built-in preset given as `preset:<name>`.
    Run {
        config: String,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the channel blocks per sweep point.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value = "runs")]
        out_dir: PathBuf,
        /// Comma-separated variant labels or prefixes, e.g. `nn,gpr-single`.
        #[arg(long, value_delimiter = ',')]
        variant_filter: Vec<String>,
    },
    /// List built-in scenarios.
    ListPresets,
    /// Write plot data for one figure from a finished run directory.
    Emit { run_dir: PathBuf, figure_id: String },
}

fn load(config: &str) -> Result<Scenario> {
    if let Some(name) = config.strip_prefix("preset:") {
        return Ok(preset(name)?);
    }
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {config}"))?;
    Ok(Scenario::from_toml_str(&text).with_context(|| format!("loading {config}"))?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            trials,
            out_dir,
            variant_filter,
        } => {
            let mut sc = load(&config)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(t) = trials {
                if t == 0 {
                    bail!("--trials must be positive");
                }
                sc.trials = t;
            }
            let filter = VariantFilter::new(&variant_filter);
            let start = Instant::now();
            let run = run_scenario(&sc, &filter)?;
            let dir = out_dir.join(&sc.name);
            write_run(&dir, &run)?;
            eprintln!(
                "{} rows written to {} in {:.1} s",
                run.rows.len(),
                dir.display(),
                start.elapsed().as_secs_f64()
            );
            for r in &run.rows {
                println!(
                    "{:>8} {:>6.1} {:<20} ber {:.3e}  air {:.3} +- {:.3}  p_out {:.3}",
                    r.backoff_db.map_or("-".to_string(), |b| format!("{b:.2}")),
                    r.snr_db,
                    r.variant,
                    r.ber,
                    r.air,
                    r.air_stderr,
                    r.p_out
                );
            }
        }
        Command::ListPresets => {
            for name in preset_names() {
                let sc = preset(name)?;
                println!("{name}: {} variants", sc.variant_labels().len());
                for v in sc.variant_labels() {
                    println!("  {v}");
                }
            }
        }
        Command::Emit { run_dir, figure_id } => {
            let path = emit_plotdata(&run_dir, Figure::parse(&figure_id)?)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}
