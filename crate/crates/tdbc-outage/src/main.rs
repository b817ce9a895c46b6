use anyhow::{bail, Context, Result};
use clap::Parser;
use std::io::Write;
use std::path::PathBuf;
use tdbc_outage::config;
use tdbc_outage::sweep::{self, Preset, SweepSpec};

/// Outage sweeps for three-slot AF two-way relaying under co-channel
/// interference.
#[derive(Debug, Parser)]
#[command(name = "tdbc-outage", version, about)]
struct Cli {
    /// TOML sweep configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in experiment preset: fig2 (outage vs power at fixed E/E_I),
    /// fig3 (outage vs E/E_I), fig4 (outage vs relay placement).
    #[arg(long, value_parser = Preset::NAMES)]
    preset: Option<String>,

    /// Override the Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,

    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Interferer count for presets (per node for fig2/fig3, relay side for
    /// fig4).
    #[arg(long)]
    interferers: Option<usize>,
}

fn build_spec(cli: &Cli) -> Result<SweepSpec> {
    let mut spec = match (&cli.config, &cli.preset) {
        (Some(path), None) => config::load_document(path)
            .with_context(|| format!("loading sweep config {}", path.display()))?,
        (None, Some(name)) => {
            let preset = Preset::from_name(name)
                .with_context(|| format!("unknown preset {name:?}"))?;
            preset.spec(cli.interferers)
        }
        (None, None) => bail!("select an experiment: --config <path> or --preset <name>"),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    if cli.interferers.is_some() && cli.config.is_some() {
        bail!("--interferers only applies to presets; set the counts in the config file");
    }
    if let Some(trials) = cli.trials {
        spec.n_trials = trials;
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let spec = build_spec(&cli)?;

    let run = || sweep::run_sweep(&spec);
    let table = if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build()
            .context("building worker pool")?
            .install(run)
    } else {
        run()
    }?;

    match &cli.out {
        Some(path) => {
            sweep::write_csv_file(&table, path)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            sweep::emit_csv(&table, &mut lock).context("writing csv to stdout")?;
            lock.flush().ok();
        }
    }
    Ok(())
}
