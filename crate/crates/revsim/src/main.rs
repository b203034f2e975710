use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use revsim::experiment::{run_replicates, SettingChoice};
use revsim::output::write_outputs;
use revsim::SimConfig;

#[derive(Parser)]
#[command(name = "revsim", version, about = "Agent-based peer review simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write the output bundle.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required here or in the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Which settings to simulate.
    #[arg(long, value_enum, default_value_t = SettingArg::Both)]
    setting: SettingArg,
    /// Simulated months per run.
    #[arg(long)]
    months: Option<u32>,
    /// Rejections before a manuscript is abandoned.
    #[arg(long)]
    max_rejections: Option<u32>,
    /// Number of independent replicates.
    #[arg(long)]
    replicates: Option<u32>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SettingArg {
    Cs,
    As,
    Both,
}

impl From<SettingArg> for SettingChoice {
    fn from(value: SettingArg) -> Self {
        match value {
            SettingArg::Cs => SettingChoice::Cs,
            SettingArg::As => SettingChoice::As,
            SettingArg::Both => SettingChoice::Both,
        }
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::from_path(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = Some(seed);
    }
    if let Some(months) = args.months {
        cfg.months = months;
    }
    if let Some(max_rejections) = args.max_rejections {
        cfg.max_rejections = max_rejections;
    }
    if let Some(replicates) = args.replicates {
        cfg.replicates = replicates;
    }
    cfg.validate()?;

    let results = run_replicates(&cfg, args.setting.into())?;
    let bundle = write_outputs(&args.out, &cfg, &results)
        .with_context(|| format!("writing outputs under {}", args.out.display()))?;

    for result in &results {
        for run in [&result.cs, &result.as_run].into_iter().flatten() {
            let s = &run.summary;
            let time = s
                .months_to_publication
                .map(|t| format!("{:.2}", t.mean))
                .unwrap_or_else(|| "n/a".to_string());
            println!(
                "replicate {:02} {}: {} manuscripts, {} published ({:.1}% of resolved), \
                 {:.2} reviews/ms, {} months mean to publication",
                result.replicate,
                s.setting.label(),
                s.manuscripts_total,
                s.published,
                100.0 * s.publication_fraction_resolved,
                s.reviews_mean_per_resolved,
                time,
            );
        }
    }
    println!(
        "wrote {} files under {}",
        bundle.files.len(),
        bundle.root.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
