use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use isac_sounder::analysis::DsMode;
use isac_sounder::cli_io::{
    cmd_analyze, cmd_compare, cmd_extract, cmd_pipeline, cmd_simulate, CliError, Overrides, RunConfig, RunContext,
    MANIFEST_FILE,
};

#[derive(Parser)]
#[command(name = "isac-sounder", version, about = "Channel sounding from FMCW radar mutual interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the scene and synthesise a raw frame (frame.isacfrm, truth.csv).
    Simulate(RunArgs),
    /// Extract the channel from frame.isacfrm (cir.json).
    Extract(RunArgs),
    /// PDP, RMS delay spread, taps and angle map from cir.json.
    Analyze(RunArgs),
    /// Match extracted taps against truth.csv (match.csv).
    Compare(RunArgs),
    /// All of the above, plus manifest.json.
    Pipeline(RunArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum DsModeArg {
    Amplitude,
    Power,
}

#[derive(Args)]
struct RunArgs {
    /// Run config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-stage CSVs under <out>/stages.
    #[arg(long)]
    dump_stages: bool,
    #[arg(long, allow_hyphen_values = true)]
    module_thresh: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phase_thresh: Option<f64>,
    /// Zoom factor of the refinement transform.
    #[arg(long)]
    zoom: Option<usize>,
    #[arg(long, value_enum)]
    ds_mode: Option<DsModeArg>,
}

impl RunArgs {
    fn context(&self) -> Result<RunContext, CliError> {
        let mut config = RunConfig::load(&self.config)?;
        config.apply(&Overrides {
            seed: self.seed,
            output_dir: self.out.clone(),
            module_thresh: self.module_thresh,
            phase_thresh: self.phase_thresh,
            zoom: self.zoom,
            ds_mode: self.ds_mode.map(|m| match m {
                DsModeArg::Amplitude => DsMode::Amplitude,
                DsModeArg::Power => DsMode::Power,
            }),
        });
        Ok(RunContext {
            config,
            config_path: Some(self.config.clone()),
            dump_stages: self.dump_stages,
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Simulate(args)
    | Command::Extract(args)
    | Command::Analyze(args)
    | Command::Compare(args)
    | Command::Pipeline(args)) = &cli.command;
    let ctx = args.context()?;
    let written = match cli.command {
        Command::Simulate(_) => cmd_simulate(&ctx)?,
        Command::Extract(_) => cmd_extract(&ctx)?,
        Command::Analyze(_) => cmd_analyze(&ctx)?,
        Command::Compare(_) => cmd_compare(&ctx)?,
        Command::Pipeline(_) => {
            let m = cmd_pipeline(&ctx)?;
            let mut files: Vec<String> = m.outputs.into_iter().map(|f| f.path).collect();
            files.push(MANIFEST_FILE.to_owned());
            files
        }
    };
    for f in written {
        println!("{}", ctx.dir().join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
