use clap::Parser;
use gppa::harness::{self, Experiment, Format, RunConfig};
use gppa::GppaError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "gppa", version, about = "Run a GPPA experiment and write its table")]
struct Cli {
    /// dho_probabilities | dho_lifetime | delta_resonance | delta_profile | floquet_profile | compare_profiles
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

fn load(cli: &Cli) -> Result<RunConfig, GppaError> {
    let experiment: Experiment = cli.experiment.parse()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| GppaError::Invalid(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = RunConfig::parse(experiment, &text)?;
    cfg.apply_env(std::env::vars())?;
    cfg.apply_sets(&cli.sets)?;
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<Format>()?;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn report(e: &GppaError) {
    let kind = if e.exit_code() == 2 { "validation" } else { "numerical" };
    let messages = match e {
        GppaError::Validation(v) => v.clone(),
        other => vec![other.to_string()],
    };
    let body = serde_json::json!({ "error": kind, "code": e.exit_code(), "messages": messages });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        let table = harness::run(&cfg)?;
        let text = harness::render(&cfg, &table);
        match &cfg.out {
            Some(p) => std::fs::write(p, text).map_err(|e| GppaError::Invalid(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
