use clap::Parser;
use dilaton_np_cli::{run, write_report, Command, ScenarioConfig, Timings, VariantChoice, EXIT_CONFIG, EXIT_FAIL, EXIT_OK};
use std::path::PathBuf;
use std::process::ExitCode;

/// Background, identity, harmonic and conservation checks for perturbed
/// charged dilaton black holes.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML scenario file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    continuity_variant: Option<VariantChoice>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    let mut cfg = match &args.config {
        Some(p) => match ScenarioConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        },
        None => ScenarioConfig::default(),
    };
    if let Some(o) = args.out {
        cfg.out_dir = o;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(v) = args.continuity_variant {
        cfg.continuity_variant = v;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }

    let mut timings = Timings::new();
    let dir = cfg.out_dir.clone();
    let report = match run(&cfg, args.command, &dir, &mut timings) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(EXIT_FAIL as u8);
        }
    };
    if let Err(e) = write_report(&dir, &report, &timings) {
        eprintln!("error writing report: {}", e.0);
        return ExitCode::from(EXIT_FAIL as u8);
    }
    print!("{}", report.to_text());
    ExitCode::from(if report.passed() { EXIT_OK } else { EXIT_FAIL } as u8)
}
