use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use targeting_value::config::{parse_config, Analysis, Format, RunError};
use targeting_value::report::Report;
use targeting_value::runner;

/// Value of targeting data in second-price auctions.
#[derive(Parser, Debug)]
#[command(name = "targeting-value", version)]
struct Args {
    /// Analysis to run; must match the config's `analysis` field.
    analysis: String,
    /// Configuration document (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Report path; stdout when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("targeting-value: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<bool, RunError> {
    let requested: Analysis = args
        .analysis
        .parse()
        .map_err(|m| RunError::schema("analysis", m))?;
    let text = std::fs::read_to_string(&args.config).map_err(|e| RunError::Io {
        path: args.config.display().to_string(),
        message: e.to_string(),
    })?;
    let mut config = parse_config(&text)?;
    if config.analysis != requested {
        return Err(RunError::schema(
            "analysis",
            format!(
                "command line asks for {requested} but the config is for {}",
                config.analysis
            ),
        ));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err(RunError::schema("trials", "must be at least 1"));
        }
        config.trials = trials;
    }
    if let Some(out) = &args.out {
        config.output.path = Some(out.display().to_string());
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }

    let report = runner::run(&config)?;
    if requested == Analysis::Verify {
        print_checks(&report);
    }
    let text = report.render(&config, config.output.format);
    match &config.output.path {
        Some(path) => std::fs::write(path, text).map_err(|e| RunError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?,
        None => print!("{text}"),
    }
    Ok(report.passed)
}

// One line per oracle check on stderr, so stdout stays a clean report.
fn print_checks(report: &Report) {
    let col = |name: &str| report.columns.iter().position(|c| *c == name);
    let (Some(check), Some(a), Some(m), Some(se), Some(ok)) = (
        col("check"),
        col("analytic"),
        col("estimate"),
        col("std_error"),
        col("passed"),
    ) else {
        return;
    };
    for row in &report.rows {
        let verdict = if row[ok] == true.into() {
            "PASS"
        } else {
            "FAIL"
        };
        eprintln!(
            "{verdict} {} analytic={} estimate={} std_error={}",
            row[check].text(),
            row[a].text(),
            row[m].text(),
            row[se].text()
        );
    }
}
