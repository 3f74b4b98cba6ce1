//! Command-line front end: load a scenario, run suites, emit the report.
//!
//! Exit status: 0 when every selected suite passes, 1 when any case
//! fails, 2 on usage, schema, or resolution errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use darboux::fd::FdScheme;
use darboux_verify::{
    error::CliError, report::EnvReport, report::Report, run_suite, RunCtx, Scenario, SUITE_NAMES,
};

#[derive(Parser, Debug)]
#[command(name = "verify", version, about = "Run identity-check suites on a scenario file")]
struct Args {
    /// Scenario description (JSON).
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Suite to run; repeatable. Defaults to the scenario's suite list.
    #[arg(long = "suite")]
    suites: Vec<String>,

    /// Stencil spacing override.
    #[arg(long)]
    eps: Option<f64>,

    /// Difference stencil override.
    #[arg(long, value_parser = parse_stencil)]
    stencil: Option<FdScheme>,

    /// Per-case sample count override.
    #[arg(long)]
    samples: Option<usize>,

    /// RNG seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the JSON report here and print a human summary instead.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the known suite names and exit.
    #[arg(long)]
    list_suites: bool,
}

fn parse_stencil(s: &str) -> Result<FdScheme, String> {
    match s {
        "central2" => Ok(FdScheme::Central2),
        "central4" => Ok(FdScheme::Central4),
        other => Err(format!("unknown stencil {other:?} (expected central2 or central4)")),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_suites {
        for name in SUITE_NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> darboux_verify::Result<bool> {
    let path = args
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Schema { path: "$".into(), detail: "--scenario is required".into() })?;
    let mut scenario = Scenario::load(path)?;
    if let Some(eps) = args.eps {
        if eps <= 0.0 {
            return Err(CliError::Schema {
                path: "--eps".into(),
                detail: "spacing must be positive".into(),
            });
        }
        scenario.config.eps = eps;
    }
    if let Some(scheme) = args.stencil {
        scenario.config.scheme = scheme;
    }
    if let Some(samples) = args.samples {
        if samples == 0 {
            return Err(CliError::Schema {
                path: "--samples".into(),
                detail: "sample count must be positive".into(),
            });
        }
        scenario.config.samples = Some(samples);
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }

    let selected: Vec<String> = if args.suites.is_empty() {
        scenario.suites.clone()
    } else {
        args.suites.clone()
    };
    if selected.is_empty() {
        return Err(CliError::Schema {
            path: "suites".into(),
            detail: "no suites selected".into(),
        });
    }

    let ctx = RunCtx {
        scenario: &scenario,
        flow: scenario.config.flow_config(),
        samples: scenario.config.samples,
        seed: scenario.seed,
    };
    let mut suites = Vec::with_capacity(selected.len());
    for name in &selected {
        suites.push(run_suite(name, &ctx)?);
    }

    let report = Report {
        suites,
        env: EnvReport {
            seed: scenario.seed,
            eps: scenario.config.eps,
            stencil: scenario.config.stencil_name().to_string(),
            rk4_steps: scenario.config.rk4_steps,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    let passed = report.passed();
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_json())?;
        print!("{}", report.summary());
    } else {
        print!("{}", report.to_json());
    }
    Ok(passed)
}
