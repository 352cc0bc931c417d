use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvop::harness::{
    cmd_compare, cmd_eval, cmd_figure, cmd_recurrence, cmd_validate, EvalRequest, Format, HarnessError, Outcome,
    Overrides, Regime, RunConfig,
};

/// Matrix-valued orthogonal polynomials: exact recurrences versus large-n asymptotics.
///
/// Exit codes: 0 pass, 1 tolerance failure, 2 configuration error, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "mvop", version)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// jacobi, gegenbauer, gegenbauer_block, scalar or custom.
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    k: Option<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Block size parameter: integer for jacobi, half-integer for gegenbauer.
    #[arg(long, global = true)]
    ell: Option<f64>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Gauss-Jacobi node count for the recurrence.
    #[arg(long, global = true, env = "MVOP_QUAD_NODES")]
    nodes: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Print the primary artifact on stdout instead of writing files.
    #[arg(long, global = true)]
    stdout: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recurrence coefficients with closed-form and asymptotic checks.
    Recurrence,
    /// Exact versus asymptotic error table in one regime.
    Compare {
        #[arg(value_parser = ["outer", "inner", "endpoint", "mh"])]
        regime: String,
        /// Outer expansion order (0 or 1).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Data behind figure 1, 2, 3 or 4.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
    },
    /// Every invariant of every module for the configured family.
    Validate,
    /// One named evaluation, e.g. `eval inner --n 20 --x 0.3`.
    Eval {
        op: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
        /// Complex argument as `re,im`.
        #[arg(long, allow_negative_numbers = true, value_parser = parse_complex)]
        z: Option<[f64; 2]>,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        /// Bessel order or outer expansion order.
        #[arg(long, allow_negative_numbers = true)]
        order: Option<f64>,
    },
}

fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([p(re)?, p(im)?])
}

fn config(cli: &Cli) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let format = cli.format.as_deref().map(str::parse::<Format>).transpose().map_err(HarnessError::Config)?;
    cfg.apply(&Overrides {
        family: cli.family.clone(),
        alpha: cli.alpha,
        beta: cli.beta,
        k: cli.k,
        nu: cli.nu,
        ell: cli.ell,
        nmax: cli.nmax,
        nodes: cli.nodes,
        out: cli.out.clone(),
        format,
    });
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, HarnessError> {
    let mut cfg = config(cli)?;
    match &cli.command {
        Command::Recurrence => cmd_recurrence(&cfg),
        Command::Compare { regime, order } => {
            if let Some(o) = order {
                cfg.outer_order = *o;
            }
            cmd_compare(&cfg, regime.parse::<Regime>().map_err(HarnessError::Config)?)
        }
        Command::Figure { id } => cmd_figure(*id, &cfg),
        Command::Validate => cmd_validate(&cfg),
        Command::Eval { op, n, x, z, theta, order } => {
            let req = EvalRequest { op: op.clone(), n: *n, x: *x, z: *z, theta: *theta, order: *order };
            cmd_eval(&cfg, &req)
        }
    }
}

fn finish(cli: &Cli, outcome: &Outcome) -> Result<(), HarnessError> {
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if cli.stdout {
        print!("{}", outcome.primary().content);
        return Ok(());
    }
    let dir = config(cli)?.out;
    outcome.write_all(Path::new(&dir))?;
    for a in &outcome.artifacts {
        eprintln!("wrote {}", Path::new(&dir).join(&a.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(&cli).and_then(|o| finish(&cli, &o).map(|_| o.exit_code())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
