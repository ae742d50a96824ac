use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hjselect::report::{exit_kind, run_subcommand, ExitKind, Params};

#[derive(Parser)]
#[command(
    name = "hjselect",
    version,
    about = "Counter-example and selection diagnostics for a non-convex HJ equation"
)]
struct Cli {
    /// Flat JSON config; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (or a .json file for `verify`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the non-entropic weak solution and certify its entropy violation.
    Counterexample(CounterexampleArgs),
    /// Godunov entropy solution of a Riemann-free initial profile.
    Solve(SolveArgs),
    /// Mollified characteristic-flow study.
    Flow(FlowArgs),
    /// Regularity report for a stored grid.
    Verify(VerifyArgs),
    /// Re-emit the artifacts of an earlier run in one format.
    Report(ReportArgs),
}

#[derive(Args)]
struct CounterexampleArgs {
    /// `paper` or `detect`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// `paper`, `quadratic` or a flux JSON file.
    #[arg(long)]
    flux: Option<String>,
    #[arg(long)]
    n_k: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    flux: Option<String>,
    /// `counterexample` or a profile JSON file.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    cells: Option<u64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    rows: Option<u64>,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    flux: Option<String>,
    /// Comma-separated mollification widths.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// `a:b:n`, `random:a:b:n` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    starts: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    flux: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of an earlier run.
    #[arg(long)]
    input: Option<String>,
    /// `csv`, `json`, `svg` or `all`.
    #[arg(long)]
    format: Option<String>,
}

fn params(cli: &Cli) -> hjselect::Result<(&'static str, Params)> {
    let mut p = match &cli.config {
        Some(path) => Params::from_config_file(path)?,
        None => Params::default(),
    };
    p.set_opt("seed", cli.seed);
    let name = match &cli.cmd {
        Cmd::Counterexample(a) => {
            p.set_opt("mode", a.mode.clone());
            p.set_opt("dt", a.dt);
            p.set_opt("t_end", a.t_end);
            p.set_opt("flux", a.flux.clone());
            p.set_opt("n_k", a.n_k);
            "counterexample"
        }
        Cmd::Solve(a) => {
            p.set_opt("flux", a.flux.clone());
            p.set_opt("ic", a.ic.clone());
            p.set_opt("t_max", a.t_max);
            p.set_opt("cells", a.cells);
            p.set_opt("cfl", a.cfl);
            p.set_opt("rows", a.rows);
            "solve"
        }
        Cmd::Flow(a) => {
            p.set_opt("flux", a.flux.clone());
            p.set_opt("epsilon", a.epsilon.clone());
            p.set_opt("starts", a.starts.clone());
            p.set_opt("t_max", a.t_max);
            p.set_opt("dt", a.dt);
            "flow"
        }
        Cmd::Verify(a) => {
            p.set_opt("input", a.input.clone());
            p.set_opt("flux", a.flux.clone());
            p.set_opt("radius", a.radius);
            "verify"
        }
        Cmd::Report(a) => {
            p.set_opt("input", a.input.clone());
            p.set_opt("format", a.format.clone());
            "report"
        }
    };
    Ok((name, p))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                ExitKind::Config.code() as u8
            } else {
                0
            });
        }
    };
    if let Some(n) = std::env::var("HJSELECT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = params(&cli).and_then(|(name, p)| {
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
        run_subcommand(name, p, &out)
    });
    match result {
        Ok(o) => {
            println!("{}", o.path.display());
            if o.exit == ExitKind::CertificateNotFound {
                eprintln!("no entropy violation found; recorded in certificate.json");
            }
            ExitCode::from(o.exit.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_kind(&e).code() as u8)
        }
    }
}
