use std::path::PathBuf;
use std::process::ExitCode;

use algcycle::dynamics::{Branch, State};
use algcycle::polyalg::parse_rational;
use algcycle_cli::commands::{self, SimulateOptions, Start};
use algcycle_cli::job::JobSpec;
use algcycle_cli::{render, write_artifacts, Format};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "algcycle",
    version,
    about = "Liénard systems with prescribed algebraic limit cycles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON job file.
    #[arg(long)]
    job: PathBuf,
    #[arg(long)]
    quad_tol: Option<f64>,
    #[arg(long)]
    ode_tol: Option<f64>,
    /// Exact rational, e.g. 1/1099511627776.
    #[arg(long)]
    root_width: Option<String>,
    /// Directory for report.json and the other artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Subcommand)]
enum Command {
    /// Build the vector field, curve, cofactor and Liénard form.
    Synthesize(Common),
    /// Certify every band; exit 0 iff at least one band is certified.
    Check(Common),
    /// Certification plus stability and return-map cross-checks.
    Stability(Common),
    /// Integrate one trajectory and write trajectory.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Start on the oval at this abscissa (default: the band's section).
        #[arg(long, conflicts_with_all = ["x", "y"])]
        tau: Option<f64>,
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
        /// Start at (x, y) instead of on the oval.
        #[arg(long, requires = "y")]
        x: Option<f64>,
        #[arg(long, requires = "x")]
        y: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Index among the certified bands.
        #[arg(long, default_value_t = 0)]
        band: usize,
        /// Also estimate the multiplier from the return map.
        #[arg(long)]
        return_map: bool,
    },
    /// Draw the certified ovals into portrait.svg.
    Portrait(Common),
    /// Examine the even/odd family: singular points on the oval, or the n = 0 reduction.
    #[command(name = "audit")]
    Audit(Common),
}

type Handler = Box<dyn Fn(&JobSpec) -> commands::Outcome>;

fn load(common: &Common) -> anyhow::Result<JobSpec> {
    let mut job = JobSpec::from_path(&common.job)?;
    if let Some(t) = common.quad_tol {
        job.tolerances.quad_tol = t;
    }
    if let Some(t) = common.ode_tol {
        job.tolerances.ode_tol = t;
    }
    if let Some(w) = &common.root_width {
        job.tolerances.root_width = parse_rational(w)?;
    }
    job.validate()?;
    Ok(job)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let (common, outcome_of): (&Common, Handler) = match &cli.command {
        Command::Synthesize(c) => (c, Box::new(commands::synthesize)),
        Command::Check(c) => (c, Box::new(commands::check)),
        Command::Stability(c) => (c, Box::new(commands::stability)),
        Command::Portrait(c) => (c, Box::new(commands::portrait)),
        Command::Audit(c) => (c, Box::new(commands::audit_family)),
        Command::Simulate {
            common,
            tau,
            branch,
            x,
            y,
            t_end,
            band,
            return_map,
        } => {
            let start = match (x, y) {
                (Some(x), Some(y)) => Start::State(State::new(*x, *y)),
                _ => Start::Oval {
                    tau: *tau,
                    branch: match branch {
                        BranchArg::Plus => Branch::Plus,
                        BranchArg::Minus => Branch::Minus,
                    },
                },
            };
            let opts = SimulateOptions {
                start,
                t_end: *t_end,
                band: *band,
                return_map: *return_map,
            };
            (
                common,
                Box::new(move |job: &JobSpec| commands::simulate(job, &opts)),
            )
        }
    };
    let job = load(common)?;
    let outcome = outcome_of(&job);
    let format = match common.format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    print!("{}", render(&outcome, format));
    if let Some(dir) = &common.out {
        for path in write_artifacts(&job, &outcome, dir)? {
            eprintln!("wrote {path}");
        }
    }
    Ok(outcome.exit_code as u8)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
