use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use contact_triple::legendre::{
    hamiltonian_from_lagrangian, hyperregularity_probe, lagrangian_from_hamiltonian, legendre_from_hamiltonian,
    legendre_from_lagrangian,
};
use contact_triple::output::{real, Format};
use contact_triple::scenario::{builtin_scenarios, run_scenario, LegendreConfig, Side};
use contact_triple::verify::{verify, Suite};
use contact_triple::{AtiyahCoords, ContactCoords, Error};

#[derive(Parser)]
#[command(name = "contact-triple", version, about = "Contact Hamiltonian and Lagrangian mechanics on line bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write its trajectory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Hyperregularity diagnostics and an optional transform table.
    Legendre {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the built-in scenario catalog.
    ListScenarios,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Diagrams,
    Homogeneity,
    Moebius,
    Legendre,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_numerical() { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, format } => {
            let format = format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            });
            match run_scenario(&config, out.as_deref(), format) {
                Ok((traj, path)) => {
                    println!(
                        "wrote {} samples, {} chart switches to {}",
                        traj.samples.len(),
                        traj.events.len(),
                        path.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::All => Suite::All,
                SuiteArg::Diagrams => Suite::Diagrams,
                SuiteArg::Homogeneity => Suite::Homogeneity,
                SuiteArg::Moebius => Suite::Moebius,
                SuiteArg::Legendre => Suite::Legendre,
            };
            let report = verify(suite);
            println!("{report}");
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Legendre { config } => match legendre(&config) {
            Ok(code) => code,
            Err(e) => fail(&e),
        },
        Command::ListScenarios => {
            for b in builtin_scenarios() {
                println!("{:<22} {:<12} {}", b.name, b.config.side.kind().name(), b.summary);
            }
            ExitCode::SUCCESS
        }
    }
}

fn legendre(path: &std::path::Path) -> Result<ExitCode, Error> {
    let cfg = LegendreConfig::from_path(path)?;
    let section = cfg.section()?;
    let region = cfg.region()?;
    let diag = hyperregularity_probe(&section, &region, cfg.samples);
    println!("verdict: {}", diag.verdict.name());
    println!("samples: {}", diag.samples);
    println!("sampled_condition_max: {:e}", diag.sampled_condition_max);
    println!("injectivity_violations: {}", diag.injectivity_violations);
    let Some(table) = &cfg.table else {
        return Ok(ExitCode::SUCCESS);
    };
    let transform = match cfg.side {
        Side::Lagrangian => hamiltonian_from_lagrangian(&section, &region),
        _ => lagrangian_from_hamiltonian(&section, &region),
    }?;
    let n = section.dim();
    let (a, b) = if cfg.side == Side::Lagrangian { ("p", "z") } else { ("xd", "t") };
    let mut text = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("{a}{i}")))
        .chain([b.to_string(), "value".to_string()])
        .collect::<Vec<_>>()
        .join(",");
    text.push('\n');
    // rows are Legendre images of grid points of the region, so every row
    // lies in the transform's domain
    for point in region.grid(table.points) {
        let (x, fiber) = point.split_at(n);
        let image = match cfg.side {
            Side::Lagrangian => {
                let v = AtiyahCoords::new(region.chart, x.to_vec(), fiber[..n].to_vec(), fiber[n]);
                let u = legendre_from_lagrangian(&section, &v)?;
                [u.x, u.p, vec![u.z]].concat()
            }
            _ => {
                let u = ContactCoords::new(region.chart, x.to_vec(), fiber[..n].to_vec(), fiber[n]);
                let v = legendre_from_hamiltonian(&section, &u)?;
                [v.x, v.xdot, vec![v.t]].concat()
            }
        };
        let value = transform.value(region.chart, &image)?;
        let row: Vec<String> = image.iter().chain(std::iter::once(&value)).map(|x| real(*x)).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let target = path.parent().unwrap_or(std::path::Path::new(".")).join(&table.path);
    if let Some(dir) = target.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(&target, text).map_err(|e| Error::Io(format!("{}: {e}", target.display())))?;
    println!("table: {}", target.display());
    Ok(ExitCode::SUCCESS)
}
