use clap::{Parser, Subcommand};
use kinrelax::cli::{self, CaseId};
use kinrelax::harness::report;
use kinrelax::{stability, Error};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kinrelax",
    about = "Explicit kinetic relaxation schemes for 2D convection-diffusion systems"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a case described by a key = value configuration file.
    Run { config: PathBuf },
    /// Reproduce the critical-CFL table of the transport discretizations.
    StabilityTable {
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Mesh-convergence study of a Gaussian case over a list of grids.
    Convergence {
        /// gaussian_a | gaussian_b | gaussian_c
        case: String,
        /// comma-separated orders, e.g. 1,2,4
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 4])]
        orders: Vec<usize>,
        /// comma list (10,20,40) or dyadic range (10..320)
        #[arg(long)]
        grids: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn run(args: Args) -> kinrelax::Result<()> {
    match args.cmd {
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Error::config(format!("cannot read config {}: {e}", config.display()))
            })?;
            let cfg = cli::parse_config(&text)?;
            let summary = cli::execute(&cfg)?;
            for line in &summary.lines {
                println!("{line}");
            }
            for a in &summary.artifacts {
                println!("wrote {}", a.display());
            }
            Ok(())
        }
        Cmd::StabilityTable { out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            let rows = stability::compute_table(4096, 1e-3)?;
            let path = out_dir.join("stability_table.csv");
            report::write_text(&path, &stability::table_csv(&rows))?;
            for (p, l) in &rows {
                println!(
                    "time_order={} spatial={} iterations={} lambda_max={:.3}",
                    p.time_order, p.spatial, p.iterations, l
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Cmd::Convergence {
            case,
            orders,
            grids,
            out_dir,
        } => {
            let case_id = CaseId::parse(&case)?;
            let variant = match case_id {
                CaseId::GaussianA => kinrelax::harness::gaussian::GaussianVariant::A,
                CaseId::GaussianB => kinrelax::harness::gaussian::GaussianVariant::B,
                CaseId::GaussianC => kinrelax::harness::gaussian::GaussianVariant::C,
                _ => {
                    return Err(Error::config(
                        "convergence studies are defined for the gaussian cases",
                    ))
                }
            };
            let grids = cli::parse_grids(&grids)?;
            let summary = cli::gaussian_convergence(variant, &orders, &grids, None, &out_dir)?;
            print_summary(&summary);
            Ok(())
        }
    }
}

fn print_summary(summary: &cli::RunSummary) {
    for line in &summary.lines {
        println!("{line}");
    }
    for a in &summary.artifacts {
        println!("wrote {}", a.display());
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
