use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use polyrecon::experiment::{axis_incidents, run_location, run_pipeline, synthesize_dataset, ExperimentConfig};
use polyrecon::geometry::{check_admissibility, read_obstacle, AdmissibilityParams};

/// Phaseless far-field recovery of convex polyhedral obstacles.
///
/// The thread count follows RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the far-field data of an experiment to <output>/data.
    Synth { config: PathBuf },
    /// Run the full recovery and write the report tables to <output>.
    Recover { config: PathBuf },
    /// Run only the location step.
    Locate { config: PathBuf },
    /// Report whether an obstacle file is an admissible convex polyhedron.
    Check { obstacle: PathBuf },
}

fn run(cli: Cli) -> polyrecon::Result<()> {
    match cli.command {
        Command::Synth { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let data = synthesize_dataset(&cfg)?;
            println!(
                "wrote {} shape files and 1 location file to {}",
                data.shape.len(),
                polyrecon::experiment::data_dir(&cfg).display()
            );
        }
        Command::Recover { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let start = Instant::now();
            let report = run_pipeline(&cfg)?;
            print!("{}", report.summary());
            eprintln!("done in {:.1} s, tables in {}", start.elapsed().as_secs_f64(), cfg.output.display());
        }
        Command::Locate { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let loc = run_location(&cfg)?;
            print!("{}", loc.to_text());
        }
        Command::Check { obstacle } => {
            let poly = read_obstacle(&obstacle)?;
            let params = AdmissibilityParams::default();
            let dirs: Vec<_> = axis_incidents().iter().map(|i| i.d).collect();
            let report = check_admissibility(&poly, &params, &dirs);
            println!("vertices = {}", poly.vertices().len());
            println!("faces = {}", poly.faces().len());
            println!("volume = {:.6} ({})", report.volume, ok(report.volume_ok));
            println!("min_area = {:.6} ({})", report.min_area, ok(report.area_ok));
            println!("max_perimeter = {:.6} ({})", report.max_perimeter, ok(report.perimeter_ok));
            println!("front_pairs = {}", ok(report.front_pairs_ok));
            for d in &report.directions {
                let v = d.direction;
                println!(
                    "d = {} {} {}: front {:?}, significant {:?}",
                    v.x + 0.0,
                    v.y + 0.0,
                    v.z + 0.0,
                    d.view.front,
                    d.view.significant
                );
            }
            println!("admissible = {}", report.admissible());
        }
    }
    Ok(())
}

fn ok(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "violated"
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
