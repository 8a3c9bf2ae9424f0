use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kdv_dg::harness::{
    run_convergence, run_evolution, run_property_suite, ConvergenceConfig, EvolutionConfig,
    MeshHierarchy, MeshKind, MeshSpec,
};
use kdv_dg::operators::MethodVariant;
use kdv_dg::problems::ExampleId;
use kdv_dg::timestep::default_cfl;

#[derive(Parser)]
#[command(
    name = "kdv-dg",
    version,
    about = "DG solver for the generalized KdV equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MeshArgs {
    /// uniform or random
    #[arg(long, default_value = "random")]
    mesh: MeshKind,
    /// Relative node perturbation for random meshes.
    #[arg(long, default_value_t = 0.1)]
    perturb: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Refine the coarsest random mesh by bisection instead of drawing each level.
    #[arg(long)]
    nested: bool,
}

impl MeshArgs {
    fn spec(&self) -> MeshSpec {
        MeshSpec {
            kind: self.mesh,
            perturb: self.perturb,
            seed: self.seed,
            hierarchy: if self.nested {
                MeshHierarchy::Nested
            } else {
                MeshHierarchy::Independent
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// L2 errors and orders at T = 10 dt0 over a sequence of meshes.
    Convergence {
        #[arg(long)]
        example: ExampleId,
        #[arg(long, default_value = "A")]
        method: MethodVariant,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        cells: Vec<usize>,
        /// Defaults to 0.05, 0.02 and 0.005 for k = 2, 3, 4.
        #[arg(long)]
        cfl: Option<f64>,
        #[command(flatten)]
        mesh: MeshArgs,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Long-time run recording the energy history and a final snapshot.
    Evolve {
        #[arg(long)]
        example: ExampleId,
        #[arg(long, default_value = "A")]
        method: MethodVariant,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 20)]
        cells: usize,
        /// Final time; defaults to 5 for example 4.4 and 1 otherwise.
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        cfl: Option<f64>,
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        energy_out: Option<PathBuf>,
        #[arg(long)]
        snapshot_out: Option<PathBuf>,
        /// Energy sampling cadence in steps.
        #[arg(long, default_value_t = 1000)]
        snapshot_every: usize,
        /// Snapshot samples per cell.
        #[arg(long, default_value_t = 6)]
        points_per_cell: usize,
    },
    /// Runs the invariant battery; exits nonzero on any failure.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn writer(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Convergence {
            example,
            method,
            degree,
            cells,
            cfl,
            mesh,
            out,
        } => {
            let config = ConvergenceConfig {
                example,
                method,
                degree,
                cells,
                cfl: cfl.unwrap_or_else(|| default_cfl(degree)),
                mesh: mesh.spec(),
            };
            let report = run_convergence(&config)?;
            let mut w = writer(&out)?;
            report.write_csv(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Evolve {
            example,
            method,
            degree,
            cells,
            t_final,
            cfl,
            mesh,
            energy_out,
            snapshot_out,
            snapshot_every,
            points_per_cell,
        } => {
            let config = EvolutionConfig {
                example,
                method,
                degree,
                cells,
                t_final: t_final.unwrap_or_else(|| example.default_horizon()),
                cfl: cfl.unwrap_or_else(|| default_cfl(degree)),
                mesh: mesh.spec(),
                energy_every: snapshot_every,
            };
            let result = run_evolution(&config)?;
            let mut w = writer(&energy_out)?;
            writeln!(w, "# method={method} example={example} degree={degree} cells={cells} cfl={:.5e} dt={:.5e} steps={}",
                config.cfl, result.control.dt, result.control.steps)?;
            result.history.write_csv(&mut w)?;
            w.flush()?;
            if let Some(path) = &snapshot_out {
                let mut s = BufWriter::new(File::create(path)?);
                result.state.write_snapshot(&mut s, points_per_cell)?;
                s.flush()?;
            }
            eprintln!(
                "T = {:.5e}: energy drift {:.3e}, L2 error {:.5e}",
                result.control.t_final,
                result.history.relative_drift(),
                result.error_u
            );
            Ok(true)
        }
        Command::Verify { seed } => {
            let checks = run_property_suite(seed)?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
