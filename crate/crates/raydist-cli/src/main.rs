//! Command-line experiments over ray distance fields: ground-truth
//! intersection dumps, dense field volumes, expectation curves, surface
//! decoding, metric reports, and an end-to-end decoder comparison.

mod commands;
mod plot;

use clap::{Parser, Subcommand};
use raydist::expectation::ExpectError;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "raydist", version, about = "ray distance field experiments")]
struct Cli {
    /// RNG seed used by every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory; all result paths are relative to it.
    #[arg(long, global = true, default_value = ".")]
    out: String,
    /// Worker threads (0 = auto). The RDF_THREADS env var overrides this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cast grid rays against a mesh: per-ray hit depths + hit-count histogram.
    Intersect(commands::IntersectArgs),
    /// Evaluate a distance/occupancy field over the camera frustum into a volume file.
    Field(commands::FieldArgs),
    /// Expected-field curves under Gaussian uncertainty (analytic, optional MC).
    Expect(commands::ExpectArgs),
    /// Decode a volume file into per-ray surface hit depths.
    Decode(commands::DecodeArgs),
    /// Compare predicted surfaces against ground truth: Chamfer + Acc/Cmp/F1.
    Eval(commands::EvalArgs),
    /// End-to-end decoder robustness comparison on a synthetic scene.
    Demo(commands::DemoArgs),
    /// Render a CSV file as an SVG line plot.
    Plot(commands::PlotArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = std::env::var("RDF_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(cli.threads);
    if threads > 0 {
        // ignore failure when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    let ctx = commands::Ctx { seed: cli.seed, out: cli.out.clone().into() };
    let result = match cli.command {
        Command::Intersect(args) => commands::cmd_intersect(&ctx, args),
        Command::Field(args) => commands::cmd_field(&ctx, args),
        Command::Expect(args) => commands::cmd_expect(&ctx, args),
        Command::Decode(args) => commands::cmd_decode(&ctx, args),
        Command::Eval(args) => commands::cmd_eval(&ctx, args),
        Command::Demo(args) => commands::cmd_demo(&ctx, args),
        Command::Plot(args) => commands::cmd_plot(&ctx, args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // numeric failures (lost crossings) exit 4, data problems exit 3
            let numeric = err.chain().any(|c| {
                matches!(
                    c.downcast_ref::<ExpectError>(),
                    Some(ExpectError::CrossingLost | ExpectError::NoReliableCrossing)
                )
            });
            ExitCode::from(if numeric { 4 } else { 3 })
        }
    }
}
