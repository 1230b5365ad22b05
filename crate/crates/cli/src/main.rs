use std::path::PathBuf;
use std::process::ExitCode;

use ccforms::{load_config, run, Command};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccforms", version, about = "CMC surfaces and stability checks in the sub-Riemannian space forms")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Io {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for meshes, tables and reports.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample one CC-geodesic and report its invariants.
    Geodesic(Io),
    /// Write the OBJ mesh and per-vertex CSV of a surface.
    Surface(Io),
    /// Classify a surface on its parameter window.
    Stability(Io),
    /// Run every identity check for the configured surface.
    Verify(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CCFORMS_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // Ignored if the global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (cmd, io) = match cli.command {
        Cmd::Geodesic(io) => (Command::Geodesic, io),
        Cmd::Surface(io) => (Command::Surface, io),
        Cmd::Stability(io) => (Command::Stability, io),
        Cmd::Verify(io) => (Command::Verify, io),
    };
    let result = load_config(&io.config).and_then(|cfg| {
        std::fs::create_dir_all(&io.out_dir)?;
        run(cmd, &cfg, &io.out_dir)
    });
    match result {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            println!("{}", if out.passed { "PASS" } else { "FAIL" });
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("ccforms: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
