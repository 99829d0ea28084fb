//! `parareal-lab`: region maps, speedup tables, NLS runs and sweeps, and
//! built-in self-tests.

mod args;
mod maps;
mod nls;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use parareal_lab::artifacts::RunManifest;

use args::{Cli, Command};

/// A check that ran to completion and found a wrong number.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<parareal_lab::Error>() {
            return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION };
        }
        if cause.is::<CheckFailed>() {
            return EXIT_NUMERICAL;
        }
    }
    EXIT_VALIDATION
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_VALIDATION);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }

    let argv: Vec<String> = std::env::args().skip(1).collect();
    let name = cli.command.name();
    let out_dir = cli.command.out_dir().to_path_buf();
    let mut manifest = RunManifest::new(name, serde_json::json!({ "argv": argv }));

    let result = std::fs::create_dir_all(&out_dir)
        .map_err(anyhow::Error::from)
        .and_then(|_| run(&cli.command, &out_dir, &mut manifest));

    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            manifest.status = format!("error: {e:#}");
            exit_code(e)
        }
    };

    let path = out_dir.join(format!("{}.manifest.json", name.replace('-', "_")));
    if let Err(e) = manifest.write(&path) {
        eprintln!("error: cannot write manifest {}: {e}", path.display());
        return ExitCode::from(code.max(EXIT_VALIDATION));
    }
    ExitCode::from(code)
}

fn run(cmd: &Command, out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    match cmd {
        Command::StabilityMap(a) => maps::stability_map(a, out, manifest),
        Command::AccuracyMap(a) => maps::accuracy_map(a, out, manifest),
        Command::AmpSurface(a) => maps::amp_surface(a, out, manifest),
        Command::SpeedupTable(a) => maps::speedup_table(a, out, manifest),
        Command::NlsRun(a) => nls::run(a, out, manifest),
        Command::NlsSweep(a) => nls::sweep(a, out, manifest),
        Command::SelfTest(a) => self_test::run(a, manifest),
    }
}
