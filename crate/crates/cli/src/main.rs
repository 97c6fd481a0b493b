//! `qrc`: run reservoir-computing sweeps and write CSV/JSON tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrc_core::experiment::{run_experiment, write_outputs, ExperimentConfig, Task};
use qrc_core::QrcError;

#[derive(Parser, Debug)]
#[command(name = "qrc", version, about = "Quantum reservoir computing on random regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Delayed Werner-parameter reconstruction (memory capacity).
    Memory(Overrides),
    /// AND/OR/XOR classification of two bit streams.
    Multitask(Overrides),
    /// Level-spacing ratio of the Hamiltonian spectrum.
    Spectra(Overrides),
    /// Correlation-norm and negativity dynamics after one injection.
    Diagnostics(Overrides),
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON configuration file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    n_total: Option<usize>,
    /// Graph degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    dt: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    delta_x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    jx: Option<Vec<f64>>,
    #[arg(long)]
    delta_z: Option<f64>,
    /// Auxiliary (input) sites, comma separated.
    #[arg(long, value_delimiter = ',')]
    aux_sites: Option<Vec<usize>>,
    /// Ridge regularization.
    #[arg(long)]
    lambda: Option<f64>,
    /// RBF kernel length scale.
    #[arg(long)]
    length_scale: Option<f64>,
    /// Soft-margin penalty.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    tau_max: Option<usize>,
    #[arg(long)]
    encoding_noise: Option<f64>,
    /// XOR accuracy threshold for the critical-disorder scan.
    #[arg(long)]
    critical_threshold: Option<f64>,
    #[arg(long)]
    n_times: Option<usize>,
}

fn build_config(task: Task, o: Overrides) -> Result<ExperimentConfig, QrcError> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| QrcError::Config(format!("{}: {e}", path.display())))?;
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| QrcError::Config(format!("{}: {e}", path.display())))?;
            // the subcommand decides the task
            if let Some(obj) = value.as_object_mut() {
                obj.insert("task".into(), serde_json::to_value(task)?);
            }
            let base = serde_json::to_value(ExperimentConfig::for_task(task))?;
            let merged = merge(base, value);
            serde_json::from_value(merged).map_err(|e| QrcError::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::for_task(task),
    };
    macro_rules! set {
        ($field:expr, $value:expr) => {
            if let Some(v) = $value {
                $field = v;
            }
        };
    }
    set!(cfg.master_seed, o.seed);
    set!(cfg.realizations, o.realizations);
    set!(cfg.out, o.out);
    set!(cfg.workers, o.workers);
    set!(cfg.n_total, o.n_total);
    set!(cfg.degrees, o.k);
    set!(cfg.dts, o.dt);
    set!(cfg.delta_x, o.delta_x);
    set!(cfg.jx, o.jx);
    set!(cfg.delta_z, o.delta_z);
    set!(cfg.aux_sites, o.aux_sites);
    set!(cfg.readout.lambda, o.lambda);
    set!(cfg.readout.length_scale, o.length_scale);
    set!(cfg.readout.penalty, o.penalty);
    set!(cfg.tau_max, o.tau_max);
    set!(cfg.encoding_noise, o.encoding_noise);
    set!(cfg.time_grid.n_points, o.n_times);
    if o.critical_threshold.is_some() {
        cfg.critical_threshold = o.critical_threshold;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Overlays `patch` onto `base`, recursing into objects.
fn merge(base: serde_json::Value, patch: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match (base, patch) {
        (Value::Object(mut b), Value::Object(p)) => {
            for (k, v) in p {
                let merged = match b.remove(&k) {
                    Some(old) => merge(old, v),
                    None => v,
                };
                b.insert(k, merged);
            }
            Value::Object(b)
        }
        (_, p) => p,
    }
}

fn exit_code(e: &QrcError) -> u8 {
    match e {
        QrcError::Config(_) | QrcError::InfeasibleDegree { .. } => 2,
        QrcError::SweepAborted { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (task, overrides) = match cli.command {
        Command::Memory(o) => (Task::Memory, o),
        Command::Multitask(o) => (Task::Multitask, o),
        Command::Spectra(o) => (Task::Spectra, o),
        Command::Diagnostics(o) => (Task::Diagnostics, o),
    };
    let result = build_config(task, overrides).and_then(|cfg| {
        log::info!(
            "{:?}: {} grid points x {} realizations, fingerprint {}",
            cfg.task,
            cfg.grid().len(),
            cfg.realizations,
            &cfg.fingerprint()[..12]
        );
        let output = run_experiment(&cfg)?;
        let files = write_outputs(&output, &cfg.out)?;
        for f in files {
            log::info!("wrote {}", f.display());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
