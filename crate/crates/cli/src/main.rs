// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stokes_g2::presets::Preset;
use stokes_g2_cli::config::parse_assignment;
use stokes_g2_cli::{compare_files, run, sweep, Axis, CliError, Result, RunArtifact, ScenarioConfig};
use toml::Value;

#[derive(Parser)]
#[command(name = "stokes-g2", version, about = "Photon correlations of ZPL and Stokes-shifted emission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one correlation curve.
    Run(Common),
    /// Repeat a run over values of one parameter.
    Sweep {
        /// rabi, delta0, delta (in units of gamma0) or r12 (nm).
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Residuals of a simulated table against a reference table.
    Compare { simulation: PathBuf, reference: PathBuf },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// Flat dotted-key TOML file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// zpl, stokes or stokes-modeN.
    #[arg(long)]
    filter: Option<String>,
    #[arg(long)]
    tau_max_ns: Option<f64>,
    #[arg(long)]
    n_tau: Option<i64>,
    #[arg(long)]
    decompose: bool,
    #[arg(long)]
    symmetric: bool,
    #[arg(long)]
    detector_fwhm_ps: Option<f64>,
    #[arg(long)]
    detector_bin_ps: Option<f64>,
    #[arg(long)]
    mcwf_traj: Option<i64>,
    #[arg(long)]
    seed: Option<i64>,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any config key, e.g. --set drive.rabi_over_gamma0=5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut o: Vec<(String, Value)> = Vec::new();
        for s in &self.set {
            o.push(parse_assignment(s)?);
        }
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        let path_value = |p: &PathBuf| Value::String(p.display().to_string());
        put("preset", self.preset.clone().map(Value::String));
        put("filter", self.filter.clone().map(Value::String));
        put("tau_max_ns", self.tau_max_ns.map(Value::Float));
        put("n_tau", self.n_tau.map(Value::Integer));
        put("decompose", self.decompose.then_some(Value::Boolean(true)));
        put("symmetric", self.symmetric.then_some(Value::Boolean(true)));
        put("detector.fwhm_ps", self.detector_fwhm_ps.map(Value::Float));
        put("detector.bin_ps", self.detector_bin_ps.map(Value::Float));
        put("mcwf.n_traj", self.mcwf_traj.map(Value::Integer));
        put("mcwf.seed", self.seed.map(Value::Integer));
        put("reference", self.reference.as_ref().map(path_value));
        put("out", self.out.as_ref().map(path_value));
        ScenarioConfig::load(self.config.as_deref(), &o)
    }
}

fn report(a: &RunArtifact) {
    let c = &a.correlation;
    println!(
        "{}: filter {}, <I> = {:.6e}, {} delays",
        a.table.display(),
        c.filter,
        c.mean_intensity,
        c.tau_ns.len()
    );
    for p in [&a.convolved, &a.mcwf, &a.spectrum].into_iter().flatten() {
        println!("{}", p.display());
    }
    if let Some(r) = a.residuals {
        println!("residuals: {} points, max {:.6e}, rms {:.6e}", r.points, r.max_abs, r.rms);
    }
    println!("{}", a.metadata.display());
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => report(&run(&common.load()?)?),
        Command::Sweep { axis, values, common } => {
            let axis: Axis = axis.parse()?;
            let values = values
                .iter()
                .filter(|v| !v.trim().is_empty())
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::ConfigInvalid {
                            field: "values".into(),
                            reason: format!("'{v}' is not a number"),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            let cfg = common.load()?;
            for a in sweep(&cfg, axis, &values)? {
                report(&a);
            }
        }
        Command::Compare { simulation, reference } => {
            let r = compare_files(&simulation, &reference)?;
            println!("points = {}\nmax_abs = {:e}\nrms = {:e}", r.points, r.max_abs, r.rms);
        }
        Command::Presets => {
            for p in Preset::ALL {
                let s = p.scenario();
                println!(
                    "{:6} V/g0 = {:7.3}  g12/g0 = {:7.4}  delta/g0 = {:6.2}  delta0/g0 = {:8.4}  |Omega|/g0 = {:.2}",
                    p.name(),
                    s.v,
                    s.gamma12,
                    s.delta,
                    s.delta0,
                    s.rabi
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
