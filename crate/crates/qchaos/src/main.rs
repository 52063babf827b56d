use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qchaos::commands::{self, Run};
use qchaos::config::{ModeName, RunConfig};
use qchaos::error::Result;

/// Chaos borders, realisation ensembles and tunnelling for 1D quantum systems.
#[derive(Debug, Parser)]
#[command(name = "qchaos", version)]
struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound-state levels of the configured potential.
    Spectrum {
        #[arg(long)]
        n_levels: Option<usize>,
    },
    /// Chaos borders and regime, optionally over a sweep.
    Borders {
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<ModeName>,
        #[arg(long)]
        n_levels: Option<usize>,
    },
    /// Noise-driven jumps between realisations.
    Ensemble {
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Realisation-set JSON instead of jump realisations.
        #[arg(long)]
        realisations: Option<PathBuf>,
    },
    /// Chaotic-jump transmission through barrier `beta`.
    Tunnel {
        #[arg(long)]
        realisations: Option<PathBuf>,
        #[arg(long)]
        beta: Option<usize>,
        #[arg(long)]
        eps_s: Option<f64>,
        #[arg(long)]
        delta_eps_s: Option<f64>,
        #[arg(long)]
        unperturbed_height: Option<f64>,
    },
    /// Standard-map diffusion compared with the `K > K_c` criterion.
    Classical {
        #[arg(long = "K")]
        k: Option<f64>,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        n_orbits: Option<usize>,
        #[arg(long)]
        n_steps: Option<usize>,
    },
}

fn parse_mode(s: &str) -> std::result::Result<ModeName, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown mode `{s}` (time_independent, time_dependent, above_barrier)"))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (mut config, base_dir) = match &cli.config {
        Some(p) => {
            let base = p.parent().map(PathBuf::from).unwrap_or_default();
            (RunConfig::load(p)?, base)
        }
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    set(&mut config.seed, cli.seed);
    set(&mut config.output_dir, cli.out);
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }

    match cli.command {
        Command::Spectrum { n_levels } => {
            set(&mut config.n_levels, n_levels);
            let spec = commands::cmd_spectrum(&Run::new(config, base_dir))?;
            println!("{} levels, delta_eps_s = {}", spec.levels.len(), spec.delta_eps_s);
        }
        Command::Borders { energy, mode, n_levels } => {
            set(&mut config.energy, energy);
            set(&mut config.mode, mode);
            set(&mut config.n_levels, n_levels);
            let r = commands::cmd_borders(&Run::new(config, base_dir))?;
            println!("regime = {}", r.regime.as_str());
        }
        Command::Ensemble { energy, sigma, t_max, dt, repetitions, realisations } => {
            set(&mut config.energy, energy);
            set(&mut config.noise.sigma, sigma);
            set(&mut config.ensemble.t_max, t_max);
            set(&mut config.ensemble.dt, dt);
            set(&mut config.ensemble.repetitions, repetitions);
            if realisations.is_some() {
                config.ensemble.realisations = realisations;
            }
            let s = commands::cmd_ensemble(&Run::new(config, base_dir))?;
            println!("jumps = {:?}", s.jump_counts);
        }
        Command::Tunnel { realisations, beta, eps_s, delta_eps_s, unperturbed_height } => {
            let t = &mut config.tunnel;
            if realisations.is_some() {
                t.realisations = realisations;
            }
            set(&mut t.beta, beta);
            t.eps_s = eps_s.or(t.eps_s);
            t.delta_eps_s = delta_eps_s.or(t.delta_eps_s);
            t.unperturbed_height = unperturbed_height.or(t.unperturbed_height);
            let r = commands::cmd_tunnel(&Run::new(config, base_dir))?;
            println!("p_beta = {}, P_beta = {}", r.p_beta, r.p_total);
        }
        Command::Classical { k, energy, n_orbits, n_steps } => {
            let c = &mut config.classical;
            c.k = k.or(c.k);
            set(&mut c.n_orbits, n_orbits);
            set(&mut c.n_steps, n_steps);
            set(&mut config.energy, energy);
            let o = commands::cmd_classical(&Run::new(config, base_dir))?;
            let v = &o.verdict;
            println!("K = {}, K_c = {}, D_est = {}, bounded = {}", v.k, v.k_c, v.d_est, v.bounded);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qchaos: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
