//! `aslm` benchmark driver.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use aslm::bench::{emit_report, prepare_splits, run_experiment, training_set, ExperimentConfig, ReportFormat};
use aslm::{generate_lorenz, solve_regularized_ls, tune_epsilon, Metric, RegressionProblem};

#[derive(Parser, Debug)]
#[command(name = "aslm", version, about = "Augmented space linear model benchmarks on Lorenz prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a Lorenz x-component series as CSV, one value per line.
    Generate {
        /// Number of samples to keep.
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        /// Normalize to zero mean and unit variance.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the sliding-window benchmark and print a report.
    Run {
        #[arg(long, default_value = "table")]
        format: String,
        /// Use the noisy protocol defaults (20 dB, full roster) as the base config.
        #[arg(long)]
        noisy: bool,
        /// Print the resolved configuration and exit.
        #[arg(long)]
        print_config: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Find the quantization radius giving a target codebook size on the first training window.
    TuneEpsilon {
        /// Quantize in `w ∘ x` space (QASLM) instead of raw input space.
        #[arg(long)]
        hadamard: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: ConfigFlags,
}

/// One flag per experiment config key.
#[derive(Args, Debug, Default)]
struct ConfigFlags {
    /// Lorenz x-rate (standard chaotic value 10).
    #[arg(long)]
    sigma_l: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Euler step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long)]
    z0: Option<f64>,
    /// Discarded integration steps.
    #[arg(long)]
    transient: Option<usize>,
    /// Euler steps between recorded samples.
    #[arg(long)]
    sample_every: Option<usize>,
    /// Embedding order L.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    train_len: Option<usize>,
    #[arg(long)]
    test_len: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    /// Training-target SNR in dB, or `none`.
    #[arg(long)]
    noise_db: Option<String>,
    /// Ridge parameter of the least-squares fit.
    #[arg(long)]
    delta: Option<f64>,
    /// Gaussian kernel width.
    #[arg(long)]
    kernel_sigma: Option<f64>,
    /// KLMS step size.
    #[arg(long)]
    eta: Option<f64>,
    /// Fixed QASLM radius, or `none` to tune.
    #[arg(long)]
    epsilon_aslm: Option<String>,
    /// Fixed QKLMS / KLMS-QAM radius, or `none` to tune.
    #[arg(long)]
    epsilon_klms: Option<String>,
    /// Target codebook size when tuning radii.
    #[arg(long)]
    codebook_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated roster, e.g. `LS,KNN,ASLM`, or `all`.
    #[arg(long)]
    models: Option<String>,
    /// Skip query-time measurement (reports `nan`); output is then reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// Re-select delta, kernel sigma and eta on a hold-out slice.
    #[arg(long)]
    grid_search: bool,
}

impl ConfigFlags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        fn push<V: ToString>(out: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<V>) {
            if let Some(v) = v {
                out.push((key, v.to_string()));
            }
        }
        let mut out = Vec::new();
        push(&mut out, "sigma-l", &self.sigma_l);
        push(&mut out, "rho", &self.rho);
        push(&mut out, "beta", &self.beta);
        push(&mut out, "dt", &self.dt);
        push(&mut out, "x0", &self.x0);
        push(&mut out, "y0", &self.y0);
        push(&mut out, "z0", &self.z0);
        push(&mut out, "transient", &self.transient);
        push(&mut out, "sample-every", &self.sample_every);
        push(&mut out, "order", &self.order);
        push(&mut out, "horizon", &self.horizon);
        push(&mut out, "train-len", &self.train_len);
        push(&mut out, "test-len", &self.test_len);
        push(&mut out, "stride", &self.stride);
        push(&mut out, "runs", &self.runs);
        push(&mut out, "noise-db", &self.noise_db);
        push(&mut out, "delta", &self.delta);
        push(&mut out, "kernel-sigma", &self.kernel_sigma);
        push(&mut out, "eta", &self.eta);
        push(&mut out, "epsilon-aslm", &self.epsilon_aslm);
        push(&mut out, "epsilon-klms", &self.epsilon_klms);
        push(&mut out, "codebook-size", &self.codebook_size);
        push(&mut out, "seed", &self.seed);
        push(&mut out, "models", &self.models);
        if self.no_timing {
            out.push(("timing", "false".into()));
        }
        if self.grid_search {
            out.push(("grid-search", "true".into()));
        }
        out
    }
}

impl Common {
    fn resolve(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_kv_text(&text)
                .with_context(|| format!("in config file {}", path.display()))?;
        }
        for (key, value) in self.fields.pairs() {
            cfg.set(key, &value).with_context(|| format!("flag --{key}"))?;
        }
        Ok(cfg)
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(io::BufWriter::new(
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            samples,
            normalize,
            common,
        } => {
            let cfg = common.resolve(ExperimentConfig::default())?;
            let mut series = generate_lorenz(&cfg.lorenz, samples)?;
            if normalize {
                series = series.normalize()?;
            }
            let mut out = common.sink()?;
            series.write_csv(&mut out)?;
            out.flush()?;
        }
        Command::Run {
            format,
            noisy,
            print_config,
            common,
        } => {
            let format: ReportFormat = format.parse()?;
            let base = if noisy {
                ExperimentConfig::noisy()
            } else {
                ExperimentConfig::default()
            };
            let cfg = common.resolve(base)?;
            let mut out = common.sink()?;
            if print_config {
                out.write_all(cfg.to_kv_text().as_bytes())?;
            } else {
                let report = run_experiment::<f64>(&cfg)?;
                out.write_all(emit_report(&report, format).as_bytes())?;
            }
            out.flush()?;
        }
        Command::TuneEpsilon { hadamard, common } => {
            let cfg = common.resolve(ExperimentConfig::default())?;
            cfg.validate()?;
            let splits = prepare_splits::<f64>(&cfg)?;
            let train = training_set(&cfg, &splits[0])?;
            let metric = if hadamard {
                let w = solve_regularized_ls(&RegressionProblem::from_dataset(&train, cfg.delta))?;
                Metric::hadamard(w.as_slice())?
            } else {
                Metric::PlainL2
            };
            let choice = tune_epsilon(train.dim(), train.inputs_flat(), cfg.quantization.target_size, &metric)?;
            let mut out = common.sink()?;
            writeln!(out, "epsilon,codebook_size,exact")?;
            writeln!(out, "{},{},{}", choice.epsilon, choice.size, choice.exact)?;
            out.flush()?;
        }
    }
    Ok(())
}
