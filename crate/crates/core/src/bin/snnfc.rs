use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use snnfc::dataset::uci::DatasetName;
use snnfc::run::{self, layered_config, Context, System};
use snnfc::{Error, Result};

#[derive(Parser)]
#[command(name = "snnfc", version, about = "Spiking-network file classification on UCI key-value data")]
struct Cli {
    /// Directory for prepared datasets, models and results.
    #[arg(long, global = true, default_value = "work")]
    work_dir: PathBuf,
    /// Run configuration (TOML) or a run manifest (JSON) to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `train.epochs=10`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Directory holding the raw UCI files.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse, split and cache a dataset.
    Prepare {
        dataset: DatasetName,
        /// Split seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train one system and evaluate it on the test split.
    Train(TrainArgs),
    /// Software accuracy of a stored model.
    Eval {
        model: PathBuf,
        dataset: DatasetName,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy of a stored SNU model on the simulated crossbar.
    HwEval {
        model: PathBuf,
        dataset: DatasetName,
        #[command(flatten)]
        hw: HwArgs,
        #[arg(long)]
        noise_scale: Option<f64>,
        #[arg(long)]
        noise_seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossbar accuracy over a grid of noise scales and seeds.
    SweepNoise {
        model: PathBuf,
        dataset: DatasetName,
        #[command(flatten)]
        hw: HwArgs,
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summary tables from result CSVs.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    dataset: DatasetName,
    /// 1 (STDP), 2 (probabilistic backprop), 3 (SNU backprop) or logreg.
    #[arg(long)]
    system: String,
    #[arg(long)]
    layers: Option<usize>,
    /// sup or unsup, system 1 only.
    #[arg(long)]
    mode: Option<String>,
    /// rate or van-rossum, unsupervised system 1 only.
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Spikes in each class target pattern (systems 2 and 3).
    #[arg(long)]
    target_spikes: Option<usize>,
    /// Output neurons per class target (systems 2 and 3).
    #[arg(long)]
    target_neurons: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HwArgs {
    /// Read the arrays without ADC quantization.
    #[arg(long)]
    ideal_adc: bool,
    /// Draw fresh device noise for every test record.
    #[arg(long)]
    resample: bool,
}

fn hw_sets(hw: &HwArgs, sets: &mut Vec<String>) {
    if hw.ideal_adc {
        sets.push("hardware.crossbar.quantize=false".into());
    }
    if hw.resample {
        sets.push("hardware.crossbar.resample_per_sample=true".into());
    }
}

fn list<T: ToString>(v: &[T]) -> String {
    format!("[{}]", v.iter().map(T::to_string).collect::<Vec<_>>().join(","))
}

fn train_sets(a: &TrainArgs, system: System, sets: &mut Vec<String>) -> Result<()> {
    let targets = a.target_spikes.is_some() || a.target_neurons.is_some();
    if targets && !matches!(system, System::ProbBp { .. } | System::Snu { .. }) {
        return Err(Error::Config(format!("{system} has no target patterns; drop --target-spikes/--target-neurons")));
    }
    if a.decoder.is_some() && system != (System::Stdp { supervised: false }) {
        return Err(Error::Config("--decoder applies to unsupervised system 1 only".into()));
    }
    if a.hidden.is_some() && a.layers.is_some() {
        return Err(Error::Config("give either --layers or --hidden, not both".into()));
    }
    if a.hidden.is_some() && !matches!(system, System::ProbBp { .. } | System::Snu { .. }) {
        return Err(Error::Config(format!("{system} has no hidden layers")));
    }
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            sets.push(format!("train.{k}={v}"));
        }
    };
    push("stdp.decoder", a.decoder.as_ref().map(|d| format!("\"{d}\"")));
    push("epochs", a.epochs.map(|v| v.to_string()));
    push("learning_rate", a.learning_rate.map(|v| format!("{v:?}")));
    push("hidden", a.hidden.as_deref().map(list));
    push("seed", a.seed.map(|v| v.to_string()));
    push("batch_size", a.batch_size.map(|v| v.to_string()));
    push("targets.spikes_per_target", a.target_spikes.map(|v| v.to_string()));
    push("targets.neurons_per_class", a.target_neurons.map(|v| v.to_string()));
    Ok(())
}

fn run(cli: Cli) -> Result<String> {
    // flags come after --set so that they win over it
    let mut sets = cli.sets.clone();
    if let Some(d) = &cli.data_dir {
        sets.push(format!("data.data_dir={:?}", d.display().to_string()));
    }
    let mut system = None;
    match &cli.cmd {
        Cmd::Prepare { seed: Some(s), .. } => sets.push(format!("data.prepare.seed={s}")),
        Cmd::Train(a) => {
            let s = System::from_parts(&a.system, a.layers, a.mode.as_deref())?;
            train_sets(a, s, &mut sets)?;
            system = Some(s);
        }
        Cmd::HwEval { hw, noise_scale, noise_seed, .. } => {
            hw_sets(hw, &mut sets);
            if let Some(v) = noise_scale {
                sets.push(format!("hardware.noise.noise_scale={v:?}"));
            }
            if let Some(v) = noise_seed {
                sets.push(format!("hardware.noise.seed={v}"));
            }
        }
        Cmd::SweepNoise { hw, scales, seeds, .. } => {
            hw_sets(hw, &mut sets);
            if let Some(v) = scales {
                sets.push(format!("hardware.scales={}", list(&v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>())));
            }
            if let Some(v) = seeds {
                sets.push(format!("hardware.seeds={}", list(v)));
            }
        }
        _ => {}
    }
    let config = layered_config(system, cli.config.as_deref(), &sets)?;
    let mut ctx = Context::new(&cli.work_dir, config);
    ctx.argv = std::env::args().collect();
    let outcome = match &cli.cmd {
        Cmd::Prepare { dataset, .. } => run::prepare(&ctx, *dataset)?,
        Cmd::Train(a) => run::train(&ctx, a.dataset, a.out.as_deref())?,
        Cmd::Eval { model, dataset, out } => run::eval(&ctx, model, *dataset, out.as_deref())?,
        Cmd::HwEval { model, dataset, out, .. } => run::hw_eval(&ctx, model, *dataset, out.as_deref())?,
        Cmd::SweepNoise { model, dataset, out, .. } => run::sweep_noise(&ctx, model, *dataset, out.as_deref())?,
        Cmd::Report { inputs, out_dir } => run::report(&ctx, inputs, out_dir.as_deref())?,
    };
    log::info!("manifest written to {}", outcome.manifest_path.display());
    Ok(format!("{}\nwrote {}", outcome.summary.trim_end(), outcome.artifact.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = ["warn", "info", "debug", "trace"][cli.verbose.min(3) as usize];
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(summary) => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout(), "{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
