//! `ambnet`: generate networks, reorder and render them as amb images, train
//! and evaluate the family classifier, and describe real networks as family
//! mixtures. Every command that writes a file also writes
//! `<file>.manifest.json`, which `ambnet replay` re-runs and checks.

mod config;
mod datadir;
mod jobs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ambnet::classifier::{DatasetConfig, Hyperparameters, ParamRanges};
use ambnet::manifest::{digest_path, RunManifest};
use ambnet::{FamilyLabel, GenParams};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::Config;
use jobs::*;

#[derive(Parser)]
#[command(name = "ambnet", version, about = "Network-family classification from adjacency-matrix images")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "AMBNET_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// JSON config file with defaults per command; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an ER, NCN, WS or BA network as an edge list.
    Generate(GenerateArgs),
    /// Reorder an edge list with VRA.
    Reorder(ReorderArgs),
    /// Render an edge list as a binary PGM image.
    Render(RenderArgs),
    /// Build a labeled image dataset directory.
    Dataset(DatasetArgs),
    /// Train the classifier.
    Train(TrainArgs),
    /// Evaluate one or more models and print precision/recall tables.
    Eval(EvalArgs),
    /// Describe a network as a mixture of families.
    Describe(DescribeArgs),
    /// Print the standard motif-iteration tree for k vertices.
    Mim(MimArgs),
    /// Re-run the command recorded in a manifest and compare its outputs.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// er, ncn, ws or ba.
    #[arg(long)]
    family: Option<FamilyLabel>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge count (ER) or edges per new vertex (BA).
    #[arg(long)]
    m: Option<usize>,
    /// Ring-lattice degree (NCN, WS).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (WS).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReorderArgs {
    input: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the VRA trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    /// Center the image on a black canvas of this side.
    #[arg(long)]
    pad: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Options shared by `dataset` and `train`.
#[derive(Args)]
struct DataArgs {
    /// Vertices per generated network.
    #[arg(long)]
    n: Option<usize>,
    /// Image side after padding (default: n).
    #[arg(long)]
    side: Option<usize>,
    #[arg(long)]
    train_per_class: Option<usize>,
    #[arg(long)]
    test_per_class: Option<usize>,
    /// Skip VRA: images show the networks in their given vertex order.
    #[arg(long)]
    no_vra: bool,
    /// Keep generator vertex numbering instead of a random relabeling.
    #[arg(long)]
    no_relabel: bool,
    /// Worker threads for generation.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct DatasetArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory from `ambnet dataset`; otherwise one is built in memory.
    #[arg(long, conflicts_with_all = ["n", "side", "train_per_class", "test_per_class", "no_vra", "no_relabel"])]
    data: Option<PathBuf>,
    #[command(flatten)]
    build: DataArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    decay_every: Option<usize>,
    #[arg(long)]
    decay_factor: Option<f64>,
    /// Model file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model file; repeat to compare models side by side.
    #[arg(long = "model", required = true)]
    models: Vec<PathBuf>,
    /// Dataset directory whose test split is used for every model. Without
    /// it, each model is evaluated on the test split of its own dataset.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DescribeArgs {
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Name printed in the mixture line (default: input file stem).
    #[arg(long)]
    name: Option<String>,
    /// Also write the description as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MimArgs {
    k: usize,
    /// Print `M(3)` / `M(4)` for flat motifs.
    #[arg(long)]
    abbreviate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
}

fn flag(set: bool) -> Option<bool> {
    set.then_some(true)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn data_config(a: &DataArgs, cfg: &Config, section: &str) -> Result<(DatasetConfig, bool, usize)> {
    let n = cfg.pick(a.n, section, "n", 100)?;
    let base = DatasetConfig::desk_scale(n);
    let config = DatasetConfig {
        side: cfg.pick(a.side, section, "side", n)?,
        train_per_class: cfg.pick(a.train_per_class, section, "train_per_class", base.train_per_class)?,
        test_per_class: cfg.pick(a.test_per_class, section, "test_per_class", base.test_per_class)?,
        ranges: cfg.pick::<ParamRanges>(None, section, "ranges", base.ranges)?,
        relabel: !cfg.pick(flag(a.no_relabel), section, "no_relabel", false)?,
        n,
    };
    let vra = !cfg.pick(flag(a.no_vra), section, "no_vra", false)?;
    let jobs = cfg.pick(a.jobs, section, "jobs", default_jobs())?.max(1);
    Ok((config, vra, jobs))
}

fn resolve(cli: &Cli, cfg: &Config) -> Result<Job> {
    let dir = &cli.out_dir;
    let out_or = |given: &Option<PathBuf>, default: String| absolute(&given.clone().unwrap_or_else(|| dir.join(default)));
    let out_opt = |given: &Option<PathBuf>| given.as_deref().map(absolute).transpose();
    Ok(match &cli.command {
        Command::Generate(a) => {
            let s = "generate";
            let family: FamilyLabel = match a.family {
                Some(f) => f,
                None => cfg
                    .get::<String>(s, "family")?
                    .ok_or_else(|| anyhow!("--family is required"))?
                    .parse()?,
            };
            let n = cfg.pick_opt(a.n, s, "n")?.ok_or_else(|| anyhow!("--n is required"))?;
            let seed = cfg.pick(a.seed, s, "seed", 0)?;
            let need = |v: Option<usize>, key: &str| -> Result<usize> {
                cfg.pick_opt(v, s, key)?.ok_or_else(|| anyhow!("--{key} is required for {family}"))
            };
            let params = match family {
                FamilyLabel::ER => GenParams::er(n, need(a.m, "m")?, seed),
                FamilyLabel::NCN => GenParams::ncn(n, need(a.k, "k")?),
                FamilyLabel::WS => {
                    let p = cfg.pick_opt(a.p, s, "p")?.ok_or_else(|| anyhow!("--p is required for WS"))?;
                    GenParams::ws(n, need(a.k, "k")?, p, seed)
                }
                FamilyLabel::BA => GenParams::ba(n, need(a.m, "m")?, seed),
            };
            let name = match params.seed {
                Some(seed) => format!("{}_{n}_{seed}.edges", family.as_str().to_lowercase()),
                None => format!("{}_{n}.edges", family.as_str().to_lowercase()),
            };
            Job::Generate(GenerateJob { out: out_or(&a.out, name)?, params })
        }
        Command::Reorder(a) => Job::Reorder(ReorderJob {
            input: absolute(&a.input)?,
            seed: cfg.pick(a.seed, "reorder", "seed", 0)?,
            out: out_or(&a.out, format!("{}.vra.edges", stem(&a.input)))?,
            trace: out_opt(&a.trace)?,
        }),
        Command::Render(a) => Job::Render(RenderJob {
            input: absolute(&a.input)?,
            pad: cfg.pick_opt(a.pad, "render", "pad")?,
            out: out_or(&a.out, format!("{}.pgm", stem(&a.input)))?,
        }),
        Command::Dataset(a) => {
            let (config, vra, jobs) = data_config(&a.data, cfg, "dataset")?;
            let seed = cfg.pick(a.seed, "dataset", "seed", 0)?;
            let suffix = if vra { "" } else { "_novra" };
            let name = format!("dataset_{}_{seed}{suffix}", config.n);
            Job::Dataset(DatasetJob { config, vra, seed, jobs, out: out_or(&a.out, name)? })
        }
        Command::Train(a) => {
            let s = "train";
            let seed = cfg.pick(a.seed, s, "seed", 0)?;
            let d = Hyperparameters::default();
            let hyper = Hyperparameters {
                epochs: cfg.pick(a.epochs, s, "epochs", d.epochs)?,
                batch_size: cfg.pick(a.batch_size, s, "batch_size", d.batch_size)?,
                learning_rate: cfg.pick(a.learning_rate, s, "learning_rate", d.learning_rate)?,
                momentum: cfg.pick(a.momentum, s, "momentum", d.momentum)?,
                decay_every: cfg.pick(a.decay_every, s, "decay_every", d.decay_every)?,
                decay_factor: cfg.pick(a.decay_factor, s, "decay_factor", d.decay_factor)?,
            };
            let (data, name) = match cfg.pick_opt(a.data.clone(), s, "data")? {
                Some(dir) => {
                    let name = format!("model_{}.bin", stem(&dir));
                    (DataSpec::Dir(absolute(&dir)?), name)
                }
                None => {
                    let (config, vra, jobs) = data_config(&a.build, cfg, s)?;
                    let suffix = if vra { "" } else { "_novra" };
                    let name = format!("model_{}_{seed}{suffix}.bin", config.side);
                    (DataSpec::Build { config, vra, seed, jobs }, name)
                }
            };
            Job::Train(TrainJob { data, hyper, seed, out: out_or(&a.out, name)? })
        }
        Command::Eval(a) => Job::Eval(EvalJob {
            models: a.models.iter().map(|p| absolute(p)).collect::<Result<_>>()?,
            data: a.data.as_deref().map(absolute).transpose()?,
            jobs: cfg.pick(a.jobs, "eval", "jobs", default_jobs())?.max(1),
            out: out_opt(&a.out)?,
        }),
        Command::Describe(a) => Job::Describe(DescribeJob {
            input: absolute(&a.input)?,
            model: absolute(&a.model)?,
            seed: cfg.pick(a.seed, "describe", "seed", 0)?,
            name: a.name.clone().unwrap_or_else(|| stem(&a.input)),
            out: out_opt(&a.out)?,
        }),
        Command::Mim(a) => Job::Mim(MimJob { k: a.k, abbreviate: a.abbreviate, out: out_opt(&a.out)? }),
        Command::Replay(_) => unreachable!("replay is not a job"),
    })
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print(json_mode: bool, text: &str, json: serde_json::Value) {
    use std::io::Write as _;
    let body = if json_mode {
        serde_json::to_string_pretty(&json).expect("serializable")
    } else {
        text.to_string()
    };
    if !body.is_empty() {
        let _ = writeln!(std::io::stdout().lock(), "{body}");
    }
}

fn replay(path: &Path, json_mode: bool) -> Result<bool> {
    let manifest = RunManifest::read(path)?;
    if manifest.tool != "ambnet" {
        bail!("{} was not written by ambnet", path.display());
    }
    let job = Job::from_manifest(&manifest)?;
    for input in &manifest.inputs {
        let now = digest_path(&input.path)?;
        if now != input.sha256 {
            bail!("input {} changed since the recorded run", input.path.display());
        }
    }
    let nonce = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos());
    let scratch = std::env::temp_dir().join(format!("ambnet-replay-{}-{nonce}", std::process::id()));
    std::fs::create_dir_all(&scratch)?;
    let result = (|| {
        let outcome = job.redirect_outputs(&scratch).run()?;
        if outcome.outputs.len() != manifest.outputs.len() {
            bail!("replay produced {} outputs, manifest lists {}", outcome.outputs.len(), manifest.outputs.len());
        }
        let mut checks = Vec::new();
        for ((role, new_path), recorded) in outcome.outputs.iter().zip(&manifest.outputs) {
            let digest = digest_path(new_path)?;
            checks.push(json!({
                "role": role,
                "path": recorded.path,
                "recorded": recorded.sha256,
                "replayed": digest,
                "identical": digest == recorded.sha256,
            }));
        }
        Ok(checks)
    })();
    let _ = std::fs::remove_dir_all(&scratch);
    let checks = result?;
    let ok = checks.iter().all(|c| c["identical"] == true);
    let mut text = String::new();
    for c in &checks {
        let status = if c["identical"] == true { "identical" } else { "DIFFERS" };
        text.push_str(&format!("{} {}: {status}\n", c["role"].as_str().unwrap_or(""), c["path"].as_str().unwrap_or("")));
    }
    text.push_str(if ok { "replay ok" } else { "replay FAILED" });
    print(json_mode, &text, json!({ "command": manifest.command, "outputs": checks, "ok": ok }));
    Ok(ok)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Command::Replay(a) = &cli.command {
        return replay(&a.manifest, cli.json);
    }
    let cfg = Config::load(cli.config.as_deref())?;
    let job = resolve(cli, &cfg)?;
    let (outcome, manifest) = job.run_recorded()?;
    let mut json = outcome.json;
    let mut text = outcome.text;
    if let Some(m) = manifest {
        if let Some(obj) = json.as_object_mut() {
            obj.insert("manifest".into(), json!(m));
        }
        text.push_str(&format!("\nmanifest: {}", m.display()));
    }
    print(cli.json, &text, json);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
