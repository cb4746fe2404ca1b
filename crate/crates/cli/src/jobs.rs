//! Fully resolved commands. A job is what a manifest records and what
//! `replay` runs again.

use std::path::{Path, PathBuf};

use ambnet::amb::{decode, encode};
use ambnet::classifier::{
    build_dataset_jobs, evaluate, format_table, load_model, save_model, train, ClassifierModel,
    DatasetConfig, EvalReport, Hyperparameters, LabeledDataset,
};
use ambnet::manifest::RunManifest;
use ambnet::mixture::describe_detailed;
use ambnet::{pad_center, read_edge_list, render, smim_decompose, vra_order, write_edge_list, GenParams, Graph};
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::datadir;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "lowercase")]
pub enum Job {
    Generate(GenerateJob),
    Reorder(ReorderJob),
    Render(RenderJob),
    Dataset(DatasetJob),
    Train(TrainJob),
    Eval(EvalJob),
    Describe(DescribeJob),
    Mim(MimJob),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateJob {
    pub params: GenParams,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReorderJob {
    pub input: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderJob {
    pub input: PathBuf,
    pub pad: Option<usize>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetJob {
    pub config: DatasetConfig,
    pub vra: bool,
    pub seed: u64,
    /// Worker threads; does not affect the output.
    pub jobs: usize,
    pub out: PathBuf,
}

/// Where training data comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSpec {
    /// A directory written by `dataset`.
    Dir(PathBuf),
    /// Built in memory.
    Build { config: DatasetConfig, vra: bool, seed: u64, jobs: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainJob {
    pub data: DataSpec,
    pub hyper: Hyperparameters,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalJob {
    pub models: Vec<PathBuf>,
    /// Test split source; without it each model is evaluated on the test
    /// split of the dataset it was trained on.
    pub data: Option<PathBuf>,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescribeJob {
    pub input: PathBuf,
    pub model: PathBuf,
    pub seed: u64,
    pub name: String,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MimJob {
    pub k: usize,
    pub abbreviate: bool,
    pub out: Option<PathBuf>,
}

/// What a run produced: files by role, plus what to print.
pub struct Outcome {
    pub inputs: Vec<(&'static str, PathBuf)>,
    pub outputs: Vec<(&'static str, PathBuf)>,
    pub text: String,
    pub json: serde_json::Value,
}

impl Outcome {
    fn new(text: String, json: serde_json::Value) -> Self {
        Self { inputs: Vec::new(), outputs: Vec::new(), text, json }
    }
}

/// `<path>.manifest.json`, next to the primary output.
pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Writes a graph and checks that it reads back unchanged.
fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    write_file(path, write_edge_list(g).as_bytes())?;
    if read_graph(path)? != *g {
        bail!("{} did not read back as written", path.display());
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_file(path, text.as_bytes())?;
    serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(path)?)
        .with_context(|| format!("{} is not valid JSON after writing", path.display()))?;
    Ok(())
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Generate(_) => "generate",
            Job::Reorder(_) => "reorder",
            Job::Render(_) => "render",
            Job::Dataset(_) => "dataset",
            Job::Train(_) => "train",
            Job::Eval(_) => "eval",
            Job::Describe(_) => "describe",
            Job::Mim(_) => "mim",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Generate(j) => j.params.seed,
            Job::Reorder(j) => Some(j.seed),
            Job::Dataset(j) => Some(j.seed),
            Job::Train(j) => Some(j.seed),
            Job::Describe(j) => Some(j.seed),
            Job::Render(_) | Job::Eval(_) | Job::Mim(_) => None,
        }
    }

    /// The file the manifest sits next to; `None` when output goes to stdout only.
    pub fn primary_output(&self) -> Option<&Path> {
        match self {
            Job::Generate(j) => Some(&j.out),
            Job::Reorder(j) => Some(&j.out),
            Job::Render(j) => Some(&j.out),
            Job::Dataset(j) => Some(&j.out),
            Job::Train(j) => Some(&j.out),
            Job::Eval(j) => j.out.as_deref(),
            Job::Describe(j) => j.out.as_deref(),
            Job::Mim(j) => j.out.as_deref(),
        }
    }

    /// Same job with every output moved into `dir`, keeping file names.
    pub fn redirect_outputs(&self, dir: &Path) -> Job {
        let move_to = |p: &PathBuf| dir.join(p.file_name().unwrap_or_default());
        let move_opt = |p: &Option<PathBuf>| p.as_ref().map(move_to);
        let mut job = self.clone();
        match &mut job {
            Job::Generate(j) => j.out = move_to(&j.out),
            Job::Reorder(j) => {
                j.out = move_to(&j.out);
                j.trace = move_opt(&j.trace);
            }
            Job::Render(j) => j.out = move_to(&j.out),
            Job::Dataset(j) => j.out = move_to(&j.out),
            Job::Train(j) => j.out = move_to(&j.out),
            Job::Eval(j) => j.out = move_opt(&j.out),
            Job::Describe(j) => j.out = move_opt(&j.out),
            Job::Mim(j) => j.out = move_opt(&j.out),
        }
        job
    }

    pub fn run(&self) -> Result<Outcome> {
        match self {
            Job::Generate(j) => j.run(),
            Job::Reorder(j) => j.run(),
            Job::Render(j) => j.run(),
            Job::Dataset(j) => j.run(),
            Job::Train(j) => j.run(),
            Job::Eval(j) => j.run(),
            Job::Describe(j) => j.run(),
            Job::Mim(j) => j.run(),
        }
    }

    /// Runs the job and, when it wrote a primary output, its manifest.
    pub fn run_recorded(&self) -> Result<(Outcome, Option<PathBuf>)> {
        let outcome = self.run()?;
        let Some(primary) = self.primary_output() else {
            return Ok((outcome, None));
        };
        let params = serde_json::to_value(self)?
            .get("params")
            .cloned()
            .ok_or_else(|| anyhow!("job has no parameters"))?;
        let mut manifest = RunManifest::new(self.name(), params, self.seed());
        for (role, path) in &outcome.inputs {
            manifest.add_input(role, path)?;
        }
        for (role, path) in &outcome.outputs {
            manifest.add_output(role, path)?;
        }
        let path = manifest_path(primary);
        manifest.write(&path)?;
        Ok((outcome, Some(path)))
    }

    pub fn from_manifest(m: &RunManifest) -> Result<Job> {
        serde_json::from_value(json!({ "command": m.command, "params": m.params }))
            .with_context(|| format!("manifest parameters do not describe a `{}` run", m.command))
    }
}

impl GenerateJob {
    fn run(&self) -> Result<Outcome> {
        let g = self.params.generate()?;
        write_graph(&self.out, &g)?;
        let mut o = Outcome::new(
            format!("wrote {} ({} vertices, {} edges)", self.out.display(), g.n(), g.edge_count()),
            json!({ "output": self.out, "params": self.params, "n": g.n(), "edges": g.edge_count() }),
        );
        o.outputs.push(("edges", self.out.clone()));
        Ok(o)
    }
}

impl ReorderJob {
    fn run(&self) -> Result<Outcome> {
        let g = read_graph(&self.input)?;
        let trace = vra_order(&g, self.seed);
        let reordered = ambnet::apply_order(&g, &trace.r#final)?;
        write_graph(&self.out, &reordered)?;
        let mut o = Outcome::new(
            format!("wrote {} ({} vertices, {} degree classes)", self.out.display(), g.n(), trace.degree_classes.len()),
            json!({ "output": self.out, "trace": trace }),
        );
        o.inputs.push(("edges", self.input.clone()));
        o.outputs.push(("edges", self.out.clone()));
        if let Some(t) = &self.trace {
            write_json(t, &trace)?;
            o.outputs.push(("trace", t.clone()));
        }
        Ok(o)
    }
}

impl RenderJob {
    fn run(&self) -> Result<Outcome> {
        let g = read_graph(&self.input)?;
        let mut img = render(&g);
        if let Some(side) = self.pad {
            img = pad_center(&img, side)?;
        }
        let bytes = encode(&img);
        write_file(&self.out, &bytes)?;
        if decode(&std::fs::read(&self.out)?)? != img {
            bail!("{} did not decode to the rendered image", self.out.display());
        }
        let side = img.side();
        let mut o = Outcome::new(
            format!("wrote {} ({side}x{side}, {} white pixels)", self.out.display(), img.white_count()),
            json!({ "output": self.out, "side": side, "white": img.white_count() }),
        );
        o.inputs.push(("edges", self.input.clone()));
        o.outputs.push(("image", self.out.clone()));
        Ok(o)
    }
}

impl DatasetJob {
    fn run(&self) -> Result<Outcome> {
        let ds = build_dataset_jobs(&self.config, self.vra, self.seed, self.jobs)?;
        datadir::write(&ds, &self.out)?;
        let check = datadir::read(&self.out)?;
        if check != ds {
            bail!("dataset in {} did not read back as written", self.out.display());
        }
        let mut o = Outcome::new(
            format!(
                "wrote {} ({} train + {} test images, side {}, VRA {})",
                self.out.display(),
                ds.train.len(),
                ds.test.len(),
                self.config.side,
                if self.vra { "on" } else { "off" }
            ),
            json!({ "output": self.out, "train": ds.train.len(), "test": ds.test.len(), "config": self.config, "vra": self.vra }),
        );
        o.outputs.push(("dataset", self.out.clone()));
        Ok(o)
    }
}

impl DataSpec {
    fn load(&self) -> Result<LabeledDataset> {
        match self {
            DataSpec::Dir(dir) => datadir::read(dir),
            DataSpec::Build { config, vra, seed, jobs } => Ok(build_dataset_jobs(config, *vra, *seed, *jobs)?),
        }
    }
}

impl TrainJob {
    fn run(&self) -> Result<Outcome> {
        let ds = self.data.load()?;
        let model = train(&ds, &self.hyper, self.seed)?;
        save_model(&model, &self.out)?;
        if load_model(&self.out)? != model {
            bail!("{} did not load back as saved", self.out.display());
        }
        let meta = model.meta.as_ref().expect("trained models carry metadata");
        let final_loss = meta.loss_curve.last().copied().unwrap_or(meta.initial_loss);
        let mut o = Outcome::new(
            format!(
                "wrote {} (side {}, {} epochs, loss {:.4} -> {:.4})",
                self.out.display(),
                model.input_side(),
                meta.epochs,
                meta.initial_loss,
                final_loss
            ),
            json!({ "output": self.out, "arch": model.arch, "meta": meta }),
        );
        if let DataSpec::Dir(dir) = &self.data {
            o.inputs.push(("dataset", dir.clone()));
        }
        o.outputs.push(("model", self.out.clone()));
        Ok(o)
    }
}

#[derive(Serialize)]
struct ModelReport {
    model: String,
    vra: Option<bool>,
    report: EvalReport,
}

/// Test split a model was trained against, rebuilt from its metadata.
fn own_test_split(model: &ClassifierModel, jobs: usize) -> Result<LabeledDataset> {
    let source = model
        .meta
        .as_ref()
        .and_then(|m| m.dataset.as_ref())
        .ok_or_else(|| anyhow!("model does not record its dataset; pass --data"))?;
    let config = DatasetConfig { train_per_class: 0, ..source.config.clone() };
    Ok(build_dataset_jobs(&config, source.vra, source.seed, jobs)?)
}

impl EvalJob {
    fn run(&self) -> Result<Outcome> {
        if self.models.is_empty() {
            bail!("no model given");
        }
        let shared = self.data.as_deref().map(datadir::read).transpose()?;
        let mut text = String::new();
        let mut reports = Vec::new();
        let mut o = Outcome::new(String::new(), json!(null));
        if let Some(dir) = &self.data {
            o.inputs.push(("dataset", dir.clone()));
        }
        for path in &self.models {
            let model = load_model(path).with_context(|| format!("loading {}", path.display()))?;
            o.inputs.push(("model", path.clone()));
            let own;
            let test = match &shared {
                Some(ds) => &ds.test,
                None => {
                    own = own_test_split(&model, self.jobs)
                        .with_context(|| format!("model {}", path.display()))?;
                    &own.test
                }
            };
            let report = evaluate(&model, test)?;
            let vra = model.meta.as_ref().and_then(|m| m.vra);
            let title = match vra {
                Some(true) => format!("Precision and recall with VRA ({})", file_label(path)),
                Some(false) => format!("Precision and recall without VRA ({})", file_label(path)),
                None => format!("Precision and recall ({})", file_label(path)),
            };
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&format_table(&report, &title));
            reports.push(ModelReport { model: file_label(path), vra, report });
        }
        let json = json!({ "reports": reports });
        if let Some(out) = &self.out {
            write_json(out, &json)?;
            o.outputs.push(("report", out.clone()));
        }
        o.text = text.trim_end().to_string();
        o.json = json;
        Ok(o)
    }
}

impl DescribeJob {
    fn run(&self) -> Result<Outcome> {
        let g = read_graph(&self.input)?;
        let model = load_model(&self.model).with_context(|| format!("loading {}", self.model.display()))?;
        let d = describe_detailed(&model, &g, self.seed)?;
        let equation = d.mixture.format_equation(&self.name);
        let mut text = String::new();
        for (i, c) in d.communities.iter().enumerate() {
            text.push_str(&format!("community {i}: {} vertices, {}\n", c.vertices.len(), c.label));
        }
        text.push_str(&format!("whole network: {}\n{equation}", d.whole));
        let json = json!({ "name": self.name, "description": d, "equation": equation });
        let mut o = Outcome::new(text, json.clone());
        o.inputs.push(("edges", self.input.clone()));
        o.inputs.push(("model", self.model.clone()));
        if let Some(out) = &self.out {
            write_json(out, &json)?;
            o.outputs.push(("description", out.clone()));
        }
        Ok(o)
    }
}

impl MimJob {
    fn run(&self) -> Result<Outcome> {
        let t = smim_decompose(self.k)?;
        let notation = t.to_notation(self.abbreviate);
        let text = format!("M({}) = {notation}", self.k);
        let mut o = Outcome::new(
            text.clone(),
            json!({ "k": self.k, "tree": notation, "arity": t.arity(), "depth": t.depth() }),
        );
        if let Some(out) = &self.out {
            write_file(out, format!("{text}\n").as_bytes())?;
            o.outputs.push(("tree", out.clone()));
        }
        Ok(o)
    }
}
