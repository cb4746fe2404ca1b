//! Datasets on disk: one PGM per item plus `index.json`.

use std::path::Path;

use ambnet::amb::{decode, encode};
use ambnet::classifier::{DatasetItem, DatasetSource, LabeledDataset};
use ambnet::{FamilyLabel, GenParams};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const INDEX: &str = "index.json";

#[derive(Serialize, Deserialize)]
struct Index {
    source: Option<DatasetSource>,
    items: Vec<IndexEntry>,
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    split: String,
    file: String,
    label: FamilyLabel,
    params: GenParams,
    vra_applied: bool,
    #[serde(default)]
    relabeled: bool,
    item_seed: u64,
}

pub fn item_file_name(item: &DatasetItem) -> String {
    format!(
        "{}_{}_{}.pgm",
        item.label.as_str().to_lowercase(),
        item.params.n,
        item.item_seed
    )
}

/// Writes `ds` into `dir`, which must be empty or absent.
pub fn write(ds: &LabeledDataset, dir: &Path) -> Result<()> {
    if dir.exists() && std::fs::read_dir(dir)?.next().is_some() {
        bail!("dataset directory {} is not empty", dir.display());
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut items = Vec::with_capacity(ds.train.len() + ds.test.len());
    for (split, part) in [("train", &ds.train), ("test", &ds.test)] {
        for item in part {
            let file = item_file_name(item);
            std::fs::write(dir.join(&file), encode(&item.image))
                .with_context(|| format!("writing {file}"))?;
            items.push(IndexEntry {
                split: split.into(),
                file,
                label: item.label,
                params: item.params.clone(),
                vra_applied: item.vra_applied,
                relabeled: item.relabeled,
                item_seed: item.item_seed,
            });
        }
    }
    let index = Index { source: ds.source.clone(), items };
    let json = serde_json::to_string_pretty(&index)? + "\n";
    std::fs::write(dir.join(INDEX), json).context("writing dataset index")?;
    Ok(())
}

pub fn read(dir: &Path) -> Result<LabeledDataset> {
    let index_path = dir.join(INDEX);
    let text = std::fs::read_to_string(&index_path)
        .with_context(|| format!("reading {}", index_path.display()))?;
    let index: Index = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", index_path.display()))?;
    let mut ds = LabeledDataset { source: index.source, ..LabeledDataset::default() };
    for e in index.items {
        let path = dir.join(&e.file);
        let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let image = decode(&bytes).with_context(|| format!("decoding {}", path.display()))?;
        let item = DatasetItem {
            image,
            label: e.label,
            params: e.params,
            vra_applied: e.vra_applied,
            relabeled: e.relabeled,
            item_seed: e.item_seed,
        };
        match e.split.as_str() {
            "train" => ds.train.push(item),
            "test" => ds.test.push(item),
            other => bail!("{}: unknown split {other:?}", e.file),
        }
    }
    Ok(ds)
}
