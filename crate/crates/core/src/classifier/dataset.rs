use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::amb::{pad_center, render, AmbImage};
use crate::generators::{FamilyLabel, GenParams};
use crate::graph::{apply_order, VertexOrder};
use crate::rng::{derive_seed, rng_from_seed};
use crate::vra::vra_apply;

/// Inclusive parameter ranges sampled per generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub er_m: (usize, usize),
    /// Even values only are drawn.
    pub ncn_k: (usize, usize),
    pub ws_k: (usize, usize),
    pub ws_p: (f64, f64),
    pub ba_m: (usize, usize),
}

impl ParamRanges {
    /// ER `m ∈ [n, 5n]`, NCN/WS `k ∈ {4, 6, …, 20}`, WS `p ∈ [0.05, 0.3]`,
    /// BA `m ∈ {2, …, 8}`.
    pub fn standard(n: usize) -> Self {
        Self {
            er_m: (n, 5 * n),
            ncn_k: (4, 20),
            ws_k: (4, 20),
            ws_p: (0.05, 0.3),
            ba_m: (2, 8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Vertex count of every generated graph.
    pub n: usize,
    /// Image side after centered black padding; at least `n`.
    pub side: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub ranges: ParamRanges,
    /// Give every generated graph a seeded uniformly random vertex numbering
    /// before anything else sees it, so indices carry no trace of how the
    /// generator built the graph.
    #[serde(default)]
    pub relabel: bool,
}

impl DatasetConfig {
    /// 200 training and 100 test graphs per class, randomly relabeled.
    pub fn desk_scale(n: usize) -> Self {
        Self {
            n,
            side: n,
            train_per_class: 200,
            test_per_class: 100,
            ranges: ParamRanges::standard(n),
            relabel: true,
        }
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let fail = |msg: String| Err(ClassifierError::Config(msg));
        let r = &self.ranges;
        let n = self.n;
        if self.side < n {
            return fail(format!("image side {} smaller than n = {n}", self.side));
        }
        if r.er_m.0 > r.er_m.1 || r.er_m.1 > n * n.saturating_sub(1) / 2 {
            return fail(format!("ER m range {:?} infeasible for n = {n}", r.er_m));
        }
        for (name, (lo, hi)) in [("NCN", r.ncn_k), ("WS", r.ws_k)] {
            let has_even = (lo.max(2)..=hi).any(|k| k % 2 == 0);
            if lo > hi || !has_even || hi >= n {
                return fail(format!("{name} k range {:?} infeasible for n = {n}", (lo, hi)));
            }
        }
        let (plo, phi) = r.ws_p;
        if !(0.0..=1.0).contains(&plo) || !(0.0..=1.0).contains(&phi) || plo > phi {
            return fail(format!("WS p range {:?} outside [0, 1]", r.ws_p));
        }
        if r.ba_m.0 == 0 || r.ba_m.0 > r.ba_m.1 || r.ba_m.1 >= n {
            return fail(format!("BA m range {:?} infeasible for n = {n}", r.ba_m));
        }
        Ok(())
    }

    /// Draws a parameter tuple for `family`; the graph seed is taken from `rng` too.
    fn sample(&self, family: FamilyLabel, rng: &mut crate::rng::Rng) -> GenParams {
        let r = &self.ranges;
        let n = self.n;
        let even = |rng: &mut crate::rng::Rng, (lo, hi): (usize, usize)| {
            let lo = lo.max(2).div_ceil(2);
            2 * rng.random_range(lo..=hi / 2)
        };
        let seed = rng.random();
        match family {
            FamilyLabel::ER => GenParams::er(n, rng.random_range(r.er_m.0..=r.er_m.1), seed),
            FamilyLabel::NCN => GenParams::ncn(n, even(rng, r.ncn_k)),
            FamilyLabel::WS => {
                let k = even(rng, r.ws_k);
                let p = if r.ws_p.0 == r.ws_p.1 {
                    r.ws_p.0
                } else {
                    rng.random_range(r.ws_p.0..=r.ws_p.1)
                };
                GenParams::ws(n, k, p, seed)
            }
            FamilyLabel::BA => GenParams::ba(n, rng.random_range(r.ba_m.0..=r.ba_m.1), seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub image: AmbImage,
    pub label: FamilyLabel,
    pub params: GenParams,
    pub vra_applied: bool,
    pub relabeled: bool,
    /// Seed this item was derived from; also names its image file.
    pub item_seed: u64,
}

/// How a dataset was built, enough to build it again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSource {
    pub config: DatasetConfig,
    pub vra: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub train: Vec<DatasetItem>,
    pub test: Vec<DatasetItem>,
    pub source: Option<DatasetSource>,
}

/// Builds both splits. Item `i` of class `c` in split `s` draws everything
/// from `derive_seed(seed, "<s>/<c>", i)`, so the same `seed` yields the same
/// graphs with and without VRA. Items are interleaved by class.
pub fn build_dataset(
    cfg: &DatasetConfig,
    vra: bool,
    seed: u64,
) -> Result<LabeledDataset, ClassifierError> {
    build_dataset_jobs(cfg, vra, seed, 1)
}

/// [`build_dataset`] on `jobs` worker threads; the result does not depend on `jobs`.
pub fn build_dataset_jobs(
    cfg: &DatasetConfig,
    vra: bool,
    seed: u64,
    jobs: usize,
) -> Result<LabeledDataset, ClassifierError> {
    cfg.validate()?;
    let tasks = |name: &'static str, per_class: usize| {
        (0..per_class).flat_map(move |i| {
            FamilyLabel::ALL
                .into_iter()
                .map(move |family| (family, derive_seed(seed, &format!("{name}/{family}"), i as u64)))
        })
    };
    let all: Vec<(FamilyLabel, u64)> = tasks("train", cfg.train_per_class)
        .chain(tasks("test", cfg.test_per_class))
        .collect();
    let chunk = all.len().div_ceil(jobs.max(1)).max(1);
    let results: Vec<Result<Vec<DatasetItem>, ClassifierError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = all
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(family, item_seed)| make_item(cfg, family, vra, item_seed))
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("dataset worker panicked")).collect()
    });
    let mut items = Vec::with_capacity(all.len());
    for r in results {
        items.extend(r?);
    }
    let test = items.split_off(cfg.train_per_class * FamilyLabel::ALL.len());
    Ok(LabeledDataset {
        train: items,
        test,
        source: Some(DatasetSource { config: cfg.clone(), vra, seed }),
    })
}

fn make_item(
    cfg: &DatasetConfig,
    family: FamilyLabel,
    vra: bool,
    item_seed: u64,
) -> Result<DatasetItem, ClassifierError> {
    let mut rng = rng_from_seed(item_seed);
    let params = cfg.sample(family, &mut rng);
    let mut graph = params
        .generate()
        .map_err(|e| ClassifierError::Config(e.to_string()))?;
    if cfg.relabel {
        let order = VertexOrder::random(graph.n(), derive_seed(item_seed, "relabel", 0));
        graph = apply_order(&graph, &order).expect("order matches graph");
    }
    if vra {
        graph = vra_apply(&graph, derive_seed(item_seed, "vra", 0));
    }
    let image = pad_center(&render(&graph), cfg.side)
        .map_err(|e| ClassifierError::Config(e.to_string()))?;
    Ok(DatasetItem {
        image,
        label: family,
        params,
        vra_applied: vra,
        relabeled: cfg.relabel,
        item_seed,
    })
}
