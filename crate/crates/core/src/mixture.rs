//! Mixture descriptions: a network as a weighted combination of families.
//!
//! The whole network is classified once at weight 0.5 and each detected
//! community `c_i` at weight `0.5 · |c_i| / n`, so the weights always form a
//! distribution over family labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amb::{pad_center, render};
use crate::classifier::{ClassifierError, ClassifierModel};
use crate::generators::FamilyLabel;
use crate::graph::Graph;
use crate::rng::derive_seed;
use crate::vra::vra_apply;

#[derive(Debug, Error)]
pub enum MixtureError {
    #[error("network with {n} vertices does not fit the model input side {side}; train a model with side >= {n}")]
    TooLarge { n: usize, side: usize },
    #[error("cannot describe a network without vertices")]
    EmptyGraph,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Disjoint, non-empty vertex sets covering `0..n`, each sorted, ordered by
/// smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub communities: Vec<Vec<usize>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }
}

/// Newman modularity of a partition.
pub fn modularity(g: &Graph, partition: &Partition) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for c in &partition.communities {
        let inside = c
            .iter()
            .enumerate()
            .flat_map(|(i, &u)| c[i + 1..].iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| g.has_edge(u, v))
            .count() as f64;
        let degree_sum: f64 = c.iter().map(|&u| g.degree(u) as f64).sum();
        q += inside / m - (degree_sum / (2.0 * m)).powi(2);
    }
    q
}

/// Greedy agglomerative modularity maximization.
///
/// Starts from singletons and repeatedly merges the connected pair of
/// communities with the largest modularity gain until no merge has a
/// positive gain. For communities `a, b` with `w` edges between them and
/// degree sums `da, db`, the gain is `(2m·w − da·db) / (2m²)`; the integer
/// numerator is compared directly, ties going to the lexicographically
/// smallest `(a, b)` community ids. The result does not depend on `seed`.
pub fn detect_communities(g: &Graph, _seed: u64) -> Partition {
    let n = g.n();
    let two_m = 2 * g.edge_count() as i128;
    // Community id = smallest member vertex.
    let mut members: BTreeMap<usize, Vec<usize>> = (0..n).map(|v| (v, vec![v])).collect();
    let mut degree_sum: HashMap<usize, i128> = (0..n).map(|v| (v, g.degree(v) as i128)).collect();
    let mut links: BTreeMap<usize, BTreeMap<usize, i128>> = BTreeMap::new();
    for (u, v) in g.edges() {
        links.entry(u).or_default().insert(v, 1);
        links.entry(v).or_default().insert(u, 1);
    }

    loop {
        let mut best: Option<(i128, usize, usize)> = None;
        for (&a, row) in &links {
            for (&b, &w) in row.range(a + 1..) {
                let gain = two_m * w - degree_sum[&a] * degree_sum[&b];
                if best.is_none_or(|(bg, _, _)| gain > bg) {
                    best = Some((gain, a, b));
                }
            }
        }
        let Some((gain, keep, gone)) = best else { break };
        if gain <= 0 {
            break;
        }
        // Merge `gone` into `keep` (keep < gone, so keep stays the smallest member).
        let moved = members.remove(&gone).expect("community exists");
        members.get_mut(&keep).expect("community exists").extend(moved);
        let d = degree_sum.remove(&gone).expect("community exists");
        *degree_sum.get_mut(&keep).expect("community exists") += d;
        let gone_row = links.remove(&gone).unwrap_or_default();
        for (other, w) in gone_row {
            let other_row = links.get_mut(&other).expect("symmetric links");
            other_row.remove(&gone);
            if other == keep {
                continue;
            }
            *other_row.entry(keep).or_default() += w;
            *links.entry(keep).or_default().entry(other).or_default() += w;
        }
        if links.get(&keep).is_some_and(BTreeMap::is_empty) {
            links.remove(&keep);
        }
    }

    let communities = members
        .into_values()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    Partition { communities }
}

/// Classifies one (sub)network: VRA, render, center-pad to the model side, argmax.
pub fn classify_subnetwork(
    model: &ClassifierModel,
    g: &Graph,
    seed: u64,
) -> Result<FamilyLabel, MixtureError> {
    let side = model.input_side();
    if g.n() > side {
        return Err(MixtureError::TooLarge { n: g.n(), side });
    }
    let img = pad_center(&render(&vra_apply(g, seed)), side).expect("n <= side");
    Ok(model.predict_label(&img)?)
}

/// Weights per family; labels with zero weight are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDescription {
    pub weights: BTreeMap<FamilyLabel, f64>,
}

impl MixtureDescription {
    /// `0.5 · onehot(whole) + 0.5 · Σ (size_i / n) · onehot(label_i)` where
    /// `n` is the total size of the parts.
    pub fn combine(whole: FamilyLabel, parts: &[(FamilyLabel, usize)]) -> Self {
        let n: usize = parts.iter().map(|&(_, s)| s).sum();
        let mut weights = BTreeMap::new();
        *weights.entry(whole).or_insert(0.0) += 0.5;
        if n == 0 {
            *weights.entry(whole).or_insert(0.0) += 0.5;
        }
        for &(label, size) in parts {
            if size > 0 {
                *weights.entry(label).or_insert(0.0) += 0.5 * size as f64 / n as f64;
            }
        }
        Self { weights }
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn weight(&self, label: FamilyLabel) -> f64 {
        self.weights.get(&label).copied().unwrap_or(0.0)
    }

    /// Terms by descending weight (ties in label order), e.g.
    /// `D(Zachary) = 0.50 BA + 0.43 WS + 0.07 NCN`.
    pub fn format_equation(&self, name: &str) -> String {
        let mut terms: Vec<(FamilyLabel, f64)> =
            self.weights.iter().map(|(&l, &w)| (l, w)).collect();
        terms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut out = format!("D({name}) = ");
        for (i, (label, w)) in terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let _ = write!(out, "{w:.2} {label}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityLabel {
    pub vertices: Vec<usize>,
    pub label: FamilyLabel,
}

/// Everything `describe` computes on the way to the mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub whole: FamilyLabel,
    pub communities: Vec<CommunityLabel>,
    pub mixture: MixtureDescription,
}

pub fn describe_detailed(
    model: &ClassifierModel,
    g: &Graph,
    seed: u64,
) -> Result<Description, MixtureError> {
    if g.n() == 0 {
        return Err(MixtureError::EmptyGraph);
    }
    let whole = classify_subnetwork(model, g, derive_seed(seed, "whole", 0))?;
    let partition = detect_communities(g, derive_seed(seed, "communities", 0));
    let communities = partition
        .communities
        .into_iter()
        .enumerate()
        .map(|(i, vertices)| {
            let sub = g.induced(&vertices);
            let label = classify_subnetwork(model, &sub, derive_seed(seed, "community", i as u64))?;
            Ok(CommunityLabel { vertices, label })
        })
        .collect::<Result<Vec<_>, MixtureError>>()?;
    let parts: Vec<(FamilyLabel, usize)> =
        communities.iter().map(|c| (c.label, c.vertices.len())).collect();
    Ok(Description {
        whole,
        mixture: MixtureDescription::combine(whole, &parts),
        communities,
    })
}

pub fn describe(
    model: &ClassifierModel,
    g: &Graph,
    seed: u64,
) -> Result<MixtureDescription, MixtureError> {
    describe_detailed(model, g, seed).map(|d| d.mixture)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Architecture;
    use FamilyLabel::*;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    /// All set partitions of `0..n` (restricted growth strings).
    fn all_partitions(n: usize) -> Vec<Partition> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if i == n {
                let k = cur.iter().max().map_or(0, |m| m + 1);
                let mut communities = vec![Vec::new(); k];
                for (v, &b) in cur.iter().enumerate() {
                    communities[b].push(v);
                }
                out.push(Partition { communities });
                return;
            }
            let k = cur.iter().max().map_or(0, |m| m + 1);
            for b in 0..=k {
                cur.push(b);
                rec(i + 1, n, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn two_triangles_match_brute_force_optimum() {
        let g = two_triangles();
        let parts = all_partitions(6);
        assert_eq!(parts.len(), 203);
        let best = parts
            .iter()
            .max_by(|a, b| modularity(&g, a).total_cmp(&modularity(&g, b)))
            .unwrap();
        let found = detect_communities(&g, 0);
        assert_eq!(&found, best);
        assert_eq!(found.communities, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!((modularity(&g, &found) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_is_one_community() {
        for n in [2, 3, 7] {
            let p = detect_communities(&Graph::complete(n), 1);
            assert_eq!(p.communities, vec![(0..n).collect::<Vec<_>>()]);
        }
    }

    #[test]
    fn edgeless_and_isolated_vertices_stay_singletons() {
        let p = detect_communities(&Graph::empty(3), 0);
        assert_eq!(p.communities, vec![vec![0], vec![1], vec![2]]);
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        let p = detect_communities(&g, 0);
        assert_eq!(p.communities, vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn combine_examples() {
        let d = MixtureDescription::combine(A, &[(A, 5), (B, 5)]);
        assert_eq!(d.weight(A), 0.75);
        assert_eq!(d.weight(B), 0.25);
        let single = MixtureDescription::combine(WS, &[(WS, 9)]);
        assert_eq!(single.weights, BTreeMap::from([(WS, 1.0)]));
        assert_eq!(MixtureDescription::combine(BA, &[]).total(), 1.0);
    }

    const A: FamilyLabel = ER;
    const B: FamilyLabel = NCN;

    #[test]
    fn equation_format() {
        let d = MixtureDescription {
            weights: BTreeMap::from([(NCN, 0.07), (WS, 0.43), (BA, 0.5)]),
        };
        assert_eq!(d.format_equation("Zachary"), "D(Zachary) = 0.50 BA + 0.43 WS + 0.07 NCN");
    }

    #[test]
    fn oversized_network_is_rejected() {
        let model = ClassifierModel::untrained(Architecture::standard(20), 0).unwrap();
        let err = classify_subnetwork(&model, &Graph::complete(21), 0).unwrap_err();
        assert!(matches!(err, MixtureError::TooLarge { n: 21, side: 20 }));
        assert!(matches!(
            describe(&model, &Graph::empty(0), 0),
            Err(MixtureError::EmptyGraph)
        ));
    }

    #[test]
    fn single_vertex_community_is_classified() {
        let model = ClassifierModel::untrained(Architecture::standard(20), 0).unwrap();
        let label = classify_subnetwork(&model, &Graph::empty(1), 0).unwrap();
        let black = crate::amb::AmbImage::black(20);
        assert_eq!(label, model.predict_label(&black).unwrap());
    }
}
