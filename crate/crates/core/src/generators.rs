//! Seeded generators for the four network families: Erdős–Rényi G(n, M),
//! nearest-neighbor coupled ring lattices, Watts–Strogatz small worlds and
//! Barabási–Albert preferential attachment.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::rng::rng_from_seed;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{family}: {message}")]
    Invalid { family: FamilyLabel, message: String },
    #[error("{family}: missing parameter `{name}`")]
    Missing {
        family: FamilyLabel,
        name: &'static str,
    },
    #[error("unknown family {0:?} (expected one of er, ncn, ws, ba)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyLabel {
    ER,
    NCN,
    WS,
    BA,
}

impl FamilyLabel {
    pub const ALL: [FamilyLabel; 4] = [Self::ER, Self::NCN, Self::WS, Self::BA];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ER => "ER",
            Self::NCN => "NCN",
            Self::WS => "WS",
            Self::BA => "BA",
        }
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyLabel {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ParamError::UnknownFamily(s.to_string()))
    }
}

/// Full parameter tuple for one generated graph. Unused fields stay `None`
/// and are omitted from the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub family: FamilyLabel,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GenParams {
    pub fn er(n: usize, m: usize, seed: u64) -> Self {
        Self { family: FamilyLabel::ER, n, m: Some(m), k: None, p: None, seed: Some(seed) }
    }

    pub fn ncn(n: usize, k: usize) -> Self {
        Self { family: FamilyLabel::NCN, n, m: None, k: Some(k), p: None, seed: None }
    }

    pub fn ws(n: usize, k: usize, p: f64, seed: u64) -> Self {
        Self { family: FamilyLabel::WS, n, m: None, k: Some(k), p: Some(p), seed: Some(seed) }
    }

    pub fn ba(n: usize, m: usize, seed: u64) -> Self {
        Self { family: FamilyLabel::BA, n, m: Some(m), k: None, p: None, seed: Some(seed) }
    }

    pub fn generate(&self) -> Result<Graph, ParamError> {
        let family = self.family;
        let need_usize = |v: Option<usize>, name| v.ok_or(ParamError::Missing { family, name });
        let seed = || self.seed.ok_or(ParamError::Missing { family, name: "seed" });
        match family {
            FamilyLabel::ER => gen_er(self.n, need_usize(self.m, "m")?, seed()?),
            FamilyLabel::NCN => gen_ncn(self.n, need_usize(self.k, "k")?),
            FamilyLabel::WS => {
                let p = self.p.ok_or(ParamError::Missing { family, name: "p" })?;
                gen_ws(self.n, need_usize(self.k, "k")?, p, seed()?)
            }
            FamilyLabel::BA => gen_ba(self.n, need_usize(self.m, "m")?, seed()?),
        }
    }
}

fn invalid(family: FamilyLabel, message: String) -> ParamError {
    ParamError::Invalid { family, message }
}

fn check_lattice(family: FamilyLabel, n: usize, k: usize) -> Result<(), ParamError> {
    if k == 0 || k % 2 != 0 || k >= n {
        return Err(invalid(family, format!("k must be even with 0 < k < n, got k={k}, n={n}")));
    }
    Ok(())
}

/// G(n, M): exactly `m` distinct edges drawn uniformly without replacement.
pub fn gen_er(n: usize, m: usize, seed: u64) -> Result<Graph, ParamError> {
    let slots = n * n.saturating_sub(1) / 2;
    if m > slots {
        return Err(invalid(FamilyLabel::ER, format!("m={m} exceeds n(n-1)/2={slots}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = index::sample(&mut rng, slots, m).into_vec();
    picked.sort_unstable();
    let mut g = Graph::empty(n);
    // Walk the sorted slot indices alongside the triangle rows.
    let (mut u, mut row_start) = (0usize, 0usize);
    for idx in picked {
        while idx >= row_start + (n - 1 - u) {
            row_start += n - 1 - u;
            u += 1;
        }
        g.insert_edge(u, u + 1 + idx - row_start).expect("slot maps to a valid pair");
    }
    Ok(g)
}

/// Ring lattice: vertex `i` is joined to `i±1, …, i±k/2 (mod n)`.
pub fn gen_ncn(n: usize, k: usize) -> Result<Graph, ParamError> {
    check_lattice(FamilyLabel::NCN, n, k)?;
    Ok(ring_lattice(n, k))
}

fn ring_lattice(n: usize, k: usize) -> Graph {
    let mut g = Graph::empty(n);
    for offset in 1..=k / 2 {
        for u in 0..n {
            g.insert_edge(u, (u + offset) % n).expect("lattice edge is valid");
        }
    }
    g
}

/// Watts–Strogatz: start from the ring lattice and, lap by lap, rewire each
/// lattice edge `(u, u+j)` with probability `p` to `(u, w)` where `w` is
/// uniform over vertices that are neither `u` nor already adjacent to `u`.
pub fn gen_ws(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph, ParamError> {
    check_lattice(FamilyLabel::WS, n, k)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(FamilyLabel::WS, format!("p must lie in [0, 1], got {p}")));
    }
    let mut g = ring_lattice(n, k);
    let mut rng = rng_from_seed(seed);
    let mut candidates = Vec::with_capacity(n);
    for offset in 1..=k / 2 {
        for u in 0..n {
            let v = (u + offset) % n;
            if rng.random::<f64>() >= p || !g.has_edge(u, v) {
                continue;
            }
            candidates.clear();
            candidates.extend((0..n).filter(|&w| w != u && !g.has_edge(u, w)));
            if candidates.is_empty() {
                continue;
            }
            let w = candidates[rng.random_range(0..candidates.len())];
            g.remove_edge(u, v);
            g.insert_edge(u, w).expect("rewired edge is valid");
        }
    }
    Ok(g)
}

/// Barabási–Albert: a clique on `m + 1` vertices, then each new vertex joins
/// `m` distinct existing vertices chosen with probability proportional to
/// their current degree.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<Graph, ParamError> {
    if m == 0 || m >= n {
        return Err(invalid(FamilyLabel::BA, format!("need 1 <= m < n, got m={m}, n={n}")));
    }
    let mut g = Graph::empty(n);
    // Every edge endpoint appears once here, so a uniform draw is degree-proportional.
    let mut endpoints = Vec::with_capacity(2 * (m * (m + 1) / 2 + m * n));
    for u in 0..=m {
        for v in u + 1..=m {
            g.insert_edge(u, v).expect("seed clique edge");
            endpoints.extend([u, v]);
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut targets = Vec::with_capacity(m);
    for new in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.insert_edge(new, t).expect("attachment edge");
            endpoints.extend([new, t]);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::degrees;

    /// Maps a linear index in `0..n(n-1)/2` to the pair `(u, v)`, `u < v`, in
    /// row-major upper-triangle order.
    fn pair_from_index(n: usize, mut idx: usize) -> (usize, usize) {
        let mut u = 0;
        loop {
            let row = n - 1 - u;
            if idx < row {
                return (u, u + 1 + idx);
            }
            idx -= row;
            u += 1;
        }
    }

    #[test]
    fn pair_index_covers_upper_triangle() {
        let n = 7;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|i| pair_from_index(n, i)).collect();
        let expected: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn er_examples() {
        for s in 0..5 {
            assert_eq!(gen_er(3, 3, s).unwrap(), Graph::complete(3));
        }
        assert_eq!(gen_er(10, 0, 1).unwrap(), Graph::empty(10));
        assert_eq!(gen_er(100, 300, 4).unwrap().edge_count(), 300);
        assert!(gen_er(4, 7, 0).is_err());
    }

    #[test]
    fn er_edges_match_slot_mapping() {
        let mut rng = rng_from_seed(11);
        let slots = index::sample(&mut rng, 45, 12).into_vec();
        let expected = Graph::from_edges(10, slots.into_iter().map(|i| pair_from_index(10, i))).unwrap();
        assert_eq!(gen_er(10, 12, 11).unwrap(), expected);
    }

    #[test]
    fn ncn_examples() {
        let cycle = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert_eq!(gen_ncn(6, 2).unwrap(), cycle);
        assert_eq!(gen_ncn(5, 4).unwrap(), Graph::complete(5));
        let d = degrees(&gen_ncn(100, 10).unwrap());
        assert!(d.degrees.iter().all(|&x| x == 10));
        assert_eq!(gen_ncn(100, 10).unwrap().edge_count(), 500);
        assert!(gen_ncn(10, 3).is_err());
        assert!(gen_ncn(10, 10).is_err());
        assert!(gen_ncn(10, 0).is_err());
    }

    #[test]
    fn ws_examples() {
        assert_eq!(gen_ws(30, 4, 0.0, 3).unwrap(), gen_ncn(30, 4).unwrap());
        let g = gen_ws(200, 20, 0.1, 7).unwrap();
        assert_eq!(g.edge_count(), 2000);
        let d = degrees(&g);
        assert!(d.classes.len() > 1, "rewiring should spread the degrees");

        let lattice = gen_ncn(20, 4).unwrap();
        let full = gen_ws(20, 4, 1.0, 5).unwrap();
        assert_eq!(full.edge_count(), 40);
        let kept = full.edges().iter().filter(|&&(u, v)| lattice.has_edge(u, v)).count();
        assert!(kept < 40, "p=1 should move lattice edges, kept {kept}");
        assert!(gen_ws(20, 4, 1.5, 0).is_err());
        assert!(gen_ws(20, 4, f64::NAN, 0).is_err());
    }

    #[test]
    fn ba_examples() {
        for m in 1..6 {
            assert_eq!(gen_ba(m + 1, m, 9).unwrap(), Graph::complete(m + 1));
        }
        let g = gen_ba(100, 3, 1).unwrap();
        assert_eq!(g.edge_count(), 6 + 3 * 96);
        assert!(degrees(&g).degrees.iter().all(|&d| d >= 3));
        assert!(gen_ba(5, 5, 0).is_err());
        assert!(gen_ba(5, 0, 0).is_err());
    }

    #[test]
    fn ba_has_hubs() {
        for seed in 0..100 {
            let mut d = degrees(&gen_ba(1000, 2, seed).unwrap()).degrees;
            d.sort_unstable();
            let median = d[d.len() / 2] as f64;
            let max = *d.last().unwrap() as f64;
            assert!(max / median > 5.0, "seed {seed}: max {max}, median {median}");
        }
    }

    #[test]
    fn params_json_round_trip_and_dispatch() {
        let p = GenParams::ws(200, 20, 0.1, 7);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"family":"WS","n":200,"k":20,"p":0.1,"seed":7}"#);
        let back: GenParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.generate().unwrap(), gen_ws(200, 20, 0.1, 7).unwrap());

        let ncn: GenParams = serde_json::from_str(r#"{"family":"NCN","n":6,"k":2}"#).unwrap();
        assert_eq!(ncn.generate().unwrap().edge_count(), 6);
        let missing: GenParams = serde_json::from_str(r#"{"family":"ER","n":6}"#).unwrap();
        assert!(matches!(missing.generate(), Err(ParamError::Missing { name: "m", .. })));
    }

    #[test]
    fn family_parsing() {
        assert_eq!("ws".parse::<FamilyLabel>().unwrap(), FamilyLabel::WS);
        assert_eq!("NCN".parse::<FamilyLabel>().unwrap(), FamilyLabel::NCN);
        assert!("sbm".parse::<FamilyLabel>().is_err());
        for f in FamilyLabel::ALL {
            assert_eq!(FamilyLabel::from_index(f.index()), Some(f));
        }
    }
}
