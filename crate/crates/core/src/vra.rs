//! Vertex reordering and arranging (VRA).
//!
//! Phase 1 walks the degree classes from highest to lowest. Inside a class
//! the next vertex is the smallest-index unplaced class member adjacent to the
//! vertex placed last; when there is none, a seeded-random unplaced member is
//! taken. The first vertex of each class follows the same rule with respect
//! to the last vertex of the previous class.
//!
//! Phase 2 moves the odd positions (1-based) of the phase-1 list to the front
//! by successive prepends, so `[x1, x2, x3, x4, x5]` becomes
//! `[x5, x3, x1, x2, x4]` and the highest-degree vertex sits in the middle.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{apply_order, degrees, Graph, VertexOrder};
use crate::rng::rng_from_seed;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VraError {
    #[error("diagonal concentration is undefined for a graph without edges")]
    Edgeless,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VraTrace {
    /// Distinct degrees, descending.
    pub degree_classes: Vec<usize>,
    /// Phase-1 list.
    pub placement: Vec<usize>,
    /// Candidate set of each degree class, ascending, in class order.
    pub omega_snapshots: Vec<Vec<usize>>,
    pub r#final: VertexOrder,
}

pub fn vra_order(g: &Graph, seed: u64) -> VraTrace {
    let n = g.n();
    let profile = degrees(g);
    let mut rng = rng_from_seed(seed);
    let mut placement: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut omega_snapshots = Vec::with_capacity(profile.classes.len());

    for &class in &profile.classes {
        let mut remaining: Vec<usize> =
            (0..n).filter(|&v| profile.degrees[v] == class).collect();
        omega_snapshots.push(remaining.clone());

        let adjacent_candidate = |from: usize, placed: &[bool]| {
            g.neighbors(from)
                .find(|&b| !placed[b] && profile.degrees[b] == class)
        };
        let mut current = placement
            .last()
            .and_then(|&last| adjacent_candidate(last, &placed))
            .unwrap_or_else(|| remaining[rng.random_range(0..remaining.len())]);
        loop {
            placement.push(current);
            placed[current] = true;
            let at = remaining.binary_search(&current).expect("current is a class member");
            remaining.remove(at);
            if remaining.is_empty() {
                break;
            }
            current = adjacent_candidate(current, &placed)
                .unwrap_or_else(|| remaining[rng.random_range(0..remaining.len())]);
        }
    }

    let final_order = arrange(&placement);
    VraTrace {
        degree_classes: profile.classes,
        placement,
        omega_snapshots,
        r#final: VertexOrder::new(final_order).expect("arrangement of a permutation"),
    }
}

/// `[x1, x2, …]` → `[…, x5, x3, x1, x2, x4, …]`.
fn arrange(placement: &[usize]) -> Vec<usize> {
    let odd = placement.iter().step_by(2).rev();
    let even = placement.iter().skip(1).step_by(2);
    odd.chain(even).copied().collect()
}

pub fn vra_apply(g: &Graph, seed: u64) -> Graph {
    let trace = vra_order(g, seed);
    apply_order(g, &trace.r#final).expect("order covers every vertex")
}

/// Mean of `|i − j| / (n − 1)` over the white pixels of the amb image.
pub fn diag_concentration(g: &Graph) -> Result<f64, VraError> {
    let edges = g.edges();
    if edges.is_empty() {
        return Err(VraError::Edgeless);
    }
    let total: usize = edges.iter().map(|&(u, v)| v - u).sum();
    Ok(total as f64 / edges.len() as f64 / (g.n() - 1) as f64)
}
