//! Motif iteration trees.
//!
//! A network of `k` vertices is described as a nested grouping of 3- and
//! 4-element motifs, where every element is either a single vertex or another
//! motif. [`smim_decompose`] builds the canonical (standard) tree for `k` by
//! growing it one vertex at a time with four fixed rewrite cases.
//!
//! Trees print in nested parenthesized form, leaves as `1`:
//! `((1,1,1),((1,1,1),(1,1,1),(1,1,1)),1)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MimError {
    #[error("a motif tree needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MotifTree {
    Leaf,
    Motif(Vec<MotifTree>),
}

use MotifTree::{Leaf, Motif};

impl MotifTree {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Leaf)
    }

    pub fn children(&self) -> &[MotifTree] {
        match self {
            Leaf => &[],
            Motif(c) => c,
        }
    }

    pub fn arity(&self) -> usize {
        self.children().len()
    }

    /// Motif level: 0 for a single vertex, one more than the deepest child otherwise.
    pub fn depth(&self) -> usize {
        match self {
            Leaf => 0,
            Motif(c) => 1 + c.iter().map(MotifTree::depth).max().unwrap_or(0),
        }
    }

    /// Prints with `", "` separators; with `abbreviate`, flat 3- and 4-vertex
    /// motifs are written `M(3)` and `M(4)`.
    pub fn to_notation(&self, abbreviate: bool) -> String {
        let mut out = String::new();
        self.write_notation(&mut out, ", ", abbreviate);
        out
    }

    fn write_notation(&self, out: &mut String, sep: &str, abbreviate: bool) {
        match self {
            Leaf => out.push('1'),
            Motif(c) if abbreviate && c.iter().all(MotifTree::is_leaf) => {
                out.push_str(&format!("M({})", c.len()));
            }
            Motif(c) => {
                out.push('(');
                for (i, child) in c.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    child.write_notation(out, sep, abbreviate);
                }
                out.push(')');
            }
        }
    }
}

fn flat(arity: usize) -> MotifTree {
    Motif(vec![Leaf; arity])
}

pub fn leaf_count(t: &MotifTree) -> usize {
    match t {
        Leaf => 1,
        Motif(c) => c.iter().map(leaf_count).sum(),
    }
}

/// True iff every internal node has 3 or 4 children.
pub fn validate_mim(t: &MotifTree) -> bool {
    match t {
        Leaf => true,
        Motif(c) => matches!(c.len(), 3 | 4) && c.iter().all(validate_mim),
    }
}

/// Canonical child order: motifs before single vertices, motifs by ascending
/// leaf count, ties kept in place. Applied to every node.
fn normalize(t: MotifTree) -> MotifTree {
    match t {
        Leaf => Leaf,
        Motif(c) => {
            let mut c: Vec<MotifTree> = c.into_iter().map(normalize).collect();
            c.sort_by_key(|child| (child.is_leaf(), leaf_count(child)));
            Motif(c)
        }
    }
}

/// Which of the growth rules turns a tree for `k` vertices into one for `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthCase {
    /// `(α, β, γ)` → `(α, β, γ, 1)`
    AppendVertex,
    /// `(α, 1, 1, 1)` → `(α, M(3), 1)`
    OneMotif,
    /// `(α, β, 1, 1)` → `(α, β, M(3))`
    TwoMotifs,
    /// `(α, β, γ, 1)` → `((α, β, γ), 1, 1)`
    ThreeMotifs,
    /// `(α, β, γ, δ)` → `((α, β, γ), δ, 1)`
    FourMotifs,
}

/// Applies the first matching growth rule to a normalized tree. Returns
/// `None` for a leaf or for the flat 4-motif `(1,1,1,1)`, which no rule covers.
pub fn grow(t: &MotifTree) -> Option<(GrowthCase, MotifTree)> {
    let c = t.children();
    let motifs = c.iter().filter(|x| !x.is_leaf()).count();
    let (case, next) = match (c.len(), motifs) {
        (3, _) => {
            let mut next = c.to_vec();
            next.push(Leaf);
            (GrowthCase::AppendVertex, next)
        }
        (4, 1) => (GrowthCase::OneMotif, vec![c[0].clone(), flat(3), Leaf]),
        (4, 2) => (GrowthCase::TwoMotifs, vec![c[0].clone(), c[1].clone(), flat(3)]),
        (4, 3) => (GrowthCase::ThreeMotifs, vec![Motif(c[..3].to_vec()), Leaf, Leaf]),
        (4, 4) => (GrowthCase::FourMotifs, vec![Motif(c[..3].to_vec()), c[3].clone(), Leaf]),
        _ => return None,
    };
    Some((case, normalize(Motif(next))))
}

/// The standard decomposition for `k >= 3` vertices.
pub fn smim_decompose(k: usize) -> Result<MotifTree, MimError> {
    let mut tree = match k {
        0..=2 => return Err(MimError::TooFewVertices(k)),
        3 | 4 => return Ok(flat(k)),
        5 => return Ok(Motif(vec![flat(3), Leaf, Leaf])),
        6 => return Ok(Motif(vec![flat(3), Leaf, Leaf, Leaf])),
        _ => Motif(vec![flat(3), flat(3), Leaf]),
    };
    for _ in 7..k {
        tree = grow(&tree).expect("every tree with k >= 7 has a growth rule").1;
    }
    Ok(tree)
}

/// Root arity of the standard tree for each `k` in the range.
pub fn top_arity_sequence(ks: impl IntoIterator<Item = usize>) -> Result<Vec<usize>, MimError> {
    ks.into_iter()
        .map(|k| smim_decompose(k).map(|t| t.arity()))
        .collect()
}

impl fmt::Display for MotifTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_notation(&mut out, ",", false);
        f.write_str(&out)
    }
}

impl FromStr for MotifTree {
    type Err = MimError;

    /// Accepts the printed form, with or without spaces after commas.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let tree = parse_node(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(parse_err(pos, "trailing input"));
        }
        Ok(tree)
    }
}

fn parse_err(pos: usize, message: &str) -> MimError {
    MimError::Parse { pos, message: message.to_string() }
}

fn skip_ws(b: &[u8], pos: &mut usize) {
    while *pos < b.len() && b[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_node(b: &[u8], pos: &mut usize) -> Result<MotifTree, MimError> {
    skip_ws(b, pos);
    match b.get(*pos) {
        Some(b'1') => {
            *pos += 1;
            Ok(Leaf)
        }
        Some(b'(') => {
            *pos += 1;
            let mut children = vec![parse_node(b, pos)?];
            loop {
                skip_ws(b, pos);
                match b.get(*pos) {
                    Some(b',') => {
                        *pos += 1;
                        children.push(parse_node(b, pos)?);
                    }
                    Some(b')') => {
                        *pos += 1;
                        return Ok(Motif(children));
                    }
                    _ => return Err(parse_err(*pos, "expected ',' or ')'")),
                }
            }
        }
        _ => Err(parse_err(*pos, "expected '1' or '('")),
    }
}
