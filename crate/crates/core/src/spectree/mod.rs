//! Specialization trees: each claim folded into a tree of content-word groups.
//!
//! A claim's token sequence is cut at the boundaries found by
//! [`match_patterns`]. Specialization boundaries hang the next segment under
//! the most recent node; composition boundaries hang it under the node that
//! holds the composing verb. Segments that keep no content word after
//! stopword filtering are merged into the preceding segment.

mod patterns;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

pub use patterns::{match_patterns, Boundary, BoundaryKind};

use crate::parsetree::{serialize_tags, tokens, ParseTree};
pub use crate::text::filter_stopwords;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecNode {
    pub tokens: Vec<String>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Node depth, root = 1.
    pub nd: u32,
    /// Node height, leaf = 1.
    pub nh: u32,
}

/// Arena-backed tree; node indices are in depth-first pre-order, root = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecializationTree {
    nodes: Vec<SpecNode>,
}

impl SpecializationTree {
    pub fn nodes(&self) -> &[SpecNode] {
        &self.nodes
    }

    pub fn root(&self) -> &SpecNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Depth of the whole tree (number of levels).
    pub fn depth(&self) -> u32 {
        self.root().nh
    }

    /// Node token lists concatenated in pre-order.
    pub fn preorder_tokens(&self) -> Vec<String> {
        self.nodes
            .iter()
            .flat_map(|n| n.tokens.iter().cloned())
            .collect()
    }

    /// Indented dump: one node per line, two spaces per level.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let indent = "  ".repeat(node.nd as usize - 1);
            let _ = writeln!(out, "{indent}{}", node.tokens.join(" "));
        }
        out
    }
}

struct Segment {
    start: usize,
    kind: BoundaryKind,
    anchor: usize,
    words: Vec<String>,
}

/// Folds one parsed claim into its specialization tree.
pub fn build_spec_tree(tree: &ParseTree) -> SpecializationTree {
    let tags = serialize_tags(tree);
    let leaves = tokens(tree);
    let boundaries = match_patterns(&tags);

    let filtered = |range: std::ops::Range<usize>| {
        filter_stopwords(leaves[range].iter().map(|(t, p)| (t.as_str(), p.as_str())))
    };

    let mut cuts: Vec<(usize, BoundaryKind, usize)> = vec![(0, BoundaryKind::Specialization, 0)];
    cuts.extend(boundaries.iter().map(|b| (b.position, b.kind, b.anchor)));
    let mut segments: Vec<Segment> = Vec::new();
    for (k, &(start, kind, anchor)) in cuts.iter().enumerate() {
        let end = cuts.get(k + 1).map_or(leaves.len(), |c| c.0);
        let words = filtered(start..end);
        // Empty segments fold into their predecessor; an empty root absorbs
        // whatever follows it.
        if let Some(prev) = segments.last_mut() {
            if words.is_empty() {
                continue;
            }
            if prev.words.is_empty() {
                prev.words = words;
                continue;
            }
        }
        segments.push(Segment {
            start,
            kind,
            anchor,
            words,
        });
    }

    let mut nodes: Vec<SpecNode> = Vec::with_capacity(segments.len());
    let mut starts: Vec<usize> = Vec::with_capacity(segments.len());
    for seg in segments {
        let parent = if nodes.is_empty() {
            None
        } else {
            let last = nodes.len() - 1;
            Some(match seg.kind {
                BoundaryKind::Specialization => last,
                BoundaryKind::Composition => {
                    // Deepest node on the current root path that starts at or
                    // before the composing verb.
                    let mut node = last;
                    while starts[node] > seg.anchor {
                        node = nodes[node].parent.expect("root starts at token 0");
                    }
                    node
                }
            })
        };
        let nd = parent.map_or(1, |p| nodes[p].nd + 1);
        let id = nodes.len();
        if let Some(p) = parent {
            nodes[p].children.push(id);
        }
        nodes.push(SpecNode {
            tokens: seg.words,
            children: Vec::new(),
            parent,
            nd,
            nh: 1,
        });
        starts.push(seg.start);
    }
    for id in (0..nodes.len()).rev() {
        let nh = nodes[id]
            .children
            .iter()
            .map(|&c| nodes[c].nh + 1)
            .max()
            .unwrap_or(1);
        nodes[id].nh = nh;
    }
    SpecializationTree { nodes }
}

/// Tree position of one word occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WordPosition {
    pub nd: u32,
    pub nh: u32,
    pub cd: u32,
}

/// Lowercased word → multiset of positions, over all claims of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositionIndex {
    pub positions: BTreeMap<String, Vec<WordPosition>>,
}

impl PositionIndex {
    pub fn get(&self, word: &str) -> Option<&[WordPosition]> {
        self.positions.get(word).map(Vec::as_slice)
    }

    pub fn total_occurrences(&self) -> usize {
        self.positions.values().map(Vec::len).sum()
    }

    pub fn add_tree(&mut self, tree: &SpecializationTree, cd: u32) {
        for node in tree.nodes() {
            for word in &node.tokens {
                self.positions
                    .entry(word.to_lowercase())
                    .or_default()
                    .push(WordPosition {
                        nd: node.nd,
                        nh: node.nh,
                        cd,
                    });
            }
        }
    }
}

pub fn word_positions<'a>(
    trees: impl IntoIterator<Item = (&'a SpecializationTree, u32)>,
) -> PositionIndex {
    let mut index = PositionIndex::default();
    for (tree, cd) in trees {
        index.add_tree(tree, cd);
    }
    index
}
