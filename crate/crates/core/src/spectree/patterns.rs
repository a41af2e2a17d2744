//! Composition and specialization chunk patterns over depth-first tag strings.
//!
//! Composition: a verbal head such as `comprising` followed by an NP (or an
//! `of` PP); each coordinated NP opens a sibling child of the node holding the
//! head. Specialization: `characterized in that`/`by`, relative clauses opened
//! by `which`, `wherein` or `whereby`, and a `with` PP following an NP. Inside
//! the clause of a `characterized in that` or relative-clause trigger, the
//! predicate VP of a subject-predicate clause deepens once more.

use crate::parsetree::{is_verb_tag, TagEntry, TagString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryKind {
    Composition,
    Specialization,
}

/// A split point in the token sequence of one claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundary {
    pub kind: BoundaryKind,
    /// Index (in sentence order, over all leaves) of the first token of the new chunk.
    pub position: usize,
    /// Token index of the trigger word; for composition the node holding it
    /// becomes the parent.
    pub anchor: usize,
}

const COMPOSITION_HEADS: &[&str] = &[
    "comprising",
    "comprises",
    "comprise",
    "comprised",
    "including",
    "includes",
    "include",
    "containing",
    "contains",
    "contain",
    "consisting",
    "consists",
    "consist",
    "having",
    "has",
    "have",
    "composed",
    "made",
];

const RELATIVE_OPENERS: &[&str] = &["which", "wherein", "whereby"];

fn is_clause(label: &str) -> bool {
    matches!(label, "S" | "SQ" | "SINV")
}

/// Structural view over a tag string.
struct View<'a> {
    tags: &'a [TagEntry],
    /// Leaves preceding each entry.
    first_token: Vec<usize>,
    /// One past the last entry of each entry's subtree.
    end: Vec<usize>,
    tokens_lower: Vec<String>,
    token_tags: Vec<&'a str>,
}

impl<'a> View<'a> {
    fn new(tags: &'a TagString) -> Self {
        let tags = tags.tags.as_slice();
        let mut first_token = Vec::with_capacity(tags.len());
        let mut tokens_lower = Vec::new();
        let mut token_tags = Vec::new();
        for t in tags {
            first_token.push(tokens_lower.len());
            if let Some(tok) = &t.token {
                tokens_lower.push(tok.to_lowercase());
                token_tags.push(t.label.as_str());
            }
        }
        let mut end = vec![tags.len(); tags.len()];
        let mut open: Vec<usize> = Vec::new();
        for (i, t) in tags.iter().enumerate() {
            while let Some(&j) = open.last() {
                if tags[j].depth >= t.depth {
                    end[j] = i;
                    open.pop();
                } else {
                    break;
                }
            }
            open.push(i);
        }
        View {
            tags,
            first_token,
            end,
            tokens_lower,
            token_tags,
        }
    }

    fn children(&self, i: usize) -> Vec<usize> {
        let depth = self.tags[i].depth + 1;
        (i + 1..self.end[i])
            .filter(|&j| self.tags[j].depth == depth)
            .collect()
    }

    fn parent(&self, i: usize) -> Option<usize> {
        let depth = self.tags[i].depth.checked_sub(1)?;
        (0..i).rev().find(|&j| self.tags[j].depth == depth)
    }

    fn head_word(&self, i: usize) -> Option<&str> {
        self.tokens_lower
            .get(self.first_token[i])
            .map(String::as_str)
    }

    fn head_tag(&self, i: usize) -> Option<&str> {
        self.token_tags.get(self.first_token[i]).copied()
    }

    fn label(&self, i: usize) -> &str {
        &self.tags[i].label
    }

    fn is_leaf(&self, i: usize) -> bool {
        self.tags[i].token.is_some()
    }

    /// A VP whose first leaf is still verbal; retagged heads disqualify it.
    fn is_verbal_vp(&self, i: usize) -> bool {
        self.label(i) == "VP"
            && self
                .head_tag(i)
                .is_some_and(|t| is_verb_tag(t) || t == "MD" || t == "TO")
    }

    fn is_np(&self, i: usize) -> bool {
        self.label(i) == "NP"
    }
}

/// First tokens of the conjuncts of a coordinated NP (or the NP itself).
fn conjunct_starts(view: &View, np: usize) -> Vec<usize> {
    let children = view.children(np);
    let is_sep = |j: usize| matches!(view.label(j), "CC" | "," | ":");
    if !children.iter().any(|&j| is_sep(j)) {
        return vec![view.first_token[np]];
    }
    let mut starts = Vec::new();
    let mut group_open = false;
    for &j in &children {
        if is_sep(j) {
            group_open = false;
        } else if !group_open {
            starts.push(view.first_token[j]);
            group_open = true;
        }
    }
    starts
}

fn predicate_split(view: &View, clause: usize, anchor: usize, out: &mut Vec<Boundary>) {
    let children = view.children(clause);
    for pair in children.windows(2) {
        if view.is_np(pair[0]) && view.is_verbal_vp(pair[1]) {
            out.push(Boundary {
                kind: BoundaryKind::Specialization,
                position: view.first_token[pair[1]],
                anchor,
            });
            return;
        }
    }
}

fn characterized_triggers(view: &View, out: &mut Vec<Boundary>) {
    let toks = &view.tokens_lower;
    for p in 0..toks.len() {
        if !matches!(toks[p].as_str(), "characterized" | "characterised") {
            continue;
        }
        let next = toks.get(p + 1).map(String::as_str);
        let after = toks.get(p + 2).map(String::as_str);
        let clause_start = match (next, after) {
            (Some("in"), Some("that")) => Some(p + 3),
            (Some("by"), _) => None,
            _ => continue,
        };
        out.push(Boundary {
            kind: BoundaryKind::Specialization,
            position: p,
            anchor: p,
        });
        if let Some(start) = clause_start {
            let clause = (0..view.tags.len())
                .find(|&i| is_clause(view.label(i)) && view.first_token[i] == start);
            if let Some(clause) = clause {
                predicate_split(view, clause, p, out);
            }
        }
    }
}

fn relative_triggers(view: &View, out: &mut Vec<Boundary>) {
    for i in 0..view.tags.len() {
        let label = view.label(i);
        if !matches!(label, "SBAR" | "WHNP" | "WHADVP" | "WHPP") {
            continue;
        }
        if !view
            .head_word(i)
            .is_some_and(|w| RELATIVE_OPENERS.contains(&w))
        {
            continue;
        }
        let position = view.first_token[i];
        out.push(Boundary {
            kind: BoundaryKind::Specialization,
            position,
            anchor: position,
        });
        let sbar = if label == "SBAR" {
            Some(i)
        } else {
            view.parent(i).filter(|&p| view.label(p) == "SBAR")
        };
        if let Some(sbar) = sbar {
            if let Some(clause) = view
                .children(sbar)
                .into_iter()
                .find(|&c| is_clause(view.label(c)))
            {
                predicate_split(view, clause, position, out);
            }
        }
    }
}

fn with_triggers(view: &View, out: &mut Vec<Boundary>) {
    for i in 0..view.tags.len() {
        if view.label(i) != "PP" || view.head_word(i) != Some("with") {
            continue;
        }
        let Some(parent) = view.parent(i) else {
            continue;
        };
        let siblings = view.children(parent);
        let idx = siblings.iter().position(|&s| s == i).unwrap_or(0);
        if idx > 0 && view.is_np(siblings[idx - 1]) {
            let position = view.first_token[i];
            out.push(Boundary {
                kind: BoundaryKind::Specialization,
                position,
                anchor: position,
            });
        }
    }
}

fn composition_triggers(view: &View, out: &mut Vec<Boundary>) {
    for i in 0..view.tags.len() {
        if !view.is_verbal_vp(i) {
            continue;
        }
        let children = view.children(i);
        let Some(head_idx) = children.iter().position(|&c| view.is_leaf(c)) else {
            continue;
        };
        let head = children[head_idx];
        let word = view.head_word(head).unwrap_or_default();
        if !is_verb_tag(view.label(head)) || !COMPOSITION_HEADS.contains(&word) {
            continue;
        }
        let anchor = view.first_token[head];
        let object = children.get(head_idx + 1).copied().and_then(|c| {
            if view.is_np(c) {
                Some(c)
            } else if view.label(c) == "PP" && view.head_word(c) == Some("of") {
                view.children(c).into_iter().find(|&g| view.is_np(g))
            } else {
                None
            }
        });
        if let Some(np) = object {
            out.extend(
                conjunct_starts(view, np)
                    .into_iter()
                    .map(|position| Boundary {
                        kind: BoundaryKind::Composition,
                        position,
                        anchor,
                    }),
            );
        }
    }
}

/// Finds chunk boundaries; positions are strictly increasing and never 0.
///
/// When two triggers open a chunk at the same token, specialization wins.
pub fn match_patterns(tags: &TagString) -> Vec<Boundary> {
    let view = View::new(tags);
    let mut found = Vec::new();
    characterized_triggers(&view, &mut found);
    relative_triggers(&view, &mut found);
    with_triggers(&view, &mut found);
    composition_triggers(&view, &mut found);

    // Specialization sorts after composition, so the last of a run wins.
    found.sort_by_key(|b| (b.position, b.kind, std::cmp::Reverse(b.anchor)));
    let mut out: Vec<Boundary> = Vec::with_capacity(found.len());
    for b in found {
        if b.position == 0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.position == b.position => *last = b,
            _ => out.push(b),
        }
    }
    out
}
