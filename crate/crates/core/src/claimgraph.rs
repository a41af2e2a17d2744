//! Claim dependency extraction and claim depth.
//!
//! References are recognized case-insensitively after the keyword `claim` or
//! `claims`: single numbers, comma/`or`/`and` lists, ranges written with `to`,
//! `through`, hyphen, en-dash or em-dash, and "preceding claims" with or
//! without explicit numbers.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::ClaimDocument;

/// Why a reference was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    SelfReference,
    ForwardReference,
    /// The referenced claim does not exist in the document.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedReference {
    pub claim: u32,
    pub referenced: u32,
    pub reason: DropReason,
}

/// Parent references found in one claim text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParentRefs {
    /// Ascending, deduplicated, all strictly below the claim's own number.
    pub parents: Vec<u32>,
    pub dropped: Vec<DroppedReference>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Word(usize, usize),
    Num(u32),
    Comma,
    Dash,
    Other,
}

fn lex(text: &str) -> (String, Vec<Tok>) {
    let lower = text.to_lowercase();
    let mut toks = Vec::new();
    let mut chars = lower.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_ascii_digit() {
            let mut value: u64 = 0;
            while let Some(&(_, d)) = chars.peek() {
                let Some(digit) = d.to_digit(10) else { break };
                value = (value * 10 + digit as u64).min(u32::MAX as u64);
                chars.next();
            }
            toks.push(Tok::Num(value as u32));
        } else if c.is_alphabetic() {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if !d.is_alphabetic() {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            toks.push(Tok::Word(start, end));
        } else {
            chars.next();
            match c {
                ',' => toks.push(Tok::Comma),
                '-' | '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' => {
                    toks.push(Tok::Dash)
                }
                c if c.is_whitespace() => {}
                _ => toks.push(Tok::Other),
            }
        }
    }
    (lower, toks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sep {
    List,
    Range,
}

/// Parses `NUM (SEP NUM)*` starting at `i`; returns the referenced numbers.
fn number_list(text: &str, toks: &[Tok], mut i: usize) -> Vec<u32> {
    let word = |t: Tok| match t {
        Tok::Word(s, e) => Some(&text[s..e]),
        _ => None,
    };
    let mut out = Vec::new();
    let Some(Tok::Num(first)) = toks.get(i) else {
        return out;
    };
    let mut last = *first;
    out.push(last);
    i += 1;
    loop {
        let (sep, width) = match toks.get(i).copied() {
            Some(Tok::Comma) => match (toks.get(i + 1).copied(), toks.get(i + 2).copied()) {
                // "1, 2, or 3" / "1, 2, and 3"
                (Some(t), Some(Tok::Num(_))) if matches!(word(t), Some("or" | "and")) => {
                    (Sep::List, 2)
                }
                _ => (Sep::List, 1),
            },
            Some(Tok::Dash) => (Sep::Range, 1),
            Some(t) => match word(t) {
                Some("or" | "and") => (Sep::List, 1),
                Some("to" | "through" | "until") => (Sep::Range, 1),
                _ => break,
            },
            None => break,
        };
        let Some(Tok::Num(next)) = toks.get(i + width).copied() else {
            break;
        };
        match sep {
            Sep::List => out.push(next),
            Sep::Range => {
                let (lo, hi) = (last.min(next), last.max(next));
                out.extend(lo..=hi);
            }
        }
        last = next;
        i += width + 1;
    }
    out
}

/// Extracts the claim numbers referenced by `claim_text`.
///
/// References at or above `own_number` are dropped and reported.
pub fn extract_parent_refs(claim_text: &str, own_number: u32) -> ParentRefs {
    let (text, toks) = lex(claim_text);
    let word = |t: &Tok| match *t {
        Tok::Word(s, e) => Some(&text[s..e]),
        _ => None,
    };
    let mut referenced = BTreeSet::new();
    for (i, tok) in toks.iter().enumerate() {
        if !matches!(word(tok), Some("claim" | "claims")) {
            continue;
        }
        let numbers = number_list(&text, &toks, i + 1);
        if !numbers.is_empty() {
            referenced.extend(numbers);
            continue;
        }
        let preceded_by_anaphor = i
            .checked_sub(1)
            .and_then(|j| word(&toks[j]))
            .is_some_and(|w| matches!(w, "preceding" | "previous" | "foregoing" | "above"));
        if preceded_by_anaphor {
            referenced.extend(1..own_number);
        }
    }

    let mut refs = ParentRefs::default();
    for n in referenced {
        if n < own_number {
            refs.parents.push(n);
        } else {
            refs.dropped.push(DroppedReference {
                claim: own_number,
                referenced: n,
                reason: if n == own_number {
                    DropReason::SelfReference
                } else {
                    DropReason::ForwardReference
                },
            });
        }
    }
    refs
}

/// Dependency structure over the claim numbers of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClaimGraph {
    parents: BTreeMap<u32, Vec<u32>>,
    pub diagnostics: Vec<DroppedReference>,
}

impl ClaimGraph {
    /// Builds a graph from explicit parent lists, dropping references that
    /// are not strictly smaller existing claims.
    pub fn from_parents(parents: impl IntoIterator<Item = (u32, Vec<u32>)>) -> Self {
        let raw: BTreeMap<u32, Vec<u32>> = parents.into_iter().collect();
        let mut graph = ClaimGraph::default();
        for (&claim, ps) in &raw {
            let mut kept: Vec<u32> = Vec::new();
            for &p in ps {
                let reason = if p == claim {
                    Some(DropReason::SelfReference)
                } else if p > claim {
                    Some(DropReason::ForwardReference)
                } else if !raw.contains_key(&p) {
                    Some(DropReason::Missing)
                } else {
                    None
                };
                match reason {
                    Some(reason) => graph.diagnostics.push(DroppedReference {
                        claim,
                        referenced: p,
                        reason,
                    }),
                    None => kept.push(p),
                }
            }
            kept.sort_unstable();
            kept.dedup();
            graph.parents.insert(claim, kept);
        }
        graph
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.parents.keys().copied()
    }

    pub fn parents(&self, claim: u32) -> Option<&[u32]> {
        self.parents.get(&claim).map(Vec::as_slice)
    }

    pub fn roots(&self) -> impl Iterator<Item = u32> + '_ {
        self.parents
            .iter()
            .filter(|(_, ps)| ps.is_empty())
            .map(|(&c, _)| c)
    }
}

pub fn build_claim_graph(doc: &ClaimDocument) -> ClaimGraph {
    let mut diagnostics = Vec::new();
    let parents: Vec<(u32, Vec<u32>)> = doc
        .claims
        .iter()
        .map(|claim| {
            let refs = extract_parent_refs(&claim.text, claim.num);
            diagnostics.extend(refs.dropped);
            (claim.num, refs.parents)
        })
        .collect();
    let mut graph = ClaimGraph::from_parents(parents);
    diagnostics.append(&mut graph.diagnostics);
    diagnostics.sort_by_key(|d| (d.claim, d.referenced));
    graph.diagnostics = diagnostics;
    graph
}

/// Claim depth `cd`: 1 for independent claims, otherwise one more than the
/// deepest parent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClaimDepth {
    pub depths: BTreeMap<u32, u32>,
}

impl ClaimDepth {
    pub fn get(&self, claim: u32) -> Option<u32> {
        self.depths.get(&claim).copied()
    }
}

pub fn claim_depth(graph: &ClaimGraph) -> ClaimDepth {
    let mut depths = BTreeMap::new();
    // Parents are strictly smaller, so ascending order is topological.
    for (&claim, parents) in &graph.parents {
        let cd = parents
            .iter()
            .filter_map(|p| depths.get(p))
            .max()
            .map_or(1, |d| d + 1);
        depths.insert(claim, cd);
    }
    ClaimDepth { depths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Claim;
    use proptest::prelude::*;

    fn parents(text: &str, own: u32) -> Vec<u32> {
        extract_parent_refs(text, own).parents
    }

    #[test]
    fn single_reference() {
        assert_eq!(
            parents("The lubricant concentrate according to claim 3", 7),
            vec![3]
        );
    }

    #[test]
    fn range_with_to() {
        assert_eq!(
            parents(
                "The lubricant concentrate according to any one of claims 3 to 5",
                7
            ),
            vec![3, 4, 5]
        );
    }

    #[test]
    fn range_with_en_dash() {
        assert_eq!(
            parents(
                "The lubricant concentrate according to any one of claims 3 \u{2013} 6",
                7
            ),
            vec![3, 4, 5, 6]
        );
    }

    #[test]
    fn preceding_claims_with_range() {
        assert_eq!(
            parents(
                "Method according to one or more of the preceding claims 25 to 36",
                37
            ),
            (25..=36).collect::<Vec<_>>()
        );
    }

    #[test]
    fn independent_claim() {
        assert!(parents("A method for coating a substrate", 1).is_empty());
    }

    #[test]
    fn other_phrasings() {
        assert_eq!(
            parents("A device as claimed in claims 1 or 2", 3),
            vec![1, 2]
        );
        assert_eq!(parents("according to claims 1 and 4", 5), vec![1, 4]);
        assert_eq!(parents("according to claims 1, 2, or 4", 5), vec![1, 2, 4]);
        assert_eq!(parents("according to claims 2-4", 5), vec![2, 3, 4]);
        assert_eq!(parents("according to claims 2\u{2014}3", 5), vec![2, 3]);
        assert_eq!(parents("CLAIMS 1 TO 2", 5), vec![1, 2]);
        assert_eq!(parents("according to claim 1 or claim 3", 5), vec![1, 3]);
        assert_eq!(
            parents("according to any one of the preceding claims", 4),
            vec![1, 2, 3]
        );
        assert_eq!(parents("according to any preceding claim", 3), vec![1, 2]);
    }

    #[test]
    fn trailing_words_after_to_are_not_ranges() {
        assert_eq!(
            parents("according to claim 1 to provide 5 layers", 4),
            vec![1]
        );
        assert_eq!(parents("The pump of claim 2, wherein 3 vanes", 4), vec![2]);
    }

    #[test]
    fn forward_and_self_references_dropped() {
        let refs = extract_parent_refs("according to claims 2 to 6", 4);
        assert_eq!(refs.parents, vec![2, 3]);
        let dropped: Vec<_> = refs
            .dropped
            .iter()
            .map(|d| (d.referenced, d.reason))
            .collect();
        assert_eq!(
            dropped,
            vec![
                (4, DropReason::SelfReference),
                (5, DropReason::ForwardReference),
                (6, DropReason::ForwardReference)
            ]
        );
    }

    fn doc(texts: &[&str]) -> ClaimDocument {
        let claims = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Claim {
                num: i as u32 + 1,
                text: t.to_string(),
            })
            .collect();
        ClaimDocument::new("D", None, "en", claims).unwrap()
    }

    #[test]
    fn chain_graph() {
        let g = build_claim_graph(&doc(&[
            "A pump.",
            "The pump of claim 1.",
            "The pump of claim 2.",
        ]));
        assert_eq!(g.parents(1), Some(&[][..]));
        assert_eq!(g.parents(2), Some(&[1][..]));
        assert_eq!(g.parents(3), Some(&[2][..]));
        let cd = claim_depth(&g);
        assert_eq!(cd.depths, BTreeMap::from([(1, 1), (2, 2), (3, 3)]));
    }

    #[test]
    fn two_roots() {
        let g = build_claim_graph(&doc(&["A pump.", "A valve."]));
        assert_eq!(g.roots().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn or_reference_gives_two_parents() {
        let g = build_claim_graph(&doc(&["A pump.", "A valve.", "The part of claims 1 or 2."]));
        assert_eq!(g.parents(3), Some(&[1, 2][..]));
    }

    #[test]
    fn missing_claims_are_dropped() {
        let mut d = doc(&["x"]);
        d.claims[0].num = 37;
        d.claims[0].text = "Method according to the preceding claims 25 to 36".into();
        let g = build_claim_graph(&d);
        assert_eq!(g.parents(37), Some(&[][..]));
        assert_eq!(g.diagnostics.len(), 12);
        assert!(g
            .diagnostics
            .iter()
            .all(|d| d.reason == DropReason::Missing));
        assert_eq!(claim_depth(&g).get(37), Some(1));
    }

    #[test]
    fn single_claim_depth() {
        let g = ClaimGraph::from_parents([(1, vec![])]);
        assert_eq!(claim_depth(&g).depths, BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn diamond_depth() {
        let g =
            ClaimGraph::from_parents([(1, vec![]), (2, vec![1]), (3, vec![1]), (4, vec![2, 3])]);
        assert_eq!(claim_depth(&g).get(4), Some(3));
    }

    fn arb_graph() -> impl Strategy<Value = Vec<(u32, Vec<u32>)>> {
        (1usize..=8).prop_flat_map(|n| {
            let per_claim: Vec<_> = (1..=n as u32)
                .map(|c| prop::collection::vec(1..c.max(2), 0..(c as usize).min(3)))
                .collect();
            per_claim.prop_map(|lists| {
                lists
                    .into_iter()
                    .enumerate()
                    .map(|(i, ps)| {
                        let c = i as u32 + 1;
                        (c, ps.into_iter().filter(|&p| p < c).collect())
                    })
                    .collect()
            })
        })
    }

    /// Longest path to a root, by exhaustive recursion.
    fn brute_depth(parents: &BTreeMap<u32, Vec<u32>>, c: u32) -> u32 {
        1 + parents[&c]
            .iter()
            .map(|&p| brute_depth(parents, p))
            .max()
            .unwrap_or(0)
    }

    proptest! {
        #[test]
        fn depth_bounds_and_recurrence(spec in arb_graph()) {
            let g = ClaimGraph::from_parents(spec.clone());
            let cd = claim_depth(&g);
            let map: BTreeMap<u32, Vec<u32>> = spec.into_iter().collect();
            for (&c, &d) in &cd.depths {
                prop_assert!(d >= 1 && d <= c);
                prop_assert_eq!(d, brute_depth(&map, c));
            }
        }

        #[test]
        fn adding_a_parent_never_decreases_depth(spec in arb_graph(), pick in any::<prop::sample::Index>(), parent in any::<prop::sample::Index>()) {
            let before = claim_depth(&ClaimGraph::from_parents(spec.clone()));
            let n = spec.len();
            let child = pick.index(n) as u32 + 1;
            if child == 1 { return Ok(()); }
            let p = parent.index(child as usize - 1) as u32 + 1;
            let mut spec = spec;
            spec[child as usize - 1].1.push(p);
            let after = claim_depth(&ClaimGraph::from_parents(spec));
            prop_assert!(after.get(child) >= before.get(child));
        }
    }
}
