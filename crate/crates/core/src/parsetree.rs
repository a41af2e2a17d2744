//! Constituency parses in Penn Treebank bracketed form.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A constituent; leaves carry a token and a POS tag, internal nodes a
/// syntactic category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub label: String,
    pub token: Option<String>,
    pub children: Vec<ParseNode>,
}

impl ParseNode {
    pub fn leaf(label: impl Into<String>, token: impl Into<String>) -> Self {
        ParseNode {
            label: label.into(),
            token: Some(token.into()),
            children: Vec::new(),
        }
    }

    pub fn internal(label: impl Into<String>, children: Vec<ParseNode>) -> Self {
        ParseNode {
            label: label.into(),
            token: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a ParseNode>) {
        if self.is_leaf() {
            out.push(self);
        }
        for child in &self.children {
            child.leaves(out);
        }
    }

    fn leaves_mut<'a>(&'a mut self, out: &mut Vec<&'a mut ParseNode>) {
        if self.token.is_some() {
            out.push(self);
            return;
        }
        for child in &mut self.children {
            child.leaves_mut(out);
        }
    }
}

impl fmt::Display for ParseNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.token {
            Some(token) => write!(f, "({} {})", self.label, token),
            None => {
                write!(f, "({}", self.label)?;
                for child in &self.children {
                    write!(f, " {child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub root: ParseNode,
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Ptb {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn atom(&mut self) -> &'a str {
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn node(&mut self) -> Result<ParseNode> {
        self.skip_ws();
        match self.peek() {
            Some('(') => self.pos += 1,
            Some(_) => return self.err("expected '('"),
            None => return self.err("unexpected end of input"),
        }
        self.skip_ws();
        let label = self.atom();
        if label.is_empty() {
            return self.err("empty label");
        }
        let mut token: Option<&str> = None;
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return self.err(format!("unbalanced brackets: unclosed ({label}")),
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some('(') => {
                    if token.is_some() {
                        return self.err(format!("node ({label} mixes a token with children"));
                    }
                    children.push(self.node()?);
                }
                Some(_) => {
                    if !children.is_empty() {
                        return self.err(format!("node ({label} mixes children with a token"));
                    }
                    if token.is_some() {
                        return self.err(format!("leaf ({label} has more than one token"));
                    }
                    token = Some(self.atom());
                }
            }
        }
        match (token, children.is_empty()) {
            (Some(t), _) => Ok(ParseNode::leaf(label, t)),
            (None, false) => Ok(ParseNode::internal(label, children)),
            (None, true) => self.err(format!("node ({label} has neither token nor children")),
        }
    }
}

/// Reads one bracketed tree such as `(NP (DT the) (NN system))`.
pub fn read_ptb(text: &str) -> Result<ParseTree> {
    let mut reader = Reader { text, pos: 0 };
    let root = reader.node()?;
    reader.skip_ws();
    if reader.pos != text.len() {
        return reader.err("trailing input after tree");
    }
    Ok(ParseTree { root })
}

const VERB_TAGS: [&str; 6] = ["VB", "VBD", "VBN", "VBZ", "VBP", "VBG"];

pub fn is_verb_tag(tag: &str) -> bool {
    VERB_TAGS.contains(&tag)
}

/// Corrects verb tags on claim boilerplate words.
///
/// `said` and `claimed` used as verbs become `JJ`; `claim`/`claims` tagged as
/// verbs become `NN`/`NNS` when a cardinal number follows. The tree shape and
/// tokens are untouched.
pub fn retag(tree: &ParseTree) -> ParseTree {
    let mut out = tree.clone();
    let mut leaves = Vec::new();
    out.root.leaves_mut(&mut leaves);
    for i in 0..leaves.len() {
        if !is_verb_tag(&leaves[i].label) {
            continue;
        }
        let word = leaves[i]
            .token
            .as_deref()
            .unwrap_or_default()
            .to_lowercase();
        let next_is_cd = leaves.get(i + 1).is_some_and(|n| n.label == "CD");
        let new_label = match word.as_str() {
            "said" | "claimed" => Some("JJ"),
            "claim" if next_is_cd => Some("NN"),
            "claims" if next_is_cd => Some("NNS"),
            _ => None,
        };
        if let Some(label) = new_label {
            leaves[i].label = label.to_string();
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagKind {
    Category,
    Pos,
}

/// One entry of the depth-first tag string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagEntry {
    pub label: String,
    pub kind: TagKind,
    pub token: Option<String>,
    /// Distance from the root (root = 0); lets matchers recover constituent extents.
    pub depth: usize,
}

impl fmt::Display for TagEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.token {
            Some(t) => write!(f, "{}:{}", self.label, t),
            None => f.write_str(&self.label),
        }
    }
}

/// Pre-order serialization of a parse tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagString {
    pub tags: Vec<TagEntry>,
}

impl TagString {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Token-bearing entries in sentence order.
    pub fn tokens(&self) -> impl Iterator<Item = (&str, &str)> {
        self.tags
            .iter()
            .filter_map(|t| t.token.as_deref().map(|tok| (tok, t.label.as_str())))
    }

    pub fn labels(&self) -> Vec<String> {
        self.tags.iter().map(ToString::to_string).collect()
    }
}

pub fn serialize_tags(tree: &ParseTree) -> TagString {
    fn walk(node: &ParseNode, depth: usize, out: &mut Vec<TagEntry>) {
        out.push(TagEntry {
            label: node.label.clone(),
            kind: if node.is_leaf() {
                TagKind::Pos
            } else {
                TagKind::Category
            },
            token: node.token.clone(),
            depth,
        });
        for child in &node.children {
            walk(child, depth + 1, out);
        }
    }
    let mut tags = Vec::new();
    walk(&tree.root, 0, &mut tags);
    TagString { tags }
}

/// Leaves in sentence order as `(token, pos)` pairs.
pub fn tokens(tree: &ParseTree) -> Vec<(String, String)> {
    let mut leaves = Vec::new();
    tree.root.leaves(&mut leaves);
    leaves
        .into_iter()
        .map(|l| (l.token.clone().unwrap_or_default(), l.label.clone()))
        .collect()
}

/// One record of the parse sidecar file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseRecord {
    pub doc_id: String,
    pub claim_num: u32,
    pub ptb: String,
}

/// Parsed claims keyed by `(doc_id, claim_num)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseSet {
    pub trees: BTreeMap<(String, u32), ParseTree>,
}

impl ParseSet {
    pub fn get(&self, doc_id: &str, claim_num: u32) -> Option<&ParseTree> {
        self.trees.get(&(doc_id.to_string(), claim_num))
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

/// Parses sidecar JSONL; bad JSON, bad trees and duplicate claims are errors
/// naming the line.
pub fn parse_parse_set(text: &str, origin: &Path) -> Result<ParseSet> {
    let mut set = ParseSet::default();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let format_err = |message: String| Error::Format {
            path: origin.to_path_buf(),
            line: idx + 1,
            message,
        };
        let rec: ParseRecord = serde_json::from_str(line).map_err(|e| format_err(e.to_string()))?;
        let tree = read_ptb(&rec.ptb).map_err(|e| format_err(e.to_string()))?;
        let key = (rec.doc_id, rec.claim_num);
        if set.trees.contains_key(&key) {
            return Err(format_err(format!(
                "duplicate parse for {} claim {}",
                key.0, key.1
            )));
        }
        set.trees.insert(key, tree);
    }
    Ok(set)
}

pub fn load_parse_set(path: impl AsRef<Path>) -> Result<ParseSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_parse_set(&text, path)
}
