//! Plurality voting over prediction sources arranged in a tree.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: usize,
    /// Max softmax probability, or a squashed SVM score.
    pub confidence: f64,
}

impl Prediction {
    pub fn new(label: usize, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Config(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Prediction { label, confidence })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VoteRule {
    /// Most votes wins; ties go to the higher mean confidence, then the
    /// smaller label.
    #[default]
    Plurality,
    /// Highest summed confidence wins; ties go to the smaller label.
    ConfidenceSum,
}

struct Tally {
    count: usize,
    sum: f64,
}

/// Per-label counts and confidence sums in ascending label order. Each sum
/// adds confidences in sorted order, so it does not depend on vote order.
fn tally(votes: &[Prediction]) -> Vec<(usize, Tally)> {
    let mut by_label: HashMap<usize, Vec<f64>> = HashMap::new();
    for v in votes {
        by_label.entry(v.label).or_default().push(v.confidence);
    }
    let mut out: Vec<_> = by_label
        .into_iter()
        .map(|(label, mut c)| {
            c.sort_by(f64::total_cmp);
            let tally = Tally {
                count: c.len(),
                sum: c.iter().sum(),
            };
            (label, tally)
        })
        .collect();
    out.sort_by_key(|(label, _)| *label);
    out
}

/// Confidences closer than this are tied, so rounding in sums cannot
/// depend on vote order or a common scale factor.
const CONFIDENCE_TIE: f64 = 1e-9;

fn clearly_greater(a: f64, b: f64) -> bool {
    a > b + CONFIDENCE_TIE
}

pub fn plurality_vote(votes: &[Prediction]) -> Result<Prediction> {
    vote(votes, VoteRule::Plurality)
}

pub fn vote(votes: &[Prediction], rule: VoteRule) -> Result<Prediction> {
    if votes.is_empty() {
        return Err(Error::Empty("vote"));
    }
    let tallies = tally(votes);
    // ascending label order, so strict comparisons keep the smallest label
    let mut best: Option<&(usize, Tally)> = None;
    for entry in &tallies {
        let better = match best {
            None => true,
            Some((_, b)) => {
                let t = &entry.1;
                match rule {
                    VoteRule::Plurality => {
                        t.count > b.count
                            || (t.count == b.count
                                && clearly_greater(t.sum / t.count as f64, b.sum / b.count as f64))
                    }
                    VoteRule::ConfidenceSum => clearly_greater(t.sum, b.sum),
                }
            }
        };
        if better {
            best = Some(entry);
        }
    }
    let (label, t) = best.expect("non-empty tallies");
    Ok(Prediction {
        label: *label,
        confidence: (t.sum / t.count as f64).clamp(0.0, 1.0),
    })
}

/// Leaves name prediction sources; inner nodes vote over their children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VoteTree {
    Leaf(String),
    Vote(Vec<VoteTree>),
}

const VOTE_KEYWORD: &str = "vote";

impl VoteTree {
    pub fn leaf(id: impl Into<String>) -> Self {
        VoteTree::Leaf(id.into())
    }

    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            VoteTree::Leaf(id) => out.push(id),
            VoteTree::Vote(children) => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            VoteTree::Leaf(_) => 1,
            VoteTree::Vote(children) => children.iter().map(VoteTree::leaf_count).sum(),
        }
    }

    pub fn children(&self) -> &[VoteTree] {
        match self {
            VoteTree::Leaf(_) => &[],
            VoteTree::Vote(children) => children,
        }
    }

    pub fn eval(&self, predictions: &HashMap<String, Prediction>) -> Result<Prediction> {
        self.eval_with(predictions, VoteRule::Plurality)
    }

    /// Evaluates bottom-up: leaves look up their source, inner nodes vote.
    pub fn eval_with(
        &self,
        predictions: &HashMap<String, Prediction>,
        rule: VoteRule,
    ) -> Result<Prediction> {
        match self {
            VoteTree::Leaf(id) => predictions
                .get(id)
                .copied()
                .ok_or_else(|| Error::MissingSystem(id.clone())),
            VoteTree::Vote(children) => {
                let votes = children
                    .iter()
                    .map(|c| c.eval_with(predictions, rule))
                    .collect::<Result<Vec<_>>>()?;
                vote(&votes, rule)
            }
        }
    }

    /// Indented text form: `vote` opens an inner node, anything else is a
    /// leaf id, and children sit two spaces deeper than their parent.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, &mut out);
        out
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        match self {
            VoteTree::Leaf(id) => {
                let _ = writeln!(out, "{indent}{id}");
            }
            VoteTree::Vote(children) => {
                let _ = writeln!(out, "{indent}{VOTE_KEYWORD}");
                children.iter().for_each(|c| c.write_text(depth + 1, out));
            }
        }
    }

    /// Parses [`Self::to_text`] output. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.trim_start_matches(' ');
            if content.trim().is_empty() || content.starts_with('#') {
                continue;
            }
            let spaces = raw.len() - content.len();
            if spaces % 2 != 0 {
                return Err(Error::parse(
                    i + 1,
                    "indentation must be a multiple of two spaces",
                ));
            }
            let content = content.trim_end();
            if content.chars().any(char::is_whitespace) {
                return Err(Error::parse(i + 1, "system ids cannot contain whitespace"));
            }
            lines.push((i + 1, spaces / 2, content));
        }
        let Some(&(first, depth, _)) = lines.first() else {
            return Err(Error::Empty("vote tree"));
        };
        if depth != 0 {
            return Err(Error::parse(first, "root must not be indented"));
        }
        let mut pos = 0;
        let tree = parse_node(&lines, &mut pos, 0)?;
        if let Some(&(line, _, _)) = lines.get(pos) {
            return Err(Error::parse(line, "more than one root node"));
        }
        Ok(tree)
    }
}

fn parse_node(lines: &[(usize, usize, &str)], pos: &mut usize, depth: usize) -> Result<VoteTree> {
    let (line, _, content) = lines[*pos];
    *pos += 1;
    if content != VOTE_KEYWORD {
        if let Some(&(next, d, _)) = lines.get(*pos) {
            if d > depth {
                return Err(Error::parse(next, "leaf nodes cannot have children"));
            }
        }
        return Ok(VoteTree::Leaf(content.to_string()));
    }
    let mut children = Vec::new();
    while let Some(&(l, d, _)) = lines.get(*pos) {
        if d <= depth {
            break;
        }
        if d != depth + 1 {
            return Err(Error::parse(
                l,
                "indented more than one level below its parent",
            ));
        }
        children.push(parse_node(lines, pos, depth + 1)?);
    }
    if children.is_empty() {
        return Err(Error::parse(line, "vote node without children"));
    }
    Ok(VoteTree::Vote(children))
}

/// Network names in the order the topology builder expects them.
pub const PAPER_ARCHS: [&str; 3] = ["nbow", "cnn", "lstm"];
/// Embedding names in the order the topology builder expects them.
pub const PAPER_EMBEDDINGS: [&str; 5] = [
    "cwe-l-w5",
    "cwe-p-w5",
    "fasttext-w5",
    "cwe-l-w11",
    "cwe-p-w11",
];
pub const BOW_SYSTEM: &str = "bow-svm";

/// The sixteen default system ids: every network on every embedding
/// (network-major), then the bag-of-words SVM.
pub fn paper_system_ids() -> Vec<String> {
    let mut ids: Vec<String> = PAPER_ARCHS
        .iter()
        .flat_map(|a| PAPER_EMBEDDINGS.iter().map(move |e| format!("{a}-{e}")))
        .collect();
    ids.push(BOW_SYSTEM.to_string());
    ids
}

/// `vote(vote(net₁ × 5), vote(net₂ × 5), vote(net₃ × 5), bow)` from 15
/// network ids grouped by network (five each) followed by the BoW id.
pub fn build_paper_topology<S: AsRef<str>>(ids: &[S]) -> Result<VoteTree> {
    let per_arch = PAPER_EMBEDDINGS.len();
    let expected = PAPER_ARCHS.len() * per_arch + 1;
    if ids.len() != expected {
        return Err(Error::Config(format!(
            "expected {expected} system ids ({} networks x {per_arch} embeddings + 1 bag-of-words), got {}",
            PAPER_ARCHS.len(),
            ids.len()
        )));
    }
    let (nets, bow) = ids.split_at(expected - 1);
    let mut root: Vec<VoteTree> = nets
        .chunks(per_arch)
        .map(|group| VoteTree::Vote(group.iter().map(|id| VoteTree::leaf(id.as_ref())).collect()))
        .collect();
    root.push(VoteTree::leaf(bow[0].as_ref()));
    Ok(VoteTree::Vote(root))
}

/// All ids under a single vote.
pub fn flat_topology<S: AsRef<str>>(ids: &[S]) -> Result<VoteTree> {
    if ids.is_empty() {
        return Err(Error::Empty("system ids"));
    }
    Ok(VoteTree::Vote(
        ids.iter().map(|id| VoteTree::leaf(id.as_ref())).collect(),
    ))
}
