//! Labelled headlines, unlabelled corpora and vocabularies.
//!
//! Input is pre-tokenized: a dataset line is `label<TAB>token token ...` and a
//! corpus line is one whitespace-tokenized sentence.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Reserved spelling of the unknown-token slot.
pub const UNK: &str = "<unk>";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Headline {
    pub label: usize,
    pub tokens: Vec<String>,
}

impl Headline {
    /// Serialises as a dataset line (without the trailing newline).
    pub fn to_line(&self, spec: &DatasetSpec) -> String {
        format!("{}\t{}", spec.class_name(self.label), self.tokens.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

/// The label set of a task plus optional split-size metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSpec {
    class_names: Vec<String>,
    index: HashMap<String, usize>,
    pub splits: Option<SplitSizes>,
}

impl DatasetSpec {
    pub fn new<S: Into<String>>(class_names: impl IntoIterator<Item = S>) -> Result<Self> {
        let class_names: Vec<String> = class_names.into_iter().map(Into::into).collect();
        if class_names.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 classes, got {}",
                class_names.len()
            )));
        }
        let mut index = HashMap::with_capacity(class_names.len());
        for (i, name) in class_names.iter().enumerate() {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid class name `{name}`")));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate class name `{name}`")));
            }
        }
        Ok(DatasetSpec {
            class_names,
            index,
            splits: None,
        })
    }

    pub fn with_splits(mut self, train: usize, dev: usize, test: usize) -> Self {
        self.splits = Some(SplitSizes { train, dev, test });
        self
    }

    /// Parses a classes file: one class name per line. Blank lines and `#`
    /// comments are skipped, except `# splits: TRAIN DEV TEST`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut splits = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("splits:") {
                    let sizes = rest
                        .split_whitespace()
                        .map(|s| s.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::parse(n + 1, format!("bad split size: {e}")))?;
                    if sizes.len() != 3 {
                        return Err(Error::parse(n + 1, "expected three split sizes"));
                    }
                    splits = Some(SplitSizes {
                        train: sizes[0],
                        dev: sizes[1],
                        test: sizes[2],
                    });
                }
                continue;
            }
            if !line.is_empty() {
                names.push(line.to_string());
            }
        }
        let mut spec = DatasetSpec::new(names)?;
        spec.splits = splits;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DatasetSpec::parse(&text)
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, label: usize) -> &str {
        &self.class_names[label]
    }

    pub fn label_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Parses one dataset line; `line_no` is used for error messages.
pub fn parse_headline(line: &str, spec: &DatasetSpec, line_no: usize) -> Result<Headline> {
    let (label, rest) = line
        .split_once('\t')
        .ok_or_else(|| Error::parse(line_no, "missing TAB between label and tokens"))?;
    let label = spec
        .label_of(label)
        .ok_or_else(|| Error::parse(line_no, format!("unknown label `{label}`")))?;
    let tokens: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    if tokens.is_empty() {
        return Err(Error::parse(line_no, "empty token list"));
    }
    Ok(Headline { label, tokens })
}

pub fn parse_dataset(text: &str, spec: &DatasetSpec) -> Result<Vec<Headline>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| parse_headline(line, spec, i + 1))
        .collect()
}

pub fn load_dataset(path: impl AsRef<Path>, spec: &DatasetSpec) -> Result<Vec<Headline>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, spec)
}

/// Reads token lines for prediction. A line may carry a label column, which
/// is ignored; otherwise the whole line is the token sequence.
pub fn parse_token_lines(text: &str) -> Result<Vec<Vec<String>>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let body = line.split_once('\t').map_or(line, |(_, rest)| rest);
            let tokens: Vec<String> = body.split_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                Err(Error::parse(i + 1, "empty token list"))
            } else {
                Ok(tokens)
            }
        })
        .collect()
}

/// Reads an unlabelled corpus: one whitespace-tokenized sentence per line.
/// Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect())
}

pub fn chars_of(token: &str) -> Result<Vec<char>> {
    if token.is_empty() {
        return Err(Error::Empty("token"));
    }
    Ok(token.chars().collect())
}

/// Re-tokenizes a word sequence into single characters.
pub fn split_chars<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens
        .iter()
        .flat_map(|t| t.as_ref().chars())
        .map(String::from)
        .collect()
}

/// Dense token ↔ index map. Real tokens occupy `0..num_tokens()`, ordered by
/// descending count then lexicographically; the unknown slot comes last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
}

impl Vocabulary {
    /// Counts tokens across `corpora` and keeps those seen at least
    /// `min_count` times.
    pub fn build<'a, I, S>(corpora: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<[String]> + 'a + ?Sized,
    {
        if min_count < 1 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for sentence in corpora {
            for token in sentence.as_ref() {
                if token != UNK {
                    *counts.entry(token.as_str()).or_default() += 1;
                }
            }
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Vocabulary::from_entries(
            kept.into_iter().map(|(t, c)| (t.to_string(), c)),
            min_count,
        ))
    }

    /// Builds a vocabulary with exactly the given order and counts.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, u64)>, min_count: u64) -> Self {
        let (tokens, counts): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            counts,
            index,
            min_count,
        }
    }

    /// Number of real tokens (excluding the unknown slot).
    pub fn num_tokens(&self) -> usize {
        self.tokens.len()
    }

    /// Total number of indices including the unknown slot.
    pub fn len(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk_index(&self) -> usize {
        self.tokens.len()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        if index == self.unk_index() {
            UNK
        } else {
            &self.tokens[index]
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(index).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps tokens to indices; unknown tokens map to [`Self::unk_index`].
    pub fn ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens
            .iter()
            .map(|t| self.get(t.as_ref()).unwrap_or(self.unk_index()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DatasetSpec {
        DatasetSpec::new(["tech", "sports", "world"]).unwrap()
    }

    fn sents(text: &str) -> Vec<Vec<String>> {
        text.lines()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn parses_a_headline() {
        let h = parse_headline("tech\t手机 发布", &spec(), 1).unwrap();
        assert_eq!(h.label, 0);
        assert_eq!(h.tokens, vec!["手机", "发布"]);
    }

    #[test]
    fn unknown_label_names_the_line() {
        let err = parse_dataset("tech\ta\nbogus\ta\n", &spec()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn empty_tokens_are_rejected() {
        let err = parse_dataset("tech\t  \n", &spec()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_dataset("tech no-tab\n", &spec()).is_err());
    }

    #[test]
    fn preserves_file_order() {
        let rows = parse_dataset("world\tc\ntech\ta\nsports\tb\n", &spec()).unwrap();
        let labels: Vec<usize> = rows.iter().map(|h| h.label).collect();
        assert_eq!(labels, vec![2, 0, 1]);
    }

    #[test]
    fn spec_validation() {
        assert!(DatasetSpec::new(["only"]).is_err());
        assert!(DatasetSpec::new(["a", "a"]).is_err());
        let s = DatasetSpec::parse("# splits: 156000 36000 36000\na\n\nb\n").unwrap();
        assert_eq!(s.num_classes(), 2);
        assert_eq!(s.splits.unwrap().dev, 36000);
    }

    #[test]
    fn min_count_threshold() {
        let mut text = String::new();
        for (tok, n) in [("a", 6), ("b", 5), ("c", 4)] {
            for _ in 0..n {
                text.push_str(tok);
                text.push(' ');
            }
        }
        let v = Vocabulary::build(&sents(&text), 5).unwrap();
        assert_eq!(v.get("a"), Some(0));
        assert_eq!(v.get("b"), Some(1));
        assert_eq!(v.get("c"), None);
        assert_eq!(v.unk_index(), 2);
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn min_count_one_keeps_everything() {
        let v = Vocabulary::build(&sents("x x y"), 1).unwrap();
        assert_eq!(v.get("x"), Some(0));
        assert_eq!(v.get("y"), Some(1));
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = Vocabulary::build(&sents("b a c a b c"), 1).unwrap();
        assert_eq!(v.tokens(), ["a", "b", "c"]);
    }

    #[test]
    fn all_filtered_is_an_error() {
        assert!(matches!(
            Vocabulary::build(&sents("a b c"), 2),
            Err(Error::EmptyVocabulary { .. })
        ));
        assert!(Vocabulary::build(&sents("a"), 0).is_err());
    }

    #[test]
    fn ids_map_oov_to_unk() {
        let v = Vocabulary::build(&sents("a a b"), 1).unwrap();
        assert_eq!(v.ids(&["a", "b"]), vec![0, 1]);
        assert_eq!(v.ids(&["a", "zzz"]), vec![0, v.unk_index()]);
        assert!(v.ids::<&str>(&[]).is_empty());
        assert_eq!(v.token(v.unk_index()), UNK);
    }

    #[test]
    fn chars_decompose_by_scalar_value() {
        assert_eq!(chars_of("高兴").unwrap(), vec!['高', '兴']);
        assert_eq!(chars_of("好").unwrap(), vec!['好']);
        assert_eq!(chars_of("ab").unwrap(), vec!['a', 'b']);
        assert!(chars_of("").is_err());
        assert_eq!(split_chars(&["高兴", "a"]), vec!["高", "兴", "a"]);
    }

    #[test]
    fn token_lines_ignore_label_column() {
        let rows = parse_token_lines("tech\ta b\nc d\n").unwrap();
        assert_eq!(rows, vec![vec!["a", "b"], vec!["c", "d"]]);
    }
}
