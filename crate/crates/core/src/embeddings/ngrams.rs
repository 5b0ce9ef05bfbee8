use crate::error::{Error, Result};

pub const BOW: char = '<';
pub const EOW: char = '>';

/// Character n-grams of `<word>` with lengths in `min_n..=max_n`, shortest
/// first and left to right within a length. The full bracketed word is left
/// out since the word vector itself stands for it. Repeated n-grams are
/// returned once per occurrence.
pub fn extract_ngrams(word: &str, min_n: usize, max_n: usize) -> Result<Vec<String>> {
    if word.is_empty() {
        return Err(Error::Empty("word"));
    }
    if min_n < 1 || min_n > max_n {
        return Err(Error::Config(format!(
            "invalid n-gram range {min_n}..={max_n}"
        )));
    }
    let wrapped: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let len = wrapped.len();
    let mut out = Vec::new();
    for n in min_n..=max_n.min(len) {
        if n == len {
            continue;
        }
        for start in 0..=len - n {
            out.push(wrapped[start..start + n].iter().collect());
        }
    }
    Ok(out)
}
