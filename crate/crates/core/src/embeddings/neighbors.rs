use std::cmp::Ordering;

use super::EmbeddingSet;
use crate::error::{Error, Result};
use crate::math::{cosine, norm};

/// The `k` vocabulary tokens closest to `token` by cosine similarity,
/// excluding the token itself. Ties are broken by token order.
pub fn nearest_neighbors(set: &EmbeddingSet, token: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let query = set.compose_word_vector(token, None)?;
    if norm(&query) == 0.0 {
        return Err(Error::ZeroNorm(token.to_string()));
    }
    let candidates = set.composed_matrix();
    let mut scored: Vec<(&str, f64)> = set
        .vocab()
        .tokens()
        .iter()
        .zip(candidates.iter_rows())
        .filter(|(t, _)| t.as_str() != token)
        .map(|(t, row)| (t.as_str(), cosine(&query, row)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(t, s)| (t.to_string(), s))
        .collect())
}

/// Number of single-character tokens among `neighbors`.
pub fn single_char_audit<S: AsRef<str>>(neighbors: &[(S, f64)]) -> usize {
    neighbors
        .iter()
        .filter(|(t, _)| t.as_ref().chars().count() == 1)
        .count()
}
