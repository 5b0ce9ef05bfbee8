//! Text persistence.
//!
//! The word-vector file starts with `V dim` and holds one `token v1 … v_dim`
//! row per vocabulary token (composed vectors, UNK excluded). Variants with a
//! sub-table also write `<path>.sub`: a header `tag rows dim [params]` and
//! one `key v1 … v_dim` row per character slot or n-gram.

use std::fs;
use std::path::{Path, PathBuf};

use super::{EmbeddingSet, EmbeddingTrainConfig, SubwordTable, Variant};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::textfmt::{parse_row, push_values};

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sub");
    PathBuf::from(s)
}

pub fn format_word_vectors(set: &EmbeddingSet) -> String {
    let vectors = if set.is_precomposed() {
        Matrix::from_vec(
            set.vocab().num_tokens(),
            set.dim(),
            set.input().as_slice()[..set.vocab().num_tokens() * set.dim()].to_vec(),
        )
    } else {
        set.composed_matrix()
    };
    let mut out = format!("{} {}\n", set.vocab().num_tokens(), set.dim());
    for (token, row) in set.vocab().tokens().iter().zip(vectors.iter_rows()) {
        out.push_str(token);
        push_values(&mut out, row);
        out.push('\n');
    }
    out
}

pub fn format_sidecar(set: &EmbeddingSet) -> Option<String> {
    let config = set.config();
    let params = match config.variant {
        Variant::Sgns => return None,
        Variant::CwePosition => String::new(),
        Variant::CweCluster => format!(" {}", config.clusters),
        Variant::FastText => format!(" {} {}", config.min_n, config.max_n),
    };
    let sub = set.subwords();
    let mut out = format!(
        "{} {} {}{}\n",
        config.variant.tag(),
        sub.len(),
        set.dim(),
        params
    );
    for (key, row) in sub.keys().iter().zip(sub.vectors().iter_rows()) {
        out.push_str(key);
        push_values(&mut out, row);
        out.push('\n');
    }
    Some(out)
}

/// Writes the word vectors and, when the variant has one, the sub-table
/// sidecar.
pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_word_vectors(set)).map_err(|e| Error::io(path, e))?;
    if let Some(sidecar) = format_sidecar(set) {
        let sub = sidecar_path(path);
        fs::write(&sub, sidecar).map_err(|e| Error::io(&sub, e))?;
    }
    Ok(())
}

/// Reads word vectors (and the sidecar, if present). The result composes
/// in-vocabulary words from the stored rows; fastText sets can also compose
/// unseen words from the n-gram table.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (tokens, vectors) = parse_table(&text)?;
    let dim = vectors.cols();
    let mut config = EmbeddingTrainConfig {
        dim,
        min_count: 1,
        ..Default::default()
    };
    let sub_path = sidecar_path(path);
    let sub = if sub_path.exists() {
        let text = fs::read_to_string(&sub_path).map_err(|e| Error::io(&sub_path, e))?;
        let (header, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::parse(1, "missing sidecar header"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let variant: Variant = fields
            .first()
            .copied()
            .unwrap_or_default()
            .parse()
            .map_err(|e: Error| Error::parse(1, e.to_string()))?;
        let num = |i: usize| -> Result<usize> {
            fields
                .get(i)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::parse(1, format!("bad sidecar header field {}", i + 1)))
        };
        let expected_fields = match variant {
            Variant::Sgns => 3,
            Variant::CwePosition => 3,
            Variant::CweCluster => 4,
            Variant::FastText => 5,
        };
        if fields.len() != expected_fields {
            return Err(Error::parse(
                1,
                format!("expected {expected_fields} header fields"),
            ));
        }
        config.variant = variant;
        match variant {
            Variant::CweCluster => config.clusters = num(3)?,
            Variant::FastText => {
                config.min_n = num(3)?;
                config.max_n = num(4)?;
            }
            _ => {}
        }
        let rows = num(1)?;
        if num(2)? != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: num(2)?,
            });
        }
        let (keys, vectors) = parse_rows(body, rows, dim, 2)?;
        SubwordTable::from_parts(keys, vectors, variant)?
    } else {
        SubwordTable::empty(dim)
    };
    let vocab = Vocabulary::from_entries(tokens.into_iter().map(|t| (t, 1)), 1);
    let mut input = Matrix::zeros(vocab.len(), dim);
    input.as_mut_slice()[..vectors.as_slice().len()].copy_from_slice(vectors.as_slice());
    let output = Matrix::zeros(vocab.len(), dim);
    Ok(EmbeddingSet::from_parts(
        vocab, input, output, sub, config, true,
    ))
}

fn parse_table(text: &str) -> Result<(Vec<String>, Matrix)> {
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let mut fields = header.split(' ');
    let parse_num = |f: Option<&str>, what: &str| -> Result<usize> {
        f.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("header: bad {what}")))
    };
    let rows = parse_num(fields.next(), "vocabulary size")?;
    let dim = parse_num(fields.next(), "dimension")?;
    if fields.next().is_some() {
        return Err(Error::parse(1, "header: expected `V dim`"));
    }
    if dim == 0 {
        return Err(Error::parse(1, "header: dimension must be positive"));
    }
    parse_rows(body, rows, dim, 2)
}

fn parse_rows(
    body: &str,
    rows: usize,
    dim: usize,
    first_line: usize,
) -> Result<(Vec<String>, Matrix)> {
    let mut keys = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    let mut lines = body.lines();
    for i in 0..rows {
        let line_no = first_line + i;
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(line_no, format!("expected {rows} rows, found {i}")))?;
        let mut fields = line.split(' ');
        let key = fields.next().unwrap_or_default();
        if key.is_empty() {
            return Err(Error::parse(line_no, "missing key"));
        }
        keys.push(key.to_string());
        data.extend(parse_row(fields, dim, line_no)?);
    }
    if let Some((extra, _)) = lines.enumerate().find(|(_, l)| !l.is_empty()) {
        return Err(Error::parse(
            first_line + rows + extra,
            format!("more than {rows} rows"),
        ));
    }
    Ok((keys, Matrix::from_vec(rows, dim, data)))
}
