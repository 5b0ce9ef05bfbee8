//! Generated datasets with known structure, for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DatasetSpec, Headline};

/// A keyword-separable classification task.
#[derive(Clone, Debug)]
pub struct KeywordTask {
    pub spec: DatasetSpec,
    pub train: Vec<Headline>,
    pub dev: Vec<Headline>,
}

/// Headlines of 3–8 tokens: one keyword unique to the gold class (drawn from
/// three per class) mixed into filler tokens shared by every class.
pub fn keyword_task(classes: usize, n_train: usize, n_dev: usize, seed: u64) -> KeywordTask {
    let spec = DatasetSpec::new((0..classes).map(|k| format!("class{k:02}")))
        .expect("at least two classes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fillers: Vec<String> = (0..60).map(|i| format!("w{i}")).collect();
    let make = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Headline> {
        (0..n)
            .map(|i| {
                let label = i % classes;
                let len = rng.gen_range(3..=8);
                let mut tokens: Vec<String> = (0..len - 1)
                    .map(|_| fillers.choose(rng).expect("fillers").clone())
                    .collect();
                let keyword = format!("k{label}_{}", rng.gen_range(0..3));
                let at = rng.gen_range(0..=tokens.len());
                tokens.insert(at, keyword);
                Headline { label, tokens }
            })
            .collect()
    };
    let mut train = make(n_train, &mut rng);
    let dev = make(n_dev, &mut rng);
    train.shuffle(&mut rng);
    KeywordTask { spec, train, dev }
}

/// Tokens of [`equivalence_corpus`].
pub const TWIN_A: &str = "甲乙";
pub const TWIN_B: &str = "丙丁";
pub const LONER: &str = "戊己";

/// Two-token sentences in which `TWIN_A` and `TWIN_B` share one set of
/// context words and `LONER` has a disjoint set. The twins are
/// distributionally identical.
pub fn equivalence_corpus(repeats: usize, seed: u64) -> Vec<Vec<String>> {
    let shared: Vec<String> = "春夏秋冬东西南北"
        .chars()
        .map(|c| format!("{c}天"))
        .collect();
    let apart: Vec<String> = "金木水火土山川林"
        .chars()
        .map(|c| format!("{c}地"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..repeats {
        for ctx in &shared {
            out.push(vec![TWIN_A.to_string(), ctx.clone()]);
            out.push(vec![ctx.clone(), TWIN_B.to_string()]);
        }
        for ctx in &apart {
            out.push(vec![LONER.to_string(), ctx.clone()]);
        }
    }
    out.shuffle(&mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_task_is_balanced_and_marked() {
        let task = keyword_task(4, 40, 8, 1);
        assert_eq!(task.train.len(), 40);
        for h in task.train.iter().chain(&task.dev) {
            let prefix = format!("k{}_", h.label);
            assert_eq!(
                h.tokens.iter().filter(|t| t.starts_with(&prefix)).count(),
                1
            );
            assert!(h.tokens.len() >= 3 && h.tokens.len() <= 8);
        }
    }
}
