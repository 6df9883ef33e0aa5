//! Seeded synthetic corpora for tests, benchmarks and demos.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, Token};

pub fn vocabulary(size: usize) -> Vec<String> {
    (0..size).map(|i| format!("w{i:05}")).collect()
}

/// A first-order Markov "author": every word has its own sparse, skewed
/// successor distribution, fixed by the seed.
#[derive(Clone, Debug)]
pub struct MarkovAuthor {
    vocab: Vec<String>,
    successors: Vec<(Vec<usize>, WeightedIndex<f64>)>,
    sentence_end: f64,
}

impl MarkovAuthor {
    /// `branching` successors per word; weights decay geometrically so some
    /// transitions dominate.
    pub fn new(vocab: Vec<String>, branching: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = vocab.len();
        let branching = branching.clamp(1, n.saturating_sub(1).max(1));
        let successors = (0..n)
            .map(|from| {
                let mut next = Vec::with_capacity(branching);
                while next.len() < branching {
                    let cand = rng.gen_range(0..n);
                    if (cand != from || n == 1) && !next.contains(&cand) {
                        next.push(cand);
                    }
                }
                let decay: f64 = rng.gen_range(0.6..0.9);
                let weights: Vec<f64> = (0..branching).map(|i| decay.powi(i as i32)).collect();
                (next, WeightedIndex::new(weights).expect("positive weights"))
            })
            .collect();
        Self {
            vocab,
            successors,
            sentence_end: 1.0 / 12.0,
        }
    }

    pub fn with_sentence_end(mut self, probability: f64) -> Self {
        self.sentence_end = probability.clamp(0.0, 1.0);
        self
    }

    pub fn tokens(&self, length: usize, seed: u64) -> Vec<Token> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = rng.gen_range(0..self.vocab.len());
        let mut sentence = 0;
        (0..length)
            .map(|position| {
                let lemma = self.vocab[state].clone();
                let token = Token {
                    surface: lemma.clone(),
                    lemma,
                    sentence_index: sentence,
                    position,
                };
                if rng.gen_bool(self.sentence_end) {
                    sentence += 1;
                }
                let (next, dist) = &self.successors[state];
                state = next[dist.sample(&mut rng)];
                token
            })
            .collect()
    }

    pub fn document(&self, id: &str, author: &str, length: usize, seed: u64) -> Document {
        Document::new(id, author, id, self.tokens(length, seed))
    }
}

/// Independent Zipf-distributed word draws with geometric sentence lengths,
/// a rough stand-in for novel-sized text.
pub fn zipf_tokens(vocab_size: usize, exponent: f64, length: usize, seed: u64) -> Vec<Token> {
    let vocab = vocabulary(vocab_size);
    let weights: Vec<f64> = (1..=vocab_size)
        .map(|r| (r as f64).powf(-exponent))
        .collect();
    let dist = WeightedIndex::new(weights).expect("positive weights");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentence = 0;
    (0..length)
        .map(|position| {
            let lemma = vocab[dist.sample(&mut rng)].clone();
            let token = Token {
                surface: lemma.clone(),
                lemma,
                sentence_index: sentence,
                position,
            };
            if rng.gen_bool(0.1) {
                sentence += 1;
            }
            token
        })
        .collect()
}
