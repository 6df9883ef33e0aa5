//! Authorship attribution from per-word symmetry features.
//!
//! Each book becomes one row whose columns are the symmetry values of the
//! words every book shares. Books are then classified by author with
//! leave-one-out cross-validation.

mod classifiers;

pub use classifiers::{train_predict, ClassifierKind, ClassifierSpec, Standardizer};

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concentric::{symmetry_of, SymmetryKind};
use crate::error::{Error, Result};
use crate::wan::{shared_vocabulary, WordNetwork};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookLabel {
    pub id: String,
    pub author: String,
}

impl BookLabel {
    pub fn new(id: impl Into<String>, author: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            author: author.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub book_ids: Vec<String>,
    pub authors: Vec<String>,
    /// Shared lemmas in lexicographic order; `lemma@h` when several levels
    /// are concatenated.
    pub columns: Vec<String>,
    /// Row-major, one row per book.
    pub rows: Vec<Vec<f64>>,
    pub kind: SymmetryKind,
    pub levels: Vec<usize>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Sorted distinct author labels.
    pub fn classes(&self) -> Vec<String> {
        self.authors
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn select_rows(&self, keep: impl Fn(usize) -> bool) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.n_rows()).filter(|&i| keep(i)).collect();
        FeatureMatrix {
            book_ids: idx.iter().map(|&i| self.book_ids[i].clone()).collect(),
            authors: idx.iter().map(|&i| self.authors[i].clone()).collect(),
            columns: self.columns.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            kind: self.kind,
            levels: self.levels.clone(),
        }
    }

    /// CSV with header `book_id,author,<lemmas…>`.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["book_id".to_owned(), "author".to_owned()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = vec![self.book_ids[i].clone(), self.authors[i].clone()];
            record.extend(self.rows[i].iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<feature csv>", e))?;
        Ok(())
    }
}

pub fn build_features(
    networks: &[WordNetwork],
    labels: &[BookLabel],
    kind: SymmetryKind,
    h: usize,
) -> Result<FeatureMatrix> {
    build_features_levels(networks, labels, kind, &[h])
}

/// Symmetry features over the shared vocabulary, one block of columns per
/// level. A word whose symmetry is undefined in any book is dropped (from
/// every level block, so blocks stay aligned).
pub fn build_features_levels(
    networks: &[WordNetwork],
    labels: &[BookLabel],
    kind: SymmetryKind,
    levels: &[usize],
) -> Result<FeatureMatrix> {
    if networks.len() != labels.len() {
        return Err(Error::LengthMismatch(networks.len(), labels.len()));
    }
    if networks.len() < 2 {
        return Err(Error::InvalidInput("need at least two books".into()));
    }
    let authors: BTreeSet<&str> = labels.iter().map(|l| l.author.as_str()).collect();
    if authors.len() < 2 {
        return Err(Error::InvalidInput("need at least two authors".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidInput("no symmetry level requested".into()));
    }
    if let Some(&bad) = levels.iter().find(|&&h| h == 0) {
        return Err(Error::InvalidLevel(bad));
    }

    let vocab = shared_vocabulary(networks);
    // per_book[b][level][word]
    let per_book: Vec<Vec<Vec<Option<f64>>>> = networks
        .par_iter()
        .map(|net| {
            let nodes: Vec<_> = vocab
                .iter()
                .map(|w| net.node(w).expect("shared word"))
                .collect();
            levels
                .iter()
                .map(|&h| symmetry_of(net, &nodes, h, kind))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let keep: Vec<usize> = (0..vocab.len())
        .filter(|&w| {
            per_book
                .iter()
                .all(|book| book.iter().all(|level| level[w].is_some()))
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    let multi = levels.len() > 1;
    let columns = levels
        .iter()
        .flat_map(|&h| {
            let vocab = &vocab;
            keep.iter().map(move |&w| {
                if multi {
                    format!("{}@{h}", vocab[w])
                } else {
                    vocab[w].clone()
                }
            })
        })
        .collect();
    let rows = per_book
        .iter()
        .map(|book| {
            book.iter()
                .flat_map(|level| keep.iter().map(move |&w| level[w].unwrap()))
                .collect()
        })
        .collect();
    Ok(FeatureMatrix {
        book_ids: labels.iter().map(|l| l.id.clone()).collect(),
        authors: labels.iter().map(|l| l.author.clone()).collect(),
        columns,
        rows,
        kind,
        levels: levels.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub book_id: String,
    pub author: String,
    pub predicted: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Row/column order of `confusion`.
    pub authors: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<Prediction>,
    /// One-sided binomial p-value against uniform guessing.
    pub p_value: f64,
    pub spec: ClassifierSpec,
}

/// Leave-one-out over books. Folds run in parallel; each fold is seeded
/// identically, so the report does not depend on scheduling.
pub fn loocv(spec: &ClassifierSpec, features: &FeatureMatrix) -> Result<EvaluationReport> {
    let n = features.n_rows();
    if n < 2 {
        return Err(Error::InvalidInput(
            "leave-one-out needs at least two rows".into(),
        ));
    }
    let predicted: Vec<String> = (0..n)
        .into_par_iter()
        .map(|held_out| {
            let train = features.select_rows(|i| i != held_out);
            let test = [features.rows[held_out].clone()];
            train_predict(spec, &train, &test).map(|mut p| p.remove(0))
        })
        .collect::<Result<_>>()?;

    let authors = features.classes();
    let index = |a: &str| authors.iter().position(|x| x == a).expect("known author");
    let mut confusion = vec![vec![0usize; authors.len()]; authors.len()];
    let mut predictions = Vec::with_capacity(n);
    let mut correct = 0;
    for (i, p) in predicted.into_iter().enumerate() {
        let truth = &features.authors[i];
        confusion[index(truth)][index(&p)] += 1;
        if &p == truth {
            correct += 1;
        }
        predictions.push(Prediction {
            book_id: features.book_ids[i].clone(),
            author: truth.clone(),
            predicted: p,
        });
    }
    Ok(EvaluationReport {
        accuracy: correct as f64 / n as f64,
        correct,
        total: n,
        p_value: binomial_p_value(correct, n, 1.0 / authors.len() as f64),
        authors,
        confusion,
        predictions,
        spec: spec.clone(),
    })
}

fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// `P[X >= correct]` for `X ~ Binomial(n, chance)`, summed in log space.
pub fn binomial_p_value(correct: usize, n: usize, chance: f64) -> f64 {
    assert!(correct <= n, "correct ({correct}) exceeds trials ({n})");
    assert!(chance > 0.0 && chance < 1.0, "chance must lie in (0, 1)");
    if correct == 0 {
        return 1.0;
    }
    let lf = ln_factorial_table(n);
    let (lp, lq) = (chance.ln(), (1.0 - chance).ln());
    let terms: Vec<f64> = (correct..=n)
        .map(|k| lf[n] - lf[k] - lf[n - k] + k as f64 * lp + (n - k) as f64 * lq)
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}
