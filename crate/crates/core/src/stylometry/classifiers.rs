//! The four authorship classifiers, written out directly so that their
//! behaviour (tie-breaking, schedules, seeding) is fully pinned down.
//!
//! Features are z-scored with statistics from the training rows only.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Mlp,
    Knn,
    Nby,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Svm,
        ClassifierKind::Mlp,
        ClassifierKind::Knn,
        ClassifierKind::Nby,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Nby => "nby",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown classifier `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub knn_k: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub mlp_hidden: usize,
    pub mlp_learning_rate: f64,
    pub mlp_epochs: usize,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            knn_k: 1,
            svm_c: 1.0,
            svm_epochs: 200,
            mlp_hidden: 20,
            mlp_learning_rate: 0.01,
            mlp_epochs: 500,
            seed: 0,
        }
    }

    pub fn knn(k: usize) -> Self {
        Self {
            knn_k: k,
            ..Self::new(ClassifierKind::Knn)
        }
    }
}

/// Per-column z-scoring. Constant columns are only centered.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Trains on `train` and labels each row of `test`.
pub fn train_predict(
    spec: &ClassifierSpec,
    train: &FeatureMatrix,
    test: &[Vec<f64>],
) -> Result<Vec<String>> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let d = train.n_cols();
    for row in train.rows.iter().chain(test) {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
    }
    let classes = train.classes();
    let y: Vec<usize> = train
        .authors
        .iter()
        .map(|a| classes.binary_search(a).expect("class present"))
        .collect();
    let scaler = Standardizer::fit(&train.rows);
    let x: Vec<Vec<f64>> = train.rows.iter().map(|r| scaler.transform(r)).collect();
    let test: Vec<Vec<f64>> = test.iter().map(|r| scaler.transform(r)).collect();

    let k = classes.len();
    let predicted: Vec<usize> = match spec.kind {
        ClassifierKind::Knn => {
            if spec.knn_k == 0 {
                return Err(Error::InvalidInput("knn needs k >= 1".into()));
            }
            test.iter()
                .map(|t| knn_predict(&x, &y, k, spec.knn_k, t))
                .collect()
        }
        ClassifierKind::Nby => {
            let model = GaussianNb::fit(&x, &y, k);
            test.iter().map(|t| model.predict(t)).collect()
        }
        ClassifierKind::Svm => {
            let model = LinearSvm::fit(&x, &y, k, spec.svm_c, spec.svm_epochs);
            test.iter().map(|t| model.predict(t)).collect()
        }
        ClassifierKind::Mlp => {
            let model = Mlp::fit(&x, &y, k, spec);
            test.iter().map(|t| model.predict(t)).collect()
        }
    };
    Ok(predicted.into_iter().map(|c| classes[c].clone()).collect())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the maximum; earliest index wins ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Majority vote among the `k` nearest training rows. Neighbors are ordered
/// by (distance, class), so the result does not depend on row order. A vote
/// tie goes to the tied class whose nearest member is closest.
fn knn_predict(x: &[Vec<f64>], y: &[usize], classes: usize, k: usize, t: &[f64]) -> usize {
    let mut order: Vec<(f64, usize)> = x.iter().zip(y).map(|(r, &c)| (sq_dist(r, t), c)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let neighbors = &order[..k.min(order.len())];
    let mut votes = vec![0usize; classes];
    for &(_, c) in neighbors {
        votes[c] += 1;
    }
    let top = *votes.iter().max().unwrap();
    neighbors
        .iter()
        .find(|&&(_, c)| votes[c] == top)
        .map(|&(_, c)| c)
        .unwrap()
}

struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNb {
    fn fit(x: &[Vec<f64>], y: &[usize], classes: usize) -> Self {
        let d = x[0].len();
        let mut count = vec![0usize; classes];
        let mut mean = vec![vec![0.0; d]; classes];
        for (row, &c) in x.iter().zip(y) {
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &n) in mean.iter_mut().zip(&count) {
            m.iter_mut().for_each(|v| *v /= n.max(1) as f64);
        }
        let mut var = vec![vec![0.0; d]; classes];
        for (row, &c) in x.iter().zip(y) {
            for ((s, v), m) in var[c].iter_mut().zip(row).zip(&mean[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in var.iter_mut().zip(&count) {
            s.iter_mut()
                .for_each(|v| *v = (*v / n.max(1) as f64).max(VARIANCE_FLOOR));
        }
        let total = x.len() as f64;
        let log_prior = count
            .iter()
            .map(|&n| {
                if n == 0 {
                    f64::NEG_INFINITY
                } else {
                    (n as f64 / total).ln()
                }
            })
            .collect();
        Self {
            log_prior,
            mean,
            var,
        }
    }

    fn predict(&self, t: &[f64]) -> usize {
        let scores: Vec<f64> = (0..self.log_prior.len())
            .map(|c| {
                let ll: f64 = t
                    .iter()
                    .zip(&self.mean[c])
                    .zip(&self.var[c])
                    .map(|((v, m), s)| {
                        -0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s)
                    })
                    .sum();
                self.log_prior[c] + ll
            })
            .collect();
        argmax(&scores)
    }
}

/// One-vs-rest linear SVM with hinge loss and L2 penalty, trained by
/// full-batch Pegasos subgradient steps. The bias is an extra constant
/// feature and is regularized with the weights.
struct LinearSvm {
    weights: Vec<Vec<f64>>,
}

impl LinearSvm {
    fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, c: f64, epochs: usize) -> Self {
        let n = x.len();
        let d = x[0].len() + 1;
        let lambda = 1.0 / (c * n as f64);
        let weights = (0..classes)
            .map(|class| {
                let mut w = vec![0.0; d];
                let mut grad = vec![0.0; d];
                for t in 1..=epochs {
                    let eta = 1.0 / (lambda * t as f64);
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for (row, &label) in x.iter().zip(y) {
                        let sign = if label == class { 1.0 } else { -1.0 };
                        if sign * decision(&w, row) < 1.0 {
                            for (g, v) in grad.iter_mut().zip(row.iter().chain([&1.0])) {
                                *g += sign * v;
                            }
                        }
                    }
                    let shrink = 1.0 - eta * lambda;
                    for (wi, g) in w.iter_mut().zip(&grad) {
                        *wi = shrink * *wi + eta * g / n as f64;
                    }
                    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let radius = 1.0 / lambda.sqrt();
                    if norm > radius {
                        w.iter_mut().for_each(|v| *v *= radius / norm);
                    }
                }
                w
            })
            .collect();
        Self { weights }
    }

    fn predict(&self, t: &[f64]) -> usize {
        let scores: Vec<f64> = self.weights.iter().map(|w| decision(w, t)).collect();
        argmax(&scores)
    }
}

fn decision(w: &[f64], row: &[f64]) -> f64 {
    let d = row.len();
    w[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + w[d]
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// One hidden layer of logistic units, softmax output, cross-entropy loss.
/// Full-batch gradient descent on the summed loss.
struct Mlp {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

impl Mlp {
    fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, spec: &ClassifierSpec) -> Self {
        let d = x[0].len();
        let hidden = spec.mlp_hidden.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut init = |fan_in: usize, fan_out: usize| -> Vec<Vec<f64>> {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.gen_range(-a..a)).collect())
                .collect()
        };
        let mut net = Mlp {
            w1: init(d, hidden),
            b1: vec![0.0; hidden],
            w2: init(hidden, classes),
            b2: vec![0.0; classes],
        };

        let lr = spec.mlp_learning_rate;
        let mut gw1 = vec![vec![0.0; d]; hidden];
        let mut gb1 = vec![0.0; hidden];
        let mut gw2 = vec![vec![0.0; hidden]; classes];
        let mut gb2 = vec![0.0; classes];
        let mut delta_h = vec![0.0; hidden];
        for _ in 0..spec.mlp_epochs {
            gw1.iter_mut().flatten().for_each(|g| *g = 0.0);
            gw2.iter_mut().flatten().for_each(|g| *g = 0.0);
            gb1.iter_mut().for_each(|g| *g = 0.0);
            gb2.iter_mut().for_each(|g| *g = 0.0);
            for (row, &label) in x.iter().zip(y) {
                let (h, p) = net.forward(row);
                // dL/dz_out = p - onehot
                let delta_o: Vec<f64> = p
                    .iter()
                    .enumerate()
                    .map(|(c, &pc)| pc - if c == label { 1.0 } else { 0.0 })
                    .collect();
                for (j, dh) in delta_h.iter_mut().enumerate() {
                    let back: f64 = (0..classes).map(|c| net.w2[c][j] * delta_o[c]).sum();
                    *dh = back * h[j] * (1.0 - h[j]);
                }
                for c in 0..classes {
                    gb2[c] += delta_o[c];
                    for (g, hj) in gw2[c].iter_mut().zip(&h) {
                        *g += delta_o[c] * hj;
                    }
                }
                for j in 0..hidden {
                    gb1[j] += delta_h[j];
                    for (g, v) in gw1[j].iter_mut().zip(row) {
                        *g += delta_h[j] * v;
                    }
                }
            }
            for (w, g) in net.w1.iter_mut().flatten().zip(gw1.iter().flatten()) {
                *w -= lr * g;
            }
            for (w, g) in net.w2.iter_mut().flatten().zip(gw2.iter().flatten()) {
                *w -= lr * g;
            }
            for (b, g) in net.b1.iter_mut().zip(&gb1) {
                *b -= lr * g;
            }
            for (b, g) in net.b2.iter_mut().zip(&gb2) {
                *b -= lr * g;
            }
        }
        net
    }

    fn forward(&self, row: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| sigmoid(w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>() + b))
            .collect();
        let z: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(w, b)| w.iter().zip(&h).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect();
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exp.iter().sum();
        (h, exp.into_iter().map(|e| e / sum).collect())
    }

    fn predict(&self, t: &[f64]) -> usize {
        argmax(&self.forward(t).1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentric::SymmetryKind;
    use rand_chacha::ChaCha8Rng;

    fn matrix(rows: Vec<Vec<f64>>, authors: Vec<&str>) -> FeatureMatrix {
        let d = rows.first().map_or(0, Vec::len);
        FeatureMatrix {
            book_ids: (0..rows.len()).map(|i| format!("r{i}")).collect(),
            authors: authors.into_iter().map(String::from).collect(),
            columns: (0..d).map(|j| format!("f{j}")).collect(),
            rows,
            kind: SymmetryKind::Merged,
            levels: vec![2],
        }
    }

    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        // Box–Muller.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<&'static str>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let (cx, label) = if i % 2 == 0 { (0.0, "A") } else { (10.0, "B") };
            rows.push(vec![
                cx + gaussian(&mut rng),
                cx + gaussian(&mut rng),
                gaussian(&mut rng),
            ]);
            labels.push(label);
        }
        (rows, labels)
    }

    fn xor(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<&'static str>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let (sx, sy) = [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)][i % 4];
            rows.push(vec![
                sx * 2.0 + 0.3 * gaussian(&mut rng),
                sy * 2.0 + 0.3 * gaussian(&mut rng),
            ]);
            labels.push(if i % 4 < 2 { "same" } else { "diff" });
        }
        (rows, labels)
    }

    fn accuracy(pred: &[String], truth: &[&str]) -> f64 {
        pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
    }

    #[test]
    fn knn_single_point() {
        let train = matrix(vec![vec![0.0, 0.0]], vec!["A"]);
        let pred = train_predict(&ClassifierSpec::knn(1), &train, &[vec![100.0, -3.0]]).unwrap();
        assert_eq!(pred, ["A"]);
    }

    #[test]
    fn separated_blobs_all_classifiers() {
        let (train_rows, train_labels) = blobs(60, 1);
        let (test_rows, test_labels) = blobs(40, 2);
        let train = matrix(train_rows, train_labels);
        for kind in ClassifierKind::ALL {
            let pred = train_predict(&ClassifierSpec::new(kind), &train, &test_rows).unwrap();
            assert_eq!(accuracy(&pred, &test_labels), 1.0, "{kind}");
        }
    }

    #[test]
    fn xor_separability() {
        let (train_rows, train_labels) = xor(200, 3);
        let (test_rows, test_labels) = xor(200, 4);
        let train = matrix(train_rows, train_labels);

        let svm = train_predict(
            &ClassifierSpec::new(ClassifierKind::Svm),
            &train,
            &test_rows,
        )
        .unwrap();
        assert!(accuracy(&svm, &test_labels) <= 0.75);

        let spec = ClassifierSpec {
            mlp_hidden: 8,
            mlp_learning_rate: 0.01,
            mlp_epochs: 3000,
            seed: 7,
            ..ClassifierSpec::new(ClassifierKind::Mlp)
        };
        let mlp = train_predict(&spec, &train, &test_rows).unwrap();
        assert!(
            accuracy(&mlp, &test_labels) >= 0.95,
            "mlp {}",
            accuracy(&mlp, &test_labels)
        );
    }

    #[test]
    fn knn_perfect_on_training_set() {
        let (rows, labels) = blobs(30, 5);
        let train = matrix(rows.clone(), labels.clone());
        let pred = train_predict(&ClassifierSpec::knn(1), &train, &rows).unwrap();
        assert_eq!(accuracy(&pred, &labels), 1.0);
    }

    #[test]
    fn knn_vote_tie_goes_to_nearest() {
        let train = matrix(
            vec![vec![0.0], vec![1.0], vec![3.0], vec![4.0]],
            vec!["A", "B", "A", "B"],
        );
        // Standardized positions keep the order; with k = 2 at 0.9 the
        // nearest two are B(1.0) and A(0.0): one vote each, B is closer.
        let pred = train_predict(&ClassifierSpec::knn(2), &train, &[vec![0.9]]).unwrap();
        assert_eq!(pred, ["B"]);
    }

    #[test]
    fn permutation_invariance() {
        let (rows, labels) = blobs(24, 9);
        let (test_rows, _) = blobs(10, 10);
        let train = matrix(rows.clone(), labels.clone());
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        perm.reverse();
        perm.rotate_left(5);
        let shuffled = matrix(
            perm.iter().map(|&i| rows[i].clone()).collect(),
            perm.iter().map(|&i| labels[i]).collect(),
        );
        for spec in [
            ClassifierSpec::knn(3),
            ClassifierSpec::new(ClassifierKind::Nby),
        ] {
            assert_eq!(
                train_predict(&spec, &train, &test_rows).unwrap(),
                train_predict(&spec, &shuffled, &test_rows).unwrap()
            );
        }
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let (rows, labels) = xor(80, 11);
        let train = matrix(rows.clone(), labels);
        for kind in [ClassifierKind::Svm, ClassifierKind::Mlp] {
            let spec = ClassifierSpec {
                seed: 42,
                ..ClassifierSpec::new(kind)
            };
            assert_eq!(
                train_predict(&spec, &train, &rows).unwrap(),
                train_predict(&spec, &train, &rows).unwrap()
            );
        }
    }

    #[test]
    fn test_rows_do_not_leak_into_scaling() {
        let (rows, labels) = blobs(20, 12);
        let train = matrix(rows.clone(), labels);
        let stats = Standardizer::fit(&train.rows);
        let probe = vec![vec![5.0, 5.0, 0.0], vec![1e6, -1e6, 3.0]];
        let perturbed = vec![vec![5.0, 5.0, 0.0], vec![-7.0, 2.0, 1e9]];
        for kind in ClassifierKind::ALL {
            let spec = ClassifierSpec::new(kind);
            let a = train_predict(&spec, &train, &probe).unwrap();
            let b = train_predict(&spec, &train, &perturbed).unwrap();
            assert_eq!(a[0], b[0], "{kind}");
        }
        assert_eq!(Standardizer::fit(&train.rows), stats);
    }

    #[test]
    fn constant_column_centered_only() {
        let s = Standardizer::fit(&[vec![2.0, 1.0], vec![2.0, 3.0]]);
        assert_eq!(s.scale, [1.0, 1.0]);
        assert_eq!(s.transform(&[2.0, 3.0]), [0.0, 1.0]);
    }

    #[test]
    fn errors() {
        let empty = matrix(vec![], vec![]);
        assert!(matches!(
            train_predict(&ClassifierSpec::knn(1), &empty, &[vec![1.0]]),
            Err(Error::EmptyTrainingSet)
        ));
        let train = matrix(vec![vec![0.0, 1.0]], vec!["A"]);
        assert!(matches!(
            train_predict(&ClassifierSpec::knn(1), &train, &[vec![1.0]]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!("svm".parse::<ClassifierKind>().is_ok());
        assert!("tree".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn argmax_prefers_first_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(sq_dist(&[0.0, 3.0], &[4.0, 0.0]), 25.0);
    }
}
