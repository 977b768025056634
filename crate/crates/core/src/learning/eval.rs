use serde::{Deserialize, Serialize};

use crate::dataset::KeyValueRecord;
use crate::error::{Error, Result};

/// `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            n_classes,
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.n_classes).map(|c| self.counts[c][c]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// Anything that maps a record to a class.
pub trait Classifier {
    fn n_classes(&self) -> usize;
    fn predict(&self, record: &KeyValueRecord) -> Result<usize>;
}

pub fn evaluate_with<C: Classifier + ?Sized>(clf: &C, test: &[KeyValueRecord]) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut confusion = ConfusionMatrix::new(clf.n_classes());
    for r in test {
        confusion.add(r.label, clf.predict(r)?);
    }
    Ok(Evaluation {
        accuracy: confusion.accuracy(),
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(usize);

    impl Classifier for Constant {
        fn n_classes(&self) -> usize {
            4
        }
        fn predict(&self, _: &KeyValueRecord) -> Result<usize> {
            Ok(self.0)
        }
    }

    struct Lookup(Vec<KeyValueRecord>);

    impl Classifier for Lookup {
        fn n_classes(&self) -> usize {
            3
        }
        fn predict(&self, r: &KeyValueRecord) -> Result<usize> {
            Ok(self.0.iter().find(|x| x.values == r.values).map_or(0, |x| x.label))
        }
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        let test: Vec<_> = (0..40).map(|i| KeyValueRecord::new(vec![i], i % 4)).collect();
        let e = evaluate_with(&Constant(0), &test).unwrap();
        assert_eq!(e.accuracy, 0.25);
        assert_eq!(e.confusion.counts[0][0], 10);
        assert_eq!(e.confusion.counts[3][0], 10);
    }

    #[test]
    fn memorised_train_set() {
        let train: Vec<_> = (0..10).map(|i| KeyValueRecord::new(vec![i, i * 7 % 3], i % 3)).collect();
        assert_eq!(evaluate_with(&Lookup(train.clone()), &train).unwrap().accuracy, 1.0);
    }

    #[test]
    fn empty_test_set() {
        assert!(matches!(evaluate_with(&Constant(0), &[]), Err(Error::EmptyTestSet)));
    }
}
