use rand::seq::SliceRandom;

use super::{Dataset, KeyValueRecord};
use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

/// Stratified, seeded split into sorted train and test index lists.
///
/// Each class contributes `round(fraction · n_c)` records to the training
/// side, clamped so both sides keep at least one record of the class.
pub fn split_indices(labels: &[usize], n_classes: usize, seed: u64, train_fraction: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train_fraction {train_fraction} not in (0,1)")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, idx) in by_class.iter_mut().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::TooFewInClass { class: c, count: idx.len() });
        }
        let mut rng = stream_rng(seed, &[stream::SPLIT, c as u64]);
        idx.shuffle(&mut rng);
        let n_train = ((idx.len() as f64 * train_fraction).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits a dataset according to its own seed and fraction.
pub fn split(dataset: &Dataset) -> Result<(Vec<KeyValueRecord>, Vec<KeyValueRecord>)> {
    let labels: Vec<usize> = dataset.records.iter().map(|r| r.label).collect();
    let (tr, te) = split_indices(&labels, dataset.schema.n_classes(), dataset.split_seed, dataset.train_fraction)?;
    Ok((
        tr.iter().map(|&i| dataset.records[i].clone()).collect(),
        te.iter().map(|&i| dataset.records[i].clone()).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize, m: usize) -> Vec<usize> {
        (0..n).map(|i| (i * 7 + i / 3) % m).collect()
    }

    #[test]
    fn eighty_twenty() {
        let l = vec![0; 50].into_iter().chain(vec![1; 50]).collect::<Vec<_>>();
        let (tr, te) = split_indices(&l, 2, 3, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
    }

    #[test]
    fn same_seed_same_split() {
        let l = labels(500, 4);
        assert_eq!(split_indices(&l, 4, 11, 0.8).unwrap(), split_indices(&l, 4, 11, 0.8).unwrap());
        assert_ne!(split_indices(&l, 4, 11, 0.8).unwrap(), split_indices(&l, 4, 12, 0.8).unwrap());
    }

    #[test]
    fn singleton_class_rejected() {
        let l = vec![0, 0, 0, 1];
        assert!(matches!(split_indices(&l, 2, 0, 0.8), Err(Error::TooFewInClass { class: 1, count: 1 })));
        assert!(split_indices(&[0, 1, 1], 2, 0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_stratification(n in 100usize..600, m in 2usize..6, seed: u64, frac in 0.5f64..0.9) {
            let l = labels(n, m);
            let (tr, te) = split_indices(&l, m, seed, frac).unwrap();
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            // per-class share of the train side tracks the full dataset
            for c in 0..m {
                let full = l.iter().filter(|&&x| x == c).count() as f64 / n as f64;
                let part = tr.iter().filter(|&&i| l[i] == c).count() as f64 / tr.len() as f64;
                prop_assert!((full - part).abs() <= 0.02,
                    "class {} full {} train {}", c, full, part);
            }
        }
    }
}
