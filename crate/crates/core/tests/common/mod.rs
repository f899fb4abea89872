//! Reference implementations used as test oracles. Written from the defining
//! formulas with dense matrices and no shared code with the library.
#![allow(dead_code)]

use anw_core::{Dataset, KernelFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<f64>>;

pub fn kernel(family: KernelFamily, u: f64) -> f64 {
    match family {
        KernelFamily::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        KernelFamily::Epanechnikov => {
            if u.abs() <= 1.0 {
                0.75 * (1.0 - u * u)
            } else {
                0.0
            }
        }
    }
}

/// Row-normalized weights of the λ-adapted local average: row `r` maps the
/// responses to the fit at `points[r]`.
pub fn smoother_matrix(
    xs: &[f64],
    constraints: &[usize],
    family: KernelFamily,
    h: f64,
    lambda: f64,
    points: &[f64],
) -> Matrix {
    points
        .iter()
        .map(|&x| {
            let raw: Vec<f64> = xs
                .iter()
                .enumerate()
                .map(|(i, &xi)| {
                    let w = kernel(family, (x - xi) / h) / h;
                    if constraints.contains(&i) {
                        lambda * w
                    } else {
                        w
                    }
                })
                .collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|w| w / total).collect()
        })
        .collect()
}

pub fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `Σ_{j=0..steps} (I − S)^j y`, by explicit repeated application of `I − S`.
pub fn sharpened_oracle(s: &Matrix, y: &[f64], steps: usize) -> Vec<f64> {
    let mut total = y.to_vec();
    let mut term = y.to_vec();
    for _ in 0..steps {
        let st = mat_vec(s, &term);
        term = term.iter().zip(&st).map(|(t, u)| t - u).collect();
        for (acc, t) in total.iter_mut().zip(&term) {
            *acc += t;
        }
    }
    total
}

/// IDS1 form `(2I − S)^k y`, which must not be confused with the update used.
pub fn ids1_oracle(s: &Matrix, y: &[f64], steps: usize) -> Vec<f64> {
    let mut cur = y.to_vec();
    for _ in 0..steps {
        let sc = mat_vec(s, &cur);
        cur = cur.iter().zip(&sc).map(|(c, v)| 2.0 * c - v).collect();
    }
    cur
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Random dataset on `[0, 1]` with sorted covariates, a smooth signal plus
/// noise, and `q` random constraints.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Dataset {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    xs.sort_by(f64::total_cmp);
    let ys = xs
        .iter()
        .map(|x| (6.0 * x).sin() + rng.random_range(-0.3..0.3))
        .collect();
    let mut constraints = Vec::new();
    while constraints.len() < q.min(n - 1) {
        let j = rng.random_range(0..n);
        if !constraints.contains(&j) {
            constraints.push(j);
        }
    }
    Dataset::new(xs, ys, constraints).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn population_standardize(ys: &[f64]) -> Vec<f64> {
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
    ys.iter().map(|y| (y - mean) / sd).collect()
}

/// Held-out squared error pooled over explicit fold labels, refitting on the
/// complement of each fold with constraints always kept in training.
pub fn cv_oracle(
    xs: &[f64],
    ys: &[f64],
    constraints: &[usize],
    labels: &[Option<usize>],
    k: usize,
    family: KernelFamily,
    h: f64,
    lambda: f64,
) -> f64 {
    let ys = population_standardize(ys);
    let mut sse = 0.0;
    let mut count = 0;
    for fold in 0..k {
        let mut num_den = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            if l != Some(fold) {
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..xs.len() {
                if labels[j] == Some(fold) {
                    continue;
                }
                let mut w = kernel(family, (xs[i] - xs[j]) / h) / h;
                if constraints.contains(&j) {
                    w *= lambda;
                }
                num += w * ys[j];
                den += w;
            }
            num_den.push((i, num / den));
        }
        for (i, pred) in num_den {
            sse += (pred - ys[i]).powi(2);
            count += 1;
        }
    }
    sse / count as f64
}
