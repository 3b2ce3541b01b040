#![allow(dead_code, clippy::needless_range_loop)]

use nhdmp::{Kernel, Measure, Process, QspProcess, ReferenceSpace, Tensor3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector on `allowed` states; each allowed entry is zero
/// with probability `sparsity`, but at least one entry stays positive.
pub fn random_prob(rng: &mut ChaCha8Rng, allowed: &[bool], sparsity: f64) -> Vec<f64> {
    let n = allowed.len();
    let mut w: Vec<f64> = (0..n)
        .map(|j| {
            if allowed[j] && !rng.gen_bool(sparsity) {
                rng.gen_range(0.01..1.0)
            } else {
                0.0
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        let candidates: Vec<usize> = (0..n).filter(|&j| allowed[j]).collect();
        w[candidates[rng.gen_range(0..candidates.len())]] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Reference measure on `n` states; with `partial`, some states get zero weight.
pub fn random_reference(rng: &mut ChaCha8Rng, n: usize, partial: bool) -> ReferenceSpace<f64> {
    let all = vec![true; n];
    let w = random_prob(rng, &all, if partial { 0.3 } else { 0.0 });
    ReferenceSpace::new(w).unwrap()
}

/// Stochastic matrix whose rows in `supp(mu)` stay inside `supp(mu)`.
pub fn random_rows(
    rng: &mut ChaCha8Rng,
    reference: &ReferenceSpace<f64>,
    sparsity: f64,
) -> Vec<Vec<f64>> {
    let n = reference.n_states();
    let all = vec![true; n];
    (0..n)
        .map(|i| {
            let allowed = if reference.in_support(i) {
                reference.support_mask()
            } else {
                &all[..]
            };
            random_prob(rng, allowed, sparsity)
        })
        .collect()
}

pub fn random_kernel(
    rng: &mut ChaCha8Rng,
    reference: &ReferenceSpace<f64>,
    sparsity: f64,
) -> Kernel<f64> {
    Kernel::from_rows(&random_rows(rng, reference, sparsity)).unwrap()
}

pub fn random_process(
    rng: &mut ChaCha8Rng,
    n: usize,
    horizon: usize,
    partial: bool,
) -> Process<f64> {
    let reference = random_reference(rng, n, partial);
    let sparsity = rng.gen_range(0.0..0.5);
    let steps = (0..horizon)
        .map(|_| random_kernel(rng, &reference, sparsity))
        .collect();
    Process::explicit(reference, steps).unwrap()
}

/// Random member of M: a convex combination of point masses on `supp(mu)`.
pub fn random_in_m(rng: &mut ChaCha8Rng, reference: &ReferenceSpace<f64>) -> Measure<f64> {
    Measure::new(random_prob(rng, reference.support_mask(), 0.3)).unwrap()
}

/// Plain triple-loop product, independent of the library's kernels.
pub fn naive_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for m in 0..n {
                s += a[i][m] * b[m][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// `P^{[k,n]}` by naive products of the step matrices.
pub fn naive_compose(p: &Process<f64>, k: usize, n: usize) -> Vec<Vec<f64>> {
    let size = p.n_states();
    let mut acc: Vec<Vec<f64>> = (0..size)
        .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for t in k..n {
        acc = naive_matmul(&acc, &p.step(t).unwrap().matrix().to_rows());
    }
    acc
}

pub fn naive_push(m: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    (0..n)
        .map(|j| (0..n).map(|i| m[i] * rows[i][j]).sum())
        .collect()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Largest pairwise L1 distance between rows `i, j` in `supp(mu)`.
pub fn brute_l1_weak(rows: &[Vec<f64>], reference: &ReferenceSpace<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in reference.support() {
        for j in reference.support() {
            worst = worst.max(l1(&rows[i], &rows[j]));
        }
    }
    worst
}

/// Symmetric random tensor whose fibers are probabilities on `supp(mu)`.
pub fn random_tensor(rng: &mut ChaCha8Rng, reference: &ReferenceSpace<f64>) -> Tensor3<f64> {
    let n = reference.n_states();
    let mut fibers = vec![vec![Vec::new(); n]; n];
    for x in 0..n {
        for y in x..n {
            let f = random_prob(rng, reference.support_mask(), 0.2);
            fibers[x][y] = f.clone();
            fibers[y][x] = f;
        }
    }
    Tensor3::from_fibers(n, |x, y| fibers[x][y].clone()).unwrap()
}

pub fn random_qsp(rng: &mut ChaCha8Rng, n: usize, steps: usize) -> QspProcess<f64> {
    let partial = rng.gen_bool(0.3);
    let reference = random_reference(rng, n, partial);
    let initial = random_in_m(rng, &reference);
    let tensors = (0..steps).map(|_| random_tensor(rng, &reference)).collect();
    QspProcess::new(reference, initial, tensors).unwrap()
}
