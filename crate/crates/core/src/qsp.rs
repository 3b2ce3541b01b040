//! Discrete quadratic stochastic processes with type (A) composition.
//!
//! The user supplies one-step tensors `Q^{[k,k+1]}(x, y, j)` and an initial
//! measure `mu_0`. Longer-range tensors are defined by the quadratic
//! Chapman-Kolmogorov analogue
//!
//! ```text
//! Q^{[k,n]}(x, y, .) = sum_u Q^{[k,m]}(x, y, u) sum_v Q^{[m,n]}(u, v, .) mu_m(v)
//! mu_m(.)            = sum_{x,y} Q^{[0,m]}(x, y, .) mu_0(x) mu_0(y)
//! ```
//!
//! for any `k < m < n`. The inner sum is the marginal kernel
//! `P_Q^{[m,n]}(u, .) = sum_v Q^{[m,n]}(u, v, .) mu_m(v)`, so
//! `Q^{[k,n]} = Q^{[k,m]} (x)_3 P_Q^{[m,n]}`. [`SplitOrder::Last`] unrolls with
//! `m = n - 1`, [`SplitOrder::First`] with `m = k + 1`; agreement of the two is
//! a consistency check, not an assumption.
//!
//! Type (B) composition is not implemented. Files carry a `composition` tag
//! and anything other than `"A"` is rejected.

use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::ergodicity::{l1_weak_gap_of, max_pairwise_row_distance};
use crate::error::{Error, Result};
use crate::kernels::Process;
use crate::matrix::Kernel;
use crate::minorization::{
    certificate_from_kernel, divergence_verdict, DivergenceReport, MinorizationCertificate,
};
use crate::scalar::{ordered_sum, tolerance, Scalar};
use crate::state_space::{check_dims, Measure, ReferenceSpace, StateSet};

/// `n x n x n` array indexed `(x, y, j)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor3<T> {
    pub fn from_flat(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                found: data.len(),
            });
        }
        Ok(Tensor3 { n, data })
    }

    /// Tensor with `fiber(x, y)` given by `f(x, y)`.
    pub fn from_fibers(n: usize, mut f: impl FnMut(usize, usize) -> Vec<T>) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                let fiber = f(x, y);
                check_dims(n, fiber.len())?;
                data.extend(fiber);
            }
        }
        Ok(Tensor3 { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flat(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, j: usize) -> T {
        self.data[(x * self.n + y) * self.n + j]
    }

    /// `Q(x, y, .)`.
    pub fn fiber(&self, x: usize, y: usize) -> &[T] {
        let start = (x * self.n + y) * self.n;
        &self.data[start..start + self.n]
    }

    /// `(x, y, j) -> sum_u Q(x, y, u) P(u, j)`.
    pub fn then_kernel(&self, kernel: &Kernel<T>) -> Result<Self> {
        check_dims(self.n, kernel.n())?;
        let n = self.n;
        let mut data = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                data.extend(kernel.left_mul(self.fiber(x, y))?);
            }
        }
        Ok(Tensor3 { n, data })
    }

    /// `(x, j) -> sum_y Q(x, y, j) w(y)`.
    pub fn contract_second(&self, w: &[T]) -> Result<Kernel<T>> {
        check_dims(self.n, w.len())?;
        let n = self.n;
        let mut rows = Vec::with_capacity(n);
        for x in 0..n {
            let mut row = vec![T::zero(); n];
            for (y, &wy) in w.iter().enumerate() {
                if wy == T::zero() {
                    continue;
                }
                for (r, &q) in row.iter_mut().zip(self.fiber(x, y)) {
                    *r += q * wy;
                }
            }
            rows.push(row);
        }
        Kernel::from_rows(&rows)
    }

    /// `j -> sum_{x,y} Q(x, y, j) w(x, y)`.
    pub fn contract_pairs(&self, w: &[T]) -> Result<Vec<T>> {
        check_dims(self.n * self.n, w.len())?;
        let n = self.n;
        let mut out = vec![T::zero(); n];
        for (xy, &wxy) in w.iter().enumerate() {
            if wxy == T::zero() {
                continue;
            }
            let fiber = &self.data[xy * n..(xy + 1) * n];
            for (o, &q) in out.iter_mut().zip(fiber) {
                *o += q * wxy;
            }
        }
        Ok(out)
    }

    /// Largest `|Q(x, y, j) - Q(y, x, j)|`.
    pub fn max_asymmetry(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for x in 0..n {
            for y in x + 1..n {
                for (a, b) in self.fiber(x, y).iter().zip(self.fiber(y, x)) {
                    worst = worst.max((*a - *b).abs());
                }
            }
        }
        worst
    }

    /// Fibers as the rows of an `n^2 x n` matrix, indexed `x * n + y`.
    pub fn fibers_as_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|c| c.to_vec()).collect()
    }
}

/// One-step tensor `Q^{[k,k+1]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QspStep<T> {
    pub time_index: usize,
    pub tensor: Tensor3<T>,
}

/// Probability measure on pairs of states, stored row-major as `w[x * n + y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PairMeasure<T> {
    n: usize,
    weights: Vec<T>,
}

impl<T: Scalar> PairMeasure<T> {
    pub fn new(n: usize, weights: Vec<T>) -> Result<Self> {
        check_dims(n * n, weights.len())?;
        Measure::new(weights.clone())?;
        Ok(PairMeasure { n, weights })
    }

    pub fn point(n: usize, x: usize, y: usize) -> Self {
        let mut weights = vec![T::zero(); n * n];
        weights[x * n + y] = T::one();
        PairMeasure { n, weights }
    }

    /// `a (x) b`.
    pub fn product(a: &Measure<T>, b: &Measure<T>) -> Result<Self> {
        check_dims(a.len(), b.len())?;
        let n = a.len();
        let weights = a
            .weights()
            .iter()
            .flat_map(|&u| b.weights().iter().map(move |&v| u * v))
            .collect();
        Ok(PairMeasure { n, weights })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.weights[x * self.n + y]
    }

    pub fn mass(&self) -> T {
        ordered_sum(self.weights.iter().copied())
    }

    pub fn transposed(&self) -> Self {
        let n = self.n;
        let mut weights = vec![T::zero(); n * n];
        for x in 0..n {
            for y in 0..n {
                weights[y * n + x] = self.weights[x * n + y];
            }
        }
        PairMeasure { n, weights }
    }

    /// Supported in `supp(mu) x supp(mu)`.
    pub fn in_m2(&self, reference: &ReferenceSpace<T>) -> bool {
        let n = self.n;
        (0..n * n).all(|xy| {
            self.weights[xy] == T::zero()
                || (reference.in_support(xy / n) && reference.in_support(xy % n))
        })
    }
}

/// How [`QspProcess::extend`] unrolls the composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitOrder {
    /// `Q^{[k,n]} = Q^{[k,n-1]} (x)_3 P_Q^{[n-1,n]}`.
    #[default]
    Last,
    /// `Q^{[k,n]} = Q^{[k,k+1]} (x)_3 P_Q^{[k+1,n]}`.
    First,
}

/// A type (A) quadratic stochastic process.
#[derive(Debug, Clone)]
pub struct QspProcess<T> {
    reference: ReferenceSpace<T>,
    steps: Vec<QspStep<T>>,
    initial: Measure<T>,
    // marginals[m] = mu_m; marginals[0] = initial
    marginals: Arc<RwLock<Vec<Measure<T>>>>,
}

impl<T: Scalar> QspProcess<T> {
    /// Validates symmetry and that every fiber is a probability in `M`.
    pub fn new(
        reference: ReferenceSpace<T>,
        initial: Measure<T>,
        tensors: Vec<Tensor3<T>>,
    ) -> Result<Self> {
        reference.check_in_m(&initial)?;
        let n = reference.n_states();
        let tol = tolerance::<T>();
        let mut steps = Vec::with_capacity(tensors.len());
        for (k, tensor) in tensors.into_iter().enumerate() {
            check_dims(n, tensor.n())?;
            for x in 0..n {
                for y in 0..n {
                    let fiber = tensor.fiber(x, y);
                    if y > x {
                        let asym = fiber
                            .iter()
                            .zip(tensor.fiber(y, x))
                            .any(|(a, b)| (*a - *b).abs() > tol);
                        if asym {
                            return Err(Error::AsymmetricTensor { k, x, y });
                        }
                    }
                    let bad = |reason: String| Error::InvalidFiber { k, x, y, reason };
                    if let Some(j) = fiber
                        .iter()
                        .position(|v| !(v.is_finite() && *v >= T::zero()))
                    {
                        return Err(bad(format!("entry {j} is negative")));
                    }
                    let mass = ordered_sum(fiber.iter().copied());
                    if (mass - T::one()).abs() > tol {
                        return Err(bad(format!("mass {mass}")));
                    }
                    if let Some(j) =
                        (0..n).find(|&j| !reference.in_support(j) && fiber[j] > T::zero())
                    {
                        return Err(bad(format!("mass on state {j} outside supp(mu)")));
                    }
                }
            }
            steps.push(QspStep {
                time_index: k,
                tensor,
            });
        }
        Ok(QspProcess {
            marginals: Arc::new(RwLock::new(vec![initial.clone()])),
            reference,
            steps,
            initial,
        })
    }

    /// Process with the same tensor at steps `0..count`.
    pub fn repeated(
        reference: ReferenceSpace<T>,
        initial: Measure<T>,
        tensor: Tensor3<T>,
        count: usize,
    ) -> Result<Self> {
        Self::new(reference, initial, vec![tensor; count])
    }

    pub fn reference(&self) -> &ReferenceSpace<T> {
        &self.reference
    }

    pub fn initial(&self) -> &Measure<T> {
        &self.initial
    }

    pub fn n_states(&self) -> usize {
        self.reference.n_states()
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, k: usize) -> Result<&QspStep<T>> {
        self.steps.get(k).ok_or(Error::StepUnavailable { k })
    }

    fn check_range(&self, k: usize, n: usize) -> Result<()> {
        if k >= n {
            return Err(Error::InvalidTimeRange { k, n });
        }
        if n > self.steps.len() {
            return Err(Error::StepUnavailable { k: n - 1 });
        }
        Ok(())
    }

    /// One-step marginal kernel `P_Q^{[m,m+1]}(u, .) = sum_v Q^{[m,m+1]}(u, v, .) mu_m(v)`.
    fn marginal_step(&self, m: usize) -> Result<Kernel<T>> {
        let mu_m = self.propagate_marginal(m)?;
        self.step(m)?.tensor.contract_second(mu_m.weights())
    }

    /// `Q^{[k,n]}` by the chosen unrolling.
    pub fn extend_with(&self, k: usize, n: usize, order: SplitOrder) -> Result<Tensor3<T>> {
        self.check_range(k, n)?;
        match order {
            SplitOrder::Last => {
                let mut acc = self.step(k)?.tensor.clone();
                for t in k + 1..n {
                    acc = acc.then_kernel(&self.marginal_step(t)?)?;
                }
                Ok(acc)
            }
            SplitOrder::First => {
                if n == k + 1 {
                    return Ok(self.step(k)?.tensor.clone());
                }
                let tail = self.extend_with(k + 1, n, SplitOrder::First)?;
                let mu = self.propagate_marginal(k + 1)?;
                let pq_tail = tail.contract_second(mu.weights())?;
                self.step(k)?.tensor.then_kernel(&pq_tail)
            }
        }
    }

    /// `Q^{[k,n]}`.
    pub fn extend(&self, k: usize, n: usize) -> Result<Tensor3<T>> {
        self.extend_with(k, n, SplitOrder::Last)
    }

    /// `mu_m = sum_{x,y} Q^{[0,m]}(x, y, .) mu_0(x) mu_0(y)`; `mu_0` is the initial measure.
    pub fn propagate_marginal(&self, m: usize) -> Result<Measure<T>> {
        if let Some(hit) = self
            .marginals
            .read()
            .expect("marginal memo poisoned")
            .get(m)
        {
            return Ok(hit.clone());
        }
        if m > self.steps.len() {
            return Err(Error::StepUnavailable { k: m - 1 });
        }
        let known = self.marginals.read().expect("marginal memo poisoned").len();
        for t in known..=m {
            // extend(0, t) only reads mu_1 .. mu_{t-1}, all memoized by now
            let q = self.extend(0, t)?;
            let pair = PairMeasure::product(&self.initial, &self.initial)?;
            let mu_t = Measure::from_computed(q.contract_pairs(pair.weights())?)?;
            let mut guard = self.marginals.write().expect("marginal memo poisoned");
            if guard.len() == t {
                guard.push(mu_t);
            }
        }
        Ok(self.marginals.read().expect("marginal memo poisoned")[m].clone())
    }

    /// `(Q_*^{[k,n]} w)(j) = sum_{x,y} Q^{[k,n]}(x, y, j) w(x, y)` for `w` in `M^2`.
    pub fn push_forward(&self, k: usize, n: usize, pm: &PairMeasure<T>) -> Result<Measure<T>> {
        check_dims(self.n_states(), pm.n)?;
        if !pm.in_m2(&self.reference) {
            let xy = (0..pm.n * pm.n)
                .find(|&xy| {
                    pm.weights[xy] != T::zero()
                        && !(self.reference.in_support(xy / pm.n)
                            && self.reference.in_support(xy % pm.n))
                })
                .expect("some pair lies outside");
            return Err(Error::NotAbsolutelyContinuous {
                index: xy,
                value: pm.weights[xy].to_f64_lossy(),
            });
        }
        Measure::from_computed(self.extend(k, n)?.contract_pairs(pm.weights())?)
    }

    /// `P_Q^{[k,n]}(x, .) = sum_y Q^{[k,n]}(x, y, .) mu_k(y)`.
    pub fn marginal_kernel(&self, k: usize, n: usize) -> Result<Kernel<T>> {
        let q = self.extend(k, n)?;
        let mu_k = self.propagate_marginal(k)?;
        q.contract_second(mu_k.weights())
    }

    /// The Markov process of one-step marginal kernels, steps `0..horizon`.
    pub fn marginal_process(&self, horizon: usize) -> Result<Process<T>> {
        let steps = (0..horizon)
            .map(|m| self.marginal_kernel(m, m + 1))
            .collect::<Result<Vec<_>>>()?;
        Process::explicit(self.reference.clone(), steps)
    }

    /// `sup` over pairs of point masses of `M^2` of `|Q_* a - Q_* b|_1`, next to the
    /// L1-weak gap of the marginal kernel over the same window.
    pub fn l1_weak_gap(&self, k: usize, n: usize) -> Result<QspGap<T>> {
        let q = self.extend(k, n)?;
        let size = self.n_states();
        let fibers = Kernel::from_rows(&q.fibers_as_rows_padded())?;
        let r = &self.reference;
        let qsp_gap = max_pairwise_row_distance(&fibers, |xy| {
            xy < size * size && r.in_support(xy / size) && r.in_support(xy % size)
        });
        let mu_k = self.propagate_marginal(k)?;
        let marginal_gap = l1_weak_gap_of(&q.contract_second(mu_k.weights())?, r);
        Ok(QspGap {
            k,
            n,
            qsp_gap,
            marginal_gap,
        })
    }
}

impl<T: Scalar> Tensor3<T> {
    // fibers padded with zero columns into a square n^2 x n^2 matrix, so the
    // pairwise row distance helpers apply unchanged
    fn fibers_as_rows_padded(&self) -> Vec<Vec<T>> {
        let width = self.n * self.n;
        self.data
            .chunks(self.n)
            .map(|c| {
                let mut row = c.to_vec();
                row.resize(width, T::zero());
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct QspGap<T> {
    pub k: usize,
    pub n: usize,
    pub qsp_gap: T,
    pub marginal_gap: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WePqReport<T> {
    /// `alpha_k = min_{x,y in supp(mu)} Q^{[k,k+1]}(x, y, A_k)` for steps `0..horizon`.
    pub alphas: Vec<T>,
    pub alpha_partial_sums: Vec<T>,
    /// `2 prod (1 - alpha_k / 2)`; a valid bound when every `A_k` is a single state.
    pub alpha_bound: Vec<T>,
    /// `P_Q^{[k,k+1]}(x, A_k) >= alpha_k` for every `x` in `supp(mu)` and every step.
    pub induced_marginal_holds: bool,
    /// Fiber certificate at step 0, marginal-kernel certificates after.
    pub divergence: DivergenceReport<T>,
}

/// Set lower bounds `Q^{[k,k+1]}(x, y, A_k) >= alpha_k` for steps `0..horizon`,
/// plus a certified bound on the QSP gap `sup |Q_*^{[0,n]} a - Q_*^{[0,n]} b|_1`.
///
/// The bound chains the fiber-wise certificate of `Q^{[0,1]}` (common minorant of
/// all fibers over `supp(mu)^2`) with one-step certificates of the marginal
/// kernels `P_Q^{[t,t+1]}`, `t = 1..horizon`.
pub fn check_we_pq<T: Scalar>(
    q: &QspProcess<T>,
    sets: &[StateSet],
    horizon: usize,
    epsilon: T,
) -> Result<WePqReport<T>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if sets.len() < horizon {
        return Err(Error::SequenceTooShort {
            needed: horizon,
            found: sets.len(),
        });
    }
    let n = q.n_states();
    let r = q.reference();
    let tol = tolerance::<T>();
    let mut alphas = Vec::with_capacity(horizon);
    let mut induced_marginal_holds = true;
    for (k, set) in sets.iter().take(horizon).enumerate() {
        check_dims(n, set.n_states())?;
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let tensor = &q.step(k)?.tensor;
        let mass_on = |fiber: &[T]| {
            ordered_sum(
                fiber
                    .iter()
                    .zip(set.mask())
                    .filter_map(|(&v, &b)| b.then_some(v)),
            )
        };
        let mut alpha = T::infinity();
        for x in r.support() {
            for y in r.support() {
                alpha = alpha.min(mass_on(tensor.fiber(x, y)));
            }
        }
        let pq = q.marginal_step(k)?;
        for x in r.support() {
            if pq.row_mass_on(x, set.mask()) < alpha - tol {
                induced_marginal_holds = false;
            }
        }
        alphas.push(alpha);
    }
    let mut alpha_partial_sums = Vec::with_capacity(horizon);
    let mut alpha_bound = Vec::with_capacity(horizon);
    let (mut s, mut b) = (T::zero(), T::of(2.0));
    for &a in &alphas {
        s += a;
        b *= T::one() - a / T::of(2.0);
        alpha_partial_sums.push(s);
        alpha_bound.push(b);
    }

    let mut certs = Vec::with_capacity(horizon);
    let first = &q.step(0)?.tensor;
    let pair_support: Vec<bool> = (0..n * n)
        .map(|xy| r.in_support(xy / n) && r.in_support(xy % n))
        .collect();
    let fibers = first.fibers_as_rows();
    let mut minorant: Option<Vec<T>> = None;
    for (xy, fiber) in fibers.iter().enumerate() {
        if !pair_support[xy] {
            continue;
        }
        minorant = Some(match minorant {
            None => fiber.clone(),
            Some(cur) => cur.iter().zip(fiber).map(|(&a, &b)| a.min(b)).collect(),
        });
    }
    certs.push(MinorizationCertificate::from_minorant(
        0,
        1,
        minorant.expect("support is nonempty"),
    )?);
    for t in 1..horizon {
        certs.push(certificate_from_kernel(&q.marginal_step(t)?, r, t, 1)?);
    }
    Ok(WePqReport {
        alphas,
        alpha_partial_sums,
        alpha_bound,
        induced_marginal_holds,
        divergence: divergence_verdict(&certs, epsilon)?,
    })
}

/// Two-state process used in examples: `Q(0,0) = (1, 0)`, `Q(1,1) = (0.3, 0.7)`,
/// `Q(0,1) = Q(1,0) = (0.65, 0.35)` at every step, uniform reference and initial
/// measure. Every fiber gives state 0 at least 0.3.
pub fn qsp_mixing_example<T: Scalar>(steps: usize) -> Result<QspProcess<T>> {
    let f = |v: &[f64]| v.iter().map(|&x| T::of(x)).collect::<Vec<T>>();
    let tensor = Tensor3::from_fibers(2, |x, y| match (x, y) {
        (0, 0) => f(&[1.0, 0.0]),
        (1, 1) => f(&[0.3, 0.7]),
        _ => f(&[0.65, 0.35]),
    })?;
    let reference = ReferenceSpace::uniform(2)?;
    let initial = reference.as_measure();
    QspProcess::repeated(reference, initial, tensor, steps)
}

/// Process whose every fiber equals `r`.
pub fn constant_fiber_qsp<T: Scalar>(
    reference: ReferenceSpace<T>,
    initial: Measure<T>,
    r: &Measure<T>,
    steps: usize,
) -> Result<QspProcess<T>> {
    let n = reference.n_states();
    check_dims(n, r.len())?;
    let tensor = Tensor3::from_fibers(n, |_, _| r.weights().to_vec())?;
    QspProcess::repeated(reference, initial, tensor, steps)
}

#[derive(Serialize, Deserialize)]
struct QspFile {
    n_states: usize,
    mu: Vec<f64>,
    initial: Vec<f64>,
    steps: Vec<Vec<f64>>,
    #[serde(default = "default_composition")]
    composition: String,
}

fn default_composition() -> String {
    "A".into()
}

pub fn parse_qsp<T: Scalar>(text: &str) -> Result<QspProcess<T>> {
    let file: QspFile = serde_json::from_str(text)?;
    if file.composition != "A" {
        return Err(Error::UnsupportedComposition(file.composition));
    }
    let n = file.n_states;
    if file.mu.len() != n || file.initial.len() != n {
        return Err(Error::Schema(format!(
            "mu and initial must have n_states = {n} entries"
        )));
    }
    let conv = |v: &[f64]| v.iter().map(|&x| T::of(x)).collect::<Vec<T>>();
    let reference = ReferenceSpace::new(conv(&file.mu))?;
    let initial = Measure::new(conv(&file.initial))?;
    let tensors = file
        .steps
        .iter()
        .enumerate()
        .map(|(k, flat)| {
            if flat.len() != n * n * n {
                return Err(Error::Schema(format!(
                    "step {k} has {} entries, expected n_states^3 = {}",
                    flat.len(),
                    n * n * n
                )));
            }
            Tensor3::from_flat(n, conv(flat))
        })
        .collect::<Result<Vec<_>>>()?;
    if tensors.is_empty() {
        return Err(Error::Schema("\"steps\" is empty".into()));
    }
    QspProcess::new(reference, initial, tensors)
}

pub fn load_qsp<T: Scalar>(path: impl AsRef<std::path::Path>) -> Result<QspProcess<T>> {
    parse_qsp(&std::fs::read_to_string(path)?)
}

pub fn qsp_to_json<T: Scalar>(q: &QspProcess<T>) -> Result<String> {
    let conv = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<f64>>();
    let file = QspFile {
        n_states: q.n_states(),
        mu: conv(q.reference.mu()),
        initial: conv(q.initial.weights()),
        steps: q.steps.iter().map(|s| conv(s.tensor.flat())).collect(),
        composition: "A".into(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn save_qsp<T: Scalar>(q: &QspProcess<T>, path: impl AsRef<std::path::Path>) -> Result<()> {
    std::fs::write(path, qsp_to_json(q)?)?;
    Ok(())
}
