//! Nonhomogeneous kernel families and their composition.
//!
//! A [`Process`] yields one [`KernelStep`] per time index `k`, the matrix of
//! `P^{[k,k+1]}`. Multi-step kernels are products in time order:
//!
//! ```text
//! P^{[k,n]} = P^{[k,k+1]} * P^{[k+1,k+2]} * ... * P^{[n-1,n]}
//! ```
//!
//! so `compose(k, n) == compose(k, m) * compose(m, n)` as matrices, which is the
//! operator identity `P_*^{[k,n]} = P_*^{[m,n]} P_*^{[k,m]}` once measures are
//! read as row vectors. [`Process::push_forward`] acts on row vectors,
//! [`Process::apply_function`] on column vectors; the two are adjoint.
//!
//! `compose` always folds left-to-right starting from step `k`, so a running
//! product extended one step at a time reproduces `compose` bit for bit.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Kernel;
use crate::scalar::{tolerance, Scalar};
use crate::state_space::{check_dims, Measure, ReferenceSpace};

/// One-step kernel `P^{[k,k+1]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStep<T> {
    time_index: usize,
    matrix: Kernel<T>,
    leaked_mass: T,
}

impl<T: Scalar> KernelStep<T> {
    /// Validates stochasticity and mu-measurability against `reference`.
    pub fn new(
        time_index: usize,
        matrix: Kernel<T>,
        reference: &ReferenceSpace<T>,
    ) -> Result<Self> {
        validate_kernel(time_index, &matrix, reference)?;
        Ok(KernelStep {
            time_index,
            matrix,
            leaked_mass: T::zero(),
        })
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn matrix(&self) -> &Kernel<T> {
        &self.matrix
    }

    /// Mass a truncated generator would have sent outside the represented states.
    pub fn leaked_mass(&self) -> T {
        self.leaked_mass
    }
}

/// Checks every row is a probability vector and rows in `supp(mu)` stay in `supp(mu)`.
pub fn validate_kernel<T: Scalar>(
    step: usize,
    matrix: &Kernel<T>,
    reference: &ReferenceSpace<T>,
) -> Result<()> {
    check_dims(reference.n_states(), matrix.n())?;
    let tol = tolerance::<T>();
    let support = reference.support_mask();
    for row in 0..matrix.n() {
        let mut bad: Option<Error> = None;
        matrix.for_each_in_row(row, |col, value| {
            if bad.is_some() {
                return;
            }
            if !(value.is_finite() && value >= T::zero()) {
                bad = Some(Error::NegativeEntry {
                    step,
                    row,
                    col,
                    value: value.to_f64_lossy(),
                });
            } else if support[row] && !support[col] && value > T::zero() {
                bad = Some(Error::MeasurabilityViolation {
                    step,
                    row,
                    col,
                    value: value.to_f64_lossy(),
                });
            }
        });
        if let Some(e) = bad {
            return Err(e);
        }
        let sum = matrix.row_sum(row);
        if (sum - T::one()).abs() > tol {
            return Err(Error::NonStochasticRow {
                step,
                row,
                sum: sum.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

type StepRule<T> = dyn Fn(usize) -> Result<(Kernel<T>, T)> + Send + Sync;

#[derive(Clone)]
enum StepSource<T> {
    Explicit(Vec<Arc<KernelStep<T>>>),
    Homogeneous(Arc<Kernel<T>>),
    Generated {
        rule: Arc<StepRule<T>>,
        first: usize,
        last: usize,
        memo: Arc<RwLock<HashMap<usize, Arc<KernelStep<T>>>>>,
    },
}

/// How a process was built; kept so it can be saved in its compact form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ProcessKind {
    Explicit,
    /// The 4-state block chain with parameter `p`.
    BlockExample {
        p: f64,
    },
    /// The countable-state chain truncated to `size` states under a truncated
    /// Poisson reference measure.
    Ladder {
        size: usize,
        poisson_rate: f64,
    },
}

/// Family of one-step kernels over a fixed reference space.
#[derive(Clone)]
pub struct Process<T> {
    reference: ReferenceSpace<T>,
    source: StepSource<T>,
    kind: ProcessKind,
}

impl<T: Scalar> fmt::Debug for Process<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Process")
            .field("n_states", &self.n_states())
            .field("kind", &self.kind)
            .field("steps", &self.available_steps())
            .finish()
    }
}

impl<T: Scalar> Process<T> {
    /// Process with an explicit list of steps `0..matrices.len()`.
    pub fn explicit(reference: ReferenceSpace<T>, matrices: Vec<Kernel<T>>) -> Result<Self> {
        let steps = matrices
            .into_iter()
            .enumerate()
            .map(|(k, m)| KernelStep::new(k, m, &reference).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Process {
            reference,
            source: StepSource::Explicit(steps),
            kind: ProcessKind::Explicit,
        })
    }

    /// Homogeneous process: the same step at every time.
    pub fn homogeneous(reference: ReferenceSpace<T>, matrix: Kernel<T>) -> Result<Self> {
        validate_kernel(0, &matrix, &reference)?;
        Ok(Process {
            reference,
            source: StepSource::Homogeneous(Arc::new(matrix)),
            kind: ProcessKind::Explicit,
        })
    }

    /// Process whose step `k` (for `first <= k <= last`) is produced on demand by
    /// `rule`, which returns the matrix and the leaked mass. Steps are validated
    /// and memoized on first use.
    pub fn generated<F>(reference: ReferenceSpace<T>, first: usize, last: usize, rule: F) -> Self
    where
        F: Fn(usize) -> Result<(Kernel<T>, T)> + Send + Sync + 'static,
    {
        Process {
            reference,
            source: StepSource::Generated {
                rule: Arc::new(rule),
                first,
                last,
                memo: Arc::new(RwLock::new(HashMap::new())),
            },
            kind: ProcessKind::Explicit,
        }
    }

    pub(crate) fn with_kind(mut self, kind: ProcessKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    pub fn reference(&self) -> &ReferenceSpace<T> {
        &self.reference
    }

    pub fn n_states(&self) -> usize {
        self.reference.n_states()
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.source, StepSource::Homogeneous(_))
            || matches!(self.kind, ProcessKind::BlockExample { .. })
    }

    /// Inclusive range of available step indices (`None` = unbounded).
    pub fn available_steps(&self) -> (usize, Option<usize>) {
        match &self.source {
            StepSource::Explicit(steps) => (0, steps.len().checked_sub(1)),
            StepSource::Homogeneous(_) => (0, None),
            StepSource::Generated { first, last, .. } => (*first, Some(*last)),
        }
    }

    /// First step index at which the process is defined.
    pub fn first_step(&self) -> usize {
        self.available_steps().0
    }

    /// The one-step kernel `P^{[k,k+1]}`.
    pub fn step(&self, k: usize) -> Result<Arc<KernelStep<T>>> {
        match &self.source {
            StepSource::Explicit(steps) => {
                steps.get(k).cloned().ok_or(Error::StepUnavailable { k })
            }
            StepSource::Homogeneous(m) => Ok(Arc::new(KernelStep {
                time_index: k,
                matrix: (**m).clone(),
                leaked_mass: T::zero(),
            })),
            StepSource::Generated {
                rule,
                first,
                last,
                memo,
            } => {
                if k < *first || k > *last {
                    return Err(Error::StepUnavailable { k });
                }
                if let Some(hit) = memo.read().expect("memo lock poisoned").get(&k) {
                    return Ok(hit.clone());
                }
                let (matrix, leaked_mass) = rule(k)?;
                validate_kernel(k, &matrix, &self.reference)?;
                let step = Arc::new(KernelStep {
                    time_index: k,
                    matrix,
                    leaked_mass,
                });
                // a concurrent writer may have inserted the identical value already
                let mut guard = memo.write().expect("memo lock poisoned");
                Ok(guard.entry(k).or_insert(step).clone())
            }
        }
    }

    /// `P^{[k,n]}` as a matrix.
    pub fn compose(&self, k: usize, n: usize) -> Result<Kernel<T>> {
        if k >= n {
            return Err(Error::InvalidTimeRange { k, n });
        }
        if let StepSource::Homogeneous(m) = &self.source {
            return power(m, n - k);
        }
        let mut acc = self.step(k)?.matrix().clone();
        for m in k + 1..n {
            acc = acc.matmul(self.step(m)?.matrix())?;
        }
        Ok(acc)
    }

    /// Running products `P^{[k,k+1]}, P^{[k,k+2]}, ..` up to `P^{[k,n_max]}`,
    /// each identical to the corresponding [`Process::compose`].
    pub fn compose_prefixes(&self, k: usize, n_max: usize) -> Result<Vec<Kernel<T>>> {
        if k >= n_max {
            return Err(Error::InvalidTimeRange { k, n: n_max });
        }
        let mut out: Vec<Kernel<T>> = Vec::with_capacity(n_max - k);
        for n in k + 1..=n_max {
            let next = match (&self.source, out.last()) {
                (StepSource::Homogeneous(_), _) | (_, None) => self.compose(k, n)?,
                (_, Some(prev)) => prev.matmul(self.step(n - 1)?.matrix())?,
            };
            out.push(next);
        }
        Ok(out)
    }

    /// `P_*^{[k,n]} m` for an arbitrary real vector `m`.
    pub fn push_forward_vec(&self, k: usize, n: usize, m: &[T]) -> Result<Vec<T>> {
        check_dims(self.n_states(), m.len())?;
        if k >= n {
            return Err(Error::InvalidTimeRange { k, n });
        }
        let mut v = m.to_vec();
        for t in k..n {
            v = self.step(t)?.matrix().left_mul(&v)?;
        }
        Ok(v)
    }

    /// `P_*^{[k,n]} m`, the law at time `n` of a chain started from `m` at time `k`.
    pub fn push_forward(&self, k: usize, n: usize, m: &Measure<T>) -> Result<Measure<T>> {
        Measure::from_computed(self.push_forward_vec(k, n, m.weights())?)
    }

    /// `(P^{[k,n]} f)(x) = sum_y P^{[k,n]}(x, y) f(y)`.
    pub fn apply_function(&self, k: usize, n: usize, f: &[T]) -> Result<Vec<T>> {
        check_dims(self.n_states(), f.len())?;
        if k >= n {
            return Err(Error::InvalidTimeRange { k, n });
        }
        let mut v = f.to_vec();
        for t in (k..n).rev() {
            v = self.step(t)?.matrix().right_mul(&v)?;
        }
        Ok(v)
    }
}

fn power<T: Scalar>(m: &Kernel<T>, exponent: usize) -> Result<Kernel<T>> {
    let mut acc = m.clone();
    for _ in 1..exponent {
        acc = acc.matmul(m)?;
    }
    Ok(acc)
}

/// The 4-state chain with block `(p q; q p)` on the first two states and two
/// absorbing states, under the reference measure `(1/2, 1/2, 0, 0)`.
pub fn gen_block_example<T: Scalar>(p: f64) -> Result<Process<T>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in (0, 1), got {p}"
        )));
    }
    let (pp, qq) = (T::of(p), T::of(1.0 - p));
    let (o, z) = (T::one(), T::zero());
    let matrix = Kernel::from_rows(&[
        vec![pp, qq, z, z],
        vec![qq, pp, z, z],
        vec![z, z, o, z],
        vec![z, z, z, o],
    ])?;
    let half = T::of(0.5);
    let reference = ReferenceSpace::new(vec![half, half, z, z])?;
    Ok(Process::homogeneous(reference, matrix)?.with_kind(ProcessKind::BlockExample { p }))
}

/// Building blocks of the countable-state example chain at time `k`, states
/// indexed from 1:
///
/// ```text
/// p_ij = q_ij * lambda_{k,j} + r_{k,i} * [i == j]
/// r_{k,i} = 1/(k+i),  lambda_{k,k-1} = 1/k,  lambda_{k,k} = sqrt((k-1)/k)
/// q_{i,k} = sqrt((k-1)/k),  q_{i,k-1} = k (1 - r_{k,i} - (k-1)/k)
/// ```
///
/// and all other `lambda_{k,j}` vanish.
#[derive(Debug, Clone, Copy)]
pub struct LadderCoefficients {
    pub k: usize,
}

impl LadderCoefficients {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "example chain needs k >= 2 (column k-1 must be a state), got {k}"
            )));
        }
        Ok(LadderCoefficients { k })
    }

    pub fn r(&self, i: usize) -> f64 {
        1.0 / (self.k + i) as f64
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// `beta_k^2 = (k-1)/k`, kept exact rather than squaring `beta_k`.
    pub fn beta_sq(&self) -> f64 {
        (self.k - 1) as f64 / self.k as f64
    }

    pub fn beta(&self) -> f64 {
        self.beta_sq().sqrt()
    }

    /// `q_{i,k-1}`, solved from row normalization. Uses `1 - beta_k^2 = alpha_k`
    /// so large `k` does not lose digits to cancellation.
    pub fn q_prev(&self, i: usize) -> f64 {
        (self.alpha() - self.r(i)) / self.alpha()
    }

    /// Entry `p_{ij}` with 1-indexed `i`, `j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let k = self.k;
        let diag = if i == j { self.r(i) } else { 0.0 };
        if j == k - 1 {
            self.q_prev(i) * self.alpha() + diag
        } else if j == k {
            self.beta_sq() + diag
        } else {
            diag
        }
    }
}

/// Offset between the 1-indexed states of the example chain and storage indices.
pub const LADDER_INDEX_BASE: usize = 1;

/// One step `P^{[k,k+1]}` of the countable-state example chain, truncated to
/// `size` states. Rows only reach their own state and columns `k-1`, `k`, so the
/// truncation loses no mass.
pub fn gen_ladder_step<T: Scalar>(k: usize, size: usize) -> Result<KernelStep<T>> {
    let matrix = ladder_matrix::<T>(k, size)?;
    Ok(KernelStep {
        time_index: k,
        matrix,
        leaked_mass: T::zero(),
    })
}

fn ladder_matrix<T: Scalar>(k: usize, size: usize) -> Result<Kernel<T>> {
    let coeffs = LadderCoefficients::new(k)?;
    if size <= k + 1 {
        return Err(Error::InvalidParameter(format!(
            "truncation size {size} must exceed k + 1 = {}",
            k + 1
        )));
    }
    let rows = (1..=size)
        .map(|i| {
            let mut cols = vec![k - 1, k, i];
            cols.sort_unstable();
            cols.dedup();
            cols.into_iter()
                .map(|j| (j - LADDER_INDEX_BASE, T::of(coeffs.entry(i, j))))
                .filter(|&(_, v)| v != T::zero())
                .collect()
        })
        .collect();
    Kernel::from_sparse_rows(size, rows)
}

/// The countable-state example chain on `size` states, steps `2..=size-2`,
/// with a truncated Poisson(`poisson_rate`) reference measure.
pub fn ladder_process<T: Scalar>(size: usize, poisson_rate: f64) -> Result<Process<T>> {
    if size < 4 {
        return Err(Error::InvalidParameter(format!(
            "example chain needs at least 4 states, got {size}"
        )));
    }
    let reference = ReferenceSpace::truncated_poisson(size, poisson_rate)?;
    Ok(Process::generated(reference, 2, size - 2, move |k| {
        Ok((ladder_matrix(k, size)?, T::zero()))
    })
    .with_kind(ProcessKind::Ladder { size, poisson_rate }))
}

#[derive(Serialize, Deserialize)]
struct ProcessFile {
    n_states: usize,
    mu: Vec<f64>,
    kind: String,
    #[serde(default)]
    params: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    steps: Option<Vec<Vec<Vec<f64>>>>,
}

fn param_f64(
    params: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<Option<f64>> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::Schema(format!("params.{key} must be a number"))),
    }
}

/// Parses a process from its JSON text.
pub fn parse_process<T: Scalar>(text: &str) -> Result<Process<T>> {
    let file: ProcessFile = serde_json::from_str(text)?;
    if file.mu.len() != file.n_states {
        return Err(Error::Schema(format!(
            "mu has {} entries but n_states = {}",
            file.mu.len(),
            file.n_states
        )));
    }
    let reference = ReferenceSpace::new(file.mu.iter().map(|&v| T::of(v)).collect())?;
    match file.kind.as_str() {
        "explicit" => {
            let steps = file
                .steps
                .ok_or_else(|| Error::Schema("explicit process needs \"steps\"".into()))?;
            if steps.is_empty() {
                return Err(Error::Schema("\"steps\" is empty".into()));
            }
            let mut matrices = Vec::with_capacity(steps.len());
            for (k, rows) in steps.iter().enumerate() {
                if rows.len() != file.n_states || rows.iter().any(|r| r.len() != file.n_states) {
                    return Err(Error::Schema(format!(
                        "step {k} is not a {n}x{n} matrix",
                        n = file.n_states
                    )));
                }
                let rows: Vec<Vec<T>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&v| T::of(v)).collect())
                    .collect();
                matrices.push(Kernel::from_rows(&rows)?);
            }
            let homogeneous = file
                .params
                .get("homogeneous")
                .and_then(|v| v.as_bool())
                .unwrap_or(false);
            if homogeneous {
                if matrices.len() != 1 {
                    return Err(Error::Schema(
                        "homogeneous process needs exactly one step".into(),
                    ));
                }
                Process::homogeneous(reference, matrices.pop().expect("one step"))
            } else {
                Process::explicit(reference, matrices)
            }
        }
        "block_example" => {
            let p = param_f64(&file.params, "p")?
                .ok_or_else(|| Error::Schema("block_example needs params.p".into()))?;
            let process = gen_block_example::<T>(p)?;
            if process.reference() != &reference {
                return Err(Error::Schema(
                    "block_example requires mu = (1/2, 1/2, 0, 0)".into(),
                ));
            }
            Ok(process)
        }
        "ladder" => {
            let rate = param_f64(&file.params, "poisson_rate")?.unwrap_or(1.0);
            let process = ladder_process::<T>(file.n_states, rate)?;
            Ok(Process {
                reference,
                ..process
            })
        }
        other => Err(Error::Schema(format!("unknown process kind {other:?}"))),
    }
}

/// Loads a process file.
pub fn load_process<T: Scalar>(path: impl AsRef<std::path::Path>) -> Result<Process<T>> {
    parse_process(&std::fs::read_to_string(path)?)
}

/// JSON text of a process. Explicit processes store every step; generator
/// processes store only their parameters.
pub fn process_to_json<T: Scalar>(process: &Process<T>) -> Result<String> {
    let mu = process
        .reference()
        .mu()
        .iter()
        .map(|v| v.to_f64_lossy())
        .collect();
    let mut params = serde_json::Map::new();
    let (kind, steps) = match process.kind() {
        ProcessKind::BlockExample { p } => {
            params.insert("p".into(), (*p).into());
            ("block_example", None)
        }
        ProcessKind::Ladder { poisson_rate, .. } => {
            params.insert("poisson_rate".into(), (*poisson_rate).into());
            ("ladder", None)
        }
        ProcessKind::Explicit => {
            let matrices: Vec<Kernel<T>> = match &process.source {
                StepSource::Explicit(steps) => steps.iter().map(|s| s.matrix().clone()).collect(),
                StepSource::Homogeneous(m) => {
                    params.insert("homogeneous".into(), true.into());
                    vec![(**m).clone()]
                }
                StepSource::Generated { first, last, .. } => {
                    if *first != 0 {
                        return Err(Error::Schema(
                            "generated processes not starting at step 0 cannot be saved explicitly"
                                .into(),
                        ));
                    }
                    (0..=*last)
                        .map(|k| process.step(k).map(|s| s.matrix().clone()))
                        .collect::<Result<_>>()?
                }
            };
            let steps = matrices
                .iter()
                .map(|m| {
                    m.to_rows()
                        .into_iter()
                        .map(|r| r.into_iter().map(|v| v.to_f64_lossy()).collect())
                        .collect()
                })
                .collect();
            ("explicit", Some(steps))
        }
    };
    let file = ProcessFile {
        n_states: process.n_states(),
        mu,
        kind: kind.into(),
        params,
        steps,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Saves a process file.
pub fn save_process<T: Scalar>(
    process: &Process<T>,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    std::fs::write(path, process_to_json(process)?)?;
    Ok(())
}
