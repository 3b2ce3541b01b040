//! Finite-horizon gaps for the four ergodicity notions, and the Dobrushin coefficient.
//!
//! * weak: `sup_{x,y} |P^{[k,n]}(x,.) - P^{[k,n]}(y,.)|_1` over all states;
//! * L1-weak: `sup_{lambda,nu in M} |P_* lambda - P_* nu|_1`;
//! * strong: `sup_x |P^{[k,n]}(x,.) - target|_1`;
//! * L1-strong: `sup_{lambda in M} |P_* lambda - target|_1`.
//!
//! The L1 suprema over `M` are computed exactly on point masses of
//! `supp(mu)`. `(lambda, nu) -> |P_* lambda - P_* nu|_1` is convex on `M x M`
//! and `M` is the convex hull of those point masses, so the maximum is
//! attained at a pair of them; likewise for `lambda -> |P_* lambda - target|_1`.
//!
//! Gaps are numbers at a finite horizon. Nothing here declares a process
//! ergodic; that is the job of the certificates in
//! [`minorization`](crate::minorization).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{validate_kernel, Process};
use crate::matrix::Kernel;
use crate::scalar::{ordered_sum, Scalar};
use crate::state_space::{check_dims, Measure, ReferenceSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notion {
    Weak,
    L1Weak,
    Strong,
    L1Strong,
}

impl Notion {
    pub fn as_str(self) -> &'static str {
        match self {
            Notion::Weak => "weak",
            Notion::L1Weak => "l1_weak",
            Notion::Strong => "strong",
            Notion::L1Strong => "l1_strong",
        }
    }

    pub fn needs_target(self) -> bool {
        matches!(self, Notion::Strong | Notion::L1Strong)
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Notion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Notion::Weak),
            "l1_weak" => Ok(Notion::L1Weak),
            "strong" => Ok(Notion::Strong),
            "l1_strong" => Ok(Notion::L1Strong),
            other => Err(Error::InvalidParameter(format!(
                "unknown notion {other:?} (expected weak, l1_weak, strong or l1_strong)"
            ))),
        }
    }
}

/// Gap sequence for one notion and start time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GapReport<T> {
    pub notion: Notion,
    pub k: usize,
    pub horizons: Vec<usize>,
    pub gaps: Vec<T>,
    pub candidate_limit: Option<Measure<T>>,
}

#[derive(Serialize)]
struct GapRow {
    notion: &'static str,
    k: usize,
    n: usize,
    gap: f64,
}

impl<T: Scalar> GapReport<T> {
    /// CSV with columns `notion,k,n,gap`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (&n, &gap) in self.horizons.iter().zip(&self.gaps) {
            w.serialize(GapRow {
                notion: self.notion.as_str(),
                k: self.k,
                n,
                gap: gap.to_f64_lossy(),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Nonzero entries of each selected row, in column order.
fn sparse_rows<T: Scalar>(
    kernel: &Kernel<T>,
    select: impl Fn(usize) -> bool,
) -> Vec<(usize, Vec<(usize, T)>)> {
    (0..kernel.n())
        .filter(|&i| select(i))
        .map(|i| {
            let mut row = Vec::new();
            kernel.for_each_in_row(i, |j, v| {
                if v != T::zero() {
                    row.push((j, v));
                }
            });
            (i, row)
        })
        .collect()
}

fn sparse_l1<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)]) -> T {
    let mut acc = T::zero();
    let (mut x, mut y) = (0, 0);
    while x < a.len() || y < b.len() {
        match (a.get(x), b.get(y)) {
            (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                acc += (va - vb).abs();
                x += 1;
                y += 1;
            }
            (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                acc += va.abs();
                x += 1;
            }
            (Some(_), Some(&(_, vb))) => {
                acc += vb.abs();
                y += 1;
            }
            (Some(&(_, va)), None) => {
                acc += va.abs();
                x += 1;
            }
            (None, Some(&(_, vb))) => {
                acc += vb.abs();
                y += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    acc
}

/// Largest L1 distance between two rows among those selected.
pub fn max_pairwise_row_distance<T: Scalar>(
    kernel: &Kernel<T>,
    select: impl Fn(usize) -> bool,
) -> T {
    let rows = sparse_rows(kernel, select);
    let mut worst = T::zero();
    for (a, (_, ra)) in rows.iter().enumerate() {
        for (_, rb) in &rows[a + 1..] {
            worst = worst.max(sparse_l1(ra, rb));
        }
    }
    worst
}

/// Largest L1 distance from a selected row to `target`.
pub fn max_row_distance_to<T: Scalar>(
    kernel: &Kernel<T>,
    target: &[T],
    select: impl Fn(usize) -> bool,
) -> T {
    let target: Vec<(usize, T)> = target
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != T::zero())
        .map(|(j, &v)| (j, v))
        .collect();
    sparse_rows(kernel, select)
        .iter()
        .map(|(_, row)| sparse_l1(row, &target))
        .fold(T::zero(), T::max)
}

fn check_target<T: Scalar>(reference: &ReferenceSpace<T>, target: &Measure<T>) -> Result<()> {
    check_dims(reference.n_states(), target.len())?;
    if !target.is_probability() {
        return Err(Error::NotProbability {
            mass: target.mass().to_f64_lossy(),
        });
    }
    Ok(())
}

/// `sup_{x,y} |P^{[k,n]}(x,.) - P^{[k,n]}(y,.)|_1`.
pub fn weak_gap<T: Scalar>(p: &Process<T>, k: usize, n: usize) -> Result<T> {
    Ok(weak_gap_of(&p.compose(k, n)?))
}

/// `sup_{lambda,nu in M} |P_*^{[k,n]} lambda - P_*^{[k,n]} nu|_1`.
pub fn l1_weak_gap<T: Scalar>(p: &Process<T>, k: usize, n: usize) -> Result<T> {
    Ok(l1_weak_gap_of(&p.compose(k, n)?, p.reference()))
}

/// `sup_x |P^{[k,n]}(x,.) - target|_1`.
pub fn strong_gap<T: Scalar>(p: &Process<T>, k: usize, n: usize, target: &Measure<T>) -> Result<T> {
    check_target(p.reference(), target)?;
    Ok(max_row_distance_to(
        &p.compose(k, n)?,
        target.weights(),
        |_| true,
    ))
}

/// `sup_{lambda in M} |P_*^{[k,n]} lambda - target|_1`.
pub fn l1_strong_gap<T: Scalar>(
    p: &Process<T>,
    k: usize,
    n: usize,
    target: &Measure<T>,
) -> Result<T> {
    check_target(p.reference(), target)?;
    let reference = p.reference();
    Ok(max_row_distance_to(
        &p.compose(k, n)?,
        target.weights(),
        |i| reference.in_support(i),
    ))
}

pub fn weak_gap_of<T: Scalar>(kernel: &Kernel<T>) -> T {
    max_pairwise_row_distance(kernel, |_| true)
}

pub fn l1_weak_gap_of<T: Scalar>(kernel: &Kernel<T>, reference: &ReferenceSpace<T>) -> T {
    max_pairwise_row_distance(kernel, |i| reference.in_support(i))
}

/// Dobrushin coefficient `(1/2) max_{x,y} |P(x,.) - P(y,.)|_1` of a stochastic matrix.
pub fn dobrushin<T: Scalar>(matrix: &Kernel<T>) -> Result<T> {
    // stochasticity only; no reference measure constraints
    let reference = ReferenceSpace::uniform(matrix.n())?;
    validate_kernel(0, matrix, &reference)?;
    Ok(weak_gap_of(matrix) / T::of(2.0))
}

/// Gap of `notion` at each horizon in `horizons` (strictly increasing, all > k).
///
/// Strong notions use `target` when given, otherwise the push-forward of the
/// reference measure to the largest horizon.
pub fn decay_table<T: Scalar>(
    p: &Process<T>,
    k: usize,
    horizons: &[usize],
    notion: Notion,
    target: Option<&Measure<T>>,
) -> Result<GapReport<T>> {
    let n_max = *horizons
        .last()
        .ok_or_else(|| Error::InvalidParameter("horizons must be nonempty".into()))?;
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "horizons must be strictly increasing".into(),
        ));
    }
    if horizons[0] <= k {
        return Err(Error::InvalidTimeRange { k, n: horizons[0] });
    }
    let candidate_limit = if notion.needs_target() {
        let t = match target {
            Some(t) => t.clone(),
            None => p.push_forward(k, n_max, &p.reference().as_measure())?,
        };
        check_target(p.reference(), &t)?;
        Some(t)
    } else {
        None
    };
    let prefixes = p.compose_prefixes(k, n_max)?;
    let reference = p.reference();
    let gaps = horizons
        .iter()
        .map(|&n| {
            let kernel = &prefixes[n - k - 1];
            match (notion, &candidate_limit) {
                (Notion::Weak, _) => weak_gap_of(kernel),
                (Notion::L1Weak, _) => l1_weak_gap_of(kernel, reference),
                (Notion::Strong, Some(t)) => max_row_distance_to(kernel, t.weights(), |_| true),
                (Notion::L1Strong, Some(t)) => {
                    max_row_distance_to(kernel, t.weights(), |i| reference.in_support(i))
                }
                _ => unreachable!("strong notions always carry a target"),
            }
        })
        .collect();
    Ok(GapReport {
        notion,
        k,
        horizons: horizons.to_vec(),
        gaps,
        candidate_limit,
    })
}

/// `sum_i a_i f_i`.
pub fn pairing<T: Scalar>(a: &[T], f: &[T]) -> T {
    ordered_sum(a.iter().zip(f).map(|(&x, &y)| x * y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gen_block_example;

    #[test]
    fn consensus_and_identity() {
        let r = ReferenceSpace::<f64>::uniform(3).unwrap();
        let row = vec![0.2, 0.3, 0.5];
        let same = Kernel::from_rows(&[row.clone(), row.clone(), row.clone()]).unwrap();
        let p = Process::homogeneous(r.clone(), same.clone()).unwrap();
        assert_eq!(weak_gap(&p, 0, 1).unwrap(), 0.0);
        assert_eq!(dobrushin(&same).unwrap(), 0.0);
        let target = Measure::new(row).unwrap();
        assert_eq!(strong_gap(&p, 0, 3, &target).unwrap(), 0.0);

        let id = Process::homogeneous(r, Kernel::identity(3)).unwrap();
        assert_eq!(weak_gap(&id, 0, 5).unwrap(), 2.0);
        assert_eq!(dobrushin(&Kernel::<f64>::identity(2)).unwrap(), 1.0);
    }

    #[test]
    fn block_example_gaps() {
        let p = gen_block_example::<f64>(0.7).unwrap();
        let target = Measure::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        for n in 1..=12 {
            assert_eq!(weak_gap(&p, 0, n).unwrap(), 2.0);
            assert_eq!(strong_gap(&p, 0, n, &target).unwrap(), 2.0);
            let expected = 2.0 * 0.4f64.powi(n as i32);
            assert!((l1_weak_gap(&p, 0, n).unwrap() - expected).abs() < 1e-12);
            assert!((l1_strong_gap(&p, 0, n, &target).unwrap() - expected / 2.0).abs() < 1e-12);
        }
        assert_eq!(dobrushin(p.step(0).unwrap().matrix()).unwrap(), 1.0);
    }

    #[test]
    fn single_support_state_has_zero_l1_gap() {
        let r = ReferenceSpace::new(vec![1.0, 0.0]).unwrap();
        let m = Kernel::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let p = Process::homogeneous(r, m).unwrap();
        assert_eq!(l1_weak_gap(&p, 0, 3).unwrap(), 0.0);
        assert!(weak_gap(&p, 0, 3).unwrap() > 0.0);
    }

    #[test]
    fn dobrushin_rejects_non_stochastic() {
        let m = Kernel::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            dobrushin(&m),
            Err(Error::NonStochasticRow { row: 0, .. })
        ));
    }

    #[test]
    fn decay_table_validation_and_csv() {
        let p = gen_block_example::<f64>(0.7).unwrap();
        assert!(decay_table(&p, 0, &[], Notion::Weak, None).is_err());
        assert!(decay_table(&p, 0, &[2, 2], Notion::Weak, None).is_err());
        assert!(decay_table(&p, 3, &[3, 4], Notion::Weak, None).is_err());
        let report = decay_table(&p, 0, &[1, 2], Notion::Weak, None).unwrap();
        assert_eq!(
            report.to_csv().unwrap(),
            "notion,k,n,gap\nweak,0,1,2.0\nweak,0,2,2.0\n"
        );
        let strong = decay_table(&p, 0, &[1, 30], Notion::L1Strong, None).unwrap();
        let limit = strong.candidate_limit.unwrap();
        assert!((limit.weights()[0] - 0.5).abs() < 1e-10);
        assert!("sideways".parse::<Notion>().is_err());
    }
}
