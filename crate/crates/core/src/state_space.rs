//! Finite reference probability spaces, measures on them, and L1 geometry.
//!
//! A [`ReferenceSpace`] carries the reference probability `mu`. The set `M` of
//! probability measures absolutely continuous with respect to `mu` is never
//! materialized; membership is decided by [`is_abs_continuous`] together with
//! [`Measure::is_probability`]. Measures always live on the full state space,
//! including states outside `supp(mu)`, so that point masses on null states
//! can be represented (they matter for the non-L1 ergodicity notions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ordered_sum, tolerance, Scalar};

/// Reference probability measure `mu` on `{0, .., n_states - 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReferenceRepr<T>", into = "ReferenceRepr<T>")]
#[serde(bound = "T: Scalar")]
pub struct ReferenceSpace<T> {
    mu: Vec<T>,
    support: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ReferenceRepr<T> {
    mu: Vec<T>,
}

impl<T: Scalar> TryFrom<ReferenceRepr<T>> for ReferenceSpace<T> {
    type Error = Error;

    fn try_from(repr: ReferenceRepr<T>) -> Result<Self> {
        ReferenceSpace::new(repr.mu)
    }
}

impl<T: Scalar> From<ReferenceSpace<T>> for ReferenceRepr<T> {
    fn from(space: ReferenceSpace<T>) -> Self {
        ReferenceRepr { mu: space.mu }
    }
}

impl<T: Scalar> ReferenceSpace<T> {
    pub fn new(mu: Vec<T>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidReference("no states".into()));
        }
        if let Some((index, value)) = mu
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= T::zero()))
        {
            return Err(Error::NegativeWeight {
                index,
                value: value.to_f64_lossy(),
            });
        }
        let total = ordered_sum(mu.iter().copied());
        if (total - T::one()).abs() > tolerance() {
            return Err(Error::InvalidReference(format!(
                "mu sums to {total}, expected 1"
            )));
        }
        let support: Vec<bool> = mu.iter().map(|&v| v > T::zero()).collect();
        if !support.iter().any(|&s| s) {
            return Err(Error::InvalidReference("empty support".into()));
        }
        Ok(ReferenceSpace { mu, support })
    }

    pub fn uniform(n_states: usize) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidReference("no states".into()));
        }
        let w = T::one() / T::of(n_states as f64);
        Self::new(vec![w; n_states])
    }

    /// Poisson(`rate`) law on the states `1, 2, ..` (stored at `0, 1, ..`),
    /// truncated to `n_states` states and renormalized.
    pub fn truncated_poisson(n_states: usize, rate: f64) -> Result<Self> {
        if n_states == 0 || !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncated Poisson needs n_states > 0 and rate > 0, got {n_states}, {rate}"
            )));
        }
        // pmf computed in log space so large truncations stay positive
        let weights: Vec<f64> = (0..n_states)
            .map(|m| {
                let log_fact: f64 = (1..=m).map(|j| (j as f64).ln()).sum();
                (m as f64 * rate.ln() - rate - log_fact).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mu = weights.iter().map(|w| T::of(w / total)).collect::<Vec<_>>();
        Self::new(renormalize(mu))
    }

    pub fn n_states(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn in_support(&self, state: usize) -> bool {
        self.support.get(state).copied().unwrap_or(false)
    }

    pub fn support_mask(&self) -> &[bool] {
        &self.support
    }

    /// States with positive reference mass, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.support
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
    }

    pub fn support_set(&self) -> StateSet {
        StateSet {
            mask: self.support.clone(),
        }
    }

    /// `mu` as a [`Measure`].
    pub fn as_measure(&self) -> Measure<T> {
        Measure {
            weights: self.mu.clone(),
        }
    }

    /// `mu(B)`.
    pub fn mass_of(&self, set: &StateSet) -> T {
        ordered_sum(
            self.mu
                .iter()
                .zip(set.mask.iter())
                .filter_map(|(&w, &inside)| inside.then_some(w)),
        )
    }

    /// Point masses `delta_x` for `x` in `supp(mu)`: the extreme points of `M`.
    pub fn extreme_points(&self) -> impl Iterator<Item = Measure<T>> + '_ {
        let n = self.n_states();
        self.support().map(move |i| Measure::point_mass(n, i))
    }

    /// Checks `m` is a probability measure in `M`.
    pub fn check_in_m(&self, m: &Measure<T>) -> Result<()> {
        check_dims(self.n_states(), m.len())?;
        if !m.is_probability() {
            return Err(Error::NotProbability {
                mass: m.mass().to_f64_lossy(),
            });
        }
        if let Some(index) = first_outside_support(m, self) {
            return Err(Error::NotAbsolutelyContinuous {
                index,
                value: m.weights[index].to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Nonnegative measure on the full state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Measure<T> {
    weights: Vec<T>,
}

impl<T: Scalar> Measure<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if let Some((index, value)) = weights
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= T::zero()))
        {
            return Err(Error::NegativeWeight {
                index,
                value: value.to_f64_lossy(),
            });
        }
        Ok(Measure { weights })
    }

    /// Builds a measure from a computed vector, flushing round-off negatives
    /// (down to `-tolerance`) to zero.
    pub fn from_computed(mut weights: Vec<T>) -> Result<Self> {
        let tol = tolerance::<T>();
        for w in weights.iter_mut() {
            if *w < T::zero() && *w >= -tol {
                *w = T::zero();
            }
        }
        Self::new(weights)
    }

    /// New probability measure; checks the mass is one.
    pub fn probability(weights: Vec<T>) -> Result<Self> {
        let m = Self::new(weights)?;
        if !m.is_probability() {
            return Err(Error::NotProbability {
                mass: m.mass().to_f64_lossy(),
            });
        }
        Ok(m)
    }

    pub fn zeros(n: usize) -> Self {
        Measure {
            weights: vec![T::zero(); n],
        }
    }

    pub fn point_mass(n: usize, state: usize) -> Self {
        let mut weights = vec![T::zero(); n];
        weights[state] = T::one();
        Measure { weights }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<T> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> T {
        ordered_sum(self.weights.iter().copied())
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - T::one()).abs() <= tolerance()
    }

    /// States carrying positive mass.
    pub fn positive_set(&self) -> StateSet {
        StateSet {
            mask: self.weights.iter().map(|&w| w > T::zero()).collect(),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Measure {
            weights: self.weights.iter().map(|&w| w * factor).collect(),
        }
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn mix(&self, other: &Measure<T>, t: T) -> Result<Self> {
        check_dims(self.len(), other.len())?;
        Ok(Measure {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(&a, &b)| (T::one() - t) * a + t * b)
                .collect(),
        })
    }

    /// True when `self >= other - tol` componentwise.
    pub fn dominates(&self, other: &Measure<T>, tol: T) -> Result<bool> {
        check_dims(self.len(), other.len())?;
        Ok(self
            .weights
            .iter()
            .zip(&other.weights)
            .all(|(&a, &b)| a >= b - tol))
    }
}

/// Membership mask over states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateSet {
    mask: Vec<bool>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet {
            mask: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Self {
        StateSet {
            mask: vec![true; n],
        }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        StateSet { mask }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i + 1,
                });
            }
            mask[i] = true;
        }
        Ok(StateSet { mask })
    }

    pub fn n_states(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.mask.get(state).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, state: usize) {
        self.mask[state] = true;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn complement(&self) -> Self {
        StateSet {
            mask: self.mask.iter().map(|&b| !b).collect(),
        }
    }

    pub fn intersection(&self, other: &StateSet) -> Self {
        StateSet {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn first_outside_support<T: Scalar>(
    m: &Measure<T>,
    reference: &ReferenceSpace<T>,
) -> Option<usize> {
    m.weights
        .iter()
        .zip(&reference.support)
        .position(|(&w, &inside)| !inside && w != T::zero())
}

fn renormalize<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    let total = ordered_sum(v.iter().copied());
    for w in v.iter_mut() {
        *w /= total;
    }
    v
}

/// `sum_i |a_i - b_i|` over two equally sized vectors.
pub fn l1_norm_diff<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    check_dims(a.len(), b.len())?;
    Ok(ordered_sum(a.iter().zip(b).map(|(&x, &y)| (x - y).abs())))
}

/// L1 (twice total variation) distance between two measures.
pub fn l1_distance<T: Scalar>(a: &Measure<T>, b: &Measure<T>) -> Result<T> {
    l1_norm_diff(&a.weights, &b.weights)
}

/// `m << mu`: `m` vanishes outside `supp(mu)`.
pub fn is_abs_continuous<T: Scalar>(m: &Measure<T>, reference: &ReferenceSpace<T>) -> Result<bool> {
    check_dims(reference.n_states(), m.len())?;
    Ok(first_outside_support(m, reference).is_none())
}

/// `m 1_B`: keeps the weights on `B`, zeroes the rest.
pub fn restrict<T: Scalar>(m: &Measure<T>, set: &StateSet) -> Result<Measure<T>> {
    check_dims(m.len(), set.n_states())?;
    Ok(Measure {
        weights: m
            .weights
            .iter()
            .zip(&set.mask)
            .map(|(&w, &inside)| if inside { w } else { T::zero() })
            .collect(),
    })
}
