//! Minorization certificates, the coupling decomposition, and product bounds.
//!
//! A certificate at time `k` with step count `n_k` is a nonnegative measure
//! `mu_k` (already restricted to its set `X_k`) such that
//!
//! ```text
//! P_*^{[k, k+n_k]} lambda >= mu_k    for every lambda in M.
//! ```
//!
//! On a finite space the largest such measure is the column-wise minimum of
//! `P^{[k,k+n_k]}` over the rows in `supp(mu)`: the inequality is linear in
//! `lambda`, so it holds on `M` iff it holds on the point masses. That
//! certificate does not depend on `lambda`, so the pairwise sets `X_k`, `Y_k`
//! and their intersection collapse to one set.
//!
//! Certificates are normalized to mass `< 1/2` by repeated halving. Each
//! coupling step then removes the common mass `mu_k` from both push-forwards,
//! leaving residual probability measures scaled by `gamma = 1 - |mu_k|`, with
//! `1/2 <= gamma <= 1 - |mu_k|/2`. Chaining steps over consecutive,
//! non-overlapping windows gives
//!
//! ```text
//! |P_*^{[k,n]} lambda - P_*^{[k,n]} nu|_1 <= 2 prod_i (1 - |mu_i|_1 / 2).
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Process;
use crate::matrix::Kernel;
use crate::scalar::{ordered_sum, tolerance, Scalar};
use crate::state_space::{check_dims, Measure, ReferenceSpace, StateSet};

/// Minorization certificate `(k, n_k, mu_k 1_{X_k})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(try_from = "CertificateRepr<T>", into = "CertificateRepr<T>")]
pub struct MinorizationCertificate<T> {
    k: usize,
    n_k: usize,
    mu_k: Measure<T>,
    set: StateSet,
    mass: T,
    raw_mass: T,
    halved: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct CertificateRepr<T> {
    k: usize,
    n_k: usize,
    mass: T,
    mu_k: Vec<T>,
    #[serde(rename = "X_k")]
    x_k: Vec<usize>,
    halved: bool,
}

impl<T: Scalar> From<MinorizationCertificate<T>> for CertificateRepr<T> {
    fn from(c: MinorizationCertificate<T>) -> Self {
        CertificateRepr {
            k: c.k,
            n_k: c.n_k,
            mass: c.mass,
            x_k: c.set.indices(),
            mu_k: c.mu_k.into_weights(),
            halved: c.halved,
        }
    }
}

impl<T: Scalar> TryFrom<CertificateRepr<T>> for MinorizationCertificate<T> {
    type Error = Error;

    fn try_from(r: CertificateRepr<T>) -> Result<Self> {
        if r.n_k == 0 {
            return Err(Error::Schema("n_k must be at least 1".into()));
        }
        let n = r.mu_k.len();
        let mu_k = Measure::new(r.mu_k)?;
        let set = StateSet::from_indices(n, &r.x_k)?;
        if let Some(j) = (0..n).find(|&j| !set.contains(j) && mu_k.weights()[j] != T::zero()) {
            return Err(Error::Schema(format!(
                "mu_k has mass at state {j} outside X_k"
            )));
        }
        let mass = mu_k.mass();
        if (mass - r.mass).abs() > tolerance() {
            return Err(Error::Schema(format!(
                "stated mass {} differs from mu_k mass {}",
                r.mass, mass
            )));
        }
        if mass >= T::of(0.5) {
            return Err(Error::Schema("certificate mass must be below 1/2".into()));
        }
        let scale = if r.halved { T::of(2.0) } else { T::one() };
        Ok(MinorizationCertificate {
            k: r.k,
            n_k: r.n_k,
            mu_k,
            set,
            mass,
            raw_mass: mass * scale,
            halved: r.halved,
        })
    }
}

impl<T: Scalar> MinorizationCertificate<T> {
    /// Certificate from a minorizing vector, halved until its mass is below 1/2.
    /// `X_k` is the set where the minorant is positive.
    pub fn from_minorant(k: usize, n_k: usize, minorant: Vec<T>) -> Result<Self> {
        if n_k == 0 {
            return Err(Error::InvalidParameter("n_k must be at least 1".into()));
        }
        let raw = Measure::from_computed(minorant)?;
        let raw_mass = raw.mass();
        let half = T::of(0.5);
        let mut mu_k = raw;
        let mut halved = false;
        while mu_k.mass() >= half {
            mu_k = mu_k.scaled(half);
            halved = true;
        }
        let set = mu_k.positive_set();
        let mass = mu_k.mass();
        Ok(MinorizationCertificate {
            k,
            n_k,
            mu_k,
            set,
            mass,
            raw_mass,
            halved,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    /// End of the certified window, `k + n_k`.
    pub fn end(&self) -> usize {
        self.k + self.n_k
    }

    pub fn mu_k(&self) -> &Measure<T> {
        &self.mu_k
    }

    pub fn set(&self) -> &StateSet {
        &self.set
    }

    /// Mass after normalization; always below 1/2.
    pub fn mass(&self) -> T {
        self.mass
    }

    /// Mass of the minorant before halving.
    pub fn raw_mass(&self) -> T {
        self.raw_mass
    }

    pub fn halved(&self) -> bool {
        self.halved
    }

    /// No common mass: the certificate carries no information.
    pub fn is_empty(&self) -> bool {
        self.mass == T::zero()
    }

    /// Copy with `mu_k` multiplied by `factor` (no renormalization). Meant for
    /// building deliberately broken certificates in diagnostics.
    pub fn with_scaled_measure(&self, factor: T) -> Self {
        let mu_k = self.mu_k.scaled(factor);
        MinorizationCertificate {
            mass: mu_k.mass(),
            mu_k,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Largest certificate for a given multi-step kernel: column minima over `supp(mu)` rows.
pub fn certificate_from_kernel<T: Scalar>(
    kernel: &Kernel<T>,
    reference: &ReferenceSpace<T>,
    k: usize,
    n_k: usize,
) -> Result<MinorizationCertificate<T>> {
    check_dims(reference.n_states(), kernel.n())?;
    MinorizationCertificate::from_minorant(k, n_k, kernel.column_minima(reference.support_mask()))
}

/// One-step certificate for `P^{[k,k+1]}`.
pub fn extract_one_step_certificate<T: Scalar>(
    p: &Process<T>,
    k: usize,
) -> Result<MinorizationCertificate<T>> {
    certificate_from_kernel(p.step(k)?.matrix(), p.reference(), k, 1)
}

/// Scans `P^{[k,k+n]}` for `n = 1..=window` and returns the first certificate
/// whose pre-halving mass reaches `target_mass`, or else the heaviest one.
pub fn extract_certificate_windowed<T: Scalar>(
    p: &Process<T>,
    k: usize,
    window: usize,
    target_mass: T,
) -> Result<MinorizationCertificate<T>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let mut best: Option<MinorizationCertificate<T>> = None;
    for (offset, kernel) in p.compose_prefixes(k, k + window)?.iter().enumerate() {
        let cert = certificate_from_kernel(kernel, p.reference(), k, offset + 1)?;
        if cert.raw_mass() >= target_mass {
            return Ok(cert);
        }
        if best.as_ref().is_none_or(|b| cert.raw_mass() > b.raw_mass()) {
            best = Some(cert);
        }
    }
    Ok(best.expect("window >= 1"))
}

/// Largest shortfall `max_j (mu_k(j) - (P_* lambda)(j))` over the point masses
/// of `supp(mu)` and the supplied `lambdas` (non-positive when the certificate holds).
pub fn domination_deficit<T: Scalar>(
    p: &Process<T>,
    cert: &MinorizationCertificate<T>,
    lambdas: &[Measure<T>],
) -> Result<T> {
    let reference = p.reference();
    for lambda in lambdas {
        reference.check_in_m(lambda)?;
    }
    check_dims(reference.n_states(), cert.mu_k.len())?;
    let mut worst = T::neg_infinity();
    let probes = reference.extreme_points().chain(lambdas.iter().cloned());
    for lambda in probes {
        let pushed = p.push_forward_vec(cert.k, cert.end(), lambda.weights())?;
        for (&have, &need) in pushed.iter().zip(cert.mu_k.weights()) {
            worst = worst.max(need - have);
        }
    }
    Ok(worst)
}

/// Checks `P_*^{[k,k+n_k]} lambda >= mu_k` for every supplied `lambda` and every
/// point mass on `supp(mu)` (hence on all of `M`).
pub fn verify_certificate<T: Scalar>(
    p: &Process<T>,
    cert: &MinorizationCertificate<T>,
    lambdas: &[Measure<T>],
) -> Result<bool> {
    let deficit = domination_deficit(p, cert, lambdas)?;
    Ok(cert.is_empty() || deficit <= tolerance())
}

/// One coupling step: the common mass `mu_k` is removed from both push-forwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CouplingStep<T> {
    pub gamma: T,
    pub k_prev: usize,
    pub k_next: usize,
    pub residual_pair: (Measure<T>, Measure<T>),
}

/// Splits `P_* lam = mu_k + gamma lam_1` and `P_* nu = mu_k + gamma nu_1` over the
/// certificate window, with `gamma = 1 - |mu_k|_1`.
pub fn coupling_step<T: Scalar>(
    p: &Process<T>,
    cert: &MinorizationCertificate<T>,
    lam: &Measure<T>,
    nu: &Measure<T>,
) -> Result<CouplingStep<T>> {
    let reference = p.reference();
    reference.check_in_m(lam)?;
    reference.check_in_m(nu)?;
    let gamma = T::one() - cert.mass;
    if gamma <= T::zero() {
        return Err(Error::DegenerateCoupling {
            gamma: gamma.to_f64_lossy(),
        });
    }
    let tol = tolerance::<T>();
    let residual = |m: &Measure<T>| -> Result<Measure<T>> {
        let pushed = p.push_forward_vec(cert.k, cert.end(), m.weights())?;
        let mut out = Vec::with_capacity(pushed.len());
        for (state, (&have, &need)) in pushed.iter().zip(cert.mu_k.weights()).enumerate() {
            if have < need - tol {
                return Err(Error::CertificateNotDominating {
                    state,
                    deficit: (need - have).to_f64_lossy(),
                });
            }
            out.push((have - need) / gamma);
        }
        Measure::from_computed(out)
    };
    Ok(CouplingStep {
        gamma,
        k_prev: cert.k,
        k_next: cert.end(),
        residual_pair: (residual(lam)?, residual(nu)?),
    })
}

/// Applies [`coupling_step`] along consecutive certificates, feeding each
/// residual pair into the next step.
pub fn coupling_chain<T: Scalar>(
    p: &Process<T>,
    certs: &[MinorizationCertificate<T>],
    lam: &Measure<T>,
    nu: &Measure<T>,
) -> Result<Vec<CouplingStep<T>>> {
    check_consecutive(certs, true)?;
    let mut out: Vec<CouplingStep<T>> = Vec::with_capacity(certs.len());
    let (mut a, mut b) = (lam.clone(), nu.clone());
    for cert in certs {
        let step = coupling_step(p, cert, &a, &b)?;
        a = step.residual_pair.0.clone();
        b = step.residual_pair.1.clone();
        out.push(step);
    }
    Ok(out)
}

fn check_consecutive<T: Scalar>(
    certs: &[MinorizationCertificate<T>],
    contiguous: bool,
) -> Result<()> {
    for w in certs.windows(2) {
        let (prev_end, next_start) = (w[0].end(), w[1].k);
        if next_start < prev_end || (contiguous && next_start != prev_end) {
            return Err(Error::OverlappingCertificates {
                prev_end,
                next_start,
            });
        }
    }
    Ok(())
}

/// One line of a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub k: usize,
    pub n_k: usize,
    pub mass: f64,
    pub partial_sum: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundReport<T> {
    pub certificates: Vec<MinorizationCertificate<T>>,
    pub partial_mass_sum: T,
    pub product_bound: T,
    /// Bound after each certificate; entry `i` bounds gaps at horizon `certificates[i].end()`.
    pub trajectory: Vec<T>,
    pub partial_sums: Vec<T>,
}

impl<T: Scalar> BoundReport<T> {
    /// Horizon covered by the last certificate, or `None` for an empty report.
    pub fn horizon(&self) -> Option<usize> {
        self.certificates.last().map(|c| c.end())
    }

    pub fn rows(&self) -> Vec<BoundRow> {
        self.certificates
            .iter()
            .zip(&self.partial_sums)
            .zip(&self.trajectory)
            .map(|((c, &s), &b)| BoundRow {
                k: c.k,
                n_k: c.n_k,
                mass: c.mass.to_f64_lossy(),
                partial_sum: s.to_f64_lossy(),
                bound: b.to_f64_lossy(),
            })
            .collect()
    }

    /// CSV with columns `k,n_k,mass,partial_sum,bound`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // header is written even for an empty report
        w.write_record(["k", "n_k", "mass", "partial_sum", "bound"])?;
        for row in self.rows() {
            w.write_record([
                row.k.to_string(),
                row.n_k.to_string(),
                row.mass.to_string(),
                row.partial_sum.to_string(),
                row.bound.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// `2 prod_i (1 - |mu_i|_1 / 2)` over non-overlapping certificates in time order.
pub fn product_bound<T: Scalar>(certs: &[MinorizationCertificate<T>]) -> Result<BoundReport<T>> {
    check_consecutive(certs, false)?;
    let two = T::of(2.0);
    let mut bound = two;
    let mut sum = T::zero();
    let mut trajectory = Vec::with_capacity(certs.len());
    let mut partial_sums = Vec::with_capacity(certs.len());
    for c in certs {
        bound *= T::one() - c.mass / two;
        sum += c.mass;
        trajectory.push(bound);
        partial_sums.push(sum);
    }
    Ok(BoundReport {
        certificates: certs.to_vec(),
        partial_mass_sum: sum,
        product_bound: bound,
        trajectory,
        partial_sums,
    })
}

/// Finite-evidence verdict. Only a bound below `epsilon` counts as evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict<T> {
    CertifiedErgodicAtHorizon {
        horizon: usize,
        bound: T,
        epsilon: T,
    },
    Inconclusive {
        bound: T,
    },
}

impl<T: Scalar> Verdict<T> {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedErgodicAtHorizon { .. })
    }
}

impl<T: Scalar> fmt::Display for Verdict<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CertifiedErgodicAtHorizon { horizon, bound, .. } => {
                write!(f, "CERTIFIED@K={horizon} bound={bound}")
            }
            Verdict::Inconclusive { bound } => write!(f, "INCONCLUSIVE bound={bound}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DivergenceReport<T> {
    pub verdict: Verdict<T>,
    pub bound: BoundReport<T>,
}

/// Reports the mass partial sums and bound trajectory, certifying at the first
/// certificate whose cumulative bound drops below `epsilon`.
pub fn divergence_verdict<T: Scalar>(
    certs: &[MinorizationCertificate<T>],
    epsilon: T,
) -> Result<DivergenceReport<T>> {
    let bound = product_bound(certs)?;
    let hit = bound
        .trajectory
        .iter()
        .zip(&bound.certificates)
        .find(|(&b, _)| b < epsilon);
    let verdict = match hit {
        Some((&b, c)) => Verdict::CertifiedErgodicAtHorizon {
            horizon: c.end(),
            bound: b,
            epsilon,
        },
        None => Verdict::Inconclusive {
            bound: bound.product_bound,
        },
    };
    Ok(DivergenceReport { verdict, bound })
}

/// Greedy certificate chain from `k_start`: one windowed certificate per window,
/// each starting where the previous one ends, until `k_end` is passed or the
/// process runs out of steps.
pub fn certificate_chain<T: Scalar>(
    p: &Process<T>,
    k_start: usize,
    k_end: usize,
    window: usize,
    target_mass: T,
) -> Result<Vec<MinorizationCertificate<T>>> {
    let mut certs = Vec::new();
    let mut k = k_start;
    while k <= k_end {
        let cert = if window == 1 {
            extract_one_step_certificate(p, k)?
        } else {
            extract_certificate_windowed(p, k, window, target_mass)?
        };
        k = cert.end();
        certs.push(cert);
    }
    Ok(certs)
}

/// Which sets the Doeblin check ranges over.
#[derive(Debug, Clone, PartialEq)]
pub enum SetFamily {
    /// All `2^n` subsets; only for `n <= MAX_ENUMERATION_STATES`.
    Exhaustive,
    /// Nested sets of the `m` heaviest states under `nu`, `m = 1..=n`.
    Threshold,
    Explicit(Vec<StateSet>),
}

pub const MAX_ENUMERATION_STATES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DoeblinReport<T> {
    pub holds: bool,
    pub sets_checked: usize,
    /// First qualifying set `A` (with `nu(A) > iota`) where `min_x P^{n0}(x, A) < delta`,
    /// together with that minimum.
    pub witness: Option<(StateSet, T)>,
}

/// Doeblin's condition for a homogeneous process: every `A` with `nu(A) > iota`
/// has `min_x P^{n0}(x, A) >= delta`.
pub fn check_doeblin<T: Scalar>(
    p: &Process<T>,
    nu: &Measure<T>,
    n0: usize,
    iota: T,
    delta: T,
    family: &SetFamily,
) -> Result<DoeblinReport<T>> {
    if !p.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    let valid = iota > T::zero() && iota < T::one() && delta > T::zero() && n0 > 0;
    if !valid {
        return Err(Error::InvalidParameter(
            "Doeblin check needs 0 < iota < 1, delta > 0 and n0 >= 1".into(),
        ));
    }
    let n = p.n_states();
    check_dims(n, nu.len())?;
    let kernel = p.compose(0, n0)?;
    let rows: Vec<Vec<T>> = kernel.to_rows();
    let tol = tolerance::<T>();

    let mut sets_checked = 0;
    let mut test = |mask: &[bool]| -> Option<(StateSet, T)> {
        let nu_a = ordered_sum(
            nu.weights()
                .iter()
                .zip(mask)
                .filter_map(|(&w, &b)| b.then_some(w)),
        );
        if nu_a <= iota {
            return None;
        }
        sets_checked += 1;
        let worst = rows
            .iter()
            .map(|row| ordered_sum(row.iter().zip(mask).filter_map(|(&v, &b)| b.then_some(v))))
            .fold(T::infinity(), T::min);
        (worst < delta - tol).then(|| (StateSet::from_mask(mask.to_vec()), worst))
    };

    let mut witness = None;
    match family {
        SetFamily::Exhaustive => {
            if n > MAX_ENUMERATION_STATES {
                return Err(Error::SubsetEnumerationTooLarge {
                    n,
                    max: MAX_ENUMERATION_STATES,
                });
            }
            let mut mask = vec![false; n];
            for bits in 1u64..(1u64 << n) {
                for (j, m) in mask.iter_mut().enumerate() {
                    *m = bits >> j & 1 == 1;
                }
                if let Some(w) = test(&mask) {
                    witness = Some(w);
                    break;
                }
            }
        }
        SetFamily::Threshold => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                nu.weights()[b]
                    .partial_cmp(&nu.weights()[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut mask = vec![false; n];
            for &j in &order {
                mask[j] = true;
                if let Some(w) = test(&mask) {
                    witness = Some(w);
                    break;
                }
            }
        }
        SetFamily::Explicit(sets) => {
            for set in sets {
                check_dims(n, set.n_states())?;
                if let Some(w) = test(set.mask()) {
                    witness = Some(w);
                    break;
                }
            }
        }
    }
    Ok(DoeblinReport {
        holds: witness.is_none(),
        sets_checked,
        witness,
    })
}

/// Trajectory of the largest set `X_n` with `P_*^{[k,n]} lambda >= mu_k 1_{X_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSetReport<T> {
    pub k: usize,
    pub horizons: Vec<usize>,
    /// `max_lambda mu(X \ X_n)` over point masses of `supp(mu)`, per horizon.
    pub defects: Vec<T>,
    /// `X_n` at the last horizon for each starting point mass, keyed by state.
    pub final_sets: Vec<(usize, StateSet)>,
    pub consistent: bool,
}

/// Nonhomogeneous residual-set condition from time `k` with fixed measure `mu_k`,
/// checked for `n = k+1..=k+horizon`. Verdict is "consistent" when the defect at
/// the last horizon is within tolerance.
pub fn check_c2<T: Scalar>(
    p: &Process<T>,
    k: usize,
    mu_k: &Measure<T>,
    horizon: usize,
) -> Result<ResidualSetReport<T>> {
    let reference = p.reference();
    check_dims(reference.n_states(), mu_k.len())?;
    if mu_k.mass() <= T::zero() {
        return Err(Error::InvalidParameter(
            "minorizing measure must have positive mass".into(),
        ));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let tol = tolerance::<T>();
    let prefixes = p.compose_prefixes(k, k + horizon)?;
    let mut defects = Vec::with_capacity(horizon);
    let mut final_sets = Vec::new();
    for (offset, kernel) in prefixes.iter().enumerate() {
        let last = offset + 1 == horizon;
        let mut worst = T::zero();
        for x in reference.support() {
            let row = kernel.row_dense(x);
            let set = StateSet::from_mask(
                row.iter()
                    .zip(mu_k.weights())
                    .map(|(&have, &need)| have >= need - tol)
                    .collect(),
            );
            worst = worst.max(reference.mass_of(&set.complement()));
            if last {
                final_sets.push((x, set));
            }
        }
        defects.push(worst);
    }
    let consistent = defects.last().is_some_and(|&d| d <= tol);
    Ok(ResidualSetReport {
        k,
        horizons: (k + 1..=k + horizon).collect(),
        defects,
        final_sets,
        consistent,
    })
}

/// Homogeneous residual-set condition with measure `mu0` (the `k = 0` case of [`check_c2`]).
pub fn check_c0<T: Scalar>(
    p: &Process<T>,
    mu0: &Measure<T>,
    horizon: usize,
) -> Result<ResidualSetReport<T>> {
    if !p.is_homogeneous() {
        return Err(Error::NotHomogeneous);
    }
    check_c2(p, 0, mu0, horizon)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMinorizationReport<T> {
    /// `(step, row, entry, lambda)` for each entry below its lambda.
    pub violations: Vec<(usize, usize, T, T)>,
    /// Partial sums of `1 - lambda_k`.
    pub sum_one_minus_lambda: Vec<T>,
    /// Partial sums of `lambda_k`.
    pub sum_lambda: Vec<T>,
    pub divergence: DivergenceReport<T>,
    /// The verdict follows the `sum lambda_k` route (certificate masses), not the
    /// `sum (1 - lambda_k)` series; both are reported because they can disagree.
    pub verdict_basis: &'static str,
}

impl<T: Scalar> ColumnMinorizationReport<T> {
    pub fn column_condition_holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Column lower bounds `P^{[k,k+1]}(i, target_k) >= lambda_k` for all rows `i`, for
/// steps `first..=last`. `targets[t]` and `lambdas[t]` belong to step `first + t`.
///
/// Each step contributes the certificate `lambda_k delta_{target_k}`; the verdict
/// is [`divergence_verdict`] over those certificates (inconclusive if any bound fails).
pub fn check_column_minorization<T: Scalar>(
    p: &Process<T>,
    first: usize,
    last: usize,
    targets: &[usize],
    lambdas: &[T],
    epsilon: T,
) -> Result<ColumnMinorizationReport<T>> {
    if last < first {
        return Err(Error::InvalidTimeRange { k: first, n: last });
    }
    let needed = last - first + 1;
    for len in [targets.len(), lambdas.len()] {
        if len < needed {
            return Err(Error::SequenceTooShort { needed, found: len });
        }
    }
    let n = p.n_states();
    let tol = tolerance::<T>();
    let mut violations = Vec::new();
    let mut certs = Vec::with_capacity(needed);
    let (mut s1, mut s2) = (T::zero(), T::zero());
    let mut sum_one_minus_lambda = Vec::with_capacity(needed);
    let mut sum_lambda = Vec::with_capacity(needed);
    for t in 0..needed {
        let k = first + t;
        let (target, lambda) = (targets[t], lambdas[t]);
        if target >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: target + 1,
            });
        }
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "lambda_{k} = {lambda} outside [0, 1]"
            )));
        }
        let step = p.step(k)?;
        for i in 0..n {
            let v = step.matrix().get(i, target);
            if v < lambda - tol {
                violations.push((k, i, v, lambda));
            }
        }
        s1 += T::one() - lambda;
        s2 += lambda;
        sum_one_minus_lambda.push(s1);
        sum_lambda.push(s2);
        let mut minorant = vec![T::zero(); n];
        minorant[target] = lambda;
        certs.push(MinorizationCertificate::from_minorant(k, 1, minorant)?);
    }
    let mut divergence = divergence_verdict(&certs, epsilon)?;
    if !violations.is_empty() {
        divergence.verdict = Verdict::Inconclusive { bound: T::of(2.0) };
    }
    Ok(ColumnMinorizationReport {
        violations,
        sum_one_minus_lambda,
        sum_lambda,
        divergence,
        verdict_basis:
            "sum of lambda_k (certificate masses); sum of (1 - lambda_k) reported for comparison",
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetMinorization<T> {
    /// `min_{x in supp(mu)} P(x, A)`.
    pub alpha: T,
    /// Column-wise row minimum restricted to `A`.
    pub nu_k: Measure<T>,
    /// `nu_k / nu_k(A)`, or `None` when `nu_k(A) = 0`.
    pub mu_k: Option<Measure<T>>,
}

/// Set-based minorization of a one-step kernel on `A`.
///
/// Note `nu_k(A) <= alpha` and the two can differ (for the identity kernel on
/// `A = X`, `alpha = 1` but `nu_k = 0`); only `nu_k` is a minorant of the rows.
pub fn set_minorization<T: Scalar>(
    kernel: &Kernel<T>,
    reference: &ReferenceSpace<T>,
    set: &StateSet,
) -> Result<SetMinorization<T>> {
    check_dims(reference.n_states(), kernel.n())?;
    check_dims(kernel.n(), set.n_states())?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let alpha = reference
        .support()
        .map(|i| kernel.row_mass_on(i, set.mask()))
        .fold(T::infinity(), T::min);
    let minima = kernel.column_minima(reference.support_mask());
    let nu_k = Measure::from_computed(
        minima
            .iter()
            .zip(set.mask())
            .map(|(&v, &inside)| if inside { v } else { T::zero() })
            .collect(),
    )?;
    let total = nu_k.mass();
    let mu_k = (total > T::zero()).then(|| nu_k.scaled(T::one() / total));
    Ok(SetMinorization { alpha, nu_k, mu_k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedCertificate<T> {
    pub certificate: MinorizationCertificate<T>,
    /// `max_lambda |P_* lambda - nu_k|_inf` at the chosen `n_k`, over point masses of `supp(mu)`.
    pub sup_deviation: T,
    pub verified: bool,
}

/// Builds a certificate from observed convergence: `nu_k = P_*^{[k,k+n]} mu0`,
/// `A_k = {nu_k >= iota/2}`, `mu_k = nu_k 1_{A_k} / 2`, where `n` is the first
/// step count in `1..=window` with sup-norm deviation below `iota/2` (else the
/// smallest deviation). The result is checked with [`verify_certificate`].
pub fn construct_certificate_from_decay<T: Scalar>(
    p: &Process<T>,
    k: usize,
    mu0: &Measure<T>,
    window: usize,
    iota: T,
) -> Result<ConstructedCertificate<T>> {
    let reference = p.reference();
    reference.check_in_m(mu0)?;
    if window == 0 || !(iota > T::zero() && iota < T::one()) {
        return Err(Error::InvalidParameter(
            "need window >= 1 and 0 < iota < 1".into(),
        ));
    }
    let half_iota = iota / T::of(2.0);
    let mut best: Option<(usize, T, Vec<T>)> = None;
    for (offset, kernel) in p.compose_prefixes(k, k + window)?.iter().enumerate() {
        let nu = kernel.left_mul(mu0.weights())?;
        let deviation = reference
            .support()
            .map(|x| {
                kernel
                    .row_dense(x)
                    .iter()
                    .zip(&nu)
                    .map(|(&a, &b)| (a - b).abs())
                    .fold(T::zero(), T::max)
            })
            .fold(T::zero(), T::max);
        let better = best.as_ref().is_none_or(|(_, d, _)| deviation < *d);
        if better {
            best = Some((offset + 1, deviation, nu));
        }
        if deviation < half_iota {
            break;
        }
    }
    let (n_k, sup_deviation, nu) = best.expect("window >= 1");
    let minorant = nu
        .iter()
        .map(|&v| {
            if v >= half_iota {
                v / T::of(2.0)
            } else {
                T::zero()
            }
        })
        .collect();
    let certificate = MinorizationCertificate::from_minorant(k, n_k, minorant)?;
    let verified = verify_certificate(p, &certificate, &[])?;
    Ok(ConstructedCertificate {
        certificate,
        sup_deviation,
        verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gen_block_example, ladder_process};

    fn equal_rows(row: Vec<f64>) -> Process<f64> {
        let n = row.len();
        let reference = ReferenceSpace::uniform(n).unwrap();
        let m = Kernel::from_rows(&vec![row; n]).unwrap();
        Process::homogeneous(reference, m).unwrap()
    }

    #[test]
    fn equal_rows_certificate_is_halved_below_half() {
        let p = equal_rows(vec![0.2, 0.3, 0.5]);
        let c = extract_one_step_certificate(&p, 0).unwrap();
        assert!(c.halved());
        assert_eq!(c.raw_mass(), 1.0);
        assert!(c.mass() < 0.5);
        assert_eq!(c.mu_k().weights(), &[0.05, 0.075, 0.125]);
        assert!(verify_certificate(&p, &c, &[]).unwrap());
    }

    #[test]
    fn block_example_certificate_ignores_null_rows() {
        let p = gen_block_example::<f64>(0.7).unwrap();
        let c = extract_one_step_certificate(&p, 0).unwrap();
        assert!((c.raw_mass() - 0.6).abs() < 1e-15);
        assert_eq!(c.set().indices(), vec![0, 1]);
        assert!(c.halved());
    }

    #[test]
    fn empty_certificate_is_vacuous() {
        let reference = ReferenceSpace::uniform(2).unwrap();
        let p = Process::homogeneous(reference, Kernel::<f64>::identity(2)).unwrap();
        let c = extract_one_step_certificate(&p, 0).unwrap();
        assert!(c.is_empty());
        assert!(verify_certificate(&p, &c, &[]).unwrap());
    }

    #[test]
    fn inflated_certificate_fails() {
        let p = ladder_process::<f64>(16, 1.0).unwrap();
        let c = extract_one_step_certificate(&p, 4).unwrap();
        assert!(verify_certificate(&p, &c, &[]).unwrap());
        // undo the halving, then double once more
        let bad = c.with_scaled_measure(4.0);
        assert!(!verify_certificate(&p, &bad, &[]).unwrap());
    }

    #[test]
    fn verify_rejects_lambda_outside_m() {
        let p = gen_block_example::<f64>(0.7).unwrap();
        let c = extract_one_step_certificate(&p, 0).unwrap();
        let outside = Measure::point_mass(4, 2);
        assert!(matches!(
            verify_certificate(&p, &c, &[outside]),
            Err(Error::NotAbsolutelyContinuous { .. })
        ));
    }

    #[test]
    fn product_bound_arithmetic() {
        let c = MinorizationCertificate::from_minorant(0, 1, vec![0.4, 0.0]).unwrap();
        let report = product_bound(&[c]).unwrap();
        assert!((report.product_bound - 1.6f64).abs() < 1e-15);
        let empty = product_bound::<f64>(&[]).unwrap();
        assert_eq!(empty.product_bound, 2.0);
        assert_eq!(empty.horizon(), None);
        assert_eq!(empty.to_csv().unwrap(), "k,n_k,mass,partial_sum,bound\n");
    }

    #[test]
    fn product_bound_rejects_overlap() {
        let a = MinorizationCertificate::from_minorant(0, 2, vec![0.1, 0.0]).unwrap();
        let b = MinorizationCertificate::from_minorant(1, 1, vec![0.1, 0.0]).unwrap();
        assert!(matches!(
            product_bound(&[a, b]),
            Err(Error::OverlappingCertificates {
                prev_end: 2,
                next_start: 1
            })
        ));
    }

    #[test]
    fn gamma_bounds_and_trivial_coupling() {
        let p = ladder_process::<f64>(16, 1.0).unwrap();
        let c = extract_one_step_certificate(&p, 3).unwrap();
        let lam = Measure::point_mass(16, 0);
        let step = coupling_step(&p, &c, &lam, &lam).unwrap();
        assert_eq!(step.gamma, 1.0 - c.mass());
        assert!(step.gamma >= 0.5 && step.gamma <= 1.0 - c.mass() / 2.0);
        assert_eq!(step.residual_pair.0, step.residual_pair.1);
        assert!(step.residual_pair.0.is_probability());
    }

    #[test]
    fn coupling_rejects_non_dominating_certificate() {
        let p = ladder_process::<f64>(16, 1.0).unwrap();
        let c = extract_one_step_certificate(&p, 3)
            .unwrap()
            .with_scaled_measure(2.5);
        let lam = Measure::point_mass(16, 0);
        assert!(matches!(
            coupling_step(&p, &c, &lam, &lam),
            Err(Error::CertificateNotDominating { .. })
        ));
    }

    #[test]
    fn set_minorization_examples() {
        let p = ladder_process::<f64>(16, 1.0).unwrap();
        let step = p.step(5).unwrap();
        let r = p.reference();
        let full = set_minorization(step.matrix(), r, &StateSet::full(16)).unwrap();
        assert!((full.alpha - 1.0).abs() < 1e-12);
        let col = StateSet::from_indices(16, &[4]).unwrap(); // state k = 5
        let s = set_minorization(step.matrix(), r, &col).unwrap();
        assert!(s.alpha >= 4.0 / 5.0);
        assert!(set_minorization(step.matrix(), r, &StateSet::empty(16)).is_err());

        let reference = ReferenceSpace::uniform(2).unwrap();
        let id = Kernel::<f64>::identity(2);
        let s = set_minorization(&id, &reference, &StateSet::full(2)).unwrap();
        assert_eq!(s.alpha, 1.0);
        assert_eq!(s.nu_k.mass(), 0.0);
        assert!(s.mu_k.is_none());
        let perm = Kernel::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let three = ReferenceSpace::uniform(3).unwrap();
        let s = set_minorization(&perm, &three, &StateSet::from_indices(3, &[0]).unwrap()).unwrap();
        assert_eq!(s.alpha, 0.0);
    }

    #[test]
    fn certificate_json_shape() {
        let c = MinorizationCertificate::from_minorant(3, 1, vec![0.0, 0.8, 0.0]).unwrap();
        let s = c.to_json().unwrap();
        assert_eq!(
            s,
            r#"{"k":3,"n_k":1,"mass":0.4,"mu_k":[0.0,0.4,0.0],"X_k":[1],"halved":true}"#
        );
        let back: MinorizationCertificate<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"k":3,"n_k":1,"mass":0.4,"mu_k":[0.4,0.0,0.0],"X_k":[1],"halved":true}"#;
        assert!(serde_json::from_str::<MinorizationCertificate<f64>>(bad).is_err());
    }

    #[test]
    fn verdict_display_is_stable() {
        let v: Verdict<f64> = Verdict::CertifiedErgodicAtHorizon {
            horizon: 20,
            bound: 0.005,
            epsilon: 0.01,
        };
        assert_eq!(v.to_string(), "CERTIFIED@K=20 bound=0.005");
        assert_eq!(
            Verdict::Inconclusive { bound: 2.0f64 }.to_string(),
            "INCONCLUSIVE bound=2"
        );
    }
}
