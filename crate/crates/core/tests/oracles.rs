#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use nhdmp::*;

fn block_target() -> Measure<f64> {
    Measure::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap()
}

#[test]
fn block_chain_separates_notions() {
    for p in [0.3, 0.7] {
        let chain = gen_block_example::<f64>(p).unwrap();
        let rate = (2.0 * p - 1.0f64).abs();
        for n in 1..=20 {
            let expected = rate.powi(n as i32);
            assert!((l1_weak_gap(&chain, 0, n).unwrap() - 2.0 * expected).abs() < 1e-10);
            assert!(
                (l1_strong_gap(&chain, 0, n, &block_target()).unwrap() - expected).abs() < 1e-10
            );
            assert_eq!(weak_gap(&chain, 0, n).unwrap(), 2.0);
            assert_eq!(strong_gap(&chain, 0, n, &block_target()).unwrap(), 2.0);
        }
    }
}

#[test]
fn block_chain_in_single_precision() {
    let chain = gen_block_example::<f32>(0.7).unwrap();
    for n in 1..=8 {
        let gap = l1_weak_gap(&chain, 0, n).unwrap();
        assert!((gap - 2.0 * 0.4f32.powi(n as i32)).abs() < 1e-5);
    }
}

#[test]
fn ladder_rows_and_columns() {
    for k in 2..=200 {
        let c = LadderCoefficients::new(k).unwrap();
        for i in 1..=200 {
            assert!((c.q_prev(i) - i as f64 / (k + i) as f64).abs() < 1e-14);
        }
        let step = gen_ladder_step::<f64>(k, 202).unwrap();
        let m = step.matrix();
        let mut col_min = f64::INFINITY;
        for i in 0..201 {
            assert!((m.row_sum(i) - 1.0).abs() < 1e-12, "k={k} row={i}");
            col_min = col_min.min(m.get(i, k - LADDER_INDEX_BASE));
        }
        assert!(col_min >= (k - 1) as f64 / k as f64 - 1e-15);
    }
    assert!(gen_ladder_step::<f64>(1, 10).is_err());
}

#[test]
fn ladder_column_deficits_are_harmonic() {
    let p = ladder_process::<f64>(80, 1.0).unwrap();
    let (mut deficits, mut harmonic) = (0.0, 0.0);
    for k in 2..=70 {
        let step = p.step(k).unwrap();
        let col = (0..80)
            .map(|i| step.matrix().get(i, k - 1))
            .fold(f64::INFINITY, f64::min);
        deficits += 1.0 - col;
        harmonic += 1.0 / k as f64;
        assert!(deficits <= harmonic + 1e-12);
    }
}

// 3 states; step 0 is the cycle 0 -> 1 -> 2 -> 0, step 1 mixes positively
fn permutation_then_mixing() -> Process<f64> {
    let cycle = vec![
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0],
    ];
    let mixing = vec![
        vec![0.5, 0.25, 0.25],
        vec![0.25, 0.5, 0.25],
        vec![0.25, 0.25, 0.5],
    ];
    let reference = ReferenceSpace::uniform(3).unwrap();
    Process::explicit(
        reference,
        vec![
            Kernel::from_rows(&cycle).unwrap(),
            Kernel::from_rows(&mixing).unwrap(),
        ],
    )
    .unwrap()
}

#[test]
fn window_search_finds_two_step_certificate() {
    let p = permutation_then_mixing();
    assert!(extract_one_step_certificate(&p, 0).unwrap().is_empty());
    let cert = extract_certificate_windowed(&p, 0, 2, 0.1).unwrap();
    assert_eq!(cert.n_k(), 2);
    // two-step paths enumerated directly
    let cycle = p.step(0).unwrap().matrix().to_rows();
    let mixing = p.step(1).unwrap().matrix().to_rows();
    let mut minima = [f64::INFINITY; 3];
    for x in 0..3 {
        for (j, m) in minima.iter_mut().enumerate() {
            let via: f64 = (0..3).map(|u| cycle[x][u] * mixing[u][j]).sum();
            *m = m.min(via);
        }
    }
    let raw: f64 = minima.iter().sum();
    assert!((cert.raw_mass() - raw).abs() < 1e-15);
    assert!(verify_certificate(&p, &cert, &[]).unwrap());
    let tau_zero = extract_certificate_windowed(&p, 0, 2, 0.0).unwrap();
    assert_eq!(tau_zero.n_k(), 1);
}

#[test]
fn ladder_windowed_certificates_are_one_step() {
    let p = ladder_process::<f64>(40, 1.0).unwrap();
    for k in 2..=30 {
        assert_eq!(
            extract_certificate_windowed(&p, k, 3, 0.4).unwrap().n_k(),
            1
        );
    }
}

#[test]
fn ladder_coupling_identity() {
    let p = ladder_process::<f64>(64, 1.0).unwrap();
    let cert = extract_one_step_certificate(&p, 2).unwrap();
    let (a, b) = (Measure::point_mass(64, 0), Measure::point_mass(64, 1));
    let step = coupling_step(&p, &cert, &a, &b).unwrap();
    for n in [4, 6, 10] {
        let whole = naive_compose(&p, 2, n);
        let lhs = l1(
            &naive_push(a.weights(), &whole),
            &naive_push(b.weights(), &whole),
        );
        let rest = naive_compose(&p, 3, n);
        let rhs = step.gamma
            * l1(
                &naive_push(step.residual_pair.0.weights(), &rest),
                &naive_push(step.residual_pair.1.weights(), &rest),
            );
        assert!((lhs - rhs).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn ladder_bound_matches_closed_form_and_certifies() {
    let p = ladder_process::<f64>(64, 1.0).unwrap();
    let certs = certificate_chain(&p, 2, 40, 1, 0.5).unwrap();
    let report = divergence_verdict(&certs, 0.01).unwrap();
    // raw one-step mass: column k gets (k-1)/k, column k-1 gets min_i 1/k - 1/(k+i)
    // except on its own diagonal; halved once
    let mut expected = 2.0;
    for (c, &b) in certs.iter().zip(&report.bound.trajectory) {
        let k = c.k() as f64;
        let prev = (1..=64)
            .map(|i| {
                let i = i as f64;
                1.0 / k - 1.0 / (k + i) + if i == k - 1.0 { 1.0 / (k + i) } else { 0.0 }
            })
            .fold(f64::INFINITY, f64::min);
        let raw = (k - 1.0) / k + prev;
        assert!((c.raw_mass() - raw).abs() < 1e-12);
        expected *= 1.0 - raw / 4.0;
        assert!((b - expected).abs() < 1e-12);
        assert!(
            b <= 2.0
                * (2..=c.k())
                    .map(|j| 1.0 - (j as f64 - 1.0) / (4.0 * j as f64))
                    .product::<f64>()
                + 1e-12
        );
    }
    match report.verdict {
        Verdict::CertifiedErgodicAtHorizon { horizon, bound, .. } => {
            assert!(bound < 0.01);
            assert!(horizon - 2 <= 25, "took {} certificates", horizon - 2);
        }
        other => panic!("expected a certificate, got {other}"),
    }
    let mut acc = naive_compose(&p, 2, 3);
    for (c, &b) in certs
        .iter()
        .zip(&report.bound.trajectory)
        .take_while(|(c, _)| c.end() <= 30)
    {
        if c.end() > 3 {
            acc = naive_matmul(&acc, &p.step(c.end() - 1).unwrap().matrix().to_rows());
        }
        let measured = brute_l1_weak(&acc, p.reference());
        assert!(measured <= b + 1e-10);
    }
}

#[test]
fn summable_masses_plateau() {
    let certs: Vec<_> = (0..40)
        .map(|i| {
            let mut minorant = vec![0.0; 2];
            minorant[0] = 0.5f64.powi(i as i32 + 2);
            MinorizationCertificate::from_minorant(i, 1, minorant).unwrap()
        })
        .collect();
    let report = divergence_verdict(&certs, 0.01).unwrap();
    let plateau: f64 = 2.0 * (0..40).map(|i| 1.0 - 0.5f64.powi(i + 3)).product::<f64>();
    assert!((report.bound.product_bound - plateau).abs() < 1e-14);
    assert!(plateau > 1.5);
    assert_eq!(
        report.verdict,
        Verdict::Inconclusive {
            bound: report.bound.product_bound
        }
    );
    assert!(report.bound.partial_mass_sum < 0.5);
}

#[test]
fn identity_kernel_controls() {
    let reference = ReferenceSpace::<f64>::uniform(3).unwrap();
    let p = Process::homogeneous(reference.clone(), Kernel::identity(3)).unwrap();
    let table = decay_table(&p, 0, &[1, 5, 20], Notion::L1Weak, None).unwrap();
    assert_eq!(table.gaps, vec![2.0, 2.0, 2.0]);
    let certs = certificate_chain(&p, 0, 30, 1, 0.5).unwrap();
    assert!(certs.iter().all(|c| c.is_empty()));
    let verdict = divergence_verdict(&certs, 0.01).unwrap().verdict;
    assert_eq!(verdict, Verdict::Inconclusive { bound: 2.0 });
    assert_eq!(verdict.to_string(), "INCONCLUSIVE bound=2");

    let c0 = check_c0(&p, &reference.as_measure(), 5).unwrap();
    assert!(!c0.consistent);
    assert!(c0.defects.iter().all(|&d| (d - 2.0 / 3.0).abs() < 1e-12));
}

#[test]
fn block_chain_residual_sets() {
    let (p, q) = (0.7, 0.3f64);
    let chain = gen_block_example::<f64>(p).unwrap();
    let mu0 = Measure::new(vec![p.min(q) / 2.0, p.min(q) / 2.0, 0.0, 0.0]).unwrap();
    let report = check_c0(&chain, &mu0, 10).unwrap();
    assert!(report.consistent);
    assert!(report.defects.iter().all(|&d| d == 0.0));
    assert!(check_c0(&chain, &Measure::zeros(4), 3).is_err());
}

#[test]
fn doeblin_examples() {
    let row = vec![0.2, 0.3, 0.5];
    let reference = ReferenceSpace::<f64>::uniform(3).unwrap();
    let equal =
        Process::homogeneous(reference, Kernel::from_rows(&vec![row.clone(); 3]).unwrap()).unwrap();
    let nu = Measure::new(row).unwrap();
    for iota in [0.1, 0.45, 0.9] {
        assert!(
            check_doeblin(&equal, &nu, 1, iota, iota, &SetFamily::Exhaustive)
                .unwrap()
                .holds
        );
    }

    let identity = Process::homogeneous(
        ReferenceSpace::<f64>::uniform(2).unwrap(),
        Kernel::identity(2),
    )
    .unwrap();
    let nu = Measure::new(vec![0.5, 0.5]).unwrap();
    assert!(
        !check_doeblin(&identity, &nu, 1, 0.4, 0.1, &SetFamily::Exhaustive)
            .unwrap()
            .holds
    );

    let block = gen_block_example::<f64>(0.7).unwrap();
    let nu = Measure::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
    let report = check_doeblin(&block, &nu, 1, 0.6, 0.3, &SetFamily::Exhaustive).unwrap();
    assert!(!report.holds);
    assert_eq!(report.witness.unwrap().1, 0.0);

    let ladder = ladder_process::<f64>(30, 1.0).unwrap();
    assert!(matches!(
        check_doeblin(
            &ladder,
            &Measure::zeros(30),
            1,
            0.5,
            0.5,
            &SetFamily::Exhaustive
        ),
        Err(Error::NotHomogeneous)
    ));
}

#[test]
fn column_lower_bounds_on_ladder() {
    let p = ladder_process::<f64>(202, 1.0).unwrap();
    let ks: Vec<usize> = (2..=50).collect();
    let targets: Vec<usize> = ks.iter().map(|&k| k - LADDER_INDEX_BASE).collect();
    let lambdas: Vec<f64> = ks.iter().map(|&k| (k - 1) as f64 / k as f64).collect();
    let report = check_column_minorization(&p, 2, 50, &targets, &lambdas, 0.01).unwrap();
    assert!(report.column_condition_holds());
    assert!(report.divergence.verdict.is_certified());
    let harmonic: f64 = ks.iter().map(|&k| 1.0 / k as f64).sum();
    assert!((report.sum_one_minus_lambda.last().unwrap() - harmonic).abs() < 1e-12);

    let zeros = vec![0.0; ks.len()];
    let vacuous = check_column_minorization(&p, 2, 50, &targets, &zeros, 0.01).unwrap();
    assert!(vacuous.column_condition_holds());
    assert!(!vacuous.divergence.verdict.is_certified());
    assert!(matches!(
        check_column_minorization(&p, 2, 50, &targets[..3], &lambdas, 0.01),
        Err(Error::SequenceTooShort { .. })
    ));
}

#[test]
fn exact_coupling_rows_certify_immediately() {
    let reference = ReferenceSpace::<f64>::uniform(3).unwrap();
    let mut rows = vec![vec![0.0; 3]; 3];
    for row in rows.iter_mut() {
        row[1] = 1.0;
    }
    let p = Process::homogeneous(reference, Kernel::from_rows(&rows).unwrap()).unwrap();
    assert_eq!(l1_weak_gap(&p, 0, 1).unwrap(), 0.0);
    // lambda = 1 is halved twice to 1/4, so each factor is 7/8
    let report = check_column_minorization(&p, 0, 59, &[1; 60], &[1.0; 60], 0.01).unwrap();
    assert!(report.divergence.verdict.is_certified());
    assert_eq!(*report.sum_one_minus_lambda.last().unwrap(), 0.0);
}

#[test]
fn set_minorization_examples() {
    let p = ladder_process::<f64>(40, 1.0).unwrap();
    let r = p.reference();
    for k in 2..=20 {
        let m = p.step(k).unwrap().matrix().clone();
        assert!((set_minorization(&m, r, &StateSet::full(40)).unwrap().alpha - 1.0).abs() < 1e-15);
        let single = StateSet::from_indices(40, &[k - 1]).unwrap();
        let s = set_minorization(&m, r, &single).unwrap();
        assert!(s.alpha >= (k - 1) as f64 / k as f64 - 1e-15);
        assert!(s.nu_k.mass() <= s.alpha + 1e-15);
        let far = StateSet::from_indices(40, &[39]).unwrap();
        if k < 38 {
            assert!(set_minorization(&m, r, &far).unwrap().alpha < 1e-15);
        }
    }
}

#[test]
fn certificate_from_observed_decay() {
    let chain = gen_block_example::<f64>(0.7).unwrap();
    let built =
        construct_certificate_from_decay(&chain, 0, &chain.reference().as_measure(), 10, 0.5)
            .unwrap();
    assert!(built.verified);
    assert!(built.sup_deviation < 0.25);
    assert!(built.certificate.mass() > 0.0);
}

// Q^{[0,3]} by explicit sums over intermediate states and the marginals they need
#[test]
fn qsp_extension_matches_path_sums() {
    let mut r = rng(7);
    for _ in 0..10 {
        let q = random_qsp(&mut r, 3, 3);
        let n = 3;
        let t: Vec<_> = (0..3).map(|k| q.step(k).unwrap().tensor.clone()).collect();
        let mu0 = q.initial().weights().to_vec();
        let pair = |f: &dyn Fn(usize, usize, usize) -> f64| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    (0..n)
                        .flat_map(|x| (0..n).map(move |y| (x, y)))
                        .map(|(x, y)| f(x, y, j) * mu0[x] * mu0[y])
                        .sum()
                })
                .collect()
        };
        let mu1 = pair(&|x, y, j| t[0].get(x, y, j));
        let q02 = |x: usize, y: usize, j: usize| -> f64 {
            let mut s = 0.0;
            for u in 0..n {
                for v in 0..n {
                    s += t[0].get(x, y, u) * t[1].get(u, v, j) * mu1[v];
                }
            }
            s
        };
        let mu2 = pair(&q02);
        for x in 0..n {
            for y in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for u in 0..n {
                        for v in 0..n {
                            for w in 0..n {
                                for z in 0..n {
                                    s += t[0].get(x, y, u)
                                        * mu1[v]
                                        * t[1].get(u, v, w)
                                        * mu2[z]
                                        * t[2].get(w, z, j);
                                }
                            }
                        }
                    }
                    let lib = q.extend(0, 3).unwrap().get(x, y, j);
                    assert!((lib - s).abs() < 1e-12);
                }
            }
        }
        let m2 = q.propagate_marginal(2).unwrap();
        assert!(l1(m2.weights(), &mu2) < 1e-12);
    }
}

#[test]
fn mixing_qsp_alpha_bound_and_certificate() {
    let q = qsp_mixing_example::<f64>(40).unwrap();
    let sets = vec![StateSet::from_indices(2, &[0]).unwrap(); 40];
    let report = check_we_pq(&q, &sets, 40, 0.01).unwrap();
    assert!(report.alphas.iter().all(|&a| (a - 0.3).abs() < 1e-15));
    let first_below = report.alpha_bound.iter().position(|&b| b < 0.01).unwrap() + 1;
    assert_eq!(first_below, 33);
    assert!((report.alpha_bound[32] - 2.0 * 0.85f64.powi(33)).abs() < 1e-12);
    let Verdict::CertifiedErgodicAtHorizon { horizon, bound, .. } = report.divergence.verdict
    else {
        panic!("mixing example should certify");
    };
    let gap = q.l1_weak_gap(0, horizon).unwrap();
    assert!(gap.qsp_gap <= bound + 1e-9);
    // singleton sets: the alpha arithmetic is itself a valid bound
    for (t, &b) in report.alpha_bound.iter().enumerate().take(12) {
        assert!(q.l1_weak_gap(0, t + 1).unwrap().qsp_gap <= b + 1e-9);
    }
}

#[test]
fn file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen_block_example::<f64>(0.3).unwrap();
    let path = dir.path().join("block.json");
    save_process(&p, &path).unwrap();
    let back = load_process::<f64>(&path).unwrap();
    assert_eq!(back.compose(0, 3).unwrap(), p.compose(0, 3).unwrap());

    let mut r = rng(3);
    let explicit = random_process(&mut r, 4, 3, true);
    save_process(&explicit, &path).unwrap();
    let back = load_process::<f64>(&path).unwrap();
    assert_eq!(back.compose(0, 3).unwrap(), explicit.compose(0, 3).unwrap());

    let q = random_qsp(&mut r, 3, 2);
    let qpath = dir.path().join("q.json");
    save_qsp(&q, &qpath).unwrap();
    let qb = load_qsp::<f64>(&qpath).unwrap();
    assert_eq!(qb.extend(0, 2).unwrap(), q.extend(0, 2).unwrap());
}
