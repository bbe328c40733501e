//! Property checks, one function per invariant. Each runs `CASES` generated
//! inputs through a deterministic proptest runner and panics on the first
//! (shrunk) counterexample.
#![allow(dead_code)]

use std::fmt::Debug;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::subsequence;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseResult, TestRng, TestRunner};

use sdsvm::data::{gen_simulation, gen_toy, run_simulation};
use sdsvm::kernel::{eval_kernel, kernel_matrix, kernel_row};
use sdsvm::outliermap::{self, render_svg};
use sdsvm::outlyingness::{outlyingness_over_pairs, projection_vector};
use sdsvm::pipeline::{prepare, trim};
use sdsvm::svm::{decision_value, solve_dual};
use sdsvm::{
    build_map, fit_sdsvm, outlyingness, CvConfig, DirectionPolicy, FitConfig, KernelSpec, LabeledSet, MapStyle,
    OutlierMapPoint, OutlyingnessReport, Sample, SimulationSpec,
};

use crate::common::{self, all_pairs, explicit_outlyingness, gram_linear, qp_oracle, spectrum_brute, vector_dataset};

pub const CASES: u32 = 256;

pub const ALL: &[(&str, fn())] = &[
    ("kernel: linear gram matches double loop", linear_gram_matches_double_loop),
    ("kernel: cauchy-schwarz for every kernel", cauchy_schwarz),
    ("kernel: spectrum symmetric and equal to brute force", spectrum_matches_brute_force),
    ("outlyingness: kernel trick equals explicit coordinates", kernel_trick_equivalence),
    ("outlyingness: reversed pairs give identical values", sign_symmetry),
    ("outlyingness: exhaustive dominates sampled", exhaustive_dominates_sampled),
    ("outlyingness: translation invariance", translation_invariance),
    ("outlyingness: scale invariance", scale_invariance),
    ("svm: objective at least zero and the oracle optimum", objective_matches_oracle),
    ("svm: complementary slackness at tol", complementary_slackness),
    ("svm: label flip negates decision values", label_flip_antisymmetry),
    ("svm: permutation leaves decision values unchanged", permutation_invariance),
    ("pipeline: refit on retained set is idempotent", trim_idempotence),
    ("pipeline: trimming is computed within each group", trimming_within_group),
    ("pipeline: kappa 1 equals the standard svm", kappa_one_is_standard_svm),
    ("pipeline: retention is monotone in kappa", monotone_retention),
    ("map: x coordinates are the decision values", map_uses_decision_values),
    ("map: points left of the boundary are those with f < 0", map_left_of_boundary),
    ("map: csv write then read is the identity", map_csv_round_trip),
    ("data: generators are pure", generators_are_pure),
    ("data: test errors are multiples of 1/test-size", errors_are_test_fractions),
];

fn check<S>(name: &str, strategy: S, test: impl Fn(S::Value) -> TestCaseResult)
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    if let Err(e) = runner.run(&strategy, test) {
        panic!("{name}: {e}");
    }
}

fn points(k: std::ops::RangeInclusive<usize>, d: std::ops::RangeInclusive<usize>, scale: f64) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (k, d).prop_flat_map(move |(k, d)| vec(vec(-scale..scale, d), k))
}

fn samples(points: &[Vec<f64>]) -> Vec<Sample> {
    points.iter().enumerate().map(|(i, p)| Sample::vector(i.to_string(), p.clone())).collect()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn min_separation(points: &[Vec<f64>]) -> f64 {
    all_pairs(points.len())
        .into_iter()
        .map(|(i, j)| points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Points for outlyingness properties. Pairs closer than 1e-3 are rejected:
/// such directions are ill-conditioned in any floating-point evaluation.
fn separated_points(
    k: std::ops::RangeInclusive<usize>,
    d: std::ops::RangeInclusive<usize>,
    scale: f64,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    points(k, d, scale).prop_filter("near-duplicate points", |p| min_separation(p) > 1e-3)
}

/// Two labeled groups: `(points, labels)` with negatives first.
fn two_groups(
    n: std::ops::RangeInclusive<usize>,
    d: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<i8>)> {
    (n.clone(), n, d).prop_flat_map(|(nm, np, d)| {
        (vec(vec(-2.0..2.0f64, d), nm), vec(vec(-1.0..3.0f64, d), np)).prop_map(move |(m, p)| {
            let labels = std::iter::repeat_n(-1, nm).chain(std::iter::repeat_n(1, np)).collect();
            (m.into_iter().chain(p).collect(), labels)
        })
    })
}

/// Small SVM instances with both classes present and an RBF or linear kernel.
#[derive(Clone, Debug)]
struct SvmCase {
    points: Vec<Vec<f64>>,
    labels: Vec<i8>,
    kernel: KernelSpec,
    c: f64,
}

fn svm_case(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SvmCase> {
    let kernel = prop_oneof![Just(KernelSpec::Linear), (0.1..2.0f64).prop_map(|g| KernelSpec::Rbf { gamma: g })];
    (n, 1usize..=3, kernel, 0.01..10.0f64).prop_flat_map(|(n, d, kernel, c)| {
        (vec(vec(-2.0..2.0f64, d), n), vec(any::<bool>(), n - 2)).prop_map(move |(points, coin)| {
            let mut labels = vec![-1i8, 1];
            labels.extend(coin.iter().map(|&b| if b { 1 } else { -1 }));
            SvmCase {
                points,
                labels,
                kernel: kernel.clone(),
                c,
            }
        })
    })
}

/// Stopping tolerance for checks that compare against the exact optimum; at
/// the default tolerance the dual is only solved to about `tol * C * n`.
pub const TIGHT_TOL: f64 = 1e-10;

fn train_at(case: &SvmCase, tol: f64) -> (sdsvm::KernelMatrix, sdsvm::SvmModel) {
    let omega = kernel_matrix(&case.kernel, &samples(&case.points)).unwrap();
    let labels = LabeledSet::from_labels(case.labels.clone()).unwrap();
    let model = solve_dual(&omega, &labels, case.c, tol).unwrap();
    (omega, model)
}

fn train(case: &SvmCase) -> (sdsvm::KernelMatrix, sdsvm::SvmModel) {
    train_at(case, sdsvm::svm::DEFAULT_TOLERANCE)
}

fn training_decisions(omega: &sdsvm::KernelMatrix, model: &sdsvm::SvmModel) -> Vec<f64> {
    (0..omega.len()).map(|i| decision_value(model, omega.row(i)).unwrap()).collect()
}

pub fn linear_gram_matches_double_loop() {
    check("linear gram", points(1..=12, 1..=6, 10.0), |pts| {
        let omega = kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap();
        let oracle = gram_linear(&pts);
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                prop_assert!((omega.get(i, j) - oracle[i][j]).abs() <= 1e-12, "({i},{j})");
            }
        }
        Ok(())
    });
}

pub fn cauchy_schwarz() {
    let vector_kernel = prop_oneof![
        Just(KernelSpec::Linear),
        (0.01..3.0f64).prop_map(|g| KernelSpec::Rbf { gamma: g }),
        (0.1..1.0f64, 1u32..=4, 0.0..2.0f64).prop_map(|(g, p, c)| KernelSpec::Polynomial {
            gamma: g,
            degree: p,
            coef0: c
        }),
    ];
    check(
        "cauchy-schwarz (vectors)",
        (points(2..=8, 1..=4, 2.0), vector_kernel),
        |(pts, kernel)| {
            let omega = kernel_matrix(&kernel, &samples(&pts)).unwrap();
            for (i, j) in all_pairs(pts.len()) {
                let lhs = omega.get(i, j).powi(2);
                prop_assert!(lhs <= omega.get(i, i) * omega.get(j, j) + 1e-9, "({i},{j})");
            }
            Ok(())
        },
    );
    check(
        "cauchy-schwarz (spectrum)",
        (vec("[ACGT]{0,30}", 2..=6), 1usize..=4),
        |(texts, k)| {
            let s: Vec<Sample> = texts.iter().enumerate().map(|(i, t)| Sample::text(i.to_string(), t.clone())).collect();
            let omega = kernel_matrix(&KernelSpec::Spectrum { kmer: k }, &s).unwrap();
            for (i, j) in all_pairs(texts.len()) {
                prop_assert!(omega.get(i, j).powi(2) <= omega.get(i, i) * omega.get(j, j) + 1e-9);
            }
            Ok(())
        },
    );
}

pub fn spectrum_matches_brute_force() {
    let text = prop_oneof!["[ACGT]{0,50}", "[a-z]{0,50}"];
    check(
        "spectrum",
        (text.clone(), text, 1usize..=6),
        |(a, b, k)| {
            let spec = KernelSpec::Spectrum { kmer: k };
            let (sa, sb) = (Sample::text("a", a.clone()), Sample::text("b", b.clone()));
            let ab = eval_kernel(&spec, &sa, &sb).unwrap();
            let ba = eval_kernel(&spec, &sb, &sa).unwrap();
            let oracle = spectrum_brute(&a, &b, k);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(ab, oracle);
            let omega = kernel_matrix(&spec, &[sa, sb]).unwrap();
            prop_assert_eq!(omega.get(0, 1), oracle);
            prop_assert_eq!(omega.get(0, 0), spectrum_brute(&a, &a, k));
            Ok(())
        },
    );
}

pub fn kernel_trick_equivalence() {
    let case = separated_points(2..=20, 1..=5, 5.0).prop_flat_map(|pts| {
        let pairs = all_pairs(pts.len());
        let n = pairs.len();
        (Just(pts), subsequence(pairs, 1..=n))
    });
    check("kernel trick", case, |(pts, pairs)| {
        let omega = kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap();
        let (r, degenerate) = outlyingness_over_pairs(&omega, &pairs);
        prop_assert_eq!(degenerate, 0);
        let oracle = explicit_outlyingness(&pts, &pairs);
        for (l, (a, b)) in r.iter().zip(&oracle).enumerate() {
            prop_assert!(rel_diff(*a, *b) <= 1e-10, "sample {l}: {a} vs {b}");
        }
        Ok(())
    });
}

pub fn sign_symmetry() {
    let case = separated_points(2..=15, 1..=4, 5.0).prop_flat_map(|pts| {
        let k = pts.len();
        (Just(pts), 0..k, 0..k - 1)
    });
    check("sign symmetry", case, |(pts, i, j)| {
        let j = if j >= i { j + 1 } else { j };
        let omega = kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap();
        let forward = projection_vector(&omega, i, j).unwrap();
        let backward = projection_vector(&omega, j, i).unwrap();
        for (a, b) in forward.values.iter().zip(&backward.values) {
            prop_assert_eq!(*a, -*b);
        }
        let pairs = all_pairs(pts.len());
        let reversed: Vec<_> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        prop_assert_eq!(outlyingness_over_pairs(&omega, &pairs), outlyingness_over_pairs(&omega, &reversed));
        Ok(())
    });
}

pub fn exhaustive_dominates_sampled() {
    let case = (points(3..=30, 1..=4, 5.0), 1usize..=500, any::<u64>());
    check("exhaustive dominates", case, |(pts, count, seed)| {
        let omega = kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap();
        let full = outlyingness(&omega, DirectionPolicy::Exhaustive).unwrap();
        let part = outlyingness(&omega, DirectionPolicy::Sampled { count, seed }).unwrap();
        for (a, b) in full.r.iter().zip(&part.r) {
            prop_assert!(a >= b, "{a} < {b}");
        }
        Ok(())
    });
}

pub fn translation_invariance() {
    let case = separated_points(3..=20, 1..=5, 5.0).prop_flat_map(|pts| {
        let d = pts[0].len();
        (Just(pts), vec(-10.0..10.0f64, d))
    });
    check("translation", case, |(pts, shift)| {
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect();
        let r0 = outlyingness(&kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap(), DirectionPolicy::Exhaustive)
            .unwrap()
            .r;
        let r1 = outlyingness(&kernel_matrix(&KernelSpec::Linear, &samples(&moved)).unwrap(), DirectionPolicy::Exhaustive)
            .unwrap()
            .r;
        for (a, b) in r0.iter().zip(&r1) {
            prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        Ok(())
    });
}

pub fn scale_invariance() {
    check(
        "scale",
        (separated_points(3..=20, 1..=5, 5.0), -2.0..2.0f64),
        |(pts, log_c)| {
            let c = 10f64.powf(log_c);
            let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * c).collect()).collect();
            let r0 = outlyingness(&kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap(), DirectionPolicy::Exhaustive)
                .unwrap()
                .r;
            let r1 = outlyingness(&kernel_matrix(&KernelSpec::Linear, &samples(&scaled)).unwrap(), DirectionPolicy::Exhaustive)
                .unwrap()
                .r;
            for (a, b) in r0.iter().zip(&r1) {
                prop_assert!(rel_diff(*a, *b) < 1e-8, "{a} vs {b}");
            }
            Ok(())
        },
    );
}

pub fn objective_matches_oracle() {
    check("objective", svm_case(2..=6), |case| {
        let (omega, model) = train_at(&case, TIGHT_TOL);
        let k: Vec<Vec<f64>> = (0..omega.len()).map(|i| omega.row(i).to_vec()).collect();
        let value = common::dual_value(&k, &case.labels, &model.alpha);
        let (best, _) = qp_oracle(&k, &case.labels, case.c);
        prop_assert!(value >= 0.0);
        prop_assert!(value >= best - 1e-6, "solver {value} oracle {best}");
        Ok(())
    });
}

pub fn complementary_slackness() {
    check("slackness", svm_case(2..=12), |case| {
        let (omega, model) = train(&case);
        let tol = model.tol;
        let f = training_decisions(&omega, &model);
        let balance: f64 = model.alpha.iter().zip(&case.labels).map(|(a, &y)| a * y as f64).sum();
        prop_assert!(balance.abs() <= 1e-10 * case.c * case.labels.len() as f64);
        for i in 0..f.len() {
            let a = model.alpha[i];
            let margin = case.labels[i] as f64 * f[i];
            prop_assert!((0.0..=case.c).contains(&a));
            if a == 0.0 {
                prop_assert!(margin >= 1.0 - tol, "alpha 0, margin {margin}");
            }
            if a == case.c {
                prop_assert!(margin <= 1.0 + tol, "alpha C, margin {margin}");
            }
            if model.is_free(i) {
                prop_assert!((margin - 1.0).abs() <= tol, "free, margin {margin}");
            }
        }
        Ok(())
    });
}

pub fn label_flip_antisymmetry() {
    check("label flip", svm_case(2..=12), |case| {
        let (omega, model) = train(&case);
        let flipped = SvmCase {
            labels: case.labels.iter().map(|y| -y).collect(),
            ..case.clone()
        };
        let (_, model_flipped) = train(&flipped);
        let f = training_decisions(&omega, &model);
        let g = training_decisions(&omega, &model_flipped);
        for (a, b) in f.iter().zip(&g) {
            prop_assert!((a + b).abs() <= 1e-8, "{a} vs {b}");
        }
        Ok(())
    });
}

pub fn permutation_invariance() {
    let case = svm_case(2..=12).prop_flat_map(|case| {
        let n = case.labels.len();
        let d = case.points[0].len();
        (
            Just(case),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            vec(vec(-3.0..3.0f64, d), 5),
        )
    });
    check("permutation", case, |(case, perm, grid)| {
        let permuted = SvmCase {
            points: perm.iter().map(|&i| case.points[i].clone()).collect(),
            labels: perm.iter().map(|&i| case.labels[i]).collect(),
            ..case.clone()
        };
        let (_, a) = train_at(&case, TIGHT_TOL);
        let (_, b) = train_at(&permuted, TIGHT_TOL);
        let basis_a = samples(&case.points);
        let basis_b = samples(&permuted.points);
        for x in grid.iter().map(|p| Sample::vector("x", p.clone())) {
            let fa = decision_value(&a, &kernel_row(&case.kernel, &basis_a, &x).unwrap()).unwrap();
            let fb = decision_value(&b, &kernel_row(&case.kernel, &basis_b, &x).unwrap()).unwrap();
            prop_assert!((fa - fb).abs() <= 1e-8, "{fa} vs {fb}");
        }
        Ok(())
    });
}

fn fixed_config(kappa: f64, c: f64) -> FitConfig {
    FitConfig {
        kappa,
        cv: CvConfig::fixed(c),
        ..FitConfig::default()
    }
}

pub fn trim_idempotence() {
    check(
        "trim idempotence",
        (two_groups(6..=12, 1..=3), 0.5..=1.0f64, 0.05..5.0f64),
        |((pts, labels), kappa, c)| {
            let data = vector_dataset(&pts, &labels);
            let first = fit_sdsvm(&data, &fixed_config(kappa, c)).unwrap();
            let kept = first.plan.retained();
            let sub = vector_dataset(
                &kept.iter().map(|&i| pts[i].clone()).collect::<Vec<_>>(),
                &kept.iter().map(|&i| labels[i]).collect::<Vec<_>>(),
            );
            let second = fit_sdsvm(&sub, &fixed_config(1.0, c)).unwrap();
            for (t, &i) in kept.iter().enumerate() {
                prop_assert!((second.decision[t] - first.decision[i]).abs() <= 1e-8);
            }
            Ok(())
        },
    );
}

pub fn trimming_within_group() {
    let policy = prop_oneof![
        any::<u64>().prop_map(|seed| DirectionPolicy::Auto { seed }),
        Just(DirectionPolicy::Exhaustive),
        (1usize..=40, any::<u64>()).prop_map(|(count, seed)| DirectionPolicy::Sampled { count, seed }),
    ];
    let case = two_groups(3..=12, 1..=3).prop_flat_map(move |(pts, labels)| {
        let nm = labels.iter().filter(|&&y| y < 0).count();
        (
            Just((pts, labels)),
            Just((0..nm).collect::<Vec<usize>>()).prop_shuffle(),
            policy.clone(),
            0.5..=1.0f64,
        )
    });
    check("within group", case, |((pts, labels), perm, policy, kappa)| {
        let nm = perm.len();
        let mut shuffled = pts.clone();
        for (slot, &src) in perm.iter().enumerate() {
            shuffled[slot] = pts[src].clone();
        }
        let plan = |p: &[Vec<f64>]| {
            let prep = prepare(&vector_dataset(p, &labels), &KernelSpec::Linear, policy).unwrap();
            trim(&prep.report_minus, &prep.report_plus, &prep.labels, kappa).unwrap()
        };
        let (a, b) = (plan(&pts), plan(&shuffled));
        prop_assert_eq!(a.h_plus, b.h_plus);
        prop_assert_eq!(&a.retained_plus, &b.retained_plus);
        for i in nm..pts.len() {
            prop_assert_eq!(a.outlyingness[i].to_bits(), b.outlyingness[i].to_bits());
            prop_assert_eq!(a.trimmed[i], b.trimmed[i]);
        }
        Ok(())
    });
}

pub fn kappa_one_is_standard_svm() {
    check(
        "kappa one",
        (two_groups(3..=12, 1..=3), 0.05..5.0f64),
        |((pts, labels), c)| {
            let fit = fit_sdsvm(&vector_dataset(&pts, &labels), &fixed_config(1.0, c)).unwrap();
            let omega = kernel_matrix(&KernelSpec::Linear, &samples(&pts)).unwrap();
            let model = solve_dual(&omega, &LabeledSet::from_labels(labels.clone()).unwrap(), c, fit.tol).unwrap();
            for (i, f) in training_decisions(&omega, &model).iter().enumerate() {
                prop_assert!((fit.decision[i] - f).abs() <= 1e-8);
            }
            Ok(())
        },
    );
}

pub fn monotone_retention() {
    let case = (vec(any::<bool>(), 4..=40), 0.5..=1.0f64, 0.5..=1.0f64).prop_flat_map(|(coin, k1, k2)| {
        let mut labels: Vec<i8> = coin.iter().map(|&b| if b { 1 } else { -1 }).collect();
        labels[0] = -1;
        labels[1] = -1;
        labels[2] = 1;
        labels[3] = 1;
        let nm = labels.iter().filter(|&&y| y < 0).count();
        let np = labels.len() - nm;
        let r = prop_oneof![4 => (0u8..6).prop_map(f64::from), 1 => Just(f64::INFINITY)];
        (Just(labels), vec(r.clone(), nm), vec(r, np), Just(k1.min(k2)), Just(k1.max(k2)))
    });
    check("monotone retention", case, |(labels, rm, rp, lo, hi)| {
        let report = |r: Vec<f64>| OutlyingnessReport {
            r,
            policy: DirectionPolicy::Exhaustive,
            directions: 0,
            degenerate_pairs: 0,
        };
        let (rm, rp) = (report(rm), report(rp));
        let set = LabeledSet::from_labels(labels).unwrap();
        let small = trim(&rm, &rp, &set, lo).unwrap().retained();
        let large = trim(&rm, &rp, &set, hi).unwrap().retained();
        prop_assert!(small.iter().all(|i| large.contains(i)), "{small:?} not in {large:?}");
        Ok(())
    });
}

pub fn map_uses_decision_values() {
    check(
        "map x",
        (two_groups(3..=12, 1..=3), 0.5..=1.0f64, 0.05..5.0f64),
        |((pts, labels), kappa, c)| {
            let fit = fit_sdsvm(&vector_dataset(&pts, &labels), &fixed_config(kappa, c)).unwrap();
            let map = build_map(&fit);
            prop_assert_eq!(map.len(), fit.decision.len());
            for (p, f) in map.iter().zip(&fit.decision) {
                prop_assert_eq!(p.f.to_bits(), f.to_bits());
            }
            Ok(())
        },
    );
}

fn marker_center_x(line: &str) -> f64 {
    if let Some(rest) = line.split(" cx=\"").nth(1) {
        return rest.split('"').next().unwrap().parse().unwrap();
    }
    let d = line.split(" d=\"").nth(1).unwrap().split('"').next().unwrap();
    let xs: Vec<f64> = d
        .split(['M', 'L', 'Z', ' '])
        .filter(|s| !s.is_empty())
        .map(|pt| pt.split(',').next().unwrap().parse().unwrap())
        .collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo + hi) / 2.0
}

/// Decision values are kept at least 1e-3 of the largest |f| away from zero
/// (or exactly zero) so each marker is resolvable at the SVG's 0.001 px
/// coordinate precision.
fn map_points() -> impl Strategy<Value = Vec<OutlierMapPoint>> {
    let f = prop_oneof![1 => Just(0.0), 6 => (0.001..=1.0f64, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })];
    let r = prop_oneof![6 => 0.0..50.0f64, 1 => Just(f64::INFINITY)];
    let point = (f, r, any::<bool>(), any::<bool>());
    (vec(point, 1..=40), -3.0..3.0f64).prop_map(|(pts, log_scale)| {
        let scale = 10f64.powf(log_scale);
        pts.into_iter()
            .enumerate()
            .map(|(i, (f, r, pos, trimmed))| {
                let label = if pos { 1 } else { -1 };
                let f = f * scale;
                OutlierMapPoint {
                    id: (i + 1).to_string(),
                    label,
                    f,
                    r,
                    trimmed,
                    misclassified: outliermap::is_misclassified(label, f),
                }
            })
            .collect()
    })
}

pub fn map_left_of_boundary() {
    check("map boundary", map_points(), |points| {
        let svg = render_svg(&points, &MapStyle::default()).unwrap();
        let boundary: f64 = svg
            .lines()
            .find(|l| l.contains("class=\"decision-boundary\""))
            .and_then(|l| l.split(" x1=\"").nth(1))
            .and_then(|s| s.split('"').next())
            .unwrap()
            .parse()
            .unwrap();
        let left = svg
            .lines()
            .filter(|l| l.contains("class=\"point "))
            .filter(|l| marker_center_x(l) < boundary)
            .count();
        prop_assert_eq!(left, points.iter().filter(|p| p.f < 0.0).count());
        Ok(())
    });
}

pub fn map_csv_round_trip() {
    let point = (
        "[A-Za-z0-9_.,\"-]{1,10}",
        any::<bool>(),
        prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), Just(0.0)],
        prop_oneof![0.0..1e6f64, Just(f64::INFINITY), Just(0.0)],
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(id, pos, f, r, trimmed, misclassified)| OutlierMapPoint {
            id,
            label: if pos { 1 } else { -1 },
            f,
            r,
            trimmed,
            misclassified,
        });
    check("map csv", vec(point, 0..=30), |points| {
        let mut buf = Vec::new();
        outliermap::write_csv(&points, &mut buf).unwrap();
        let back = outliermap::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, points);
        Ok(())
    });
}

pub fn generators_are_pure() {
    let spec = (1usize..=6, 1usize..=10, 0usize..=3, 2usize..=20, any::<u64>()).prop_map(|(n, d, m, t, seed)| {
        SimulationSpec {
            n_per_group: n,
            d,
            outliers_per_group: m,
            test_size: t,
            seed,
            ..SimulationSpec::default()
        }
    });
    check("purity", (spec, 0usize..50, any::<u64>()), |(spec, run, toy_seed)| {
        prop_assert_eq!(gen_simulation(&spec, run).unwrap(), gen_simulation(&spec, run).unwrap());
        let (a, b) = (gen_toy(toy_seed), gen_toy(toy_seed));
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ta).unwrap();
        b.write_csv(&mut tb).unwrap();
        prop_assert_eq!(ta, tb);
        prop_assert_eq!(a, b);
        Ok(())
    });
}

pub fn errors_are_test_fractions() {
    let spec = (3usize..=6, 1usize..=5, 0usize..=2, 2usize..=40, 1usize..=2, 0.5..=1.0f64, any::<u64>()).prop_map(
        |(n, d, m, t, runs, kappa, seed)| SimulationSpec {
            n_per_group: n,
            d,
            outliers_per_group: m,
            test_size: t,
            runs,
            kappas: vec![kappa, 1.0],
            seed,
            ..SimulationSpec::default()
        },
    );
    check("error fractions", spec, |spec| {
        let table = run_simulation(
            &spec,
            &KernelSpec::Linear,
            &CvConfig::default(),
            DirectionPolicy::default(),
            sdsvm::svm::DEFAULT_TOLERANCE,
        )
        .unwrap();
        let t = spec.test_size as f64;
        for row in &table.rows {
            if let Ok(e) = row.error {
                prop_assert_eq!(e, (e * t).round() / t);
            }
        }
        Ok(())
    });
}
