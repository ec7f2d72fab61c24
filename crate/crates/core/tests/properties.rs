mod support {
    pub mod oracle;
}

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sbstlab::exec_cov::{branch_distance, run_inputs, CoverageReport, Criterion, ExecLimits};
use sbstlab::ge_gen::{
    map_genotype, run_ge, GeConfig, Genotype, GrammarParams, GrammarSpec, Target,
};
use sbstlab::search::{
    roulette_select, run_ga, suite_fitness, BlockWeights, GaConfig, InputDomain,
};
use sbstlab::stats::{mean_stdev, welch_t_test};
use sbstlab::sut_lang::{parse, render, validate, Program, RelOp};
use support::oracle::{random_program, GenParams};

fn program_from(seed: u64, arity: u32, conditions: usize) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_program(
        &mut rng,
        &GenParams {
            arity,
            max_conditions: conditions,
            max_literal: 50,
        },
    )
}

fn report(p: &Program, cases: &[Vec<i64>]) -> CoverageReport {
    run_inputs(p, cases.iter().map(Vec::as_slice), ExecLimits::default()).unwrap()
}

fn covered_units(r: &CoverageReport, c: Criterion) -> BTreeSet<(u32, bool)> {
    match c {
        Criterion::Statement => r.coverage.executed_stmts().map(|s| (s.0, true)).collect(),
        Criterion::Branch => r
            .coverage
            .covered_outcomes()
            .map(|(b, o)| (b.0, o))
            .collect(),
    }
}

fn cases(k: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-60i64..60, k), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let p = program_from(seed, 3, 6);
        let text = render(&p);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(render(&back), text);
    }

    #[test]
    fn mapped_genotypes_are_valid_and_deterministic(
        codons in prop::collection::vec(any::<u8>(), 1..400)
    ) {
        let grammar = GrammarSpec::builtin(GrammarParams::default());
        let g = Genotype::new(codons);
        let a = map_genotype(&g, &grammar, 3);
        prop_assert_eq!(&a, &map_genotype(&g, &grammar, 3));
        if let Ok(p) = a {
            prop_assert!(validate(&p).is_empty());
            prop_assert_eq!(parse(&render(&p)).unwrap(), p);
        }
    }

    #[test]
    fn coverage_grows_with_the_suite(
        seed in any::<u64>(),
        base in cases(2, 1..6),
        extra in cases(2, 1..6),
    ) {
        let p = program_from(seed, 2, 4);
        let small = report(&p, &base);
        let mut all = base.clone();
        all.extend(extra);
        let big = report(&p, &all);
        for c in Criterion::ALL {
            prop_assert!(covered_units(&small, c).is_subset(&covered_units(&big, c)));
            prop_assert!(small.pct(c) <= big.pct(c));
        }
    }

    #[test]
    fn strictly_more_coverage_means_strictly_higher_fitness(
        seed in any::<u64>(),
        a in cases(2, 1..5),
        b in cases(2, 1..5),
    ) {
        let p = program_from(seed, 2, 4);
        let w = BlockWeights::new(&p);
        let mut union = a.clone();
        union.extend(b.iter().cloned());
        let suites = [report(&p, &a), report(&p, &b), report(&p, &union)];
        for c in Criterion::ALL {
            for x in &suites {
                for y in &suites {
                    let (cx, cy) = (covered_units(x, c), covered_units(y, c));
                    if cy.is_subset(&cx) && cx.len() > cy.len() {
                        prop_assert!(suite_fitness(x, c, &w) > suite_fitness(y, c, &w));
                    }
                }
            }
        }
    }

    #[test]
    fn guidance_stays_below_one(seed in any::<u64>(), a in cases(2, 1..5)) {
        let p = program_from(seed, 2, 5);
        let w = BlockWeights::new(&p);
        let r = report(&p, &a);
        for c in Criterion::ALL {
            let f = suite_fitness(&r, c, &w);
            let units = covered_units(&r, c).len() as f64;
            prop_assert!(f >= units && f < units + 1.0);
        }
    }

    #[test]
    fn distance_is_zero_exactly_when_the_outcome_holds(
        a in any::<i64>(), b in any::<i64>(), rel in 0usize..6, desired in any::<bool>()
    ) {
        let rel = RelOp::ALL[rel];
        let d = branch_distance(rel, a, b, desired);
        prop_assert_eq!(d == 0, rel.holds(a, b) == desired);
    }

    #[test]
    fn roulette_never_picks_a_zero_weight(
        weights in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0], 1..12),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let any_positive = weights.iter().any(|&w| w > 0.0);
        for _ in 0..50 {
            let i = roulette_select(&weights, &mut rng);
            prop_assert!(i < weights.len());
            if any_positive {
                prop_assert!(weights[i] > 0.0);
            }
        }
    }

    #[test]
    fn mean_shifts_and_stdev_stays_under_translation(
        xs in prop::collection::vec(-1e3f64..1e3, 2..20),
        c in -1e3f64..1e3,
    ) {
        let (m, s) = mean_stdev(&xs).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let (m2, s2) = mean_stdev(&shifted).unwrap();
        prop_assert!((m2 - (m + c)).abs() < 1e-9);
        prop_assert!((s2 - s).abs() < 1e-9);
    }

    #[test]
    fn welch_is_antisymmetric(
        a in prop::collection::vec(0f64..100.0, 2..12),
        b in prop::collection::vec(0f64..100.0, 2..12),
    ) {
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert!((ab.p_two_sided - ba.p_two_sided).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p_two_sided));
        prop_assert!((0.0..=100.0).contains(&ab.actual_cl));
    }

    #[test]
    fn confidence_grows_with_the_mean_gap(
        base in prop::collection::vec(0f64..10.0, 3..10),
        gap in 0f64..5.0,
        more in 0.01f64..5.0,
    ) {
        // same spread, larger shift: larger |t| at equal df
        let b: Vec<f64> = base.iter().map(|x| x + 1.0).collect();
        let near: Vec<f64> = base.iter().rev().map(|x| x + gap).collect();
        let far: Vec<f64> = base.iter().rev().map(|x| x + gap + more).collect();
        let (tn, tf) = (welch_t_test(&near, &b).unwrap(), welch_t_test(&far, &b).unwrap());
        prop_assume!(!tn.degenerate);
        prop_assert!((tn.df - tf.df).abs() < 1e-9);
        if tf.t.abs() > tn.t.abs() {
            prop_assert!(tf.actual_cl >= tn.actual_cl - 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ga_best_coverage_never_drops(seed in any::<u64>(), prog in any::<u64>()) {
        let p = program_from(prog, 2, 8);
        let mut cfg = GaConfig::new(Criterion::Branch, seed);
        cfg.population_size = 8;
        cfg.generations = 25;
        cfg.suite_size = 3;
        cfg.domain = InputDomain { low: -100, high: 100 };
        let out = run_ga(&p, &cfg).unwrap();
        prop_assert!(out.history.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*out.history.last().unwrap(), out.best_coverage_pct);
        prop_assert!(out.best_suite.values().iter().all(|&v| cfg.domain.contains(v)));
    }

    #[test]
    fn ge_best_score_never_rises(seed in any::<u64>(), n in 5u32..40) {
        let cfg = GeConfig {
            population_size: 20,
            generations: 30,
            seed,
            ..GeConfig::desk(Target::Statements(n))
        };
        let run = run_ge(&cfg).unwrap();
        prop_assert!(run.best_history.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn roulette_frequencies_over_ten_thousand_draws() {
    let freq = |weights: &[f64], target: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        (0..10_000)
            .filter(|_| roulette_select(weights, &mut rng) == target)
            .count() as f64
            / 10_000.0
    };
    assert!((freq(&[0.0, 0.0], 0) - 0.5).abs() <= 0.02);
    assert!((freq(&[1.0, 3.0], 1) - 0.75).abs() <= 0.02);
    assert_eq!(freq(&[1.0, 0.0, 0.0], 0), 1.0);
}
