use hamdiet::analytics::{hypervolume_3d, permutation_test};
use hamdiet::diversity::{binarize, dwh_select, hamming, BinarizeMode, SelectionPool};
use hamdiet::evaluation::{
    eval_cost, eval_penalty, eval_protein, eval_repetitiveness, evaluate, ObjectiveVector,
};
use hamdiet::genome::DietGenome;
use hamdiet::instance::ProblemInstance;
use hamdiet::ranking::{assign_raw_fitness, dominates, sort_fronts};
use hamdiet::synthetic::random_instance;
use hamdiet::variation::{crossover, individual_rng, mutate, repair, VariationConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn objective() -> impl Strategy<Value = ObjectiveVector> {
    // Small integer grid so ties and duplicates are common.
    (0..5u8, 0..5u8, 0..5u8)
        .prop_map(|(a, b, c)| ObjectiveVector::new(a.into(), b.into(), c.into()))
}

fn instance_and_genome() -> impl Strategy<Value = (ProblemInstance, DietGenome)> {
    (any::<u64>(), 1..8usize, 1..4usize, 1..5usize).prop_flat_map(
        |(seed, foods, nutrients, horizon)| {
            let inst = random_instance(
                &mut ChaCha8Rng::seed_from_u64(seed),
                foods,
                nutrients,
                horizon,
            );
            proptest::collection::vec(prop_oneof![6 => Just(0u8), 3 => 1..=3u8], foods * horizon)
                .prop_map(move |cells| {
                    let g = DietGenome::from_cells(foods, horizon, cells).unwrap();
                    (inst.clone(), g)
                })
        },
    )
}

fn genome_pair() -> impl Strategy<Value = (DietGenome, DietGenome)> {
    (1..10usize, 1..8usize).prop_flat_map(|(items, horizon)| {
        let cells = proptest::collection::vec(0..=4u8, items * horizon);
        (cells.clone(), cells).prop_map(move |(a, b)| {
            (
                DietGenome::from_cells(items, horizon, a).unwrap(),
                DietGenome::from_cells(items, horizon, b).unwrap(),
            )
        })
    })
}

proptest! {
    #[test]
    fn dominance_is_a_strict_order(a in objective(), b in objective(), c in objective()) {
        prop_assert!(!dominates(&a, &a));
        prop_assert!(!(dominates(&a, &b) && dominates(&b, &a)));
        if dominates(&a, &b) && dominates(&b, &c) {
            prop_assert!(dominates(&a, &c));
        }
    }

    #[test]
    fn fronts_ignore_population_order(
        points in proptest::collection::vec(objective(), 1..30),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled: Vec<ObjectiveVector> = order.iter().map(|&i| points[i]).collect();
        let rank = sort_fronts(&points).ranks(points.len());
        let shuffled_rank = sort_fronts(&shuffled).ranks(points.len());
        for (pos, &i) in order.iter().enumerate() {
            prop_assert_eq!(rank[i], shuffled_rank[pos]);
        }
    }

    #[test]
    fn front_members_are_mutually_nondominated(points in proptest::collection::vec(objective(), 1..30)) {
        for front in sort_fronts(&points).fronts {
            for &a in &front {
                for &b in &front {
                    prop_assert!(!dominates(&points[a], &points[b]));
                }
            }
        }
    }

    #[test]
    fn adding_a_serving_moves_objectives_predictably(
        (inst, g) in instance_and_genome(),
        item in any::<prop::sample::Index>(),
        day in any::<prop::sample::Index>(),
    ) {
        let (i, d) = (item.index(g.items()), day.index(g.horizon()));
        prop_assume!(g.get(i, d) < 5);
        let mut more = g.clone();
        more.set(i, d, g.get(i, d) + 1);
        prop_assert_eq!(eval_cost(&more, &inst), eval_cost(&g, &inst) + u64::from(inst.cost_cents(i)));
        prop_assert!((eval_protein(&more, &inst) - eval_protein(&g, &inst) - inst.protein(i)).abs() < 1e-9);
        prop_assert!(eval_penalty(&more, &inst) <= eval_penalty(&g, &inst) + 1e-9);
    }

    #[test]
    fn repetitiveness_sees_only_presence((inst, g) in instance_and_genome(), bump in 1..=4u8) {
        let mut changed = g.clone();
        for c in changed.cells_mut() {
            if *c > 0 {
                *c = bump;
            }
        }
        prop_assert_eq!(eval_repetitiveness(&g, &inst), eval_repetitiveness(&changed, &inst));
    }

    #[test]
    fn repair_is_additive_and_idempotent((inst, g) in instance_and_genome()) {
        let cfg = VariationConfig::default();
        if let Ok(fixed) = repair(&g, &inst, &cfg) {
            prop_assert_eq!(eval_penalty(&fixed, &inst), 0.0);
            prop_assert!(fixed.cells().iter().zip(g.cells()).all(|(a, b)| a >= b));
            prop_assert_eq!(repair(&fixed, &inst, &cfg).unwrap(), fixed);
        }
    }

    #[test]
    fn crossover_exchanges_cells((a, b) in genome_pair(), seed in any::<u64>(), points in 1..30usize) {
        let cfg = VariationConfig { crossover_points: points, ..VariationConfig::default() };
        let (c, d) = crossover(&a, &b, &cfg, &mut individual_rng(seed, 0)).unwrap();
        for k in 0..a.cells().len() {
            let pair = (c.cells()[k], d.cells()[k]);
            prop_assert!(pair == (a.cells()[k], b.cells()[k]) || pair == (b.cells()[k], a.cells()[k]));
        }
    }

    #[test]
    fn mutation_only_toggles_zero_and_one((a, _) in genome_pair(), seed in any::<u64>()) {
        let cfg = VariationConfig { mut_one_to_zero: 0.5, mut_zero_to_one: 0.5, ..VariationConfig::default() };
        let m = mutate(&a, &cfg, &mut individual_rng(seed, 1));
        for (&before, &after) in a.cells().iter().zip(m.cells()) {
            prop_assert!(after == before || (before > 0 && after == 0) || (before == 0 && after == 1));
        }
    }

    #[test]
    fn hamming_is_a_metric((a, b) in genome_pair(), seed in any::<u64>()) {
        let c = mutate(&a, &VariationConfig { mut_one_to_zero: 0.3, mut_zero_to_one: 0.3, ..VariationConfig::default() }, &mut individual_rng(seed, 2));
        let (pa, pb, pc) = (binarize(&a), binarize(&b), binarize(&c));
        let ab = hamming(&pa, &pb).unwrap();
        prop_assert_eq!(ab, hamming(&pb, &pa).unwrap());
        prop_assert_eq!(hamming(&pa, &pa).unwrap(), 0);
        prop_assert!(hamming(&pa, &pc).unwrap() <= ab + hamming(&pb, &pc).unwrap());
        prop_assert_eq!(hamming(&pa, &pa.complement()).unwrap() as usize, a.items());
    }

    #[test]
    fn greedy_steps_never_increase(seed in any::<u64>(), size in 2..16usize, k in 2..16usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 10, 2, 3);
        let mut members: Vec<_> = (0..size)
            .map(|s| {
                let mut g = DietGenome::for_instance(&inst);
                for (n, c) in g.cells_mut().iter_mut().enumerate() {
                    *c = (seed as usize).wrapping_add(n * 7 + s * 13).is_multiple_of(5) as u8;
                }
                evaluate(g, &inst)
            })
            .collect();
        assign_raw_fitness(&mut members);
        let pool = SelectionPool::new(members, BinarizeMode::Weekly).unwrap();
        let sel = dwh_select(&pool, k.min(size), &mut rng).unwrap();
        prop_assert_eq!(sel.order.len(), k.min(size));
        for w in sel.step_values.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn hypervolume_grows_with_the_front(
        points in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), 1..12),
        extra in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
    ) {
        let pts: Vec<[f64; 3]> = points.iter().map(|&(a, b, c)| [a, b, c]).collect();
        let base = hypervolume_3d(&pts, [1.0; 3]);
        let mut more = pts.clone();
        more.push([extra.0, extra.1, extra.2]);
        prop_assert!(hypervolume_3d(&more, [1.0; 3]) >= base - 1e-12);
        // A point dominated by an existing one adds nothing.
        let p = pts[0];
        let mut dominated = pts.clone();
        dominated.push([(p[0] + 1.0) / 2.0, (p[1] + 1.0) / 2.0, (p[2] + 1.0) / 2.0]);
        prop_assert!((hypervolume_3d(&dominated, [1.0; 3]) - base).abs() < 1e-12);
    }

    #[test]
    fn permutation_p_value_is_symmetric(
        a in proptest::collection::vec(0.0..10.0f64, 1..15),
        b in proptest::collection::vec(0.0..10.0f64, 1..15),
        seed in any::<u64>(),
    ) {
        let ab = permutation_test(&a, &b, 200, seed).unwrap();
        let ba = permutation_test(&b, &a, 200, seed).unwrap();
        prop_assert!(ab.p_value > 0.0 && ab.p_value <= 1.0);
        prop_assert_eq!(ab.p_value, ba.p_value);
    }
}
