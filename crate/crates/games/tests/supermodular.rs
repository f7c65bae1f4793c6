use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tarski_core::instances::{exhaustive_monotone_catalog, random_monotone_table, HerringboneInstance};
use tarski_core::{brute_force_fix, check_monotone_exhaustive, GridBox, GridPoint, GridShape, Oracle, TableFn};
use tarski_games::rational::{qi, Q};
use tarski_games::supermodular::{c2_tight, check_c2_c3, table_game_from_spec, MultiLayout};
use tarski_games::{
    best_response, beta_bar_oracle, diamond_search, game_from_monotone, game_from_monotone_multi, pure_equilibria,
    solve_equilibrium, BestResponseKind, Error, PropertyViolation, SupermodularGame,
};

const KINDS: [BestResponseKind; 2] = [BestResponseKind::Sup, BestResponseKind::Inf];

fn fixed_points(f: &TableFn) -> Vec<GridPoint> {
    let mut o = Oracle::new(f.clone());
    let bx = o.full_box().clone();
    brute_force_fix(&mut o, &bx).unwrap().all_fixed_points.into_iter().map(GridPoint::new).collect()
}

fn diagonal(x: &GridPoint) -> GridPoint {
    let mut v = x.coords().to_vec();
    v.extend_from_slice(x.coords());
    GridPoint::new(v)
}

/// Arbitrary integer costs; one-dimensional strategies make C2 vacuous.
fn random_diamond<R: Rng>(players: usize, efforts: usize, rng: &mut R) -> SupermodularGame {
    let alpha: Vec<Q> = (0..players).map(|_| qi(rng.gen_range(1..=3))).collect();
    let costs: Vec<Vec<Q>> = (0..players).map(|_| (0..efforts).map(|_| qi(rng.gen_range(-4..=12))).collect()).collect();
    diamond_search(&alpha, &costs).unwrap()
}

#[test]
fn reduction_bijection_on_two_by_two_catalog() {
    let shape = GridShape::uniform(2, 2).unwrap();
    let mut count = 0;
    for f in exhaustive_monotone_catalog(&shape) {
        let g = game_from_monotone(&f);
        let expected: Vec<GridPoint> = fixed_points(&f).iter().map(diagonal).collect();
        assert_eq!(pure_equilibria(&g), expected);
        assert!(c2_tight(&g));
        for kind in KINDS {
            let mut o = beta_bar_oracle(&g, kind);
            let bx = o.full_box().clone();
            assert!(check_monotone_exhaustive(&mut o, &bx).unwrap().is_none());
        }
        count += 1;
    }
    assert_eq!(count, 36);
}

#[test]
fn reduction_bijection_on_three_by_three_sample() {
    let shape = GridShape::uniform(2, 3).unwrap();
    for f in exhaustive_monotone_catalog(&shape).step_by(97) {
        let g = game_from_monotone(&f);
        let expected: Vec<GridPoint> = fixed_points(&f).iter().map(diagonal).collect();
        assert_eq!(pure_equilibria(&g), expected);
        let eq = solve_equilibrium(&g, BestResponseKind::Sup, true).unwrap();
        assert!(expected.contains(&eq.profile));
    }
}

#[test]
fn reduction_utilities_satisfy_the_lattice_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let f = random_monotone_table(&GridShape::uniform(2, 3).unwrap(), &mut rng);
        let g = game_from_monotone(&f);
        assert!(check_c2_c3(&g, 1 << 20).is_none());
        assert!(c2_tight(&g));
    }
}

#[test]
fn figure_one_equilibrium() {
    let h = HerringboneInstance::figure_one();
    let f = TableFn::from_fn(&mut h.oracle().unwrap()).unwrap();
    let g = game_from_monotone(&f);
    let target = GridPoint::from([2, 2, 2, 2]);
    assert_eq!(pure_equilibria(&g), vec![target.clone()]);
    for kind in KINDS {
        for shortcut in [false, true] {
            assert_eq!(solve_equilibrium(&g, kind, shortcut).unwrap().profile, target);
        }
    }
}

#[test]
fn off_diagonal_profiles_are_never_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = random_monotone_table(&GridShape::uniform(2, 3).unwrap(), &mut rng);
    let g = game_from_monotone(&f);
    for p in g.profile_box().points() {
        let (x, y) = p.coords().split_at(2);
        if x != y {
            assert!(!g.is_equilibrium(&p));
            let br = best_response(&g, 0, &p, BestResponseKind::Sup).unwrap();
            assert_eq!(br.coords(), y);
        }
    }
}

#[test]
fn beta_bar_is_monotone_on_small_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for players in 2..=4 {
        for _ in 0..20 {
            let g = random_diamond(players, 3, &mut rng);
            assert!(g.profile_box().num_points() <= 81);
            assert!(check_c2_c3(&g, 1 << 16).is_none());
            for kind in KINDS {
                let mut o = beta_bar_oracle(&g, kind);
                let bx = o.full_box().clone();
                assert!(check_monotone_exhaustive(&mut o, &bx).unwrap().is_none());
            }
        }
    }
}

#[test]
fn solved_profiles_are_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for players in 1..=3 {
        for _ in 0..20 {
            let g = random_diamond(players, 4, &mut rng);
            let all = pure_equilibria(&g);
            for kind in KINDS {
                for shortcut in [false, true] {
                    let eq = solve_equilibrium(&g, kind, shortcut).unwrap();
                    assert!(g.is_equilibrium(&eq.profile));
                    assert!(all.contains(&eq.profile));
                }
            }
            // The extreme equilibria are the meet and join of the whole set.
            let lowest = all.iter().skip(1).fold(all[0].clone(), |a, p| a.meet(p));
            let highest = all.iter().skip(1).fold(all[0].clone(), |a, p| a.join(p));
            assert!(all.contains(&lowest) && all.contains(&highest));
        }
    }
}

#[test]
fn single_player_equilibrium_is_the_argmax_join() {
    let bx = GridBox::new([1, 1].into(), [3, 3].into()).unwrap();
    let g = SupermodularGame::single(bx, |s| qi(-(s[0] - 2).abs() * (s[1] - 2).abs()));
    // Maximizers: every point with a 2 in some coordinate; join (3,3) is not one.
    assert!(matches!(
        solve_equilibrium(&g, BestResponseKind::Sup, true),
        Err(Error::Violation(PropertyViolation::SupNotInArgmax { .. }))
    ));
    let bx = GridBox::new([1, 1].into(), [3, 3].into()).unwrap();
    let g = SupermodularGame::single(bx, |s| qi(s[0].min(2) + s[1].min(1)));
    let eq = solve_equilibrium(&g, BestResponseKind::Sup, true).unwrap();
    assert_eq!(eq.profile, GridPoint::from([3, 3]));
    assert_eq!(eq.oracle_calls, 1);
    assert_eq!(solve_equilibrium(&g, BestResponseKind::Inf, false).unwrap().profile, GridPoint::from([2, 1]));
}

#[test]
fn shortcut_query_regime_for_two_one_dimensional_players() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in [4u32, 6, 8, 10, 12] {
        let n = 1i64 << k;
        let bound = k as u64 + 2;
        for _ in 0..5 {
            let f = random_monotone_table(&GridShape::uniform(1, n).unwrap(), &mut rng);
            let g = game_from_monotone(&f);
            let eq = solve_equilibrium(&g, BestResponseKind::Sup, true).unwrap();
            assert!(eq.oracle_calls <= bound, "N = {n}: {} calls", eq.oracle_calls);
            let x = GridPoint::new(vec![eq.profile[0]]);
            assert_eq!(f.get(&x), &x);
        }
    }
}

#[test]
fn multi_player_reduction() {
    let shape = GridShape::uniform(2, 2).unwrap();
    for f in exhaustive_monotone_catalog(&shape) {
        let fix = fixed_points(&f);
        for dims in [vec![1, 1, 2], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1], vec![2, 3]] {
            let (g, layout) = game_from_monotone_multi(&f, &dims).unwrap();
            let eq = pure_equilibria(&g);
            let labelled: Vec<GridPoint> = eq.iter().map(|p| layout.labeled_point(p).expect("labels agree")).collect();
            let mut sorted = labelled.clone();
            sorted.sort_by(|a, b| a.coords().cmp(b.coords()));
            assert_eq!(sorted, fix, "dims {dims:?}");
            for x in &fix {
                assert!(g.is_equilibrium(&layout.profile_of(x)));
            }
        }
    }
    assert!(MultiLayout::new(&[1, 1], 2).is_err());
    assert!(MultiLayout::new(&[1, 4], 2).is_err());
}

#[test]
fn table_games_detect_missing_increasing_differences() {
    let bx = GridBox::new([1].into(), [2].into()).unwrap();
    // Player 0 prefers to match low and mismatch high: decreasing differences.
    let table = vec![vec![qi(0), qi(1), qi(1), qi(0)], vec![qi(0); 4]];
    let g = table_game_from_spec(vec![bx.clone(), bx], table).unwrap();
    let v = check_c2_c3(&g, 1 << 10).unwrap();
    assert!(matches!(v, PropertyViolation::IncreasingDifferences { player: 0, .. }));
    assert!(v.reproduces(&g).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reported_violations_reproduce(entries in proptest::collection::vec(-3i64..=3, 8)) {
        let bx = GridBox::new([1].into(), [2].into()).unwrap();
        let table = vec![entries[..4].iter().map(|&v| qi(v)).collect(), entries[4..].iter().map(|&v| qi(v)).collect()];
        let g = table_game_from_spec(vec![bx.clone(), bx], table).unwrap();
        if let Some(v) = check_c2_c3(&g, 1 << 10) {
            prop_assert!(v.reproduces(&g).unwrap());
        } else {
            for kind in KINDS {
                let mut o = beta_bar_oracle(&g, kind);
                let full = o.full_box().clone();
                prop_assert!(check_monotone_exhaustive(&mut o, &full).unwrap().is_none());
            }
        }
    }
}
