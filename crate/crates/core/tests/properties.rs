mod common;

use foliate::fibration::build_atlas;
use foliate::fixtures;
use foliate::leafspace::{build_leaf_space, is_open_in_leaf_space, nonseparated_oracle, VertexId};
use foliate::model::random::{random_model, RandomModelConfig};
use foliate::model::{LeafDescriptor, ModelPoint, StripModel};
use foliate::numeric::{
    check_fibered_homeo, check_pou, concat_charts, grid_points, straighten_graphs, Domain, EmbeddingEvaluator, FnChart,
    GraphSample, OverlapSpec, PlanePoint, DEFAULT_TOL,
};
use foliate::rational::{qf, Q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture() -> impl Strategy<Value = StripModel> {
    prop::sample::select(vec!["M0", "M1", "M2", "M3"]).prop_map(fixtures::model)
}

fn rational(lo: i64, hi: i64) -> impl Strategy<Value = Q> {
    (lo * 64..hi * 64).prop_map(|n| qf(n, 64))
}

fn sheared(t: (f64, f64), a: f64) -> FnChart {
    FnChart::new(
        Domain::open(t, (-0.5, 0.5)),
        move |s, u| PlanePoint::new(s + a * u.sin(), u),
        move |p| Some((p.fiber - a * p.base.sin(), p.base)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn saturations_are_open_and_idempotent(m in fixture(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bx = common::random_box(&m, &mut rng);
        let sat = m.saturate_basic(&bx).unwrap();
        prop_assert_eq!(m.saturate_set(&sat).unwrap(), sat.clone());
        prop_assert!(is_open_in_leaf_space(&build_leaf_space(&m), &sat));
        for pt in sat.edge_samples(&m, 3) {
            prop_assert!(sat.contains_point(&m, &pt));
        }
    }

    #[test]
    fn graph_nonseparation_matches_the_oracle(seed in any::<u64>()) {
        let m = random_model(seed, RandomModelConfig { max_strips: 3, max_arcs_per_side: 2 });
        let graph = build_leaf_space(&m);
        let n = graph.vertices.len();
        for a in 0..n {
            for b in a + 1..n {
                let leaf = |v: usize| graph.vertices[v].leaf.leaf();
                let oracle = nonseparated_oracle(&m, &leaf(a), &leaf(b), 12).unwrap();
                prop_assert_eq!(oracle, graph.are_nonseparated(VertexId(a), VertexId(b)));
            }
        }
    }

    #[test]
    fn straightening_hits_targets_and_stays_monotone(seed in any::<u64>()) {
        let gs = common::random_graph_sample(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = straighten_graphs(&gs).unwrap();
        let (a, b) = gs.interval;
        for (j, &z) in gs.z.iter().enumerate() {
            for (i, row) in gs.values.iter().enumerate() {
                prop_assert!((h.eval(row[j], z).unwrap().fiber - gs.targets[i]).abs() <= 1e-9);
            }
            prop_assert_eq!(h.eval(a, z).unwrap().fiber, a);
            prop_assert_eq!(h.eval(b, z).unwrap().fiber, b);
        }
        let r = check_fibered_homeo(&h, 31, 1e-9);
        prop_assert!(r.passed(), "{}", r.summary());
    }

    #[test]
    fn straightening_graphs_on_their_targets_is_the_identity(
        raw in prop::collection::vec(0.05f64..0.95, 1..=3),
        s in 0.0f64..1.0,
        z in 0.0f64..1.0,
    ) {
        let mut c = raw;
        c.sort_by(f64::total_cmp);
        c.dedup();
        let gs = GraphSample { z: vec![0.0, 1.0], values: c.iter().map(|&v| vec![v, v]).collect(), interval: (0.0, 1.0), targets: c };
        let h = straighten_graphs(&gs).unwrap();
        prop_assert!((h.eval(s, z).unwrap().fiber - s).abs() <= 1e-15);
    }

    #[test]
    fn pou_gluing_of_increasing_pieces_is_increasing(seed in any::<u64>()) {
        let spec = common::random_pou(&mut ChaCha8Rng::seed_from_u64(seed), false);
        let r = check_pou(&spec, 41);
        prop_assert!(r.passed(), "{}", r.summary());
    }

    #[test]
    fn concatenation_is_associative(a1 in -0.2f64..0.2, a2 in -0.2f64..0.2, a3 in -0.2f64..0.2) {
        let spec = |seam| OverlapSpec::new(seam, 0.25);
        let left = concat_charts(
            concat_charts(sheared((-3.0, 1.0), a1), sheared((0.0, 4.0), a2), spec(0.5)).unwrap(),
            sheared((3.0, 7.0), a3),
            spec(3.5),
        )
        .unwrap();
        let right = concat_charts(
            sheared((-3.0, 1.0), a1),
            concat_charts(sheared((0.0, 4.0), a2), sheared((3.0, 7.0), a3), spec(3.5)).unwrap(),
            spec(0.5),
        )
        .unwrap();
        for t in grid_points((-3.0, 7.0), 41, false) {
            for u in grid_points((-0.5, 0.5), 11, false) {
                let (p, q) = (left.eval(t, u).unwrap(), right.eval(t, u).unwrap());
                prop_assert!(p.dist(&q) <= 2.0 * DEFAULT_TOL, "({t}, {u}): {p:?} vs {q:?}");
            }
        }
    }

    #[test]
    fn tower_levels_increase(m in fixture(), k in any::<prop::sample::Index>(), i in -1000i64..1000, t in 1i64..64) {
        let atlas = build_atlas(&m).unwrap();
        let chart = &atlas.charts[k.index(atlas.charts.len())].chart;
        let (lo, hi) = chart.v_range();
        let v = &lo + (&hi - &lo) * qf(t, 64);
        prop_assert!(chart.level(i, &v).unwrap() < chart.level(i + 1, &v).unwrap());
    }

    #[test]
    fn charts_round_trip_exactly(m in fixture(), k in any::<prop::sample::Index>(), s in rational(-50, 50), t in 1i64..64) {
        let atlas = build_atlas(&m).unwrap();
        let chart = &atlas.charts[k.index(atlas.charts.len())].chart;
        let (lo, hi) = chart.v_range();
        let v = &lo + (&hi - &lo) * qf(t, 64);
        let pt = chart.eval(&s, &v).unwrap();
        prop_assert_eq!(chart.inverse(&pt).unwrap(), (s, v));
    }

    #[test]
    fn model_text_round_trips(seed in any::<u64>()) {
        let m = random_model(seed, RandomModelConfig { max_strips: 6, max_arcs_per_side: 4 });
        prop_assert_eq!(StripModel::load(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn doubling_involution_squares_to_identity(m in fixture(), x in rational(-20, 20), y in 1i64..64) {
        let (d, sigma) = m.double().unwrap();
        for strip in d.strip_ids() {
            let pt = ModelPoint::InStrip { strip, x: x.clone(), y: qf(y, 64) };
            prop_assert_eq!(sigma.point(&sigma.point(&pt)), pt);
        }
        for gluing in d.gluing_ids() {
            let leaf = LeafDescriptor::Arc { gluing };
            prop_assert_eq!(sigma.leaf(&sigma.leaf(&leaf)), leaf);
        }
    }
}
