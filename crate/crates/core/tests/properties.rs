use mcd::baselines::{storey_fdr, PValueField};
use mcd::io::{format_grid, format_mask, parse_grid, parse_mask};
use mcd::sim::{auc, jaccard, partition, roc_curve, sensitivity_specificity};
use mcd::stat::{mcd_statistic, ModelSpec};
use mcd::threshold::{cross_variance, detect_values, scan_threshold_values};
use mcd::{Field, Grid, Mask, ScaleLadder, WindowShape};
use proptest::prelude::*;

fn field_of<T: std::fmt::Debug + Clone + 'static>(
    cell: impl Strategy<Value = T> + Clone + 'static,
) -> impl Strategy<Value = Field<T>> {
    (2usize..12, 2usize..12).prop_flat_map(move |(r, c)| {
        proptest::collection::vec(cell.clone(), r * c)
            .prop_map(move |v| Field::new(r, c, v).unwrap())
    })
}

fn mask_pair() -> impl Strategy<Value = (Mask, Mask)> {
    (1usize..10, 1usize..10).prop_flat_map(|(r, c)| {
        let m = move || {
            proptest::collection::vec(any::<bool>(), r * c)
                .prop_map(move |v| Field::new(r, c, v).unwrap())
        };
        (m(), m())
    })
}

fn has_both(m: &Mask) -> bool {
    m.iter().any(|&b| b) && m.iter().any(|&b| !b)
}

proptest! {
    #[test]
    fn metrics_are_proportions((detected, truth) in mask_pair()) {
        let j = jaccard(&detected, &truth);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard(&truth, &detected));
        match sensitivity_specificity(&detected, &truth) {
            Ok(m) => {
                prop_assert!((0.0..=1.0).contains(&m.sensitivity));
                prop_assert!((0.0..=1.0).contains(&m.specificity));
            }
            Err(_) => prop_assert!(!has_both(&truth)),
        }
    }

    #[test]
    fn belts_partition_cells_above_the_minimum(
        t in field_of(-50.0f64..50.0),
        k in 3usize..40,
    ) {
        let v = cross_variance(&t.map(|x| x.sin())).unwrap();
        let (lo, hi) = t.min_max();
        prop_assume!(hi > lo);
        let scan = scan_threshold_values(&t, &v, k).unwrap();
        prop_assert_eq!(scan.thresholds.len(), k);
        prop_assert_eq!(scan.belt_counts.len(), k - 1);
        let above = t.iter().filter(|&&x| x > lo).count();
        prop_assert_eq!(scan.belt_counts.iter().sum::<usize>(), above);
        let best = scan.belt_means[scan.chosen].unwrap();
        for m in scan.belt_means.iter().flatten() {
            prop_assert!(*m <= best);
        }
        prop_assert!(scan.t_star > scan.thresholds[scan.chosen] && scan.t_star < scan.thresholds[scan.chosen + 1]);
    }

    #[test]
    fn detection_is_strict_and_nested(t in field_of(0u8..20), a in 0u8..20, b in 0u8..20) {
        let t = t.map(|&x| x as f64);
        let (lo, hi) = (a.min(b) as f64, a.max(b) as f64);
        let low = detect_values(&t, lo).unwrap().mask;
        let high = detect_values(&t, hi).unwrap().mask;
        for i in 0..t.len() {
            prop_assert_eq!(low.as_slice()[i], t.as_slice()[i] > lo);
            prop_assert!(!high.as_slice()[i] || low.as_slice()[i]);
        }
    }

    #[test]
    fn integer_grids_round_trip(g in field_of(0u32..1000), n in proptest::option::of(1000u64..2000)) {
        let grid = g.map(|&x| x as f64);
        let back = parse_grid(&format_grid(&grid, n)).unwrap();
        prop_assert_eq!(back.grid, grid);
        prop_assert_eq!(back.trials_uniform, n);
    }

    #[test]
    fn real_grids_round_trip_bitwise(g in field_of(-1e6f64..1e6)) {
        let back = parse_grid(&format_grid(&g, None)).unwrap().grid;
        for (a, b) in g.iter().zip(back.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn masks_round_trip(m in field_of(any::<bool>())) {
        prop_assert_eq!(parse_mask(&format_mask(&m)).unwrap(), m);
    }

    #[test]
    fn poisson_and_normal_statistics_are_nonnegative(g in field_of(0u8..15)) {
        let grid: Grid = g.map(|&x| x as f64);
        let ladder = ScaleLadder::from_radii(WindowShape::Circle, &[0, 1, 3]).unwrap();
        if mcd::stat::median(grid.as_slice()) > 0.0 {
            let t = mcd_statistic(&grid, &ModelSpec::poisson(), &ladder).unwrap();
            prop_assert!(t.values().iter().all(|&x| x >= -1e-9));
        }
        let t = mcd_statistic(&grid, &ModelSpec::normal(Some(2.0)), &ladder).unwrap();
        prop_assert!(t.values().iter().all(|&x| x >= -1e-9));
    }

    #[test]
    fn extra_scales_only_add_evidence(g in field_of(0u8..15)) {
        let grid: Grid = g.map(|&x| x as f64);
        let one = ScaleLadder::from_radii(WindowShape::Square, &[0]).unwrap();
        let two = ScaleLadder::from_radii(WindowShape::Square, &[0, 2]).unwrap();
        let model = ModelSpec::normal(Some(1.0));
        let a = mcd_statistic(&grid, &model, &one).unwrap();
        let b = mcd_statistic(&grid, &model, &two).unwrap();
        for (x, y) in a.values().iter().zip(b.values().iter()) {
            prop_assert!(y >= &(x - 1e-9));
        }
    }

    #[test]
    fn normal_statistic_ignores_shifts(g in field_of(-5.0f64..5.0), shift in -100.0f64..100.0) {
        let ladder = ScaleLadder::two_scale();
        let model = ModelSpec::normal(Some(1.5));
        let a = mcd_statistic(&g, &model, &ladder).unwrap();
        let b = mcd_statistic(&g.map(|x| x + shift), &model, &ladder).unwrap();
        for (x, y) in a.values().iter().zip(b.values().iter()) {
            prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0));
        }
    }

    #[test]
    fn storey_rejections_grow_with_alpha(p in field_of(0.0f64..1.0), a in 0.01f64..0.9, b in 0.01f64..0.9) {
        let pv = PValueField::new(p).unwrap();
        let small = storey_fdr(&pv, a.min(b), 0.5).unwrap().mask;
        let large = storey_fdr(&pv, a.max(b), 0.5).unwrap().mask;
        for (s, l) in small.iter().zip(large.iter()) {
            prop_assert!(!s || *l);
        }
    }

    #[test]
    fn roc_is_monotone_and_auc_flips((scores, truth) in (2usize..9, 2usize..9).prop_flat_map(|(r, c)| (
        proptest::collection::vec(0u8..10, r * c).prop_map(move |v| Field::new(r, c, v.into_iter().map(f64::from).collect()).unwrap()),
        proptest::collection::vec(any::<bool>(), r * c).prop_map(move |v| Field::new(r, c, v).unwrap()),
    ))) {
        prop_assume!(has_both(&truth));
        let curve = roc_curve(&scores, &truth, 12).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[1].false_positive_rate >= w[0].false_positive_rate);
            prop_assert!(w[1].true_positive_rate >= w[0].true_positive_rate);
        }
        let a = auc(&scores, &truth).unwrap();
        let flipped = auc(&scores.map(|x| -x), &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a + flipped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_covers_the_grid(m in field_of(any::<bool>())) {
        let p = partition(&m);
        prop_assert_eq!(p.noise + p.boundary + p.signal, m.len());
        prop_assert!(p.noise <= m.iter().filter(|&&b| !b).count());
        prop_assert!(p.signal <= m.count_true());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                let mixed = m.neighbours4(r, c).any(|n| m[n] != m[(r, c)]);
                prop_assert_eq!(p.boundary_mask()[(r, c)], mixed);
            }
        }
        prop_assert_eq!(p.boundary_mask().count_true(), p.boundary);
    }
}
