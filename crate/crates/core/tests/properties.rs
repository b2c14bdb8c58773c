use hisearch_core::demo::{DemoSample, Demonstration};
use hisearch_core::gaussian::{BlockPartition, Gaussian};
use hisearch_core::math::{wrap_angle, PathMetric};
use hisearch_core::tshix::{smooth, solve_open_tsp, GaParams, Itinerary, SgParams};
use hisearch_core::{DMatrix, DVector};
use proptest::prelude::*;

fn gaussian(dim: usize) -> impl Strategy<Value = Gaussian> {
    (prop::collection::vec(-2.0..2.0f64, dim), prop::collection::vec(-1.0..1.0f64, dim * dim)).prop_map(move |(m, a)| {
        let a = DMatrix::from_vec(dim, dim, a);
        let cov = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.1;
        Gaussian::new(DVector::from_vec(m), cov).unwrap()
    })
}

fn sorted(mut pts: Vec<DVector<f64>>) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = pts.drain(..).map(|p| p.iter().copied().collect()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditional_mean_is_affine(
        g in (2usize..6).prop_flat_map(gaussian),
        t in -3.0..3.0f64,
        seed in any::<u64>(),
    ) {
        let dim = g.dim();
        let split = 1 + (seed as usize) % (dim - 1);
        let p = BlockPartition::leading(split, dim).unwrap();
        let c = g.conditioner(&p).unwrap();
        let n = dim - split;
        let s1 = DVector::from_fn(n, |i, _| (i as f64 + 1.0) * 0.3);
        let s2 = DVector::from_fn(n, |i, _| -(i as f64) * 0.7 + 0.2);
        let mix = &s1 * t + &s2 * (1.0 - t);
        let lhs = c.mean_at(&mix).unwrap();
        let rhs = c.mean_at(&s1).unwrap() * t + c.mean_at(&s2).unwrap() * (1.0 - t);
        prop_assert!((lhs - rhs).amax() < 1e-9);
    }

    #[test]
    fn smoothing_is_linear(
        p in prop::collection::vec(-1.0..1.0f64, 30),
        q in prop::collection::vec(-1.0..1.0f64, 30),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let metric = PathMetric::default();
        let sg = SgParams::default();
        let pts = |xs: &[f64]| -> Vec<DVector<f64>> {
            let mut v: Vec<DVector<f64>> = xs.chunks(2).map(|c| DVector::from_column_slice(c)).collect();
            v[0].fill(0.0);
            v
        };
        let pp = pts(&p);
        let qq = pts(&q);
        let mixed: Vec<DVector<f64>> = pp.iter().zip(&qq).map(|(x, y)| x * a + y * b).collect();
        let sp = smooth(&Itinerary::new(pp, &metric).unwrap(), &sg).unwrap();
        let sq = smooth(&Itinerary::new(qq, &metric).unwrap(), &sg).unwrap();
        let sm = smooth(&Itinerary::new(mixed, &metric).unwrap(), &sg).unwrap();
        for ((m, x), y) in sm.waypoints().iter().zip(sp.waypoints()).zip(sq.waypoints()) {
            prop_assert!((m - (x * a + y * b)).amax() < 1e-10);
        }
    }

    #[test]
    fn tour_is_a_permutation(
        raw in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 1..25),
        seed in any::<u64>(),
    ) {
        let pts: Vec<DVector<f64>> = raw.into_iter().map(DVector::from_vec).collect();
        let start = DVector::zeros(3);
        let ga = GaParams { generations: 30, ..GaParams::for_points(pts.len(), seed) };
        let it = solve_open_tsp(&pts, &start, &ga).unwrap();
        prop_assert_eq!(&it.points()[0], &start);
        prop_assert_eq!(sorted(it.points()[1..].to_vec()), sorted(pts));
        let len: f64 = it.points().windows(2).map(|w| ga.metric.dist(&w[0], &w[1])).sum();
        prop_assert!((len - it.total_length()).abs() < 1e-9);
    }

    #[test]
    fn alignment_preserves_differences(
        raw in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 2..30),
        offset in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let samples: Vec<DemoSample> = raw
            .iter()
            .enumerate()
            .map(|(i, p)| DemoSample {
                t: i as f64 * 0.01,
                pose: DVector::from_vec(vec![p[0] + offset[0], p[1] + offset[1], p[2] + offset[2] * 0.5]),
                wrench: DVector::zeros(3),
            })
            .collect();
        let d = Demonstration::new("p", samples).unwrap();
        let a = d.align_to_search_frame().unwrap();
        prop_assert!(a.align_to_search_frame().is_err());
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                let before = &d.samples()[i].pose - &d.samples()[j].pose;
                let after = &a.samples()[i].pose - &a.samples()[j].pose;
                prop_assert!((before[0] - after[0]).abs() < 1e-12);
                prop_assert!((before[1] - after[1]).abs() < 1e-12);
                prop_assert!(wrap_angle(before[2] - after[2]).abs() < 1e-12);
            }
        }
    }
}
