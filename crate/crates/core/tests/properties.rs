use proptest::prelude::*;
use pumbo_core::blend::shepard_bump;
use pumbo_core::kernels::gram_matrix;
use pumbo_core::linalg::Cholesky;
use pumbo_core::points::distance;
use pumbo_core::*;

fn points(dim: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = Points> {
    n.prop_flat_map(move |n| proptest::collection::vec(0.0f64..1.0, n * dim))
        .prop_map(move |c| Points::new(dim, c).unwrap())
}

fn scan(p: &Points, c: &[f64], r: f64) -> Vec<usize> {
    (0..p.len()).filter(|&i| distance(p.point(i), c) <= r).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radius_query_matches_scan(p in points(3, 1..300), c in proptest::array::uniform3(-0.2f64..1.2), r in 0.0f64..0.8) {
        let idx = SpatialIndex::build(&p).unwrap();
        prop_assert_eq!(idx.query_radius(&c, r), scan(&p, &c, r));
        prop_assert_eq!(idx.count_radius(&c, r), scan(&p, &c, r).len());
    }

    #[test]
    fn query_at_data_point_includes_it(p in points(2, 1..200), k in any::<prop::sample::Index>()) {
        let i = k.index(p.len());
        let idx = SpatialIndex::build(&p).unwrap();
        prop_assert!(idx.query_radius(p.point(i), 0.0).contains(&i));
        prop_assert_eq!(idx.query_radius(p.point(i), 2f64.sqrt()).len(), p.len());
    }

    #[test]
    fn density_and_minimality(p in points(2, 16..400), clustered in any::<bool>()) {
        let p = if clustered {
            Points::new(2, p.as_flat().iter().map(|c| 0.7 + 0.1 * c).collect()).unwrap()
        } else {
            p
        };
        let min_pts = 15.min(p.len());
        let idx = SpatialIndex::build(&p).unwrap();
        let layout = make_pu_centers(p.len(), 2).unwrap();
        let radii = find_min_radius(&idx, &layout, min_pts).unwrap();
        let r0 = layout.initial_radius();
        for (j, &rj) in radii.iter().enumerate() {
            let c = layout.center(j);
            prop_assert!(rj >= r0);
            prop_assert!(scan(&p, c, rj).len() >= min_pts);
            let k = ((rj - r0) / layout.radius_increment()).round() as u32;
            if k > 0 {
                let prev = r0 + f64::from(k - 1) * layout.radius_increment();
                prop_assert!(scan(&p, c, prev).len() < min_pts);
            }
        }
    }

    #[test]
    fn weights_form_a_partition_of_unity(
        centers in points(2, 1..12),
        radii in proptest::collection::vec(0.1f64..0.6, 12),
        targets in points(2, 1..200),
    ) {
        let m = centers.len();
        let layout = SubdomainLayout { n_side: 1, centers, radii: radii[..m].to_vec(), shapes: vec![1.0; m], min_pts: 1 };
        let w = shepard_weights(&targets, &layout).unwrap();
        for (i, x) in targets.iter().enumerate() {
            let ws = w.weights(i);
            if ws.is_empty() {
                prop_assert!((0..m).all(|j| distance(x, layout.center(j)) >= layout.radii[j]));
                continue;
            }
            let sum: f64 = ws.iter().map(|e| e.1).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            for &(j, wj) in ws {
                prop_assert!(wj > 0.0 && distance(x, layout.center(j)) < layout.radii[j]);
            }
        }
    }

    #[test]
    fn bump_is_monotone(a in 0.0f64..1.5, b in 0.0f64..1.5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(shepard_bump(lo) >= shepard_bump(hi));
        prop_assert!(shepard_bump(hi) >= 0.0);
    }

    #[test]
    fn kernel_matrices_are_symmetric_and_factor(p in points(2, 2..50), eps in 0.5f64..20.0, fam in 0usize..3) {
        let spec = KernelSpec::new(KernelFamily::ALL[fam], eps).unwrap();
        let k = gram_matrix(&spec, &p);
        prop_assert!(k.is_symmetric());
        let tau = k.trace() / p.len() as f64;
        let factored = std::iter::once(0.0)
            .chain((-12..=-6).map(|e| tau * 10f64.powi(e)))
            .any(|j| Cholesky::factor(&k, j).is_some());
        prop_assert!(factored);
    }

    #[test]
    fn local_fit_is_permutation_equivariant(p in points(2, 3..40), seed in any::<u64>()) {
        let f: Vec<f64> = p.iter().map(|x| (4.0 * x[0]).sin() + x[1]).collect();
        let spec = KernelSpec::new(KernelFamily::WendlandC4, 2.0).unwrap();
        let mut order: Vec<usize> = (0..p.len()).collect();
        let mut s = seed;
        for i in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let pp = p.select(&order);
        let ff: Vec<f64> = order.iter().map(|&i| f[i]).collect();
        let a = fit_local(&p, &f, spec).unwrap();
        let b = fit_local(&pp, &ff, spec).unwrap();
        let probe = Points::from_rows(2, [[0.3, 0.3], [0.5, 0.9], [0.01, 0.77]]).unwrap();
        let (ya, yb) = (eval_local(&a, &probe).unwrap(), eval_local(&b, &probe).unwrap());
        for (u, v) in ya.iter().zip(&yb) {
            prop_assert!((u - v).abs() <= 1e-12, "{} vs {}", u, v);
        }
    }

    #[test]
    fn local_fit_is_linear_in_values(p in points(2, 1..40), alpha in -50.0f64..50.0) {
        prop_assume!(alpha.abs() > 1e-3);
        let f: Vec<f64> = p.iter().map(|x| x[0] * x[1] - 0.3).collect();
        let g: Vec<f64> = f.iter().map(|v| alpha * v).collect();
        let spec = KernelSpec::new(KernelFamily::MaternC4, 6.0).unwrap();
        let (a, b) = (fit_local(&p, &f, spec).unwrap(), fit_local(&p, &g, spec).unwrap());
        prop_assume!(a.jitter_used == b.jitter_used);
        let probe = Points::from_rows(2, [[0.2, 0.4], [0.6, 0.6]]).unwrap();
        let (ya, yb) = (eval_local(&a, &probe).unwrap(), eval_local(&b, &probe).unwrap());
        for (u, v) in ya.iter().zip(&yb) {
            prop_assert!((alpha * u - v).abs() <= 1e-10 * (alpha * u).abs().max(1e-300) + 1e-12 * alpha.abs());
        }
    }

    #[test]
    fn relative_metrics_are_ordered(truth in proptest::collection::vec(-5.0f64..5.0, 1..100), noise in proptest::collection::vec(-0.1f64..0.1, 100)) {
        let pred: Vec<f64> = truth.iter().zip(&noise).map(|(t, e)| t + e).collect();
        prop_assert!(mae(&truth, &pred).unwrap() >= 0.0);
        if let (Ok((a, n1)), Ok((b, n2))) = (rmae(&truth, &pred), rrmse(&truth, &pred)) {
            prop_assert!(a >= 0.0 && b >= 0.0 && b <= a * (1.0 + 1e-12));
            prop_assert_eq!(n1, n2);
        }
    }

    #[test]
    fn expected_improvement_is_nonnegative(m in -1e3f64..1e3, s in 0.0f64..1e3, b in -1e3f64..1e3, xi in 0.0f64..1.0) {
        let ei = expected_improvement(m, s, b, xi);
        prop_assert!(ei >= 0.0 && ei.is_finite());
        // Never below the plain improvement of the mean.
        prop_assert!(ei >= (m - b - xi).max(0.0) * (1.0 - 1e-12) - 1e-9);
    }
}
