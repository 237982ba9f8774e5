use proptest::prelude::*;
use pumbo_core::points::distance;
use pumbo_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    data: PointSet,
    layout: SubdomainLayout,
    index: SpatialIndex,
    specs: Vec<KernelSpec>,
}

fn case(n: usize, seed: u64, family: KernelFamily, eps: f64) -> Case {
    let data = gen_testdata(TestFunction::F2, n, seed).unwrap();
    let index = SpatialIndex::build(data.points()).unwrap();
    let mut layout = make_pu_centers(n, 2).unwrap();
    layout.radii = find_min_radius(&index, &layout, 15).unwrap();
    let specs = vec![KernelSpec::new(family, eps).unwrap(); layout.len()];
    Case { data, layout, index, specs }
}

fn covering(layout: &SubdomainLayout, x: &[f64]) -> Vec<usize> {
    (0..layout.len()).filter(|&j| distance(x, layout.center(j)) < layout.radii[j]).collect()
}

#[test]
fn nodes_are_reproduced_by_exact_fits() {
    let c = case(400, 1, KernelFamily::WendlandC4, 3.0);
    let (y, diag) = pum_evaluate(&c.data, c.data.points(), &c.layout, &c.index, &c.specs).unwrap();
    assert!(diag.all_exact());
    let f = c.data.values().unwrap();
    let tol = 1e-6 * (1.0 + f.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    assert!(mae(f, &y).unwrap() <= tol);
}

#[test]
fn blend_is_a_convex_combination_of_local_fits() {
    let c = case(300, 2, KernelFamily::MaternC4, 6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let targets = Points::new(2, (0..400).map(|_| rng.random::<f64>()).collect()).unwrap();
    let (y, _) = pum_evaluate(&c.data, &targets, &c.layout, &c.index, &c.specs).unwrap();
    for (i, x) in targets.iter().enumerate() {
        let local: Vec<f64> = covering(&c.layout, x)
            .into_iter()
            .map(|j| {
                let ids = c.index.query_radius(c.layout.center(j), c.layout.radii[j]);
                let sub = c.data.select(&ids);
                fit_local(sub.points(), sub.values().unwrap(), c.specs[j]).unwrap().eval_at(x)
            })
            .collect();
        let lo = local.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = local.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        assert!(y[i] >= lo - slack && y[i] <= hi + slack, "target {i}: {} not in [{lo}, {hi}]", y[i]);
    }
}

#[test]
fn far_data_does_not_move_a_prediction() {
    let c = case(300, 3, KernelFamily::Gaussian, 5.0);
    let x = [0.2, 0.3];
    let reach = covering(&c.layout, &x);
    // Every point inside some ball covering x stays fixed.
    let near: Vec<bool> = c
        .data
        .points()
        .iter()
        .map(|p| reach.iter().any(|&j| distance(p, c.layout.center(j)) <= c.layout.radii[j]))
        .collect();
    let (pts, vals) = c.data.clone().into_parts();
    let perturbed: Vec<f64> = vals.unwrap().iter().zip(&near).map(|(v, &n)| if n { *v } else { v + 100.0 }).collect();
    assert!(near.iter().any(|&n| !n));
    let other = PointSet::new(pts, Some(perturbed)).unwrap();
    let target = Points::from_rows(2, [x]).unwrap();
    let (a, _) = pum_evaluate(&c.data, &target, &c.layout, &c.index, &c.specs).unwrap();
    let (b, _) = pum_evaluate(&other, &target, &c.layout, &c.index, &c.specs).unwrap();
    assert_eq!(a[0].to_bits(), b[0].to_bits());
}

#[test]
fn tuned_radii_stay_within_the_search_interval() {
    let train = gen_testdata(TestFunction::F1, 300, 4).unwrap();
    let cfg = PipelineConfig {
        family: KernelFamily::WendlandC4,
        bo: BoConfig { niter: 5, n_candidates: 128, seed: 4, ..Default::default() },
        ..Default::default()
    };
    let r = bo_pum(&train, train.points(), train.values(), &cfg).unwrap();
    for j in 0..r.layout.len() {
        assert!(r.layout.radii[j] >= r.delta_start[j] && r.layout.radii[j] <= 2.0 * r.delta_start[j]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn repeated_fits_are_identical(seed in 0u64..1000) {
        let train = gen_testdata(TestFunction::F1, 200, seed).unwrap();
        let test = gen_testdata(TestFunction::F1, 50, seed + 1).unwrap();
        let cfg = PipelineConfig { bo: BoConfig { niter: 4, n_candidates: 64, seed, ..Default::default() }, ..Default::default() };
        let a = bo_pum(&train, test.points(), None, &cfg).unwrap();
        let b = bo_pum(&train, test.points(), None, &cfg).unwrap();
        prop_assert_eq!(&a.predictions, &b.predictions);
        prop_assert_eq!(&a.layout, &b.layout);
    }
}
