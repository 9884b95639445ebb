mod common;

use common::{brute_tl1, valued_cloud as cloud};
use gtv_core::metrics::{self, BayesClassifier, Classifier, ConstantClassifier};
use gtv_core::GroundTruthModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tl1_is_a_metric(seed in any::<u64>(), n in 1usize..=6, dim in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = cloud(&mut rng, n, dim);
        let b = cloud(&mut rng, n, dim);
        let c = cloud(&mut rng, n, dim);
        let d = |x: &(Vec<f64>, Vec<f64>), y: &(Vec<f64>, Vec<f64>)| metrics::tl1_exact(dim, &x.0, &x.1, &y.0, &y.1).unwrap().cost;
        let ab = d(&a, &b);
        prop_assert!((ab - brute_tl1(dim, &a, &b)).abs() <= 1e-10);
        prop_assert!(ab >= 0.0);
        prop_assert!(d(&a, &a).abs() <= 1e-12);
        prop_assert!((ab - d(&b, &a)).abs() <= 1e-10);
        prop_assert!(d(&a, &c) <= ab + d(&b, &c) + 1e-10);
    }

    #[test]
    fn tl1_is_invariant_under_relabeling(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = cloud(&mut rng, n, 2);
        // the same empirical element listed in reverse order
        let pts: Vec<f64> = a.0.chunks(2).rev().flatten().copied().collect();
        let vals: Vec<f64> = a.1.iter().rev().copied().collect();
        prop_assert!(metrics::tl1_exact(2, &a.0, &a.1, &pts, &vals).unwrap().cost <= 1e-12);
    }

    #[test]
    fn proxy_is_nonnegative_and_reduces_to_l1(seed in any::<u64>(), n in 1usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pts, _) = cloud(&mut rng, n, 2);
        let u: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let r: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        let got = metrics::tl1_proxy_at(&pts, 2, &u, &pts, &r).unwrap();
        let l1 = u.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
        prop_assert!(got >= 0.0);
        prop_assert!((got - l1).abs() <= 1e-12);
    }
}

#[test]
fn bayes_risk_ci_coverage() {
    let model = GroundTruthModel::quadrant();
    let target = model.bayes_risk();
    let runs = 60;
    let covered = (0..runs)
        .filter(|&s| {
            let r = metrics::test_risk(&BayesClassifier(&model), &model, 2000, 500 + s).unwrap();
            (r.estimate - target).abs() <= r.ci_halfwidth
        })
        .count();
    // nominal 95%; allow binomial slack for 60 runs
    assert!(covered as f64 >= 0.85 * runs as f64, "coverage {covered}/{runs}");
}

#[test]
fn no_binary_classifier_beats_bayes() {
    let model = GroundTruthModel::quadrant_asymmetric();
    let bayes = model.bayes_risk();
    let symmetric = GroundTruthModel::quadrant();
    let classifiers: Vec<Box<dyn Classifier>> = vec![
        Box::new(ConstantClassifier(0)),
        Box::new(ConstantClassifier(1)),
        Box::new(|x: &[f64]| u8::from(x[0] > 0.3)),
        Box::new(|x: &[f64]| u8::from(x[0] + x[1] > 1.0)),
        Box::new(BayesClassifier(&symmetric)),
    ];
    for (k, c) in classifiers.iter().enumerate() {
        let r = metrics::test_risk(c.as_ref(), &model, 5000, 40 + k as u64).unwrap();
        assert!(r.estimate >= bayes - r.ci_halfwidth, "classifier {k}: {} < {bayes}", r.estimate);
    }
}

#[test]
fn voronoi_reproduces_node_values() {
    let model = GroundTruthModel::quadrant();
    let cloud = model.sample(2000, 4).unwrap();
    let u: Vec<f64> = cloud.labels().iter().map(|&y| f64::from(y)).collect();
    let v = metrics::voronoi_extend(&cloud, &u).unwrap();
    for i in 0..cloud.len() {
        let (j, dist) = v.nearest(cloud.point(i));
        assert_eq!(dist, 0.0);
        assert_eq!(v.classify(cloud.point(i)), cloud.labels()[j]);
    }
    let bayes_values: Vec<f64> = (0..cloud.len()).map(|i| f64::from(model.bayes_classify(cloud.point(i)).unwrap())).collect();
    let vb = metrics::voronoi_extend(&cloud, &bayes_values).unwrap();
    let agree = (0..cloud.len()).filter(|&i| vb.classify(cloud.point(i)) == model.bayes_classify(cloud.point(i)).unwrap()).count();
    assert_eq!(agree, cloud.len());
}

#[test]
fn transport_sup_decays_like_the_matching_rate() {
    let model = GroundTruthModel::constant_mu(2, 0.9).unwrap();
    let ratios: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&res| {
            let n = res * res;
            let cloud = model.sample(n, 5).unwrap();
            let r = metrics::transport_sup_diagnostic(&cloud, &model, res, 5).unwrap();
            let rate = (n as f64).ln().powf(0.75) / (n as f64).sqrt();
            r.sup_displacement / rate
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    assert!(hi / lo < 4.0, "ratios {ratios:?}");
}

#[test]
fn transport_single_point() {
    let model = GroundTruthModel::constant_mu(2, 0.9).unwrap();
    let cloud = model.sample(1, 3).unwrap();
    let r = metrics::transport_sup_diagnostic(&cloud, &model, 1, 0).unwrap();
    let x = cloud.point(0);
    let expected = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
    assert!((r.sup_displacement - expected).abs() < 1e-15);
}
