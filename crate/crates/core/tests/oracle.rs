mod common;

use groupoid_avg::groupoid::{FiniteGroupoid, ObjectId};
use groupoid_avg::haar::{normalize_cutoff, CutoffFunction, HaarSystem};
use groupoid_avg::io::GroupoidFile;
use groupoid_avg::linalg::{FiberMetric, Matrix, VectorBundle};
use groupoid_avg::pseudorep::{mean_ratio, perturb_representation, PseudoRep};
use groupoid_avg::HaarIntegrator;
use nalgebra::DMatrix;

use common::oracle::{self, bits_equal, from_matrix, Tables};
use common::{genuine_suite, near_suite};

fn eta_rep(eta: f64) -> (FiniteGroupoid, VectorBundle, PseudoRep) {
    let g = FiniteGroupoid::pair(2).unwrap();
    let bundle = VectorBundle::constant(&g, 1);
    let maps = (0..4).map(|a| Matrix::scalar(if a == 3 { 1.0 + eta } else { 1.0 })).collect();
    let rep = PseudoRep::new(&g, &bundle, maps).unwrap();
    (g, bundle, rep)
}

#[test]
fn frozen_eta_mean_ratio() {
    let (g, _, rep) = eta_rep(0.04);
    let haar = HaarSystem::counting(&g);
    let normalizer = normalize_cutoff(&g, &haar, &CutoffFunction::constant(&g, 1.0).unwrap(), None).unwrap();
    let t = Tables::from_file(&GroupoidFile::from_groupoid(&g));
    let maps: Vec<_> = rep.maps().iter().map(from_matrix).collect();
    let ours = oracle::mean_ratio(&t, haar.weights(), normalizer.values(), &maps);
    // units are restored, the cross arrows split the defect
    let frozen = [1.0, 0.980_769_230_769_230_7, 1.02, 1.0];
    for (value, expected) in ours.iter().zip(frozen) {
        assert!((value[0][0] - expected).abs() <= 1e-15, "{value:?} vs {expected}");
    }
    let integ = HaarIntegrator::new(&g, &haar, &normalizer).unwrap();
    let lib = mean_ratio(&integ, &rep).unwrap();
    assert!(lib.maps().iter().zip(&ours).all(|(a, b)| bits_equal(a, b)));
}

#[test]
fn agreement_on_small_groupoids() {
    let mut checked = 0;
    for s in genuine_suite(30, 11) {
        if s.groupoid.n_arrows() > 12 {
            continue;
        }
        let lambda = perturb_representation(&s.groupoid, &s.rep, &s.metric, 0.05, 7, false).unwrap();
        for (k, l) in [&s.rep, &lambda].into_iter().enumerate() {
            oracle::check_agreement(&s, l, k as u64).unwrap_or_else(|e| panic!("{}: {e}", s.label));
            checked += 1;
        }
    }
    for c in near_suite(20, 12).iter().filter(|c| c.setting.groupoid.n_arrows() <= 12) {
        oracle::check_agreement(&c.setting, &c.lambda, 3).unwrap_or_else(|e| panic!("{}: {e}", c.setting.label));
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} cases had ≤ 12 arrows");
}

fn to_dense(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// `‖A‖ = σ_max(L_dstᵀ A L_src⁻ᵀ)` with `G = L Lᵀ`.
fn reference_norm(metric: &FiberMetric, a: &Matrix, src: ObjectId, dst: ObjectId) -> f64 {
    let l_src = to_dense(metric.gram(src)).cholesky().unwrap().l();
    let l_dst = to_dense(metric.gram(dst)).cholesky().unwrap().l();
    let inv_t = l_src.transpose().try_inverse().unwrap();
    let whitened = l_dst.transpose() * to_dense(a) * inv_t;
    whitened.singular_values().max()
}

#[test]
fn operator_norms_match_a_reference_svd() {
    for s in genuine_suite(30, 13) {
        let g = &s.groupoid;
        let lambda = perturb_representation(g, &s.rep, &s.metric, 0.2, 5, false).unwrap();
        for a in g.arrows() {
            let (src, dst) = (g.source(a), g.target(a));
            let ours = s.metric.operator_norm(lambda.map(a), src, dst);
            let reference = reference_norm(&s.metric, lambda.map(a), src, dst);
            assert!((ours - reference).abs() <= 1e-12 * reference.max(1.0), "{}: {ours} vs {reference}", s.label);
        }
    }
}
