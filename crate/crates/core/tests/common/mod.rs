//! Seeded scenario suites and an independent oracle shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod oracle;

use groupoid_avg::groupoid::{FiniteGroup, FiniteGroupoid, GroupAction, ObjectId};
use groupoid_avg::haar::{normalize_cutoff, CutoffFunction, HaarIntegrator, HaarSystem, NormalizingFunction};
use groupoid_avg::linalg::{FiberMetric, Matrix, VectorBundle};
use groupoid_avg::pseudorep::{near_representation_gate, perturb_representation, PseudoRep};
use groupoid_avg::reps::{action_rep, bundle_rep, pair_rep, random_frames, GroupHom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A groupoid with Haar data, a metric and a genuine representation.
#[derive(Clone, Debug)]
pub struct Setting {
    pub label: String,
    pub groupoid: FiniteGroupoid,
    pub bundle: VectorBundle,
    pub haar: HaarSystem,
    pub normalizer: NormalizingFunction,
    pub metric: FiberMetric,
    pub rep: PseudoRep,
}

impl Setting {
    pub fn integ(&self) -> HaarIntegrator<'_> {
        HaarIntegrator::new(&self.groupoid, &self.haar, &self.normalizer).unwrap()
    }
}

/// A setting plus a perturbation of its representation passing the gate.
#[derive(Clone, Debug)]
pub struct NearCase {
    pub setting: Setting,
    pub lambda: PseudoRep,
    pub magnitude: f64,
}

const CYCLIC_ORDERS: [usize; 4] = [2, 3, 4, 6];

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|m| n % m == 0).collect()
}

fn group_hom(rng: &mut ChaCha8Rng, group: &FiniteGroup, max_dim: usize) -> GroupHom {
    let name = group.name().to_string();
    if let Some(n) = name.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()) {
        let dim = rng.random_range(1..=max_dim);
        GroupHom::cyclic_rotation(n, rng.random_range(0..n), dim).unwrap()
    } else {
        let n: usize = name[1..].parse().unwrap();
        match rng.random_range(0..3) {
            0 => GroupHom::sign(n).unwrap(),
            1 if n <= max_dim => GroupHom::permutation(n).unwrap(),
            _ => GroupHom::trivial(group, rng.random_range(1..=max_dim)),
        }
    }
}

fn haar_for(rng: &mut ChaCha8Rng, g: &FiniteGroupoid) -> HaarSystem {
    if rng.random_bool(0.5) {
        return HaarSystem::counting(g);
    }
    // left invariant iff the weight depends on the source only
    let per_object: Vec<f64> = g.objects().map(|_| rng.random_range(0.5..2.0)).collect();
    HaarSystem::from_weights(g, g.arrows().map(|h| per_object[g.source(h).0]).collect()).unwrap()
}

fn normalizer_for(rng: &mut ChaCha8Rng, g: &FiniteGroupoid, haar: &HaarSystem) -> NormalizingFunction {
    let orbits = g.orbits();
    let sparse = rng.random_bool(1.0 / 3.0);
    let values: Vec<f64> = g
        .objects()
        .map(|x| {
            let first_of_orbit = orbits.orbits[orbits.orbit_of[x.0]][0] == x;
            if sparse && !first_of_orbit {
                0.0
            } else {
                rng.random_range(0.1..1.0)
            }
        })
        .collect();
    let cutoff = CutoffFunction::new(g, values).unwrap();
    normalize_cutoff(g, haar, &cutoff, None).unwrap()
}

fn metric_for(rng: &mut ChaCha8Rng, bundle: &VectorBundle) -> FiberMetric {
    if rng.random_bool(0.5) {
        return FiberMetric::euclidean(bundle);
    }
    let frames = random_frames(bundle, 0.3, rng.random()).unwrap();
    let grams = frames.iter().map(|b| b.transpose().matmul(b)).collect();
    FiberMetric::from_grams(bundle, grams).unwrap()
}

/// One genuine-representation setting; `kind` picks pair, action or
/// bundle groupoids.
pub fn setting(kind: usize, seed: u64) -> Setting {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (label, groupoid, bundle, rep) = match kind % 3 {
        0 => {
            let n = rng.random_range(1..=5);
            let dim = rng.random_range(1..=3);
            let g = FiniteGroupoid::pair(n).unwrap();
            let frames = random_frames(&VectorBundle::constant(&g, dim), 0.3, rng.random()).unwrap();
            let (bundle, rep) = pair_rep(&g, &frames).unwrap();
            (format!("pair(n={n}, dim={dim})"), g, bundle, rep)
        }
        1 => {
            let n = CYCLIC_ORDERS[rng.random_range(0..CYCLIC_ORDERS.len())];
            let ds = divisors(n);
            let m = ds[rng.random_range(0..ds.len())];
            let action = if rng.random_bool(0.8) {
                GroupAction::cyclic_rotation(n, m).unwrap()
            } else {
                GroupAction::trivial(FiniteGroup::cyclic(n).unwrap(), m).unwrap()
            };
            let g = FiniteGroupoid::action(&action).unwrap();
            let hom = group_hom(&mut rng, action.group(), 3);
            let (bundle, rep) = action_rep(&g, &action, &hom).unwrap();
            let frames = random_frames(&bundle, 0.3, rng.random()).unwrap();
            let rep = rep.gauge(&g, &frames).unwrap();
            (format!("action(z{n} on {m}, dim={})", hom.dim()), g, bundle, rep)
        }
        _ => {
            let names = ["z2", "z3", "z4", "s3"];
            let k = rng.random_range(1..=3);
            let groups: Vec<FiniteGroup> =
                (0..k).map(|_| FiniteGroup::by_name(names[rng.random_range(0..names.len())]).unwrap()).collect();
            let g = FiniteGroupoid::group_bundle(&groups).unwrap();
            let homs: Vec<GroupHom> = groups.iter().map(|grp| group_hom(&mut rng, grp, 3)).collect();
            let (bundle, rep) = bundle_rep(&g, &groups, &homs).unwrap();
            let frames = random_frames(&bundle, 0.3, rng.random()).unwrap();
            let rep = rep.gauge(&g, &frames).unwrap();
            let label = groups.iter().map(|grp| grp.name().to_string()).collect::<Vec<_>>().join(",");
            (format!("bundle({label}, dims={:?})", bundle.dims()), g, bundle, rep)
        }
    };
    let haar = haar_for(&mut rng, &groupoid);
    let normalizer = normalizer_for(&mut rng, &groupoid, &haar);
    let metric = metric_for(&mut rng, &bundle);
    Setting { label, groupoid, bundle, haar, normalizer, metric, rep }
}

pub fn genuine_suite(count: usize, seed: u64) -> Vec<Setting> {
    (0..count).map(|i| setting(i, seed.wrapping_mul(1_000_003).wrapping_add(i as u64))).collect()
}

/// Perturbations with magnitude log-uniform in `[1e-3, 3e-2]`, halved until
/// the gate passes under the setting's metric.
pub fn near_suite(count: usize, seed: u64) -> Vec<NearCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let setting = setting(i, rng.random());
            // a groupoid of units only would be left unperturbed
            let has_non_units = setting.groupoid.arrows().any(|a| !setting.groupoid.is_unit(a));
            let keep_units = rng.random_bool(0.3) && has_non_units;
            let mut magnitude = 10f64.powf(rng.random_range(-3.0..-1.5));
            let noise_seed: u64 = rng.random();
            loop {
                let lambda = perturb_representation(
                    &setting.groupoid,
                    &setting.rep,
                    &setting.metric,
                    magnitude,
                    noise_seed,
                    keep_units,
                )
                .unwrap();
                if near_representation_gate(&setting.groupoid, &lambda, &setting.metric).is_near {
                    return NearCase { setting, lambda, magnitude };
                }
                magnitude *= 0.5;
            }
        })
        .collect()
}

/// Invertible pseudo-representations far from any representation.
pub fn rough_suite(count: usize, seed: u64) -> Vec<(Setting, PseudoRep)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let setting = setting(i, rng.random());
            let lambda =
                perturb_representation(&setting.groupoid, &setting.rep, &setting.metric, 0.3, rng.random(), false)
                    .unwrap();
            (setting, lambda)
        })
        .collect()
}

pub fn objects(g: &FiniteGroupoid) -> Vec<ObjectId> {
    g.objects().collect()
}

pub fn identity_frames(bundle: &VectorBundle) -> Vec<Matrix> {
    bundle.dims().iter().map(|&d| Matrix::identity(d)).collect()
}
