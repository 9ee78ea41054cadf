//! Invariant fiber metrics by Haar averaging.
//!
//! For a pseudo-representation `λ` and a metric `φ`, the averaged Gram
//! matrix at `x` is
//!
//! ```text
//! Ĝ(x) = Σ_{h ∈ Γ^x} c(sh)·weight(h)·λ_{h⁻¹}ᵀ·G_φ(sh)·λ_{h⁻¹}
//! ```
//!
//! If `λ` is a representation over an invariant set `S` and the support of
//! `c` meets `ΓS` only inside `S`, every `λ_g` with `g ∈ Γ|S` is an isometry
//! for `Ĝ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{ArrowId, FiniteGroupoid, ObjectId};
use crate::haar::HaarIntegrator;
use crate::linalg::{symmetric_eigenvalues, FiberMetric, Matrix, VectorBundle};
use crate::pseudorep::{defects, NearRepReport, PseudoRep};

/// Eigenvalue floor restored off `S` by the convex blend.
pub const EIGENVALUE_FLOOR: f64 = 1e-8;

/// Where positivity of the averaged metric is certified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityScope {
    #[default]
    Subset,
    Saturation,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AverageOptions {
    /// Require `supp c ∩ ΓS ⊂ S`.
    pub check_support: bool,
    pub positivity: PositivityScope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantMetricReport {
    #[serde(skip)]
    pub metric: FiberMetric,
    /// `sup_{g ∈ Γ|S}` of the largest entry of `λ_gᵀ·Ĝ(tg)·λ_g − Ĝ(sg)`.
    pub invariance_defect: f64,
    pub witness: Option<ArrowId>,
    pub min_eigenvalues: Vec<f64>,
    /// Blend weight `(1 − τ)·Ĝ + τ·G_φ` used off `S`.
    pub tau: f64,
    pub subset: Vec<ObjectId>,
}

fn membership(groupoid: &FiniteGroupoid, set: &[ObjectId]) -> Result<Vec<bool>> {
    let mut inside = vec![false; groupoid.n_objects()];
    for &x in set {
        if x.0 >= groupoid.n_objects() {
            return Err(Error::OutOfRange { what: "object", index: x.0, limit: groupoid.n_objects() });
        }
        inside[x.0] = true;
    }
    Ok(inside)
}

fn min_eigenvalue(gram: &Matrix) -> f64 {
    symmetric_eigenvalues(gram).first().copied().unwrap_or(f64::INFINITY)
}

/// The raw Haar average `Ĝ(x)` at every object, symmetrized after summation.
pub fn averaged_grams(integ: &HaarIntegrator<'_>, rep: &PseudoRep, metric: &FiberMetric) -> Result<Vec<Matrix>> {
    let groupoid = integ.groupoid();
    groupoid
        .objects()
        .map(|x| {
            let mut gram = integ.fiber_sum(x, |h| {
                let back = rep.map(groupoid.inverse(h));
                back.transpose().matmul(metric.gram(groupoid.source(h))).matmul(back)
            })?;
            gram.symmetrize();
            Ok(gram)
        })
        .collect()
}

/// Averages `metric` along `rep` and certifies invariance and positivity
/// on `subset`.
///
/// Objects outside `subset` whose average is not positive enough are
/// blended back towards `metric` with the smallest `τ ∈ {0} ∪ {2^{-k}}`
/// restoring [`EIGENVALUE_FLOOR`].
pub fn average_metric(
    integ: &HaarIntegrator<'_>,
    bundle: &VectorBundle,
    rep: &PseudoRep,
    metric: &FiberMetric,
    subset: &[ObjectId],
    options: AverageOptions,
) -> Result<InvariantMetricReport> {
    let groupoid = integ.groupoid();
    let inside = membership(groupoid, subset)?;
    let saturation = groupoid.saturation(subset)?;
    if options.check_support {
        let outside: Vec<usize> = integ
            .normalizer()
            .support()
            .into_iter()
            .filter(|x| saturation.contains(x) && !inside[x.0])
            .map(|x| x.0)
            .collect();
        if !outside.is_empty() {
            return Err(Error::SupportOutsideSet { support: outside });
        }
    }
    let averaged = averaged_grams(integ, rep, metric)?;

    let certified: Vec<ObjectId> = match options.positivity {
        PositivityScope::Subset => subset.to_vec(),
        PositivityScope::Saturation => saturation,
    };
    for &x in &certified {
        let min = min_eigenvalue(&averaged[x.0]);
        if !(min > 0.0) {
            return Err(Error::AveragedMetricNotPd { object: x, min_eigenvalue: min });
        }
    }

    let blend = |tau: f64| -> Vec<Matrix> {
        groupoid
            .objects()
            .map(|x| {
                if inside[x.0] || tau == 0.0 {
                    averaged[x.0].clone()
                } else {
                    let mut g = averaged[x.0].scale(1.0 - tau);
                    g.add_scaled(tau, metric.gram(x));
                    g.symmetrize();
                    g
                }
            })
            .collect()
    };
    let off_ok = |grams: &[Matrix]| {
        groupoid.objects().filter(|x| !inside[x.0]).all(|x| min_eigenvalue(&grams[x.0]) >= EIGENVALUE_FLOOR)
    };
    let mut tau = 0.0;
    let mut grams = blend(0.0);
    if !off_ok(&grams) {
        for k in (0..=52).rev() {
            tau = (-(k as f64)).exp2();
            grams = blend(tau);
            if off_ok(&grams) {
                break;
            }
        }
    }
    let min_eigenvalues: Vec<f64> = grams.iter().map(min_eigenvalue).collect();
    let averaged_metric = FiberMetric::from_grams(bundle, grams)?;
    let check = check_isometry(groupoid, rep, &averaged_metric, subset, f64::INFINITY)?;
    Ok(InvariantMetricReport {
        metric: averaged_metric,
        invariance_defect: check.defect,
        witness: check.witness,
        min_eigenvalues,
        tau,
        subset: subset.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryCheck {
    pub defect: f64,
    pub witness: Option<ArrowId>,
    pub holds: bool,
}

/// Largest entry of `λ_gᵀ·G(tg)·λ_g − G(sg)` over `g ∈ Γ|S`.
pub fn check_isometry(
    groupoid: &FiniteGroupoid,
    rep: &PseudoRep,
    metric: &FiberMetric,
    subset: &[ObjectId],
    tol: f64,
) -> Result<IsometryCheck> {
    let inside = membership(groupoid, subset)?;
    let mut defect = 0.0;
    let mut witness = None;
    for g in groupoid.arrows() {
        let (s, t) = (groupoid.source(g), groupoid.target(g));
        if !(inside[s.0] && inside[t.0]) {
            continue;
        }
        let l = rep.map(g);
        let pulled = l.transpose().matmul(metric.gram(t)).matmul(l);
        let d = (&pulled - metric.gram(s)).max_abs();
        if d > defect || witness.is_none() {
            defect = d;
            witness = Some(g);
        }
    }
    Ok(IsometryCheck { defect, witness, holds: defect <= tol })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricCandidate {
    Supplied,
    Euclidean,
    OrbitAveraged,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateSearch {
    pub candidate: MetricCandidate,
    pub report: NearRepReport,
    #[serde(skip)]
    pub metric: FiberMetric,
    /// Gate outcome for every candidate tried, in order.
    pub tried: Vec<(MetricCandidate, NearRepReport)>,
}

/// Tries the near-representation gate under the supplied metric, the
/// Euclidean one, and the average of the supplied metric along `rep` over
/// the whole groupoid. Returns the first candidate that passes, or the one
/// with the smallest `r/threshold` if none does.
pub fn search_gate_metric(
    integ: &HaarIntegrator<'_>,
    bundle: &VectorBundle,
    rep: &PseudoRep,
    supplied: &FiberMetric,
) -> GateSearch {
    let groupoid = integ.groupoid();
    let mut candidates = vec![
        (MetricCandidate::Supplied, supplied.clone()),
        (MetricCandidate::Euclidean, FiberMetric::euclidean(bundle)),
    ];
    let all: Vec<ObjectId> = groupoid.objects().collect();
    if let Ok(report) = average_metric(integ, bundle, rep, supplied, &all, AverageOptions::default()) {
        candidates.push((MetricCandidate::OrbitAveraged, report.metric));
    }
    let mut tried = Vec::new();
    let mut best: Option<(f64, usize)> = None;
    for (i, (kind, metric)) in candidates.iter().enumerate() {
        let report = NearRepReport::from_defects(&defects(groupoid, rep, metric));
        let ratio = report.r / report.threshold;
        tried.push((*kind, report.clone()));
        if report.is_near {
            best = Some((ratio, i));
            break;
        }
        if best.is_none_or(|(r, _)| ratio < r) {
            best = Some((ratio, i));
        }
    }
    let (_, i) = best.expect("at least one candidate");
    let (candidate, metric) = candidates.swap_remove(i);
    GateSearch { candidate, report: tried[i].1.clone(), metric, tried }
}
