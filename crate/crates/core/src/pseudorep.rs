//! Pseudo-representations and recursive averaging.
//!
//! A pseudo-representation assigns to every arrow `g` a linear map
//! `λ_g: E_{sg} → E_{tg}` with no composition law assumed. Its mean ratio
//!
//! ```text
//! λ̂_g = Σ_{h ∈ Γ^{sg}} c(s h)·weight(h)·λ_{gh}·λ_h⁻¹
//! ```
//!
//! fixes representations and, on near representations, squares the
//! multiplicativity defect up to a constant. [`iterate_average`] runs the
//! recursion and records the quantities needed to certify that behaviour.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{ArrowId, FiniteGroupoid, ObjectId, Restriction};
use crate::haar::HaarIntegrator;
use crate::linalg::{self, FiberMetric, Matrix, VectorBundle};

/// Default stopping threshold on `r`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 60;
/// Relative slack on every certificate inequality.
pub const CERTIFICATE_REL_SLACK: f64 = 1e-9;
/// Absolute rounding floor on certificate inequalities, scaled by `max(1, b₀²)`.
///
/// Sup norms of products of O(b) matrices carry absolute rounding of a few
/// ulps times `b²`; once the true defect drops below that, the doubly
/// exponential bound can sit under the computed value.
pub const ROUNDING_FLOOR: f64 = 1e-13;
/// Largest `r` accepted as an exact representation.
pub const REPRESENTATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoRep {
    maps: Vec<Matrix>,
}

impl PseudoRep {
    /// Checks that `maps[g]` is `dim(t g) × dim(s g)` for every arrow.
    pub fn new(groupoid: &FiniteGroupoid, bundle: &VectorBundle, maps: Vec<Matrix>) -> Result<Self> {
        if maps.len() != groupoid.n_arrows() {
            return Err(Error::TableLength { table: "rep matrices", found: maps.len(), expected: groupoid.n_arrows() });
        }
        for g in groupoid.arrows() {
            let expected = (bundle.dim(groupoid.target(g)), bundle.dim(groupoid.source(g)));
            if maps[g.0].shape() != expected {
                return Err(Error::Shape(format!(
                    "map at {g} must be {}x{}, got {}x{}",
                    expected.0,
                    expected.1,
                    maps[g.0].rows(),
                    maps[g.0].cols()
                )));
            }
        }
        Ok(Self { maps })
    }

    /// The trivial representation `λ_g = id`.
    pub fn identity(groupoid: &FiniteGroupoid, bundle: &VectorBundle) -> Self {
        Self { maps: groupoid.arrows().map(|g| Matrix::identity(bundle.dim(groupoid.source(g)))).collect() }
    }

    pub fn map(&self, g: ArrowId) -> &Matrix {
        &self.maps[g.0]
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn into_maps(self) -> Vec<Matrix> {
        self.maps
    }

    pub fn n_arrows(&self) -> usize {
        self.maps.len()
    }

    /// Change of frame `λ'_g = A_{tg}·λ_g·A_{sg}⁻¹`; carries representations
    /// to representations.
    pub fn gauge(&self, groupoid: &FiniteGroupoid, frames: &[Matrix]) -> Result<Self> {
        if frames.len() != groupoid.n_objects() {
            return Err(Error::TableLength { table: "frames", found: frames.len(), expected: groupoid.n_objects() });
        }
        let inverses = frames.iter().map(|a| linalg::invert(a).map(|(inv, _)| inv)).collect::<Result<Vec<_>>>()?;
        let maps = groupoid
            .arrows()
            .map(|g| frames[groupoid.target(g).0].matmul(self.map(g)).matmul(&inverses[groupoid.source(g).0]))
            .collect();
        Ok(Self { maps })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    /// `sup_g ‖λ_g‖`
    pub b: f64,
    /// `r_unit_part + r_mult_part`
    pub r: f64,
    /// `sup_x ‖id − λ_{1x}‖`
    pub r_unit_part: f64,
    /// `sup_{(g₁,g₂)} ‖λ_{g₁g₂} − λ_{g₁}λ_{g₂}‖`
    pub r_mult_part: f64,
    pub b_witness: ArrowId,
    pub unit_witness: ObjectId,
    pub mult_witness: Option<(ArrowId, ArrowId)>,
}

/// The functionals `b(λ)` and `r(λ)` with the arrows attaining each sup.
/// Ties keep the first maximizer in enumeration order.
pub fn defects(groupoid: &FiniteGroupoid, rep: &PseudoRep, metric: &FiberMetric) -> DefectReport {
    let mut b = 0.0;
    let mut b_witness = ArrowId(0);
    for g in groupoid.arrows() {
        let n = metric.operator_norm(rep.map(g), groupoid.source(g), groupoid.target(g));
        if n > b || g.0 == 0 {
            b = n;
            b_witness = g;
        }
    }
    let mut r_unit_part = 0.0;
    let mut unit_witness = ObjectId(0);
    for x in groupoid.objects() {
        let u = rep.map(groupoid.unit(x));
        let n = metric.endo_norm(&(&Matrix::identity(u.rows()) - u), x);
        if n > r_unit_part {
            r_unit_part = n;
            unit_witness = x;
        }
    }
    let mut r_mult_part = 0.0;
    let mut mult_witness = None;
    for (g1, g2) in groupoid.iter_composable_pairs() {
        let diff = rep.map(groupoid.mul(g1, g2)) - &rep.map(g1).matmul(rep.map(g2));
        let n = metric.operator_norm(&diff, groupoid.source(g2), groupoid.target(g1));
        if n > r_mult_part || mult_witness.is_none() {
            r_mult_part = n;
            mult_witness = Some((g1, g2));
        }
    }
    DefectReport { b, r: r_unit_part + r_mult_part, r_unit_part, r_mult_part, b_witness, unit_witness, mult_witness }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearRepReport {
    pub b: f64,
    pub r: f64,
    /// `min{1/4, 1/(9b²)}`
    pub threshold: f64,
    pub is_near: bool,
}

impl NearRepReport {
    pub fn from_defects(d: &DefectReport) -> Self {
        let threshold = near_threshold(d.b);
        Self { b: d.b, r: d.r, threshold, is_near: d.r <= threshold }
    }
}

pub fn near_threshold(b: f64) -> f64 {
    0.25_f64.min(1.0 / (9.0 * b * b))
}

/// Tests `r ≤ min{1/4, 1/(9b²)}` for the supplied metric only.
pub fn near_representation_gate(groupoid: &FiniteGroupoid, rep: &PseudoRep, metric: &FiberMetric) -> NearRepReport {
    NearRepReport::from_defects(&defects(groupoid, rep, metric))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    /// `(λ_g)⁻¹: E_{tg} → E_{sg}` per arrow.
    pub inverses: Vec<Matrix>,
    pub max_inverse_norm: f64,
    /// `b/(1 − r)` when `r < 1`.
    pub bound: Option<f64>,
    pub bound_holds: Option<bool>,
}

pub(crate) fn invert_maps(rep: &PseudoRep) -> Result<Vec<Matrix>> {
    rep.maps()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            linalg::invert(m).map(|(inv, _)| inv).map_err(|e| match e {
                Error::SingularMatrix(condition) => Error::Singular { arrow: ArrowId(i), condition },
                other => other,
            })
        })
        .collect()
}

/// Arrow-wise inverse. When `r(λ) < 1`, also checks `‖λ_g⁻¹‖ ≤ b/(1 − r)`.
pub fn invert(groupoid: &FiniteGroupoid, rep: &PseudoRep, metric: &FiberMetric) -> Result<Inversion> {
    let inverses = invert_maps(rep)?;
    let max_inverse_norm = groupoid
        .arrows()
        .map(|g| metric.operator_norm(&inverses[g.0], groupoid.target(g), groupoid.source(g)))
        .fold(0.0, f64::max);
    let d = defects(groupoid, rep, metric);
    let (bound, bound_holds) = if d.r < 1.0 {
        let bound = d.b / (1.0 - d.r);
        (Some(bound), Some(max_inverse_norm <= bound * (1.0 + CERTIFICATE_REL_SLACK)))
    } else {
        (None, None)
    };
    Ok(Inversion { inverses, max_inverse_norm, bound, bound_holds })
}

/// The mean ratio `λ̂`.
pub fn mean_ratio(integ: &HaarIntegrator<'_>, rep: &PseudoRep) -> Result<PseudoRep> {
    let inverses = invert_maps(rep)?;
    mean_ratio_with_inverses(integ, rep, &inverses)
}

pub(crate) fn mean_ratio_with_inverses(
    integ: &HaarIntegrator<'_>,
    rep: &PseudoRep,
    inverses: &[Matrix],
) -> Result<PseudoRep> {
    let groupoid = integ.groupoid();
    let maps = groupoid
        .arrows()
        .map(|g| integ.fiber_sum(groupoid.source(g), |h| rep.map(groupoid.mul(g, h)).matmul(&inverses[h.0])))
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoRep { maps })
}

/// `sup_g ‖λ_g − ρ_g‖`
pub fn sup_distance(groupoid: &FiniteGroupoid, a: &PseudoRep, b: &PseudoRep, metric: &FiberMetric) -> Result<f64> {
    if a.n_arrows() != groupoid.n_arrows() || b.n_arrows() != groupoid.n_arrows() {
        return Err(Error::Shape("pseudo-representations live on different groupoids".into()));
    }
    let mut sup = 0.0_f64;
    for g in groupoid.arrows() {
        if a.map(g).shape() != b.map(g).shape() {
            return Err(Error::Shape(format!("maps at {g} have different shapes")));
        }
        sup = sup.max(metric.operator_norm(&(a.map(g) - b.map(g)), groupoid.source(g), groupoid.target(g)));
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Run even when the near-representation gate fails; no certificate is
    /// claimed for such runs.
    pub force: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, force: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub i: usize,
    pub b: f64,
    pub r: f64,
    /// `sup_g ‖λ̂^{i+1}_g − λ̂^i_g‖`
    pub step: f64,
    /// `2(b_i/(1 − r_i))²r_i² − r_{i+1}`
    pub quad_slack: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterateDefects {
    pub b: f64,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    /// Defects of every iterate, including the last one (which has no row).
    pub iterates: Vec<IterateDefects>,
    /// `6·b₀²·r₀`
    pub epsilon: f64,
    pub b0: f64,
    pub r0: f64,
    pub terminated: Termination,
    /// Whether the run started from a near representation, i.e. whether the
    /// certificates are claimed.
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// `r_{i+1} ≤ 2(b_i/(1 − r_i))²r_i²`
    QuadraticDefect,
    /// `b_{i+1} ≤ b_i/(1 − r_i)`
    NormGrowth,
    /// `b_{i+1} ≤ (4/3)b_i`
    NormGrowthSharp,
    /// `r_{i+1} ≤ r_i/2`
    DefectHalving,
    /// `r_i ≤ ε^{2^i}/(6b₀²)`
    DoublyExponential,
    /// `b_i/(1 − r_i) ≤ √3·b₀`
    NormEnvelope,
    /// `step_i ≤ b_i·r_i/(1 − r_i)`
    StepBound,
    /// `quad_slack_i ≥ −1e-9·max(1, r_{i+1})`
    QuadSlackFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub kind: CertificateKind,
    /// Trace row (or iterate index) the inequality refers to.
    pub row: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ConvergenceTrace {
    /// Absolute floor added to every certificate's right-hand side.
    pub fn rounding_floor(&self) -> f64 {
        ROUNDING_FLOOR * self.b0.max(1.0).powi(2)
    }

    /// `ε^{2^i}/(6b₀²)`, computed by repeated squaring.
    pub fn doubly_exponential_bound(&self, i: usize) -> f64 {
        let mut e = self.epsilon;
        for _ in 0..i {
            e *= e;
        }
        e / (6.0 * self.b0 * self.b0)
    }

    /// Evaluates every certificate inequality along the trace.
    pub fn certificates(&self) -> Vec<CertificateCheck> {
        let floor = self.rounding_floor();
        let check = |kind, row, lhs: f64, rhs: f64| CertificateCheck {
            kind,
            row,
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + CERTIFICATE_REL_SLACK) + floor,
        };
        let mut out = Vec::new();
        let sqrt3_b0 = 3.0_f64.sqrt() * self.b0;
        for (i, it) in self.iterates.iter().enumerate() {
            if self.r0 > 0.0 {
                out.push(check(CertificateKind::DoublyExponential, i, it.r, self.doubly_exponential_bound(i)));
            }
            out.push(check(CertificateKind::NormEnvelope, i, it.b / (1.0 - it.r), sqrt3_b0));
        }
        for row in &self.rows {
            let i = row.i;
            let next = self.iterates[i + 1];
            let growth = row.b / (1.0 - row.r);
            out.push(check(CertificateKind::QuadraticDefect, i, next.r, 2.0 * growth * growth * row.r * row.r));
            out.push(check(CertificateKind::NormGrowth, i, next.b, growth));
            out.push(check(CertificateKind::NormGrowthSharp, i, next.b, 4.0 / 3.0 * row.b));
            out.push(check(CertificateKind::DefectHalving, i, next.r, 0.5 * row.r));
            out.push(check(CertificateKind::StepBound, i, row.step, row.b * row.r / (1.0 - row.r)));
            let floor_rhs = -1e-9 * next.r.max(1.0);
            out.push(CertificateCheck {
                kind: CertificateKind::QuadSlackFloor,
                row: i,
                lhs: floor_rhs,
                rhs: row.quad_slack,
                holds: row.quad_slack >= floor_rhs,
            });
        }
        out
    }

    pub fn all_certificates_hold(&self) -> bool {
        self.certificates().iter().all(|c| c.holds)
    }

    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn final_defects(&self) -> IterateDefects {
        *self.iterates.last().expect("trace always records the starting iterate")
    }
}

/// Recursive averaging `λ̂⁰ = λ`, `λ̂^{i+1} = mean_ratio(λ̂^i)` until
/// `r_i ≤ tol` or `max_iter` steps.
///
/// Refuses inputs failing the near-representation gate unless
/// `options.force` is set. On forced runs a singular iterate, a non-finite
/// defect, or three consecutive increases of `r` end the run as diverged.
pub fn iterate_average(
    integ: &HaarIntegrator<'_>,
    rep: &PseudoRep,
    metric: &FiberMetric,
    options: IterationOptions,
) -> Result<(PseudoRep, ConvergenceTrace)> {
    let groupoid = integ.groupoid();
    let first = defects(groupoid, rep, metric);
    let gate = NearRepReport::from_defects(&first);
    if !gate.is_near && !options.force {
        return Err(Error::GateRefused { b: gate.b, r: gate.r, threshold: gate.threshold });
    }
    let (b0, r0) = (first.b, first.r);
    let mut trace = ConvergenceTrace {
        rows: Vec::new(),
        iterates: vec![IterateDefects { b: b0, r: r0 }],
        epsilon: 6.0 * b0 * b0 * r0,
        b0,
        r0,
        terminated: Termination::MaxIter,
        certified: gate.is_near,
    };
    let mut current = rep.clone();
    let mut d = IterateDefects { b: b0, r: r0 };
    let mut increases = 0;
    let mut i = 0;
    loop {
        if d.r <= options.tol {
            trace.terminated = Termination::Converged;
            break;
        }
        if i == options.max_iter {
            trace.terminated = Termination::MaxIter;
            break;
        }
        let next = match mean_ratio(integ, &current) {
            Ok(next) => next,
            Err(_) if options.force => {
                trace.terminated = Termination::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let step = sup_distance(groupoid, &next, &current, metric)?;
        let nd = defects(groupoid, &next, metric);
        let growth = d.b / (1.0 - d.r);
        trace.rows.push(TraceRow { i, b: d.b, r: d.r, step, quad_slack: 2.0 * growth * growth * d.r * d.r - nd.r });
        increases = if nd.r > d.r { increases + 1 } else { 0 };
        current = next;
        d = IterateDefects { b: nd.b, r: nd.r };
        trace.iterates.push(d);
        i += 1;
        if !d.r.is_finite() || !d.b.is_finite() || (options.force && increases >= 3) {
            trace.terminated = Termination::Diverged;
            break;
        }
    }
    Ok((current, trace))
}

/// `λ_g = ρ_g + magnitude·N_g` with `N_g` uniform in `[−1, 1]`, drawn arrow
/// by arrow in ascending order (row-major within a matrix) from a ChaCha8
/// stream seeded with `seed`. With `keep_units`, unit arrows are left exact
/// and consume no draws.
pub fn perturb_representation(
    groupoid: &FiniteGroupoid,
    rep: &PseudoRep,
    metric: &FiberMetric,
    magnitude: f64,
    seed: u64,
    keep_units: bool,
) -> Result<PseudoRep> {
    let d = defects(groupoid, rep, metric);
    if d.r > REPRESENTATION_TOL {
        return Err(Error::Precondition(format!("base is not a representation (r = {:e})", d.r)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = groupoid
        .arrows()
        .map(|g| {
            let base = rep.map(g);
            if keep_units && groupoid.is_unit(g) {
                return base.clone();
            }
            let noise = Matrix::from_fn(base.rows(), base.cols(), |_, _| rng.random_range(-1.0..=1.0));
            let mut out = base.clone();
            out.add_scaled(magnitude, &noise);
            out
        })
        .collect();
    Ok(PseudoRep { maps })
}

/// Restriction of `λ` to `Γ|S`.
pub fn restrict_rep(rep: &PseudoRep, restriction: &Restriction) -> PseudoRep {
    PseudoRep { maps: restriction.arrows.iter().map(|&g| rep.map(g).clone()).collect() }
}

/// Unit and multiplicative defects of `λ` over `Γ|S`, as `(unit, mult)` sups.
pub fn defects_over(groupoid: &FiniteGroupoid, rep: &PseudoRep, set: &[ObjectId], metric: &FiberMetric) -> (f64, f64) {
    let mut inside = vec![false; groupoid.n_objects()];
    for x in set {
        inside[x.0] = true;
    }
    let in_restriction = |g: ArrowId| inside[groupoid.source(g).0] && inside[groupoid.target(g).0];
    let mut unit = 0.0_f64;
    for &x in set {
        let u = rep.map(groupoid.unit(x));
        unit = unit.max(metric.endo_norm(&(&Matrix::identity(u.rows()) - u), x));
    }
    let mut mult = 0.0_f64;
    for (g1, g2) in groupoid.iter_composable_pairs() {
        if !(in_restriction(g1) && in_restriction(g2)) {
            continue;
        }
        let diff = rep.map(groupoid.mul(g1, g2)) - &rep.map(g1).matmul(rep.map(g2));
        mult = mult.max(metric.operator_norm(&diff, groupoid.source(g2), groupoid.target(g1)));
    }
    (unit, mult)
}

/// Whether `λ` is unital on `S` and multiplicative on `Γ|S`, to `tol`.
pub fn is_representation_over(
    groupoid: &FiniteGroupoid,
    rep: &PseudoRep,
    set: &[ObjectId],
    metric: &FiberMetric,
    tol: f64,
) -> bool {
    let (unit, mult) = defects_over(groupoid, rep, set, metric);
    unit <= tol && mult <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroup;
    use crate::haar::{HaarSystem, NormalizingFunction};

    /// Rank-1 scalars on the pair groupoid over two objects; `a₁₁ = 1 + η`.
    fn eta_family(eta: f64) -> (FiniteGroupoid, VectorBundle, PseudoRep) {
        let g = FiniteGroupoid::pair(2).unwrap();
        let bundle = VectorBundle::constant(&g, 1);
        // indices: (0,0)=0, (0,1)=1, (1,0)=2, (1,1)=3
        let maps = vec![1.0, 1.0, 1.0, 1.0 + eta].into_iter().map(Matrix::scalar).collect();
        let rep = PseudoRep::new(&g, &bundle, maps).unwrap();
        (g, bundle, rep)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn defects_of_eta_family() {
        let (g, bundle, rep) = eta_family(0.0);
        let metric = FiberMetric::euclidean(&bundle);
        let d = defects(&g, &rep, &metric);
        assert_eq!((d.b, d.r), (1.0, 0.0));

        let (g, _, rep) = eta_family(0.04);
        let d = defects(&g, &rep, &metric);
        assert!(close(d.b, 1.04, 1e-15));
        assert!(close(d.r_unit_part, 0.04, 1e-15));
        assert!(close(d.r_mult_part, 0.04 * 1.04, 1e-15));
        assert!(close(d.r, 0.0816, 1e-15));
        assert_eq!(d.unit_witness, ObjectId(1));
        assert_eq!(d.mult_witness, Some((ArrowId(3), ArrowId(3))));
        assert_eq!(d.b_witness, ArrowId(3));
    }

    #[test]
    fn gate_examples() {
        let (g, bundle, rep) = eta_family(0.04);
        let metric = FiberMetric::euclidean(&bundle);
        let gate = near_representation_gate(&g, &rep, &metric);
        assert!(close(gate.threshold, 1.0 / (9.0 * 1.04 * 1.04), 1e-15));
        assert!(close(gate.threshold, 0.102_728_468, 1e-9));
        assert!(gate.is_near);

        let (g, _, rep) = eta_family(0.1);
        let gate = near_representation_gate(&g, &rep, &metric);
        assert!(close(gate.r, 0.21, 1e-14));
        assert!(close(gate.threshold, 1.0 / (9.0 * 1.21), 1e-15));
        assert!(!gate.is_near);

        let id = PseudoRep::identity(&g, &bundle);
        assert!(near_representation_gate(&g, &id, &metric).is_near);
    }

    #[test]
    fn inversion_examples() {
        let (g, bundle, rep) = eta_family(0.04);
        let metric = FiberMetric::euclidean(&bundle);
        let inv = invert(&g, &rep, &metric).unwrap();
        assert!(close(inv.inverses[3][(0, 0)], 1.0 / 1.04, 1e-16));
        assert!(close(inv.bound.unwrap(), 1.04 / (1.0 - 0.0816), 1e-14));
        assert_eq!(inv.bound_holds, Some(true));

        let id = PseudoRep::identity(&g, &bundle);
        assert_eq!(invert(&g, &id, &metric).unwrap().inverses, id.maps().to_vec());

        let mut maps = rep.into_maps();
        maps[2] = Matrix::scalar(0.0);
        let singular = PseudoRep::new(&g, &bundle, maps).unwrap();
        match invert(&g, &singular, &metric) {
            Err(Error::Singular { arrow, .. }) => assert_eq!(arrow, ArrowId(2)),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn mean_ratio_of_eta_family() {
        let (g, bundle, rep) = eta_family(0.04);
        let mu = HaarSystem::counting(&g);
        let c = NormalizingFunction::new(&g, &mu, vec![0.5, 0.5]).unwrap();
        let integ = HaarIntegrator::new(&g, &mu, &c).unwrap();
        let hat = mean_ratio(&integ, &rep).unwrap();
        assert!(close(hat.map(ArrowId(2))[(0, 0)], 1.02, 1e-15));
        assert!(close(hat.map(ArrowId(1))[(0, 0)], 0.5 * (1.0 + 1.0 / 1.04), 1e-15));
        assert!(close(hat.map(ArrowId(1))[(0, 0)], 0.980_769, 1e-6));
        assert_eq!(hat.map(ArrowId(0))[(0, 0)], 1.0);
        assert_eq!(hat.map(ArrowId(3))[(0, 0)], 1.0);

        let metric = FiberMetric::euclidean(&bundle);
        let d1 = defects(&g, &hat, &metric);
        // |λ̂_(1,0)·λ̂_(0,1) − 1| = 0.0004/1.04
        assert!(close(d1.r, 0.0004 / 1.04, 1e-15));
        assert!(d1.r <= 0.5 * 0.0816);
    }

    #[test]
    fn representation_is_fixed() {
        let g = FiniteGroupoid::pair(3).unwrap();
        let bundle = VectorBundle::constant(&g, 2);
        let frames = vec![
            Matrix::from_row_major(2, 2, vec![1.0, 0.5, 0.0, 2.0]).unwrap(),
            Matrix::from_row_major(2, 2, vec![0.0, 1.0, -1.0, 0.3]).unwrap(),
            Matrix::identity(2),
        ];
        let rep = PseudoRep::identity(&g, &bundle).gauge(&g, &frames).unwrap();
        let mu = HaarSystem::counting(&g);
        let c = NormalizingFunction::new(&g, &mu, vec![1.0 / 3.0; 3]).unwrap();
        let integ = HaarIntegrator::new(&g, &mu, &c).unwrap();
        let hat = mean_ratio(&integ, &rep).unwrap();
        let metric = FiberMetric::euclidean(&bundle);
        assert!(sup_distance(&g, &hat, &rep, &metric).unwrap() <= 1e-12);
    }

    #[test]
    fn iteration_converges_fast_on_eta_family() {
        let (g, bundle, rep) = eta_family(0.04);
        let metric = FiberMetric::euclidean(&bundle);
        let mu = HaarSystem::counting(&g);
        let c = NormalizingFunction::new(&g, &mu, vec![0.5, 0.5]).unwrap();
        let integ = HaarIntegrator::new(&g, &mu, &c).unwrap();
        let (limit, trace) = iterate_average(&integ, &rep, &metric, IterationOptions::default()).unwrap();
        assert_eq!(trace.terminated, Termination::Converged);
        assert!(trace.iterations() <= 6);
        assert!(close(trace.epsilon, 6.0 * 1.04 * 1.04 * 0.0816, 1e-14));
        assert!(trace.certified && trace.all_certificates_hold());
        assert!(defects(&g, &limit, &metric).r <= 1e-10);
        let dist = sup_distance(&g, &limit, &rep, &metric).unwrap();
        assert!(dist <= 2.0 * 3.0_f64.sqrt() * trace.b0 * trace.r0);
    }

    #[test]
    fn iteration_fixed_point_needs_no_steps() {
        let (g, bundle, rep) = eta_family(0.0);
        let metric = FiberMetric::euclidean(&bundle);
        let mu = HaarSystem::counting(&g);
        let c = NormalizingFunction::new(&g, &mu, vec![0.5, 0.5]).unwrap();
        let integ = HaarIntegrator::new(&g, &mu, &c).unwrap();
        let opts = IterationOptions { tol: 1e-12, ..Default::default() };
        let (limit, trace) = iterate_average(&integ, &rep, &metric, opts).unwrap();
        assert_eq!(trace.iterations(), 0);
        assert_eq!(limit, rep);
        assert_eq!(trace.terminated, Termination::Converged);
    }

    #[test]
    fn gate_refusal_and_force() {
        let (g, bundle, rep) = eta_family(0.1);
        let metric = FiberMetric::euclidean(&bundle);
        let mu = HaarSystem::counting(&g);
        let c = NormalizingFunction::new(&g, &mu, vec![0.5, 0.5]).unwrap();
        let integ = HaarIntegrator::new(&g, &mu, &c).unwrap();
        assert!(matches!(
            iterate_average(&integ, &rep, &metric, IterationOptions::default()),
            Err(Error::GateRefused { .. })
        ));
        let opts = IterationOptions { force: true, ..Default::default() };
        let (_, trace) = iterate_average(&integ, &rep, &metric, opts).unwrap();
        assert!(!trace.certified);
    }

    #[test]
    fn sup_distance_examples() {
        let (g, bundle, rep) = eta_family(0.04);
        let metric = FiberMetric::euclidean(&bundle);
        assert_eq!(sup_distance(&g, &rep, &rep, &metric).unwrap(), 0.0);
        let one = PseudoRep::identity(&g, &bundle);
        assert!(close(sup_distance(&g, &rep, &one, &metric).unwrap(), 0.04, 1e-15));
    }

    #[test]
    fn perturbation_is_deterministic() {
        let g = FiniteGroupoid::pair(3).unwrap();
        let bundle = VectorBundle::constant(&g, 2);
        let metric = FiberMetric::euclidean(&bundle);
        let rho = PseudoRep::identity(&g, &bundle);
        assert_eq!(perturb_representation(&g, &rho, &metric, 0.0, 7, false).unwrap(), rho);
        let a = perturb_representation(&g, &rho, &metric, 0.01, 7, false).unwrap();
        let b = perturb_representation(&g, &rho, &metric, 0.01, 7, false).unwrap();
        assert_eq!(a, b);
        let r = defects(&g, &a, &metric).r;
        assert!(r > 0.0 && r <= 0.1, "r = {r}");
        let kept = perturb_representation(&g, &rho, &metric, 0.01, 7, true).unwrap();
        assert!(g.objects().all(|x| kept.map(g.unit(x)) == &Matrix::identity(2)));
        assert!(perturb_representation(&g, &a, &metric, 0.01, 7, false).is_err());
    }

    #[test]
    fn representation_over_subsets() {
        let groups = [FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(3).unwrap()];
        let g = FiniteGroupoid::group_bundle(&groups).unwrap();
        let bundle = VectorBundle::constant(&g, 1);
        let metric = FiberMetric::euclidean(&bundle);
        // sign character on object 0, unit broken on object 1 (arrow 2)
        let maps = [1.0, -1.0, 2.0, 1.0, 1.0].into_iter().map(Matrix::scalar).collect();
        let rep = PseudoRep::new(&g, &bundle, maps).unwrap();
        assert!(is_representation_over(&g, &rep, &[ObjectId(0)], &metric, 1e-12));
        assert!(!is_representation_over(&g, &rep, &[ObjectId(0), ObjectId(1)], &metric, 1e-12));
        assert!(is_representation_over(&g, &rep, &[], &metric, 1e-12));

        let restriction = g.restrict(&[ObjectId(0)], false).unwrap();
        let sub = restrict_rep(&rep, &restriction);
        assert_eq!(
            defects(
                &restriction.groupoid,
                &sub,
                &FiberMetric::euclidean(&VectorBundle::constant(&restriction.groupoid, 1))
            )
            .r,
            0.0
        );

        let (g2, bundle2, eta) = eta_family(0.04);
        assert!(is_representation_over(&g2, &eta, &[], &FiberMetric::euclidean(&bundle2), 1e-12));
    }
}
