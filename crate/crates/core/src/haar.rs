//! Haar systems, cut-off and normalizing functions, and Haar integration
//! with parameters.
//!
//! A Haar system on a finite groupoid is a positive weight per arrow, read as
//! the mass of `{h}` in the target fiber `Γ^{t h}`. Left invariance asks that
//! `weight(g·h) = weight(h)` whenever `t h = s g`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{ArrowId, Axiom, FiniteGroupoid, ObjectId, ValidationReport};
use crate::linalg::Matrix;

/// Absolute tolerance for left invariance and the normalizing identity.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarSystem {
    weights: Vec<f64>,
}

impl HaarSystem {
    /// Unit mass on every arrow; left invariant because left translation by
    /// `g` bijects `Γ^{sg}` onto `Γ^{tg}`.
    pub fn counting(groupoid: &FiniteGroupoid) -> Self {
        Self { weights: vec![1.0; groupoid.n_arrows()] }
    }

    /// Explicit weights. Positivity is enforced here; left invariance is a
    /// separate check so that broken inputs can still be diagnosed.
    pub fn from_weights(groupoid: &FiniteGroupoid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != groupoid.n_arrows() {
            return Err(Error::TableLength {
                table: "haar weights",
                found: weights.len(),
                expected: groupoid.n_arrows(),
            });
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::NonPositiveWeight { arrow: ArrowId(i), value: w });
        }
        Ok(Self { weights })
    }

    pub fn weight(&self, h: ArrowId) -> f64 {
        self.weights[h.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Every `(g, h)` with `|weight(g·h) − weight(h)| > 1e-12`.
    pub fn check_left_invariance(&self, groupoid: &FiniteGroupoid) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (g, h) in groupoid.iter_composable_pairs() {
            let gh = groupoid.mul(g, h);
            let diff = (self.weight(gh) - self.weight(h)).abs();
            if diff > NORMALIZATION_TOL {
                report.push(
                    Axiom::LeftInvariance,
                    vec![g.0, h.0],
                    format!("weight({g}·{h}) = {} but weight({h}) = {}", self.weight(gh), self.weight(h)),
                );
            }
        }
        report
    }

    pub fn ensure_left_invariant(&self, groupoid: &FiniteGroupoid) -> Result<()> {
        let report = self.check_left_invariance(groupoid);
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::NotLeftInvariant(report.violations.len()))
        }
    }
}

/// Nonnegative object weight that is positive somewhere on every orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutoffFunction {
    values: Vec<f64>,
}

impl CutoffFunction {
    pub fn new(groupoid: &FiniteGroupoid, values: Vec<f64>) -> Result<Self> {
        if values.len() != groupoid.n_objects() {
            return Err(Error::TableLength { table: "cutoff", found: values.len(), expected: groupoid.n_objects() });
        }
        if let Some((x, &v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidCutoff { object: ObjectId(x), value: v });
        }
        for orbit in groupoid.orbits().orbits {
            if orbit.iter().all(|x| values[x.0] == 0.0) {
                return Err(Error::StarvedOrbit { object: orbit[0] });
            }
        }
        Ok(Self { values })
    }

    pub fn constant(groupoid: &FiniteGroupoid, value: f64) -> Result<Self> {
        Self::new(groupoid, vec![value; groupoid.n_objects()])
    }

    pub fn value(&self, x: ObjectId) -> f64 {
        self.values[x.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Objects where the cut-off is positive.
    pub fn support(&self) -> Vec<ObjectId> {
        self.values.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(x, _)| ObjectId(x)).collect()
    }
}

/// Cut-off function `c` with `Σ_{h ∈ Γ^x} c(s h)·weight(h) = 1` at every `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizingFunction {
    values: Vec<f64>,
}

impl NormalizingFunction {
    /// Wraps values that are already normalized, checking the identity to
    /// [`NORMALIZATION_TOL`].
    pub fn new(groupoid: &FiniteGroupoid, haar: &HaarSystem, values: Vec<f64>) -> Result<Self> {
        let cutoff = CutoffFunction::new(groupoid, values)?;
        for x in groupoid.objects() {
            let sum = fiber_mass(groupoid, haar, cutoff.values(), x);
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized { object: x, sum });
            }
        }
        Ok(Self { values: cutoff.values })
    }

    pub fn value(&self, x: ObjectId) -> f64 {
        self.values[x.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_cutoff(&self) -> CutoffFunction {
        CutoffFunction { values: self.values.clone() }
    }

    pub fn support(&self) -> Vec<ObjectId> {
        self.as_cutoff().support()
    }

    /// Per-object report of the normalizing identity.
    pub fn check(&self, groupoid: &FiniteGroupoid, haar: &HaarSystem) -> ValidationReport {
        let mut report = ValidationReport::default();
        for x in groupoid.objects() {
            let sum = fiber_mass(groupoid, haar, &self.values, x);
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                report.push(Axiom::Normalization, vec![x.0], format!("fiber sum at {x} is {sum}"));
            }
        }
        report
    }
}

/// `D(x) = Σ_{h ∈ Γ^x} c(s h)·weight(h)`, summed in ascending arrow order.
pub fn fiber_mass(groupoid: &FiniteGroupoid, haar: &HaarSystem, cutoff: &[f64], x: ObjectId) -> f64 {
    let mut sum = 0.0;
    for &h in groupoid.target_fiber(x) {
        sum += cutoff[groupoid.source(h).0] * haar.weight(h);
    }
    sum
}

/// Divides a cut-off function by its (orbit-constant) fiber mass.
///
/// When `support_within` is given, the cut-off must vanish outside it.
pub fn normalize_cutoff(
    groupoid: &FiniteGroupoid,
    haar: &HaarSystem,
    cutoff: &CutoffFunction,
    support_within: Option<&[ObjectId]>,
) -> Result<NormalizingFunction> {
    if let Some(allowed) = support_within {
        let outside: Vec<usize> = cutoff.support().into_iter().filter(|x| !allowed.contains(x)).map(|x| x.0).collect();
        if !outside.is_empty() {
            return Err(Error::SupportOutsideSet { support: outside });
        }
    }
    let mut values = Vec::with_capacity(groupoid.n_objects());
    for x in groupoid.objects() {
        let mass = fiber_mass(groupoid, haar, cutoff.values(), x);
        if !(mass > 0.0) {
            return Err(Error::StarvedOrbit { object: x });
        }
        values.push(cutoff.value(x) / mass);
    }
    Ok(NormalizingFunction { values })
}

/// Haar integration with parameters over a fixed Haar system and
/// normalizing function.
///
/// Every fiber sum goes through [`HaarIntegrator::fiber_sum`]: the term for
/// `h` is scaled by `c(s h)·weight(h)` and accumulated onto a zero matrix in
/// ascending arrow order.
#[derive(Clone, Copy, Debug)]
pub struct HaarIntegrator<'a> {
    groupoid: &'a FiniteGroupoid,
    haar: &'a HaarSystem,
    normalizer: &'a NormalizingFunction,
}

impl<'a> HaarIntegrator<'a> {
    pub fn new(
        groupoid: &'a FiniteGroupoid,
        haar: &'a HaarSystem,
        normalizer: &'a NormalizingFunction,
    ) -> Result<Self> {
        if haar.weights.len() != groupoid.n_arrows() || normalizer.values.len() != groupoid.n_objects() {
            return Err(Error::Shape("Haar data does not match the groupoid".into()));
        }
        Ok(Self { groupoid, haar, normalizer })
    }

    pub fn groupoid(&self) -> &'a FiniteGroupoid {
        self.groupoid
    }

    pub fn haar(&self) -> &'a HaarSystem {
        self.haar
    }

    pub fn normalizer(&self) -> &'a NormalizingFunction {
        self.normalizer
    }

    /// `c(s h)·weight(h)`
    pub fn coefficient(&self, h: ArrowId) -> f64 {
        self.normalizer.value(self.groupoid.source(h)) * self.haar.weight(h)
    }

    /// `Σ_{h ∈ Γ^x} c(s h)·weight(h)·term(h)`.
    pub fn fiber_sum(&self, x: ObjectId, mut term: impl FnMut(ArrowId) -> Matrix) -> Result<Matrix> {
        let mut acc: Option<Matrix> = None;
        for &h in self.groupoid.target_fiber(x) {
            let value = term(h);
            let acc = acc.get_or_insert_with(|| Matrix::zeros(value.rows(), value.cols()));
            if acc.shape() != value.shape() {
                return Err(Error::Shape(format!(
                    "integrand over the fiber at {x} changes shape at {h}: {:?} vs {:?}",
                    value.shape(),
                    acc.shape()
                )));
            }
            acc.add_scaled(self.coefficient(h), &value);
        }
        // target fibers always contain the unit arrow
        Ok(acc.expect("target fiber is never empty"))
    }

    /// `z ↦ Σ_{h ∈ Γ^{base(z)}} c(s h)·weight(h)·f(z, h)` for each parameter.
    pub fn integrate<P>(
        &self,
        params: &[P],
        base: impl Fn(&P) -> ObjectId,
        f: impl Fn(&P, ArrowId) -> Matrix,
    ) -> Result<Vec<Matrix>> {
        params.iter().map(|z| self.fiber_sum(base(z), |h| f(z, h))).collect()
    }
}
