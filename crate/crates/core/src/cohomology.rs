//! Groupoid cochains with twisted coefficients.
//!
//! A `k`-cochain assigns to every composable `k`-simplex `(g₁, …, g_k)` a
//! value in the coefficient fiber over `t g₁`; 0-cochains are sections over
//! objects. Values are matrices: column vectors for a [`CoefficientSystem::Linear`]
//! system, `W_x × U_x` blocks for a [`CoefficientSystem::Factored`] one.
//! Sizes are measured with the Frobenius norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{ArrowId, FiniteGroupoid, ObjectId};
use crate::haar::HaarIntegrator;
use crate::linalg::{Matrix, VectorBundle};
use crate::pseudorep::{invert_maps, PseudoRep};

/// A groupoid action `ρ_g: C_{sg} → C_{tg}` on coefficient fibers.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientSystem {
    /// `C_x = ℝ^{dims[x]}` with `ρ_g(v) = action[g]·v`.
    Linear { dims: Vec<usize>, action: Vec<Matrix> },
    /// `C_x = L(U_x, W_x)` with `ρ_g(X) = outer[g]·X·inner_inv[g]`.
    Factored { outer: Vec<Matrix>, inner: Vec<Matrix>, inner_inv: Vec<Matrix>, shapes: Vec<(usize, usize)> },
}

impl CoefficientSystem {
    pub fn linear(groupoid: &FiniteGroupoid, bundle: &VectorBundle, action: &PseudoRep) -> Result<Self> {
        PseudoRep::new(groupoid, bundle, action.maps().to_vec())?;
        Ok(Self::Linear { dims: bundle.dims().to_vec(), action: action.maps().to_vec() })
    }

    /// `ρ_g(X) = α_g·X·λ_g⁻¹` on `L(U, W)`; `λ` must be invertible.
    pub fn factored(
        groupoid: &FiniteGroupoid,
        outer_bundle: &VectorBundle,
        outer: &PseudoRep,
        inner_bundle: &VectorBundle,
        inner: &PseudoRep,
    ) -> Result<Self> {
        PseudoRep::new(groupoid, outer_bundle, outer.maps().to_vec())?;
        PseudoRep::new(groupoid, inner_bundle, inner.maps().to_vec())?;
        let inner_inv = invert_maps(inner)?;
        let shapes = groupoid.objects().map(|x| (outer_bundle.dim(x), inner_bundle.dim(x))).collect();
        Ok(Self::Factored { outer: outer.maps().to_vec(), inner: inner.maps().to_vec(), inner_inv, shapes })
    }

    /// Conjugation `X ↦ λ_g·X·λ_g⁻¹` on `End(E)`.
    pub fn adjoint(groupoid: &FiniteGroupoid, bundle: &VectorBundle, rep: &PseudoRep) -> Result<Self> {
        Self::factored(groupoid, bundle, rep, bundle, rep)
    }

    pub fn n_objects(&self) -> usize {
        match self {
            Self::Linear { dims, .. } => dims.len(),
            Self::Factored { shapes, .. } => shapes.len(),
        }
    }

    pub fn n_arrows(&self) -> usize {
        match self {
            Self::Linear { action, .. } => action.len(),
            Self::Factored { outer, .. } => outer.len(),
        }
    }

    /// Matrix shape of a value in `C_x`.
    pub fn value_shape(&self, x: ObjectId) -> (usize, usize) {
        match self {
            Self::Linear { dims, .. } => (dims[x.0], 1),
            Self::Factored { shapes, .. } => shapes[x.0],
        }
    }

    pub fn act(&self, g: ArrowId, value: &Matrix) -> Matrix {
        match self {
            Self::Linear { action, .. } => action[g.0].matmul(value),
            Self::Factored { outer, inner_inv, .. } => outer[g.0].matmul(value).matmul(&inner_inv[g.0]),
        }
    }

    /// Sup over objects, composable pairs and basis values `E` of the
    /// Frobenius norms of `ρ_{1x}E − E` and `ρ_{gh}E − ρ_g ρ_h E`.
    pub fn representation_defect(&self, groupoid: &FiniteGroupoid) -> f64 {
        let basis = |x: ObjectId| {
            let (r, c) = self.value_shape(x);
            (0..r * c).map(move |k| Matrix::from_fn(r, c, |i, j| if i * c + j == k { 1.0 } else { 0.0 }))
        };
        let mut sup = 0.0_f64;
        for x in groupoid.objects() {
            for e in basis(x) {
                sup = sup.max((&self.act(groupoid.unit(x), &e) - &e).frobenius_norm());
            }
        }
        for (g, h) in groupoid.iter_composable_pairs() {
            for e in basis(groupoid.source(h)) {
                let lhs = self.act(groupoid.mul(g, h), &e);
                let rhs = self.act(g, &self.act(h, &e));
                sup = sup.max((&lhs - &rhs).frobenius_norm());
            }
        }
        sup
    }

    pub fn ensure_representation(&self, groupoid: &FiniteGroupoid, tol: f64) -> Result<()> {
        let defect = self.representation_defect(groupoid);
        if defect > tol {
            return Err(Error::NotRepresentation { defect });
        }
        Ok(())
    }
}

macro_rules! cochain {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            values: Vec<Matrix>,
        }

        impl $name {
            pub fn from_values(values: Vec<Matrix>) -> Self {
                Self { values }
            }

            pub fn values(&self) -> &[Matrix] {
                &self.values
            }

            pub fn into_values(self) -> Vec<Matrix> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            /// Largest Frobenius norm of a value.
            pub fn sup_norm(&self) -> f64 {
                self.values.iter().map(Matrix::frobenius_norm).fold(0.0, f64::max)
            }

            /// `sup ‖self − other‖` simplex-wise.
            pub fn sup_distance(&self, other: &Self) -> Result<f64> {
                if self.values.len() != other.values.len() {
                    return Err(Error::Shape("cochains of different length".into()));
                }
                let mut sup = 0.0_f64;
                for (a, b) in self.values.iter().zip(&other.values) {
                    if a.shape() != b.shape() {
                        return Err(Error::Shape("cochain values of different shape".into()));
                    }
                    sup = sup.max((a - b).frobenius_norm());
                }
                Ok(sup)
            }

            pub fn scale(&self, k: f64) -> Self {
                Self { values: self.values.iter().map(|v| v.scale(k)).collect() }
            }

            pub fn add(&self, other: &Self) -> Self {
                Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
            }
        }
    };
}

cochain!(
    /// One value in `C_x` per object.
    Cochain0
);
cochain!(
    /// One value in `C_{tg}` per arrow.
    Cochain1
);
cochain!(
    /// One value in `C_{tg}` per composable pair `(g, h)`, in
    /// [`FiniteGroupoid::composable_pairs`] order.
    Cochain2
);
cochain!(
    /// One value in `C_{tg}` per composable triple, in
    /// [`FiniteGroupoid::composable_triples`] order.
    Cochain3
);

/// Shapes each cochain degree must have under `system`.
fn shapes(groupoid: &FiniteGroupoid, system: &CoefficientSystem, degree: usize) -> Vec<(usize, usize)> {
    match degree {
        0 => groupoid.objects().map(|x| system.value_shape(x)).collect(),
        1 => groupoid.arrows().map(|g| system.value_shape(groupoid.target(g))).collect(),
        2 => groupoid.iter_composable_pairs().map(|(g, _)| system.value_shape(groupoid.target(g))).collect(),
        _ => groupoid.composable_triples().iter().map(|&(g, _, _)| system.value_shape(groupoid.target(g))).collect(),
    }
}

fn check_shapes(groupoid: &FiniteGroupoid, system: &CoefficientSystem, degree: usize, values: &[Matrix]) -> Result<()> {
    if system.n_objects() != groupoid.n_objects() || system.n_arrows() != groupoid.n_arrows() {
        return Err(Error::Shape("coefficient system does not match the groupoid".into()));
    }
    let expected = shapes(groupoid, system, degree);
    if values.len() != expected.len() {
        return Err(Error::TableLength { table: "cochain values", found: values.len(), expected: expected.len() });
    }
    if let Some(i) = values.iter().zip(&expected).position(|(v, &s)| v.shape() != s) {
        return Err(Error::Shape(format!(
            "{degree}-cochain value {i} is {:?}, expected {:?}",
            values[i].shape(),
            expected[i]
        )));
    }
    Ok(())
}

fn zeros(groupoid: &FiniteGroupoid, system: &CoefficientSystem, degree: usize) -> Vec<Matrix> {
    shapes(groupoid, system, degree).into_iter().map(|(r, c)| Matrix::zeros(r, c)).collect()
}

fn random(groupoid: &FiniteGroupoid, system: &CoefficientSystem, degree: usize, seed: u64) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shapes(groupoid, system, degree)
        .into_iter()
        .map(|(r, c)| Matrix::from_fn(r, c, |_, _| rng.random_range(-1.0..=1.0)))
        .collect()
}

impl Cochain0 {
    pub fn zeros(groupoid: &FiniteGroupoid, system: &CoefficientSystem) -> Self {
        Self { values: zeros(groupoid, system, 0) }
    }

    /// Entries uniform in `[−1, 1]` from a ChaCha8 stream, object by object.
    pub fn random(groupoid: &FiniteGroupoid, system: &CoefficientSystem, seed: u64) -> Self {
        Self { values: random(groupoid, system, 0, seed) }
    }

    pub fn new(groupoid: &FiniteGroupoid, system: &CoefficientSystem, values: Vec<Matrix>) -> Result<Self> {
        check_shapes(groupoid, system, 0, &values)?;
        Ok(Self { values })
    }

    pub fn value(&self, x: ObjectId) -> &Matrix {
        &self.values[x.0]
    }
}

impl Cochain1 {
    pub fn zeros(groupoid: &FiniteGroupoid, system: &CoefficientSystem) -> Self {
        Self { values: zeros(groupoid, system, 1) }
    }

    pub fn random(groupoid: &FiniteGroupoid, system: &CoefficientSystem, seed: u64) -> Self {
        Self { values: random(groupoid, system, 1, seed) }
    }

    pub fn new(groupoid: &FiniteGroupoid, system: &CoefficientSystem, values: Vec<Matrix>) -> Result<Self> {
        check_shapes(groupoid, system, 1, &values)?;
        Ok(Self { values })
    }

    pub fn value(&self, g: ArrowId) -> &Matrix {
        &self.values[g.0]
    }
}

impl Cochain2 {
    pub fn zeros(groupoid: &FiniteGroupoid, system: &CoefficientSystem) -> Self {
        Self { values: zeros(groupoid, system, 2) }
    }

    pub fn random(groupoid: &FiniteGroupoid, system: &CoefficientSystem, seed: u64) -> Self {
        Self { values: random(groupoid, system, 2, seed) }
    }

    pub fn new(groupoid: &FiniteGroupoid, system: &CoefficientSystem, values: Vec<Matrix>) -> Result<Self> {
        check_shapes(groupoid, system, 2, &values)?;
        Ok(Self { values })
    }

    /// Value at the composable pair `(g, h)`.
    pub fn value(&self, groupoid: &FiniteGroupoid, g: ArrowId, h: ArrowId) -> &Matrix {
        let i = groupoid.pair_index(g, h).expect("pair is not composable");
        &self.values[i]
    }
}

/// `(δY)(g) = ρ_g Y(sg) − Y(tg)`
pub fn coboundary0(groupoid: &FiniteGroupoid, system: &CoefficientSystem, y: &Cochain0) -> Result<Cochain1> {
    check_shapes(groupoid, system, 0, &y.values)?;
    let values =
        groupoid.arrows().map(|g| &system.act(g, y.value(groupoid.source(g))) - y.value(groupoid.target(g))).collect();
    Ok(Cochain1 { values })
}

/// `(δX)(g, h) = ρ_g X(h) − X(gh) + X(g)`
pub fn coboundary1(groupoid: &FiniteGroupoid, system: &CoefficientSystem, x: &Cochain1) -> Result<Cochain2> {
    check_shapes(groupoid, system, 1, &x.values)?;
    let values = groupoid
        .iter_composable_pairs()
        .map(|(g, h)| &(&system.act(g, x.value(h)) - x.value(groupoid.mul(g, h))) + x.value(g))
        .collect();
    Ok(Cochain2 { values })
}

/// `(δZ)(g, h, k) = ρ_g Z(h, k) − Z(gh, k) + Z(g, hk) − Z(g, h)`
pub fn coboundary2(groupoid: &FiniteGroupoid, system: &CoefficientSystem, z: &Cochain2) -> Result<Cochain3> {
    check_shapes(groupoid, system, 2, &z.values)?;
    let at = |g, h| z.value(groupoid, g, h);
    let values = groupoid
        .composable_triples()
        .into_iter()
        .map(|(g, h, k)| {
            let mut v = system.act(g, at(h, k));
            v.add_scaled(-1.0, at(groupoid.mul(g, h), k));
            v.add_scaled(1.0, at(g, groupoid.mul(h, k)));
            v.add_scaled(-1.0, at(g, h));
            v
        })
        .collect();
    Ok(Cochain3 { values })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocycleCheck {
    /// Largest Frobenius norm of the coboundary.
    pub sup: f64,
    /// Simplex attaining `sup`, as arrow indices.
    pub witness: Option<Vec<usize>>,
    pub holds: bool,
}

fn sup_with_witness(values: &[Matrix], simplices: impl Iterator<Item = Vec<usize>>, tol: f64) -> CocycleCheck {
    let mut sup = 0.0;
    let mut witness = None;
    for (v, s) in values.iter().zip(simplices) {
        let n = v.frobenius_norm();
        if n > sup || witness.is_none() {
            sup = n;
            witness = Some(s);
        }
    }
    CocycleCheck { sup, witness, holds: sup <= tol }
}

/// Whether `δZ` vanishes to `tol`, with the worst triple as witness.
pub fn is_cocycle(
    groupoid: &FiniteGroupoid,
    system: &CoefficientSystem,
    z: &Cochain2,
    tol: f64,
) -> Result<CocycleCheck> {
    let dz = coboundary2(groupoid, system, z)?;
    let triples = groupoid.composable_triples().into_iter().map(|(g, h, k)| vec![g.0, h.0, k.0]);
    Ok(sup_with_witness(&dz.values, triples, tol))
}

/// Whether `δX` vanishes to `tol`, with the worst pair as witness.
pub fn is_cocycle1(
    groupoid: &FiniteGroupoid,
    system: &CoefficientSystem,
    x: &Cochain1,
    tol: f64,
) -> Result<CocycleCheck> {
    let dx = coboundary1(groupoid, system, x)?;
    let pairs = groupoid.iter_composable_pairs().map(|(g, h)| vec![g.0, h.0]);
    Ok(sup_with_witness(&dx.values, pairs, tol))
}

/// `Ẑ(g) = Σ_{h ∈ Γ^{sg}} c(sh)·weight(h)·Z(g, h)`; `δẐ = Z` whenever `Z`
/// is a cocycle.
pub fn contract2(integ: &HaarIntegrator<'_>, system: &CoefficientSystem, z: &Cochain2) -> Result<Cochain1> {
    let groupoid = integ.groupoid();
    check_shapes(groupoid, system, 2, &z.values)?;
    let values = groupoid
        .arrows()
        .map(|g| integ.fiber_sum(groupoid.source(g), |h| z.value(groupoid, g, h).clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Cochain1 { values })
}

/// `Y(x) = −Σ_{h ∈ Γ^x} c(sh)·weight(h)·X(h)`; `δY = X` whenever `X` is a
/// cocycle.
pub fn contract1(integ: &HaarIntegrator<'_>, system: &CoefficientSystem, x: &Cochain1) -> Result<Cochain0> {
    let groupoid = integ.groupoid();
    check_shapes(groupoid, system, 1, &x.values)?;
    let values = groupoid
        .objects()
        .map(|o| integ.fiber_sum(o, |h| x.value(h).clone()).map(|s| s.scale(-1.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Cochain0 { values })
}

/// The multiplicativity defect as a 2-cochain in the adjoint system of `λ`:
/// `Δ(g, h) = (λ_{gh} − λ_g λ_h)·λ_h⁻¹·λ_g⁻¹`, so that
/// `Δ(g, h)·λ_g = λ_{gh}·λ_h⁻¹ − λ_g` and the mean ratio is
/// `λ̂_g = λ_g + Δ̂(g)·λ_g`.
pub fn defect_cochain(
    groupoid: &FiniteGroupoid,
    bundle: &VectorBundle,
    rep: &PseudoRep,
) -> Result<(CoefficientSystem, Cochain2)> {
    let system = CoefficientSystem::adjoint(groupoid, bundle, rep)?;
    let inverses = match &system {
        CoefficientSystem::Factored { inner_inv, .. } => inner_inv,
        CoefficientSystem::Linear { .. } => unreachable!("adjoint systems are factored"),
    };
    let values = groupoid
        .iter_composable_pairs()
        .map(|(g, h)| {
            let mut defect = rep.map(groupoid.mul(g, h)).clone();
            defect.add_scaled(-1.0, &rep.map(g).matmul(rep.map(h)));
            defect.matmul(&inverses[h.0]).matmul(&inverses[g.0])
        })
        .collect();
    Ok((system, Cochain2 { values }))
}
