//! Constructors for genuine representations.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::groupoid::{bundle_offsets, permutations, ArrowId, FiniteGroup, FiniteGroupoid, GroupAction};
use crate::linalg::{Matrix, VectorBundle};
use crate::pseudorep::PseudoRep;

/// Tolerance for the homomorphism check, relative to `max(1, ‖π‖_max)`.
const HOM_TOL: f64 = 1e-12;

/// A matrix representation `π: G → GL(d)` of a finite group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupHom {
    dim: usize,
    matrices: Vec<Matrix>,
}

impl GroupHom {
    /// Checks `π(e) = id` and `π(a)π(b) = π(ab)` entrywise.
    pub fn new(group: &FiniteGroup, matrices: Vec<Matrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::TableLength { table: "group matrices", found: matrices.len(), expected: group.order() });
        }
        let dim = matrices[0].rows();
        if let Some(bad) = matrices.iter().position(|m| m.shape() != (dim, dim)) {
            return Err(Error::Shape(format!("group element {bad} is not {dim}x{dim}")));
        }
        let scale = matrices.iter().map(Matrix::max_abs).fold(1.0, f64::max);
        let tol = HOM_TOL * scale * scale;
        if (&matrices[group.identity()] - &Matrix::identity(dim)).max_abs() > tol {
            return Err(Error::NotRepresentation {
                defect: (&matrices[group.identity()] - &Matrix::identity(dim)).max_abs(),
            });
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let defect = (&matrices[group.mul(a, b)] - &matrices[a].matmul(&matrices[b])).max_abs();
                if defect > tol {
                    return Err(Error::NotRepresentation { defect });
                }
            }
        }
        Ok(Self { dim, matrices })
    }

    pub fn trivial(group: &FiniteGroup, dim: usize) -> Self {
        Self { dim, matrices: vec![Matrix::identity(dim); group.order()] }
    }

    /// `ℤ/n` acting on `ℝ^dim` by `j ↦ R(j)`: the `b`-th 2×2 block rotates by
    /// `2π·j·k·(b+1)/n`; an odd leftover coordinate carries `(−1)^{jk}` when
    /// `n` is even and `1` otherwise.
    pub fn cyclic_rotation(n: usize, k: usize, dim: usize) -> Result<Self> {
        let group = FiniteGroup::cyclic(n)?;
        let matrices = (0..n)
            .map(|j| {
                let mut m = Matrix::zeros(dim, dim);
                for block in 0..dim / 2 {
                    let angle = TAU * ((j * k * (block + 1)) % n) as f64 / n as f64;
                    let (s, c) = angle.sin_cos();
                    let i = 2 * block;
                    m[(i, i)] = c;
                    m[(i, i + 1)] = -s;
                    m[(i + 1, i)] = s;
                    m[(i + 1, i + 1)] = c;
                }
                if dim % 2 == 1 {
                    m[(dim - 1, dim - 1)] = if n % 2 == 0 && (j * k) % 2 == 1 { -1.0 } else { 1.0 };
                }
                m
            })
            .collect();
        Self::new(&group, matrices)
    }

    /// `S_n` permuting the standard basis of `ℝ^n`.
    pub fn permutation(n: usize) -> Result<Self> {
        let group = FiniteGroup::symmetric(n)?;
        let matrices =
            permutations(n).iter().map(|p| Matrix::from_fn(n, n, |i, j| if p[j] == i { 1.0 } else { 0.0 })).collect();
        Self::new(&group, matrices)
    }

    /// The sign character of `S_n`.
    pub fn sign(n: usize) -> Result<Self> {
        let group = FiniteGroup::symmetric(n)?;
        let matrices = permutations(n)
            .iter()
            .map(|p| {
                let inversions =
                    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
                Matrix::scalar(if inversions % 2 == 0 { 1.0 } else { -1.0 })
            })
            .collect();
        Self::new(&group, matrices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, element: usize) -> &Matrix {
        &self.matrices[element]
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }
}

/// `λ_{(g,x)} = π(g)` on the action groupoid of `action`.
pub fn action_rep(
    groupoid: &FiniteGroupoid,
    action: &GroupAction,
    hom: &GroupHom,
) -> Result<(VectorBundle, PseudoRep)> {
    let n = action.n_points();
    if groupoid.n_arrows() != action.group().order() * n || hom.matrices.len() != action.group().order() {
        return Err(Error::Shape("representation does not match the action groupoid".into()));
    }
    let bundle = VectorBundle::constant(groupoid, hom.dim);
    let maps = groupoid.arrows().map(|g| hom.matrix(g.0 / n).clone()).collect();
    let rep = PseudoRep::new(groupoid, &bundle, maps)?;
    Ok((bundle, rep))
}

/// `λ_g = π_x(g)` on the group bundle with isotropy `groups[x]` at `x`.
pub fn bundle_rep(
    groupoid: &FiniteGroupoid,
    groups: &[FiniteGroup],
    homs: &[GroupHom],
) -> Result<(VectorBundle, PseudoRep)> {
    if groups.len() != homs.len() || groups.len() != groupoid.n_objects() {
        return Err(Error::Shape("one representation per object is required".into()));
    }
    let offsets = bundle_offsets(groups);
    let bundle = VectorBundle::new(groupoid, homs.iter().map(GroupHom::dim).collect())?;
    let mut maps = Vec::with_capacity(groupoid.n_arrows());
    for (x, (group, hom)) in groups.iter().zip(homs).enumerate() {
        if hom.matrices.len() != group.order() {
            return Err(Error::Shape(format!("representation at object {x} has the wrong group order")));
        }
        debug_assert_eq!(maps.len(), offsets[x]);
        maps.extend(hom.matrices.iter().cloned());
    }
    let rep = PseudoRep::new(groupoid, &bundle, maps)?;
    Ok((bundle, rep))
}

/// `λ_{(y,x)} = A_y·A_x⁻¹`: on a pair groupoid every representation has
/// this form.
pub fn pair_rep(groupoid: &FiniteGroupoid, frames: &[Matrix]) -> Result<(VectorBundle, PseudoRep)> {
    let dim = frames.first().map_or(0, Matrix::rows);
    let bundle = VectorBundle::constant(groupoid, dim);
    let rep = PseudoRep::identity(groupoid, &bundle).gauge(groupoid, frames)?;
    Ok((bundle, rep))
}

/// Seeded well-conditioned frames: upper triangular with diagonal in
/// `[1 − spread, 1 + spread]` and off-diagonal entries in `[−spread, spread]`.
/// Requires `0 ≤ spread < 1`.
pub fn random_frames(bundle: &VectorBundle, spread: f64, seed: u64) -> Result<Vec<Matrix>> {
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::Precondition(format!("frame spread {spread} outside [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(bundle
        .dims()
        .iter()
        .map(|&d| {
            Matrix::from_fn(d, d, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Equal => 1.0 + rng.random_range(-spread..=spread),
                std::cmp::Ordering::Less => rng.random_range(-spread..=spread),
                std::cmp::Ordering::Greater => 0.0,
            })
        })
        .collect())
}

/// Arrows with equal source and target.
pub fn isotropy_arrows(groupoid: &FiniteGroupoid) -> Vec<ArrowId> {
    groupoid.arrows().filter(|&g| groupoid.source(g) == groupoid.target(g)).collect()
}
