//! Finite groupoids stored as dense structure tables.
//!
//! Arrows and objects are dense indices. Every enumeration this module hands
//! out (fibers, composable pairs and triples) is in ascending arrow order; the
//! fiber sums downstream rely on that order for reproducibility.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArrowId(pub usize);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for ArrowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

const UNDEFINED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    /// Arrows with source at the base object.
    Source,
    /// Arrows with target at the base object.
    Target,
    /// Arrows with both source and target at the base object.
    Isotropy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberSlice {
    pub kind: FiberKind,
    pub base: ObjectId,
    pub arrows: Vec<ArrowId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub orbit_of: Vec<usize>,
    pub orbits: Vec<Vec<ObjectId>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    UnitEndpoints,
    ComposeMissing,
    ComposeOnNonComposable,
    ComposeEndpoints,
    UnitLaw,
    InverseEndpoints,
    InverseLaw,
    Associativity,
    HaarPositivity,
    LeftInvariance,
    Normalization,
    Shape,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Offending indices (arrows, or objects for unit and normalization checks).
    pub witness: Vec<usize>,
    pub detail: String,
}

/// List of violated axioms; empty means every check passed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, axiom: Axiom, witness: Vec<usize>, detail: impl Into<String>) {
        self.violations.push(Violation { axiom, witness, detail: detail.into() });
    }

    pub fn mentions(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    n_objects: usize,
    source: Vec<ObjectId>,
    target: Vec<ObjectId>,
    unit: Vec<ArrowId>,
    inverse: Vec<ArrowId>,
    /// Dense `n_arrows × n_arrows` table, `UNDEFINED` off the composable pairs.
    compose: Vec<u32>,
    target_fibers: Vec<Vec<ArrowId>>,
    source_fibers: Vec<Vec<ArrowId>>,
    /// Position of each arrow inside its target fiber.
    target_pos: Vec<usize>,
    /// `pair_offset[g]` is the index of the first composable pair `(g, _)`.
    pair_offset: Vec<usize>,
}

impl FiniteGroupoid {
    /// Builds a groupoid from raw structure tables.
    ///
    /// Only table lengths and index ranges are checked here; axiom violations
    /// are left for [`FiniteGroupoid::validate`] to report.
    pub fn from_tables(
        n_objects: usize,
        source: Vec<ObjectId>,
        target: Vec<ObjectId>,
        unit: Vec<ArrowId>,
        inverse: Vec<ArrowId>,
        compositions: &[(ArrowId, ArrowId, ArrowId)],
    ) -> Result<Self> {
        if n_objects == 0 {
            return Err(Error::EmptyGroupoid);
        }
        let n_arrows = source.len();
        if n_arrows >= UNDEFINED as usize {
            return Err(Error::OutOfRange { what: "arrow count", index: n_arrows, limit: UNDEFINED as usize });
        }
        for (table, len) in [("target", target.len()), ("inverse", inverse.len())] {
            if len != n_arrows {
                return Err(Error::TableLength { table, found: len, expected: n_arrows });
            }
        }
        if unit.len() != n_objects {
            return Err(Error::TableLength { table: "units", found: unit.len(), expected: n_objects });
        }
        for x in source.iter().chain(&target) {
            check_range("object", x.0, n_objects)?;
        }
        for g in unit.iter().chain(&inverse) {
            check_range("arrow", g.0, n_arrows)?;
        }
        let mut compose = vec![UNDEFINED; n_arrows * n_arrows];
        for &(a, b, ab) in compositions {
            check_range("arrow", a.0, n_arrows)?;
            check_range("arrow", b.0, n_arrows)?;
            check_range("arrow", ab.0, n_arrows)?;
            let slot = &mut compose[a.0 * n_arrows + b.0];
            if *slot != UNDEFINED {
                return Err(Error::DuplicateComposition(a.0, b.0));
            }
            *slot = ab.0 as u32;
        }

        let mut target_fibers = vec![Vec::new(); n_objects];
        let mut source_fibers = vec![Vec::new(); n_objects];
        let mut target_pos = vec![0; n_arrows];
        for g in 0..n_arrows {
            let t = target[g].0;
            target_pos[g] = target_fibers[t].len();
            target_fibers[t].push(ArrowId(g));
            source_fibers[source[g].0].push(ArrowId(g));
        }
        let mut pair_offset = Vec::with_capacity(n_arrows + 1);
        let mut acc = 0;
        for g in 0..n_arrows {
            pair_offset.push(acc);
            acc += target_fibers[source[g].0].len();
        }
        pair_offset.push(acc);

        Ok(Self {
            n_objects,
            source,
            target,
            unit,
            inverse,
            compose,
            target_fibers,
            source_fibers,
            target_pos,
            pair_offset,
        })
    }

    /// Pair groupoid over `n` objects. Arrow `(y, x)` goes from `x` to `y` and
    /// has index `y·n + x`.
    pub fn pair(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGroupoid);
        }
        let idx = |y: usize, x: usize| ArrowId(y * n + x);
        let mut source = Vec::with_capacity(n * n);
        let mut target = Vec::with_capacity(n * n);
        let mut inverse = Vec::with_capacity(n * n);
        for y in 0..n {
            for x in 0..n {
                source.push(ObjectId(x));
                target.push(ObjectId(y));
                inverse.push(idx(x, y));
            }
        }
        let unit = (0..n).map(|x| idx(x, x)).collect();
        let mut comps = Vec::with_capacity(n * n * n);
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    comps.push((idx(z, y), idx(y, x), idx(z, x)));
                }
            }
        }
        Self::from_tables(n, source, target, unit, inverse, &comps)
    }

    /// Action groupoid of a left action. Arrow `(g, x)` goes from `x` to
    /// `g·x` and has index `g·n_points + x`.
    pub fn action(action: &GroupAction) -> Result<Self> {
        let group = &action.group;
        let n = action.n_points;
        if n == 0 {
            return Err(Error::EmptyGroupoid);
        }
        let idx = |g: usize, x: usize| ArrowId(g * n + x);
        let order = group.order();
        let mut source = Vec::with_capacity(order * n);
        let mut target = Vec::with_capacity(order * n);
        let mut inverse = Vec::with_capacity(order * n);
        for g in 0..order {
            for x in 0..n {
                let gx = action.act(g, x);
                source.push(ObjectId(x));
                target.push(ObjectId(gx));
                inverse.push(idx(group.inverse(g), gx));
            }
        }
        let unit = (0..n).map(|x| idx(group.identity(), x)).collect();
        let mut comps = Vec::new();
        for g in 0..order {
            for x in 0..n {
                let gx = action.act(g, x);
                for h in 0..order {
                    comps.push((idx(h, gx), idx(g, x), idx(group.mul(h, g), x)));
                }
            }
        }
        Self::from_tables(n, source, target, unit, inverse, &comps)
    }

    /// Group bundle with the `i`-th group as isotropy at object `i`. Arrows
    /// are laid out object by object, see [`bundle_offsets`].
    pub fn group_bundle(groups: &[FiniteGroup]) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::EmptyGroupoid);
        }
        let offsets = bundle_offsets(groups);
        let mut source = Vec::new();
        let mut inverse = Vec::new();
        let mut unit = Vec::new();
        let mut comps = Vec::new();
        for (x, group) in groups.iter().enumerate() {
            let off = offsets[x];
            unit.push(ArrowId(off + group.identity()));
            for g in 0..group.order() {
                source.push(ObjectId(x));
                inverse.push(ArrowId(off + group.inverse(g)));
                for h in 0..group.order() {
                    comps.push((ArrowId(off + g), ArrowId(off + h), ArrowId(off + group.mul(g, h))));
                }
            }
        }
        let target = source.clone();
        Self::from_tables(groups.len(), source, target, unit, inverse, &comps)
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_arrows(&self) -> usize {
        self.source.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.n_objects).map(ObjectId)
    }

    pub fn arrows(&self) -> impl Iterator<Item = ArrowId> {
        (0..self.n_arrows()).map(ArrowId)
    }

    pub fn source(&self, g: ArrowId) -> ObjectId {
        self.source[g.0]
    }

    pub fn target(&self, g: ArrowId) -> ObjectId {
        self.target[g.0]
    }

    pub fn unit(&self, x: ObjectId) -> ArrowId {
        self.unit[x.0]
    }

    pub fn inverse(&self, g: ArrowId) -> ArrowId {
        self.inverse[g.0]
    }

    pub fn is_unit(&self, g: ArrowId) -> bool {
        self.unit[self.source[g.0].0] == g
    }

    /// `g₁·g₂`, defined when `s(g₁) = t(g₂)` (for a valid groupoid).
    pub fn compose(&self, g1: ArrowId, g2: ArrowId) -> Option<ArrowId> {
        match self.compose[g1.0 * self.n_arrows() + g2.0] {
            UNDEFINED => None,
            v => Some(ArrowId(v as usize)),
        }
    }

    /// Composition on a pair known to be composable.
    ///
    /// # Panics
    /// If the table has no entry for the pair, i.e. the groupoid is invalid.
    pub fn mul(&self, g1: ArrowId, g2: ArrowId) -> ArrowId {
        self.compose(g1, g2).unwrap_or_else(|| panic!("composition {g1}·{g2} undefined; validate the groupoid first"))
    }

    /// Arrows with target `x`, ascending.
    pub fn target_fiber(&self, x: ObjectId) -> &[ArrowId] {
        &self.target_fibers[x.0]
    }

    /// Arrows with source `x`, ascending.
    pub fn source_fiber(&self, x: ObjectId) -> &[ArrowId] {
        &self.source_fibers[x.0]
    }

    pub fn fiber(&self, kind: FiberKind, x: ObjectId) -> Result<FiberSlice> {
        check_range("object", x.0, self.n_objects)?;
        let arrows = match kind {
            FiberKind::Source => self.source_fibers[x.0].clone(),
            FiberKind::Target => self.target_fibers[x.0].clone(),
            FiberKind::Isotropy => self.target_fibers[x.0].iter().copied().filter(|&g| self.source(g) == x).collect(),
        };
        Ok(FiberSlice { kind, base: x, arrows })
    }

    /// Number of composable pairs `(g, h)` with `s g = t h`.
    pub fn n_composable_pairs(&self) -> usize {
        self.pair_offset[self.n_arrows()]
    }

    /// Index of `(g, h)` in [`FiniteGroupoid::composable_pairs`].
    pub fn pair_index(&self, g: ArrowId, h: ArrowId) -> Option<usize> {
        (self.target(h) == self.source(g)).then(|| self.pair_offset[g.0] + self.target_pos[h.0])
    }

    /// All `(g, h)` with `s g = t h`, lexicographic in arrow indices.
    pub fn composable_pairs(&self) -> Vec<(ArrowId, ArrowId)> {
        self.iter_composable_pairs().collect()
    }

    pub fn iter_composable_pairs(&self) -> impl Iterator<Item = (ArrowId, ArrowId)> + '_ {
        self.arrows().flat_map(move |g| self.target_fiber(self.source(g)).iter().map(move |&h| (g, h)))
    }

    /// All `(g, h, k)` with `s g = t h` and `s h = t k`, lexicographic.
    pub fn composable_triples(&self) -> Vec<(ArrowId, ArrowId, ArrowId)> {
        self.iter_composable_pairs()
            .flat_map(|(g, h)| self.target_fiber(self.source(h)).iter().map(move |&k| (g, h, k)))
            .collect()
    }

    pub fn orbits(&self) -> OrbitPartition {
        let mut orbit_of = vec![usize::MAX; self.n_objects];
        let mut orbits = Vec::new();
        for x in 0..self.n_objects {
            if orbit_of[x] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = vec![ObjectId(x)];
            orbit_of[x] = id;
            let mut i = 0;
            while i < members.len() {
                let y = members[i];
                for &g in self.source_fiber(y).iter().chain(self.target_fiber(y)) {
                    for z in [self.source(g), self.target(g)] {
                        if orbit_of[z.0] == usize::MAX {
                            orbit_of[z.0] = id;
                            members.push(z);
                        }
                    }
                }
                i += 1;
            }
            members.sort();
            orbits.push(members);
        }
        OrbitPartition { orbit_of, orbits }
    }

    /// `ΓS`, the targets of all arrows sourced in `S`. Sorted, deduplicated.
    pub fn saturation(&self, set: &[ObjectId]) -> Result<Vec<ObjectId>> {
        let mut out = BTreeSet::new();
        for &x in set {
            check_range("object", x.0, self.n_objects)?;
            out.extend(self.source_fiber(x).iter().map(|&g| self.target(g)));
        }
        Ok(out.into_iter().collect())
    }

    pub fn is_invariant(&self, set: &[ObjectId]) -> Result<bool> {
        let sorted: BTreeSet<ObjectId> = set.iter().copied().collect();
        Ok(self.saturation(set)?.iter().all(|x| sorted.contains(x)))
    }

    /// Full subgroupoid `Γ|S` on the objects of `S`.
    ///
    /// Unless `allow_non_invariant` is set, `S` must equal its saturation.
    pub fn restrict(&self, set: &[ObjectId], allow_non_invariant: bool) -> Result<Restriction> {
        let objects: Vec<ObjectId> = set.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        for x in &objects {
            check_range("object", x.0, self.n_objects)?;
        }
        if !allow_non_invariant && !self.is_invariant(&objects)? {
            return Err(Error::NonInvariantSubset(objects.iter().map(|x| x.0).collect()));
        }
        let mut new_object = vec![usize::MAX; self.n_objects];
        for (i, x) in objects.iter().enumerate() {
            new_object[x.0] = i;
        }
        let arrows: Vec<ArrowId> = self
            .arrows()
            .filter(|&g| new_object[self.source(g).0] != usize::MAX && new_object[self.target(g).0] != usize::MAX)
            .collect();
        let mut new_arrow = vec![usize::MAX; self.n_arrows()];
        for (i, g) in arrows.iter().enumerate() {
            new_arrow[g.0] = i;
        }
        let map_arrow = |g: ArrowId| ArrowId(new_arrow[g.0]);
        let source = arrows.iter().map(|&g| ObjectId(new_object[self.source(g).0])).collect();
        let target = arrows.iter().map(|&g| ObjectId(new_object[self.target(g).0])).collect();
        let inverse = arrows.iter().map(|&g| map_arrow(self.inverse(g))).collect();
        let unit = objects.iter().map(|&x| map_arrow(self.unit(x))).collect();
        let mut comps = Vec::new();
        for &g in &arrows {
            for &h in self.target_fiber(self.source(g)) {
                if new_arrow[h.0] == usize::MAX {
                    continue;
                }
                if let Some(gh) = self.compose(g, h) {
                    comps.push((map_arrow(g), map_arrow(h), map_arrow(gh)));
                }
            }
        }
        let groupoid = Self::from_tables(objects.len(), source, target, unit, inverse, &comps)?;
        Ok(Restriction { groupoid, objects, arrows })
    }

    /// Exhaustive check of the groupoid axioms. Violations are reported, not
    /// raised.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for x in self.objects() {
            let u = self.unit(x);
            if self.source(u) != x || self.target(u) != x {
                report.push(Axiom::UnitEndpoints, vec![x.0, u.0], format!("unit of {x} is {u}, not a loop at {x}"));
            }
        }
        for g in self.arrows() {
            for h in self.arrows() {
                let composable = self.source(g) == self.target(h);
                match (composable, self.compose(g, h)) {
                    (true, None) => report.push(Axiom::ComposeMissing, vec![g.0, h.0], format!("{g}·{h} undefined")),
                    (false, Some(_)) => report.push(
                        Axiom::ComposeOnNonComposable,
                        vec![g.0, h.0],
                        format!("{g}·{h} defined although s{g} ≠ t{h}"),
                    ),
                    (true, Some(gh)) => {
                        if self.source(gh) != self.source(h) || self.target(gh) != self.target(g) {
                            report.push(
                                Axiom::ComposeEndpoints,
                                vec![g.0, h.0, gh.0],
                                format!("{g}·{h} = {gh} has wrong endpoints"),
                            );
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for g in self.arrows() {
            let (s, t) = (self.source(g), self.target(g));
            if self.compose(self.unit(t), g) != Some(g) || self.compose(g, self.unit(s)) != Some(g) {
                report.push(Axiom::UnitLaw, vec![g.0], format!("unit law fails at {g}"));
            }
            let gi = self.inverse(g);
            if self.source(gi) != t || self.target(gi) != s {
                report.push(Axiom::InverseEndpoints, vec![g.0, gi.0], format!("{gi} cannot invert {g}"));
                continue;
            }
            if self.compose(g, gi) != Some(self.unit(t)) || self.compose(gi, g) != Some(self.unit(s)) {
                report.push(Axiom::InverseLaw, vec![g.0, gi.0], format!("inverse law fails at {g}"));
            }
        }
        for (g, h) in self.iter_composable_pairs() {
            let Some(gh) = self.compose(g, h) else { continue };
            for &k in self.target_fiber(self.source(h)) {
                let left = self.compose(gh, k);
                let right = self.compose(h, k).and_then(|hk| self.compose(g, hk));
                if left.is_none() || left != right {
                    report.push(
                        Axiom::Associativity,
                        vec![g.0, h.0, k.0],
                        format!("({g}·{h})·{k} = {left:?} but {g}·({h}·{k}) = {right:?}"),
                    );
                }
            }
        }
        report
    }
}

/// `Γ|S` together with the index maps back into the ambient groupoid.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub groupoid: FiniteGroupoid,
    /// New object index → ambient object.
    pub objects: Vec<ObjectId>,
    /// New arrow index → ambient arrow.
    pub arrows: Vec<ArrowId>,
}

fn check_range(what: &'static str, index: usize, limit: usize) -> Result<()> {
    if index >= limit {
        return Err(Error::OutOfRange { what, index, limit });
    }
    Ok(())
}

/// Offset of each object's arrows inside [`FiniteGroupoid::group_bundle`].
pub fn bundle_offsets(groups: &[FiniteGroup]) -> Vec<usize> {
    groups
        .iter()
        .scan(0, |acc, g| {
            let off = *acc;
            *acc += g.order();
            Some(off)
        })
        .collect()
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    name: String,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn from_table(order: usize, table: Vec<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGroup("a group needs at least one element".into()));
        }
        if table.len() != order * order {
            return Err(Error::InvalidGroup(format!("table has {} entries, expected {}", table.len(), order * order)));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= order) {
            return Err(Error::InvalidGroup(format!("entry {bad} outside 0..{order}")));
        }
        let m = |a: usize, b: usize| table[a * order + b];
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return Err(Error::InvalidGroup(format!("associativity fails at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| m(e, a) == a && m(a, e) == a))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(order);
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| m(a, b) == identity && m(b, a) == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
            inverse.push(inv);
        }
        Ok(Self { order, table, identity, inverse, name: format!("table{order}") })
    }

    /// ℤ/n with element `k` the residue `k`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("ℤ/0 is not finite".into()));
        }
        let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        let mut g = Self::from_table(n, table)?;
        g.name = format!("z{n}");
        Ok(g)
    }

    /// Symmetric group on `n ≤ 5` letters, elements in lexicographic order
    /// of their one-line notation (so element 0 is the identity).
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 5 {
            return Err(Error::InvalidGroup(format!("symmetric group S{n} unsupported")));
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("closed under composition");
        let order = perms.len();
        let mut table = Vec::with_capacity(order * order);
        for a in &perms {
            for b in &perms {
                // (a·b)(i) = a(b(i))
                let ab: Vec<usize> = (0..n).map(|i| a[b[i]]).collect();
                table.push(index(&ab));
            }
        }
        let mut g = Self::from_table(order, table)?;
        g.name = format!("s{n}");
        Ok(g)
    }

    /// Parses `z<n>`, `s<n>` or `trivial`.
    pub fn by_name(name: &str) -> Result<Self> {
        let name = name.trim().to_ascii_lowercase();
        if name == "trivial" || name == "1" {
            return Self::cyclic(1);
        }
        let parse =
            |rest: &str| rest.parse::<usize>().map_err(|_| Error::InvalidGroup(format!("unknown group `{name}`")));
        if let Some(rest) = name.strip_prefix('z') {
            Self::cyclic(parse(rest)?)
        } else if let Some(rest) = name.strip_prefix('s') {
            Self::symmetric(parse(rest)?)
        } else {
            Err(Error::InvalidGroup(format!("unknown group `{name}`")))
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// A left action of a finite group on `{0, …, n_points − 1}`.
#[derive(Clone, Debug)]
pub struct GroupAction {
    group: FiniteGroup,
    n_points: usize,
    table: Vec<usize>,
}

impl GroupAction {
    /// `table[g·n_points + x]` is `g·x`. Checks the identity and
    /// compatibility laws and reports the first failing witness.
    pub fn new(group: FiniteGroup, n_points: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != group.order() * n_points {
            return Err(Error::ActionLaw(format!(
                "table has {} entries, expected {}",
                table.len(),
                group.order() * n_points
            )));
        }
        if let Some(bad) = table.iter().find(|&&y| y >= n_points) {
            return Err(Error::ActionLaw(format!("image {bad} outside the point set")));
        }
        let act = |g: usize, x: usize| table[g * n_points + x];
        for x in 0..n_points {
            if act(group.identity(), x) != x {
                return Err(Error::ActionLaw(format!("identity moves point {x}")));
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                for x in 0..n_points {
                    if act(g, act(h, x)) != act(group.mul(g, h), x) {
                        return Err(Error::ActionLaw(format!("g={g}, h={h}, x={x}: g·(h·x) ≠ (gh)·x")));
                    }
                }
            }
        }
        Ok(Self { group, n_points, table })
    }

    pub fn from_fn(group: FiniteGroup, n_points: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let table = (0..group.order()).flat_map(|g| (0..n_points).map(move |x| (g, x))).map(|(g, x)| f(g, x)).collect();
        Self::new(group, n_points, table)
    }

    /// ℤ/n acting on ℤ/m by translation, `k·x = x + k mod m`; requires `m | n`.
    pub fn cyclic_rotation(n: usize, m: usize) -> Result<Self> {
        Self::from_fn(FiniteGroup::cyclic(n)?, m, |k, x| (x + k) % m)
    }

    pub fn trivial(group: FiniteGroup, n_points: usize) -> Result<Self> {
        Self::from_fn(group, n_points, |_, x| x)
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.table[g * self.n_points + x]
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }
}
