//! Naive reimplementation over nested `Vec`s, driven only by the on-disk
//! tables of a groupoid. Fibers are found by scanning arrows and products by
//! looking up the composition list.
//!
//! Floating-point operations happen in the same order as in the library, so
//! agreement is bitwise: products accumulate from `0.0` over the inner index,
//! fiber sums add `coefficient·term` onto zeros in ascending arrow order.
//! Matrix inversion and the metric operator norm are taken from the library
//! as primitives.

use std::collections::HashMap;

use groupoid_avg::groupoid::ObjectId;
use groupoid_avg::io::GroupoidFile;
use groupoid_avg::linalg::{invert, FiberMetric, Matrix};

pub type Mat = Vec<Vec<f64>>;

pub struct Tables {
    pub n_objects: usize,
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub unit: Vec<usize>,
    pub inverse: Vec<usize>,
    pub compose: HashMap<(usize, usize), usize>,
}

impl Tables {
    pub fn from_file(file: &GroupoidFile) -> Self {
        Self {
            n_objects: file.n_objects,
            src: file.arrows.iter().map(|a| a.src).collect(),
            tgt: file.arrows.iter().map(|a| a.tgt).collect(),
            unit: file.units.clone(),
            inverse: file.inverse.clone(),
            compose: file.compose.iter().map(|&[a, b, ab]| ((a, b), ab)).collect(),
        }
    }

    pub fn n_arrows(&self) -> usize {
        self.src.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.compose[&(g, h)]
    }

    /// `Γ^x` in ascending order.
    pub fn arrows_into(&self, x: usize) -> Vec<usize> {
        (0..self.n_arrows()).filter(|&h| self.tgt[h] == x).collect()
    }

    /// `(g, h)` with `s g = t h`, lexicographic.
    pub fn composable_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_arrows();
        (0..n).flat_map(|g| (0..n).filter(move |&h| self.tgt[h] == self.src[g]).map(move |h| (g, h))).collect()
    }
}

pub fn from_matrix(m: &Matrix) -> Mat {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn to_matrix(m: &Mat) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    Matrix::from_row_major(m.len(), cols, m.iter().flatten().copied().collect()).unwrap()
}

pub fn bits_equal(a: &Matrix, b: &Mat) -> bool {
    a.rows() == b.len()
        && (0..a.rows())
            .all(|i| b[i].len() == a.cols() && (0..a.cols()).all(|j| a[(i, j)].to_bits() == b[i][j].to_bits()))
}

fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

fn mm(a: &Mat, b: &Mat) -> Mat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = 0.0;
                    for k in 0..inner {
                        acc += row[k] * b[k][j];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn transpose(a: &Mat) -> Mat {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

fn minus(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect()).collect()
}

fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn inv(a: &Mat) -> Mat {
    from_matrix(&invert(&to_matrix(a)).unwrap().0)
}

/// `Σ_{h ∈ Γ^x} c(s h)·w(h)·term(h)`.
fn fiber_sum(t: &Tables, w: &[f64], c: &[f64], x: usize, term: impl Fn(usize) -> Mat) -> Mat {
    let mut acc: Option<Mat> = None;
    for h in t.arrows_into(x) {
        let v = term(h);
        let coeff = c[t.src[h]] * w[h];
        let acc = acc.get_or_insert_with(|| zeros(v.len(), v.first().map_or(0, Vec::len)));
        for (ra, rv) in acc.iter_mut().zip(&v) {
            for (a, b) in ra.iter_mut().zip(rv) {
                *a += coeff * b;
            }
        }
    }
    acc.unwrap()
}

pub fn mean_ratio(t: &Tables, w: &[f64], c: &[f64], maps: &[Mat]) -> Vec<Mat> {
    let inverses: Vec<Mat> = maps.iter().map(inv).collect();
    (0..t.n_arrows()).map(|g| fiber_sum(t, w, c, t.src[g], |h| mm(&maps[t.mul(g, h)], &inverses[h]))).collect()
}

/// `(b, unit part, multiplicative part)`.
pub fn defects(t: &Tables, maps: &[Mat], metric: &FiberMetric) -> (f64, f64, f64) {
    let norm = |m: &Mat, s: usize, d: usize| metric.operator_norm(&to_matrix(m), ObjectId(s), ObjectId(d));
    let b = (0..t.n_arrows()).map(|g| norm(&maps[g], t.src[g], t.tgt[g])).fold(0.0, f64::max);
    let unit = (0..t.n_objects)
        .map(|x| {
            let u = &maps[t.unit[x]];
            norm(&minus(&identity(u.len()), u), x, x)
        })
        .fold(0.0, f64::max);
    let mult = t
        .composable_pairs()
        .into_iter()
        .map(|(g, h)| norm(&minus(&maps[t.mul(g, h)], &mm(&maps[g], &maps[h])), t.src[h], t.tgt[g]))
        .fold(0.0, f64::max);
    (b, unit, mult)
}

/// `z` is indexed like [`Tables::composable_pairs`].
pub fn contract2(t: &Tables, w: &[f64], c: &[f64], z: &[Mat]) -> Vec<Mat> {
    let index: HashMap<(usize, usize), usize> =
        t.composable_pairs().into_iter().enumerate().map(|(i, p)| (p, i)).collect();
    (0..t.n_arrows()).map(|g| fiber_sum(t, w, c, t.src[g], |h| z[index[&(g, h)]].clone())).collect()
}

pub fn contract1(t: &Tables, w: &[f64], c: &[f64], x: &[Mat]) -> Vec<Mat> {
    (0..t.n_objects)
        .map(|o| {
            let s = fiber_sum(t, w, c, o, |h| x[h].clone());
            s.iter().map(|row| row.iter().map(|v| -1.0 * v).collect()).collect()
        })
        .collect()
}

/// Raw averaged Gram matrices, symmetrized.
pub fn averaged_grams(t: &Tables, w: &[f64], c: &[f64], maps: &[Mat], grams: &[Mat]) -> Vec<Mat> {
    (0..t.n_objects)
        .map(|x| {
            let mut g = fiber_sum(t, w, c, x, |h| {
                let back = &maps[t.inverse[h]];
                mm(&mm(&transpose(back), &grams[t.src[h]]), back)
            });
            let n = g.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    let avg = 0.5 * (g[i][j] + g[j][i]);
                    g[i][j] = avg;
                    g[j][i] = avg;
                }
            }
            g
        })
        .collect()
}

/// Compares every oracle quantity with the library on one pseudo-representation,
/// bit for bit. Returns the first disagreement.
pub fn check_agreement(setting: &super::Setting, lambda: &groupoid_avg::PseudoRep, seed: u64) -> Result<(), String> {
    use groupoid_avg::cohomology::{self as cochains, Cochain1, Cochain2, CoefficientSystem};
    use groupoid_avg::{metric_avg, pseudorep};

    let g = &setting.groupoid;
    let t = Tables::from_file(&GroupoidFile::from_groupoid(g));
    let w = setting.haar.weights();
    let c = setting.normalizer.values();
    let integ = setting.integ();
    let maps: Vec<Mat> = lambda.maps().iter().map(from_matrix).collect();
    let all_equal = |what: &str, got: &[Matrix], ours: &[Mat]| -> Result<(), String> {
        if got.len() != ours.len() {
            return Err(format!("{what}: {} values vs {}", got.len(), ours.len()));
        }
        match got.iter().zip(ours).position(|(a, b)| !bits_equal(a, b)) {
            None => Ok(()),
            Some(i) => Err(format!("{what}: value {i} differs: {:?} vs {:?}", got[i], ours[i])),
        }
    };

    let hat = pseudorep::mean_ratio(&integ, lambda).map_err(|e| e.to_string())?;
    all_equal("mean ratio", hat.maps(), &mean_ratio(&t, w, c, &maps))?;

    let d = pseudorep::defects(g, lambda, &setting.metric);
    let (b, unit, mult) = defects(&t, &maps, &setting.metric);
    if (d.b.to_bits(), d.r_unit_part.to_bits(), d.r_mult_part.to_bits())
        != (b.to_bits(), unit.to_bits(), mult.to_bits())
    {
        return Err(format!("defects: ({}, {}, {}) vs ({b}, {unit}, {mult})", d.b, d.r_unit_part, d.r_mult_part));
    }

    let adjoint = CoefficientSystem::adjoint(g, &setting.bundle, lambda).map_err(|e| e.to_string())?;
    let linear = CoefficientSystem::linear(g, &setting.bundle, lambda).map_err(|e| e.to_string())?;
    for (name, system) in [("adjoint", &adjoint), ("linear", &linear)] {
        let z = Cochain2::random(g, system, seed);
        let zs: Vec<Mat> = z.values().iter().map(from_matrix).collect();
        let out = cochains::contract2(&integ, system, &z).map_err(|e| e.to_string())?;
        all_equal(&format!("contract2 ({name})"), out.values(), &contract2(&t, w, c, &zs))?;
        let x = Cochain1::random(g, system, seed ^ 1);
        let xs: Vec<Mat> = x.values().iter().map(from_matrix).collect();
        let out = cochains::contract1(&integ, system, &x).map_err(|e| e.to_string())?;
        all_equal(&format!("contract1 ({name})"), out.values(), &contract1(&t, w, c, &xs))?;
    }

    let grams: Vec<Mat> = setting.metric.grams().iter().map(from_matrix).collect();
    let got = metric_avg::averaged_grams(&integ, lambda, &setting.metric).map_err(|e| e.to_string())?;
    all_equal("averaged metric", &got, &averaged_grams(&t, w, c, &maps, &grams))?;
    Ok(())
}
