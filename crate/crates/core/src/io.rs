//! File formats: groupoid, matrix-list, trace and report files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{ArrowId, FiniteGroupoid, ObjectId};
use crate::linalg::Matrix;
use crate::pseudorep::{ConvergenceTrace, Termination, TraceRow};

/// Matrices as nested rows, one list per arrow (or object, or pair).
pub type MatrixRows = Vec<Vec<f64>>;

pub fn matrix_to_rows(m: &Matrix) -> MatrixRows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Builds a `rows × cols` matrix, where the expected shape also covers
/// zero-row blocks that carry no column count.
pub fn rows_to_matrix(rows: &MatrixRows, expected: (usize, usize), what: &str) -> Result<Matrix> {
    let (r, c) = expected;
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        let found_cols = rows.first().map_or(0, Vec::len);
        return Err(Error::Shape(format!("{what} must be {r}x{c}, got {}x{found_cols}", rows.len())));
    }
    Matrix::from_row_major(r, c, rows.iter().flatten().copied().collect())
}

/// `{"matrices": [...]}`, the common shape of rep, Gram and cochain files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixList {
    pub matrices: Vec<MatrixRows>,
}

impl MatrixList {
    pub fn from_matrices<'a>(ms: impl IntoIterator<Item = &'a Matrix>) -> Self {
        Self { matrices: ms.into_iter().map(matrix_to_rows).collect() }
    }

    pub fn to_matrices(&self, shapes: &[(usize, usize)], what: &str) -> Result<Vec<Matrix>> {
        if self.matrices.len() != shapes.len() {
            return Err(Error::Parse(format!(
                "{what}: expected {} matrices, found {}",
                shapes.len(),
                self.matrices.len()
            )));
        }
        self.matrices
            .iter()
            .zip(shapes)
            .enumerate()
            .map(|(i, (rows, &shape))| rows_to_matrix(rows, shape, &format!("{what} {i}")))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowRecord {
    pub id: usize,
    pub src: usize,
    pub tgt: usize,
}

/// On-disk groupoid: structure maps plus the full composition table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidFile {
    pub n_objects: usize,
    pub arrows: Vec<ArrowRecord>,
    pub units: Vec<usize>,
    pub inverse: Vec<usize>,
    pub compose: Vec<[usize; 3]>,
}

impl GroupoidFile {
    pub fn from_groupoid(g: &FiniteGroupoid) -> Self {
        Self {
            n_objects: g.n_objects(),
            arrows: g.arrows().map(|a| ArrowRecord { id: a.0, src: g.source(a).0, tgt: g.target(a).0 }).collect(),
            units: g.objects().map(|x| g.unit(x).0).collect(),
            inverse: g.arrows().map(|a| g.inverse(a).0).collect(),
            compose: g.iter_composable_pairs().map(|(a, b)| [a.0, b.0, g.mul(a, b).0]).collect(),
        }
    }

    /// Builds the tables without checking the groupoid axioms; run
    /// [`FiniteGroupoid::validate`] on the result.
    pub fn to_groupoid(&self) -> Result<FiniteGroupoid> {
        if let Some((pos, rec)) = self.arrows.iter().enumerate().find(|(i, a)| a.id != *i) {
            return Err(Error::Parse(format!("arrow record {pos} has id {}, ids must be 0..n in order", rec.id)));
        }
        let source = self.arrows.iter().map(|a| ObjectId(a.src)).collect();
        let target = self.arrows.iter().map(|a| ObjectId(a.tgt)).collect();
        let unit = self.units.iter().map(|&u| ArrowId(u)).collect();
        let inverse = self.inverse.iter().map(|&i| ArrowId(i)).collect();
        let comps: Vec<(ArrowId, ArrowId, ArrowId)> =
            self.compose.iter().map(|&[a, b, ab]| (ArrowId(a), ArrowId(b), ArrowId(ab))).collect();
        FiniteGroupoid::from_tables(self.n_objects, source, target, unit, inverse, &comps)
    }
}

/// Parses JSON, reporting failures as `origin:line:column: message`.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    parse_json(&text, &path.display().to_string())
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value))?;
    Ok(())
}

/// CSV with header `i,b,r,step,quad_slack`; floats use the shortest
/// round-tripping representation.
pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["i", "b", "r", "step", "quad_slack"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["i", "b", "r", "step", "quad_slack"] {
        return Err(Error::Parse(format!("unexpected trace header {:?}", header.iter().collect::<Vec<_>>())));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub epsilon: f64,
    pub b0: f64,
    pub r0: f64,
    pub iterations: usize,
    pub reason: Termination,
}

impl From<&ConvergenceTrace> for TraceSummary {
    fn from(t: &ConvergenceTrace) -> Self {
        Self { epsilon: t.epsilon, b0: t.b0, r0: t.r0, iterations: t.iterations(), reason: t.terminated }
    }
}
