//! Scenario files: everything one experiment needs, resolved and validated.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroup, FiniteGroupoid, GroupAction, ObjectId, ValidationReport};
use crate::haar::{normalize_cutoff, CutoffFunction, HaarIntegrator, HaarSystem, NormalizingFunction};
use crate::io::{parse_json, GroupoidFile, MatrixList};
use crate::linalg::{FiberMetric, VectorBundle};
use crate::pseudorep::{perturb_representation, PseudoRep, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupoidSource {
    File { file: PathBuf },
    Generator { generator: GroupoidGenerator },
    Inline(GroupoidFile),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    /// `ℤ/n` translating `ℤ/m`.
    #[default]
    Rotation,
    /// Every element fixes every point.
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupoidGenerator {
    Pair {
        n: usize,
    },
    Action {
        group: String,
        points: usize,
        #[serde(default)]
        action: ActionKind,
    },
    Bundle {
        groups: Vec<String>,
    },
}

impl GroupoidGenerator {
    pub fn build(&self) -> Result<FiniteGroupoid> {
        match self {
            Self::Pair { n } => FiniteGroupoid::pair(*n),
            Self::Action { group, points, action } => {
                let group = FiniteGroup::by_name(group)?;
                let action = match action {
                    ActionKind::Rotation => {
                        let order = group.order();
                        if group.name() != format!("z{order}") {
                            return Err(Error::ActionLaw("rotation actions need a cyclic group".into()));
                        }
                        GroupAction::cyclic_rotation(order, *points)?
                    }
                    ActionKind::Trivial => GroupAction::trivial(group, *points)?,
                };
                FiniteGroupoid::action(&action)
            }
            Self::Bundle { groups } => {
                let groups = groups.iter().map(|g| FiniteGroup::by_name(g)).collect::<Result<Vec<_>>>()?;
                FiniteGroupoid::group_bundle(&groups)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BundleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    #[default]
    Euclidean,
    Gram {
        matrices: Vec<crate::io::MatrixRows>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HaarSpec {
    #[default]
    Counting,
    Weights {
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseRep {
    Named(String),
    Inline(MatrixList),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepGenerator {
    pub base_rep: BaseRep,
    pub magnitude: f64,
    pub seed: u64,
    #[serde(default)]
    pub keep_units: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepSource {
    Inline(MatrixList),
    File { file: PathBuf },
    Generator { generator: RepGenerator },
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    #[serde(default)]
    pub force: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, subset: None, force: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub groupoid: GroupoidSource,
    #[serde(default)]
    pub bundle: BundleSpec,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default)]
    pub haar: HaarSpec,
    /// Cut-off values per object, normalized on load; all ones if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Vec<f64>>,
    /// Identity representation if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<RepSource>,
    #[serde(default)]
    pub run: RunSpec,
}

/// A resolved scenario with every cross-reference checked.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub groupoid: FiniteGroupoid,
    pub bundle: VectorBundle,
    pub metric: FiberMetric,
    pub haar: HaarSystem,
    pub normalizer: NormalizingFunction,
    pub rep: PseudoRep,
    /// Unperturbed representation when the rep came from a generator.
    pub base: Option<PseudoRep>,
    pub run: RunSpec,
}

/// Outcome of validating a scenario stage by stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub groupoid: ValidationReport,
    pub haar: ValidationReport,
    pub normalization: ValidationReport,
    /// First fatal error, after which later stages were skipped.
    pub error: Option<String>,
    pub ok: bool,
}

fn rep_shapes(g: &FiniteGroupoid, bundle: &VectorBundle) -> Vec<(usize, usize)> {
    g.arrows().map(|a| (bundle.dim(g.target(a)), bundle.dim(g.source(a)))).collect()
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        parse_json(text, origin)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    fn load_groupoid(&self, base_dir: &Path) -> Result<FiniteGroupoid> {
        match &self.groupoid {
            GroupoidSource::Inline(file) => file.to_groupoid(),
            GroupoidSource::File { file } => crate::io::read_json::<GroupoidFile>(&base_dir.join(file))?.to_groupoid(),
            GroupoidSource::Generator { generator } => generator.build(),
        }
    }

    fn load_bundle(&self, g: &FiniteGroupoid) -> Result<VectorBundle> {
        match (&self.bundle.dims, self.bundle.dim) {
            (Some(_), Some(_)) => Err(Error::Parse("bundle: give either `dim` or `dims`, not both".into())),
            (Some(dims), None) => VectorBundle::new(g, dims.clone()),
            (None, dim) => Ok(VectorBundle::constant(g, dim.unwrap_or(1))),
        }
    }

    fn load_metric(&self, bundle: &VectorBundle) -> Result<FiberMetric> {
        match &self.metric {
            MetricSpec::Euclidean => Ok(FiberMetric::euclidean(bundle)),
            MetricSpec::Gram { matrices } => {
                let shapes: Vec<_> = bundle.dims().iter().map(|&d| (d, d)).collect();
                let grams = MatrixList { matrices: matrices.clone() }.to_matrices(&shapes, "metric Gram matrix")?;
                FiberMetric::from_grams(bundle, grams)
            }
        }
    }

    fn load_haar(&self, g: &FiniteGroupoid) -> Result<HaarSystem> {
        match &self.haar {
            HaarSpec::Counting => Ok(HaarSystem::counting(g)),
            HaarSpec::Weights { values } => HaarSystem::from_weights(g, values.clone()),
        }
    }

    fn load_normalizer(&self, g: &FiniteGroupoid, haar: &HaarSystem) -> Result<NormalizingFunction> {
        let cutoff = match &self.cutoff {
            Some(values) => CutoffFunction::new(g, values.clone())?,
            None => CutoffFunction::constant(g, 1.0)?,
        };
        normalize_cutoff(g, haar, &cutoff, None)
    }

    fn load_rep(
        &self,
        g: &FiniteGroupoid,
        bundle: &VectorBundle,
        metric: &FiberMetric,
        base_dir: &Path,
    ) -> Result<(PseudoRep, Option<PseudoRep>)> {
        let shapes = rep_shapes(g, bundle);
        let from_list = |list: &MatrixList| PseudoRep::new(g, bundle, list.to_matrices(&shapes, "rep matrix")?);
        match &self.rep {
            None => Ok((PseudoRep::identity(g, bundle), None)),
            Some(RepSource::Inline(list)) => Ok((from_list(list)?, None)),
            Some(RepSource::File { file }) => Ok((from_list(&crate::io::read_json(&base_dir.join(file))?)?, None)),
            Some(RepSource::Generator { generator }) => {
                let base = match &generator.base_rep {
                    BaseRep::Named(name) if name == "identity" => PseudoRep::identity(g, bundle),
                    BaseRep::Named(name) => return Err(Error::Parse(format!("unknown base_rep `{name}`"))),
                    BaseRep::Inline(list) => from_list(list)?,
                };
                let rep = perturb_representation(
                    g,
                    &base,
                    metric,
                    generator.magnitude,
                    generator.seed,
                    generator.keep_units,
                )?;
                Ok((rep, Some(base)))
            }
        }
    }

    /// Resolves file references against `base_dir` and validates every
    /// component; groupoid axiom or Haar invariance violations are errors.
    pub fn resolve(&self, base_dir: &Path) -> Result<Scenario> {
        let groupoid = self.load_groupoid(base_dir)?;
        let report = groupoid.validate();
        if !report.is_ok() {
            let first = &report.violations[0];
            return Err(Error::Precondition(format!(
                "groupoid fails {:?} at {:?}: {}",
                first.axiom, first.witness, first.detail
            )));
        }
        let bundle = self.load_bundle(&groupoid)?;
        let metric = self.load_metric(&bundle)?;
        let haar = self.load_haar(&groupoid)?;
        haar.ensure_left_invariant(&groupoid)?;
        let normalizer = self.load_normalizer(&groupoid, &haar)?;
        let (rep, base) = self.load_rep(&groupoid, &bundle, &metric, base_dir)?;
        if let Some(subset) = &self.run.subset {
            for &x in subset {
                if x >= groupoid.n_objects() {
                    return Err(Error::OutOfRange { what: "subset object", index: x, limit: groupoid.n_objects() });
                }
            }
        }
        Ok(Scenario { groupoid, bundle, metric, haar, normalizer, rep, base, run: self.run.clone() })
    }

    /// Runs every validation stage, collecting violations instead of
    /// stopping at the first.
    pub fn check(&self, base_dir: &Path) -> CheckReport {
        let mut report = CheckReport::default();
        let result = (|| -> Result<()> {
            let groupoid = self.load_groupoid(base_dir)?;
            report.groupoid = groupoid.validate();
            if !report.groupoid.is_ok() {
                return Ok(());
            }
            let bundle = self.load_bundle(&groupoid)?;
            let metric = self.load_metric(&bundle)?;
            let haar = self.load_haar(&groupoid)?;
            report.haar = haar.check_left_invariance(&groupoid);
            let normalizer = self.load_normalizer(&groupoid, &haar)?;
            report.normalization = normalizer.check(&groupoid, &haar);
            self.load_rep(&groupoid, &bundle, &metric, base_dir)?;
            Ok(())
        })();
        if let Err(e) = result {
            report.error = Some(e.to_string());
        }
        report.ok =
            report.error.is_none() && report.groupoid.is_ok() && report.haar.is_ok() && report.normalization.is_ok();
        report
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let file = ScenarioFile::read(path)?;
        file.resolve(path.parent().unwrap_or_else(|| Path::new(".")))
    }

    pub fn integrator(&self) -> HaarIntegrator<'_> {
        HaarIntegrator::new(&self.groupoid, &self.haar, &self.normalizer).expect("resolved scenarios are consistent")
    }

    /// `run.subset`, or every object.
    pub fn subset(&self) -> Vec<ObjectId> {
        match &self.run.subset {
            Some(s) => s.iter().map(|&x| ObjectId(x)).collect(),
            None => self.groupoid.objects().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::Axiom;

    const ETA: &str = r#"{
        "groupoid": {"generator": {"kind": "pair", "n": 2}},
        "bundle": {"dim": 1},
        "cutoff": [1.0, 1.0],
        "rep": {"matrices": [[[1.0]], [[1.0]], [[1.0]], [[1.04]]]}
    }"#;

    #[test]
    fn resolves_eta_scenario() {
        let s = ScenarioFile::parse(ETA, "eta").unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(s.groupoid.n_arrows(), 4);
        assert_eq!(s.normalizer.values(), &[0.5, 0.5]);
        assert_eq!(s.rep.map(crate::groupoid::ArrowId(3))[(0, 0)], 1.04);
        assert_eq!(s.run, RunSpec::default());
        assert!(ScenarioFile::parse(ETA, "eta").unwrap().check(Path::new(".")).ok);
    }

    #[test]
    fn generators_build_expected_sizes() {
        let g = |text: &str| serde_json::from_str::<GroupoidGenerator>(text).unwrap().build();
        assert_eq!(g(r#"{"kind":"pair","n":3}"#).unwrap().n_arrows(), 9);
        assert_eq!(g(r#"{"kind":"bundle","groups":["z2","z3"]}"#).unwrap().n_arrows(), 5);
        assert_eq!(g(r#"{"kind":"action","group":"z4","points":2}"#).unwrap().n_arrows(), 8);
        assert!(g(r#"{"kind":"pair","n":0}"#).is_err());
        assert!(g(r#"{"kind":"action","group":"s3","points":2}"#).is_err());
    }

    #[test]
    fn corrupted_compose_is_reported() {
        let g = FiniteGroupoid::pair(2).unwrap();
        let mut file = GroupoidFile::from_groupoid(&g);
        let entry = file.compose.iter_mut().find(|c| c[0] == 2 && c[1] == 1).unwrap();
        entry[2] = 0;
        let scenario = ScenarioFile {
            groupoid: GroupoidSource::Inline(file),
            bundle: BundleSpec::default(),
            metric: MetricSpec::default(),
            haar: HaarSpec::default(),
            cutoff: None,
            rep: None,
            run: RunSpec::default(),
        };
        let report = scenario.check(Path::new("."));
        assert!(!report.ok);
        assert!(report.groupoid.mentions(Axiom::ComposeEndpoints));
        assert!(scenario.resolve(Path::new(".")).is_err());
    }

    #[test]
    fn starved_orbit_is_an_error() {
        let text = r#"{"groupoid": {"generator": {"kind": "bundle", "groups": ["z2", "z3"]}}, "cutoff": [1.0, 0.0]}"#;
        let scenario = ScenarioFile::parse(text, "s").unwrap();
        let report = scenario.check(Path::new("."));
        assert!(!report.ok);
        assert!(report.error.unwrap().contains("vanishes on the whole orbit"));
    }

    #[test]
    fn generator_rep_is_deterministic() {
        let text = r#"{
            "groupoid": {"generator": {"kind": "pair", "n": 3}},
            "bundle": {"dim": 2},
            "rep": {"generator": {"base_rep": "identity", "magnitude": 0.01, "seed": 7}}
        }"#;
        let a = ScenarioFile::parse(text, "s").unwrap().resolve(Path::new(".")).unwrap();
        let b = ScenarioFile::parse(text, "s").unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(a.rep, b.rep);
        assert!(a.base.is_some());
    }

    #[test]
    fn scenario_file_round_trip() {
        let file = ScenarioFile::parse(ETA, "eta").unwrap();
        let text = crate::io::to_json_string(&file);
        assert_eq!(ScenarioFile::parse(&text, "again").unwrap(), file);
    }
}
