//! Command implementations behind the `groupoid-avg` binary.
//!
//! Each command returns a serializable report together with an
//! [`ExitStatus`]; the binary only parses arguments, writes files and maps
//! the status to a process exit code.

use serde::Serialize;

use crate::cohomology::{
    coboundary0, coboundary1, contract1, contract2, defect_cochain, is_cocycle, is_cocycle1, Cochain0, Cochain1,
    CoefficientSystem,
};
use crate::error::{Error, Result};
use crate::groupoid::ObjectId;
use crate::io::{GroupoidFile, TraceSummary};
use crate::linalg::FiberMetric;
use crate::metric_avg::{average_metric, averaged_grams, AverageOptions, InvariantMetricReport};
use crate::pseudorep::{
    defects, is_representation_over, iterate_average, mean_ratio, sup_distance, CertificateCheck, ConvergenceTrace,
    DefectReport, IterationOptions, NearRepReport, PseudoRep, Termination, REPRESENTATION_TOL,
};
use crate::scenario::{CheckReport, GroupoidGenerator, Scenario};

/// Tolerance on contraction identities.
pub const CONTRACTION_TOL: f64 = 1e-11;
/// Tolerance on `δδ = 0`, defect consistency and metric idempotence.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance on the isometry defect of an averaged metric.
pub const ISOMETRY_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    Validation,
    GateRefused,
    Certificate,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::Validation => 2,
            Self::GateRefused => 3,
            Self::Certificate => 4,
        }
    }

    pub fn for_error(err: &Error) -> Self {
        match err {
            Error::GateRefused { .. } => Self::GateRefused,
            _ => Self::Validation,
        }
    }
}

/// Builds and validates a generated groupoid.
pub fn cmd_gen(generator: &GroupoidGenerator) -> Result<GroupoidFile> {
    let g = generator.build()?;
    let report = g.validate();
    if let Some(v) = report.violations.first() {
        return Err(Error::Precondition(format!("generated groupoid fails {:?}: {}", v.axiom, v.detail)));
    }
    Ok(GroupoidFile::from_groupoid(&g))
}

pub fn cmd_check(report: &CheckReport) -> ExitStatus {
    if report.ok {
        ExitStatus::Success
    } else {
        ExitStatus::Validation
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Recovery {
    /// `sup_g ‖limit_g − λ_g‖` against the starting point.
    pub distance_to_start: f64,
    /// `2√3·b₀·r₀`
    pub bound: f64,
    /// `sup_g ‖limit_g − ρ_g‖` against the unperturbed representation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_to_base: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub gate: NearRepReport,
    pub refused: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<TraceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_defects: Option<DefectReport>,
    /// Whether the certificates below are claimed (the gate passed).
    pub certified: bool,
    pub certificates: Vec<CertificateCheck>,
    pub certificates_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<Recovery>,
    /// Whether the input is a representation over `run.subset`, when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representation_over_subset: Option<bool>,
    #[serde(skip)]
    pub trace: Option<ConvergenceTrace>,
    #[serde(skip)]
    pub limit: Option<PseudoRep>,
}

impl RunReport {
    /// 0 iff the run converged and every claimed certificate holds.
    pub fn status(&self) -> ExitStatus {
        match (&self.trace, self.refused) {
            (_, true) => ExitStatus::GateRefused,
            (Some(t), false) if t.terminated == Termination::Converged && self.certificates_hold => ExitStatus::Success,
            _ => ExitStatus::Certificate,
        }
    }
}

/// Runs the averaging iteration on the scenario's pseudo-representation.
pub fn cmd_avg(scenario: &Scenario) -> Result<RunReport> {
    let g = &scenario.groupoid;
    let start = defects(g, &scenario.rep, &scenario.metric);
    let gate = NearRepReport::from_defects(&start);
    let representation_over_subset =
        scenario.run.subset.as_ref().map(|_| {
            is_representation_over(g, &scenario.rep, &scenario.subset(), &scenario.metric, REPRESENTATION_TOL)
        });
    let options =
        IterationOptions { tol: scenario.run.tol, max_iter: scenario.run.max_iter, force: scenario.run.force };
    let integ = scenario.integrator();
    let (limit, trace) = match iterate_average(&integ, &scenario.rep, &scenario.metric, options) {
        Ok(out) => out,
        Err(Error::GateRefused { .. }) => {
            return Ok(RunReport {
                gate,
                refused: true,
                summary: None,
                final_defects: None,
                certified: false,
                certificates: Vec::new(),
                certificates_hold: false,
                recovery: None,
                representation_over_subset,
                trace: None,
                limit: None,
            });
        }
        Err(e) => return Err(e),
    };
    let certificates = if trace.certified { trace.certificates() } else { Vec::new() };
    let certificates_hold = certificates.iter().all(|c| c.holds);
    let distance_to_start = sup_distance(g, &limit, &scenario.rep, &scenario.metric)?;
    let distance_to_base = match &scenario.base {
        Some(base) => Some(sup_distance(g, &limit, base, &scenario.metric)?),
        None => None,
    };
    Ok(RunReport {
        gate,
        refused: false,
        summary: Some(TraceSummary::from(&trace)),
        final_defects: Some(defects(g, &limit, &scenario.metric)),
        certified: trace.certified,
        certificates,
        certificates_hold,
        recovery: Some(Recovery {
            distance_to_start,
            bound: 2.0 * 3.0_f64.sqrt() * trace.b0 * trace.r0,
            distance_to_base,
        }),
        representation_over_subset,
        trace: Some(trace),
        limit: Some(limit),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CohomologyMode {
    /// `δ(contract2(δX)) = δX` for a seeded 1-cochain `X`.
    Contract2Verify,
    /// `δ(contract1(δY)) = δY` for a seeded 0-cochain `Y`.
    Contract1Verify,
    /// `λ̂ = λ + contract2(Δ)·λ` for the scenario's pseudo-representation.
    DefectConsistency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    ScenarioRep,
    AveragedLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyReport {
    pub mode: CohomologyMode,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    /// Index of the pair, object or arrow with the largest residual.
    pub witness: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientSource>,
    /// Largest `‖δδ‖` on the seeded cochain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_squared: Option<f64>,
}

impl CohomologyReport {
    pub fn status(&self) -> ExitStatus {
        if self.pass {
            ExitStatus::Success
        } else {
            ExitStatus::Certificate
        }
    }
}

fn worst<'a>(a: impl Iterator<Item = (&'a crate::linalg::Matrix, &'a crate::linalg::Matrix)>) -> (f64, Option<usize>) {
    let mut sup = 0.0;
    let mut at = None;
    for (i, (x, y)) in a.enumerate() {
        let d = (x - y).frobenius_norm();
        if d > sup || at.is_none() {
            sup = d;
            at = Some(i);
        }
    }
    (sup, at)
}

/// The scenario's representation, or the limit of its averaging when it
/// is only a near representation.
fn coefficient_rep(scenario: &Scenario) -> Result<(PseudoRep, CoefficientSource)> {
    let d = defects(&scenario.groupoid, &scenario.rep, &scenario.metric);
    if d.r <= REPRESENTATION_TOL {
        return Ok((scenario.rep.clone(), CoefficientSource::ScenarioRep));
    }
    let opts = IterationOptions { tol: REPRESENTATION_TOL, max_iter: scenario.run.max_iter, force: false };
    let (limit, trace) = iterate_average(&scenario.integrator(), &scenario.rep, &scenario.metric, opts)?;
    if trace.terminated != Termination::Converged {
        return Err(Error::Precondition("averaging did not produce a representation for the coefficients".into()));
    }
    Ok((limit, CoefficientSource::AveragedLimit))
}

pub fn cmd_cohomology(scenario: &Scenario, mode: CohomologyMode, seed: u64) -> Result<CohomologyReport> {
    let g = &scenario.groupoid;
    let integ = scenario.integrator();
    match mode {
        CohomologyMode::Contract2Verify => {
            let (rep, source) = coefficient_rep(scenario)?;
            let sys = CoefficientSystem::linear(g, &scenario.bundle, &rep)?;
            let x = Cochain1::random(g, &sys, seed);
            let z = coboundary1(g, &sys, &x)?;
            let delta_squared = is_cocycle(g, &sys, &z, EXACT_TOL)?.sup;
            let zhat = contract2(&integ, &sys, &z)?;
            let back = coboundary1(g, &sys, &zhat)?;
            let (residual, witness) = worst(back.values().iter().zip(z.values()));
            Ok(CohomologyReport {
                mode,
                pass: residual <= CONTRACTION_TOL && delta_squared <= EXACT_TOL,
                residual,
                tolerance: CONTRACTION_TOL,
                witness,
                coefficients: Some(source),
                delta_squared: Some(delta_squared),
            })
        }
        CohomologyMode::Contract1Verify => {
            let (rep, source) = coefficient_rep(scenario)?;
            let sys = CoefficientSystem::linear(g, &scenario.bundle, &rep)?;
            let y = Cochain0::random(g, &sys, seed);
            let x = coboundary0(g, &sys, &y)?;
            let delta_squared = is_cocycle1(g, &sys, &x, EXACT_TOL)?.sup;
            let yhat = contract1(&integ, &sys, &x)?;
            let back = coboundary0(g, &sys, &yhat)?;
            let (residual, witness) = worst(back.values().iter().zip(x.values()));
            Ok(CohomologyReport {
                mode,
                pass: residual <= CONTRACTION_TOL && delta_squared <= EXACT_TOL,
                residual,
                tolerance: CONTRACTION_TOL,
                witness,
                coefficients: Some(source),
                delta_squared: Some(delta_squared),
            })
        }
        CohomologyMode::DefectConsistency => {
            let (sys, delta) = defect_cochain(g, &scenario.bundle, &scenario.rep)?;
            let dhat = contract2(&integ, &sys, &delta)?;
            let hat = mean_ratio(&integ, &scenario.rep)?;
            let rebuilt: Vec<_> =
                g.arrows().map(|a| scenario.rep.map(a) + &dhat.value(a).matmul(scenario.rep.map(a))).collect();
            let (residual, witness) = worst(rebuilt.iter().zip(hat.maps()));
            Ok(CohomologyReport {
                mode,
                pass: residual <= EXACT_TOL,
                residual,
                tolerance: EXACT_TOL,
                witness,
                coefficients: None,
                delta_squared: None,
            })
        }
    }
}

/// The averaged metric plus its certification outcome.
#[derive(Clone, Debug, Serialize)]
pub struct MetricRunReport {
    #[serde(flatten)]
    pub averaged: InvariantMetricReport,
    pub representation_over_subset: bool,
    /// Isometry certificate, claimed only over a representation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isometry_pass: Option<bool>,
    /// `max |Ĝ' − Ĝ|` after averaging the output again, when the input is a
    /// representation on the whole groupoid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idempotence_defect: Option<f64>,
    pub pass: bool,
}

impl MetricRunReport {
    pub fn status(&self) -> ExitStatus {
        if self.pass {
            ExitStatus::Success
        } else {
            ExitStatus::Certificate
        }
    }

    pub fn metric(&self) -> &FiberMetric {
        &self.averaged.metric
    }
}

pub fn cmd_metric(scenario: &Scenario) -> Result<MetricRunReport> {
    let g = &scenario.groupoid;
    let subset = scenario.subset();
    let integ = scenario.integrator();
    let opts = AverageOptions { check_support: true, ..Default::default() };
    let averaged = average_metric(&integ, &scenario.bundle, &scenario.rep, &scenario.metric, &subset, opts)?;
    let over_subset = is_representation_over(g, &scenario.rep, &subset, &scenario.metric, REPRESENTATION_TOL);
    let isometry_pass = over_subset.then_some(averaged.invariance_defect <= ISOMETRY_TOL);
    let all: Vec<ObjectId> = g.objects().collect();
    let global = defects(g, &scenario.rep, &scenario.metric).r <= REPRESENTATION_TOL;
    let idempotence_defect = if global {
        let again = averaged_grams(&integ, &scenario.rep, &averaged.metric)?;
        Some(all.iter().map(|&x| (&again[x.0] - averaged.metric.gram(x)).max_abs()).fold(0.0, f64::max))
    } else {
        None
    };
    let pass = isometry_pass.unwrap_or(true) && idempotence_defect.is_none_or(|d| d <= EXACT_TOL);
    Ok(MetricRunReport { averaged, representation_over_subset: over_subset, isometry_pass, idempotence_defect, pass })
}
