//! Dispatch of scenario analyses and assembly of the report bundle.

use std::path::Path;

use serde_json::{json, Map, Value};

use splitgeom::audit::{
    analyze_surface, audit_doubly_twisted, audit_extremal_phase_change, audit_no_strict_extremum,
    audit_phase_change, audit_rigidity, audit_slice_future, audit_trapped_no_strict_extremum,
    audit_trapped_nonexistence, expansion_propagation, falsify_trapped_nonexistence, AuditVerdict,
    DoublyTwistedInput, FalsificationConfig, SurfaceAnalysis, TheoremAudit, TheoremId,
};
use splitgeom::causal::{signed_h_projection, MarginalReading};
use splitgeom::identities::{identity_suite, slice_identity, SampleRegion};
use splitgeom::immersion::ImmersionKind;
use splitgeom::mesh::{StructuredGrid, SurfaceMesh};
use splitgeom::parabolicity::{
    finite_total_curvature, gaussian_curvature, quasi_isometry_certificate, total_curvature,
    ParabolicityCertificate,
};
use splitgeom::tau::{convergence_study, laplacian_report};
use splitgeom::SplitSpacetime;

use crate::error::CliError;
use crate::report::{render, tag, to_value, vertex_csv, Provenance};
use crate::scenario::{
    compile_with, expr, parse_scenario, quasi_isometry_input, CompiledSurface, GridSpec,
    ParabolicityDeclaration, Scenario, SpacetimeAnalysis, SurfaceAnalysis as Op,
};

/// Identity residual bounds (analytic derivatives).
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
pub const CONFORMAL_TOLERANCE: f64 = 1e-6;
/// Slice identity bounds, per vertex.
pub const SLICE_TOLERANCE: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_HYPOTHESIS_VIOLATED: i32 = 2;
pub const EXIT_COUNTEREXAMPLE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    /// Identity suites.
    Check,
    Classify,
    Laplacian,
    Audit,
    /// Randomized trials.
    Falsify,
    /// Everything.
    Report,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Check => "check",
            Verb::Classify => "classify",
            Verb::Laplacian => "laplacian",
            Verb::Audit => "audit",
            Verb::Falsify => "falsify",
            Verb::Report => "report",
        }
    }

    fn runs_op(self, op: &Op) -> bool {
        let home = match op {
            Op::MeanCurvature | Op::TrappedClassify { .. } | Op::SignedProjection | Op::GaussianCurvature => {
                Verb::Classify
            }
            Op::LaplacianTau | Op::Convergence { .. } => Verb::Laplacian,
            Op::QuasiIsometry(_) | Op::FiniteTotalCurvature | Op::Audit { .. } => Verb::Audit,
        };
        self == Verb::Report || self == home
    }

    fn runs_analysis(self, a: &SpacetimeAnalysis) -> bool {
        let home = match a {
            SpacetimeAnalysis::Identities { .. } | SpacetimeAnalysis::ExpansionPropagation { .. } => Verb::Check,
            SpacetimeAnalysis::Falsify(_) => Verb::Falsify,
            SpacetimeAnalysis::DoublyTwisted(_) => Verb::Audit,
        };
        self == Verb::Report || self == home
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub verb: Verb,
    /// Overrides `options.seed`.
    pub seed: Option<u64>,
    /// Overrides the node count per axis of every grid.
    pub grid: Option<usize>,
}

impl RunOptions {
    pub fn new(verb: Verb) -> Self {
        RunOptions {
            verb,
            seed: None,
            grid: None,
        }
    }
}

/// A finished run: the tagged JSON report and per-surface CSV tables.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    /// `(file name, contents)`.
    pub tables: Vec<(String, String)>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn report_text(&self) -> String {
        render(&self.report)
    }
}

#[derive(Default)]
struct Findings {
    audits: usize,
    flags: usize,
    violated: usize,
    not_checkable: usize,
    verdicts: Vec<String>,
}

impl Findings {
    fn record(&mut self, scope: &str, a: &TheoremAudit) {
        self.audits += 1;
        match a.verdict {
            AuditVerdict::CounterexampleFlag => self.flags += 1,
            AuditVerdict::HypothesisViolated => self.violated += 1,
            AuditVerdict::HypothesisNotCheckable => self.not_checkable += 1,
            AuditVerdict::ConsistentOnSamples => {}
        }
        self.verdicts.push(format!("{scope}: {}: {}", a.theorem.name(), a.verdict));
    }

    fn exit_code(&self) -> i32 {
        if self.flags > 0 {
            EXIT_COUNTEREXAMPLE
        } else if self.violated > 0 {
            EXIT_HYPOTHESIS_VIOLATED
        } else {
            EXIT_OK
        }
    }
}

const OVERRIDES: [(&str, Provenance); 13] = [
    ("tolerances", Provenance::ClosedForm),
    ("atCentre", Provenance::ClosedForm),
    // grid coordinates and scenario inputs are exact
    ("param", Provenance::ClosedForm),
    ("witness", Provenance::ClosedForm),
    ("region", Provenance::ClosedForm),
    ("t0", Provenance::ClosedForm),
    ("k", Provenance::ClosedForm),
    ("requiredOrder", Provenance::ClosedForm),
    ("spacings", Provenance::ClosedForm),
    ("laplacianOracle", Provenance::Oracle),
    ("convergence", Provenance::Oracle),
    ("totalCurvature", Provenance::Oracle),
    ("gaussianCurvatureRange", Provenance::Oracle),
];

fn grid_for(spec: &GridSpec, override_count: Option<usize>) -> Result<StructuredGrid, CliError> {
    let spec = match override_count {
        Some(n) => spec.with_count(n),
        None => spec.clone(),
    };
    spec.build().map_err(|e| CliError::Validation {
        at: None,
        message: e.to_string(),
    })
}

fn range(values: impl Iterator<Item = f64>) -> Value {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    json!({"min": lo, "max": hi})
}

/// Componentwise minimum and maximum of vectors of equal length.
fn component_range(vectors: &[Vec<f64>]) -> Value {
    let n = vectors.first().map_or(0, Vec::len);
    let lo: Vec<f64> = (0..n).map(|i| vectors.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..n).map(|i| vectors.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    json!({"min": lo, "max": hi})
}

fn centre(grid: &StructuredGrid) -> usize {
    let idx: Vec<usize> = grid.axes.iter().map(|a| a.count / 2).collect();
    grid.id(&idx)
}

fn surface_section(
    m: &SplitSpacetime,
    cs: &CompiledSurface,
    opts: &RunOptions,
    findings: &mut Findings,
) -> Result<Option<(Value, Option<(String, String)>)>, CliError> {
    let name = cs.spec.name.as_str();
    let ctx = |what: &str| format!("surface `{name}` ({what})");
    let grid = grid_for(&cs.spec.grid, opts.grid)?;
    let ops: Vec<&Op> = cs.spec.analyses.iter().filter(|op| opts.verb.runs_op(op)).collect();
    let slice_check = matches!(opts.verb, Verb::Check | Verb::Report)
        && matches!(cs.immersion.kind(), ImmersionKind::Slice { .. });
    if ops.is_empty() && !slice_check {
        return Ok(None);
    }
    let mut sec = Map::new();
    sec.insert("name".into(), json!(name));
    sec.insert("vertices".into(), json!(grid.len()));

    if slice_check {
        if let ImmersionKind::Slice { t0, axes, x2 } = cs.immersion.kind() {
            let s = slice_identity(m, *t0, axes, x2, &grid).map_err(CliError::geometry(ctx("slice identity")))?;
            sec.insert(
                "sliceIdentities".into(),
                json!({
                    "t0": s.t0,
                    "maxMeanVsHalfTraceXi": s.mean_vs_expansion,
                    "maxAbsLaplacianTau": s.laplacian,
                    "withinTolerance": s.mean_vs_expansion < SLICE_TOLERANCE && s.laplacian < SLICE_TOLERANCE,
                    "tolerances": {"perVertex": SLICE_TOLERANCE},
                }),
            );
        }
    }
    if ops.is_empty() {
        return Ok(Some((Value::Object(sec), None)));
    }

    let reading = ops
        .iter()
        .find_map(|op| match op {
            Op::TrappedClassify { marginal_reading } => Some(*marginal_reading),
            _ => None,
        })
        .unwrap_or(MarginalReading::default());
    let s: SurfaceAnalysis =
        analyze_surface(m, &cs.immersion, &grid, reading).map_err(CliError::geometry(ctx("sampling")))?;
    let mesh = SurfaceMesh::build(m, &cs.immersion, grid.clone()).map_err(CliError::geometry(ctx("mesh")))?;
    let gaussian = if grid.dim() == 2 {
        gaussian_curvature(&mesh).map_err(CliError::geometry(ctx("gaussian curvature")))?
    } else {
        vec![None; grid.len()]
    };

    let decl = &cs.spec.declarations;
    let mut certificates: Vec<ParabolicityCertificate> = match decl.parabolicity {
        ParabolicityDeclaration::Compact => vec![ParabolicityCertificate::compact()],
        ParabolicityDeclaration::Declared => vec![ParabolicityCertificate::declared()],
        ParabolicityDeclaration::None => Vec::new(),
    };
    for op in &ops {
        match op {
            Op::QuasiIsometry(q) => {
                let input = quasi_isometry_input(q, m.fiber_dim())?;
                certificates.push(
                    quasi_isometry_certificate(m, &cs.immersion, &input, &grid)
                        .map_err(CliError::geometry(ctx("quasi-isometry")))?,
                );
            }
            Op::FiniteTotalCurvature => certificates.push(
                finite_total_curvature(&mesh).map_err(CliError::geometry(ctx("finite total curvature")))?,
            ),
            _ => {}
        }
    }
    let chosen = certificates
        .iter()
        .find(|c| c.is_certified())
        .or(certificates.first());

    let mut audits = Vec::new();
    for op in &ops {
        match op {
            Op::MeanCurvature => {
                let c = &s.vertices[centre(&grid)];
                let means: Vec<Vec<f64>> = s.vertices.iter().map(|v| v.mean.clone()).collect();
                sec.insert(
                    "meanCurvature".into(),
                    json!({
                        "atCentre": {
                            "vertex": c.id,
                            "param": c.param,
                            "mean": c.mean,
                            "hDotPartialT": c.h_dot_partial_t,
                            "causalClass": c.mean_class,
                        },
                        "hDotPartialT": range(s.vertices.iter().map(|v| v.h_dot_partial_t)),
                        "meanComponents": component_range(&means),
                    }),
                );
            }
            Op::TrappedClassify { .. } => {
                sec.insert(
                    "trappedClassify".into(),
                    json!({
                        "class": s.trapped.class,
                        "counts": s.trapped.counts,
                        "marginalReading": s.trapped.marginal_reading,
                        "sampleBased": s.trapped.sample_based,
                        "caveat": "classified at mesh vertices only",
                    }),
                );
            }
            Op::SignedProjection => {
                let p = signed_h_projection(m, &cs.immersion, &grid)
                    .map_err(CliError::geometry(ctx("signed projection")))?;
                sec.insert(
                    "signedProjection".into(),
                    json!({
                        "allNonPositive": p.all_non_positive,
                        "allNonNegative": p.all_non_negative,
                        "mixed": p.mixed,
                        "range": range(p.values.iter().copied()),
                    }),
                );
            }
            Op::LaplacianTau => {
                let r = laplacian_report(m, &cs.immersion, &grid).map_err(CliError::geometry(ctx("laplacian")))?;
                let interior = r.vertices.iter().filter(|v| v.discrete_laplacian_tau.is_some()).count();
                sec.insert(
                    "laplacianTau".into(),
                    json!({
                        "maxAbsLaplacianTau": r.vertices.iter().map(|v| v.laplacian_tau.abs()).fold(0.0, f64::max),
                        "laplacianOracle": {
                            "maxDiscrepancy": r.max_discrepancy,
                            "interiorVertices": interior,
                        },
                    }),
                );
            }
            Op::Convergence { levels, min_order } => {
                let c = convergence_study(m, &cs.immersion, &grid, *levels, *min_order)
                    .map_err(CliError::geometry(ctx("convergence")))?;
                let order = c.min_order();
                sec.insert(
                    "convergence".into(),
                    json!({
                        "study": c,
                        "minObservedOrder": if order.is_finite() { Some(order) } else { None },
                        "requiredOrder": min_order,
                        "converged": c.converged,
                    }),
                );
            }
            Op::GaussianCurvature => {
                if grid.dim() != 2 {
                    return Err(CliError::geometry(ctx("gaussian curvature"))(
                        splitgeom::GeomError::UnsupportedDimension(grid.dim()),
                    ));
                }
                sec.insert(
                    "gaussianCurvature".into(),
                    json!({
                        "totalCurvature": total_curvature(&mesh, &gaussian),
                        "gaussianCurvatureRange": range(gaussian.iter().flatten().copied()),
                        "interiorVertices": gaussian.iter().flatten().count(),
                    }),
                );
            }
            Op::QuasiIsometry(_) | Op::FiniteTotalCurvature => {}
            Op::Audit { theorem, branch, t0 } => {
                let b = decl.boundedness;
                let t0v = t0.unwrap_or(0.0);
                let mut a = match theorem {
                    TheoremId::Rigidity => audit_rigidity(m, &s, *branch, b, chosen),
                    TheoremId::NoStrictExtremum => Ok(audit_no_strict_extremum(&s, *branch)),
                    TheoremId::TrappedNoStrictExtremum => Ok(audit_trapped_no_strict_extremum(&s, *branch)),
                    TheoremId::PhaseChangeRigidity => audit_phase_change(m, &s, t0v, b, chosen),
                    TheoremId::ExtremalPhaseChange => audit_extremal_phase_change(m, &s, t0v, b, chosen),
                    TheoremId::TrappedNonexistence | TheoremId::TwistedTrappedNonexistence => {
                        audit_trapped_nonexistence(m, &s, *branch, b, chosen)
                    }
                    TheoremId::SliceFutureNonexistence => audit_slice_future(m, &s, t0v, *branch, b, chosen),
                    TheoremId::DoublyTwistedGraph => unreachable!("rejected during validation"),
                }
                .map_err(CliError::geometry(ctx(theorem.name())))?;
                if *theorem == TheoremId::SliceFutureNonexistence {
                    a.notes.push(if decl.cauchy_slices {
                        "slices declared Cauchy: the chronological future of the slice is {t > t0}".into()
                    } else {
                        "slices not declared Cauchy: {t > t0} may be larger than the chronological future of the slice"
                            .into()
                    });
                }
                findings.record(name, &a);
                audits.push(a);
            }
        }
    }
    if !certificates.is_empty() {
        sec.insert("certificates".into(), to_value(&certificates));
    }
    if !audits.is_empty() {
        sec.insert("audits".into(), to_value(&audits));
    }
    let file = format!("{name}.csv");
    sec.insert("csv".into(), json!(file));
    let table = vertex_csv(&s.vertices, &gaussian)?;
    Ok(Some((Value::Object(sec), Some((file, table)))))
}

fn identities_section(m: &SplitSpacetime, region: &SampleRegion, samples: usize, seed: u64) -> Result<Value, CliError> {
    let r = identity_suite(m, region, samples, seed).map_err(CliError::geometry("identity suite"))?;
    let within = json!({
        "frameCompleteness": r.frame_completeness < IDENTITY_TOLERANCE,
        "traceDecomposition": r.trace_decomposition < IDENTITY_TOLERANCE,
        "divergence": r.divergence < IDENTITY_TOLERANCE,
        "conformalBridge": r.conformal_bridge < CONFORMAL_TOLERANCE,
        "sinhGradient": r.sinh_gradient < IDENTITY_TOLERANCE,
    });
    Ok(json!({
        "residuals": r,
        "withinTolerance": within,
        "tolerances": {"identity": IDENTITY_TOLERANCE, "conformalBridge": CONFORMAL_TOLERANCE},
        "region": region,
    }))
}

/// Runs the analyses selected by `opts.verb`.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<Outcome, CliError> {
    let compiled = compile_with(scenario, None)?;
    let m = &compiled.spacetime;
    let seed = opts.seed.unwrap_or(scenario.options.seed);
    let mut findings = Findings::default();

    let mut surfaces = Vec::new();
    let mut tables = Vec::new();
    for cs in &compiled.surfaces {
        if let Some((sec, table)) = surface_section(m, cs, opts, &mut findings)? {
            surfaces.push(sec);
            tables.extend(table);
        }
    }

    let mut analyses = Map::new();
    let selected: Vec<&SpacetimeAnalysis> = scenario.analyses.iter().filter(|a| opts.verb.runs_analysis(a)).collect();
    let has_identities = selected.iter().any(|a| matches!(a, SpacetimeAnalysis::Identities { .. }));
    if opts.verb == Verb::Check && !has_identities {
        let region = SampleRegion::standard(m.fiber_dim());
        analyses.insert(
            "identities".into(),
            identities_section(m, &region, scenario.options.samples, seed)?,
        );
    }
    let mut dt_audits = Vec::new();
    for a in selected {
        match a {
            SpacetimeAnalysis::Identities { region } => {
                let region = region.clone().unwrap_or_else(|| SampleRegion::standard(m.fiber_dim()));
                analyses.insert(
                    "identities".into(),
                    identities_section(m, &region, scenario.options.samples, seed)?,
                );
            }
            SpacetimeAnalysis::ExpansionPropagation { t0, region } => {
                let points = region.draw(scenario.options.samples, seed);
                let fiber: Vec<Vec<f64>> = points.iter().map(|p| p.x.clone()).collect();
                let r = expansion_propagation(m, *t0, &fiber, &points)
                    .map_err(CliError::geometry("expansion propagation"))?;
                analyses.insert("expansionPropagation".into(), to_value(&r));
            }
            SpacetimeAnalysis::Falsify(f) => {
                let cfg = FalsificationConfig {
                    trials: f.trials.unwrap_or(scenario.options.trials),
                    seed,
                    grid: grid_for(&f.grid, opts.grid)?,
                    family: f.family.clone(),
                    quasi_isometry: quasi_isometry_input(&f.quasi_isometry, m.fiber_dim())?,
                    branch: f.branch,
                    reading: f.marginal_reading,
                    x2: f.x2.clone(),
                };
                let audit = falsify_trapped_nonexistence(m, &cfg).map_err(CliError::geometry("falsification"))?;
                findings.record("falsify", &audit);
                analyses.insert("falsify".into(), to_value(&audit));
            }
            SpacetimeAnalysis::DoublyTwisted(d) => {
                let input = DoublyTwistedInput {
                    r0: d.r0,
                    u: expr(&d.u)?,
                    alpha1: expr(&d.alpha1)?,
                    alpha2: expr(&d.alpha2)?,
                    k: d.k,
                    gradient_bound: d.gradient_bound,
                    base: d.base,
                    boundedness: d.boundedness,
                    branch: d.branch,
                    reading: d.marginal_reading,
                };
                let audit = audit_doubly_twisted(m, &input, &grid_for(&d.grid, opts.grid)?)
                    .map_err(CliError::geometry("doubly twisted graph"))?;
                findings.record("doublyTwisted", &audit);
                dt_audits.push(audit);
            }
        }
    }
    if !dt_audits.is_empty() {
        analyses.insert("doublyTwisted".into(), to_value(&dt_audits));
    }

    let exit_code = findings.exit_code();
    let report = json!({
        "schemaVersion": crate::scenario::SCHEMA_VERSION,
        "scenario": scenario.name,
        "verb": opts.verb.name(),
        "seed": seed,
        "derivMode": scenario.options.deriv_mode,
        "spacetime": {
            "kind": m.kind().name(),
            "fiberDim": m.fiber_dim(),
        },
        "surfaces": surfaces,
        "analyses": analyses,
        "summary": {
            "audits": findings.audits,
            "counterexampleFlags": findings.flags,
            "hypothesisViolations": findings.violated,
            "notCheckable": findings.not_checkable,
            "verdicts": findings.verdicts,
            "exitCode": exit_code,
        },
    });
    Ok(Outcome {
        report: tag(report, Provenance::SampleEstimate, &OVERRIDES),
        tables,
        exit_code,
    })
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `report.json` and the CSV tables into `dir`.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join("report.json");
    std::fs::write(&path, outcome.report_text()).map_err(io(&path))?;
    for (name, text) in &outcome.tables {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(())
}

/// Reads, runs and writes; returns the process exit code. Diagnostics go to
/// stderr and, for failures, to `error.json` in `out`.
pub fn execute(scenario_path: &Path, out: &Path, opts: &RunOptions) -> i32 {
    let result = std::fs::read_to_string(scenario_path)
        .map_err(io(scenario_path))
        .and_then(|text| parse_scenario(&text))
        .and_then(|s| run(&s, opts))
        .and_then(|o| write_outcome(out, &o).map(|_| o));
    match result {
        Ok(o) => {
            let summary = &o.report["summary"];
            if let Some(v) = summary["verdicts"].as_array() {
                for line in v.iter().filter_map(Value::as_str) {
                    println!("{line}");
                }
            }
            println!("wrote {}", out.join("report.json").display());
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            if std::fs::create_dir_all(out).is_ok() {
                let _ = std::fs::write(out.join("error.json"), render(&e.to_json()));
            }
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_outrank_violations_and_not_checkable_is_silent() {
        let f = |flags, violated, not_checkable| Findings {
            audits: flags + violated + not_checkable,
            flags,
            violated,
            not_checkable,
            verdicts: Vec::new(),
        };
        assert_eq!(f(0, 0, 0).exit_code(), EXIT_OK);
        assert_eq!(f(0, 0, 4).exit_code(), EXIT_OK);
        assert_eq!(f(0, 2, 1).exit_code(), EXIT_HYPOTHESIS_VIOLATED);
        assert_eq!(f(1, 2, 0).exit_code(), EXIT_COUNTEREXAMPLE);
    }
}
