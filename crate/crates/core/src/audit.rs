//! Theorem hypothesis checklists and the randomized falsification harness.
//!
//! An audit never proves anything. It samples the hypotheses on a mesh,
//! evaluates the predicted conclusion, and reports whether the two are
//! consistent on the samples. A surface whose hypotheses all hold but whose
//! prediction fails raises `counterexample_flag`, which signals a numerics or
//! convention bug in this crate.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causal::{classify_components, classify_surface, CausalClass, MarginalReading, TrappedClass, TrappedReport};
use crate::curvature::{curvature, slice_shape_report};
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::immersion::Immersion;
use crate::mesh::StructuredGrid;
use crate::parabolicity::{
    exhaustion_trend, looks_unbounded, quasi_isometry_certificate, sandwich_check, BaseParabolicity,
    GradientBound, Method, ParabolicityCertificate, QuasiIsometryInput, Sandwich, Verdict, CURVATURE_TOLERANCE,
};
use crate::spacetime::{ChartPoint, FiberMetric, SpacetimeKind, SplitSpacetime};
use crate::tau::{conformal_from_geometry, laplacian_from_geometry, xi_sample};

/// Slack for sign hypotheses such as `tr ξ ≥ 0`.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-9;
/// Residuals below this count as zero in a prediction.
pub const PREDICTION_TOLERANCE: f64 = 1e-6;
/// Strictness margin for local extrema of τ.
pub const EXTREMUM_TOLERANCE: f64 = 1e-10;
/// Relative step size below which an exhaustion trend counts as flat.
pub const DRIFT_TOLERANCE: f64 = 1e-6;
/// Offsets from `t₀` at which a local phase change is probed.
pub const PHASE_PROBES: [f64; 3] = [1e-3, 1e-2, 5e-2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TheoremId {
    /// Parabolic surfaces with signed expansion and mean curvature lie in a slice.
    Rigidity,
    /// τ has no strict local minimum (resp. maximum) under the sign hypotheses.
    NoStrictExtremum,
    /// Rigidity around a slice where the spacetime changes phase.
    PhaseChangeRigidity,
    /// No parabolic future trapped surfaces in non-contracting spacetimes.
    TrappedNonexistence,
    /// Unit lapse, semi-definite slice shape operator and non-negative timelike
    /// sectional curvature rule out future trapped surfaces above the slice.
    SliceFutureNonexistence,
    /// τ has no strict local minimum on a future trapped surface.
    TrappedNoStrictExtremum,
    /// Trapped nonexistence for `−dt² + f g₀` with `∂_t f ≥ 0`.
    TwistedTrappedNonexistence,
    /// Graphs `Σ_{r₀,u}` in doubly twisted spacetimes.
    DoublyTwistedGraph,
    /// Extremal surfaces sit in the slice of a contracting phase change.
    ExtremalPhaseChange,
}

impl TheoremId {
    pub fn name(self) -> &'static str {
        use TheoremId::*;
        match self {
            Rigidity => "rigidity",
            NoStrictExtremum => "noStrictExtremum",
            PhaseChangeRigidity => "phaseChangeRigidity",
            TrappedNonexistence => "trappedNonexistence",
            SliceFutureNonexistence => "sliceFutureNonexistence",
            TrappedNoStrictExtremum => "trappedNoStrictExtremum",
            TwistedTrappedNonexistence => "twistedTrappedNonexistence",
            DoublyTwistedGraph => "doublyTwistedGraph",
            ExtremalPhaseChange => "extremalPhaseChange",
        }
    }
}

/// Which of the two time-dual statements is audited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Branch {
    /// Non-contracting, `ḡ(∂_t, H) ≤ 0`, bounded towards the past, minima.
    #[default]
    Future,
    /// Non-expanding, `ḡ(∂_t, H) ≥ 0`, bounded towards the future, maxima.
    Past,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Future => 1.0,
            Branch::Past => -1.0,
        }
    }
}

/// What the user asserts about the range of τ on Σ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Boundedness {
    #[default]
    Undeclared,
    BoundedBelow,
    BoundedAbove,
    Bounded,
    /// Closed surface; bounded on both sides.
    Compact,
}

impl Boundedness {
    fn covers(self, need: Side) -> bool {
        use Boundedness::*;
        match need {
            Side::Below => matches!(self, BoundedBelow | Bounded | Compact),
            Side::Above => matches!(self, BoundedAbove | Bounded | Compact),
            Side::Both => matches!(self, Bounded | Compact),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Below,
    Above,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "status")]
pub enum HypothesisStatus {
    VerifiedOnSamples,
    Violated {
        vertex: Option<usize>,
        param: Option<Vec<f64>>,
        detail: String,
    },
    Declared {
        note: String,
    },
    NotCheckable {
        reason: String,
    },
}

impl HypothesisStatus {
    /// Verified on samples or declared.
    pub fn holds(&self) -> bool {
        matches!(self, HypothesisStatus::VerifiedOnSamples | HypothesisStatus::Declared { .. })
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, HypothesisStatus::Violated { .. })
    }

    fn violated(detail: impl Into<String>) -> Self {
        HypothesisStatus::Violated {
            vertex: None,
            param: None,
            detail: detail.into(),
        }
    }

    fn not_checkable(reason: impl Into<String>) -> Self {
        HypothesisStatus::NotCheckable { reason: reason.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Hypothesis {
    pub name: String,
    #[serde(flatten)]
    pub status: HypothesisStatus,
}

impl Hypothesis {
    fn new(name: &str, status: HypothesisStatus) -> Self {
        Hypothesis {
            name: name.into(),
            status,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AuditVerdict {
    ConsistentOnSamples,
    HypothesisViolated,
    HypothesisNotCheckable,
    CounterexampleFlag,
}

impl fmt::Display for AuditVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditVerdict::ConsistentOnSamples => "consistent on samples",
            AuditVerdict::HypothesisViolated => "hypothesis violated (witness)",
            AuditVerdict::HypothesisNotCheckable => "hypothesis not checkable",
            AuditVerdict::CounterexampleFlag => "COUNTEREXAMPLE-FLAG (bug)",
        })
    }
}

/// Hypotheses that fail at a reported extremum of τ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessFinding {
    pub vertex: usize,
    pub param: Vec<f64>,
    pub tau: f64,
    pub violated: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremAudit {
    pub theorem: TheoremId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    pub hypotheses: Vec<Hypothesis>,
    pub prediction: String,
    /// Expected value of each machine flag.
    pub predicted: BTreeMap<String, bool>,
    pub observed: BTreeMap<String, bool>,
    /// Numbers behind the observed flags.
    pub evidence: BTreeMap<String, f64>,
    /// All hypotheses verified on samples or declared.
    pub applicable: bool,
    pub prediction_holds: bool,
    /// `applicable ⇒ prediction_holds`.
    pub consistent: bool,
    pub counterexample_flag: bool,
    pub verdict: AuditVerdict,
    /// When the prediction fails: the hypotheses that are violated or not checkable.
    pub blocking: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub witnesses: Vec<WitnessFinding>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extrema: Option<ExtremumReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub falsification: Option<FalsificationSummary>,
    pub sample_based: bool,
    pub notes: Vec<String>,
}

impl TheoremAudit {
    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

struct Draft {
    theorem: TheoremId,
    branch: Option<Branch>,
    hypotheses: Vec<Hypothesis>,
    prediction: String,
    predicted: BTreeMap<String, bool>,
    observed: BTreeMap<String, bool>,
    evidence: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl Draft {
    fn new(theorem: TheoremId, branch: Option<Branch>, prediction: &str) -> Self {
        Draft {
            theorem,
            branch,
            hypotheses: Vec::new(),
            prediction: prediction.into(),
            predicted: BTreeMap::new(),
            observed: BTreeMap::new(),
            evidence: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn hyp(&mut self, name: &str, status: HypothesisStatus) {
        self.hypotheses.push(Hypothesis::new(name, status));
    }

    fn expect(&mut self, flag: &str, expected: bool, observed: bool) {
        self.predicted.insert(flag.into(), expected);
        self.observed.insert(flag.into(), observed);
    }

    fn evidence(&mut self, key: &str, value: f64) {
        self.evidence.insert(key.into(), value);
    }

    fn finish(self) -> TheoremAudit {
        let applicable = self.hypotheses.iter().all(|h| h.status.holds());
        let prediction_holds = self
            .predicted
            .iter()
            .all(|(k, v)| self.observed.get(k) == Some(v));
        let counterexample_flag = applicable && !prediction_holds;
        let blocking = if prediction_holds {
            Vec::new()
        } else {
            self.hypotheses
                .iter()
                .filter(|h| !h.status.holds())
                .map(|h| h.name.clone())
                .collect()
        };
        let verdict = if counterexample_flag {
            AuditVerdict::CounterexampleFlag
        } else if applicable {
            AuditVerdict::ConsistentOnSamples
        } else if self.hypotheses.iter().any(|h| h.status.is_violated()) {
            AuditVerdict::HypothesisViolated
        } else {
            AuditVerdict::HypothesisNotCheckable
        };
        TheoremAudit {
            theorem: self.theorem,
            branch: self.branch,
            hypotheses: self.hypotheses,
            prediction: self.prediction,
            predicted: self.predicted,
            observed: self.observed,
            evidence: self.evidence,
            applicable,
            prediction_holds,
            consistent: !counterexample_flag,
            counterexample_flag,
            verdict,
            blocking,
            witnesses: Vec::new(),
            extrema: None,
            falsification: None,
            sample_based: true,
            notes: self.notes,
        }
    }
}

/// Everything the audits read at one vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VertexRecord {
    pub id: usize,
    pub param: Vec<f64>,
    pub point: ChartPoint,
    pub boundary: bool,
    pub tau: f64,
    pub beta: f64,
    pub d_beta_dt: f64,
    pub tr_xi: f64,
    pub h_dot_partial_t: f64,
    pub mean: Vec<f64>,
    pub mean_class: CausalClass,
    pub grad_tau_norm_sq: f64,
    pub sinh2_theta: f64,
    pub theta: f64,
    pub laplacian_tau: f64,
    pub conformal_laplacian_tau: Option<f64>,
    pub non_contracting: bool,
    pub non_expanding: bool,
    pub expanding: bool,
    pub contracting: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurfaceAnalysis {
    pub grid: StructuredGrid,
    pub vertices: Vec<VertexRecord>,
    pub trapped: TrappedReport,
    pub extrema: ExtremumReport,
}

impl SurfaceAnalysis {
    pub fn tau(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.tau).collect()
    }

    pub fn points(&self) -> Vec<ChartPoint> {
        self.vertices.iter().map(|v| v.point.clone()).collect()
    }

    /// `max τ − min τ`.
    pub fn tau_spread(&self) -> f64 {
        let (lo, hi) = self
            .vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.tau), hi.max(v.tau)));
        hi - lo
    }

    fn max_abs(&self, f: impl Fn(&VertexRecord) -> f64) -> f64 {
        self.vertices.iter().map(|v| f(v).abs()).fold(0.0, f64::max)
    }
}

/// Samples the geometry of `imm` at every grid vertex.
pub fn analyze_surface(
    m: &SplitSpacetime,
    imm: &Immersion,
    grid: &StructuredGrid,
    reading: MarginalReading,
) -> Result<SurfaceAnalysis> {
    if grid.dim() != imm.param_dim() {
        return Err(GeomError::Usage(format!(
            "grid has {} axes, immersion has {} parameters",
            grid.dim(),
            imm.param_dim()
        )));
    }
    let vertices: Vec<VertexRecord> = (0..grid.len())
        .into_par_iter()
        .map(|id| {
            let q = grid.param(id);
            let geo = imm.geometry(m, &q)?;
            let mono = m.monotonicity_at(&geo.point)?;
            Ok(VertexRecord {
                id,
                boundary: grid.is_boundary(id),
                tau: geo.point.t,
                beta: geo.beta(),
                d_beta_dt: geo.sample.d_beta_dt,
                tr_xi: xi_sample(&geo).tr_xi,
                h_dot_partial_t: geo.h_dot_partial_t(),
                mean: geo.mean.iter().copied().collect(),
                mean_class: classify_components(&geo.g, &geo.mean),
                grad_tau_norm_sq: geo.grad_tau_norm_sq(),
                sinh2_theta: geo.sinh2_theta(),
                theta: geo.theta(),
                laplacian_tau: laplacian_from_geometry(&geo),
                conformal_laplacian_tau: conformal_from_geometry(&geo).ok(),
                non_contracting: mono.non_contracting,
                non_expanding: mono.non_expanding,
                expanding: mono.expanding,
                contracting: mono.contracting,
                point: geo.point,
                param: q,
            })
        })
        .collect::<Result<_>>()?;
    let per_vertex: Vec<CausalClass> = vertices.iter().map(|v| v.mean_class).collect();
    let class = classify_surface(&per_vertex, reading)?;
    let mut counts = BTreeMap::new();
    for c in &per_vertex {
        *counts.entry(*c).or_insert(0) += 1;
    }
    let tau: Vec<f64> = vertices.iter().map(|v| v.tau).collect();
    let extrema = strict_local_extrema(grid, &tau)?;
    Ok(SurfaceAnalysis {
        grid: grid.clone(),
        vertices,
        trapped: TrappedReport {
            class,
            per_vertex,
            counts,
            marginal_reading: reading,
            sample_based: true,
        },
        extrema,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Extremum {
    pub vertex: usize,
    pub param: Vec<f64>,
    pub tau: f64,
    /// Smallest gap to a neighbour.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtremumReport {
    pub strict_local_minima: Vec<Extremum>,
    pub strict_local_maxima: Vec<Extremum>,
    /// Boundary vertices are never reported.
    pub boundary_excluded: usize,
    pub tolerance: f64,
}

/// Interior vertices where τ is below (above) every grid neighbour by more
/// than [`EXTREMUM_TOLERANCE`].
pub fn strict_local_extrema(grid: &StructuredGrid, tau: &[f64]) -> Result<ExtremumReport> {
    if tau.len() != grid.len() {
        return Err(GeomError::Usage(format!(
            "field has {} values for {} vertices",
            tau.len(),
            grid.len()
        )));
    }
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    let mut boundary_excluded = 0;
    for id in 0..grid.len() {
        if grid.is_boundary(id) {
            boundary_excluded += 1;
            continue;
        }
        let nb = grid.neighbors(id);
        if nb.is_empty() {
            continue;
        }
        let below = nb.iter().map(|&j| tau[j] - tau[id]).fold(f64::INFINITY, f64::min);
        let above = nb.iter().map(|&j| tau[id] - tau[j]).fold(f64::INFINITY, f64::min);
        let entry = |margin| Extremum {
            vertex: id,
            param: grid.param(id),
            tau: tau[id],
            margin,
        };
        if below > EXTREMUM_TOLERANCE {
            minima.push(entry(below));
        }
        if above > EXTREMUM_TOLERANCE {
            maxima.push(entry(above));
        }
    }
    Ok(ExtremumReport {
        strict_local_minima: minima,
        strict_local_maxima: maxima,
        boundary_excluded,
        tolerance: EXTREMUM_TOLERANCE,
    })
}

/// An increasing trend whose steps never shrink by more than 10%: linear or
/// faster growth, as opposed to a bounded tail levelling off.
fn drifts(trend: &[f64]) -> bool {
    let scale = 1.0 + trend.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let d: Vec<f64> = trend.windows(2).map(|w| w[1] - w[0]).collect();
    !d.is_empty()
        && d.iter().all(|&x| x > DRIFT_TOLERANCE * scale)
        && d.windows(2).all(|w| w[1] >= 0.9 * w[0])
}

fn argmin(values: &[f64]) -> usize {
    (0..values.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b })
}

fn boundedness_status(s: &SurfaceAnalysis, decl: Boundedness, need: Side) -> HypothesisStatus {
    let tau = s.tau();
    if decl != Boundedness::Compact {
        let neg: Vec<f64> = tau.iter().map(|t| -t).collect();
        let mut found = Vec::new();
        if need != Side::Above && drifts(&exhaustion_trend(&s.grid, &neg)) {
            found.push((argmin(&tau), "tau keeps decreasing across the exhaustion (unbounded below on the samples)"));
        }
        if need != Side::Below && drifts(&exhaustion_trend(&s.grid, &tau)) {
            found.push((argmin(&neg), "tau keeps increasing across the exhaustion (unbounded above on the samples)"));
        }
        if let Some(&(id, detail)) = found.first() {
            return HypothesisStatus::Violated {
                vertex: Some(id),
                param: Some(s.vertices[id].param.clone()),
                detail: detail.into(),
            };
        }
    }
    if decl.covers(need) {
        HypothesisStatus::Declared {
            note: "declared; the sampled exhaustion trend shows no drift".into(),
        }
    } else {
        HypothesisStatus::not_checkable("no boundedness declaration; finite samples cannot decide it")
    }
}

/// Status of "Σ is parabolic" from a supplied certificate.
pub fn parabolic_status(cert: Option<&ParabolicityCertificate>) -> HypothesisStatus {
    let Some(c) = cert else {
        return HypothesisStatus::not_checkable("no parabolicity certificate supplied");
    };
    match &c.verdict {
        Verdict::Certified => match c.method {
            Method::Compactness | Method::DeclaredParabolicBase => HypothesisStatus::Declared {
                note: c.notes.join("; "),
            },
            _ => HypothesisStatus::VerifiedOnSamples,
        },
        Verdict::RefutedHypothesis {
            condition,
            witness,
            detail,
        } => HypothesisStatus::Violated {
            vertex: None,
            param: witness.clone(),
            detail: format!("{condition}: {detail}"),
        },
        Verdict::Inconclusive { reason } => HypothesisStatus::not_checkable(reason.clone()),
    }
}

fn proper_time_status(m: &SplitSpacetime, s: &SurfaceAnalysis, closed: bool) -> Result<HypothesisStatus> {
    let rate = m.moderate_proper_time_rate(&s.points())?;
    if !rate.positive {
        return Ok(HypothesisStatus::violated(format!(
            "beta ranges over [{}, {}] on the samples",
            rate.inf_estimate, rate.sup_estimate
        )));
    }
    if !closed {
        let beta: Vec<f64> = s.vertices.iter().map(|v| v.beta).collect();
        let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
        if looks_unbounded(&exhaustion_trend(&s.grid, &beta)) || looks_unbounded(&exhaustion_trend(&s.grid, &inv)) {
            return Ok(HypothesisStatus::violated(
                "beta or 1/beta grows without visible bound across the exhaustion",
            ));
        }
    }
    Ok(HypothesisStatus::VerifiedOnSamples)
}

/// Every vertex satisfies `ok`; otherwise the preferred or first failing vertex is the witness.
fn pointwise(
    s: &SurfaceAnalysis,
    prefer: &[usize],
    ok: impl Fn(&VertexRecord) -> bool,
    describe: impl Fn(&VertexRecord) -> String,
) -> HypothesisStatus {
    let failing = prefer
        .iter()
        .map(|&i| &s.vertices[i])
        .find(|v| !ok(v))
        .or_else(|| s.vertices.iter().find(|v| !ok(v)));
    match failing {
        None => HypothesisStatus::VerifiedOnSamples,
        Some(v) => HypothesisStatus::Violated {
            vertex: Some(v.id),
            param: Some(v.param.clone()),
            detail: describe(v),
        },
    }
}

fn expansion_sign_ok(v: &VertexRecord, branch: Branch) -> bool {
    let s = branch.sign();
    s * v.tr_xi >= -HYPOTHESIS_TOLERANCE && s * v.d_beta_dt <= HYPOTHESIS_TOLERANCE
}

fn mean_sign_ok(v: &VertexRecord, branch: Branch) -> bool {
    branch.sign() * v.h_dot_partial_t <= HYPOTHESIS_TOLERANCE
}

fn expansion_detail(v: &VertexRecord) -> String {
    format!("tr xi = {:.6e}, d_t beta = {:.6e}", v.tr_xi, v.d_beta_dt)
}

fn mean_detail(v: &VertexRecord) -> String {
    format!("g(d_t, H) = {:.6e}", v.h_dot_partial_t)
}

fn monotone_ok(v: &VertexRecord, branch: Branch) -> bool {
    match branch {
        Branch::Future => v.non_contracting,
        Branch::Past => v.non_expanding,
    }
}

fn monotone_name(branch: Branch) -> &'static str {
    match branch {
        Branch::Future => "nonContracting",
        Branch::Past => "nonExpanding",
    }
}

fn bounded_name(branch: Branch) -> &'static str {
    match branch {
        Branch::Future => "boundedAwayFromPastInfinity",
        Branch::Past => "boundedAwayFromFutureInfinity",
    }
}

fn bounded_side(branch: Branch) -> Side {
    match branch {
        Branch::Future => Side::Below,
        Branch::Past => Side::Above,
    }
}

fn spacelike_or_zero(s: &SurfaceAnalysis) -> bool {
    s.vertices
        .iter()
        .all(|v| matches!(v.mean_class, CausalClass::Spacelike | CausalClass::Zero))
}

/// Common slice-rigidity predictions: τ constant, the three residuals vanish,
/// and `H` is spacelike or zero.
fn slice_predictions(d: &mut Draft, s: &SurfaceAnalysis, include_mean: bool) {
    let spread = s.tau_spread();
    let tr_xi = s.max_abs(|v| v.tr_xi);
    let db = s.max_abs(|v| v.d_beta_dt);
    let hd = s.max_abs(|v| v.h_dot_partial_t);
    d.evidence("tauSpread", spread);
    d.evidence("maxAbsTrXi", tr_xi);
    d.evidence("maxAbsDBetaDt", db);
    d.evidence("maxAbsHDotPartialT", hd);
    d.expect("tauConstant", true, spread < PREDICTION_TOLERANCE);
    d.expect("trXiVanishes", true, tr_xi < PREDICTION_TOLERANCE);
    d.expect("dBetaDtVanishes", true, db < PREDICTION_TOLERANCE);
    if include_mean {
        d.expect("hDotPartialTVanishes", true, hd < PREDICTION_TOLERANCE);
    }
    d.expect("meanCurvatureSpacelikeOrZero", true, spacelike_or_zero(s));
}

/// Rigidity in a slice under signed expansion and mean curvature.
pub fn audit_rigidity(
    m: &SplitSpacetime,
    s: &SurfaceAnalysis,
    branch: Branch,
    boundedness: Boundedness,
    certificate: Option<&ParabolicityCertificate>,
) -> Result<TheoremAudit> {
    let mut d = Draft::new(
        TheoremId::Rigidity,
        Some(branch),
        "Σ lies in a slice: τ constant, d_t beta = tr xi = g(d_t, H) = 0, and H spacelike or zero",
    );
    d.hyp(
        "expansionSign",
        pointwise(s, &[], |v| expansion_sign_ok(v, branch), expansion_detail),
    );
    d.hyp(
        "moderateProperTimeRate",
        proper_time_status(m, s, boundedness == Boundedness::Compact)?,
    );
    d.hyp("meanCurvatureSign", pointwise(s, &[], |v| mean_sign_ok(v, branch), mean_detail));
    d.hyp(bounded_name(branch), boundedness_status(s, boundedness, bounded_side(branch)));
    d.hyp("parabolic", parabolic_status(certificate));
    slice_predictions(&mut d, s, true);
    let mut audit = d.finish();
    audit.extrema = Some(s.extrema.clone());
    Ok(audit)
}

fn witness_findings(
    s: &SurfaceAnalysis,
    extrema: &[Extremum],
    checks: &[(&str, &dyn Fn(&VertexRecord) -> bool)],
) -> Vec<WitnessFinding> {
    extrema
        .iter()
        .map(|e| {
            let v = &s.vertices[e.vertex];
            WitnessFinding {
                vertex: e.vertex,
                param: e.param.clone(),
                tau: e.tau,
                violated: checks
                    .iter()
                    .filter(|(_, ok)| !ok(v))
                    .map(|(n, _)| n.to_string())
                    .collect(),
            }
        })
        .collect()
}

fn extremum_side(s: &SurfaceAnalysis, branch: Branch) -> &[Extremum] {
    match branch {
        Branch::Future => &s.extrema.strict_local_minima,
        Branch::Past => &s.extrema.strict_local_maxima,
    }
}

/// No strict local minimum (maximum) of τ under the sign hypotheses.
pub fn audit_no_strict_extremum(s: &SurfaceAnalysis, branch: Branch) -> TheoremAudit {
    let found = extremum_side(s, branch);
    let ids: Vec<usize> = found.iter().map(|e| e.vertex).collect();
    let (flag, text) = match branch {
        Branch::Future => ("noStrictLocalMinimum", "τ has no strict local minimum on Σ"),
        Branch::Past => ("noStrictLocalMaximum", "τ has no strict local maximum on Σ"),
    };
    let mut d = Draft::new(TheoremId::NoStrictExtremum, Some(branch), text);
    d.hyp(
        "expansionSign",
        pointwise(s, &ids, |v| expansion_sign_ok(v, branch), expansion_detail),
    );
    d.hyp("meanCurvatureSign", pointwise(s, &ids, |v| mean_sign_ok(v, branch), mean_detail));
    d.expect(flag, true, found.is_empty());
    d.evidence("strictExtrema", found.len() as f64);
    let exp = |v: &VertexRecord| expansion_sign_ok(v, branch);
    let mean = |v: &VertexRecord| mean_sign_ok(v, branch);
    let witnesses = witness_findings(s, found, &[("expansionSign", &exp), ("meanCurvatureSign", &mean)]);
    let mut audit = d.finish();
    audit.witnesses = witnesses;
    audit.extrema = Some(s.extrema.clone());
    audit
}

fn trapped_on_branch(class: TrappedClass, branch: Branch) -> bool {
    match branch {
        Branch::Future => class.is_future(),
        Branch::Past => class.is_past(),
    }
}

fn causal_on_branch(c: CausalClass, branch: Branch) -> bool {
    c == CausalClass::Zero
        || match branch {
            Branch::Future => c.is_future_causal(),
            Branch::Past => c.is_past_causal(),
        }
}

/// No strict local minimum (maximum) of τ on a future (past) trapped surface.
pub fn audit_trapped_no_strict_extremum(s: &SurfaceAnalysis, branch: Branch) -> TheoremAudit {
    let found = extremum_side(s, branch);
    let ids: Vec<usize> = found.iter().map(|e| e.vertex).collect();
    let (flag, text) = match branch {
        Branch::Future => ("noStrictLocalMinimum", "τ has no strict local minimum on the trapped surface"),
        Branch::Past => ("noStrictLocalMaximum", "τ has no strict local maximum on the trapped surface"),
    };
    let mut d = Draft::new(TheoremId::TrappedNoStrictExtremum, Some(branch), text);
    d.hyp(
        monotone_name(branch),
        pointwise(s, &ids, |v| monotone_ok(v, branch), |v| {
            format!("lie eigenvalue sign or d_t beta = {:.6e} has the wrong sign", v.d_beta_dt)
        }),
    );
    let class = s.trapped.class;
    let trapped_name = match branch {
        Branch::Future => "futureTrapped",
        Branch::Past => "pastTrapped",
    };
    d.hyp(
        trapped_name,
        if trapped_on_branch(class, branch) {
            HypothesisStatus::VerifiedOnSamples
        } else {
            let bad = ids
                .iter()
                .map(|&i| &s.vertices[i])
                .chain(s.vertices.iter())
                .find(|v| !causal_on_branch(v.mean_class, branch));
            HypothesisStatus::Violated {
                vertex: bad.map(|v| v.id),
                param: bad.map(|v| v.param.clone()),
                detail: format!("surface classified {}", class.name()),
            }
        },
    );
    d.expect(flag, true, found.is_empty());
    d.evidence("strictExtrema", found.len() as f64);
    let mono = |v: &VertexRecord| monotone_ok(v, branch);
    let causal = |v: &VertexRecord| causal_on_branch(v.mean_class, branch);
    let witnesses = witness_findings(s, found, &[(monotone_name(branch), &mono), (trapped_name, &causal)]);
    let mut audit = d.finish();
    audit.witnesses = witnesses;
    audit.extrema = Some(s.extrema.clone());
    audit
}

/// Rigidity around a slice `t₀` where the spacetime switches from
/// non-contracting to non-expanding.
pub fn audit_phase_change(
    m: &SplitSpacetime,
    s: &SurfaceAnalysis,
    t0: f64,
    boundedness: Boundedness,
    certificate: Option<&ParabolicityCertificate>,
) -> Result<TheoremAudit> {
    let mut d = Draft::new(
        TheoremId::PhaseChangeRigidity,
        None,
        "Σ lies in the slice t = t0: τ ≡ t0, d_t beta = tr xi = 0, and H spacelike or zero",
    );
    let side = |v: &VertexRecord| {
        let dt = v.tau - t0;
        if dt < -HYPOTHESIS_TOLERANCE {
            expansion_sign_ok(v, Branch::Future)
        } else if dt > HYPOTHESIS_TOLERANCE {
            expansion_sign_ok(v, Branch::Past)
        } else {
            true
        }
    };
    d.hyp("phaseSigns", pointwise(s, &[], side, |v| {
        format!("at tau - t0 = {:.6e}: {}", v.tau - t0, expansion_detail(v))
    }));
    d.hyp(
        "moderateProperTimeRate",
        proper_time_status(m, s, boundedness == Boundedness::Compact)?,
    );
    d.hyp(
        "meanCurvaturePhaseSign",
        pointwise(
            s,
            &[],
            |v| (v.tau - t0) * v.h_dot_partial_t >= -HYPOTHESIS_TOLERANCE,
            |v| format!("(tau - t0) g(d_t, H) = {:.6e}", (v.tau - t0) * v.h_dot_partial_t),
        ),
    );
    d.hyp("boundedAwayFromInfinity", boundedness_status(s, boundedness, Side::Both));
    d.hyp("parabolic", parabolic_status(certificate));
    let off = s.max_abs(|v| v.tau - t0);
    d.evidence("maxAbsTauMinusT0", off);
    d.expect("tauEqualsT0", true, off < PREDICTION_TOLERANCE);
    slice_predictions(&mut d, s, false);
    Ok(d.finish())
}

/// Expanding just before `t₀` and contracting just after, at each fiber point.
fn phase_change_status(m: &SplitSpacetime, s: &SurfaceAnalysis, t0: f64) -> Result<HypothesisStatus> {
    for v in &s.vertices {
        for eps in PHASE_PROBES {
            let before = m.monotonicity_at(&ChartPoint::new(t0 - eps, v.point.x.clone()))?;
            let after = m.monotonicity_at(&ChartPoint::new(t0 + eps, v.point.x.clone()))?;
            if !before.expanding || !after.contracting {
                return Ok(HypothesisStatus::Violated {
                    vertex: Some(v.id),
                    param: Some(v.param.clone()),
                    detail: format!(
                        "at offset {eps}: expanding before = {}, contracting after = {}",
                        before.expanding, after.contracting
                    ),
                });
            }
        }
    }
    Ok(HypothesisStatus::VerifiedOnSamples)
}

/// Parabolic extremal surfaces sit in the slice of a contracting phase change.
pub fn audit_extremal_phase_change(
    m: &SplitSpacetime,
    s: &SurfaceAnalysis,
    t0: f64,
    boundedness: Boundedness,
    certificate: Option<&ParabolicityCertificate>,
) -> Result<TheoremAudit> {
    let mut d = Draft::new(
        TheoremId::ExtremalPhaseChange,
        None,
        "Σ lies in the slice t = t0",
    );
    d.hyp("localContractingPhaseChange", phase_change_status(m, s, t0)?);
    d.hyp(
        "extremal",
        pointwise(s, &[], |v| v.mean_class == CausalClass::Zero, |v| {
            format!("H is {} with g(d_t, H) = {:.6e}", v.mean_class.name(), v.h_dot_partial_t)
        }),
    );
    d.hyp(
        "moderateProperTimeRate",
        proper_time_status(m, s, boundedness == Boundedness::Compact)?,
    );
    d.hyp("boundedAwayFromInfinity", boundedness_status(s, boundedness, Side::Both));
    d.hyp("parabolic", parabolic_status(certificate));
    let off = s.max_abs(|v| v.tau - t0);
    d.evidence("maxAbsTauMinusT0", off);
    d.expect("tauEqualsT0", true, off < PREDICTION_TOLERANCE);
    Ok(d.finish())
}

/// Shared prediction of the nonexistence statements: not trapped on the
/// branch, no extremal surface under strict monotonicity, extremal ⇒ τ constant.
fn trapped_predictions(d: &mut Draft, s: &SurfaceAnalysis, branch: Branch, strict: bool) {
    let class = s.trapped.class;
    let extremal = class == TrappedClass::Extremal;
    let spread = s.tau_spread();
    d.evidence("tauSpread", spread);
    let trapped_flag = match branch {
        Branch::Future => "futureTrapped",
        Branch::Past => "pastTrapped",
    };
    d.expect(trapped_flag, false, trapped_on_branch(class, branch));
    d.expect("extremalNotInSlice", false, extremal && spread >= PREDICTION_TOLERANCE);
    if strict {
        d.expect("extremal", false, extremal);
    }
    d.notes.push(format!("surface classified {}", class.name()));
}

fn strictly_monotone(s: &SurfaceAnalysis, branch: Branch) -> bool {
    s.vertices.iter().all(|v| match branch {
        Branch::Future => v.expanding,
        Branch::Past => v.contracting,
    })
}

fn theorem_for(m: &SplitSpacetime) -> TheoremId {
    match m.kind() {
        SpacetimeKind::Grw { .. } | SpacetimeKind::Twisted { .. } => TheoremId::TwistedTrappedNonexistence,
        _ => TheoremId::TrappedNonexistence,
    }
}

/// Nonexistence of parabolic future (past) trapped surfaces, on one surface.
pub fn audit_trapped_nonexistence(
    m: &SplitSpacetime,
    s: &SurfaceAnalysis,
    branch: Branch,
    boundedness: Boundedness,
    certificate: Option<&ParabolicityCertificate>,
) -> Result<TheoremAudit> {
    let mut d = Draft::new(
        theorem_for(m),
        Some(branch),
        "Σ is not (nearly, weakly, marginally) trapped on this branch; an extremal Σ lies in a slice, and none exists when the spacetime is strictly monotone",
    );
    d.hyp(
        monotone_name(branch),
        pointwise(s, &[], |v| monotone_ok(v, branch), |v| {
            format!("monotonicity fails at {} (d_t beta = {:.6e})", v.point, v.d_beta_dt)
        }),
    );
    d.hyp(
        "moderateProperTimeRate",
        proper_time_status(m, s, boundedness == Boundedness::Compact)?,
    );
    d.hyp(bounded_name(branch), boundedness_status(s, boundedness, bounded_side(branch)));
    d.hyp("parabolic", parabolic_status(certificate));
    trapped_predictions(&mut d, s, branch, strictly_monotone(s, branch));
    Ok(d.finish())
}

/// Unit lapse, semi-definite shape operator of `F_{t₀}` and non-negative
/// timelike sectional curvature rule out trapped surfaces in `t > t₀`.
pub fn audit_slice_future(
    m: &SplitSpacetime,
    s: &SurfaceAnalysis,
    t0: f64,
    branch: Branch,
    boundedness: Boundedness,
    certificate: Option<&ParabolicityCertificate>,
) -> Result<TheoremAudit> {
    let mut d = Draft::new(
        TheoremId::SliceFutureNonexistence,
        Some(branch),
        "Σ beyond the slice is not trapped on this branch, and an extremal Σ there lies in a slice",
    );
    if m.has_unit_lapse() {
        d.hyp("unitLapse", HypothesisStatus::VerifiedOnSamples);
        let fibers: Vec<Vec<f64>> = s.vertices.iter().map(|v| v.point.x.clone()).collect();
        let report = slice_shape_report(m, t0, &fibers, &coordinate_directions(m.fiber_dim()))?;
        d.evidence("shapeMinQuadraticForm", report.min_quadratic_form);
        d.evidence("shapeMaxQuadraticForm", report.max_quadratic_form);
        let ok = match branch {
            Branch::Future => report.positive_semidefinite,
            Branch::Past => report.negative_semidefinite,
        };
        d.hyp(
            "sliceShapeOperator",
            if ok {
                HypothesisStatus::VerifiedOnSamples
            } else {
                HypothesisStatus::violated(format!(
                    "shape operator quadratic form ranges over [{:.6e}, {:.6e}]",
                    report.min_quadratic_form, report.max_quadratic_form
                ))
            },
        );
        let (min_k, at) = min_timelike_sectional(m, &s.points())?;
        d.evidence("minTimelikeSectional", min_k);
        d.hyp(
            "timelikeSectionalCurvature",
            if min_k >= -CURVATURE_TOLERANCE {
                HypothesisStatus::VerifiedOnSamples
            } else {
                HypothesisStatus::violated(format!("sectional curvature {min_k:.6e} at {at}"))
            },
        );
    } else {
        d.hyp("unitLapse", HypothesisStatus::violated("beta is not identically 1"));
        for name in ["sliceShapeOperator", "timelikeSectionalCurvature"] {
            d.hyp(name, HypothesisStatus::not_checkable("only defined for unit lapse"));
        }
    }
    let sign = branch.sign();
    d.hyp(
        "beyondSlice",
        pointwise(s, &[], |v| sign * (v.tau - t0) > 0.0, |v| format!("tau = {} is not beyond t0 = {t0}", v.tau)),
    );
    d.hyp(bounded_name(branch), boundedness_status(s, boundedness, bounded_side(branch)));
    d.hyp("parabolic", parabolic_status(certificate));
    trapped_predictions(&mut d, s, branch, false);
    Ok(d.finish())
}

fn coordinate_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v[j] = 1.0;
            out.push(v.clone());
            v[j] = -1.0;
            out.push(v);
        }
    }
    out
}

/// Smallest sectional curvature over planes `(∂_t + ½ e_j, e_i)` at each point.
fn min_timelike_sectional(m: &SplitSpacetime, points: &[ChartPoint]) -> Result<(f64, ChartPoint)> {
    let n = m.fiber_dim();
    let rows: Vec<(f64, ChartPoint)> = points
        .par_iter()
        .map(|p| {
            let c = curvature(m, p)?;
            let g = m.fiber_metric(p)?;
            let mut lo = f64::INFINITY;
            for i in 0..n {
                for j in 0..=n {
                    if j == i + 1 {
                        continue;
                    }
                    // j = 0 is the pure ∂_t direction; otherwise tilt by ½ e_{j-1}
                    let mut u = DVector::zeros(n + 1);
                    u[0] = 1.0;
                    if j > 0 {
                        u[j] = 0.5 / (g[(j - 1, j - 1)] / m.beta(p)?).sqrt();
                    }
                    let mut v = DVector::zeros(n + 1);
                    v[i + 1] = 1.0;
                    lo = lo.min(c.sectional(&u, &v)?);
                }
            }
            Ok((lo, p.clone()))
        })
        .collect::<Result<_>>()?;
    Ok(rows
        .into_iter()
        .fold((f64::INFINITY, ChartPoint::new(0.0, vec![0.0; n])), |a, b| if b.0 < a.0 { b } else { a }))
}

/// Expansion propagated from a slice: semi-definite shape operator at `t₀`
/// plus non-negative timelike sectional curvature should make every sampled
/// point above `t₀` non-contracting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpansionPropagation {
    pub t0: f64,
    pub shape_positive_semidefinite: bool,
    pub min_shape_quadratic_form: f64,
    pub min_timelike_sectional: f64,
    pub hypotheses_hold: bool,
    pub samples: usize,
    pub non_contracting: usize,
    /// Points where the hypotheses hold but monotonicity fails.
    pub violations: usize,
    pub witness: Option<ChartPoint>,
}

pub fn expansion_propagation(
    m: &SplitSpacetime,
    t0: f64,
    fiber_points: &[Vec<f64>],
    points: &[ChartPoint],
) -> Result<ExpansionPropagation> {
    if let Some(p) = points.iter().find(|p| p.t <= t0) {
        return Err(GeomError::Usage(format!("sample {p} is not above t0 = {t0}")));
    }
    let shape = slice_shape_report(m, t0, fiber_points, &coordinate_directions(m.fiber_dim()))?;
    let (min_k, _) = min_timelike_sectional(m, points)?;
    let hypotheses_hold = shape.positive_semidefinite && min_k >= -CURVATURE_TOLERANCE;
    let verdicts: Vec<bool> = points
        .par_iter()
        .map(|p| Ok(m.monotonicity_at(p)?.non_contracting))
        .collect::<Result<_>>()?;
    let non_contracting = verdicts.iter().filter(|&&b| b).count();
    let witness = verdicts.iter().position(|&b| !b).map(|i| points[i].clone());
    Ok(ExpansionPropagation {
        t0,
        shape_positive_semidefinite: shape.positive_semidefinite,
        min_shape_quadratic_form: shape.min_quadratic_form,
        min_timelike_sectional: min_k,
        hypotheses_hold,
        samples: points.len(),
        non_contracting,
        violations: if hypotheses_hold { points.len() - non_contracting } else { 0 },
        witness,
    })
}

/// Random graphs `u = c₀ + Σ aᵢ exp(−|x − cᵢ|² / (2 sᵢ²))` over two graph axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GraphFamily {
    pub bumps: usize,
    /// `c₀` is drawn from this range.
    pub offset: (f64, f64),
    /// `|aᵢ| ≤ amplitude`.
    pub amplitude: f64,
    pub width: (f64, f64),
    /// Centres lie in `[−r, r]²` with `r = centre_radius`.
    pub centre_radius: f64,
    pub axes: [usize; 2],
}

impl Default for GraphFamily {
    fn default() -> Self {
        GraphFamily {
            bumps: 3,
            offset: (0.0, 0.5),
            amplitude: 0.1,
            width: (0.7, 1.5),
            centre_radius: 0.6,
            axes: [1, 2],
        }
    }
}

impl GraphFamily {
    /// Draws one graph function as an expression in the axis variables.
    pub fn sample(&self, rng: &mut impl Rng) -> Expr {
        let draw = |rng: &mut dyn rand::RngCore, (lo, hi): (f64, f64)| {
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        };
        let [a1, a2] = self.axes;
        let mut text = format!("({})", draw(rng, self.offset));
        for _ in 0..self.bumps {
            let a = draw(rng, (-self.amplitude, self.amplitude));
            let s = draw(rng, self.width);
            let cx = draw(rng, (-self.centre_radius, self.centre_radius));
            let cy = draw(rng, (-self.centre_radius, self.centre_radius));
            text.push_str(&format!(
                " + ({a})*exp(-((x{a1}-({cx}))^2 + (x{a2}-({cy}))^2)/({}))",
                2.0 * s * s
            ));
        }
        Expr::parse(&text).expect("generated graph expression parses")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FalsificationConfig {
    pub trials: usize,
    pub seed: u64,
    pub grid: StructuredGrid,
    pub family: GraphFamily,
    /// Sandwich data used for each trial's quasi-isometry certificate.
    pub quasi_isometry: QuasiIsometryInput,
    pub branch: Branch,
    pub reading: MarginalReading,
    /// Fixed coordinates of the non-graph fiber axes.
    pub x2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub u: String,
    /// `None` for discarded (non-spacelike) samples.
    pub class: Option<TrappedClass>,
    pub certified: bool,
    pub bounded: bool,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FalsificationSummary {
    pub trials: usize,
    pub seed: u64,
    pub discarded_non_spacelike: usize,
    pub certified: usize,
    pub bounded: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub hits: usize,
    pub records: Vec<TrialRecord>,
}

struct TrialOutcome {
    record: TrialRecord,
    vertices: Vec<(bool, ChartPoint)>,
}

fn run_trial(m: &SplitSpacetime, cfg: &FalsificationConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = cfg.family.sample(&mut rng);
    let mut record = TrialRecord {
        trial,
        seed,
        u: u.to_string(),
        class: None,
        certified: false,
        bounded: false,
        hit: false,
    };
    let imm = Immersion::graph(m.fiber_dim(), u, &cfg.family.axes, &cfg.x2)?;
    let s = match analyze_surface(m, &imm, &cfg.grid, cfg.reading) {
        Ok(s) => s,
        Err(GeomError::ImmersionDegeneracy { .. }) => {
            return Ok(TrialOutcome {
                record,
                vertices: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let cert = quasi_isometry_certificate(m, &imm, &cfg.quasi_isometry, &cfg.grid)?;
    let audit = audit_trapped_nonexistence(m, &s, cfg.branch, declared_side(cfg.branch), Some(&cert))?;
    record.class = Some(s.trapped.class);
    record.certified = cert.is_certified();
    record.bounded = audit
        .hypothesis(bounded_name(cfg.branch))
        .is_some_and(|h| h.status.holds());
    record.hit = audit.counterexample_flag;
    let vertices = s
        .vertices
        .iter()
        .map(|v| (monotone_ok(v, cfg.branch), v.point.clone()))
        .collect();
    Ok(TrialOutcome { record, vertices })
}

/// Bump graphs are bounded by construction.
fn declared_side(branch: Branch) -> Boundedness {
    match branch {
        Branch::Future => Boundedness::BoundedBelow,
        Branch::Past => Boundedness::BoundedAbove,
    }
}

/// Randomized search for parabolic trapped surfaces; any hit is a bug signal.
///
/// Trials run in parallel; trial `i` draws from a ChaCha stream seeded with
/// `seed + i`, so results do not depend on scheduling.
pub fn falsify_trapped_nonexistence(m: &SplitSpacetime, cfg: &FalsificationConfig) -> Result<TheoremAudit> {
    if cfg.trials == 0 {
        return Err(GeomError::Usage("falsification needs at least one trial".into()));
    }
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(m, cfg, i))
        .collect::<Result<_>>()?;
    let mut class_counts = BTreeMap::new();
    let mut summary = FalsificationSummary {
        trials: cfg.trials,
        seed: cfg.seed,
        discarded_non_spacelike: 0,
        certified: 0,
        bounded: 0,
        class_counts: BTreeMap::new(),
        hits: 0,
        records: Vec::with_capacity(cfg.trials),
    };
    let mut bad_monotone: Option<ChartPoint> = None;
    let mut points = Vec::new();
    for o in outcomes {
        let r = &o.record;
        match r.class {
            None => summary.discarded_non_spacelike += 1,
            Some(c) => *class_counts.entry(c.name().to_string()).or_insert(0) += 1,
        }
        summary.certified += r.certified as usize;
        summary.bounded += r.bounded as usize;
        summary.hits += r.hit as usize;
        for (ok, p) in o.vertices {
            if !ok && bad_monotone.is_none() {
                bad_monotone = Some(p.clone());
            }
            points.push(p);
        }
        summary.records.push(o.record);
    }
    summary.class_counts = class_counts;

    let branch = cfg.branch;
    let mut d = Draft::new(
        theorem_for(m),
        Some(branch),
        "no sampled surface is simultaneously certified parabolic, bounded on the branch side and trapped on this branch",
    );
    d.hyp(
        monotone_name(branch),
        match (&bad_monotone, points.is_empty()) {
            (_, true) => HypothesisStatus::not_checkable("every trial was discarded"),
            (Some(p), _) => HypothesisStatus::violated(format!("monotonicity fails at {p}")),
            (None, _) => HypothesisStatus::VerifiedOnSamples,
        },
    );
    d.hyp(
        "moderateProperTimeRate",
        if points.is_empty() {
            HypothesisStatus::not_checkable("every trial was discarded")
        } else {
            let rate = m.moderate_proper_time_rate(&points)?;
            if rate.positive {
                HypothesisStatus::VerifiedOnSamples
            } else {
                HypothesisStatus::violated(format!(
                    "beta ranges over [{}, {}]",
                    rate.inf_estimate, rate.sup_estimate
                ))
            }
        },
    );
    d.expect("zeroHits", true, summary.hits == 0);
    d.evidence("hits", summary.hits as f64);
    d.evidence("certified", summary.certified as f64);
    d.evidence("discardedNonSpacelike", summary.discarded_non_spacelike as f64);
    let mut audit = d.finish();
    audit.falsification = Some(summary);
    Ok(audit)
}

/// Inputs of the doubly twisted graph audit.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublyTwistedInput {
    pub r0: f64,
    /// Graph function of `(x2, x3)`.
    pub u: Expr,
    pub alpha1: Expr,
    pub alpha2: Expr,
    pub k: f64,
    pub gradient_bound: GradientBound,
    pub base: BaseParabolicity,
    pub boundedness: Boundedness,
    pub branch: Branch,
    pub reading: MarginalReading,
}

/// Graphs `Σ_{r₀,u}` in `−β dt² + f₁ dr² + f₂ g₀` with `α₂ ≤ f₂/β ≤ α₁`.
pub fn audit_doubly_twisted(
    m: &SplitSpacetime,
    input: &DoublyTwistedInput,
    grid: &StructuredGrid,
) -> Result<TheoremAudit> {
    let SpacetimeKind::DoublyTwisted { g0, .. } = m.kind() else {
        return Err(GeomError::Usage(format!(
            "doubly twisted audit needs a doubly twisted spacetime, got {}",
            m.kind().name()
        )));
    };
    let branch = input.branch;
    let imm = Immersion::radial_graph(input.r0, input.u.clone())?;
    let s = analyze_surface(m, &imm, grid, input.reading)?;
    let sandwich = Sandwich::new(
        FiberMetric::identity(1).direct_sum(g0),
        input.alpha1.clone(),
        input.alpha2.clone(),
    )?;
    let qi = QuasiIsometryInput {
        sandwich: sandwich.clone(),
        k: input.k,
        base: input.base,
        gradient_bound: input.gradient_bound,
    };
    let cert = quasi_isometry_certificate(m, &imm, &qi, grid)?;
    let band = sandwich_check(m, &sandwich.clone().restricted_to(&[2, 3]), &s.points())?;

    let mut d = Draft::new(
        TheoremId::DoublyTwistedGraph,
        Some(branch),
        "Σ_{r0,u} is not trapped on this branch, and if extremal then u is constant",
    );
    d.hyp(
        monotone_name(branch),
        pointwise(&s, &[], |v| monotone_ok(v, branch), |v| format!("monotonicity fails at {}", v.point)),
    );
    d.hyp(
        "warpingBand",
        match &band.witness {
            None => HypothesisStatus::VerifiedOnSamples,
            Some(w) => HypothesisStatus::violated(format!(
                "alpha2 <= f2/beta <= alpha1 fails on the {} side at {} (margin {:.3e})",
                w.side, w.point, w.margin
            )),
        },
    );
    d.hyp("boundedAlphaAndLapse", alpha_lapse_status(&s, &sandwich)?);
    d.hyp("gradientBound", gradient_status(&cert, input.k));
    d.hyp(bounded_name(branch), boundedness_status(&s, input.boundedness, bounded_side(branch)));
    let base = cert.quasi_isometry.as_ref().map(|q| q.base).unwrap_or(input.base);
    d.hyp(
        "baseParabolic",
        match base {
            BaseParabolicity::Unknown => HypothesisStatus::not_checkable("parabolicity of (F, g0) unknown"),
            BaseParabolicity::Declared => HypothesisStatus::Declared {
                note: "declared by the caller".into(),
            },
            _ => HypothesisStatus::VerifiedOnSamples,
        },
    );
    d.hyp("comparisonSandwich", comparison_status(&cert));
    trapped_predictions(&mut d, &s, branch, false);
    if let Some(q) = &cert.quasi_isometry {
        d.evidence("maxGradientRatio", q.max_gradient_ratio);
        d.evidence("minComparisonSlack", q.min_comparison_slack);
    }
    d.notes.extend(cert.notes.iter().cloned());
    Ok(d.finish())
}

fn alpha_lapse_status(s: &SurfaceAnalysis, sandwich: &Sandwich) -> Result<HypothesisStatus> {
    let mut series: Vec<(&str, Vec<f64>)> = vec![("alpha1(u)", vec![]), ("alpha2(u)", vec![]), ("beta", vec![])];
    for v in &s.vertices {
        series[0].1.push(sandwich.alpha1_at(v.tau)?);
        series[1].1.push(sandwich.alpha2_at(v.tau)?);
        series[2].1.push(v.beta);
    }
    for (name, vals) in &series {
        let inv: Vec<f64> = vals.iter().map(|x| 1.0 / x).collect();
        if looks_unbounded(&exhaustion_trend(&s.grid, vals)) || looks_unbounded(&exhaustion_trend(&s.grid, &inv)) {
            return Ok(HypothesisStatus::violated(format!(
                "{name} or its reciprocal grows across the exhaustion"
            )));
        }
    }
    Ok(HypothesisStatus::VerifiedOnSamples)
}

fn gradient_status(cert: &ParabolicityCertificate, k: f64) -> HypothesisStatus {
    if !(k > 0.0 && k < 1.0) {
        return HypothesisStatus::violated(format!("k = {k} is not in (0, 1)"));
    }
    if let Verdict::RefutedHypothesis {
        condition,
        witness,
        detail,
    } = &cert.verdict
    {
        if condition == "gradientBound" {
            return HypothesisStatus::Violated {
                vertex: None,
                param: witness.clone(),
                detail: detail.clone(),
            };
        }
    }
    match &cert.quasi_isometry {
        Some(q) if q.max_gradient_ratio <= 1.0 => HypothesisStatus::VerifiedOnSamples,
        Some(q) => HypothesisStatus::violated(format!("max gradient ratio {:.6}", q.max_gradient_ratio)),
        None => HypothesisStatus::not_checkable("certificate carries no gradient data"),
    }
}

fn comparison_status(cert: &ParabolicityCertificate) -> HypothesisStatus {
    match &cert.verdict {
        Verdict::RefutedHypothesis {
            condition,
            witness,
            detail,
        } if condition == "comparisonSandwich" => HypothesisStatus::Violated {
            vertex: None,
            param: witness.clone(),
            detail: detail.clone(),
        },
        _ => match &cert.quasi_isometry {
            Some(q) if q.min_comparison_slack >= -crate::parabolicity::COMPARISON_SLACK => {
                HypothesisStatus::VerifiedOnSamples
            }
            Some(q) => HypothesisStatus::violated(format!("comparison slack {:.3e}", q.min_comparison_slack)),
            None => HypothesisStatus::not_checkable("certificate carries no comparison data"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolicity::finite_total_curvature;
    use crate::spacetime::catalog::*;
    use proptest::prelude::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn grid() -> StructuredGrid {
        StructuredGrid::cube(2, 1.0, 9).unwrap()
    }

    fn graph(m: &SplitSpacetime, u: &str) -> SurfaceAnalysis {
        graph_on(m, u, &grid())
    }

    fn graph_on(m: &SplitSpacetime, u: &str, g: &StructuredGrid) -> SurfaceAnalysis {
        let imm = Immersion::graph(m.fiber_dim(), e(u), &[1, 2], &[0.0]).unwrap();
        analyze_surface(m, &imm, g, MarginalReading::default()).unwrap()
    }

    fn slice(m: &SplitSpacetime, t0: f64) -> SurfaceAnalysis {
        let imm = Immersion::slice(m.fiber_dim(), t0, &[1, 2], &[0.0]).unwrap();
        analyze_surface(m, &imm, &grid(), MarginalReading::default()).unwrap()
    }

    fn flat_qi(k: f64) -> QuasiIsometryInput {
        QuasiIsometryInput {
            sandwich: Sandwich::new(FiberMetric::identity(3), Expr::Const(1.0), Expr::Const(1.0)).unwrap(),
            k,
            base: BaseParabolicity::Unknown,
            gradient_bound: GradientBound::AsPrinted,
        }
    }

    fn exp_qi(k: f64) -> QuasiIsometryInput {
        QuasiIsometryInput {
            sandwich: Sandwich::new(FiberMetric::identity(3), e("exp(2*t)"), e("exp(2*t)")).unwrap(),
            k,
            base: BaseParabolicity::Unknown,
            gradient_bound: GradientBound::AsPrinted,
        }
    }

    fn status<'a>(a: &'a TheoremAudit, name: &str) -> &'a HypothesisStatus {
        &a.hypothesis(name).unwrap_or_else(|| panic!("no hypothesis {name}")).status
    }

    #[test]
    fn extrema_examples() {
        let g = grid();
        let flat = vec![0.3; g.len()];
        let r = strict_local_extrema(&g, &flat).unwrap();
        assert!(r.strict_local_minima.is_empty() && r.strict_local_maxima.is_empty());
        assert_eq!(r.boundary_excluded, 32);

        let bowl: Vec<f64> = (0..g.len()).map(|i| { let p = g.param(i); p[0] * p[0] + p[1] * p[1] }).collect();
        let r = strict_local_extrema(&g, &bowl).unwrap();
        assert_eq!(r.strict_local_minima.len(), 1);
        assert_eq!(r.strict_local_minima[0].param, vec![0.0, 0.0]);
        assert!((r.strict_local_minima[0].margin - 0.0625).abs() < 1e-12);
        assert!(r.strict_local_maxima.is_empty());

        let ramp: Vec<f64> = (0..g.len()).map(|i| 0.5 * g.param(i)[0]).collect();
        let r = strict_local_extrema(&g, &ramp).unwrap();
        assert!(r.strict_local_minima.is_empty() && r.strict_local_maxima.is_empty());
        assert!(strict_local_extrema(&g, &[0.0]).is_err());
    }

    #[test]
    fn rigidity_examples() {
        let m = mink();
        let a = audit_rigidity(&m, &slice(&m, 0.0), Branch::Future, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples);
        assert!(a.prediction_holds && a.consistent && !a.counterexample_flag);

        let x = expgrw();
        let a = audit_rigidity(&x, &slice(&x, 0.0), Branch::Future, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert!(status(&a, "meanCurvatureSign").is_violated());
        assert_eq!(a.verdict, AuditVerdict::HypothesisViolated);
        assert!(!a.applicable && !a.counterexample_flag);

        // tilted plane: everything vanishes but τ is not constant; the
        // boundedness hypothesis is what fails
        let s = graph(&m, "0.5*x1");
        let imm = Immersion::graph(3, e("0.5*x1"), &[1, 2], &[0.0]).unwrap();
        let cert = quasi_isometry_certificate(&m, &imm, &flat_qi(0.6), &grid()).unwrap();
        assert!(cert.is_certified());
        let a = audit_rigidity(&m, &s, Branch::Future, Boundedness::BoundedBelow, Some(&cert)).unwrap();
        assert!(status(&a, "expansionSign").holds());
        assert!(status(&a, "meanCurvatureSign").holds());
        assert!(status(&a, "parabolic").holds());
        assert!(status(&a, "boundedAwayFromPastInfinity").is_violated());
        assert!(!a.prediction_holds && a.consistent);
        assert_eq!(a.blocking, vec!["boundedAwayFromPastInfinity".to_string()]);
    }

    #[test]
    fn missing_certificate_is_not_checkable() {
        let m = mink();
        let a = audit_rigidity(&m, &slice(&m, 0.0), Branch::Future, Boundedness::Bounded, None).unwrap();
        assert!(matches!(status(&a, "parabolic"), HypothesisStatus::NotCheckable { .. }));
        assert_eq!(a.verdict, AuditVerdict::HypothesisNotCheckable);
        assert!(a.prediction_holds);
    }

    #[test]
    fn paraboloid_contrapositive_names_witness() {
        let m = mink();
        let s = graph_on(&m, "x1^2 + x2^2", &StructuredGrid::cube(2, 0.3, 7).unwrap());
        let a = audit_no_strict_extremum(&s, Branch::Future);
        assert!(!a.prediction_holds);
        assert!(!a.counterexample_flag);
        assert_eq!(a.witnesses.len(), 1);
        assert_eq!(a.witnesses[0].param, vec![0.0, 0.0]);
        assert!(a.witnesses[0].violated.contains(&"meanCurvatureSign".to_string()));
        match status(&a, "meanCurvatureSign") {
            HypothesisStatus::Violated { param, .. } => assert_eq!(param.as_deref(), Some(&[0.0, 0.0][..])),
            other => panic!("{other:?}"),
        }
        assert!(a.blocking.contains(&"meanCurvatureSign".to_string()));

        let s = slice(&m, 0.3);
        let a = audit_no_strict_extremum(&s, Branch::Future);
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples);
    }

    #[test]
    fn future_trapped_cap_has_no_minimum() {
        // u = −0.3 r² in MINK: H is future timelike, τ peaks at the centre
        let m = mink();
        let s = graph(&m, "-0.3*(x1^2 + x2^2)");
        assert!(s.trapped.class.is_future());
        let a = audit_trapped_no_strict_extremum(&s, Branch::Future);
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples);
        assert!(a.extrema.unwrap().strict_local_maxima.len() == 1);

        let bowl = graph(&m, "0.3*(x1^2 + x2^2)");
        let a = audit_trapped_no_strict_extremum(&bowl, Branch::Future);
        assert!(!a.prediction_holds && !a.counterexample_flag);
        assert!(a.witnesses[0].violated.contains(&"futureTrapped".to_string()));
    }

    #[test]
    fn phase_change_examples() {
        let m = phase();
        let a = audit_phase_change(&m, &slice(&m, 0.0), 0.0, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples, "{a:#?}");

        let a = audit_phase_change(&m, &slice(&m, 1.0), 0.0, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert!(!a.prediction_holds);
        assert!(status(&a, "meanCurvaturePhaseSign").is_violated());
        assert!(status(&a, "phaseSigns").holds());
        assert!(!a.counterexample_flag);

        let a = audit_phase_change(&m, &slice(&m, 0.0), 0.0, Boundedness::Compact, None).unwrap();
        assert!(matches!(status(&a, "parabolic"), HypothesisStatus::NotCheckable { .. }));
        assert!(!a.applicable);

        let a = audit_extremal_phase_change(&m, &slice(&m, 0.0), 0.0, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples);
        let a = audit_extremal_phase_change(&m, &slice(&m, 1.0), 0.0, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert!(status(&a, "extremal").is_violated());
        assert!(!a.counterexample_flag);
        // EXPGRW never contracts
        let x = expgrw();
        let a = audit_extremal_phase_change(&x, &slice(&x, 0.0), 0.0, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert!(status(&a, "localContractingPhaseChange").is_violated());
    }

    #[test]
    fn trapped_nonexistence_single_surfaces() {
        let x = expgrw();
        let s = slice(&x, 0.2);
        assert_eq!(s.trapped.class, TrappedClass::PastTrapped);
        let a = audit_trapped_nonexistence(&x, &s, Branch::Future, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert_eq!(a.theorem, TheoremId::TwistedTrappedNonexistence);
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples);

        let m = mink();
        let a = audit_trapped_nonexistence(&m, &slice(&m, 0.5), Branch::Future, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert_eq!(a.theorem, TheoremId::TrappedNonexistence);
        assert!(a.prediction_holds && !a.observed["extremalNotInSlice"]);

        // future-trapped cap: parabolicity fails via unbounded curvature growth
        let s = graph(&m, "-0.3*(x1^2 + x2^2)");
        let imm = Immersion::graph(3, e("-0.3*(x1^2 + x2^2)"), &[1, 2], &[0.0]).unwrap();
        let mesh = crate::mesh::SurfaceMesh::build(&m, &imm, grid()).unwrap();
        let cert = finite_total_curvature(&mesh).unwrap();
        let a = audit_trapped_nonexistence(&m, &s, Branch::Future, Boundedness::Undeclared, Some(&cert)).unwrap();
        assert!(!a.prediction_holds && !a.counterexample_flag);
        assert!(!a.blocking.is_empty());
    }

    #[test]
    fn slice_future_on_de_sitter() {
        let x = expgrw();
        let s = slice(&x, 0.5);
        let a = audit_slice_future(&x, &s, 0.0, Branch::Future, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples, "{a:#?}");
        assert!((a.evidence["minTimelikeSectional"] - 1.0).abs() < 1e-6);
        let a = audit_slice_future(&x, &slice(&x, -0.5), 0.0, Branch::Future, Boundedness::Compact, Some(&ParabolicityCertificate::compact())).unwrap();
        assert!(status(&a, "beyondSlice").is_violated());
        let st = static_sin();
        let a = audit_slice_future(&st, &slice(&st, 0.5), 0.0, Branch::Future, Boundedness::Compact, None).unwrap();
        assert!(status(&a, "unitLapse").is_violated());
    }

    #[test]
    fn propagation_on_de_sitter() {
        let x = expgrw();
        let fibers: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.3, -0.2, 0.1]).collect();
        let pts: Vec<ChartPoint> = (1..=20).map(|i| ChartPoint::new(0.1 * i as f64, vec![0.1 * i as f64, 0.0, -0.3])).collect();
        let r = expansion_propagation(&x, 0.0, &fibers, &pts).unwrap();
        assert!(r.hypotheses_hold);
        assert_eq!(r.violations, 0);
        assert_eq!(r.non_contracting, 20);
        assert!(expansion_propagation(&x, 1.0, &fibers, &pts).is_err());
    }

    #[test]
    fn harness_on_expgrw_is_deterministic_and_clean() {
        let x = expgrw();
        let cfg = FalsificationConfig {
            trials: 24,
            seed: 7,
            grid: StructuredGrid::cube(2, 3.0, 13).unwrap(),
            family: GraphFamily::default(),
            quasi_isometry: exp_qi(0.9),
            branch: Branch::Future,
            reading: MarginalReading::default(),
            x2: vec![0.0],
        };
        let a = falsify_trapped_nonexistence(&x, &cfg).unwrap();
        let b = falsify_trapped_nonexistence(&x, &cfg).unwrap();
        assert_eq!(a, b);
        let f = a.falsification.as_ref().unwrap();
        assert_eq!(f.hits, 0);
        assert_eq!(f.certified, 24, "{:#?}", f.records.iter().filter(|r| !r.certified).collect::<Vec<_>>());
        assert_eq!(f.bounded, 24);
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples);
        assert!(!f.class_counts.contains_key("futureTrapped"));
    }

    #[test]
    fn harness_on_minkowski_slices() {
        let m = mink();
        let cfg = FalsificationConfig {
            trials: 6,
            seed: 1,
            grid: grid(),
            family: GraphFamily {
                bumps: 0,
                ..GraphFamily::default()
            },
            quasi_isometry: flat_qi(0.5),
            branch: Branch::Future,
            reading: MarginalReading::default(),
            x2: vec![0.0],
        };
        let a = falsify_trapped_nonexistence(&m, &cfg).unwrap();
        let f = a.falsification.unwrap();
        assert_eq!(f.class_counts.get("extremal"), Some(&6));
        assert_eq!(f.hits, 0);
    }

    fn flat_twisted() -> SplitSpacetime {
        doubly_twisted(Expr::Const(1.0), Expr::Const(1.0), Expr::Const(1.0), FiberMetric::identity(2)).unwrap()
    }

    fn dt_input(u: &str, a: &str, k: f64) -> DoublyTwistedInput {
        DoublyTwistedInput {
            r0: 1.0,
            u: e(u),
            alpha1: e(a),
            alpha2: e(a),
            k,
            gradient_bound: GradientBound::AsPrinted,
            base: BaseParabolicity::Unknown,
            boundedness: Boundedness::BoundedBelow,
            branch: Branch::Future,
            reading: MarginalReading::default(),
        }
    }

    #[test]
    fn doubly_twisted_examples() {
        let a = audit_doubly_twisted(&flat_twisted(), &dt_input("0.4", "1", 0.5), &grid()).unwrap();
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples, "{a:#?}");
        assert!(a.notes.iter().any(|n| n.contains("extremal")));

        let ds = doubly_twisted(Expr::Const(1.0), Expr::Const(1.0), e("exp(2*t)"), FiberMetric::identity(2)).unwrap();
        let a = audit_doubly_twisted(&ds, &dt_input("0.2 + 0.05*exp(-(x2^2 + x3^2))", "exp(2*t)", 0.5), &grid()).unwrap();
        assert_eq!(a.verdict, AuditVerdict::ConsistentOnSamples, "{a:#?}");

        // |grad u| = 2 alpha2
        let a = audit_doubly_twisted(&flat_twisted(), &dt_input("2*x2", "1", 0.5), &grid());
        match a {
            Ok(a) => {
                assert!(status(&a, "gradientBound").is_violated());
                assert!(!a.applicable);
            }
            Err(GeomError::ImmersionDegeneracy { .. }) => {}
            Err(other) => panic!("{other}"),
        }
        assert!(audit_doubly_twisted(&x_not_twisted(), &dt_input("0", "1", 0.5), &grid()).is_err());
    }

    fn x_not_twisted() -> SplitSpacetime {
        expgrw()
    }

    #[test]
    fn gradient_bound_violation_on_spacelike_graph() {
        // |grad u| = 0.8 with alpha2 = 1, k = 0.5: spacelike but (ii) fails
        let a = audit_doubly_twisted(&flat_twisted(), &dt_input("0.8*x2", "1", 0.5), &grid()).unwrap();
        assert!(status(&a, "gradientBound").is_violated());
        assert!(!a.counterexample_flag);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn flag_matches_definition(a in -0.15f64..0.15, b in -0.15f64..0.15, c in -0.15f64..0.15) {
            for m in [mink(), expgrw(), phase()] {
                let s = graph(&m, &format!("({a})*x1 + ({b})*x2 + ({c})*x1*x2"));
                for audit in [
                    audit_no_strict_extremum(&s, Branch::Future),
                    audit_trapped_no_strict_extremum(&s, Branch::Past),
                    audit_rigidity(&m, &s, Branch::Future, Boundedness::BoundedBelow, None).unwrap(),
                ] {
                    let all = audit.hypotheses.iter().all(|h| h.status.holds());
                    prop_assert_eq!(audit.counterexample_flag, all && !audit.prediction_holds);
                    prop_assert!(!audit.counterexample_flag);
                    if !audit.prediction_holds {
                        prop_assert!(!audit.blocking.is_empty());
                    }
                }
            }
        }

        #[test]
        fn nearly_future_trapped_caps_have_no_minima(a in 0.1f64..0.3, b in -0.05f64..0.05) {
            let m = mink();
            let s = graph(&m, &format!("-({a})*(x1^2 + x2^2) + ({b})*x1"));
            prop_assume!(s.trapped.class.is_future());
            prop_assert!(s.extrema.strict_local_minima.is_empty());
            let audit = audit_trapped_no_strict_extremum(&s, Branch::Future);
            prop_assert!(!audit.counterexample_flag);
        }
    }
}
