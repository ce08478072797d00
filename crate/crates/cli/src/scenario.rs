//! Scenario files: a versioned JSON schema with expression strings.

use serde::{Deserialize, Serialize};

use splitgeom::audit::{Boundedness, Branch, GraphFamily, TheoremId};
use splitgeom::causal::MarginalReading;
use splitgeom::identities::SampleRegion;
use splitgeom::immersion::Immersion;
use splitgeom::mesh::{Axis, StructuredGrid};
use splitgeom::parabolicity::{BaseParabolicity, GradientBound, QuasiIsometryInput, Sandwich};
use splitgeom::spacetime::FiberMetric;
use splitgeom::{catalog, DerivMode, Expr, SplitSpacetime};

use crate::error::{CliError, Location};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub spacetime: SpacetimeSpec,
    #[serde(default)]
    pub surfaces: Vec<SurfaceSpec>,
    /// Analyses that need no surface.
    #[serde(default)]
    pub analyses: Vec<SpacetimeAnalysis>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Options {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Random points per identity check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub deriv_mode: DerivMode,
}

fn default_trials() -> usize {
    500
}

fn default_samples() -> usize {
    1000
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            trials: default_trials(),
            samples: default_samples(),
            deriv_mode: DerivMode::default(),
        }
    }
}

/// A fiber metric: `{"identity": n}`, `{"diagonal": [...]}` or `{"rows": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MetricSpec {
    Identity(usize),
    Diagonal(Vec<String>),
    Rows(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", deny_unknown_fields)]
pub enum SpacetimeSpec {
    /// One of `mink`, `expgrw`, `staticSin`, `phase`, `sphericalMinkowski`.
    Catalog { name: String },
    Minkowski {
        #[serde(rename = "fiberDim")]
        fiber_dim: usize,
    },
    Grw { f: String, g0: MetricSpec },
    StandardStatic { beta: String, metric: MetricSpec },
    Twisted { f: String, g0: MetricSpec },
    DoublyTwisted {
        beta: String,
        f1: String,
        f2: String,
        g0: MetricSpec,
    },
    Custom {
        beta: String,
        metric: MetricSpec,
        /// `null` ends are unbounded.
        #[serde(default)]
        interval: Option<(Option<f64>, Option<f64>)>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", deny_unknown_fields)]
pub enum ImmersionSpec {
    Graph {
        u: String,
        axes: Vec<usize>,
        #[serde(default)]
        x2: Vec<f64>,
    },
    Slice {
        t0: f64,
        axes: Vec<usize>,
        #[serde(default)]
        x2: Vec<f64>,
    },
    RadialGraph { r0: f64, u: String },
    /// Components `(t, x1, …)` in the parameters `p1, p2, …`.
    Custom {
        #[serde(rename = "paramDim")]
        param_dim: usize,
        components: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GridSpec {
    Cube { dim: usize, half: f64, count: usize },
    Sphere { count: usize },
    Axes(Vec<Axis>),
}

impl GridSpec {
    pub fn build(&self) -> Result<StructuredGrid, splitgeom::GeomError> {
        match self {
            GridSpec::Cube { dim, half, count } => StructuredGrid::cube(*dim, *half, *count),
            GridSpec::Sphere { count } => StructuredGrid::sphere(*count),
            GridSpec::Axes(axes) => StructuredGrid::new(axes.clone()),
        }
    }

    /// Same extent with `count` nodes per axis (`2·count` on periodic ones).
    pub fn with_count(&self, count: usize) -> GridSpec {
        match self {
            GridSpec::Cube { dim, half, .. } => GridSpec::Cube {
                dim: *dim,
                half: *half,
                count,
            },
            GridSpec::Sphere { .. } => GridSpec::Sphere { count },
            GridSpec::Axes(axes) => GridSpec::Axes(
                axes.iter()
                    .map(|a| Axis {
                        count: if a.periodic { 2 * count } else { count },
                        ..a.clone()
                    })
                    .collect(),
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ParabolicityDeclaration {
    /// Use whatever certificate the analyses compute.
    #[default]
    None,
    Compact,
    Declared,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Declarations {
    #[serde(default)]
    pub boundedness: Boundedness,
    #[serde(default)]
    pub parabolicity: ParabolicityDeclaration,
    /// Parabolicity of the base `(F₁, g₀)` for quasi-isometry certificates.
    #[serde(default)]
    pub parabolic_base: BaseParabolicity,
    /// Slices are Cauchy, so `I⁺(F_{t₀})` is read as `{t > t₀}`.
    #[serde(default)]
    pub cauchy_slices: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SurfaceSpec {
    pub name: String,
    pub immersion: ImmersionSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub declarations: Declarations,
    #[serde(default)]
    pub analyses: Vec<SurfaceAnalysis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct QuasiIsometrySpec {
    pub g0: MetricSpec,
    pub alpha1: String,
    pub alpha2: String,
    pub k: f64,
    #[serde(default)]
    pub gradient_bound: GradientBound,
    #[serde(default)]
    pub base: BaseParabolicity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "op", deny_unknown_fields)]
pub enum SurfaceAnalysis {
    MeanCurvature,
    TrappedClassify {
        #[serde(default, rename = "marginalReading")]
        marginal_reading: MarginalReading,
    },
    SignedProjection,
    LaplacianTau,
    Convergence {
        #[serde(default = "default_levels")]
        levels: usize,
        #[serde(default = "default_min_order", rename = "minOrder")]
        min_order: f64,
    },
    GaussianCurvature,
    QuasiIsometry(QuasiIsometrySpec),
    FiniteTotalCurvature,
    Audit {
        theorem: TheoremId,
        #[serde(default)]
        branch: Branch,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t0: Option<f64>,
    },
}

fn default_levels() -> usize {
    3
}

fn default_min_order() -> f64 {
    1.7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FalsifySpec {
    /// Defaults to `options.trials`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default)]
    pub family: GraphFamily,
    pub grid: GridSpec,
    pub quasi_isometry: QuasiIsometrySpec,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub marginal_reading: MarginalReading,
    #[serde(default)]
    pub x2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DoublyTwistedSpec {
    pub r0: f64,
    pub u: String,
    pub alpha1: String,
    pub alpha2: String,
    pub k: f64,
    #[serde(default)]
    pub gradient_bound: GradientBound,
    #[serde(default)]
    pub base: BaseParabolicity,
    #[serde(default)]
    pub boundedness: Boundedness,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub marginal_reading: MarginalReading,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "op", deny_unknown_fields)]
pub enum SpacetimeAnalysis {
    Identities {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<SampleRegion>,
    },
    ExpansionPropagation {
        t0: f64,
        /// Sample box; its time range must lie above `t0`.
        region: SampleRegion,
    },
    Falsify(FalsifySpec),
    DoublyTwisted(DoublyTwistedSpec),
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| CliError::Parse {
        at: Location {
            line: e.line(),
            column: e.column(),
        },
        message: strip_position(&e.to_string()),
    })?;
    if scenario.schema_version != SCHEMA_VERSION {
        return Err(CliError::Validation {
            at: locate(text, "schemaVersion", 0),
            message: format!(
                "unsupported schemaVersion {}; this build reads {SCHEMA_VERSION}",
                scenario.schema_version
            ),
        });
    }
    compile(&scenario, text)?;
    Ok(scenario)
}

pub fn to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Position of the first occurrence of `needle` as a JSON string, shifted by
/// `offset` characters into the string body.
fn locate(text: &str, needle: &str, offset: usize) -> Option<Location> {
    let quoted = serde_json::to_string(needle).ok()?;
    let pos = text.find(&quoted)?;
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Some(Location {
        line,
        column: col + 1 + offset.saturating_sub(1),
    })
}

/// Runtime objects built from a scenario.
pub struct Compiled {
    pub spacetime: SplitSpacetime,
    pub surfaces: Vec<CompiledSurface>,
}

pub struct CompiledSurface {
    pub spec: SurfaceSpec,
    pub immersion: Immersion,
    pub grid: StructuredGrid,
}

struct Ctx<'a> {
    text: Option<&'a str>,
}

impl Ctx<'_> {
    fn expr(&self, src: &str) -> Result<Expr, CliError> {
        Expr::parse(src).map_err(|e| CliError::Validation {
            at: self.text.and_then(|t| locate(t, src, e.column)),
            message: format!("expression `{src}`: {} at column {}", e.message, e.column),
        })
    }

    fn invalid(&self, needle: Option<&str>, message: String) -> CliError {
        CliError::Validation {
            at: needle.and_then(|n| self.text.and_then(|t| locate(t, n, 0))),
            message,
        }
    }

    fn metric(&self, m: &MetricSpec) -> Result<FiberMetric, CliError> {
        match m {
            MetricSpec::Identity(n) => Ok(FiberMetric::identity(*n)),
            MetricSpec::Diagonal(d) => Ok(FiberMetric::diagonal(
                d.iter().map(|s| self.expr(s)).collect::<Result<_, _>>()?,
            )),
            MetricSpec::Rows(rows) => {
                let r = rows
                    .iter()
                    .map(|row| row.iter().map(|s| self.expr(s)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                FiberMetric::from_rows(r).map_err(|e| self.invalid(None, e.to_string()))
            }
        }
    }

    fn spacetime(&self, spec: &SpacetimeSpec) -> Result<SplitSpacetime, CliError> {
        let geom = |r: splitgeom::Result<SplitSpacetime>, needle: Option<&str>| r.map_err(|e| self.invalid(needle, e.to_string()));
        let m = match spec {
            SpacetimeSpec::Catalog { name } => match name.as_str() {
                "mink" => catalog::mink(),
                "expgrw" => catalog::expgrw(),
                "staticSin" => catalog::static_sin(),
                "phase" => catalog::phase(),
                "sphericalMinkowski" => catalog::spherical_minkowski(),
                other => {
                    return Err(self.invalid(
                        Some(other),
                        format!("unknown catalog spacetime `{other}`; expected mink, expgrw, staticSin, phase or sphericalMinkowski"),
                    ))
                }
            },
            SpacetimeSpec::Minkowski { fiber_dim } => {
                if !(1..=9).contains(fiber_dim) {
                    return Err(self.invalid(None, format!("fiberDim must be in 1..=9, got {fiber_dim}")));
                }
                catalog::minkowski(*fiber_dim)
            }
            SpacetimeSpec::Grw { f, g0 } => geom(catalog::grw(self.expr(f)?, self.metric(g0)?), Some(f))?,
            SpacetimeSpec::StandardStatic { beta, metric } => {
                geom(catalog::standard_static(self.expr(beta)?, self.metric(metric)?), Some(beta))?
            }
            SpacetimeSpec::Twisted { f, g0 } => geom(catalog::twisted(self.expr(f)?, self.metric(g0)?), Some(f))?,
            SpacetimeSpec::DoublyTwisted { beta, f1, f2, g0 } => geom(
                catalog::doubly_twisted(self.expr(beta)?, self.expr(f1)?, self.expr(f2)?, self.metric(g0)?),
                None,
            )?,
            SpacetimeSpec::Custom {
                beta,
                metric,
                interval,
            } => {
                let (lo, hi) = interval.unwrap_or((None, None));
                let iv = (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY));
                geom(catalog::custom(iv, self.expr(beta)?, self.metric(metric)?), Some(beta))?
            }
        };
        if let Some(w) = m.warnings().first() {
            let field = w.split(' ').next().unwrap_or("");
            let needle = match (spec, field) {
                (SpacetimeSpec::StandardStatic { beta, .. }, "beta")
                | (SpacetimeSpec::DoublyTwisted { beta, .. }, "beta")
                | (SpacetimeSpec::Custom { beta, .. }, "beta") => Some(beta.as_str()),
                (SpacetimeSpec::Grw { f, .. } | SpacetimeSpec::Twisted { f, .. }, "f") => Some(f.as_str()),
                (SpacetimeSpec::DoublyTwisted { f1, .. }, "f1") => Some(f1.as_str()),
                (SpacetimeSpec::DoublyTwisted { f2, .. }, "f2") => Some(f2.as_str()),
                _ => None,
            };
            return Err(self.invalid(needle, format!("spacetime fields must be positive: {w}")));
        }
        Ok(m)
    }

    fn immersion(&self, m: &SplitSpacetime, spec: &ImmersionSpec) -> Result<Immersion, CliError> {
        let n = m.fiber_dim();
        let r = match spec {
            ImmersionSpec::Graph { u, axes, x2 } => Immersion::graph(n, self.expr(u)?, axes, x2),
            ImmersionSpec::Slice { t0, axes, x2 } => Immersion::slice(n, *t0, axes, x2),
            ImmersionSpec::RadialGraph { r0, u } => {
                if n != 3 {
                    return Err(self.invalid(None, "radial graphs need a 3-dimensional fiber".into()));
                }
                Immersion::radial_graph(*r0, self.expr(u)?)
            }
            ImmersionSpec::Custom { param_dim, components } => {
                if components.len() != n + 1 {
                    return Err(self.invalid(
                        None,
                        format!("custom immersion needs {} components, got {}", n + 1, components.len()),
                    ));
                }
                Immersion::custom(*param_dim, components.iter().map(|c| self.expr(c)).collect::<Result<_, _>>()?)
            }
        };
        r.map_err(|e| self.invalid(None, e.to_string()))
    }

    fn quasi_isometry(&self, q: &QuasiIsometrySpec, fiber_dim: usize) -> Result<QuasiIsometryInput, CliError> {
        let g0 = self.metric(&q.g0)?;
        if g0.dim() != fiber_dim {
            return Err(self.invalid(
                None,
                format!("sandwich g0 is {}-dimensional, the fiber is {fiber_dim}-dimensional", g0.dim()),
            ));
        }
        let sandwich = Sandwich::new(g0, self.expr(&q.alpha1)?, self.expr(&q.alpha2)?)
            .map_err(|e| self.invalid(Some(&q.alpha1), e.to_string()))?;
        Ok(QuasiIsometryInput {
            sandwich,
            k: q.k,
            base: q.base,
            gradient_bound: q.gradient_bound,
        })
    }
}

fn grid_of(ctx: &Ctx, g: &GridSpec) -> Result<StructuredGrid, CliError> {
    g.build().map_err(|e| ctx.invalid(None, e.to_string()))
}

/// Builds spacetime, immersions and grids; `text` (if given) locates errors.
pub fn compile(s: &Scenario, text: &str) -> Result<Compiled, CliError> {
    compile_with(s, Some(text))
}

pub fn compile_with(s: &Scenario, text: Option<&str>) -> Result<Compiled, CliError> {
    let ctx = Ctx { text };
    let m = ctx.spacetime(&s.spacetime)?.with_deriv_mode(s.options.deriv_mode);
    let mut surfaces = Vec::new();
    let mut names = std::collections::BTreeSet::new();
    for spec in &s.surfaces {
        if !names.insert(spec.name.clone()) {
            return Err(ctx.invalid(Some(&spec.name), format!("duplicate surface name `{}`", spec.name)));
        }
        let immersion = ctx.immersion(&m, &spec.immersion)?;
        let grid = grid_of(&ctx, &spec.grid)?;
        if grid.dim() != immersion.param_dim() {
            return Err(ctx.invalid(
                Some(&spec.name),
                format!(
                    "surface `{}`: grid has {} axes but the immersion has {} parameters",
                    spec.name,
                    grid.dim(),
                    immersion.param_dim()
                ),
            ));
        }
        for a in &spec.analyses {
            match a {
                SurfaceAnalysis::QuasiIsometry(q) => {
                    ctx.quasi_isometry(q, m.fiber_dim())?;
                }
                SurfaceAnalysis::Audit { theorem, t0, .. } => {
                    let needs_t0 = matches!(
                        theorem,
                        TheoremId::PhaseChangeRigidity | TheoremId::ExtremalPhaseChange | TheoremId::SliceFutureNonexistence
                    );
                    if needs_t0 && t0.is_none() {
                        return Err(ctx.invalid(Some(theorem.name()), format!("audit {} needs t0", theorem.name())));
                    }
                    if *theorem == TheoremId::DoublyTwistedGraph {
                        return Err(ctx.invalid(
                            Some(theorem.name()),
                            "doublyTwistedGraph is a spacetime analysis (op doublyTwisted)".into(),
                        ));
                    }
                }
                _ => {}
            }
        }
        surfaces.push(CompiledSurface {
            spec: spec.clone(),
            immersion,
            grid,
        });
    }
    for a in &s.analyses {
        match a {
            SpacetimeAnalysis::Identities { region } => {
                if let Some(r) = region {
                    if r.x.len() != m.fiber_dim() {
                        return Err(ctx.invalid(None, "identity region does not match the fiber dimension".into()));
                    }
                }
            }
            SpacetimeAnalysis::ExpansionPropagation { t0, region } => {
                if region.x.len() != m.fiber_dim() || !(region.t.0 < region.t.1) {
                    return Err(ctx.invalid(None, "propagation region does not match the fiber dimension".into()));
                }
                if region.t.0 <= *t0 {
                    return Err(ctx.invalid(None, format!("propagation samples must lie above t0 = {t0}")));
                }
            }
            SpacetimeAnalysis::Falsify(f) => {
                ctx.quasi_isometry(&f.quasi_isometry, m.fiber_dim())?;
                grid_of(&ctx, &f.grid)?;
                if f.family.axes.len() + f.x2.len() != m.fiber_dim() {
                    return Err(ctx.invalid(None, "falsify: graph axes plus x2 must fill the fiber".into()));
                }
            }
            SpacetimeAnalysis::DoublyTwisted(d) => {
                for e in [&d.u, &d.alpha1, &d.alpha2] {
                    ctx.expr(e)?;
                }
                grid_of(&ctx, &d.grid)?;
            }
        }
    }
    Ok(Compiled { spacetime: m, surfaces })
}

/// Convenience for the runner: sandwich data of a spec.
pub fn quasi_isometry_input(q: &QuasiIsometrySpec, fiber_dim: usize) -> Result<QuasiIsometryInput, CliError> {
    Ctx { text: None }.quasi_isometry(q, fiber_dim)
}

pub fn expr(src: &str) -> Result<Expr, CliError> {
    Ctx { text: None }.expr(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schemaVersion": 1,
  "name": "grw",
  "spacetime": {"kind": "grw", "f": "exp(2*t)", "g0": {"identity": 3}}
}"#;

    #[test]
    fn minimal_grw_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        match &s.spacetime {
            SpacetimeSpec::Grw { f, .. } => assert_eq!(f, "exp(2*t)"),
            other => panic!("{other:?}"),
        }
        assert_eq!(s.options.trials, 500);
        assert_eq!(parse_scenario(&to_json(&s)).unwrap(), s);
    }

    #[test]
    fn negative_lapse_is_rejected() {
        let text = r#"{"schemaVersion": 1, "name": "bad",
 "spacetime": {"kind": "standardStatic", "beta": "-1", "metric": {"identity": 3}}}"#;
        match parse_scenario(text) {
            Err(CliError::Validation { at, message }) => {
                assert!(message.contains("not positive"), "{message}");
                assert_eq!(at.unwrap().line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_points_at_missing_paren() {
        let text = "{\"schemaVersion\": 1, \"name\": \"x\",\n  \"spacetime\": {\"kind\": \"grw\", \"f\": \"exp(2*t\", \"g0\": {\"identity\": 3}}}";
        match parse_scenario(text) {
            Err(CliError::Validation { at, message }) => {
                let at = at.unwrap();
                assert_eq!(at.line, 2);
                // the `)` is missing at the 8th character of the string body
                let quote = text.lines().nth(1).unwrap().find("\"exp").unwrap() + 1;
                assert_eq!(at.column, quote + 8, "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_ops_carry_positions() {
        let text = "{\"schemaVersion\": 1, \"name\": \"x\", \"colour\": 3,\n \"spacetime\": {\"kind\": \"catalog\", \"name\": \"mink\"}}";
        match parse_scenario(text) {
            Err(CliError::Parse { at, message }) => {
                assert_eq!(at.line, 1);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = r#"{"schemaVersion": 1, "name": "x", "spacetime": {"kind": "catalog", "name": "mink"},
 "analyses": [{"op": "levitate"}]}"#;
        match parse_scenario(text) {
            Err(CliError::Parse { at, .. }) => assert_eq!(at.line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = r#"{"schemaVersion": 1, "name": "x", "spacetime": {"kind": "catalog", "name": "mink"},
 "surfaces": [{"name": "s", "immersion": {"kind": "slice", "t0": 0, "axes": [1, 2], "x2": [0]},
   "grid": {"cube": {"dim": 3, "half": 1, "count": 5}}}]}"#;
        assert!(matches!(parse_scenario(text), Err(CliError::Validation { .. })));
        let text = r#"{"schemaVersion": 2, "name": "x", "spacetime": {"kind": "catalog", "name": "mink"}}"#;
        assert!(matches!(parse_scenario(text), Err(CliError::Validation { .. })));
    }
}
