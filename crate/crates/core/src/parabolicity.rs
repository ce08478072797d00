//! Sufficient conditions for parabolicity: metric sandwiches against a
//! reference `g₀`, quasi-isometry certificates for graphs, Gaussian curvature
//! of induced 2-metrics, finite total curvature and parabolic slices.
//!
//! Parabolicity is never decided from samples. Certificates say which
//! hypotheses held at the sampled points and what was declared.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::{x_slot, Env, Expr, T_SLOT};
use crate::immersion::{Immersion, ImmersionKind};
use crate::jet::{expr_jet, DerivMode};
use crate::mesh::{StructuredGrid, SurfaceMesh};
use crate::spacetime::{relative_eigenvalues, ChartPoint, FiberMetric, SplitSpacetime};

/// Relative slack for sandwich inequalities.
pub const SANDWICH_SLACK: f64 = 1e-10;
/// Relative slack for the comparison sandwich of the induced metric.
pub const COMPARISON_SLACK: f64 = 1e-8;
/// `K ≥ −CURVATURE_TOLERANCE` counts as non-negative.
pub const CURVATURE_TOLERANCE: f64 = 1e-8;
/// Fraction of the index half-extent treated as the compact core.
pub const COMPACT_FRACTION: f64 = 0.5;
/// Nested boxes used for exhaustion trends.
pub const EXHAUSTION: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// `β α₂(t) g₀ ≤ g_t ≤ β α₁(t) g₀`, optionally only along some fiber axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Sandwich {
    pub g0: FiberMetric,
    pub alpha1: Expr,
    pub alpha2: Expr,
    /// 1-based fiber axes the comparison is restricted to.
    pub axes: Option<Vec<usize>>,
}

impl Sandwich {
    pub fn new(g0: FiberMetric, alpha1: Expr, alpha2: Expr) -> Result<Self> {
        for (name, a) in [("alpha1", &alpha1), ("alpha2", &alpha2)] {
            if (0..crate::expr::SLOTS).any(|s| s != T_SLOT && a.depends_on(s)) {
                return Err(GeomError::Usage(format!("{name} may only depend on t")));
            }
        }
        Ok(Sandwich {
            g0,
            alpha1,
            alpha2,
            axes: None,
        })
    }

    pub fn restricted_to(mut self, axes: &[usize]) -> Self {
        self.axes = Some(axes.to_vec());
        self
    }

    fn alpha(&self, which: &Expr, name: &str, t: f64) -> Result<f64> {
        let mut env = Env::empty();
        env.set(T_SLOT, t);
        let v = which.eval(&env)?;
        if !(v > 0.0) {
            return Err(GeomError::Usage(format!("{name}({t}) = {v} is not positive")));
        }
        Ok(v)
    }

    pub fn alpha1_at(&self, t: f64) -> Result<f64> {
        self.alpha(&self.alpha1, "alpha1", t)
    }

    pub fn alpha2_at(&self, t: f64) -> Result<f64> {
        self.alpha(&self.alpha2, "alpha2", t)
    }

    fn block(&self, full: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.axes {
            Some(axes) => {
                let idx: Vec<usize> = axes.iter().map(|a| a - 1).collect();
                full.select_rows(&idx).select_columns(&idx)
            }
            None => full.clone(),
        }
    }

    /// `g₀` at a point, restricted to the comparison axes.
    pub fn g0_block(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let g0 = self.g0.eval(&p.env())?;
        let b = self.block(&g0);
        if !(crate::spacetime::min_eigenvalue(&b) > 0.0) {
            return Err(GeomError::Usage(format!("g0 is not positive definite at {p}")));
        }
        Ok(b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichWitness {
    pub point: ChartPoint,
    /// `lower` or `upper`.
    pub side: String,
    /// Relative margin; negative means violated.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichReport {
    pub ok: bool,
    pub samples: usize,
    /// `min λ_min(g_t, g₀)/(β α₂) − 1`.
    pub min_lower_margin: f64,
    /// `min 1 − λ_max(g_t, g₀)/(β α₁)`.
    pub min_upper_margin: f64,
    pub witness: Option<SandwichWitness>,
}

/// Checks the sandwich for every vector at every sampled point by
/// generalized eigenvalues of `g_t` relative to `g₀`.
pub fn sandwich_check(m: &SplitSpacetime, s: &Sandwich, points: &[ChartPoint]) -> Result<SandwichReport> {
    if let Some(axes) = &s.axes {
        if axes.iter().any(|&a| a == 0 || a > m.fiber_dim()) {
            return Err(GeomError::Usage("sandwich axes outside the fiber".into()));
        }
    } else if s.g0.dim() != m.fiber_dim() {
        return Err(GeomError::Usage("g0 dimension differs from the fiber dimension".into()));
    }
    let rows: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| {
            let beta = m.beta(p)?;
            let g = s.block(&m.fiber_metric(p)?);
            let g0 = s.g0_block(p)?;
            let ev = relative_eigenvalues(&g, &g0);
            let lower = ev[0] / (beta * s.alpha2_at(p.t)?) - 1.0;
            let upper = 1.0 - ev[ev.len() - 1] / (beta * s.alpha1_at(p.t)?);
            Ok((lower, upper))
        })
        .collect::<Result<_>>()?;
    let mut report = SandwichReport {
        ok: true,
        samples: points.len(),
        min_lower_margin: f64::INFINITY,
        min_upper_margin: f64::INFINITY,
        witness: None,
    };
    for (p, (lower, upper)) in points.iter().zip(rows) {
        report.min_lower_margin = report.min_lower_margin.min(lower);
        report.min_upper_margin = report.min_upper_margin.min(upper);
        if report.witness.is_none() && (lower < -SANDWICH_SLACK || upper < -SANDWICH_SLACK) {
            let (side, margin) = if lower < upper { ("lower", lower) } else { ("upper", upper) };
            report.ok = false;
            report.witness = Some(SandwichWitness {
                point: p.clone(),
                side: side.into(),
                margin,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BaseParabolicity {
    /// Asserted by the user.
    Declared,
    Compact,
    /// Complete 2-dimensional base with `K ≥ 0` (checked on samples).
    NonNegativeCurvature,
    #[default]
    Unknown,
}

/// How the gradient bound is read: `|∇⁰u|₀ ≤ k α₂(u)` or `≤ k √α₂(u)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GradientBound {
    #[default]
    AsPrinted,
    SqrtAlpha2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    QuasiIsometry,
    FiniteTotalCurvature,
    Compactness,
    DeclaredParabolicBase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "status")]
pub enum Verdict {
    Certified,
    RefutedHypothesis {
        condition: String,
        witness: Option<Vec<f64>>,
        detail: String,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuasiIsometryData {
    pub k: f64,
    pub gradient_bound: GradientBound,
    pub base: BaseParabolicity,
    pub inf_beta_alpha2: f64,
    pub sup_beta_alpha1: f64,
    /// `max(sup β α₁, 1/((1−k) inf β α₂))`.
    pub c: Option<f64>,
    /// Smallest relative slack of `(1−k)βα₂ g₀ ≤ g_Σ ≤ βα₁ g₀`.
    pub min_comparison_slack: f64,
    /// Smallest relative slack of `c⁻¹ g₀ ≤ g_Σ ≤ c g₀`.
    pub min_quasi_isometry_slack: Option<f64>,
    /// `max |∇⁰u|₀ / bound`.
    pub max_gradient_ratio: f64,
    pub sandwich: SandwichReport,
    /// Sup of `β α₁(u)` and inf of `β α₂(u)` over nested boxes.
    pub sup_trend: Vec<f64>,
    pub inf_trend: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TotalCurvatureData {
    /// `∫ max(0, −K) dA` over nested boxes, innermost first.
    pub partial_integrals: Vec<f64>,
    pub negative_part_integral: f64,
    pub total_curvature: f64,
    pub min_curvature_outside_core: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParabolicityCertificate {
    pub method: Method,
    pub verdict: Verdict,
    pub samples: usize,
    pub sample_based: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quasi_isometry: Option<QuasiIsometryData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_curvature: Option<TotalCurvatureData>,
    pub notes: Vec<String>,
}

impl ParabolicityCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// Closed surfaces are parabolic in the sense the theorems use.
    pub fn compact() -> Self {
        ParabolicityCertificate {
            method: Method::Compactness,
            verdict: Verdict::Certified,
            samples: 0,
            sample_based: false,
            quasi_isometry: None,
            total_curvature: None,
            notes: vec!["compactness declared".into()],
        }
    }

    pub fn declared() -> Self {
        ParabolicityCertificate {
            method: Method::DeclaredParabolicBase,
            verdict: Verdict::Certified,
            samples: 0,
            sample_based: false,
            quasi_isometry: None,
            total_curvature: None,
            notes: vec!["parabolicity declared".into()],
        }
    }
}

/// Max over the vertices inside each nested box around the grid centre.
pub fn exhaustion_trend(grid: &StructuredGrid, values: &[f64]) -> Vec<f64> {
    EXHAUSTION
        .iter()
        .map(|&frac| {
            (0..grid.len())
                .filter(|&id| in_box(grid, id, frac))
                .map(|id| values[id])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn in_box(grid: &StructuredGrid, id: usize, frac: f64) -> bool {
    grid.multi_index(id).iter().zip(&grid.axes).all(|(&i, a)| {
        if a.periodic {
            return true;
        }
        let centre = (a.count - 1) as f64 / 2.0;
        (i as f64 - centre).abs() <= frac * centre + 1e-9
    })
}

/// A positive sequence that increases at every level and at least doubles.
pub fn looks_unbounded(trend: &[f64]) -> bool {
    trend.windows(2).all(|w| w[1] > 1.01 * w[0]) && trend[trend.len() - 1] > 2.0 * trend[0]
}

fn graph_axes(imm: &Immersion) -> Result<Vec<usize>> {
    match imm.kind() {
        ImmersionKind::Graph { axes, .. } => Ok(axes.clone()),
        ImmersionKind::RadialGraph { .. } => Ok(vec![2, 3]),
        _ => Err(GeomError::Usage(
            "quasi-isometry certificates need a graph immersion".into(),
        )),
    }
}

/// Gaussian curvature of a 2-metric written in fiber variables, from exact
/// second derivatives.
pub fn gaussian_curvature_analytic(metric: &[Vec<Expr>], env: &Env<f64>, slots: [usize; 2]) -> Result<f64> {
    let jet = |e: &Expr| expr_jet(e, env, &slots, 2, DerivMode::Analytic);
    let (e, f, g) = (jet(&metric[0][0])?, jet(&metric[0][1])?, jet(&metric[1][1])?);
    let h = |j: &crate::jet::Jet, a: usize, b: usize| j.hess.as_ref().expect("order 2")[a][b];
    Ok(brioschi(&BrioschiInput {
        e: e.value,
        f: f.value,
        g: g.value,
        e_u: e.grad[0],
        e_v: e.grad[1],
        f_u: f.grad[0],
        f_v: f.grad[1],
        g_u: g.grad[0],
        g_v: g.grad[1],
        e_vv: h(&e, 1, 1),
        f_uv: h(&f, 0, 1),
        g_uu: h(&g, 0, 0),
    }))
}

/// First and second partials of a 2-metric `E du² + 2F du dv + G dv²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrioschiInput {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub e_u: f64,
    pub e_v: f64,
    pub f_u: f64,
    pub f_v: f64,
    pub g_u: f64,
    pub g_v: f64,
    pub e_vv: f64,
    pub f_uv: f64,
    pub g_uu: f64,
}

pub fn brioschi(b: &BrioschiInput) -> f64 {
    let m1 = nalgebra::Matrix3::new(
        -0.5 * b.e_vv + b.f_uv - 0.5 * b.g_uu,
        0.5 * b.e_u,
        b.f_u - 0.5 * b.e_v,
        b.f_v - 0.5 * b.g_u,
        b.e,
        b.f,
        0.5 * b.g_v,
        b.f,
        b.g,
    );
    let m2 = nalgebra::Matrix3::new(0.0, 0.5 * b.e_v, 0.5 * b.g_u, 0.5 * b.e_v, b.e, b.f, 0.5 * b.g_u, b.f, b.g);
    let w = b.e * b.g - b.f * b.f;
    (m1.determinant() - m2.determinant()) / (w * w)
}

/// Gaussian curvature of the induced 2-metric at interior vertices, from
/// central differences of `E, F, G`.
pub fn gaussian_curvature(mesh: &SurfaceMesh) -> Result<Vec<Option<f64>>> {
    let grid = &mesh.grid;
    if grid.dim() != 2 {
        return Err(GeomError::UnsupportedDimension(grid.dim()));
    }
    let (du, dv) = (grid.axes[0].spacing(), grid.axes[1].spacing());
    Ok((0..mesh.len())
        .into_par_iter()
        .map(|id| {
            if mesh.boundary[id] {
                return None;
            }
            let c = |a: isize, b: isize, i: usize, j: usize| {
                mesh.induced[grid.offset(id, &[a, b]).expect("interior vertex")][(i, j)]
            };
            let d_u = |i, j| (c(1, 0, i, j) - c(-1, 0, i, j)) / (2.0 * du);
            let d_v = |i, j| (c(0, 1, i, j) - c(0, -1, i, j)) / (2.0 * dv);
            Some(brioschi(&BrioschiInput {
                e: c(0, 0, 0, 0),
                f: c(0, 0, 0, 1),
                g: c(0, 0, 1, 1),
                e_u: d_u(0, 0),
                e_v: d_v(0, 0),
                f_u: d_u(0, 1),
                f_v: d_v(0, 1),
                g_u: d_u(1, 1),
                g_v: d_v(1, 1),
                e_vv: (c(0, 1, 0, 0) - 2.0 * c(0, 0, 0, 0) + c(0, -1, 0, 0)) / (dv * dv),
                g_uu: (c(1, 0, 1, 1) - 2.0 * c(0, 0, 1, 1) + c(-1, 0, 1, 1)) / (du * du),
                f_uv: (c(1, 1, 0, 1) - c(1, -1, 0, 1) - c(-1, 1, 0, 1) + c(-1, -1, 0, 1)) / (4.0 * du * dv),
            }))
        })
        .collect())
}

/// `Σ K dA` over interior vertices.
pub fn total_curvature(mesh: &SurfaceMesh, k: &[Option<f64>]) -> f64 {
    mesh.interior().map(|id| k[id].unwrap_or(0.0) * mesh.area_weight(id)).sum()
}

/// Finite total curvature evidence. Certified only when `K ≥ 0` (up to
/// tolerance) outside the central core; partial integrals of the negative
/// part over nested boxes are reported either way.
pub fn finite_total_curvature(mesh: &SurfaceMesh) -> Result<ParabolicityCertificate> {
    let k = gaussian_curvature(mesh)?;
    let grid = &mesh.grid;
    let negative: Vec<f64> = (0..mesh.len())
        .map(|id| k[id].map_or(0.0, |k| (-k).max(0.0) * mesh.area_weight(id)))
        .collect();
    let partial_integrals: Vec<f64> = EXHAUSTION
        .iter()
        .map(|&frac| {
            (0..mesh.len())
                .filter(|&id| in_box(grid, id, frac))
                .map(|id| negative[id])
                .sum()
        })
        .collect();
    let min_outside = mesh
        .interior()
        .filter(|&id| !in_box(grid, id, COMPACT_FRACTION))
        .filter_map(|id| k[id])
        .fold(f64::INFINITY, f64::min);
    let data = TotalCurvatureData {
        negative_part_integral: *partial_integrals.last().expect("non-empty"),
        partial_integrals: partial_integrals.clone(),
        total_curvature: total_curvature(mesh, &k),
        min_curvature_outside_core: min_outside,
    };
    let verdict = if min_outside >= -CURVATURE_TOLERANCE {
        Verdict::Certified
    } else {
        let growing = partial_integrals.windows(2).all(|w| w[1] > w[0]);
        Verdict::Inconclusive {
            reason: format!(
                "K < 0 outside the compact core (min {min_outside:.3e}); partial integrals {}",
                if growing { "keep growing" } else { "level off on the sampled region" }
            ),
        }
    };
    Ok(ParabolicityCertificate {
        method: Method::FiniteTotalCurvature,
        verdict,
        samples: mesh.len(),
        sample_based: true,
        quasi_isometry: None,
        total_curvature: Some(data),
        notes: vec!["a finite sampled integral over an exhaustion suggests, but does not prove, finite total curvature".into()],
    })
}

/// Settles whether the base `(F₁, g₀)` counts as parabolic, auto-certifying a
/// 2-dimensional base with sampled `K ≥ 0`.
fn base_status(
    declared: BaseParabolicity,
    s: &Sandwich,
    axes: &[usize],
    points: &[ChartPoint],
    notes: &mut Vec<String>,
) -> Result<BaseParabolicity> {
    if declared != BaseParabolicity::Unknown || axes.len() != 2 {
        return Ok(declared);
    }
    let rows = s.g0.rows();
    let sub: Vec<Vec<Expr>> = axes
        .iter()
        .map(|&i| axes.iter().map(|&j| rows[i - 1][j - 1].clone()).collect())
        .collect();
    let mut min_k = f64::INFINITY;
    for p in points {
        let k = gaussian_curvature_analytic(&sub, &p.env(), [x_slot(axes[0]), x_slot(axes[1])])?;
        min_k = min_k.min(k);
    }
    if min_k >= -CURVATURE_TOLERANCE {
        notes.push(format!(
            "base metric has sampled Gaussian curvature >= {min_k:.3e}; treated as a complete parabolic surface"
        ));
        Ok(BaseParabolicity::NonNegativeCurvature)
    } else {
        Ok(BaseParabolicity::Unknown)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiIsometryInput {
    pub sandwich: Sandwich,
    pub k: f64,
    pub base: BaseParabolicity,
    pub gradient_bound: GradientBound,
}

struct VertexData {
    param: Vec<f64>,
    point: ChartPoint,
    beta_alpha1: f64,
    beta_alpha2: f64,
    alpha2: f64,
    grad_norm: f64,
    /// Relative eigenvalues of the induced metric against `g₀|F₁`.
    ev_min: f64,
    ev_max: f64,
}

/// Quasi-isometry certificate for a graph `Σ_{u,x₂}` against `(F₁, g₀)`.
pub fn quasi_isometry_certificate(
    m: &SplitSpacetime,
    imm: &Immersion,
    input: &QuasiIsometryInput,
    grid: &StructuredGrid,
) -> Result<ParabolicityCertificate> {
    let axes = graph_axes(imm)?;
    let sandwich = input.sandwich.clone().restricted_to(&axes);
    let k = input.k;
    let mut notes = vec!["the sandwich is checked along the graph directions only".to_string()];
    let refuted = |condition: &str, witness: Option<Vec<f64>>, detail: String, samples: usize, data, notes| {
        ParabolicityCertificate {
            method: Method::QuasiIsometry,
            verdict: Verdict::RefutedHypothesis {
                condition: condition.into(),
                witness,
                detail,
            },
            samples,
            sample_based: true,
            quasi_isometry: data,
            total_curvature: None,
            notes,
        }
    };
    if !(k > 0.0 && k < 1.0) {
        return Ok(refuted(
            "gradientBound",
            None,
            format!("k = {k} is not in (0, 1)"),
            0,
            None,
            notes,
        ));
    }
    let rows: Vec<VertexData> = (0..grid.len())
        .into_par_iter()
        .map(|id| {
            let q = grid.param(id);
            let (point, jac, _) = imm.jet(&q, 1)?;
            let beta = m.beta(&point)?;
            let (a1, a2) = (sandwich.alpha1_at(point.t)?, sandwich.alpha2_at(point.t)?);
            let g0 = sandwich.g0_block(&point)?;
            let du = DVector::from_iterator(q.len(), jac.row(0).iter().copied());
            let g0_inv = g0.clone().try_inverse().expect("positive definite");
            let induced = imm.induced_metric(m, &q)?;
            let ev = relative_eigenvalues(&induced, &g0);
            Ok(VertexData {
                param: q,
                point,
                beta_alpha1: beta * a1,
                beta_alpha2: beta * a2,
                alpha2: a2,
                grad_norm: du.dot(&(g0_inv * &du)).max(0.0).sqrt(),
                ev_min: ev[0],
                ev_max: ev[ev.len() - 1],
            })
        })
        .collect::<Result<_>>()?;
    let points: Vec<ChartPoint> = rows.iter().map(|r| r.point.clone()).collect();
    let sandwich_report = sandwich_check(m, &sandwich, &points)?;
    let base = base_status(input.base, &sandwich, &axes, &points, &mut notes)?;

    let bound = |r: &VertexData| match input.gradient_bound {
        GradientBound::AsPrinted => k * r.alpha2,
        GradientBound::SqrtAlpha2 => k * r.alpha2.sqrt(),
    };
    let inf_ba2 = rows.iter().map(|r| r.beta_alpha2).fold(f64::INFINITY, f64::min);
    let sup_ba1 = rows.iter().map(|r| r.beta_alpha1).fold(0.0, f64::max);
    let c = sup_ba1.max(1.0 / ((1.0 - k) * inf_ba2));
    let comparison: Vec<f64> = rows
        .iter()
        .map(|r| (r.ev_min / ((1.0 - k) * r.beta_alpha2) - 1.0).min(1.0 - r.ev_max / r.beta_alpha1))
        .collect();
    let qi_slack = rows
        .iter()
        .map(|r| (r.ev_min * c - 1.0).min(1.0 - r.ev_max / c))
        .fold(f64::INFINITY, f64::min);
    let ratios: Vec<f64> = rows.iter().map(|r| r.grad_norm / bound(r)).collect();
    let sup_trend = exhaustion_trend(grid, &rows.iter().map(|r| r.beta_alpha1).collect::<Vec<_>>());
    let inf_trend: Vec<f64> = exhaustion_trend(grid, &rows.iter().map(|r| 1.0 / r.beta_alpha2).collect::<Vec<_>>())
        .into_iter()
        .map(|v| 1.0 / v)
        .collect();
    let printed_gap = input.gradient_bound == GradientBound::AsPrinted && rows.iter().any(|r| k * r.alpha2 > 1.0);
    if printed_gap {
        notes.push(
            "with the printed bound |grad u| <= k alpha2 the lower comparison bound needs k alpha2 <= 1, which fails at some samples; use the sqrt(alpha2) reading to close the gap".into(),
        );
    }
    let data = QuasiIsometryData {
        k,
        gradient_bound: input.gradient_bound,
        base,
        inf_beta_alpha2: inf_ba2,
        sup_beta_alpha1: sup_ba1,
        c: Some(c),
        min_comparison_slack: comparison.iter().copied().fold(f64::INFINITY, f64::min),
        min_quasi_isometry_slack: Some(qi_slack),
        max_gradient_ratio: ratios.iter().copied().fold(0.0, f64::max),
        sandwich: sandwich_report.clone(),
        sup_trend: sup_trend.clone(),
        inf_trend: inf_trend.clone(),
    };
    let samples = rows.len();

    if let Some(w) = &sandwich_report.witness {
        let at = rows.iter().find(|r| r.point == w.point).map(|r| r.param.clone());
        return Ok(refuted(
            "sandwich",
            at,
            format!("{} bound violated by relative margin {:.3e}", w.side, w.margin),
            samples,
            Some(data),
            notes,
        ));
    }
    if let Some(i) = ratios.iter().position(|&r| r > 1.0) {
        return Ok(refuted(
            "gradientBound",
            Some(rows[i].param.clone()),
            format!("|grad u| = {:.6} exceeds the bound {:.6}", rows[i].grad_norm, bound(&rows[i])),
            samples,
            Some(data),
            notes,
        ));
    }
    if let Some(i) = comparison.iter().position(|&s| s < -COMPARISON_SLACK) {
        return Ok(refuted(
            "comparisonSandwich",
            Some(rows[i].param.clone()),
            format!("induced metric leaves the comparison band by {:.3e}", comparison[i]),
            samples,
            Some(data),
            notes,
        ));
    }
    let verdict = if looks_unbounded(&sup_trend) || looks_unbounded(&inf_trend.iter().map(|v| 1.0 / v).collect::<Vec<_>>()) {
        Verdict::Inconclusive {
            reason: "sampled sup of beta*alpha1(u) or 1/inf of beta*alpha2(u) grows across the exhaustion".into(),
        }
    } else if base == BaseParabolicity::Unknown {
        Verdict::Inconclusive {
            reason: "parabolicity of the base is neither declared nor auto-certified".into(),
        }
    } else {
        Verdict::Certified
    };
    Ok(ParabolicityCertificate {
        method: Method::QuasiIsometry,
        verdict,
        samples,
        sample_based: true,
        quasi_isometry: Some(data),
        total_curvature: None,
        notes,
    })
}

/// Parabolicity of `(F_{t₀}, g_{t₀})` from a sandwich and bounded `β_{t₀}`.
pub fn slice_parabolicity(
    m: &SplitSpacetime,
    t0: f64,
    sandwich: &Sandwich,
    fiber_grid: &StructuredGrid,
    base: BaseParabolicity,
) -> Result<ParabolicityCertificate> {
    if fiber_grid.dim() != m.fiber_dim() {
        return Err(GeomError::Usage("fiber grid dimension differs from the fiber".into()));
    }
    let points: Vec<ChartPoint> = (0..fiber_grid.len())
        .map(|id| ChartPoint::new(t0, fiber_grid.param(id)))
        .collect();
    let report = sandwich_check(m, sandwich, &points)?;
    let betas: Vec<f64> = points.iter().map(|p| m.beta(p)).collect::<Result<_>>()?;
    let sup_trend = exhaustion_trend(fiber_grid, &betas);
    let inv_trend = exhaustion_trend(fiber_grid, &betas.iter().map(|b| 1.0 / b).collect::<Vec<_>>());
    let mut notes = vec![format!(
        "beta on the slice ranges over [{:.6}, {:.6}] on the samples",
        1.0 / inv_trend[inv_trend.len() - 1],
        sup_trend[sup_trend.len() - 1]
    )];
    let all_axes: Vec<usize> = (1..=m.fiber_dim()).collect();
    let base = base_status(base, sandwich, &all_axes, &points, &mut notes)?;
    let verdict = if let Some(w) = &report.witness {
        Verdict::RefutedHypothesis {
            condition: "sandwich".into(),
            witness: Some(w.point.x.clone()),
            detail: format!("{} bound violated by relative margin {:.3e}", w.side, w.margin),
        }
    } else if looks_unbounded(&sup_trend) || looks_unbounded(&inv_trend) {
        Verdict::Inconclusive {
            reason: "beta on the slice grows without visible bound across the exhaustion".into(),
        }
    } else if base == BaseParabolicity::Unknown {
        Verdict::Inconclusive {
            reason: "parabolicity of (F, g0) is neither declared nor auto-certified".into(),
        }
    } else {
        Verdict::Certified
    };
    Ok(ParabolicityCertificate {
        method: Method::QuasiIsometry,
        verdict,
        samples: points.len(),
        sample_based: true,
        quasi_isometry: None,
        total_curvature: None,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::catalog::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn points(t: &[f64]) -> Vec<ChartPoint> {
        let mut out = Vec::new();
        for &t in t {
            for i in -3..=3 {
                out.push(ChartPoint::new(t, vec![i as f64 * 0.7, 0.3, -0.2]));
            }
        }
        out
    }

    fn sandwich(a1: &str, a2: &str) -> Sandwich {
        Sandwich::new(FiberMetric::identity(3), e(a1), e(a2)).unwrap()
    }

    fn graph(u: &str) -> Immersion {
        Immersion::graph(3, e(u), &[1, 2], &[0.0]).unwrap()
    }

    fn qi(a1: &str, a2: &str, k: f64, bound: GradientBound) -> QuasiIsometryInput {
        QuasiIsometryInput {
            sandwich: sandwich(a1, a2),
            k,
            base: BaseParabolicity::Unknown,
            gradient_bound: bound,
        }
    }

    #[test]
    fn sandwich_examples() {
        let ts = [-1.0, 0.0, 0.5, 1.0];
        let r = sandwich_check(&expgrw(), &sandwich("exp(2*t)", "exp(2*t)"), &points(&ts)).unwrap();
        assert!(r.ok && r.min_lower_margin.abs() < 1e-12 && r.min_upper_margin.abs() < 1e-12);
        // g_t = δ and β ∈ [1, 3] force α₂ ≤ 1/3 and α₁ ≥ 1
        let r = sandwich_check(&static_sin(), &sandwich("1", "1/3"), &points(&ts)).unwrap();
        assert!(r.ok);
        let r = sandwich_check(&static_sin(), &sandwich("3", "1"), &points(&ts)).unwrap();
        assert!(!r.ok);
        let r = sandwich_check(&expgrw(), &sandwich("1", "1"), &points(&[0.5])).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(w.side, "upper");
        assert!(sandwich_check(&expgrw(), &sandwich("1", "t"), &points(&[-1.0])).is_err());
        assert!(Sandwich::new(FiberMetric::identity(3), e("x1"), e("1")).is_err());
    }

    #[test]
    fn quasi_isometry_examples() {
        let grid = StructuredGrid::cube(2, 2.0, 9).unwrap();
        let c = quasi_isometry_certificate(&mink(), &graph("0.3"), &qi("1", "1", 0.5, GradientBound::AsPrinted), &grid).unwrap();
        assert!(c.is_certified(), "{c:?}");
        let d = c.quasi_isometry.unwrap();
        assert_eq!(d.base, BaseParabolicity::NonNegativeCurvature);
        assert!((d.c.unwrap() - 2.0).abs() < 1e-12);

        let c = quasi_isometry_certificate(&mink(), &graph("0.5*x1"), &qi("1", "1", 0.6, GradientBound::AsPrinted), &grid).unwrap();
        assert!(c.is_certified(), "{c:?}");
        let d = c.quasi_isometry.unwrap();
        assert!((d.c.unwrap() - 2.5).abs() < 1e-12);
        assert!(d.min_comparison_slack >= -COMPARISON_SLACK);
        // induced metric diag(3/4, 1) against (1−k) = 0.4 and 1
        assert!((d.min_comparison_slack - 0.0).abs() < 1e-12);

        let c = quasi_isometry_certificate(&mink(), &graph("0.99*x1"), &qi("1", "1", 0.9, GradientBound::AsPrinted), &grid).unwrap();
        match c.verdict {
            Verdict::RefutedHypothesis { condition, witness, .. } => {
                assert_eq!(condition, "gradientBound");
                assert!(witness.is_some());
            }
            other => panic!("{other:?}"),
        }
        for k in [1.0, 1.5, 0.0] {
            let c = quasi_isometry_certificate(&mink(), &graph("0.1*x1"), &qi("1", "1", k, GradientBound::AsPrinted), &grid).unwrap();
            assert!(matches!(c.verdict, Verdict::RefutedHypothesis { .. }));
        }
        let slice = Immersion::slice(3, 0.0, &[1, 2], &[0.0]).unwrap();
        assert!(quasi_isometry_certificate(&mink(), &slice, &qi("1", "1", 0.5, GradientBound::AsPrinted), &grid).is_err());
    }

    #[test]
    fn unbounded_warping_is_inconclusive() {
        let grid = StructuredGrid::cube(2, 6.0, 13).unwrap();
        let c = quasi_isometry_certificate(
            &expgrw(),
            &graph("0.4*x1"),
            &qi("exp(2*t)", "exp(2*t)", 0.9, GradientBound::SqrtAlpha2),
            &grid,
        )
        .unwrap();
        assert!(matches!(c.verdict, Verdict::Inconclusive { .. } | Verdict::RefutedHypothesis { .. }), "{c:?}");
        assert!(!c.is_certified());
    }

    #[test]
    fn gaussian_curvature_examples() {
        let plane = Immersion::slice(3, 0.0, &[1, 2], &[0.0]).unwrap();
        let mesh = SurfaceMesh::build(&mink(), &plane, StructuredGrid::cube(2, 1.0, 7).unwrap()).unwrap();
        assert!(gaussian_curvature(&mesh).unwrap().iter().flatten().all(|k| *k == 0.0));
        let tilted = SurfaceMesh::build(&mink(), &graph("0.5*x1"), StructuredGrid::cube(2, 1.0, 7).unwrap()).unwrap();
        assert!(gaussian_curvature(&tilted).unwrap().iter().flatten().all(|k| k.abs() < 1e-10));

        let sphere = Immersion::custom(
            2,
            vec![Expr::Const(0.0), e("sin(p1)*cos(p2)"), e("sin(p1)*sin(p2)"), e("cos(p1)")],
        )
        .unwrap();
        let err = |n| {
            let mesh = SurfaceMesh::build(&mink(), &sphere, StructuredGrid::sphere(n).unwrap()).unwrap();
            let k = gaussian_curvature(&mesh).unwrap();
            let worst = mesh
                .interior()
                .filter(|&id| (0.5..PI - 0.5).contains(&mesh.grid.param(id)[0]))
                .map(|id| (k[id].unwrap() - 1.0).abs())
                .fold(0.0, f64::max);
            (worst, total_curvature(&mesh, &k))
        };
        let (coarse, _) = err(24);
        let (fine, _) = err(48);
        // the polar chart costs O(h² ln 1/h) in the integral near the poles
        let (_, total) = err(64);
        assert!(coarse < 5e-2 && (coarse / fine).log2() > 1.7, "{coarse} {fine}");
        assert!((total - 4.0 * PI).abs() < 0.02 * 4.0 * PI, "{total}");

        // analytic: round sphere metric in (x2, x3) and the hyperbolic plane
        let env = ChartPoint::new(0.0, vec![0.0, 0.9, 0.3]).env();
        let round = round_sphere_metric().rows();
        assert!((gaussian_curvature_analytic(&round, &env, [x_slot(2), x_slot(3)]).unwrap() - 1.0).abs() < 1e-12);
        let hyp = vec![vec![e("exp(2*x3)"), Expr::Const(0.0)], vec![Expr::Const(0.0), Expr::Const(1.0)]];
        assert!((gaussian_curvature_analytic(&hyp, &env, [x_slot(2), x_slot(3)]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_curvature_certificates() {
        let plane = Immersion::slice(3, 0.0, &[1, 2], &[0.0]).unwrap();
        let mesh = SurfaceMesh::build(&mink(), &plane, StructuredGrid::cube(2, 3.0, 13).unwrap()).unwrap();
        assert!(finite_total_curvature(&mesh).unwrap().is_certified());

        let sphere = Immersion::custom(
            2,
            vec![Expr::Const(0.0), e("sin(p1)*cos(p2)"), e("sin(p1)*sin(p2)"), e("cos(p1)")],
        )
        .unwrap();
        let patch = StructuredGrid::new(vec![
            crate::mesh::Axis::closed(0.5, 2.5, 15),
            crate::mesh::Axis::closed(0.0, 2.0, 15),
        ])
        .unwrap();
        let mesh = SurfaceMesh::build(&mink(), &sphere, patch).unwrap();
        assert!(finite_total_curvature(&mesh).unwrap().is_certified());

        // u = x1 x2 is a saddle of negative curvature everywhere
        let saddle = Immersion::custom(2, vec![Expr::Const(0.0), e("p1"), e("p2"), e("0.5*p1*p2")]).unwrap();
        let mesh = SurfaceMesh::build(&mink(), &saddle, StructuredGrid::cube(2, 4.0, 17).unwrap()).unwrap();
        let cert = finite_total_curvature(&mesh).unwrap();
        assert!(matches!(cert.verdict, Verdict::Inconclusive { .. }));
        let parts = cert.total_curvature.unwrap().partial_integrals;
        assert!(parts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn slice_certificates() {
        let grid = StructuredGrid::cube(3, 4.0, 9).unwrap();
        let c = slice_parabolicity(&mink(), 0.3, &sandwich("1", "1"), &grid, BaseParabolicity::Declared).unwrap();
        assert!(c.is_certified());
        let c = slice_parabolicity(&expgrw(), 1.0, &sandwich("exp(2*t)", "exp(2*t)"), &grid, BaseParabolicity::Declared).unwrap();
        assert!(c.is_certified());
        let growing = standard_static(e("exp(x1)"), FiberMetric::identity(3)).unwrap();
        let c = slice_parabolicity(&growing, 0.0, &sandwich("exp(20)", "exp(-20)"), &grid, BaseParabolicity::Declared).unwrap();
        assert!(matches!(c.verdict, Verdict::Inconclusive { .. }), "{c:?}");
        let c = slice_parabolicity(&mink(), 0.0, &sandwich("1", "1"), &grid, BaseParabolicity::Unknown).unwrap();
        assert!(matches!(c.verdict, Verdict::Inconclusive { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn certified_graphs_satisfy_both_sandwiches(a in -0.4f64..0.4, b in -0.4f64..0.4, k in 0.6f64..0.95) {
            let grid = StructuredGrid::cube(2, 1.0, 7).unwrap();
            let imm = graph(&format!("{a}*x1 + {b}*sin(x2)"));
            let c = quasi_isometry_certificate(&mink(), &imm, &qi("1", "1", k, GradientBound::AsPrinted), &grid).unwrap();
            prop_assert!(c.is_certified(), "{:?}", c.verdict);
            let d = c.quasi_isometry.unwrap();
            prop_assert!(d.min_comparison_slack >= -COMPARISON_SLACK);
            prop_assert!(d.min_quasi_isometry_slack.unwrap() >= -COMPARISON_SLACK);
        }

        #[test]
        fn brioschi_is_invariant_under_scaling_of_flat_metrics(s in 0.2f64..5.0, f in -0.4f64..0.4) {
            let b = BrioschiInput { e: s, f: f * s, g: s, e_u: 0.0, e_v: 0.0, f_u: 0.0, f_v: 0.0, g_u: 0.0, g_v: 0.0, e_vv: 0.0, f_uv: 0.0, g_uu: 0.0 };
            prop_assert_eq!(brioschi(&b), 0.0);
        }
    }
}
