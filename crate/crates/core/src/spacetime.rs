//! Orthogonally split spacetimes `ḡ = −β dt² + g_t` on a single chart `I × F`.
//!
//! Coordinates are ordered `(t, x1, .., x_d)`; index 0 is always time. The
//! lapse `β` and the fiber metric `g_t` are expressions in `t, x1..x_d`, so
//! every derivative the rest of the crate needs comes from one place:
//! [`SplitSpacetime::ambient_jet`].

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::{x_slot, Env, Expr, T_SLOT};
use crate::jet::{expr_jet, DerivMode, Jet};

/// Numerical noise band for open/closed sign conditions.
pub const SIGN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub t: f64,
    pub x: Vec<f64>,
}

impl ChartPoint {
    pub fn new(t: f64, x: impl Into<Vec<f64>>) -> Self {
        ChartPoint { t, x: x.into() }
    }

    pub fn from_coords(c: &DVector<f64>) -> Self {
        ChartPoint {
            t: c[0],
            x: c.iter().skip(1).copied().collect(),
        }
    }

    /// `(t, x1, .., x_d)`.
    pub fn coords(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.x.len() + 1,
            std::iter::once(self.t).chain(self.x.iter().copied()),
        )
    }

    pub fn env(&self) -> Env<f64> {
        Env::at(self.t, &self.x)
    }
}

impl fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}", self.t)?;
        for (i, x) in self.x.iter().enumerate() {
            write!(f, ", x{}={}", i + 1, x)?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: ChartPoint,
    pub dt: f64,
    pub dx: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: ChartPoint, dt: f64, dx: impl Into<Vec<f64>>) -> Self {
        TangentVector {
            base,
            dt,
            dx: dx.into(),
        }
    }

    pub fn from_components(base: ChartPoint, c: &DVector<f64>) -> Self {
        TangentVector {
            dt: c[0],
            dx: c.iter().skip(1).copied().collect(),
            base,
        }
    }

    pub fn components(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dx.len() + 1,
            std::iter::once(self.dt).chain(self.dx.iter().copied()),
        )
    }

    /// `∂_t` at `base`.
    pub fn partial_t(base: ChartPoint) -> Self {
        let d = base.x.len();
        TangentVector::new(base, 1.0, vec![0.0; d])
    }

    /// `∂_{x_i}` (1-based) at `base`.
    pub fn partial_x(base: ChartPoint, i: usize) -> Self {
        let mut dx = vec![0.0; base.x.len()];
        dx[i - 1] = 1.0;
        TangentVector::new(base, 0.0, dx)
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector::new(
            self.base.clone(),
            s * self.dt,
            self.dx.iter().map(|v| s * v).collect::<Vec<_>>(),
        )
    }
}

/// Symmetric `d×d` matrix of expressions, stored as the upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberMetric {
    dim: usize,
    entries: Vec<Expr>,
}

impl FiberMetric {
    fn index(dim: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * dim - i * (i + 1) / 2 + j
    }

    pub fn identity(dim: usize) -> Self {
        FiberMetric::diagonal((0..dim).map(|_| Expr::Const(1.0)).collect())
    }

    pub fn diagonal(diag: Vec<Expr>) -> Self {
        let dim = diag.len();
        let mut m = FiberMetric {
            dim,
            entries: vec![Expr::Const(0.0); dim * (dim + 1) / 2],
        };
        for (i, e) in diag.into_iter().enumerate() {
            m.entries[Self::index(dim, i, i)] = e;
        }
        m
    }

    /// Builds from full rows; the lower triangle must mirror the upper one.
    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(GeomError::Usage(format!("metric rows must all have length {dim}")));
        }
        let mut entries = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                if rows[i][j] != rows[j][i] {
                    return Err(GeomError::Usage(format!(
                        "metric is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                entries.push(rows[i][j].clone());
            }
        }
        Ok(FiberMetric { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[Self::index(self.dim, i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<Expr>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).clone()).collect())
            .collect()
    }

    /// Scales every entry by `factor` (warping).
    pub fn scaled(&self, factor: &Expr) -> Self {
        FiberMetric {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|e| match e.as_constant() {
                    Some(0.0) => Expr::Const(0.0),
                    Some(1.0) => factor.clone(),
                    _ => Expr::Binary(
                        crate::expr::BinOp::Mul,
                        Box::new(factor.clone()),
                        Box::new(e.clone()),
                    ),
                })
                .collect(),
        }
    }

    pub fn eval(&self, env: &Env<f64>) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.get(i, j).eval(env)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &FiberMetric) -> FiberMetric {
        let dim = self.dim + other.dim;
        let mut rows = vec![vec![Expr::Const(0.0); dim]; dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                rows[i][j] = self.get(i, j).clone();
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                rows[self.dim + i][self.dim + j] = other.get(i, j).clone();
            }
        }
        FiberMetric::from_rows(rows).expect("direct sum of symmetric blocks is symmetric")
    }
}

/// Which catalog family a spacetime came from, with its defining fields.
#[derive(Clone, Debug, PartialEq)]
pub enum SpacetimeKind {
    Minkowski,
    /// `−dt² + f(t) g₀`.
    Grw { f: Expr, g0: FiberMetric },
    /// `−β(x) dt² + g(x)`.
    StandardStatic,
    /// `−dt² + f(t, x) g₀`.
    Twisted { f: Expr, g0: FiberMetric },
    /// `−β dt² + f₁ dr² + f₂ g₀` with fiber coordinates `(r, y1, y2)`.
    DoublyTwisted {
        f1: Expr,
        f2: Expr,
        g0: FiberMetric,
    },
    Custom,
}

impl SpacetimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SpacetimeKind::Minkowski => "minkowski",
            SpacetimeKind::Grw { .. } => "grw",
            SpacetimeKind::StandardStatic => "standardStatic",
            SpacetimeKind::Twisted { .. } => "twisted",
            SpacetimeKind::DoublyTwisted { .. } => "doublyTwisted",
            SpacetimeKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpacetime {
    kind: SpacetimeKind,
    fiber_dim: usize,
    interval: (f64, f64),
    beta: Expr,
    metric: FiberMetric,
    deriv_mode: DerivMode,
    warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    pub point: ChartPoint,
    pub beta: f64,
    pub g: DMatrix<f64>,
    /// `∂_t` of the fiber metric components, i.e. `L_{∂t} g_t`.
    pub lie: DMatrix<f64>,
    pub d_beta_dt: f64,
    pub grad_beta_fiber: DVector<f64>,
}

impl MetricSample {
    /// `∂_t ln β`.
    pub fn d_ln_beta_dt(&self) -> f64 {
        self.d_beta_dt / self.beta
    }

    /// Eigenvalues of `lie` relative to `g` (frame independent), ascending.
    pub fn relative_lie_eigenvalues(&self) -> Vec<f64> {
        relative_eigenvalues(&self.lie, &self.g)
    }
}

/// Eigenvalues of the pencil `(a, b)` for symmetric `a` and SPD `b`, ascending.
pub fn relative_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let chol = b.clone().cholesky().expect("reference metric must be positive definite");
    let l_inv = chol.l().try_inverse().expect("cholesky factor is invertible");
    let m = &l_inv * a * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Components of `ḡ` and its partial derivatives at a point.
#[derive(Clone, Debug)]
pub struct AmbientJet {
    pub point: ChartPoint,
    pub g: DMatrix<f64>,
    /// `dg[k] = ∂_k ḡ`.
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[k][l] = ∂_k ∂_l ḡ`, order-2 jets only.
    pub ddg: Option<Vec<Vec<DMatrix<f64>>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MonotonicityReport {
    pub point: ChartPoint,
    pub expanding: bool,
    pub non_contracting: bool,
    pub contracting: bool,
    pub non_expanding: bool,
    pub min_lie_eigenvalue: f64,
    pub max_lie_eigenvalue: f64,
    pub d_beta_dt: f64,
}

impl MonotonicityReport {
    /// Coarse phase label used to detect phase changes along curves.
    pub fn phase(&self) -> Phase {
        match (self.expanding, self.contracting, self.non_contracting, self.non_expanding) {
            (true, _, _, _) => Phase::Expanding,
            (_, true, _, _) => Phase::Contracting,
            (_, _, true, true) => Phase::Static,
            _ => Phase::Mixed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Phase {
    Expanding,
    Contracting,
    Static,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProperTimeRate {
    pub inf_estimate: f64,
    pub sup_estimate: f64,
    pub positive: bool,
    /// Always true: finite samples cannot certify inf/sup over open sets.
    pub sample_based: bool,
    pub samples: usize,
}

impl SplitSpacetime {
    pub fn new(
        kind: SpacetimeKind,
        interval: (f64, f64),
        beta: Expr,
        metric: FiberMetric,
    ) -> Result<Self> {
        if interval.0 >= interval.1 {
            return Err(GeomError::Usage(format!(
                "empty time interval ({}, {})",
                interval.0, interval.1
            )));
        }
        let fiber_dim = metric.dim();
        if fiber_dim == 0 || fiber_dim > 9 {
            return Err(GeomError::Usage(format!(
                "fiber dimension must be in 1..=9, got {fiber_dim}"
            )));
        }
        let mut m = SplitSpacetime {
            kind,
            fiber_dim,
            interval,
            beta,
            metric,
            deriv_mode: DerivMode::Analytic,
            warnings: Vec::new(),
        };
        m.probe();
        Ok(m)
    }

    pub fn with_deriv_mode(mut self, mode: DerivMode) -> Self {
        self.deriv_mode = mode;
        self
    }

    // Evaluates the defining fields at a few probe points and records
    // non-positive values; evaluation at such points will error later.
    fn probe(&mut self) {
        let (lo, hi) = self.interval;
        let ts: Vec<f64> = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => vec![lo + 0.25 * (hi - lo), 0.5 * (lo + hi), lo + 0.75 * (hi - lo)],
            (true, false) => vec![lo + 0.5, lo + 1.0],
            (false, true) => vec![hi - 1.0, hi - 0.5],
            (false, false) => vec![-0.5, 0.0, 0.5],
        };
        let mut fields: Vec<(&str, Expr)> = vec![("beta", self.beta.clone())];
        match &self.kind {
            SpacetimeKind::Grw { f, .. } | SpacetimeKind::Twisted { f, .. } => {
                fields.push(("f", f.clone()))
            }
            SpacetimeKind::DoublyTwisted { f1, f2, .. } => {
                fields.push(("f1", f1.clone()));
                fields.push(("f2", f2.clone()));
            }
            _ => {}
        }
        for t in ts {
            for xv in [0.5, 1.0] {
                let x = vec![xv; self.fiber_dim];
                let env = Env::at(t, &x);
                for (name, e) in &fields {
                    match e.eval(&env) {
                        Ok(v) if v > 0.0 => {}
                        Ok(v) => self.warnings.push(format!(
                            "{name} = {v} is not positive at probe {}",
                            ChartPoint::new(t, x.clone())
                        )),
                        Err(err) => self.warnings.push(format!(
                            "{name} failed at probe {}: {err}",
                            ChartPoint::new(t, x.clone())
                        )),
                    }
                }
            }
        }
    }

    pub fn kind(&self) -> &SpacetimeKind {
        &self.kind
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    /// `1 + fiber_dim`.
    pub fn dim(&self) -> usize {
        self.fiber_dim + 1
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn beta_expr(&self) -> &Expr {
        &self.beta
    }

    pub fn metric_exprs(&self) -> &FiberMetric {
        &self.metric
    }

    pub fn deriv_mode(&self) -> DerivMode {
        self.deriv_mode
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// True when β is the literal constant 1 (∂_t is then geodesic).
    pub fn has_unit_lapse(&self) -> bool {
        self.beta.as_constant() == Some(1.0)
    }

    pub fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.x.len() != self.fiber_dim {
            return Err(GeomError::Usage(format!(
                "point has {} fiber coordinates, spacetime has {}",
                p.x.len(),
                self.fiber_dim
            )));
        }
        let (lo, hi) = self.interval;
        if !(p.t > lo && p.t < hi) {
            return Err(GeomError::OutsideInterval {
                t: p.t,
                min: lo,
                max: hi,
            });
        }
        Ok(())
    }

    pub fn beta(&self, p: &ChartPoint) -> Result<f64> {
        self.check_point(p)?;
        let b = self.beta.eval(&p.env())?;
        if !(b > 0.0) {
            return Err(GeomError::NonPositiveLapse {
                value: b,
                at: p.to_string(),
            });
        }
        Ok(b)
    }

    /// `g_t` components at `p`, checked positive definite.
    pub fn fiber_metric(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        let g = self.metric.eval(&p.env())?;
        let min_eig = min_eigenvalue(&g);
        if !(min_eig > 0.0) {
            return Err(GeomError::MetricDegeneracy {
                at: p.to_string(),
                min_eigenvalue: min_eig,
            });
        }
        Ok(g)
    }

    fn slots(&self) -> Vec<usize> {
        std::iter::once(T_SLOT)
            .chain((1..=self.fiber_dim).map(x_slot))
            .collect()
    }

    fn jets(&self, p: &ChartPoint, order: u8) -> Result<(Jet, Vec<Jet>)> {
        let env = p.env();
        let slots = self.slots();
        let beta = expr_jet(&self.beta, &env, &slots, order, self.deriv_mode)?;
        let mut metric = Vec::with_capacity(self.metric.entries.len());
        for e in &self.metric.entries {
            metric.push(expr_jet(e, &env, &slots, order, self.deriv_mode)?);
        }
        Ok((beta, metric))
    }

    pub fn metric_sample(&self, p: &ChartPoint) -> Result<MetricSample> {
        let beta = self.beta(p)?;
        let g = self.fiber_metric(p)?;
        let (bj, mj) = self.jets(p, 1)?;
        let d = self.fiber_dim;
        let mut lie = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = mj[FiberMetric::index(d, i, j)].grad[0];
                lie[(i, j)] = v;
                lie[(j, i)] = v;
            }
        }
        Ok(MetricSample {
            point: p.clone(),
            beta,
            g,
            lie,
            d_beta_dt: bj.grad[0],
            grad_beta_fiber: DVector::from_iterator(d, bj.grad[1..].iter().copied()),
        })
    }

    /// Ambient metric `ḡ` and its partials up to `order` (1 or 2).
    pub fn ambient_jet(&self, p: &ChartPoint, order: u8) -> Result<AmbientJet> {
        self.beta(p)?;
        self.fiber_metric(p)?;
        let (bj, mj) = self.jets(p, order)?;
        let dim = self.dim();
        let d = self.fiber_dim;
        let assemble = |pick: &dyn Fn(&Jet) -> f64| {
            let mut m = DMatrix::zeros(dim, dim);
            m[(0, 0)] = -pick(&bj);
            for i in 0..d {
                for j in i..d {
                    let v = pick(&mj[FiberMetric::index(d, i, j)]);
                    m[(i + 1, j + 1)] = v;
                    m[(j + 1, i + 1)] = v;
                }
            }
            m
        };
        let g = assemble(&|j| j.value);
        let dg = (0..dim).map(|k| assemble(&|j| j.grad[k])).collect();
        let ddg = (order >= 2).then(|| {
            (0..dim)
                .map(|k| {
                    (0..dim)
                        .map(|l| assemble(&|j| j.hess.as_ref().map_or(0.0, |h| h[k][l])))
                        .collect()
                })
                .collect()
        });
        Ok(AmbientJet {
            point: p.clone(),
            g,
            dg,
            ddg,
        })
    }

    /// `ḡ` as a matrix at `p`.
    pub fn ambient_matrix(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        let beta = self.beta(p)?;
        let g = self.fiber_metric(p)?;
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        m[(0, 0)] = -beta;
        m.view_mut((1, 1), (self.fiber_dim, self.fiber_dim)).copy_from(&g);
        Ok(m)
    }

    /// `ḡ(v, w) = −β v_t w_t + g_t(v_x, w_x)`.
    pub fn ambient_metric(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        if v.base != w.base {
            return Err(GeomError::Usage(
                "tangent vectors are based at different points".into(),
            ));
        }
        let beta = self.beta(&v.base)?;
        let g = self.fiber_metric(&v.base)?;
        let vx = DVector::from_column_slice(&v.dx);
        let wx = DVector::from_column_slice(&w.dx);
        Ok(-beta * v.dt * w.dt + vx.dot(&(&g * wx)))
    }

    /// Divergence of `∂_t` from the split-basis formula
    /// `½(∂_t ln β + tr_g(L_{∂t} g_t))`.
    pub fn div_partial_t(&self, p: &ChartPoint) -> Result<f64> {
        let s = self.metric_sample(p)?;
        Ok(0.5 * (s.d_ln_beta_dt() + trace_relative(&s.lie, &s.g)))
    }

    pub fn monotonicity_at(&self, p: &ChartPoint) -> Result<MonotonicityReport> {
        let s = self.metric_sample(p)?;
        let ev = s.relative_lie_eigenvalues();
        let (min, max) = (ev[0], ev[ev.len() - 1]);
        let db = s.d_beta_dt;
        let tol = SIGN_TOLERANCE;
        Ok(MonotonicityReport {
            point: p.clone(),
            expanding: db <= tol && min > tol,
            non_contracting: db <= tol && min >= -tol,
            contracting: db >= -tol && max < -tol,
            non_expanding: db >= -tol && max <= tol,
            min_lie_eigenvalue: min,
            max_lie_eigenvalue: max,
            d_beta_dt: db,
        })
    }

    /// Sample-based inf/sup of β.
    pub fn moderate_proper_time_rate(&self, samples: &[ChartPoint]) -> Result<ProperTimeRate> {
        if samples.is_empty() {
            return Err(GeomError::Usage("empty sample set".into()));
        }
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for p in samples {
            let b = self.beta(p)?;
            inf = inf.min(b);
            sup = sup.max(b);
        }
        Ok(ProperTimeRate {
            inf_estimate: inf,
            sup_estimate: sup,
            positive: inf > 0.0 && sup.is_finite(),
            sample_based: true,
            samples: samples.len(),
        })
    }
}

/// `tr(b⁻¹ a)`.
pub fn trace_relative(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let inv = b.clone().try_inverse().expect("metric must be invertible");
    (inv * a).trace()
}

/// Constructors for the spacetime families and the named test spacetimes.
pub mod catalog {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).expect("catalog expression")
    }

    const ALL_TIME: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

    pub fn minkowski(fiber_dim: usize) -> SplitSpacetime {
        SplitSpacetime::new(
            SpacetimeKind::Minkowski,
            ALL_TIME,
            Expr::Const(1.0),
            FiberMetric::identity(fiber_dim),
        )
        .expect("minkowski is well formed")
    }

    pub fn grw(f: Expr, g0: FiberMetric) -> Result<SplitSpacetime> {
        if (1..=9).any(|i| f.depends_on(x_slot(i))) {
            return Err(GeomError::Usage(
                "GRW warping function may depend on t only".into(),
            ));
        }
        let metric = g0.scaled(&f);
        SplitSpacetime::new(SpacetimeKind::Grw { f, g0 }, ALL_TIME, Expr::Const(1.0), metric)
    }

    pub fn standard_static(beta: Expr, g: FiberMetric) -> Result<SplitSpacetime> {
        let time_dependent = beta.depends_on(T_SLOT)
            || (0..g.dim()).any(|i| (i..g.dim()).any(|j| g.get(i, j).depends_on(T_SLOT)));
        if time_dependent {
            return Err(GeomError::Usage(
                "standard static fields may not depend on t".into(),
            ));
        }
        SplitSpacetime::new(SpacetimeKind::StandardStatic, ALL_TIME, beta, g)
    }

    pub fn twisted(f: Expr, g0: FiberMetric) -> Result<SplitSpacetime> {
        let metric = g0.scaled(&f);
        SplitSpacetime::new(
            SpacetimeKind::Twisted { f, g0 },
            ALL_TIME,
            Expr::Const(1.0),
            metric,
        )
    }

    /// `−β dt² + f₁ dr² + f₂ g₀`; `g₀` is 2×2 in `(x2, x3)`.
    pub fn doubly_twisted(
        beta: Expr,
        f1: Expr,
        f2: Expr,
        g0: FiberMetric,
    ) -> Result<SplitSpacetime> {
        if g0.dim() != 2 {
            return Err(GeomError::Usage("doubly twisted base metric must be 2×2".into()));
        }
        let metric = FiberMetric::diagonal(vec![f1.clone()]).direct_sum(&g0.scaled(&f2));
        SplitSpacetime::new(
            SpacetimeKind::DoublyTwisted { f1, f2, g0 },
            ALL_TIME,
            beta,
            metric,
        )
    }

    pub fn custom(interval: (f64, f64), beta: Expr, metric: FiberMetric) -> Result<SplitSpacetime> {
        SplitSpacetime::new(SpacetimeKind::Custom, interval, beta, metric)
    }

    /// Flat `−dt² + δ₃`.
    pub fn mink() -> SplitSpacetime {
        minkowski(3)
    }

    /// `−dt² + e^{2t} δ₃` (flat-sliced de Sitter).
    pub fn expgrw() -> SplitSpacetime {
        grw(e("exp(2*t)"), FiberMetric::identity(3)).unwrap()
    }

    /// `−(2 + sin x1) dt² + δ₃`.
    pub fn static_sin() -> SplitSpacetime {
        standard_static(e("2 + sin(x1)"), FiberMetric::identity(3)).unwrap()
    }

    /// `−dt² + e^{−t²} δ₃`: expanding for t < 0, contracting for t > 0.
    pub fn phase() -> SplitSpacetime {
        grw(e("exp(-t^2)"), FiberMetric::identity(3)).unwrap()
    }

    /// Round metric `dθ² + sin²θ dφ²` in `(x2, x3)`.
    pub fn round_sphere_metric() -> FiberMetric {
        FiberMetric::diagonal(vec![Expr::Const(1.0), e("sin(x2)^2")])
    }

    /// Minkowski in spherical coordinates `(r, θ, φ)`.
    pub fn spherical_minkowski() -> SplitSpacetime {
        doubly_twisted(Expr::Const(1.0), Expr::Const(1.0), e("r^2"), round_sphere_metric())
            .unwrap()
    }
}
