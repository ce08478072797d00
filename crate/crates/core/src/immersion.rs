//! Spacelike immersions `Σⁿ → M̄`, their adapted frames, second fundamental
//! form and mean curvature vector.
//!
//! Immersions are maps `q ↦ (t, x)` whose components are expressions in the
//! surface parameters `p1..pn`, so exact first and second parameter
//! derivatives come from dual numbers. With coordinate tangent fields
//! `T_a = ∂_a X` one has `∇̄_{T_a}T_b = ∂_a∂_b X + Γ(T_a, T_b)`, and the
//! second fundamental form uses the GR sign `II(X,Y) = −(∇̄_X Y)^⊥`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvature::{christoffels, ConnectionSample};
use crate::error::{GeomError, Result};
use crate::expr::{p_slot, Env, Expr, Var, SLOTS, T_SLOT};
use crate::jet::{expr_jet, DerivMode};
use crate::spacetime::{min_eigenvalue, ChartPoint, MetricSample, SplitSpacetime};

/// Sign `σ` in `H = h⃗ + σ (tr_Σ A) N` for a future timelike unit normal `N`
/// of a spacelike hypersurface and `A(X) = ∇̄_X N`. A direct derivation under
/// the GR convention for `II` gives `−1`; the slice regression in the tests
/// pins it.
pub const HYPERSURFACE_SIGN: f64 = -1.0;

/// Relative singular-value floor below which a Jacobian is rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum ImmersionKind {
    /// `x₁ ↦ (u(x₁), x₁, x₂)` with `x₁` ranging over the fiber `axes`
    /// (1-based) and the remaining fiber coordinates fixed at `x2`.
    Graph { u: Expr, axes: Vec<usize>, x2: Vec<f64> },
    /// `y ↦ (u(y), r₀, y)` in a doubly twisted spacetime; `u` is written in `x2, x3`.
    RadialGraph { r0: f64, u: Expr },
    /// `x₁ ↦ (t₀, x₁, x₂)`.
    Slice { t0: f64, axes: Vec<usize>, x2: Vec<f64> },
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Immersion {
    kind: ImmersionKind,
    param_dim: usize,
    /// `(t, x1, .., x_d)` as expressions in `p1..pn`.
    components: Vec<Expr>,
}

fn fill_fiber(fiber_dim: usize, axes: &[usize], x2: &[f64]) -> Result<Vec<Expr>> {
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != axes.len() || axes.iter().any(|&a| a == 0 || a > fiber_dim) {
        return Err(GeomError::Usage(format!(
            "graph axes {axes:?} must be distinct fiber indices in 1..={fiber_dim}"
        )));
    }
    if axes.len() + x2.len() != fiber_dim {
        return Err(GeomError::Usage(format!(
            "{} graph axes plus {} fixed coordinates do not fill a fiber of dimension {fiber_dim}",
            axes.len(),
            x2.len()
        )));
    }
    let mut fixed = x2.iter();
    Ok((1..=fiber_dim)
        .map(|i| match axes.iter().position(|&a| a == i) {
            Some(j) => Expr::var(Var::P(j as u8 + 1)),
            None => Expr::Const(*fixed.next().expect("counted above")),
        })
        .collect())
}

impl Immersion {
    /// Graph of `u`, written in the fiber coordinates listed in `axes`.
    pub fn graph(fiber_dim: usize, u: Expr, axes: &[usize], x2: &[f64]) -> Result<Self> {
        let fiber = fill_fiber(fiber_dim, axes, x2)?;
        let pos = |i: usize| axes.iter().position(|&a| a == i);
        if u.depends_on(T_SLOT) {
            return Err(GeomError::Usage("graph function may not depend on t".into()));
        }
        for i in 1..=9 {
            if u.depends_on(i) && pos(i).is_none() {
                return Err(GeomError::Usage(format!(
                    "graph function depends on x{i}, which is not a graph axis"
                )));
            }
        }
        let tu = u.substitute(&|v| match v {
            Var::X(i) => pos(i as usize).map(|j| Expr::var(Var::P(j as u8 + 1))),
            Var::R => pos(1).map(|j| Expr::var(Var::P(j as u8 + 1))),
            _ => None,
        });
        let mut components = vec![tu];
        components.extend(fiber);
        Ok(Immersion {
            kind: ImmersionKind::Graph {
                u,
                axes: axes.to_vec(),
                x2: x2.to_vec(),
            },
            param_dim: axes.len(),
            components,
        })
    }

    /// `Σ_{r₀,u}` for fiber coordinates `(r, x2, x3)`.
    pub fn radial_graph(r0: f64, u: Expr) -> Result<Self> {
        if u.depends_on(1) {
            return Err(GeomError::Usage("radial graph function may not depend on r".into()));
        }
        let mut imm = Immersion::graph(3, u.clone(), &[2, 3], &[r0])?;
        imm.kind = ImmersionKind::RadialGraph { r0, u };
        Ok(imm)
    }

    pub fn slice(fiber_dim: usize, t0: f64, axes: &[usize], x2: &[f64]) -> Result<Self> {
        let mut components = vec![Expr::Const(t0)];
        components.extend(fill_fiber(fiber_dim, axes, x2)?);
        Ok(Immersion {
            kind: ImmersionKind::Slice {
                t0,
                axes: axes.to_vec(),
                x2: x2.to_vec(),
            },
            param_dim: axes.len(),
            components,
        })
    }

    /// Arbitrary map; `components = (t, x1, .., x_d)` in `p1..p{param_dim}`.
    pub fn custom(param_dim: usize, components: Vec<Expr>) -> Result<Self> {
        if param_dim == 0 || param_dim > 9 {
            return Err(GeomError::Usage("parameter dimension must be in 1..=9".into()));
        }
        for (k, c) in components.iter().enumerate() {
            for slot in 0..SLOTS {
                let allowed = (1..=param_dim).any(|i| p_slot(i) == slot);
                if c.depends_on(slot) && !allowed {
                    return Err(GeomError::Usage(format!(
                        "component {k} of the immersion uses a variable other than p1..p{param_dim}"
                    )));
                }
            }
        }
        Ok(Immersion {
            kind: ImmersionKind::Custom,
            param_dim,
            components,
        })
    }

    pub fn kind(&self) -> &ImmersionKind {
        &self.kind
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn env(&self, q: &[f64]) -> Result<Env<f64>> {
        if q.len() != self.param_dim {
            return Err(GeomError::Usage(format!(
                "parameter point has {} entries, immersion has {} parameters",
                q.len(),
                self.param_dim
            )));
        }
        let mut env = Env::empty();
        for (i, &v) in q.iter().enumerate() {
            env.set(p_slot(i + 1), v);
        }
        Ok(env)
    }

    pub fn point(&self, q: &[f64]) -> Result<ChartPoint> {
        let env = self.env(q)?;
        let c: Vec<f64> = self
            .components
            .iter()
            .map(|e| e.eval(&env))
            .collect::<std::result::Result<_, _>>()?;
        Ok(ChartPoint::new(c[0], c[1..].to_vec()))
    }

    /// Image point, Jacobian `(D×n)` and per-component parameter Hessians.
    pub fn jet(&self, q: &[f64], order: u8) -> Result<(ChartPoint, DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let env = self.env(q)?;
        let slots: Vec<usize> = (1..=self.param_dim).map(p_slot).collect();
        let n = self.param_dim;
        let d = self.components.len();
        let mut x = Vec::with_capacity(d);
        let mut jac = DMatrix::zeros(d, n);
        let mut hess = Vec::with_capacity(d);
        for (k, e) in self.components.iter().enumerate() {
            let j = expr_jet(e, &env, &slots, order, DerivMode::Analytic)?;
            x.push(j.value);
            for a in 0..n {
                jac[(k, a)] = j.grad[a];
            }
            hess.push(match j.hess {
                Some(h) => DMatrix::from_fn(n, n, |a, b| h[a][b]),
                None => DMatrix::zeros(n, n),
            });
        }
        Ok((ChartPoint::new(x[0], x[1..].to_vec()), jac, hess))
    }

    fn check_rank(&self, jac: &DMatrix<f64>, p: &ChartPoint) -> Result<()> {
        let sv = jac.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(max > 0.0) || min < RANK_TOLERANCE * max {
            return Err(GeomError::ImmersionDegeneracy {
                at: p.to_string(),
                reason: format!("Jacobian has rank below {}", self.param_dim),
            });
        }
        Ok(())
    }

    /// Pullback `h_ab = ḡ(∂_a X, ∂_b X)`.
    pub fn induced_metric(&self, m: &SplitSpacetime, q: &[f64]) -> Result<DMatrix<f64>> {
        let (p, jac, _) = self.jet(q, 1)?;
        self.check_dims(m)?;
        self.check_rank(&jac, &p)?;
        let g = m.ambient_matrix(&p)?;
        Ok(jac.transpose() * g * jac)
    }

    fn check_dims(&self, m: &SplitSpacetime) -> Result<()> {
        if self.components.len() != m.dim() {
            return Err(GeomError::Usage(format!(
                "immersion has {} components, spacetime has dimension {}",
                self.components.len(),
                m.dim()
            )));
        }
        if self.param_dim >= m.dim() {
            return Err(GeomError::Usage("immersion must have positive codimension".into()));
        }
        Ok(())
    }

    /// Full first- and second-order geometry at `q`.
    pub fn geometry(&self, m: &SplitSpacetime, q: &[f64]) -> Result<PointGeometry> {
        self.check_dims(m)?;
        let (point, jac, hess) = self.jet(q, 2)?;
        self.check_rank(&jac, &point)?;
        let connection = christoffels(m, &point)?;
        let sample = m.metric_sample(&point)?;
        let g = connection.g.clone();
        let h = jac.transpose() * &g * &jac;
        let h_min = min_eigenvalue(&h);
        if !(h_min > 0.0) {
            return Err(GeomError::ImmersionDegeneracy {
                at: point.to_string(),
                reason: format!("induced metric is not Riemannian (min eigenvalue {h_min:e})"),
            });
        }
        let h_inv = h.clone().try_inverse().expect("positive definite");
        let n = self.param_dim;
        let dim = g.nrows();
        let frame = AdaptedFrame::build(&g, &jac, &point)?;
        let mut ii = vec![vec![DVector::zeros(dim); n]; n];
        let mut mean = DVector::zeros(dim);
        let geo = PointGeometryParts {
            g: &g,
            jac: &jac,
            h_inv: &h_inv,
        };
        for a in 0..n {
            for b in a..n {
                let second = DVector::from_iterator(dim, hess.iter().map(|hk| hk[(a, b)]));
                let nabla = second + connection.covariant(&jac.column(a).into(), &jac.column(b).into());
                let v = -geo.normal_part(&nabla);
                mean += &v * (h_inv[(a, b)] * if a == b { 1.0 } else { 2.0 });
                ii[a][b] = v.clone();
                ii[b][a] = v;
            }
        }
        Ok(PointGeometry {
            param: q.to_vec(),
            point,
            jac,
            hess,
            g,
            h,
            h_inv,
            connection,
            sample,
            frame,
            ii_coord: ii,
            mean,
        })
    }
}

struct PointGeometryParts<'a> {
    g: &'a DMatrix<f64>,
    jac: &'a DMatrix<f64>,
    h_inv: &'a DMatrix<f64>,
}

impl PointGeometryParts<'_> {
    // V^⊥ = V − h^{ab} ḡ(V, T_b) T_a
    fn normal_part(&self, v: &DVector<f64>) -> DVector<f64> {
        let coeff = self.h_inv * (self.jac.transpose() * (self.g * v));
        v - self.jac * coeff
    }
}

/// ḡ-orthonormal frame adapted to `Σ` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedFrame {
    pub tangents: Vec<DVector<f64>>,
    /// `E_i = Σ_a coeffs[(a, i)] T_a`.
    pub coeffs: DMatrix<f64>,
    /// Timelike future-pointing normal first.
    pub normals: Vec<DVector<f64>>,
    pub eps: Vec<f64>,
}

impl AdaptedFrame {
    fn build(g: &DMatrix<f64>, jac: &DMatrix<f64>, at: &ChartPoint) -> Result<Self> {
        let dim = g.nrows();
        let n = jac.ncols();
        let dot = |v: &DVector<f64>, w: &DVector<f64>| v.dot(&(g * w));
        let mut tangents: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut coeffs = DMatrix::zeros(n, n);
        for a in 0..n {
            let col: DVector<f64> = jac.column(a).into();
            let mut v = col.clone();
            let mut c = DVector::zeros(n);
            c[a] = 1.0;
            for (i, e) in tangents.iter().enumerate() {
                let s = dot(&col, e);
                v -= e * s;
                c -= coeffs.column(i) * s;
            }
            let q = dot(&v, &v);
            if !(q > 0.0) {
                return Err(GeomError::Frame(format!(
                    "tangent direction {a} is not spacelike at {at}"
                )));
            }
            let s = q.sqrt();
            tangents.push(v / s);
            coeffs.set_column(a, &(c / s));
        }
        let mut normals: Vec<DVector<f64>> = Vec::with_capacity(dim - n);
        let mut eps: Vec<f64> = Vec::with_capacity(dim - n);
        let project = |v: &DVector<f64>, normals: &[DVector<f64>], eps: &[f64]| {
            let mut w = v.clone();
            for e in &tangents {
                w -= e * dot(v, e);
            }
            for (nj, ej) in normals.iter().zip(eps) {
                w -= nj * (ej * dot(v, nj));
            }
            w
        };
        let mut dt = DVector::zeros(dim);
        dt[0] = 1.0;
        let n1 = project(&dt, &normals, &eps);
        let q1 = dot(&n1, &n1);
        if !(q1 < 0.0) {
            return Err(GeomError::Frame(format!("no timelike normal at {at}")));
        }
        // ḡ(N₁, ∂_t) = ḡ(N₁, N₁)·|..| < 0, so this is future-pointing
        normals.push(n1 / (-q1).sqrt());
        eps.push(-1.0);
        let scale = g.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut candidates: Vec<usize> = (1..dim).collect();
        while normals.len() < dim - n {
            let mut best: Option<(usize, DVector<f64>, f64)> = None;
            for (ci, &k) in candidates.iter().enumerate() {
                let mut e = DVector::zeros(dim);
                e[k] = 1.0;
                let w = project(&e, &normals, &eps);
                let q = dot(&w, &w);
                if best.as_ref().is_none_or(|b| q > b.2) {
                    best = Some((ci, w, q));
                }
            }
            match best {
                Some((ci, w, q)) if q > 1e-10 * scale => {
                    candidates.remove(ci);
                    normals.push(w / q.sqrt());
                    eps.push(1.0);
                }
                _ => {
                    return Err(GeomError::Frame(format!(
                        "normal space at {at} has dimension below {}",
                        dim - n
                    )))
                }
            }
        }
        Ok(AdaptedFrame {
            tangents,
            coeffs,
            normals,
            eps,
        })
    }

    /// Largest deviation of the frame from ḡ-orthonormality.
    pub fn orthonormality_residual(&self, g: &DMatrix<f64>) -> f64 {
        let all: Vec<(&DVector<f64>, f64)> = self
            .tangents
            .iter()
            .map(|e| (e, 1.0))
            .chain(self.normals.iter().zip(self.eps.iter().copied()))
            .collect();
        let mut worst: f64 = 0.0;
        for (i, (v, s)) in all.iter().enumerate() {
            for (j, (w, _)) in all.iter().enumerate() {
                let want = if i == j { *s } else { 0.0 };
                worst = worst.max((v.dot(&(g * *w)) - want).abs());
            }
        }
        worst
    }
}

/// Everything known about `Σ` at one parameter point.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub param: Vec<f64>,
    pub point: ChartPoint,
    /// `T_a = ∂_a X` as columns.
    pub jac: DMatrix<f64>,
    /// `hess[k][(a, b)] = ∂_a ∂_b X^k`.
    pub hess: Vec<DMatrix<f64>>,
    /// Ambient metric at the image point.
    pub g: DMatrix<f64>,
    /// Induced metric and its inverse.
    pub h: DMatrix<f64>,
    pub h_inv: DMatrix<f64>,
    pub connection: ConnectionSample,
    pub sample: MetricSample,
    pub frame: AdaptedFrame,
    /// `II(T_a, T_b)`.
    pub ii_coord: Vec<Vec<DVector<f64>>>,
    /// Mean curvature vector `H = h^{ab} II(T_a, T_b)`.
    pub mean: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtrinsicData {
    /// `II(E_i, E_k)` as ambient components.
    pub ii: Vec<Vec<Vec<f64>>>,
    pub h: Vec<f64>,
    pub h_dot_partial_t: f64,
    pub theta: f64,
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn param_dim(&self) -> usize {
        self.jac.ncols()
    }

    pub fn beta(&self) -> f64 {
        self.sample.beta
    }

    pub fn metric(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        v.dot(&(&self.g * w))
    }

    pub fn partial_t(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[0] = 1.0;
        v
    }

    pub fn normal_part(&self, v: &DVector<f64>) -> DVector<f64> {
        PointGeometryParts {
            g: &self.g,
            jac: &self.jac,
            h_inv: &self.h_inv,
        }
        .normal_part(v)
    }

    /// `II(v, w)` for tangent vectors given by coefficients in `T_a`.
    pub fn second_fundamental(&self, v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for a in 0..self.param_dim() {
            for b in 0..self.param_dim() {
                out += &self.ii_coord[a][b] * (v[a] * w[b]);
            }
        }
        out
    }

    /// `ḡ(∂_t, H)`.
    pub fn h_dot_partial_t(&self) -> f64 {
        self.metric(&self.partial_t(), &self.mean)
    }

    /// `dτ(T_a)`.
    pub fn dtau(&self) -> DVector<f64> {
        self.jac.row(0).transpose()
    }

    /// Coordinates of `∇τ` in the `T_a` basis.
    pub fn grad_tau_coords(&self) -> DVector<f64> {
        &self.h_inv * self.dtau()
    }

    /// `g(∇τ, ∇τ)`.
    pub fn grad_tau_norm_sq(&self) -> f64 {
        self.dtau().dot(&self.grad_tau_coords())
    }

    /// `sinh²θ = β g(∇τ, ∇τ)`.
    pub fn sinh2_theta(&self) -> f64 {
        self.beta() * self.grad_tau_norm_sq()
    }

    pub fn theta(&self) -> f64 {
        self.sinh2_theta().max(0.0).sqrt().asinh()
    }

    /// `cosh²θ := −Σⱼ εⱼ ḡ(∂_t/√β, Nⱼ)²`.
    pub fn cosh2_theta(&self) -> f64 {
        let u = self.partial_t() / self.beta().sqrt();
        -self
            .frame
            .normals
            .iter()
            .zip(&self.frame.eps)
            .map(|(nj, e)| e * self.metric(&u, nj).powi(2))
            .sum::<f64>()
    }

    /// `Σᵢ ḡ(∂_t/√β, Eᵢ)²`, the frame form of `sinh²θ`.
    pub fn tangent_sum_partial_t(&self) -> f64 {
        let u = self.partial_t() / self.beta().sqrt();
        self.frame.tangents.iter().map(|e| self.metric(&u, e).powi(2)).sum()
    }

    pub fn extrinsic(&self) -> ExtrinsicData {
        let n = self.param_dim();
        let c = &self.frame.coeffs;
        let ii = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        self.second_fundamental(&c.column(i).into(), &c.column(k).into())
                            .iter()
                            .copied()
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ExtrinsicData {
            ii,
            h: self.mean.iter().copied().collect(),
            h_dot_partial_t: self.h_dot_partial_t(),
            theta: self.theta(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "status")]
pub enum SpacelikeCheck {
    Ok { min_eigenvalue: f64 },
    Failure { witness: usize, param: Vec<f64>, min_eigenvalue: f64 },
}

/// Positive definiteness of the induced metric at every parameter point.
pub fn spacelike_check(m: &SplitSpacetime, imm: &Immersion, params: &[Vec<f64>]) -> Result<SpacelikeCheck> {
    let mut worst = f64::INFINITY;
    for (i, q) in params.iter().enumerate() {
        let ev = min_eigenvalue(&imm.induced_metric(m, q)?);
        if !(ev > 0.0) {
            return Ok(SpacelikeCheck::Failure {
                witness: i,
                param: q.clone(),
                min_eigenvalue: ev,
            });
        }
        worst = worst.min(ev);
    }
    Ok(SpacelikeCheck::Ok { min_eigenvalue: worst })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypersurfaceSplit {
    /// Parameters of `S` at the point of `Σ`.
    pub s_param: Vec<f64>,
    /// Mean curvature of `Σ` in `S`.
    pub h_vec: DVector<f64>,
    pub tr_a: f64,
    /// Future timelike unit normal of `S`.
    pub normal: DVector<f64>,
    pub reconstructed_h: DVector<f64>,
    pub sign: f64,
    /// `max |reconstructed_h − H|` over components.
    pub residual: f64,
}

/// Splits `H` of `Σ ⊂ S` into its part inside `S` and the `(tr A) N` term.
/// `tr_Σ A` is computed independently from central differences of `N` along
/// the parameters of `S`.
pub fn hypersurface_decomposition(
    m: &SplitSpacetime,
    sigma: &Immersion,
    q: &[f64],
    s: &Immersion,
    s_guess: Option<&[f64]>,
) -> Result<HypersurfaceSplit> {
    if s.param_dim() + 1 != m.dim() {
        return Err(GeomError::Usage("S must be a hypersurface".into()));
    }
    let geo = sigma.geometry(m, q)?;
    let target = geo.point.coords();
    let mut sp: DVector<f64> = match s_guess {
        Some(g) => DVector::from_column_slice(g),
        None if s.param_dim() == m.fiber_dim() => DVector::from_column_slice(&geo.point.x),
        None => DVector::zeros(s.param_dim()),
    };
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let (p, jac, _) = s.jet(sp.as_slice(), 1)?;
        let r = p.coords() - &target;
        residual = r.norm();
        if residual < 1e-13 * (1.0 + target.norm()) {
            break;
        }
        let jt = jac.transpose();
        let Some(step) = (&jt * &jac).lu().solve(&(-(jt * r))) else {
            break;
        };
        sp += step;
    }
    if residual > 1e-8 * (1.0 + target.norm()) {
        return Err(GeomError::Usage(format!(
            "Σ is not contained in S near {} (distance {residual:e})",
            geo.point
        )));
    }
    let (_, js, _) = s.jet(sp.as_slice(), 1)?;
    let jst = js.transpose();
    let solver = (&jst * &js).lu();
    let c = solver
        .solve(&(&jst * &geo.jac))
        .ok_or_else(|| GeomError::Usage("S is degenerate at the contact point".into()))?;
    let tangency = (&js * &c - &geo.jac).norm();
    if tangency > 1e-6 * (1.0 + geo.jac.norm()) {
        return Err(GeomError::Usage(format!(
            "Σ is not tangent to S at {} (defect {tangency:e})",
            geo.point
        )));
    }

    let normal_at = |params: &DVector<f64>| -> Result<DVector<f64>> {
        let g = s.geometry(m, params.as_slice())?;
        Ok(g.frame.normals[0].clone())
    };
    let n_vec = normal_at(&sp)?;
    let conn = &geo.connection;
    let mut nabla_n = Vec::with_capacity(s.param_dim());
    for alpha in 0..s.param_dim() {
        let h = f64::EPSILON.cbrt() * (1.0 + sp[alpha].abs());
        let mut plus = sp.clone();
        plus[alpha] += h;
        let mut minus = sp.clone();
        minus[alpha] -= h;
        let dn = (normal_at(&plus)? - normal_at(&minus)?) / (2.0 * h);
        nabla_n.push(dn + conn.covariant(&js.column(alpha).into(), &n_vec));
    }
    let n = sigma.param_dim();
    let along: Vec<DVector<f64>> = (0..n)
        .map(|a| {
            (0..s.param_dim())
                .map(|alpha| &nabla_n[alpha] * c[(alpha, a)])
                .fold(DVector::zeros(m.dim()), |acc, v| acc + v)
        })
        .collect();
    let mut tr_a = 0.0;
    for a in 0..n {
        for b in 0..n {
            tr_a += geo.h_inv[(a, b)] * geo.metric(&along[a], &geo.jac.column(b).into());
        }
    }
    let h_full = &geo.mean;
    let h_vec = h_full + &n_vec * geo.metric(h_full, &n_vec);
    let reconstructed_h = &h_vec + &n_vec * (HYPERSURFACE_SIGN * tr_a);
    let residual = (&reconstructed_h - h_full).amax();
    Ok(HypersurfaceSplit {
        s_param: sp.iter().copied().collect(),
        h_vec,
        tr_a,
        normal: n_vec,
        reconstructed_h,
        sign: HYPERSURFACE_SIGN,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::catalog::*;
    use proptest::prelude::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn sphere(r: f64) -> Immersion {
        Immersion::custom(
            2,
            vec![
                Expr::Const(0.0),
                e(&format!("{r}*sin(p1)*cos(p2)")),
                e(&format!("{r}*sin(p1)*sin(p2)")),
                e(&format!("{r}*cos(p1)")),
            ],
        )
        .unwrap()
    }

    // ∇̄_{T_a}T_b from central differences of the Jacobian.
    fn fd_second_fundamental(m: &SplitSpacetime, imm: &Immersion, q: &[f64]) -> Vec<Vec<DVector<f64>>> {
        let geo = imm.geometry(m, q).unwrap();
        let n = imm.param_dim();
        let h = 1e-5;
        (0..n)
            .map(|a| {
                let mut qp = q.to_vec();
                qp[a] += h;
                let mut qm = q.to_vec();
                qm[a] -= h;
                let jp = imm.jet(&qp, 1).unwrap().1;
                let jm = imm.jet(&qm, 1).unwrap().1;
                (0..n)
                    .map(|b| {
                        let d: DVector<f64> = (jp.column(b) - jm.column(b)) / (2.0 * h);
                        let v = d + geo.connection.covariant(&geo.jac.column(a).into(), &geo.jac.column(b).into());
                        -geo.normal_part(&v)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn graph_spacelike_examples() {
        let grid: Vec<Vec<f64>> = (0..5).flat_map(|i| (0..5).map(move |j| vec![i as f64 * 0.2 - 0.4, j as f64 * 0.2 - 0.4])).collect();
        let tilted = Immersion::graph(3, e("0.5*x1"), &[1, 2], &[0.0]).unwrap();
        assert!(matches!(spacelike_check(&mink(), &tilted, &grid).unwrap(), SpacelikeCheck::Ok { .. }));
        let steep = Immersion::graph(3, e("2*x1"), &[1, 2], &[0.0]).unwrap();
        match spacelike_check(&mink(), &steep, &grid).unwrap() {
            SpacelikeCheck::Failure { min_eigenvalue, .. } => assert!((min_eigenvalue + 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(spacelike_check(&expgrw(), &tilted, &grid).unwrap(), SpacelikeCheck::Ok { .. }));
        let slice = Immersion::slice(3, 0.7, &[1, 2], &[0.0]).unwrap();
        assert!(matches!(spacelike_check(&expgrw(), &slice, &grid).unwrap(), SpacelikeCheck::Ok { .. }));
    }

    #[test]
    fn constructors_validate_input() {
        assert!(Immersion::graph(3, e("x3"), &[1, 2], &[0.0]).is_err());
        assert!(Immersion::graph(3, e("t"), &[1, 2], &[0.0]).is_err());
        assert!(Immersion::graph(3, e("x1"), &[1, 1], &[0.0]).is_err());
        assert!(Immersion::graph(3, e("x1"), &[1, 2], &[]).is_err());
        assert!(Immersion::custom(2, vec![e("x1"), e("p1"), e("p2"), Expr::Const(0.0)]).is_err());
        let g = Immersion::graph(3, e("x2^2"), &[2, 3], &[5.0]).unwrap();
        let p = g.point(&[3.0, 4.0]).unwrap();
        assert_eq!(p, ChartPoint::new(9.0, vec![5.0, 3.0, 4.0]));
        let r = Immersion::radial_graph(2.0, e("x3")).unwrap();
        assert_eq!(r.point(&[0.5, 0.25]).unwrap(), ChartPoint::new(0.25, vec![2.0, 0.5, 0.25]));
        assert!(Immersion::radial_graph(2.0, e("r")).is_err());
    }

    #[test]
    fn rank_deficient_map_is_an_error() {
        let folded = Immersion::custom(2, vec![Expr::Const(0.0), e("p1 + p2"), e("p1 + p2"), Expr::Const(0.0)]).unwrap();
        assert!(matches!(
            folded.geometry(&mink(), &[0.1, 0.2]),
            Err(GeomError::ImmersionDegeneracy { .. })
        ));
    }

    #[test]
    fn slice_frame_in_minkowski() {
        let imm = Immersion::slice(3, 0.0, &[1, 2], &[0.0]).unwrap();
        let geo = imm.geometry(&mink(), &[0.3, -0.2]).unwrap();
        let f = &geo.frame;
        assert_eq!(f.eps, vec![-1.0, 1.0]);
        assert_eq!(f.normals[0].as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.tangents[0].as_slice(), &[0.0, 1.0, 0.0, 0.0]);
        assert!(geo.mean.norm() == 0.0);
        assert!(geo.ii_coord.iter().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn tilted_plane_frame_is_orthonormal() {
        let imm = Immersion::graph(3, e("0.5*x1"), &[1, 2], &[0.0]).unwrap();
        let geo = imm.geometry(&mink(), &[0.4, 0.1]).unwrap();
        assert!(geo.frame.orthonormality_residual(&geo.g) < 1e-12);
        assert!(geo.metric(&geo.frame.normals[0], &geo.partial_t()) < 0.0);
        assert!((geo.tangent_sum_partial_t() - geo.cosh2_theta() + 1.0).abs() < 1e-12);
        assert!((geo.grad_tau_norm_sq() - 1.0 / 3.0).abs() < 1e-12);
        assert!(geo.mean.norm() < 1e-14);
    }

    #[test]
    fn expgrw_slice_plane_mean_curvature() {
        let imm = Immersion::slice(3, 0.4, &[1, 2], &[0.3]).unwrap();
        let geo = imm.geometry(&expgrw(), &[0.2, -0.5]).unwrap();
        let ext = geo.extrinsic();
        for i in 0..2 {
            assert!((ext.ii[i][i][0] + 1.0).abs() < 1e-12);
            assert!(ext.ii[i][i][1..].iter().all(|v| v.abs() < 1e-12));
        }
        assert!((ext.ii[0][1][0]).abs() < 1e-12);
        assert!((ext.h[0] + 2.0).abs() < 1e-12 && ext.h[1..].iter().all(|v| v.abs() < 1e-12));
        assert!((ext.h_dot_partial_t - 2.0).abs() < 1e-12);
        assert_eq!(ext.theta, 0.0);
        let fd = fd_second_fundamental(&expgrw(), &imm, &[0.2, -0.5]);
        for a in 0..2 {
            for b in 0..2 {
                assert!((&fd[a][b] - &geo.ii_coord[a][b]).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn round_sphere_mean_curvature() {
        for r in [1.0, 2.5] {
            let imm = sphere(r);
            let q = [1.1, 0.4];
            let geo = imm.geometry(&mink(), &q).unwrap();
            let p = geo.point.coords();
            let outward = DVector::from_column_slice(&[0.0, p[1] / r, p[2] / r, p[3] / r]);
            assert!((&geo.mean - &outward * (2.0 / r)).amax() < 1e-12);
            assert!(geo.metric(&geo.mean, &geo.mean) > 0.0);
            let fd = fd_second_fundamental(&mink(), &imm, &q);
            assert!((&fd[0][1] - &geo.ii_coord[0][1]).amax() < 1e-8);
        }
    }

    #[test]
    fn decomposition_through_slices() {
        let s = Immersion::slice(3, 0.4, &[1, 2, 3], &[]).unwrap();
        let plane = Immersion::slice(3, 0.4, &[1, 2], &[0.3]).unwrap();
        let split = hypersurface_decomposition(&expgrw(), &plane, &[0.2, -0.5], &s, None).unwrap();
        assert!((split.tr_a - 2.0).abs() < 1e-8);
        assert!(split.h_vec.amax() < 1e-10);
        assert!(split.residual < 1e-8, "{}", split.residual);
        assert_eq!(split.sign, -1.0);

        let s0 = Immersion::slice(3, 0.0, &[1, 2, 3], &[]).unwrap();
        let plane0 = Immersion::slice(3, 0.0, &[1, 2], &[0.3]).unwrap();
        let split = hypersurface_decomposition(&mink(), &plane0, &[0.2, -0.5], &s0, None).unwrap();
        assert!(split.tr_a.abs() < 1e-10 && split.h_vec.amax() < 1e-12 && split.residual < 1e-10);

        let sp = hypersurface_decomposition(&mink(), &sphere(1.5), &[1.0, 2.0], &s0, None).unwrap();
        assert!(sp.tr_a.abs() < 1e-9);
        assert!((&sp.reconstructed_h - &sp.h_vec).amax() < 1e-9);
        assert!((sp.h_vec.norm() - 2.0 / 1.5).abs() < 1e-10);

        let elsewhere = Immersion::slice(3, 0.9, &[1, 2, 3], &[]).unwrap();
        assert!(matches!(
            hypersurface_decomposition(&mink(), &plane0, &[0.2, -0.5], &elsewhere, None),
            Err(GeomError::Usage(_))
        ));
    }

    fn random_graph() -> impl Strategy<Value = (Expr, Vec<f64>)> {
        (-0.3f64..0.3, -0.3f64..0.3, -0.2f64..0.2, -0.2f64..0.2, prop::collection::vec(-0.5f64..0.5, 2))
            .prop_map(|(a, b, c, d, q)| {
                (e(&format!("{a}*x1 + {b}*x2 + {c}*x1^2 + {d}*sin(x1*x2)")), q)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn frame_and_second_fundamental_form_invariants((u, q) in random_graph(), rot in 0.0f64..std::f64::consts::TAU) {
            for m in [mink(), expgrw(), static_sin(), phase()] {
                let imm = Immersion::graph(3, u.clone(), &[1, 2], &[0.2]).unwrap();
                let geo = imm.geometry(&m, &q).unwrap();
                prop_assert!(geo.frame.orthonormality_residual(&geo.g) < 1e-9);
                // sinh²θ − cosh²θ = −1
                prop_assert!((geo.tangent_sum_partial_t() - geo.cosh2_theta() + 1.0).abs() < 1e-8);
                prop_assert!((geo.sinh2_theta() - geo.tangent_sum_partial_t()).abs() < 1e-8);
                for a in 0..2 {
                    for b in 0..2 {
                        prop_assert!((&geo.ii_coord[a][b] - &geo.ii_coord[b][a]).amax() < 1e-12);
                        for t in &geo.frame.tangents {
                            prop_assert!(geo.metric(&geo.ii_coord[a][b], t).abs() < 1e-8);
                        }
                    }
                }
                // H does not depend on the tangent frame
                let (c, s) = (rot.cos(), rot.sin());
                let e0 = geo.frame.coeffs.column(0) * c + geo.frame.coeffs.column(1) * s;
                let e1 = geo.frame.coeffs.column(1) * c - geo.frame.coeffs.column(0) * s;
                let h_rot = geo.second_fundamental(&e0, &e0) + geo.second_fundamental(&e1, &e1);
                prop_assert!((h_rot - &geo.mean).amax() < 1e-8);
            }
        }
    }
}
