//! Levi-Civita connection and curvature of `ḡ`, `∂_t` integral curves and the
//! Riccati-type identity along them.
//!
//! Curvature sign: the public evaluator uses
//! `R̄(X,Y)Z = ∇̄_{[X,Y]}Z − [∇̄_X,∇̄_Y]Z`, which is the negative of the
//! textbook `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z`. Sectional curvature
//! is `ḡ(R̄(u,v)u, v)/(ḡ(u,u)ḡ(v,v) − ḡ(u,v)²)`, which coincides with the
//! textbook value; de Sitter gives `+1` ([`SECTIONAL_SIGN`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::jet::DerivMode;
use crate::spacetime::{ChartPoint, Phase, SplitSpacetime, TangentVector};

/// Conversion constant between `ḡ(R̄(u,v)u,v)/Q` and textbook sectional
/// curvature, fixed by requiring de Sitter to have `K = +1`.
pub const SECTIONAL_SIGN: f64 = 1.0;

/// `|Q|` below this makes a plane degenerate.
pub const PLANE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ConnectionSample {
    pub point: ChartPoint,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `gamma[k][(i, j)] = Γᵏᵢⱼ`.
    pub gamma: Vec<DMatrix<f64>>,
}

impl ConnectionSample {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Components of `∇̄_X Y` for a field `Y` with constant components.
    pub fn covariant(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.gamma.iter().map(|gk| x.dot(&(gk * y))))
    }

    /// `∇̄_X ∂_t`.
    pub fn nabla_partial_t(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.gamma.iter().map(|gk| gk.row(0).transpose().dot(x)))
    }
}

fn christoffels_from(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
    let n = g.nrows();
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::Precondition("ambient metric is singular".into()))?;
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    for i in 0..n {
        for j in i..n {
            // lowered Γ_{lij} = ½(∂ᵢg_jl + ∂ⱼg_il − ∂_l g_ij)
            let lowered = DVector::from_iterator(
                n,
                (0..n).map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])),
            );
            let raised = &g_inv * lowered;
            for k in 0..n {
                gamma[k][(i, j)] = raised[k];
                gamma[k][(j, i)] = raised[k];
            }
        }
    }
    Ok((g_inv, gamma))
}

pub fn christoffels(m: &SplitSpacetime, p: &ChartPoint) -> Result<ConnectionSample> {
    let jet = m.ambient_jet(p, 1)?;
    let (g_inv, gamma) = christoffels_from(&jet.g, &jet.dg)?;
    Ok(ConnectionSample {
        point: p.clone(),
        g: jet.g,
        g_inv,
        gamma,
    })
}

/// `∇̄ḡ` residual `max |∂_k g_ij − Γˡ_ki g_lj − Γˡ_kj g_il|`.
pub fn metric_compatibility_residual(m: &SplitSpacetime, p: &ChartPoint) -> Result<f64> {
    let jet = m.ambient_jet(p, 1)?;
    let c = christoffels(m, p)?;
    let n = c.dim();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = jet.dg[k][(i, j)];
                for l in 0..n {
                    v -= c.gamma[l][(k, i)] * c.g[(l, j)] + c.gamma[l][(k, j)] * c.g[(i, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct CurvatureSample {
    pub connection: ConnectionSample,
    dim: usize,
    /// Textbook `Rᵃ_bcd`, flattened in `a, b, c, d` order.
    riemann: Vec<f64>,
}

impl CurvatureSample {
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Textbook `Rᵃ_bcd`.
    pub fn riemann_up(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.riemann[self.idx(a, b, c, d)]
    }

    /// Components of the textbook `R(X,Y)Z`.
    pub fn textbook_apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for a in 0..n {
            let mut s = 0.0;
            for b in 0..n {
                if z[b] == 0.0 {
                    continue;
                }
                for c in 0..n {
                    if x[c] == 0.0 {
                        continue;
                    }
                    for d in 0..n {
                        s += self.riemann_up(a, b, c, d) * z[b] * x[c] * y[d];
                    }
                }
            }
            out[a] = s;
        }
        out
    }

    /// `ḡ(R̄(X,Y)Z, W)` in the sign convention above.
    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> f64 {
        -self.textbook_apply(x, y, z).dot(&(&self.connection.g * w))
    }

    pub fn metric(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        v.dot(&(&self.connection.g * w))
    }

    /// Sectional curvature of the plane spanned by `u, v`.
    pub fn sectional(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        let q = self.metric(u, u) * self.metric(v, v) - self.metric(u, v).powi(2);
        if q.abs() < PLANE_TOLERANCE {
            return Err(GeomError::DegeneratePlane(q));
        }
        Ok(SECTIONAL_SIGN * self.eval(u, v, u, v) / q)
    }
}

fn christoffel_derivatives(m: &SplitSpacetime, p: &ChartPoint) -> Result<(ConnectionSample, Vec<Vec<DMatrix<f64>>>)> {
    let n = m.dim();
    match m.deriv_mode() {
        DerivMode::Analytic => {
            let jet = m.ambient_jet(p, 2)?;
            let ddg = jet.ddg.as_ref().expect("order-2 jet");
            let (g_inv, gamma) = christoffels_from(&jet.g, &jet.dg)?;
            // ∂_m Γᵏᵢⱼ = ∂_m gᵏˡ S_lij + gᵏˡ ∂_m S_lij with ∂_m g⁻¹ = −g⁻¹ ∂_m g g⁻¹
            let mut dgamma = vec![vec![DMatrix::zeros(n, n); n]; n];
            for mm in 0..n {
                let dinv = -(&g_inv * &jet.dg[mm] * &g_inv);
                for i in 0..n {
                    for j in i..n {
                        let s = DVector::from_iterator(
                            n,
                            (0..n).map(|l| 0.5 * (jet.dg[i][(j, l)] + jet.dg[j][(i, l)] - jet.dg[l][(i, j)])),
                        );
                        let ds = DVector::from_iterator(
                            n,
                            (0..n).map(|l| {
                                0.5 * (ddg[mm][i][(j, l)] + ddg[mm][j][(i, l)] - ddg[mm][l][(i, j)])
                            }),
                        );
                        let v = &dinv * s + &g_inv * ds;
                        for k in 0..n {
                            dgamma[mm][k][(i, j)] = v[k];
                            dgamma[mm][k][(j, i)] = v[k];
                        }
                    }
                }
            }
            Ok((
                ConnectionSample {
                    point: p.clone(),
                    g: jet.g,
                    g_inv,
                    gamma,
                },
                dgamma,
            ))
        }
        DerivMode::FiniteDifference { .. } => {
            let centre = christoffels(m, p)?;
            let coords = p.coords();
            let mut dgamma = Vec::with_capacity(n);
            for mm in 0..n {
                let h = m.deriv_mode().first_step(coords[mm]);
                let mut plus = coords.clone();
                plus[mm] += h;
                let mut minus = coords.clone();
                minus[mm] -= h;
                let cp = christoffels(m, &ChartPoint::from_coords(&plus))?;
                let cm = christoffels(m, &ChartPoint::from_coords(&minus))?;
                dgamma.push(
                    (0..n)
                        .map(|k| (&cp.gamma[k] - &cm.gamma[k]) / (2.0 * h))
                        .collect(),
                );
            }
            Ok((centre, dgamma))
        }
    }
}

pub fn curvature(m: &SplitSpacetime, p: &ChartPoint) -> Result<CurvatureSample> {
    let (connection, dgamma) = christoffel_derivatives(m, p)?;
    let n = connection.dim();
    let gm = &connection.gamma;
    let mut riemann = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgamma[c][a][(d, b)] - dgamma[d][a][(c, b)];
                    for e in 0..n {
                        v += gm[a][(c, e)] * gm[e][(d, b)] - gm[a][(d, e)] * gm[e][(c, b)];
                    }
                    riemann[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Ok(CurvatureSample {
        connection,
        dim: n,
        riemann,
    })
}

/// Sectional curvature of a plane spanned by a timelike `u` and a spacelike `v`.
pub fn timelike_sectional_curvature(m: &SplitSpacetime, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if u.base != v.base {
        return Err(GeomError::Usage("tangent vectors are based at different points".into()));
    }
    if m.ambient_metric(u, u)? >= 0.0 {
        return Err(GeomError::Usage("first vector must be timelike".into()));
    }
    if m.ambient_metric(v, v)? <= 0.0 {
        return Err(GeomError::Usage("second vector must be spacelike".into()));
    }
    curvature(m, &u.base)?.sectional(&u.components(), &v.components())
}

fn require_unit_lapse(m: &SplitSpacetime) -> Result<()> {
    if m.has_unit_lapse() {
        Ok(())
    } else {
        Err(GeomError::Precondition(
            "formula assumes beta ≡ 1 (geodesic ∂_t)".into(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShapeOperatorReport {
    pub t0: f64,
    pub samples: usize,
    pub min_quadratic_form: f64,
    pub max_quadratic_form: f64,
    pub positive_semidefinite: bool,
    pub negative_semidefinite: bool,
    /// Largest `|ḡ(A v, v) − ½ lie(v, v)|` seen.
    pub identity_residual: f64,
}

/// `A_t(v) = ∇̄_v ∂_t` for a fiber vector `v` on the slice through `v.base`.
pub fn slice_shape_operator(m: &SplitSpacetime, v: &TangentVector) -> Result<TangentVector> {
    require_unit_lapse(m)?;
    if v.dt != 0.0 {
        return Err(GeomError::Usage("vector is not tangent to the slice".into()));
    }
    let c = christoffels(m, &v.base)?;
    Ok(TangentVector::from_components(
        v.base.clone(),
        &c.nabla_partial_t(&v.components()),
    ))
}

/// Semi-definiteness of `v ↦ ḡ(A_t v, v)` over fiber points × unit directions.
pub fn slice_shape_report(m: &SplitSpacetime, t0: f64, fiber_points: &[Vec<f64>], directions: &[Vec<f64>]) -> Result<ShapeOperatorReport> {
    require_unit_lapse(m)?;
    let tol = crate::spacetime::SIGN_TOLERANCE;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut residual: f64 = 0.0;
    let mut samples = 0;
    for x in fiber_points {
        let p = ChartPoint::new(t0, x.clone());
        let s = m.metric_sample(&p)?;
        for d in directions {
            let v = TangentVector::new(p.clone(), 0.0, d.clone());
            let av = slice_shape_operator(m, &v)?;
            let q = m.ambient_metric(&av, &v)?;
            let dv = DVector::from_column_slice(d);
            let half_lie = 0.5 * dv.dot(&(&s.lie * &dv));
            residual = residual.max((q - half_lie).abs());
            // scale-free form
            let norm = dv.dot(&(&s.g * &dv));
            lo = lo.min(q / norm);
            hi = hi.max(q / norm);
            samples += 1;
        }
    }
    if samples == 0 {
        return Err(GeomError::Usage("no shape operator samples".into()));
    }
    Ok(ShapeOperatorReport {
        t0,
        samples,
        min_quadratic_form: lo,
        max_quadratic_form: hi,
        positive_semidefinite: lo >= -tol,
        negative_semidefinite: hi <= tol,
        identity_residual: residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub s: f64,
    pub point: ChartPoint,
    pub velocity: TangentVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub samples: Vec<PathSample>,
    /// The curve left `I` before `sMax`.
    pub truncated: bool,
    /// Parameters `s` where the monotonicity phase changes between samples.
    pub phase_boundaries: Vec<f64>,
    /// Largest `|γ'' + Γ(γ', γ')|` over samples.
    pub geodesic_residual: f64,
    /// Largest drift of `ḡ(γ', γ')` from its initial value.
    pub norm_drift: f64,
}

/// RK4 integration of the geodesic starting at `start` with velocity `∂_t`.
pub fn integrate_partial_t_curve(m: &SplitSpacetime, start: &ChartPoint, s_max: f64, steps: usize) -> Result<GeodesicPath> {
    require_unit_lapse(m)?;
    if steps == 0 || !(s_max > 0.0) {
        return Err(GeomError::Usage("need steps > 0 and sMax > 0".into()));
    }
    m.check_point(start)?;
    let n = m.dim();
    let ds = s_max / steps as f64;
    let accel = |x: &DVector<f64>, v: &DVector<f64>| -> Result<DVector<f64>> {
        let c = christoffels(m, &ChartPoint::from_coords(x))?;
        Ok(-c.covariant(v, v))
    };
    let mut x = start.coords();
    let mut v = DVector::zeros(n);
    v[0] = 1.0;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut residual: f64 = 0.0;
    let initial_norm = m.ambient_matrix(start)?[(0, 0)];
    let mut drift: f64 = 0.0;
    let mut phase = m.monotonicity_at(start)?.phase();
    let mut boundaries = Vec::new();
    let mut truncated = false;
    for step in 0..=steps {
        let s = step as f64 * ds;
        let p = ChartPoint::from_coords(&x);
        let a = accel(&x, &v)?;
        residual = residual.max(a.norm());
        drift = drift.max((v.dot(&(m.ambient_matrix(&p)? * &v)) - initial_norm).abs());
        let here = m.monotonicity_at(&p)?.phase();
        if here != phase {
            boundaries.push(s);
            phase = here;
        }
        samples.push(PathSample {
            s,
            velocity: TangentVector::from_components(p.clone(), &v),
            point: p,
        });
        if step == steps {
            break;
        }
        let next_t = x[0] + ds;
        if m.check_point(&ChartPoint::new(next_t, start.x.clone())).is_err() {
            truncated = true;
            break;
        }
        let k1x = v.clone();
        let k1v = a;
        let k2x = &v + &k1v * (0.5 * ds);
        let k2v = accel(&(&x + &k1x * (0.5 * ds)), &k2x)?;
        let k3x = &v + &k2v * (0.5 * ds);
        let k3v = accel(&(&x + &k2x * (0.5 * ds)), &k3x)?;
        let k4x = &v + &k3v * ds;
        let k4v = accel(&(&x + &k3x * ds), &k4x)?;
        x += (k1x + &k2x * 2.0 + &k3x * 2.0 + &k4x) * (ds / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (ds / 6.0);
    }
    Ok(GeodesicPath {
        samples,
        truncated,
        phase_boundaries: boundaries,
        geodesic_residual: residual,
        norm_drift: drift,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RiccatiSample {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Residual of `−ḡ(R̄(∂_t,X)∂_t,X) = ½ d/ds[(L_{∂t}ḡ)(X,X)] − ḡ(∇̄_X∂_t, ∇̄_X∂_t)`
/// along `path`, for a fiber field `X` with constant components (so
/// `[∂_t, X] = 0`). The derivative along the curve is differenced from the
/// samples: central inside, second-order one-sided at the ends.
pub fn riccati_residual(m: &SplitSpacetime, path: &GeodesicPath, x_dir: &[f64]) -> Result<Vec<RiccatiSample>> {
    require_unit_lapse(m)?;
    let k = path.samples.len();
    if k < 3 {
        return Err(GeomError::Usage("Riccati residual needs at least 3 samples".into()));
    }
    let mut xv = DVector::zeros(m.dim());
    xv.rows_mut(1, m.fiber_dim()).copy_from_slice(x_dir);
    let mut dt = DVector::zeros(m.dim());
    dt[0] = 1.0;
    let xf = DVector::from_column_slice(x_dir);
    let mut lie_xx = Vec::with_capacity(k);
    let mut rest = Vec::with_capacity(k);
    for sample in &path.samples {
        let ms = m.metric_sample(&sample.point)?;
        lie_xx.push(xf.dot(&(&ms.lie * &xf)));
        let curv = curvature(m, &sample.point)?;
        let lhs = -curv.eval(&dt, &xv, &dt, &xv);
        let a = curv.connection.nabla_partial_t(&xv);
        rest.push((lhs, curv.metric(&a, &a)));
    }
    let s: Vec<f64> = path.samples.iter().map(|p| p.s).collect();
    let h = s[1] - s[0];
    let deriv = |i: usize| -> f64 {
        if i == 0 {
            (-3.0 * lie_xx[0] + 4.0 * lie_xx[1] - lie_xx[2]) / (2.0 * h)
        } else if i == k - 1 {
            (3.0 * lie_xx[k - 1] - 4.0 * lie_xx[k - 2] + lie_xx[k - 3]) / (2.0 * h)
        } else {
            (lie_xx[i + 1] - lie_xx[i - 1]) / (2.0 * h)
        }
    };
    Ok((0..k)
        .map(|i| {
            let (lhs, aa) = rest[i];
            let rhs = 0.5 * deriv(i) - aa;
            RiccatiSample {
                s: s[i],
                lhs,
                rhs,
                residual: lhs - rhs,
            }
        })
        .collect())
}

/// `div ∂_t` as the frame sum `Σᵢ ḡ(∇̄_{E_i}∂_t,E_i) + Σⱼ ε_j ḡ(∇̄_{N_j}∂_t,N_j)`
/// over any ḡ-orthonormal basis `frame` with signs `eps`.
pub fn frame_divergence(m: &SplitSpacetime, p: &ChartPoint, frame: &[DVector<f64>], eps: &[f64]) -> Result<f64> {
    let c = christoffels(m, p)?;
    let n = c.dim();
    if frame.len() != n || eps.len() != n {
        return Err(GeomError::Frame(format!("frame must have {n} vectors")));
    }
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { eps[i] } else { 0.0 };
            let got = frame[i].dot(&(&c.g * &frame[j]));
            if (got - want).abs() > 1e-8 {
                return Err(GeomError::Frame(format!(
                    "frame is not orthonormal: ḡ(e{i}, e{j}) = {got}"
                )));
            }
        }
    }
    Ok(frame
        .iter()
        .zip(eps)
        .map(|(e, s)| s * c.nabla_partial_t(e).dot(&(&c.g * e)))
        .sum())
}

/// Phase labels at the given times along a fixed fiber point.
pub fn phases_along(m: &SplitSpacetime, x: &[f64], times: &[f64]) -> Result<Vec<Phase>> {
    times
        .iter()
        .map(|&t| Ok(m.monotonicity_at(&ChartPoint::new(t, x.to_vec()))?.phase()))
        .collect()
}
