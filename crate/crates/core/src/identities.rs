//! Pointwise identity checks at random points of random spacelike graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::frame_divergence;
use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::immersion::{Immersion, PointGeometry};
use crate::mesh::StructuredGrid;
use crate::spacetime::{ChartPoint, SplitSpacetime};
use crate::tau::{conformal_bridge, conformal_from_geometry, laplacian_from_geometry, xi_sample};

/// Box the random base points are drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleRegion {
    pub t: (f64, f64),
    pub x: Vec<(f64, f64)>,
}

impl SampleRegion {
    /// `t ∈ [−½, ½]`, every fiber coordinate in `[½, 3/2]` (clear of `r = 0`
    /// and the poles of spherical charts).
    pub fn standard(fiber_dim: usize) -> Self {
        SampleRegion {
            t: (-0.5, 0.5),
            x: vec![(0.5, 1.5); fiber_dim],
        }
    }

    /// `count` uniform points; point `i` uses the ChaCha stream seeded with `seed + i`.
    pub fn draw(&self, count: usize, seed: u64) -> Vec<ChartPoint> {
        (0..count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let t = rng.random_range(self.t.0..self.t.1);
                let x = self.x.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect::<Vec<_>>();
                ChartPoint::new(t, x)
            })
            .collect()
    }
}

/// Largest residual of each identity over the samples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityResiduals {
    pub samples: usize,
    /// `|sinh²θ − cosh²θ + 1|`.
    pub frame_completeness: f64,
    /// `|tr ξ̄ − tr ξ − Σ εⱼ ξ(Nⱼ, Nⱼ)|`.
    pub trace_decomposition: f64,
    /// Coordinate `div ∂_t` against the adapted-frame sum.
    pub divergence: f64,
    /// Conformal Laplacian against the conformal-change formula; `n > 2` only.
    pub conformal_bridge: f64,
    pub conformal_samples: usize,
    /// `|sinh²θ − β g(∇τ, ∇τ)|`.
    pub sinh_gradient: f64,
}

impl IdentityResiduals {
    fn absorb(&mut self, r: &IdentityResiduals) {
        self.samples += r.samples;
        self.conformal_samples += r.conformal_samples;
        self.frame_completeness = self.frame_completeness.max(r.frame_completeness);
        self.trace_decomposition = self.trace_decomposition.max(r.trace_decomposition);
        self.divergence = self.divergence.max(r.divergence);
        self.conformal_bridge = self.conformal_bridge.max(r.conformal_bridge);
        self.sinh_gradient = self.sinh_gradient.max(r.sinh_gradient);
    }
}

/// Residuals at a single point of a surface.
pub fn point_residuals(m: &SplitSpacetime, geo: &PointGeometry) -> Result<IdentityResiduals> {
    let mut frame = geo.frame.tangents.clone();
    frame.extend(geo.frame.normals.iter().cloned());
    let mut eps = vec![1.0; geo.frame.tangents.len()];
    eps.extend(geo.frame.eps.iter().copied());
    let div = frame_divergence(m, &geo.point, &frame, &eps)?;
    let conformal = match (conformal_from_geometry(geo), conformal_bridge(geo)) {
        (Ok(a), Ok(b)) => Some((a - b).abs()),
        _ => None,
    };
    Ok(IdentityResiduals {
        samples: 1,
        frame_completeness: (geo.sinh2_theta() - geo.cosh2_theta() + 1.0).abs(),
        trace_decomposition: xi_sample(geo).decomposition_residual(),
        divergence: (m.div_partial_t(&geo.point)? - div).abs(),
        conformal_bridge: conformal.unwrap_or(0.0),
        conformal_samples: conformal.is_some() as usize,
        sinh_gradient: (geo.sinh2_theta() - geo.beta() * geo.grad_tau_norm_sq()).abs(),
    })
}

/// A quadratic graph over all fiber axes through a random base point.
fn random_graph(m: &SplitSpacetime, region: &SampleRegion, rng: &mut ChaCha8Rng) -> Result<(Immersion, Vec<f64>)> {
    let n = m.fiber_dim();
    let t0 = rng.random_range(region.t.0..region.t.1);
    let x0: Vec<f64> = region.x.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
    let mut scale = 0.3;
    for _ in 0..8 {
        let mut text = format!("({t0})");
        for i in 0..n {
            let a = scale * rng.random_range(-1.0..1.0);
            text.push_str(&format!(" + ({a})*(x{}-({}))", i + 1, x0[i]));
            for j in i..n {
                let b = scale * rng.random_range(-1.0..1.0);
                text.push_str(&format!(" + ({b})*(x{}-({}))*(x{}-({}))", i + 1, x0[i], j + 1, x0[j]));
            }
        }
        let axes: Vec<usize> = (1..=n).collect();
        let imm = Immersion::graph(n, Expr::parse(&text).expect("generated graph parses"), &axes, &[])?;
        match imm.geometry(m, &x0) {
            Ok(_) => return Ok((imm, x0)),
            Err(GeomError::ImmersionDegeneracy { .. }) => scale *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(GeomError::Usage("could not draw a spacelike graph at the sampled point".into()))
}

/// Identity residuals at `samples` random points; sample `i` uses the
/// ChaCha stream seeded with `seed + i`.
pub fn identity_suite(m: &SplitSpacetime, region: &SampleRegion, samples: usize, seed: u64) -> Result<IdentityResiduals> {
    if region.x.len() != m.fiber_dim() || !(region.t.0 < region.t.1) {
        return Err(GeomError::Usage("sample region does not match the spacetime".into()));
    }
    let rows: Vec<IdentityResiduals> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (imm, q) = random_graph(m, region, &mut rng)?;
            point_residuals(m, &imm.geometry(m, &q)?)
        })
        .collect::<Result<_>>()?;
    let mut out = IdentityResiduals::default();
    for r in &rows {
        out.absorb(r);
    }
    Ok(out)
}

/// On a slice: `max |ḡ(∂_t, H) − ½ tr ξ|` and `max |Δτ|` over the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SliceIdentity {
    pub t0: f64,
    pub mean_vs_expansion: f64,
    pub laplacian: f64,
}

pub fn slice_identity(m: &SplitSpacetime, t0: f64, axes: &[usize], x2: &[f64], grid: &StructuredGrid) -> Result<SliceIdentity> {
    let imm = Immersion::slice(m.fiber_dim(), t0, axes, x2)?;
    let rows: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|id| {
            let geo = imm.geometry(m, &grid.param(id))?;
            Ok((
                (geo.h_dot_partial_t() - 0.5 * xi_sample(&geo).tr_xi).abs(),
                laplacian_from_geometry(&geo).abs(),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(SliceIdentity {
        t0,
        mean_vs_expansion: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        laplacian: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::catalog::*;

    #[test]
    fn suite_is_small_on_the_catalog() {
        for m in [mink(), expgrw(), static_sin(), phase(), spherical_minkowski()] {
            let r = identity_suite(&m, &SampleRegion::standard(3), 60, 3).unwrap();
            assert_eq!(r.samples, 60);
            assert_eq!(r.conformal_samples, 60);
            assert!(r.frame_completeness < 1e-8, "{r:?}");
            assert!(r.trace_decomposition < 1e-8, "{r:?}");
            assert!(r.divergence < 1e-8, "{r:?}");
            assert!(r.conformal_bridge < 1e-6, "{r:?}");
            assert!(r.sinh_gradient < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = identity_suite(&expgrw(), &SampleRegion::standard(3), 10, 9).unwrap();
        let b = identity_suite(&expgrw(), &SampleRegion::standard(3), 10, 9).unwrap();
        assert_eq!(a, b);
        assert!(identity_suite(&expgrw(), &SampleRegion::standard(2), 10, 9).is_err());
    }

    #[test]
    fn slices_satisfy_the_slice_identity() {
        let grid = StructuredGrid::cube(2, 1.0, 5).unwrap();
        for m in [mink(), expgrw(), static_sin(), phase()] {
            for t0 in [-0.4, 0.0, 0.7] {
                let s = slice_identity(&m, t0, &[1, 2], &[0.3], &grid).unwrap();
                assert!(s.mean_vs_expansion < 1e-6 && s.laplacian < 1e-6, "{s:?}");
            }
        }
        let x = slice_identity(&expgrw(), 0.0, &[1, 2], &[0.0], &grid).unwrap();
        assert!(x.mean_vs_expansion < 1e-12);
    }

    #[test]
    fn drawn_points_stay_in_the_box() {
        let r = SampleRegion {
            t: (0.1, 0.2),
            x: vec![(-1.0, 1.0), (2.0, 3.0)],
        };
        let pts = r.draw(50, 4);
        assert_eq!(pts, r.draw(50, 4));
        assert!(pts
            .iter()
            .all(|p| (0.1..0.2).contains(&p.t) && (-1.0..1.0).contains(&p.x[0]) && (2.0..3.0).contains(&p.x[1])));
    }
}
