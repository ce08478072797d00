//! Causal character of vectors and the trapped-surface classification of a
//! sampled mean curvature field.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::immersion::Immersion;
use crate::mesh::StructuredGrid;
use crate::spacetime::{ChartPoint, SplitSpacetime, TangentVector};

/// A vector is zero when its Euclidean component norm is at most this.
pub const ZERO_TOLERANCE: f64 = 1e-9;
/// `|ḡ(v,v)| ≤ CONE_TOLERANCE·‖v‖²` counts as lightlike.
pub const CONE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CausalClass {
    TimelikeFuture,
    TimelikePast,
    LightlikeFuture,
    LightlikePast,
    Spacelike,
    Zero,
}

impl CausalClass {
    pub fn is_future_causal(self) -> bool {
        matches!(self, CausalClass::TimelikeFuture | CausalClass::LightlikeFuture)
    }

    pub fn is_past_causal(self) -> bool {
        matches!(self, CausalClass::TimelikePast | CausalClass::LightlikePast)
    }

    /// Time-reversed class.
    pub fn mirrored(self) -> Self {
        use CausalClass::*;
        match self {
            TimelikeFuture => TimelikePast,
            TimelikePast => TimelikeFuture,
            LightlikeFuture => LightlikePast,
            LightlikePast => LightlikeFuture,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        use CausalClass::*;
        match self {
            TimelikeFuture => "timelikeFuture",
            TimelikePast => "timelikePast",
            LightlikeFuture => "lightlikeFuture",
            LightlikePast => "lightlikePast",
            Spacelike => "spacelike",
            Zero => "zero",
        }
    }
}

/// Classifies `v` given the ambient metric matrix at its base point.
pub fn classify_components(g: &DMatrix<f64>, v: &DVector<f64>) -> CausalClass {
    let norm = v.norm();
    if norm <= ZERO_TOLERANCE {
        return CausalClass::Zero;
    }
    let q = v.dot(&(g * v));
    // ḡ(v, ∂_t)
    let s = g.column(0).dot(v);
    let band = CONE_TOLERANCE * norm * norm;
    let s_band = CONE_TOLERANCE * norm * g[(0, 0)].abs().sqrt();
    if q > band || s.abs() <= s_band {
        return CausalClass::Spacelike;
    }
    let future = s < 0.0;
    match (q < -band, future) {
        (true, true) => CausalClass::TimelikeFuture,
        (true, false) => CausalClass::TimelikePast,
        (false, true) => CausalClass::LightlikeFuture,
        (false, false) => CausalClass::LightlikePast,
    }
}

pub fn causal_classify(m: &SplitSpacetime, v: &TangentVector) -> Result<CausalClass> {
    let g = m.ambient_matrix(&v.base)?;
    Ok(classify_components(&g, &v.components()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TrappedClass {
    FutureTrapped,
    NearlyFutureTrapped,
    WeaklyFutureTrapped,
    MarginallyFutureTrapped,
    Extremal,
    PastTrapped,
    NearlyPastTrapped,
    WeaklyPastTrapped,
    MarginallyPastTrapped,
    None,
}

impl TrappedClass {
    /// One of the four future classes.
    pub fn is_future(self) -> bool {
        use TrappedClass::*;
        matches!(
            self,
            FutureTrapped | NearlyFutureTrapped | WeaklyFutureTrapped | MarginallyFutureTrapped
        )
    }

    pub fn is_past(self) -> bool {
        use TrappedClass::*;
        matches!(
            self,
            PastTrapped | NearlyPastTrapped | WeaklyPastTrapped | MarginallyPastTrapped
        )
    }

    pub fn mirrored(self) -> Self {
        use TrappedClass::*;
        match self {
            FutureTrapped => PastTrapped,
            NearlyFutureTrapped => NearlyPastTrapped,
            WeaklyFutureTrapped => WeaklyPastTrapped,
            MarginallyFutureTrapped => MarginallyPastTrapped,
            PastTrapped => FutureTrapped,
            NearlyPastTrapped => NearlyFutureTrapped,
            WeaklyPastTrapped => WeaklyFutureTrapped,
            MarginallyPastTrapped => MarginallyFutureTrapped,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        use TrappedClass::*;
        match self {
            FutureTrapped => "futureTrapped",
            NearlyFutureTrapped => "nearlyFutureTrapped",
            WeaklyFutureTrapped => "weaklyFutureTrapped",
            MarginallyFutureTrapped => "marginallyFutureTrapped",
            Extremal => "extremal",
            PastTrapped => "pastTrapped",
            NearlyPastTrapped => "nearlyPastTrapped",
            WeaklyPastTrapped => "weaklyPastTrapped",
            MarginallyPastTrapped => "marginallyPastTrapped",
            None => "none",
        }
    }
}

/// Reading of "lightlike, future pointing and non-zero at at least one point".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MarginalReading {
    /// Lightlike or zero everywhere, non-zero somewhere.
    #[default]
    LightlikeOrZero,
    /// Lightlike (and so non-zero) at every point.
    LightlikeEverywhere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrappedReport {
    pub class: TrappedClass,
    pub per_vertex: Vec<CausalClass>,
    pub counts: BTreeMap<CausalClass, usize>,
    pub marginal_reading: MarginalReading,
    /// "All over Σ" was checked at the mesh vertices only.
    pub sample_based: bool,
}

fn future_class(classes: &[CausalClass], reading: MarginalReading) -> Option<TrappedClass> {
    use CausalClass::*;
    let all = |f: &dyn Fn(CausalClass) -> bool| classes.iter().all(|&c| f(c));
    let any = |c: CausalClass| classes.contains(&c);
    let causal_or_zero = all(&|c| matches!(c, TimelikeFuture | LightlikeFuture | Zero));
    if all(&|c| c == TimelikeFuture) {
        return Some(TrappedClass::FutureTrapped);
    }
    if causal_or_zero && any(TimelikeFuture) {
        return Some(TrappedClass::NearlyFutureTrapped);
    }
    let marginal = match reading {
        MarginalReading::LightlikeOrZero => {
            all(&|c| matches!(c, LightlikeFuture | Zero)) && any(LightlikeFuture)
        }
        MarginalReading::LightlikeEverywhere => all(&|c| c == LightlikeFuture),
    };
    if marginal {
        return Some(TrappedClass::MarginallyFutureTrapped);
    }
    if causal_or_zero && classes.iter().any(|&c| c != Zero) {
        return Some(TrappedClass::WeaklyFutureTrapped);
    }
    None
}

/// Decision table over per-vertex classes of `H`.
pub fn classify_surface(classes: &[CausalClass], reading: MarginalReading) -> Result<TrappedClass> {
    if classes.is_empty() {
        return Err(GeomError::Usage("trapped classification needs at least one vertex".into()));
    }
    if let Some(c) = future_class(classes, reading) {
        return Ok(c);
    }
    if classes.iter().all(|&c| c == CausalClass::Zero) {
        return Ok(TrappedClass::Extremal);
    }
    let mirrored: Vec<CausalClass> = classes.iter().map(|c| c.mirrored()).collect();
    Ok(future_class(&mirrored, reading)
        .map(TrappedClass::mirrored)
        .unwrap_or(TrappedClass::None))
}

/// Mean curvature vectors at every grid vertex, in parallel and in order.
pub fn mean_curvature_field(
    m: &SplitSpacetime,
    imm: &Immersion,
    grid: &StructuredGrid,
) -> Result<Vec<(ChartPoint, DMatrix<f64>, DVector<f64>)>> {
    (0..grid.len())
        .into_par_iter()
        .map(|id| {
            let geo = imm.geometry(m, &grid.param(id))?;
            Ok((geo.point, geo.g, geo.mean))
        })
        .collect()
}

pub fn trapped_from_field(
    field: &[(ChartPoint, DMatrix<f64>, DVector<f64>)],
    reading: MarginalReading,
) -> Result<TrappedReport> {
    let per_vertex: Vec<CausalClass> = field.iter().map(|(_, g, h)| classify_components(g, h)).collect();
    let class = classify_surface(&per_vertex, reading)?;
    let mut counts = BTreeMap::new();
    for c in &per_vertex {
        *counts.entry(*c).or_insert(0) += 1;
    }
    Ok(TrappedReport {
        class,
        per_vertex,
        counts,
        marginal_reading: reading,
        sample_based: true,
    })
}

pub fn trapped_classify(
    m: &SplitSpacetime,
    imm: &Immersion,
    grid: &StructuredGrid,
    reading: MarginalReading,
) -> Result<TrappedReport> {
    trapped_from_field(&mean_curvature_field(m, imm, grid)?, reading)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SignedProjection {
    /// `ḡ(∂_t, H)` per vertex.
    pub values: Vec<f64>,
    pub all_non_positive: bool,
    pub all_non_negative: bool,
    pub mixed: bool,
}

pub fn signed_from_field(field: &[(ChartPoint, DMatrix<f64>, DVector<f64>)]) -> SignedProjection {
    let mut all_non_positive = true;
    let mut all_non_negative = true;
    let values = field
        .iter()
        .map(|(_, g, h)| {
            let v = g.column(0).dot(h);
            let tol = ZERO_TOLERANCE * (1.0 + h.norm() * g[(0, 0)].abs().sqrt());
            all_non_positive &= v <= tol;
            all_non_negative &= v >= -tol;
            v
        })
        .collect();
    SignedProjection {
        values,
        all_non_positive,
        all_non_negative,
        mixed: !all_non_positive && !all_non_negative,
    }
}

pub fn signed_h_projection(m: &SplitSpacetime, imm: &Immersion, grid: &StructuredGrid) -> Result<SignedProjection> {
    Ok(signed_from_field(&mean_curvature_field(m, imm, grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::spacetime::catalog::*;
    use proptest::prelude::*;
    use CausalClass::*;

    fn tv(m: &SplitSpacetime, t: f64, c: &[f64]) -> CausalClass {
        let base = ChartPoint::new(t, vec![0.1, 0.2, 0.3]);
        causal_classify(m, &TangentVector::new(base, c[0], c[1..].to_vec())).unwrap()
    }

    #[test]
    fn vector_examples() {
        assert_eq!(tv(&mink(), 0.0, &[1.0, 0.0, 0.0, 0.0]), TimelikeFuture);
        assert_eq!(tv(&mink(), 0.0, &[1.0, 1.0, 0.0, 0.0]), LightlikeFuture);
        assert_eq!(tv(&expgrw(), 0.5, &[-2.0, 0.0, 0.0, 0.0]), TimelikePast);
        assert_eq!(tv(&mink(), 0.0, &[0.0, 1.0, 0.0, 0.0]), Spacelike);
        assert_eq!(tv(&mink(), 0.0, &[1e-12, 0.0, 0.0, 0.0]), Zero);
        let e1 = std::f64::consts::E;
        assert_eq!(tv(&expgrw(), 1.0, &[-e1, 1.0, 0.0, 0.0]), LightlikePast);
    }

    #[test]
    fn surface_examples() {
        let grid = StructuredGrid::cube(2, 0.5, 5).unwrap();
        let plane = Immersion::slice(3, 0.3, &[1, 2], &[0.0]).unwrap();
        let r = trapped_classify(&expgrw(), &plane, &grid, MarginalReading::default()).unwrap();
        assert_eq!(r.class, TrappedClass::PastTrapped);
        assert_eq!(r.counts[&TimelikePast], 25);
        let s = signed_h_projection(&expgrw(), &plane, &grid).unwrap();
        assert!(s.all_non_negative && !s.all_non_positive);
        assert!(s.values.iter().all(|v| (v - 2.0).abs() < 1e-12));

        let r = trapped_classify(&mink(), &plane, &grid, MarginalReading::default()).unwrap();
        assert_eq!(r.class, TrappedClass::Extremal);
        let s = signed_h_projection(&mink(), &plane, &grid).unwrap();
        assert!(s.all_non_negative && s.all_non_positive && !s.mixed);

        let paraboloid = Immersion::graph(3, Expr::parse("0.3*(x1^2 + x2^2)").unwrap(), &[1, 2], &[0.0]).unwrap();
        let r = trapped_classify(&mink(), &paraboloid, &grid, MarginalReading::default()).unwrap();
        // H = −(∂²u)^⊥ points to the past for a future-opening paraboloid
        assert_eq!(r.class, TrappedClass::PastTrapped);
        assert!(!signed_h_projection(&mink(), &paraboloid, &grid).unwrap().all_non_positive);
    }

    #[test]
    fn decision_table() {
        let t = |c: &[CausalClass]| classify_surface(c, MarginalReading::default()).unwrap();
        assert_eq!(t(&[TimelikeFuture, Spacelike]), TrappedClass::None);
        assert_eq!(t(&[TimelikeFuture, LightlikeFuture, Zero]), TrappedClass::NearlyFutureTrapped);
        assert_eq!(t(&[LightlikeFuture, Zero]), TrappedClass::MarginallyFutureTrapped);
        assert_eq!(t(&[LightlikeFuture, LightlikeFuture]), TrappedClass::MarginallyFutureTrapped);
        assert_eq!(t(&[Zero, Zero]), TrappedClass::Extremal);
        assert_eq!(t(&[LightlikePast, TimelikePast]), TrappedClass::NearlyPastTrapped);
        assert_eq!(t(&[TimelikeFuture, TimelikePast]), TrappedClass::None);
        let strict = |c: &[CausalClass]| classify_surface(c, MarginalReading::LightlikeEverywhere).unwrap();
        assert_eq!(strict(&[LightlikeFuture, Zero]), TrappedClass::WeaklyFutureTrapped);
        assert_eq!(strict(&[LightlikeFuture]), TrappedClass::MarginallyFutureTrapped);
        assert!(classify_surface(&[], MarginalReading::default()).is_err());
    }

    fn any_class() -> impl Strategy<Value = CausalClass> {
        prop::sample::select(vec![TimelikeFuture, TimelikePast, LightlikeFuture, LightlikePast, Spacelike, Zero])
    }

    proptest! {
        #[test]
        fn scale_invariance(v in prop::collection::vec(-3.0f64..3.0, 4), t in -1.0f64..1.0, lambda in 1e-3f64..1e3) {
            let m = expgrw();
            let g = m.ambient_matrix(&ChartPoint::new(t, vec![0.0; 3])).unwrap();
            let v = DVector::from_vec(v);
            let c = classify_components(&g, &v);
            prop_assume!(c != Zero && (v.norm() * lambda) > 1e-6);
            prop_assert_eq!(classify_components(&g, &(&v * lambda)), c);
            prop_assert_eq!(classify_components(&g, &(-&v)), c.mirrored());
        }

        #[test]
        fn time_reversal_duality(classes in prop::collection::vec(any_class(), 1..12)) {
            let mirrored: Vec<CausalClass> = classes.iter().map(|c| c.mirrored()).collect();
            let a = classify_surface(&classes, MarginalReading::default()).unwrap();
            let b = classify_surface(&mirrored, MarginalReading::default()).unwrap();
            prop_assert_eq!(a.mirrored(), b);
        }

        #[test]
        fn future_classes_have_non_positive_projection(
            fields in prop::collection::vec((prop::collection::vec(-2.0f64..2.0, 4), any::<bool>()), 1..8),
            t in -1.0f64..1.0,
        ) {
            let m = expgrw();
            let p = ChartPoint::new(t, vec![0.0; 3]);
            let g = m.ambient_matrix(&p).unwrap();
            let field: Vec<_> = fields
                .into_iter()
                .map(|(v, zero)| (p.clone(), g.clone(), if zero { DVector::zeros(4) } else { DVector::from_vec(v) }))
                .collect();
            let r = trapped_from_field(&field, MarginalReading::default()).unwrap();
            if r.class.is_future() || r.class == TrappedClass::Extremal {
                prop_assert!(signed_from_field(&field).all_non_positive);
            }
        }
    }
}
