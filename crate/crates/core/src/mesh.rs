//! Structured parameter grids and the surface meshes sampled on them.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::immersion::Immersion;
use crate::spacetime::{ChartPoint, SplitSpacetime};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Periodic axes wrap around; `max` is then identified with `min`.
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    /// `count` nodes from `min` to `max` inclusive.
    pub fn closed(min: f64, max: f64, count: usize) -> Self {
        Axis {
            min,
            max,
            count,
            periodic: false,
        }
    }

    /// `count` nodes covering one period starting at `min`.
    pub fn periodic(min: f64, period: f64, count: usize) -> Self {
        Axis {
            min,
            max: min + period,
            count,
            periodic: true,
        }
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.max - self.min) / self.count as f64
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    /// Same extent, `factor` times finer spacing.
    pub fn refined(&self, factor: usize) -> Self {
        let count = if self.periodic {
            self.count * factor
        } else {
            (self.count - 1) * factor + 1
        };
        Axis { count, ..*self }
    }

    fn validate(&self) -> Result<()> {
        let min_count = if self.periodic { 3 } else { 2 };
        if self.count < min_count || !(self.max > self.min) {
            return Err(GeomError::Usage(format!(
                "axis [{}, {}] with {} nodes is not a valid grid axis",
                self.min, self.max, self.count
            )));
        }
        Ok(())
    }
}

/// Tensor-product grid; vertex ids run with the first axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredGrid {
    pub axes: Vec<Axis>,
}

impl StructuredGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 9 {
            return Err(GeomError::Usage("grid needs 1..=9 axes".into()));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(StructuredGrid { axes })
    }

    /// Square grid `[-half, half]^dim` with `count` nodes per axis.
    pub fn cube(dim: usize, half: f64, count: usize) -> Result<Self> {
        StructuredGrid::new(vec![Axis::closed(-half, half, count); dim])
    }

    /// `(θ, φ)` grid on the sphere: `count` θ-cells sampled at their
    /// midpoints plus one ghost node past each pole, and `2·count` φ nodes.
    /// Interior vertices then carry the exact midpoint rule on `[0, π]`.
    pub fn sphere(count: usize) -> Result<Self> {
        use std::f64::consts::PI;
        let d = PI / count as f64;
        StructuredGrid::new(vec![
            Axis::closed(-0.5 * d, PI + 0.5 * d, count + 2),
            Axis::periodic(0.0, 2.0 * PI, 2 * count),
        ])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn refined(&self, factor: usize) -> Self {
        StructuredGrid {
            axes: self.axes.iter().map(|a| a.refined(factor)).collect(),
        }
    }

    pub fn multi_index(&self, mut id: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let i = id % a.count;
                id /= a.count;
                i
            })
            .collect()
    }

    pub fn id(&self, idx: &[usize]) -> usize {
        let mut id = 0;
        for (a, &i) in self.axes.iter().zip(idx).rev() {
            id = id * a.count + i;
        }
        id
    }

    pub fn param(&self, id: usize) -> Vec<f64> {
        self.multi_index(id)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.node(i))
            .collect()
    }

    /// Id of the vertex offset by `delta` along each axis, if it exists.
    pub fn offset(&self, id: usize, delta: &[isize]) -> Option<usize> {
        let idx = self.multi_index(id);
        let mut out = Vec::with_capacity(idx.len());
        for ((&i, &d), a) in idx.iter().zip(delta).zip(&self.axes) {
            let j = i as isize + d;
            if a.periodic {
                out.push(j.rem_euclid(a.count as isize) as usize);
            } else if j < 0 || j >= a.count as isize {
                return None;
            } else {
                out.push(j as usize);
            }
        }
        Some(self.id(&out))
    }

    pub fn is_boundary(&self, id: usize) -> bool {
        self.multi_index(id)
            .iter()
            .zip(&self.axes)
            .any(|(&i, a)| !a.periodic && (i == 0 || i + 1 == a.count))
    }

    /// The up to `3^n − 1` vertices sharing a cell with `id`.
    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let n = self.dim();
        let total = 3usize.pow(n as u32);
        let mut out = Vec::with_capacity(total - 1);
        for code in 0..total {
            let mut c = code;
            let delta: Vec<isize> = (0..n)
                .map(|_| {
                    let d = (c % 3) as isize - 1;
                    c /= 3;
                    d
                })
                .collect();
            if delta.iter().all(|&d| d == 0) {
                continue;
            }
            if let Some(j) = self.offset(id, &delta) {
                if j != id && !out.contains(&j) {
                    out.push(j);
                }
            }
        }
        out
    }

    /// Cell volume attached to each vertex (trapezoid weights on closed axes).
    pub fn quadrature_weight(&self, id: usize) -> f64 {
        self.multi_index(id)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| {
                let h = a.spacing();
                if !a.periodic && (i == 0 || i + 1 == a.count) {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }
}

/// An immersion sampled on a grid, with its induced metric per vertex.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub grid: StructuredGrid,
    pub points: Vec<ChartPoint>,
    pub induced: Vec<DMatrix<f64>>,
    pub boundary: Vec<bool>,
}

impl SurfaceMesh {
    pub fn build(m: &SplitSpacetime, imm: &Immersion, grid: StructuredGrid) -> Result<Self> {
        if grid.dim() != imm.param_dim() {
            return Err(GeomError::Usage(format!(
                "grid has {} axes, immersion has {} parameters",
                grid.dim(),
                imm.param_dim()
            )));
        }
        let rows: Vec<(ChartPoint, DMatrix<f64>)> = (0..grid.len())
            .into_par_iter()
            .map(|id| {
                let q = grid.param(id);
                let p = imm.point(&q)?;
                let h = imm.induced_metric(m, &q)?;
                Ok((p, h))
            })
            .collect::<Result<_>>()?;
        let boundary = (0..grid.len()).map(|id| grid.is_boundary(id)).collect();
        let (points, induced) = rows.into_iter().unzip();
        Ok(SurfaceMesh {
            grid,
            points,
            induced,
            boundary,
        })
    }

    /// Mesh over a plain grid with a prescribed metric per vertex.
    pub fn from_metric(grid: StructuredGrid, metric: impl Fn(&[f64]) -> DMatrix<f64>) -> Self {
        let induced: Vec<_> = (0..grid.len()).map(|id| metric(&grid.param(id))).collect();
        let points = (0..grid.len())
            .map(|id| ChartPoint::new(0.0, grid.param(id)))
            .collect();
        let boundary = (0..grid.len()).map(|id| grid.is_boundary(id)).collect();
        SurfaceMesh {
            grid,
            points,
            induced,
            boundary,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.boundary[i])
    }

    pub fn tau(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    /// `√det h` times the parameter cell volume.
    pub fn area_weight(&self, id: usize) -> f64 {
        self.induced[id].determinant().max(0.0).sqrt() * self.grid.quadrature_weight(id)
    }
}
