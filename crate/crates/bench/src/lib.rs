//! Fixtures shared by the criterion benchmarks.

use splitgeom::audit::{Branch, FalsificationConfig, GraphFamily};
use splitgeom::causal::MarginalReading;
use splitgeom::immersion::Immersion;
use splitgeom::mesh::StructuredGrid;
use splitgeom::parabolicity::{BaseParabolicity, GradientBound, QuasiIsometryInput, Sandwich};
use splitgeom::spacetime::FiberMetric;
use splitgeom::Expr;

fn e(s: &str) -> Expr {
    Expr::parse(s).expect("fixture expression parses")
}

/// A smooth non-trivial graph over the (x1, x2) plane at x3 = 0.2.
pub fn bumpy_graph() -> Immersion {
    Immersion::graph(3, e("0.1 + 0.05*sin(x1)*cos(x2) + 0.02*x1*x2"), &[1, 2], &[0.2]).expect("graph fixture")
}

pub fn square(count: usize) -> StructuredGrid {
    StructuredGrid::cube(2, 0.8, count).expect("grid fixture")
}

/// Falsification over bump graphs in de Sitter with `trials` draws.
pub fn falsification(trials: usize) -> FalsificationConfig {
    FalsificationConfig {
        trials,
        seed: 2024,
        grid: StructuredGrid::cube(2, 3.0, 13).expect("grid fixture"),
        family: GraphFamily::default(),
        quasi_isometry: QuasiIsometryInput {
            sandwich: Sandwich::new(FiberMetric::identity(3), e("exp(2*t)"), e("exp(2*t)")).expect("sandwich"),
            k: 0.9,
            base: BaseParabolicity::Unknown,
            gradient_bound: GradientBound::AsPrinted,
        },
        branch: Branch::Future,
        reading: MarginalReading::default(),
        x2: vec![0.0],
    }
}
