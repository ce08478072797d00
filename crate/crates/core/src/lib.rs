//! Extrinsic geometry of spacelike submanifolds in orthogonally split
//! spacetimes `ḡ = −β dt² + g_t`.

pub mod audit;
pub mod causal;
pub mod curvature;
pub mod dual;
pub mod error;
pub mod expr;
pub mod identities;
pub mod immersion;
pub mod jet;
pub mod mesh;
pub mod parabolicity;
pub mod spacetime;
pub mod tau;

pub use error::{GeomError, Result};
pub use expr::{Env, EvalError, Expr, ParseError};
pub use jet::DerivMode;
pub use spacetime::{catalog, ChartPoint, SplitSpacetime, TangentVector};
