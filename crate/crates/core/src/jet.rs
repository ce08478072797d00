//! Value, gradient and Hessian of expressions over selected variable slots.

use serde::{Deserialize, Serialize};

use crate::expr::{Env, EvalError, Expr};

/// How partial derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum DerivMode {
    /// Forward-mode dual numbers (exact to rounding).
    #[default]
    Analytic,
    /// Central differences. `step: None` uses `cbrt(eps)·(1+|x|)`.
    FiniteDifference { step: Option<f64> },
}

impl DerivMode {
    pub(crate) fn first_step(&self, x: f64) -> f64 {
        let base = match self {
            DerivMode::FiniteDifference { step: Some(h) } => *h,
            _ => f64::EPSILON.cbrt(),
        };
        base * (1.0 + x.abs())
    }

    pub(crate) fn second_step(&self, x: f64) -> f64 {
        f64::EPSILON.powf(0.25) * (1.0 + x.abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Present for order-2 jets; symmetric.
    pub hess: Option<Vec<Vec<f64>>>,
}

/// Jet of `expr` at `env` with respect to the variables in `slots`.
pub fn expr_jet(
    expr: &Expr,
    env: &Env<f64>,
    slots: &[usize],
    order: u8,
    mode: DerivMode,
) -> Result<Jet, EvalError> {
    let n = slots.len();
    let value = expr.eval(env)?;
    let mut grad = vec![0.0; n];
    match mode {
        DerivMode::Analytic => {
            if order >= 2 {
                let mut hess = vec![vec![0.0; n]; n];
                for a in 0..n {
                    if !expr.depends_on(slots[a]) {
                        continue;
                    }
                    for b in a..n {
                        if !expr.depends_on(slots[b]) {
                            continue;
                        }
                        let r = expr.eval(&env.seeded2(slots[a], slots[b]))?;
                        hess[a][b] = r.eps.eps;
                        hess[b][a] = r.eps.eps;
                        if a == b {
                            grad[a] = r.re.eps;
                        }
                    }
                }
                return Ok(Jet {
                    value,
                    grad,
                    hess: Some(hess),
                });
            }
            for (a, &slot) in slots.iter().enumerate() {
                if expr.depends_on(slot) {
                    grad[a] = expr.partial(env, slot)?;
                }
            }
            Ok(Jet {
                value,
                grad,
                hess: None,
            })
        }
        DerivMode::FiniteDifference { .. } => {
            let shifted = |moves: &[(usize, f64)]| -> Result<f64, EvalError> {
                let mut e = env.clone();
                for &(slot, dx) in moves {
                    let v = env.get(slot).unwrap_or(0.0);
                    e.set(slot, v + dx);
                }
                expr.eval(&e)
            };
            for (a, &slot) in slots.iter().enumerate() {
                let h = mode.first_step(env.get(slot).unwrap_or(0.0));
                grad[a] = (shifted(&[(slot, h)])? - shifted(&[(slot, -h)])?) / (2.0 * h);
            }
            let hess = if order >= 2 {
                let mut hess = vec![vec![0.0; n]; n];
                for a in 0..n {
                    let ha = mode.second_step(env.get(slots[a]).unwrap_or(0.0));
                    hess[a][a] = (shifted(&[(slots[a], ha)])? - 2.0 * value
                        + shifted(&[(slots[a], -ha)])?)
                        / (ha * ha);
                    for b in (a + 1)..n {
                        let hb = mode.second_step(env.get(slots[b]).unwrap_or(0.0));
                        let v = (shifted(&[(slots[a], ha), (slots[b], hb)])?
                            - shifted(&[(slots[a], ha), (slots[b], -hb)])?
                            - shifted(&[(slots[a], -ha), (slots[b], hb)])?
                            + shifted(&[(slots[a], -ha), (slots[b], -hb)])?)
                            / (4.0 * ha * hb);
                        hess[a][b] = v;
                        hess[b][a] = v;
                    }
                }
                Some(hess)
            } else {
                None
            };
            Ok(Jet { value, grad, hess })
        }
    }
}
