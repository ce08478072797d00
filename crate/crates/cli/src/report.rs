//! Report serialization: provenance-tagged JSON and per-vertex CSV.

use serde::Serialize;
use serde_json::{Map, Value};

use splitgeom::audit::VertexRecord;

use crate::error::CliError;

/// Where a reported number comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Provenance {
    /// Evaluated from a closed-form expression at a point.
    ClosedForm,
    /// Produced by an independent numerical reference (discrete operators, integrators).
    Oracle,
    /// An aggregate over finitely many samples (maxima, minima, trends, counts of hits).
    SampleEstimate,
}

/// Wraps every non-integer number in `v` as `{"value": x, "provenance": p}`.
///
/// `p` is inherited from the nearest enclosing key listed in `overrides`,
/// else `default`. Integers (counts, ids, seeds) are left bare.
pub fn tag(v: Value, default: Provenance, overrides: &[(&str, Provenance)]) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let mut m = Map::new();
            m.insert("value".into(), Value::Number(n));
            m.insert(
                "provenance".into(),
                serde_json::to_value(default).expect("provenance serializes"),
            );
            Value::Object(m)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|x| tag(x, default, overrides)).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, x)| {
                    let p = overrides
                        .iter()
                        .find(|(name, _)| *name == k)
                        .map_or(default, |&(_, p)| p);
                    (k, tag(x, p, overrides))
                })
                .collect(),
        ),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report section serializes")
}

/// Sorted-key, pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub const CSV_TAIL: [&str; 10] = [
    "t",
    "tau",
    "gradTauNormSq",
    "trXi",
    "hDotPartialT",
    "theta",
    "laplacianTau",
    "conformalLaplacianTau",
    "gaussianCurvature",
    "causalClass",
];

/// Per-vertex table: `vertex, p1..pk, t, tau, gradTauNormSq, trXi,
/// hDotPartialT, theta, laplacianTau, conformalLaplacianTau,
/// gaussianCurvature, causalClass`. Missing values are empty fields.
pub fn vertex_csv(vertices: &[VertexRecord], gaussian: &[Option<f64>]) -> Result<String, CliError> {
    let k = vertices.first().map_or(0, |v| v.param.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["vertex".to_string()];
    header.extend((1..=k).map(|i| format!("p{i}")));
    header.extend(CSV_TAIL.iter().map(|h| h.to_string()));
    w.write_record(&header)?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for v in vertices {
        let mut row = vec![v.id.to_string()];
        row.extend(v.param.iter().map(|&x| num(x)));
        row.extend([
            num(v.point.t),
            num(v.tau),
            num(v.grad_tau_norm_sq),
            num(v.tr_xi),
            num(v.h_dot_partial_t),
            num(v.theta),
            num(v.laplacian_tau),
            opt(v.conformal_laplacian_tau),
            opt(gaussian.get(v.id).copied().flatten()),
            v.mean_class.name().to_string(),
        ]);
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Shortest round-trip decimal; non-finite values become empty fields.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}
