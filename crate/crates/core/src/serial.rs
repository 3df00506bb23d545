//! JSON wire formats.
//!
//! Field elements serialize as little-endian coefficient arrays in the
//! polynomial basis; fields as `{p, n, modulus}`; matrices as nested arrays
//! of `[re, im]` pairs; symplectic matrices as four coefficient arrays;
//! striations by their slope label; quasi objects as flat real arrays with
//! an index-order header.

use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use crate::engine::ExperimentSpec;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FiniteField};
use crate::linalg::CMat;
use crate::ops::Channel;
use crate::phase::{Slope, SymplecticMatrix};
use crate::quasi::{ChannelQuasi, MeasQuasi, StateQuasi};
use crate::restricted::{RestrictedChannel, RestrictedMeasurement, RestrictedState};

pub fn field_to_json(field: &FiniteField) -> Value {
    json!({
        "p": field.characteristic(),
        "n": field.degree(),
        "modulus": field.modulus(),
    })
}

pub fn field_from_json(v: &Value) -> Result<FiniteField> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("field must be an object".into()))?;
    let p = obj
        .get("p")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("field.p missing".into()))? as u32;
    let n = obj.get("n").and_then(Value::as_u64).unwrap_or(1) as u32;
    let modulus: Option<Vec<u32>> = match obj.get("modulus") {
        None | Some(Value::Null) => None,
        Some(Value::Array(a)) => Some(
            a.iter()
                .map(|c| {
                    c.as_u64()
                        .map(|c| c as u32)
                        .ok_or_else(|| Error::Parse("modulus coefficients must be integers".into()))
                })
                .collect::<Result<_>>()?,
        ),
        Some(_) => return Err(Error::Parse("field.modulus must be an array".into())),
    };
    FiniteField::new(p, n, modulus.as_deref())
}

pub fn element_to_json(field: &FiniteField, x: FieldElement) -> Value {
    json!(field.coeffs(x))
}

pub fn element_from_json(field: &FiniteField, v: &Value) -> Result<FieldElement> {
    match v {
        Value::Array(a) => {
            let coeffs: Vec<u32> = a
                .iter()
                .map(|c| {
                    c.as_u64()
                        .map(|c| c as u32)
                        .ok_or_else(|| Error::Parse("element coefficients must be integers".into()))
                })
                .collect::<Result<_>>()?;
            if coeffs.len() > field.degree() as usize {
                return Err(Error::Parse("too many element coefficients".into()));
            }
            Ok(field.from_coeffs(&coeffs))
        }
        Value::Number(n) => {
            let k = n
                .as_u64()
                .ok_or_else(|| Error::Parse("element must be a non-negative integer".into()))?;
            Ok(field.from_int(k as u32))
        }
        _ => Err(Error::Parse("element must be an array or integer".into())),
    }
}

pub fn slope_to_json(field: &FiniteField, slope: Slope) -> Value {
    match slope {
        Slope::Finite(m) => element_to_json(field, m),
        Slope::Infinite => json!("inf"),
    }
}

pub fn slope_from_json(field: &FiniteField, v: &Value) -> Result<Slope> {
    match v {
        Value::String(s) if s == "inf" => Ok(Slope::Infinite),
        other => Ok(Slope::Finite(element_from_json(field, other)?)),
    }
}

pub fn symplectic_to_json(field: &FiniteField, s: &SymplecticMatrix) -> Value {
    Value::Array(
        s.entries()
            .iter()
            .map(|&e| element_to_json(field, e))
            .collect(),
    )
}

pub fn symplectic_from_json(field: &FiniteField, v: &Value) -> Result<SymplecticMatrix> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| Error::Parse("symplectic matrix must be 4 coefficient arrays".into()))?;
    let e: Vec<FieldElement> = arr
        .iter()
        .map(|x| element_from_json(field, x))
        .collect::<Result<_>>()?;
    Ok(SymplecticMatrix {
        v: e[0],
        x: e[1],
        y: e[2],
        z: e[3],
    })
}

pub fn mrs_to_json(field: &FiniteField, set: &[SymplecticMatrix], nodes: u64) -> Value {
    json!({
        "version": 1,
        "p": field.characteristic(),
        "n": field.degree(),
        "modulus": field.modulus(),
        "nodes_searched": nodes,
        "set": set.iter().map(|s| symplectic_to_json(field, s)).collect::<Vec<_>>(),
    })
}

pub fn mrs_from_json(field: &FiniteField, v: &Value) -> Result<Vec<SymplecticMatrix>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("mrs cache must be an object".into()))?;
    if obj.get("version").and_then(Value::as_u64) != Some(1) {
        return Err(Error::Parse("unsupported mrs cache version".into()));
    }
    let cached_field = field_from_json(v)?;
    if cached_field != *field {
        return Err(Error::FieldMismatch);
    }
    obj.get("set")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("mrs cache missing set".into()))?
        .iter()
        .map(|s| symplectic_from_json(field, s))
        .collect()
}

pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.dim())
            .map(|k| {
                Value::Array(
                    (0..m.dim())
                        .map(|l| json!([m[(k, l)].re, m[(k, l)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<CMat> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let dim = rows.len();
    let mut m = CMat::zeros(dim);
    for (k, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == dim)
            .ok_or_else(|| Error::Parse("matrix rows must be square".into()))?;
        for (l, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("matrix entries are [re, im] pairs".into()))?;
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| Error::Parse("matrix entry re must be a number".into()))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| Error::Parse("matrix entry im must be a number".into()))?;
            m[(k, l)] = C64::new(re, im);
        }
    }
    Ok(m)
}

pub fn channel_to_json(ch: &Channel) -> Value {
    json!({ "kraus": ch.kraus.iter().map(matrix_to_json).collect::<Vec<_>>() })
}

pub fn channel_from_json(v: &Value) -> Result<Channel> {
    let kraus = v
        .get("kraus")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("channel must have a kraus array".into()))?;
    if kraus.is_empty() {
        return Err(Error::Parse("channel needs at least one Kraus matrix".into()));
    }
    Ok(Channel::new(
        kraus.iter().map(matrix_from_json).collect::<Result<_>>()?,
    ))
}

/// `{field, state, channels, effect}`.
pub fn experiment_to_json(spec: &ExperimentSpec) -> Value {
    json!({
        "field": field_to_json(&spec.field),
        "state": matrix_to_json(&spec.state),
        "channels": spec.channels.iter().map(channel_to_json).collect::<Vec<_>>(),
        "effect": matrix_to_json(&spec.effect),
    })
}

pub fn experiment_from_json(v: &Value) -> Result<ExperimentSpec> {
    let field = field_from_json(
        v.get("field")
            .ok_or_else(|| Error::Parse("experiment needs a field".into()))?,
    )?;
    let state = matrix_from_json(
        v.get("state")
            .ok_or_else(|| Error::Parse("experiment needs a state".into()))?,
    )?;
    let channels = match v.get("channels") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(list)) => list.iter().map(channel_from_json).collect::<Result<_>>()?,
        Some(_) => return Err(Error::Parse("channels must be an array".into())),
    };
    let effect = matrix_from_json(
        v.get("effect")
            .ok_or_else(|| Error::Parse("experiment needs an effect".into()))?,
    )?;
    let d = field.order();
    for (name, dim) in [("state", state.dim()), ("effect", effect.dim())] {
        if dim != d {
            return Err(Error::Parse(format!(
                "{name} has dimension {dim}, field has order {d}"
            )));
        }
    }
    Ok(ExperimentSpec {
        field,
        state,
        channels,
        effect,
    })
}

fn values_from_json(v: &Value, expected: usize, what: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{what} values must be an array")))?;
    if arr.len() != expected {
        return Err(Error::Parse(format!(
            "{what} expects {expected} values, got {}",
            arr.len()
        )));
    }
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Parse(format!("{what} values must be numbers")))
        })
        .collect()
}

/// Quasi objects: flat real arrays with an index-order header.
pub fn state_quasi_to_json(q: &StateQuasi) -> Value {
    json!({
        "field": field_to_json(q.field()),
        "kind": "state",
        "order": "enumeration",
        "values": q.values(),
    })
}

pub fn state_quasi_from_json(v: &Value) -> Result<StateQuasi> {
    let field = field_from_json(
        v.get("field")
            .ok_or_else(|| Error::Parse("quasi object needs a field".into()))?,
    )?;
    let n = field.order() * field.order();
    let values = values_from_json(
        v.get("values")
            .ok_or_else(|| Error::Parse("quasi object needs values".into()))?,
        n,
        "state quasi",
    )?;
    Ok(StateQuasi::from_values(&field, values))
}

pub fn channel_quasi_to_json(q: &ChannelQuasi) -> Value {
    json!({
        "field": field_to_json(q.field()),
        "kind": "channel",
        "order": "enumeration",
        "values": q.values(),
    })
}

pub fn meas_quasi_to_json(q: &MeasQuasi) -> Value {
    json!({
        "field": field_to_json(q.field()),
        "kind": "measurement",
        "order": "enumeration",
        "trace_e": q.trace_e(),
        "values": q.values(),
    })
}

/// Restricted objects carry their framework label.
pub fn restricted_state_to_json(field: &FiniteField, r: &RestrictedState) -> Value {
    json!({
        "kind": "state",
        "striation": slope_to_json(field, r.slope()),
        "values": r.values(),
    })
}

pub fn restricted_state_from_json(field: &FiniteField, v: &Value) -> Result<RestrictedState> {
    let slope = slope_from_json(
        field,
        v.get("striation")
            .ok_or_else(|| Error::Parse("restricted state needs a striation".into()))?,
    )?;
    let n = field.order() * field.order();
    let values = values_from_json(
        v.get("values")
            .ok_or_else(|| Error::Parse("restricted state needs values".into()))?,
        n,
        "restricted state",
    )?;
    Ok(RestrictedState::from_values(field, slope, values))
}

pub fn restricted_channel_to_json(field: &FiniteField, r: &RestrictedChannel) -> Value {
    json!({
        "kind": "channel",
        "symplectic": symplectic_to_json(field, r.symplectic()),
        "class_dist": r.class_dist(),
    })
}

pub fn restricted_channel_from_json(field: &FiniteField, v: &Value) -> Result<RestrictedChannel> {
    let s = symplectic_from_json(
        field,
        v.get("symplectic")
            .ok_or_else(|| Error::Parse("restricted channel needs a symplectic".into()))?,
    )?;
    let n = field.order() * field.order();
    let class_dist = values_from_json(
        v.get("class_dist")
            .ok_or_else(|| Error::Parse("restricted channel needs class_dist".into()))?,
        n,
        "restricted channel",
    )?;
    Ok(RestrictedChannel::from_class_dist(field, s, class_dist))
}

pub fn restricted_measurement_to_json(field: &FiniteField, r: &RestrictedMeasurement) -> Value {
    json!({
        "kind": "measurement",
        "striation": slope_to_json(field, r.slope()),
        "trace_e": r.trace_e(),
        "values": r.values(),
    })
}

pub fn restricted_measurement_from_json(
    field: &FiniteField,
    v: &Value,
) -> Result<RestrictedMeasurement> {
    let slope = slope_from_json(
        field,
        v.get("striation")
            .ok_or_else(|| Error::Parse("restricted measurement needs a striation".into()))?,
    )?;
    let trace_e = v
        .get("trace_e")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse("restricted measurement needs trace_e".into()))?;
    let n = field.order() * field.order();
    let values = values_from_json(
        v.get("values")
            .ok_or_else(|| Error::Parse("restricted measurement needs values".into()))?,
        n,
        "restricted measurement",
    )?;
    Ok(RestrictedMeasurement::from_values(
        field, slope, values, trace_e,
    ))
}

/// A family file: `{field, kind, members}`.
pub fn family_to_json(field: &FiniteField, kind: &str, members: Vec<Value>) -> Value {
    json!({
        "field": field_to_json(field),
        "kind": kind,
        "members": members,
    })
}

/// Particle decompositions carry the ambient field, the single-particle
/// order `r`, the particle count, and the chosen q-basis.
pub fn decomposition_to_json(dec: &crate::composite::ParticleDecomposition) -> Value {
    let ext = dec.extension();
    json!({
        "field": field_to_json(ext),
        "r": dec.base().order(),
        "n": dec.particles(),
        "q_basis": dec.q_basis().iter()
            .map(|&e| element_to_json(ext, e))
            .collect::<Vec<_>>(),
    })
}

pub fn decomposition_from_json(v: &Value) -> Result<crate::composite::ParticleDecomposition> {
    let field = field_from_json(
        v.get("field")
            .ok_or_else(|| Error::Parse("decomposition needs a field".into()))?,
    )?;
    let r = v
        .get("r")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("decomposition needs r".into()))? as u32;
    let p = field.characteristic();
    let mut s = 0;
    let mut acc = 1u32;
    while acc < r {
        acc *= p;
        s += 1;
    }
    if acc != r {
        return Err(Error::Parse(format!("r = {r} is not a power of p = {p}")));
    }
    let q_basis = match v.get("q_basis") {
        None | Some(Value::Null) => None,
        Some(Value::Array(list)) => Some(
            list.iter()
                .map(|e| element_from_json(&field, e))
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(Error::Parse("q_basis must be an array".into())),
    };
    crate::composite::ParticleDecomposition::new(&field, s.max(1), q_basis)
}
