//! Quasiprobability representations: Wigner functions of states, transition
//! quasiprobabilities of channels, measurement quasi-functions, and the
//! inverse maps back to operators.
//!
//! All arrays are indexed in phase-point enumeration order (`q` major).
//! Values are real; imaginary residues above tolerance indicate invalid
//! inputs and raise a diagnostic instead of being silently discarded.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::linalg::CMat;
use crate::ops::{validate_povm_element, validate_state, Channel, PhaseOps};
use crate::phase::{point_index, PhasePoint};
use crate::VALIDITY_TOL;

const IMAG_TOL: f64 = 1e-9;

/// The Wigner function `Q(α|w)` of a state: real, normalized, possibly
/// negative.
#[derive(Debug, Clone)]
pub struct StateQuasi {
    field: FiniteField,
    values: Vec<f64>,
}

impl StateQuasi {
    pub fn from_values(field: &FiniteField, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), field.order() * field.order());
        Self {
            field: field.clone(),
            values,
        }
    }

    pub fn uniform(field: &FiniteField) -> Self {
        let n = field.order() * field.order();
        Self::from_values(field, vec![1.0 / n as f64; n])
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, pt: PhasePoint) -> f64 {
        self.values[point_index(&self.field, pt)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Nonrandom part `ΔQ(α|w) = Q(α|w) − 1/d²`.
    pub fn nonrandom(&self) -> Vec<f64> {
        let u = 1.0 / self.values.len() as f64;
        self.values.iter().map(|q| q - u).collect()
    }
}

/// Transition quasiprobabilities `Q_ℰ(β|α)` of a unital channel, stored as
/// a `d² × d²` row-major array with `β` labeling rows.
#[derive(Debug, Clone)]
pub struct ChannelQuasi {
    field: FiniteField,
    values: Vec<f64>,
}

impl ChannelQuasi {
    pub fn from_values(field: &FiniteField, values: Vec<f64>) -> Self {
        let n = field.order() * field.order();
        assert_eq!(values.len(), n * n);
        Self {
            field: field.clone(),
            values,
        }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, beta: PhasePoint, alpha: PhasePoint) -> f64 {
        let n = self.field.order() * self.field.order();
        self.values[point_index(&self.field, beta) * n + point_index(&self.field, alpha)]
    }

    pub fn value_by_index(&self, beta: usize, alpha: usize) -> f64 {
        let n = self.field.order() * self.field.order();
        self.values[beta * n + alpha]
    }

    /// Nonrandom part: every entry minus `1/d²`.
    pub fn nonrandom(&self) -> Vec<f64> {
        let n = self.field.order() * self.field.order();
        let u = 1.0 / n as f64;
        self.values.iter().map(|q| q - u).collect()
    }

    /// New Wigner function from the old one.
    pub fn apply_to(&self, w: &StateQuasi) -> StateQuasi {
        let n = self.field.order() * self.field.order();
        let mut out = vec![0.0; n];
        for b in 0..n {
            let row = &self.values[b * n..(b + 1) * n];
            out[b] = row.iter().zip(w.values()).map(|(t, q)| t * q).sum();
        }
        StateQuasi::from_values(&self.field, out)
    }

    /// The quasi representation of `self ∘ earlier` (apply `earlier` first).
    pub fn compose(&self, earlier: &ChannelQuasi) -> ChannelQuasi {
        let n = self.field.order() * self.field.order();
        let mut out = vec![0.0; n * n];
        for b in 0..n {
            for m in 0..n {
                let t = self.values[b * n + m];
                if t == 0.0 {
                    continue;
                }
                for a in 0..n {
                    out[b * n + a] += t * earlier.values[m * n + a];
                }
            }
        }
        ChannelQuasi::from_values(&self.field, out)
    }
}

/// The measurement quasi-function `Q(E|α) = tr(E A_α)`.
#[derive(Debug, Clone)]
pub struct MeasQuasi {
    field: FiniteField,
    values: Vec<f64>,
    trace_e: f64,
}

impl MeasQuasi {
    pub fn from_values(field: &FiniteField, values: Vec<f64>, trace_e: f64) -> Self {
        assert_eq!(values.len(), field.order() * field.order());
        Self {
            field: field.clone(),
            values,
            trace_e,
        }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, pt: PhasePoint) -> f64 {
        self.values[point_index(&self.field, pt)]
    }

    pub fn trace_e(&self) -> f64 {
        self.trace_e
    }

    /// Nonrandom part `ΔQ(E|α) = Q(E|α) − (1/d) tr E`.
    pub fn nonrandom(&self) -> Vec<f64> {
        let off = self.trace_e / self.field.order() as f64;
        self.values.iter().map(|q| q - off).collect()
    }
}

fn real_part(x: C64, what: &'static str) -> Result<f64> {
    if x.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue(x.im.abs(), what));
    }
    Ok(x.re)
}

/// `Q(α|w) = (1/d) tr(w A_α)`.
pub fn wigner_of_state(ops: &PhaseOps, w: &CMat) -> Result<StateQuasi> {
    let report = validate_state(w, VALIDITY_TOL);
    if !report.pass() {
        return Err(Error::InvalidState(format!(
            "{:?}",
            report
                .violations
                .iter()
                .map(|v| v.condition.as_str())
                .collect::<Vec<_>>()
        )));
    }
    let d = ops.dim();
    let values = (0..d * d)
        .map(|idx| real_part(w.trace_prod(ops.a_by_index(idx)), "state") .map(|t| t / d as f64))
        .collect::<Result<Vec<f64>>>()?;
    Ok(StateQuasi::from_values(ops.field(), values))
}

/// `w = Σ_α Q(α|w) A_α`. The result is Hermitian with unit trace whenever
/// `Q` is real and normalized; positivity is not guaranteed and should be
/// checked separately.
pub fn state_from_wigner(ops: &PhaseOps, q: &StateQuasi) -> CMat {
    let d = ops.dim();
    let mut w = CMat::zeros(d);
    for (idx, &v) in q.values().iter().enumerate() {
        w = w.add(&ops.a_by_index(idx).scale(C64::new(v, 0.0)));
    }
    w
}

/// `Q_ℰ(β|α) = (1/d) tr[A_β ℰ(A_α)]` for a valid unital channel.
pub fn quasi_of_channel(ops: &PhaseOps, ch: &Channel) -> Result<ChannelQuasi> {
    let completeness = ch.completeness_deviation();
    if completeness > VALIDITY_TOL {
        return Err(Error::InvalidChannel(format!(
            "kraus completeness deviation {completeness:.3e}"
        )));
    }
    let unitality = ch.unitality_deviation();
    if unitality > VALIDITY_TOL {
        return Err(Error::NonUnitalChannel(unitality));
    }
    let d = ops.dim();
    let n = d * d;
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        let mapped = ch.apply(ops.a_by_index(a));
        for b in 0..n {
            let t = real_part(ops.a_by_index(b).trace_prod(&mapped), "channel")?;
            values[b * n + a] = t / d as f64;
        }
    }
    Ok(ChannelQuasi::from_values(ops.field(), values))
}

/// `Q(E|α) = tr(E A_α)` for a valid POVM element.
pub fn quasi_of_measurement(ops: &PhaseOps, e: &CMat) -> Result<MeasQuasi> {
    let report = validate_povm_element(e, VALIDITY_TOL);
    if !report.pass() {
        return Err(Error::InvalidPovmElement(format!(
            "{:?}",
            report
                .violations
                .iter()
                .map(|v| v.condition.as_str())
                .collect::<Vec<_>>()
        )));
    }
    let d = ops.dim();
    let trace_e = real_part(e.trace(), "povm element")?;
    let values = (0..d * d)
        .map(|idx| real_part(e.trace_prod(ops.a_by_index(idx)), "povm element"))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeasQuasi::from_values(ops.field(), values, trace_e))
}

/// Outcome probability with the raw (unclamped) value retained.
#[derive(Debug, Clone, Copy)]
pub struct BornValue {
    pub probability: f64,
    pub raw: f64,
}

/// The quasiprobabilistic law of total probability
/// `P = Σ Q(E|β) Q_n(β|…) ⋯ Q_1(…|α) Q(α|w)`, evaluated by iterated
/// application of the channel arrays. Equals the Hilbert-space Born value.
pub fn born_quasi(e: &MeasQuasi, chain: &[ChannelQuasi], w: &StateQuasi) -> BornValue {
    let mut state = w.clone();
    for q in chain {
        state = q.apply_to(&state);
    }
    let raw: f64 = e
        .values()
        .iter()
        .zip(state.values())
        .map(|(qe, qw)| qe * qw)
        .sum();
    BornValue {
        probability: raw.clamp(0.0, 1.0),
        raw,
    }
}
