//! Epistemically restricted classical distributions and their
//! reconstruction maps.
//!
//! A classical observer working in a framework sees only restricted
//! information: a state becomes `R^B(α|w)`, constant on the lines of the
//! striation `B`; a channel becomes a distribution `P^S(δ)` over
//! displacement classes, with conditional `R^S(β|α) = P^S(β − Sα)`; a
//! measurement effect becomes `R^{B'}(E|α)`, constant on the lines of
//! `B'`. All three are non-negative for valid inputs. Summing nonrandom
//! parts recovers the quasiprobability objects exactly.

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::mrs;
use crate::ops::{Channel, PhaseOps};
use crate::phase::{
    legal_symplectics, point_from_index, point_index, PhasePoint, SetMode, Slope, Striation,
    SymplecticMatrix,
};
use crate::quasi::{ChannelQuasi, MeasQuasi, StateQuasi};
use crate::VALIDITY_TOL;

/// Negative values no worse than this are floating-point noise and are
/// clamped to zero; anything more negative is an invalid-input error.
const CLAMP_TOL: f64 = 1e-9;

/// `R^B(α|w)`: the line probability spread uniformly over each line of `B`.
#[derive(Debug, Clone)]
pub struct RestrictedState {
    slope: Slope,
    values: Vec<f64>,
    clamped: usize,
}

impl RestrictedState {
    pub fn from_values(field: &FiniteField, slope: Slope, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), field.order() * field.order());
        Self {
            slope,
            values,
            clamped: 0,
        }
    }

    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, field: &FiniteField, pt: PhasePoint) -> f64 {
        self.values[point_index(field, pt)]
    }

    /// Number of entries clamped up to zero during construction.
    pub fn clamp_events(&self) -> usize {
        self.clamped
    }

    /// `ΔR^B(α|w) = R^B(α|w) − 1/d²`.
    pub fn nonrandom(&self) -> Vec<f64> {
        let u = 1.0 / self.values.len() as f64;
        self.values.iter().map(|v| v - u).collect()
    }

    /// Per-line probabilities `P^B(ℓ|w)` recovered from the point values.
    pub fn line_probabilities(&self, field: &FiniteField) -> Vec<f64> {
        let b = Striation::from_slope(field, self.slope);
        let d = field.order();
        let mut out = vec![0.0; d];
        for idx in 0..d * d {
            let pt = point_from_index(field, idx);
            out[b.line_index(field, pt)] += self.values[idx];
        }
        out
    }
}

/// `P^S_ℰ(δ)` over the `d²` displacement classes of the symplectic `S`,
/// with the conditional `R^S(β|α)` derived on demand.
#[derive(Debug, Clone)]
pub struct RestrictedChannel {
    symplectic: SymplecticMatrix,
    class_dist: Vec<f64>,
    clamped: usize,
}

impl RestrictedChannel {
    pub fn from_class_dist(
        field: &FiniteField,
        symplectic: SymplecticMatrix,
        class_dist: Vec<f64>,
    ) -> Self {
        assert_eq!(class_dist.len(), field.order() * field.order());
        Self {
            symplectic,
            class_dist,
            clamped: 0,
        }
    }

    pub fn symplectic(&self) -> &SymplecticMatrix {
        &self.symplectic
    }

    /// The displacement-class distribution, indexed by `point_index(δ)`.
    pub fn class_dist(&self) -> &[f64] {
        &self.class_dist
    }

    pub fn clamp_events(&self) -> usize {
        self.clamped
    }

    /// `R^S(β|α) = P^S(β − Sα)`.
    pub fn conditional(&self, field: &FiniteField, beta: PhasePoint, alpha: PhasePoint) -> f64 {
        let s_alpha = self.symplectic.apply(field, alpha);
        let delta = PhasePoint::new(field.sub(beta.q, s_alpha.q), field.sub(beta.p, s_alpha.p));
        self.class_dist[point_index(field, delta)]
    }

    /// `ΔP^S(δ) = P^S(δ) − 1/d²`.
    pub fn nonrandom(&self) -> Vec<f64> {
        let u = 1.0 / self.class_dist.len() as f64;
        self.class_dist.iter().map(|v| v - u).collect()
    }
}

/// `R^{B'}(E|α)`: the probability of outcome `E` from the line state of the
/// line through `α`, constant on each line of `B'`.
#[derive(Debug, Clone)]
pub struct RestrictedMeasurement {
    slope: Slope,
    values: Vec<f64>,
    trace_e: f64,
    clamped: usize,
}

impl RestrictedMeasurement {
    pub fn from_values(
        field: &FiniteField,
        slope: Slope,
        values: Vec<f64>,
        trace_e: f64,
    ) -> Self {
        assert_eq!(values.len(), field.order() * field.order());
        Self {
            slope,
            values,
            trace_e,
            clamped: 0,
        }
    }

    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, field: &FiniteField, pt: PhasePoint) -> f64 {
        self.values[point_index(field, pt)]
    }

    pub fn trace_e(&self) -> f64 {
        self.trace_e
    }

    pub fn clamp_events(&self) -> usize {
        self.clamped
    }

    /// `ΔR^{B'}(E|α) = R^{B'}(E|α) − (1/d) tr E`.
    pub fn nonrandom(&self, field: &FiniteField) -> Vec<f64> {
        let off = self.trace_e / field.order() as f64;
        self.values.iter().map(|v| v - off).collect()
    }
}

fn clamp_nonnegative(values: &mut [f64], err: impl Fn(f64) -> Error) -> Result<usize> {
    let mut clamped = 0;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -CLAMP_TOL {
                return Err(err(*v));
            }
            *v = 0.0;
            clamped += 1;
        }
    }
    Ok(clamped)
}

fn line_sums(q: &StateQuasi, b: &Striation) -> Vec<f64> {
    let field = q.field();
    let d = field.order();
    let mut out = vec![0.0; d];
    for idx in 0..d * d {
        let pt = point_from_index(field, idx);
        out[b.line_index(field, pt)] += q.values()[idx];
    }
    out
}

/// The marginal distribution `P^B(ℓ|w) = Σ_{α∈ℓ} Q(α|w)`, one probability
/// per line of the striation.
pub fn marginal(q: &StateQuasi, b: &Striation) -> Result<Vec<f64>> {
    let mut out = line_sums(q, b);
    clamp_nonnegative(&mut out, Error::NegativeMarginal)?;
    Ok(out)
}

/// `R^B(α|w) = P^B(ℓ ∋ α|w) / d`.
pub fn restrict_state(q: &StateQuasi, b: &Striation) -> Result<RestrictedState> {
    let field = q.field();
    let d = field.order();
    let mut lines = line_sums(q, b);
    let clamped = clamp_nonnegative(&mut lines, Error::NegativeMarginal)?;
    let mut values = vec![0.0; d * d];
    for (idx, v) in values.iter_mut().enumerate() {
        let pt = point_from_index(field, idx);
        *v = lines[b.line_index(field, pt)] / d as f64;
    }
    let mut rs = RestrictedState::from_values(field, b.slope(), values);
    rs.clamped = clamped;
    Ok(rs)
}

/// `P^S_ℰ(δ) = (1/d²) Σ_α Q_ℰ(Sα + δ | α)`.
pub fn restrict_channel(qe: &ChannelQuasi, s: &SymplecticMatrix) -> Result<RestrictedChannel> {
    let field = qe.field();
    let d = field.order();
    let n = d * d;
    let mut class_dist = vec![0.0; n];
    for didx in 0..n {
        let delta = point_from_index(field, didx);
        let mut acc = 0.0;
        for aidx in 0..n {
            let alpha = point_from_index(field, aidx);
            let s_alpha = s.apply(field, alpha);
            let beta =
                PhasePoint::new(field.add(s_alpha.q, delta.q), field.add(s_alpha.p, delta.p));
            acc += qe.value_by_index(point_index(field, beta), aidx);
        }
        class_dist[didx] = acc / n as f64;
    }
    let clamped = clamp_nonnegative(&mut class_dist, Error::NegativeClassProbability)?;
    let mut rc = RestrictedChannel::from_class_dist(field, *s, class_dist);
    rc.clamped = clamped;
    Ok(rc)
}

/// `R^{B'}(E|α)`: the average of `Q(E|·)` over the line of `B'` through `α`.
pub fn restrict_measurement(qm: &MeasQuasi, b: &Striation) -> Result<RestrictedMeasurement> {
    let field = qm.field();
    let d = field.order();
    let mut line_avg = vec![0.0; d];
    for idx in 0..d * d {
        let pt = point_from_index(field, idx);
        line_avg[b.line_index(field, pt)] += qm.values()[idx] / d as f64;
    }
    for v in line_avg.iter_mut() {
        if *v < -CLAMP_TOL || *v > 1.0 + CLAMP_TOL {
            return Err(Error::OutOfRangeConditional(*v));
        }
        *v = v.clamp(0.0, 1.0);
    }
    let mut values = vec![0.0; d * d];
    for (idx, v) in values.iter_mut().enumerate() {
        let pt = point_from_index(field, idx);
        *v = line_avg[b.line_index(field, pt)];
    }
    Ok(RestrictedMeasurement::from_values(
        field,
        b.slope(),
        values,
        qm.trace_e(),
    ))
}

fn check_family_slopes(field: &FiniteField, slopes: &[Slope]) -> Result<()> {
    let d = field.order();
    if slopes.len() != d + 1 {
        return Err(Error::IncompleteFamily(format!(
            "expected {} striations, got {}",
            d + 1,
            slopes.len()
        )));
    }
    let mut seen = vec![false; d + 1];
    for s in slopes {
        let i = s.order_index(field);
        if seen[i] {
            return Err(Error::IncompleteFamily(format!(
                "striation {} appears twice",
                s.label(field)
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Reconstructs the Wigner function from all `d + 1` restricted states:
/// `ΔQ(α|w) = Σ_B ΔR^B(α|w)`.
pub fn reconstruct_state(field: &FiniteField, family: &[RestrictedState]) -> Result<StateQuasi> {
    check_family_slopes(field, &family.iter().map(|r| r.slope()).collect::<Vec<_>>())?;
    let n = field.order() * field.order();
    let mut delta = vec![0.0; n];
    for r in family {
        for (acc, dv) in delta.iter_mut().zip(r.nonrandom()) {
            *acc += dv;
        }
    }
    let values: Vec<f64> = delta.iter().map(|dv| dv + 1.0 / n as f64).collect();
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > VALIDITY_TOL {
        return Err(Error::InconsistentMarginals(format!(
            "reconstructed Wigner function sums to {total}"
        )));
    }
    Ok(StateQuasi::from_values(field, values))
}

/// Checks that a channel family's symplectic set is either the full legal
/// set or a verified minimal reconstructing set, returning the matching
/// redundancy factor.
fn verify_channel_set(field: &FiniteField, set: &[SymplecticMatrix]) -> Result<usize> {
    let mut sorted: Vec<[usize; 4]> = set
        .iter()
        .map(|s| s.entries().map(|e| e.index()))
        .collect();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return Err(Error::IncompleteFrameworkSet(
            "duplicate symplectic matrices in family".into(),
        ));
    }
    let mut legal: Vec<[usize; 4]> = legal_symplectics(field)
        .iter()
        .map(|s| s.entries().map(|e| e.index()))
        .collect();
    legal.sort_unstable();
    if sorted == legal {
        return Ok(crate::phase::redundancy_factor(field, SetMode::FullGroup));
    }
    if mrs::verify(field, set) {
        return Ok(1);
    }
    Err(Error::IncompleteFrameworkSet(
        "family is neither the full legal set nor a verified minimal reconstructing set".into(),
    ))
}

/// Reconstructs the transition quasiprobabilities from a complete family:
/// `ΔQ_ℰ(β|α) = (1/Z) Σ_S ΔR^S_ℰ(β|α)`.
pub fn reconstruct_channel(
    field: &FiniteField,
    family: &[RestrictedChannel],
) -> Result<ChannelQuasi> {
    let z = verify_channel_set(
        field,
        &family.iter().map(|r| *r.symplectic()).collect::<Vec<_>>(),
    )? as f64;
    let n = field.order() * field.order();
    let mut values = vec![1.0 / n as f64; n * n];
    for r in family {
        let dp = r.nonrandom();
        for aidx in 0..n {
            let alpha = point_from_index(field, aidx);
            let s_alpha = r.symplectic().apply(field, alpha);
            for (didx, dv) in dp.iter().enumerate() {
                let delta = point_from_index(field, didx);
                let beta =
                    PhasePoint::new(field.add(s_alpha.q, delta.q), field.add(s_alpha.p, delta.p));
                values[point_index(field, beta) * n + aidx] += dv / z;
            }
        }
    }
    Ok(ChannelQuasi::from_values(field, values))
}

/// Reconstructs `Q(E|α)` from all `d + 1` restricted measurements:
/// `ΔQ(E|α) = Σ_B ΔR^B(E|α)`.
pub fn reconstruct_measurement(
    field: &FiniteField,
    family: &[RestrictedMeasurement],
) -> Result<MeasQuasi> {
    check_family_slopes(field, &family.iter().map(|r| r.slope()).collect::<Vec<_>>())?;
    let trace_e = family[0].trace_e();
    for r in family {
        if (r.trace_e() - trace_e).abs() > VALIDITY_TOL {
            return Err(Error::InconsistentConditionals(format!(
                "trace of E disagrees across the family: {} vs {}",
                trace_e,
                r.trace_e()
            )));
        }
    }
    let d = field.order();
    let n = d * d;
    let mut delta = vec![0.0; n];
    for r in family {
        for (acc, dv) in delta.iter_mut().zip(r.nonrandom(field)) {
            *acc += dv;
        }
    }
    let values: Vec<f64> = delta.iter().map(|dv| dv + trace_e / d as f64).collect();
    // consistency: Σ_β Q(E|β) must equal d·tr E
    let total: f64 = values.iter().sum();
    if (total - d as f64 * trace_e).abs() > VALIDITY_TOL * n as f64 {
        return Err(Error::InconsistentConditionals(format!(
            "reconstructed Q(E|·) sums to {total}, expected {}",
            d as f64 * trace_e
        )));
    }
    Ok(MeasQuasi::from_values(field, values, trace_e))
}

/// Ancilla-assisted process tomography: the outcome distribution of the
/// measurement in the basis `|Φ^S_δ⟩ = (1/√d) Σ_m |m⟩ ⊗ D_δ U_S |m⟩` on
/// `(I ⊗ ℰ)|Φ⟩⟨Φ|`, computed as `(1/d²) Σ_j |tr(U_S† D_δ† B_j)|²`.
///
/// This is the physical oracle for the displacement-class distribution: it
/// equals [`restrict_channel`]'s output for every legal `S`.
pub fn simulate_process_tomography(
    ops: &PhaseOps,
    ch: &Channel,
    s: &SymplecticMatrix,
) -> Result<Vec<f64>> {
    let completeness = ch.completeness_deviation();
    if completeness > VALIDITY_TOL {
        return Err(Error::InvalidChannel(format!(
            "kraus completeness deviation {completeness:.3e}"
        )));
    }
    let field = ops.field();
    let d = ops.dim();
    let n = d * d;
    let us = ops.symplectic_unitary(s)?;
    let mut out = vec![0.0; n];
    for (didx, slot) in out.iter_mut().enumerate() {
        let delta = point_from_index(field, didx);
        let m = ops.displacement(delta).matmul(&us); // D_δ U_S
        let mdag = m.dagger();
        let mut acc = 0.0;
        for b in &ch.kraus {
            acc += mdag.matmul(b).trace().norm_sqr();
        }
        *slot = acc / (n as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use crate::ops::PhaseOps;
    use crate::phase::all_striations;
    use crate::quasi::{
        born_quasi, quasi_of_channel, quasi_of_measurement, wigner_of_state, StateQuasi,
    };
    use crate::sampling;
    use num_complex::Complex64 as C64;

    fn qubit() -> (FiniteField, PhaseOps) {
        let f = FiniteField::prime(2).unwrap();
        let ops = PhaseOps::new(&f);
        (f, ops)
    }

    fn mz_state_quasi(ops: &PhaseOps) -> StateQuasi {
        let s3 = 3.0_f64.sqrt();
        let w = CMat::from_rows(&[
            vec![C64::new(0.75, 0.0), C64::new(0.0, -s3 / 4.0)],
            vec![C64::new(0.0, s3 / 4.0), C64::new(0.25, 0.0)],
        ]);
        wigner_of_state(ops, &w).unwrap()
    }

    fn mz_beamsplitter_quasi(ops: &PhaseOps) -> ChannelQuasi {
        let s3 = 3.0_f64.sqrt();
        let u = CMat::from_rows(&[
            vec![C64::new(s3 / 2.0, 0.0), C64::new(0.0, 0.5)],
            vec![C64::new(0.0, 0.5), C64::new(s3 / 2.0, 0.0)],
        ]);
        quasi_of_channel(ops, &Channel::unitary(&u)).unwrap()
    }

    #[test]
    fn mz_marginals() {
        let (f, ops) = qubit();
        let q = mz_state_quasi(&ops);
        let striations = all_striations(&f);
        let s3 = 3.0_f64.sqrt();
        // X (slope 0), Y (slope 1), Z (vertical)
        let px = marginal(&q, &striations[0]).unwrap();
        let py = marginal(&q, &striations[1]).unwrap();
        let pz = marginal(&q, &striations[2]).unwrap();
        assert!((px[0] - 0.5).abs() < 1e-14 && (px[1] - 0.5).abs() < 1e-14);
        assert!((py[0] - (2.0 + s3) / 4.0).abs() < 1e-14);
        assert!((py[1] - (2.0 - s3) / 4.0).abs() < 1e-14);
        assert!((pz[0] - 0.75).abs() < 1e-14 && (pz[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn mz_restricted_states() {
        let (f, ops) = qubit();
        let q = mz_state_quasi(&ops);
        let striations = all_striations(&f);
        let s3 = 3.0_f64.sqrt();
        let rx = restrict_state(&q, &striations[0]).unwrap();
        assert!(rx.values().iter().all(|&v| (v - 0.25).abs() < 1e-14));
        let ry = restrict_state(&q, &striations[1]).unwrap();
        // points 00, 01, 10, 11
        let expect_y = [
            (2.0 + s3) / 8.0,
            (2.0 - s3) / 8.0,
            (2.0 - s3) / 8.0,
            (2.0 + s3) / 8.0,
        ];
        for (v, e) in ry.values().iter().zip(expect_y) {
            assert!((v - e).abs() < 1e-14);
        }
        let rz = restrict_state(&q, &striations[2]).unwrap();
        let expect_z = [3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0];
        for (v, e) in rz.values().iter().zip(expect_z) {
            assert!((v - e).abs() < 1e-14);
        }
        // nonrandom part of P^Z is (+1/4, −1/4)
        let pz_delta: Vec<f64> = rz
            .line_probabilities(&f)
            .iter()
            .map(|p| p - 0.5)
            .collect();
        assert!((pz_delta[0] - 0.25).abs() < 1e-14 && (pz_delta[1] + 0.25).abs() < 1e-14);
    }

    #[test]
    fn mixed_state_marginal_uniform() {
        let (f, ops) = qubit();
        let q = wigner_of_state(&ops, &CMat::identity(2).scale(C64::new(0.5, 0.0))).unwrap();
        for b in all_striations(&f) {
            let m = marginal(&q, &b).unwrap();
            assert!(m.iter().all(|&v| (v - 0.5).abs() < 1e-14));
        }
    }

    #[test]
    fn beamsplitter_class_distributions() {
        let (f, ops) = qubit();
        let qu = mz_beamsplitter_quasi(&ops);
        let legal = legal_symplectics(&f);
        let s3 = 3.0_f64.sqrt();
        // identity framework: diagonal weight 3/4 on δ = 00, 1/4 on δ = 10
        let ri = restrict_channel(&qu, &legal[0]).unwrap();
        let expect = [0.75, 0.0, 0.25, 0.0];
        for (v, e) in ri.class_dist().iter().zip(expect) {
            assert!((v - e).abs() < 1e-13);
        }
        // conditional matrix of the identity framework
        let grid = [
            [3.0, 0.0, 1.0, 0.0],
            [0.0, 3.0, 0.0, 1.0],
            [1.0, 0.0, 3.0, 0.0],
            [0.0, 1.0, 0.0, 3.0],
        ];
        for b in 0..4 {
            for a in 0..4 {
                let v = ri.conditional(
                    &f,
                    point_from_index(&f, b),
                    point_from_index(&f, a),
                );
                assert!((v - grid[b][a] / 4.0).abs() < 1e-13);
            }
        }
        // R and L frameworks: the (2±√3)/8 patterns
        let rr = restrict_channel(&qu, &legal[1]).unwrap();
        let expect_r = [
            (2.0 + s3) / 8.0,
            (2.0 - s3) / 8.0,
            (2.0 - s3) / 8.0,
            (2.0 + s3) / 8.0,
        ];
        for (v, e) in rr.class_dist().iter().zip(expect_r) {
            assert!((v - e).abs() < 1e-13);
        }
        let rl = restrict_channel(&qu, &legal[2]).unwrap();
        let expect_l = [
            (2.0 - s3) / 8.0,
            (2.0 - s3) / 8.0,
            (2.0 + s3) / 8.0,
            (2.0 + s3) / 8.0,
        ];
        for (v, e) in rl.class_dist().iter().zip(expect_l) {
            assert!((v - e).abs() < 1e-13);
        }
        // conditional grid of the L framework
        let grid_l = [
            [2.0 - s3, 2.0 + s3, 2.0 + s3, 2.0 - s3],
            [2.0 - s3, 2.0 + s3, 2.0 + s3, 2.0 - s3],
            [2.0 + s3, 2.0 - s3, 2.0 - s3, 2.0 + s3],
            [2.0 + s3, 2.0 - s3, 2.0 - s3, 2.0 + s3],
        ];
        for b in 0..4 {
            for a in 0..4 {
                let v = rl.conditional(
                    &f,
                    point_from_index(&f, b),
                    point_from_index(&f, a),
                );
                assert!((v - grid_l[b][a] / 8.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn identity_channel_class_distributions() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        let qu = quasi_of_channel(&ops, &Channel::unitary(&CMat::identity(3))).unwrap();
        // S = I: concentrated at δ = 0
        let ri = restrict_channel(&qu, &SymplecticMatrix::identity(&f)).unwrap();
        assert!((ri.class_dist()[0] - 1.0).abs() < 1e-12);
        assert!(ri.class_dist()[1..].iter().all(|&v| v.abs() < 1e-12));
        // S = 2I has det(S − I) ≠ 0, giving the uniform distribution
        let two = f.from_int(2);
        let s = SymplecticMatrix {
            v: two,
            x: f.zero(),
            y: f.zero(),
            z: two,
        };
        assert_eq!(s.det(&f), f.one());
        let rs = restrict_channel(&qu, &s).unwrap();
        assert!(rs.class_dist().iter().all(|&v| (v - 1.0 / 9.0).abs() < 1e-12));
    }

    #[test]
    fn mz_restricted_measurements() {
        let (f, ops) = qubit();
        let mut e = CMat::zeros(2);
        e[(0, 0)] = C64::new(1.0, 0.0);
        let qm = quasi_of_measurement(&ops, &e).unwrap();
        let striations = all_striations(&f);
        let rx = restrict_measurement(&qm, &striations[0]).unwrap();
        assert!(rx.values().iter().all(|&v| (v - 0.5).abs() < 1e-14));
        let rz = restrict_measurement(&qm, &striations[2]).unwrap();
        let expect = [1.0, 1.0, 0.0, 0.0];
        for (v, e) in rz.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-14);
        }
        // nonrandom part subtracts (1/d) tr E = 1/2
        let dz = rz.nonrandom(&f);
        assert!((dz[0] - 0.5).abs() < 1e-14 && (dz[2] + 0.5).abs() < 1e-14);
        // E = I gives all ones
        let qi = quasi_of_measurement(&ops, &CMat::identity(2)).unwrap();
        let ri = restrict_measurement(&qi, &striations[1]).unwrap();
        assert!(ri.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn restriction_structure_is_exact() {
        // constancy on lines and displacement classes holds exactly, and
        // nonrandom parts sum to zero
        let field = FiniteField::prime(5).unwrap();
        let ops = PhaseOps::new(&field);
        let mut rng = sampling::rng(71);
        let w = sampling::random_state(5, &mut rng);
        let q = wigner_of_state(&ops, &w).unwrap();
        for b in all_striations(&field) {
            let r = restrict_state(&q, &b).unwrap();
            for line in b.lines() {
                let pts = line.points(&field);
                let first = r.value(&field, pts[0]);
                assert!(pts.iter().all(|&pt| r.value(&field, pt) == first));
            }
            let delta_total: f64 = r.nonrandom().iter().sum();
            assert!(delta_total.abs() < 1e-12);
        }
        let ch = sampling::random_unital_channel(5, 2, &mut rng);
        let qe = quasi_of_channel(&ops, &ch).unwrap();
        let s = legal_symplectics(&field)[17];
        let rc = restrict_channel(&qe, &s).unwrap();
        // R^S depends on (β, α) only through β − Sα
        for didx in 0..25 {
            let delta = point_from_index(&field, didx);
            let mut seen = None;
            for aidx in 0..25 {
                let alpha = point_from_index(&field, aidx);
                let sa = s.apply(&field, alpha);
                let beta =
                    PhasePoint::new(field.add(sa.q, delta.q), field.add(sa.p, delta.p));
                let v = rc.conditional(&field, beta, alpha);
                match seen {
                    None => seen = Some(v),
                    Some(prev) => assert!(v == prev),
                }
            }
        }
        assert!(rc.nonrandom().iter().sum::<f64>().abs() < 1e-12);
        let e = sampling::random_povm_element(5, &mut rng);
        let qm = quasi_of_measurement(&ops, &e).unwrap();
        for b in all_striations(&field) {
            let rm = restrict_measurement(&qm, &b).unwrap();
            assert!(rm.nonrandom(&field).iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn state_reconstruction_round_trips() {
        // the interferometer state plus random states across dimensions
        let (f, ops) = qubit();
        let q = mz_state_quasi(&ops);
        let family: Vec<RestrictedState> = all_striations(&f)
            .iter()
            .map(|b| restrict_state(&q, b).unwrap())
            .collect();
        let back = reconstruct_state(&f, &family).unwrap();
        for (a, b) in q.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        // uniform family reconstructs the uniform function
        let uq = StateQuasi::uniform(&f);
        let ufam: Vec<RestrictedState> = all_striations(&f)
            .iter()
            .map(|b| restrict_state(&uq, b).unwrap())
            .collect();
        let uback = reconstruct_state(&f, &ufam).unwrap();
        assert!(uback.values().iter().all(|&v| (v - 0.25).abs() < 1e-14));

        let mut rng = sampling::rng(11);
        for p in [3u32, 5] {
            let field = FiniteField::prime(p).unwrap();
            let o = PhaseOps::new(&field);
            for _ in 0..20 {
                let w = sampling::random_state(p as usize, &mut rng);
                let q = wigner_of_state(&o, &w).unwrap();
                let family: Vec<RestrictedState> = all_striations(&field)
                    .iter()
                    .map(|b| restrict_state(&q, b).unwrap())
                    .collect();
                let back = reconstruct_state(&field, &family).unwrap();
                for (a, b) in q.values().iter().zip(back.values()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn incomplete_family_rejected() {
        let (f, ops) = qubit();
        let q = mz_state_quasi(&ops);
        let striations = all_striations(&f);
        let family: Vec<RestrictedState> = striations[..2]
            .iter()
            .map(|b| restrict_state(&q, b).unwrap())
            .collect();
        assert!(matches!(
            reconstruct_state(&f, &family),
            Err(Error::IncompleteFamily(_))
        ));
        // corrupted values fail normalization
        let mut family: Vec<RestrictedState> = striations
            .iter()
            .map(|b| restrict_state(&q, b).unwrap())
            .collect();
        family[0].values[0] += 0.25;
        assert!(matches!(
            reconstruct_state(&f, &family),
            Err(Error::InconsistentMarginals(_))
        ));
    }

    #[test]
    fn channel_reconstruction_round_trips() {
        let (f, ops) = qubit();
        let qu = mz_beamsplitter_quasi(&ops);
        let family: Vec<RestrictedChannel> = legal_symplectics(&f)
            .iter()
            .map(|s| restrict_channel(&qu, s).unwrap())
            .collect();
        let back = reconstruct_channel(&f, &family).unwrap();
        for (a, b) in qu.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-13);
        }

        // random unital channels at d = 3: full group (Z = 3) and MRS (Z = 1)
        let field = FiniteField::prime(3).unwrap();
        let o = PhaseOps::new(&field);
        let mrs_set = crate::mrs::search(&field, crate::mrs::DEFAULT_BUDGET);
        let mrs_set = mrs_set.set().unwrap();
        let mut rng = sampling::rng(23);
        for _ in 0..10 {
            let ch = sampling::random_unital_channel(3, 3, &mut rng);
            let qe = quasi_of_channel(&o, &ch).unwrap();
            for set in [legal_symplectics(&field).as_slice(), mrs_set] {
                let family: Vec<RestrictedChannel> = set
                    .iter()
                    .map(|s| restrict_channel(&qe, s).unwrap())
                    .collect();
                let back = reconstruct_channel(&field, &family).unwrap();
                for (a, b) in qe.values().iter().zip(back.values()) {
                    assert!((a - b).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn unverified_channel_set_rejected() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        let qu = quasi_of_channel(&ops, &Channel::unitary(&CMat::identity(3))).unwrap();
        let group = legal_symplectics(&f);
        let family: Vec<RestrictedChannel> = group[..8]
            .iter()
            .map(|s| restrict_channel(&qu, s).unwrap())
            .collect();
        // the first eight group elements are not a minimal reconstructing set
        assert!(matches!(
            reconstruct_channel(&f, &family),
            Err(Error::IncompleteFrameworkSet(_))
        ));
    }

    #[test]
    fn measurement_reconstruction_round_trips() {
        let (f, ops) = qubit();
        let mut e = CMat::zeros(2);
        e[(0, 0)] = C64::new(1.0, 0.0);
        let qm = quasi_of_measurement(&ops, &e).unwrap();
        let family: Vec<RestrictedMeasurement> = all_striations(&f)
            .iter()
            .map(|b| restrict_measurement(&qm, b).unwrap())
            .collect();
        let back = reconstruct_measurement(&f, &family).unwrap();
        for (a, b) in qm.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-13);
        }

        let field = FiniteField::prime(5).unwrap();
        let o = PhaseOps::new(&field);
        let mut rng = sampling::rng(31);
        for _ in 0..10 {
            let e = sampling::random_povm_element(5, &mut rng);
            let qm = quasi_of_measurement(&o, &e).unwrap();
            let family: Vec<RestrictedMeasurement> = all_striations(&field)
                .iter()
                .map(|b| restrict_measurement(&qm, b).unwrap())
                .collect();
            let back = reconstruct_measurement(&field, &family).unwrap();
            for (a, b) in qm.values().iter().zip(back.values()) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn tomography_oracle_matches_class_distribution() {
        // identity channel, S = I: all weight on δ = 0
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        let id = Channel::unitary(&CMat::identity(3));
        let probs =
            simulate_process_tomography(&ops, &id, &SymplecticMatrix::identity(&f)).unwrap();
        assert!((probs[0] - 1.0).abs() < 1e-12);

        // beamsplitter, S = I
        let (f2, ops2) = qubit();
        let s3 = 3.0_f64.sqrt();
        let u = CMat::from_rows(&[
            vec![C64::new(s3 / 2.0, 0.0), C64::new(0.0, 0.5)],
            vec![C64::new(0.0, 0.5), C64::new(s3 / 2.0, 0.0)],
        ]);
        let probs = simulate_process_tomography(
            &ops2,
            &Channel::unitary(&u),
            &SymplecticMatrix::identity(&f2),
        )
        .unwrap();
        let expect = [0.75, 0.0, 0.25, 0.0];
        for (v, e) in probs.iter().zip(expect) {
            assert!((v - e).abs() < 1e-13);
        }

        // random channels: both routes agree for every legal S
        let mut rng = sampling::rng(47);
        for p in [2u32, 3] {
            let field = FiniteField::prime(p).unwrap();
            let o = PhaseOps::new(&field);
            for _ in 0..5 {
                let ch = sampling::random_unital_channel(p as usize, 2, &mut rng);
                let qe = quasi_of_channel(&o, &ch).unwrap();
                for s in legal_symplectics(&field) {
                    let via_tomography = simulate_process_tomography(&o, &ch, &s).unwrap();
                    let via_quasi = restrict_channel(&qe, &s).unwrap();
                    for (a, b) in via_tomography.iter().zip(via_quasi.class_dist()) {
                        assert!((a - b).abs() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn everything_feeds_born_rule() {
        // restricted objects keep enough information for the Born rule
        // after reconstruction
        let (f, ops) = qubit();
        let q = mz_state_quasi(&ops);
        let qu = mz_beamsplitter_quasi(&ops);
        let mut e = CMat::zeros(2);
        e[(0, 0)] = C64::new(1.0, 0.0);
        let qm = quasi_of_measurement(&ops, &e).unwrap();

        let sf: Vec<RestrictedState> = all_striations(&f)
            .iter()
            .map(|b| restrict_state(&q, b).unwrap())
            .collect();
        let cf: Vec<RestrictedChannel> = legal_symplectics(&f)
            .iter()
            .map(|s| restrict_channel(&qu, s).unwrap())
            .collect();
        let mf: Vec<RestrictedMeasurement> = all_striations(&f)
            .iter()
            .map(|b| restrict_measurement(&qm, b).unwrap())
            .collect();
        let born = born_quasi(
            &reconstruct_measurement(&f, &mf).unwrap(),
            &[reconstruct_channel(&f, &cf).unwrap()],
            &reconstruct_state(&f, &sf).unwrap(),
        );
        assert!((born.probability - 0.25).abs() < 1e-12);
    }
}
