//! Global constraints that mark a family of restricted distributions as
//! quantum-consistent: the three-point structure function `Γ`, the
//! pure-state and unitary-channel and pure-measurement conditions, and
//! POVM combination.
//!
//! `Γ_{αβγ} = (1/d) tr(A_α A_β A_γ)` encodes operator multiplication in
//! phase space. For odd characteristic it has the closed form
//! `(1/d) ω^{−2 Tr(⟨α,β⟩ + ⟨β,γ⟩ + ⟨γ,α⟩)}`. The `d = 2` checks route
//! through operator space instead (reconstruct, then test `w² = w`,
//! Choi-state purity, or `E² = E`), since the closed form is tied to the
//! odd-characteristic operators.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::linalg::CMat;
use crate::ops::PhaseOps;
use crate::phase::{point_from_index, symplectic_product, PhasePoint};
use crate::quasi::state_from_wigner;
use crate::restricted::{
    reconstruct_channel, reconstruct_measurement, reconstruct_state, RestrictedChannel,
    RestrictedMeasurement, RestrictedState,
};

/// Closed form of the structure function; odd characteristic only.
pub fn gamma(field: &FiniteField, a: PhasePoint, b: PhasePoint, c: PhasePoint) -> Result<C64> {
    let p = field.characteristic();
    if p == 2 {
        return Err(Error::UnsupportedDimension(2));
    }
    let d = field.order();
    let sum = field.add(
        field.add(
            symplectic_product(field, a, b),
            symplectic_product(field, b, c),
        ),
        symplectic_product(field, c, a),
    );
    let exponent = field.mul(field.neg(field.from_int(2)), sum);
    let t = field.abs_trace(exponent) as f64;
    let theta = 2.0 * std::f64::consts::PI * t / p as f64;
    Ok(C64::new(theta.cos() / d as f64, theta.sin() / d as f64))
}

/// `(1/d) tr(A_α A_β A_γ)` computed from the operators; the independent
/// route used to cross-check [`gamma`].
pub fn gamma_direct(ops: &PhaseOps, a: PhasePoint, b: PhasePoint, c: PhasePoint) -> C64 {
    let d = ops.dim() as f64;
    ops.a(a).matmul(ops.a(b)).trace_prod(ops.a(c)) / d
}

/// Cached table of `Γ` over all point triples.
pub struct GammaTable {
    n: usize,
    values: Vec<C64>,
}

impl GammaTable {
    pub fn new(field: &FiniteField) -> Result<Self> {
        let d = field.order();
        let n = d * d;
        let mut values = vec![C64::new(0.0, 0.0); n * n * n];
        for ai in 0..n {
            let a = point_from_index(field, ai);
            for bi in 0..n {
                let b = point_from_index(field, bi);
                for ci in 0..n {
                    let c = point_from_index(field, ci);
                    values[(ai * n + bi) * n + ci] = gamma(field, a, b, c)?;
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> C64 {
        self.values[(a * self.n + b) * self.n + c]
    }
}

/// Outcome of a constraint check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub check: &'static str,
    pub pass: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: u64,
}

const CHECK_TOL: f64 = 1e-8;

/// Pure-state condition: the reconstructed Wigner function must satisfy
/// `Q(α) = Σ_{βγ} Γ_{αβγ} Q(β) Q(γ)`.
pub fn check_pure_state(field: &FiniteField, family: &[RestrictedState]) -> Result<CheckReport> {
    let q = reconstruct_state(field, family)?;
    let residual = if field.characteristic() == 2 {
        // operator route: w² = w and tr w = 1
        let ops = PhaseOps::new(field);
        let w = state_from_wigner(&ops, &q);
        let idempotency = w.matmul(&w).max_abs_diff(&w);
        let trace = (w.trace() - C64::new(1.0, 0.0)).norm();
        idempotency.max(trace)
    } else {
        let table = GammaTable::new(field)?;
        let n = field.order() * field.order();
        let mut worst = 0.0f64;
        for a in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..n {
                let qb = q.values()[b];
                for c in 0..n {
                    acc += table.get(a, b, c) * qb * q.values()[c];
                }
            }
            worst = worst.max((acc - C64::new(q.values()[a], 0.0)).norm());
        }
        worst
    };
    Ok(CheckReport {
        check: "pure-state",
        pass: residual < CHECK_TOL,
        max_residual: residual,
        tolerance: CHECK_TOL,
        samples: (field.order() * field.order()) as u64,
    })
}

/// Unitary-channel condition: the reconstructed transition
/// quasiprobabilities must preserve `Γ`,
/// `Σ_{αβγ} Q(α'|α) Q(β'|β) Q(γ'|γ) Γ_{αβγ} = Γ_{α'β'γ'}`.
///
/// Exhaustive over primed triples for `d ≤ 3`; otherwise `samples` seeded
/// random primed triples (default 10⁴).
pub fn check_unitary_channel(
    field: &FiniteField,
    family: &[RestrictedChannel],
    samples: Option<(u64, u64)>,
) -> Result<CheckReport> {
    let q = reconstruct_channel(field, family)?;
    let d = field.order();
    let n = d * d;
    if field.characteristic() == 2 {
        // operator route: the Choi state of the reconstructed channel is
        // pure exactly when the channel is unitary
        let ops = PhaseOps::new(field);
        // E(|k⟩⟨l|) = Σ_{αβ} (1/d) tr(|k⟩⟨l| A_α) Q(β|α) A_β
        let mut choi = CMat::zeros(d * d);
        for k in 0..d {
            for l in 0..d {
                let mut unit = CMat::zeros(d);
                unit[(k, l)] = C64::new(1.0, 0.0);
                let mut mapped = CMat::zeros(d);
                for a in 0..n {
                    let overlap = unit.trace_prod(ops.a_by_index(a)) / d as f64;
                    if overlap.norm() < 1e-15 {
                        continue;
                    }
                    for b in 0..n {
                        let w = overlap * q.value_by_index(b, a);
                        mapped = mapped.add(&ops.a_by_index(b).scale(w));
                    }
                }
                // J += E(|k⟩⟨l|) ⊗ |k⟩⟨l| / d
                for i in 0..d {
                    for j in 0..d {
                        let v = mapped[(i, j)] / d as f64;
                        choi[(i * d + k, j * d + l)] += v;
                    }
                }
            }
        }
        let purity = choi.matmul(&choi).max_abs_diff(&choi);
        let trace = (choi.trace() - C64::new(1.0, 0.0)).norm();
        let residual = purity.max(trace);
        return Ok(CheckReport {
            check: "unitary-channel",
            pass: residual < CHECK_TOL,
            max_residual: residual,
            tolerance: CHECK_TOL,
            samples: (n * n) as u64,
        });
    }

    let table = GammaTable::new(field)?;
    let qv = q.values();
    let mut worst = 0.0f64;
    let mut count = 0u64;
    if d <= 3 {
        // contract one mode at a time: T1[a',b,c] = Σ_a Q(a'|a) Γ_{abc}
        let mut t1 = vec![C64::new(0.0, 0.0); n * n * n];
        for ap in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..n {
                        acc += qv[ap * n + a] * table.get(a, b, c);
                    }
                    t1[(ap * n + b) * n + c] = acc;
                }
            }
        }
        let mut t2 = vec![C64::new(0.0, 0.0); n * n * n];
        for ap in 0..n {
            for bp in 0..n {
                for c in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..n {
                        acc += qv[bp * n + b] * t1[(ap * n + b) * n + c];
                    }
                    t2[(ap * n + bp) * n + c] = acc;
                }
            }
        }
        for ap in 0..n {
            for bp in 0..n {
                for cp in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..n {
                        acc += qv[cp * n + c] * t2[(ap * n + bp) * n + c];
                    }
                    worst = worst.max((acc - table.get(ap, bp, cp)).norm());
                    count += 1;
                }
            }
        }
    } else {
        let (num, seed) = samples.unwrap_or((10_000, 2024));
        use rand::Rng;
        let mut rng = crate::sampling::rng(seed);
        for _ in 0..num {
            let ap = rng.gen_range(0..n);
            let bp = rng.gen_range(0..n);
            let cp = rng.gen_range(0..n);
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..n {
                let qa = qv[ap * n + a];
                if qa.abs() < 1e-18 {
                    continue;
                }
                for b in 0..n {
                    let qab = qa * qv[bp * n + b];
                    if qab.abs() < 1e-18 {
                        continue;
                    }
                    for c in 0..n {
                        acc += table.get(a, b, c) * (qab * qv[cp * n + c]);
                    }
                }
            }
            worst = worst.max((acc - table.get(ap, bp, cp)).norm());
            count += 1;
        }
    }
    Ok(CheckReport {
        check: "unitary-channel",
        pass: worst < CHECK_TOL,
        max_residual: worst,
        tolerance: CHECK_TOL,
        samples: count,
    })
}

/// Pure-measurement condition: the reconstructed `Q(E|·)` of a rank-1
/// projector satisfies `Q(E|α) = (1/d) Σ_{βγ} Γ_{αβγ} Q(E|β) Q(E|γ)`.
pub fn check_pure_measurement(
    field: &FiniteField,
    family: &[RestrictedMeasurement],
) -> Result<CheckReport> {
    let q = reconstruct_measurement(field, family)?;
    let d = field.order();
    let n = d * d;
    let residual = if field.characteristic() == 2 {
        // operator route: E² = E and tr E = 1
        let ops = PhaseOps::new(field);
        let mut e = CMat::zeros(d);
        for (idx, &v) in q.values().iter().enumerate() {
            e = e.add(&ops.a_by_index(idx).scale(C64::new(v / d as f64, 0.0)));
        }
        let idem = e.matmul(&e).max_abs_diff(&e);
        let trace = (e.trace() - C64::new(1.0, 0.0)).norm();
        idem.max(trace)
    } else {
        // the quadratic identity is idempotency; rank one additionally
        // needs tr E = 1
        let table = GammaTable::new(field)?;
        let mut worst = (q.trace_e() - 1.0).abs();
        for a in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..n {
                let qb = q.values()[b];
                for c in 0..n {
                    acc += table.get(a, b, c) * qb * q.values()[c];
                }
            }
            acc /= d as f64;
            worst = worst.max((acc - C64::new(q.values()[a], 0.0)).norm());
        }
        worst
    };
    Ok(CheckReport {
        check: "pure-measurement",
        pass: residual < CHECK_TOL,
        max_residual: residual,
        tolerance: CHECK_TOL,
        samples: n as u64,
    })
}

/// Combines pure-measurement families with positive weights `c_j`,
/// `Σ c_j ≤ 1`, into the family of `E = Σ_j c_j E_j`.
pub fn combine_povm_families(
    field: &FiniteField,
    families: &[Vec<RestrictedMeasurement>],
    weights: &[f64],
) -> Result<Vec<RestrictedMeasurement>> {
    assert_eq!(families.len(), weights.len(), "one weight per family");
    assert!(!families.is_empty(), "need at least one family");
    for &c in weights {
        if c <= 0.0 {
            return Err(Error::NonPositiveWeight(c));
        }
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::WeightSumExceedsOne(total));
    }
    let d = field.order();
    let slopes: Vec<_> = families[0].iter().map(|r| r.slope()).collect();
    if slopes.len() != d + 1 {
        return Err(Error::IncompleteFamily(format!(
            "expected {} striations, got {}",
            d + 1,
            slopes.len()
        )));
    }
    for fam in families {
        if fam.len() != slopes.len()
            || fam.iter().zip(&slopes).any(|(r, &s)| r.slope() != s)
        {
            return Err(Error::IncompleteFamily(
                "families list striations in different orders".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(slopes.len());
    for (bi, &slope) in slopes.iter().enumerate() {
        let mut values = vec![0.0; d * d];
        let mut trace_e = 0.0;
        for (fam, &c) in families.iter().zip(weights) {
            for (acc, &v) in values.iter_mut().zip(fam[bi].values()) {
                *acc += c * v;
            }
            trace_e += c * fam[bi].trace_e();
        }
        out.push(RestrictedMeasurement::from_values(
            field, slope, values, trace_e,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{Channel, PhaseOps};
    use crate::phase::{all_striations, legal_symplectics, points};
    use crate::quasi::{
        quasi_of_channel, quasi_of_measurement, wigner_of_state, StateQuasi,
    };
    use crate::restricted::{restrict_channel, restrict_measurement, restrict_state};
    use crate::sampling;

    fn state_family(
        field: &FiniteField,
        ops: &PhaseOps,
        w: &CMat,
    ) -> Vec<RestrictedState> {
        let q = wigner_of_state(ops, w).unwrap();
        all_striations(field)
            .iter()
            .map(|b| restrict_state(&q, b).unwrap())
            .collect()
    }

    fn channel_family(
        field: &FiniteField,
        ops: &PhaseOps,
        ch: &Channel,
    ) -> Vec<RestrictedChannel> {
        let q = quasi_of_channel(ops, ch).unwrap();
        legal_symplectics(field)
            .iter()
            .map(|s| restrict_channel(&q, s).unwrap())
            .collect()
    }

    fn measurement_family(
        field: &FiniteField,
        ops: &PhaseOps,
        e: &CMat,
    ) -> Vec<RestrictedMeasurement> {
        let q = quasi_of_measurement(ops, e).unwrap();
        all_striations(field)
            .iter()
            .map(|b| restrict_measurement(&q, b).unwrap())
            .collect()
    }

    #[test]
    fn gamma_closed_form_matches_trace() {
        for (p, n) in [(3u32, 1u32), (5, 1)] {
            let f = FiniteField::new(p, n, None).unwrap();
            let ops = PhaseOps::new(&f);
            for a in points(&f) {
                for b in points(&f) {
                    for c in points(&f) {
                        let closed = gamma(&f, a, b, c).unwrap();
                        let direct = gamma_direct(&ops, a, b, c);
                        assert!((closed - direct).norm() < 1e-12);
                    }
                }
            }
        }
        // sampled for d = 9
        let f9 = FiniteField::new(3, 2, None).unwrap();
        let ops9 = PhaseOps::new(&f9);
        let mut rng = sampling::rng(6);
        use rand::Rng;
        for _ in 0..10_000 {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                point_from_index(&f9, rng.gen_range(0..81))
            };
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            assert!((gamma(&f9, a, b, c).unwrap() - gamma_direct(&ops9, a, b, c)).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_cyclic_and_diagonal() {
        let f = FiniteField::prime(3).unwrap();
        for a in points(&f) {
            // all symplectic products vanish on the diagonal
            let g = gamma(&f, a, a, a).unwrap();
            assert!((g - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
            for b in points(&f) {
                for c in points(&f) {
                    let g1 = gamma(&f, a, b, c).unwrap();
                    let g2 = gamma(&f, b, c, a).unwrap();
                    let g3 = gamma(&f, c, a, b).unwrap();
                    assert!((g1 - g2).norm() < 1e-15 && (g2 - g3).norm() < 1e-15);
                }
            }
        }
        assert!(matches!(
            gamma(
                &FiniteField::prime(2).unwrap(),
                PhasePoint::origin(&FiniteField::prime(2).unwrap()),
                PhasePoint::origin(&FiniteField::prime(2).unwrap()),
                PhasePoint::origin(&FiniteField::prime(2).unwrap())
            ),
            Err(Error::UnsupportedDimension(2))
        ));
    }

    #[test]
    fn pure_state_check() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        // |0⟩⟨0| passes
        let mut w = CMat::zeros(3);
        w[(0, 0)] = C64::new(1.0, 0.0);
        let report = check_pure_state(&f, &state_family(&f, &ops, &w)).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
        // the completely mixed state fails
        let mixed = CMat::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
        let report = check_pure_state(&f, &state_family(&f, &ops, &mixed)).unwrap();
        assert!(!report.pass);
        // random pure states pass, random mixed states fail
        let mut rng = sampling::rng(61);
        for _ in 0..10 {
            let pure = sampling::random_pure_state(3, &mut rng);
            assert!(check_pure_state(&f, &state_family(&f, &ops, &pure))
                .unwrap()
                .pass);
            let mixed = sampling::random_state(3, &mut rng);
            assert!(!check_pure_state(&f, &state_family(&f, &ops, &mixed))
                .unwrap()
                .pass);
        }
        // every line-state projector passes
        for b in all_striations(&f) {
            for line in b.lines() {
                let proj = ops.line_projector(line);
                assert!(check_pure_state(&f, &state_family(&f, &ops, &proj))
                    .unwrap()
                    .pass);
            }
        }
    }

    #[test]
    fn pure_state_check_d5() {
        let f = FiniteField::prime(5).unwrap();
        let ops = PhaseOps::new(&f);
        let mut rng = sampling::rng(62);
        for _ in 0..3 {
            let pure = sampling::random_pure_state(5, &mut rng);
            assert!(check_pure_state(&f, &state_family(&f, &ops, &pure))
                .unwrap()
                .pass);
            let mixed = sampling::random_state(5, &mut rng);
            assert!(!check_pure_state(&f, &state_family(&f, &ops, &mixed))
                .unwrap()
                .pass);
        }
        for line in all_striations(&f)[3].lines() {
            let proj = ops.line_projector(line);
            assert!(check_pure_state(&f, &state_family(&f, &ops, &proj))
                .unwrap()
                .pass);
        }
    }

    #[test]
    fn every_symplectic_unitary_channel_passes() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        for s in legal_symplectics(&f) {
            let u = ops.symplectic_unitary(&s).unwrap();
            let fam = channel_family(&f, &ops, &Channel::unitary(&u));
            assert!(check_unitary_channel(&f, &fam, None).unwrap().pass);
        }
    }

    #[test]
    fn pure_state_check_qubit_route() {
        let f = FiniteField::prime(2).unwrap();
        let ops = PhaseOps::new(&f);
        let s3 = 3.0_f64.sqrt();
        let w = CMat::from_rows(&[
            vec![C64::new(0.75, 0.0), C64::new(0.0, -s3 / 4.0)],
            vec![C64::new(0.0, s3 / 4.0), C64::new(0.25, 0.0)],
        ]);
        assert!(check_pure_state(&f, &state_family(&f, &ops, &w))
            .unwrap()
            .pass);
        let mixed = CMat::identity(2).scale(C64::new(0.5, 0.0));
        assert!(!check_pure_state(&f, &state_family(&f, &ops, &mixed))
            .unwrap()
            .pass);
    }

    #[test]
    fn unitary_channel_check() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        // identity and symplectic unitaries pass
        let id = Channel::unitary(&CMat::identity(3));
        assert!(
            check_unitary_channel(&f, &channel_family(&f, &ops, &id), None)
                .unwrap()
                .pass
        );
        let mut rng = sampling::rng(67);
        for _ in 0..5 {
            let u = Channel::unitary(&sampling::random_unitary(3, &mut rng));
            let report = check_unitary_channel(&f, &channel_family(&f, &ops, &u), None).unwrap();
            assert!(report.pass, "residual {}", report.max_residual);
        }
        // an equal mixture of two distinct unitaries fails
        let u1 = sampling::random_unitary(3, &mut rng).scale(C64::new(0.5f64.sqrt(), 0.0));
        let u2 = sampling::random_unitary(3, &mut rng).scale(C64::new(0.5f64.sqrt(), 0.0));
        let mix = Channel::new(vec![u1, u2]);
        assert!(
            !check_unitary_channel(&f, &channel_family(&f, &ops, &mix), None)
                .unwrap()
                .pass
        );
        // the completely depolarizing channel fails
        let depol_kraus: Vec<CMat> = points(&f)
            .map(|delta| ops.displacement(delta).scale(C64::new(1.0 / 3.0, 0.0)))
            .collect();
        let depol = Channel::new(depol_kraus);
        assert!(
            !check_unitary_channel(&f, &channel_family(&f, &ops, &depol), None)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn unitary_channel_check_qubit_route() {
        let f = FiniteField::prime(2).unwrap();
        let ops = PhaseOps::new(&f);
        let s3 = 3.0_f64.sqrt();
        let u = CMat::from_rows(&[
            vec![C64::new(s3 / 2.0, 0.0), C64::new(0.0, 0.5)],
            vec![C64::new(0.0, 0.5), C64::new(s3 / 2.0, 0.0)],
        ]);
        let fam = channel_family(&f, &ops, &Channel::unitary(&u));
        assert!(check_unitary_channel(&f, &fam, None).unwrap().pass);
        let depol: Vec<CMat> = points(&f)
            .map(|delta| ops.displacement(delta).scale(C64::new(0.5, 0.0)))
            .collect();
        let fam = channel_family(&f, &ops, &Channel::new(depol));
        assert!(!check_unitary_channel(&f, &fam, None).unwrap().pass);
    }

    #[test]
    fn pure_measurement_check() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        let mut e = CMat::zeros(3);
        e[(0, 0)] = C64::new(1.0, 0.0);
        assert!(
            check_pure_measurement(&f, &measurement_family(&f, &ops, &e))
                .unwrap()
                .pass
        );
        // E = I fails (not rank one)
        assert!(!check_pure_measurement(
            &f,
            &measurement_family(&f, &ops, &CMat::identity(3))
        )
        .unwrap()
        .pass);
        // a scaled projector fails the quadratic identity
        let half = e.scale(C64::new(0.5, 0.0));
        assert!(
            !check_pure_measurement(&f, &measurement_family(&f, &ops, &half))
                .unwrap()
                .pass
        );
    }

    #[test]
    fn povm_combination() {
        let f = FiniteField::prime(3).unwrap();
        let ops = PhaseOps::new(&f);
        let mut e0 = CMat::zeros(3);
        e0[(0, 0)] = C64::new(1.0, 0.0);
        let mut e1 = CMat::zeros(3);
        e1[(1, 1)] = C64::new(1.0, 0.0);
        let fam0 = measurement_family(&f, &ops, &e0);
        let fam1 = measurement_family(&f, &ops, &e1);

        // single family with weight 1 is the identity operation
        let same = combine_povm_families(&f, std::slice::from_ref(&fam0), &[1.0]).unwrap();
        for (a, b) in same.iter().zip(&fam0) {
            assert_eq!(a.values(), b.values());
        }

        // two orthogonal projectors at weight ½ reconstruct E = ½(P0 + P1)
        let combined =
            combine_povm_families(&f, &[fam0.clone(), fam1.clone()], &[0.5, 0.5]).unwrap();
        let q = reconstruct_measurement(&f, &combined).unwrap();
        let expect = e0.add(&e1).scale(C64::new(0.5, 0.0));
        let mut rebuilt = CMat::zeros(3);
        for (idx, &v) in q.values().iter().enumerate() {
            rebuilt = rebuilt.add(&ops.a_by_index(idx).scale(C64::new(v / 3.0, 0.0)));
        }
        assert!(rebuilt.max_abs_diff(&expect) < 1e-11);

        // weight validation
        assert!(matches!(
            combine_povm_families(&f, &[fam0.clone(), fam1.clone()], &[0.7, 0.5]),
            Err(Error::WeightSumExceedsOne(_))
        ));
        assert!(matches!(
            combine_povm_families(&f, &[fam0, fam1], &[0.5, -0.1]),
            Err(Error::NonPositiveWeight(_))
        ));
    }

    #[test]
    fn uniform_state_is_normalized_but_fails_purity() {
        let f = FiniteField::prime(3).unwrap();
        let family: Vec<RestrictedState> = all_striations(&f)
            .iter()
            .map(|b| restrict_state(&StateQuasi::uniform(&f), b).unwrap())
            .collect();
        let report = check_pure_state(&f, &family).unwrap();
        assert!(!report.pass);
        // 1/d² vs Σ ΓQQ = 1/d⁴·ΣΓ: the gap is (d²−1)/d⁴ scaled
        assert!(report.max_residual > 0.05);
    }
}
