//! Hilbert-space operators of the phase-space formalism: phase-point
//! operators `A_α`, displacement operators `D_δ`, symplectic unitaries
//! `U_S`, Kraus channels, and validity checks.
//!
//! Matrix indices `k, l` range over field elements in enumeration order.
//! All `ω` exponents are computed exactly in the field (division by 2 is
//! multiplication by `inv(2)` in `Z_p`) and only then exponentiated; the
//! root of unity is `ω = e^{2πi/p}` with the absolute field trace in the
//! exponent for extension fields.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FiniteField};
use crate::linalg::{paulis, CMat};
use crate::phase::{
    legal_symplectics, point_from_index, point_index, symplectic_product, Line, PhasePoint,
    SymplecticMatrix,
};

/// Cached operator tables for one field: the `d²` phase-point operators
/// plus constructors for displacements and symplectic unitaries.
///
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct PhaseOps {
    field: FiniteField,
    d: usize,
    omega: Vec<C64>,
    a_ops: Vec<CMat>,
}

impl PhaseOps {
    pub fn new(field: &FiniteField) -> Self {
        let d = field.order();
        let p = field.characteristic() as usize;
        let omega: Vec<C64> = (0..p)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / p as f64;
                C64::new(theta.cos(), theta.sin())
            })
            .collect();
        let mut ops = Self {
            field: field.clone(),
            d,
            omega,
            a_ops: Vec::new(),
        };
        ops.a_ops = (0..d * d)
            .map(|idx| ops.build_a(point_from_index(field, idx)))
            .collect();
        ops
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `ω^{Tr(x)}` for a field element exponent.
    pub fn phase(&self, x: FieldElement) -> C64 {
        self.omega[self.field.abs_trace(x) as usize]
    }

    /// The phase-point operator `A_α`.
    pub fn a(&self, alpha: PhasePoint) -> &CMat {
        &self.a_ops[point_index(&self.field, alpha)]
    }

    pub fn a_by_index(&self, idx: usize) -> &CMat {
        &self.a_ops[idx]
    }

    fn build_a(&self, alpha: PhasePoint) -> CMat {
        let f = &self.field;
        if f.characteristic() == 2 {
            // A_α = ½ [I + (−1)^{α_p} X + (−1)^{α_q+α_p} Y + (−1)^{α_q} Z]
            let [i, x, y, z] = paulis();
            let sq = if alpha.q.index() == 0 { 1.0 } else { -1.0 };
            let sp = if alpha.p.index() == 0 { 1.0 } else { -1.0 };
            let half = C64::new(0.5, 0.0);
            return i
                .add(&x.scale(C64::new(sp, 0.0)))
                .add(&y.scale(C64::new(sq * sp, 0.0)))
                .add(&z.scale(C64::new(sq, 0.0)))
                .scale(half);
        }
        // (A_α)_{kl} = δ_{2α_q, k+l} ω^{Tr[α_p (k−l)]}
        let two_q = f.mul(f.from_int(2), alpha.q);
        CMat::from_fn(self.d, |ki, li| {
            let k = f.element(ki);
            let l = f.element(li);
            if f.add(k, l) != two_q {
                return C64::new(0.0, 0.0);
            }
            self.phase(f.mul(alpha.p, f.sub(k, l)))
        })
    }

    /// The displacement operator `D_δ`, satisfying
    /// `D_δ A_α D_δ† = A_{α+δ}`.
    pub fn displacement(&self, delta: PhasePoint) -> CMat {
        let f = &self.field;
        if f.characteristic() == 2 {
            // D_δ = X^{δ_q} Z^{δ_p}
            return CMat::from_fn(2, |ki, li| {
                let k = f.element(ki);
                let l = f.element(li);
                if k != f.add(l, delta.q) {
                    return C64::new(0.0, 0.0);
                }
                self.phase(f.mul(delta.p, l))
            });
        }
        // D_δ = ω^{δ_q δ_p / 2} X^{δ_q} Z^{δ_p}; for extension fields this
        // equals the tensor product of per-particle displacements.
        let half_qp = f.mul(f.inv2(), f.mul(delta.q, delta.p));
        CMat::from_fn(self.d, |ki, li| {
            let k = f.element(ki);
            let l = f.element(li);
            if k != f.add(l, delta.q) {
                return C64::new(0.0, 0.0);
            }
            self.phase(f.add(half_qp, f.mul(delta.p, l)))
        })
    }

    /// The unitary `U_S` with `U_S A_α U_S† = A_{Sα}`, without metaplectic
    /// phase corrections (all uses here are conjugations).
    pub fn symplectic_unitary(&self, s: &SymplecticMatrix) -> Result<CMat> {
        let f = &self.field;
        if f.characteristic() == 2 {
            let legal = legal_symplectics(f);
            let r = 1.0 / 2.0_f64.sqrt();
            let (o, i) = (C64::new(r, 0.0), C64::new(0.0, r));
            if *s == legal[0] {
                return Ok(CMat::identity(2));
            } else if *s == legal[1] {
                return Ok(CMat::from_rows(&[vec![o, o], vec![i, -i]]));
            } else if *s == legal[2] {
                return Ok(CMat::from_rows(&[vec![o, -i], vec![o, i]]));
            }
            return Err(Error::IllegalSymplectic);
        }
        if s.det(f) != f.one() {
            return Err(Error::IllegalSymplectic);
        }
        let two = f.from_int(2);
        if s.x != f.zero() {
            // (U_S)_{kl} = (1/√d) ω^{(v l² − 2kl + z k²)/(2x)}
            let inv_2x = f.inv(f.mul(two, s.x)).unwrap();
            let scale = 1.0 / (self.d as f64).sqrt();
            Ok(CMat::from_fn(self.d, |ki, li| {
                let k = f.element(ki);
                let l = f.element(li);
                let quad = f.add(
                    f.sub(f.mul(s.v, f.mul(l, l)), f.mul(two, f.mul(k, l))),
                    f.mul(s.z, f.mul(k, k)),
                );
                self.phase(f.mul(inv_2x, quad)) * scale
            }))
        } else {
            // (U_S)_{kl} = δ_{k, vl} ω^{v y l² / 2}
            let half_vy = f.mul(f.inv2(), f.mul(s.v, s.y));
            Ok(CMat::from_fn(self.d, |ki, li| {
                let k = f.element(ki);
                let l = f.element(li);
                if k != f.mul(s.v, l) {
                    return C64::new(0.0, 0.0);
                }
                self.phase(f.mul(half_vy, f.mul(l, l)))
            }))
        }
    }

    /// `A_α` rebuilt from the displacement operators,
    /// `A_α = (1/d) Σ_δ ω^{⟨α,δ⟩} D_δ`; an independent route used to
    /// cross-check the direct construction. Odd `d` only.
    pub fn a_from_displacements(&self, alpha: PhasePoint) -> Result<CMat> {
        let f = &self.field;
        if f.characteristic() == 2 {
            return Err(Error::UnsupportedDimension(2));
        }
        let mut acc = CMat::zeros(self.d);
        for idx in 0..self.d * self.d {
            let delta = point_from_index(f, idx);
            let w = self.phase(symplectic_product(f, alpha, delta));
            acc = acc.add(&self.displacement(delta).scale(w));
        }
        Ok(acc.scale(C64::new(1.0 / self.d as f64, 0.0)))
    }

    /// `(1/d) Σ_{α∈ℓ} A_α`, the rank-1 projector onto the line state.
    pub fn line_projector(&self, line: &Line) -> CMat {
        let mut acc = CMat::zeros(self.d);
        for pt in line.points(&self.field) {
            acc = acc.add(self.a(pt));
        }
        acc.scale(C64::new(1.0 / self.d as f64, 0.0))
    }

    /// Max entrywise deviation of `Σ_γ A_γ M A_γ` from `d (tr M) I`.
    pub fn sandwich_identity_deviation(&self, m: &CMat) -> f64 {
        let mut lhs = CMat::zeros(self.d);
        for a in &self.a_ops {
            lhs = lhs.add(&a.matmul(m).matmul(a));
        }
        let rhs = CMat::identity(self.d).scale(m.trace() * self.d as f64);
        lhs.max_abs_diff(&rhs)
    }
}

/// A channel given by its Kraus operators.
#[derive(Debug, Clone)]
pub struct Channel {
    pub kraus: Vec<CMat>,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Self {
        assert!(!kraus.is_empty(), "a channel needs at least one Kraus term");
        Self { kraus }
    }

    pub fn unitary(u: &CMat) -> Self {
        Self::new(vec![u.clone()])
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    pub fn apply(&self, w: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim());
        for b in &self.kraus {
            out = out.add(&b.matmul(w).matmul(&b.dagger()));
        }
        out
    }

    /// `max |Σ B†B − I|`: trace preservation.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim();
        let mut acc = CMat::zeros(d);
        for b in &self.kraus {
            acc = acc.add(&b.dagger().matmul(b));
        }
        acc.max_abs_diff(&CMat::identity(d))
    }

    /// `max |Σ B B† − I|`: unitality.
    pub fn unitality_deviation(&self) -> f64 {
        let d = self.dim();
        let mut acc = CMat::zeros(d);
        for b in &self.kraus {
            acc = acc.add(&b.matmul(&b.dagger()));
        }
        acc.max_abs_diff(&CMat::identity(d))
    }
}

/// A named condition violation found by [`validate_state`] and friends.
#[derive(Debug, Clone)]
pub struct Violation {
    pub condition: String,
    pub magnitude: f64,
}

/// Validation result: the violated conditions with their magnitudes.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub kind: &'static str,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn new(kind: &'static str, tolerance: f64) -> Self {
        Self {
            kind,
            tolerance,
            violations: Vec::new(),
        }
    }

    fn check(&mut self, condition: &str, magnitude: f64) {
        if magnitude > self.tolerance {
            self.violations.push(Violation {
                condition: condition.to_string(),
                magnitude,
            });
        }
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Hermitian, unit trace, positive semidefinite.
pub fn validate_state(w: &CMat, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("state", tol);
    report.check("hermitian", w.hermiticity_deviation());
    report.check("unit-trace", (w.trace() - C64::new(1.0, 0.0)).norm());
    report.check("positive-semidefinite", (-w.min_eigenvalue()).max(0.0));
    report
}

/// Kraus completeness and unitality.
pub fn validate_channel(ch: &Channel, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("channel", tol);
    report.check("kraus-completeness", ch.completeness_deviation());
    report.check("unital", ch.unitality_deviation());
    report
}

/// `0 ≤ E ≤ I`.
pub fn validate_povm_element(e: &CMat, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("povm-element", tol);
    report.check("hermitian", e.hermiticity_deviation());
    let eigs = e.hermitian_eigenvalues();
    report.check("positive-semidefinite", (-eigs[0]).max(0.0));
    report.check("bounded-by-identity", (eigs[eigs.len() - 1] - 1.0).max(0.0));
    report
}

pub fn validate_unitary(u: &CMat, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("unitary", tol);
    let id = CMat::identity(u.dim());
    report.check("unitary", u.dagger().matmul(u).max_abs_diff(&id));
    report
}
