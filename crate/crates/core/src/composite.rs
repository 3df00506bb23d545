//! Multi-particle structure over `F_{r^n}`: per-particle phase-space
//! coordinates through a basis and its dual, tensor factorization of the
//! phase-point operators, and partial traces at the Wigner and restricted
//! levels.
//!
//! The horizontal coordinate expands in a chosen basis `{e_j}` over the
//! base field, the vertical coordinate in the dual basis `{ẽ_j}` (duality
//! relative to the trace onto the base field). With these coordinates the
//! phase-point operators factor, `A_α = A_{α_1} ⊗ ⋯ ⊗ A_{α_n}`, and the
//! partial trace over particles `2..n` becomes a plain coordinate sum.
//! Keeping a particle other than the first is done by permuting the basis
//! so that particle comes first.

use crate::error::{Error, Result};
use crate::field::{FieldBasis, FieldElement, FiniteField};
use crate::linalg::CMat;
use crate::ops::PhaseOps;
use crate::phase::{
    all_striations, point_from_index, point_index, PhasePoint, Slope, Striation,
};
use crate::quasi::StateQuasi;
use crate::restricted::RestrictedState;

/// How a striation of the large phase space behaves under the partial
/// trace onto particle 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlopeClass {
    /// The striation's ray projects to the single-particle ray with this
    /// slope; the striation contributes to the single-particle family.
    MapsTo(Slope),
    /// The striation's ray covers the small phase space uniformly; its
    /// nonrandom part vanishes after the trace.
    UniformCovering,
}

/// A factorization of `F_{r^n}` phase space into `n` particles of
/// dimension `r`, with all coordinate tables precomputed.
#[derive(Debug, Clone)]
pub struct ParticleDecomposition {
    ext: FiniteField,
    base: FiniteField,
    parts: usize,
    q_basis: Vec<FieldElement>,
    p_basis: Vec<FieldElement>,
    /// q/p expansion coefficients (as base-field elements) per ext element.
    q_coords: Vec<Vec<FieldElement>>,
    p_coords: Vec<Vec<FieldElement>>,
    /// Embedding of the base field into the subfield of `ext`.
    from_base: Vec<FieldElement>,
}

impl ParticleDecomposition {
    /// Decomposes `ext = F_{p^{s·n}}` into `n` particles over `F_{p^s}`.
    /// `q_basis` defaults to the power basis `(1, ξ, …, ξ^{n-1})`, which
    /// for the absolute case `s = 1` is the polynomial basis.
    pub fn new(
        ext: &FiniteField,
        s: u32,
        q_basis: Option<Vec<FieldElement>>,
    ) -> Result<Self> {
        let p = ext.characteristic();
        let big_n = ext.degree();
        if s == 0 || big_n % s != 0 {
            return Err(Error::NotASubfield(s, big_n));
        }
        let parts = (big_n / s) as usize;
        let base = FiniteField::new(p, s, None)?;

        // Embed the standalone base field: find the smallest root of its
        // modulus inside ext, then map polynomials in the generator.
        let eta = {
            let modulus = base.modulus().to_vec();
            ext.elements()
                .find(|&x| {
                    let mut acc = ext.zero();
                    let mut pw = ext.one();
                    for &c in &modulus {
                        acc = ext.add(acc, ext.mul(ext.from_int(c), pw));
                        pw = ext.mul(pw, x);
                    }
                    acc == ext.zero()
                })
                .expect("the base modulus splits in the extension")
        };
        let from_base: Vec<FieldElement> = base
            .elements()
            .map(|b| {
                let coeffs = base.coeffs(b);
                let mut acc = ext.zero();
                let mut pw = ext.one();
                for &c in &coeffs {
                    acc = ext.add(acc, ext.mul(ext.from_int(c), pw));
                    pw = ext.mul(pw, eta);
                }
                acc
            })
            .collect();

        let q_basis = match q_basis {
            Some(b) => b,
            None => {
                let mut out = Vec::with_capacity(parts);
                let mut pw = ext.one();
                for j in 0..parts {
                    out.push(pw);
                    if j + 1 < parts {
                        let xi = ext.from_coeffs(&[0, 1]);
                        pw = ext.mul(pw, xi);
                    }
                }
                out
            }
        };
        let basis = FieldBasis::new(ext, q_basis.clone(), s)?;
        let p_basis = basis.dual(ext)?.elements().to_vec();

        let q_coords = expansion_table(ext, &base, &from_base, &q_basis, parts)?;
        let p_coords = expansion_table(ext, &base, &from_base, &p_basis, parts)?;

        Ok(Self {
            ext: ext.clone(),
            base,
            parts,
            q_basis,
            p_basis,
            q_coords,
            p_coords,
            from_base,
        })
    }

    pub fn extension(&self) -> &FiniteField {
        &self.ext
    }

    /// The standalone single-particle field `F_r`.
    pub fn base(&self) -> &FiniteField {
        &self.base
    }

    pub fn particles(&self) -> usize {
        self.parts
    }

    pub fn q_basis(&self) -> &[FieldElement] {
        &self.q_basis
    }

    pub fn p_basis(&self) -> &[FieldElement] {
        &self.p_basis
    }

    /// Per-particle phase-space coordinates `(α_{qj}, α_{pj})`.
    pub fn particle_coords(&self, alpha: PhasePoint) -> Vec<PhasePoint> {
        let q = &self.q_coords[alpha.q.index()];
        let p = &self.p_coords[alpha.p.index()];
        (0..self.parts)
            .map(|j| PhasePoint::new(q[j], p[j]))
            .collect()
    }

    /// Inverse of [`Self::particle_coords`].
    pub fn point_from_coords(&self, coords: &[PhasePoint]) -> PhasePoint {
        assert_eq!(coords.len(), self.parts);
        let mut q = self.ext.zero();
        let mut p = self.ext.zero();
        for (j, c) in coords.iter().enumerate() {
            q = self
                .ext
                .add(q, self.ext.mul(self.from_base[c.q.index()], self.q_basis[j]));
            p = self
                .ext
                .add(p, self.ext.mul(self.from_base[c.p.index()], self.p_basis[j]));
        }
        PhasePoint::new(q, p)
    }

    /// The ext element whose q-coordinates are the given per-particle
    /// values; used to map Hilbert indices to tensor indices.
    pub fn q_from_coords(&self, coords: &[FieldElement]) -> FieldElement {
        let mut q = self.ext.zero();
        for (j, c) in coords.iter().enumerate() {
            q = self
                .ext
                .add(q, self.ext.mul(self.from_base[c.index()], self.q_basis[j]));
        }
        q
    }

    /// Classifies a striation of the big phase space for the partial trace
    /// onto particle 1: expand `e_1·m` in the dual basis and inspect the
    /// coefficients beyond the first.
    pub fn classify_slope(&self, slope: Slope) -> SlopeClass {
        match slope {
            Slope::Infinite => SlopeClass::MapsTo(Slope::Infinite),
            Slope::Finite(m) => {
                let e1m = self.ext.mul(self.q_basis[0], m);
                let coeffs = &self.p_coords[e1m.index()];
                if coeffs[1..].iter().all(|c| c.index() == 0) {
                    SlopeClass::MapsTo(Slope::Finite(coeffs[0]))
                } else {
                    SlopeClass::UniformCovering
                }
            }
        }
    }
}

fn expansion_table(
    ext: &FiniteField,
    base: &FiniteField,
    from_base: &[FieldElement],
    basis: &[FieldElement],
    parts: usize,
) -> Result<Vec<Vec<FieldElement>>> {
    let r = base.order();
    let d = ext.order();
    let mut table: Vec<Option<Vec<FieldElement>>> = vec![None; d];
    for combo in 0..r.pow(parts as u32) {
        let mut rest = combo;
        let mut coords = Vec::with_capacity(parts);
        let mut acc = ext.zero();
        for e in basis.iter() {
            let c = base.element(rest % r);
            rest /= r;
            coords.push(c);
            acc = ext.add(acc, ext.mul(from_base[c.index()], *e));
        }
        if table[acc.index()].is_some() {
            return Err(Error::NotABasis);
        }
        table[acc.index()] = Some(coords);
    }
    Ok(table.into_iter().map(|t| t.unwrap()).collect())
}

/// Max deviation of `A_α` from `A_{α_1} ⊗ ⋯ ⊗ A_{α_n}` over all of phase
/// space; odd characteristic only.
pub fn factorization_check(dec: &ParticleDecomposition) -> Result<f64> {
    let ext = dec.extension();
    if ext.characteristic() == 2 {
        return Err(Error::UnsupportedDimension(2));
    }
    let big = PhaseOps::new(ext);
    let small = PhaseOps::new(dec.base());
    let d = ext.order();
    let mut worst = 0.0f64;
    for idx in 0..d * d {
        let alpha = point_from_index(ext, idx);
        let coords = dec.particle_coords(alpha);
        let a = big.a(alpha);
        for ki in 0..d {
            let kc = &dec.q_coords[ki];
            for li in 0..d {
                let lc = &dec.q_coords[li];
                let mut prod = num_complex::Complex64::new(1.0, 0.0);
                for j in 0..dec.particles() {
                    prod *= small.a(coords[j])[(kc[j].index(), lc[j].index())];
                }
                worst = worst.max((a[(ki, li)] - prod).norm());
            }
        }
    }
    Ok(worst)
}

/// Wigner function of the first particle:
/// `Q(α₁|w₁) = Σ_{α_2..α_n} Q(α|w)`.
pub fn partial_trace_wigner(dec: &ParticleDecomposition, q: &StateQuasi) -> StateQuasi {
    let ext = dec.extension();
    let base = dec.base();
    let r = base.order();
    let mut out = vec![0.0; r * r];
    for (idx, &v) in q.values().iter().enumerate() {
        let coords = dec.particle_coords(point_from_index(ext, idx));
        out[point_index(base, coords[0])] += v;
    }
    StateQuasi::from_values(base, out)
}

/// Partial trace of a complete restricted family: only the `r + 1`
/// striations whose rays project to single-particle rays contribute; each
/// maps by [`ParticleDecomposition::classify_slope`], and their summed
/// distributions form the complete single-particle family.
pub fn partial_trace_restricted(
    dec: &ParticleDecomposition,
    family: &[RestrictedState],
) -> Result<Vec<RestrictedState>> {
    let ext = dec.extension();
    let base = dec.base();
    let d = ext.order();
    let r = base.order();
    if family.len() != d + 1 {
        return Err(Error::IncompleteFamily(format!(
            "expected {} striations, got {}",
            d + 1,
            family.len()
        )));
    }
    let mut out: Vec<Option<RestrictedState>> = vec![None; r + 1];
    for rb in family {
        let target = match dec.classify_slope(rb.slope()) {
            SlopeClass::UniformCovering => continue,
            SlopeClass::MapsTo(slope) => slope,
        };
        let mut values = vec![0.0; r * r];
        for (idx, &v) in rb.values().iter().enumerate() {
            let coords = dec.particle_coords(point_from_index(ext, idx));
            values[point_index(base, coords[0])] += v;
        }
        let slot = target.order_index(base);
        if out[slot].is_some() {
            return Err(Error::IncompleteFamily(format!(
                "two striations project to slope {}",
                target.label(base)
            )));
        }
        out[slot] = Some(RestrictedState::from_values(base, target, values));
    }
    out.into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.ok_or_else(|| {
                Error::IncompleteFamily(format!("no striation projects to slope index {i}"))
            })
        })
        .collect()
}

/// Hilbert-space partial trace onto particle 1 in the decomposition's
/// tensor structure; the oracle for the phase-space routes.
pub fn hilbert_partial_trace(dec: &ParticleDecomposition, w: &CMat) -> CMat {
    let ext = dec.extension();
    let base = dec.base();
    let r = base.order();
    let parts = dec.particles();
    let rest_count = (r as u64).pow(parts as u32 - 1) as usize;
    let mut out = CMat::zeros(r);
    for k1 in 0..r {
        for l1 in 0..r {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for rest in 0..rest_count {
                let mut kc = Vec::with_capacity(parts);
                kc.push(base.element(k1));
                let mut rr = rest;
                for _ in 1..parts {
                    kc.push(base.element(rr % r));
                    rr /= r;
                }
                let mut lc = kc.clone();
                lc[0] = base.element(l1);
                let ki = dec.q_from_coords(&kc).index();
                let li = dec.q_from_coords(&lc).index();
                let _ = ext;
                acc += w[(ki, li)];
            }
            out[(k1, l1)] = acc;
        }
    }
    out
}

/// Striations of the big space that contribute to the single-particle
/// family, with their images.
pub fn contributing_striations(dec: &ParticleDecomposition) -> Vec<(Striation, Slope)> {
    all_striations(dec.extension())
        .into_iter()
        .filter_map(|b| match dec.classify_slope(b.slope()) {
            SlopeClass::MapsTo(slope) => Some((b, slope)),
            SlopeClass::UniformCovering => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::PhaseOps;
    use crate::quasi::wigner_of_state;
    use crate::restricted::restrict_state;
    use crate::sampling;

    fn two_qutrits() -> ParticleDecomposition {
        let f9 = FiniteField::new(3, 2, None).unwrap();
        ParticleDecomposition::new(&f9, 1, None).unwrap()
    }

    #[test]
    fn spec_coordinate_example() {
        let dec = two_qutrits();
        let ext = dec.extension();
        // α = (1 + ξ, 2): q-coords (1, 1), p-coords (1, 0) since the dual
        // basis is (2, ξ) and 2 = 1·2 + 0·ξ
        let alpha = PhasePoint::new(ext.from_coeffs(&[1, 1]), ext.from_int(2));
        let coords = dec.particle_coords(alpha);
        let b = dec.base();
        assert_eq!(coords[0], PhasePoint::new(b.element(1), b.element(1)));
        assert_eq!(coords[1], PhasePoint::new(b.element(1), b.element(0)));
        // dual basis is (2, ξ)
        assert_eq!(dec.p_basis()[0], ext.from_int(2));
        assert_eq!(dec.p_basis()[1], ext.from_coeffs(&[0, 1]));
    }

    #[test]
    fn coordinate_round_trip() {
        for (p, n, s) in [(3u32, 2u32, 1u32), (3, 3, 1), (5, 2, 1)] {
            let ext = FiniteField::new(p, n, None).unwrap();
            let dec = ParticleDecomposition::new(&ext, s, None).unwrap();
            for idx in 0..ext.order() * ext.order() {
                let alpha = point_from_index(&ext, idx);
                let coords = dec.particle_coords(alpha);
                assert_eq!(dec.point_from_coords(&coords), alpha);
            }
        }
    }

    #[test]
    fn origin_maps_to_origins() {
        let dec = two_qutrits();
        let ext = dec.extension();
        let coords = dec.particle_coords(PhasePoint::origin(ext));
        assert!(coords.iter().all(|c| c.is_origin()));
    }

    #[test]
    fn factorization_two_qutrits() {
        let dec = two_qutrits();
        assert!(factorization_check(&dec).unwrap() < 1e-12);
    }

    #[test]
    fn factorization_single_particle() {
        let f3 = FiniteField::prime(3).unwrap();
        let dec = ParticleDecomposition::new(&f3, 1, None).unwrap();
        assert_eq!(dec.particles(), 1);
        assert!(factorization_check(&dec).unwrap() < 1e-15);
    }

    #[test]
    fn slope_classification_examples() {
        let dec = two_qutrits();
        let ext = dec.extension();
        // m = 2 maps to the single-particle slope 1
        assert_eq!(
            dec.classify_slope(Slope::Finite(ext.from_int(2))),
            SlopeClass::MapsTo(Slope::Finite(dec.base().element(1)))
        );
        // the vertical striation stays vertical
        assert_eq!(
            dec.classify_slope(Slope::Infinite),
            SlopeClass::MapsTo(Slope::Infinite)
        );
        // m = ξ covers the small space uniformly
        assert_eq!(
            dec.classify_slope(Slope::Finite(ext.from_coeffs(&[0, 1]))),
            SlopeClass::UniformCovering
        );
    }

    #[test]
    fn exactly_r_plus_one_striations_contribute() {
        for (p, n) in [(3u32, 2u32), (3, 3)] {
            let ext = FiniteField::new(p, n, None).unwrap();
            let dec = ParticleDecomposition::new(&ext, 1, None).unwrap();
            let contributing = contributing_striations(&dec);
            assert_eq!(contributing.len(), p as usize + 1);
            let mut seen: Vec<usize> = contributing
                .iter()
                .map(|(_, slope)| slope.order_index(dec.base()))
                .collect();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), p as usize + 1);
        }
    }

    #[test]
    fn ray_covering_multiplicities() {
        // contributing striations hit each small-space ray point r^{n-1}
        // times; uniform-covering striations hit every point r^{n-2} times
        let dec = two_qutrits();
        let ext = dec.extension();
        let base = dec.base();
        let r = base.order();
        for b in all_striations(ext) {
            let ray = b.ray();
            let mut counts = vec![0usize; r * r];
            for pt in ray.points(ext) {
                let c = dec.particle_coords(pt);
                counts[point_index(base, c[0])] += 1;
            }
            match dec.classify_slope(b.slope()) {
                SlopeClass::MapsTo(slope) => {
                    let small_ray = Striation::from_slope(base, slope);
                    for (idx, &count) in counts.iter().enumerate() {
                        let on_ray = small_ray.ray().contains(base, point_from_index(base, idx));
                        // r^{n-1} = 3 hits per ray point
                        assert_eq!(count, if on_ray { 3 } else { 0 });
                    }
                }
                SlopeClass::UniformCovering => {
                    assert!(counts.iter().all(|&c| c == 1)); // r^{n-2} = 1
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let dec = two_qutrits();
        let ext = dec.extension();
        let ops9 = PhaseOps::new(ext);
        let ops3 = PhaseOps::new(dec.base());
        let mut rng = sampling::rng(5);
        let w1 = sampling::random_state(3, &mut rng);
        let w2 = sampling::random_state(3, &mut rng);
        let w = w1.kron(&w2);
        let q = wigner_of_state(&ops9, &w).unwrap();
        let q1 = partial_trace_wigner(&dec, &q);
        let expect = wigner_of_state(&ops3, &w1).unwrap();
        for (a, b) in q1.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_hilbert_oracle() {
        let dec = two_qutrits();
        let ext = dec.extension();
        let ops9 = PhaseOps::new(ext);
        let ops3 = PhaseOps::new(dec.base());
        let mut rng = sampling::rng(17);
        for _ in 0..10 {
            let w = sampling::random_state(9, &mut rng);
            let q = wigner_of_state(&ops9, &w).unwrap();
            let q1 = partial_trace_wigner(&dec, &q);
            let w1 = hilbert_partial_trace(&dec, &w);
            let expect = wigner_of_state(&ops3, &w1).unwrap();
            for (a, b) in q1.values().iter().zip(expect.values()) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn restricted_partial_trace_matches_oracle() {
        let dec = two_qutrits();
        let ext = dec.extension();
        let base = dec.base();
        let ops9 = PhaseOps::new(ext);
        let ops3 = PhaseOps::new(base);
        let mut rng = sampling::rng(29);
        for _ in 0..5 {
            let w = sampling::random_state(9, &mut rng);
            let q = wigner_of_state(&ops9, &w).unwrap();
            let family: Vec<RestrictedState> = all_striations(ext)
                .iter()
                .map(|b| restrict_state(&q, b).unwrap())
                .collect();
            let small_family = partial_trace_restricted(&dec, &family).unwrap();

            let w1 = hilbert_partial_trace(&dec, &w);
            let q1 = wigner_of_state(&ops3, &w1).unwrap();
            for small in &small_family {
                let b1 = Striation::from_slope(base, small.slope());
                let expect = restrict_state(&q1, &b1).unwrap();
                for (a, b) in small.values().iter().zip(expect.values()) {
                    assert!((a - b).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn uniform_covering_striations_trace_to_uniform() {
        let dec = two_qutrits();
        let ext = dec.extension();
        let base = dec.base();
        let ops9 = PhaseOps::new(ext);
        let mut rng = sampling::rng(31);
        let w = sampling::random_state(9, &mut rng);
        let q = wigner_of_state(&ops9, &w).unwrap();
        let r = base.order();
        for b in all_striations(ext) {
            if dec.classify_slope(b.slope()) != SlopeClass::UniformCovering {
                continue;
            }
            let rb = restrict_state(&q, &b).unwrap();
            let mut values = vec![0.0; r * r];
            for (idx, &v) in rb.values().iter().enumerate() {
                let coords = dec.particle_coords(point_from_index(ext, idx));
                values[point_index(base, coords[0])] += v;
            }
            for v in values {
                assert!((v - 1.0 / (r * r) as f64).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn three_qutrit_tower() {
        let ext = FiniteField::new(3, 3, None).unwrap();
        let dec = ParticleDecomposition::new(&ext, 1, None).unwrap();
        assert_eq!(dec.particles(), 3);
        let ops27 = PhaseOps::new(&ext);
        let ops3 = PhaseOps::new(dec.base());
        let mut rng = sampling::rng(41);
        // product of three random qutrit states
        let w1 = sampling::random_state(3, &mut rng);
        let w2 = sampling::random_state(3, &mut rng);
        let w3 = sampling::random_state(3, &mut rng);
        let w = w1.kron(&w2).kron(&w3);
        let q = wigner_of_state(&ops27, &w).unwrap();
        let q1 = partial_trace_wigner(&dec, &q);
        let expect = wigner_of_state(&ops3, &w1).unwrap();
        for (a, b) in q1.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        let w1_oracle = hilbert_partial_trace(&dec, &w);
        assert!(w1_oracle.max_abs_diff(&w1) < 1e-12);
    }

    #[test]
    fn keep_other_particle_by_basis_permutation() {
        let f9 = FiniteField::new(3, 2, None).unwrap();
        let xi = f9.from_coeffs(&[0, 1]);
        // swapping the basis makes particle 2 first
        let dec_swapped = ParticleDecomposition::new(&f9, 1, Some(vec![xi, f9.one()])).unwrap();
        let ops9 = PhaseOps::new(&f9);
        let ops3 = PhaseOps::new(dec_swapped.base());
        let mut rng = sampling::rng(53);
        let w1 = sampling::random_state(3, &mut rng);
        let w2 = sampling::random_state(3, &mut rng);
        let w = w1.kron(&w2);
        let q = wigner_of_state(&ops9, &w).unwrap();
        let q2 = partial_trace_wigner(&dec_swapped, &q);
        let expect = wigner_of_state(&ops3, &w2).unwrap();
        for (a, b) in q2.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
