//! The `d × d` discrete phase space over `F_d`: points, lines, striations,
//! and the symplectic matrices that act on them.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FiniteField};

/// A point of phase space, with horizontal (`q`) and vertical (`p`)
/// components in the same field.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct PhasePoint {
    pub q: FieldElement,
    pub p: FieldElement,
}

impl PhasePoint {
    pub fn new(q: FieldElement, p: FieldElement) -> Self {
        Self { q, p }
    }

    pub fn origin(field: &FiniteField) -> Self {
        Self::new(field.zero(), field.zero())
    }

    pub fn is_origin(&self) -> bool {
        self.q.index() == 0 && self.p.index() == 0
    }
}

/// Enumeration index of a point: `q` is the major coordinate, so for `d = 2`
/// the order is `00, 01, 10, 11`.
pub fn point_index(field: &FiniteField, pt: PhasePoint) -> usize {
    pt.q.index() * field.order() + pt.p.index()
}

pub fn point_from_index(field: &FiniteField, idx: usize) -> PhasePoint {
    let d = field.order();
    PhasePoint::new(field.element(idx / d), field.element(idx % d))
}

pub fn points(field: &FiniteField) -> impl Iterator<Item = PhasePoint> + '_ {
    let d = field.order();
    (0..d * d).map(move |i| point_from_index(field, i))
}

/// Symplectic product `⟨α, β⟩ = α_p β_q − α_q β_p`.
pub fn symplectic_product(field: &FiniteField, a: PhasePoint, b: PhasePoint) -> FieldElement {
    field.sub(field.mul(a.p, b.q), field.mul(a.q, b.p))
}

/// Slope label of a striation; the vertical striation gets a distinguished
/// label rather than a field element.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub enum Slope {
    Finite(FieldElement),
    Infinite,
}

impl Slope {
    /// Position in the canonical striation order: finite slopes in field
    /// enumeration order, then the infinite slope.
    pub fn order_index(&self, field: &FiniteField) -> usize {
        match self {
            Slope::Finite(m) => m.index(),
            Slope::Infinite => field.order(),
        }
    }

    pub fn label(&self, field: &FiniteField) -> String {
        match self {
            Slope::Finite(m) => field.fmt_element(*m),
            Slope::Infinite => "inf".to_string(),
        }
    }
}

/// The line `a·α_q + b·α_p = c` with `(a, b) ≠ (0, 0)`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Line {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
}

impl Line {
    pub fn contains(&self, field: &FiniteField, pt: PhasePoint) -> bool {
        field.add(field.mul(self.a, pt.q), field.mul(self.b, pt.p)) == self.c
    }

    /// The `d` points of the line.
    pub fn points(&self, field: &FiniteField) -> Vec<PhasePoint> {
        let mut out = Vec::with_capacity(field.order());
        if self.b != field.zero() {
            let binv = field.inv(self.b).unwrap();
            for q in field.elements() {
                let p = field.mul(binv, field.sub(self.c, field.mul(self.a, q)));
                out.push(PhasePoint::new(q, p));
            }
        } else {
            let ainv = field.inv(self.a).unwrap();
            let q = field.mul(ainv, self.c);
            for p in field.elements() {
                out.push(PhasePoint::new(q, p));
            }
        }
        out
    }
}

/// A complete set of `d` parallel lines partitioning phase space.
///
/// Line `i` of a finite-slope striation `m` is `α_p = m α_q + c_i`
/// (equivalently `(−m)α_q + α_p = c_i`); line `i` of the vertical striation
/// is `α_q = c_i`. In both cases `c_i` is the field element with index `i`,
/// so the ray (the line through the origin) always has index 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Striation {
    slope: Slope,
    lines: Vec<Line>,
}

impl Striation {
    pub fn from_slope(field: &FiniteField, slope: Slope) -> Self {
        let (a, b) = match slope {
            Slope::Finite(m) => (field.neg(m), field.one()),
            Slope::Infinite => (field.one(), field.zero()),
        };
        let lines = field.elements().map(|c| Line { a, b, c }).collect();
        Self { slope, lines }
    }

    pub fn slope(&self) -> Slope {
        self.slope
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// Index of the striation line containing the point.
    pub fn line_index(&self, field: &FiniteField, pt: PhasePoint) -> usize {
        match self.slope {
            Slope::Finite(m) => field.sub(pt.p, field.mul(m, pt.q)).index(),
            Slope::Infinite => pt.q.index(),
        }
    }

    /// The unique line of this striation through the point.
    pub fn line_through(&self, field: &FiniteField, pt: PhasePoint) -> &Line {
        &self.lines[self.line_index(field, pt)]
    }

    /// The line through the origin.
    pub fn ray(&self) -> &Line {
        &self.lines[0]
    }
}

/// All `d + 1` striations in canonical order: finite slopes in field
/// enumeration order, then the vertical (infinite-slope) striation.
pub fn all_striations(field: &FiniteField) -> Vec<Striation> {
    let mut out: Vec<Striation> = field
        .elements()
        .map(|m| Striation::from_slope(field, Slope::Finite(m)))
        .collect();
    out.push(Striation::from_slope(field, Slope::Infinite));
    out
}

/// A 2×2 matrix `[[v, x], [y, z]]` over the field with determinant 1.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct SymplecticMatrix {
    pub v: FieldElement,
    pub x: FieldElement,
    pub y: FieldElement,
    pub z: FieldElement,
}

impl SymplecticMatrix {
    pub fn identity(field: &FiniteField) -> Self {
        Self {
            v: field.one(),
            x: field.zero(),
            y: field.zero(),
            z: field.one(),
        }
    }

    pub fn det(&self, field: &FiniteField) -> FieldElement {
        field.sub(field.mul(self.v, self.z), field.mul(self.x, self.y))
    }

    pub fn apply(&self, field: &FiniteField, pt: PhasePoint) -> PhasePoint {
        PhasePoint::new(
            field.add(field.mul(self.v, pt.q), field.mul(self.x, pt.p)),
            field.add(field.mul(self.y, pt.q), field.mul(self.z, pt.p)),
        )
    }

    pub fn compose(&self, field: &FiniteField, rhs: &Self) -> Self {
        Self {
            v: field.add(field.mul(self.v, rhs.v), field.mul(self.x, rhs.y)),
            x: field.add(field.mul(self.v, rhs.x), field.mul(self.x, rhs.z)),
            y: field.add(field.mul(self.y, rhs.v), field.mul(self.z, rhs.y)),
            z: field.add(field.mul(self.y, rhs.x), field.mul(self.z, rhs.z)),
        }
    }

    pub fn inverse(&self, field: &FiniteField) -> Self {
        // det = 1, so the inverse is the adjugate.
        Self {
            v: self.z,
            x: field.neg(self.x),
            y: field.neg(self.y),
            z: self.v,
        }
    }

    fn sub_det(&self, field: &FiniteField, rhs: &Self) -> FieldElement {
        let v = field.sub(self.v, rhs.v);
        let x = field.sub(self.x, rhs.x);
        let y = field.sub(self.y, rhs.y);
        let z = field.sub(self.z, rhs.z);
        field.sub(field.mul(v, z), field.mul(x, y))
    }

    pub fn entries(&self) -> [FieldElement; 4] {
        [self.v, self.x, self.y, self.z]
    }

    pub fn label(&self, field: &FiniteField) -> String {
        format!(
            "[[{},{}],[{},{}]]",
            field.fmt_element(self.v),
            field.fmt_element(self.x),
            field.fmt_element(self.y),
            field.fmt_element(self.z)
        )
    }
}

/// Whether `det(S₁ − S₂) ≠ 0`; the defining pairwise condition of a
/// minimal reconstructing set.
pub fn difference_nonsingular(
    field: &FiniteField,
    s1: &SymplecticMatrix,
    s2: &SymplecticMatrix,
) -> bool {
    s1.sub_det(field, s2) != field.zero()
}

/// The full group of unit-determinant 2×2 matrices, in lexicographic order
/// of `(v, x, y, z)`. Its size is `d(d² − 1)` for every `d`.
pub fn symplectic_group(field: &FiniteField) -> Vec<SymplecticMatrix> {
    let mut out = Vec::new();
    for v in field.elements() {
        for x in field.elements() {
            for y in field.elements() {
                for z in field.elements() {
                    let s = SymplecticMatrix { v, x, y, z };
                    if s.det(field) == field.one() {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// The legal symplectics: every symplectic matrix for odd `d`; exactly
/// `{I, R, L}` for `d = 2` (the other three qubit symplectics correspond to
/// antiunitary maps and are excluded).
pub fn legal_symplectics(field: &FiniteField) -> Vec<SymplecticMatrix> {
    if field.characteristic() == 2 {
        let o = field.one();
        let z = field.zero();
        vec![
            SymplecticMatrix { v: o, x: z, y: z, z: o },
            SymplecticMatrix { v: z, x: o, y: o, z: o },
            SymplecticMatrix { v: o, x: o, y: o, z },
        ]
    } else {
        symplectic_group(field)
    }
}

/// Which set of symplectic matrices a framework sum ranges over.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum SetMode {
    /// All legal symplectics.
    FullGroup,
    /// A minimal reconstructing set of `d² − 1` matrices.
    Mrs,
}

/// The redundancy factor `Z`: the size of the symplectic set divided by
/// `d² − 1`. Equals `d` for odd `d` with the full group, and 1 for `d = 2`
/// or any minimal reconstructing set.
pub fn redundancy_factor(field: &FiniteField, mode: SetMode) -> usize {
    match mode {
        SetMode::Mrs => 1,
        SetMode::FullGroup => {
            if field.characteristic() == 2 {
                1
            } else {
                field.order()
            }
        }
    }
}

/// `Σ_S δ_{Sμ,ν}` over the given set; both points must be nonzero.
pub fn symplectic_orbit_count(
    field: &FiniteField,
    mu: PhasePoint,
    nu: PhasePoint,
    set: &[SymplecticMatrix],
) -> Result<usize> {
    if mu.is_origin() || nu.is_origin() {
        return Err(Error::ZeroPointArgument);
    }
    Ok(set.iter().filter(|s| s.apply(field, mu) == nu).count())
}

/// The slope of the image striation `SB`.
pub fn striation_image(field: &FiniteField, s: &SymplecticMatrix, b: Slope) -> Slope {
    let dir = match b {
        Slope::Finite(m) => PhasePoint::new(field.one(), m),
        Slope::Infinite => PhasePoint::new(field.zero(), field.one()),
    };
    let im = s.apply(field, dir);
    if im.q == field.zero() {
        Slope::Infinite
    } else {
        Slope::Finite(field.mul(im.p, field.inv(im.q).unwrap()))
    }
}

/// How line indices transform: line `c` of striation `b` maps to line
/// `λ·c` of the image striation `Sb`. Returns `(image slope, λ)`.
pub fn image_line_scale(
    field: &FiniteField,
    s: &SymplecticMatrix,
    b: Slope,
) -> (Slope, FieldElement) {
    let image = striation_image(field, s, b);
    let normal = |slope: Slope| match slope {
        Slope::Finite(m) => (field.neg(m), field.one()),
        Slope::Infinite => (field.one(), field.zero()),
    };
    let (a0, b0) = normal(b);
    let (a1, b1) = normal(image);
    // The functional n_{Sb}∘S is proportional to n_b; λ is the ratio.
    let rq = field.add(field.mul(a1, s.v), field.mul(b1, s.y));
    let rp = field.add(field.mul(a1, s.x), field.mul(b1, s.z));
    let lambda = if a0 != field.zero() {
        field.mul(rq, field.inv(a0).unwrap())
    } else {
        field.mul(rp, field.inv(b0).unwrap())
    };
    debug_assert_eq!(field.mul(lambda, a0), rq);
    debug_assert_eq!(field.mul(lambda, b0), rp);
    debug_assert!(lambda != field.zero());
    (image, lambda)
}
