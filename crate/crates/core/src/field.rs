//! Exact arithmetic in `F_{p^n}` for odd primes `p` (plus `Z_2` for the
//! qubit case), with field traces, bases and dual bases.
//!
//! Elements are stored as indices in a fixed enumeration order: the element
//! with polynomial-basis coefficients `(c_0, c_1, …, c_{n-1})` (so
//! `x = c_0 + c_1 ξ + …`) has index `c_0 p^{n-1} + c_1 p^{n-2} + … + c_{n-1}`.
//! For a prime field the index is the integer value itself. All arithmetic
//! goes through precomputed tables, so elements are plain `Copy` handles.

use std::sync::Arc;

use crate::error::{Error, Result};

/// An element of a [`FiniteField`], identified by its enumeration index.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FieldElement(pub(crate) u16);

impl FieldElement {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug)]
struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>, // inv[0] unused
}

/// The finite field `F_{p^n}` with a chosen irreducible modulus.
#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u32,
    n: u32,
    d: u32,
    modulus: Vec<u32>, // little-endian, length n+1, monic
    tables: Arc<Tables>,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.modulus == other.modulus
    }
}
impl Eq for FiniteField {}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

// --- polynomial helpers over Z_p (little-endian coefficient vectors) ---

fn poly_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - dm;
        for (k, &mk) in m.iter().enumerate() {
            let idx = shift + k;
            let sub = (lead * mk) % p;
            r[idx] = (r[idx] + p - sub) % p;
        }
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_is_zero_rem(a: &[u32], m: &[u32], p: u32) -> bool {
    poly_rem(a, m, p).is_empty()
}

/// Checks irreducibility of a monic polynomial by trial division with every
/// monic polynomial of degree `1 ..= deg/2`.
fn poly_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg == 1 {
        return true;
    }
    for k in 1..=(deg / 2) {
        // all monic polynomials of degree k
        let count = p.pow(k as u32);
        for v in 0..count {
            let mut cand = Vec::with_capacity(k + 1);
            let mut rest = v;
            for _ in 0..k {
                cand.push(rest % p);
                rest /= p;
            }
            cand.push(1);
            if poly_is_zero_rem(m, &cand, p) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically smallest monic irreducible polynomial of degree
/// `n` over `Z_p`, comparing the coefficient tuple `(c_{n-1}, …, c_0)`.
fn default_modulus(p: u32, n: u32) -> Vec<u32> {
    if n == 1 {
        return vec![0, 1]; // x
    }
    let count = p.pow(n);
    for v in 0..count {
        let mut m = vec![0u32; n as usize + 1];
        m[n as usize] = 1;
        let mut rest = v;
        for j in 0..n as usize {
            // v's least significant digit is c_0
            m[j] = rest % p;
            rest /= p;
        }
        if poly_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

impl FiniteField {
    /// Constructs `F_{p^n}`. If `modulus` (little-endian, monic, degree `n`)
    /// is omitted, the lexicographically smallest monic irreducible
    /// polynomial is chosen; for `(p, n) = (3, 2)` that is `x² + 1`.
    pub fn new(p: u32, n: u32, modulus: Option<&[u32]>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        if p == 2 && n != 1 {
            return Err(Error::UnsupportedEvenExtension);
        }
        assert!(n >= 1, "extension degree must be positive");
        let d = p
            .checked_pow(n)
            .filter(|&d| d <= u16::MAX as u32)
            .expect("field too large");
        let modulus: Vec<u32> = match modulus {
            Some(m) => {
                let mut m: Vec<u32> = m.iter().map(|&c| c % p).collect();
                poly_trim(&mut m);
                if m.len() != n as usize + 1 || *m.last().unwrap() != 1 {
                    return Err(Error::Parse(format!(
                        "modulus must be monic of degree {n}"
                    )));
                }
                if !poly_irreducible(&m, p) {
                    return Err(Error::ReducibleModulus(p));
                }
                m
            }
            None => default_modulus(p, n),
        };
        let tables = build_tables(p, n, d, &modulus);
        Ok(Self {
            p,
            n,
            d,
            modulus,
            tables: Arc::new(tables),
        })
    }

    /// The prime field `Z_p`.
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, None)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// The number of elements `d = p^n`.
    pub fn order(&self) -> usize {
        self.d as usize
    }

    /// Little-endian modulus coefficients (length `n + 1`).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_coeffs(&[1])
    }

    /// The element with the given enumeration index.
    pub fn element(&self, idx: usize) -> FieldElement {
        assert!(idx < self.d as usize, "element index out of range");
        FieldElement(idx as u16)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.d as u16).map(FieldElement)
    }

    /// Builds an element from little-endian polynomial-basis coefficients.
    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElement {
        assert!(coeffs.len() <= self.n as usize, "too many coefficients");
        let mut idx = 0u32;
        for j in 0..self.n as usize {
            let c = coeffs.get(j).copied().unwrap_or(0) % self.p;
            idx += c * self.p.pow(self.n - 1 - j as u32);
        }
        FieldElement(idx as u16)
    }

    /// Little-endian polynomial-basis coefficients of an element.
    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        let mut out = vec![0u32; self.n as usize];
        let mut rest = x.0 as u32;
        for j in (0..self.n as usize).rev() {
            out[j] = rest % self.p;
            rest /= self.p;
        }
        out
    }

    /// Embeds an integer via `k ↦ k · 1`.
    pub fn from_int(&self, k: u32) -> FieldElement {
        self.from_coeffs(&[k % self.p])
    }

    /// The integer value of a prime-subfield element, if it is one.
    pub fn as_prime_int(&self, x: FieldElement) -> Option<u32> {
        let c = self.coeffs(x);
        if c[1..].iter().all(|&v| v == 0) {
            Some(c[0])
        } else {
            None
        }
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        FieldElement(self.tables.add[x.0 as usize * self.d as usize + y.0 as usize])
    }

    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        FieldElement(self.tables.mul[x.0 as usize * self.d as usize + y.0 as usize])
    }

    pub fn neg(&self, x: FieldElement) -> FieldElement {
        FieldElement(self.tables.neg[x.0 as usize])
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement> {
        if x.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(FieldElement(self.tables.inv[x.0 as usize]))
    }

    pub fn pow(&self, x: FieldElement, mut k: u64) -> FieldElement {
        let mut base = x;
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// The multiplicative inverse of 2; requires odd characteristic.
    pub fn inv2(&self) -> FieldElement {
        assert!(self.p != 2, "division by 2 needs odd characteristic");
        self.inv(self.from_int(2)).unwrap()
    }

    pub fn frobenius(&self, x: FieldElement) -> FieldElement {
        self.pow(x, self.p as u64)
    }

    /// Absolute field trace `Tr_{F_d/F_p}(x) = x + x^p + … + x^{p^{n-1}}`
    /// as an integer in `0..p`.
    pub fn abs_trace(&self, x: FieldElement) -> u32 {
        let t = self.rel_trace(x, 1).expect("prime subfield always exists");
        self.as_prime_int(t)
            .expect("absolute trace lies in the prime subfield")
    }

    /// Relative trace onto the subfield `F_{p^s}`; requires `s | n`.
    /// The result is an element of `F_d` lying in that subfield.
    pub fn rel_trace(&self, x: FieldElement, s: u32) -> Result<FieldElement> {
        if s == 0 || self.n % s != 0 {
            return Err(Error::NotASubfield(s, self.n));
        }
        let r = (self.p as u64).pow(s);
        let mut acc = self.zero();
        let mut term = x;
        for _ in 0..(self.n / s) {
            acc = self.add(acc, term);
            term = self.pow(term, r);
        }
        Ok(acc)
    }

    /// Elements of the subfield `F_{p^s}` (the fixed points of the `s`-fold
    /// Frobenius), in enumeration order.
    pub fn subfield_elements(&self, s: u32) -> Result<Vec<FieldElement>> {
        if s == 0 || self.n % s != 0 {
            return Err(Error::NotASubfield(s, self.n));
        }
        let r = (self.p as u64).pow(s);
        let sub: Vec<FieldElement> = self
            .elements()
            .filter(|&x| self.pow(x, r) == x)
            .collect();
        debug_assert_eq!(sub.len(), (self.p as usize).pow(s));
        Ok(sub)
    }

    /// Renders an element in polynomial form, e.g. `1+2x`.
    pub fn fmt_element(&self, x: FieldElement) -> String {
        let coeffs = self.coeffs(x);
        let mut parts = Vec::new();
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let var = match j {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{j}"),
            };
            let part = if j == 0 {
                format!("{c}")
            } else if c == 1 {
                var
            } else {
                format!("{c}{var}")
            };
            parts.push(part);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }
}

fn build_tables(p: u32, n: u32, d: u32, modulus: &[u32]) -> Tables {
    let du = d as usize;
    // index <-> little-endian coefficient vector
    let to_coeffs = |idx: u32| -> Vec<u32> {
        let mut out = vec![0u32; n as usize];
        let mut rest = idx;
        for j in (0..n as usize).rev() {
            out[j] = rest % p;
            rest /= p;
        }
        out
    };
    let to_idx = |coeffs: &[u32]| -> u32 {
        let mut idx = 0u32;
        for j in 0..n as usize {
            let c = coeffs.get(j).copied().unwrap_or(0) % p;
            idx += c * p.pow(n - 1 - j as u32);
        }
        idx
    };
    let mut add = vec![0u16; du * du];
    let mut mul = vec![0u16; du * du];
    let mut neg = vec![0u16; du];
    for x in 0..d {
        let cx = to_coeffs(x);
        let negc: Vec<u32> = cx.iter().map(|&c| (p - c) % p).collect();
        neg[x as usize] = to_idx(&negc) as u16;
        for y in 0..d {
            let cy = to_coeffs(y);
            let sum: Vec<u32> = cx.iter().zip(&cy).map(|(&a, &b)| (a + b) % p).collect();
            add[x as usize * du + y as usize] = to_idx(&sum) as u16;
            let prod = poly_rem(&poly_mul(&cx, &cy, p), modulus, p);
            mul[x as usize * du + y as usize] = to_idx(&prod) as u16;
        }
    }
    let one_idx = to_idx(&[1]) as u16;
    let mut inv = vec![0u16; du];
    for x in 1..du {
        for y in 1..du {
            if mul[x * du + y] == one_idx {
                inv[x] = y as u16;
                break;
            }
        }
    }
    Tables { add, mul, neg, inv }
}

/// An ordered basis of `F_{p^n}` over a subfield `F_{p^s}`, with duality
/// defined by the relative trace.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldBasis {
    elements: Vec<FieldElement>,
    subfield_degree: u32,
}

impl FieldBasis {
    /// Checks linear independence over `F_{p^s}` by enumerating all
    /// subfield-coefficient combinations.
    pub fn new(field: &FiniteField, elements: Vec<FieldElement>, s: u32) -> Result<Self> {
        let sub = field.subfield_elements(s)?;
        let m = (field.degree() / s) as usize;
        if elements.len() != m {
            return Err(Error::NotABasis);
        }
        let mut seen = vec![false; field.order()];
        let r = sub.len();
        for combo in 0..r.pow(m as u32) {
            let mut rest = combo;
            let mut acc = field.zero();
            for e in &elements {
                let c = sub[rest % r];
                rest /= r;
                acc = field.add(acc, field.mul(c, *e));
            }
            if seen[acc.index()] {
                return Err(Error::NotABasis);
            }
            seen[acc.index()] = true;
        }
        Ok(Self {
            elements,
            subfield_degree: s,
        })
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    pub fn subfield_degree(&self) -> u32 {
        self.subfield_degree
    }

    /// The unique dual basis `{ẽ_i}` with `Tr(ẽ_i e_j) = δ_ij`, obtained by
    /// inverting the Gram matrix of the trace form over the subfield.
    pub fn dual(&self, field: &FiniteField) -> Result<FieldBasis> {
        let s = self.subfield_degree;
        let m = self.elements.len();
        // Gram matrix over the subfield, stored as F_d elements.
        let mut g = vec![field.zero(); m * m];
        for j in 0..m {
            for k in 0..m {
                g[j * m + k] =
                    field.rel_trace(field.mul(self.elements[j], self.elements[k]), s)?;
            }
        }
        let ginv = invert_matrix(field, &g, m).ok_or(Error::SingularGramMatrix)?;
        let dual: Vec<FieldElement> = (0..m)
            .map(|i| {
                let mut acc = field.zero();
                for k in 0..m {
                    acc = field.add(acc, field.mul(ginv[k * m + i], self.elements[k]));
                }
                acc
            })
            .collect();
        FieldBasis::new(field, dual, s)
    }
}

/// Inverts an `m × m` matrix with entries in the field by Gauss-Jordan
/// elimination; returns `None` if singular.
fn invert_matrix(
    field: &FiniteField,
    a: &[FieldElement],
    m: usize,
) -> Option<Vec<FieldElement>> {
    let mut work = a.to_vec();
    let mut inv: Vec<FieldElement> = (0..m * m)
        .map(|k| {
            if k / m == k % m {
                field.one()
            } else {
                field.zero()
            }
        })
        .collect();
    for col in 0..m {
        let pivot_row = (col..m).find(|&r| work[r * m + col] != field.zero())?;
        if pivot_row != col {
            for k in 0..m {
                work.swap(pivot_row * m + k, col * m + k);
                inv.swap(pivot_row * m + k, col * m + k);
            }
        }
        let pinv = field.inv(work[col * m + col]).ok()?;
        for k in 0..m {
            work[col * m + k] = field.mul(work[col * m + k], pinv);
            inv[col * m + k] = field.mul(inv[col * m + k], pinv);
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let factor = work[r * m + col];
            if factor == field.zero() {
                continue;
            }
            for k in 0..m {
                let w = field.mul(factor, work[col * m + k]);
                work[r * m + k] = field.sub(work[r * m + k], w);
                let v = field.mul(factor, inv[col * m + k]);
                inv[r * m + k] = field.sub(inv[r * m + k], v);
            }
        }
    }
    Some(inv)
}
