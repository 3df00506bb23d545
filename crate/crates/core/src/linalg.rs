//! Dense complex matrices sized for phase-space work (`d ≤ 32`).

use num_complex::Complex64 as C64;

/// A square complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            for l in 0..dim {
                m[(k, l)] = f(k, l);
            }
        }
        m
    }

    /// Builds a matrix from rows of complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "ragged rows");
            for (l, &v) in row.iter().enumerate() {
                m[(k, l)] = v;
            }
        }
        m
    }

    /// Outer product `|v⟩⟨v|` of a (not necessarily normalized) vector.
    pub fn projector(v: &[C64]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |k, l| v[k] * v[l].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for k in 0..d {
            for j in 0..d {
                let a = self.data[k * d + j];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for l in 0..d {
                    out.data[k * d + l] += a * other.data[j * d + l];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |k, l| self.data[l * d + k].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = Self::zeros(d);
        for ka in 0..da {
            for la in 0..da {
                let a = self.data[ka * da + la];
                for kb in 0..db {
                    for lb in 0..db {
                        out.data[(ka * db + kb) * d + (la * db + lb)] =
                            a * other.data[kb * db + lb];
                    }
                }
            }
        }
        out
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_prod(&self, other: &Self) -> C64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d {
            for l in 0..d {
                acc += self.data[k * d + l] * other.data[l * d + k];
            }
        }
        acc
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let d = self.dim;
        (0..d)
            .map(|k| (0..d).map(|l| self.data[k * d + l] * v[l]).sum())
            .collect()
    }

    /// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi
    /// rotations. The Hermitian part of the input is used.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let mut a = self.add(&self.dagger()).scale(C64::new(0.5, 0.0)).data;
        let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().max(1e-300);
        for _sweep in 0..60 {
            let off: f64 = (0..d)
                .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
                .map(|(p, q)| a[p * d + q].norm_sqr())
                .sum();
            if off <= 1e-30 * scale {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a[p * d + q];
                    let abs = apq.norm();
                    if abs < 1e-300 {
                        continue;
                    }
                    // diag(1, φ̄) makes the 2×2 block real; then a real
                    // Jacobi rotation kills the off-diagonal entry.
                    let phi = apq / abs;
                    let app = a[p * d + p].re;
                    let aqq = a[q * d + q].re;
                    let tau = (aqq - app) / (2.0 * abs);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // G: G[p][p]=c, G[p][q]=s, G[q][p]=−s·φ̄, G[q][q]=c·φ̄.
                    let (c, s) = (C64::new(c, 0.0), C64::new(s, 0.0));
                    let phib = phi.conj();
                    for i in 0..d {
                        let hip = a[i * d + p];
                        let hiq = a[i * d + q];
                        a[i * d + p] = hip * c - hiq * s * phib;
                        a[i * d + q] = hip * s + hiq * c * phib;
                    }
                    for i in 0..d {
                        let hpi = a[p * d + i];
                        let hqi = a[q * d + i];
                        a[p * d + i] = hpi * c - hqi * s * phi;
                        a[q * d + i] = hpi * s + hqi * c * phi;
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..d).map(|k| a[k * d + k].re).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.hermitian_eigenvalues().last().unwrap()
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (k, l): (usize, usize)) -> &C64 {
        &self.data[k * self.dim + l]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (k, l): (usize, usize)) -> &mut C64 {
        let d = self.dim;
        &mut self.data[k * d + l]
    }
}

/// The 2×2 Pauli matrices `(I, X, Y, Z)`.
pub fn paulis() -> [CMat; 4] {
    let i = C64::new(0.0, 1.0);
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    [
        CMat::from_rows(&[vec![o, z], vec![z, o]]),
        CMat::from_rows(&[vec![z, o], vec![o, z]]),
        CMat::from_rows(&[vec![z, -i], vec![i, z]]),
        CMat::from_rows(&[vec![o, z], vec![z, -o]]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes_pauli_x() {
        let [_, x, _, _] = paulis();
        let eigs = x.hermitian_eigenvalues();
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_construction() {
        // H = V D V† for a hand-built unitary V.
        let s = 1.0 / 2.0_f64.sqrt();
        let v = CMat::from_rows(&[
            vec![C64::new(s, 0.0), C64::new(0.0, s)],
            vec![C64::new(0.0, s), C64::new(s, 0.0)],
        ]);
        let d = CMat::from_rows(&[
            vec![C64::new(-3.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(7.0, 0.0)],
        ]);
        let h = v.matmul(&d).matmul(&v.dagger());
        let eigs = h.hermitian_eigenvalues();
        assert!((eigs[0] + 3.0).abs() < 1e-10);
        assert!((eigs[1] - 7.0).abs() < 1e-10);
    }

    #[test]
    fn kron_block_structure() {
        let [_, x, _, z] = paulis();
        let xz = x.kron(&z);
        assert_eq!(xz.dim(), 4);
        assert!((xz[(0, 2)].re - 1.0).abs() < 1e-15);
        assert!((xz[(1, 3)].re + 1.0).abs() < 1e-15);
        assert!((xz[(2, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_prod_agrees_with_matmul() {
        let [_, x, y, z] = paulis();
        let m = x.add(&y.scale(C64::new(0.0, 0.5)));
        let t1 = m.trace_prod(&z);
        let t2 = m.matmul(&z).trace();
        assert!((t1 - t2).norm() < 1e-14);
    }
}
