//! Dense complex matrices and the scalar measures used throughout the crate.
//!
//! [`ComplexMatrix`] is a row-major `n_rows × n_cols` array of [`C64`]. Besides the
//! usual products and norms it provides
//!
//! * the trace-deflated Frobenius norm `δ(M) = (‖M‖_F² − |tr M|²/n)^{1/2}` ([`ComplexMatrix::delta`]),
//! * the diagonal / strictly-lower / strictly-upper partition ([`ComplexMatrix::split_dlu`]),
//! * the spectral condition number `κ₂(Q) = σ_max/σ_min` ([`ComplexMatrix::kappa2`]).
//!
//! Arithmetic operators (`+`, `-`, `*` on references) panic on shape mismatch, like the
//! operators of most dense-matrix crates; the `try_*`/[`ComplexMatrix::matmul`] forms
//! return a dimension error instead.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Unit roundoff of binary64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// `M = 𝒟(M) + ℒ(M) + 𝒰(M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularSplit {
    pub diagonal: ComplexMatrix,
    pub strictly_lower: ComplexMatrix,
    pub strictly_upper: ComplexMatrix,
}

impl TriangularSplit {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &(&self.diagonal + &self.strictly_lower) + &self.strictly_upper
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension {
                op: "new",
                detail: format!("shape {rows}x{cols} has a zero dimension"),
            });
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                op: "new",
                detail: format!("{} entries for a {rows}x{cols} matrix", data.len()),
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn scalar(n: usize, mu: C64) -> Self {
        Self::from_diag(&vec![mu; n])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real row-major entries; convenient for tests and small literals.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Order of a square matrix, or a dimension error naming `op`.
    pub fn order(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Dimension {
                op,
                detail: format!("expected a square matrix, got {}x{}", self.rows, self.cols),
            })
        }
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Result<C64> {
        let n = self.order("trace")?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                op: "matmul",
                detail: format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `MN − NM`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let mn = self.matmul(other)?;
        let nm = other.matmul(self)?;
        mn.try_sub(&nm)
    }

    /// `δ(M) = (‖M‖_F² − |tr M|²/n)^{1/2}`.
    ///
    /// Evaluated as `‖M − cI‖_F` with `c = tr M / n`, which is the same quantity without the
    /// cancellation in the difference of squares. The mean is taken relative to `m₀₀`, so a
    /// scalar matrix gives `c = m₀₀` and `δ = 0` exactly.
    pub fn delta(&self) -> Result<f64> {
        let n = self.order("delta")?;
        let d0 = self[(0, 0)];
        let shift: C64 = (0..n).map(|i| self[(i, i)] - d0).sum::<C64>() / n as f64;
        let c = d0 + shift;
        let sum_sq: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = if i == j { self[(i, j)] - c } else { self[(i, j)] };
                z.norm_sqr()
            })
            .sum();
        Ok(sum_sq.sqrt())
    }

    pub fn split_dlu(&self) -> Result<TriangularSplit> {
        let n = self.order("split_dlu")?;
        let zero = C64::new(0.0, 0.0);
        let pick = |keep: fn(usize, usize) -> bool| {
            Self::from_fn(n, n, |i, j| if keep(i, j) { self[(i, j)] } else { zero })
        };
        Ok(TriangularSplit {
            diagonal: pick(|i, j| i == j),
            strictly_lower: pick(|i, j| i > j),
            strictly_upper: pick(|i, j| i < j),
        })
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values()[0]
    }

    /// `κ₂(Q) = ‖Q‖₂‖Q⁻¹‖₂ = σ_max/σ_min`. Fails when `σ_min ≤ n·u·σ_max`.
    pub fn kappa2(&self) -> Result<f64> {
        let n = self.order("kappa2")?;
        let sv = self.singular_values();
        let (smax, smin) = (sv[0], sv[n - 1]);
        if smax == 0.0 || smin <= n as f64 * UNIT_ROUNDOFF * smax {
            return Err(Error::Singular {
                rcond: if smax == 0.0 { 0.0 } else { smin / smax },
            });
        }
        Ok(smax / smin)
    }

    /// `Q⁻¹B` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        Lu::factor(self)?.solve(rhs)
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.order("inverse")?;
        self.solve(&Self::identity(n))
    }

    /// `Uᴴ M U`.
    pub fn unitary_similarity(&self, u: &Self) -> Result<Self> {
        u.adjoint().matmul(&self.matmul(u)?)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if (self.rows, self.cols) == (other.rows, other.cols) {
            Ok(())
        } else {
            Err(Error::Dimension {
                op,
                detail: format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            })
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

struct Lu {
    n: usize,
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.order("solve")?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let threshold = n as f64 * UNIT_ROUNDOFF * scale;
        for k in 0..n {
            let (piv, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || scale == 0.0 {
                return Err(Error::Singular {
                    rcond: if scale == 0.0 { 0.0 } else { pmag / scale },
                });
            }
            if piv != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.n;
        if rhs.rows != n {
            return Err(Error::Dimension {
                op: "solve",
                detail: format!("{n}x{n} system with a {}-row right-hand side", rhs.rows),
            });
        }
        let mut x = ComplexMatrix::from_fn(n, rhs.cols, |i, j| rhs[(self.perm[i], j)]);
        for c in 0..rhs.cols {
            for i in 0..n {
                let mut acc = x[(i, c)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = x[(i, c)];
                for k in i + 1..n {
                    acc -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("shape mismatch in +")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("shape mismatch in -")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in *")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_matrix(n: usize, seed: u64) -> ComplexMatrix {
        // small LCG; keeps the unit tests free of the rand machinery
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]),
            Err(Error::Dimension { .. })
        ));
        let mut data = vec![c(1.0, 0.0); 4];
        data[3] = c(f64::NAN, 0.0);
        assert!(matches!(
            ComplexMatrix::new(2, 2, data),
            Err(Error::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn delta_examples() {
        let m = ComplexMatrix::scalar(5, c(2.0, -3.0));
        assert_eq!(m.delta().unwrap(), 0.0);
        let nil = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(nil.delta().unwrap(), 1.0);
        let d = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 3.0]).unwrap();
        assert_relative_eq!(d.delta().unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(rect.delta(), Err(Error::Dimension { .. })));
    }

    #[test]
    fn split_examples() {
        let s = ComplexMatrix::identity(3).split_dlu().unwrap();
        assert_eq!(s.diagonal, ComplexMatrix::identity(3));
        assert_eq!(s.strictly_lower, ComplexMatrix::zeros(3, 3));
        assert_eq!(s.strictly_upper, ComplexMatrix::zeros(3, 3));

        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = m.split_dlu().unwrap();
        assert_eq!(s.diagonal, ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 4.0]).unwrap());
        assert_eq!(s.strictly_lower, ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 3.0, 0.0]).unwrap());
        assert_eq!(s.strictly_upper, ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap());

        let eps = 0.3;
        let omega = ComplexMatrix::from_fn(4, 4, |i, j| if j == i + 1 { c(eps, 0.0) } else { c(0.0, 0.0) });
        let s = omega.split_dlu().unwrap();
        assert_eq!(s.strictly_upper, omega);
        assert_eq!(s.diagonal, ComplexMatrix::zeros(4, 4));
        assert_eq!(s.strictly_lower, ComplexMatrix::zeros(4, 4));
    }

    #[test]
    fn norms_and_trace() {
        assert_relative_eq!(ComplexMatrix::identity(7).frobenius_norm(), 7f64.sqrt());
        let d = ComplexMatrix::from_diag(&[c(1.0, 2.0), c(3.0, 0.0)]);
        assert_eq!(d.trace().unwrap(), c(4.0, 2.0));
        let nil = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(nil.spectral_norm(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn kappa2_examples() {
        let d = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 10.0]).unwrap();
        assert_relative_eq!(d.kappa2().unwrap(), 10.0, epsilon = 1e-12);
        // a rotation-with-phases is unitary
        let (ct, st) = (0.3f64.cos(), 0.3f64.sin());
        let u = ComplexMatrix::new(
            2,
            2,
            vec![c(ct, 0.0), c(0.0, -st), c(0.0, -st), c(ct, 0.0)],
        )
        .unwrap();
        assert!((u.kappa2().unwrap() - 1.0).abs() < 1e-12);
        let sing = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(sing.kappa2(), Err(Error::Singular { .. })));
    }

    #[test]
    fn solve_inverts() {
        let q = rand_matrix(6, 3);
        let b = rand_matrix(6, 4);
        let x = q.solve(&b).unwrap();
        let r = &(&q * &x) - &b;
        assert!(r.frobenius_norm() < 1e-12 * (1.0 + b.frobenius_norm()));
        let sing = ComplexMatrix::zeros(3, 3);
        assert!(matches!(sing.solve(&ComplexMatrix::identity(3)), Err(Error::Singular { .. })));
        assert!(matches!(q.solve(&ComplexMatrix::zeros(5, 1)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn matmul_shape_errors() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(a.matmul(&a.adjoint()).is_ok());
        assert!(a.trace().is_err());
    }
}
