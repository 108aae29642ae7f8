//! Dense eigenvalue solvers.
//!
//! [`eigenvalues`] reduces a general complex matrix to upper Hessenberg form with
//! Householder reflectors and then runs single-shift complex QR (Wilkinson shifts,
//! exceptional shifts on stagnation). Each step is a unitary similarity, so the
//! returned eigenvalues are exact for a nearby matrix `M + ΔM` with
//! `‖ΔM‖_F = O(n·u·‖M‖_F)`.
//!
//! [`hermitian_eigen`] delegates to nalgebra's tridiagonal QR.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, UNIT_ROUNDOFF};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a square matrix, with multiplicity, in no particular order.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = m.order("eigenvalues")?;
    if !m.is_finite() {
        return Err(Error::Domain("eigenvalues of a non-finite matrix".into()));
    }
    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    hessenberg_qr(&mut h)?;
    Ok((0..n).map(|i| h[(i, i)]).collect())
}

fn hessenberg_in_place(h: &mut ComplexMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        // Householder vector annihilating h[k+2.., k]
        let alpha_norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * alpha_norm;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        // H ← (I − τvvᴴ) H
        for j in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)])
                .sum();
            let s = dot * tau;
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= vr * s;
            }
        }
        // H ← H (I − τvvᴴ)
        for i in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(r, vr)| h[(i, k + 1 + r)] * vr)
                .sum();
            let s = dot * tau;
            for (r, vr) in v.iter().enumerate() {
                h[(i, k + 1 + r)] -= s * vr.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Complex Givens rotation `G = [[c, s], [−s̄, c]]` with `G·[a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Drives an upper Hessenberg matrix to triangular form, touching only the active window.
fn hessenberg_qr(h: &mut ComplexMatrix) -> Result<()> {
    let n = h.nrows();
    let norm = h.frobenius_norm();
    if norm == 0.0 {
        return Ok(());
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if sub <= UNIT_ROUNDOFF * scale {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence { iterations: total });
        }

        let shift = if iter % 11 == 0 {
            // exceptional shift breaks cycles of the Wilkinson shift
            let ex = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + C64::new(ex, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(())
}

/// Eigenpairs of a Hermitian matrix: eigenvalues ascending, eigenvectors as matching columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.order("hermitian_eigen")?;
    let herm = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::try_new(herm.to_nalgebra(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence { iterations: 0 })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn lcg_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_add(0x9E3779B97F4A7C15);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let ev = sorted(eigenvalues(&d).unwrap());
        for (got, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-14);
        }
        let nil = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        for z in eigenvalues(&nil).unwrap() {
            assert_eq!(z, c(0.0, 0.0));
        }
    }

    #[test]
    fn companion_quadratic() {
        // z² − 3z + 2 = (z − 1)(z − 2)
        let comp = ComplexMatrix::from_real(2, 2, &[3.0, -2.0, 1.0, 0.0]).unwrap();
        let ev = sorted(eigenvalues(&comp).unwrap());
        assert!((ev[0] - c(1.0, 0.0)).norm() < 1e-13);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn backward_error_is_small() {
        for (n, seed) in [(3, 1), (6, 2), (10, 3), (25, 4)] {
            let m = lcg_matrix(n, seed);
            let ev = eigenvalues(&m).unwrap();
            assert_eq!(ev.len(), n);
            let tr = m.trace().unwrap();
            let sum: C64 = ev.iter().sum();
            assert!((tr - sum).norm() < 1e-11 * (1.0 + m.frobenius_norm()));
            for &lambda in &ev {
                let shifted = &m - &ComplexMatrix::scalar(n, lambda);
                let smin = *shifted.singular_values().last().unwrap();
                assert!(smin < 50.0 * n as f64 * UNIT_ROUNDOFF * m.frobenius_norm(), "smin {smin}");
            }
        }
    }

    #[test]
    fn permutation_cycle_converges() {
        // pure cyclic shift: the unshifted QR iteration stalls on this one
        let n = 5;
        let p = ComplexMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let ev = eigenvalues(&p).unwrap();
        for z in ev {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.powu(5) - c(1.0, 0.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn hermitian_pairs() {
        let a = lcg_matrix(5, 9);
        let h = &a + &a.adjoint();
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let lam = ComplexMatrix::from_diag(&vals.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
        let resid = &(&h * &vecs) - &(&vecs * &lam);
        assert!(resid.frobenius_norm() < 1e-12 * h.frobenius_norm());
    }
}
