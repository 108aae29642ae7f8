//! Seeded random test matrices.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{ComplexMatrix, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Entries i.i.d. standard complex Gaussian.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of `R` folded into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n).to_nalgebra();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    ComplexMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        q[(i, j)] * phase
    })
}

/// `U·diag(σ)·Vᴴ` with `σ₁ = 1`, `σ_n = κ` and log-uniform interior values, so `κ₂ = κ`.
pub fn random_with_condition<R: Rng + ?Sized>(rng: &mut R, n: usize, kappa: f64) -> ComplexMatrix {
    assert!(kappa >= 1.0, "condition number must be at least 1");
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let log_k = kappa.ln();
    let sigma: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => 1.0,
            k if k == n - 1 => kappa,
            _ => (rng.random::<f64>() * log_k).exp(),
        })
        .collect();
    let us = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)] * sigma[j]);
    &us * &v.adjoint()
}
