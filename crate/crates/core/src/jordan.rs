//! Test matrices built from prescribed Jordan data, the `T(ε)` scaling, and the
//! envelope `Φ(ε)` that bounds `‖T⁻¹Q⁻¹ÃQT − Λ‖_F²`.
//!
//! With `Q⁻¹AQ = diag(J₁,…,J_p)`, `Jᵢ = J_{mᵢ}(λᵢ)` and
//! `T = diag(T₁,…,T_p)`, `Tᵢ = diag(1, ε, …, ε^{mᵢ−1})`:
//!
//! ```text
//! T⁻¹(Q⁻¹AQ)T = Λ + Ω,   Λ = diag(λᵢ I_{mᵢ}),   Ω = ε on within-block superdiagonals
//!
//! Φ(ε) = ε^{2(1−m)} δ(E_Q)² + 2ε²√(n−p) δ(E_Q) + (n−p)ε² + |tr E|²/n
//! ```
//!
//! where `E_Q = Q⁻¹EQ` and `m = maxᵢ mᵢ`.
//!
//! Jordan structure is never computed from a floating-point matrix. Instances are
//! assembled from `(λᵢ, mᵢ, Q)`; the only inverse route is
//! [`JordanSpec::from_diagonalizable`], which accepts well-separated spectra only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::spectrum::{self, Spectrum};

/// Minimum eigenvalue separation, relative to `‖A‖_F`, accepted by
/// [`JordanSpec::from_diagonalizable`].
pub const DIAGONALIZABLE_GAP: f64 = 1e-6;

/// Imaginary parts below `REAL_TOL·(1+|λ|)` count as real.
pub const REAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub lambda: C64,
    pub size: usize,
}

impl JordanBlock {
    pub fn new(lambda: C64, size: usize) -> Self {
        Self { lambda, size }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanSpec {
    blocks: Vec<JordanBlock>,
    q: ComplexMatrix,
    q_inv: ComplexMatrix,
    n: usize,
    m: usize,
}

impl JordanSpec {
    pub fn new(blocks: Vec<JordanBlock>, q: ComplexMatrix) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Config("Jordan data needs at least one block".into()));
        }
        if let Some(k) = blocks.iter().position(|b| b.size == 0) {
            return Err(Error::Config(format!("block {k} has size 0")));
        }
        if let Some(k) = blocks
            .iter()
            .position(|b| !b.lambda.re.is_finite() || !b.lambda.im.is_finite())
        {
            return Err(Error::Config(format!("block {k} has a non-finite eigenvalue")));
        }
        let n: usize = blocks.iter().map(|b| b.size).sum();
        let qn = q.order("JordanSpec")?;
        if qn != n {
            return Err(Error::Dimension {
                op: "JordanSpec",
                detail: format!("block sizes sum to {n} but Q is {qn}x{qn}"),
            });
        }
        q.kappa2()?;
        let q_inv = q.inverse()?;
        let m = blocks.iter().map(|b| b.size).max().unwrap_or(1);
        Ok(Self {
            blocks,
            q,
            q_inv,
            n,
            m,
        })
    }

    /// Builds a diagonalizable spec (`p = n`) from a matrix whose eigenvalues are
    /// separated by more than `1e-6·‖A‖_F`; refuses anything else.
    pub fn from_diagonalizable(a: &ComplexMatrix) -> Result<Self> {
        let n = a.order("from_diagonalizable")?;
        let spec = spectrum::eigenvalues(a)?;
        let vals = spec.values();
        let scale = a.frobenius_norm();
        for i in 0..n {
            for j in i + 1..n {
                let gap = (vals[i] - vals[j]).norm();
                if gap <= DIAGONALIZABLE_GAP * scale {
                    return Err(Error::NotApplicable(format!(
                        "eigenvalues {} and {} are only {gap:e} apart; Jordan structure is not computed numerically",
                        vals[i], vals[j]
                    )));
                }
            }
        }
        let mut q = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in vals.iter().enumerate() {
            let shifted = (a - &ComplexMatrix::scalar(n, lambda)).to_nalgebra();
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.expect("right singular vectors requested");
            let last = (0..n)
                .min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
                .expect("nonempty");
            for i in 0..n {
                q[(i, k)] = v_t[(last, i)].conj();
            }
        }
        let blocks = vals.iter().map(|&l| JordanBlock::new(l, 1)).collect();
        Self::new(blocks, q)
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn q_inv(&self) -> &ComplexMatrix {
        &self.q_inv
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of Jordan blocks.
    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    /// Largest block size.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.m == 1
    }

    pub fn has_real_eigenvalues(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.lambda.im.abs() <= REAL_TOL * (1.0 + b.lambda.norm()))
    }

    /// Prescribed eigenvalues with multiplicity.
    pub fn eigenvalues(&self) -> Spectrum {
        Spectrum::new(
            self.blocks
                .iter()
                .flat_map(|b| std::iter::repeat_n(b.lambda, b.size))
                .collect(),
        )
    }

    /// `diag(J₁,…,J_p)`.
    pub fn jordan_form(&self) -> ComplexMatrix {
        let labels = self.block_of_index();
        let diag = self.lambda_diagonal();
        ComplexMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                diag[i]
            } else if j == i + 1 && labels[i] == labels[j] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `Λ = diag(λ₁I_{m₁},…,λ_pI_{m_p})` in the given block order.
    pub fn lambda_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.lambda_diagonal())
    }

    /// `A = Q·diag(J₁,…,J_p)·Q⁻¹`.
    pub fn assemble(&self) -> ComplexMatrix {
        &(&self.q * &self.jordan_form()) * &self.q_inv
    }

    /// `T = diag(T₁,…,T_p)`, `Tᵢ = diag(1, ε, …, ε^{mᵢ−1})`.
    pub fn scaling_matrix(&self, eps: f64) -> Result<ComplexMatrix> {
        check_eps(eps)?;
        let exps = self.scaling_exponents();
        Ok(ComplexMatrix::from_diag(
            &exps.iter().map(|&k| C64::new(eps.powi(k), 0.0)).collect::<Vec<_>>(),
        ))
    }

    /// `Ω`: `ε` on the superdiagonal inside each block, zero elsewhere.
    pub fn omega(&self, eps: f64) -> Result<ComplexMatrix> {
        check_eps(eps)?;
        let labels = self.block_of_index();
        Ok(ComplexMatrix::from_fn(self.n, self.n, |i, j| {
            if j == i + 1 && labels[i] == labels[j] {
                C64::new(eps, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `T⁻¹MT` evaluated entrywise as `M_ij·ε^{k_j − k_i}`.
    pub fn scale_similarity(&self, m: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
        check_eps(eps)?;
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(Error::Dimension {
                op: "scale_similarity",
                detail: format!("expected {n}x{n}", n = self.n),
            });
        }
        let exps = self.scaling_exponents();
        Ok(ComplexMatrix::from_fn(self.n, self.n, |i, j| {
            m[(i, j)] * eps.powi(exps[j] - exps[i])
        }))
    }

    fn scaling_exponents(&self) -> Vec<i32> {
        self.blocks
            .iter()
            .flat_map(|b| 0..b.size as i32)
            .collect()
    }

    fn block_of_index(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(k, b)| std::iter::repeat_n(k, b.size))
            .collect()
    }

    fn lambda_diagonal(&self) -> Vec<C64> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.lambda, b.size))
            .collect()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must lie in (0, 1], got {eps}")))
    }
}

/// A Jordan spec with a perturbation `E` and the scalars every bound consumes.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationInstance {
    spec: JordanSpec,
    e: ComplexMatrix,
    e_q: ComplexMatrix,
    norm_eq: f64,
    delta_eq: f64,
    trace_e: C64,
}

/// The three pieces of the envelope estimate at one `ε`, each with its bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub eps: f64,
    pub phi: f64,
    /// `‖T⁻¹Q⁻¹ÃQT − Λ‖_F²`, computed from `Ã` directly.
    pub lhs: f64,
    /// `‖T⁻¹E_QT‖_F²` and its bound `ε^{2(1−m)}δ(E_Q)² + |tr E|²/n`.
    pub scaled_perturbation: f64,
    pub scaled_perturbation_bound: f64,
    /// `Re tr(ΩᴴT⁻¹E_QT)` and its bound `ε²√(n−p)δ(E_Q)`.
    pub cross_term: f64,
    pub cross_term_bound: f64,
    /// `‖Ω‖_F²` and `(n−p)ε²`.
    pub omega_sq: f64,
    pub omega_sq_expected: f64,
}

impl EnvelopeCheck {
    /// `Φ(ε) − ‖T⁻¹Q⁻¹ÃQT − Λ‖_F²`.
    pub fn margin(&self) -> f64 {
        self.phi - self.lhs
    }

    pub fn scaled_perturbation_margin(&self) -> f64 {
        self.scaled_perturbation_bound - self.scaled_perturbation
    }

    pub fn cross_term_margin(&self) -> f64 {
        self.cross_term_bound - self.cross_term
    }

    pub fn omega_defect(&self) -> f64 {
        (self.omega_sq - self.omega_sq_expected).abs()
    }

    /// All four inequalities hold to `rel_tol·Φ(ε)`.
    pub fn holds(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.phi;
        self.margin() >= -slack
            && self.scaled_perturbation_margin() >= -slack
            && self.cross_term_margin() >= -slack
            && self.omega_defect() <= slack
    }
}

impl PerturbationInstance {
    pub fn new(spec: JordanSpec, e: ComplexMatrix) -> Result<Self> {
        let n = spec.n();
        if e.nrows() != n || e.ncols() != n {
            return Err(Error::Dimension {
                op: "PerturbationInstance",
                detail: format!("E is {}x{}, spec is {n}x{n}", e.nrows(), e.ncols()),
            });
        }
        if !e.is_finite() {
            return Err(Error::Domain("perturbation has non-finite entries".into()));
        }
        let e_q = &(spec.q_inv() * &e) * spec.q();
        let norm_eq = e_q.frobenius_norm();
        let delta_eq = e_q.delta()?;
        let trace_e = e.trace()?;
        Ok(Self {
            spec,
            e,
            e_q,
            norm_eq,
            delta_eq,
            trace_e,
        })
    }

    pub fn spec(&self) -> &JordanSpec {
        &self.spec
    }

    pub fn e(&self) -> &ComplexMatrix {
        &self.e
    }

    pub fn e_q(&self) -> &ComplexMatrix {
        &self.e_q
    }

    pub fn norm_eq(&self) -> f64 {
        self.norm_eq
    }

    pub fn delta_eq(&self) -> f64 {
        self.delta_eq
    }

    pub fn trace_e(&self) -> C64 {
        self.trace_e
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn a(&self) -> ComplexMatrix {
        self.spec.assemble()
    }

    pub fn a_tilde(&self) -> ComplexMatrix {
        &self.a() + &self.e
    }

    /// `T⁻¹Q⁻¹ÃQT`, computed from `Ã` with a linear solve rather than the cached `E_Q`.
    ///
    /// For `E = 0` this is `T⁻¹JT` exactly; the round trip through `A = QJQ⁻¹` would
    /// otherwise leave rounding residue against an envelope that is itself exact.
    pub fn transformed(&self, eps: f64) -> Result<ComplexMatrix> {
        if self.e.entries().iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return self.spec.scale_similarity(&self.spec.jordan_form(), eps);
        }
        let q = self.spec.q();
        let similar = q.solve(&(&self.a_tilde() * q))?;
        self.spec.scale_similarity(&similar, eps)
    }

    pub fn phi(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        let n = self.n() as f64;
        let nmp = (self.spec.n() - self.spec.p()) as f64;
        let m = self.spec.m() as i32;
        let d = self.delta_eq;
        Ok(eps.powi(2 * (1 - m)) * d * d
            + 2.0 * eps * eps * nmp.sqrt() * d
            + nmp * eps * eps
            + self.trace_e.norm_sqr() / n)
    }

    /// Whether `n − p + 2√(n−p)δ(E_Q) > (m − 1)δ(E_Q)²`.
    pub fn c1_holds(&self) -> bool {
        let (lhs, rhs) = self.c_sides();
        lhs > rhs
    }

    fn c_sides(&self) -> (f64, f64) {
        let nmp = (self.spec.n() - self.spec.p()) as f64;
        let d = self.delta_eq;
        (nmp + 2.0 * nmp.sqrt() * d, (self.spec.m() as f64 - 1.0) * d * d)
    }

    /// Minimizer of `Φ` over `(0, 1]` for non-diagonalizable `A`.
    pub fn optimal_epsilon(&self) -> Result<f64> {
        if self.spec.is_diagonalizable() {
            return Err(Error::NotApplicable(
                "A is diagonalizable (m = 1); Φ has no interior stationary point".into(),
            ));
        }
        if self.delta_eq == 0.0 {
            return Err(Error::NotApplicable(
                "δ(E_Q) = 0: Φ decreases all the way to ε → 0".into(),
            ));
        }
        let (lhs, rhs) = self.c_sides();
        if lhs > rhs {
            Ok((rhs / lhs).powf(1.0 / (2.0 * self.spec.m() as f64)))
        } else {
            Ok(1.0)
        }
    }

    /// Each term of the envelope estimate, computed independently at `ε`.
    pub fn envelope_check(&self, eps: f64) -> Result<EnvelopeCheck> {
        let phi = self.phi(eps)?;
        let lambda = self.spec.lambda_matrix();
        let lhs = (&self.transformed(eps)? - &lambda).frobenius_norm_sq();

        let n = self.n() as f64;
        let nmp = (self.spec.n() - self.spec.p()) as f64;
        let m = self.spec.m() as i32;
        let d = self.delta_eq;
        let tr_sq = self.trace_e.norm_sqr() / n;

        let scaled = self.spec.scale_similarity(&self.e_q, eps)?;
        let omega = self.spec.omega(eps)?;
        let cross: f64 = omega
            .entries()
            .iter()
            .zip(scaled.entries())
            .map(|(w, x)| (w.conj() * x).re)
            .sum();

        Ok(EnvelopeCheck {
            eps,
            phi,
            lhs,
            scaled_perturbation: scaled.frobenius_norm_sq(),
            scaled_perturbation_bound: eps.powi(2 * (1 - m)) * d * d + tr_sq,
            cross_term: cross,
            cross_term_bound: eps * eps * nmp.sqrt() * d,
            omega_sq: omega.frobenius_norm_sq(),
            omega_sq_expected: nmp * eps * eps,
        })
    }

    /// `Φ(ε) − ‖T⁻¹Q⁻¹ÃQT − Λ‖_F²`; nonnegative up to rounding.
    pub fn lemma24_margin(&self, eps: f64) -> Result<f64> {
        Ok(self.envelope_check(eps)?.margin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, random_with_condition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spec_identity(blocks: &[(f64, usize)]) -> JordanSpec {
        let n = blocks.iter().map(|b| b.1).sum();
        JordanSpec::new(
            blocks.iter().map(|&(l, s)| JordanBlock::new(c(l, 0.0), s)).collect(),
            ComplexMatrix::identity(n),
        )
        .unwrap()
    }

    #[test]
    fn assemble_examples() {
        let diag = spec_identity(&[(1.0, 1), (2.0, 1), (-3.0, 1)]);
        assert_eq!(
            diag.assemble(),
            ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)])
        );
        let j2 = spec_identity(&[(0.0, 2)]);
        assert_eq!(j2.assemble(), ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn assemble_recovers_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = random_with_condition(&mut rng, 3, 4.0);
        let spec = JordanSpec::new(
            vec![JordanBlock::new(c(1.0, 0.0), 2), JordanBlock::new(c(2.0, 0.0), 1)],
            q,
        )
        .unwrap();
        let computed = spectrum::eigenvalues(&spec.assemble()).unwrap();
        let m = spectrum::optimal_match(&spec.eigenvalues(), &computed).unwrap();
        assert!(m.d_inf < 1e-7, "{}", m.d_inf);
    }

    #[test]
    fn spec_validation() {
        let q = ComplexMatrix::identity(3);
        assert!(matches!(
            JordanSpec::new(vec![JordanBlock::new(c(0.0, 0.0), 2)], q.clone()),
            Err(Error::Dimension { .. })
        ));
        assert!(JordanSpec::new(vec![JordanBlock::new(c(0.0, 0.0), 0)], q).is_err());
        let sing = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            JordanSpec::new(vec![JordanBlock::new(c(0.0, 0.0), 2)], sing),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn scaling_examples() {
        let diag = spec_identity(&[(1.0, 1), (2.0, 1)]);
        assert_eq!(diag.scaling_matrix(0.3).unwrap(), ComplexMatrix::identity(2));
        let j3 = spec_identity(&[(0.0, 3)]);
        assert_eq!(
            j3.scaling_matrix(0.5).unwrap(),
            ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.5, 0.0), c(0.25, 0.0)])
        );
        assert!(matches!(j3.scaling_matrix(0.0), Err(Error::Domain(_))));
        assert!(matches!(j3.scaling_matrix(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn scaled_jordan_form_is_lambda_plus_omega() {
        let spec = spec_identity(&[(2.0, 3), (-1.0, 1), (0.5, 2)]);
        let eps = 0.375;
        let t = spec.scaling_matrix(eps).unwrap();
        let direct = &t.inverse().unwrap() * &(&spec.jordan_form() * &t);
        let split = &spec.lambda_matrix() + &spec.omega(eps).unwrap();
        assert!(direct.max_abs_diff(&split) < 1e-15);
        let omega = spec.omega(eps).unwrap();
        let expected = (spec.n() - spec.p()) as f64 * eps * eps;
        assert!((omega.frobenius_norm_sq() - expected).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = random_with_condition(&mut rng, 5, 3.0);
        let spec = JordanSpec::new(
            vec![JordanBlock::new(c(1.0, 0.0), 3), JordanBlock::new(c(0.0, 2.0), 2)],
            q,
        )
        .unwrap();
        let (n, p) = (5.0, 2.0);

        let zero = PerturbationInstance::new(spec.clone(), ComplexMatrix::zeros(5, 5)).unwrap();
        for eps in [0.1, 0.5, 1.0] {
            assert!((zero.phi(eps).unwrap() - (n - p) * eps * eps).abs() < 1e-15);
        }

        let t = 0.07;
        let scalar = PerturbationInstance::new(spec.clone(), ComplexMatrix::scalar(5, c(t, 0.0))).unwrap();
        assert!(scalar.delta_eq() < 1e-15);
        for eps in [0.2, 1.0] {
            let want = (n - p) * eps * eps + n * t * t;
            assert!((scalar.phi(eps).unwrap() - want).abs() < 1e-12);
        }

        let e = gaussian_matrix(&mut rng, 5, 5);
        let inst = PerturbationInstance::new(spec, e).unwrap();
        let want = ((n - p).sqrt() + inst.delta_eq()).powi(2) + inst.trace_e().norm_sqr() / n;
        assert!((inst.phi(1.0).unwrap() - want).abs() < 1e-12 * want);
        assert!(inst.phi(0.0).is_err());
    }

    #[test]
    fn optimal_epsilon_closed_form() {
        // n = 4, p = 2, m = 2 with a perturbation whose δ(E_Q) is exactly 0.1
        let spec = spec_identity(&[(1.0, 2), (3.0, 2)]);
        let mut e = ComplexMatrix::zeros(4, 4);
        e[(0, 3)] = c(0.1, 0.0);
        let inst = PerturbationInstance::new(spec, e).unwrap();
        assert!((inst.delta_eq() - 0.1).abs() < 1e-16);
        assert!(inst.c1_holds());
        let want = (0.01f64 / (2.0 + 2.0 * 2f64.sqrt() * 0.1)).powf(0.25);
        let got = inst.optimal_epsilon().unwrap();
        assert!((got - want).abs() < 1e-15);
        let phi_star = inst.phi(got).unwrap();
        for k in 1..=1000 {
            let eps = k as f64 / 1000.0;
            assert!(phi_star <= inst.phi(eps).unwrap() + 1e-12);
        }
    }

    #[test]
    fn optimal_epsilon_c2_and_errors() {
        // C₂: n − p + 2√(n−p)δ ≤ (m − 1)δ² needs a large δ
        let spec = spec_identity(&[(0.0, 2)]);
        let mut e = ComplexMatrix::zeros(2, 2);
        e[(1, 0)] = c(10.0, 0.0);
        let inst = PerturbationInstance::new(spec, e).unwrap();
        assert!(!inst.c1_holds());
        assert_eq!(inst.optimal_epsilon().unwrap(), 1.0);

        let diag = spec_identity(&[(0.0, 1), (1.0, 1)]);
        let inst = PerturbationInstance::new(diag, ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(inst.optimal_epsilon(), Err(Error::NotApplicable(_))));

        // δ(E_Q) → 0 drives ε* → 0
        let spec = spec_identity(&[(0.0, 3), (1.0, 1)]);
        let mut prev = 1.0;
        for d in [1e-2, 1e-4, 1e-8] {
            let mut e = ComplexMatrix::zeros(4, 4);
            e[(2, 0)] = c(d, 0.0);
            let eps = PerturbationInstance::new(spec.clone(), e).unwrap().optimal_epsilon().unwrap();
            assert!(eps < prev);
            prev = eps;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn margin_examples() {
        let spec = spec_identity(&[(1.0, 3), (2.0, 2)]);
        let zero = PerturbationInstance::new(spec.clone(), ComplexMatrix::zeros(5, 5)).unwrap();
        for eps in [0.5, 0.25, 1.0] {
            assert_eq!(zero.lemma24_margin(eps).unwrap(), 0.0);
        }

        // diagonal, traceless E_Q: T⁻¹E_QT = E_Q and the cross term vanishes, so
        // margin = (ε^{2(1−m)} − 1)δ² + 2ε²√(n−p)δ
        let e = ComplexMatrix::from_diag(&[c(0.1, 0.0), c(-0.2, 0.0), c(0.05, 0.0), c(0.05, 0.0), c(0.0, 0.0)]);
        let inst = PerturbationInstance::new(spec.clone(), e).unwrap();
        let d = inst.delta_eq();
        for eps in [0.5f64, 0.25] {
            let want = (eps.powi(2 * (1 - 3)) - 1.0) * d * d + 2.0 * eps * eps * 3f64.sqrt() * d;
            let got = inst.lemma24_margin(eps).unwrap();
            assert!((got - want).abs() < 1e-14 * want, "{got} vs {want}");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = random_with_condition(&mut rng, 5, 10.0);
        let spec = JordanSpec::new(spec.blocks().to_vec(), q).unwrap();
        let inst = PerturbationInstance::new(spec, gaussian_matrix(&mut rng, 5, 5).scale(c(0.3, 0.0))).unwrap();
        let check = inst.envelope_check(1.0).unwrap();
        assert!(check.holds(1e-8), "{check:?}");
    }

    #[test]
    fn from_diagonalizable_accepts_and_refuses() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_with_condition(&mut rng, 4, 5.0);
        let spec = JordanSpec::new(
            [1.0, -2.0, 3.5, 0.25].iter().map(|&l| JordanBlock::new(c(l, 0.5), 1)).collect(),
            q,
        )
        .unwrap();
        let a = spec.assemble();
        let rebuilt = JordanSpec::from_diagonalizable(&a).unwrap();
        assert_eq!(rebuilt.p(), 4);
        let back = rebuilt.assemble();
        assert!(back.max_abs_diff(&a) < 1e-10 * a.frobenius_norm());

        let defective = spec_identity(&[(1.0, 2), (3.0, 1)]).assemble();
        assert!(matches!(
            JordanSpec::from_diagonalizable(&defective),
            Err(Error::NotApplicable(_))
        ));
    }
}
