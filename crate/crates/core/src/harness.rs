//! Seeded instance generation, verification sweeps and the scalar-shift example table.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block::{self, BlockOptions};
use crate::bounds::{self, BoundId, BoundResult, MatrixClass, SValues, Slack};
use crate::error::{Error, Result};
use crate::jordan::{JordanBlock, JordanSpec, PerturbationInstance};
use crate::matrix::{ComplexMatrix, C64};
use crate::random::{gaussian_matrix, random_with_condition};
use crate::spectrum::{self, Spectrum};

/// Number of points `ε = k/16`, `k = 1..=16`, on which the envelope is checked.
pub const EPS_GRID: usize = 16;

/// Largest block generated by the mixed profile.
pub const MIXED_MAX_BLOCK: usize = 4;

/// Below this `ε` the scaled matrix is too ill-conditioned for a block count; `s(·) = 1` is assumed.
pub const MIN_S_EPS: f64 = 1e-6;

/// Tolerance used to decide that a generated `Q` is unitary.
const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockProfile {
    /// `p = n`, `m = 1`.
    Diagonalizable,
    /// One block of size `n`.
    SingleJordan,
    /// Random partitions into blocks of size at most [`MIXED_MAX_BLOCK`]; one trial in four is diagonalizable.
    Mixed,
    /// Fixed blocks; `n_range` is ignored.
    UserFile { blocks: Vec<JordanBlock> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    /// Complex Gaussian entries rescaled to `‖E‖_F = norm`.
    Gaussian { norm: f64 },
    /// `E = tI`.
    Scalar { t: f64 },
    /// `E = norm·xyᴴ` with unit Gaussian `x`, `y`.
    Rank1 { norm: f64 },
    Zero,
}

impl Perturbation {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Perturbation::Gaussian { norm } => ("gaussian norm", norm),
            Perturbation::Scalar { t } => ("scalar t", t.abs()),
            Perturbation::Rank1 { norm } => ("rank1 norm", norm),
            Perturbation::Zero => return Ok(()),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!("{name} must be finite and nonzero")));
        }
        Ok(())
    }

    fn generate<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> ComplexMatrix {
        match *self {
            Perturbation::Gaussian { norm } => {
                let g = gaussian_matrix(rng, n, n);
                let f = g.frobenius_norm();
                g.scale(C64::new(norm / f, 0.0))
            }
            Perturbation::Scalar { t } => ComplexMatrix::scalar(n, C64::new(t, 0.0)),
            Perturbation::Rank1 { norm } => {
                let x = gaussian_matrix(rng, n, 1);
                let y = gaussian_matrix(rng, n, 1);
                let f = norm / (x.frobenius_norm() * y.frobenius_norm());
                (&x * &y.adjoint()).scale(C64::new(f, 0.0))
            }
            Perturbation::Zero => ComplexMatrix::zeros(n, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SMode {
    Computed,
    Pessimistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound violation threshold, relative to `1 + value`.
    pub violation: f64,
    /// Envelope inequalities threshold, relative to `Φ(ε)`.
    pub lemma: f64,
    /// Sharpness comparisons, absolute.
    pub sharpness: f64,
    pub s_tol: f64,
    pub s_gap: f64,
    pub s_block_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            violation: bounds::VIOLATION_TOL,
            lemma: 1e-8,
            sharpness: 1e-12,
            s_tol: block::DEFAULT_TOL,
            s_gap: block::DEFAULT_GAP,
            s_block_tol: block::DEFAULT_BLOCK_TOL,
        }
    }
}

impl Tolerances {
    pub fn block_options(&self) -> BlockOptions {
        BlockOptions {
            tol: self.s_tol,
            gap: self.s_gap,
            block_tol: self.s_block_tol,
        }
    }
}

/// Trial `i` uses `kappas[i % K]` and `perturbations[(i / K) % P]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_range: (usize, usize),
    pub block_profile: BlockProfile,
    pub perturbations: Vec<Perturbation>,
    pub kappas: Vec<f64>,
    pub s_mode: SMode,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 500,
            n_range: (2, 12),
            block_profile: BlockProfile::Mixed,
            perturbations: [0.01, 0.5, 2.0]
                .iter()
                .map(|&norm| Perturbation::Gaussian { norm })
                .collect(),
            kappas: vec![1.0, 10.0, 100.0],
            s_mode: SMode::Pessimistic,
            tolerances: Tolerances::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return cfg("trials must be positive".into());
        }
        let (lo, hi) = self.n_range;
        if lo == 0 || lo > hi {
            return cfg(format!("n_range ({lo}, {hi}) is empty"));
        }
        if hi > block::MAX_ORDER {
            return cfg(format!("n_range upper end {hi} exceeds {}", block::MAX_ORDER));
        }
        match &self.block_profile {
            BlockProfile::SingleJordan if lo < 2 => {
                return cfg("single-jordan needs n ≥ 2 for a nontrivial block".into());
            }
            BlockProfile::UserFile { blocks } => {
                if blocks.is_empty() || blocks.iter().any(|b| b.size == 0) {
                    return cfg("user-file blocks must be nonempty with positive sizes".into());
                }
                let n: usize = blocks.iter().map(|b| b.size).sum();
                if n > block::MAX_ORDER {
                    return cfg(format!("user-file order {n} exceeds {}", block::MAX_ORDER));
                }
            }
            _ => {}
        }
        if self.kappas.is_empty() {
            return cfg("kappas must be nonempty".into());
        }
        if let Some(k) = self.kappas.iter().find(|k| !(k.is_finite() && **k >= 1.0)) {
            return cfg(format!("target kappa {k} must be finite and ≥ 1"));
        }
        if self.perturbations.is_empty() {
            return cfg("perturbations must be nonempty".into());
        }
        for p in &self.perturbations {
            p.validate()?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("violation", t.violation),
            ("lemma", t.lemma),
            ("sharpness", t.sharpness),
            ("s_tol", t.s_tol),
            ("s_gap", t.s_gap),
            ("s_block_tol", t.s_block_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return cfg(format!("tolerance {name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn kappa_for(&self, trial: usize) -> f64 {
        self.kappas[trial % self.kappas.len()]
    }

    pub fn perturbation_for(&self, trial: usize) -> Perturbation {
        self.perturbations[(trial / self.kappas.len()) % self.perturbations.len()]
    }

    fn rng_for(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

fn random_eigenvalue<R: Rng + ?Sized>(rng: &mut R, real: bool) -> C64 {
    let re = rng.random_range(-2.0..2.0);
    let im = if real { 0.0 } else { rng.random_range(-2.0..2.0) };
    C64::new(re, im)
}

fn random_blocks<R: Rng + ?Sized>(rng: &mut R, profile: &BlockProfile, n_range: (usize, usize)) -> Vec<JordanBlock> {
    if let BlockProfile::UserFile { blocks } = profile {
        return blocks.clone();
    }
    let n = rng.random_range(n_range.0..=n_range.1);
    let real = rng.random_bool(0.5);
    let sizes: Vec<usize> = match profile {
        BlockProfile::Diagonalizable => vec![1; n],
        BlockProfile::SingleJordan => vec![n],
        BlockProfile::Mixed if rng.random_bool(0.25) => vec![1; n],
        _ => {
            let mut sizes = Vec::new();
            let mut left = n;
            while left > 0 {
                let size = rng.random_range(1..=left.min(MIXED_MAX_BLOCK));
                sizes.push(size);
                left -= size;
            }
            sizes
        }
    };
    sizes
        .into_iter()
        .map(|size| JordanBlock::new(random_eigenvalue(rng, real), size))
        .collect()
}

/// Deterministic in `(config.seed, trial)`: each trial draws from its own ChaCha stream.
pub fn gen_instance(config: &SweepConfig, trial: usize) -> Result<PerturbationInstance> {
    config.validate()?;
    let mut rng = config.rng_for(trial);
    let blocks = random_blocks(&mut rng, &config.block_profile, config.n_range);
    let n = blocks.iter().map(|b| b.size).sum();
    let q = random_with_condition(&mut rng, n, config.kappa_for(trial));
    let e = config.perturbation_for(trial).generate(&mut rng, n);
    PerturbationInstance::new(JordanSpec::new(blocks, q)?, e)
}

/// What is known about `A` from its Jordan data.
pub fn classify(spec: &JordanSpec) -> MatrixClass {
    if !spec.is_diagonalizable() {
        return MatrixClass::General;
    }
    let q = spec.q();
    let n = spec.n();
    let defect = (&(&q.adjoint() * q) - &ComplexMatrix::identity(n)).frobenius_norm();
    if defect > UNITARY_TOL * n as f64 {
        MatrixClass::General
    } else if spec.has_real_eigenvalues() {
        MatrixClass::Hermitian
    } else {
        MatrixClass::Normal
    }
}

/// `sᵢ = n + 1 − s(·)` for the transformed matrices at the `ε` each branch uses.
///
/// A branch that the bounds will not take, or an `ε` below [`MIN_S_EPS`], gets the always-valid `n`.
pub fn computed_s_values(inst: &PerturbationInstance, opts: &BlockOptions, seed: u64) -> Result<SValues> {
    let n = inst.n();
    let m = inst.spec().m() as f64;
    let s_at = |eps: f64, draw: u64| -> Result<usize> {
        if !(MIN_S_EPS..=1.0).contains(&eps) {
            return Ok(n);
        }
        let t = inst.transformed(eps)?;
        let s = block::s_number_with(&t, opts, seed.wrapping_add(draw))?.s;
        Ok(n + 1 - s)
    };
    let norm = inst.norm_eq();
    let delta = inst.delta_eq();
    let s1 = if norm > 0.0 && norm < 1.0 { s_at(norm.powf(1.0 / m), 1)? } else { n };
    let s2 = s_at(1.0, 2)?;
    let s3 = if delta > 0.0 && delta < 1.0 { s_at(delta.powf(1.0 / m), 3)? } else { n };
    let s4 = match inst.optimal_epsilon() {
        Ok(eps) if inst.c1_holds() => s_at(eps, 4)?,
        _ => n,
    };
    Ok(SValues { s1, s2, s3, s4 })
}

/// Every bound for one instance; `s_tilde = s(Ã)` feeds the normal-`A` refinements.
pub fn all_bounds(inst: &PerturbationInstance, s: &SValues, s_tilde: usize) -> Result<Vec<BoundResult>> {
    let class = classify(inst.spec());
    let mut out = bounds::normal_bounds(inst.e(), &inst.a_tilde(), class, s_tilde)?;
    out.extend(bounds::baseline_bounds(inst, s)?);
    out.extend(bounds::new_bounds_complex(inst, s)?);
    out.extend(bounds::new_bounds_real(inst)?);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDigest {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub blocks: Vec<JordanBlock>,
    pub class: MatrixClass,
    /// Generating profile and target `κ₂(Q)`; absent for instances read from files.
    pub perturbation: Option<Perturbation>,
    pub target_kappa: Option<f64>,
    pub kappa_q: f64,
    pub norm_e: f64,
    pub norm_eq: f64,
    /// `κ₂(Q)·‖E‖_F`, the basis-free majorant of `‖E_Q‖_F`.
    pub kappa_majorant: f64,
    pub delta_eq: f64,
    pub trace_e: C64,
}

impl InstanceDigest {
    pub fn of(inst: &PerturbationInstance, perturbation: Option<Perturbation>, target_kappa: Option<f64>) -> Result<Self> {
        let spec = inst.spec();
        let kappa_q = spec.q().kappa2()?;
        let norm_e = inst.e().frobenius_norm();
        Ok(Self {
            n: spec.n(),
            p: spec.p(),
            m: spec.m(),
            blocks: spec.blocks().to_vec(),
            class: classify(spec),
            perturbation,
            target_kappa,
            kappa_q,
            norm_e,
            norm_eq: inst.norm_eq(),
            kappa_majorant: kappa_q * norm_e,
            delta_eq: inst.delta_eq(),
            trace_e: inst.trace_e(),
        })
    }
}

/// The envelope and its three component inequalities at one `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSample {
    pub eps: f64,
    pub phi: f64,
    /// `Φ(ε) − ‖T⁻¹Q⁻¹ÃQT − Λ‖_F²`.
    pub margin: f64,
    /// Bound minus value for `‖T⁻¹E_QT‖_F²`.
    pub rela2_margin: f64,
    /// Bound minus value for `Re tr(ΩᴴT⁻¹E_QT)`.
    pub rela3_margin: f64,
    /// `|‖Ω‖_F² − (n−p)ε²|`.
    pub rela4_defect: f64,
}

impl LemmaSample {
    pub fn holds(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.phi;
        self.margin >= -tol && self.rela2_margin >= -tol && self.rela3_margin >= -tol && self.rela4_defect <= tol
    }
}

pub fn lemma_samples(inst: &PerturbationInstance) -> Result<Vec<LemmaSample>> {
    (1..=EPS_GRID)
        .map(|k| {
            let c = inst.envelope_check(k as f64 / EPS_GRID as f64)?;
            Ok(LemmaSample {
                eps: c.eps,
                phi: c.phi,
                margin: c.margin(),
                rela2_margin: c.scaled_perturbation_margin(),
                rela3_margin: c.cross_term_margin(),
                rela4_defect: c.omega_defect(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub digest: InstanceDigest,
    pub d2: f64,
    pub d_inf: f64,
    pub s_values: SValues,
    pub s_tilde: usize,
    pub bounds: Vec<BoundResult>,
    pub slacks: Vec<Slack>,
    pub lemma: Vec<LemmaSample>,
}

impl Evaluation {
    pub fn violations(&self) -> impl Iterator<Item = &Slack> {
        self.slacks.iter().filter(|s| s.violated)
    }

    pub fn value(&self, id: BoundId) -> Option<f64> {
        self.bounds.iter().find(|b| b.id == id).and_then(|b| b.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TrialOutcome {
    Completed(Box<Evaluation>),
    /// Eigensolver, block-count or instance construction failure; not evidence against any bound.
    FailedInfrastructure { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub outcome: TrialOutcome,
}

impl TrialRecord {
    pub fn evaluation(&self) -> Option<&Evaluation> {
        match &self.outcome {
            TrialOutcome::Completed(e) => Some(e),
            TrialOutcome::FailedInfrastructure { .. } => None,
        }
    }
}

/// Spectrum of `Ã`, shifted exactly when `E = μI` and eigensolved otherwise.
///
/// A defective `Ã` loses about `u^{1/m}` of accuracy in a general eigensolver, which would
/// show up as spurious negative slack on bounds that hold with equality for `E = μI`.
pub fn perturbed_spectrum(inst: &PerturbationInstance) -> Result<Spectrum> {
    let e = inst.e();
    let mu = e[(0, 0)];
    if *e == ComplexMatrix::scalar(inst.n(), mu) {
        return Ok(inst.spec().eigenvalues().shifted(mu));
    }
    spectrum::eigenvalues(&inst.a_tilde())
}

fn evaluate(config: &SweepConfig, trial: usize) -> Result<Evaluation> {
    let inst = gen_instance(config, trial)?;
    let s_seed = config.seed ^ ((trial as u64) << 20);
    let mut e = evaluate_instance(&inst, config.s_mode, &config.tolerances, s_seed)?;
    e.digest.perturbation = Some(config.perturbation_for(trial));
    e.digest.target_kappa = Some(config.kappa_for(trial));
    Ok(e)
}

/// Spectra, matching, every bound with its slack, and the envelope grid for one instance.
pub fn evaluate_instance(inst: &PerturbationInstance, s_mode: SMode, tol: &Tolerances, s_seed: u64) -> Result<Evaluation> {
    let a_spec = inst.spec().eigenvalues();
    let a_tilde = perturbed_spectrum(inst)?;
    let matching = spectrum::optimal_match(&a_spec, &a_tilde)?;
    let n = inst.n();
    let (s_values, s_tilde) = match s_mode {
        SMode::Pessimistic => (SValues::pessimistic(n), 1),
        SMode::Computed => {
            let opts = tol.block_options();
            let s = computed_s_values(inst, &opts, s_seed)?;
            let s_tilde = block::s_number_with(&inst.a_tilde(), &opts, s_seed)?.s;
            (s, s_tilde)
        }
    };
    let results = all_bounds(inst, &s_values, s_tilde)?;
    let slacks = results
        .iter()
        .filter_map(|r| {
            r.value.map(|value| Slack {
                id: r.id,
                value,
                slack: value - matching.d2,
                violated: value - matching.d2 < -tol.violation * (1.0 + value),
            })
        })
        .collect();
    Ok(Evaluation {
        digest: InstanceDigest::of(inst, None, None)?,
        d2: matching.d2,
        d_inf: matching.d_inf,
        s_values,
        s_tilde,
        bounds: results,
        slacks,
        lemma: lemma_samples(inst)?,
    })
}

pub fn run_trial(config: &SweepConfig, trial: usize) -> TrialRecord {
    let outcome = match evaluate(config, trial) {
        Ok(e) => TrialOutcome::Completed(Box::new(e)),
        Err(e) => TrialOutcome::FailedInfrastructure { message: e.to_string() },
    };
    TrialRecord { trial, outcome }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessCheck {
    /// The bound that should be larger.
    pub baseline: BoundId,
    pub refined: BoundId,
    /// Minimum of `baseline − refined` over completed trials.
    pub min_difference: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub completed: usize,
    pub failed_infrastructure: usize,
    /// Applicable (trial, bound) pairs with negative slack beyond tolerance.
    pub violations: usize,
    pub min_slack: BTreeMap<BoundId, f64>,
    pub sharpness: Vec<SharpnessCheck>,
    /// Minimum over all samples of each envelope quantity divided by `Φ(ε)` (samples with `Φ > 0`).
    pub min_lemma_margin: Option<f64>,
    pub min_rela2_margin: Option<f64>,
    pub min_rela3_margin: Option<f64>,
    pub max_rela4_defect: Option<f64>,
    pub lemma_failures: usize,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.violations == 0
            && self.failed_infrastructure == 0
            && self.lemma_failures == 0
            && self.sharpness.iter().all(|s| s.passed)
    }

    /// Failures of a proven inequality, as opposed to infrastructure trouble.
    pub fn found_violation(&self) -> bool {
        self.violations > 0 || self.lemma_failures > 0 || self.sharpness.iter().any(|s| !s.passed)
    }
}

fn fold_min(acc: &mut Option<f64>, v: f64) {
    *acc = Some(acc.map_or(v, |a| a.min(v)));
}

pub fn summarize(records: &[TrialRecord], tol: &Tolerances) -> Summary {
    let evals: Vec<&Evaluation> = records.iter().filter_map(TrialRecord::evaluation).collect();
    let mut min_slack: BTreeMap<BoundId, f64> = BTreeMap::new();
    let mut violations = 0;
    for s in evals.iter().flat_map(|e| &e.slacks) {
        let entry = min_slack.entry(s.id).or_insert(s.slack);
        *entry = entry.min(s.slack);
        violations += usize::from(s.violated);
    }
    let sharpness = [(BoundId::Song, BoundId::Up1_1), (BoundId::LiChen, BoundId::Up2_1)]
        .into_iter()
        .map(|(baseline, refined)| {
            let mut min_difference = None;
            for e in &evals {
                if let (Some(b), Some(r)) = (e.value(baseline), e.value(refined)) {
                    fold_min(&mut min_difference, b - r);
                }
            }
            SharpnessCheck {
                baseline,
                refined,
                min_difference,
                passed: min_difference.is_none_or(|d| d >= -tol.sharpness),
            }
        })
        .collect();
    let (mut margin, mut rela2, mut rela3, mut rela4) = (None, None, None, None);
    let mut lemma_failures = 0;
    for s in evals.iter().flat_map(|e| &e.lemma) {
        lemma_failures += usize::from(!s.holds(tol.lemma));
        if s.phi > 0.0 {
            fold_min(&mut margin, s.margin / s.phi);
            fold_min(&mut rela2, s.rela2_margin / s.phi);
            fold_min(&mut rela3, s.rela3_margin / s.phi);
            fold_min(&mut rela4, -s.rela4_defect / s.phi);
        }
    }
    Summary {
        trials: records.len(),
        completed: evals.len(),
        failed_infrastructure: records.len() - evals.len(),
        violations,
        min_slack,
        sharpness,
        min_lemma_margin: margin,
        min_rela2_margin: rela2,
        min_rela3_margin: rela3,
        max_rela4_defect: rela4.map(|v: f64| -v),
        lemma_failures,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: SweepConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Runs trials in parallel; records come back in trial order regardless of scheduling.
pub fn run_sweep(config: &SweepConfig) -> Result<Report> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, trial))
        .collect();
    let summary = summarize(&records, &config.tolerances);
    Ok(Report {
        config: config.clone(),
        records,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub id: BoundId,
    pub closed_form: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarTable {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub t: f64,
    pub s_values: SValues,
    /// `√n|t|`.
    pub d2_closed: f64,
    /// Optimal matching of the computed spectra.
    pub d2_numeric: f64,
    pub rows: Vec<TableRow>,
}

impl ScalarTable {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }
}

/// The eight bounds for `E = tI`, closed form beside numeric evaluation.
pub fn example_scalar_table(n: usize, p: usize, m: usize, t: f64, spec: &JordanSpec, s_mode: SMode) -> Result<ScalarTable> {
    if spec.n() != n || spec.p() != p || spec.m() != m {
        return Err(Error::Config(format!(
            "Jordan data has (n, p, m) = ({}, {}, {}), expected ({n}, {p}, {m})",
            spec.n(),
            spec.p(),
            spec.m()
        )));
    }
    let nf = n as f64;
    if !(t != 0.0 && t.abs() < 1.0 / nf.sqrt()) {
        return Err(Error::Config(format!("need 0 < |t| < 1/√n, got t = {t}")));
    }
    let inst = PerturbationInstance::new(spec.clone(), ComplexMatrix::scalar(n, C64::new(t, 0.0)))?;
    let s = match s_mode {
        SMode::Pessimistic => SValues::pessimistic(n),
        SMode::Computed => computed_s_values(&inst, &BlockOptions::default(), 0)?,
    };
    let mut numeric = bounds::baseline_bounds(&inst, &s)?;
    numeric.extend(bounds::new_bounds_complex(&inst, &s)?);
    let value = |id: BoundId| numeric.iter().find(|r| r.id == id).and_then(|r| r.value).unwrap_or(f64::NAN);

    let (pf, mf, at) = (p as f64, m as f64, t.abs());
    let s1 = s.s1 as f64;
    let exact = nf.sqrt() * at;
    let closed = [
        (
            BoundId::Song,
            ((nf - pf).sqrt() + 1.0) * nf.powf(0.5 + 0.5 / mf) * at.powf(1.0 / mf),
        ),
        (
            BoundId::LiChen,
            (s1 * (nf - pf + 1.0 + 2.0 * at * (nf * nf - nf * pf).sqrt())).sqrt()
                * nf.powf(0.5 / mf)
                * at.powf(1.0 / mf),
        ),
        (
            BoundId::Up1_1,
            ((nf - pf) * nf.powf(1.0 + 1.0 / mf) * at.powf(2.0 / mf) + nf * at * at).sqrt(),
        ),
        (
            BoundId::Up2_1,
            (s1 * (nf - pf) * nf.powf(1.0 / mf) * at.powf(2.0 / mf) + nf * at * at).sqrt(),
        ),
        (BoundId::Up1_2, exact),
        (BoundId::Up2_2, exact),
        (BoundId::Up1_3, exact),
        (BoundId::Up2_3, exact),
    ];
    let rows = closed
        .into_iter()
        .map(|(id, closed_form)| {
            let numeric = value(id);
            TableRow {
                id,
                closed_form,
                numeric,
                rel_error: (numeric - closed_form).abs() / closed_form.abs(),
            }
        })
        .collect();
    let a_spec = spec.eigenvalues();
    let a_tilde = perturbed_spectrum(&inst)?;
    let d2_numeric = spectrum::optimal_match(&a_spec, &a_tilde)?.d2;
    Ok(ScalarTable {
        n,
        p,
        m,
        t,
        s_values: s,
        d2_closed: exact,
        d2_numeric,
        rows,
    })
}
