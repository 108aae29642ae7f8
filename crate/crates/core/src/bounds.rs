//! Upper bounds on the matching distance `𝔻₂` between the spectra of `A` and `Ã = A + E`.
//!
//! Every bound is a closed-form expression in a handful of scalars:
//! `n`, the block count `p`, the largest block size `m`, `δ(E_Q)`, `‖E_Q‖_F`,
//! `|tr E|` and, for the refined bounds, block counts `s₁…s₄` supplied by the caller.
//! Each result records the case split it took so that branch selection can be audited.
//!
//! Bounds for normal `A` (`HW`, `SUN`, `LI_SUN`, `XU1`, `XU2`, `XU_HERMITIAN`) use `E`
//! itself; the Jordan-based bounds use `E_Q = Q⁻¹EQ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block;
use crate::error::{Error, Result};
use crate::jordan::PerturbationInstance;
use crate::matrix::ComplexMatrix;

/// Relative commutator tolerance used to decide whether `Ã` is normal for `HW`.
pub const NORMAL_TOL: f64 = 1e-10;

/// `‖E_Q‖_F ≤ ZERO_TOL·(1 + ‖A‖_F)` is treated as no perturbation at all.
pub const ZERO_TOL: f64 = 1e-14;

/// A bound is violated when `value − 𝔻₂ < −VIOLATION_TOL·(1 + value)`.
pub const VIOLATION_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundId {
    #[serde(rename = "HW")]
    Hw,
    #[serde(rename = "SUN")]
    Sun,
    #[serde(rename = "LI_SUN")]
    LiSun,
    #[serde(rename = "XU1")]
    Xu1,
    #[serde(rename = "XU2")]
    Xu2,
    #[serde(rename = "XU_HERMITIAN")]
    XuHermitian,
    #[serde(rename = "SONG")]
    Song,
    #[serde(rename = "LI_CHEN")]
    LiChen,
    #[serde(rename = "UP1_1")]
    Up1_1,
    #[serde(rename = "UP1_2")]
    Up1_2,
    #[serde(rename = "UP1_3")]
    Up1_3,
    #[serde(rename = "UP2_1")]
    Up2_1,
    #[serde(rename = "UP2_2")]
    Up2_2,
    #[serde(rename = "UP2_3")]
    Up2_3,
    #[serde(rename = "UP3_1")]
    Up3_1,
    #[serde(rename = "UP3_2")]
    Up3_2,
    #[serde(rename = "UP3_3")]
    Up3_3,
}

impl BoundId {
    pub const ALL: [BoundId; 17] = [
        BoundId::Hw,
        BoundId::Sun,
        BoundId::LiSun,
        BoundId::Xu1,
        BoundId::Xu2,
        BoundId::XuHermitian,
        BoundId::Song,
        BoundId::LiChen,
        BoundId::Up1_1,
        BoundId::Up1_2,
        BoundId::Up1_3,
        BoundId::Up2_1,
        BoundId::Up2_2,
        BoundId::Up2_3,
        BoundId::Up3_1,
        BoundId::Up3_2,
        BoundId::Up3_3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Hw => "HW",
            BoundId::Sun => "SUN",
            BoundId::LiSun => "LI_SUN",
            BoundId::Xu1 => "XU1",
            BoundId::Xu2 => "XU2",
            BoundId::XuHermitian => "XU_HERMITIAN",
            BoundId::Song => "SONG",
            BoundId::LiChen => "LI_CHEN",
            BoundId::Up1_1 => "UP1_1",
            BoundId::Up1_2 => "UP1_2",
            BoundId::Up1_3 => "UP1_3",
            BoundId::Up2_1 => "UP2_1",
            BoundId::Up2_2 => "UP2_2",
            BoundId::Up2_3 => "UP2_3",
            BoundId::Up3_1 => "UP3_1",
            BoundId::Up3_2 => "UP3_2",
            BoundId::Up3_3 => "UP3_3",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parse {
                location: "bound_id".into(),
                message: format!("unknown bound id {s:?}"),
            })
    }
}

/// Scalars a bound was evaluated from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputsDigest {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    /// `δ(E_Q)` (or `δ(E)` for the normal-`A` bounds).
    pub delta: f64,
    /// `‖E_Q‖_F` (or `‖E‖_F`).
    pub norm: f64,
    pub trace_abs: f64,
    /// The block-count parameter used by the branch taken, when the bound has one.
    pub s: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub id: BoundId,
    pub branch: String,
    /// `None` exactly when the bound does not apply to this instance.
    pub value: Option<f64>,
    pub reason: Option<String>,
    pub inputs: InputsDigest,
}

impl BoundResult {
    fn applicable(id: BoundId, branch: impl Into<String>, value: f64, inputs: InputsDigest) -> Self {
        Self {
            id,
            branch: branch.into(),
            value: Some(value),
            reason: None,
            inputs,
        }
    }

    fn inapplicable(id: BoundId, reason: impl Into<String>, inputs: InputsDigest) -> Self {
        Self {
            id,
            branch: "n/a".into(),
            value: None,
            reason: Some(reason.into()),
            inputs,
        }
    }

    pub fn is_applicable(&self) -> bool {
        self.value.is_some()
    }
}

/// `sᵢ = n + 1 − s(·)` for the transformed perturbed matrices.
///
/// * `s1`: `T⁻¹Q⁻¹ÃQT` at `ε = ‖E_Q‖_F^{1/m}`
/// * `s2`: `Q⁻¹ÃQ`
/// * `s3`: `T⁻¹Q⁻¹ÃQT` at `ε = δ(E_Q)^{1/m}`
/// * `s4`: `T⁻¹Q⁻¹ÃQT` at the minimizer `ε*` of `Φ`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SValues {
    pub s1: usize,
    pub s2: usize,
    pub s3: usize,
    pub s4: usize,
}

impl SValues {
    /// `s(·) = 1` everywhere, i.e. `sᵢ = n`; valid for every instance.
    pub fn pessimistic(n: usize) -> Self {
        Self {
            s1: n,
            s2: n,
            s3: n,
            s4: n,
        }
    }

    pub fn from_block_counts(n: usize, s1: usize, s2: usize, s3: usize, s4: usize) -> Self {
        let f = |s: usize| n + 1 - s.clamp(1, n);
        Self {
            s1: f(s1),
            s2: f(s2),
            s3: f(s3),
            s4: f(s4),
        }
    }
}

/// What is known about `A` when evaluating the normal-`A` bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixClass {
    General,
    Normal,
    Hermitian,
}

/// Hoffman–Wielandt and its refinements for normal `A`; `s_tilde = s(Ã)`.
pub fn normal_bounds(
    e: &ComplexMatrix,
    a_tilde: &ComplexMatrix,
    class: MatrixClass,
    s_tilde: usize,
) -> Result<Vec<BoundResult>> {
    let n = e.order("normal_bounds")?;
    if a_tilde.nrows() != n || a_tilde.ncols() != n {
        return Err(Error::Dimension {
            op: "normal_bounds",
            detail: "E and Ã differ in shape".into(),
        });
    }
    let norm = e.frobenius_norm();
    let delta = e.delta()?;
    let s_tilde = s_tilde.clamp(1, n);
    let digest = |s: Option<usize>| InputsDigest {
        n,
        p: n,
        m: 1,
        delta,
        norm,
        trace_abs: e.trace().map(|t| t.norm()).unwrap_or(0.0),
        s,
    };
    let nf = n as f64;
    let sf = s_tilde as f64;
    let a_normal = class != MatrixClass::General;
    let not_normal = "A is not normal";

    let mut out = Vec::with_capacity(6);
    out.push(if !a_normal {
        BoundResult::inapplicable(BoundId::Hw, not_normal, digest(None))
    } else if !block::is_normal(a_tilde, NORMAL_TOL)? {
        BoundResult::inapplicable(BoundId::Hw, "perturbed matrix is not normal", digest(None))
    } else {
        BoundResult::applicable(BoundId::Hw, "normal", norm, digest(None))
    });
    let normal_only: [(BoundId, Option<usize>, f64); 4] = [
        (BoundId::Sun, None, nf.sqrt() * norm),
        (BoundId::LiSun, Some(s_tilde), (nf - sf + 1.0).sqrt() * norm),
        (BoundId::Xu1, None, (norm * norm + (nf - 1.0) * delta * delta).sqrt()),
        (BoundId::Xu2, Some(s_tilde), (norm * norm + (nf - sf) * delta * delta).sqrt()),
    ];
    for (id, s, value) in normal_only {
        out.push(if a_normal {
            BoundResult::applicable(id, "normal", value, digest(s))
        } else {
            BoundResult::inapplicable(id, not_normal, digest(s))
        });
    }
    out.push(if class == MatrixClass::Hermitian {
        BoundResult::applicable(
            BoundId::XuHermitian,
            "hermitian",
            (norm * norm + delta * delta).sqrt(),
            digest(None),
        )
    } else {
        BoundResult::inapplicable(BoundId::XuHermitian, "A is not Hermitian", digest(None))
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
struct Scalars {
    n: usize,
    p: usize,
    m: usize,
    delta: f64,
    norm: f64,
    trace_abs: f64,
    zero: bool,
}

impl Scalars {
    fn of(inst: &PerturbationInstance) -> Self {
        let spec = inst.spec();
        let a_norm = inst.a().frobenius_norm();
        Self {
            n: spec.n(),
            p: spec.p(),
            m: spec.m(),
            delta: inst.delta_eq(),
            norm: inst.norm_eq(),
            trace_abs: inst.trace_e().norm(),
            zero: inst.norm_eq() <= ZERO_TOL * (1.0 + a_norm),
        }
    }

    fn digest(&self, s: Option<usize>) -> InputsDigest {
        InputsDigest {
            n: self.n,
            p: self.p,
            m: self.m,
            delta: self.delta,
            norm: self.norm,
            trace_abs: self.trace_abs,
            s,
        }
    }

    fn nmp(&self) -> f64 {
        (self.n - self.p) as f64
    }

    fn trace_term(&self) -> f64 {
        self.trace_abs * self.trace_abs / self.n as f64
    }

    /// `(√(n−p) + δ)²`, the `ε = 1` value of `Φ` without the trace term.
    fn phi_one_core(&self) -> f64 {
        (self.nmp().sqrt() + self.delta).powi(2)
    }

    fn c1(&self) -> bool {
        self.m >= 2 && self.c_lhs() > (self.m as f64 - 1.0) * self.delta * self.delta
    }

    fn c_lhs(&self) -> f64 {
        self.nmp() + 2.0 * self.nmp().sqrt() * self.delta
    }

    /// Bound built on `ε = ‖E_Q‖_F^{1/m}` (small) or `ε = 1`.
    fn norm_family(&self, k_small: usize, k_large: usize) -> (&'static str, f64, usize) {
        let mf = self.m as f64;
        if self.norm < 1.0 {
            let ratio = if self.delta == 0.0 {
                0.0
            } else {
                (self.delta / self.norm).powi(2)
            };
            let core = (self.c_lhs() + ratio) * self.norm.powf(2.0 / mf);
            ("norm_eq<1", (k_small as f64 * core + self.trace_term()).sqrt(), k_small)
        } else {
            (
                "norm_eq>=1",
                (k_large as f64 * self.phi_one_core() + self.trace_term()).sqrt(),
                k_large,
            )
        }
    }

    /// Bound built on `ε = δ(E_Q)^{1/m}` (small) or `ε = 1`.
    fn delta_family(&self, k_small: usize, k_large: usize) -> (&'static str, f64, usize) {
        let mf = self.m as f64;
        if self.delta < 1.0 {
            let core = (self.c_lhs() + 1.0) * self.delta.powf(2.0 / mf);
            ("delta_eq<1", (k_small as f64 * core + self.trace_term()).sqrt(), k_small)
        } else {
            (
                "delta_eq>=1",
                (k_large as f64 * self.phi_one_core() + self.trace_term()).sqrt(),
                k_large,
            )
        }
    }

    /// Bound built on the minimizer of `Φ` (C₁) or `ε = 1` (C₂, including `m = 1`).
    fn optimal_family(&self, k_small: usize, k_large: usize) -> (&'static str, f64, usize) {
        let mf = self.m as f64;
        if self.c1() {
            let core = mf
                * (self.c_lhs() / (mf - 1.0)).powf(1.0 - 1.0 / mf)
                * self.delta.powf(2.0 / mf);
            ("C1", (k_small as f64 * core + self.trace_term()).sqrt(), k_small)
        } else {
            let label = if self.m == 1 { "C2:m=1" } else { "C2" };
            (
                label,
                (k_large as f64 * self.phi_one_core() + self.trace_term()).sqrt(),
                k_large,
            )
        }
    }

    fn zero_result(&self, id: BoundId) -> BoundResult {
        BoundResult::applicable(id, "zero-perturbation", 0.0, self.digest(None))
    }
}

fn check_s(values: &SValues, n: usize) -> Result<()> {
    for (name, s) in [("s1", values.s1), ("s2", values.s2), ("s3", values.s3), ("s4", values.s4)] {
        if s == 0 || s > n {
            return Err(Error::Domain(format!("{name} = {s} outside [1, {n}]")));
        }
    }
    Ok(())
}

/// The two earlier Jordan-based bounds: `SONG` and `LI_CHEN`.
pub fn baseline_bounds(inst: &PerturbationInstance, s: &SValues) -> Result<Vec<BoundResult>> {
    let sc = Scalars::of(inst);
    check_s(s, sc.n)?;
    if sc.zero {
        return Ok(vec![sc.zero_result(BoundId::Song), sc.zero_result(BoundId::LiChen)]);
    }
    let nf = sc.n as f64;
    let mf = sc.m as f64;
    let root_nmp = sc.nmp().sqrt();
    let lead = nf.sqrt() * (root_nmp + 1.0);
    let (song_branch, song) = if sc.norm < 1.0 {
        ("norm_eq<1", lead * sc.norm.powf(1.0 / mf))
    } else {
        ("norm_eq>=1", lead * sc.norm)
    };
    let (li_branch, li, li_s) = if sc.norm < 1.0 {
        let v = (s.s1 as f64 * (sc.nmp() + 1.0 + 2.0 * root_nmp * sc.norm)).sqrt() * sc.norm.powf(1.0 / mf);
        ("norm_eq<1", v, s.s1)
    } else {
        let v = (s.s2 as f64 * (sc.nmp() + 2.0 * root_nmp + sc.norm)).sqrt() * sc.norm.sqrt();
        ("norm_eq>=1", v, s.s2)
    };
    Ok(vec![
        BoundResult::applicable(BoundId::Song, song_branch, song, sc.digest(None)),
        BoundResult::applicable(BoundId::LiChen, li_branch, li, sc.digest(Some(li_s))),
    ])
}

/// `UP1_1…UP1_3` (leading factor `n`) and `UP2_1…UP2_3` (leading factors `s₁…s₄`).
pub fn new_bounds_complex(inst: &PerturbationInstance, s: &SValues) -> Result<Vec<BoundResult>> {
    let sc = Scalars::of(inst);
    check_s(s, sc.n)?;
    let ids = [
        BoundId::Up1_1,
        BoundId::Up1_2,
        BoundId::Up1_3,
        BoundId::Up2_1,
        BoundId::Up2_2,
        BoundId::Up2_3,
    ];
    if sc.zero {
        return Ok(ids.iter().map(|&id| sc.zero_result(id)).collect());
    }
    let n = sc.n;
    let evaluated = [
        (BoundId::Up1_1, sc.norm_family(n, n), false),
        (BoundId::Up1_2, sc.delta_family(n, n), false),
        (BoundId::Up1_3, sc.optimal_family(n, n), false),
        (BoundId::Up2_1, sc.norm_family(s.s1, s.s2), true),
        (BoundId::Up2_2, sc.delta_family(s.s3, s.s2), true),
        (BoundId::Up2_3, sc.optimal_family(s.s4, s.s2), true),
    ];
    Ok(evaluated
        .into_iter()
        .map(|(id, (branch, value, k), uses_s)| {
            BoundResult::applicable(id, branch, value, sc.digest(uses_s.then_some(k)))
        })
        .collect())
}

/// `UP3_1…UP3_3`: leading factor 2, only for real prescribed eigenvalues.
pub fn new_bounds_real(inst: &PerturbationInstance) -> Result<Vec<BoundResult>> {
    let sc = Scalars::of(inst);
    let ids = [BoundId::Up3_1, BoundId::Up3_2, BoundId::Up3_3];
    if !inst.spec().has_real_eigenvalues() {
        return Ok(ids
            .iter()
            .map(|&id| BoundResult::inapplicable(id, "A has non-real eigenvalues", sc.digest(None)))
            .collect());
    }
    if sc.zero {
        return Ok(ids.iter().map(|&id| sc.zero_result(id)).collect());
    }
    let evaluated = [
        (BoundId::Up3_1, sc.norm_family(2, 2)),
        (BoundId::Up3_2, sc.delta_family(2, 2)),
        (BoundId::Up3_3, sc.optimal_family(2, 2)),
    ];
    Ok(evaluated
        .into_iter()
        .map(|(id, (branch, value, _))| BoundResult::applicable(id, branch, value, sc.digest(None)))
        .collect())
}

/// `value − 𝔻₂` for one applicable bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub id: BoundId,
    pub value: f64,
    pub slack: f64,
    pub violated: bool,
}

pub fn is_violation(value: f64, d2: f64) -> bool {
    value - d2 < -VIOLATION_TOL * (1.0 + value)
}

pub fn verify_instance(results: &[BoundResult], d2: f64) -> Vec<Slack> {
    results
        .iter()
        .filter_map(|r| {
            r.value.map(|value| Slack {
                id: r.id,
                value,
                slack: value - d2,
                violated: is_violation(value, d2),
            })
        })
        .collect()
}
