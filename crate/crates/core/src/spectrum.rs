//! Spectra as multisets and the optimal matching distances between them.
//!
//! For spectra `a = {λᵢ}` and `b = {λ̃ⱼ}` of equal size the matching distance is
//!
//! ```text
//! 𝔻₂ = min_π ( Σᵢ |λ̃_{π(i)} − λᵢ|² )^{1/2}
//! ```
//!
//! solved exactly as a linear assignment problem on the cost matrix `|λ̃ⱼ − λᵢ|²`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Largest size accepted by [`brute_force_match`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// Multiset of complex values kept in lexicographic `(re, im)` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<C64>", into = "Vec<C64>")]
pub struct Spectrum {
    values: Vec<C64>,
}

fn canonical_cmp(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl Spectrum {
    pub fn new(mut values: Vec<C64>) -> Self {
        values.sort_by(canonical_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shifted(&self, t: C64) -> Self {
        Self::new(self.values.iter().map(|&z| z + t).collect())
    }
}

impl From<Vec<C64>> for Spectrum {
    fn from(values: Vec<C64>) -> Self {
        Self::new(values)
    }
}

impl From<Spectrum> for Vec<C64> {
    fn from(s: Spectrum) -> Self {
        s.values
    }
}

/// A permutation pairing `a[i]` with `b[permutation[i]]`, with its ℓ₂ and ℓ_∞ distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub permutation: Vec<usize>,
    pub d2: f64,
    pub d_inf: f64,
}

impl Matching {
    fn from_permutation(a: &Spectrum, b: &Spectrum, permutation: Vec<usize>) -> Self {
        let dists = a
            .values
            .iter()
            .zip(&permutation)
            .map(|(ai, &j)| (b.values[j] - ai).norm());
        let (sum_sq, d_inf) = dists.fold((0.0, 0.0f64), |(s, m), d| (s + d * d, m.max(d)));
        Self {
            permutation,
            d2: sum_sq.sqrt(),
            d_inf,
        }
    }
}

pub fn eigenvalues(m: &ComplexMatrix) -> Result<Spectrum> {
    eigen::eigenvalues(m).map(Spectrum::new)
}

fn check_sizes(a: &Spectrum, b: &Spectrum, op: &'static str) -> Result<usize> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension {
            op,
            detail: format!("spectra of sizes {} and {}", a.len(), b.len()),
        });
    }
    Ok(a.len())
}

/// Exact minimizer of `Σ|b_{π(i)} − aᵢ|²` (shortest augmenting paths with potentials).
pub fn optimal_match(a: &Spectrum, b: &Spectrum) -> Result<Matching> {
    let n = check_sizes(a, b, "optimal_match")?;
    let cost = |i: usize, j: usize| (b.values[j] - a.values[i]).norm_sqr();

    // 1-based arrays; index 0 is the virtual root of each augmenting path.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        row_of_col[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = col0;
                }
                // strict comparison keeps the lowest column index on ties
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            row_of_col[col0] = row_of_col[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut permutation = vec![0usize; n];
    for j in 1..=n {
        permutation[row_of_col[j] - 1] = j - 1;
    }
    Ok(Matching::from_permutation(a, b, permutation))
}

/// Exhaustive minimum over all `n!` permutations; `n ≤ 8`.
pub fn brute_force_match(a: &Spectrum, b: &Spectrum) -> Result<Matching> {
    let n = check_sizes(a, b, "brute_force_match")?;
    if n > BRUTE_FORCE_MAX {
        return Err(Error::SizeLimit {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| (b.values[j] - a.values[i]).norm_sqr())
            .sum()
    };
    // Heap's algorithm, iterative form
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = cost(&perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let c = cost(&perm);
            if c < best_cost {
                best_cost = c;
                best.clone_from(&perm);
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(Matching::from_permutation(a, b, best))
}
