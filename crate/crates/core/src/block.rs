//! Finest unitary block-diagonalization and the block count `s(M)`.
//!
//! `s(M)` is the largest number of square diagonal blocks that `UᴴMU` can have over
//! unitary `U`. The blocks of the finest such decomposition are the irreducible
//! invariant subspaces of the *-algebra generated by `M` and `Mᴴ`, and those are the
//! eigenspaces of a generic Hermitian element of its commutant
//!
//! ```text
//! 𝒞(M) = { X : MX = XM and MᴴX = XMᴴ }.
//! ```
//!
//! The procedure here:
//! 1. compute an orthonormal basis of `𝒞(M)` as the numerical null space of
//!    `X ↦ (MX − XM, MᴴX − XMᴴ)` (an `2n² × n²` SVD),
//! 2. draw a seeded random Hermitian `H ∈ 𝒞(M)`,
//! 3. cluster the eigenvalues of `H` by gaps, ordering the eigenvector basis by cluster,
//! 4. merge clusters that still couple in `UᴴMU`,
//! 5. repeat with three independent draws and insist they agree.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

/// Largest order for which the `2n² × n²` null-space solve is attempted.
pub const MAX_ORDER: usize = 40;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_GAP: f64 = 1e-6;
pub const DEFAULT_BLOCK_TOL: f64 = 1e-6;

const DRAWS: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockOptions {
    /// Null-space cutoff relative to the largest singular value of the commutator operator.
    pub tol: f64,
    /// Eigenvalue gap (relative to `‖H‖₂`) that separates clusters.
    pub gap: f64,
    /// Off-block residual (relative to `‖M‖_F`) above which two clusters are merged.
    pub block_tol: f64,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            gap: DEFAULT_GAP,
            block_tol: DEFAULT_BLOCK_TOL,
        }
    }
}

impl BlockOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub u: ComplexMatrix,
    pub block_sizes: Vec<usize>,
    pub s: usize,
}

/// Entries of `B` outside the diagonal blocks prescribed by `sizes`.
pub fn off_block(b: &ComplexMatrix, sizes: &[usize]) -> ComplexMatrix {
    let labels = block_labels(sizes);
    ComplexMatrix::from_fn(b.nrows(), b.ncols(), |i, j| {
        if labels[i] == labels[j] {
            C64::new(0.0, 0.0)
        } else {
            b[(i, j)]
        }
    })
}

fn block_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &sz)| std::iter::repeat_n(k, sz))
        .collect()
}

pub fn is_normal(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    m.order("is_normal")?;
    let mh = m.adjoint();
    let comm = m.commutator(&mh)?;
    Ok(comm.frobenius_norm() <= tol * m.frobenius_norm_sq())
}

/// Orthonormal (Frobenius inner product) basis of `{X : MX = XM, MᴴX = XMᴴ}`.
pub fn commutant_basis(m: &ComplexMatrix, tol: f64) -> Result<Vec<ComplexMatrix>> {
    let n = m.order("commutant_basis")?;
    if n > MAX_ORDER {
        return Err(Error::SizeLimit { n, max: MAX_ORDER });
    }
    let nn = n * n;
    let mh = m.adjoint();
    // vec(X) is row-major: column index l*n + j holds X[l, j]
    let mut op = DMatrix::<C64>::zeros(2 * nn, nn);
    for (block, a) in [m, &mh].into_iter().enumerate() {
        let base = block * nn;
        for i in 0..n {
            for j in 0..n {
                let row = base + i * n + j;
                for l in 0..n {
                    op[(row, l * n + j)] += a[(i, l)];
                    op[(row, i * n + l)] -= a[(l, j)];
                }
            }
        }
    }
    let svd = op.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * smax;
    let basis = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &sv)| sv <= cutoff)
        .map(|(k, _)| ComplexMatrix::from_fn(n, n, |i, j| v_t[(k, i * n + j)].conj()))
        .collect();
    Ok(basis)
}

/// `s(M)` with its unitary witness, using default gap and block tolerances.
pub fn s_number(m: &ComplexMatrix, tol: f64, seed: u64) -> Result<BlockDecomposition> {
    s_number_with(m, &BlockOptions::with_tol(tol), seed)
}

pub fn s_number_with(m: &ComplexMatrix, opts: &BlockOptions, seed: u64) -> Result<BlockDecomposition> {
    let n = m.order("s_number")?;
    if n == 1 {
        return Ok(BlockDecomposition {
            u: ComplexMatrix::identity(1),
            block_sizes: vec![1],
            s: 1,
        });
    }
    let basis = commutant_basis(m, opts.tol)?;
    let mut first: Option<BlockDecomposition> = None;
    for draw in 0..DRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw);
        let h = random_hermitian_element(&basis, n, &mut rng);
        let dec = decompose(m, &h, opts)?;
        match &first {
            None => first = Some(dec),
            Some(f) if f.s != dec.s => {
                return Err(Error::Ambiguous {
                    first: f.s,
                    second: dec.s,
                })
            }
            Some(_) => {}
        }
    }
    Ok(first.expect("at least one draw"))
}

fn random_hermitian_element(basis: &[ComplexMatrix], n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for b in basis {
        let gamma = C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        let g = b.scale(gamma);
        h = &h + &(&g + &g.adjoint()).scale(C64::new(0.5, 0.0));
    }
    h
}

fn decompose(m: &ComplexMatrix, h: &ComplexMatrix, opts: &BlockOptions) -> Result<BlockDecomposition> {
    let n = m.nrows();
    let (vals, vecs) = hermitian_eigen(h)?;
    let hnorm = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);

    // clusters of consecutive eigenvalues
    let mut cluster_of = vec![0usize; n];
    let mut clusters = 1;
    for k in 1..n {
        if vals[k] - vals[k - 1] > opts.gap * hnorm {
            clusters += 1;
        }
        cluster_of[k] = clusters - 1;
    }

    // merge clusters that still couple in UᴴMU
    let b = m.unitary_similarity(&vecs)?;
    let mnorm = m.frobenius_norm();
    let mut group: Vec<usize> = (0..clusters).collect();
    loop {
        let mut coupling = vec![vec![0.0f64; clusters]; clusters];
        for i in 0..n {
            for j in 0..n {
                let (gi, gj) = (group[cluster_of[i]], group[cluster_of[j]]);
                if gi != gj {
                    coupling[gi.min(gj)][gi.max(gj)] += b[(i, j)].norm_sqr();
                }
            }
        }
        let offender = (0..clusters)
            .flat_map(|a| (a + 1..clusters).map(move |c| (a, c)))
            .find(|&(a, c)| coupling[a][c].sqrt() > opts.block_tol * mnorm);
        match offender {
            Some((a, c)) => {
                for g in group.iter_mut() {
                    if *g == c {
                        *g = a;
                    }
                }
            }
            None => break,
        }
    }

    // order columns group by group, groups by first appearance
    let mut group_order: Vec<usize> = Vec::new();
    for k in 0..n {
        let g = group[cluster_of[k]];
        if !group_order.contains(&g) {
            group_order.push(g);
        }
    }
    let mut columns = Vec::with_capacity(n);
    let mut block_sizes = Vec::with_capacity(group_order.len());
    for &g in &group_order {
        let before = columns.len();
        columns.extend((0..n).filter(|&k| group[cluster_of[k]] == g));
        block_sizes.push(columns.len() - before);
    }
    let u = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, columns[j])]);
    Ok(BlockDecomposition {
        u,
        s: block_sizes.len(),
        block_sizes,
    })
}
