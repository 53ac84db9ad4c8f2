//! Random-matrix realization of Wigner integrals.
//!
//! Independent GUE matrices `A_j`, one per grid cell, stand in for `I_1(e_j)` with
//! `e_j = h^{-1/2} 1_{cell j}`. Higher integrals follow from the product formula
//! peeled at the last argument:
//! `I_n(f) = sum_j h^{1/2} I_{n-1}(f(.., j)) A_j - h I_{n-2}(sum_j f(.., j, j))`,
//! with order 2 read off the products `A_i A_j` directly. Normalized traces of
//! polynomials in the result converge to the free moments with an `O(1/d^2)` bias.
//!
//! Complex matrices are stored as a pair of real matrices so that products run
//! through the real `gemm`, three per complex product. Products known to be
//! Hermitian, such as powers of a Hermitian matrix, fill only the block upper
//! triangle.

use std::collections::HashMap;

use freechaos_core::{Kernel, Kind};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::Error;

/// Default cap on complex matrix products per integral.
pub const DEFAULT_COST_GUARD: usize = 10_000;

const HERMITIAN_BLOCKS: usize = 4;

/// A complex `d x d` matrix `re + i im`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl CMatrix {
    pub fn zeros(d: usize) -> Self {
        Self {
            re: DMatrix::zeros(d, d),
            im: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            re: DMatrix::identity(d, d),
            im: DMatrix::zeros(d, d),
        }
    }

    pub fn dimension(&self) -> usize {
        self.re.nrows()
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &Self) {
        self.re.zip_apply(&other.re, |a, b| *a += c * b);
        self.im.zip_apply(&other.im, |a, b| *a += c * b);
    }

    /// `self += c * I`.
    pub fn add_identity(&mut self, c: f64) {
        for i in 0..self.dimension() {
            self.re[(i, i)] += c;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    /// Product with three real multiplications:
    /// `(A + iB)(C + iD) = [(A+B)C - B(C+D)] + i[(A+B)C + A(D-C)]`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut re = (&self.re + &self.im) * &other.re;
        let mut im = re.clone();
        im.gemm(1.0, &self.re, &(&other.im - &other.re), 1.0);
        re.gemm(-1.0, &self.im, &(&other.re + &other.im), 1.0);
        Self { re, im }
    }

    /// [`CMatrix::mul`] for factors whose product is known to be Hermitian, such as
    /// two powers of one Hermitian matrix. Only the block upper triangle is
    /// multiplied; the rest is mirrored.
    pub fn mul_hermitian(&self, other: &Self) -> Self {
        self.mul_hermitian_blocks(other, HERMITIAN_BLOCKS)
    }

    fn mul_hermitian_blocks(&self, other: &Self, blocks: usize) -> Self {
        let d = self.dimension();
        let sum = &self.re + &self.im;
        let other_sum = &other.re + &other.im;
        let other_diff = &other.im - &other.re;
        let mut re = DMatrix::zeros(d, d);
        let mut im = DMatrix::zeros(d, d);
        let edges: Vec<usize> = (0..=blocks).map(|b| b * d / blocks).collect();
        for bi in 0..blocks {
            let (r0, rs) = (edges[bi], edges[bi + 1] - edges[bi]);
            for bj in bi..blocks {
                let (c0, cs) = (edges[bj], edges[bj + 1] - edges[bj]);
                let mut re_b = re.view_mut((r0, c0), (rs, cs));
                re_b.gemm(1.0, &sum.rows(r0, rs), &other.re.columns(c0, cs), 0.0);
                let mut im_b = im.view_mut((r0, c0), (rs, cs));
                im_b.copy_from(&re.view((r0, c0), (rs, cs)));
                im_b.gemm(1.0, &self.re.rows(r0, rs), &other_diff.columns(c0, cs), 1.0);
                re.view_mut((r0, c0), (rs, cs)).gemm(
                    -1.0,
                    &self.im.rows(r0, rs),
                    &other_sum.columns(c0, cs),
                    1.0,
                );
            }
        }
        for bj in 0..blocks {
            for j in edges[bj]..edges[bj + 1] {
                for i in edges[bj + 1]..d {
                    re[(i, j)] = re[(j, i)];
                    im[(i, j)] = -im[(j, i)];
                }
            }
        }
        Self { re, im }
    }

    /// `Re tr(self) / d`.
    pub fn normalized_trace(&self) -> f64 {
        self.re.trace() / self.dimension() as f64
    }

    /// `Re tr(self * other) / d` without forming the product.
    pub fn normalized_trace_product(&self, other: &Self) -> f64 {
        let d = self.dimension();
        let mut acc = 0.0;
        for j in 0..d {
            for i in 0..d {
                acc += self.re[(i, j)] * other.re[(j, i)] - self.im[(i, j)] * other.im[(j, i)];
            }
        }
        acc / d as f64
    }

    /// `Re tr(self * other) / d` for Hermitian `other`, as `sum_ij a_ij conj(b_ij)`
    /// which reads both matrices contiguously.
    pub fn normalized_trace_product_hermitian(&self, other: &Self) -> f64 {
        (self.re.dot(&other.re) + self.im.dot(&other.im)) / self.dimension() as f64
    }

    /// Largest deviation from being Hermitian.
    pub fn hermitian_defect(&self) -> f64 {
        let a = self.adjoint();
        (&self.re - a.re)
            .abs()
            .max()
            .max((&self.im - a.im).abs().max())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEnsemble {
    pub dimension: usize,
    pub matrices: Vec<CMatrix>,
    pub seed: u64,
    pub stream: u64,
}

/// `count` independent GUE matrices of size `d` with `E|a_ij|^2 = 1/d`.
pub fn sample_ensemble(count: usize, d: usize, seed: u64) -> Result<MatrixEnsemble, Error> {
    sample_ensemble_stream(count, d, seed, 0)
}

/// Like [`sample_ensemble`] on an independent stream of the same seed.
pub fn sample_ensemble_stream(
    count: usize,
    d: usize,
    seed: u64,
    stream: u64,
) -> Result<MatrixEnsemble, Error> {
    if d < 2 {
        return Err(Error::Config(format!(
            "matrix dimension must be at least 2, got {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let diag = (1.0 / d as f64).sqrt();
    let off = (0.5 / d as f64).sqrt();
    let matrices = (0..count)
        .map(|_| {
            let mut a = CMatrix::zeros(d);
            for i in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                a.re[(i, i)] = z * diag;
                for j in i + 1..d {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    a.re[(i, j)] = x * off;
                    a.re[(j, i)] = x * off;
                    a.im[(i, j)] = y * off;
                    a.im[(j, i)] = -y * off;
                }
            }
            a
        })
        .collect();
    Ok(MatrixEnsemble {
        dimension: d,
        matrices,
        seed,
        stream,
    })
}

/// Complex matrix products needed by [`integral_matrix`] for an order-`n` kernel on
/// `cells` cells: the `cells (cells + 1) / 2` basis pair products plus one product
/// per slice above order 2.
pub fn predicted_cost(order: usize, cells: usize) -> usize {
    if order < 2 {
        return 0;
    }
    let mut cost = vec![0usize; order + 1];
    for n in 3..=order {
        cost[n] = cells
            .saturating_mul(cost[n - 1].saturating_add(1))
            .saturating_add(cost[n - 2]);
    }
    (cells * (cells + 1) / 2).saturating_add(cost[order])
}

/// An ensemble with its basis pair products `A_i A_j` and anticommutators
/// `A_i A_j + A_j A_i`, computed on first use.
pub struct Realizer<'a> {
    ensemble: &'a MatrixEnsemble,
    pairs: HashMap<(usize, usize), CMatrix>,
    anticommutators: HashMap<(usize, usize), CMatrix>,
}

impl<'a> Realizer<'a> {
    pub fn new(ensemble: &'a MatrixEnsemble) -> Self {
        Self {
            ensemble,
            pairs: HashMap::new(),
            anticommutators: HashMap::new(),
        }
    }

    // (A_i + A_j)^2 - A_i^2 - A_j^2, a Hermitian square
    fn anticommutator(&mut self, i: usize, j: usize) -> &CMatrix {
        if !self.anticommutators.contains_key(&(i, j)) {
            let mut s = self.ensemble.matrices[i].clone();
            s.add_scaled(1.0, &self.ensemble.matrices[j]);
            let mut m = s.mul_hermitian(&s);
            m.add_scaled(-1.0, self.pair(i, i));
            m.add_scaled(-1.0, self.pair(j, j));
            self.anticommutators.insert((i, j), m);
        }
        &self.anticommutators[&(i, j)]
    }

    fn pair(&mut self, i: usize, j: usize) -> &CMatrix {
        if !self.pairs.contains_key(&(i, j)) {
            let m = match self.pairs.get(&(j, i)) {
                // A_i A_j = (A_j A_i)^*
                Some(p) => p.adjoint(),
                None if i == j => {
                    self.ensemble.matrices[i].mul_hermitian(&self.ensemble.matrices[i])
                }
                None => self.ensemble.matrices[i].mul(&self.ensemble.matrices[j]),
            };
            self.pairs.insert((i, j), m);
        }
        &self.pairs[&(i, j)]
    }

    /// The matrix realizing `I_n(f)`.
    pub fn realize(&mut self, f: &Kernel) -> Result<CMatrix, Error> {
        let cells = f.cells();
        if self.ensemble.matrices.len() < cells {
            return Err(Error::Config(format!(
                "ensemble has {} matrices, the kernel needs {cells}",
                self.ensemble.matrices.len()
            )));
        }
        Ok(self.realize_unchecked(f))
    }

    fn realize_unchecked(&mut self, f: &Kernel) -> CMatrix {
        let d = self.ensemble.dimension;
        let n = f.order();
        let h = f.grid().width();
        let mut m = CMatrix::zeros(d);
        match n {
            0 => m.add_identity(f.get(0)),
            1 => {
                for (j, v) in f.entries() {
                    m.add_scaled(h.sqrt() * v, &self.ensemble.matrices[j]);
                }
            }
            2 => {
                let cells = f.cells();
                for i in 0..cells {
                    let v = f.get(i * cells + i);
                    if v != 0.0 {
                        m.add_scaled(h * v, self.pair(i, i));
                        m.add_identity(-h * v);
                    }
                    for j in i + 1..cells {
                        let (a, b) = (f.get(i * cells + j), f.get(j * cells + i));
                        if a == b {
                            if a != 0.0 {
                                m.add_scaled(h * a, self.anticommutator(i, j));
                            }
                            continue;
                        }
                        if a != 0.0 {
                            m.add_scaled(h * a, self.pair(i, j));
                        }
                        if b != 0.0 {
                            m.add_scaled(h * b, self.pair(j, i));
                        }
                    }
                }
            }
            _ => {
                for j in 0..f.cells() {
                    let slice = f.slice(n - 1, j).expect("slice within range");
                    if slice.is_empty() {
                        continue;
                    }
                    let lower = self.realize_unchecked(&slice);
                    m.add_scaled(h.sqrt(), &lower.mul(&self.ensemble.matrices[j]));
                }
                let diag = diagonal_trace(f);
                if !diag.is_empty() {
                    m.add_scaled(-h, &self.realize_unchecked(&diag));
                }
            }
        }
        m
    }
}

/// The matrix realizing `I_n(f)` on the ensemble.
pub fn integral_matrix(f: &Kernel, e: &MatrixEnsemble) -> Result<CMatrix, Error> {
    integral_matrix_guarded(f, e, DEFAULT_COST_GUARD)
}

pub fn integral_matrix_guarded(
    f: &Kernel,
    e: &MatrixEnsemble,
    guard: usize,
) -> Result<CMatrix, Error> {
    check_cost(f, guard)?;
    Realizer::new(e).realize(f)
}

fn check_cost(f: &Kernel, guard: usize) -> Result<(), Error> {
    let cost = predicted_cost(f.order(), f.cells());
    if cost > guard {
        return Err(Error::Config(format!(
            "order-{} kernel on {} cells needs about {cost} matrix products, above the guard of {guard}",
            f.order(),
            f.cells()
        )));
    }
    Ok(())
}

// sum_j f(.., j, j), an order n-2 kernel
fn diagonal_trace(f: &Kernel) -> Kernel {
    let n = f.order();
    let cells = f.cells();
    let entries = f
        .entries()
        .filter_map(|(flat, v)| {
            let (last, prev) = (flat % cells, (flat / cells) % cells);
            (last == prev).then_some((flat / (cells * cells), v))
        })
        .collect();
    Kernel::from_entries(*f.grid(), n - 2, entries).expect("smaller than the input")
}

/// `Re tr(M^k)/d` for `k = 1..=k_max`, using powers up to `ceil(k_max/2)` only.
pub fn trace_moments(m: &CMatrix, k_max: usize) -> Vec<f64> {
    let hermitian = m.hermitian_defect() <= 1e-12 * m.re.abs().max().max(m.im.abs().max());
    trace_moments_with(m, k_max, hermitian)
}

// `hermitian` selects the contiguous trace formula, valid since powers of a
// Hermitian matrix are Hermitian.
fn trace_moments_with(m: &CMatrix, k_max: usize, hermitian: bool) -> Vec<f64> {
    let mut powers = vec![m.clone()];
    while powers.len() < k_max.div_ceil(2) {
        let last = powers.last().unwrap();
        let next = if hermitian {
            last.mul_hermitian(m)
        } else {
            last.mul(m)
        };
        powers.push(next);
    }
    (1..=k_max)
        .map(|k| {
            if k == 1 {
                m.normalized_trace()
            } else {
                let a = k.div_ceil(2);
                let (x, y) = (&powers[a - 1], &powers[k - a - 1]);
                if hermitian {
                    x.normalized_trace_product_hermitian(y)
                } else {
                    x.normalized_trace_product(y)
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// `|mean - target| <= 3 stderr + slack`.
    pub fn agrees(&self, target: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= 3.0 * self.stderr + slack
    }
}

fn check_trials(trials: usize) -> Result<(), Error> {
    if trials < 2 {
        return Err(Error::Config(format!(
            "at least 2 trials are needed, got {trials}"
        )));
    }
    Ok(())
}

/// Estimates `φ(I(f)^k)` for `k = 1..=k_max`; trial `t` uses stream `t` of `seed`.
pub fn estimate_moments(
    f: &Kernel,
    k_max: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<Estimate>, Error> {
    Ok(estimate_moments_many(std::slice::from_ref(f), k_max, d, trials, seed)?.remove(0))
}

/// Single-moment form of [`estimate_moments`].
pub fn estimate_moment(
    f: &Kernel,
    k: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate, Error> {
    Ok(estimate_moments(f, k, d, trials, seed)?[k - 1])
}

/// [`estimate_moments`] for several kernels on a shared grid, reusing each trial's
/// ensemble across kernels.
pub fn estimate_moments_many(
    fs: &[Kernel],
    k_max: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>, Error> {
    check_trials(trials)?;
    let cells = fs.iter().map(Kernel::cells).max().unwrap_or(1);
    for f in fs {
        check_cost(f, DEFAULT_COST_GUARD)?;
    }
    let per_trial: Vec<Vec<Vec<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let e = sample_ensemble_stream(cells, d, seed, t)?;
            let mut r = Realizer::new(&e);
            // mirror-symmetric kernels have Hermitian realizations
            fs.iter()
                .map(|f| {
                    Ok(trace_moments_with(
                        &r.realize(f)?,
                        k_max,
                        f.is_mirror_symmetric(1e-12),
                    ))
                })
                .collect()
        })
        .collect::<Result<_, Error>>()?;
    Ok((0..fs.len())
        .map(|i| {
            (0..k_max)
                .map(|k| {
                    Estimate::from_samples(&per_trial.iter().map(|t| t[i][k]).collect::<Vec<_>>())
                })
                .collect()
        })
        .collect())
}

/// Estimates the centered alternating moment
/// `φ([F^{k1} - φ(F^{k1})][G^{k2} - φ(G^{k2})] ...)` with empirical centering.
pub fn estimate_alternating(
    f: &Kernel,
    g: &Kernel,
    pattern: &[u32],
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate, Error> {
    Ok(estimate_alternating_many(
        f,
        g,
        std::slice::from_ref(&pattern.to_vec()),
        d,
        trials,
        seed,
    )?
    .remove(0))
}

/// [`estimate_alternating`] for several patterns, sharing each trial's ensemble.
pub fn estimate_alternating_many(
    f: &Kernel,
    g: &Kernel,
    patterns: &[Vec<u32>],
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<Estimate>, Error> {
    check_trials(trials)?;
    for pattern in patterns {
        if pattern.is_empty() || pattern.contains(&0) {
            return Err(Error::Config(format!(
                "alternating pattern {pattern:?} needs positive powers"
            )));
        }
    }
    check_cost(f, DEFAULT_COST_GUARD)?;
    check_cost(g, DEFAULT_COST_GUARD)?;
    let cells = f.cells().max(g.cells());
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let e = sample_ensemble_stream(cells, d, seed, t)?;
            let mut r = Realizer::new(&e);
            let mut words = Words::new([r.realize(f)?, r.realize(g)?]);
            Ok(patterns
                .iter()
                .map(|p| {
                    let j = p.len().div_ceil(2);
                    let (left, right) = ((0, p[..j].to_vec()), (j % 2, p[j..].to_vec()));
                    match right.1.is_empty() {
                        true => words.get(&left).normalized_trace(),
                        false => {
                            let l = words.get(&left).clone();
                            l.normalized_trace_product(words.get(&right))
                        }
                    }
                })
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok((0..patterns.len())
        .map(|i| Estimate::from_samples(&per_trial.iter().map(|t| t[i]).collect::<Vec<_>>()))
        .collect())
}

// Memoized products of centered powers. A key `(first, powers)` stands for
// `prod_i [B_i^{k_i} - φ_d(B_i^{k_i})]` with `B_i` alternating from base `first`.
struct Words {
    bases: [CMatrix; 2],
    cache: HashMap<(usize, Vec<u32>), CMatrix>,
}

impl Words {
    fn new(bases: [CMatrix; 2]) -> Self {
        Self {
            bases,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, key: &(usize, Vec<u32>)) -> &CMatrix {
        if !self.cache.contains_key(key) {
            let (first, powers) = key;
            let m = match powers.as_slice() {
                [] => CMatrix::identity(self.bases[0].dimension()),
                [k] => {
                    let mut p = self.raw_power(*first, *k);
                    p.add_identity(-p.normalized_trace());
                    p
                }
                [head @ .., last] => {
                    let prefix = self.get(&(*first, head.to_vec())).clone();
                    let tail = (first + head.len()) % 2;
                    prefix.mul(self.get(&(tail, vec![*last])))
                }
            };
            self.cache.insert(key.clone(), m);
        }
        &self.cache[key]
    }

    fn raw_power(&self, base: usize, k: u32) -> CMatrix {
        let b = &self.bases[base];
        let mut p = b.clone();
        for _ in 1..k {
            p = p.mul(b);
        }
        p
    }
}

/// Only the Wigner kind has a matrix model here.
pub fn ensure_wigner(kind: Kind) -> Result<(), Error> {
    match kind {
        Kind::Wigner => Ok(()),
        Kind::FreePoisson => Err(Error::Config(
            "the matrix oracle covers the Wigner kind only".into(),
        )),
    }
}
