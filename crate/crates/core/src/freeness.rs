//! Freeness tests for pairs of multiple integrals, and trend reports for sequences.
//!
//! A kernel counts as zero when its L2 norm is at most the tolerance.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bichaos::gradient_pairing;
use crate::chaos::{ChaosElement, Kind};
use crate::contraction::{nested_contract, star_contract};
use crate::error::{Error, Result};
use crate::kernel::{permutations, Kernel, EXACT_TOL};
use crate::limits;
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Contraction,
    Covariance,
    Gradient,
    AlternatingMoments,
    PermutedContraction,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Contraction => "contraction",
            Method::Covariance => "covariance",
            Method::Gradient => "gradient",
            Method::AlternatingMoments => "alternating_moments",
            Method::PermutedContraction => "permuted_contraction",
        }
    }
}

/// Which alternating patterns were evaluated and which were skipped for size.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coverage {
    pub evaluated: usize,
    pub skipped: Vec<Vec<u32>>,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FreenessVerdict {
    pub method: Method,
    pub kind: Kind,
    /// Every witness is at most `tolerance`.
    pub is_free: bool,
    /// False when the method cannot certify the answer it gives: a failed sufficient
    /// condition, or an alternating-moment scan that skipped patterns and found
    /// nothing.
    pub conclusive: bool,
    pub witness: BTreeMap<String, f64>,
    pub tolerance: f64,
    #[cfg_attr(
        feature = "serde",
        serde(skip_serializing_if = "Option::is_none", default)
    )]
    pub coverage: Option<Coverage>,
}

impl FreenessVerdict {
    fn new(method: Method, kind: Kind, witness: BTreeMap<String, f64>, tolerance: f64) -> Self {
        let is_free = witness.values().all(|w| *w <= tolerance);
        Self {
            method,
            kind,
            is_free,
            conclusive: true,
            witness,
            tolerance,
            coverage: None,
        }
    }

    pub fn max_witness(&self) -> f64 {
        self.witness.values().copied().fold(0.0, f64::max)
    }
}

fn witness(name: &str, value: f64) -> BTreeMap<String, f64> {
    let mut w = BTreeMap::new();
    w.insert(name.to_string(), value);
    w
}

fn ensure_symmetric(f: &Kernel) -> Result<()> {
    let asymmetry = f.asymmetry();
    if asymmetry > EXACT_TOL {
        return Err(Error::NotSymmetric {
            asymmetry,
            hint: "for mirror-symmetric kernels use permuted_contraction_test",
        });
    }
    Ok(())
}

fn ensure_mirror_symmetric(f: &Kernel) -> Result<()> {
    let asymmetry = f.mirror_asymmetry();
    if asymmetry > EXACT_TOL {
        return Err(Error::NotMirrorSymmetric { asymmetry });
    }
    Ok(())
}

/// The first contraction of the kind: `f ⌢_1 g` for Wigner, `f ⋆_1 g` for free Poisson.
fn first_contraction(kind: Kind, f: &Kernel, g: &Kernel) -> Result<Kernel> {
    match kind {
        Kind::Wigner => nested_contract(f, g, 1),
        Kind::FreePoisson => star_contract(f, g, 1),
    }
}

fn first_contraction_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Wigner => "norm_nested_1",
        Kind::FreePoisson => "norm_star_1",
    }
}

/// Freeness of `I_n(f)` and `I_m(g)` for symmetric kernels: free exactly when the
/// first contraction of the kind vanishes.
pub fn contraction_test(kind: Kind, f: &Kernel, g: &Kernel, tol: f64) -> Result<FreenessVerdict> {
    ensure_symmetric(f)?;
    ensure_symmetric(g)?;
    let norm = first_contraction(kind, f, g)?.norm();
    Ok(FreenessVerdict::new(
        Method::Contraction,
        kind,
        witness(first_contraction_name(kind), norm),
        tol,
    ))
}

/// Sufficient condition for mirror-symmetric kernels: the first contraction of every
/// pair of argument permutations vanishes. A negative answer is inconclusive.
pub fn permuted_contraction_test(
    kind: Kind,
    f: &Kernel,
    g: &Kernel,
    tol: f64,
) -> Result<FreenessVerdict> {
    ensure_mirror_symmetric(f)?;
    ensure_mirror_symmetric(g)?;
    let cap = limits::permutation_order_cap();
    for k in [f, g] {
        if k.order() > cap {
            return Err(Error::PermutationCap {
                order: k.order(),
                cap,
            });
        }
    }
    let gs: Vec<Kernel> = permutations(g.order())
        .iter()
        .map(|pi| g.permute(pi))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for sigma in permutations(f.order()) {
        let fs = f.permute(&sigma)?;
        for gp in &gs {
            worst = worst.max(first_contraction(kind, &fs, gp)?.norm());
        }
    }
    let name = match kind {
        Kind::Wigner => "max_norm_nested_1_permuted",
        Kind::FreePoisson => "max_norm_star_1_permuted",
    };
    let mut v = FreenessVerdict::new(Method::PermutedContraction, kind, witness(name, worst), tol);
    v.conclusive = v.is_free;
    Ok(v)
}

/// `Cov(F^2, G^2)` for `F = I_n(f)`, `G = I_m(g)`, both directly from the algebra and
/// from the expansion `sum_p ||f ⌢_p g||^2 (+ sum_p ||f ⋆_p g||^2)`. The two agree for
/// symmetric kernels.
pub fn covariance_of_squares(kind: Kind, f: &Kernel, g: &Kernel) -> Result<(f64, f64)> {
    let x = ChaosElement::integral(kind, f.clone());
    let y = ChaosElement::integral(kind, g.clone());
    let (x2, y2) = (x.multiply(&x)?, y.multiply(&y)?);
    let direct = x2.phi_product(&y2)? - x2.phi() * y2.phi();
    Ok((direct, contraction_norm_sum(kind, f, g)?))
}

/// `sum_{p>=1} ||f ⌢_p g||^2`, plus `sum_{p>=1} ||f ⋆_p g||^2` for free Poisson.
pub fn contraction_norm_sum(kind: Kind, f: &Kernel, g: &Kernel) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for p in 1..=f.order().min(g.order()) {
        acc.add(nested_contract(f, g, p)?.norm_sq());
        if kind == Kind::FreePoisson {
            acc.add(star_contract(f, g, p)?.norm_sq());
        }
    }
    Ok(acc.value())
}

/// Freeness read off `|Cov(F^2, G^2)|`, valid for symmetric kernels.
pub fn covariance_test(kind: Kind, f: &Kernel, g: &Kernel, tol: f64) -> Result<FreenessVerdict> {
    ensure_symmetric(f)?;
    ensure_symmetric(g)?;
    let (direct, expansion) = covariance_of_squares(kind, f, g)?;
    let mut w = witness("abs_cov_squares", direct.abs());
    w.insert("cov_expansion".to_string(), expansion);
    Ok(FreenessVerdict::new(Method::Covariance, kind, w, tol))
}

/// Freeness read off the gradient pairing `φ⊗φ(|<∇F, ∇G>|^2)` (Wigner only).
pub fn gradient_test(f: &Kernel, g: &Kernel, tol: f64) -> Result<FreenessVerdict> {
    let norm = gradient_pairing(f, g)?.phi2_norm_sq();
    Ok(FreenessVerdict::new(
        Method::Gradient,
        Kind::Wigner,
        witness("phi2_norm_sq_gradient_pairing", norm),
        tol,
    ))
}

/// Alternating power patterns `(k_1, ..., k_{2l})`, all `k_i >= 1`, total at most
/// `depth`, the odd positions belonging to the first variable. Ordered by total degree,
/// then lexicographically.
pub fn alternating_patterns(depth: u32) -> Vec<Vec<u32>> {
    fn compositions(total: u32, out: &mut Vec<Vec<u32>>, prefix: &mut Vec<u32>) {
        if total == 0 {
            if !prefix.is_empty() && prefix.len().is_multiple_of(2) {
                out.push(prefix.clone());
            }
            return;
        }
        for k in 1..=total {
            prefix.push(k);
            compositions(total - k, out, prefix);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 2..=depth {
        compositions(total, &mut out, &mut Vec::new());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternMoment {
    pub pattern: Vec<u32>,
    pub value: f64,
}

/// Evaluates `φ([F^{k1} - φ(F^{k1})][G^{k2} - φ(G^{k2})]...)` for each pattern whose
/// predicted largest tensor fits in `budget` dense entries.
pub struct AlternatingMoments<'a> {
    x: &'a ChaosElement,
    y: &'a ChaosElement,
    budget: usize,
    cache: BTreeMap<(bool, u32, bool), ChaosElement>,
}

impl<'a> AlternatingMoments<'a> {
    pub fn new(x: &'a ChaosElement, y: &'a ChaosElement, budget: usize) -> Self {
        Self {
            x,
            y,
            budget,
            cache: BTreeMap::new(),
        }
    }

    fn base(&self, i: usize) -> &'a ChaosElement {
        if i.is_multiple_of(2) {
            self.x
        } else {
            self.y
        }
    }

    /// Split point `(i, b)`: the left half holds the factors before `i` times the
    /// first `b` letters of factor `i`. Chosen to minimize the larger half.
    fn split(&self, pattern: &[u32]) -> (usize, u32, usize, usize) {
        let unit: Vec<usize> = (0..pattern.len())
            .map(|i| self.base(i).max_order())
            .collect();
        let total: usize = pattern
            .iter()
            .zip(&unit)
            .map(|(&k, &u)| k as usize * u)
            .sum();
        let mut best = (usize::MAX, 0, 0, 0);
        let mut before = 0;
        for (i, (&k, &u)) in pattern.iter().zip(&unit).enumerate() {
            for b in 0..=k {
                let left = before + b as usize * u;
                let peak = left.max(total - left);
                if peak < best.0 {
                    best = (peak, i, b, left);
                }
            }
            before += k as usize * u;
        }
        (best.1, best.2, best.3, total - best.3)
    }

    /// Largest dense tensor the evaluation of `pattern` will form.
    pub fn predicted_peak(&self, pattern: &[u32]) -> Option<usize> {
        let (_, _, left, right) = self.split(pattern);
        limits::dense_entries(self.x.grid().cells(), left.max(right))
    }

    pub fn fits(&self, pattern: &[u32]) -> bool {
        self.predicted_peak(pattern)
            .is_some_and(|p| p <= self.budget)
    }

    fn power(&mut self, i: usize, k: u32, centered: bool) -> Result<ChaosElement> {
        let key = (i % 2 == 1, k, centered);
        if let Some(c) = self.cache.get(&key) {
            return Ok(c.clone());
        }
        let p = self.base(i).pow(k)?;
        let c = if centered { p.centered() } else { p };
        self.cache.insert(key, c.clone());
        Ok(c)
    }

    fn product(&mut self, pattern: &[u32], offset: usize) -> Result<Option<ChaosElement>> {
        let mut acc: Option<ChaosElement> = None;
        for (j, &k) in pattern.iter().enumerate() {
            let f = self.power(offset + j, k, true)?;
            acc = Some(match acc {
                None => f,
                Some(a) => a.multiply(&f)?,
            });
        }
        Ok(acc)
    }

    /// The centered alternating moment of one pattern, ignoring the budget.
    ///
    /// With `L` and `R` the products of the centered factors left and right of
    /// the split factor `X^a - c`, uses
    /// `φ(L (X^a - c) R) = φ(L X^b · X^(a-b) R) - c φ(L R)`.
    pub fn evaluate(&mut self, pattern: &[u32]) -> Result<f64> {
        if pattern.is_empty() {
            return Err(Error::EmptySequence);
        }
        let (i, b, _, _) = self.split(pattern);
        let a = pattern[i];
        let left = self.product(&pattern[..i], 0)?;
        let right = self.product(&pattern[i + 1..], i + 1)?;
        let grid = *self.x.grid();
        let unit = ChaosElement::unit(self.x.kind(), grid);
        let left = left.unwrap_or_else(|| unit.clone());
        let right = right.unwrap_or(unit);
        if b == 0 || b == a {
            // split at a factor boundary
            let f = self.power(i, a, true)?;
            return if b == 0 {
                left.phi_product(&f.multiply(&right)?)
            } else {
                left.multiply(&f)?.phi_product(&right)
            };
        }
        let c = self.base(i).moment(a)?;
        let head = left.multiply(&self.power(i, b, false)?)?;
        let tail = self.power(i, a - b, false)?.multiply(&right)?;
        Ok(head.phi_product(&tail)? - c * left.phi_product(&right)?)
    }
}

/// Scans every alternating pattern up to total degree `depth` that fits the budget.
pub fn alternating_moment_test_elements(
    x: &ChaosElement,
    y: &ChaosElement,
    depth: u32,
    tol: f64,
    budget: usize,
) -> Result<(FreenessVerdict, Vec<PatternMoment>)> {
    if depth < 2 {
        return Err(Error::InvalidArgument(
            "alternating moments need depth >= 2".into(),
        ));
    }
    alternating_moment_test_patterns(x, y, &alternating_patterns(depth), tol, budget)
}

/// Like [`alternating_moment_test_elements`] on an explicit pattern list.
pub fn alternating_moment_test_patterns(
    x: &ChaosElement,
    y: &ChaosElement,
    patterns: &[Vec<u32>],
    tol: f64,
    budget: usize,
) -> Result<(FreenessVerdict, Vec<PatternMoment>)> {
    if x.kind() != y.kind() {
        return Err(Error::KindMismatch {
            left: x.kind().as_str(),
            right: y.kind().as_str(),
        });
    }
    let mut eval = AlternatingMoments::new(x, y, budget);
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    let mut worst = 0.0f64;
    for p in patterns {
        if !eval.fits(p) {
            skipped.push(p.clone());
            continue;
        }
        let value = eval.evaluate(p)?;
        worst = worst.max(value.abs());
        values.push(PatternMoment {
            pattern: p.clone(),
            value,
        });
    }
    let mut v = FreenessVerdict::new(
        Method::AlternatingMoments,
        x.kind(),
        witness("max_abs_alternating_moment", worst),
        tol,
    );
    v.conclusive = !v.is_free || skipped.is_empty();
    v.coverage = Some(Coverage {
        evaluated: values.len(),
        skipped,
        budget,
    });
    Ok((v, values))
}

/// Definition-level freeness check on `I_n(f)` and `I_m(g)` with the global tensor
/// guard as budget.
pub fn alternating_moment_test(
    kind: Kind,
    f: &Kernel,
    g: &Kernel,
    depth: u32,
    tol: f64,
) -> Result<FreenessVerdict> {
    let x = ChaosElement::integral(kind, f.clone());
    let y = ChaosElement::integral(kind, g.clone());
    Ok(alternating_moment_test_elements(&x, &y, depth, tol, limits::max_tensor_entries())?.0)
}

/// Direction of a per-index series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Trend {
    /// Every value is zero at `1e-12`.
    Zero,
    /// Strictly decreasing in absolute value.
    Decreasing,
    /// Anything else.
    NotDecreasing,
}

impl Trend {
    pub fn of(values: &[f64]) -> Trend {
        if values.iter().all(|v| v.abs() <= 1e-12) {
            Trend::Zero
        } else if values
            .windows(2)
            .all(|w| w[1].abs() < w[0].abs() * (1.0 - 1e-12))
        {
            Trend::Decreasing
        } else {
            Trend::NotDecreasing
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SequenceRecord {
    pub index: usize,
    /// `||f_k ⌢_p g_k||` for `p = 1..=n∧m`.
    pub contraction_norms: Vec<f64>,
    /// `||f_k ⋆_p g_k||` for `p = 1..=n∧m`.
    pub star_norms: Vec<f64>,
    /// `Cov(F_k^2, G_k^2)` from the algebra.
    pub cov_squares: f64,
    /// The same covariance from contraction norms.
    pub cov_expansion: f64,
    pub fourth_moment_f: f64,
    pub fourth_moment_g: f64,
    pub l4_norm_f: f64,
    pub l4_norm_g: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SequenceTrace {
    pub kind: Kind,
    pub records: Vec<SequenceRecord>,
    pub contraction_trends: Vec<Trend>,
    pub star_trends: Vec<Trend>,
    pub cov_trend: Trend,
    /// `max_k ||g_k||_4`, the boundedness diagnostic for the second sequence.
    pub max_l4_norm_g: f64,
}

/// Per-index contraction norms, covariances of squares and fourth moments of the
/// pairs `(I(f_k), I(g_k))`.
pub fn analyze_sequence(kind: Kind, fs: &[Kernel], gs: &[Kernel]) -> Result<SequenceTrace> {
    if fs.is_empty() || gs.is_empty() {
        return Err(Error::EmptySequence);
    }
    if fs.len() != gs.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "sequences of different lengths {} and {}",
            fs.len(),
            gs.len()
        )));
    }
    let (n, m) = (fs[0].order(), gs[0].order());
    if let Some(bad) = fs
        .iter()
        .chain(gs)
        .find(|k| k.order() != n && k.order() != m)
    {
        return Err(Error::OrderMismatch {
            left: n,
            right: bad.order(),
        });
    }
    if fs.iter().any(|k| k.order() != n) || gs.iter().any(|k| k.order() != m) {
        return Err(Error::InvalidArgument(
            "orders vary within a sequence".into(),
        ));
    }
    for k in fs.iter().chain(gs) {
        fs[0].grid().ensure_same(k.grid())?;
    }
    let mut records = Vec::with_capacity(fs.len());
    for (index, (f, g)) in fs.iter().zip(gs).enumerate() {
        let top = n.min(m);
        let contraction_norms = (1..=top)
            .map(|p| nested_contract(f, g, p).map(|c| c.norm()))
            .collect::<Result<Vec<_>>>()?;
        let star_norms = (1..=top)
            .map(|p| star_contract(f, g, p).map(|c| c.norm()))
            .collect::<Result<Vec<_>>>()?;
        let (cov_squares, cov_expansion) = covariance_of_squares(kind, f, g)?;
        let x = ChaosElement::integral(kind, f.clone());
        let y = ChaosElement::integral(kind, g.clone());
        records.push(SequenceRecord {
            index,
            contraction_norms,
            star_norms,
            cov_squares,
            cov_expansion,
            fourth_moment_f: x.moment(4)?,
            fourth_moment_g: y.moment(4)?,
            l4_norm_f: f.lp_norm(4)?,
            l4_norm_g: g.lp_norm(4)?,
        });
    }
    let column =
        |sel: &dyn Fn(&SequenceRecord) -> f64| -> Vec<f64> { records.iter().map(sel).collect() };
    let top = n.min(m);
    let contraction_trends = (0..top)
        .map(|p| Trend::of(&column(&|r| r.contraction_norms[p])))
        .collect();
    let star_trends = (0..top)
        .map(|p| Trend::of(&column(&|r| r.star_norms[p])))
        .collect();
    let cov_trend = Trend::of(&column(&|r| r.cov_squares));
    let max_l4_norm_g = records.iter().map(|r| r.l4_norm_g).fold(0.0, f64::max);
    Ok(SequenceTrace {
        kind,
        records,
        contraction_trends,
        star_trends,
        cov_trend,
        max_l4_norm_g,
    })
}

fn ensure_self_adjoint(parts: &[ChaosElement]) -> Result<()> {
    for x in parts {
        for f in x.parts().values() {
            ensure_mirror_symmetric(f)?;
        }
    }
    Ok(())
}

fn squared_norm(parts: &[ChaosElement]) -> Result<ChaosElement> {
    let first = parts.first().ok_or(Error::EmptySequence)?;
    let mut acc = ChaosElement::zero(first.kind(), *first.grid());
    for x in parts {
        acc = ChaosElement::combine(1.0, &acc, 1.0, &x.multiply(x)?)?;
    }
    Ok(acc)
}

/// `φ(||F||^4)` for the vector `F = (F_1, ..., F_d)`, where `||F||^2 = sum_i F_i^2`.
pub fn vector_norm_fourth_moment(parts: &[ChaosElement]) -> Result<f64> {
    ensure_self_adjoint(parts)?;
    let s = squared_norm(parts)?;
    s.phi_product(&s)
}

/// Both sides of the vector covariance identity for a centered vector `F` and a free
/// copy `G` obtained by time translation:
/// `½ Cov(||F+G||^2, ||F-G||^2)` and
/// `φ(||F||^4) - φ(||F||^2)^2 - sum_{i,j} Cov(F_i, F_j)^2`.
pub fn vector_covariance_identity(parts: &[ChaosElement]) -> Result<(f64, f64)> {
    ensure_self_adjoint(parts)?;
    let first = parts.first().ok_or(Error::EmptySequence)?;
    let (kind, grid) = (first.kind(), *first.grid());
    // shift the whole vector at once so the copy is free from every component
    let mut whole = ChaosElement::zero(kind, grid);
    for x in parts {
        whole = ChaosElement::combine(1.0, &whole, 1.0, x)?;
    }
    let offset = match whole.support_cells() {
        Some((lo, hi)) => (hi - lo + 1) as i64,
        None => 0,
    };
    let copies: Vec<ChaosElement> = parts
        .iter()
        .map(|x| x.shift_in_time(offset))
        .collect::<Result<_>>()?;
    let sums: Vec<ChaosElement> = parts
        .iter()
        .zip(&copies)
        .map(|(x, y)| ChaosElement::combine(1.0, x, 1.0, y))
        .collect::<Result<_>>()?;
    let diffs: Vec<ChaosElement> = parts
        .iter()
        .zip(&copies)
        .map(|(x, y)| ChaosElement::combine(1.0, x, -1.0, y))
        .collect::<Result<_>>()?;
    let a = squared_norm(&sums)?;
    let b = squared_norm(&diffs)?;
    let lhs = 0.5 * (a.phi_product(&b)? - a.phi() * b.phi());

    let s = squared_norm(parts)?;
    let mut cross = CompensatedSum::new();
    for x in parts {
        for y in parts {
            let c = x.phi_product(y)? - x.phi() * y.phi();
            cross.add(c * c);
        }
    }
    let rhs = s.phi_product(&s)? - s.phi() * s.phi() - cross.value();
    Ok((lhs, rhs))
}

/// Both sides of `Cov((F+G)^2, (F-G)^2) = 2(φ(F^4) - 2φ(F^2)^2)` for centered
/// self-adjoint `F` and its time-shifted free copy `G`. With unit variance the right
/// side is `2(φ(F^4) - 2)`.
pub fn fourth_moment_identity(x: &ChaosElement) -> Result<(f64, f64)> {
    let (half_cov, _) = vector_covariance_identity(core::slice::from_ref(x))?;
    let m2 = x.phi_product(x)?;
    Ok((2.0 * half_cov, 2.0 * (x.moment(4)? - 2.0 * m2 * m2)))
}
