//! Acceptance criteria 1 to 11, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use freechaos::corpus;
use freechaos::experiments::{battery, oracle_rows};
use freechaos_core::freeness::{
    alternating_moment_test_patterns, contraction_test, covariance_of_squares,
    fourth_moment_identity, vector_covariance_identity, vector_norm_fourth_moment,
};
use freechaos_core::{
    catalog, limits, nested_contract, star_contract, ChaosElement, GridSpec, Kernel, Kind,
};
use rand::RngExt;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

// Catalan numbers from the binomial formula, C(2k, k) / (k + 1).
fn catalan(k: u64) -> f64 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (2 * k as u128 - i) / (i + 1);
    }
    (c / (k as u128 + 1)) as f64
}

// Moments from free cumulants through the first-block recursion
// m_n = sum_s kappa_s sum_{i_1 + .. + i_s = n - s} m_{i_1} .. m_{i_s}.
fn moments_from_cumulants(kappa: &[f64], n_max: usize) -> Vec<f64> {
    let mut m = vec![1.0; n_max + 1];
    for n in 1..=n_max {
        // conv[r]: sum over compositions of r into s parts of products of moments
        let mut total = 0.0;
        let mut conv = vec![0.0; n];
        conv[0] = 1.0;
        for s in 1..=n {
            let mut next = vec![0.0; n];
            for (r, c) in conv.iter().enumerate() {
                for i in 0..n - r {
                    next[r + i] += c * m[i];
                }
            }
            conv = next;
            if n >= s {
                total += kappa.get(s).copied().unwrap_or(0.0) * conv[n - s];
            }
        }
        m[n] = total;
    }
    m
}

fn c1_counterexample() -> Outcome {
    let start = Instant::now();
    let (f, g) = catalog::mirror_counterexample()?;
    let previous = limits::max_tensor_entries();
    limits::set_max_tensor_entries(1 << 21);
    let result = (|| -> Outcome {
        let first = nested_contract(&f, &g, 1)?;
        let x = ChaosElement::integral(Kind::Wigner, f.clone());
        let y = ChaosElement::integral(Kind::Wigner, g.clone());
        let (x7, y7) = (x.pow(7)?, y.pow(7)?);
        let (a, b) = (x7.phi(), y7.phi());
        let joint = x7.phi_product(&y7)?;
        let (verdict, _) = alternating_moment_test_patterns(&x, &y, &[vec![7, 7]], 1e-9, 1 << 21)?;
        let t = start.elapsed();
        let ok = first.max_abs() == 0.0
            && a.abs() <= 1e-9
            && b.abs() <= 1e-9
            && joint >= 32.0
            && !verdict.is_free
            && t <= Duration::from_secs(60);
        Ok((
            ok,
            format!(
                "||f ⌢_1 g|| = {}, phi(F^7) = {a:e}, phi(G^7) = {b:e}, phi(F^7 G^7) = {joint}, \
                 not free = {}, tensors capped at 2^21, {:.2}s",
                first.norm(),
                !verdict.is_free,
                secs(t)
            ),
        ))
    })();
    limits::set_max_tensor_entries(previous);
    result
}

fn c2_semicircle() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::new(1.0, 1)?;
    let x = ChaosElement::integral(Kind::Wigner, catalog::interval(grid, 0.0, 1.0, 1.0)?);
    let mut worst = 0.0f64;
    for k in 1..=6u32 {
        worst = worst.max((x.moment(2 * k)? - catalan(k as u64)).abs());
    }
    let t = start.elapsed();
    Ok((
        worst <= 1e-9 && t <= Duration::from_secs(5),
        format!(
            "max |moment(2k) - Catalan(k)| = {worst:e} for k <= 6, {:.3}s",
            secs(t)
        ),
    ))
}

fn c3_free_poisson() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut identity = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        let grid = GridSpec::new(t, 1)?;
        let x = ChaosElement::integral(Kind::FreePoisson, catalog::interval(grid, 0.0, t, 1.0)?);
        // centered free Poisson: kappa_1 = 0, kappa_n = t for n >= 2
        let mut kappa = vec![0.0, 0.0];
        kappa.extend(std::iter::repeat_n(t, 7));
        let want = moments_from_cumulants(&kappa, 8);
        let mut got = vec![1.0];
        for n in 1..=8u32 {
            got.push(x.moment(n)?);
            worst = worst.max(rel_gap(got[n as usize], want[n as usize]));
        }
        identity = identity.max((got[4] - 2.0 * got[3] - (2.0 * t * t - t)).abs());
    }
    let t = start.elapsed();
    Ok((
        worst <= 1e-9 && identity <= 1e-9 && t <= Duration::from_secs(10),
        format!(
            "max relative gap to cumulant oracle {worst:e} (t in {{0.5, 1, 2}}, n <= 8), \
             max |m4 - 2 m3 - (2t^2 - t)| = {identity:e}, {:.3}s",
            secs(t)
        ),
    ))
}

fn c4_covariance_two_paths() -> Outcome {
    let mut rng = corpus::rng(4);
    let mut worst = 0.0f64;
    let mut count = 0;
    for kind in Kind::ALL {
        for _ in 0..100 {
            let cells = rng.random_range(1..=4usize);
            let grid = GridSpec::new(1.0, cells)?;
            let n = rng.random_range(1..=3usize);
            let m = rng.random_range(1..=3usize);
            let f = corpus::random_symmetric(&mut rng, grid, n)?;
            let g = corpus::random_symmetric(&mut rng, grid, m)?;
            let (direct, expansion) = covariance_of_squares(kind, &f, &g)?;
            worst = worst.max(rel_gap(direct, expansion));
            count += 1;
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{count} symmetric pairs, max gap {worst:e}"),
    ))
}

fn c5_freeness_agreement() -> Outcome {
    let pairs = corpus::freeness_corpus(50, 5)?;
    let (rows, _) = battery(&pairs, 8, 1e-9, 1 << 22)?;
    let agree = rows.iter().filter(|r| r.agrees()).count();
    let skipped: usize = rows.iter().map(|r| r.alternating_skipped).sum();
    let gap = rows
        .iter()
        .map(|r| r.gradient_two_path_gap)
        .fold(0.0, f64::max);
    let free = rows.iter().filter(|r| r.free).count();
    Ok((
        agree == rows.len() && skipped == 0 && gap <= 1e-9,
        format!(
            "{agree}/{} pairs ({free} free) agree across contraction, covariance, gradient and \
             depth-8 alternating tests, {skipped} patterns skipped, gradient two-path gap {gap:e}",
            rows.len()
        ),
    ))
}

fn c6_fourth_moment() -> Outcome {
    let grid = GridSpec::new(2.0, 4)?;
    let mut rng = corpus::rng(6);
    let mut worst = 0.0f64;
    let mut var = 0.0f64;
    let mut count = 0;
    for kind in Kind::ALL {
        for n in 1..=3 {
            let fs = [
                catalog::symmetric_staircase(grid, n, 0.0, 1.0)?,
                corpus::random_supported(&mut rng, grid, n, &[0, 1])?,
            ];
            for f in fs {
                let x = ChaosElement::integral(kind, f);
                var = var.max((x.phi_product(&x)? - 1.0).abs());
                let (cov, _) = fourth_moment_identity(&x)?;
                let m4 = x.moment(4)?;
                worst = worst.max((cov - 2.0 * (m4 - 2.0)).abs());
                count += 1;
            }
        }
    }
    Ok((
        worst <= 1e-9 && var <= 1e-9,
        format!("{count} unit-variance elements of orders 1-3, both kinds: max |Cov - 2(phi(F^4) - 2)| = {worst:e}"),
    ))
}

fn c7_sequence() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for k in [2usize, 4, 8, 16, 32] {
        let f = catalog::diagonal_sequence(k)?;
        let first = nested_contract(&f, &f, 1)?.norm_sq();
        let second = nested_contract(&f, &f, 2)?.get(0);
        let m4 = ChaosElement::integral(Kind::Wigner, f).moment(4)?;
        let first_ok = (first - 1.0 / k as f64).abs() <= 1e-12;
        let second_ok = second == 1.0;
        let m4_ok = (m4 - (2.0 + 1.0 / k as f64)).abs() <= 1e-9;
        ok &= first_ok && second_ok && m4_ok;
        if !first_ok {
            notes.push(format!(
                "k={k}: ||f ⌢_1 f||^2 - 1/k = {:e}",
                first - 1.0 / k as f64
            ));
        }
        if !second_ok {
            notes.push(format!("k={k}: f ⌢_2 f = 1 {:+e}", second - 1.0));
        }
        if !m4_ok {
            notes.push(format!(
                "k={k}: phi(F^4) - 2 - 1/k = {:e}",
                m4 - 2.0 - 1.0 / k as f64
            ));
        }
    }
    let summary = if notes.is_empty() {
        "all identities hold for k in {2, 4, 8, 16, 32}".to_string()
    } else {
        format!("{}; the other identities hold", notes.join("; "))
    };
    Ok((ok, summary))
}

fn c8_transfer() -> Outcome {
    let (f, g) = catalog::transfer_pair(1.0, 256)?;
    let inner = f.inner_product(&g)?;
    let star = star_contract(&f, &g, 1)?.norm();
    let w = contraction_test(Kind::Wigner, &f, &g, 1e-3)?;
    let p = contraction_test(Kind::FreePoisson, &f, &g, 1e-3)?;
    Ok((
        inner.abs() <= 1e-3 && star >= 0.01 && w.is_free && !p.is_free,
        format!(
            "<f, g> = {inner:e}, ||f ⋆_1 g|| = {star:.5}, Wigner free = {}, free Poisson free = {}",
            w.is_free, p.is_free
        ),
    ))
}

fn c9_nullity_propagation() -> Outcome {
    let mut rng = corpus::rng(9);
    let grid = GridSpec::new(1.0, 4)?;
    let mut checked = 0;
    let mut failures = 0;
    let mut contractions = 0;
    for _ in 0..100 {
        // split the cells into two disjoint nonempty random sets
        let mut a = Vec::new();
        let mut b = Vec::new();
        for c in 0..4 {
            if rng.random_range(0..2) == 0 {
                a.push(c);
            } else {
                b.push(c);
            }
        }
        if a.is_empty() {
            a.push(b.pop().unwrap());
        } else if b.is_empty() {
            b.push(a.pop().unwrap());
        }
        let n = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=3usize);
        let f = corpus::random_supported(&mut rng, grid, n, &a)?;
        let g = corpus::random_supported(&mut rng, grid, m, &b)?;
        if nested_contract(&f, &g, 1)?.max_abs() != 0.0 {
            failures += 1;
            continue;
        }
        checked += 1;
        for p in 1..=n.min(m) {
            contractions += 2;
            if nested_contract(&f, &g, p)?.max_abs() != 0.0
                || star_contract(&f, &g, p)?.max_abs() != 0.0
            {
                failures += 1;
            }
        }
    }
    Ok((
        failures == 0 && checked == 100,
        format!("{checked} disjoint-support pairs, {contractions} nested and star contractions, {failures} nonzero"),
    ))
}

fn c10_multivariate() -> Outcome {
    let grid = GridSpec::new(4.0, 4)?;
    let parts = [
        ChaosElement::integral(Kind::Wigner, catalog::interval(grid, 0.0, 1.0, 1.0)?),
        ChaosElement::integral(Kind::Wigner, catalog::interval(grid, 1.0, 2.0, 1.0)?),
    ];
    let m = vector_norm_fourth_moment(&parts)?;
    // Sum_{i,j} (c_ii c_jj + c_ij^2) for the identity covariance
    let want = 4.0 + 2.0;
    let (lhs, rhs) = vector_covariance_identity(&parts)?;
    Ok((
        (m - want).abs() <= 1e-9 && (lhs - rhs).abs() <= 1e-9,
        format!("phi(||F||^4) = {m}, covariance identity {lhs:e} vs {rhs:e}"),
    ))
}

fn c11_matrix_oracle() -> Outcome {
    let start = Instant::now();
    let (d, trials, k_max) = (1000, 20, 6);
    let kernels = corpus::oracle_corpus(20, 4, 11)?;
    let rows = oracle_rows(&kernels, k_max, d, trials, 11)?;
    let t = start.elapsed();
    let outside = rows
        .iter()
        .filter(|r| r.excess.iter().any(|e| *e > 0.0))
        .count();
    let worst = rows
        .iter()
        .flat_map(|r| r.excess.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let orders = kernels.iter().map(Kernel::order).max().unwrap_or(0);
    Ok((
        outside == 0 && t <= Duration::from_secs(300),
        format!(
            "{} kernels of order <= {orders}, k <= {k_max}, d = {d}, {trials} trials: {outside} outside \
             3 stderr + 10/d (worst excess {worst:e}), {:.1}s",
            rows.len(),
            secs(t)
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("mirror-symmetric counterexample", c1_counterexample),
        ("semicircle moments", c2_semicircle),
        ("free Poisson moments", c3_free_poisson),
        ("covariance two paths", c4_covariance_two_paths),
        ("freeness-test agreement", c5_freeness_agreement),
        ("fourth-moment identity", c6_fourth_moment),
        ("diagonal sequence", c7_sequence),
        ("transfer example", c8_transfer),
        ("nullity propagation", c9_nullity_propagation),
        ("multivariate fourth moment", c10_multivariate),
        ("random-matrix oracle", c11_matrix_oracle),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(p) => (
                false,
                format!(
                    "panic: {}",
                    p.downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default()
                ),
            ),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
