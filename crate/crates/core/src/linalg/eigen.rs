use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::krylov::{solve_sym, solve_sym_best_effort, SolveStats};

const INNER_ACCEPT: f64 = 1e-6;
use super::sparse::{axpy, dot, norm, SparseSym};
use crate::{Error, Result};

/// Generalized eigenpair `Kx = ΛMx` with `xᵀMx = 1`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `‖Kx − ΛMx‖ / ‖Kx‖`.
    pub residual: f64,
    /// Shift actually used (differs from the requested one after a retry).
    pub shift: f64,
}

/// Settings of the shift-invert Lanczos iteration.
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov dimension per cycle.
    pub steps: usize,
    pub restarts: usize,
    /// Relative eigen-residual accepted as converged.
    pub tol: f64,
    /// Relative tolerance of the inner shifted solves.
    pub inner_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            steps: 20,
            restarts: 8,
            tol: 1e-8,
            inner_tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

fn shifted(k: &SparseSym, m: &SparseSym, sigma: f64) -> Result<SparseSym> {
    k.linear_combination(1.0, m, -sigma)
}

fn eigen_residual(k: &SparseSym, m: &SparseSym, x: &[f64], value: f64) -> f64 {
    let kx = k.matvec(x);
    let mut r = kx.clone();
    axpy(-value, &m.matvec(x), &mut r);
    let scale = norm(&kx).max(f64::MIN_POSITIVE);
    norm(&r) / scale
}

fn check_pencil(k: &SparseSym, m: &SparseSym) -> Result<()> {
    if k.dim() != m.dim() {
        return Err(Error::InvalidInput("K and M differ in dimension".into()));
    }
    if k.dim() == 0 {
        return Err(Error::InvalidInput("empty eigenproblem".into()));
    }
    Ok(())
}

/// Eigenpair of `Kx = ΛMx` nearest to `shift`.
///
/// Shift-invert Lanczos on `(K − σM)⁻¹M` in the `M` inner product. When the
/// inner solve breaks down because `σ` sits on an eigenvalue, the shift is
/// perturbed and the iteration retried.
pub fn smallest_eigenpair(k: &SparseSym, m: &SparseSym, shift: f64) -> Result<Eigenpair> {
    let pairs = eigenpairs_near(k, m, shift, 1, &LanczosOptions::default())?;
    pairs.into_iter().next().ok_or(Error::NotConverged {
        iterations: 0,
        residual: f64::INFINITY,
    })
}

/// Up to `count` converged eigenpairs nearest to `shift`, sorted by
/// distance from it.
pub fn eigenpairs_near(
    k: &SparseSym,
    m: &SparseSym,
    shift: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<Eigenpair>> {
    check_pencil(k, m)?;
    let scale = shift.abs().max(1e-3 * k.max_abs() / m.max_abs().max(f64::MIN_POSITIVE));
    let mut last_err = None;
    for attempt in 0..4 {
        let sigma = shift + scale * [0.0, 1e-6, -1e-5, 1e-4][attempt];
        match lanczos(k, m, sigma, count, opts) {
            Ok(pairs) => return Ok(pairs),
            Err(e @ Error::NotConverged { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn lanczos(
    k: &SparseSym,
    m: &SparseSym,
    sigma: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<Eigenpair>> {
    let n = k.dim();
    let op = shifted(k, m, sigma)?;
    let inner_max = 20 * n.max(50);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let steps = opts.steps.max(count + 1).min(n);
    let mut best_residual = f64::INFINITY;

    for _cycle in 0..=opts.restarts {
        let mnorm = dot(&start, &m.matvec(&start)).sqrt();
        let mut q: Vec<Vec<f64>> = vec![start.iter().map(|v| v / mnorm).collect()];
        let mut mq: Vec<Vec<f64>> = vec![m.matvec(&q[0])];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..steps {
            // Inexact inner solves are tolerated; the Ritz residual decides.
            let (mut w, stats): (Vec<f64>, SolveStats) =
                solve_sym_best_effort(&op, &mq[j], opts.inner_tol, inner_max)?;
            if stats.residual > INNER_ACCEPT {
                return Err(Error::NotConverged {
                    iterations: stats.iterations,
                    residual: stats.residual,
                });
            }
            let a = dot(&w, &mq[j]);
            alpha.push(a);
            // Full reorthogonalization, twice.
            for _ in 0..2 {
                for i in 0..q.len() {
                    let c = dot(&w, &mq[i]);
                    axpy(-c, &q[i], &mut w);
                }
            }
            if j + 1 == steps {
                break;
            }
            let mw = m.matvec(&w);
            let b = dot(&w, &mw).max(0.0).sqrt();
            if b <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|v| v / b).collect());
            mq.push(mw.iter().map(|v| v / b).collect());
        }
        let dim = alpha.len();
        let mut t = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            t[(i, i)] = alpha[i];
            if i + 1 < dim {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));

        let mut pairs = Vec::new();
        for &idx in order.iter().take(count.max(1)) {
            let theta = eig.eigenvalues[idx];
            if theta == 0.0 {
                continue;
            }
            let mut x = vec![0.0; n];
            for (i, qi) in q.iter().enumerate().take(dim) {
                axpy(eig.eigenvectors[(i, idx)], qi, &mut x);
            }
            let mx = m.matvec(&x);
            let xmx = dot(&x, &mx);
            let scale = xmx.sqrt();
            x.iter_mut().for_each(|v| *v /= scale);
            let value = k.bilinear(&x, &x);
            let residual = eigen_residual(k, m, &x, value);
            pairs.push(Eigenpair {
                value,
                vector: x,
                residual,
                shift: sigma,
            });
        }
        let converged = pairs.iter().filter(|p| p.residual <= opts.tol).count();
        if let Some(first) = pairs.first() {
            best_residual = best_residual.min(first.residual);
        }
        if converged >= count.min(pairs.len()) && !pairs.is_empty() {
            let mut out: Vec<Eigenpair> = pairs.into_iter().filter(|p| p.residual <= opts.tol).collect();
            out.sort_by(|a, b| (a.value - sigma).abs().total_cmp(&(b.value - sigma).abs()));
            return Ok(out);
        }
        // Restart from the sum of the leading Ritz vectors.
        start = vec![0.0; n];
        for p in &pairs {
            if p.residual > opts.tol {
                axpy(1.0, &p.vector, &mut start);
            }
        }
        if norm(&start) == 0.0 {
            start = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
    }
    Err(Error::NotConverged {
        iterations: opts.restarts + 1,
        residual: best_residual,
    })
}

/// Result of the pre-solve resonance check at `σ = ω²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardReport {
    pub shift: f64,
    /// Upper bound on `min_i |Λ_i − σ|` from inverse-iteration growth.
    pub distance_bound: f64,
    /// Rayleigh-quotient estimate of the eigenvalue nearest `σ`.
    pub nearest_estimate: f64,
}

/// Refuses shifts that lie within `rel_tol·|σ|` of an eigenvalue of `(K, M)`.
///
/// A few steps of inverse iteration `y = (K − σM)⁻¹Mx` bound the distance
/// to the spectrum by `‖x‖_M / ‖y‖_M`; the bound is tight once the nearest
/// eigenvector dominates, which happens quickly when the shift is close.
/// A failing inner solve counts as a resonance.
pub fn resonance_guard(
    k: &SparseSym,
    m: &SparseSym,
    sigma: f64,
    rel_tol: f64,
    steps: usize,
) -> Result<GuardReport> {
    check_pencil(k, m)?;
    let n = k.dim();
    let op = shifted(k, m, sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a7d);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut mx = m.matvec(&x);
    let s = dot(&x, &mx).sqrt();
    x.iter_mut().for_each(|v| *v /= s);
    mx.iter_mut().for_each(|v| *v /= s);
    let mut distance_bound = f64::INFINITY;
    let mut nearest_estimate = f64::NAN;
    let threshold = rel_tol * sigma.abs();
    for _ in 0..steps.max(1) {
        let y = match solve_sym(&op, &mx, 1e-6, 20 * n.max(50)) {
            Ok((y, _)) => y,
            Err(Error::NotConverged { residual, .. }) => {
                return Err(Error::Resonance {
                    shift: sigma,
                    nearest_eigenvalue: nearest_estimate.is_finite().then_some(nearest_estimate),
                    detail: format!(
                        "shifted solve stagnated at relative residual {residual:e}"
                    ),
                })
            }
            Err(e) => return Err(e),
        };
        let my = m.matvec(&y);
        let ynorm = dot(&y, &my).sqrt();
        if ynorm == 0.0 {
            break;
        }
        distance_bound = distance_bound.min(1.0 / ynorm);
        x = y.iter().map(|v| v / ynorm).collect();
        mx = my.iter().map(|v| v / ynorm).collect();
        nearest_estimate = k.bilinear(&x, &x);
        if distance_bound < threshold {
            return Err(Error::Resonance {
                shift: sigma,
                nearest_eigenvalue: Some(nearest_estimate),
                detail: format!(
                    "an eigenvalue lies within {distance_bound:e} of the shift (guard {threshold:e})"
                ),
            });
        }
    }
    Ok(GuardReport {
        shift: sigma,
        distance_bound,
        nearest_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr_from_triplets;

    #[test]
    fn diagonal_pencil_from_zero() {
        let k = SparseSym::from_diagonal(&[1.0, 4.0]);
        let m = SparseSym::identity(2);
        let p = smallest_eigenpair(&k, &m, 0.0).unwrap();
        assert!((p.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generalized_diagonal_pencil() {
        let k = SparseSym::from_diagonal(&[1.0, 4.0]);
        let m = SparseSym::from_diagonal(&[1.0, 2.0]);
        let p = smallest_eigenpair(&k, &m, 1.9).unwrap();
        assert!((p.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn identity_pencil() {
        let m = csr_from_triplets(
            3,
            &[(0, 0, 2.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 3.0), (2, 2, 1.0)],
        )
        .unwrap();
        let p = smallest_eigenpair(&m, &m, 0.5).unwrap();
        assert!((p.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shift_on_an_eigenvalue_is_retried() {
        let k = SparseSym::from_diagonal(&[1.0, 2.0, 3.0, 5.0]);
        let m = SparseSym::identity(4);
        let p = smallest_eigenpair(&k, &m, 3.0).unwrap();
        assert!((p.value - 3.0).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_quotient_and_residual() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let k = csr_from_triplets(n, &t).unwrap();
        let m = SparseSym::from_diagonal(&vec![0.5; n]);
        let p = smallest_eigenpair(&k, &m, 1.3).unwrap();
        let rq = k.bilinear(&p.vector, &p.vector) / m.bilinear(&p.vector, &p.vector);
        assert!((rq - p.value).abs() <= 1e-8 * p.value.abs());
        assert!(p.residual <= 1e-8);
        // Exact spectrum 2·(2 − 2cos(jπ/(n+1))).
        let exact = (1..=n)
            .map(|j| 2.0 * (2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n + 1) as f64).cos()))
            .min_by(|a, b| (a - 1.3).abs().total_cmp(&(b - 1.3).abs()))
            .unwrap();
        assert!((p.value - exact).abs() < 1e-9);
    }

    #[test]
    fn several_pairs_near_a_shift() {
        let k = SparseSym::from_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let m = SparseSym::identity(6);
        let opts = LanczosOptions {
            steps: 6,
            ..Default::default()
        };
        let pairs = eigenpairs_near(&k, &m, 3.4, 3, &opts).unwrap();
        let values: Vec<f64> = pairs.iter().map(|p| (p.value * 1e9).round() / 1e9).collect();
        assert_eq!(values, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn guard_trips_near_eigenvalue() {
        let k = SparseSym::from_diagonal(&[1.0, 2.0, 3.0]);
        let m = SparseSym::identity(3);
        let err = resonance_guard(&k, &m, 2.0 * (1.0 + 1e-9), 1e-6, 3).unwrap_err();
        match err {
            Error::Resonance { nearest_eigenvalue, .. } => {
                if let Some(v) = nearest_eigenvalue {
                    assert!((v - 2.0).abs() < 1e-6);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        let ok = resonance_guard(&k, &m, 2.5, 1e-6, 3).unwrap();
        assert!(ok.distance_bound >= 0.5 - 1e-9);
    }
}
