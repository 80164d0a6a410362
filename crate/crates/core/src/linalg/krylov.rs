use super::sparse::{axpy, dot, norm, SparseSym};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖` (zero for a zero right-hand side).
    pub residual: f64,
}

/// Default iteration budget `20·n`.
pub fn default_max_iter(n: usize) -> usize {
    20 * n.max(1)
}

fn jacobi(a: &SparseSym) -> Vec<f64> {
    let scale = a.max_abs();
    a.diagonal()
        .into_iter()
        .map(|d| {
            if d.abs() > 1e-14 * scale {
                1.0 / d.abs()
            } else {
                1.0
            }
        })
        .collect()
}

fn residual(a: &SparseSym, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.matvec(x);
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

/// Jacobi-preconditioned MINRES for symmetric, possibly indefinite `A`.
///
/// The recurrence runs until its residual estimate drops below `tol`; the
/// true residual is then checked and the iteration restarted from the
/// current iterate if needed. A restart that fails to halve the residual
/// ends the solve with [`Error::NotConverged`].
pub fn solve_sym(
    a: &SparseSym,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let (x, stats) = solve_sym_best_effort(a, b, tol, max_iter)?;
    if stats.residual <= tol {
        Ok((x, stats))
    } else {
        Err(Error::NotConverged {
            iterations: stats.iterations,
            residual: stats.residual,
        })
    }
}

/// MINRES as in [`solve_sym`], returning the best iterate even when `tol`
/// is not reached.
pub fn solve_sym_best_effort(
    a: &SparseSym,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    check_dims(a, b)?;
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, residual: 0.0 }));
    }
    let prec = jacobi(a);
    let mut iterations = 0;
    let mut best = (1.0f64, x.clone());
    while iterations < max_iter {
        let r = residual(a, &x, b);
        let before = norm(&r) / bnorm;
        let used = minres_cycle(a, &prec, &r, &mut x, tol * bnorm / norm(&r), max_iter - iterations);
        iterations += used;
        let rel = norm(&residual(a, &x, b)) / bnorm;
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= tol || used == 0 || rel > 0.5 * before {
            break;
        }
    }
    Ok((best.1, SolveStats { iterations, residual: best.0 }))
}

/// One MINRES pass on `A d = r`, accumulating `x += d`. Returns the number
/// of iterations used.
fn minres_cycle(
    a: &SparseSym,
    prec: &[f64],
    r: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> usize {
    let n = r.len();
    let apply_prec = |v: &[f64]| -> Vec<f64> { v.iter().zip(prec).map(|(a, p)| a * p).collect() };
    let mut r1 = r.to_vec();
    let mut y = apply_prec(&r1);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return 0;
    }
    // Stop the estimate a little early so the true-residual check passes.
    let target = 0.5 * rtol * beta1;
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut itn = 0;
    while itn < max_iter {
        itn += 1;
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        let mut yy = a.matvec(&v);
        if itn >= 2 {
            axpy(-beta / oldb, &r1, &mut yy);
        }
        let alfa = dot(&v, &yy);
        axpy(-alfa / beta, &r2, &mut yy);
        std::mem::swap(&mut r1, &mut r2);
        r2 = yy;
        y = apply_prec(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let denom = 1.0 / gamma;
        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = (0..n)
            .map(|i| (v[i] - oldeps * w1[i] - delta * w2[i]) * denom)
            .collect();
        axpy(phi, &w, x);

        if phibar <= target || beta <= 1e-300 {
            break;
        }
    }
    itn
}

/// Jacobi-preconditioned conjugate gradients for SPD `A`.
pub fn solve_spd(
    a: &SparseSym,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    check_dims(a, b)?;
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, residual: 0.0 }));
    }
    let prec = jacobi(a);
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&prec).map(|(a, p)| a * p).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut refreshed = f64::INFINITY;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap < 0.0 || pap.is_nan() {
            return Err(Error::InvalidInput(
                "conjugate gradients met a negative curvature direction".into(),
            ));
        }
        if pap == 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let mut restart = false;
        if norm(&r) / bnorm <= tol {
            // Replace the recursive residual by the true one and restart,
            // unless the previous refresh did at least as well.
            r = residual(a, &x, b);
            let rel = norm(&r) / bnorm;
            if rel <= tol {
                return Ok((x, SolveStats { iterations: it, residual: rel }));
            }
            if rel > 0.5 * refreshed {
                break;
            }
            refreshed = rel;
            restart = true;
        }
        for i in 0..n {
            z[i] = r[i] * prec[i];
        }
        let rz_new = dot(&r, &z);
        let beta = if restart { 0.0 } else { rz_new / rz };
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: it,
        residual: norm(&residual(a, &x, b)) / bnorm,
    })
}

/// Restarted GMRES for a general linear operator given as a closure.
pub fn gmres<F>(
    mut apply: F,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, residual: 0.0 }));
    }
    let restart = restart.max(1).min(n.max(1));
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        let ax = apply(&x)?;
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            return Ok((x, SolveStats { iterations, residual: rel }));
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<f64>>()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k = 0;
        while k < restart && iterations < max_iter {
            iterations += 1;
            let mut w = apply(&basis[k])?;
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(&w, q);
                    h[i][k] += c;
                    axpy(-c, q, &mut w);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            if (g[k].abs() / bnorm) <= 0.5 * tol || wn <= 1e-300 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut yk = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * yk[j]).sum();
            yk[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in yk.iter().enumerate() {
            axpy(*yi, &basis[i], &mut x);
        }
    }
    let ax = apply(&x)?;
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    rel = rel.min(norm(&r) / bnorm);
    if rel <= tol {
        return Ok((x, SolveStats { iterations, residual: rel }));
    }
    Err(Error::NotConverged { iterations, residual: rel })
}

fn check_dims(a: &SparseSym, b: &[f64]) -> Result<()> {
    if a.dim() != b.len() {
        return Err(Error::InvalidInput(format!(
            "right-hand side has length {} for a {}x{} matrix",
            b.len(),
            a.dim(),
            a.dim()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("right-hand side is not finite".into()));
    }
    Ok(())
}
