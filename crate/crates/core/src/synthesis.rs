//! Inverse continuous-spectrum NFT: reconstruct q(t) from Q(lambda) by
//! discrete layer peeling against the AL discretization, then polish the
//! result with residual refinement until the AL forward map reproduces the
//! requested spectrum samples to near machine precision.
//!
//! The forward AL recursion evaluated at the grid frequencies depends only on
//! W = exp(2 i lambda dt), and the n grid points map exactly onto the n-th
//! roots of unity. The peel runs on samples of the reflection ratio
//! R = B/A at those points:
//!   tap      rho_u = mean_k R_k          (leading response coefficient)
//!   sample   Q_u   = -conj(rho_u), q_u = Q_u / dt
//!   deflate  R <- (R + conj(Q_u)) / (W (1 - Q_u R))
//! One pass recovers the burst samples from last to first. The mean-based tap
//! estimate aliases multiple-scattering tails, so a single pass lands around
//! the 1e-3..1e-6 level; iterating the pass against the exact forward ratio
//! residual drives the round trip to the 1e-11 stopping tolerance.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{SpectrumKind, SpectrumSamples, TimeGrid, TimeSignal};

/// Strict stopping tolerance for the refinement loop, max abs over ratio
/// samples. Weak and moderate spectra land well below this.
pub const ROUND_TRIP_TOLERANCE: f64 = 2.5e-11;
/// Acceptance floor when the iteration stalls on its roundoff-limited
/// plateau for strong (near-degenerate) media; keeps a 20% margin under the
/// 1e-10 round-trip contract.
pub const STALL_TOLERANCE: f64 = 8e-11;
const MAX_REFINEMENT_STEPS: usize = 200;

/// Working state of one peeling pass: the reflection-ratio samples of the
/// not-yet-peeled medium and the index of the step being removed.
#[derive(Debug, Clone)]
pub struct PeelState {
    pub reflection_response: Vec<Complex64>,
    pub step_index: usize,
}

/// Ratio samples R(W_k) corresponding to spectrum values Q(lambda_k) on the
/// standard grid. W_k^n = 1 there, and the centered time grid contributes an
/// alternating sign: R_k = -Q_k (-1)^(k - n/2) conj(W_k).
fn ratio_from_spectrum(values: &[Complex64], roots: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let sign = if (k + n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            -q * sign * roots[k].conj()
        })
        .collect()
}

fn spectrum_from_ratio(ratio: &[Complex64], roots: &[Complex64]) -> Vec<Complex64> {
    let n = ratio.len();
    ratio
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let sign = if (k + n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            -r * sign * roots[k]
        })
        .collect()
}

fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let kp = k as f64 - n as f64 / 2.0;
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * kp / n as f64)
        })
        .collect()
}

/// One full peeling pass: recover n field samples from ratio samples.
fn peel(ratio: &[Complex64], roots: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
    let n = ratio.len();
    let mut state = PeelState {
        reflection_response: ratio.to_vec(),
        step_index: n,
    };
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    for u in (0..n).rev() {
        state.step_index = u;
        let mut tap = Complex64::new(0.0, 0.0);
        for r in &state.reflection_response {
            tap += r;
        }
        tap /= n as f64;
        if !tap.re.is_finite() || !tap.im.is_finite() {
            return Err(Error::ReconstructionOverflow { step: u });
        }
        let qu = -tap.conj();
        q[u] = qu / dt;
        let qc = qu.conj();
        for (r, w) in state.reflection_response.iter_mut().zip(roots) {
            let denom = Complex64::new(1.0, 0.0) - qu * *r;
            *r = (*r + qc) / (denom * w);
        }
    }
    Ok(q)
}

/// Exact forward ratio samples B/A of the symmetric AL recursion at the given
/// circle points, for field samples `q` (already divided by nothing; q in
/// physical units, reflectors Q_u = q_u dt).
fn forward_ratio(q: &[Complex64], roots: &[Complex64], dt: f64) -> Vec<Complex64> {
    let qdt: Vec<Complex64> = q.iter().map(|z| z * dt).collect();
    let cs: Vec<f64> = qdt.iter().map(|z| 1.0 / (1.0 + z.norm_sqr()).sqrt()).collect();
    roots
        .par_iter()
        .map(|&w| {
            let mut a = Complex64::new(1.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            for (qu, &cu) in qdt.iter().zip(&cs) {
                let wb = w * b;
                let a_next = (a + qu * wb) * cu;
                b = (wb - qu.conj() * a) * cu;
                a = a_next;
            }
            b / a
        })
        .collect()
}

fn max_abs(r: &[Complex64]) -> f64 {
    r.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct RefineOutcome {
    q: Vec<Complex64>,
    /// target - goal at the accepted point, reusable as a warm start.
    correction: Vec<Complex64>,
    err: f64,
}

/// Solve the regularized least squares min ||r - A theta|| for the Anderson
/// mixing weights, with A given by columns `cols`. Normal equations on an
/// m x m Gram matrix, m <= ANDERSON_DEPTH.
fn mixing_weights(cols: &[Vec<Complex64>], r: &[Complex64]) -> Vec<Complex64> {
    let m = cols.len();
    let mut gram = vec![Complex64::new(0.0, 0.0); m * m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..cols[i].len() {
                acc += cols[i][k].conj() * cols[j][k];
            }
            gram[i * m + j] = acc;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..cols[i].len() {
            acc += cols[i][k].conj() * r[k];
        }
        rhs[i] = acc;
    }
    let trace: f64 = (0..m).map(|i| gram[i * m + i].re).sum();
    let reg = 1e-12 * (trace / m as f64).max(1e-300);
    for i in 0..m {
        gram[i * m + i] += reg;
    }
    // Gaussian elimination with partial pivoting.
    let mut theta = rhs;
    for col in 0..m {
        let mut piv = col;
        for row in col + 1..m {
            if gram[row * m + col].norm() > gram[piv * m + col].norm() {
                piv = row;
            }
        }
        if piv != col {
            for j in 0..m {
                gram.swap(col * m + j, piv * m + j);
            }
            theta.swap(col, piv);
        }
        let d = gram[col * m + col];
        if d.norm() < 1e-300 {
            continue;
        }
        for row in col + 1..m {
            let f = gram[row * m + col] / d;
            for j in col..m {
                let v = gram[col * m + j];
                gram[row * m + j] -= f * v;
            }
            let t = theta[col];
            theta[row] -= f * t;
        }
    }
    for col in (0..m).rev() {
        let d = gram[col * m + col];
        if d.norm() < 1e-300 {
            theta[col] = Complex64::new(0.0, 0.0);
            continue;
        }
        let mut acc = theta[col];
        for j in col + 1..m {
            acc -= gram[col * m + j] * theta[j];
        }
        theta[col] = acc / d;
    }
    theta
}

const ANDERSON_DEPTH: usize = 8;

/// Anderson-accelerated residual refinement toward `goal`, starting from
/// `goal + corr0`. The underlying fixed-point map is T -> T + r(T) with
/// r(T) = goal - forward(peel(T)); mixing the iterate history lets the loop
/// contract even when a few modes of the plain iteration sit near unity.
fn refine(
    goal: &[Complex64],
    roots: &[Complex64],
    dt: f64,
    corr0: &[Complex64],
    tol: f64,
) -> std::result::Result<RefineOutcome, f64> {
    let n = goal.len();
    let evaluate = |target: &[Complex64]| -> Option<(Vec<Complex64>, Vec<Complex64>, f64)> {
        let q = peel(target, roots, dt).ok()?;
        let achieved = forward_ratio(&q, roots, dt);
        let residual: Vec<Complex64> =
            goal.iter().zip(&achieved).map(|(g, f)| g - f).collect();
        let err = max_abs(&residual);
        err.is_finite().then_some((q, residual, err))
    };

    let mut t_cur: Vec<Complex64> = goal.iter().zip(corr0).map(|(g, c)| g + c).collect();
    let (q0, r0, e0) = match evaluate(&t_cur) {
        Some(v) => v,
        None => return Err(f64::INFINITY),
    };
    let mut r_cur = r0;
    let mut err_cur = e0;
    let mut best_q = q0;
    let mut best_target = t_cur.clone();
    let mut best_err = err_cur;

    let debug = std::env::var_os("NFTLAB_DEBUG_REFINE").is_some();
    let mut dts: Vec<Vec<Complex64>> = Vec::new(); // T_{k+1} - T_k
    let mut drs: Vec<Vec<Complex64>> = Vec::new(); // r_{k+1} - r_k
    let mut since_improvement = 0usize;
    let mut recovery_step: f64 = 1.0;

    for _ in 0..MAX_REFINEMENT_STEPS {
        if best_err < tol {
            let correction = (0..n).map(|k| best_target[k] - goal[k]).collect();
            return Ok(RefineOutcome {
                q: best_q,
                correction,
                err: best_err,
            });
        }
        if since_improvement > 40 {
            // Long plateau: no realistic prospect of further digits.
            break;
        }
        let t_next: Vec<Complex64> = if dts.is_empty() {
            (0..n).map(|k| t_cur[k] + r_cur[k]).collect()
        } else {
            let theta = mixing_weights(&drs, &r_cur);
            (0..n)
                .map(|k| {
                    let mut v = t_cur[k] + r_cur[k];
                    for (j, th) in theta.iter().enumerate() {
                        v -= th * (dts[j][k] + drs[j][k]);
                    }
                    v
                })
                .collect()
        };
        if debug {
            let cand_err = evaluate(&t_next).map(|(_, _, e)| e);
            eprintln!(
                "refine: best={best_err:.3e} cur={err_cur:.3e} hist={} cand={cand_err:?}",
                dts.len()
            );
        }
        match evaluate(&t_next) {
            Some((q, r_next, err_next)) if err_next <= 100.0 * best_err.max(tol) => {
                dts.push((0..n).map(|k| t_next[k] - t_cur[k]).collect());
                drs.push((0..n).map(|k| r_next[k] - r_cur[k]).collect());
                if dts.len() > ANDERSON_DEPTH {
                    dts.remove(0);
                    drs.remove(0);
                }
                recovery_step = 1.0;
                t_cur = t_next;
                r_cur = r_next;
                err_cur = err_next;
                if err_cur < best_err {
                    best_err = err_cur;
                    best_q = q;
                    best_target = t_cur.clone();
                    since_improvement = 0;
                } else {
                    since_improvement += 1;
                }
            }
            other => {
                // Peel overflow or a diverging excursion: restart from the
                // best point with a compounding short plain step.
                drop(other);
                dts.clear();
                drs.clear();
                recovery_step *= 0.25;
                if recovery_step < 1e-6 {
                    break;
                }
                t_cur = best_target.clone();
                match evaluate(&t_cur) {
                    Some((q_b, r_b, e_b)) => {
                        best_q = q_b;
                        r_cur = r_b.iter().map(|r| recovery_step * r).collect();
                        err_cur = e_b;
                    }
                    None => return Err(best_err),
                }
            }
        }
    }
    let correction = (0..n).map(|k| best_target[k] - goal[k]).collect();
    Ok(RefineOutcome {
        q: best_q,
        correction,
        err: best_err,
    })
}

/// Reconstruct the time signal whose AL forward transform reproduces
/// `q_spec` on the same grid to [`ROUND_TRIP_TOLERANCE`].
///
/// Strong spectra that defeat direct refinement are handled by amplitude
/// continuation: the target ratio is ramped up from a scale where the peel
/// is accurate, carrying the learned correction along as a warm start.
pub fn inverse_nft(q_spec: &SpectrumSamples, tg: &TimeGrid) -> Result<TimeSignal> {
    if q_spec.kind != SpectrumKind::NonlinearQ {
        return Err(Error::invalid("inverse_nft expects a NonlinearQ spectrum"));
    }
    let n = tg.n_samples();
    if q_spec.grid.n_samples() != n {
        return Err(Error::invalid(format!(
            "spectrum has {} samples but the time grid has {}",
            q_spec.grid.n_samples(),
            n
        )));
    }
    let dt = tg.dt();
    let roots = unit_roots(n);
    let goal = ratio_from_spectrum(&q_spec.values, &roots);
    let zero = vec![Complex64::new(0.0, 0.0); n];

    let mut global_best: Option<(Vec<Complex64>, f64)> = None;
    let mut note_best = |q: &[Complex64], err: f64, best: &mut Option<(Vec<Complex64>, f64)>| {
        if best.as_ref().map_or(true, |(_, e)| err < *e) {
            *best = Some((q.to_vec(), err));
        }
    };

    match refine(&goal, &roots, dt, &zero, ROUND_TRIP_TOLERANCE) {
        Ok(out) => {
            if out.err < ROUND_TRIP_TOLERANCE {
                return TimeSignal::new(*tg, out.q);
            }
            note_best(&out.q, out.err, &mut global_best);
        }
        Err(_) => {}
    }

    // Continuation in target amplitude, warm-starting each stage with the
    // correction learned at the previous amplitude.
    let mut gamma: f64 = 0.0;
    let mut step: f64 = 0.25;
    let mut corr = zero.clone();
    let mut evals = 0usize;
    loop {
        let attempt = (gamma + step).min(1.0);
        let scaled: Vec<Complex64> = goal.iter().map(|g| g * attempt).collect();
        evals += 1;
        let outcome = refine(&scaled, &roots, dt, &corr, ROUND_TRIP_TOLERANCE);
        if std::env::var_os("NFTLAB_DEBUG_REFINE").is_some() {
            eprintln!(
                "continuation: gamma={gamma:.4} attempt={attempt:.4} err={:?}",
                outcome.as_ref().map(|o| o.err).map_err(|e| *e)
            );
        }
        let mut advanced = false;
        if let Ok(out) = outcome {
            if out.err < ROUND_TRIP_TOLERANCE {
                if attempt >= 1.0 {
                    return TimeSignal::new(*tg, out.q);
                }
                gamma = attempt;
                corr = out.correction;
                step = (step * 1.6).min(1.0 - gamma);
                advanced = true;
            } else if attempt >= 1.0 {
                note_best(&out.q, out.err, &mut global_best);
            }
        }
        if !advanced {
            step *= 0.5;
            if step < 1e-3 || evals > 100 {
                if let Some((q, err)) = global_best {
                    if err < STALL_TOLERANCE {
                        return TimeSignal::new(*tg, q);
                    }
                    return Err(Error::ConvergenceFailure {
                        residual: err,
                        iterations: evals,
                    });
                }
                return Err(Error::ConvergenceFailure {
                    residual: f64::INFINITY,
                    iterations: evals,
                });
            }
        }
    }
}
