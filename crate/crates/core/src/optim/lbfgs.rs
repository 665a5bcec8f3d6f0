//! Limited-memory BFGS on finite-difference gradients.
//!
//! Full gradients are taken only at accepted points; the line search probes
//! the directional derivative with a two-point central difference along the
//! search direction.

use std::collections::VecDeque;

use super::finite_diff::{central_gradient, DEFAULT_STEP};
use super::{Minimum, Status};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub max_iters: usize,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Finite-difference step.
    pub step: f64,
    /// Stop once `max |g_i|` drops below this.
    pub gtol: f64,
    /// Stop once the relative decrease of one iteration drops below this.
    pub ftol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iters: 50, memory: 10, step: DEFAULT_STEP, gtol: 1e-9, ftol: 1e-13 }
    }
}

const ARMIJO: f64 = 1e-4;
const CURVATURE: f64 = 0.9;
const MAX_LINE_EVALS: usize = 30;

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { evaluation: self.evaluations })
        }
    }

    fn gradient(&mut self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut bad = false;
        let g = central_gradient(
            &mut |p: &[f64]| {
                self.evaluations += 1;
                let v = (self.f)(p);
                bad |= !v.is_finite();
                v
            },
            x,
            h,
        );
        if bad {
            return Err(Error::NonFiniteObjective { evaluation: self.evaluations });
        }
        Ok(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

pub fn minimize<F>(f: F, x0: &[f64], opts: &LbfgsOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut obj = Counted { f, evaluations: 0 };
    let mut x = x0.to_vec();
    let mut fx = obj.eval(&x)?;
    let mut history = vec![fx];
    if x.is_empty() {
        return Ok(Minimum { x, fx, evaluations: obj.evaluations, iterations: 0, status: Status::Converged, history });
    }
    let mut g = obj.gradient(&x, opts.step)?;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut status = Status::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= opts.gtol {
            status = Status::Converged;
            break;
        }
        let mut dir = two_loop(&g, &pairs);
        let mut slope = dot(&g, &dir);
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(slope < 0.0) {
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let first = if pairs.is_empty() { (1.0 / dir.iter().map(|v| v * v).sum::<f64>().sqrt()).min(1.0) } else { 1.0 };

        let found = line_search(&mut obj, &x, fx, &dir, slope, first, opts.step)?;
        let (alpha, f_new) = match found {
            Some(v) => v,
            None if !pairs.is_empty() => {
                // stale curvature: retry once from steepest descent
                pairs.clear();
                continue;
            }
            None => {
                status = Status::LineSearchFailed;
                break;
            }
        };
        iterations += 1;
        let x_new = axpy(&x, alpha, &dir);
        let g_new = obj.gradient(&x_new, opts.step)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        history.push(fx);
        if decrease <= opts.ftol * fx.abs().max(1.0) {
            status = Status::Converged;
            break;
        }
    }
    Ok(Minimum { x, fx, evaluations: obj.evaluations, iterations, status, history })
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Strong-Wolfe bracketing search. Returns the accepted step and its value,
/// or `None` when no sufficient decrease was found.
fn line_search<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    x: &[f64],
    f0: f64,
    dir: &[f64],
    slope0: f64,
    first: f64,
    h: f64,
) -> Result<Option<(f64, f64)>> {
    let dnorm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dh = h / dnorm;
    let phi = |obj: &mut Counted<F>, a: f64| obj.eval(&axpy(x, a, dir));
    let dphi = |obj: &mut Counted<F>, a: f64| -> Result<f64> {
        let up = obj.eval(&axpy(x, a + dh, dir))?;
        let down = obj.eval(&axpy(x, a - dh, dir))?;
        Ok((up - down) / (2.0 * dh))
    };

    let mut best: Option<(f64, f64)> = None;
    let note = |a: f64, v: f64, best: &mut Option<(f64, f64)>| {
        if v < f0 + ARMIJO * a * slope0 && best.is_none_or(|(_, bv)| v < bv) {
            *best = Some((a, v));
        }
    };

    let (mut lo, mut f_lo, mut d_lo) = (0.0, f0, slope0);
    let mut hi: Option<(f64, f64)> = None;
    let mut a = first;
    for _ in 0..MAX_LINE_EVALS {
        let fa = phi(obj, a)?;
        note(a, fa, &mut best);
        if fa > f0 + ARMIJO * a * slope0 || fa >= f_lo {
            hi = Some((a, fa));
        } else {
            let da = dphi(obj, a)?;
            if da.abs() <= -CURVATURE * slope0 {
                return Ok(Some((a, fa)));
            }
            let flip = match hi {
                None => da >= 0.0,
                Some((ah, _)) => da * (ah - lo) >= 0.0,
            };
            if flip {
                hi = Some((lo, f_lo));
            }
            lo = a;
            f_lo = fa;
            d_lo = da;
        }
        a = match hi {
            None => a * 2.0,
            Some((ah, fh)) => {
                // quadratic through (lo, f_lo, d_lo) and (ah, fh), kept inside the bracket
                let width = ah - lo;
                let denom = 2.0 * (fh - f_lo - d_lo * width);
                let trial = if denom > 0.0 { lo - d_lo * width * width / denom } else { lo + 0.5 * width };
                let (l, r) = if lo < ah { (lo, ah) } else { (ah, lo) };
                let margin = 0.1 * (r - l);
                if (r - l).abs() < 1e-14 * a.abs().max(1.0) {
                    break;
                }
                trial.clamp(l + margin, r - margin)
            }
        };
    }
    Ok(best)
}
