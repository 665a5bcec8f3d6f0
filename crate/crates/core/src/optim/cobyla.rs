//! Derivative-free minimization with linear models over a simplex, in the
//! style of Powell's COBYLA restricted to the unconstrained case.
//!
//! The method keeps `n + 1` interpolation points. Their values define a linear
//! model, and each iteration steps a distance `rho` down the model gradient.
//! Points are swapped out one at a time; when a step fails to deliver a tenth
//! of the predicted decrease the simplex geometry is repaired or, if the
//! geometry is acceptable, `rho` is halved until it reaches `rho_end`.

use nalgebra::{DMatrix, DVector};

use super::{Minimum, Status};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobylaOptions {
    /// Budget of objective evaluations, including the starting point.
    pub max_evals: usize,
    pub rho_begin: f64,
    pub rho_end: f64,
}

impl Default for CobylaOptions {
    fn default() -> Self {
        Self { max_evals: 500, rho_begin: 0.5, rho_end: 1e-4 }
    }
}

// vertices farther than this many `rho` from the pivot are pulled back in
const FAR: f64 = 2.1;
// vertices closer than this many `rho` to the opposite face are pushed out
const FLAT: f64 = 0.25;
const GEOMETRY_STEP: f64 = 0.5;
const ACCEPT_RATIO: f64 = 0.1;

struct Counter<F> {
    f: F,
    evaluations: usize,
    best: f64,
    history: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective { evaluation: self.evaluations });
        }
        self.best = self.best.min(v);
        self.history.push(self.best);
        Ok(v)
    }
}

pub fn minimize<F>(f: F, x0: &[f64], opts: &CobylaOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(opts.rho_begin >= opts.rho_end && opts.rho_end > 0.0) {
        return Err(Error::Config(format!(
            "need rho_begin >= rho_end > 0, got {} and {}",
            opts.rho_begin, opts.rho_end
        )));
    }
    let n = x0.len();
    let mut counter = Counter { f, evaluations: 0, best: f64::INFINITY, history: Vec::new() };
    let mut x_best = DVector::from_column_slice(x0);
    let mut f_best = counter.eval(x0)?;
    let finish = |x: &DVector<f64>, fx: f64, status: Status, counter: Counter<F>| Minimum {
        x: x.as_slice().to_vec(),
        fx,
        evaluations: counter.evaluations,
        iterations: counter.evaluations,
        status,
        history: counter.history,
    };
    if n == 0 {
        return Ok(finish(&x_best, f_best, Status::Converged, counter));
    }

    let mut rho = opts.rho_begin;
    // row j is the displacement of vertex j from the pivot
    let mut disp = DMatrix::<f64>::zeros(n, n);
    let mut fv = vec![f64::INFINITY; n];
    for j in 0..n {
        if counter.evaluations >= opts.max_evals {
            // incomplete simplex: return the best coordinate probe
            let (jb, fb) = best_vertex(&fv);
            if fb < f_best {
                let mut x = x_best.clone();
                x[jb] += rho;
                return Ok(finish(&x, fb, Status::MaxIterations, counter));
            }
            return Ok(finish(&x_best, f_best, Status::MaxIterations, counter));
        }
        disp[(j, j)] = rho;
        let mut x = x_best.clone();
        x[j] += rho;
        fv[j] = counter.eval(x.as_slice())?;
    }

    let mut last_failed = false;
    let status = loop {
        // the best vertex becomes the pivot
        let (jb, fb) = best_vertex(&fv);
        if fb < f_best {
            let shift = disp.row(jb).clone_owned();
            x_best += shift.transpose();
            for i in 0..n {
                if i != jb {
                    let row = disp.row(i) - &shift;
                    disp.set_row(i, &row);
                }
            }
            disp.set_row(jb, &(-shift));
            std::mem::swap(&mut fv[jb], &mut f_best);
        }
        if counter.evaluations >= opts.max_evals {
            break Status::MaxIterations;
        }

        let Some(dual) = disp.clone().try_inverse() else {
            // degenerate simplex: rebuild it around the pivot
            if counter.evaluations + n > opts.max_evals {
                break Status::MaxIterations;
            }
            disp.fill(0.0);
            for j in 0..n {
                disp[(j, j)] = rho;
                let mut x = x_best.clone();
                x[j] += rho;
                fv[j] = counter.eval(x.as_slice())?;
            }
            continue;
        };

        let dist: Vec<f64> = (0..n).map(|j| disp.row(j).norm()).collect();
        let height: Vec<f64> = (0..n).map(|j| 1.0 / dual.column(j).norm()).collect();
        let df = DVector::from_iterator(n, fv.iter().map(|v| v - f_best));
        let grad = &dual * &df;

        if last_failed {
            last_failed = false;
            if let Some(j) = worst_geometry(&dist, &height, rho) {
                let normal = dual.column(j).normalize();
                let mut step = normal * (GEOMETRY_STEP * rho);
                if grad.dot(&step) > 0.0 {
                    step = -step;
                }
                let x = &x_best + &step;
                fv[j] = counter.eval(x.as_slice())?;
                disp.set_row(j, &step.transpose());
                continue;
            }
            if rho <= opts.rho_end {
                break Status::Converged;
            }
            rho *= 0.5;
            if rho <= 1.5 * opts.rho_end {
                rho = opts.rho_end;
            }
            continue;
        }

        let gnorm = grad.norm();
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(gnorm > f64::MIN_POSITIVE) {
            last_failed = true;
            continue;
        }
        let step = &grad * (-rho / gnorm);
        let x = &x_best + &step;
        let f_new = counter.eval(x.as_slice())?;
        let predicted = rho * gnorm;
        let actual = f_best - f_new;

        // replace the vertex whose removal keeps the simplex best conditioned,
        // favouring vertices far from the pivot
        let trust = 1.1 * rho;
        let mut replace = 0;
        let mut weight = f64::NEG_INFINITY;
        for (j, &d) in dist.iter().enumerate() {
            let mut w = dual.column(j).dot(&step).abs();
            if d > trust {
                w *= (d / trust).powi(2);
            }
            if w > weight {
                weight = w;
                replace = j;
            }
        }
        disp.set_row(replace, &step.transpose());
        fv[replace] = f_new;
        last_failed = actual < ACCEPT_RATIO * predicted;
    };

    // a final pivot pass already ran at the top of the loop for MaxIterations;
    // Converged exits happen right after a pivot pass too
    Ok(finish(&x_best, f_best, status, counter))
}

fn best_vertex(fv: &[f64]) -> (usize, f64) {
    fv.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc })
}

fn worst_geometry(dist: &[f64], height: &[f64], rho: f64) -> Option<usize> {
    let far = dist
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > FAR * rho)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j);
    far.or_else(|| {
        height
            .iter()
            .enumerate()
            .filter(|(_, &h)| h < FLAT * rho)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
    })
}
