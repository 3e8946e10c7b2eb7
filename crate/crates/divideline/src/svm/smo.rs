//! Soft-margin dual solver: SMO-style coordinate ascent with deterministic
//! working-pair selection (no RNG), specialized to the linear kernel in
//! two dimensions, where the primal normal can be carried incrementally.

use crate::error::{Error, Result};
use crate::geodata::LabeledPoint;
use crate::resample::BalancedSample;
use crate::standardize::Standardizer;

use super::{Hyperplane, SvmConfig, SvmSolution};

// alpha within this distance of a bound counts as bounded
const BOUND_EPS: f64 = 1e-10;
// minimum useful alpha step
const STEP_EPS: f64 = 1e-12;

struct Problem {
    x: Vec<[f64; 2]>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    w: [f64; 2],
    b: f64,
    c: f64,
    tol: f64,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl Problem {
    fn decision(&self, i: usize) -> f64 {
        dot(self.w, self.x[i]) + self.b
    }

    fn error(&self, i: usize) -> f64 {
        self.decision(i) - self.y[i]
    }

    fn is_free(&self, i: usize) -> bool {
        self.alpha[i] > BOUND_EPS && self.alpha[i] < self.c - BOUND_EPS
    }

    /// Joint optimization of the pair (i1, i2). Returns true if either
    /// multiplier moved.
    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.error(i1), self.error(i2));
        let s = y1 * y2;

        let (lo, hi) = if s > 0.0 {
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        } else {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        };
        if hi - lo < STEP_EPS {
            return false;
        }

        let k11 = dot(self.x[i1], self.x[i1]);
        let k12 = dot(self.x[i1], self.x[i2]);
        let k22 = dot(self.x[i2], self.x[i2]);
        // eta = |x1 - x2|^2 for the linear kernel; it vanishes only for
        // coincident points, where shifting mass inside the pair cannot
        // change the normal, so the pair is skipped.
        let eta = k11 + k22 - 2.0 * k12;
        if eta <= 0.0 {
            return false;
        }
        let a2_new = (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi);

        if (a2_new - a2).abs() < STEP_EPS * (a2_new + a2 + STEP_EPS) {
            return false;
        }
        let a1_new = a1 + s * (a2 - a2_new);

        self.w[0] += y1 * (a1_new - a1) * self.x[i1][0] + y2 * (a2_new - a2) * self.x[i2][0];
        self.w[1] += y1 * (a1_new - a1) * self.x[i1][1] + y2 * (a2_new - a2) * self.x[i2][1];
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;

        // reset the threshold from the updated pair (exact for free vars)
        let b1 = y1 - dot(self.w, self.x[i1]);
        let b2 = y2 - dot(self.w, self.x[i2]);
        let free1 = a1_new > BOUND_EPS && a1_new < self.c - BOUND_EPS;
        let free2 = a2_new > BOUND_EPS && a2_new < self.c - BOUND_EPS;
        self.b = if free1 {
            b1
        } else if free2 {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        true
    }

    /// KKT check plus deterministic second-choice heuristic for i2.
    fn examine(&mut self, i2: usize) -> bool {
        let e2 = self.error(i2);
        let r2 = e2 * self.y[i2];
        let violated = (r2 < -self.tol && self.alpha[i2] < self.c - BOUND_EPS)
            || (r2 > self.tol && self.alpha[i2] > BOUND_EPS);
        if !violated {
            return false;
        }
        let n = self.x.len();

        // best |e1 - e2| over free variables, lowest index wins ties
        let mut best: Option<(f64, usize)> = None;
        for i1 in 0..n {
            if self.is_free(i1) {
                let gap = (self.error(i1) - e2).abs();
                if best.map_or(true, |(g, _)| gap > g) {
                    best = Some((gap, i1));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        // fall back to scanning from i2+1, free variables first
        for k in 0..n {
            let i1 = (i2 + 1 + k) % n;
            if self.is_free(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        for k in 0..n {
            let i1 = (i2 + 1 + k) % n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    /// Final threshold: mean over free support vectors, or the midpoint of
    /// the feasible interval when every multiplier sits on a bound.
    fn final_threshold(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..self.x.len() {
            if self.is_free(i) {
                sum += self.y[i] - dot(self.w, self.x[i]);
                count += 1;
            }
        }
        if count > 0 {
            return sum / count as f64;
        }
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for i in 0..self.x.len() {
            let v = self.y[i] - dot(self.w, self.x[i]);
            let at_zero = self.alpha[i] <= BOUND_EPS;
            if self.y[i] > 0.0 {
                // y=+1: alpha=0 wants b >= v, alpha=C wants b <= v
                if at_zero {
                    lower = lower.max(v);
                } else {
                    upper = upper.min(v);
                }
            } else if at_zero {
                upper = upper.min(v);
            } else {
                lower = lower.max(v);
            }
        }
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => 0.0,
        }
    }
}

/// Train a soft-margin linear SVM on a balanced sample. The standardizer
/// must be the one fit on the full training set, not the subsample. The
/// returned hyperplane has a unit normal oriented so the +1 class sits on
/// the positive side; `converged: false` flags a best-effort iterate after
/// `max_passes`.
pub fn train_svm(sample: &BalancedSample, std: &Standardizer, cfg: &SvmConfig) -> Result<SvmSolution> {
    cfg.validate()?;
    let points: &[LabeledPoint] = sample.points();
    let n = points.len();
    let mut problem = Problem {
        x: points.iter().map(|p| std.standardize(p.point)).collect(),
        y: points.iter().map(|p| p.label.sign()).collect(),
        alpha: vec![0.0; n],
        w: [0.0, 0.0],
        b: 0.0,
        c: cfg.c,
        tol: cfg.tol,
    };

    let mut examine_all = true;
    let mut passes = 0usize;
    let mut converged = false;
    while passes < cfg.max_passes {
        let mut num_changed = 0usize;
        if examine_all {
            for i in 0..n {
                num_changed += problem.examine(i) as usize;
            }
        } else {
            for i in 0..n {
                if problem.is_free(i) {
                    num_changed += problem.examine(i) as usize;
                }
            }
        }
        passes += 1;
        if examine_all {
            if num_changed == 0 {
                converged = true;
                break;
            }
            examine_all = false;
        } else if num_changed == 0 {
            examine_all = true;
        }
    }

    // recompute the normal from scratch to drop accumulated drift
    let mut w = [0.0f64; 2];
    for i in 0..n {
        let coef = problem.alpha[i] * problem.y[i];
        w[0] += coef * problem.x[i][0];
        w[1] += coef * problem.x[i][1];
    }
    problem.w = w;
    let b = problem.final_threshold();

    let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if norm < 1e-12 {
        // perfectly balanced non-separable layouts can cancel the normal
        return Err(Error::CancellationDegenerate { norm });
    }
    let mut w = [w[0] / norm, w[1] / norm];
    let mut b = b / norm;

    // orient so the +1 class has the larger mean decision value
    let mut mean_pos = 0.0;
    let mut mean_neg = 0.0;
    let half = (n / 2) as f64;
    for i in 0..n {
        let f = dot(w, problem.x[i]) + b;
        if problem.y[i] > 0.0 {
            mean_pos += f / half;
        } else {
            mean_neg += f / half;
        }
    }
    if mean_pos < mean_neg {
        w = [-w[0], -w[1]];
        b = -b;
    }

    Ok(SvmSolution {
        hyperplane: Hyperplane::new(w, b, *std)?,
        converged,
        passes,
    })
}
