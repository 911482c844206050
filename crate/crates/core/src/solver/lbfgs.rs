//! Limited-memory BFGS with Armijo backtracking.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    pub memory: usize,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        LbfgsParams {
            memory: 10,
            grad_tol: 1e-8,
            max_iters: 2000,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Rounding noise tolerated in objective comparisons.
pub fn noise_floor(f: f64) -> f64 {
    1e-14 * (1.0 + f.abs())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f` from `x0`. `eval` returns value and gradient; an error at
/// `x0` is returned, errors at trial points count as rejected steps.
pub fn minimize<E>(
    x0: Vec<f64>,
    params: &LbfgsParams,
    mut eval: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
) -> Result<LbfgsResult, E> {
    let (mut f, mut g) = eval(&x0)?;
    let mut x = x0;
    let mut history = vec![f];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(params.memory);
    let mut iterations = 0;

    let finish = |x, f, grad, iterations, termination, history| LbfgsResult {
        x,
        f,
        grad,
        iterations,
        termination,
        history,
    };

    loop {
        if sup_norm(&g) < params.grad_tol {
            return Ok(finish(x, f, g, iterations, Termination::Converged, history));
        }
        if iterations >= params.max_iters {
            return Ok(finish(x, f, g, iterations, Termination::MaxIterations, history));
        }

        let mut d = two_loop(&g, &mem);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) || !slope.is_finite() {
            mem.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=params.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            if trial == x {
                break;
            }
            if let Ok((ft, gt)) = eval(&trial) {
                let armijo = ft <= f + params.armijo_c * alpha * slope;
                // Near the minimum the decrease drops below the rounding noise
                // of f; then use the derivative form of the sufficient-decrease
                // test, exact for quadratics.
                let approx = (ft - f).abs() <= noise_floor(f)
                    && dot(&gt, &d) <= (2.0 * params.armijo_c - 1.0) * slope;
                if ft.is_finite() && (armijo || approx) {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            alpha *= params.backtrack;
        }
        let Some((xn, fnew, gn)) = accepted else {
            return Ok(finish(x, f, g, iterations, Termination::LineSearchFailed, history));
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy.is_finite() {
            if mem.len() == params.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        f = fnew;
        g = gn;
        history.push(f);
        iterations += 1;
    }
}

fn two_loop(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
