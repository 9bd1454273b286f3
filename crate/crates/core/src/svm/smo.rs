//! Sequential minimal optimization for the C-SVC dual.
//!
//! Solves
//!
//! ```text
//! min_a  1/2 a^T Q a - e^T a    s.t.  y^T a = 0,  0 <= a_i <= C
//! ```
//!
//! with `Q_ij = y_i y_j K(x_i, x_j)`. Each step picks the maximal violating
//! pair and solves the two-variable subproblem analytically. When no pair
//! violates the optimality conditions by more than `tol`, the gradient is
//! rebuilt from scratch and the variables are re-scanned in a freshly
//! shuffled order; the solver stops once such a full pass confirms
//! convergence.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SvmError;

const TAU: f64 = 1e-12;

/// Kernel rows are cached up to this many entries (~256 MiB of `f64`).
const CACHE_ENTRIES: usize = 32 << 20;

pub trait KernelFn: Sync {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64;
}

pub struct RbfKernel {
    pub gamma: f64,
}

impl KernelFn for RbfKernel {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-self.gamma * d2).exp()
    }
}

pub struct LinearKernel;

impl KernelFn for LinearKernel {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

/// Signed kernel rows `Q_i.` with a bounded FIFO cache.
struct QMatrix<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    kernel: &'a dyn KernelFn,
    rows: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity_rows: usize,
    diag: Vec<f64>,
}

impl<'a> QMatrix<'a> {
    fn new(x: &'a [Vec<f64>], y: &'a [f64], kernel: &'a dyn KernelFn) -> Self {
        let n = x.len();
        QMatrix {
            x,
            y,
            kernel,
            rows: vec![None; n],
            order: VecDeque::new(),
            capacity_rows: (CACHE_ENTRIES / n.max(1)).max(2),
            diag: (0..n).map(|i| kernel.eval(&x[i], &x[i])).collect(),
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            if self.order.len() >= self.capacity_rows {
                if let Some(old) = self.order.pop_front() {
                    self.rows[old] = None;
                }
            }
            let xi = &self.x[i];
            let yi = self.y[i];
            let row = self
                .x
                .iter()
                .zip(self.y)
                .map(|(xj, &yj)| yi * yj * self.kernel.eval(xi, xj))
                .collect();
            self.rows[i] = Some(row);
            self.order.push_back(i);
        }
        self.rows[i].as_deref().expect("row just filled")
    }
}

#[derive(Debug, Clone)]
pub struct SmoConfig {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final maximal violation `m(a) - M(a)`.
    pub gap: f64,
    /// Dual objective in maximization form, `e^T a - 1/2 a^T Q a`.
    pub objective: f64,
}

struct State {
    alpha: Vec<f64>,
    grad: Vec<f64>,
    y: Vec<f64>,
    c: f64,
}

impl State {
    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// Maximal violating pair `(i, j, m - M)` scanning in `order`.
    fn select(&self, order: &[usize]) -> Option<(usize, usize, f64)> {
        let mut up: Option<(usize, f64)> = None;
        let mut low: Option<(usize, f64)> = None;
        for &t in order {
            let v = -self.y[t] * self.grad[t];
            if self.in_up(t) && up.is_none_or(|(_, best)| v > best) {
                up = Some((t, v));
            }
            if self.in_low(t) && low.is_none_or(|(_, best)| v < best) {
                low = Some((t, v));
            }
        }
        match (up, low) {
            (Some((i, m)), Some((j, mm))) => Some((i, j, m - mm)),
            _ => None,
        }
    }

    fn bias(&self) -> f64 {
        let mut free_sum = 0.0;
        let mut n_free = 0usize;
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for t in 0..self.alpha.len() {
            let v = -self.y[t] * self.grad[t];
            let a = self.alpha[t];
            if a > 0.0 && a < self.c {
                free_sum += v;
                n_free += 1;
            } else {
                if self.in_up(t) {
                    lower = lower.max(v);
                }
                if self.in_low(t) {
                    upper = upper.min(v);
                }
            }
        }
        if n_free > 0 {
            free_sum / n_free as f64
        } else if lower.is_finite() && upper.is_finite() {
            0.5 * (lower + upper)
        } else if lower.is_finite() {
            lower
        } else if upper.is_finite() {
            upper
        } else {
            0.0
        }
    }
}

fn rebuild_gradient(state: &mut State, q: &mut QMatrix<'_>) {
    let n = state.alpha.len();
    state.grad = vec![-1.0; n];
    for i in 0..n {
        let a = state.alpha[i];
        if a != 0.0 {
            let row = q.row(i);
            for (g, qij) in state.grad.iter_mut().zip(row) {
                *g += a * qij;
            }
        }
    }
}

pub fn solve(x: &[Vec<f64>], y: &[f64], kernel: &dyn KernelFn, cfg: &SmoConfig) -> Result<SmoSolution, SvmError> {
    let n = x.len();
    let mut q = QMatrix::new(x, y, kernel);
    let mut state = State {
        alpha: vec![0.0; n],
        grad: vec![-1.0; n],
        y: y.to_vec(),
        c: cfg.c,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut iterations = 0usize;
    let mut confirmed = false;
    let gap = loop {
        let Some((i, j, gap)) = state.select(&order) else {
            break 0.0;
        };
        if gap < cfg.tol {
            if confirmed {
                break gap;
            }
            rebuild_gradient(&mut state, &mut q);
            order.shuffle(&mut rng);
            confirmed = true;
            continue;
        }
        confirmed = false;
        if iterations >= cfg.max_iter {
            return Err(SvmError::NotConverged { iterations, gap });
        }
        iterations += 1;

        let c = cfg.c;
        let (old_i, old_j) = (state.alpha[i], state.alpha[j]);
        let q_ij = q.row(i)[j];
        let (qd_i, qd_j) = (q.diag[i], q.diag[j]);
        let (gi, gj) = (state.grad[i], state.grad[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let quad = (qd_i + qd_j + 2.0 * q_ij).max(TAU);
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qd_i + qd_j - 2.0 * q_ij).max(TAU);
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        state.alpha[i] = ai;
        state.alpha[j] = aj;

        let (di, dj) = (ai - old_i, aj - old_j);
        if di != 0.0 {
            let row = q.row(i);
            for (g, qv) in state.grad.iter_mut().zip(row) {
                *g += di * qv;
            }
        }
        if dj != 0.0 {
            let row = q.row(j);
            for (g, qv) in state.grad.iter_mut().zip(row) {
                *g += dj * qv;
            }
        }
    };

    let objective = state
        .alpha
        .iter()
        .zip(&state.grad)
        .map(|(a, g)| a * (1.0 - g) / 2.0)
        .sum();
    Ok(SmoSolution {
        bias: state.bias(),
        alpha: state.alpha,
        iterations,
        gap,
        objective,
    })
}
