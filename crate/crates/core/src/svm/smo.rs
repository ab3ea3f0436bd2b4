//! Pairwise dual solver for the soft-margin SVM.
//!
//! Solves `min ½αᵀQα − eᵀα` s.t. `0 ≤ α ≤ C`, `yᵀα = 0`, `Q_ij = y_i y_j K_ij`
//! by sequential minimal optimization with the second-order working-set rule
//! (maximal violating `i`, then the `j` with the largest guaranteed decrease).
//! Stops when the maximal KKT violation `m(α) − M(α)` drops below `tol`.

use std::borrow::Cow;
use std::collections::{HashMap, VecDeque};

use super::kernel::KernelSpec;

const TAU: f64 = 1e-12;

/// Row access to a kernel (Gram) matrix.
pub(crate) trait KernelRows {
    fn len(&self) -> usize;
    fn diag(&self, i: usize) -> f64;
    fn row(&mut self, i: usize) -> Cow<'_, [f64]>;
}

/// Kernel rows computed from feature vectors, with a bounded row cache.
pub(crate) struct DirectRows<'a> {
    x: &'a [Vec<f64>],
    kernel: KernelSpec,
    diag: Vec<f64>,
    cache: RowCache,
}

impl<'a> DirectRows<'a> {
    pub(crate) fn new(x: &'a [Vec<f64>], kernel: KernelSpec, cache_bytes: usize) -> Self {
        let diag = x.iter().map(|v| kernel.eval_unchecked(v, v)).collect();
        let row_bytes = (x.len().max(1)) * std::mem::size_of::<f64>();
        Self {
            x,
            kernel,
            diag,
            cache: RowCache::new(cache_bytes / row_bytes),
        }
    }

    fn compute(&self, i: usize) -> Vec<f64> {
        let xi = &self.x[i];
        self.x
            .iter()
            .map(|xj| self.kernel.eval_unchecked(xi, xj))
            .collect()
    }
}

impl KernelRows for DirectRows<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn row(&mut self, i: usize) -> Cow<'_, [f64]> {
        if self.cache.capacity == 0 {
            return Cow::Owned(self.compute(i));
        }
        if !self.cache.rows.contains_key(&i) {
            let r = self.compute(i);
            self.cache.insert(i, r);
        }
        Cow::Borrowed(&self.cache.rows[&i])
    }
}

struct RowCache {
    capacity: usize,
    rows: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
}

impl RowCache {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            rows: HashMap::new(),
            order: VecDeque::new(),
        }
    }

    fn insert(&mut self, i: usize, row: Vec<f64>) {
        if self.rows.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        self.order.push_back(i);
        self.rows.insert(i, row);
    }
}

/// Kernel rows finished from a precomputed square matrix of
/// [`KernelSpec::base`] values over a larger pool, restricted to `idx`.
pub(crate) struct BaseRows<'a> {
    base: &'a [f64],
    stride: usize,
    idx: &'a [usize],
    kernel: KernelSpec,
    diag: Vec<f64>,
    cache: RowCache,
}

impl<'a> BaseRows<'a> {
    pub(crate) fn new(
        base: &'a [f64],
        stride: usize,
        idx: &'a [usize],
        kernel: KernelSpec,
        cache_bytes: usize,
    ) -> Self {
        let diag = idx
            .iter()
            .map(|&p| kernel.finish_base(base[p * stride + p]))
            .collect();
        let row_bytes = idx.len().max(1) * std::mem::size_of::<f64>();
        Self {
            base,
            stride,
            idx,
            kernel,
            diag,
            cache: RowCache::new(cache_bytes / row_bytes),
        }
    }

    fn compute(&self, i: usize) -> Vec<f64> {
        let start = self.idx[i] * self.stride;
        let full = &self.base[start..start + self.stride];
        self.idx
            .iter()
            .map(|&j| self.kernel.finish_base(full[j]))
            .collect()
    }
}

impl KernelRows for BaseRows<'_> {
    fn len(&self) -> usize {
        self.idx.len()
    }

    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn row(&mut self, i: usize) -> Cow<'_, [f64]> {
        if self.cache.capacity == 0 {
            return Cow::Owned(self.compute(i));
        }
        if !self.cache.rows.contains_key(&i) {
            let r = self.compute(i);
            self.cache.insert(i, r);
        }
        Cow::Borrowed(&self.cache.rows[&i])
    }
}

/// Solver output: `alpha`, the bias `b` of `f(x) = Σ α_i y_i K(x_i, x) + b`,
/// and whether the KKT gap reached `tol` within the budget.
#[derive(Clone, Debug)]
pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
}

/// Pair-update budget: `max_passes` sweeps of `100·max(n, 1000)` updates.
pub(crate) fn iteration_budget(n: usize, max_passes: usize) -> usize {
    max_passes
        .max(1)
        .saturating_mul(100)
        .saturating_mul(n.max(1000))
}

pub(crate) fn solve(
    rows: &mut dyn KernelRows,
    y: &[f64],
    c: f64,
    tol: f64,
    max_passes: usize,
) -> DualSolution {
    let n = rows.len();
    let mut alpha = vec![0.0; n];
    // gradient of the dual objective, Qα − e
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| rows.diag(i)).collect();
    let budget = iteration_budget(n, max_passes);

    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let in_up = |t: usize, a: &[f64]| {
        if y[t] > 0.0 {
            !upper(a[t])
        } else {
            !lower(a[t])
        }
    };
    let in_low = |t: usize, a: &[f64]| {
        if y[t] > 0.0 {
            !lower(a[t])
        } else {
            !upper(a[t])
        }
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < budget {
        // i: maximal −y_t ∇_t over I_up
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(t, &alpha) {
                let v = -y[t] * grad[t];
                if v >= g_max {
                    g_max = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        let k_i = rows.row(i).into_owned();

        // j: second-order choice over I_low with −y_t ∇_t < g_max
        let mut g_min = f64::INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !in_low(t, &alpha) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            let b = g_max - v;
            if b > 0.0 {
                let mut a = diag[i] + diag[t] - 2.0 * k_i[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if g_max - g_min < tol {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let k_ij = k_i[j];
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let q_ij = y[i] * y[j] * k_ij;
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_ai;
        let d_j = alpha[j] - old_aj;
        for t in 0..n {
            grad[t] += y[i] * y[t] * k_i[t] * d_i;
        }
        let k_j = rows.row(j);
        for t in 0..n {
            grad[t] += y[j] * y[t] * k_j[t] * d_j;
        }
    }

    let bias = compute_bias(&alpha, &grad, y, c);
    DualSolution {
        alpha,
        bias,
        converged,
    }
}

/// Bias from the free support vectors, or the middle of the feasible
/// interval when every α sits at a bound.
fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    };
    -rho
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_grows_with_n() {
        assert_eq!(iteration_budget(10, 10), 1_000_000);
        assert_eq!(iteration_budget(5000, 10), 5_000_000);
        assert_eq!(iteration_budget(5000, 0), 500_000);
    }

    #[test]
    fn cached_and_uncached_rows_agree() {
        let x: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64 * 0.3, (i * i) as f64 * 0.1])
            .collect();
        let k = KernelSpec::rbf(0.7).unwrap();
        let mut a = DirectRows::new(&x, k, 0);
        let mut b = DirectRows::new(&x, k, 2 * 6 * 8);
        for i in [0, 3, 5, 0, 1, 3, 2, 4] {
            assert_eq!(a.row(i).into_owned(), b.row(i).into_owned());
        }
    }

    #[test]
    fn base_rows_match_direct_rows_on_a_subset() {
        let x: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![i as f64 * 0.5, 1.0 - i as f64 * 0.2])
            .collect();
        let k = KernelSpec::rbf(0.9).unwrap();
        let n = x.len();
        let mut base = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                base[i * n + j] = k.base(&x[i], &x[j]);
            }
        }
        let idx = [4, 1, 3];
        let sub: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
        let mut direct = DirectRows::new(&sub, k, 0);
        let mut gathered = BaseRows::new(&base, n, &idx, k, 1 << 10);
        assert_eq!(gathered.len(), 3);
        for i in [0, 2, 1, 0] {
            assert_eq!(direct.row(i).into_owned(), gathered.row(i).into_owned());
            assert_eq!(direct.diag(i), gathered.diag(i));
        }
    }
}
