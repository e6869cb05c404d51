//! Adam with per-row ("lazy") state.
//!
//! Each pair update touches a handful of rows; only those rows advance their
//! moment estimates and bias-correction step count. The same [`ParamStore`]
//! interface is implemented by the single-threaded store and by the shared
//! atomic store used for lock-free parallel training.

use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};

use crate::real::Real;

use super::tables::{EmbeddingTables, Param};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AdamCoefs<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Real> From<AdamConfig> for AdamCoefs<T> {
    fn from(c: AdamConfig) -> Self {
        AdamCoefs {
            lr: T::lit(c.lr),
            beta1: T::lit(c.beta1),
            beta2: T::lit(c.beta2),
            eps: T::lit(c.eps),
        }
    }
}

impl<T: Real> AdamCoefs<T> {
    /// One Adam update of a single coordinate. Returns (param, m, v).
    #[inline]
    fn update(&self, step: i32, p: T, m: T, v: T, g: T) -> (T, T, T) {
        let one = T::one();
        let m = self.beta1 * m + (one - self.beta1) * g;
        let v = self.beta2 * v + (one - self.beta2) * g * g;
        let m_hat = m / (one - self.beta1.powi(step));
        let v_hat = v / (one - self.beta2.powi(step));
        (p - self.lr * m_hat / (v_hat.sqrt() + self.eps), m, v)
    }
}

/// Generic Adam state for a flat parameter vector split into rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyAdam<T> {
    row_dim: usize,
    m: Vec<T>,
    v: Vec<T>,
    steps: Vec<u32>,
}

impl<T: Real> LazyAdam<T> {
    pub fn new(num_rows: usize, row_dim: usize) -> Self {
        LazyAdam {
            row_dim,
            m: vec![T::zero(); num_rows * row_dim],
            v: vec![T::zero(); num_rows * row_dim],
            steps: vec![0; num_rows],
        }
    }

    pub fn steps(&self, row: usize) -> u32 {
        self.steps[row]
    }

    /// Applies one step to `params` (the row's values). Returns false if any
    /// updated value is non-finite.
    pub(crate) fn step_row(
        &mut self,
        coefs: &AdamCoefs<T>,
        row: usize,
        params: &mut [T],
        grad: &[T],
    ) -> bool {
        debug_assert_eq!(params.len(), self.row_dim);
        self.steps[row] += 1;
        let t = self.steps[row] as i32;
        let base = row * self.row_dim;
        let mut finite = true;
        for (k, (p, &g)) in params.iter_mut().zip(grad).enumerate() {
            let (np, nm, nv) = coefs.update(t, *p, self.m[base + k], self.v[base + k], g);
            *p = np;
            self.m[base + k] = nm;
            self.v[base + k] = nv;
            finite &= np.is_finite();
        }
        finite
    }
}

/// Read/update access to embedding rows, used by the training kernels.
pub(crate) trait ParamStore<T: Real> {
    fn read(&self, p: Param, out: &mut [T]);
    /// Adam step on one row. Returns false if the row became non-finite.
    fn step(&mut self, p: Param, grad: &[T]) -> bool;
}

pub(crate) struct DenseStore<'a, T: Real> {
    pub tables: &'a mut EmbeddingTables<T>,
    pub adam: &'a mut LazyAdam<T>,
    pub coefs: AdamCoefs<T>,
}

impl<T: Real> ParamStore<T> for DenseStore<'_, T> {
    #[inline]
    fn read(&self, p: Param, out: &mut [T]) {
        out.copy_from_slice(self.tables.row(p));
    }

    #[inline]
    fn step(&mut self, p: Param, grad: &[T]) -> bool {
        let row = self.tables.row_index(p);
        self.adam
            .step_row(&self.coefs, row, self.tables.row_mut(p), grad)
    }
}

/// Parameters and Adam state behind relaxed atomics, shared by workers that
/// update without synchronization. Interleavings are nondeterministic but
/// every individual load and store is well defined.
pub(crate) struct SharedParams<T: Real> {
    num_views: usize,
    num_nodes: usize,
    dim: usize,
    data: Vec<T::Atomic>,
    m: Vec<T::Atomic>,
    v: Vec<T::Atomic>,
    steps: Vec<AtomicU32>,
}

impl<T: Real> SharedParams<T> {
    pub(crate) fn from_dense(tables: &EmbeddingTables<T>, adam: &LazyAdam<T>) -> Self {
        SharedParams {
            num_views: tables.num_views(),
            num_nodes: tables.num_nodes(),
            dim: tables.dim(),
            data: tables.as_slice().iter().map(|x| x.new_atomic()).collect(),
            m: adam.m.iter().map(|x| x.new_atomic()).collect(),
            v: adam.v.iter().map(|x| x.new_atomic()).collect(),
            steps: adam.steps.iter().map(|&s| AtomicU32::new(s)).collect(),
        }
    }

    pub(crate) fn write_back(&self, tables: &mut EmbeddingTables<T>, adam: &mut LazyAdam<T>) {
        for (dst, src) in tables.as_mut_slice().iter_mut().zip(&self.data) {
            *dst = T::load(src);
        }
        for (dst, src) in adam.m.iter_mut().zip(&self.m) {
            *dst = T::load(src);
        }
        for (dst, src) in adam.v.iter_mut().zip(&self.v) {
            *dst = T::load(src);
        }
        for (dst, src) in adam.steps.iter_mut().zip(&self.steps) {
            *dst = src.load(Ordering::Relaxed);
        }
    }

    #[inline]
    fn row_index(&self, p: Param) -> usize {
        ((p.side as usize) * self.num_views + p.view) * self.num_nodes + p.node
    }
}

pub(crate) struct SharedStore<'a, T: Real> {
    pub shared: &'a SharedParams<T>,
    pub coefs: AdamCoefs<T>,
}

impl<T: Real> ParamStore<T> for SharedStore<'_, T> {
    #[inline]
    fn read(&self, p: Param, out: &mut [T]) {
        let base = self.shared.row_index(p) * self.shared.dim;
        for (k, o) in out.iter_mut().enumerate() {
            *o = T::load(&self.shared.data[base + k]);
        }
    }

    fn step(&mut self, p: Param, grad: &[T]) -> bool {
        debug_assert_eq!(grad.len(), self.shared.dim);
        let row = self.shared.row_index(p);
        let t = self.shared.steps[row].fetch_add(1, Ordering::Relaxed) as i32 + 1;
        let base = row * self.shared.dim;
        let mut finite = true;
        for (k, &g) in grad.iter().enumerate() {
            let s = &self.shared;
            let (np, nm, nv) = self.coefs.update(
                t,
                T::load(&s.data[base + k]),
                T::load(&s.m[base + k]),
                T::load(&s.v[base + k]),
                g,
            );
            T::store(&s.data[base + k], np);
            T::store(&s.m[base + k], nm);
            T::store(&s.v[base + k], nv);
            finite &= np.is_finite();
        }
        finite
    }
}
