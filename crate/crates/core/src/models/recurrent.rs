use crate::error::Result;
use crate::nn::{LstmCache, LstmCell, NamedTensor, Parameterized};

use super::qlstm::{QLstmCache, QLstmCell};

/// A classical or quantum LSTM cell behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Recurrent {
    Classical(LstmCell),
    Quantum(QLstmCell),
}

#[derive(Debug, Clone)]
pub enum StepCache {
    Classical(LstmCache),
    Quantum(QLstmCache),
}

impl Recurrent {
    pub fn hidden(&self) -> usize {
        match self {
            Recurrent::Classical(c) => c.hidden(),
            Recurrent::Quantum(c) => c.hidden(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Recurrent::Classical(c) => c.input_dim(),
            Recurrent::Quantum(c) => c.input_dim(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        match self {
            Recurrent::Classical(_) => 0,
            Recurrent::Quantum(c) => c.qubit_count(),
        }
    }

    pub fn step(&self, x: &[f64], h: &[f64], c: &[f64]) -> Result<(Vec<f64>, Vec<f64>, StepCache)> {
        match self {
            Recurrent::Classical(cell) => {
                cell.check(x, h, c)?;
                let (h, c, cache) = cell.forward(x, h, c);
                Ok((h, c, StepCache::Classical(cache)))
            }
            Recurrent::Quantum(cell) => {
                let (h, c, cache) = cell.forward(x, h, c)?;
                Ok((h, c, StepCache::Quantum(cache)))
            }
        }
    }

    /// `grad` must be the same variant as `self` (e.g. from `zeros_like`).
    pub fn step_backward(
        &self,
        cache: &StepCache,
        dh: &[f64],
        dc: &[f64],
        grad: &mut Recurrent,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        match (self, cache, grad) {
            (Recurrent::Classical(cell), StepCache::Classical(cache), Recurrent::Classical(g)) => {
                Ok(cell.backward(cache, dh, dc, g))
            }
            (Recurrent::Quantum(cell), StepCache::Quantum(cache), Recurrent::Quantum(g)) => {
                cell.backward(cache, dh, dc, g)
            }
            _ => unreachable!("cell, cache and gradient variants always agree"),
        }
    }

    /// Unrolls over `xs` from zero state; returns every hidden state.
    pub fn run(&self, xs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<StepCache>)> {
        let n = self.hidden();
        let mut h = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut hs = Vec::with_capacity(xs.len());
        let mut caches = Vec::with_capacity(xs.len());
        for x in xs {
            let (h2, c2, cache) = self.step(x, &h, &c)?;
            hs.push(h2.clone());
            caches.push(cache);
            h = h2;
            c = c2;
        }
        Ok((hs, caches))
    }

    /// Backpropagates through time given `∂L/∂h_t` for every step (entries may
    /// be empty for steps with no direct loss). Returns `∂L/∂x_t`.
    pub fn run_backward(
        &self,
        caches: &[StepCache],
        dhs: &[Vec<f64>],
        grad: &mut Recurrent,
    ) -> Result<Vec<Vec<f64>>> {
        let n = self.hidden();
        let mut dh = vec![0.0; n];
        let mut dc = vec![0.0; n];
        let mut dxs = vec![Vec::new(); caches.len()];
        for t in (0..caches.len()).rev() {
            if let Some(d) = dhs.get(t) {
                for (a, b) in dh.iter_mut().zip(d) {
                    *a += b;
                }
            }
            let (dx, dh_prev, dc_prev) = self.step_backward(&caches[t], &dh, &dc, grad)?;
            dxs[t] = dx;
            dh = dh_prev;
            dc = dc_prev;
        }
        Ok(dxs)
    }
}

impl Parameterized for Recurrent {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<NamedTensor<'a>>) {
        match self {
            Recurrent::Classical(c) => c.collect(prefix, out),
            Recurrent::Quantum(c) => c.collect(prefix, out),
        }
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        match self {
            Recurrent::Classical(c) => c.collect_mut(out),
            Recurrent::Quantum(c) => c.collect_mut(out),
        }
    }
}
