//! Power-series coefficients of the embedded voltages.
//!
//! With `V_i(α) = Σ v_i[n] αⁿ` and `W_i(α) = 1 / V_i(α) = Σ w_i[n] αⁿ`, the
//! embedded PQ equations
//!
//! ```text
//! Σ_k Yser_ik V_k(α) = α S_i* W_i*(α*) − α ysh_i V_i(α) + α I_i
//! ```
//!
//! have the germ `v_i[0] = V0` and, for every `n ≥ 1`, the recursion
//! `Ỹ v[n] = S* ∘ w*[n−1] − ysh ∘ v[n−1] + [n = 1] I`, where `Ỹ` is the PQ
//! block of the series admittance matrix. Only the right-hand side changes
//! from order to order.

use crate::error::{Error, Result};
use crate::netmodel::{LoadModel, ZipScale};
use crate::solvers::{Scratch, Step4Backend};
use crate::C64;

/// Load data as it enters the recursion, per PQ node, in injection sign
/// convention (a load draws power, so its injected power is negative).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingData {
    /// Injected constant power.
    pub s_power: Vec<C64>,
    /// Injected constant current phasor.
    pub i_const: Vec<C64>,
    /// Admittance to ground: fixed shunts, line charging, constant-impedance loads.
    pub y_shunt: Vec<C64>,
}

impl EmbeddingData {
    pub fn from_loads(loads: &LoadModel, scale: ZipScale) -> Self {
        EmbeddingData {
            s_power: loads.s_load.iter().map(|s| -s * scale.p).collect(),
            i_const: loads.i_load.iter().map(|i| -i * scale.i).collect(),
            y_shunt: loads
                .y_fixed
                .iter()
                .zip(&loads.y_load)
                .map(|(f, z)| f + z * scale.z)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.s_power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_power.is_empty()
    }
}

/// Coefficient tables of a single HELM solve.
#[derive(Debug, Clone)]
pub struct SeriesState {
    /// Highest voltage order computed so far.
    pub n: usize,
    /// `v[order][node]`
    pub v: Vec<Vec<C64>>,
    /// `w[order][node]`; may lag `v` by one order until [`reciprocal_step`](Self::reciprocal_step) runs.
    pub w: Vec<Vec<C64>>,
    /// Right-hand side assembled for the next order.
    pub rhs: Vec<C64>,
}

impl SeriesState {
    /// The no-load solution `v[0] = V0` at every PQ node.
    pub fn germ(n_pq: usize, v0: C64) -> Result<Self> {
        if v0.norm() == 0.0 || !v0.is_finite() {
            return Err(Error::Validation("slack voltage must be nonzero".into()));
        }
        Ok(SeriesState {
            n: 0,
            v: vec![vec![v0; n_pq]],
            w: vec![vec![v0.inv(); n_pq]],
            rhs: vec![C64::new(0.0, 0.0); n_pq],
        })
    }

    pub fn n_pq(&self) -> usize {
        self.v[0].len()
    }

    /// Extends `w` through order `n` by the convolution
    /// `w[n] = −(Σ_{k<n} w[k] v[n−k]) / v[0]`.
    pub fn reciprocal_step(&mut self) -> Result<()> {
        while self.w.len() <= self.n {
            let m = self.w.len();
            if let Some(i) = self.v[0].iter().position(|v| v.re == 0.0 && v.im == 0.0) {
                return Err(Error::NumericDomain(format!("v[0] is zero at PQ node {}", i + 1)));
            }
            let mut next = vec![C64::new(0.0, 0.0); self.n_pq()];
            for k in 0..m {
                for ((acc, w), v) in next.iter_mut().zip(&self.w[k]).zip(&self.v[m - k]) {
                    *acc += w * v;
                }
            }
            for (acc, w0) in next.iter_mut().zip(&self.w[0]) {
                *acc = -*acc * w0;
            }
            self.w.push(next);
        }
        Ok(())
    }

    /// Builds the right-hand side for order `n + 1` into `self.rhs`.
    pub fn assemble_rhs(&mut self, emb: &EmbeddingData) {
        let n = self.n;
        let (v, w) = (&self.v[n], &self.w[n]);
        for (i, r) in self.rhs.iter_mut().enumerate() {
            *r = emb.s_power[i].conj() * w[i].conj() - emb.y_shunt[i] * v[i];
        }
        if n == 0 {
            for (r, i) in self.rhs.iter_mut().zip(&emb.i_const) {
                *r += i;
            }
        }
    }

    /// Computes order `n + 1`: reciprocal step, right-hand side, linear solve.
    pub fn advance(
        &mut self,
        backend: &Step4Backend,
        emb: &EmbeddingData,
        scratch: &mut Scratch,
    ) -> Result<()> {
        self.reciprocal_step()?;
        self.assemble_rhs(emb);
        self.solve_step(backend, scratch);
        Ok(())
    }

    /// Step 4 alone, consuming the assembled right-hand side.
    pub fn solve_step(&mut self, backend: &Step4Backend, scratch: &mut Scratch) {
        let mut next = vec![C64::new(0.0, 0.0); self.n_pq()];
        backend.solve_order_into(&self.rhs, &mut next, scratch);
        self.v.push(next);
        self.n += 1;
    }
}
