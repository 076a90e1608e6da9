//! Trainable message-passing predictor over the variable–constraint
//! bipartite graph.
//!
//! The network embeds variable and constraint features into a hidden space,
//! then alternates half-layer message passing for `layers` rounds: each
//! constraint node aggregates the mean of a learned transform of
//! `[var embedding ‖ edge feature]` over its incident edges and updates
//! through a ReLU unit, then variables do the symmetric step. A sigmoid head
//! on the final variable embeddings yields the per-variable probability of
//! value 1, clamped to `[PROB_EPS, 1 - PROB_EPS]`.
//!
//! Forward, cross-entropy loss, and exact reverse-mode gradients are written
//! out by hand for this fixed architecture so they can be checked against
//! finite differences; training is plain full-batch gradient descent with
//! momentum.

mod net;
mod train;

pub use net::{forward, loss, loss_grad, loss_weighted, predict};
pub use train::{
    batch_gradient, prepare_examples, train, EpochStats, PreparedExample, TrainConfig,
    TrainOutcome,
};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bigraph::{BigraphError, CONS_FEATURES, EDGE_FEATURES, VAR_FEATURES};
use crate::matrix::Matrix;
use crate::mip::{Assignment, MipInstance};
use crate::rng::{self, Rng};

/// Probabilities are clamped to the open interval via this margin.
pub const PROB_EPS: f64 = 1e-7;

/// Desk-scale defaults; the sizes are configurable up to paper scale
/// (20 layers, 32 hidden units) and beyond.
pub const DEFAULT_HIDDEN: usize = 16;
pub const DEFAULT_LAYERS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum GcnError {
    DimensionMismatch(String),
    LengthMismatch { left: usize, right: usize },
    NonBinaryVariable(usize),
    EmptyDataset,
    /// Training produced a non-finite loss at this epoch.
    TrainingDiverged { epoch: usize },
    InvalidConfig(String),
    BadWeightBytes(String),
}

impl fmt::Display for GcnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GcnError::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            GcnError::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            GcnError::NonBinaryVariable(var) => {
                write!(f, "variable {var} is not binary")
            }
            GcnError::EmptyDataset => write!(f, "training dataset is empty"),
            GcnError::TrainingDiverged { epoch } => {
                write!(f, "training diverged (non-finite loss) at epoch {epoch}")
            }
            GcnError::InvalidConfig(msg) => write!(f, "invalid training config: {msg}"),
            GcnError::BadWeightBytes(msg) => write!(f, "malformed weight bytes: {msg}"),
        }
    }
}

impl core::error::Error for GcnError {}

impl From<BigraphError> for GcnError {
    fn from(e: BigraphError) -> Self {
        match e {
            BigraphError::NonBinaryVariable(var) => GcnError::NonBinaryVariable(var),
        }
    }
}

/// Architecture dimensions. `var_dim`, `cons_dim`, and `edge_dim` follow the
/// feature extractor; `hidden` and `layers` are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GcnDims {
    pub var_dim: usize,
    pub cons_dim: usize,
    pub edge_dim: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl GcnDims {
    pub fn with_size(hidden: usize, layers: usize) -> Self {
        Self {
            var_dim: VAR_FEATURES,
            cons_dim: CONS_FEATURES,
            edge_dim: EDGE_FEATURES,
            hidden,
            layers,
        }
    }
}

impl Default for GcnDims {
    fn default() -> Self {
        Self::with_size(DEFAULT_HIDDEN, DEFAULT_LAYERS)
    }
}

/// One message-passing layer pair: var→cons message and constraint update,
/// then cons→var message and variable update.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub m_vc: Matrix,
    pub m_vc_bias: Vec<f64>,
    pub u_c: Matrix,
    pub u_c_bias: Vec<f64>,
    pub m_cv: Matrix,
    pub m_cv_bias: Vec<f64>,
    pub u_v: Matrix,
    pub u_v_bias: Vec<f64>,
}

/// All weights of the predictor. Tensor declaration order here is the
/// serialization order of the weight format.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    dims: GcnDims,
    pub w_var: Matrix,
    pub b_var: Vec<f64>,
    pub w_cons: Matrix,
    pub b_cons: Vec<f64>,
    pub layers: Vec<LayerParams>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl GcnParams {
    pub fn dims(&self) -> GcnDims {
        self.dims
    }

    pub fn zeros(dims: GcnDims) -> Self {
        let h = dims.hidden;
        let layers = (0..dims.layers)
            .map(|_| LayerParams {
                m_vc: Matrix::zeros(h + dims.edge_dim, h),
                m_vc_bias: alloc::vec![0.0; h],
                u_c: Matrix::zeros(2 * h, h),
                u_c_bias: alloc::vec![0.0; h],
                m_cv: Matrix::zeros(h + dims.edge_dim, h),
                m_cv_bias: alloc::vec![0.0; h],
                u_v: Matrix::zeros(2 * h, h),
                u_v_bias: alloc::vec![0.0; h],
            })
            .collect();
        Self {
            dims,
            w_var: Matrix::zeros(dims.var_dim, h),
            b_var: alloc::vec![0.0; h],
            w_cons: Matrix::zeros(dims.cons_dim, h),
            b_cons: alloc::vec![0.0; h],
            layers,
            w_out: alloc::vec![0.0; h],
            b_out: 0.0,
        }
    }

    /// Seeded initialization: every weight uniform in `(-a, a)` with
    /// `a = sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init(dims: GcnDims, seed: u64) -> Self {
        let mut params = Self::zeros(dims);
        let mut r = rng::from_seed(seed);
        let mut fill = |m: &mut Matrix| {
            let a = crate::fx::sqrt(6.0 / (m.rows() + m.cols()) as f64);
            for v in m.data_mut() {
                *v = r.gen_range(-a..a);
            }
        };
        fill(&mut params.w_var);
        fill(&mut params.w_cons);
        for layer in &mut params.layers {
            fill(&mut layer.m_vc);
            fill(&mut layer.u_c);
            fill(&mut layer.m_cv);
            fill(&mut layer.u_v);
        }
        let a = crate::fx::sqrt(6.0 / (dims.hidden + 1) as f64);
        for v in &mut params.w_out {
            *v = r.gen_range(-a..a);
        }
        params
    }

    /// Tensor views in declaration order (weights interleaved with biases,
    /// head last).
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        out.push(self.w_var.data());
        out.push(&self.b_var);
        out.push(self.w_cons.data());
        out.push(&self.b_cons);
        for layer in &self.layers {
            out.push(layer.m_vc.data());
            out.push(&layer.m_vc_bias);
            out.push(layer.u_c.data());
            out.push(&layer.u_c_bias);
            out.push(layer.m_cv.data());
            out.push(&layer.m_cv_bias);
            out.push(layer.u_v.data());
            out.push(&layer.u_v_bias);
        }
        out.push(&self.w_out);
        out.push(core::slice::from_ref(&self.b_out));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.push(self.w_var.data_mut());
        out.push(&mut self.b_var);
        out.push(self.w_cons.data_mut());
        out.push(&mut self.b_cons);
        for layer in &mut self.layers {
            out.push(layer.m_vc.data_mut());
            out.push(&mut layer.m_vc_bias);
            out.push(layer.u_c.data_mut());
            out.push(&mut layer.u_c_bias);
            out.push(layer.m_cv.data_mut());
            out.push(&mut layer.m_cv_bias);
            out.push(layer.u_v.data_mut());
            out.push(&mut layer.u_v_bias);
        }
        out.push(&mut self.w_out);
        out.push(core::slice::from_mut(&mut self.b_out));
        out
    }

    /// Total scalar parameter count.
    pub fn n_scalars(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Read the k-th scalar in declaration order.
    pub fn scalar(&self, mut k: usize) -> f64 {
        for t in self.tensors() {
            if k < t.len() {
                return t[k];
            }
            k -= t.len();
        }
        panic!("scalar index out of range");
    }

    /// Copy with the k-th scalar nudged by `delta` (finite differences).
    pub fn with_nudged_scalar(&self, mut k: usize, delta: f64) -> Self {
        let mut copy = self.clone();
        for t in copy.tensors_mut() {
            if k < t.len() {
                t[k] += delta;
                return copy;
            }
            k -= t.len();
        }
        panic!("scalar index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Versioned binary layout: `BPGCN1` magic, five little-endian u32 dims
    /// `(var_dim, cons_dim, edge_dim, hidden, layers)`, then every tensor in
    /// declaration order as little-endian f64. Round-trips bit-exactly.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"BPGCN1");
        for d in [
            self.dims.var_dim,
            self.dims.cons_dim,
            self.dims.edge_dim,
            self.dims.hidden,
            self.dims.layers,
        ] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for t in self.tensors() {
            for &v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GcnError> {
        use alloc::string::ToString;
        if bytes.len() < 6 + 20 {
            return Err(GcnError::BadWeightBytes("truncated header".to_string()));
        }
        if &bytes[..6] != b"BPGCN1" {
            return Err(GcnError::BadWeightBytes("bad magic".to_string()));
        }
        let mut dims = [0usize; 5];
        for (t, d) in dims.iter_mut().enumerate() {
            let off = 6 + 4 * t;
            let raw: [u8; 4] = bytes[off..off + 4].try_into().unwrap();
            *d = u32::from_le_bytes(raw) as usize;
        }
        let dims = GcnDims {
            var_dim: dims[0],
            cons_dim: dims[1],
            edge_dim: dims[2],
            hidden: dims[3],
            layers: dims[4],
        };
        if dims.hidden == 0 {
            return Err(GcnError::BadWeightBytes("hidden size must be nonzero".to_string()));
        }
        let mut params = Self::zeros(dims);
        let expected = 6 + 20 + 8 * params.n_scalars();
        if bytes.len() != expected {
            return Err(GcnError::BadWeightBytes(alloc::format!(
                "expected {expected} bytes for these dims, got {}",
                bytes.len()
            )));
        }
        let mut off = 6 + 20;
        for t in params.tensors_mut() {
            for v in t.iter_mut() {
                let raw: [u8; 8] = bytes[off..off + 8].try_into().unwrap();
                *v = f64::from_le_bytes(raw);
                off += 8;
            }
        }
        if !params.is_finite() {
            return Err(GcnError::BadWeightBytes("non-finite parameter".to_string()));
        }
        Ok(params)
    }
}

/// Per-variable probability of taking value 1 in the optimum, clamped to
/// `[PROB_EPS, 1 - PROB_EPS]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(raw: Vec<f64>) -> Self {
        let p = raw
            .into_iter()
            .map(|v| v.clamp(PROB_EPS, 1.0 - PROB_EPS))
            .collect();
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Rounded prediction: value 1 iff `p_i >= 0.5`.
    pub fn round(&self) -> Assignment {
        let values: Vec<bool> = self.p.iter().map(|&p| p >= 0.5).collect();
        Assignment::total(&values)
    }
}

/// A solved instance paired with its optimal 0/1 labels.
#[derive(Debug, Clone)]
pub struct LabeledExample {
    pub instance: MipInstance,
    pub labels: Vec<bool>,
}

impl LabeledExample {
    pub fn new(instance: MipInstance, labels: Vec<bool>) -> Result<Self, GcnError> {
        if labels.len() != instance.n_vars() {
            return Err(GcnError::LengthMismatch {
                left: labels.len(),
                right: instance.n_vars(),
            });
        }
        Ok(Self { instance, labels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let params = GcnParams::init(GcnDims::with_size(8, 2), 31);
        let bytes = params.to_bytes();
        let back = GcnParams::from_bytes(&bytes).unwrap();
        assert_eq!(params, back);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn from_bytes_rejects_garbage() {
        assert!(GcnParams::from_bytes(b"nonsense").is_err());
        let params = GcnParams::init(GcnDims::with_size(4, 1), 0);
        let mut bytes = params.to_bytes();
        bytes.pop();
        assert!(GcnParams::from_bytes(&bytes).is_err());
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = GcnParams::init(GcnDims::default(), 5);
        let b = GcnParams::init(GcnDims::default(), 5);
        assert_eq!(a.to_bytes(), b.to_bytes());
        let c = GcnParams::init(GcnDims::default(), 6);
        assert_ne!(a.to_bytes(), c.to_bytes());
    }

    #[test]
    fn paper_scale_dims_accepted() {
        let params = GcnParams::zeros(GcnDims::with_size(32, 20));
        assert_eq!(params.dims().hidden, 32);
        assert_eq!(params.dims().layers, 20);
        assert_eq!(params.layers.len(), 20);
    }

    #[test]
    fn probability_vector_clamps_and_rounds() {
        let p = ProbabilityVector::new(alloc::vec![-1.0, 0.5, 2.0, 0.49]);
        assert_eq!(p.get(0), PROB_EPS);
        assert_eq!(p.get(2), 1.0 - PROB_EPS);
        let rounded = p.round();
        assert_eq!(rounded.get(0), Some(false));
        assert_eq!(rounded.get(1), Some(true)); // boundary rounds up
        assert_eq!(rounded.get(2), Some(true));
        assert_eq!(rounded.get(3), Some(false));
    }

    #[test]
    fn scalar_indexing_matches_tensors() {
        let params = GcnParams::init(GcnDims::with_size(4, 1), 9);
        let n = params.n_scalars();
        assert_eq!(params.scalar(n - 1), params.b_out);
        let nudged = params.with_nudged_scalar(0, 1.5);
        assert_eq!(nudged.scalar(0), params.scalar(0) + 1.5);
    }
}
