//! Forward pass, cross-entropy loss, and hand-derived reverse-mode
//! gradients for the fixed architecture described in the module docs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{GcnError, GcnParams, ProbabilityVector, PROB_EPS};
use crate::bigraph::{build_bigraph, extract_features, BipartiteGraph, FeatureSet};
use crate::fx;
use crate::matrix::{affine, affine_backward, Matrix};
use crate::mip::MipInstance;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + fx::exp(-z))
}

fn check_shapes(params: &GcnParams, g: &BipartiteGraph, f: &FeatureSet) -> Result<(), GcnError> {
    let d = params.dims();
    let checks = [
        (f.var_features.cols(), d.var_dim, "variable feature width"),
        (f.cons_features.cols(), d.cons_dim, "constraint feature width"),
        (f.edge_features.cols(), d.edge_dim, "edge feature width"),
        (f.var_features.rows(), g.var_nodes(), "variable feature rows"),
        (f.cons_features.rows(), g.cons_nodes(), "constraint feature rows"),
        (f.edge_features.rows(), g.n_edges(), "edge feature rows"),
    ];
    for (got, want, what) in checks {
        if got != want {
            return Err(GcnError::DimensionMismatch(format!("{what}: {got} != {want}")));
        }
    }
    Ok(())
}

/// Everything the backward pass needs from a forward run.
pub(super) struct ForwardCache {
    /// Variable embeddings after the embed step and after each layer.
    v_stages: Vec<Matrix>,
    c_stages: Vec<Matrix>,
    /// Pre-activation values for the embed step and each layer update.
    v_pre: Vec<Matrix>,
    c_pre: Vec<Matrix>,
    /// Mean-aggregated messages per layer.
    agg_c: Vec<Matrix>,
    agg_v: Vec<Matrix>,
    p_raw: Vec<f64>,
    pub(super) p: Vec<f64>,
}

fn relu_rows(pre: &Matrix) -> Matrix {
    let mut post = pre.clone();
    for v in post.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    post
}

pub(super) fn forward_cached(
    params: &GcnParams,
    g: &BipartiteGraph,
    f: &FeatureSet,
) -> Result<ForwardCache, GcnError> {
    check_shapes(params, g, f)?;
    let d = params.dims();
    let h = d.hidden;
    let (n_v, n_c) = (g.var_nodes(), g.cons_nodes());

    let mut v_pre = Vec::with_capacity(d.layers + 1);
    let mut c_pre = Vec::with_capacity(d.layers + 1);
    let mut v_stages = Vec::with_capacity(d.layers + 1);
    let mut c_stages = Vec::with_capacity(d.layers + 1);
    let mut agg_c_all = Vec::with_capacity(d.layers);
    let mut agg_v_all = Vec::with_capacity(d.layers);

    // Embed.
    let mut vp = Matrix::zeros(n_v, h);
    for j in 0..n_v {
        affine(&params.w_var, f.var_features.row(j), &params.b_var, vp.row_mut(j));
    }
    let mut cp = Matrix::zeros(n_c, h);
    for i in 0..n_c {
        affine(&params.w_cons, f.cons_features.row(i), &params.b_cons, cp.row_mut(i));
    }
    v_stages.push(relu_rows(&vp));
    c_stages.push(relu_rows(&cp));
    v_pre.push(vp);
    c_pre.push(cp);

    let mut msg = vec![0.0; h];
    let mut msg_in = vec![0.0; h + d.edge_dim];
    let mut upd_in = vec![0.0; 2 * h];

    for layer in &params.layers {
        let v_cur = v_stages.last().unwrap().clone();
        let c_cur = c_stages.last().unwrap().clone();

        // var -> cons messages, aggregated by mean.
        let mut agg_c = Matrix::zeros(n_c, h);
        for (e, &(j, i, _)) in g.edges().iter().enumerate() {
            msg_in[..h].copy_from_slice(v_cur.row(j));
            msg_in[h..].copy_from_slice(f.edge_features.row(e));
            affine(&layer.m_vc, &msg_in, &layer.m_vc_bias, &mut msg);
            for (a, &m) in agg_c.row_mut(i).iter_mut().zip(msg.iter()) {
                *a += m;
            }
        }
        for i in 0..n_c {
            let deg = g.cons_degree(i);
            if deg > 0 {
                let inv = 1.0 / deg as f64;
                for a in agg_c.row_mut(i) {
                    *a *= inv;
                }
            }
        }

        // Constraint update.
        let mut cp = Matrix::zeros(n_c, h);
        for i in 0..n_c {
            upd_in[..h].copy_from_slice(c_cur.row(i));
            upd_in[h..].copy_from_slice(agg_c.row(i));
            affine(&layer.u_c, &upd_in, &layer.u_c_bias, cp.row_mut(i));
        }
        let c_new = relu_rows(&cp);

        // cons -> var messages, aggregated by mean.
        let mut agg_v = Matrix::zeros(n_v, h);
        for (e, &(j, i, _)) in g.edges().iter().enumerate() {
            msg_in[..h].copy_from_slice(c_new.row(i));
            msg_in[h..].copy_from_slice(f.edge_features.row(e));
            affine(&layer.m_cv, &msg_in, &layer.m_cv_bias, &mut msg);
            for (a, &m) in agg_v.row_mut(j).iter_mut().zip(msg.iter()) {
                *a += m;
            }
        }
        for j in 0..n_v {
            let deg = g.var_degree(j);
            if deg > 0 {
                let inv = 1.0 / deg as f64;
                for a in agg_v.row_mut(j) {
                    *a *= inv;
                }
            }
        }

        // Variable update.
        let mut vp = Matrix::zeros(n_v, h);
        for j in 0..n_v {
            upd_in[..h].copy_from_slice(v_cur.row(j));
            upd_in[h..].copy_from_slice(agg_v.row(j));
            affine(&layer.u_v, &upd_in, &layer.u_v_bias, vp.row_mut(j));
        }
        let v_new = relu_rows(&vp);

        v_stages.push(v_new);
        c_stages.push(c_new);
        v_pre.push(vp);
        c_pre.push(cp);
        agg_c_all.push(agg_c);
        agg_v_all.push(agg_v);
    }

    // Sigmoid head on the final variable embeddings.
    let v_fin = v_stages.last().unwrap();
    let mut p_raw = Vec::with_capacity(n_v);
    for j in 0..n_v {
        let mut z = params.b_out;
        for (&w, &v) in params.w_out.iter().zip(v_fin.row(j)) {
            z += w * v;
        }
        p_raw.push(sigmoid(z));
    }
    let p: Vec<f64> = p_raw.iter().map(|&v| v.clamp(PROB_EPS, 1.0 - PROB_EPS)).collect();

    Ok(ForwardCache {
        v_stages,
        c_stages,
        v_pre,
        c_pre,
        agg_c: agg_c_all,
        agg_v: agg_v_all,
        p_raw,
        p,
    })
}

/// Deterministic forward pass producing the clamped probability vector.
pub fn forward(
    params: &GcnParams,
    g: &BipartiteGraph,
    f: &FeatureSet,
) -> Result<ProbabilityVector, GcnError> {
    Ok(ProbabilityVector::new(forward_cached(params, g, f)?.p))
}

/// Convenience pipeline: bipartite graph, features, forward.
pub fn predict(params: &GcnParams, inst: &MipInstance) -> Result<ProbabilityVector, GcnError> {
    let g = build_bigraph(inst)?;
    let f = extract_features(inst, &g);
    forward(params, &g, &f)
}

/// Mean binary cross-entropy, natural log.
pub fn loss(p: &ProbabilityVector, labels: &[bool]) -> Result<f64, GcnError> {
    loss_weighted(p, labels, 1.0, 1.0)
}

/// Cross-entropy with per-class weights (`w0` scales the label-0 term,
/// `w1` the label-1 term); `(1, 1)` recovers the plain loss.
pub fn loss_weighted(
    p: &ProbabilityVector,
    labels: &[bool],
    w0: f64,
    w1: f64,
) -> Result<f64, GcnError> {
    if p.len() != labels.len() {
        return Err(GcnError::LengthMismatch { left: p.len(), right: labels.len() });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for (&pi, &yi) in p.as_slice().iter().zip(labels) {
        acc -= if yi { w1 * fx::ln(pi) } else { w0 * fx::ln(1.0 - pi) };
    }
    Ok(acc / labels.len() as f64)
}

/// Exact gradient of `loss ∘ forward` with respect to every parameter,
/// with optional class weights `(w0, w1)`. Returns the loss alongside a
/// gradient with the same shape as the parameters.
pub fn loss_grad(
    params: &GcnParams,
    g: &BipartiteGraph,
    f: &FeatureSet,
    labels: &[bool],
    class_weights: Option<(f64, f64)>,
) -> Result<(f64, GcnParams), GcnError> {
    if labels.len() != g.var_nodes() {
        return Err(GcnError::LengthMismatch { left: labels.len(), right: g.var_nodes() });
    }
    let cache = forward_cached(params, g, f)?;
    let (w0, w1) = class_weights.unwrap_or((1.0, 1.0));
    let p_vec = ProbabilityVector::new(cache.p.clone());
    let loss_value = loss_weighted(&p_vec, labels, w0, w1)?;

    let d = params.dims();
    let h = d.hidden;
    let (n_v, n_c) = (g.var_nodes(), g.cons_nodes());
    let mut grad = GcnParams::zeros(d);
    if labels.is_empty() {
        return Ok((loss_value, grad));
    }
    let n = labels.len() as f64;

    // Head. The clamp freezes the gradient when the raw sigmoid saturates
    // past the probability margin.
    let v_fin = &cache.v_stages[d.layers];
    let mut d_v = Matrix::zeros(n_v, h);
    for j in 0..n_v {
        let raw = cache.p_raw[j];
        if raw < PROB_EPS || raw > 1.0 - PROB_EPS {
            continue;
        }
        let p = cache.p[j];
        let y = if labels[j] { 1.0 } else { 0.0 };
        // d loss / d logit for the weighted cross-entropy.
        let d_logit = (-w1 * y * (1.0 - p) + w0 * (1.0 - y) * p) / n;
        if d_logit == 0.0 {
            continue;
        }
        grad.b_out += d_logit;
        for (k, (gw, &v)) in grad.w_out.iter_mut().zip(v_fin.row(j)).enumerate() {
            *gw += d_logit * v;
            d_v.set(j, k, d_logit * params.w_out[k]);
        }
    }

    let mut d_c = Matrix::zeros(n_c, h);
    let mut input = vec![0.0; 2 * h];
    let mut d_input = vec![0.0; 2 * h];
    let mut msg_in = vec![0.0; h + d.edge_dim];
    let mut d_msg_in = vec![0.0; h + d.edge_dim];
    let mut d_msg = vec![0.0; h];

    for l in (0..d.layers).rev() {
        let layer = &params.layers[l];
        let glayer = &mut grad.layers[l];
        let v_old = &cache.v_stages[l];
        let c_old = &cache.c_stages[l];
        let c_new = &cache.c_stages[l + 1];

        // Variable update backward.
        let mut d_v_prev = Matrix::zeros(n_v, h);
        let mut d_agg_v = Matrix::zeros(n_v, h);
        for j in 0..n_v {
            let pre = cache.v_pre[l + 1].row(j);
            let mut any = false;
            let mut d_pre = vec![0.0; h];
            for k in 0..h {
                if pre[k] > 0.0 && d_v.get(j, k) != 0.0 {
                    d_pre[k] = d_v.get(j, k);
                    any = true;
                }
            }
            if !any {
                continue;
            }
            input[..h].copy_from_slice(v_old.row(j));
            input[h..].copy_from_slice(cache.agg_v[l].row(j));
            d_input.iter_mut().for_each(|x| *x = 0.0);
            affine_backward(
                &layer.u_v,
                &input,
                &d_pre,
                &mut glayer.u_v,
                &mut glayer.u_v_bias,
                Some(&mut d_input),
            );
            for k in 0..h {
                d_v_prev.set(j, k, d_v_prev.get(j, k) + d_input[k]);
                d_agg_v.set(j, k, d_input[h + k]);
            }
        }

        // cons -> var message backward; contributes to d_c at stage l+1.
        for (e, &(j, i, _)) in g.edges().iter().enumerate() {
            let deg = g.var_degree(j) as f64;
            let mut any = false;
            for k in 0..h {
                let v = d_agg_v.get(j, k) / deg;
                d_msg[k] = v;
                any |= v != 0.0;
            }
            if !any {
                continue;
            }
            msg_in[..h].copy_from_slice(c_new.row(i));
            msg_in[h..].copy_from_slice(f.edge_features.row(e));
            d_msg_in.iter_mut().for_each(|x| *x = 0.0);
            affine_backward(
                &layer.m_cv,
                &msg_in,
                &d_msg,
                &mut glayer.m_cv,
                &mut glayer.m_cv_bias,
                Some(&mut d_msg_in),
            );
            for k in 0..h {
                d_c.set(i, k, d_c.get(i, k) + d_msg_in[k]);
            }
        }

        // Constraint update backward.
        let mut d_c_prev = Matrix::zeros(n_c, h);
        let mut d_agg_c = Matrix::zeros(n_c, h);
        for i in 0..n_c {
            let pre = cache.c_pre[l + 1].row(i);
            let mut any = false;
            let mut d_pre = vec![0.0; h];
            for k in 0..h {
                if pre[k] > 0.0 && d_c.get(i, k) != 0.0 {
                    d_pre[k] = d_c.get(i, k);
                    any = true;
                }
            }
            if !any {
                continue;
            }
            input[..h].copy_from_slice(c_old.row(i));
            input[h..].copy_from_slice(cache.agg_c[l].row(i));
            d_input.iter_mut().for_each(|x| *x = 0.0);
            affine_backward(
                &layer.u_c,
                &input,
                &d_pre,
                &mut glayer.u_c,
                &mut glayer.u_c_bias,
                Some(&mut d_input),
            );
            for k in 0..h {
                d_c_prev.set(i, k, d_c_prev.get(i, k) + d_input[k]);
                d_agg_c.set(i, k, d_input[h + k]);
            }
        }

        // var -> cons message backward; contributes to d_v at stage l.
        for (e, &(j, i, _)) in g.edges().iter().enumerate() {
            let deg = g.cons_degree(i) as f64;
            let mut any = false;
            for k in 0..h {
                let v = d_agg_c.get(i, k) / deg;
                d_msg[k] = v;
                any |= v != 0.0;
            }
            if !any {
                continue;
            }
            msg_in[..h].copy_from_slice(v_old.row(j));
            msg_in[h..].copy_from_slice(f.edge_features.row(e));
            d_msg_in.iter_mut().for_each(|x| *x = 0.0);
            affine_backward(
                &layer.m_vc,
                &msg_in,
                &d_msg,
                &mut glayer.m_vc,
                &mut glayer.m_vc_bias,
                Some(&mut d_msg_in),
            );
            for k in 0..h {
                d_v_prev.set(j, k, d_v_prev.get(j, k) + d_msg_in[k]);
            }
        }

        d_v = d_v_prev;
        d_c = d_c_prev;
    }

    // Embedding backward.
    for j in 0..n_v {
        let pre = cache.v_pre[0].row(j);
        let mut d_pre = vec![0.0; h];
        let mut any = false;
        for k in 0..h {
            if pre[k] > 0.0 && d_v.get(j, k) != 0.0 {
                d_pre[k] = d_v.get(j, k);
                any = true;
            }
        }
        if !any {
            continue;
        }
        affine_backward(
            &params.w_var,
            f.var_features.row(j),
            &d_pre,
            &mut grad.w_var,
            &mut grad.b_var,
            None,
        );
    }
    for i in 0..n_c {
        let pre = cache.c_pre[0].row(i);
        let mut d_pre = vec![0.0; h];
        let mut any = false;
        for k in 0..h {
            if pre[k] > 0.0 && d_c.get(i, k) != 0.0 {
                d_pre[k] = d_c.get(i, k);
                any = true;
            }
        }
        if !any {
            continue;
        }
        affine_backward(
            &params.w_cons,
            f.cons_features.row(i),
            &d_pre,
            &mut grad.w_cons,
            &mut grad.b_cons,
            None,
        );
    }

    Ok((loss_value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcn::GcnDims;
    use crate::mip::{MipInstance, Row};
    use crate::oracle;
    use crate::rng;

    fn prepared(inst: &MipInstance) -> (BipartiteGraph, FeatureSet) {
        let g = build_bigraph(inst).unwrap();
        let f = extract_features(inst, &g);
        (g, f)
    }

    #[test]
    fn zero_params_give_half_probabilities() {
        let mut r = rng::from_seed(3);
        let inst = oracle::random_binary_instance(&mut r, "z", 5, 4, 3);
        let (g, f) = prepared(&inst);
        let params = GcnParams::zeros(GcnDims::with_size(6, 2));
        let p = forward(&params, &g, &f).unwrap();
        assert!(p.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn isolated_variable_is_deterministic_and_open() {
        let inst = MipInstance::binary("iso", alloc::vec![1.0], alloc::vec![]).unwrap();
        let params = GcnParams::init(GcnDims::with_size(8, 3), 77);
        let a = predict(&params, &inst).unwrap();
        let b = predict(&params, &inst).unwrap();
        assert_eq!(a, b);
        assert!(a.get(0) > 0.0 && a.get(0) < 1.0);
    }

    #[test]
    fn same_params_accept_different_sizes() {
        let params = GcnParams::init(GcnDims::default(), 1);
        let small = crate::gen::gen_vc(&crate::gen::gen_graph(50, 4, 2).unwrap());
        let large = crate::gen::gen_vc(&crate::gen::gen_graph(300, 4, 2).unwrap());
        assert_eq!(predict(&params, &small).unwrap().len(), 50);
        assert_eq!(predict(&params, &large).unwrap().len(), 300);
    }

    #[test]
    fn permuted_instance_permutes_probabilities() {
        let mut r = rng::from_seed(11);
        let params = GcnParams::init(GcnDims::with_size(8, 3), 5);
        for trial in 0..5 {
            let inst = oracle::random_binary_instance(&mut r, "p", 8, 6, 3);
            let var_perm = oracle::random_permutation(&mut r, inst.n_vars());
            let row_perm = oracle::random_permutation(&mut r, inst.n_cons());
            let permuted = oracle::permute_instance(&inst, &var_perm, &row_perm);
            let p = predict(&params, &inst).unwrap();
            let pp = predict(&params, &permuted).unwrap();
            for (old, &new) in var_perm.iter().enumerate() {
                assert!(
                    (p.get(old) - pp.get(new)).abs() < 1e-9,
                    "trial {trial}: var {old}->{new}: {} vs {}",
                    p.get(old),
                    pp.get(new)
                );
            }
        }
    }

    #[test]
    fn loss_closed_forms() {
        let p = ProbabilityVector::new(alloc::vec![0.5, 0.5]);
        let l = loss(&p, &[false, true]).unwrap();
        assert!((l - core::f64::consts::LN_2).abs() < 1e-12);

        // Perfect prediction is bounded by the clamp margin.
        let p = ProbabilityVector::new(alloc::vec![0.0, 1.0]);
        let l = loss(&p, &[false, true]).unwrap();
        assert!(l <= 1.1e-7, "{l}");

        let p = ProbabilityVector::new(alloc::vec![0.9, 0.2]);
        let l = loss(&p, &[true, false]).unwrap();
        let want = -(crate::fx::ln(0.9) + crate::fx::ln(0.8)) / 2.0;
        assert!((l - want).abs() < 1e-12);
        assert!((l - 0.164252).abs() < 1e-4);
    }

    #[test]
    fn loss_rejects_length_mismatch() {
        let p = ProbabilityVector::new(alloc::vec![0.5]);
        assert!(matches!(
            loss(&p, &[true, false]),
            Err(GcnError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn zero_point_head_gradients() {
        // Zero params, zero labels: every p is 0.5, embeddings are zero, so
        // the head bias gradient is +0.5 and all other gradients vanish.
        let mut r = rng::from_seed(8);
        let inst = oracle::random_binary_instance(&mut r, "zp", 6, 4, 2);
        let (g, f) = prepared(&inst);
        let params = GcnParams::zeros(GcnDims::with_size(5, 2));
        let labels = alloc::vec![false; 6];
        let (l, grad) = loss_grad(&params, &g, &f, &labels, None).unwrap();
        assert!((l - core::f64::consts::LN_2).abs() < 1e-12);
        assert!((grad.b_out - 0.5).abs() < 1e-12);
        assert!(grad.w_out.iter().all(|&v| v == 0.0));
        assert!(grad.w_var.data().iter().all(|&v| v == 0.0));
        assert!(grad.w_cons.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = rng::from_seed(21);
        let inst = oracle::random_binary_instance(&mut r, "fd", 6, 5, 3);
        let (g, f) = prepared(&inst);
        let params = GcnParams::init(GcnDims::with_size(5, 2), 13);
        let labels: Vec<bool> = (0..6).map(|j| j % 2 == 0).collect();
        let (_, grad) = loss_grad(&params, &g, &f, &labels, None).unwrap();
        let h = 1e-5;
        for k in 0..params.n_scalars() {
            let plus = forward(&params.with_nudged_scalar(k, h), &g, &f).unwrap();
            let minus = forward(&params.with_nudged_scalar(k, -h), &g, &f).unwrap();
            let fd = (loss(&plus, &labels).unwrap() - loss(&minus, &labels).unwrap()) / (2.0 * h);
            let an = grad.scalar(k);
            let denom = fd.abs().max(1e-8);
            assert!(
                (an - fd).abs() / denom < 1e-4,
                "param {k}: analytic {an} vs fd {fd}"
            );
        }
    }

    #[test]
    fn weighted_gradient_matches_finite_differences() {
        let mut r = rng::from_seed(33);
        let inst = oracle::random_binary_instance(&mut r, "wfd", 5, 4, 3);
        let (g, f) = prepared(&inst);
        let params = GcnParams::init(GcnDims::with_size(4, 1), 2);
        let labels: Vec<bool> = (0..5).map(|j| j % 3 == 0).collect();
        let (w0, w1) = (0.7, 1.4);
        let (_, grad) = loss_grad(&params, &g, &f, &labels, Some((w0, w1))).unwrap();
        let h = 1e-5;
        for k in (0..params.n_scalars()).step_by(7) {
            let lp = loss_weighted(
                &forward(&params.with_nudged_scalar(k, h), &g, &f).unwrap(),
                &labels,
                w0,
                w1,
            )
            .unwrap();
            let lm = loss_weighted(
                &forward(&params.with_nudged_scalar(k, -h), &g, &f).unwrap(),
                &labels,
                w0,
                w1,
            )
            .unwrap();
            let fd = (lp - lm) / (2.0 * h);
            let an = grad.scalar(k);
            assert!((an - fd).abs() / fd.abs().max(1e-8) < 1e-4, "param {k}: {an} vs {fd}");
        }
    }

    #[test]
    fn dimension_mismatch_is_detected() {
        let inst = MipInstance::binary(
            "dm",
            alloc::vec![1.0, 1.0],
            alloc::vec![Row::new(alloc::vec![(0, 1.0), (1, 1.0)], 1.0)],
        )
        .unwrap();
        let (g, _) = prepared(&inst);
        let other = MipInstance::binary("dm2", alloc::vec![1.0], alloc::vec![]).unwrap();
        let (_, f_other) = prepared(&other);
        let params = GcnParams::init(GcnDims::with_size(4, 1), 0);
        assert!(matches!(
            forward(&params, &g, &f_other),
            Err(GcnError::DimensionMismatch(_))
        ));
    }
}
