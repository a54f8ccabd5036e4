//! Forward and backward kernels.
//!
//! Sequence tensors are channels-first, `[channels × length]`. Backward
//! kernels add parameter gradients into caller-owned buffers and return
//! the gradient with respect to the layer input.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{shape_err, NnError, Tensor};

fn dims2(t: &Tensor, op: &'static str) -> Result<(usize, usize), NnError> {
    match *t.shape() {
        [a, b] => Ok((a, b)),
        ref s => Err(shape_err(op, format!("expected a 2-D tensor, got {s:?}"))),
    }
}

/// Valid (unpadded) stride-1 convolution.
///
/// `out[f, t] = bias[f] + Σ_{c,k} input[c, t+k] · weights[f, c, k]`
pub fn conv1d(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor, NnError> {
    let (c_in, len) = dims2(input, "conv1d")?;
    let &[frames, wc, kernel] = weights.shape() else {
        return Err(shape_err("conv1d", format!("weights must be 3-D, got {:?}", weights.shape())));
    };
    if wc != c_in || bias.shape() != [frames] {
        return Err(shape_err(
            "conv1d",
            format!("input {:?}, weights {:?}, bias {:?}", input.shape(), weights.shape(), bias.shape()),
        ));
    }
    if len < kernel {
        return Err(shape_err("conv1d", format!("length {len} shorter than kernel {kernel}")));
    }
    let out_len = len - kernel + 1;
    let x = input.data();
    let w = weights.data();
    let mut out = vec![0.0; frames * out_len];
    for f in 0..frames {
        let row = &mut out[f * out_len..(f + 1) * out_len];
        row.fill(bias.data()[f]);
        for c in 0..c_in {
            let xc = &x[c * len..(c + 1) * len];
            for k in 0..kernel {
                let wv = w[(f * c_in + c) * kernel + k];
                for (o, xv) in row.iter_mut().zip(&xc[k..k + out_len]) {
                    *o += wv * xv;
                }
            }
        }
    }
    Tensor::new(vec![frames, out_len], out)?.checked("conv1d")
}

/// Backward of [`conv1d`]. Adds into `grad_w` and `grad_b`; returns the
/// input gradient.
pub fn conv1d_backward(
    input: &Tensor,
    weights: &Tensor,
    grad_out: &Tensor,
    grad_w: &mut Tensor,
    grad_b: &mut Tensor,
) -> Result<Tensor, NnError> {
    let (c_in, len) = dims2(input, "conv1d_backward")?;
    let &[frames, _, kernel] = weights.shape() else {
        return Err(shape_err("conv1d_backward", "weights must be 3-D"));
    };
    let out_len = len + 1 - kernel;
    if grad_out.shape() != [frames, out_len] || grad_w.shape() != weights.shape() || grad_b.shape() != [frames] {
        return Err(shape_err("conv1d_backward", format!("grad_out {:?}", grad_out.shape())));
    }
    let x = input.data();
    let w = weights.data();
    let g = grad_out.data();
    let mut gx = vec![0.0; c_in * len];
    let gw = grad_w.data_mut();
    for f in 0..frames {
        let gf = &g[f * out_len..(f + 1) * out_len];
        grad_b.data_mut()[f] += gf.iter().sum::<f64>();
        for c in 0..c_in {
            let xc = &x[c * len..(c + 1) * len];
            let gxc = &mut gx[c * len..(c + 1) * len];
            for k in 0..kernel {
                let idx = (f * c_in + c) * kernel + k;
                let mut acc = 0.0;
                for (gv, xv) in gf.iter().zip(&xc[k..k + out_len]) {
                    acc += gv * xv;
                }
                gw[idx] += acc;
                let wv = w[idx];
                for (d, gv) in gxc[k..k + out_len].iter_mut().zip(gf) {
                    *d += wv * gv;
                }
            }
        }
    }
    Tensor::new(vec![c_in, len], gx)?.checked("conv1d_backward")
}

/// Non-overlapping max pooling along the time axis with stride `width`;
/// the trailing `len % width` steps are dropped. Returns the pooled tensor
/// and, per output cell, the flat input index of its first maximum.
pub fn maxpool1d(input: &Tensor, width: usize) -> Result<(Tensor, Vec<usize>), NnError> {
    let (chans, len) = dims2(input, "maxpool1d")?;
    if width == 0 || len < width {
        return Err(shape_err("maxpool1d", format!("width {width} for length {len}")));
    }
    let out_len = len / width;
    let x = input.data();
    let mut out = Vec::with_capacity(chans * out_len);
    let mut arg = Vec::with_capacity(chans * out_len);
    for c in 0..chans {
        for t in 0..out_len {
            let start = c * len + t * width;
            let mut best = start;
            for i in start + 1..start + width {
                if x[i] > x[best] {
                    best = i;
                }
            }
            out.push(x[best]);
            arg.push(best);
        }
    }
    Ok((Tensor::new(vec![chans, out_len], out)?, arg))
}

pub fn maxpool1d_backward(grad_out: &Tensor, argmax: &[usize], input_shape: &[usize]) -> Result<Tensor, NnError> {
    if grad_out.len() != argmax.len() {
        return Err(shape_err("maxpool1d_backward", "argmax length differs from grad_out"));
    }
    let mut gx = Tensor::zeros(input_shape);
    let d = gx.data_mut();
    for (&i, &g) in argmax.iter().zip(grad_out.data()) {
        d[i] += g;
    }
    Ok(gx)
}

/// Affine map `W·x + b` with `W` of shape `[m × n]`.
pub fn dense(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor, NnError> {
    let (m, n) = dims2(weights, "dense")?;
    if input.len() != n || bias.shape() != [m] {
        return Err(shape_err(
            "dense",
            format!("input {:?}, weights {:?}, bias {:?}", input.shape(), weights.shape(), bias.shape()),
        ));
    }
    let x = input.data();
    let out: Vec<f64> = weights
        .data()
        .chunks_exact(n)
        .zip(bias.data())
        .map(|(row, b)| b + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>())
        .collect();
    Tensor::new(vec![m], out)?.checked("dense")
}

pub fn dense_backward(
    input: &Tensor,
    weights: &Tensor,
    grad_out: &Tensor,
    grad_w: &mut Tensor,
    grad_b: &mut Tensor,
) -> Result<Tensor, NnError> {
    let (m, n) = dims2(weights, "dense_backward")?;
    if grad_out.len() != m || input.len() != n || grad_w.shape() != weights.shape() {
        return Err(shape_err("dense_backward", format!("grad_out {:?}", grad_out.shape())));
    }
    let x = input.data();
    let mut gx = vec![0.0; n];
    for (i, &g) in grad_out.data().iter().enumerate() {
        grad_b.data_mut()[i] += g;
        if g == 0.0 {
            continue;
        }
        let gw = &mut grad_w.data_mut()[i * n..(i + 1) * n];
        for (d, xv) in gw.iter_mut().zip(x) {
            *d += g * xv;
        }
        let row = &weights.data()[i * n..(i + 1) * n];
        for (d, wv) in gx.iter_mut().zip(row) {
            *d += g * wv;
        }
    }
    Tensor::new(input.shape().to_vec(), gx)?.checked("dense_backward")
}

pub fn relu(t: &Tensor) -> Tensor {
    let mut out = t.clone();
    out.data_mut().iter_mut().for_each(|x| *x = x.max(0.0));
    out
}

/// Gradient of [`relu`] given its output: passes where the output is
/// positive.
pub fn relu_backward(output: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut g = grad_out.clone();
    for (d, &y) in g.data_mut().iter_mut().zip(output.data()) {
        if y <= 0.0 {
            *d = 0.0;
        }
    }
    g
}

/// Inverted dropout. In training mode each element is kept with
/// probability `1 − rate` and scaled by `1/(1 − rate)`; the returned mask
/// holds the per-element multiplier. Evaluation mode (or rate 0) is the
/// identity and returns no mask.
pub fn dropout(
    t: &Tensor,
    rate: f64,
    rng: Option<&mut impl Rng>,
) -> Result<(Tensor, Option<Vec<f64>>), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::InvalidAttribute(format!("dropout rate {rate} outside [0, 1)")));
    }
    let Some(rng) = rng.filter(|_| rate > 0.0) else {
        return Ok((t.clone(), None));
    };
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let mask: Vec<f64> = (0..t.len())
        .map(|_| if rng.gen::<f64>() < keep { scale } else { 0.0 })
        .collect();
    let mut out = t.clone();
    for (x, m) in out.data_mut().iter_mut().zip(&mask) {
        *x *= m;
    }
    Ok((out, Some(mask)))
}

pub fn dropout_backward(grad_out: &Tensor, mask: Option<&[f64]>) -> Tensor {
    let mut g = grad_out.clone();
    if let Some(mask) = mask {
        for (d, m) in g.data_mut().iter_mut().zip(mask) {
            *d *= m;
        }
    }
    g
}

/// Joins tensors along the leading (feature) axis. All inputs must share
/// their trailing dimensions.
pub fn concat(parts: &[&Tensor]) -> Result<Tensor, NnError> {
    let first = parts.first().ok_or_else(|| shape_err("concat", "no inputs"))?;
    let tail = &first.shape()[1..];
    let mut lead = 0;
    let mut data = Vec::new();
    for p in parts {
        if &p.shape()[1..] != tail {
            return Err(shape_err("concat", format!("{:?} vs {:?}", first.shape(), p.shape())));
        }
        lead += p.shape()[0];
        data.extend_from_slice(p.data());
    }
    let mut shape = vec![lead];
    shape.extend_from_slice(tail);
    Tensor::new(shape, data)
}

/// Splits a concatenated gradient back into pieces of the given shapes.
pub fn concat_backward(grad_out: &Tensor, shapes: &[&[usize]]) -> Result<Vec<Tensor>, NnError> {
    let mut offset = 0;
    let mut out = Vec::with_capacity(shapes.len());
    for s in shapes {
        let n: usize = s.iter().product();
        let slice = grad_out
            .data()
            .get(offset..offset + n)
            .ok_or_else(|| shape_err("concat_backward", "pieces exceed gradient"))?;
        out.push(Tensor::new(s.to_vec(), slice.to_vec())?);
        offset += n;
    }
    if offset != grad_out.len() {
        return Err(shape_err("concat_backward", "pieces do not cover gradient"));
    }
    Ok(out)
}

pub fn flatten(t: &Tensor) -> Tensor {
    Tensor::vector(t.data().to_vec())
}

/// Gathers rows of `table` (`[rows × dim]`) and lays them out channels-first
/// as `[dim × len]`.
pub fn embedding(table: &Tensor, indices: &[usize]) -> Result<Tensor, NnError> {
    let (rows, dim) = dims2(table, "embedding")?;
    if indices.is_empty() {
        return Err(shape_err("embedding", "empty index sequence"));
    }
    let len = indices.len();
    let mut out = vec![0.0; dim * len];
    for (t, &idx) in indices.iter().enumerate() {
        if idx >= rows {
            return Err(shape_err("embedding", format!("index {idx} >= table rows {rows}")));
        }
        let row = &table.data()[idx * dim..(idx + 1) * dim];
        for (d, &v) in row.iter().enumerate() {
            out[d * len + t] = v;
        }
    }
    Tensor::new(vec![dim, len], out)
}

/// Scatters `grad_out` (`[dim × len]`) into rows of `grad_table`. Row
/// `skip_row` (the PAD row) never receives gradient.
pub fn embedding_backward(indices: &[usize], grad_out: &Tensor, grad_table: &mut Tensor, skip_row: usize) -> Result<(), NnError> {
    let (_, dim) = dims2(grad_table, "embedding_backward")?;
    let len = indices.len();
    if grad_out.shape() != [dim, len] {
        return Err(shape_err("embedding_backward", format!("grad_out {:?}", grad_out.shape())));
    }
    let g = grad_out.data();
    let gt = grad_table.data_mut();
    for (t, &idx) in indices.iter().enumerate() {
        if idx == skip_row {
            continue;
        }
        for d in 0..dim {
            gt[idx * dim + d] += g[d * len + t];
        }
    }
    Ok(())
}

pub fn softmax(logits: &Tensor) -> Tensor {
    let max = logits.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.data().iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Tensor::vector(exps.into_iter().map(|e| e / sum).collect())
}

/// Returns `(−log p[class], p)` with `p = softmax(logits)`. The gradient
/// with respect to the logits is `p − onehot(class)`, see
/// [`softmax_cross_entropy_grad`].
pub fn softmax_cross_entropy(logits: &Tensor, class: usize) -> Result<(f64, Tensor), NnError> {
    if class >= logits.len() {
        return Err(shape_err("softmax_cross_entropy", format!("class {class} of {}", logits.len())));
    }
    if !logits.is_finite() {
        return Err(NnError::NonFinite { op: "softmax_cross_entropy" });
    }
    let max = logits.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.data().iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let loss = -(logits.data()[class] - max - log_sum);
    Ok((loss, softmax(logits)))
}

pub fn softmax_cross_entropy_grad(probs: &Tensor, class: usize) -> Tensor {
    let mut g = probs.clone();
    g.data_mut()[class] -= 1.0;
    g
}

/// Declarative description of one layer, used for shape traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Embedding { dim: usize },
    Conv1d { frames: usize, kernel: usize },
    MaxPool1d { width: usize },
    /// Max over all remaining time steps.
    GlobalMaxPool,
    Relu,
    Dense { units: usize },
    Dropout { rate: f64 },
    Flatten,
    Concat,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<(), NnError> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(NnError::InvalidAttribute(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match *self {
            LayerSpec::Embedding { dim } => positive("embedding dim", dim),
            LayerSpec::Conv1d { frames, kernel } => {
                positive("frames", frames)?;
                positive("kernel", kernel)
            }
            LayerSpec::MaxPool1d { width } => positive("pool width", width),
            LayerSpec::Dense { units } => positive("units", units),
            LayerSpec::Dropout { rate } if !(0.0..1.0).contains(&rate) => {
                Err(NnError::InvalidAttribute(format!("dropout rate {rate} outside [0, 1)")))
            }
            _ => Ok(()),
        }
    }

    /// Output shape for a single-input layer under the length laws
    /// (conv: `L − K + 1`, pool: `⌊L / p⌋`). `None` when the input is too
    /// short or the layer does not apply to the shape.
    pub fn output_shape(&self, input: &[usize]) -> Option<Vec<usize>> {
        match (*self, input) {
            (LayerSpec::Embedding { dim }, &[len]) => Some(vec![dim, len]),
            (LayerSpec::Conv1d { frames, kernel }, &[_, len]) if len >= kernel => Some(vec![frames, len - kernel + 1]),
            (LayerSpec::MaxPool1d { width }, &[c, len]) if width > 0 && len >= width => Some(vec![c, len / width]),
            (LayerSpec::GlobalMaxPool, &[c, len]) if len >= 1 => Some(vec![c]),
            (LayerSpec::Relu | LayerSpec::Dropout { .. }, s) => Some(s.to_vec()),
            (LayerSpec::Dense { units }, _) => Some(vec![units]),
            (LayerSpec::Flatten, s) => Some(vec![s.iter().product()]),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Domain};

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn conv_examples() {
        let out = conv1d(&t(&[1, 3], &[1., 2., 3.]), &t(&[1, 1, 2], &[1., 1.]), &t(&[1], &[0.])).unwrap();
        assert_eq!(out.data(), &[3., 5.]);
        let x = t(&[2, 3], &[1., 2., 3., 4., 5., 6.]);
        let id = t(&[2, 2, 1], &[1., 0., 0., 1.]);
        assert_eq!(conv1d(&x, &id, &t(&[2], &[0., 0.])).unwrap(), x);
        assert!(conv1d(&t(&[1, 1], &[1.]), &t(&[1, 1, 2], &[1., 1.]), &t(&[1], &[0.])).is_err());
        assert!(conv1d(&x, &t(&[1, 1, 1], &[1.]), &t(&[1], &[0.])).is_err());
    }

    #[test]
    fn pool_examples() {
        let (p, arg) = maxpool1d(&t(&[1, 4], &[1., 5., 2., 4.]), 2).unwrap();
        assert_eq!(p.data(), &[5., 4.]);
        assert_eq!(arg, vec![1, 3]);
        let x = t(&[1, 3], &[3., 1., 2.]);
        assert_eq!(maxpool1d(&x, 1).unwrap().0, x);
        let (p, _) = maxpool1d(&t(&[1, 5], &[1., 2., 3., 4., 9.]), 2).unwrap();
        assert_eq!(p.data(), &[2., 4.]);
        let (_, arg) = maxpool1d(&t(&[1, 2], &[7., 7.]), 2).unwrap();
        assert_eq!(arg, vec![0]);
        assert!(maxpool1d(&x, 0).is_err());
        let g = maxpool1d_backward(&t(&[1, 1], &[2.]), &[0], &[1, 2]).unwrap();
        assert_eq!(g.data(), &[2., 0.]);
    }

    #[test]
    fn dense_examples() {
        let x = Tensor::vector(vec![3., 4.]);
        let eye = t(&[2, 2], &[1., 0., 0., 1.]);
        assert_eq!(dense(&x, &eye, &Tensor::zeros(&[2])).unwrap().data(), &[3., 4.]);
        let b = Tensor::vector(vec![1., 2.]);
        assert_eq!(dense(&x, &Tensor::zeros(&[2, 2]), &b).unwrap().data(), &[1., 2.]);
        assert!(dense(&Tensor::vector(vec![1.]), &eye, &b).is_err());
    }

    #[test]
    fn elementwise_examples() {
        assert_eq!(relu(&Tensor::vector(vec![-1., 2.])).data(), &[0., 2.]);
        let x = Tensor::vector(vec![1., -2., 3.]);
        let mut r = rng::stream(0, Domain::Dropout, 0, 0);
        assert_eq!(dropout(&x, 0.0, Some(&mut r)).unwrap(), (x.clone(), None));
        assert_eq!(dropout(&x, 0.5, None::<&mut rand_chacha::ChaCha8Rng>).unwrap().0, x);
        assert!(dropout(&x, 1.0, Some(&mut r)).is_err());
        let a = t(&[2, 1], &[1., 2.]);
        let b = t(&[1, 1], &[3.]);
        let c = concat(&[&a, &b]).unwrap();
        assert_eq!(c.shape(), &[3, 1]);
        assert_eq!(c.data(), &[1., 2., 3.]);
        assert!(concat(&[&a, &t(&[1, 2], &[1., 2.])]).is_err());
        let parts = concat_backward(&c, &[&[2, 1], &[1, 1]]).unwrap();
        assert_eq!(parts[0], a);
        assert_eq!(parts[1], b);
        assert_eq!(flatten(&t(&[2, 2], &[1., 2., 3., 4.])).shape(), &[4]);
    }

    #[test]
    fn dropout_statistics() {
        let n = 100_000;
        let x = Tensor::vector(vec![1.0; n]);
        let mut r = rng::stream(42, Domain::Dropout, 0, 0);
        let (out, mask) = dropout(&x, 0.5, Some(&mut r)).unwrap();
        let kept = mask.unwrap().iter().filter(|&&m| m > 0.0).count() as f64 / n as f64;
        assert!((kept - 0.5).abs() < 0.01, "kept {kept}");
        let mean = out.data().iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn softmax_examples() {
        let (loss, p) = softmax_cross_entropy(&Tensor::vector(vec![0.; 4]), 2).unwrap();
        assert!(p.data().iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert!((loss - 4f64.ln()).abs() < 1e-12);
        let z = Tensor::vector(vec![0.3, -1.2, 2.0, 0.7]);
        let shifted = Tensor::vector(z.data().iter().map(|v| v + 1234.5).collect());
        let (l1, p1) = softmax_cross_entropy(&z, 1).unwrap();
        let (l2, p2) = softmax_cross_entropy(&shifted, 1).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in p1.data().iter().zip(p2.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((p1.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let g = softmax_cross_entropy_grad(&p1, 1);
        assert!(g.data().iter().sum::<f64>().abs() < 1e-12);
        let (huge, _) = softmax_cross_entropy(&Tensor::vector(vec![1000., -1000., 0., 0.]), 1).unwrap();
        assert!((huge - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn embedding_layout_and_pad() {
        let table = t(&[3, 2], &[0., 0., 1., 2., 3., 4.]);
        let e = embedding(&table, &[2, 0, 1]).unwrap();
        assert_eq!(e.shape(), &[2, 3]);
        assert_eq!(e.data(), &[3., 0., 1., 4., 0., 2.]);
        let mut g = Tensor::zeros(&[3, 2]);
        embedding_backward(&[2, 0, 1], &Tensor::new(vec![2, 3], vec![1.0; 6]).unwrap(), &mut g, 0).unwrap();
        assert_eq!(g.data(), &[0., 0., 1., 1., 1., 1.]);
        assert!(embedding(&table, &[3]).is_err());
    }

    #[test]
    fn length_laws() {
        let conv = LayerSpec::Conv1d { frames: 8, kernel: 7 };
        assert_eq!(conv.output_shape(&[4, 512]), Some(vec![8, 506]));
        assert_eq!(conv.output_shape(&[4, 6]), None);
        let pool = LayerSpec::MaxPool1d { width: 3 };
        assert_eq!(pool.output_shape(&[8, 506]), Some(vec![8, 168]));
        assert_eq!(pool.output_shape(&[8, 2]), None);
        assert!(LayerSpec::Dropout { rate: 1.0 }.validate().is_err());
        assert!(LayerSpec::Conv1d { frames: 0, kernel: 3 }.validate().is_err());
    }

    /// Central-difference check of each kernel against a scalar loss
    /// `Σ out ⊙ r` for a fixed random `r`.
    mod finite_differences {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        const EPS: f64 = 1e-6;

        fn rel(a: f64, n: f64) -> f64 {
            // The floor keeps rounding noise on near-zero gradients from dominating.
            (a - n).abs() / (a.abs() + n.abs() + 1e-3)
        }

        fn random(shape: &[usize], seed: u64) -> Tensor {
            let mut r = rng::stream(seed, Domain::GradCheck, shape.iter().product::<usize>() as u64, shape.len() as u64);
            let n = shape.iter().product();
            Tensor::new(shape.to_vec(), (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
        }

        fn dot(a: &Tensor, b: &Tensor) -> f64 {
            a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
        }

        fn numeric(t: &Tensor, i: usize, f: &dyn Fn(&Tensor) -> f64) -> f64 {
            let mut p = t.clone();
            p.data_mut()[i] += EPS;
            let mut m = t.clone();
            m.data_mut()[i] -= EPS;
            (f(&p) - f(&m)) / (2.0 * EPS)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn conv1d_gradients(c in 1usize..=4, f in 1usize..=4, k in 1usize..=5, extra in 0usize..12, seed in any::<u64>()) {
                let l = k + extra;
                let x = random(&[c, l], seed);
                let w = random(&[f, c, k], seed ^ 1);
                let b = random(&[f], seed ^ 2);
                let r = random(&[f, l - k + 1], seed ^ 3);
                let mut gw = Tensor::zeros(w.shape());
                let mut gb = Tensor::zeros(b.shape());
                let gx = conv1d_backward(&x, &w, &r, &mut gw, &mut gb).unwrap();
                for i in 0..x.len() {
                    let n = numeric(&x, i, &|x| dot(&conv1d(x, &w, &b).unwrap(), &r));
                    prop_assert!(rel(gx.data()[i], n) < 1e-6);
                }
                for i in 0..w.len() {
                    let n = numeric(&w, i, &|w| dot(&conv1d(&x, w, &b).unwrap(), &r));
                    prop_assert!(rel(gw.data()[i], n) < 1e-6);
                }
                for i in 0..b.len() {
                    let n = numeric(&b, i, &|b| dot(&conv1d(&x, &w, b).unwrap(), &r));
                    prop_assert!(rel(gb.data()[i], n) < 1e-6);
                }
            }

            #[test]
            fn maxpool_gradients(c in 1usize..=3, l in 1usize..=16, p in 1usize..=4, seed in any::<u64>()) {
                prop_assume!(l >= p);
                let x = random(&[c, l], seed);
                // Inputs are distinct with probability one, so argmax is stable under EPS.
                let (out, arg) = maxpool1d(&x, p).unwrap();
                let r = random(out.shape(), seed ^ 9);
                let gx = maxpool1d_backward(&r, &arg, x.shape()).unwrap();
                for i in 0..x.len() {
                    let n = numeric(&x, i, &|x| dot(&maxpool1d(x, p).unwrap().0, &r));
                    prop_assert!(rel(gx.data()[i], n) < 1e-6);
                }
            }

            #[test]
            fn dense_gradients(m in 1usize..=6, n in 1usize..=6, seed in any::<u64>()) {
                let x = random(&[n], seed);
                let w = random(&[m, n], seed ^ 1);
                let b = random(&[m], seed ^ 2);
                let r = random(&[m], seed ^ 3);
                let mut gw = Tensor::zeros(w.shape());
                let mut gb = Tensor::zeros(b.shape());
                let gx = dense_backward(&x, &w, &r, &mut gw, &mut gb).unwrap();
                for i in 0..n {
                    let num = numeric(&x, i, &|x| dot(&dense(x, &w, &b).unwrap(), &r));
                    prop_assert!(rel(gx.data()[i], num) < 1e-6);
                }
                for i in 0..w.len() {
                    let num = numeric(&w, i, &|w| dot(&dense(&x, w, &b).unwrap(), &r));
                    prop_assert!(rel(gw.data()[i], num) < 1e-6);
                }
                for i in 0..m {
                    let num = numeric(&b, i, &|b| dot(&dense(&x, &w, b).unwrap(), &r));
                    prop_assert!(rel(gb.data()[i], num) < 1e-6);
                }
            }

            #[test]
            fn softmax_cross_entropy_gradient(seed in any::<u64>(), class in 0usize..4) {
                let z = random(&[4], seed);
                let (_, p) = softmax_cross_entropy(&z, class).unwrap();
                let g = softmax_cross_entropy_grad(&p, class);
                for i in 0..4 {
                    let n = numeric(&z, i, &|z| softmax_cross_entropy(z, class).unwrap().0);
                    prop_assert!(rel(g.data()[i], n) < 1e-6);
                }
            }
        }
    }
}
