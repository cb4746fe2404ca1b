//! Convolutional network over amb images.
//!
//! Layer stack, for an `S×S` single-channel input:
//!
//! ```text
//! conv k×k (c1) → ReLU → max-pool 2×2 → conv k×k (c2) → ReLU → max-pool 2×2
//!   → flatten → dense (hidden) → ReLU → dense (classes) → softmax
//! ```
//!
//! Convolutions are valid (no padding), stride 1; pooling drops a trailing
//! odd row/column. The first convolution reads the image as a list of white
//! pixels since amb images are mostly black. Backpropagation only visits
//! positions selected by the pooling layers, which keeps the dense second
//! convolution's backward pass proportional to the pooled output size.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::amb::AmbImage;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_side: usize,
    pub kernel: usize,
    pub conv1_filters: usize,
    pub conv2_filters: usize,
    pub hidden: usize,
    pub classes: usize,
}

/// One row of the layer table printed by [`Architecture::layers`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerDesc {
    pub name: &'static str,
    /// Output shape as `[channels, height, width]` or `[units]`.
    pub output: Vec<usize>,
    pub params: usize,
}

pub(crate) const CONV1_W: usize = 0;
pub(crate) const CONV1_B: usize = 1;
pub(crate) const CONV2_W: usize = 2;
pub(crate) const CONV2_B: usize = 3;
pub(crate) const FC1_W: usize = 4;
pub(crate) const FC1_B: usize = 5;
pub(crate) const FC2_W: usize = 6;
pub(crate) const FC2_B: usize = 7;
pub const BLOCK_NAMES: [&str; 8] = [
    "conv1.weight",
    "conv1.bias",
    "conv2.weight",
    "conv2.bias",
    "dense1.weight",
    "dense1.bias",
    "dense2.weight",
    "dense2.bias",
];

impl Architecture {
    /// 8 and 16 filters of 5×5, a 64-unit hidden layer, four classes.
    pub fn standard(input_side: usize) -> Self {
        Self {
            input_side,
            kernel: 5,
            conv1_filters: 8,
            conv2_filters: 16,
            hidden: 64,
            classes: 4,
        }
    }

    fn conv1_side(&self) -> usize {
        self.input_side + 1 - self.kernel
    }

    fn pool1_side(&self) -> usize {
        self.conv1_side() / 2
    }

    fn conv2_side(&self) -> usize {
        self.pool1_side() + 1 - self.kernel
    }

    fn pool2_side(&self) -> usize {
        self.conv2_side() / 2
    }

    pub fn flat_len(&self) -> usize {
        self.conv2_filters * self.pool2_side().pow(2)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |why: String| Err(ClassifierError::Architecture(why));
        if self.kernel == 0
            || self.conv1_filters == 0
            || self.conv2_filters == 0
            || self.hidden == 0
            || self.classes < 2
        {
            return bad(format!("all layer sizes must be positive: {self:?}"));
        }
        if self.input_side < self.kernel
            || self.pool1_side() < self.kernel
            || self.conv2_side() < 2
        {
            return bad(format!(
                "input side {} too small for two {k}x{k} conv + pool stages",
                self.input_side,
                k = self.kernel
            ));
        }
        Ok(())
    }

    pub fn block_lens(&self) -> [usize; 8] {
        let k2 = self.kernel * self.kernel;
        [
            self.conv1_filters * k2,
            self.conv1_filters,
            self.conv2_filters * self.conv1_filters * k2,
            self.conv2_filters,
            self.flat_len() * self.hidden,
            self.hidden,
            self.hidden * self.classes,
            self.classes,
        ]
    }

    pub fn layers(&self) -> Vec<LayerDesc> {
        let lens = self.block_lens();
        let (c1, c2) = (self.conv1_filters, self.conv2_filters);
        let d = |name, output: Vec<usize>, params| LayerDesc { name, output, params };
        vec![
            d("input", vec![1, self.input_side, self.input_side], 0),
            d("conv1", vec![c1, self.conv1_side(), self.conv1_side()], lens[0] + lens[1]),
            d("relu", vec![c1, self.conv1_side(), self.conv1_side()], 0),
            d("maxpool", vec![c1, self.pool1_side(), self.pool1_side()], 0),
            d("conv2", vec![c2, self.conv2_side(), self.conv2_side()], lens[2] + lens[3]),
            d("relu", vec![c2, self.conv2_side(), self.conv2_side()], 0),
            d("maxpool", vec![c2, self.pool2_side(), self.pool2_side()], 0),
            d("flatten", vec![self.flat_len()], 0),
            d("dense1", vec![self.hidden], lens[4] + lens[5]),
            d("relu", vec![self.hidden], 0),
            d("dense2", vec![self.classes], lens[6] + lens[7]),
            d("softmax", vec![self.classes], 0),
        ]
    }
}

/// Parameter tensors, one flat block per entry of [`BLOCK_NAMES`].
///
/// Layouts: conv weights `[out][in][ky][kx]`, dense weights input-major
/// `[input][output]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub blocks: Vec<Vec<f64>>,
}

impl Params {
    pub fn zeros(arch: &Architecture) -> Self {
        Self {
            blocks: arch.block_lens().iter().map(|&len| vec![0.0; len]).collect(),
        }
    }

    /// Weights uniform in `±sqrt(6 / fan_in)`, biases zero.
    pub fn init(arch: &Architecture, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut p = Self::zeros(arch);
        let k2 = arch.kernel * arch.kernel;
        let fan_in = [k2, arch.conv1_filters * k2, arch.flat_len(), arch.hidden];
        for (block, fan) in [CONV1_W, CONV2_W, FC1_W, FC2_W].into_iter().zip(fan_in) {
            let limit = (6.0 / fan as f64).sqrt();
            for w in &mut p.blocks[block] {
                *w = rng.random_range(-limit..limit);
            }
        }
        p
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.blocks.iter().flatten().all(|v| v.is_finite())
    }
}

/// Cached activations of one forward pass.
pub(crate) struct Forward {
    a1: Vec<f64>,
    p1: Vec<f64>,
    p1_arg: Vec<u32>,
    p2: Vec<f64>,
    p2_arg: Vec<u32>,
    h: Vec<f64>,
    pub(crate) logits: Vec<f64>,
}

fn max_pool(input: &[f64], channels: usize, side: usize) -> (Vec<f64>, Vec<u32>) {
    let out_side = side / 2;
    let mut out = Vec::with_capacity(channels * out_side * out_side);
    let mut arg = Vec::with_capacity(out.capacity());
    for c in 0..channels {
        let base = c * side * side;
        for py in 0..out_side {
            for px in 0..out_side {
                let mut best = base + 2 * py * side + 2 * px;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = base + (2 * py + dy) * side + 2 * px + dx;
                    if input[idx] > input[best] {
                        best = idx;
                    }
                }
                out.push(input[best]);
                arg.push(best as u32);
            }
        }
    }
    (out, arg)
}

fn relu(xs: &mut [f64]) {
    for x in xs {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `-ln softmax(logits)[label]`, computed in log-space.
pub(crate) fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

pub(crate) fn forward(arch: &Architecture, params: &Params, img: &AmbImage) -> Forward {
    let k = arch.kernel;
    let (c1, c2) = (arch.conv1_filters, arch.conv2_filters);
    let (o1, s1, o2) = (arch.conv1_side(), arch.pool1_side(), arch.conv2_side());
    let b = &params.blocks;

    // conv1, scattered from the white pixels.
    let mut a1 = vec![0.0; c1 * o1 * o1];
    for f in 0..c1 {
        a1[f * o1 * o1..(f + 1) * o1 * o1].fill(b[CONV1_B][f]);
    }
    for (y, x) in img.white_pixels() {
        for ky in 0..k.min(y + 1) {
            let oy = y - ky;
            if oy >= o1 {
                continue;
            }
            for kx in 0..k.min(x + 1) {
                let ox = x - kx;
                if ox >= o1 {
                    continue;
                }
                let at = oy * o1 + ox;
                for f in 0..c1 {
                    a1[f * o1 * o1 + at] += b[CONV1_W][f * k * k + ky * k + kx];
                }
            }
        }
    }
    relu(&mut a1);
    let (p1, p1_arg) = max_pool(&a1, c1, o1);

    // conv2, dense row-wise accumulation.
    let mut a2 = vec![0.0; c2 * o2 * o2];
    for g in 0..c2 {
        let out = &mut a2[g * o2 * o2..(g + 1) * o2 * o2];
        out.fill(b[CONV2_B][g]);
        for c in 0..c1 {
            let plane = &p1[c * s1 * s1..(c + 1) * s1 * s1];
            if plane.iter().all(|&v| v == 0.0) {
                continue;
            }
            for ky in 0..k {
                for kx in 0..k {
                    let w = b[CONV2_W][((g * c1 + c) * k + ky) * k + kx];
                    for oy in 0..o2 {
                        let src = &plane[(oy + ky) * s1 + kx..][..o2];
                        let dst = &mut out[oy * o2..][..o2];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += w * s;
                        }
                    }
                }
            }
        }
    }
    relu(&mut a2);
    let (p2, p2_arg) = max_pool(&a2, c2, o2);

    let hd = arch.hidden;
    let mut h = b[FC1_B].clone();
    for (i, &x) in p2.iter().enumerate() {
        if x != 0.0 {
            for (hj, w) in h.iter_mut().zip(&b[FC1_W][i * hd..(i + 1) * hd]) {
                *hj += x * w;
            }
        }
    }
    relu(&mut h);

    let nc = arch.classes;
    let mut logits = b[FC2_B].clone();
    for (j, &hj) in h.iter().enumerate() {
        if hj != 0.0 {
            for (z, w) in logits.iter_mut().zip(&b[FC2_W][j * nc..(j + 1) * nc]) {
                *z += hj * w;
            }
        }
    }

    Forward { a1, p1, p1_arg, p2, p2_arg, h, logits }
}

/// Accumulates the gradient of the loss into `grads`, given `dlogits`, the
/// loss gradient with respect to the logits of this sample.
pub(crate) fn backward(
    arch: &Architecture,
    params: &Params,
    img: &AmbImage,
    fwd: &Forward,
    dlogits: &[f64],
    grads: &mut Params,
) {
    let k = arch.kernel;
    let (c1, o1, s1, o2) = (arch.conv1_filters, arch.conv1_side(), arch.pool1_side(), arch.conv2_side());
    let (hd, nc) = (arch.hidden, arch.classes);
    let w = &params.blocks;
    let g = &mut grads.blocks;

    for (gb, d) in g[FC2_B].iter_mut().zip(dlogits) {
        *gb += d;
    }
    let mut dh = vec![0.0; hd];
    for j in 0..hd {
        let hj = fwd.h[j];
        if hj > 0.0 {
            let row = &w[FC2_W][j * nc..(j + 1) * nc];
            dh[j] = row.iter().zip(dlogits).map(|(a, b)| a * b).sum();
            for (gw, d) in g[FC2_W][j * nc..(j + 1) * nc].iter_mut().zip(dlogits) {
                *gw += hj * d;
            }
        }
    }
    for (gb, d) in g[FC1_B].iter_mut().zip(&dh) {
        *gb += d;
    }

    let mut dp1 = vec![0.0; fwd.p1.len()];
    for (i, &x) in fwd.p2.iter().enumerate() {
        if x <= 0.0 {
            continue;
        }
        let row = &w[FC1_W][i * hd..(i + 1) * hd];
        let dx: f64 = row.iter().zip(&dh).map(|(a, b)| a * b).sum();
        for (gw, d) in g[FC1_W][i * hd..(i + 1) * hd].iter_mut().zip(&dh) {
            *gw += x * d;
        }
        if dx == 0.0 {
            continue;
        }
        // Back through pool2 and the active ReLU into conv2 at the argmax.
        let pos = fwd.p2_arg[i] as usize;
        let (filter, rest) = (pos / (o2 * o2), pos % (o2 * o2));
        let (oy, ox) = (rest / o2, rest % o2);
        g[CONV2_B][filter] += dx;
        for c in 0..c1 {
            for ky in 0..k {
                let base_in = c * s1 * s1 + (oy + ky) * s1 + ox;
                let base_w = ((filter * c1 + c) * k + ky) * k;
                for kx in 0..k {
                    g[CONV2_W][base_w + kx] += dx * fwd.p1[base_in + kx];
                    dp1[base_in + kx] += dx * w[CONV2_W][base_w + kx];
                }
            }
        }
    }

    for (idx, &d) in dp1.iter().enumerate() {
        if d == 0.0 || fwd.p1[idx] <= 0.0 {
            continue;
        }
        let pos = fwd.p1_arg[idx] as usize;
        debug_assert!(fwd.a1[pos] > 0.0);
        let (filter, rest) = (pos / (o1 * o1), pos % (o1 * o1));
        let (oy, ox) = (rest / o1, rest % o1);
        g[CONV1_B][filter] += d;
        for ky in 0..k {
            for kx in 0..k {
                if img.get(oy + ky, ox + kx) {
                    g[CONV1_W][filter * k * k + ky * k + kx] += d;
                }
            }
        }
    }
}

/// The discrete decisions of a forward pass: every pool argmax and the sign
/// of every value that reaches the next layer. The loss is smooth in the
/// parameters on any segment along which this stays constant.
pub fn activation_pattern(arch: &Architecture, params: &Params, img: &AmbImage) -> Vec<u32> {
    let fwd = forward(arch, params, img);
    let positive = |xs: &[f64]| xs.iter().map(|&x| u32::from(x > 0.0)).collect::<Vec<_>>();
    let mut out = fwd.p1_arg.clone();
    out.extend(positive(&fwd.p1));
    out.extend(&fwd.p2_arg);
    out.extend(positive(&fwd.p2));
    out.extend(positive(&fwd.h));
    out
}

/// Mean cross-entropy over a batch.
pub fn batch_loss(arch: &Architecture, params: &Params, batch: &[(&AmbImage, usize)]) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|(img, label)| cross_entropy(&forward(arch, params, img).logits, *label))
        .sum();
    total / batch.len() as f64
}

/// Mean cross-entropy over a batch together with its gradient.
pub fn loss_and_grad(
    arch: &Architecture,
    params: &Params,
    batch: &[(&AmbImage, usize)],
) -> (f64, Params) {
    let mut grads = Params::zeros(arch);
    let mut total = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for (img, label) in batch {
        let fwd = forward(arch, params, img);
        total += cross_entropy(&fwd.logits, *label);
        let mut dlogits = softmax(&fwd.logits);
        dlogits[*label] -= 1.0;
        for d in &mut dlogits {
            *d *= scale;
        }
        backward(arch, params, img, &fwd, &dlogits, &mut grads);
    }
    (total * scale, grads)
}
