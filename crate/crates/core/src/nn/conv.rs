//! Grouped 2D cross-correlation (no kernel flip) via per-group im2col + GEMM.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Tensor4;
use crate::error::{bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    /// `(out_channels, in_channels / groups, kh, kw)`
    pub weight: Tensor4,
    pub bias: Vec<f64>,
    pub stride: usize,
    pub padding: usize,
    pub groups: usize,
}

impl ConvParams {
    pub fn new(
        weight: Tensor4,
        bias: Vec<f64>,
        stride: usize,
        padding: usize,
        groups: usize,
    ) -> Result<Self> {
        let out = weight.batch();
        if groups == 0 || !out.is_multiple_of(groups) {
            bail!(Shape, "{out} output channels not divisible by {groups} groups");
        }
        if bias.len() != out {
            bail!(Shape, "bias has {} entries for {out} output channels", bias.len());
        }
        if stride == 0 {
            bail!(InvalidArgument, "stride must be positive");
        }
        Ok(Self {
            weight,
            bias,
            stride,
            padding,
            groups,
        })
    }

    /// Kaiming-uniform (fan-in, ReLU gain) kernels with zero bias.
    pub fn kaiming(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        groups: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if groups == 0 || !in_channels.is_multiple_of(groups) {
            bail!(Shape, "{in_channels} input channels not divisible by {groups} groups");
        }
        let per_group = in_channels / groups;
        let fan_in = (per_group * kernel * kernel) as f64;
        let bound = libm::sqrt(6.0 / fan_in);
        let weight = Tensor4::from_fn([out_channels, per_group, kernel, kernel], |_| {
            rng.gen_range(-bound..bound)
        });
        Self::new(weight, vec![0.0; out_channels], stride, padding, groups)
    }

    pub fn out_channels(&self) -> usize {
        self.weight.batch()
    }

    pub fn in_channels(&self) -> usize {
        self.weight.channels() * self.groups
    }

    pub fn kernel(&self) -> (usize, usize) {
        (self.weight.height(), self.weight.width())
    }

    pub fn parameter_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let (kh, kw) = self.kernel();
        let ph = h + 2 * self.padding;
        let pw = w + 2 * self.padding;
        if ph < kh || pw < kw {
            bail!(Shape, "kernel {kh}x{kw} larger than padded input {ph}x{pw}");
        }
        Ok(((ph - kh) / self.stride + 1, (pw - kw) / self.stride + 1))
    }

    fn check_input(&self, x: &Tensor4) -> Result<()> {
        if x.channels() != self.in_channels() {
            bail!(
                Shape,
                "input has {} channels, convolution expects {}",
                x.channels(),
                self.in_channels()
            );
        }
        Ok(())
    }
}

/// Geometry shared by the im2col helpers.
struct Geometry {
    cg: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    stride: usize,
    pad: usize,
    ho: usize,
    wo: usize,
}

impl Geometry {
    fn new(p: &ConvParams, x: &Tensor4) -> Result<Self> {
        let (kh, kw) = p.kernel();
        let (ho, wo) = p.output_size(x.height(), x.width())?;
        Ok(Self {
            cg: p.weight.channels(),
            h: x.height(),
            w: x.width(),
            kh,
            kw,
            stride: p.stride,
            pad: p.padding,
            ho,
            wo,
        })
    }

    fn k(&self) -> usize {
        self.cg * self.kh * self.kw
    }

    fn hw(&self) -> usize {
        self.ho * self.wo
    }

    /// Source index along one axis, or `None` inside the zero padding.
    #[inline]
    fn src(&self, o: usize, k: usize, limit: usize) -> Option<usize> {
        let pos = (o * self.stride + k) as isize - self.pad as isize;
        (pos >= 0 && (pos as usize) < limit).then_some(pos as usize)
    }

    /// `group_input` is the `(cg, h, w)` block of one sample.
    fn im2col(&self, group_input: &[f64], cols: &mut [f64]) {
        let hw = self.hw();
        for c in 0..self.cg {
            let plane = &group_input[c * self.h * self.w..(c + 1) * self.h * self.w];
            for ki in 0..self.kh {
                for kj in 0..self.kw {
                    let row = ((c * self.kh + ki) * self.kw + kj) * hw;
                    for oy in 0..self.ho {
                        let dst = &mut cols[row + oy * self.wo..row + (oy + 1) * self.wo];
                        match self.src(oy, ki, self.h) {
                            None => dst.fill(0.0),
                            Some(iy) => {
                                let line = &plane[iy * self.w..(iy + 1) * self.w];
                                for (ox, d) in dst.iter_mut().enumerate() {
                                    *d = match self.src(ox, kj, self.w) {
                                        Some(ix) => line[ix],
                                        None => 0.0,
                                    };
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, cols: &[f64], group_grad: &mut [f64]) {
        let hw = self.hw();
        for c in 0..self.cg {
            let plane = &mut group_grad[c * self.h * self.w..(c + 1) * self.h * self.w];
            for ki in 0..self.kh {
                for kj in 0..self.kw {
                    let row = ((c * self.kh + ki) * self.kw + kj) * hw;
                    for oy in 0..self.ho {
                        let Some(iy) = self.src(oy, ki, self.h) else {
                            continue;
                        };
                        let src = &cols[row + oy * self.wo..row + (oy + 1) * self.wo];
                        for (ox, &g) in src.iter().enumerate() {
                            if let Some(ix) = self.src(ox, kj, self.w) {
                                plane[iy * self.w + ix] += g;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// `C = A * B (+ C if accumulate)` for row-major `A: m x k`, `B: k x n`, with
/// optional transposition of either operand through its strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_transposed: bool,
    b: &[f64],
    b_transposed: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_transposed { (1, m) } else { (k, 1) };
    let (rsb, csb) = if b_transposed { (1, k) } else { (n, 1) };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: the asserts above bound every access implied by the strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Grouped convolution: channels are split into `groups` slices, each slice
/// is convolved with its own kernels, and the outputs are concatenated in
/// group order.
pub fn group_conv2d(x: &Tensor4, p: &ConvParams) -> Result<Tensor4> {
    p.check_input(x)?;
    let geo = Geometry::new(p, x)?;
    let out_c = p.out_channels();
    let og = out_c / p.groups;
    let (k, hw) = (geo.k(), geo.hw());
    let in_block = geo.cg * geo.h * geo.w;
    let mut out = Tensor4::zeros([x.batch(), out_c, geo.ho, geo.wo]);
    let mut cols = vec![0.0; k * hw];
    for n in 0..x.batch() {
        let sample = x.sample(n);
        let dst = out.sample_mut(n);
        for g in 0..p.groups {
            geo.im2col(&sample[g * in_block..(g + 1) * in_block], &mut cols);
            let w = &p.weight.data()[g * og * k..(g + 1) * og * k];
            let y = &mut dst[g * og * hw..(g + 1) * og * hw];
            gemm(og, k, hw, w, false, &cols, false, y, false);
        }
        for (c, &b) in p.bias.iter().enumerate() {
            dst[c * hw..(c + 1) * hw].iter_mut().for_each(|v| *v += b);
        }
    }
    Ok(out)
}

/// Ungrouped convolution.
pub fn conv2d(x: &Tensor4, p: &ConvParams) -> Result<Tensor4> {
    if p.groups != 1 {
        bail!(Shape, "conv2d expects one group, got {}", p.groups);
    }
    group_conv2d(x, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub input: Tensor4,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradients of a grouped convolution given the upstream gradient.
pub fn group_conv2d_backward(x: &Tensor4, p: &ConvParams, grad_out: &Tensor4) -> Result<ConvGrads> {
    p.check_input(x)?;
    let geo = Geometry::new(p, x)?;
    let out_c = p.out_channels();
    if grad_out.shape() != [x.batch(), out_c, geo.ho, geo.wo] {
        bail!(Shape, "upstream gradient shape {:?} does not match output", grad_out.shape());
    }
    let og = out_c / p.groups;
    let (k, hw) = (geo.k(), geo.hw());
    let in_block = geo.cg * geo.h * geo.w;
    let mut grad_x = Tensor4::zeros(x.shape());
    let mut grad_w = vec![0.0; p.weight.len()];
    let mut grad_b = vec![0.0; out_c];
    let mut cols = vec![0.0; k * hw];
    let mut dcols = vec![0.0; k * hw];
    for n in 0..x.batch() {
        let sample = x.sample(n);
        let gy = grad_out.sample(n);
        for (c, b) in grad_b.iter_mut().enumerate() {
            *b += gy[c * hw..(c + 1) * hw].iter().sum::<f64>();
        }
        for g in 0..p.groups {
            let gy_g = &gy[g * og * hw..(g + 1) * og * hw];
            geo.im2col(&sample[g * in_block..(g + 1) * in_block], &mut cols);
            // dW_g += dY_g * cols^T
            gemm(og, hw, k, gy_g, false, &cols, true, &mut grad_w[g * og * k..(g + 1) * og * k], true);
            // dcols = W_g^T * dY_g
            let w = &p.weight.data()[g * og * k..(g + 1) * og * k];
            gemm(k, og, hw, w, true, gy_g, false, &mut dcols, false);
            let gx = grad_x.sample_mut(n);
            geo.col2im(&dcols, &mut gx[g * in_block..(g + 1) * in_block]);
        }
    }
    Ok(ConvGrads {
        input: grad_x,
        weight: grad_w,
        bias: grad_b,
    })
}
