use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Dense `(batch, channels, height, width)` tensor in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    shape: [usize; 4],
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn new(shape: [usize; 4], data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            bail!(Shape, "shape {shape:?} needs {n} values, got {}", data.len());
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: [usize; 4]) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_fn(shape: [usize; 4], mut f: impl FnMut([usize; 4]) -> f64) -> Self {
        let mut data = Vec::with_capacity(shape.iter().product());
        for n in 0..shape[0] {
            for c in 0..shape[1] {
                for h in 0..shape[2] {
                    for w in 0..shape[3] {
                        data.push(f([n, c, h, w]));
                    }
                }
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; 4] {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn channels(&self) -> usize {
        self.shape[1]
    }

    pub fn height(&self) -> usize {
        self.shape[2]
    }

    pub fn width(&self) -> usize {
        self.shape[3]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, [n, c, h, w]: [usize; 4]) -> usize {
        ((n * self.shape[1] + c) * self.shape[2] + h) * self.shape[3] + w
    }

    pub fn get(&self, idx: [usize; 4]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; 4], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Contiguous `(channels, height, width)` block of one batch item.
    pub fn sample(&self, n: usize) -> &[f64] {
        let s = self.shape[1] * self.shape[2] * self.shape[3];
        &self.data[n * s..(n + 1) * s]
    }

    pub fn sample_mut(&mut self, n: usize) -> &mut [f64] {
        let s = self.shape[1] * self.shape[2] * self.shape[3];
        &mut self.data[n * s..(n + 1) * s]
    }

    /// Copy of channels `[start, start + count)`.
    pub fn channel_slice(&self, start: usize, count: usize) -> Result<Tensor4> {
        if start + count > self.shape[1] {
            bail!(Shape, "channel slice {start}+{count} exceeds {}", self.shape[1]);
        }
        let [n, _, h, w] = self.shape;
        Ok(Tensor4::from_fn([n, count, h, w], |[b, c, y, x]| {
            self.get([b, start + c, y, x])
        }))
    }

    /// Concatenate along the channel axis.
    pub fn concat_channels(parts: &[Tensor4]) -> Result<Tensor4> {
        let Some(first) = parts.first() else {
            bail!(Shape, "nothing to concatenate");
        };
        let [n, _, h, w] = first.shape;
        if parts.iter().any(|p| p.shape[0] != n || p.shape[2] != h || p.shape[3] != w) {
            bail!(Shape, "concatenated tensors differ in batch or spatial size");
        }
        let total: usize = parts.iter().map(|p| p.shape[1]).sum();
        let mut data = Vec::with_capacity(n * total * h * w);
        for b in 0..n {
            for p in parts {
                data.extend_from_slice(p.sample(b));
            }
        }
        Tensor4::new([n, total, h, w], data)
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
