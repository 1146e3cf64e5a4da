use crate::error::{Error, Result};
use crate::numerics::{ComplexImage, RealImage};

/// Dense real array with shape `[channels, height, width]`.
///
/// Complex images are carried as two planes `(re, im)`; detail
/// coefficients as six (`re, im` per subband); conv kernels as
/// `[out, in, 9]`; scalars as `[1, 1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: [usize; 3],
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: [usize; 3]) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch {
                expected: format!("{shape:?}"),
                got: format!("{} elements", data.len()),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            shape: [1, 1, 1],
            data: vec![v],
        }
    }

    pub fn from_complex(img: &ComplexImage) -> Self {
        let (h, w) = img.shape();
        let mut data = img.re_plane();
        data.extend(img.im_plane());
        Self {
            shape: [2, h, w],
            data,
        }
    }

    pub fn from_complex_planes(imgs: &[ComplexImage]) -> Self {
        let (h, w) = imgs[0].shape();
        let mut data = Vec::with_capacity(imgs.len() * 2 * h * w);
        for img in imgs {
            data.extend(img.re_plane());
            data.extend(img.im_plane());
        }
        Self {
            shape: [2 * imgs.len(), h, w],
            data,
        }
    }

    pub fn from_real_planes(planes: &[RealImage]) -> Self {
        let (h, w) = planes[0].shape();
        let mut data = Vec::with_capacity(planes.len() * h * w);
        for p in planes {
            data.extend_from_slice(p.data());
        }
        Self {
            shape: [planes.len(), h, w],
            data,
        }
    }

    /// Interprets channels `(2k, 2k+1)` as one complex image.
    pub fn complex_channel(&self, k: usize) -> ComplexImage {
        let [_, h, w] = self.shape;
        ComplexImage::from_planes(h, w, self.plane(2 * k), self.plane(2 * k + 1))
    }

    pub fn to_complex(&self) -> Result<ComplexImage> {
        if self.shape[0] != 2 {
            return Err(Error::ChannelMismatch {
                expected: 2,
                got: self.shape[0],
            });
        }
        Ok(self.complex_channel(0))
    }

    pub fn real_channel(&self, c: usize) -> RealImage {
        let [_, h, w] = self.shape;
        RealImage::from_vec(h, w, self.plane(c).to_vec()).expect("plane length matches")
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.shape[0]
    }

    pub fn plane_len(&self) -> usize {
        self.shape[1] * self.shape[2]
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn item(&self) -> f64 {
        debug_assert_eq!(self.data.len(), 1);
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", self.shape),
                got: format!("{:?}", other.shape),
            });
        }
        Ok(())
    }
}

/// One named trainable array with its gradient slot.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub value: Tensor,
    pub grad: Vec<f64>,
}

/// Named arrays with same-shaped gradient buffers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TensorSet {
    entries: Vec<NamedTensor>,
}

impl TensorSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) {
        let grad = vec![0.0; value.len()];
        self.entries.push(NamedTensor {
            name: name.into(),
            value,
            grad,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NamedTensor] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [NamedTensor] {
        &mut self.entries
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|e| e.name == name).map(|e| &e.value)
    }

    pub fn value(&self, index: usize) -> &Tensor {
        &self.entries[index].value
    }

    pub fn zero_grad(&mut self) {
        for e in &mut self.entries {
            e.grad.fill(0.0);
        }
    }

    pub fn accumulate_grad(&mut self, index: usize, g: &[f64]) {
        for (a, b) in self.entries[index].grad.iter_mut().zip(g) {
            *a += b;
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.entries.iter().map(|e| e.value.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.value.is_finite())
    }
}
