use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngExt};

use super::{KernelError, Tensor2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    name: String,
    value: Tensor2,
    m: Tensor2,
    v: Tensor2,
}

/// Named trainable tensors with their Adam moment buffers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    entries: Vec<Entry>,
    step: u64,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a parameter; names must be unique.
    pub fn add(&mut self, name: impl Into<String>, value: Tensor2) -> ParamId {
        let name = name.into();
        debug_assert!(self.id_of(&name).is_none(), "duplicate parameter {name}");
        let (r, c) = value.shape();
        self.entries.push(Entry {
            name,
            value,
            m: Tensor2::zeros(r, c),
            v: Tensor2::zeros(r, c),
        });
        ParamId(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar coordinates.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.value.len()).sum()
    }

    pub fn get(&self, id: ParamId) -> &Tensor2 {
        &self.entries[id.0].value
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor2 {
        &mut self.entries[id.0].value
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|e| e.name == name).map(ParamId)
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor2)> {
        self.entries.iter().map(|e| (e.name.as_str(), &e.value))
    }

    /// Number of optimizer steps applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Replaces a value, keeping the shape.
    pub fn set_value(&mut self, id: ParamId, value: Tensor2) -> Result<(), KernelError> {
        let current = &mut self.entries[id.0].value;
        if current.shape() != value.shape() {
            return Err(KernelError::Dimension {
                op: "set_value",
                expected: current.len(),
                got: value.len(),
            });
        }
        *current = value;
        Ok(())
    }

    pub fn zero_grads(&self) -> Grads {
        Grads {
            data: self
                .entries
                .iter()
                .map(|e| Tensor2::zeros(e.value.rows(), e.value.cols()))
                .collect(),
        }
    }

    pub(crate) fn moments_mut(&mut self) -> (impl Iterator<Item = (&mut Tensor2, &mut Tensor2, &mut Tensor2)>, &mut u64) {
        (
            self.entries.iter_mut().map(|e| (&mut e.value, &mut e.m, &mut e.v)),
            &mut self.step,
        )
    }

    /// Flat coordinate access used by gradient checking.
    pub(crate) fn scalar_mut(&mut self, flat: usize) -> &mut f64 {
        let mut offset = flat;
        for e in &mut self.entries {
            if offset < e.value.len() {
                return &mut e.value.as_mut_slice()[offset];
            }
            offset -= e.value.len();
        }
        panic!("coordinate {flat} out of range");
    }
}

/// Gradient buffer shaped like a [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    data: Vec<Tensor2>,
}

impl Grads {
    pub fn get(&self, id: ParamId) -> &Tensor2 {
        &self.data[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor2 {
        &mut self.data[id.0]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tensor2> {
        self.data.iter()
    }

    pub fn add_assign(&mut self, other: &Grads) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for t in &mut self.data {
            for x in t.as_mut_slice() {
                *x *= k;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(Tensor2::is_finite)
    }

    pub fn scalar(&self, flat: usize) -> f64 {
        let mut offset = flat;
        for t in &self.data {
            if offset < t.len() {
                return t.as_slice()[offset];
            }
            offset -= t.len();
        }
        panic!("coordinate {flat} out of range");
    }

    /// Euclidean norm over every coordinate.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().flat_map(|t| t.as_slice()).map(|v| v * v).sum::<f64>())
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|t| t.as_slice())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
pub fn init_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Tensor2 {
    let bound = 1.0 / libm::sqrt(fan_in.max(1) as f64);
    Tensor2::from_fn(rows, cols, |_, _| rng.random_range(-bound..=bound))
}
