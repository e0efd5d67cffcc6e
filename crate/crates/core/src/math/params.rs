//! Named parameter arrays and the store that owns them.

use crate::error::{CoreError, Result};
use crate::math::rng::Rng;

/// Handle to one array inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(&self) -> usize {
        self.0
    }
}

/// A named, shaped, row-major f64 array of learnable values.
#[derive(Debug, Clone)]
pub struct ParamArray {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl ParamArray {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let numel: usize = shape.iter().product();
        if shape.iter().any(|&d| d == 0) {
            return Err(CoreError::InvalidArgument(format!(
                "param {name}: zero dimension in shape {shape:?}"
            )));
        }
        if numel != values.len() {
            return Err(CoreError::DimMismatch(format!(
                "param {name}: shape {shape:?} implies {numel} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite(format!("param {name}")));
        }
        Ok(Self { name, shape, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Owns every learnable array of a model, in creation order.
///
/// Single writer: forward evaluation only reads, gradient application
/// mutates through `&mut self`.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    arrays: Vec<ParamArray>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, array: ParamArray) -> ParamId {
        self.arrays.push(array);
        ParamId(self.arrays.len() - 1)
    }

    /// Matrix initialized uniformly in +-sqrt(6 / (fan_in + fan_out)).
    pub fn xavier(&mut self, name: impl Into<String>, rows: usize, cols: usize, rng: &mut Rng) -> ParamId {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| rng.uniform_in(-bound, bound))
            .collect();
        self.add(ParamArray::new(name, vec![rows, cols], values).expect("xavier init is well formed"))
    }

    /// Zero-initialized vector (biases).
    pub fn zeros(&mut self, name: impl Into<String>, len: usize) -> ParamId {
        self.add(ParamArray::new(name, vec![len], vec![0.0; len]).expect("zeros init is well formed"))
    }

    /// Vector with explicit initial values.
    pub fn vector(&mut self, name: impl Into<String>, values: Vec<f64>) -> ParamId {
        let len = values.len();
        self.add(ParamArray::new(name, vec![len], values).expect("vector init is well formed"))
    }

    pub fn array(&self, id: ParamId) -> &ParamArray {
        &self.arrays[id.0]
    }

    pub fn values(&self, id: ParamId) -> &[f64] {
        self.arrays[id.0].values()
    }

    pub fn values_mut(&mut self, id: ParamId) -> &mut [f64] {
        self.arrays[id.0].values_mut()
    }

    pub fn len(&self) -> usize {
        self.arrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.arrays.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &ParamArray)> {
        self.arrays.iter().enumerate().map(|(i, a)| (ParamId(i), a))
    }

    /// Total number of scalar values across all arrays.
    pub fn numel(&self) -> usize {
        self.arrays.iter().map(|a| a.values().len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_must_match_len() {
        assert!(ParamArray::new("w", vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(matches!(
            ParamArray::new("w", vec![2, 3], vec![0.0; 5]),
            Err(CoreError::DimMismatch(_))
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            ParamArray::new("w", vec![1], vec![f64::NAN]),
            Err(CoreError::NonFinite(_))
        ));
    }

    #[test]
    fn xavier_within_bound() {
        let mut store = ParamStore::new();
        let mut rng = Rng::new(0);
        let id = store.xavier("w", 8, 8, &mut rng);
        let bound = (6.0 / 16.0f64).sqrt();
        assert!(store.values(id).iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn same_seed_same_init() {
        let mut s1 = ParamStore::new();
        let mut s2 = ParamStore::new();
        let mut r1 = Rng::new(5);
        let mut r2 = Rng::new(5);
        let a = s1.xavier("w", 4, 3, &mut r1);
        let b = s2.xavier("w", 4, 3, &mut r2);
        assert_eq!(s1.values(a), s2.values(b));
    }
}
