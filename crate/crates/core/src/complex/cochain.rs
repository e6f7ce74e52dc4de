use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DVector, DVectorView};

/// A graded coefficient vector: degrees 0, 1 and 2 concatenated.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    dims: [usize; 3],
    values: DVector<f64>,
}

impl Cochain {
    /// # Panics
    ///
    /// Panics if `values` does not have length `dims[0] + dims[1] + dims[2]`.
    pub fn new(dims: [usize; 3], values: DVector<f64>) -> Self {
        assert_eq!(values.len(), dims.iter().sum::<usize>(), "cochain length must match the complex");
        Self { dims, values }
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Self::new(dims, DVector::zeros(dims.iter().sum()))
    }

    /// Concatenates per-degree components.
    pub fn from_components(parts: [DVector<f64>; 3]) -> Self {
        let dims = [parts[0].len(), parts[1].len(), parts[2].len()];
        let values = DVector::from_iterator(dims.iter().sum(), parts.iter().flat_map(|p| p.iter().copied()));
        Self { dims, values }
    }

    /// A cochain supported in a single degree.
    pub fn single(dims: [usize; 3], k: usize, component: &DVector<f64>) -> Self {
        let mut c = Self::zeros(dims);
        c.component_mut(k).copy_from(component);
        c
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    fn range(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.dims[..k].iter().sum();
        start..start + self.dims[k]
    }

    pub fn component(&self, k: usize) -> DVectorView<'_, f64> {
        let r = self.range(k);
        self.values.rows(r.start, r.len())
    }

    pub fn component_mut(&mut self, k: usize) -> nalgebra::DVectorViewMut<'_, f64> {
        let r = self.range(k);
        self.values.rows_mut(r.start, r.len())
    }

    /// Euclidean norm of the coefficients.
    pub fn coefficient_norm(&self) -> f64 {
        self.values.norm()
    }

    fn check(&self, other: &Cochain) {
        assert_eq!(self.dims, other.dims, "cochains from different complexes");
    }
}

impl Add for &Cochain {
    type Output = Cochain;
    fn add(self, rhs: &Cochain) -> Cochain {
        self.check(rhs);
        Cochain::new(self.dims, &self.values + &rhs.values)
    }
}

impl Sub for &Cochain {
    type Output = Cochain;
    fn sub(self, rhs: &Cochain) -> Cochain {
        self.check(rhs);
        Cochain::new(self.dims, &self.values - &rhs.values)
    }
}

impl Neg for &Cochain {
    type Output = Cochain;
    fn neg(self) -> Cochain {
        Cochain::new(self.dims, -&self.values)
    }
}

impl Mul<f64> for &Cochain {
    type Output = Cochain;
    fn mul(self, rhs: f64) -> Cochain {
        Cochain::new(self.dims, &self.values * rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_and_arithmetic() {
        let c = Cochain::from_components([
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![2.0, 3.0]),
            DVector::from_vec(vec![4.0]),
        ]);
        assert_eq!(c.dims(), [1, 2, 1]);
        assert_eq!(c.component(1).as_slice(), &[2.0, 3.0]);
        let s = &(&c + &c) - &(&c * 0.5);
        assert_eq!(s.values().as_slice(), &[1.5, 3.0, 4.5, 6.0]);
        assert_eq!((-&c).component(2)[0], -4.0);
        let one = Cochain::single([1, 2, 1], 1, &DVector::from_vec(vec![7.0, 8.0]));
        assert_eq!(one.values().as_slice(), &[0.0, 7.0, 8.0, 0.0]);
    }

    #[test]
    #[should_panic(expected = "cochain length")]
    fn length_is_checked() {
        Cochain::new([1, 1, 1], DVector::zeros(2));
    }
}
