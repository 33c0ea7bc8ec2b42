//! Trial solution network and the table of precomputed basis values.
//!
//! The trial solution is N(x) = sum_i w_i F_i(x). Training only ever changes
//! the weights, so every basis value, every Caputo derivative of a basis
//! member at a training point, and every basis derivative at x = 0 for the
//! initial conditions can be computed once up front. After the cache is
//! built, evaluating the network or any of its cached derivatives is a dot
//! product.

use crate::basis::{caputo_fibonacci, fibonacci, FracSeries, FractionalOrder, Polynomial};
use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Precomputed basis values.
///
/// Layout is one contiguous block per training point: the plain basis values
/// followed by one slot of derivative values per cached order. Initial
/// condition rows hold the k-th classical derivative of each basis member at
/// x = 0. Basis indices are 1-based to match the series N = sum w_i F_i.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisCache {
    n: usize,
    points: Vec<f64>,
    orders: Vec<f64>,
    ic_rows: usize,
    /// `num_points` blocks of `(1 + orders.len()) * n` values.
    values: Vec<f64>,
    /// `ic_rows` rows of `n` values.
    ic: Vec<f64>,
}

impl BasisCache {
    /// Builds the cache, choosing the parallel path when the `parallel`
    /// feature is enabled. Both paths produce bit-identical tables.
    pub fn build(n: usize, points: &[f64], orders: &[f64], ic_rows: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            Self::build_par(n, points, orders, ic_rows)
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self::build_seq(n, points, orders, ic_rows)
        }
    }

    pub fn build_seq(n: usize, points: &[f64], orders: &[f64], ic_rows: usize) -> Result<Self> {
        let (mut cache, polys, series) = Self::prepare(n, points, orders, ic_rows)?;
        let row_len = cache.row_len();
        for (chunk, &x) in cache.values.chunks_mut(row_len).zip(points) {
            fill_point_block(chunk, x, &polys, &series);
        }
        Ok(cache)
    }

    #[cfg(feature = "parallel")]
    pub fn build_par(n: usize, points: &[f64], orders: &[f64], ic_rows: usize) -> Result<Self> {
        let (mut cache, polys, series) = Self::prepare(n, points, orders, ic_rows)?;
        let row_len = cache.row_len();
        cache
            .values
            .par_chunks_mut(row_len)
            .zip(points.par_iter())
            .for_each(|(chunk, &x)| fill_point_block(chunk, x, &polys, &series));
        Ok(cache)
    }

    /// Validates inputs, sizes the tables, and builds the basis polynomials,
    /// derivative series, and initial condition rows.
    #[allow(clippy::type_complexity)]
    fn prepare(
        n: usize,
        points: &[f64],
        orders: &[f64],
        ic_rows: usize,
    ) -> Result<(Self, Vec<Polynomial>, Vec<Vec<FracSeries>>)> {
        assert!(n >= 1, "basis size must be at least 1");
        for &x in points {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::NegativePoint(x));
            }
        }
        let polys: Vec<Polynomial> = (1..=n).map(fibonacci).collect();
        let series: Vec<Vec<FracSeries>> = orders
            .iter()
            .map(|&a| {
                let order = FractionalOrder::new(a)?;
                Ok((1..=n).map(|i| caputo_fibonacci(i, order)).collect())
            })
            .collect::<Result<_>>()?;
        let mut ic = Vec::with_capacity(ic_rows * n);
        for k in 0..ic_rows {
            for poly in &polys {
                ic.push(poly.derivative(k).eval(0.0));
            }
        }
        let cache = Self {
            n,
            points: points.to_vec(),
            orders: orders.to_vec(),
            ic_rows,
            values: vec![0.0; points.len() * (1 + orders.len()) * n],
            ic,
        };
        Ok((cache, polys, series))
    }

    fn row_len(&self) -> usize {
        (1 + self.orders.len()) * self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn ic_rows(&self) -> usize {
        self.ic_rows
    }

    /// Slot index of a cached order, or the missing-order error. Orders are
    /// matched exactly: the cache is keyed by the same floats the problem
    /// was built from.
    fn order_slot(&self, order: f64) -> Result<usize> {
        self.orders
            .iter()
            .position(|&a| a == order)
            .map(|idx| idx + 1)
            .ok_or(Error::MissingOrder(order))
    }

    fn slot_row(&self, slot: usize, p: usize) -> &[f64] {
        let start = p * self.row_len() + slot * self.n;
        &self.values[start..start + self.n]
    }

    /// Plain basis values F_1..F_n at training point p.
    pub(crate) fn basis_row(&self, p: usize) -> &[f64] {
        self.slot_row(0, p)
    }

    pub(crate) fn deriv_row(&self, order: f64, p: usize) -> Result<&[f64]> {
        Ok(self.slot_row(self.order_slot(order)?, p))
    }

    pub(crate) fn ic_row(&self, k: usize) -> &[f64] {
        assert!(k < self.ic_rows, "initial condition row {k} out of range {}", self.ic_rows);
        &self.ic[k * self.n..(k + 1) * self.n]
    }

    /// F_i at point p. Basis index i is 1-based.
    pub fn basis_value(&self, i: usize, p: usize) -> f64 {
        assert!((1..=self.n).contains(&i), "basis index {i} out of range 1..={}", self.n);
        self.basis_row(p)[i - 1]
    }

    /// Caputo derivative of F_i of a cached order at point p.
    pub fn deriv_value(&self, order: f64, i: usize, p: usize) -> Result<f64> {
        assert!((1..=self.n).contains(&i), "basis index {i} out of range 1..={}", self.n);
        Ok(self.deriv_row(order, p)?[i - 1])
    }

    /// k-th classical derivative of F_i at x = 0.
    pub fn ic_value(&self, k: usize, i: usize) -> f64 {
        assert!((1..=self.n).contains(&i), "basis index {i} out of range 1..={}", self.n);
        self.ic_row(k)[i - 1]
    }

    /// Row of basis values (order 0) or cached derivative values at point p,
    /// indexed by weight. This is the jacobian of the corresponding forward
    /// value with respect to the weights.
    pub fn jacobian_row(&self, order: f64, p: usize) -> Result<Vec<f64>> {
        if order == 0.0 {
            return Ok(self.basis_row(p).to_vec());
        }
        Ok(self.deriv_row(order, p)?.to_vec())
    }
}

fn fill_point_block(chunk: &mut [f64], x: f64, polys: &[Polynomial], series: &[Vec<FracSeries>]) {
    let n = polys.len();
    for (i, poly) in polys.iter().enumerate() {
        chunk[i] = poly.eval(x);
    }
    for (s, per_order) in series.iter().enumerate() {
        let base = (s + 1) * n;
        for (i, fs) in per_order.iter().enumerate() {
            chunk[base + i] = fs.eval(x).expect("points are validated nonnegative");
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted sum of Fibonacci basis members. The weights are the only
/// trainable state.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: Vec<f64>,
}

impl Network {
    /// # Panics
    /// If `weights` is empty.
    pub fn new(weights: Vec<f64>) -> Self {
        assert!(!weights.is_empty(), "a network needs at least one weight");
        Self { weights }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    fn check_cache(&self, cache: &BasisCache) {
        assert_eq!(
            self.weights.len(),
            cache.n(),
            "weight count {} does not match cache basis size {}",
            self.weights.len(),
            cache.n()
        );
    }

    /// N(x_p) from cached basis values.
    pub fn forward(&self, cache: &BasisCache, p: usize) -> f64 {
        self.check_cache(cache);
        dot(&self.weights, cache.basis_row(p))
    }

    /// Caputo derivative of N at x_p for a cached order.
    pub fn frac_forward(&self, cache: &BasisCache, order: f64, p: usize) -> Result<f64> {
        self.check_cache(cache);
        Ok(dot(&self.weights, cache.deriv_row(order, p)?))
    }

    /// k-th classical derivative of N at x = 0.
    pub fn ic_forward(&self, cache: &BasisCache, k: usize) -> f64 {
        self.check_cache(cache);
        dot(&self.weights, cache.ic_row(k))
    }
}
