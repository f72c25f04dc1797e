//! Uniform cubic velocity grid, sampled fields, and differentiation.
//!
//! Nodes sit at `v_i = -L + i Δv`, `i = 0..n`, with `n` even so that `v = 0`
//! is a node. Storage is row-major with `v₁` the slowest axis. Quadrature is
//! the midpoint rule with weight `Δv³` per node.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{frequency_index, Fft3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    extent: f64,
    spacing: f64,
}

/// Builds a grid on `[-extent, extent)³` with `n` points per axis.
pub fn make_grid(n: usize, extent: f64) -> Result<Grid> {
    Grid::new(n, extent)
}

impl Grid {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid(format!("n = {n} must be at least 8")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extent = {extent} must be positive"
            )));
        }
        Ok(Grid {
            n,
            extent,
            spacing: 2.0 * extent / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of nodes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coordinate(i)).collect()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        [
            idx / (self.n * self.n),
            (idx / self.n) % self.n,
            idx % self.n,
        ]
    }

    #[inline]
    pub fn velocity(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.coordinate(i), self.coordinate(j), self.coordinate(k)]
    }

    /// Multi-index of the node `v = 0`.
    pub fn origin(&self) -> [usize; 3] {
        [self.n / 2; 3]
    }

    /// Multi-index of a lattice velocity, or `None` if `v` is off-lattice or
    /// outside the box.
    pub fn node_of(&self, v: [f64; 3]) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for (slot, &x) in out.iter_mut().zip(v.iter()) {
            let s = (x + self.extent) / self.spacing;
            let r = s.round();
            if (s - r).abs() > 1e-9 || r < 0.0 || r >= self.n as f64 {
                return None;
            }
            *slot = r as usize;
        }
        Some(out)
    }

    /// Angular wavenumbers of one axis in FFT order. The Nyquist entry is
    /// kept at `-π/Δv`; odd-order derivatives zero it themselves.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = PI / self.extent;
        (0..self.n)
            .map(|i| dk * frequency_index(i, self.n) as f64)
            .collect()
    }

    /// Wavenumbers for first derivatives: Nyquist mode removed.
    pub(crate) fn derivative_wavenumbers(&self) -> Vec<f64> {
        let mut k = self.wavenumbers();
        k[self.n / 2] = 0.0;
        k
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.n, self.extent, other.n, other.extent
            )));
        }
        Ok(())
    }
}

/// Scalar samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(v)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.velocity(idx))).collect();
        Field { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, node: [usize; 3]) -> f64 {
        self.values[self.grid.index(node[0], node[1], node[2])]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Pointwise `f(v, value)`.
    pub fn map_with_velocity(&self, f: impl Fn([f64; 3], f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(idx, &x)| f(self.grid.velocity(idx), x))
                .collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self - other`.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `alpha·self + beta·other`.
    pub fn combine(&self, alpha: f64, other: &Field, beta: f64) -> Result<Field> {
        self.zip_map(other, |a, b| alpha * a + beta * b)
    }

    pub fn scaled(&self, s: f64) -> Field {
        self.map(|x| s * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    pub(crate) fn to_complex(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect()
    }
}

/// Three components along `v₁, v₂, v₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct VecField {
    components: [Field; 3],
}

impl VecField {
    pub fn new(components: [Field; 3]) -> Result<Self> {
        components[0].grid.check_same(&components[1].grid)?;
        components[0].grid.check_same(&components[2].grid)?;
        Ok(VecField { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        VecField {
            components: [Field::zeros(grid), Field::zeros(grid), Field::zeros(grid)],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.components[0].grid
    }

    pub fn component(&self, k: usize) -> &Field {
        &self.components[k]
    }

    pub fn components(&self) -> &[Field; 3] {
        &self.components
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [
            self.components[0].values[idx],
            self.components[1].values[idx],
            self.components[2].values[idx],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .map(Field::max_abs)
            .fold(0.0, f64::max)
    }

    /// Largest Euclidean norm over nodes.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid().len())
            .map(|idx| {
                let v = self.at(idx);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Symmetric 3×3 tensor per node, stored as components 11, 22, 33, 12, 13, 23.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    components: [Field; 6],
}

/// Storage slot of the `(i, j)` entry.
#[inline]
pub fn sym_slot(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        (1, 2) => 5,
        _ => panic!("tensor index out of range: ({i}, {j})"),
    }
}

impl SymTensorField {
    pub fn new(components: [Field; 6]) -> Result<Self> {
        for c in &components[1..] {
            components[0].grid.check_same(&c.grid)?;
        }
        Ok(SymTensorField { components })
    }

    pub fn grid(&self) -> &Grid {
        &self.components[0].grid
    }

    pub fn component(&self, i: usize, j: usize) -> &Field {
        &self.components[sym_slot(i, j)]
    }

    pub fn components(&self) -> &[Field; 6] {
        &self.components
    }

    pub fn matrix_at(&self, idx: usize) -> [[f64; 3]; 3] {
        let c = |i, j| self.components[sym_slot(i, j)].values[idx];
        [
            [c(0, 0), c(0, 1), c(0, 2)],
            [c(1, 0), c(1, 1), c(1, 2)],
            [c(2, 0), c(2, 1), c(2, 2)],
        ]
    }

    pub fn trace(&self) -> Field {
        let g = *self.grid();
        let values = (0..g.len())
            .map(|idx| {
                self.components[0].values[idx]
                    + self.components[1].values[idx]
                    + self.components[2].values[idx]
            })
            .collect();
        Field { grid: g, values }
    }
}

/// Midpoint-rule integral `Δv³ Σ f`.
pub fn integrate(field: &Field) -> f64 {
    field.grid.cell_volume() * field.values.iter().sum::<f64>()
}

/// Gradient of the periodic extension, computed by multiplying with `iξ` in
/// transform space.
pub fn spectral_gradient(field: &Field) -> VecField {
    let grid = field.grid;
    let n = grid.n;
    let fft = Fft3::cached(n);
    let mut spectrum = field.to_complex();
    fft.forward(&mut spectrum);
    let k = grid.derivative_wavenumbers();

    // Components 1 and 2 share one inverse transform (real and imaginary
    // parts), component 3 takes the next.
    let mut packed = vec![Complex64::default(); spectrum.len()];
    let mut third = vec![Complex64::default(); spectrum.len()];
    for (idx, s) in spectrum.iter().enumerate() {
        let [a, b, c] = grid.unravel(idx);
        let d1 = Complex64::new(0.0, k[a]) * s;
        let d2 = Complex64::new(0.0, k[b]) * s;
        packed[idx] = d1 + Complex64::new(0.0, 1.0) * d2;
        third[idx] = Complex64::new(0.0, k[c]) * s;
    }
    fft.inverse(&mut packed);
    fft.inverse(&mut third);
    let g1 = packed.iter().map(|z| z.re).collect();
    let g2 = packed.iter().map(|z| z.im).collect();
    let g3 = third.iter().map(|z| z.re).collect();
    VecField {
        components: [
            Field { grid, values: g1 },
            Field { grid, values: g2 },
            Field { grid, values: g3 },
        ],
    }
}

/// Second-order central differences with periodic wrap.
pub fn finite_difference_gradient(field: &Field) -> VecField {
    let grid = field.grid;
    let n = grid.n;
    let inv = 1.0 / (2.0 * grid.spacing);
    let f = &field.values;
    let mut out = [
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
    ];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx = grid.index(i, j, k);
                let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
                let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
                let (kp, km) = ((k + 1) % n, (k + n - 1) % n);
                out[0][idx] = (f[grid.index(ip, j, k)] - f[grid.index(im, j, k)]) * inv;
                out[1][idx] = (f[grid.index(i, jp, k)] - f[grid.index(i, jm, k)]) * inv;
                out[2][idx] = (f[grid.index(i, j, kp)] - f[grid.index(i, j, km)]) * inv;
            }
        }
    }
    let [a, b, c] = out;
    VecField {
        components: [
            Field { grid, values: a },
            Field { grid, values: b },
            Field { grid, values: c },
        ],
    }
}

/// Japanese bracket `⟨v⟩ = (1 + |v|²)^{1/2}`.
#[inline]
pub fn bracket(v: [f64; 3]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// The normalized Maxwellian `(2π)^{-3/2} e^{-|v|²/2}` sampled on `grid`.
pub fn maxwellian(grid: Grid) -> Field {
    let c = (2.0 * PI).powf(-1.5);
    Field::from_fn(grid, |v| c * (-0.5 * norm_sq(v)).exp())
}
