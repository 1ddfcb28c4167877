//! Periodic grids, the discrete Fourier transform and field arithmetic.
//!
//! A [`Grid`] discretizes the torus `[0, L)^n` with `N` points per axis.
//! Sample points are `x_k = k L / N` and the integer frequencies
//! `k ∈ [-N/2, N/2)^n` correspond to the physical frequencies `ξ_k = 2πk/L`.
//!
//! Spectral coefficients follow the convention
//!
//! ```text
//! f̂_k = (L/N)^n Σ_x f(x) e^{-i ξ_k·x},      f(x) = L^{-n} Σ_k f̂_k e^{i ξ_k·x}
//! ```
//!
//! so that a constant `c` has `f̂_0 = c Lⁿ` and Parseval reads
//! `(L/N)ⁿ Σ|f|² = L⁻ⁿ Σ|f̂|²`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Largest points-per-axis accepted for one-dimensional grids.
pub const MAX_POINTS_1D: usize = 4096;
/// Largest points-per-axis accepted for two-dimensional grids.
pub const MAX_POINTS_2D: usize = 256;
/// Side of the default torus.
pub const DEFAULT_SIDE: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    points: usize,
    side: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, side: f64) -> Result<Self, GridError> {
        let grid = Self::unchecked_size(dim, points, side)?;
        let cap = if dim == 1 { MAX_POINTS_1D } else { MAX_POINTS_2D };
        if points > cap {
            return Err(GridError::TooLarge { dim, points, cap });
        }
        Ok(grid)
    }

    /// One-dimensional grid on the default torus of side 16.
    pub fn line(points: usize) -> Result<Self, GridError> {
        Self::new(1, points, DEFAULT_SIDE)
    }

    // Padded grids may exceed the interactive caps.
    fn unchecked_size(dim: usize, points: usize, side: f64) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::Dimension(dim));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(GridError::PointsPerAxis(points));
        }
        if !(side > 2.0) || !side.is_finite() {
            return Err(GridError::BoxSide(side));
        }
        Ok(Self { dim, points, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Grid spacing `L/N`.
    pub fn spacing(&self) -> f64 {
        self.side / self.points as f64
    }

    /// Total number of samples `Nⁿ`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one cell, `(L/N)ⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume of the torus, `Lⁿ`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// Largest physical frequency magnitude present on the grid.
    pub fn max_frequency(&self) -> f64 {
        let nyquist = PI * self.points as f64 / self.side;
        nyquist * (self.dim as f64).sqrt()
    }

    /// Same torus with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self, GridError> {
        if factor < 2 {
            return Err(GridError::PadFactor(factor));
        }
        Self::unchecked_size(self.dim, self.points * factor, self.side)
    }

    /// Integer frequency of FFT-ordered index `i` along one axis.
    pub fn axis_frequency(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    fn axis_slot(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// Integer frequency vector of a flat FFT-ordered index (row-major).
    pub fn integer_frequency(&self, index: usize) -> [i64; 2] {
        if self.dim == 1 {
            [self.axis_frequency(index), 0]
        } else {
            let (i0, i1) = (index / self.points, index % self.points);
            [self.axis_frequency(i0), self.axis_frequency(i1)]
        }
    }

    /// Flat index of an integer frequency vector (components taken modulo N).
    pub fn frequency_index(&self, k: [i64; 2]) -> usize {
        if self.dim == 1 {
            self.axis_slot(k[0])
        } else {
            self.axis_slot(k[0]) * self.points + self.axis_slot(k[1])
        }
    }

    /// Physical frequency vector `ξ = 2πk/L` of a flat index; the second
    /// component is zero in one dimension.
    pub fn wavevector(&self, index: usize) -> [f64; 2] {
        let k = self.integer_frequency(index);
        let scale = 2.0 * PI / self.side;
        [k[0] as f64 * scale, k[1] as f64 * scale]
    }

    /// `|ξ|` for every flat spectral index.
    pub fn frequency_magnitudes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let xi = self.wavevector(i);
                (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
            })
            .collect()
    }

    /// Physical coordinates of a flat sample index.
    pub fn point(&self, index: usize) -> [f64; 2] {
        let h = self.spacing();
        if self.dim == 1 {
            [index as f64 * h, 0.0]
        } else {
            [(index / self.points) as f64 * h, (index % self.points) as f64 * h]
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} N={} L={}", self.dim, self.points, self.side)
    }
}

/// Samples of a function on a [`Grid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Fourier coefficients of a field, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn from_real(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// The pure mode `e^{i ξ_k·x}`.
    pub fn mode(grid: Grid, k: [i64; 2]) -> Self {
        let scale = 2.0 * PI / grid.side();
        Self::from_fn(grid, |x| {
            let phase = scale * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
            Complex64::from_polar(1.0, phase)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product on the grid (aliased; see [`dealiased_product`]).
    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    fn zip(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "field arithmetic across different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        Self { grid: self.grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> Complex64 {
        integrate(self) / self.grid.volume()
    }

    pub fn to_json(&self) -> String {
        let doc = FieldDocument {
            n: self.grid.dim,
            points: self.grid.points,
            side: self.grid.side,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        };
        serde_json::to_string(&doc).expect("field serialization")
    }

    /// Parses the field document `{"n", "N", "L", "values": [[re, im], …]}`.
    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let doc: FieldDocument = serde_json::from_str(text)?;
        let grid = Grid::new(doc.n, doc.points, doc.side)?;
        let values = doc.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Self::new(grid, values)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDocument {
    n: usize,
    #[serde(rename = "N")]
    points: usize,
    #[serde(rename = "L")]
    side: f64,
    values: Vec<[f64; 2]>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self, GridError> {
        if coeffs.len() != grid.len() {
            return Err(GridError::LengthMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at an integer frequency vector.
    pub fn at(&self, k: [i64; 2]) -> Complex64 {
        self.coeffs[self.grid.frequency_index(k)]
    }

    /// Multiplies every coefficient by `symbol(index)`.
    pub fn apply(&self, symbol: impl Fn(usize) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| c * symbol(i)).collect();
        Self { grid: self.grid, coeffs }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.grid, other.grid, "spectral arithmetic across different grids");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// Keeps the frequencies of a coarser grid on the same torus.
    pub fn truncate(&self, target: Grid) -> Self {
        assert_eq!(self.grid.dim, target.dim);
        assert!(target.points <= self.grid.points);
        let coeffs = (0..target.len())
            .map(|i| self.coeffs[self.grid.frequency_index(target.integer_frequency(i))])
            .collect();
        Self { grid: target, coeffs }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

// Unnormalized in-place transform along every axis.
fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points;
    let fft = plan(n, inverse);
    fft.process(data);
    if grid.dim == 2 {
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            fft.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }
}

/// Forward transform with coefficients `f̂_k = (L/N)ⁿ Σ f(x) e^{-iξ_k·x}`.
pub fn dft(f: &SampledField) -> SpectralField {
    let mut coeffs = f.values.clone();
    transform(&f.grid, &mut coeffs, false);
    let w = f.grid.cell_volume();
    coeffs.iter_mut().for_each(|c| *c *= w);
    SpectralField { grid: f.grid, coeffs }
}

/// Inverse of [`dft`]: `f(x) = L⁻ⁿ Σ_k f̂_k e^{iξ_k·x}`.
pub fn idft(spec: &SpectralField) -> SampledField {
    let mut values = spec.coeffs.clone();
    transform(&spec.grid, &mut values, true);
    let w = 1.0 / spec.grid.volume();
    values.iter_mut().for_each(|v| *v *= w);
    SampledField { grid: spec.grid, values }
}

/// Rectangle-rule integral `(L/N)ⁿ Σ f`, exact for trigonometric polynomials
/// resolved by the grid.
pub fn integrate(f: &SampledField) -> Complex64 {
    f.values.iter().sum::<Complex64>() * f.grid.cell_volume()
}

/// Embeds the coefficients in a grid with `factor` times as many points per
/// axis; new frequencies are zero.
pub fn zero_pad(spec: &SpectralField, factor: usize) -> Result<SpectralField, GridError> {
    let fine = spec.grid.refined(factor)?;
    let mut out = SpectralField::zeros(fine);
    for (i, &c) in spec.coeffs.iter().enumerate() {
        out.coeffs[fine.frequency_index(spec.grid.integer_frequency(i))] = c;
    }
    Ok(out)
}

/// Pads two spectra by 2, multiplies on the fine grid and returns the
/// spectrum of the product on the fine grid. The fine grid holds every sum
/// frequency `k + l`, so nothing aliases.
pub(crate) fn padded_product_spectrum(a: &SpectralField, b: &SpectralField) -> SpectralField {
    assert_eq!(a.grid, b.grid, "product across different grids");
    let fa = idft(&zero_pad(a, 2).expect("factor 2"));
    let fb = idft(&zero_pad(b, 2).expect("factor 2"));
    dft(&fa.mul(&fb))
}

/// Alias-free product: the exact spectral convolution of `f` and `g`,
/// projected onto the frequencies of their grid. Equals `f·g` pointwise when
/// both inputs are band-limited to `|k| < N/4`.
pub fn dealiased_product(f: &SampledField, g: &SampledField) -> SampledField {
    let prod = padded_product_spectrum(&dft(f), &dft(g));
    idft(&prod.truncate(f.grid))
}
