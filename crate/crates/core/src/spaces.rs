//! Function-space norms on the periodic grid: Lᵖ, local and global Hardy
//! (non-tangential maximal function), bmo / BMO over dyadic cubes, X_w,
//! potential spaces J_w(X), refined Sobolev and Triebel–Lizorkin.

use std::collections::VecDeque;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{dft, idft, integrate, Grid, SampledField};
use crate::multipliers::{apply_radial, LPFamily};
use crate::tgrid::TimeGrid;
use crate::weights::{make_log_weight, RegularizedWeight, ResolutionOfUnity};

pub fn lp_norm(f: &SampledField, p: f64) -> f64 {
    assert!(p >= 1.0, "Lp norm needs p >= 1, got {p}");
    if p.is_infinite() {
        return f.max_abs();
    }
    let h = f.grid().cell_volume();
    let sum: f64 = if p == 2.0 {
        f.values().iter().map(|v| v.norm_sqr()).sum()
    } else if p == 1.0 {
        f.values().iter().map(|v| v.norm()).sum()
    } else {
        f.values().iter().map(|v| v.norm().powf(p)).sum()
    };
    (sum * h).powf(1.0 / p)
}

// ---------------------------------------------------------------------------
// dyadic cubes

/// Axis-parallel cube `origin + [0, side_cells)ⁿ` in grid cells, wrapping
/// around the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cube {
    pub origin: [usize; 2],
    pub side_cells: usize,
}

impl Cube {
    pub fn side(&self, grid: &Grid) -> f64 {
        self.side_cells as f64 * grid.spacing()
    }

    pub fn volume(&self, grid: &Grid) -> f64 {
        self.side(grid).powi(grid.dim() as i32)
    }

    /// Flat sample indices covered by the cube.
    pub fn indices(&self, grid: &Grid) -> Vec<usize> {
        let n = grid.points();
        let axis = |o: usize| (0..self.side_cells).map(move |i| (o + i) % n);
        if grid.dim() == 1 {
            axis(self.origin[0]).collect()
        } else {
            axis(self.origin[0]).flat_map(|r| axis(self.origin[1]).map(move |c| r * n + c)).collect()
        }
    }

    pub fn contains(&self, grid: &Grid, index: usize) -> bool {
        let n = grid.points();
        let inside = |o: usize, i: usize| (i + n - o) % n < self.side_cells;
        if grid.dim() == 1 {
            inside(self.origin[0], index)
        } else {
            inside(self.origin[0], index / n) && inside(self.origin[1], index % n)
        }
    }
}

/// Dyadic cubes of side `L·2⁻ᵍ` (at least two cells) plus copies shifted by
/// half a side along each axis.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicCubeSet {
    grid: Grid,
    cubes: Vec<Cube>,
}

impl DyadicCubeSet {
    pub fn new(grid: &Grid) -> Self {
        Self::with_min_side(grid, 2)
    }

    /// Same family down to cubes of `min_cells` cells per side; single
    /// cells have no shifted copies.
    pub fn with_min_side(grid: &Grid, min_cells: usize) -> Self {
        let n = grid.points();
        let mut cubes = Vec::new();
        let mut side = n;
        while side >= min_cells.max(1) {
            let count = n / side;
            let half = side / 2;
            let shifts: &[[usize; 2]] = if side == n || side == 1 {
                &[[0, 0]]
            } else if grid.dim() == 1 {
                &[[0, 0], [1, 0]]
            } else {
                &[[0, 0], [1, 0], [0, 1], [1, 1]]
            };
            for s in shifts {
                for a in 0..count {
                    let rows = if grid.dim() == 1 { 1 } else { count };
                    for b in 0..rows {
                        cubes.push(Cube { origin: [a * side + s[0] * half, b * side + s[1] * half], side_cells: side });
                    }
                }
            }
            side /= 2;
        }
        Self { grid: *grid, cubes }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn generations(&self) -> usize {
        self.grid.points().trailing_zeros() as usize
    }
}

/// Mean oscillation `|Q|⁻¹ ∫_Q |f − f_Q|` and mean size `|Q|⁻¹ ∫_Q |f|`.
fn cube_stats(f: &SampledField, cube: &Cube) -> (f64, f64) {
    let idx = cube.indices(f.grid());
    let vals = f.values();
    let count = idx.len() as f64;
    let mean: Complex64 = idx.iter().map(|&i| vals[i]).sum::<Complex64>() / count;
    let osc = idx.iter().map(|&i| (vals[i] - mean).norm()).sum::<f64>() / count;
    let size = idx.iter().map(|&i| vals[i].norm()).sum::<f64>() / count;
    (osc, size)
}

/// Largest value of `stat` over cubes selected by `keep`, with its cube.
fn cube_sup(
    f: &SampledField,
    cubes: &DyadicCubeSet,
    keep: impl Fn(&Cube) -> bool + Sync,
    stat: impl Fn((f64, f64)) -> f64 + Sync,
) -> Option<(f64, Cube)> {
    cubes
        .cubes()
        .par_iter()
        .filter(|c| keep(c))
        .map(|c| (stat(cube_stats(f, c)), *c))
        // ties resolve to the first cube in enumeration order
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && cube_key(&b.1) < cube_key(&a.1)) { b } else { a })
}

fn cube_key(c: &Cube) -> (std::cmp::Reverse<usize>, [usize; 2]) {
    (std::cmp::Reverse(c.side_cells), c.origin)
}

/// `sup_Q |Q|⁻¹∫_Q |f − f_Q|` over all dyadic and shifted cubes, with the
/// maximizing cube.
pub fn bmo_global_with_witness(f: &SampledField) -> (f64, Cube) {
    let cubes = DyadicCubeSet::new(f.grid());
    cube_sup(f, &cubes, |_| true, |s| s.0).expect("cube set is never empty")
}

#[allow(non_snake_case)]
pub fn BMO_norm(f: &SampledField) -> f64 {
    bmo_global_with_witness(f).0
}

/// Local bmo: mean oscillation over cubes of side < 1 plus mean size over
/// cubes of side ≥ 1.
pub fn bmo_norm(f: &SampledField) -> f64 {
    let grid = *f.grid();
    let cubes = DyadicCubeSet::new(&grid);
    let small = cube_sup(f, &cubes, |c| c.side(&grid) < 1.0, |s| s.0).map_or(0.0, |v| v.0);
    let large = cube_sup(f, &cubes, |c| c.side(&grid) >= 1.0, |s| s.1).map_or(0.0, |v| v.0);
    small + large
}

/// `BMO` restricted to cubes of side < 1 (the first term of `bmo`).
pub fn small_cube_oscillation(f: &SampledField) -> f64 {
    let grid = *f.grid();
    let cubes = DyadicCubeSet::new(&grid);
    cube_sup(f, &cubes, |c| c.side(&grid) < 1.0, |s| s.0).map_or(0.0, |v| v.0)
}

// ---------------------------------------------------------------------------
// maximal functions

/// Periodic running maximum over windows `[i−w, i+w]`.
fn sliding_max(values: &[f64], w: usize) -> Vec<f64> {
    let n = values.len();
    if 2 * w + 1 >= n {
        let m = values.iter().copied().fold(0.0, f64::max);
        return vec![m; n];
    }
    if w == 0 {
        return values.to_vec();
    }
    let mut out = vec![0.0; n];
    let mut deque: VecDeque<usize> = VecDeque::new();
    // extended index e ∈ [0, n + 2w), value values[(e + n − w) mod n]
    let at = |e: usize| values[(e + n - w) % n];
    for e in 0..n + 2 * w {
        while let Some(&back) = deque.back() {
            if at(back) <= at(e) {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(e);
        if e >= 2 * w {
            let start = e - 2 * w;
            while deque.front().is_some_and(|&fr| fr < start) {
                deque.pop_front();
            }
            out[start] = at(*deque.front().expect("nonempty window"));
        }
    }
    out
}

pub(crate) fn sliding_max_field(grid: &Grid, values: &[f64], w: usize) -> Vec<f64> {
    if grid.dim() == 1 {
        return sliding_max(values, w);
    }
    let n = grid.points();
    let mut rows = vec![0.0; values.len()];
    for r in 0..n {
        rows[r * n..(r + 1) * n].copy_from_slice(&sliding_max(&values[r * n..(r + 1) * n], w));
    }
    let mut out = vec![0.0; values.len()];
    let mut column = vec![0.0; n];
    for c in 0..n {
        for r in 0..n {
            column[r] = rows[r * n + c];
        }
        let m = sliding_max(&column, w);
        for r in 0..n {
            out[r * n + c] = m[r];
        }
    }
    out
}

/// Window half-width (cells) for the cone `|x − y| < t`: an interval in one
/// dimension, the inscribed square of half-side `t/√2` in two.
pub(crate) fn cone_half_width(grid: &Grid, t: f64) -> usize {
    let reach = if grid.dim() == 1 { t } else { t / std::f64::consts::SQRT_2 };
    let cells = (reach / grid.spacing()).ceil() as usize;
    cells.saturating_sub(1)
}

/// Non-tangential maximal function `sup_t sup_{|x−y|<t} |(Φ_t ∗ f)(y)|` over
/// the given scales, with `Φ̂ = φ₀`.
pub fn nontangential_maximal(f: &SampledField, scales: &TimeGrid) -> Vec<f64> {
    let grid = *f.grid();
    let spec = dft(f);
    let mags = grid.frequency_magnitudes();
    let res = ResolutionOfUnity;
    scales
        .nodes()
        .par_iter()
        .map(|&t| {
            let u = idft(&spec.apply(|i| res.phi0(t * mags[i])));
            let abs: Vec<f64> = u.values().iter().map(|v| v.norm()).collect();
            sliding_max_field(&grid, &abs, cone_half_width(&grid, t))
        })
        .reduce_with(|a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
        .unwrap_or_else(|| vec![0.0; grid.len()])
}

fn integrate_real(grid: &Grid, v: &[f64]) -> f64 {
    v.iter().sum::<f64>() * grid.cell_volume()
}

/// Local Hardy norm: scales `t < 1/2`.
pub fn h1_norm(f: &SampledField, tgrid: &TimeGrid) -> f64 {
    match tgrid.below(0.5, false) {
        Some(scales) => integrate_real(f.grid(), &nontangential_maximal(f, &scales)),
        None => 0.0,
    }
}

/// Relative mean size above which an H¹ input is reported as not mean-zero.
const MEAN_ZERO_TOLERANCE: f64 = 1e-8;

/// Hardy norm: scales `t ≤ L/2`; inputs should have zero mean.
#[allow(non_snake_case)]
pub fn H1_norm(f: &SampledField, tgrid: &TimeGrid) -> f64 {
    let total = integrate(f).norm();
    let scale = lp_norm(f, 1.0);
    if total > MEAN_ZERO_TOLERANCE * scale {
        warn!("H1 norm of a field with nonzero integral {total:e}");
    }
    match tgrid.below(f.grid().side() / 2.0, true) {
        Some(scales) => integrate_real(f.grid(), &nontangential_maximal(f, &scales)),
        None => 0.0,
    }
}

// ---------------------------------------------------------------------------
// weighted spaces

/// Decomposition of the X_w norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XwParts {
    pub bmo: f64,
    /// `max_t ‖P_t f‖_∞ / w(t)`.
    pub low_pass: f64,
    /// Scale attaining the low-pass maximum.
    pub argmax_t: f64,
    /// Largest scale sampled (the torus caps `t`).
    pub t_cap: f64,
}

impl XwParts {
    pub fn total(&self) -> f64 {
        self.bmo + self.low_pass
    }
}

pub fn xw_parts(f: &SampledField, rw: &RegularizedWeight, fam: &LPFamily, tgrid: &TimeGrid) -> XwParts {
    let grid = *f.grid();
    let spec = dft(f);
    let mags = grid.frequency_magnitudes();
    let (low_pass, argmax_t) = tgrid
        .nodes()
        .par_iter()
        .map(|&t| {
            let u = idft(&spec.apply(|i| fam.phi(t * mags[i])));
            (u.max_abs() / rw.source().eval(t), t)
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 > a.1) { b } else { a })
        .expect("time grid is never empty");
    XwParts { bmo: BMO_norm(f), low_pass, argmax_t, t_cap: tgrid.t_max() }
}

/// `‖f‖_{X_w} = ‖f‖_BMO + sup_t ‖P_t f‖_∞ / w(t)`.
pub fn xw_norm(f: &SampledField, rw: &RegularizedWeight, fam: &LPFamily, tgrid: &TimeGrid) -> f64 {
    xw_parts(f, rw, fam, tgrid).total()
}

/// Target space of a potential-space norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetSpace {
    Lp(f64),
    Hardy(TimeGrid),
    Bmo,
}

impl TargetSpace {
    pub fn norm(&self, f: &SampledField) -> f64 {
        match self {
            TargetSpace::Lp(p) => lp_norm(f, *p),
            TargetSpace::Hardy(tg) => H1_norm(f, tg),
            TargetSpace::Bmo => BMO_norm(f),
        }
    }
}

/// `‖f‖_{J_w(X)} = ‖w(D)⁻¹ f‖_X`.
pub fn jw_norm(f: &SampledField, rw: &RegularizedWeight, space: &TargetSpace) -> f64 {
    space.norm(&crate::multipliers::j_w_inv(rw, f))
}

/// `(L⁻ⁿ Σ_k |w_b(1/⟨ξ_k⟩) f̂_k|²)^{1/2}`.
pub fn refined_sobolev_norm(f: &SampledField, b: f64) -> f64 {
    let w = make_log_weight(b);
    let spec = dft(f);
    let mags = f.grid().frequency_magnitudes();
    let sum: f64 = spec
        .coeffs()
        .iter()
        .zip(&mags)
        .map(|(c, &r)| (w.eval(1.0 / (1.0 + r * r).sqrt()) * c.norm()).powi(2))
        .sum();
    (sum / f.grid().volume()).sqrt()
}

/// `‖(Σ_j w(2⁻ʲ)⁻² |φ_j(D)f|²)^{1/2}‖_p`.
pub fn triebel_norm(f: &SampledField, rw: &RegularizedWeight, p: f64) -> f64 {
    assert!(p > 1.0 && p.is_finite(), "Triebel–Lizorkin norm needs 1 < p < ∞");
    let grid = *f.grid();
    let spec = dft(f);
    let mags = grid.frequency_magnitudes();
    let res = rw.resolution();
    let depth = res.depth_for(grid.max_frequency());
    let squares = (0..=depth)
        .into_par_iter()
        .map(|j| {
            let band = idft(&spec.apply(|i| res.phi(j, mags[i])));
            let w = rw.source().eval(2f64.powi(-(j as i32)));
            band.values().iter().map(|v| v.norm_sqr() / (w * w)).collect::<Vec<f64>>()
        })
        .reduce_with(|a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
        .expect("at least one band");
    let values: Vec<Complex64> = squares.iter().map(|s| Complex64::new(s.sqrt(), 0.0)).collect();
    let field = SampledField::new(grid, values).expect("finite square function");
    lp_norm(&field, p)
}

/// Φ_t ∗ f with `Φ̂ = φ₀`, the mollification used by the Hardy norms.
pub fn mollify(f: &SampledField, t: f64) -> SampledField {
    let res = ResolutionOfUnity;
    apply_radial(f, |r| res.phi0(t * r))
}
