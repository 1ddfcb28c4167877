//! Linear Fourier multipliers, the Littlewood–Paley family, bilinear
//! Coifman–Meyer symbols and their evaluation on the grid.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SymbolError;
use crate::fd;
use crate::grid::{dft, idft, padded_product_spectrum, SampledField, SpectralField};
use crate::smooth::{plateau, ramp, smoothstep};
use crate::tgrid::TimeGrid;
use crate::weights::{multi_indices, RegularizedWeight};

// ---------------------------------------------------------------------------
// linear multipliers

/// `a(D)f` for a symbol given on the physical frequency vector.
pub fn apply_linear(f: &SampledField, a: impl Fn([f64; 2]) -> f64) -> SampledField {
    let grid = *f.grid();
    idft(&dft(f).apply(|i| a(grid.wavevector(i))))
}

/// `a(|D|)f` for a radial symbol.
pub fn apply_radial(f: &SampledField, a: impl Fn(f64) -> f64) -> SampledField {
    let mags = f.grid().frequency_magnitudes();
    idft(&dft(f).apply(|i| a(mags[i])))
}

pub(crate) fn radial_spectrum(spec: &SpectralField, mags: &[f64], a: impl Fn(f64) -> f64) -> SpectralField {
    spec.apply(|i| a(mags[i]))
}

/// Bessel potential `Jˢ = ⟨D⟩ˢ`.
pub fn bessel(s: f64, f: &SampledField) -> SampledField {
    idft(&bessel_spectrum(s, &dft(f)))
}

/// `Jˢ` on coefficients. Composing powers here avoids the round-off of an
/// intermediate transform, which `⟨ξ⟩^{|s|}` amplifies at high frequency.
pub fn bessel_spectrum(s: f64, spec: &SpectralField) -> SpectralField {
    radial_spectrum(spec, &spec.grid().frequency_magnitudes(), |r| (1.0 + r * r).powf(s / 2.0))
}

/// `J_w = w(D)`.
pub fn j_w(rw: &RegularizedWeight, f: &SampledField) -> SampledField {
    apply_radial(f, |r| rw.eval(r))
}

/// `J_{w⁻¹} = w(D)⁻¹`.
pub fn j_w_inv(rw: &RegularizedWeight, f: &SampledField) -> SampledField {
    apply_radial(f, |r| 1.0 / rw.eval(r))
}

// ---------------------------------------------------------------------------
// Littlewood–Paley family

/// The six radial profiles of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Band-pass `ψ̂`, supported in `[4/5, 6/5]`.
    Psi,
    /// Low-pass `φ̂`, ≡ 1 on `[0, 6/5]`.
    Phi,
    /// `ψ̂⁽¹⁾ = φ̂ − φ̂⁽¹⁾`.
    Psi1,
    /// Low-pass `φ̂⁽¹⁾`, supported in `[0, r/2]`.
    Phi1,
    /// Band-pass `ψ̂⁽²⁾`, ≡ 1 on `[r/2, 3R/2]`.
    Psi2,
    /// Low-pass `φ̂⁽²⁾`, ≡ 1 on `[0, 3]`.
    Phi2,
}

impl Profile {
    /// Closed interval of `|ξ|` outside which the profile vanishes.
    pub fn support(self) -> (f64, f64) {
        match self {
            Profile::Psi => (LPFamily::R_INNER, LPFamily::R_OUTER),
            Profile::Phi => (0.0, 1.5 * LPFamily::R_OUTER),
            Profile::Psi1 => (LPFamily::R_INNER / 3.0, 1.5 * LPFamily::R_OUTER),
            Profile::Phi1 => (0.0, LPFamily::R_INNER / 2.0),
            Profile::Psi2 => (LPFamily::R_INNER / 4.0, 2.0 * LPFamily::R_OUTER),
            Profile::Phi2 => (0.0, 4.0),
        }
    }
}

// Log-step of the telescoped band-pass profile; the discrete Calderón sum is
// exact for any density that is a multiple of 8 nodes per octave.
const PSI_STEP: f64 = LN_2 / 8.0;

/// Radial Littlewood–Paley profiles with `r = 4/5`, `R = 6/5`.
///
/// `ψ̂(s)² = (G(ln s) − G(ln s − δ)) / (δ c)` with a smooth step `G` rising
/// across the ring, so log-grid sums of `ψ̂²` telescope to exactly one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LPFamily {
    psi_norm: f64,
}

impl Default for LPFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl LPFamily {
    pub const R_INNER: f64 = 0.8;
    pub const R_OUTER: f64 = 1.2;

    pub fn new() -> Self {
        let raw = Self { psi_norm: 1.0 };
        // fine log quadrature of ∫ ψ̂(s)² ds/s
        let c = raw.psi_log_quadrature(4096);
        Self { psi_norm: c }
    }

    fn psi_squared(&self, s: f64) -> f64 {
        if s <= Self::R_INNER || s >= Self::R_OUTER {
            return 0.0;
        }
        let a = Self::R_INNER.ln();
        let b = Self::R_OUTER.ln() - PSI_STEP;
        let g = |v: f64| smoothstep((v - a) / (b - a));
        let v = s.ln();
        ((g(v) - g(v - PSI_STEP)) / PSI_STEP).max(0.0) / self.psi_norm
    }

    pub fn psi(&self, s: f64) -> f64 {
        self.psi_squared(s).sqrt()
    }

    pub fn phi(&self, s: f64) -> f64 {
        plateau(s, Self::R_OUTER, 1.5 * Self::R_OUTER)
    }

    pub fn phi1(&self, s: f64) -> f64 {
        plateau(s, Self::R_INNER / 3.0, Self::R_INNER / 2.0)
    }

    pub fn psi1(&self, s: f64) -> f64 {
        self.phi(s) - self.phi1(s)
    }

    pub fn psi2(&self, s: f64) -> f64 {
        ramp(s, Self::R_INNER / 4.0, Self::R_INNER / 2.0)
            * plateau(s, 1.5 * Self::R_OUTER, 2.0 * Self::R_OUTER)
    }

    pub fn phi2(&self, s: f64) -> f64 {
        plateau(s, 3.0, 4.0)
    }

    pub fn eval(&self, p: Profile, s: f64) -> f64 {
        match p {
            Profile::Psi => self.psi(s),
            Profile::Phi => self.phi(s),
            Profile::Psi1 => self.psi1(s),
            Profile::Phi1 => self.phi1(s),
            Profile::Psi2 => self.psi2(s),
            Profile::Phi2 => self.phi2(s),
        }
    }

    /// Log-spaced quadrature of `∫₀^∞ |ψ̂(s)|² ds/s` with the given number of
    /// nodes per octave.
    pub fn psi_log_quadrature(&self, points_per_octave: u32) -> f64 {
        let step = LN_2 / points_per_octave as f64;
        let lo = (Self::R_INNER.ln() / step).floor() as i64 - 1;
        let hi = (Self::R_OUTER.ln() / step).ceil() as i64 + 1;
        (lo..=hi).map(|k| self.psi_squared((k as f64 * step).exp())).sum::<f64>() * step
    }

    /// Discrete Calderón sum `Σ_j ψ̂(t_j ξ)² Δ` at `|ξ| = r`.
    pub fn calderon_sum(&self, r: f64, tgrid: &TimeGrid) -> f64 {
        tgrid.nodes().iter().map(|&t| self.psi_squared(t * r)).sum::<f64>() * tgrid.delta()
    }

    /// Quadrature-weighted sum `Σ_j ψ̂(t_j ξ) m(t_j) Δ` at `|ξ| = r`.
    pub fn band_sum(&self, r: f64, tgrid: &TimeGrid, m: impl Fn(f64) -> f64) -> f64 {
        tgrid.nodes().iter().map(|&t| self.psi(t * r) * m(t)).sum::<f64>() * tgrid.delta()
    }
}

/// `a(tD)f` for one of the family's profiles.
pub fn band(fam: &LPFamily, p: Profile, t: f64, f: &SampledField) -> SampledField {
    apply_radial(f, |r| fam.eval(p, t * r))
}

/// `Q_t f = ψ̂(tD)f`.
pub fn q_t(fam: &LPFamily, t: f64, f: &SampledField) -> SampledField {
    assert!(t > 0.0);
    band(fam, Profile::Psi, t, f)
}

/// `P_t f = φ̂(tD)f`.
pub fn p_t(fam: &LPFamily, t: f64, f: &SampledField) -> SampledField {
    assert!(t > 0.0);
    band(fam, Profile::Phi, t, f)
}

// ---------------------------------------------------------------------------
// bilinear symbols

type Eval = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
type Factor = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Where a symbol is allowed to be nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SupportRegion {
    Everywhere,
    /// `|ξ| ≥ |η|/20`.
    AwayFromEtaAxis,
    /// `|ξ| ≤ |η|/10`.
    NearEtaAxis,
}

/// A bilinear symbol `σ(ξ, η)`. The value at the origin is a declared
/// convention: 0 unless the symbol is marked continuous there, in which case
/// it is the limit along `ξ = η`.
#[derive(Clone)]
pub struct BilinearSymbol {
    name: String,
    eval: Eval,
    factors: Option<(Factor, Factor)>,
    support: SupportRegion,
    origin: f64,
}

impl fmt::Debug for BilinearSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BilinearSymbol")
            .field("name", &self.name)
            .field("separable", &self.factors.is_some())
            .field("support", &self.support)
            .finish()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn bracket(v: &[f64]) -> f64 {
    (1.0 + v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Names accepted by [`BilinearSymbol::builtin`].
pub const BUILTIN_SYMBOLS: [&str; 4] = ["one", "riesz-ratio", "kato-ponce-b1", "degree-one"];

/// Smoothness exponent of the Kato–Ponce builtin.
pub const KATO_PONCE_S: f64 = 6.0;

impl BilinearSymbol {
    pub fn new(name: &str, eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            eval: Arc::new(eval),
            factors: None,
            support: SupportRegion::Everywhere,
            origin: 0.0,
        }
    }

    /// Declares `σ` continuous at the origin: `σ(0,0)` becomes the limit
    /// along the diagonal `ξ = η`.
    pub fn continuous_at_origin(mut self) -> Self {
        let eps = [1e-9, 1e-9];
        self.origin = (self.eval)(&eps, &eps);
        self
    }

    pub fn origin_value(&self) -> f64 {
        self.origin
    }

    /// `σ(ξ, η) = a(ξ) b(η)`, evaluated on the grid as `(a(D)f)(b(D)g)`.
    pub fn separable(
        name: &str,
        a: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        b: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let a: Factor = Arc::new(a);
        let b: Factor = Arc::new(b);
        let (ea, eb) = (a.clone(), b.clone());
        Self {
            name: name.to_string(),
            eval: Arc::new(move |x, y| ea(x) * eb(y)),
            factors: Some((a, b)),
            support: SupportRegion::Everywhere,
            origin: 0.0,
        }
    }

    /// Built-in symbols:
    /// - `one`: `σ ≡ 1`;
    /// - `riesz-ratio`: `⟨ξ⟩ / (⟨ξ⟩ + ⟨η⟩)`;
    /// - `kato-ponce-b1`: `(⟨ξ+η⟩/⟨ξ⟩)^6 χ(|η|/⟨ξ⟩)` with `χ` = 1 below 1/4
    ///   and 0 above 1/2 (the high–low piece of `J⁶(fg)`);
    /// - `degree-one`: `|ξ|`, homogeneous of degree one and not Coifman–Meyer.
    pub fn builtin(name: &str) -> Result<Self, SymbolError> {
        match name {
            "one" => Ok(Self::separable("one", |_| 1.0, |_| 1.0).continuous_at_origin()),
            "riesz-ratio" => Ok(Self::new("riesz-ratio", |x, y| {
                let (a, b) = (bracket(x), bracket(y));
                a / (a + b)
            })
            .continuous_at_origin()),
            "kato-ponce-b1" => Ok(Self::new("kato-ponce-b1", |x, y| {
                let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                let bx = bracket(x);
                (bracket(&sum) / bx).powf(KATO_PONCE_S) * plateau(norm(y) / bx, 0.25, 0.5)
            })
            .continuous_at_origin()),
            "degree-one" => Ok(Self::separable("degree-one", norm, |_| 1.0)),
            other => Err(SymbolError::Unknown(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> SupportRegion {
        self.support
    }

    pub fn is_separable(&self) -> bool {
        self.factors.is_some()
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> f64 {
        if xi.iter().chain(eta).all(|&v| v == 0.0) {
            return self.origin;
        }
        (self.eval)(xi, eta)
    }

    // Raw evaluator without the origin convention (used for differencing).
    fn raw(&self, xi: &[f64], eta: &[f64]) -> f64 {
        (self.eval)(xi, eta)
    }
}

/// `T_σ(f, g)` with output frequencies `ξ+η` computed without aliasing and
/// projected onto the grid: `(T)^_m = L⁻ⁿ Σ_k σ(ξ_k, ξ_{m−k}) f̂_k ĝ_{m−k}`.
pub fn apply_bilinear(sigma: &BilinearSymbol, f: &SampledField, g: &SampledField) -> SampledField {
    assert_eq!(f.grid(), g.grid(), "bilinear evaluation across different grids");
    let grid = *f.grid();
    if let Some((a, b)) = &sigma.factors {
        let dim = grid.dim();
        let fa = dft(f).apply(|i| a(&grid.wavevector(i)[..dim]));
        let gb = dft(g).apply(|i| b(&grid.wavevector(i)[..dim]));
        let mut prod = padded_product_spectrum(&fa, &gb).truncate(grid);
        // the factorized product used a(0)b(0); swap in the declared σ(0,0)
        let origin = grid.frequency_index([0, 0]);
        let zero = [0.0; 2];
        let excess = a(&zero[..dim]) * b(&zero[..dim]) - sigma.origin;
        let correction = f.grid().volume().recip() * excess * dft(f).coeffs()[origin] * dft(g).coeffs()[origin];
        prod.coeffs_mut()[origin] -= correction;
        return idft(&prod);
    }
    idft(&bilinear_spectrum(sigma, &dft(f), &dft(g)))
}

fn bilinear_spectrum(sigma: &BilinearSymbol, fh: &SpectralField, gh: &SpectralField) -> SpectralField {
    let grid = *fh.grid();
    let dim = grid.dim();
    let half = grid.points() as i64 / 2;
    let active: Vec<(usize, [i64; 2], Complex64)> = fh
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(i, &c)| (i, grid.integer_frequency(i), c))
        .collect();
    let scale = 2.0 * std::f64::consts::PI / grid.side();
    let inv_volume = 1.0 / grid.volume();
    let coeffs: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|m| {
            let km = grid.integer_frequency(m);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(i, k, c) in &active {
                let l = [km[0] - k[0], km[1] - k[1]];
                if l[..dim].iter().any(|&v| v < -half || v >= half) {
                    continue;
                }
                let gl = gh.coeffs()[grid.frequency_index(l)];
                if gl.norm_sqr() == 0.0 {
                    continue;
                }
                let xi = grid.wavevector(i);
                let eta = [l[0] as f64 * scale, l[1] as f64 * scale];
                acc += c * gl * sigma.eval(&xi[..dim], &eta[..dim]);
            }
            acc * inv_volume
        })
        .collect();
    SpectralField::new(grid, coeffs).expect("grid-sized spectrum")
}

// ---------------------------------------------------------------------------
// symbol-class checks

/// Sampling options for [`cm_constant_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmOptions {
    /// Base finite-difference step relative to `|ξ|+|η|`.
    pub step: f64,
    /// Octave range of `ρ = |ξ|+|η|` sampled.
    pub octaves: (i32, i32),
    pub points_per_octave: u32,
}

impl Default for CmOptions {
    fn default() -> Self {
        Self { step: 2f64.powi(-8), octaves: (-4, 4), points_per_octave: 2 }
    }
}

/// Per-level Coifman–Meyer constants
/// `sup |∂_ξ^α ∂_η^β σ| (|ξ|+|η|)^{|α|+|β|}` indexed by `|α|+|β|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmReport {
    pub symbol: String,
    pub dim: usize,
    pub levels: Vec<f64>,
    pub constant: f64,
}

/// Largest step used for high-order differences, relative to `ρ`.
const MAX_RELATIVE_STEP: f64 = 0.05;

// Sample directions (ξ, η)/ρ on the unit ℓ¹-sphere, chosen so that
// neither ξ nor η is near the origin.
fn directions(dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let splits = [0.3, 0.5, 0.7];
    let mut out = Vec::new();
    for &a in &splits {
        if dim == 1 {
            for (sx, sy) in [(1.0, 1.0), (1.0, -1.0)] {
                out.push((vec![sx * a], vec![sy * (1.0 - a)]));
            }
        } else {
            for (t1, t2) in [(0.3f64, 1.1f64), (0.9, -2.0)] {
                out.push((
                    vec![a * t1.cos(), a * t1.sin()],
                    vec![(1.0 - a) * t2.cos(), (1.0 - a) * t2.sin()],
                ));
            }
        }
    }
    out
}

pub fn cm_constant(sigma: &BilinearSymbol, dim: usize, max_order: usize) -> Result<CmReport, SymbolError> {
    cm_constant_with(sigma, dim, max_order, CmOptions::default())
}

/// Finite-difference estimate of the Coifman–Meyer constants up to
/// `max_order` (conventionally `4n+1`). Higher orders enlarge the step so
/// round-off stays near 1e-8 of the symbol scale, capped at `ρ/20`.
pub fn cm_constant_with(
    sigma: &BilinearSymbol,
    dim: usize,
    max_order: usize,
    opts: CmOptions,
) -> Result<CmReport, SymbolError> {
    assert!(dim == 1 || dim == 2);
    let f = |v: &[f64]| sigma.raw(&v[..dim], &v[dim..]);
    let dirs = directions(dim);
    let (lo, hi) = opts.octaves;
    let ppo = opts.points_per_octave as i32;
    let rhos: Vec<f64> = (lo * ppo..=hi * ppo).map(|i| 2f64.powf(i as f64 / ppo as f64)).collect();
    let mut levels = vec![0.0f64; max_order + 1];
    for (order, level) in levels.iter_mut().enumerate() {
        let indices = multi_indices(2 * dim, order);
        let values: Vec<f64> = rhos
            .par_iter()
            .flat_map_iter(|&rho| {
                let h = fd::step_for(order, opts.step, 1e-8, rho).min(MAX_RELATIVE_STEP * rho);
                let mut out = Vec::with_capacity(dirs.len() * indices.len());
                for (x, y) in &dirs {
                    let point: Vec<f64> = x.iter().chain(y).map(|v| v * rho).collect();
                    for alpha in &indices {
                        let d = if order == 0 { f(&point) } else { fd::mixed_partial(&f, &point, alpha, h, 2) };
                        out.push(d.abs() * rho.powi(order as i32));
                    }
                }
                out
            })
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SymbolError::NonFinite { name: sigma.name.clone(), order });
        }
        *level = values.into_iter().fold(0.0, f64::max);
    }
    let constant = levels.iter().copied().fold(0.0, f64::max);
    Ok(CmReport { symbol: sigma.name.clone(), dim, levels, constant })
}

/// Growth factor above which a level constant is taken to diverge.
pub const CM_GROWTH_LIMIT: f64 = 4.0;
/// Extra octaves of `ρ` added by the scaling-law test.
pub const CM_EXTENSION_OCTAVES: i32 = 6;

/// Scaling-law test: recomputes the constants with the sampled `ρ` range
/// extended by six octaves on both ends; a Coifman–Meyer symbol keeps every
/// level within a factor 4, a symbol of positive (or negative) degree does
/// not. Returns `(is_cm, base, extended)`.
pub fn scaling_law_check(
    sigma: &BilinearSymbol,
    dim: usize,
    max_order: usize,
) -> Result<(bool, CmReport, CmReport), SymbolError> {
    let base_opts = CmOptions::default();
    let base = cm_constant_with(sigma, dim, max_order, base_opts)?;
    let (lo, hi) = base_opts.octaves;
    let wide = CmOptions { octaves: (lo - CM_EXTENSION_OCTAVES, hi + CM_EXTENSION_OCTAVES), ..base_opts };
    let extended = cm_constant_with(sigma, dim, max_order, wide)?;
    let floor = 1e-6 * base.constant.max(1e-300);
    let is_cm = base.levels.iter().zip(&extended.levels).all(|(&b, &e)| e <= CM_GROWTH_LIMIT * b.max(floor));
    Ok((is_cm, base, extended))
}

/// Cut-off selecting the region `|ξ| ≳ |η|/20`: `g₀(20|ξ|/|η|)` with
/// `g₀(s) = 0` for `s ≤ 1` and 1 for `s ≥ 2`; 1 when `η = 0`.
pub fn split_cutoff(xi: &[f64], eta: &[f64]) -> f64 {
    let e = norm(eta);
    if e == 0.0 {
        return 1.0;
    }
    smoothstep(20.0 * norm(xi) / e - 1.0)
}

/// `σ = τ₁ + τ₂` with `τ₁ = σχ` supported in `|ξ| ≥ |η|/20` and `τ₂ = σ − τ₁`
/// supported in `|ξ| ≤ |η|/10`.
pub fn split_sigma(sigma: &BilinearSymbol) -> (BilinearSymbol, BilinearSymbol) {
    let s1 = sigma.clone();
    let s2 = sigma.clone();
    let mut tau1 = BilinearSymbol::new(&format!("{}-tau1", sigma.name), move |x, y| s1.eval(x, y) * split_cutoff(x, y));
    let mut tau2 = BilinearSymbol::new(&format!("{}-tau2", sigma.name), move |x, y| {
        let s = s2.eval(x, y);
        s - s * split_cutoff(x, y)
    });
    tau1.support = SupportRegion::AwayFromEtaAxis;
    tau2.support = SupportRegion::NearEtaAxis;
    (tau1, tau2)
}
