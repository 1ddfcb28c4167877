//! Paraproducts `Π(f,g) = ∫ (Q_t f)(P_t g) m(t) dt/t`, the split
//! `Π = Π₁ + Π₂`, the Calderón reproducing formula and the low/high product
//! decomposition of `f·g`.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::RatioError;
use crate::grid::{dealiased_product, dft, idft, padded_product_spectrum, Grid, SampledField, SpectralField};
use crate::multipliers::{apply_radial, bessel, radial_spectrum, LPFamily};
use crate::spaces::{bmo_norm, jw_norm, lp_norm, TargetSpace};
use crate::tgrid::TimeGrid;
use crate::weights::{RegularizedWeight, ResolutionOfUnity};

/// The bounded function `m(t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    /// `m ≡ 1`.
    #[default]
    One,
    /// `m(t) = (−1)^{⌊log₂ t⌋}`, flipping sign every octave.
    Alternating,
}

impl Modulation {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Modulation::One => 1.0,
            Modulation::Alternating => {
                // round before flooring so exact powers of two are stable
                let octave = ((t.log2() * 1e9).round() / 1e9).floor() as i64;
                if octave.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `‖m‖_∞`.
    pub fn sup(&self) -> f64 {
        1.0
    }
}

/// Paraproduct configuration as read from JSON: `{"q": 8, "m": "one"}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaproductConfig {
    #[serde(default = "default_q")]
    pub q: u32,
    #[serde(default)]
    pub m: Modulation,
}

fn default_q() -> u32 {
    8
}

impl Default for ParaproductConfig {
    fn default() -> Self {
        Self { q: default_q(), m: Modulation::One }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaproductSpec {
    pub fam: LPFamily,
    pub m: Modulation,
    pub tgrid: TimeGrid,
}

impl ParaproductSpec {
    pub fn new(fam: LPFamily, m: Modulation, tgrid: TimeGrid) -> Self {
        Self { fam, m, tgrid }
    }

    /// Default family and the scale grid covering `grid`.
    pub fn for_grid(grid: &Grid, config: ParaproductConfig) -> Self {
        Self::new(LPFamily::new(), config.m, TimeGrid::for_grid(grid, config.q))
    }

    /// `max_j |m(t_j)|`.
    pub fn m_sup(&self) -> f64 {
        self.tgrid.nodes().iter().map(|&t| self.m.eval(t).abs()).fold(0.0, f64::max)
    }
}

/// `Σ_j outer(t_j D)[(a(t_j D) f)(b(t_j D) g)] c_j Δ` with alias-free
/// products; scales where either factor vanishes are skipped. Terms are
/// evaluated in parallel and summed in scale order.
fn scale_sum(
    tgrid: &TimeGrid,
    fh: &SpectralField,
    gh: &SpectralField,
    a: impl Fn(f64, f64) -> f64 + Sync,
    b: impl Fn(f64, f64) -> f64 + Sync,
    outer: impl Fn(f64, f64) -> f64 + Sync,
    coeff: impl Fn(f64) -> f64 + Sync,
) -> SpectralField {
    let grid = *fh.grid();
    let mags = grid.frequency_magnitudes();
    let delta = tgrid.delta();
    let terms: Vec<Option<SpectralField>> = tgrid
        .nodes()
        .par_iter()
        .map(|&t| {
            let c = coeff(t);
            if c == 0.0 {
                return None;
            }
            let fa = radial_spectrum(fh, &mags, |r| a(t, r));
            let gb = radial_spectrum(gh, &mags, |r| b(t, r));
            let nonzero = |s: &SpectralField| s.coeffs().iter().any(|v| v.norm_sqr() > 0.0);
            if !nonzero(&fa) || !nonzero(&gb) {
                return None;
            }
            let prod = padded_product_spectrum(&fa, &gb).truncate(grid);
            Some(radial_spectrum(&prod, &mags, |r| outer(t, r) * c * delta))
        })
        .collect();
    let mut acc = SpectralField::zeros(grid);
    for term in terms.into_iter().flatten() {
        acc.add_assign(&term);
    }
    acc
}

fn same_grid(f: &SampledField, g: &SampledField) {
    assert_eq!(f.grid(), g.grid(), "paraproduct across different grids");
}

/// `Π(f,g) = Σ_j (Q_{t_j} f)(P_{t_j} g) m(t_j) Δ`.
pub fn pi(spec: &ParaproductSpec, f: &SampledField, g: &SampledField) -> SampledField {
    same_grid(f, g);
    let fam = spec.fam;
    idft(&scale_sum(
        &spec.tgrid,
        &dft(f),
        &dft(g),
        |t, r| fam.psi(t * r),
        |t, r| fam.phi(t * r),
        |_, _| 1.0,
        |t| spec.m.eval(t),
    ))
}

/// `Π₁(f,g) = Σ_j Q⁽²⁾_{t_j}[(Q_{t_j} f)(P⁽¹⁾_{t_j} g)] m(t_j) Δ`.
pub fn pi1(spec: &ParaproductSpec, f: &SampledField, g: &SampledField) -> SampledField {
    same_grid(f, g);
    let fam = spec.fam;
    idft(&scale_sum(
        &spec.tgrid,
        &dft(f),
        &dft(g),
        |t, r| fam.psi(t * r),
        |t, r| fam.phi1(t * r),
        |t, r| fam.psi2(t * r),
        |t| spec.m.eval(t),
    ))
}

/// `Π₂(f,g) = Σ_j P⁽²⁾_{t_j}[(Q_{t_j} f)(Q⁽¹⁾_{t_j} g)] m(t_j) Δ`.
pub fn pi2(spec: &ParaproductSpec, f: &SampledField, g: &SampledField) -> SampledField {
    same_grid(f, g);
    let fam = spec.fam;
    idft(&scale_sum(
        &spec.tgrid,
        &dft(f),
        &dft(g),
        |t, r| fam.psi(t * r),
        |t, r| fam.psi1(t * r),
        |t, r| fam.phi2(t * r),
        |t| spec.m.eval(t),
    ))
}

/// `Σ_j Q_{t_j} Q_{t_j} f Δ`, i.e. the multiplier `Σ_j ψ̂(t_j ξ)² Δ`.
pub fn calderon_reconstruct(spec: &ParaproductSpec, f: &SampledField) -> SampledField {
    let fam = spec.fam;
    let tg = spec.tgrid;
    apply_radial(f, |r| fam.calderon_sum(r, &tg))
}

/// `Σ_j ‖Q_{t_j} f‖₂² Δ`, evaluated band by band in physical space.
pub fn quadratic_sum(spec: &ParaproductSpec, f: &SampledField) -> f64 {
    let fam = spec.fam;
    let fh = dft(f);
    let mags = f.grid().frequency_magnitudes();
    let terms: Vec<f64> = spec
        .tgrid
        .nodes()
        .par_iter()
        .map(|&t| lp_norm(&idft(&radial_spectrum(&fh, &mags, |r| fam.psi(t * r))), 2.0).powi(2))
        .collect();
    terms.iter().sum::<f64>() * spec.tgrid.delta()
}

/// Split of `f·g` into `B1 + B2`.
///
/// With `Lf = φ₀(D)f` and `F = f − Lf`, the high part is reproduced as
/// `F = Σ_j Q_j Q̃_j F Δ` with `Q̃_j = Q_j / S(D)` and `S` the discrete
/// Calderón sum, so the identity is exact at any scale density. Then
///
/// - `B2 = Σ_j Q⁽²⁾_j[(Q_j Q̃_j F)(P⁽¹⁾_j g)] Δ` (high–low, the Π₁ piece),
/// - `B1 = (Lf)g + Σ_j P⁽²⁾_j[(Q_j Q̃_j F)(Q⁽¹⁾_j g)] Δ
///        + Σ_j (Q_j Q̃_j F)((1 − φ̂)(t_j D) g) Δ`.
///
/// Products are alias-free projections, so `B1 + B2` is the dealiased
/// product of `f` and `g`. The modulation `m` is not used (σ ≡ 1).
pub fn product_decompose(spec: &ParaproductSpec, f: &SampledField, g: &SampledField) -> (SampledField, SampledField) {
    same_grid(f, g);
    let grid = *f.grid();
    let fam = spec.fam;
    let tg = spec.tgrid;
    let res = ResolutionOfUnity;
    let mags = grid.frequency_magnitudes();
    let fh = dft(f);
    let low = radial_spectrum(&fh, &mags, |r| res.phi0(r));
    let high = radial_spectrum(&fh, &mags, |r| 1.0 - res.phi0(r));
    let calderon: Vec<f64> = mags.iter().map(|&r| fam.calderon_sum(r, &tg)).collect();
    // F̂ / S, nonzero only where φ₀ < 1, i.e. |ξ| > 1
    let mut normalized = high.clone();
    for (i, c) in normalized.coeffs_mut().iter_mut().enumerate() {
        if c.norm_sqr() > 0.0 {
            assert!(calderon[i] > 0.0, "time grid does not cover frequency {}", mags[i]);
            *c /= calderon[i];
        }
    }
    let gh = dft(g);
    let band = |t: f64, r: f64| fam.psi(t * r).powi(2);
    let one = |_: f64| 1.0;
    let b2 = scale_sum(&tg, &normalized, &gh, band, |t, r| fam.phi1(t * r), |t, r| fam.psi2(t * r), one);
    let mut b1 = scale_sum(&tg, &normalized, &gh, band, |t, r| fam.psi1(t * r), |t, r| fam.phi2(t * r), one);
    b1.add_assign(&scale_sum(&tg, &normalized, &gh, band, |t, r| 1.0 - fam.phi(t * r), |_, _| 1.0, one));
    b1.add_assign(&padded_product_spectrum(&low, &gh).truncate(grid));
    (idft(&b1), idft(&b2))
}

/// `‖Jˢ(fg)‖_{J_w(Lᵖ)} / (‖Jˢf‖_p ‖g‖_bmo + ‖f‖_p ‖Jˢg‖_bmo)`.
pub fn kato_ponce_ratio(
    f: &SampledField,
    g: &SampledField,
    s: f64,
    p: f64,
    rw: &RegularizedWeight,
) -> Result<f64, RatioError> {
    same_grid(f, g);
    let n = f.grid().dim() as f64;
    if s <= 4.0 * n + 1.0 {
        warn!("Kato-Ponce ratio with s = {s} <= 4n+1");
    }
    let numerator = jw_norm(&bessel(s, &dealiased_product(f, g)), rw, &TargetSpace::Lp(p));
    let denominator = lp_norm(&bessel(s, f), p) * bmo_norm(g) + lp_norm(f, p) * bmo_norm(&bessel(s, g));
    if denominator > 0.0 {
        Ok(numerator / denominator)
    } else if numerator == 0.0 && (f.max_abs() > 0.0 || g.max_abs() > 0.0) {
        // one factor vanishes identically: the product is zero
        Ok(0.0)
    } else {
        Err(RatioError::DivideByZero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn band_limited(grid: Grid, kmax: i64, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = SpectralField::zeros(grid);
        for i in 0..grid.len() {
            let k = grid.integer_frequency(i);
            if k[0].abs() <= kmax && k[1].abs() <= kmax {
                spec.coeffs_mut()[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        idft(&spec)
    }

    fn mean_zero(f: SampledField) -> SampledField {
        let m = f.mean();
        f.sub(&SampledField::constant(*f.grid(), m))
    }

    fn rel(a: &SampledField, b: &SampledField) -> f64 {
        a.sub(b).max_abs() / b.max_abs().max(1e-300)
    }

    fn spec_for(grid: &Grid) -> ParaproductSpec {
        ParaproductSpec::for_grid(grid, ParaproductConfig::default())
    }

    #[test]
    fn modulation() {
        assert_eq!(Modulation::One.eval(3.0), 1.0);
        assert_eq!(Modulation::Alternating.eval(1.0), 1.0);
        assert_eq!(Modulation::Alternating.eval(1.5), 1.0);
        assert_eq!(Modulation::Alternating.eval(2.0), -1.0);
        assert_eq!(Modulation::Alternating.eval(0.75), -1.0);
        let cfg: ParaproductConfig = serde_json::from_str(r#"{"q":16,"m":"alternating"}"#).unwrap();
        assert_eq!(cfg, ParaproductConfig { q: 16, m: Modulation::Alternating });
        let grid = Grid::line(64).unwrap();
        assert_eq!(ParaproductSpec::for_grid(&grid, cfg).m_sup(), 1.0);
    }

    #[test]
    fn constants_are_annihilated() {
        let grid = Grid::line(128).unwrap();
        let spec = spec_for(&grid);
        let k = SampledField::constant(grid, c(2.0));
        let g = band_limited(grid, 40, 1);
        for op in [pi, pi1, pi2] {
            assert!(op(&spec, &k, &g).max_abs() < 1e-14);
        }
        assert!(calderon_reconstruct(&spec, &k).max_abs() < 1e-14);
    }

    #[test]
    fn constant_second_argument_gives_band_sum() {
        let grid = Grid::line(128).unwrap();
        for m in [Modulation::One, Modulation::Alternating] {
            let spec = ParaproductSpec::for_grid(&grid, ParaproductConfig { q: 8, m });
            let f = band_limited(grid, 60, 2);
            let g = SampledField::constant(grid, c(-1.5));
            let fam = spec.fam;
            let tg = spec.tgrid;
            let oracle = apply_radial(&f, |r| -1.5 * fam.band_sum(r, &tg, |t| m.eval(t)));
            assert!(rel(&pi(&spec, &f, &g), &oracle) < 1e-12);
        }
    }

    #[test]
    fn split_is_exact() {
        let grid = Grid::line(256).unwrap();
        let mut spec = spec_for(&grid);
        for m in [Modulation::One, Modulation::Alternating] {
            spec.m = m;
            for seed in 0..100 {
                let f = band_limited(grid, 60, 2 * seed);
                let g = band_limited(grid, 60, 2 * seed + 1);
                let whole = pi(&spec, &f, &g);
                let parts = pi1(&spec, &f, &g).add(&pi2(&spec, &f, &g));
                let scale = lp_norm(&f, 2.0) * lp_norm(&g, 2.0);
                assert!(whole.sub(&parts).max_abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn second_piece_vanishes_on_low_frequencies() {
        let grid = Grid::line(128).unwrap();
        // Q⁽¹⁾_t g = 0 when t|ξ| ≤ 4/15 at every scale: |ξ| = 2π/L, t ≤ 0.6
        let spec = ParaproductSpec::new(LPFamily::new(), Modulation::One, TimeGrid::covering(0.01, 0.6, 8));
        let f = band_limited(grid, 60, 3);
        let g = SampledField::mode(grid, [1, 0]);
        assert!(pi2(&spec, &f, &g).max_abs() < 1e-14);
        let g = SampledField::constant(grid, c(1.0));
        assert!(pi2(&spec_for(&grid), &f, &g).max_abs() < 1e-14);
    }

    #[test]
    fn bilinearity() {
        let grid = Grid::line(128).unwrap();
        let spec = spec_for(&grid);
        let f1 = band_limited(grid, 30, 4);
        let f2 = band_limited(grid, 30, 5);
        let g = band_limited(grid, 30, 6);
        let a = c(-0.7);
        let lhs = pi(&spec, &f1.scale(a).add(&f2), &g);
        let rhs = pi(&spec, &f1, &g).scale(a).add(&pi(&spec, &f2, &g));
        assert!(rel(&lhs, &rhs) < 1e-12);
        let lhs = pi1(&spec, &g, &f1.scale(a).add(&f2));
        let rhs = pi1(&spec, &g, &f1).scale(a).add(&pi1(&spec, &g, &f2));
        assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn calderon_identity() {
        let grid = Grid::line(256).unwrap();
        for q in [8, 16, 64] {
            let spec = ParaproductSpec::for_grid(&grid, ParaproductConfig { q, m: Modulation::One });
            let f = mean_zero(band_limited(grid, 127, q as u64));
            let out = calderon_reconstruct(&spec, &f);
            let err = lp_norm(&out.sub(&f), 2.0) / lp_norm(&f, 2.0);
            assert!(err <= 1e-3, "q = {q}: {err}");
            // single mode: scalar factor
            let mode = SampledField::mode(grid, [7, 0]);
            let r = 2.0 * std::f64::consts::PI * 7.0 / grid.side();
            let factor = spec.fam.calderon_sum(r, &spec.tgrid);
            assert!((0.999..=1.001).contains(&factor));
            assert!(rel(&calderon_reconstruct(&spec, &mode), &mode.scale(c(factor))) < 1e-12);
        }
    }

    #[test]
    fn quadratic_estimate_two_sided() {
        let grid = Grid::line(256).unwrap();
        let spec = spec_for(&grid);
        for seed in 0..20 {
            let f = mean_zero(band_limited(grid, 127, 40 + seed));
            let ratio = quadratic_sum(&spec, &f) / lp_norm(&f, 2.0).powi(2);
            assert!((0.99..=1.001).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn product_reconstruction() {
        let grid = Grid::line(256).unwrap();
        let spec = spec_for(&grid);
        for seed in 0..100 {
            let f = band_limited(grid, 127, 2 * seed + 500);
            let g = band_limited(grid, 127, 2 * seed + 501);
            let (b1, b2) = product_decompose(&spec, &f, &g);
            let fg = dealiased_product(&f, &g);
            assert!(rel(&b1.add(&b2), &fg) < 1e-9);
        }
        // band-limited below N/4: the pointwise product
        let f = band_limited(grid, 60, 7);
        let g = band_limited(grid, 60, 8);
        let (b1, b2) = product_decompose(&spec, &f, &g);
        assert!(rel(&b1.add(&b2), &f.mul(&g)) < 1e-9);
    }

    #[test]
    fn product_with_constants() {
        let grid = Grid::line(256).unwrap();
        let spec = spec_for(&grid);
        let res = ResolutionOfUnity;
        let f = band_limited(grid, 100, 9);
        let one = SampledField::constant(grid, c(1.0));
        // g ≡ 1: the high–low piece is the whole high part of f
        let (b1, b2) = product_decompose(&spec, &f, &one);
        let low = apply_radial(&f, |r| res.phi0(r));
        assert!(rel(&b1, &low) < 1e-10);
        assert!(rel(&b2, &f.sub(&low)) < 1e-10);
        // f constant: everything is low
        let k = SampledField::constant(grid, c(3.0));
        let g = band_limited(grid, 100, 10);
        let (b1, b2) = product_decompose(&spec, &k, &g);
        assert!(b2.max_abs() < 1e-12 * g.max_abs());
        assert!(rel(&b1, &g.scale(c(3.0))) < 1e-12);
    }

    #[test]
    fn kato_ponce() {
        let grid = Grid::line(256).unwrap();
        let rw = RegularizedWeight::log(1.0);
        let f = SampledField::mode(grid, [3, 0]).add(&SampledField::mode(grid, [-3, 0]));
        let g = SampledField::mode(grid, [5, 0]).add(&SampledField::mode(grid, [-5, 0]));
        let r = kato_ponce_ratio(&f, &g, 6.0, 2.0, &rw).unwrap();
        let fine = Grid::line(512).unwrap();
        let f2 = SampledField::mode(fine, [3, 0]).add(&SampledField::mode(fine, [-3, 0]));
        let g2 = SampledField::mode(fine, [5, 0]).add(&SampledField::mode(fine, [-5, 0]));
        let r2 = kato_ponce_ratio(&f2, &g2, 6.0, 2.0, &rw).unwrap();
        assert!(r.is_finite() && (r2 / r - 1.0).abs() <= 0.1, "{r} vs {r2}");
        // g constant: numerator ≤ |c|‖Jˢf‖_p, denominator ≥ |c|‖Jˢf‖_p
        let k = SampledField::constant(grid, c(2.0));
        let fr = band_limited(grid, 50, 11);
        assert!(kato_ponce_ratio(&fr, &k, 6.0, 2.0, &rw).unwrap() <= 1.0 + 1e-10);
        assert_eq!(kato_ponce_ratio(&SampledField::zeros(grid), &g, 6.0, 2.0, &rw), Ok(0.0));
        let z = SampledField::zeros(grid);
        assert_eq!(kato_ponce_ratio(&z, &z, 6.0, 2.0, &rw), Err(RatioError::DivideByZero));
    }
}
