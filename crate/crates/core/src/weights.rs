//! Admissible weights, the dyadic resolution of unity and the regularized
//! symbol `w(ξ) = Σ_j w(2⁻ʲ) φ_j(ξ)`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::WeightError;
use crate::fd;
use crate::smooth::plateau;

/// Doubling ratios beyond this (or below its reciprocal) are treated as
/// evidence that the weight is not admissible.
pub const DOUBLING_THRESHOLD: f64 = 1e3;

/// Closed-form weight families accepted in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    /// `w ≡ 1`.
    Const,
    /// `(1 + log₊(1/t))^b`.
    Log { b: f64 },
    /// `(1 + log₊(1/t))^{b1} (1 + log(1 + log₊(1/t)))^{b2}`.
    Loglog { b1: f64, b2: f64 },
}

impl WeightSpec {
    pub fn eval(&self, t: f64) -> f64 {
        let l = (1.0 / t).ln().max(0.0);
        match *self {
            WeightSpec::Const => 1.0,
            WeightSpec::Log { b } => (1.0 + l).powf(b),
            WeightSpec::Loglog { b1, b2 } => (1.0 + l).powf(b1) * (1.0 + (1.0 + l).ln()).powf(b2),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, WeightError> {
        serde_json::from_str(text).map_err(|e| WeightError::UnknownKind(e.to_string()))
    }

    pub fn build(&self) -> Result<AdmissibleWeight, WeightError> {
        match *self {
            WeightSpec::Const => Ok(make_const_weight()),
            WeightSpec::Log { b } => Ok(make_log_weight(b)),
            WeightSpec::Loglog { b1, b2 } => make_loglog_weight(b1, b2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

/// Certified doubling constants `c w(2⁻ʲ) ≤ w(2⁻²ʲ) ≤ d w(2⁻ʲ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Doubling {
    pub c: f64,
    pub d: f64,
    pub direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibleWeight {
    spec: WeightSpec,
    doubling: Doubling,
}

/// Depth used when certifying the built-in families.
const CERTIFY_DEPTH: u32 = 16;

impl AdmissibleWeight {
    fn certify(spec: WeightSpec) -> Self {
        let doubling = check_admissible(|t| spec.eval(t), CERTIFY_DEPTH)
            .expect("closed-form weight families are admissible");
        Self { spec, doubling }
    }

    /// `w(t)`, constant for `t ≥ 1`.
    pub fn eval(&self, t: f64) -> f64 {
        self.spec.eval(t)
    }

    pub fn spec(&self) -> WeightSpec {
        self.spec
    }

    pub fn doubling(&self) -> Doubling {
        self.doubling
    }

    pub fn direction(&self) -> Direction {
        self.doubling.direction
    }
}

pub fn make_const_weight() -> AdmissibleWeight {
    AdmissibleWeight::certify(WeightSpec::Const)
}

/// `w_b(t) = (1 + log₊(1/t))^b`.
pub fn make_log_weight(b: f64) -> AdmissibleWeight {
    AdmissibleWeight::certify(WeightSpec::Log { b })
}

pub fn make_loglog_weight(b1: f64, b2: f64) -> Result<AdmissibleWeight, WeightError> {
    if b1 * b2 < 0.0 {
        return Err(WeightError::MixedSigns { b1, b2 });
    }
    Ok(AdmissibleWeight::certify(WeightSpec::Loglog { b1, b2 }))
}

/// Checks positivity and monotonicity on a log-spaced sample of `(0, 1]`
/// and returns the tightest doubling constants over `0 ≤ j ≤ j_max`.
pub fn check_admissible(w: impl Fn(f64) -> f64, j_max: u32) -> Result<Doubling, WeightError> {
    if j_max < 8 {
        return Err(WeightError::DepthTooSmall(j_max));
    }
    // t = 2^{-u}, u = 0, 1/8, …, 2 j_max
    let samples: Vec<(f64, f64)> = (0..=16 * j_max)
        .map(|i| {
            let t = 2f64.powf(-(i as f64) / 8.0);
            (t, w(t))
        })
        .collect();
    if let Some(&(t, value)) = samples.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(WeightError::NonPositive { t, value });
    }
    let tol = 1e-12;
    let rising = samples.windows(2).all(|p| p[1].1 >= p[0].1 * (1.0 - tol));
    let falling = samples.windows(2).all(|p| p[1].1 <= p[0].1 * (1.0 + tol));
    let direction = match (rising, falling) {
        // values grow as t decreases
        (true, _) => Direction::NonIncreasing,
        (false, true) => Direction::NonDecreasing,
        (false, false) => {
            let p = samples
                .windows(2)
                .find(|p| (p[1].1 - p[0].1) * (samples[1].1 - samples[0].1) < 0.0)
                .unwrap_or(&samples[0..2]);
            return Err(WeightError::NonMonotone { t0: p[0].0, w0: p[0].1, t1: p[1].0, w1: p[1].1 });
        }
    };
    let mut c = f64::INFINITY;
    let mut d = 0.0f64;
    for j in 0..=j_max {
        let ratio = w(2f64.powi(-2 * j as i32)) / w(2f64.powi(-(j as i32)));
        if !(1.0 / DOUBLING_THRESHOLD..=DOUBLING_THRESHOLD).contains(&ratio) {
            return Err(WeightError::DoublingUnbounded { j, ratio });
        }
        c = c.min(ratio);
        d = d.max(ratio);
    }
    Ok(Doubling { c, d, direction })
}

/// Dyadic resolution of unity built from the radial profile `φ₀`, which is
/// 1 on `|x| ≤ 1` and vanishes for `|x| ≥ 3/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResolutionOfUnity;

impl ResolutionOfUnity {
    pub fn phi0(&self, r: f64) -> f64 {
        plateau(r, 1.0, 1.5)
    }

    /// `φ_j(r)`; for `j ≥ 1` this is `φ₀(2⁻ʲr) − φ₀(2⁻ʲ⁺¹r)`, supported in
    /// `2^{j-1} < r < 3·2^{j-1}`.
    pub fn phi(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            self.phi0(r)
        } else {
            let s = 2f64.powi(-(j as i32)) * r;
            self.phi0(s) - self.phi0(2.0 * s)
        }
    }

    /// Indices `j` with `φ_j(r)` possibly nonzero (at most two).
    pub fn active(&self, r: f64) -> std::ops::RangeInclusive<u32> {
        if r < 1.0 {
            return 0..=0;
        }
        let lo = ((r / 3.0).log2().floor() + 1.0).max(0.0) as u32;
        let hi = (r.log2().ceil() + 1.0).max(0.0) as u32;
        lo..=hi
    }

    /// Number of bands needed to cover every frequency of magnitude up to
    /// `r_max`.
    pub fn depth_for(&self, r_max: f64) -> u32 {
        *self.active(r_max.max(1.0)).end()
    }
}

/// The smooth symbol `w(ξ)` of an admissible weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedWeight {
    source: AdmissibleWeight,
    resolution: ResolutionOfUnity,
    equivalence: (f64, f64),
}

/// Octaves of `|ξ|` sampled when recording the equivalence constants.
const EQUIVALENCE_OCTAVES: i32 = 12;

pub fn regularize(w: AdmissibleWeight, resolution: ResolutionOfUnity) -> RegularizedWeight {
    let mut rw = RegularizedWeight { source: w, resolution, equivalence: (1.0, 1.0) };
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=16 * EQUIVALENCE_OCTAVES {
        let r = 2f64.powf(i as f64 / 16.0 - 1.0);
        let ratio = rw.eval(r) / rw.reference(r);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    rw.equivalence = (lo, hi);
    rw
}

impl RegularizedWeight {
    /// Regularization of `w ≡ 1`, which is identically one.
    pub fn unit() -> Self {
        regularize(make_const_weight(), ResolutionOfUnity)
    }

    pub fn log(b: f64) -> Self {
        regularize(make_log_weight(b), ResolutionOfUnity)
    }

    pub fn from_spec(spec: WeightSpec) -> Result<Self, WeightError> {
        Ok(regularize(spec.build()?, ResolutionOfUnity))
    }

    pub fn source(&self) -> &AdmissibleWeight {
        &self.source
    }

    pub fn resolution(&self) -> &ResolutionOfUnity {
        &self.resolution
    }

    /// `w(ξ)` at `|ξ| = r`.
    pub fn eval(&self, r: f64) -> f64 {
        self.resolution
            .active(r)
            .map(|j| {
                let phi = self.resolution.phi(j, r);
                if phi == 0.0 {
                    0.0
                } else {
                    self.source.eval(2f64.powi(-(j as i32))) * phi
                }
            })
            .sum()
    }

    pub fn eval_vec(&self, xi: &[f64]) -> f64 {
        self.eval(xi.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `w(1/⟨ξ⟩)`, the quantity `w(ξ)` is comparable to.
    pub fn reference(&self, r: f64) -> f64 {
        self.source.eval(1.0 / (1.0 + r * r).sqrt())
    }

    /// Sampled bounds of `w(ξ) / w(1/⟨ξ⟩)`.
    pub fn equivalence(&self) -> (f64, f64) {
        self.equivalence
    }
}

/// Per-order constants of the symbol estimates for `w` and `1/w`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolEstimates {
    /// `sup |∂^α w(ξ)| ⟨ξ⟩^{|α|} / w(1/⟨ξ⟩)`, indexed by `|α|`.
    pub weight: Vec<f64>,
    /// `sup |∂^α (1/w)(ξ)| ⟨ξ⟩^{|α|} w(1/⟨ξ⟩)`, indexed by `|α|`.
    pub inverse: Vec<f64>,
}

/// Finite-difference check of the symbol estimates in dimension `dim`.
/// `step` is the base step relative to `⟨ξ⟩` (2⁻¹⁰ by default).
pub fn check_symbol_estimates_with(
    rw: &RegularizedWeight,
    dim: usize,
    max_order: usize,
    step: f64,
) -> SymbolEstimates {
    assert!(max_order <= 4, "symbol estimates are checked up to order 4");
    assert!(dim == 1 || dim == 2);
    let weight = |x: &[f64]| rw.eval_vec(x);
    let inverse = |x: &[f64]| 1.0 / rw.eval_vec(x);
    let mut out = SymbolEstimates { weight: vec![0.0; max_order + 1], inverse: vec![0.0; max_order + 1] };
    let angles: &[f64] = if dim == 1 { &[0.0] } else { &[0.0, 0.4, std::f64::consts::FRAC_PI_4] };
    for i in 0..=8 * 15 {
        let r = 2f64.powf(i as f64 / 8.0 - 3.0);
        let bracket = (1.0 + r * r).sqrt();
        let reference = rw.reference(r);
        for &theta in angles {
            let x: Vec<f64> =
                if dim == 1 { vec![r] } else { vec![r * theta.cos(), r * theta.sin()] };
            for order in 0..=max_order {
                let h = fd::step_for(order, step, 1e-9, bracket);
                for alpha in multi_indices(dim, order) {
                    let dw = fd::mixed_partial(&weight, &x, &alpha, h, 4).abs();
                    let dinv = fd::mixed_partial(&inverse, &x, &alpha, h, 4).abs();
                    let scale = bracket.powi(order as i32);
                    out.weight[order] = out.weight[order].max(dw * scale / reference);
                    out.inverse[order] = out.inverse[order].max(dinv * scale * reference);
                }
            }
        }
    }
    out
}

pub fn check_symbol_estimates(rw: &RegularizedWeight, max_order: usize) -> SymbolEstimates {
    check_symbol_estimates_with(rw, 1, max_order, 2f64.powi(-10))
}

/// All multi-indices of length `dim` with total order `order`.
pub(crate) fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![order]];
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(dim - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `w_b(2⁻ʲ) = (1 + j log 2)^b`.
pub fn log_weight_at_dyadic(b: f64, j: u32) -> f64 {
    (1.0 + j as f64 * LN_2).powf(b)
}
