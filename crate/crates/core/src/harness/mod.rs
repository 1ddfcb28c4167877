//! Empirical operator-norm ratios over fixed test families, resolution
//! sweeps and report emission.
//!
//! Every inequality `‖A(f,g)‖_X ≤ C ‖f‖_Y ‖g‖_Z` becomes the ratio
//! `‖A(f,g)‖_X / (‖f‖_Y ‖g‖_Z)` evaluated on pairs drawn from the id's
//! designated families. Trial `i` draws its pair from a ChaCha8 generator
//! seeded with the base seed on stream `i`, so trials are independent of
//! scheduling and shared across resolutions.

pub mod acceptance;
pub mod families;
pub mod report;

use std::fmt;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, RatioError};
use crate::grid::{Grid, SampledField};
use crate::multipliers::{apply_bilinear, BilinearSymbol, LPFamily};
use crate::paraproducts::{kato_ponce_ratio, pi, pi1, pi2, product_decompose, Modulation, ParaproductSpec};
use crate::spaces::{
    bmo_norm, h1_norm, jw_norm, lp_norm, refined_sobolev_norm, triebel_norm, xw_norm, TargetSpace, BMO_norm, H1_norm,
};
use crate::tgrid::TimeGrid;
use crate::weights::{RegularizedWeight, WeightSpec};

pub use families::{FamilyKind, FamilyParams, TestFamily};
pub use report::{RatioReport, ReportFormat, ResolutionSummary, TrialRecord};

/// Allowed relative change of per-resolution maxima per doubling of `N`.
pub const DRIFT_LIMIT: f64 = 0.10;
/// Growth the negative control must exceed over a sweep.
pub const NEGATIVE_GROWTH: f64 = 0.25;
/// Resolutions of the standard sweep.
pub const SWEEP: [usize; 3] = [256, 512, 1024];
/// Trials per id in the standard sweep.
pub const SWEEP_TRIALS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub dim: usize,
    pub side: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, side: crate::grid::DEFAULT_SIDE }
    }
}

/// Optional overrides of the automatic scale range `[0.4/ξ_max, L]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TgridConfig {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

/// Harness configuration: `{grid, weight, lpfamily_q, tgrid, families}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub grid: GridConfig,
    /// Weight `w` of the potential and X_w spaces (the product and
    /// Kato–Ponce ids always use `w₁`).
    pub weight: WeightSpec,
    /// Scale-grid points per octave.
    pub lpfamily_q: u32,
    pub tgrid: TgridConfig,
    pub families: FamilyParams,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            weight: WeightSpec::Log { b: 1.0 },
            lpfamily_q: 8,
            tgrid: TgridConfig::default(),
            families: FamilyParams::default(),
        }
    }
}

impl HarnessConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// `‖T_σ(f,g)‖_{J_w(Lᵖ)} / (‖f‖_p ‖g‖_{X_w})`.
    T32i,
    /// `‖B1(f,g)‖₁ / (‖f‖_{H¹} ‖g‖_{X_w})` for `σ ≡ 1`.
    T32iiGood,
    /// `‖B2(f,g)‖_{J_w(H¹)} / (‖f‖_{H¹} ‖g‖_{X_w})` for `σ ≡ 1`.
    T32iiBad,
    /// `‖Π(f,g)‖_{J_w(Lᵖ)} / (‖f‖_p ‖g‖_{X_w})`.
    T43i,
    /// `‖Π₁(f,g)‖_{J_w(H¹)} / (‖f‖_{H¹} ‖g‖_{X_w})`.
    T43iiPi1,
    /// `‖Π₂(f,g)‖₁ / (‖f‖_{H¹} ‖g‖_BMO)`.
    T43iiPi2,
    /// `‖Π(f,g)‖_p / (‖f‖_{X_w} ‖g‖_p)`.
    L42i,
    /// `‖Π(f,g)‖₁ / (‖f‖_{X_w} ‖g‖_{H¹})`.
    L42ii,
    /// Kato–Ponce ratio with `w₁`.
    Kp,
    /// `‖fg‖_{J_{w₁}(Lᵖ)} / (‖f‖_p ‖g‖_bmo)`.
    P62,
    /// `‖B1(f,g)‖₁ / (‖f‖_{h¹} ‖g‖_bmo)`.
    P63B1,
    /// `‖B2(f,g)‖_{J_{w₁}(H¹)} / (‖f‖_{h¹} ‖g‖_bmo)`.
    P63B2,
    /// `‖Π(f,g)‖_{J_w(L²)} / (‖f‖₂ ‖g‖_{X_w})` with sign-alternating `m`.
    Appx,
    /// `‖fg‖_p / (‖f‖_p ‖g‖_bmo)`: the product estimate without `1/w₁`.
    Neg,
}

const KIND_NAMES: [(Kind, &str); 14] = [
    (Kind::T32i, "T3.2i"),
    (Kind::T32iiGood, "T3.2ii-good"),
    (Kind::T32iiBad, "T3.2ii-bad"),
    (Kind::T43i, "T4.3i"),
    (Kind::T43iiPi1, "T4.3ii-pi1"),
    (Kind::T43iiPi2, "T4.3ii-pi2"),
    (Kind::L42i, "L4.2i"),
    (Kind::L42ii, "L4.2ii"),
    (Kind::Kp, "KP"),
    (Kind::P62, "P6.2"),
    (Kind::P63B1, "P6.3-b1"),
    (Kind::P63B2, "P6.3-b2"),
    (Kind::Appx, "APPX"),
    (Kind::Neg, "NEG"),
];

impl Kind {
    pub fn name(&self) -> &'static str {
        KIND_NAMES.iter().find(|(k, _)| k == self).map(|(_, n)| *n).expect("every kind is named")
    }

    fn uses_p(&self) -> bool {
        matches!(self, Kind::T32i | Kind::T43i | Kind::L42i | Kind::Kp | Kind::P62 | Kind::Neg)
    }
}

/// An inequality id with its parameters, written `NAME[:key=value,…]`,
/// e.g. `T4.3i:p=4/3` or `T3.2i:sigma=riesz-ratio`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub kind: Kind,
    pub p: f64,
    pub sigma: String,
    pub s: f64,
}

fn parse_number(text: &str) -> Option<f64> {
    match text.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => text.trim().parse().ok(),
    }
}

/// Integers plainly, simple fractions as `a/b`.
fn format_number(x: f64) -> String {
    for b in 1..=12u32 {
        let a = x * b as f64;
        if (a - a.round()).abs() < 1e-12 {
            return if b == 1 { format!("{}", a.round()) } else { format!("{}/{}", a.round(), b) };
        }
    }
    format!("{x}")
}

impl Inequality {
    pub fn new(kind: Kind) -> Self {
        Self { kind, p: 2.0, sigma: "one".into(), s: 6.0 }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_sigma(mut self, sigma: &str) -> Self {
        self.sigma = sigma.into();
        self
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let unknown = || HarnessError::UnknownId(text.to_string());
        let (name, params) = text.split_once(':').unwrap_or((text, ""));
        let kind = KIND_NAMES.iter().find(|(_, n)| *n == name.trim()).map(|(k, _)| *k).ok_or_else(unknown)?;
        let mut id = Self::new(kind);
        for item in params.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(unknown)?;
            match key.trim() {
                "p" if kind.uses_p() => id.p = parse_number(value).filter(|p| *p > 1.0 && p.is_finite()).ok_or_else(unknown)?,
                "sigma" if kind == Kind::T32i => {
                    BilinearSymbol::builtin(value.trim()).map_err(|_| unknown())?;
                    id.sigma = value.trim().to_string();
                }
                "s" if kind == Kind::Kp => id.s = parse_number(value).ok_or_else(unknown)?,
                _ => return Err(unknown()),
            }
        }
        Ok(id)
    }

    /// Ids named on the command line; `P6.3` and `T3.2ii` stand for both of
    /// their pieces.
    pub fn expand(text: &str) -> Result<Vec<Self>, HarnessError> {
        match text {
            "P6.3" => Ok(vec![Self::new(Kind::P63B1), Self::new(Kind::P63B2)]),
            "T3.2ii" => Ok(vec![Self::new(Kind::T32iiGood), Self::new(Kind::T32iiBad)]),
            "T4.3ii" => Ok(vec![Self::new(Kind::T43iiPi1), Self::new(Kind::T43iiPi2)]),
            other => Ok(vec![Self::parse(other)?]),
        }
    }

    /// The ids of the standard stability sweep.
    pub fn standard_suite() -> Vec<Self> {
        vec![
            Self::new(Kind::T32i),
            Self::new(Kind::T32i).with_sigma("riesz-ratio"),
            Self::new(Kind::T43i).with_p(4.0 / 3.0),
            Self::new(Kind::T43i),
            Self::new(Kind::T43i).with_p(4.0),
            Self::new(Kind::T43iiPi1),
            Self::new(Kind::T43iiPi2),
            Self::new(Kind::L42i),
            Self::new(Kind::L42ii),
            Self::new(Kind::Kp),
            Self::new(Kind::P62),
            Self::new(Kind::P63B1),
            Self::new(Kind::P63B2),
            Self::new(Kind::Appx),
        ]
    }

    /// Family pairs `(f, g)` cycled through by the trials, and whether the
    /// two members share a seed.
    pub fn pairs(&self) -> Vec<(FamilyKind, FamilyKind, bool)> {
        use FamilyKind::*;
        let lp = [BandGauss, DyadicBump];
        let xw = [BmoLogSpike, SmoothedStep, BoundedTrig];
        let hardy = [BandGaussMeanZero, DyadicAtom, DyadicBump];
        let local_hardy = [DyadicAtom, BandGauss, DyadicBump];
        let smooth = [BandGauss, BoundedTrig];
        let cross = |a: &[FamilyKind], b: &[FamilyKind]| -> Vec<(FamilyKind, FamilyKind, bool)> {
            a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y, false))).collect()
        };
        match self.kind {
            Kind::T32i | Kind::T43i | Kind::Appx => cross(&lp, &xw),
            Kind::T32iiGood | Kind::T32iiBad | Kind::T43iiPi1 | Kind::T43iiPi2 => cross(&hardy, &xw),
            Kind::L42i => cross(&xw, &lp),
            Kind::L42ii => cross(&xw, &hardy),
            Kind::Kp => cross(&smooth, &smooth),
            Kind::P62 | Kind::Neg => {
                let mut v = cross(&lp, &xw);
                v.push((SpikeProbe, BmoLogSpike, true));
                v
            }
            Kind::P63B1 | Kind::P63B2 => cross(&local_hardy, &xw),
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        let mut params = Vec::new();
        if self.kind == Kind::T32i {
            params.push(format!("sigma={}", self.sigma));
        }
        if self.kind.uses_p() {
            params.push(format!("p={}", format_number(self.p)));
        }
        if self.kind == Kind::Kp {
            params.push(format!("s={}", format_number(self.s)));
        }
        if !params.is_empty() {
            write!(f, ":{}", params.join(","))?;
        }
        Ok(())
    }
}

/// Configuration resolved into the objects the ratios need.
#[derive(Clone, Debug)]
pub struct Harness {
    config: HarnessConfig,
    fam: LPFamily,
    weight: RegularizedWeight,
    w1: RegularizedWeight,
}

/// Per-grid state shared by the trials of one resolution.
struct GridContext {
    tgrid: TimeGrid,
    plain: ParaproductSpec,
    alternating: ParaproductSpec,
}

fn ratio(numerator: f64, denominator: f64) -> Result<f64, RatioError> {
    if denominator > 0.0 && denominator.is_finite() && numerator.is_finite() {
        Ok(numerator / denominator)
    } else {
        Err(RatioError::DivideByZero)
    }
}

impl Harness {
    pub fn new(config: HarnessConfig) -> Result<Self, HarnessError> {
        Ok(Self {
            config,
            fam: LPFamily::new(),
            weight: RegularizedWeight::from_spec(config.weight)?,
            w1: RegularizedWeight::log(1.0),
        })
    }

    pub fn config(&self) -> &HarnessConfig {
        &self.config
    }

    pub fn grid(&self, n: usize) -> Result<Grid, HarnessError> {
        Ok(Grid::new(self.config.grid.dim, n, self.config.grid.side)?)
    }

    pub fn tgrid(&self, grid: &Grid) -> TimeGrid {
        let q = self.config.lpfamily_q;
        let auto = TimeGrid::for_grid(grid, q);
        match (self.config.tgrid.t_min, self.config.tgrid.t_max) {
            (None, None) => auto,
            (lo, hi) => TimeGrid::covering(lo.unwrap_or(auto.t_min()), hi.unwrap_or(auto.t_max()), q),
        }
    }

    fn context(&self, grid: &Grid) -> GridContext {
        let tgrid = self.tgrid(grid);
        GridContext {
            tgrid,
            plain: ParaproductSpec::new(self.fam, Modulation::One, tgrid),
            alternating: ParaproductSpec::new(self.fam, Modulation::Alternating, tgrid),
        }
    }

    fn xw(&self, g: &SampledField, ctx: &GridContext) -> f64 {
        xw_norm(g, &self.weight, &self.fam, &ctx.tgrid)
    }

    /// The ratio of `id` for one pair.
    pub fn evaluate(&self, id: &Inequality, f: &SampledField, g: &SampledField) -> Result<f64, RatioError> {
        assert_eq!(f.grid(), g.grid(), "ratio across different grids");
        let ctx = self.context(f.grid());
        self.evaluate_in(id, f, g, &ctx)
    }

    fn evaluate_in(&self, id: &Inequality, f: &SampledField, g: &SampledField, ctx: &GridContext) -> Result<f64, RatioError> {
        let p = id.p;
        let tg = &ctx.tgrid;
        let hardy = TargetSpace::Hardy(*tg);
        let w = &self.weight;
        // denominators first: degenerate trials skip the expensive numerators
        match id.kind {
            Kind::T32i => {
                let den = lp_norm(f, p) * self.xw(g, ctx);
                ratio(0.0, den)?;
                let sigma = BilinearSymbol::builtin(&id.sigma).map_err(|_| RatioError::DivideByZero)?;
                ratio(jw_norm(&apply_bilinear(&sigma, f, g), w, &TargetSpace::Lp(p)), den)
            }
            Kind::T32iiGood | Kind::T32iiBad => {
                let den = H1_norm(f, tg) * self.xw(g, ctx);
                ratio(0.0, den)?;
                let (b1, b2) = product_decompose(&ctx.plain, f, g);
                let num = if id.kind == Kind::T32iiGood { lp_norm(&b1, 1.0) } else { jw_norm(&b2, w, &hardy) };
                ratio(num, den)
            }
            Kind::T43i => {
                let den = lp_norm(f, p) * self.xw(g, ctx);
                ratio(0.0, den)?;
                ratio(jw_norm(&pi(&ctx.plain, f, g), w, &TargetSpace::Lp(p)), den)
            }
            Kind::T43iiPi1 => {
                let den = H1_norm(f, tg) * self.xw(g, ctx);
                ratio(0.0, den)?;
                ratio(jw_norm(&pi1(&ctx.plain, f, g), w, &hardy), den)
            }
            Kind::T43iiPi2 => {
                let den = H1_norm(f, tg) * BMO_norm(g);
                ratio(0.0, den)?;
                ratio(lp_norm(&pi2(&ctx.plain, f, g), 1.0), den)
            }
            Kind::L42i => {
                let den = self.xw(f, ctx) * lp_norm(g, p);
                ratio(0.0, den)?;
                ratio(lp_norm(&pi(&ctx.plain, f, g), p), den)
            }
            Kind::L42ii => {
                let den = self.xw(f, ctx) * H1_norm(g, tg);
                ratio(0.0, den)?;
                ratio(lp_norm(&pi(&ctx.plain, f, g), 1.0), den)
            }
            Kind::Kp => kato_ponce_ratio(f, g, id.s, p, &self.w1).and_then(|r| ratio(r, 1.0)),
            Kind::P62 | Kind::Neg => {
                let den = lp_norm(f, p) * bmo_norm(g);
                ratio(0.0, den)?;
                // samples of the pointwise product
                let fg = f.mul(g);
                let num = if id.kind == Kind::P62 { jw_norm(&fg, &self.w1, &TargetSpace::Lp(p)) } else { lp_norm(&fg, p) };
                ratio(num, den)
            }
            Kind::P63B1 | Kind::P63B2 => {
                let den = h1_norm(f, tg) * bmo_norm(g);
                ratio(0.0, den)?;
                let (b1, b2) = product_decompose(&ctx.plain, f, g);
                let num = if id.kind == Kind::P63B1 { lp_norm(&b1, 1.0) } else { jw_norm(&b2, &self.w1, &hardy) };
                ratio(num, den)
            }
            Kind::Appx => {
                let den = lp_norm(f, 2.0) * self.xw(g, ctx);
                ratio(0.0, den)?;
                ratio(jw_norm(&pi(&ctx.alternating, f, g), w, &TargetSpace::Lp(2.0)), den)
            }
        }
    }

    /// The pair of trial `trial` for `id` on `grid`.
    pub fn draw(&self, id: &Inequality, grid: &Grid, seed: u64, trial: usize) -> (SampledField, SampledField) {
        let pairs = id.pairs();
        let (fk, gk, shared) = pairs[trial % pairs.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let fs = rng.next_u64();
        let gs = if shared { fs } else { rng.next_u64() };
        let params = &self.config.families;
        (TestFamily::new(fk, fs).generate(grid, params), TestFamily::new(gk, gs).generate(grid, params))
    }

    fn run_grid(&self, id: &Inequality, trials: usize, grid: &Grid, seed: u64) -> (Vec<TrialRecord>, usize) {
        let ctx = self.context(grid);
        let label = id.to_string();
        let outcomes: Vec<Option<f64>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let (f, g) = self.draw(id, grid, seed, t);
                self.evaluate_in(id, &f, &g, &ctx).ok()
            })
            .collect();
        let skipped = outcomes.iter().filter(|o| o.is_none()).count();
        let records = outcomes
            .into_iter()
            .enumerate()
            .filter_map(|(t, r)| r.map(|ratio| TrialRecord { id: label.clone(), n: grid.points(), trial: t, seed, ratio }))
            .collect();
        (records, skipped)
    }

    /// `trials` ratios of `id` on `grid`.
    pub fn estimate_ratio(&self, id: &Inequality, trials: usize, grid: &Grid, seed: u64) -> RatioReport {
        let start = Instant::now();
        let (records, skipped) = self.run_grid(id, trials, grid, seed);
        let mut report =
            RatioReport::from_trials(&id.to_string(), seed, records, &[(grid.points(), skipped)], Some(self.config));
        report.wall_time_s = start.elapsed().as_secs_f64();
        report
    }

    /// `estimate_ratio` at each resolution with shared seeds.
    pub fn resolution_sweep(
        &self,
        id: &Inequality,
        ns: &[usize],
        trials: usize,
        seed: u64,
    ) -> Result<RatioReport, HarnessError> {
        if ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::UnsortedResolutions);
        }
        let start = Instant::now();
        let mut records = Vec::new();
        let mut skipped = Vec::new();
        for &n in ns {
            let grid = self.grid(n)?;
            let (r, s) = self.run_grid(id, trials, &grid, seed);
            records.extend(r);
            skipped.push((n, s));
        }
        let mut report = RatioReport::from_trials(&id.to_string(), seed, records, &skipped, Some(self.config));
        report.wall_time_s = start.elapsed().as_secs_f64();
        Ok(report)
    }

    /// Sampled range of a two-sided norm equivalence on `grid`.
    pub fn equivalence_interval(&self, eq: Equivalence, trials: usize, grid: &Grid, seed: u64) -> EquivalenceReport {
        let ctx = self.context(grid);
        let unit = RegularizedWeight::unit();
        let fams = [FamilyKind::BandGauss, FamilyKind::SmoothedStep, FamilyKind::BoundedTrig, FamilyKind::DyadicBump];
        let ratios: Vec<f64> = (0..trials)
            .into_par_iter()
            .filter_map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let f = TestFamily::new(fams[t % fams.len()], rng.next_u64()).generate(grid, &self.config.families);
                let (num, den) = match eq {
                    Equivalence::JwTriebel(p) => {
                        (jw_norm(&f, &self.weight, &TargetSpace::Lp(p)), triebel_norm(&f, &self.weight, p))
                    }
                    // J_{w_b}(L²) carries the refined-Sobolev weight of order −b
                    Equivalence::JwRefined(b) => (
                        jw_norm(&f, &RegularizedWeight::log(b), &TargetSpace::Lp(2.0)),
                        refined_sobolev_norm(&f, -b),
                    ),
                    Equivalence::XwLinf => (xw_norm(&f, &unit, &self.fam, &ctx.tgrid), f.max_abs()),
                };
                ratio(num, den).ok()
            })
            .collect();
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(0.0, f64::max);
        EquivalenceReport { id: eq.to_string(), n: grid.points(), trials: ratios.len(), min, max }
    }
}

/// Two-sided norm equivalences checked by sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Equivalence {
    /// `‖f‖_{J_w(Lᵖ)}` against the weighted Triebel–Lizorkin norm.
    JwTriebel(f64),
    /// `‖f‖_{J_{w_b}(L²)}` against the refined Sobolev norm.
    JwRefined(f64),
    /// `‖f‖_{X_1}` against `‖f‖_∞`.
    XwLinf,
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equivalence::JwTriebel(p) => write!(f, "jw-triebel:p={}", format_number(*p)),
            Equivalence::JwRefined(b) => write!(f, "jw-refined-sobolev:b={}", format_number(*b)),
            Equivalence::XwLinf => write!(f, "xw-linf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub min: f64,
    pub max: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn id_parsing() {
        let id = Inequality::parse("T4.3i:p=4/3").unwrap();
        assert_eq!(id.kind, Kind::T43i);
        assert!((id.p - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(id.to_string(), "T4.3i:p=4/3");
        assert_eq!(Inequality::parse("T3.2i:sigma=riesz-ratio").unwrap().to_string(), "T3.2i:sigma=riesz-ratio,p=2");
        assert_eq!(Inequality::parse("KP").unwrap().to_string(), "KP:p=2,s=6");
        for bad in ["X1", "APPX:p=3", "T3.2i:sigma=nope", "P6.2:p=1", "T4.3i:p"] {
            assert!(matches!(Inequality::parse(bad), Err(HarnessError::UnknownId(_))), "{bad}");
        }
        for id in Inequality::standard_suite() {
            assert_eq!(Inequality::parse(&id.to_string()).unwrap(), id);
        }
        assert_eq!(Inequality::expand("P6.3").unwrap().len(), 2);
    }

    #[test]
    fn config_json() {
        let c = HarnessConfig::from_json(r#"{"weight":{"kind":"const"},"lpfamily_q":16}"#).unwrap();
        assert_eq!(c.weight, WeightSpec::Const);
        assert_eq!(c.lpfamily_q, 16);
        assert_eq!(c.grid, GridConfig::default());
        let back = HarnessConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(HarnessConfig::from_json("{").is_err());
    }

    #[test]
    fn degenerate_trials_are_rejected() {
        let h = Harness::new(HarnessConfig::default()).unwrap();
        let grid = Grid::line(256).unwrap();
        let z = SampledField::zeros(grid);
        for id in Inequality::standard_suite() {
            assert_eq!(h.evaluate(&id, &z, &z), Err(RatioError::DivideByZero), "{id}");
        }
    }

    #[test]
    fn homogeneous_in_f() {
        let h = Harness::new(HarnessConfig::default()).unwrap();
        let grid = Grid::line(256).unwrap();
        let c = Complex64::new(-3.7, 0.0);
        let mut ids = Inequality::standard_suite();
        ids.push(Inequality::new(Kind::T32iiGood));
        ids.push(Inequality::new(Kind::T32iiBad));
        ids.push(Inequality::new(Kind::Neg));
        for id in ids {
            let (f, g) = h.draw(&id, &grid, 3, 1);
            let r = h.evaluate(&id, &f, &g).unwrap();
            let rc = h.evaluate(&id, &f.scale(c), &g).unwrap();
            assert!((r - rc).abs() <= 1e-10 * r, "{id}: {r} vs {rc}");
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let h = Harness::new(HarnessConfig::default()).unwrap();
        let id = Inequality::new(Kind::T43i);
        let sweep = h.resolution_sweep(&id, &[256, 512], 4, 11).unwrap();
        let a = h.estimate_ratio(&id, 4, &Grid::line(256).unwrap(), 11);
        let b = h.estimate_ratio(&id, 4, &Grid::line(512).unwrap(), 11);
        assert_eq!(sweep.per_resolution[0].max, a.max);
        assert_eq!(sweep.per_resolution[1].max, b.max);
        let again = h.resolution_sweep(&id, &[256, 512], 4, 11).unwrap();
        assert_eq!(again.digest(), sweep.digest());
        let empty = h.resolution_sweep(&id, &[256], 0, 11).unwrap();
        assert!(empty.trials.is_empty() && empty.max == 0.0);
        assert!(matches!(h.resolution_sweep(&id, &[512, 256], 1, 0), Err(HarnessError::UnsortedResolutions)));
    }
}
