//! The acceptance suite: exact identities, normalizations, Carleson and
//! symbol-class oracles, norm equivalences and the stability sweeps. Each
//! criterion returns a pass flag plus one line per individual check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Equivalence, Harness, HarnessConfig, Inequality, Kind, DRIFT_LIMIT, NEGATIVE_GROWTH, SWEEP, SWEEP_TRIALS};
use crate::carleson::{carleson_embedding_ratio, carleson_norm, weighted_band, TentFunction};
use crate::grid::{dealiased_product, dft, idft, Grid, SampledField, SpectralField};
use crate::multipliers::{
    apply_bilinear, bessel, bessel_spectrum, cm_constant, j_w, j_w_inv, scaling_law_check, split_sigma, BilinearSymbol, LPFamily,
    BUILTIN_SYMBOLS,
};
use crate::paraproducts::{
    calderon_reconstruct, pi, pi1, pi2, product_decompose, quadratic_sum, ParaproductConfig, ParaproductSpec,
};
use crate::spaces::lp_norm;
use crate::tgrid::TimeGrid;
use crate::weights::{RegularizedWeight, ResolutionOfUnity, WeightSpec};

pub const CRITERIA: [(u32, &str); 9] = [
    (1, "exact identities"),
    (2, "Calderon normalization"),
    (3, "two-sided quadratic estimate"),
    (4, "Carleson oracles"),
    (5, "norm-equivalence intervals"),
    (6, "boundedness stability sweeps"),
    (7, "negative control grows"),
    (8, "product reconstruction"),
    (9, "symbol-class checker"),
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub number: u32,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<String>,
}

impl CriterionOutcome {
    /// `PASS 3 two-sided quadratic estimate`.
    pub fn headline(&self) -> String {
        format!("{} {} {}", if self.passed { "PASS" } else { "FAIL" }, self.number, self.title)
    }
}

struct Checks {
    lines: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Self { lines: Vec::new(), passed: true }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("[{}] {line}", if ok { "ok" } else { "fail" }));
    }

    /// `value ≤ bound`.
    fn at_most(&mut self, label: &str, value: f64, bound: f64) {
        self.record(value <= bound, format!("{label}: {value:.3e} <= {bound:.1e}"));
    }
}

fn band_limited(grid: Grid, kmax: i64, rng: &mut ChaCha8Rng) -> SampledField {
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

fn rel_sup(a: &SampledField, b: &SampledField) -> f64 {
    a.sub(b).max_abs() / b.max_abs().max(1e-300)
}

fn grids() -> [Grid; 2] {
    [Grid::line(256).expect("valid grid"), Grid::new(2, 32, crate::grid::DEFAULT_SIDE).expect("valid grid")]
}

fn identities(seed: u64) -> Checks {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fam = LPFamily::new();
    for grid in grids() {
        let tag = format!("n={} N={}", grid.dim(), grid.points());
        let n = grid.points() as i64;
        let quarter = n / 4 - 1;

        let mut worst = 0.0f64;
        let one = BilinearSymbol::builtin("one").expect("builtin");
        for _ in 0..10 {
            let f = band_limited(grid, quarter / 2, &mut rng);
            let g = band_limited(grid, quarter / 2, &mut rng);
            worst = worst.max(rel_sup(&apply_bilinear(&one, &f, &g), &f.mul(&g)));
        }
        c.at_most(&format!("T_1(f,g) = fg, {tag}"), worst, 1e-10);

        let mut worst = 0.0f64;
        for spec in [WeightSpec::Log { b: 1.0 }, WeightSpec::Log { b: -1.0 }, WeightSpec::Loglog { b1: 1.0, b2: 2.0 }] {
            let rw = RegularizedWeight::from_spec(spec).expect("admissible");
            for _ in 0..5 {
                let f = band_limited(grid, n / 2, &mut rng);
                worst = worst.max(rel_sup(&j_w(&rw, &j_w_inv(&rw, &f)), &f));
            }
        }
        c.at_most(&format!("J_w J_(1/w) = id, {tag}"), worst, 1e-10);

        let (mut worst, mut round_trip) = (0.0f64, 0.0f64);
        for s in [1.5, 6.0] {
            for _ in 0..5 {
                let f = band_limited(grid, n / 2, &mut rng);
                let composed = idft(&bessel_spectrum(s, &bessel_spectrum(-s, &dft(&f))));
                worst = worst.max(rel_sup(&composed, &f));
                if s < 2.0 {
                    round_trip = round_trip.max(rel_sup(&bessel(s, &bessel(-s, &f)), &f));
                }
            }
        }
        c.at_most(&format!("J^1.5 J^-1.5 = id through physical space, {tag}"), round_trip, 1e-10);
        c.at_most(&format!("J^s J^-s = id on coefficients, s in {{1.5, 6}}, {tag}"), worst, 1e-10);

        let spec = ParaproductSpec::for_grid(&grid, ParaproductConfig::default());
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let f = band_limited(grid, n / 2, &mut rng);
            let g = band_limited(grid, n / 2, &mut rng);
            let split = pi(&spec, &f, &g).sub(&pi1(&spec, &f, &g)).sub(&pi2(&spec, &f, &g));
            worst = worst.max(split.max_abs() / (lp_norm(&f, 2.0) * lp_norm(&g, 2.0)));
        }
        c.at_most(&format!("Pi = Pi_1 + Pi_2 (relative to |f|_2 |g|_2), {tag}"), worst, 1e-10);

        let tg = TimeGrid::for_grid(&grid, 8);
        let constant = SampledField::constant(grid, Complex64::new(3.7, 0.0));
        let mut worst = 0.0f64;
        for b in [1.0, -1.0] {
            let bands = weighted_band(&constant, &RegularizedWeight::log(b), &fam, &tg);
            worst = worst.max(bands.rows().iter().flatten().fold(0.0, |m: f64, v| m.max(*v)) / 3.7);
        }
        c.at_most(&format!("R_t 1 = 0, {tag}"), worst, 1e-10);

        let res = ResolutionOfUnity;
        let mags = grid.frequency_magnitudes();
        let r_max = mags.iter().copied().fold(0.0, f64::max);
        let depth = res.depth_for(r_max);
        let fine = (0..=20_000).map(|i| r_max * i as f64 / 20_000.0);
        let worst = mags
            .iter()
            .copied()
            .chain(fine)
            .map(|r| ((0..=depth).map(|j| res.phi(j, r)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        c.at_most(&format!("sum of phi_j = 1 up to |xi| = {r_max:.1}, {tag}"), worst, 1e-10);

        let mut worst = 0.0f64;
        for _ in 0..5 {
            let f = band_limited(grid, n / 2, &mut rng);
            let physical = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_volume();
            let spectral = dft(&f).coeffs().iter().map(|v| v.norm_sqr()).sum::<f64>() / grid.volume();
            worst = worst.max((physical - spectral).abs() / physical);
        }
        c.at_most(&format!("Parseval, {tag}"), worst, 1e-10);
    }

    let mut worst = 0.0f64;
    for name in BUILTIN_SYMBOLS {
        let sigma = BilinearSymbol::builtin(name).expect("builtin");
        let (t1, t2) = split_sigma(&sigma);
        for dim in [1usize, 2] {
            for _ in 0..500 {
                let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
                let xi: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
                let eta: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
                let s = sigma.eval(&xi, &eta);
                let err = (t1.eval(&xi, &eta) + t2.eval(&xi, &eta) - s).abs();
                worst = worst.max(err / s.abs().max(1e-300));
            }
        }
    }
    c.at_most("tau_1 + tau_2 = sigma over the builtin symbols", worst, 1e-10);
    c
}

fn calderon(seed: u64) -> Checks {
    let mut c = Checks::new();
    let fam = LPFamily::new();
    let quad = fam.psi_log_quadrature(64);
    c.at_most("|int |psi|^2 ds/s - 1| at 64 points per octave", (quad - 1.0).abs(), 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for grid in grids() {
        let spec = ParaproductSpec::for_grid(&grid, ParaproductConfig { q: 16, ..Default::default() });
        let worst = (0..10)
            .map(|_| {
                let f = mean_zero(band_limited(grid, grid.points() as i64 / 2, &mut rng));
                lp_norm(&calderon_reconstruct(&spec, &f).sub(&f), 2.0) / lp_norm(&f, 2.0)
            })
            .fold(0.0, f64::max);
        c.at_most(&format!("Calderon reconstruction L2 error at q=16, n={}", grid.dim()), worst, 1e-3);
    }
    c
}

fn quadratic(seed: u64) -> Checks {
    let mut c = Checks::new();
    let grid = Grid::line(256).expect("valid grid");
    let spec = ParaproductSpec::for_grid(&grid, ParaproductConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratios: Vec<f64> = (0..50)
        .map(|_| {
            let f = mean_zero(band_limited(grid, 127, &mut rng));
            quadratic_sum(&spec, &f) / lp_norm(&f, 2.0).powi(2)
        })
        .collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    c.record(
        lo >= 0.99 && hi <= 1.001,
        format!("sum_j |Q_t f|^2 / |f|^2 over 50 inputs in [{lo:.6}, {hi:.6}] within [0.99, 1.001]"),
    );
    c
}

fn carleson(seed: u64) -> Checks {
    let mut c = Checks::new();
    let fam = LPFamily::new();
    for (n, k) in [(256usize, 5i64), (512, 40), (1024, 3), (1024, 300)] {
        let grid = Grid::line(n).expect("valid grid");
        let tg = TimeGrid::for_grid(&grid, 8);
        let g = SampledField::mode(grid, [k, 0]);
        let norm = carleson_norm(&TentFunction::from_band(&g, tg, |s| fam.psi(s))).norm;
        c.at_most(&format!("single mode k={k}, N={n}: |Carleson norm - 1| ({norm:.6})"), (norm - 1.0).abs(), 1e-2);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for grid in grids() {
        let tg = TimeGrid::for_grid(&grid, 8);
        let ones = TentFunction::from_fn(grid, tg, |_, _| 1.0).expect("finite");
        for p in [1.0, 2.0, 4.0] {
            for _ in 0..4 {
                let g = band_limited(grid, grid.points() as i64 / 2, &mut rng);
                let bands = TentFunction::from_band(&g, tg, |s| fam.psi(s));
                let noise: Vec<Vec<f64>> =
                    (0..tg.len()).map(|_| (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
                for gt in [bands, TentFunction::new(grid, tg, noise).expect("finite")] {
                    let r = carleson_embedding_ratio(&ones, &gt, p).expect("nonzero input");
                    worst = worst.max(r);
                }
            }
        }
    }
    c.at_most("embedding ratio with F = 1, excess over 1", worst - 1.0, 1e-10);
    c
}

fn equivalences(harness: &Harness, seed: u64) -> Checks {
    let mut c = Checks::new();
    let eqs = [
        Equivalence::JwTriebel(4.0 / 3.0),
        Equivalence::JwTriebel(2.0),
        Equivalence::JwTriebel(4.0),
        Equivalence::JwRefined(-1.0),
        Equivalence::JwRefined(1.0),
        Equivalence::XwLinf,
    ];
    let (coarse, fine) = (SWEEP[0], SWEEP[SWEEP.len() - 1]);
    for eq in eqs {
        let a = harness.equivalence_interval(eq, 100, &harness.grid(coarse).expect("valid grid"), seed);
        let b = harness.equivalence_interval(eq, 100, &harness.grid(fine).expect("valid grid"), seed);
        let moved = (b.min / a.min - 1.0).abs().max((b.max / a.max - 1.0).abs());
        let ok = a.trials == 100 && b.trials == 100 && a.min > 0.0 && moved <= DRIFT_LIMIT;
        c.record(
            ok,
            format!(
                "{eq}: [{:.4}, {:.4}] at N={coarse}, [{:.4}, {:.4}] at N={fine}, endpoints moved {moved:.3}",
                a.min, a.max, b.min, b.max
            ),
        );
    }
    c
}

fn sweep_line(report: &super::RatioReport) -> String {
    let maxima: Vec<String> = report.per_resolution.iter().map(|r| format!("{:.4}", r.max)).collect();
    let drifts: Vec<String> = report.drifts().iter().map(|d| format!("{:+.3}", d)).collect();
    format!(
        "{}: maxima [{}], drifts [{}], skipped {}",
        report.id,
        maxima.join(", "),
        drifts.join(", "),
        report.skipped
    )
}

fn stable(harness: &Harness, ids: &[Inequality], seed: u64) -> Checks {
    let mut c = Checks::new();
    for id in ids {
        match harness.resolution_sweep(id, &SWEEP, SWEEP_TRIALS, seed) {
            Ok(report) => {
                let ok = report.is_stable(DRIFT_LIMIT) && report.per_resolution.iter().all(|r| r.trials > 0);
                c.record(ok, sweep_line(&report));
            }
            Err(e) => c.record(false, format!("{id}: {e}")),
        }
    }
    c
}

fn negative_control(harness: &Harness, seed: u64) -> Checks {
    let mut c = Checks::new();
    match harness.resolution_sweep(&Inequality::new(Kind::Neg), &SWEEP, SWEEP_TRIALS, seed) {
        Ok(report) => {
            let growth = report.growth() - 1.0;
            c.record(growth > NEGATIVE_GROWTH, format!("{}; growth {growth:.3} > {NEGATIVE_GROWTH}", sweep_line(&report)));
        }
        Err(e) => c.record(false, format!("NEG: {e}")),
    }
    c
}

fn product(harness: &Harness, seed: u64) -> Checks {
    let mut c = Checks::new();
    let grid = Grid::line(256).expect("valid grid");
    let spec = ParaproductSpec::for_grid(&grid, ParaproductConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = (0..100)
        .map(|_| {
            let f = band_limited(grid, 127, &mut rng);
            let g = band_limited(grid, 127, &mut rng);
            let (b1, b2) = product_decompose(&spec, &f, &g);
            rel_sup(&b1.add(&b2), &dealiased_product(&f, &g))
        })
        .fold(0.0, f64::max);
    c.at_most("B1 + B2 = fg over 100 random pairs", worst, 1e-9);
    let worst = (0..10)
        .map(|_| {
            let f = band_limited(grid, 60, &mut rng);
            let g = band_limited(grid, 60, &mut rng);
            let (b1, b2) = product_decompose(&spec, &f, &g);
            rel_sup(&b1.add(&b2), &f.mul(&g))
        })
        .fold(0.0, f64::max);
    c.at_most("B1 + B2 = pointwise fg below N/4", worst, 1e-9);
    let sweeps = stable(harness, &[Inequality::new(Kind::P63B1), Inequality::new(Kind::P63B2)], seed);
    for line in sweeps.lines {
        c.lines.push(line);
    }
    c.passed &= sweeps.passed;
    c
}

fn symbols() -> Checks {
    let mut c = Checks::new();
    let one = BilinearSymbol::builtin("one").expect("builtin");
    match cm_constant(&one, 1, 5) {
        Ok(report) => {
            c.at_most("|level 0 of sigma = 1 minus 1|", (report.levels[0] - 1.0).abs(), 1e-12);
            let noise = report.levels[1..].iter().copied().fold(0.0, f64::max);
            c.at_most("finite-difference noise at levels 1..5", noise, 1e-6);
        }
        Err(e) => c.record(false, format!("one: {e}")),
    }
    for (name, expect_cm) in [("degree-one", false), ("one", true), ("riesz-ratio", true)] {
        let sigma = BilinearSymbol::builtin(name).expect("builtin");
        match scaling_law_check(&sigma, 1, 5) {
            Ok((is_cm, base, extended)) => c.record(
                is_cm == expect_cm,
                format!(
                    "{name}: scaling-law verdict {} (constant {:.3e} -> {:.3e} over the extended range)",
                    if is_cm { "CM" } else { "not CM" },
                    base.constant,
                    extended.constant
                ),
            ),
            Err(e) => c.record(false, format!("{name}: {e}")),
        }
    }
    c
}

/// Runs criterion `number` (1–9) with the default harness configuration.
pub fn run_criterion(number: u32, seed: u64) -> CriterionOutcome {
    let harness = Harness::new(HarnessConfig::default()).expect("default configuration is valid");
    run_criterion_with(&harness, number, seed)
}

pub fn run_criterion_with(harness: &Harness, number: u32, seed: u64) -> CriterionOutcome {
    let title = CRITERIA.iter().find(|c| c.0 == number).map(|c| c.1).unwrap_or("unknown criterion");
    let checks = match number {
        1 => identities(seed),
        2 => calderon(seed),
        3 => quadratic(seed),
        4 => carleson(seed),
        5 => equivalences(harness, seed),
        6 => stable(harness, &Inequality::standard_suite(), seed),
        7 => negative_control(harness, seed),
        8 => product(harness, seed),
        9 => symbols(),
        _ => {
            let mut c = Checks::new();
            c.record(false, format!("no criterion {number}"));
            c
        }
    };
    CriterionOutcome { number, title: title.to_string(), passed: checks.passed, checks: checks.lines }
}

/// Every criterion in order; `progress` sees each outcome as it completes.
pub fn run_all(harness: &Harness, seed: u64, mut progress: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|&(number, _)| {
            let outcome = run_criterion_with(harness, number, seed);
            progress(&outcome);
            outcome
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for k in [1, 2, 3, 4, 9] {
            let o = run_criterion(k, 0);
            assert!(o.passed, "{}\n{}", o.headline(), o.checks.join("\n"));
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        let o = run_criterion(10, 0);
        assert!(!o.passed);
        assert!(o.headline().starts_with("FAIL 10"));
    }
}
