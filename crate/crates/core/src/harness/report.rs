//! Ratio reports: aggregation, JSON/CSV emission and a content digest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessConfig;
use crate::error::HarnessError;

/// One successful trial; also the CSV row `id,N,trial,seed,ratio`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub skipped: usize,
    pub max: f64,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub id: String,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    /// Trials dropped for a degenerate denominator, over all resolutions.
    pub skipped: usize,
    pub max: f64,
    pub median: f64,
    pub per_resolution: Vec<ResolutionSummary>,
    pub config: Option<HarnessConfig>,
    pub wall_time_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// `(max, median)` of a sample, `(0, 0)` when empty.
fn max_median(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let median = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
    (v[m - 1], median)
}

impl RatioReport {
    /// Aggregates trial records; `skipped` lists `(N, count)` per resolution
    /// in ascending `N`.
    pub fn from_trials(
        id: &str,
        seed: u64,
        trials: Vec<TrialRecord>,
        skipped: &[(usize, usize)],
        config: Option<HarnessConfig>,
    ) -> Self {
        let mut ns: Vec<usize> = skipped.iter().map(|s| s.0).chain(trials.iter().map(|t| t.n)).collect();
        ns.sort_unstable();
        ns.dedup();
        let per_resolution = ns
            .iter()
            .map(|&n| {
                let ratios: Vec<f64> = trials.iter().filter(|t| t.n == n).map(|t| t.ratio).collect();
                let (max, median) = max_median(&ratios);
                let skipped = skipped.iter().filter(|s| s.0 == n).map(|s| s.1).sum();
                ResolutionSummary { n, trials: ratios.len(), skipped, max, median }
            })
            .collect();
        let all: Vec<f64> = trials.iter().map(|t| t.ratio).collect();
        let (max, median) = max_median(&all);
        Self {
            id: id.to_string(),
            seed,
            trials,
            skipped: skipped.iter().map(|s| s.1).sum(),
            max,
            median,
            per_resolution,
            config,
            wall_time_s: 0.0,
        }
    }

    /// `max_{N_{i+1}} / max_{N_i} − 1` for consecutive resolutions.
    pub fn drifts(&self) -> Vec<f64> {
        self.per_resolution.windows(2).map(|w| w[1].max / w[0].max - 1.0).collect()
    }

    /// Every consecutive drift lies within `±limit`.
    pub fn is_stable(&self, limit: f64) -> bool {
        self.drifts().iter().all(|d| d.abs() <= limit)
    }

    /// Ratio of the largest to the smallest per-resolution maximum.
    pub fn growth(&self) -> f64 {
        match (self.per_resolution.first(), self.per_resolution.last()) {
            (Some(a), Some(b)) => b.max / a.max,
            _ => 1.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    /// Header plus one row per trial; ratios in 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "N", "trial", "seed", "ratio"]).expect("in-memory write");
        for t in &self.trials {
            w.write_record([
                t.id.clone(),
                t.n.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                format!("{:.16e}", t.ratio),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// Rebuilds a report from CSV rows. Skip counts, the config echo and
    /// the wall time are not part of the CSV and come back empty.
    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let trials: Vec<TrialRecord> =
            r.deserialize().collect::<Result<_, _>>().map_err(|e| HarnessError::Parse(e.to_string()))?;
        let id = trials.first().map(|t| t.id.clone()).unwrap_or_default();
        let seed = trials.first().map_or(0, |t| t.seed);
        Ok(Self::from_trials(&id, seed, trials, &[], None))
    }

    pub fn emit(&self, format: ReportFormat) -> Vec<u8> {
        match format {
            ReportFormat::Json => self.to_json().into_bytes(),
            ReportFormat::Csv => self.to_csv().into_bytes(),
        }
    }

    /// SHA-256 of the JSON form with the wall time zeroed, so equal
    /// configurations and seeds give equal digests.
    pub fn digest(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        hex::encode(Sha256::digest(serde_json::to_vec(&copy).expect("reports serialize")))
    }
}
