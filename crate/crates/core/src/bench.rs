//! Timing of the type reducers on random instances.

use std::hint::black_box;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::fuzzy::FiringInterval;
use crate::reduce::{km_reduce, sc_reduce, wm_bounds, ReductionInput};
use crate::rng::{stream, streams};

/// Largest SC/KM endpoint gap still counted as agreement.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

/// Random firing intervals and consequents for `m` rules.
///
/// A quarter of the rules get a zero lower firing and a tenth get a crisp
/// firing, so degenerate shapes show up often. At least one lower firing is
/// positive, which keeps the Wu-Mendel bounds defined.
pub fn random_instance<R: Rng>(rng: &mut R, m: usize) -> (Vec<FiringInterval>, Vec<f64>) {
    let mut firings: Vec<FiringInterval> = (0..m)
        .map(|_| {
            let upper: f64 = rng.gen_range(1e-3..=1.0);
            let lower = match rng.gen_range(0..20) {
                0..=4 => 0.0,
                5..=6 => upper,
                _ => upper * rng.gen::<f64>(),
            };
            FiringInterval { lower, upper }
        })
        .collect();
    if firings.iter().all(|f| f.lower == 0.0) {
        let j = rng.gen_range(0..m);
        firings[j].lower = 0.5 * firings[j].upper;
    }
    let scale = [1e-3, 1.0, 1e3][rng.gen_range(0..3)];
    let w = (0..m).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
    (firings, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub rules: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    /// Calls per timed batch; per-call times are batch time over this.
    pub batch: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { rules: vec![2, 6, 12, 24], instances: 100_000, seed: 0, batch: 100 }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() || self.rules.contains(&0) {
            return Err(FelmError::InvalidConfig("rule counts must be non-empty and >= 1".into()));
        }
        if self.batch == 0 || self.instances < self.batch {
            return Err(FelmError::InvalidConfig(format!("need at least one batch: {} instances, batch {}", self.instances, self.batch)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub rules: usize,
    pub instances: usize,
    pub sc_median_ns: f64,
    pub km_median_ns: f64,
    pub wm_median_ns: f64,
    /// Largest |SC - KM| over both endpoints.
    pub max_disagreement: f64,
    /// Instances where SC and KM differ by more than the tolerance.
    pub violations: usize,
    pub sc_not_slower: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().map(|e| e.violations).sum()
    }
}

fn input<'a>(f: &'a [FiringInterval], w: &'a [f64]) -> ReductionInput<'a> {
    ReductionInput::new(black_box(f), black_box(w)).expect("instances are validated before timing")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

type Instance = (Vec<FiringInterval>, Vec<f64>);

/// Per-call nanoseconds of `f` over one batch.
fn time_batch<F: Fn(&[FiringInterval], &[f64])>(chunk: &[Instance], f: F) -> f64 {
    let start = Instant::now();
    for (firings, w) in chunk {
        f(firings, w);
    }
    start.elapsed().as_nanos() as f64 / chunk.len() as f64
}

fn call_sc(f: &[FiringInterval], w: &[f64]) {
    black_box(sc_reduce(&input(f, w)).ok());
}

fn call_km(f: &[FiringInterval], w: &[f64]) {
    black_box(km_reduce(&input(f, w)).ok());
}

fn call_wm(f: &[FiringInterval], w: &[f64]) {
    black_box(wm_bounds(&input(f, w)).ok());
}

pub fn run_bench_entry(rules: usize, instances: usize, batch: usize, seed: u64) -> Result<BenchEntry> {
    let mut rng = stream(seed ^ rules as u64, streams::BENCH);
    let data: Vec<Instance> = (0..instances).map(|_| random_instance(&mut rng, rules)).collect();

    let mut max_disagreement: f64 = 0.0;
    let mut violations = 0;
    for (firings, w) in &data {
        let input = ReductionInput::new(firings, w)?;
        let (sc, km) = (sc_reduce(&input)?, km_reduce(&input)?);
        let gap = (sc.y_left - km.y_left).abs().max((sc.y_right - km.y_right).abs());
        max_disagreement = max_disagreement.max(gap);
        violations += usize::from(!(gap <= AGREEMENT_TOLERANCE));
    }

    // one untimed pass warms caches, then the reducers take turns on each
    // batch so drift in machine load hits all of them alike
    for (f, w) in &data {
        call_sc(f, w);
        call_km(f, w);
        call_wm(f, w);
    }
    let (mut sc, mut km, mut wm) = (Vec::new(), Vec::new(), Vec::new());
    for chunk in data.chunks_exact(batch) {
        sc.push(time_batch(chunk, call_sc));
        km.push(time_batch(chunk, call_km));
        wm.push(time_batch(chunk, call_wm));
    }
    let (sc_median_ns, km_median_ns, wm_median_ns) = (median(sc), median(km), median(wm));
    Ok(BenchEntry {
        rules,
        instances,
        sc_median_ns,
        km_median_ns,
        wm_median_ns,
        max_disagreement,
        violations,
        sc_not_slower: sc_median_ns <= km_median_ns,
    })
}

pub fn reduce_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let entries = cfg.rules.iter().map(|&m| run_bench_entry(m, cfg.instances, cfg.batch, cfg.seed)).collect::<Result<_>>()?;
    Ok(BenchReport { config: cfg.clone(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_valid_and_seeded() {
        let mut a = stream(3, streams::BENCH);
        let mut b = stream(3, streams::BENCH);
        for m in 1..10 {
            let (f, w) = random_instance(&mut a, m);
            assert_eq!((f.clone(), w.clone()), random_instance(&mut b, m));
            assert!(f.iter().all(|fi| 0.0 <= fi.lower && fi.lower <= fi.upper && fi.upper <= 1.0));
            assert!(f.iter().any(|fi| fi.lower > 0.0));
            assert!(ReductionInput::new(&f, &w).is_ok());
        }
    }

    #[test]
    fn small_bench_reports_every_size() {
        let cfg = BenchConfig { rules: vec![1, 6], instances: 200, seed: 1, batch: 20 };
        let report = reduce_bench(&cfg).unwrap();
        assert_eq!(report.entries.len(), 2);
        assert_eq!(report.violations(), 0);
        assert!(report.entries.iter().all(|e| e.sc_median_ns > 0.0 && e.km_median_ns > 0.0));
    }

    #[test]
    fn rejects_empty_batches() {
        assert!(reduce_bench(&BenchConfig { instances: 5, batch: 10, ..BenchConfig::default() }).is_err());
        assert!(reduce_bench(&BenchConfig { rules: vec![], ..BenchConfig::default() }).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
