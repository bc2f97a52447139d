//! Seeded random corpus for checking `reconstruct(ecs(f)) = f`.

use crate::{CliError, Outcome, EXIT_DIFFER, EXIT_OK};
use ecs_core::barcode::ecs_within;
use ecs_core::reconstruct::reconstruct_within;
use ecs_core::series::{ratio, Rational};
use ecs_core::{Barcode, DEFAULT_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Chance of copying an existing bar, and separately of copying a lifespan.
const FORCE_PROBABILITY: f64 = 0.4;

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub count: usize,
    pub seed: u64,
    pub max_bars: usize,
    /// Births lie in `[lo, hi]`.
    pub grades: (i64, i64),
    /// Lifespans lie in `(lo, hi]`.
    pub lifespans: (i64, i64),
    /// Largest denominator of a generated rational.
    pub max_denominator: i64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { count: 100, seed: 0, max_bars: 8, grades: (-8, 8), lifespans: (0, 8), max_denominator: 4 }
    }
}

/// Parses `LO:HI`.
pub fn parse_range(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Parse(format!("invalid range '{s}', expected LO:HI"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().parse::<i64>().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

impl CorpusSpec {
    fn check(&self) -> Result<(), CliError> {
        if self.lifespans.1 <= 0 || self.lifespans.0 < 0 {
            return Err(CliError::Validation("lifespan range must satisfy 0 <= LO < HI".into()));
        }
        if self.lifespans.0 >= self.lifespans.1 {
            return Err(CliError::Validation("lifespan range must satisfy 0 <= LO < HI".into()));
        }
        if self.max_denominator < 1 {
            return Err(CliError::Validation("denominator bound must be positive".into()));
        }
        Ok(())
    }

    /// Case `index`, drawn from its own ChaCha stream so cases do not depend
    /// on evaluation order.
    pub fn case(&self, index: usize) -> Barcode {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let n = rng.gen_range(0..=self.max_bars);
        let mut pairs: Vec<(Rational, Rational)> = Vec::with_capacity(n);
        for _ in 0..n {
            let d = rng.gen_range(1..=self.max_denominator);
            let birth = ratio(rng.gen_range(self.grades.0 * d..=self.grades.1 * d), d);
            let d = rng.gen_range(1..=self.max_denominator);
            let life = ratio(rng.gen_range(self.lifespans.0 * d + 1..=self.lifespans.1 * d), d);
            pairs.push((birth, life));
        }
        if pairs.len() >= 2 && rng.gen_bool(FORCE_PROBABILITY) {
            let src = rng.gen_range(0..pairs.len() - 1);
            let last = pairs.len() - 1;
            pairs[last] = pairs[src].clone();
        }
        if pairs.len() >= 2 && rng.gen_bool(FORCE_PROBABILITY) {
            let a = rng.gen_range(0..pairs.len());
            let b = rng.gen_range(0..pairs.len());
            pairs[b].1 = pairs[a].1.clone();
        }
        Barcode::from_pairs(pairs).expect("generated lifespans are positive")
    }
}

/// Why a case failed, if it did.
pub fn check_case(f: &Barcode) -> Option<String> {
    let e = match ecs_within(f, None, DEFAULT_BUDGET) {
        Ok(e) => e,
        Err(err) => return Some(format!("forward map failed: {err}")),
    };
    match reconstruct_within(&e, DEFAULT_BUDGET) {
        Ok(back) if &back == f => None,
        Ok(back) => Some(format!("reconstructed {back}")),
        Err(err) => Some(err.to_string()),
    }
}

pub fn run(spec: &CorpusSpec) -> Result<Outcome, CliError> {
    spec.check()?;
    let results: Vec<(Barcode, Option<String>)> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let f = spec.case(i);
            let r = check_case(&f);
            (f, r)
        })
        .collect();
    let failures: Vec<usize> = (0..results.len()).filter(|&i| results[i].1.is_some()).collect();
    let passed = spec.count - failures.len();
    let mut out = format!(
        "roundtrip seed={} count={} max-bars={} grades={}:{} lifespans={}:{}\n",
        spec.seed, spec.count, spec.max_bars, spec.grades.0, spec.grades.1, spec.lifespans.0, spec.lifespans.1
    );
    out.push_str(&format!("passed {passed}/{}\n", spec.count));
    if let Some(&i) = failures.first() {
        let (f, why) = &results[i];
        out.push_str(&format!("first counterexample: case {i} {f}: {}\n", why.as_deref().unwrap_or("")));
    }
    Ok(Outcome { stdout: out, code: if failures.is_empty() { EXIT_OK } else { EXIT_DIFFER } })
}
