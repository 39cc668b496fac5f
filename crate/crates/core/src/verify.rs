//! Cross-checks between the tower oracle, the closed form and class
//! membership, plus probes of the stabilization conjectures and the
//! worked-example fixtures.

use num_bigint::BigUint;
use serde::Serialize;

use crate::arith::parse_decimal;
use crate::classes::{formula_check, min_base_class};
use crate::error::{Error, Result};
use crate::primes::{is_prime, RepnineForm};
use crate::speed::{
    constant_speed, constant_speed_report_from, phase_shift_base, speed_profile, speeds_through, SpeedProfile,
    TetrationBase,
};

/// One base where the three routes to `V(a)` disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub a: String,
    pub oracle: u64,
    pub formula: u64,
    pub membership: Vec<u64>,
}

/// `V(a, b)` differing from `V(a)` at a height where it should already agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureViolation {
    pub a: String,
    pub b: u64,
    pub observed: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub range: (u64, u64),
    pub precision: u32,
    /// Bases compared (multiples of 10 skipped).
    pub checked: u64,
    /// Largest working precision the oracle needed.
    pub max_digits_used: u32,
    pub mismatches: Vec<Mismatch>,
    pub conjecture_violations: Vec<ConjectureViolation>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Combine shard reports over adjacent ranges.
    pub fn merge(mut parts: Vec<SweepReport>) -> Option<SweepReport> {
        parts.sort_by_key(|p| p.range);
        let mut it = parts.into_iter();
        let mut acc = it.next()?;
        for p in it {
            acc.range.0 = acc.range.0.min(p.range.0);
            acc.range.1 = acc.range.1.max(p.range.1);
            acc.precision = acc.precision.min(p.precision);
            acc.checked += p.checked;
            acc.max_digits_used = acc.max_digits_used.max(p.max_digits_used);
            acc.mismatches.extend(p.mismatches);
            acc.conjecture_violations.extend(p.conjecture_violations);
        }
        Some(acc)
    }
}

pub const SWEEP_MAX: u64 = 1_000_000;
pub const SWEEP_MIN_DIGITS: u32 = 40;

/// Compare oracle, closed form and class membership on `a_min..=a_max`.
///
/// `digits` is the starting precision; the oracle doubles it when needed, so
/// the reported speeds never depend on it.
pub fn sweep(a_min: u64, a_max: u64, digits: u32) -> Result<SweepReport> {
    if a_max > SWEEP_MAX {
        return Err(Error::Invariant(format!("sweep limited to a <= {SWEEP_MAX}")));
    }
    if digits < SWEEP_MIN_DIGITS {
        return Err(Error::Invariant(format!("sweep needs at least {SWEEP_MIN_DIGITS} digits")));
    }
    let mut report = SweepReport {
        range: (a_min, a_max),
        precision: digits,
        checked: 0,
        max_digits_used: 0,
        mismatches: Vec::new(),
        conjecture_violations: Vec::new(),
    };
    for a in a_min.max(1)..=a_max {
        if a % 10 == 0 {
            continue;
        }
        let base = TetrationBase::from_u64(a)?;
        let oracle = constant_speed_report_from(&base, digits)?;
        report.max_digits_used = report.max_digits_used.max(oracle.digits);
        let check = formula_check(&base)?;
        report.checked += 1;
        if check.closed_form != oracle.value || check.membership != [oracle.value] {
            report.mismatches.push(Mismatch {
                a: a.to_string(),
                oracle: oracle.value,
                formula: check.closed_form,
                membership: check.membership,
            });
        }
    }
    Ok(report)
}

/// Heights past the conjectured threshold that the probes examine.
pub const PROBE_EXTRA_HEIGHTS: u64 = 3;

fn violations_from(
    a: &TetrationBase,
    from_height: u64,
    through: u64,
    expected: u64,
    out: &mut Vec<ConjectureViolation>,
) -> Result<()> {
    let (speeds, _) = speeds_through(a, through, 64)?;
    for b in from_height..=through {
        let observed = speeds[b as usize - 1];
        if observed != expected {
            out.push(ConjectureViolation { a: a.to_string(), b, observed, expected });
        }
    }
    Ok(())
}

/// `V(a, b) = V(a)` for `b >= len(a) + 2`, for last digits other than 0, 3, 7.
pub fn probe_conjecture1(a_min: u64, a_max: u64) -> Result<Vec<ConjectureViolation>> {
    let mut out = Vec::new();
    for a in a_min.max(2)..=a_max {
        if matches!(a % 10, 0 | 3 | 7) {
            continue;
        }
        let base = TetrationBase::from_u64(a)?;
        let report = constant_speed_report_from(&base, 64)?;
        let start = base.length() + 2;
        let through = report.confirmed_at.max(start) + PROBE_EXTRA_HEIGHTS;
        violations_from(&base, start, through, report.value, &mut out)?;
    }
    Ok(out)
}

/// `V(p, b) = V(p)` for `b >= 2` and primes `p = (k+1)·10^n − 1`.
pub fn probe_conjecture2(n_max: u64, k_max: u64) -> Result<Vec<ConjectureViolation>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        for k in 0..=k_max {
            let form = RepnineForm::new(BigUint::from(k), n)?;
            if !is_prime(&form.value) {
                continue;
            }
            let base = TetrationBase::new(form.value)?;
            let report = constant_speed_report_from(&base, 64)?;
            let through = report.confirmed_at + PROBE_EXTRA_HEIGHTS;
            violations_from(&base, 2, through, report.value, &mut out)?;
        }
    }
    Ok(out)
}

pub const PHASE_SHIFT_SPEEDS: [u64; 6] = [0, 6, 6, 5, 4, 4];

/// Profile of `143^625` for heights 1 to 6 at 80 digits.
pub fn fixture_phase_shift() -> Result<SpeedProfile> {
    let profile = speed_profile(&phase_shift_base(), 6, 80)?;
    let got = profile.speeds();
    let expected: Vec<Option<u64>> = PHASE_SHIFT_SPEEDS.iter().copied().map(Some).collect();
    if got != expected {
        return Err(Error::FixtureMismatch {
            name: "speed profile of 143^625".into(),
            expected: format!("{PHASE_SHIFT_SPEEDS:?}"),
            actual: format!("{got:?}"),
        });
    }
    Ok(profile)
}

/// A named worked example and whether it reproduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

fn outcome(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> FixtureOutcome {
    let (expected, actual) = (expected.to_string(), actual.to_string());
    FixtureOutcome { name: name.into(), passed: expected == actual, expected, actual }
}

fn base(s: &str) -> Result<TetrationBase> {
    TetrationBase::new(parse_decimal(s)?)
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Every worked example: minimal class bases, single speeds and anomalous profiles.
pub fn run_fixtures() -> Result<Vec<FixtureOutcome>> {
    let mut out = Vec::new();
    for (s1, n, expected) in [
        (2, 4, "182"),
        (8, 9, "7532318"),
        (2, 14, "23316686432"),
        (2, 20, "175120972936432"),
        (8, 20, "15613890344818"),
        (2, 21, "365855836217682"),
    ] {
        out.push(outcome(format!("min base of class {s1} at speed {n}"), expected, min_base_class(s1, n)?));
    }
    for (a, expected) in
        [("9437185", 20), ("6291455", 21), ("163574218751", 13), ("2077057", 7), ("6295807", 7)]
    {
        out.push(outcome(format!("V({a})"), expected, constant_speed(&base(a)?)?));
    }

    let a807 = base("807")?;
    let (speeds, _) = speeds_through(&a807, 5, 64)?;
    out.push(outcome("V(807, 2..=5)", "4,4,4,4", join(&speeds[1..])));
    out.push(outcome("V(807)", 3, constant_speed(&a807)?));

    for a in ["499", "29509900499"] {
        let b = base(a)?;
        let through = b.length() + 3;
        let (speeds, _) = speeds_through(&b, through, 64)?;
        out.push(outcome(format!("V({a}, 1)"), 3, speeds[0]));
        let tail = vec![2; speeds.len() - 1];
        out.push(outcome(format!("V({a}, 2..={through})"), join(&tail), join(&speeds[1..])));
    }

    let profile = speed_profile(&phase_shift_base(), 6, 80)?;
    let got: Vec<String> = profile.speeds().iter().map(|s| s.map_or("?".into(), |v| v.to_string())).collect();
    out.push(outcome("V(143^625, 1..=6)", join(&PHASE_SHIFT_SPEEDS), got.join(",")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_is_clean() {
        let r = sweep(2, 600, 40).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
        assert_eq!(r.checked, 599 - 60);
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        assert!(sweep(2, 2_000_000, 40).is_err());
        assert!(sweep(2, 20, 16).is_err());
    }

    #[test]
    fn shards_merge_to_the_whole() {
        let whole = sweep(2, 300, 40).unwrap();
        let merged = SweepReport::merge(vec![sweep(151, 300, 40).unwrap(), sweep(2, 150, 40).unwrap()]).unwrap();
        assert_eq!(merged.checked, whole.checked);
        assert_eq!(merged.range, whole.range);
        assert_eq!(merged.mismatches, whole.mismatches);
    }

    #[test]
    fn conjecture_probes() {
        // 5 is the lone counterexample at this scale: ν = 0, 1, 5, 8, 10, …
        let found = probe_conjecture1(2, 300).unwrap();
        let five = ConjectureViolation { a: "5".into(), b: 3, observed: 3, expected: 2 };
        assert_eq!(found, vec![five]);
        assert!(probe_conjecture2(3, 30).unwrap().is_empty());
    }

    #[test]
    fn phase_shift() {
        let p = fixture_phase_shift().unwrap();
        assert_eq!(p.entries.len(), 6);
    }

    #[test]
    fn fixtures_reproduce() {
        for f in run_fixtures().unwrap() {
            assert!(f.passed, "{f:?}");
        }
    }
}
