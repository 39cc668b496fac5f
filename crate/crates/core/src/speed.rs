//! Congruence speed by definition.
//!
//! `ν(b)` is the number of trailing decimal digits shared by `^b a` and
//! `^(b+1) a`; the speed at height `b` is `ν(b) − ν(b−1)`, with `^0 a = 1`.
//! The constant speed `V(a)` is read off once the per-height speeds settle.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{digit_length, parse_decimal, pow10, TowerSequence};
use crate::error::{Error, Result};

/// Headroom kept between `ν(b)` and the working precision before doubling it.
pub const PRECISION_MARGIN: u64 = 8;

/// Upper limit on heights explored by [`constant_speed`] before giving up.
pub const MAX_HEIGHT: u64 = 4096;

/// A tetration base `a >= 1` that is not a multiple of 10.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TetrationBase {
    value: BigUint,
    last_digit: u8,
    length: u64,
}

impl TetrationBase {
    pub fn new(value: BigUint) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::ZeroBase);
        }
        let last_digit = (&value % 10u32).to_u8().unwrap_or(0);
        if last_digit == 0 {
            return Err(Error::MultipleOfTen(value.to_string()));
        }
        let length = digit_length(&value)?;
        Ok(TetrationBase { value, last_digit, length })
    }

    pub fn from_u64(value: u64) -> Result<Self> {
        Self::new(BigUint::from(value))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_decimal(s)?)
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// `a mod 10`.
    pub fn last_digit(&self) -> u8 {
        self.last_digit
    }

    /// Number of decimal digits, `len(a)`.
    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }
}

impl fmt::Display for TetrationBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `ν(b)` as far as the working precision can tell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "digits", rename_all = "snake_case")]
pub enum Frozen {
    Exact(u64),
    /// All `N` computed digits agree.
    AtLeast(u64),
    /// The base is 1: every modulus freezes.
    Unbounded,
}

impl Frozen {
    pub fn exact(self) -> Option<u64> {
        match self {
            Frozen::Exact(d) => Some(d),
            _ => None,
        }
    }
}

impl fmt::Display for Frozen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frozen::Exact(d) => write!(f, "{d}"),
            Frozen::AtLeast(n) => write!(f, ">={n}"),
            Frozen::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// 10-adic valuation of `x mod 10^digits`, or `None` if it vanishes there.
fn decimal_valuation(x: &BigUint) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let twos = x.trailing_zeros().unwrap_or(0);
    let mut rest = x >> twos;
    let mut fives = 0;
    while fives < twos {
        let (q, r) = num_integer::Integer::div_rem(&rest, &BigUint::from(5u32));
        if !r.is_zero() {
            break;
        }
        rest = q;
        fives += 1;
    }
    Some(fives)
}

fn frozen_between(lower: &BigUint, upper: &BigUint, modulus: &BigUint, digits: u32) -> Frozen {
    let diff = if upper >= lower { upper - lower } else { modulus + upper - lower };
    match decimal_valuation(&diff) {
        Some(d) => Frozen::Exact(d),
        None => Frozen::AtLeast(digits as u64),
    }
}

/// `ν(0), ν(1), …, ν(max_height)` computed modulo `10^digits`.
pub fn frozen_sequence(a: &TetrationBase, max_height: u64, digits: u32) -> Result<Vec<Frozen>> {
    if a.is_one() {
        return Ok(vec![Frozen::Unbounded; max_height as usize + 1]);
    }
    let modulus = pow10(digits);
    let mut towers = TowerSequence::new(a.value(), digits)?;
    let mut prev = towers.next().expect("tower sequence is infinite");
    let mut out = Vec::with_capacity(max_height as usize + 1);
    for _ in 0..=max_height {
        let next = towers.next().expect("tower sequence is infinite");
        out.push(frozen_between(&prev, &next, &modulus, digits));
        prev = next;
    }
    Ok(out)
}

/// `ν(b)`: trailing digits shared by `^b a` and `^(b+1) a`, read modulo `10^digits`.
pub fn frozen_digits(a: &TetrationBase, b: u64, digits: u32) -> Result<Frozen> {
    if b == 0 {
        return Err(Error::HeightTooSmall { min: 1, got: 0 });
    }
    Ok(frozen_sequence(a, b, digits)?[b as usize])
}

fn speed_from(prev: Frozen, cur: Frozen, digits: u32) -> Result<u64> {
    match (prev, cur) {
        (Frozen::Unbounded, _) | (_, Frozen::Unbounded) => Ok(0),
        (Frozen::Exact(p), Frozen::Exact(c)) => c
            .checked_sub(p)
            .ok_or_else(|| Error::Invariant(format!("frozen digits decreased from {p} to {c}"))),
        _ => Err(Error::PrecisionExhausted { digits: digits as u64 }),
    }
}

/// `V(a, b) = ν(b) − ν(b−1)` at working precision `digits`.
pub fn speed_at_height(a: &TetrationBase, b: u64, digits: u32) -> Result<u64> {
    if b == 0 {
        return Err(Error::HeightTooSmall { min: 1, got: 0 });
    }
    let frozen = frozen_sequence(a, b, digits)?;
    speed_from(frozen[b as usize - 1], frozen[b as usize], digits)
}

/// Starting precision for the adaptive search.
pub fn initial_precision(a: &TetrationBase) -> u32 {
    (8 * (a.length() + 8)).max(64) as u32
}

/// The stabilized speed together with the heights that confirmed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableSpeed {
    pub value: u64,
    /// Smallest height at which the stabilization rule was satisfied.
    pub confirmed_at: u64,
    /// `(b, V(a, b))` for `b = 1..=confirmed_at`.
    pub heights: Vec<(u64, u64)>,
    pub digits: u32,
}

/// True once three consecutive speeds agree at a height `>= len(a) + 3`.
fn is_settled(heights: &[(u64, u64)], length: u64) -> bool {
    let Some(&(b, v)) = heights.last() else {
        return false;
    };
    if b < length + 3 || heights.len() < 3 {
        return false;
    }
    let tail = &heights[heights.len() - 3..];
    tail[0].0 >= 2 && tail.iter().all(|&(_, s)| s == v)
}

/// Constant congruence speed `V(a)` with its supporting per-height trace.
pub fn constant_speed_report(a: &TetrationBase) -> Result<StableSpeed> {
    constant_speed_report_from(a, initial_precision(a))
}

/// As [`constant_speed_report`], starting the precision search at `digits`.
pub fn constant_speed_report_from(a: &TetrationBase, digits: u32) -> Result<StableSpeed> {
    settle(a, digits, true)
}

/// As [`constant_speed_report`] at exactly `digits`; fails rather than raising precision.
pub fn constant_speed_at(a: &TetrationBase, digits: u32) -> Result<StableSpeed> {
    settle(a, digits, false)
}

fn settle(a: &TetrationBase, digits: u32, adaptive: bool) -> Result<StableSpeed> {
    if a.is_one() {
        return Ok(StableSpeed { value: 0, confirmed_at: 1, heights: vec![(1, 0)], digits: 0 });
    }
    let mut digits = digits.max(1);
    'precision: loop {
        let modulus = pow10(digits);
        let mut towers = TowerSequence::new(a.value(), digits)?;
        let mut lower = towers.next().expect("tower sequence is infinite");
        let mut upper = towers.next().expect("tower sequence is infinite");
        let mut prev = frozen_between(&lower, &upper, &modulus, digits);
        let mut heights = Vec::new();
        for b in 1..=MAX_HEIGHT {
            lower = upper;
            upper = towers.next().expect("tower sequence is infinite");
            let cur = frozen_between(&lower, &upper, &modulus, digits);
            let within = |f: Frozen| matches!(f, Frozen::Exact(d) if d + PRECISION_MARGIN < digits as u64);
            if !within(prev) || !within(cur) {
                if !adaptive {
                    return Err(Error::PrecisionExhausted { digits: digits as u64 });
                }
                digits = digits.checked_mul(2).ok_or(Error::PrecisionExhausted { digits: digits as u64 })?;
                continue 'precision;
            }
            heights.push((b, speed_from(prev, cur, digits)?));
            if is_settled(&heights, a.length()) {
                let value = heights.last().unwrap().1;
                return Ok(StableSpeed { value, confirmed_at: b, heights, digits });
            }
            prev = cur;
        }
        return Err(Error::Invariant(format!("speed of {a} did not settle below height {MAX_HEIGHT}")));
    }
}

/// Constant congruence speed `V(a)`; `V(1) = 0`.
pub fn constant_speed(a: &TetrationBase) -> Result<u64> {
    Ok(constant_speed_report(a)?.value)
}

/// `V(a, 1..=max_height)`, doubling the precision from `digits` until every
/// value is resolved. Returns the speeds and the precision that sufficed.
pub fn speeds_through(a: &TetrationBase, max_height: u64, digits: u32) -> Result<(Vec<u64>, u32)> {
    if a.is_one() {
        return Ok((vec![0; max_height as usize], 0));
    }
    let mut digits = digits.max(1);
    loop {
        let frozen = frozen_sequence(a, max_height, digits)?;
        let resolved = frozen
            .iter()
            .all(|f| matches!(f, Frozen::Exact(d) if d + PRECISION_MARGIN < digits as u64));
        if resolved {
            let speeds = frozen
                .windows(2)
                .map(|w| speed_from(w[0], w[1], digits))
                .collect::<Result<Vec<_>>>()?;
            return Ok((speeds, digits));
        }
        digits = digits.checked_mul(2).ok_or(Error::PrecisionExhausted { digits: digits as u64 })?;
    }
}

/// Stabilized speed as recorded by a fixed-height profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantSpeed {
    /// `a = 1`.
    Zero,
    Stable { value: u64, confirmed_at: u64 },
    /// The profile is too short (or too imprecise) to apply the rule.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileEntry {
    pub height: u64,
    pub frozen: Frozen,
    /// `None` when the precision cannot resolve `ν(b)` or `ν(b−1)`.
    pub speed: Option<u64>,
}

/// Per-height frozen digits and speeds for one base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeedProfile {
    pub base: TetrationBase,
    pub precision_digits: u32,
    pub entries: Vec<ProfileEntry>,
    pub constant_speed: ConstantSpeed,
}

impl SpeedProfile {
    /// Speeds for `b = 1..=b_max`, `None` where unresolved.
    pub fn speeds(&self) -> Vec<Option<u64>> {
        self.entries.iter().map(|e| e.speed).collect()
    }
}

/// `(b, ν(b), V(a, b))` for `b = 1..=b_max` at fixed precision.
pub fn speed_profile(a: &TetrationBase, b_max: u64, digits: u32) -> Result<SpeedProfile> {
    if b_max < 2 {
        return Err(Error::HeightTooSmall { min: 2, got: b_max });
    }
    let frozen = frozen_sequence(a, b_max, digits)?;
    let entries: Vec<ProfileEntry> = (1..=b_max)
        .map(|b| ProfileEntry {
            height: b,
            frozen: frozen[b as usize],
            speed: speed_from(frozen[b as usize - 1], frozen[b as usize], digits).ok(),
        })
        .collect();
    let constant_speed = if a.is_one() {
        ConstantSpeed::Zero
    } else {
        let mut resolved = Vec::new();
        let mut found = ConstantSpeed::Unresolved;
        for e in &entries {
            let Some(s) = e.speed else { break };
            resolved.push((e.height, s));
            if is_settled(&resolved, a.length()) {
                found = ConstantSpeed::Stable { value: s, confirmed_at: e.height };
                break;
            }
        }
        found
    };
    Ok(SpeedProfile { base: a.clone(), precision_digits: digits, entries, constant_speed })
}

/// `143^625`, the phase-shift example base.
pub fn phase_shift_base() -> TetrationBase {
    TetrationBase::new(BigUint::from(143u32).pow(625)).expect("143^625 is not a multiple of 10")
}

/// Convenience: `1` as a tetration base.
pub fn unit_base() -> TetrationBase {
    TetrationBase::new(BigUint::one()).expect("1 is a valid base")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(a: u64) -> TetrationBase {
        TetrationBase::from_u64(a).unwrap()
    }

    #[test]
    fn rejects_multiples_of_ten_and_zero() {
        assert!(matches!(TetrationBase::from_u64(30), Err(Error::MultipleOfTen(_))));
        assert_eq!(TetrationBase::from_u64(0), Err(Error::ZeroBase));
        let b = base(807);
        assert_eq!((b.last_digit(), b.length()), (7, 3));
    }

    #[test]
    fn frozen_digits_of_two() {
        assert_eq!(frozen_digits(&base(2), 3, 10).unwrap(), Frozen::Exact(1));
        assert_eq!(frozen_digits(&base(2), 1, 10).unwrap(), Frozen::Exact(0));
        assert_eq!(frozen_digits(&base(2), 4, 10).unwrap(), Frozen::Exact(2));
    }

    #[test]
    fn frozen_digits_of_one_are_unbounded() {
        for b in 1..5 {
            assert_eq!(frozen_digits(&unit_base(), b, 16).unwrap(), Frozen::Unbounded);
        }
    }

    #[test]
    fn precision_runs_out_instead_of_lying() {
        // ν grows by 2 per height for 5: at 4 digits it saturates quickly
        let err = speed_at_height(&base(5), 6, 4).unwrap_err();
        assert_eq!(err, Error::PrecisionExhausted { digits: 4 });
    }

    #[test]
    fn speeds_at_heights() {
        assert_eq!(speed_at_height(&base(2), 3, 20).unwrap(), 1);
        assert_eq!(speed_at_height(&base(499), 1, 40).unwrap(), 3);
        assert_eq!(speed_at_height(&base(499), 2, 40).unwrap(), 2);
        assert_eq!(speed_at_height(&base(2), 0, 20), Err(Error::HeightTooSmall { min: 1, got: 0 }));
    }

    #[test]
    fn constant_speeds() {
        assert_eq!(constant_speed(&base(5)).unwrap(), 2);
        assert_eq!(constant_speed(&unit_base()).unwrap(), 0);
        assert_eq!(constant_speed(&base(2)).unwrap(), 1);
        assert_eq!(constant_speed(&base(807)).unwrap(), 3);
        for b in 2..=5 {
            assert_eq!(speed_at_height(&base(807), b, 64).unwrap(), 4, "b = {b}");
        }
    }

    #[test]
    fn profile_of_two() {
        let p = speed_profile(&base(2), 5, 20).unwrap();
        assert_eq!(p.speeds(), vec![Some(0), Some(0), Some(1), Some(1), Some(1)]);
        assert_eq!(p.constant_speed, ConstantSpeed::Stable { value: 1, confirmed_at: 5 });
    }

    #[test]
    fn short_profile_is_unresolved() {
        let p = speed_profile(&base(807), 4, 40).unwrap();
        assert_eq!(p.constant_speed, ConstantSpeed::Unresolved);
        assert!(speed_profile(&base(807), 1, 40).is_err());
    }

    #[test]
    fn report_trace_starts_at_height_one() {
        let r = constant_speed_report(&base(7)).unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(r.heights.first().map(|h| h.0), Some(1));
        assert_eq!(r.heights.last().map(|h| h.0), Some(r.confirmed_at));
        assert!(r.confirmed_at >= 4);
    }
}
