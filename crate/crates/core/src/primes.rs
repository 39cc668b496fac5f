//! Primality, repnine forms `(k+1)·10^n − 1`, and the smallest prime `q_n`
//! of each constant speed.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{digit_length, pow10};
use crate::classes::{class_spec, has_speed_one, speed_by_formula, FamilyIter, ProgressionFamily};
use crate::error::{Error, Result};
use crate::speed::{constant_speed, TetrationBase};

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// How a primality answer was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimalityMethod {
    /// Miller–Rabin with a witness set that is exact below 2^64.
    #[serde(rename = "deterministic-small")]
    DeterministicSmall,
    /// Baillie–PSW: strong base-2 test plus strong Lucas test.
    #[serde(rename = "probabilistic")]
    Probabilistic,
}

impl fmt::Display for PrimalityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimalityMethod::DeterministicSmall => "deterministic-small",
            PrimalityMethod::Probabilistic => "probabilistic",
        })
    }
}

pub fn primality_method(x: &BigUint) -> PrimalityMethod {
    if x.bits() <= 64 {
        PrimalityMethod::DeterministicSmall
    } else {
        PrimalityMethod::Probabilistic
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Miller–Rabin on `u64`; the first twelve primes as witnesses make it exact.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES[..12] {
        let p = p as u64;
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES[..12] {
        let mut x = pow_mod_u64(a as u64, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn strong_probable_prime(n: &BigUint, base: u32) -> bool {
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let mut x = BigUint::from(base).modpow(&d, n);
    if x.is_one() || x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_one {
            return true;
        }
    }
    false
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
fn jacobi(a: i64, n: &BigUint) -> i32 {
    let nn = BigInt::from(n.clone());
    let mut a = BigInt::from(a).mod_floor(&nn).to_biguint().unwrap();
    let mut n = n.clone();
    let mut result = 1;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = (&n % 8u32).to_u32().unwrap();
        if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32) == BigUint::from(3u32) && (&n % 4u32) == BigUint::from(3u32) {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn half_mod(x: BigInt, n: &BigInt) -> BigInt {
    let x = x.mod_floor(n);
    if x.is_odd() {
        (x + n) >> 1
    } else {
        x >> 1
    }
}

/// Strong Lucas probable-prime test with Selfridge parameters.
fn strong_lucas_probable_prime(n: &BigUint) -> bool {
    let root = n.sqrt();
    if &root * &root == *n {
        return false;
    }
    let mut d: i64 = 5;
    loop {
        match jacobi(d, n) {
            -1 => break,
            0 if BigUint::from(d.unsigned_abs()) != *n => return false,
            _ => {}
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let nn = BigInt::from(n.clone());
    let big_d = BigInt::from(d);
    let q = BigInt::from((1 - d) / 4);
    let plus_one = n + 1u32;
    let s = plus_one.trailing_zeros().unwrap_or(0);
    let k = &plus_one >> s;

    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = q.mod_floor(&nn);
    for i in (0..k.bits() - 1).rev() {
        u = (&u * &v).mod_floor(&nn);
        v = (&v * &v - &qk * 2u32).mod_floor(&nn);
        qk = (&qk * &qk).mod_floor(&nn);
        if k.bit(i) {
            let u_next = half_mod(&u + &v, &nn);
            v = half_mod(&big_d * &u + &v, &nn);
            u = u_next;
            qk = (&qk * &q).mod_floor(&nn);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v - &qk * 2u32).mod_floor(&nn);
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk).mod_floor(&nn);
    }
    false
}

/// Exact below 2^64, Baillie–PSW above.
pub fn is_prime(x: &BigUint) -> bool {
    if let Some(small) = x.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &SMALL_PRIMES {
        if (x % p).is_zero() {
            return false;
        }
    }
    strong_probable_prime(x, 2) && strong_lucas_probable_prime(x)
}

/// `(k+1)·10^n − 1`: the digits of `k+1` followed by `n` nines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepnineForm {
    pub k: BigUint,
    pub n: u64,
    pub value: BigUint,
}

impl RepnineForm {
    pub fn new(k: BigUint, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::SpeedBelowTwo(0));
        }
        let value = (&k + 1u32) * pow10(n as u32) - 1u32;
        Ok(RepnineForm { k, n, value })
    }

    /// Every value of the form `x·10^n − 1` with `x >= 1` is a repnine.
    pub fn from_value(value: &BigUint, n: u64) -> Option<Self> {
        let m = pow10(n as u32);
        let (x, rem) = (value + 1u32).div_rem(&m);
        if !rem.is_zero() || x.is_zero() {
            return None;
        }
        Some(RepnineForm { k: x - 1u32, n, value: value.clone() })
    }
}

/// Speed of a repnine by the trailing-nine rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum RepnineSpeed {
    Exactly(u64),
    Above(u64),
}

impl fmt::Display for RepnineSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepnineSpeed::Exactly(n) => write!(f, "{n}"),
            RepnineSpeed::Above(n) => write!(f, "> {n}"),
        }
    }
}

/// `V((k+1)·10^n − 1)`: `n` unless `k ≡ 9 (mod 10)`; for `n = 1`, unless `k ≡ 4 (mod 5)`.
pub fn lemma1_speed(k: &BigUint, n: u64) -> Result<RepnineSpeed> {
    let exact = match n {
        0 => return Err(Error::SpeedBelowTwo(0)),
        1 => k % 5u32 != BigUint::from(4u32),
        _ => k % 10u32 != BigUint::from(9u32),
    };
    Ok(if exact { RepnineSpeed::Exactly(n) } else { RepnineSpeed::Above(n) })
}

/// Smallest prime of a given constant speed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSpeedRecord {
    pub n: u64,
    #[serde(with = "decimal")]
    pub q: BigUint,
    pub method: PrimalityMethod,
    pub oracle_checked: bool,
}

pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        crate::arith::parse_decimal(&s).map_err(D::Error::custom)
    }
}

/// Largest `n` whose record is confirmed by the tower oracle.
pub const ORACLE_CHECK_MAX: u64 = 12;

/// Candidate stream for one progression family during the prime search.
enum Source<'a> {
    Family(FamilyIter<'a>),
    /// Every element shares the factor; only the factor itself can be prime.
    Single(Option<BigUint>),
    Speed1(BigUint),
}

impl Iterator for Source<'_> {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        match self {
            Source::Family(it) => it.next(),
            Source::Single(x) => x.take(),
            Source::Speed1(a) => loop {
                let x = a.clone();
                *a += 1u32;
                if has_speed_one(&x) {
                    return Some(x);
                }
            },
        }
    }
}

fn family_source<'a>(f: &'a ProgressionFamily, from: &BigUint) -> Source<'a> {
    let g = f.common_factor();
    if g.is_one() {
        Source::Family(f.iter_from(from))
    } else {
        let candidate = (f.contains(&g) && &g >= from && is_prime(&g)).then_some(g);
        Source::Single(candidate)
    }
}

/// Smallest prime with speed `n`, scanning candidates `>= from`.
///
/// `budget` caps how many candidates are tested. On exhaustion the error
/// carries the last candidate tested, so a later call can resume just past it.
pub fn smallest_prime_with_speed_from(n: u64, from: &BigUint, budget: u64) -> Result<PrimeSpeedRecord> {
    if n == 0 {
        return Err(Error::SpeedBelowTwo(0));
    }
    let specs = if n >= 2 {
        (1..=9).map(|s1| class_spec(s1, n)).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let mut sources: Vec<Source<'_>> = Vec::new();
    if n == 1 {
        sources.push(Source::Speed1(from.max(&BigUint::from(2u32)).clone()));
    }
    for spec in &specs {
        for f in &spec.families {
            sources.push(family_source(f, from));
        }
    }
    let mut heap = BinaryHeap::new();
    for (i, s) in sources.iter_mut().enumerate() {
        if let Some(x) = s.next() {
            heap.push(Reverse((x, i)));
        }
    }
    let mut tested = 0u64;
    let mut last = None;
    while let Some(Reverse((x, i))) = heap.pop() {
        if tested == budget {
            let last = last.map(|l: BigUint| l.to_string()).unwrap_or_else(|| "nothing".into());
            return Err(Error::BudgetExhausted { n, budget, last });
        }
        tested += 1;
        if is_prime(&x) {
            let oracle_checked = n <= ORACLE_CHECK_MAX;
            return Ok(PrimeSpeedRecord { n, method: primality_method(&x), q: x, oracle_checked });
        }
        if let Some(y) = sources[i].next() {
            heap.push(Reverse((y, i)));
        }
        last = Some(x);
    }
    Err(Error::Invariant(format!("candidate streams for n = {n} ran dry")))
}

pub fn smallest_prime_with_speed(n: u64, budget: u64) -> Result<PrimeSpeedRecord> {
    smallest_prime_with_speed_from(n, &BigUint::zero(), budget)
}

/// Re-derive everything a record claims except minimality.
pub fn check_record(record: &PrimeSpeedRecord) -> Result<()> {
    if !is_prime(&record.q) {
        return Err(Error::Invariant(format!("q_{} = {} is not prime", record.n, record.q)));
    }
    if record.method != primality_method(&record.q) {
        return Err(Error::Invariant(format!("q_{} carries method {}", record.n, record.method)));
    }
    let base = TetrationBase::new(record.q.clone())?;
    let formula = speed_by_formula(&base)?;
    if formula != record.n {
        return Err(Error::Invariant(format!("V(q_{}) = {formula} by formula", record.n)));
    }
    if record.oracle_checked {
        let oracle = constant_speed(&base)?;
        if oracle != record.n {
            return Err(Error::Invariant(format!("V(q_{}) = {oracle} by oracle", record.n)));
        }
    }
    Ok(())
}

/// Number of class members below `q` that were scanned, or the first prime found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Minimality {
    Minimal { scanned: u64 },
    SmallerPrime(BigUint),
}

/// Scan every member of every class of speed `n` below `q`, including the
/// families whose members share a common factor.
pub fn minimality_by_enumeration(n: u64, q: &BigUint) -> Result<Minimality> {
    let mut scanned = 0u64;
    if n == 1 {
        let limit = q.to_u64().ok_or_else(|| Error::Invariant("speed-1 scan needs q < 2^64".into()))?;
        for a in 2..limit {
            if has_speed_one(&BigUint::from(a)) {
                scanned += 1;
                if is_prime_u64(a) {
                    return Ok(Minimality::SmallerPrime(a.into()));
                }
            }
        }
        return Ok(Minimality::Minimal { scanned });
    }
    for s1 in 1..=9 {
        let spec = class_spec(s1, n)?;
        for f in &spec.families {
            if let (Some(limit), Some(base), Some(step)) = (q.to_u64(), f.base.to_u64(), f.step.to_u64()) {
                let modulus = f.exclusion.as_ref().map(|e| e.modulus as u64);
                let excluded: &[u32] = f.exclusion.as_ref().map(|e| &e.residues[..]).unwrap_or(&[]);
                let mut k = 0u64;
                let mut x = base;
                while x < limit {
                    let skip = modulus.is_some_and(|m| excluded.contains(&((k % m) as u32)));
                    if !skip {
                        scanned += 1;
                        if is_prime_u64(x) {
                            return Ok(Minimality::SmallerPrime(x.into()));
                        }
                    }
                    k += 1;
                    match x.checked_add(step) {
                        Some(next) => x = next,
                        None => break,
                    }
                }
            } else {
                for x in f.iter().take_while(|x| x < q) {
                    scanned += 1;
                    if is_prime(&x) {
                        return Ok(Minimality::SmallerPrime(x));
                    }
                }
            }
        }
    }
    Ok(Minimality::Minimal { scanned })
}

/// A run of `q_n` records with the non-monotone indices marked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QTable {
    pub records: BTreeMap<u64, PrimeSpeedRecord>,
    /// `n` with `q_n < q_{n-1}`.
    pub drops: Vec<u64>,
}

impl QTable {
    pub fn from_records(records: BTreeMap<u64, PrimeSpeedRecord>) -> Self {
        let drops = records
            .iter()
            .filter(|(n, r)| records.get(&(**n - 1)).is_some_and(|prev| r.q < prev.q))
            .map(|(n, _)| *n)
            .collect();
        QTable { records, drops }
    }

    /// Records in requested order, excluding helper rows computed only for drop detection.
    pub fn rows<'a>(&'a self, indices: &'a [u64]) -> impl Iterator<Item = &'a PrimeSpeedRecord> + 'a {
        indices.iter().filter_map(|n| self.records.get(n))
    }
}

/// Indices that `q_table(n_max, extra)` reports.
pub fn q_table_indices(n_max: u64, extra: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n_max).chain(extra.iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `q_n` for `n = 1..=n_max` and each extra index; predecessors of extra
/// indices are computed too so that drops can be flagged.
pub fn q_table_with(
    n_max: u64,
    extra: &[u64],
    mut lookup: impl FnMut(u64) -> Result<PrimeSpeedRecord>,
) -> Result<QTable> {
    let mut needed = q_table_indices(n_max, extra);
    needed.extend(extra.iter().filter(|&&n| n > 1).map(|n| n - 1));
    needed.sort_unstable();
    needed.dedup();
    let mut records = BTreeMap::new();
    for n in needed {
        records.insert(n, lookup(n)?);
    }
    Ok(QTable::from_records(records))
}

pub fn q_table(n_max: u64, extra: &[u64], budget: u64) -> Result<QTable> {
    q_table_with(n_max, extra, |n| smallest_prime_with_speed(n, budget))
}

/// Largest `n` for which [`q_bounds`] evaluates both ends exactly.
pub const Q_BOUNDS_EXACT_MAX: u64 = 20_000;

/// One end of the `q_n` sandwich.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Exact(BigUint),
    /// Too large to print; the formula and its decimal length.
    Symbolic { expr: String, digits: u64 },
}

impl Bound {
    pub fn digits(&self) -> u64 {
        match self {
            Bound::Exact(x) => digit_length(x).unwrap_or(1),
            Bound::Symbolic { digits, .. } => *digits,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact(x) => write!(f, "{x}"),
            Bound::Symbolic { expr, digits } => write!(f, "{expr} ({digits} digits)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QBounds {
    pub n: u64,
    pub lower: Bound,
    pub upper: Bound,
}

impl QBounds {
    /// `lower <= x <= upper`; only decidable for exact bounds.
    pub fn contains(&self, x: &BigUint) -> Option<bool> {
        match (&self.lower, &self.upper) {
            (Bound::Exact(lo), Bound::Exact(hi)) => Some(lo <= x && x <= hi),
            _ => None,
        }
    }

    /// Whether the bounds are ordered, decided exactly or by decimal length.
    pub fn ordered(&self) -> bool {
        match (&self.lower, &self.upper) {
            (Bound::Exact(lo), Bound::Exact(hi)) => lo <= hi,
            (lo, hi) => lo.digits() < hi.digits(),
        }
    }
}

/// `isqrt(5^n − 1) + 1 <= q_n <= 9·10^n − 1`.
pub fn q_bounds(n: u64) -> Result<QBounds> {
    if n < 2 {
        return Err(Error::SpeedBelowTwo(n));
    }
    if lemma1_speed(&BigUint::from(8u32), n)? != RepnineSpeed::Exactly(n) {
        return Err(Error::Invariant(format!("9·10^{n} − 1 does not have speed {n}")));
    }
    if n <= Q_BOUNDS_EXACT_MAX {
        let nn = n as u32;
        let lower = (BigUint::from(5u32).pow(nn) - 1u32).sqrt() + 1u32;
        let upper = pow10(nn) * 9u32 - 1u32;
        return Ok(QBounds { n, lower: Bound::Exact(lower), upper: Bound::Exact(upper) });
    }
    // 5^n is never a power of ten, so sqrt(5^n − 1) has floor(n·log10(5)/2) + 1 digits
    // except when that quantity sits within rounding distance of an integer.
    let half_log = n as f64 * 5f64.log10() / 2.0;
    let lower_digits = half_log.floor() as u64 + 1;
    Ok(QBounds {
        n,
        lower: Bound::Symbolic { expr: format!("isqrt(5^{n} - 1) + 1"), digits: lower_digits },
        upper: Bound::Symbolic { expr: format!("9*10^{n} - 1"), digits: n + 1 },
    })
}

/// First `count` primes `(k+1)·10^n − 1` with `k ≢ 9 (mod 10)`.
pub fn repnine_primes(n: u64, count: usize) -> Result<Vec<BigUint>> {
    let mut out = Vec::with_capacity(count);
    let mut k = BigUint::zero();
    while out.len() < count {
        if lemma1_speed(&k, n)? == RepnineSpeed::Exactly(n) {
            let form = RepnineForm::new(k.clone(), n)?;
            if is_prime(&form.value) {
                out.push(form.value);
            }
        }
        k += 1u32;
    }
    Ok(out)
}

/// First `count` primes `(2m+1)·10^n − 1` (`n >= 2`), or primes `≡ 29 (mod 100)` for `n = 1`.
pub fn odd_repnine_primes(n: u64, count: usize) -> Result<Vec<BigUint>> {
    if n == 0 {
        return Err(Error::SpeedBelowTwo(0));
    }
    let (start, step) = if n == 1 {
        (BigUint::from(29u32), BigUint::from(100u32))
    } else {
        let ten_n = pow10(n as u32);
        (&ten_n - 1u32, ten_n * 2u32)
    };
    let mut out = Vec::with_capacity(count);
    let mut x = start;
    while out.len() < count {
        if is_prime(&x) {
            out.push(x.clone());
        }
        x += &step;
    }
    Ok(out)
}
