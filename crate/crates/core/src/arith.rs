//! Modular arithmetic over moduli of the form `2^i * 5^j`.
//!
//! Everything needed to evaluate power towers modulo `10^n`: p-adic
//! valuations for `p in {2, 5}`, the Carmichael function, modular
//! exponentiation, and the tower evaluator that walks the chain
//! `m, λ(m), λ(λ(m)), …` down to 1.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponents below `2^CLAMP_BITS` are tracked exactly during tower evaluation.
///
/// Every modulus handled here has prime exponents far below `2^64`, so an
/// exponent at or above the threshold can always be lifted through λ.
pub const CLAMP_BITS: u32 = 64;

/// A modulus `2^twos * 5^fives`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    twos: u32,
    fives: u32,
    value: BigUint,
}

impl Modulus {
    pub fn new(twos: u32, fives: u32) -> Self {
        let value = (BigUint::one() << twos) * BigUint::from(5u32).pow(fives);
        Modulus { twos, fives, value }
    }

    /// `10^n`.
    pub fn pow10(n: u32) -> Self {
        Self::new(n, n)
    }

    /// Factor `value` as `2^i * 5^j`, failing if any other prime divides it.
    pub fn from_value(value: &BigUint) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::NotDecimalModulus("0".into()));
        }
        let twos = value.trailing_zeros().unwrap_or(0) as u32;
        let mut rest = value >> twos;
        let five = BigUint::from(5u32);
        let mut fives = 0;
        loop {
            let (q, r) = rest.div_rem(&five);
            if !r.is_zero() {
                break;
            }
            rest = q;
            fives += 1;
        }
        if !rest.is_one() {
            return Err(Error::NotDecimalModulus(value.to_string()));
        }
        Ok(Self::new(twos, fives))
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn twos(&self) -> u32 {
        self.twos
    }

    pub fn fives(&self) -> u32 {
        self.fives
    }

    pub fn is_one(&self) -> bool {
        self.twos == 0 && self.fives == 0
    }

    /// Largest prime exponent; powers `x^e` with `e` at least this are
    /// eventually periodic with period λ(m) for every `x`.
    pub fn max_exponent(&self) -> u32 {
        self.twos.max(self.fives)
    }

    /// λ(m) as another `2^x * 5^y` modulus.
    pub fn carmichael(&self) -> Modulus {
        let two_part = match self.twos {
            0 | 1 => 0,
            2 => 1,
            i => i - 2,
        };
        let (twos, fives) = if self.fives == 0 {
            (two_part, 0)
        } else {
            (two_part.max(2), self.fives - 1)
        };
        Modulus::new(twos, fives)
    }
}

/// Exponent seen through a Carmichael reduction.
///
/// When `is_large` is false, `residue` is the exact exponent and is below
/// `2^CLAMP_BITS`; otherwise it is the exponent reduced modulo λ(m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClampedExponent {
    pub residue: BigUint,
    pub is_large: bool,
}

impl ClampedExponent {
    pub fn exact(value: u64) -> Self {
        ClampedExponent { residue: BigUint::from(value), is_large: false }
    }

    pub fn large(residue: BigUint) -> Self {
        ClampedExponent { residue, is_large: true }
    }

    /// An exponent congruent to this one modulo λ(m) that is safe to use
    /// modulo `m`.
    fn effective(&self, m: &Modulus, lambda: &BigUint) -> BigUint {
        if !self.is_large {
            return self.residue.clone();
        }
        let floor = BigUint::from(m.max_exponent());
        let mut e = &self.residue % lambda;
        if e < floor {
            let deficit = &floor - &e;
            let (q, r) = deficit.div_rem(lambda);
            let steps = if r.is_zero() { q } else { q + 1u32 };
            e += steps * lambda;
        }
        e
    }
}

/// Largest `e` with `p^e | x`, for `p in {2, 5}`.
pub fn nu(p: u32, x: &BigUint) -> Result<u64> {
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    match p {
        2 => Ok(x.trailing_zeros().unwrap_or(0)),
        5 => {
            let five = BigUint::from(5u32);
            let mut rest = x.clone();
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(&five);
                if !r.is_zero() {
                    return Ok(e);
                }
                rest = q;
                e += 1;
            }
        }
        other => Err(Error::UnsupportedPrime(other)),
    }
}

/// `u64` shorthand for [`nu`].
pub fn nu_u64(p: u32, x: u64) -> Result<u64> {
    nu(p, &BigUint::from(x))
}

/// Carmichael's λ(m) for `m = 2^i * 5^j`.
pub fn carmichael(m: &Modulus) -> BigUint {
    m.carmichael().value
}

/// `base^exp mod m`; `exp = 0` yields `1 mod m`.
pub fn pow_mod(base: &BigUint, exp: &BigUint, m: &Modulus) -> BigUint {
    pow_mod_raw(base, exp, &m.value)
}

pub(crate) fn pow_mod_raw(base: &BigUint, exp: &BigUint, m: &BigUint) -> BigUint {
    if m.is_one() {
        return BigUint::zero();
    }
    if let Some(small) = m.to_u64() {
        let b = (base % m).to_u64().unwrap_or(0);
        return BigUint::from(pow_mod_u64(b, exp, small));
    }
    base.modpow(exp, m)
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(base: u64, exp: &BigUint, m: u64) -> u64 {
    let mut result = 1 % m;
    let base = base % m;
    for digit in exp.iter_u64_digits().rev() {
        for bit in (0..64).rev() {
            result = mul_mod_u64(result, result, m);
            if (digit >> bit) & 1 == 1 {
                result = mul_mod_u64(result, base, m);
            }
        }
    }
    result
}

/// `base^exp mod m` for an exponent known only modulo λ(m) past a threshold.
///
/// Valid for every `base`: once `exp >= max_exponent(m)` the powers of any
/// residue are periodic with period λ(m).
pub fn pow_mod_lifted(base: &BigUint, exp: &BigUint, m: &Modulus) -> BigUint {
    if m.is_one() {
        return BigUint::zero();
    }
    if *exp < BigUint::from(m.max_exponent()) {
        return pow_mod(base, exp, m);
    }
    let lambda = carmichael(m);
    let clamped = ClampedExponent::large(exp % &lambda);
    pow_mod(base, &clamped.effective(m, &lambda), m)
}

/// Number of decimal digits of `a`.
pub fn digit_length(a: &BigUint) -> Result<u64> {
    if a.is_zero() {
        return Err(Error::ZeroDigitLength);
    }
    Ok(a.to_str_radix(10).len() as u64)
}

/// The chain `10^n, λ(10^n), λ(λ(10^n)), …, 1`.
#[derive(Debug)]
pub struct ModulusChain {
    links: Vec<Modulus>,
}

impl ModulusChain {
    pub fn new(top: Modulus) -> Self {
        let mut links = vec![top];
        while !links.last().map(Modulus::is_one).unwrap_or(true) {
            let next = links.last().unwrap().carmichael();
            links.push(next);
        }
        ModulusChain { links }
    }

    pub fn links(&self) -> &[Modulus] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Memoized chain for `10^n`; chains are immutable once published.
pub fn decimal_chain(n: u32) -> Arc<ModulusChain> {
    static CHAINS: OnceLock<Mutex<HashMap<u32, Arc<ModulusChain>>>> = OnceLock::new();
    let table = CHAINS.get_or_init(Default::default);
    let mut guard = table.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(ModulusChain::new(Modulus::pow10(n))))
        .clone()
}

/// Exact values of `^h a` for `h = 0, 1, …` while they stay below `2^64`.
fn exact_prefix(a: &BigUint) -> Vec<u64> {
    let mut out = vec![1u64];
    let Some(small) = a.to_u64() else {
        return out;
    };
    out.push(small);
    if small <= 1 {
        // towers of 0 and 1 are periodic; two entries are enough
        return out;
    }
    loop {
        let prev = *out.last().unwrap();
        let next = u32::try_from(prev).ok().and_then(|e| small.checked_pow(e));
        match next {
            Some(v) => out.push(v),
            None => return out,
        }
    }
}

/// Evaluates `^h a mod 10^n` for many heights against one modulus chain.
///
/// `^0 a` is taken to be 1.
#[derive(Debug)]
pub struct TowerEvaluator {
    base: BigUint,
    exact: Vec<u64>,
    chain: Arc<ModulusChain>,
    base_mod: Vec<BigUint>,
    lambdas: Vec<BigUint>,
}

impl TowerEvaluator {
    pub fn new(base: &BigUint, digits: u32) -> Result<Self> {
        if base.is_zero() {
            return Err(Error::ZeroBase);
        }
        let chain = decimal_chain(digits);
        let base_mod = chain.links().iter().map(|m| base % m.value()).collect();
        let lambdas = chain
            .links()
            .iter()
            .map(|m| m.carmichael().value)
            .collect();
        Ok(TowerEvaluator { base: base.clone(), exact: exact_prefix(base), chain, base_mod, lambdas })
    }

    pub fn digits(&self) -> u32 {
        self.chain.links()[0].twos()
    }

    /// Exact `^h a` if it is below `2^64`.
    pub fn exact(&self, height: u64) -> Option<u64> {
        if self.base.is_one() {
            return Some(1);
        }
        self.exact.get(height as usize).copied()
    }

    /// `^height a` modulo the chain's top modulus `10^n`.
    pub fn residue(&self, height: u64) -> BigUint {
        self.residue_at(height, 0)
    }

    fn residue_at(&self, height: u64, level: usize) -> BigUint {
        let Some(m) = self.chain.links().get(level) else {
            return BigUint::zero();
        };
        if m.is_one() {
            return BigUint::zero();
        }
        match height {
            0 => BigUint::one(),
            1 => self.base_mod[level].clone(),
            _ => {
                let exp = self.clamped_exponent(height - 1, level + 1);
                let e = exp.effective(m, &self.lambdas[level]);
                pow_mod(&self.base_mod[level], &e, m)
            }
        }
    }

    /// `^height a` as an exponent for the modulus one step above `level`.
    fn clamped_exponent(&self, height: u64, level: usize) -> ClampedExponent {
        match self.exact(height) {
            Some(v) => ClampedExponent::exact(v),
            None => ClampedExponent::large(self.residue_at(height, level)),
        }
    }
}

/// Exponentiation modulo `10^n` (n >= 3) through the split `2^n * 5^n`.
///
/// The `2^n` half is a truncated square-and-multiply, the `5^n` half runs on
/// an odd modulus; each half reduces the exponent by its own unit-group
/// exponent when the base is a unit there.
#[derive(Debug, Clone)]
pub struct DecimalPow {
    digits: u32,
    two_mask: BigUint,
    five_pow: BigUint,
    two_lambda: BigUint,
    five_lambda: BigUint,
    five_inv: BigUint,
    modulus: BigUint,
}

impl DecimalPow {
    pub fn new(digits: u32) -> Self {
        assert!(digits >= 3, "DecimalPow needs at least 3 digits");
        let two_pow = BigUint::one() << digits;
        let two_mask = &two_pow - 1u32;
        let five_pow = BigUint::from(5u32).pow(digits);
        let two_lambda = BigUint::one() << (digits - 2);
        let five_lambda = BigUint::from(4u32) * BigUint::from(5u32).pow(digits - 1);
        // inverse of 5^n modulo 2^n is (5^n)^(λ(2^n) - 1)
        let five_inv = (&five_pow % &two_pow).modpow(&(&two_lambda - 1u32), &two_pow);
        let modulus = &five_pow << digits;
        DecimalPow { digits, two_mask, five_pow, two_lambda, five_lambda, five_inv, modulus }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    fn truncated_pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        let base = base & &self.two_mask;
        let mut r = BigUint::one();
        for i in (0..exp.bits()).rev() {
            r = (&r * &r) & &self.two_mask;
            if exp.bit(i) {
                r = (&r * &base) & &self.two_mask;
            }
        }
        r
    }

    /// `base^exp mod 10^n`.
    pub fn pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        let n = BigUint::from(self.digits);
        let two_part = if base.bit(0) {
            self.truncated_pow(base, &(exp % &self.two_lambda))
        } else if *exp >= n {
            BigUint::zero()
        } else {
            self.truncated_pow(base, exp)
        };
        let b5 = base % &self.five_pow;
        let five_part = if !(&b5 % 5u32).is_zero() {
            b5.modpow(&(exp % &self.five_lambda), &self.five_pow)
        } else if *exp >= n {
            BigUint::zero()
        } else {
            b5.modpow(exp, &self.five_pow)
        };
        // x = five_part + 5^n * t with t ≡ (two_part - five_part) / 5^n (mod 2^n)
        let shift = (&self.two_mask + 1u32 + &two_part - (&five_part & &self.two_mask)) & &self.two_mask;
        let t = (shift * &self.five_inv) & &self.two_mask;
        five_part + t * &self.five_pow
    }
}

/// Successive residues `^0 a, ^1 a, ^2 a, … mod 10^n`.
///
/// For `n >= 2`, λ(10^n) divides 10^n, so `^h a mod λ(10^n)` is read off the
/// previous residue and each height costs one modular exponentiation. For
/// `n = 1` it defers to [`TowerEvaluator`].
#[derive(Debug)]
pub struct TowerSequence {
    base: BigUint,
    exact: Vec<u64>,
    modulus: Modulus,
    lambda: BigUint,
    height: u64,
    previous: Option<BigUint>,
    fallback: Option<TowerEvaluator>,
    split: Option<DecimalPow>,
}

impl TowerSequence {
    pub fn new(base: &BigUint, digits: u32) -> Result<Self> {
        if base.is_zero() {
            return Err(Error::ZeroBase);
        }
        let modulus = Modulus::pow10(digits);
        let lambda = carmichael(&modulus);
        let fallback = if digits < 2 { Some(TowerEvaluator::new(base, digits)?) } else { None };
        let split = if digits >= 3 { Some(DecimalPow::new(digits)) } else { None };
        Ok(TowerSequence {
            base: base % modulus.value(),
            exact: exact_prefix(base),
            modulus,
            lambda,
            height: 0,
            previous: None,
            fallback,
            split,
        })
    }

    fn exact(&self, height: u64) -> Option<u64> {
        if self.base.is_one() {
            return Some(1);
        }
        self.exact.get(height as usize).copied()
    }
}

impl Iterator for TowerSequence {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        let h = self.height;
        self.height += 1;
        if let Some(ev) = &self.fallback {
            return Some(ev.residue(h));
        }
        let value = match (h, self.previous.take()) {
            (0, _) => BigUint::one() % self.modulus.value(),
            (1, _) => self.base.clone(),
            (_, Some(prev)) => {
                let exp = match self.exact(h - 1) {
                    Some(v) => ClampedExponent::exact(v),
                    None => ClampedExponent::large(&prev % &self.lambda),
                };
                let e = exp.effective(&self.modulus, &self.lambda);
                match &self.split {
                    Some(split) => split.pow(&self.base, &e),
                    None => pow_mod(&self.base, &e, &self.modulus),
                }
            }
            (_, None) => unreachable!("heights are produced in order"),
        };
        self.previous = Some(value.clone());
        Some(value)
    }
}

/// `^b a mod 10^n`.
pub fn tower_residue(a: &BigUint, b: u64, n: u32) -> Result<BigUint> {
    Ok(TowerEvaluator::new(a, n)?.residue(b))
}

/// Exact `^b a`, refusing results with more than `cap` digits.
pub fn exact_tetration(a: &BigUint, b: u64, cap: u64) -> Result<BigUint> {
    let too_large = Error::ExactTowerTooLarge { cap };
    if a.is_zero() {
        return Err(Error::ZeroBase);
    }
    let mut value = BigUint::one();
    for _ in 0..b {
        if a.is_one() {
            break;
        }
        // a^e has at least (e * log10 a) digits; bail before materializing it
        let e = value.to_u64().ok_or(too_large.clone())?;
        let low_bits = a.bits() - 1;
        if (low_bits as u128) * (e as u128) > (cap as u128) * 10 / 3 + 4 {
            return Err(too_large);
        }
        value = a.pow(u32::try_from(e).map_err(|_| too_large.clone())?);
        if digit_length(&value)? > cap {
            return Err(too_large);
        }
    }
    if digit_length(&value)? > cap {
        return Err(too_large);
    }
    Ok(value)
}

/// Decimal string to `BigUint`.
pub fn parse_decimal(s: &str) -> Result<BigUint> {
    let t = s.trim();
    if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(s.to_string()));
    }
    BigUint::parse_bytes(t.as_bytes(), 10).ok_or_else(|| Error::Parse(s.to_string()))
}

/// `10^n` as a big integer.
pub fn pow10(n: u32) -> BigUint {
    BigUint::from(10u32).pow(n)
}
