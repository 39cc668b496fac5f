//! Truncated 10-adic integers: the pair `h = 5^(2^n)`, `r = 2^(5^n)` modulo
//! `10^n` and the thirteen nontrivial roots of `y^5 = y` built from them.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::arith::{pow_mod_lifted, pow10, Modulus};
use crate::error::{Error, Result};

/// `h = 5^(2^n) mod 10^n` and `r = 2^(5^n) mod 10^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentPair {
    pub n: u32,
    pub h: BigUint,
    pub r: BigUint,
}

/// Memoized per `n`.
pub fn idempotents(n: u32) -> Arc<IdempotentPair> {
    static PAIRS: OnceLock<Mutex<HashMap<u32, Arc<IdempotentPair>>>> = OnceLock::new();
    let table = PAIRS.get_or_init(Default::default);
    if let Some(p) = table.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return p.clone();
    }
    let pair = Arc::new(compute_idempotents(n));
    table.lock().unwrap_or_else(|e| e.into_inner()).entry(n).or_insert(pair).clone()
}

fn compute_idempotents(n: u32) -> IdempotentPair {
    let m = Modulus::pow10(n);
    let two_pow = BigUint::one() << n;
    let five_pow = BigUint::from(5u32).pow(n);
    let h = pow_mod_lifted(&BigUint::from(5u32), &two_pow, &m);
    let r = pow_mod_lifted(&BigUint::from(2u32), &five_pow, &m);
    IdempotentPair { n, h, r }
}

/// Labels of the thirteen roots, indexed `1..=13`.
pub const ROOT_LABELS: [&str; 13] = [
    "α'_1 = 1 - 2h",
    "α'_2 = r",
    "α'_3 = h - r",
    "α''_3 = -h - r",
    "α'_4 = h - 1",
    "α'_5 = h",
    "α''_5 = -h",
    "α'_6 = 1 - h",
    "α'_7 = -h + r",
    "α''_7 = h + r",
    "α'_8 = -r",
    "α'_9 = 2h - 1",
    "α''_9 = -1",
];

/// Last digit of each root, indexed `1..=13`.
pub const ROOT_LAST_DIGITS: [u8; 13] = [1, 2, 3, 3, 4, 5, 5, 6, 7, 7, 8, 9, 9];

/// One of the thirteen roots truncated to `n` digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecadicResidue {
    pub root_index: u32,
    pub n: u32,
    pub value: BigUint,
}

impl DecadicResidue {
    /// Digits `s_1..s_n`, least significant first, zero padded.
    pub fn digits(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.value.to_radix_le(10);
        if out == [0] {
            out.clear();
        }
        out.resize(self.n as usize, 0);
        out
    }

    /// Digit `s_j` (1-based, `j <= n`).
    pub fn digit(&self, j: u32) -> u8 {
        assert!(j >= 1 && j <= self.n, "digit index {j} outside 1..={}", self.n);
        let q = &self.value / pow10(j - 1);
        (q % 10u32).to_u8().unwrap()
    }

    /// The residue as an `n`-character decimal string, leading zeros kept.
    pub fn to_padded_string(&self) -> String {
        format!("{:0>width$}", self.value.to_string(), width = self.n as usize)
    }

    pub fn last_digit(&self) -> u8 {
        ROOT_LAST_DIGITS[self.root_index as usize - 1]
    }
}

/// `(x - y) mod m` for `x, y < m`.
fn sub_mod(x: &BigUint, y: &BigUint, m: &BigUint) -> BigUint {
    if x >= y {
        x - y
    } else {
        m + x - y
    }
}

fn neg_mod(x: &BigUint, m: &BigUint) -> BigUint {
    sub_mod(&BigUint::from(0u32), x, m) % m
}

/// Root `i` (1..=13) modulo `10^n`.
pub fn root_residue(i: u32, n: u32) -> Result<DecadicResidue> {
    if !(1..=13).contains(&i) {
        return Err(Error::RootIndex(i));
    }
    let m = pow10(n);
    let pair = idempotents(n);
    let (h, r) = (&pair.h, &pair.r);
    let one = BigUint::one() % &m;
    let two_h = (h * 2u32) % &m;
    let value = match i {
        1 => sub_mod(&one, &two_h, &m),
        2 => r.clone(),
        3 => sub_mod(h, r, &m),
        4 => neg_mod(&((h + r) % &m), &m),
        5 => sub_mod(h, &one, &m),
        6 => h.clone(),
        7 => neg_mod(h, &m),
        8 => sub_mod(&one, h, &m),
        9 => sub_mod(r, h, &m),
        10 => (h + r) % &m,
        11 => neg_mod(r, &m),
        12 => sub_mod(&two_h, &one, &m),
        13 => &m - 1u32,
        _ => unreachable!(),
    };
    Ok(DecadicResidue { root_index: i, n, value })
}

/// The two square roots of −1 modulo `5^n`: `r mod 5^n` and its negative.
pub fn sqrt_minus_one_mod5(n: u32) -> (BigUint, BigUint) {
    let five_n = BigUint::from(5u32).pow(n);
    let x = &idempotents(n).r % &five_n;
    let y = &five_n - &x;
    (x, y)
}

/// `(2^(4·5^n + 1) − 1) mod 10^n`, the power-of-two form of root 1.
pub fn root_one_power_form(n: u32) -> BigUint {
    let m = Modulus::pow10(n);
    let exp = BigUint::from(5u32).pow(n) * 4u32 + 1u32;
    let p = pow_mod_lifted(&BigUint::from(2u32), &exp, &m);
    sub_mod(&p, &(BigUint::one() % m.value()), m.value())
}

/// Smallest coprime bases with constant speed at least `n`, keyed by last digit.
pub fn min_coprime_candidates(n: u32) -> BTreeMap<u8, BigUint> {
    let value = |i| root_residue(i, n).expect("root index in range").value;
    let mut out = BTreeMap::new();
    out.insert(1, value(1));
    out.insert(3, value(3).min(value(4)));
    out.insert(7, value(9).min(value(10)));
    out.insert(9, value(12));
    out
}
