//! Residue-class description of every base with a given constant speed.
//!
//! For `n >= 2` and each last digit `s1`, the bases with `a ≡ s1 (mod 10)`
//! and `V(a) = n` form a finite union of arithmetic progressions, some with
//! one multiplier residue removed. For `n = 1` a single residue set modulo
//! 25 decides membership. On top of these sets sit the minimal bases
//! `ã_s1(n)` and `ã(n)`, their closed forms, the 2-adic / 5-adic valuation
//! bounds and a fast closed-form classifier.

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{nu, pow10};
use crate::decadic::{root_one_power_form, root_residue};
use crate::error::{Error, Result};
use crate::speed::TetrationBase;

/// Multiplier residues removed from a progression.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub modulus: u32,
    pub residues: Vec<u32>,
}

/// `{ base + k·step : k >= 0, k mod m ∉ excluded }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionFamily {
    pub base: BigUint,
    pub step: BigUint,
    pub exclusion: Option<Exclusion>,
}

impl ProgressionFamily {
    fn new(base: BigUint, step: BigUint, exclusion: Option<Exclusion>) -> Self {
        ProgressionFamily { base, step, exclusion }
    }

    fn excludes(&self, k: &BigUint) -> bool {
        match &self.exclusion {
            Some(ex) => {
                let r = (k % ex.modulus).to_u32().unwrap_or(0);
                ex.residues.contains(&r)
            }
            None => false,
        }
    }

    pub fn contains(&self, a: &BigUint) -> bool {
        if a < &self.base {
            return false;
        }
        let (k, rem) = (a - &self.base).div_rem(&self.step);
        rem.is_zero() && !self.excludes(&k)
    }

    /// Smallest allowed multiplier at or above `k`.
    fn next_allowed(&self, mut k: BigUint) -> BigUint {
        while self.excludes(&k) {
            k += 1u32;
        }
        k
    }

    pub fn element(&self, k: &BigUint) -> BigUint {
        &self.base + k * &self.step
    }

    pub fn first(&self) -> BigUint {
        self.element(&self.next_allowed(BigUint::zero()))
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> FamilyIter<'_> {
        FamilyIter { family: self, k: self.next_allowed(BigUint::zero()) }
    }

    /// Elements in ascending order starting from the first one `>= from`.
    pub fn iter_from(&self, from: &BigUint) -> FamilyIter<'_> {
        let k = if from <= &self.base {
            BigUint::zero()
        } else {
            let (q, r) = (from - &self.base).div_rem(&self.step);
            if r.is_zero() { q } else { q + 1u32 }
        };
        FamilyIter { family: self, k: self.next_allowed(k) }
    }

    /// `gcd(base, step)`; a common factor above 1 divides every element.
    pub fn common_factor(&self) -> BigUint {
        self.base.gcd(&self.step)
    }
}

pub struct FamilyIter<'a> {
    family: &'a ProgressionFamily,
    k: BigUint,
}

impl Iterator for FamilyIter<'_> {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        let out = self.family.element(&self.k);
        let next = std::mem::take(&mut self.k) + 1u32;
        self.k = self.family.next_allowed(next);
        Some(out)
    }
}

/// All bases with last digit `s1` and constant speed exactly `n >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSpec {
    pub s1: u8,
    pub n: u64,
    pub families: Vec<ProgressionFamily>,
}

impl ClassSpec {
    pub fn contains(&self, a: &BigUint) -> bool {
        self.families.iter().any(|f| f.contains(a))
    }

    /// `ã_s1(n)`.
    pub fn min(&self) -> BigUint {
        self.families.iter().map(ProgressionFamily::first).min().expect("class has families")
    }

    /// Ascending merge of all families.
    pub fn iter(&self) -> MergedIter<'_> {
        MergedIter::new(self.families.iter().map(|f| f.iter()).collect())
    }

    pub fn first(&self, count: usize) -> Vec<BigUint> {
        self.iter().take(count).collect()
    }
}

/// Ascending merge over several ascending element streams.
pub struct MergedIter<'a> {
    heads: BinaryHeap<Reverse<(BigUint, usize)>>,
    streams: Vec<FamilyIter<'a>>,
}

impl<'a> MergedIter<'a> {
    pub fn new(mut streams: Vec<FamilyIter<'a>>) -> Self {
        let mut heads = BinaryHeap::new();
        for (i, s) in streams.iter_mut().enumerate() {
            if let Some(x) = s.next() {
                heads.push(Reverse((x, i)));
            }
        }
        MergedIter { heads, streams }
    }
}

impl Iterator for MergedIter<'_> {
    type Item = BigUint;

    fn next(&mut self) -> Option<BigUint> {
        let Reverse((x, i)) = self.heads.pop()?;
        if let Some(y) = self.streams[i].next() {
            self.heads.push(Reverse((y, i)));
        }
        Some(x)
    }
}

fn check_class(s1: u32) -> Result<u8> {
    if (1..=9).contains(&s1) {
        Ok(s1 as u8)
    } else {
        Err(Error::ResidueClass(s1))
    }
}

fn check_speed(n: u64) -> Result<u32> {
    if n < 2 {
        return Err(Error::SpeedBelowTwo(n));
    }
    u32::try_from(n).map_err(|_| Error::Invariant(format!("speed {n} too large to enumerate")))
}

fn two_pow(n: u32) -> BigUint {
    BigUint::one() << n
}

fn five_pow(n: u32) -> BigUint {
    BigUint::from(5u32).pow(n)
}

/// sin(π·k/2) for integer `k`.
pub fn quarter_sin(k: i64) -> i64 {
    [0, 1, 0, -1][k.rem_euclid(4) as usize]
}

/// cos(π·k/2) for integer `k`.
pub fn quarter_cos(k: i64) -> i64 {
    [1, 0, -1, 0][k.rem_euclid(4) as usize]
}

/// `(-1)^(n(n-1)/2)`, i.e. `i^(n(n-1))`.
pub fn quarter_sign(n: u64) -> i64 {
    let half = (n as u128 * (n as u128).saturating_sub(1)) / 2;
    if half % 2 == 0 {
        1
    } else {
        -1
    }
}

fn to_unsigned(x: BigInt) -> BigUint {
    x.to_biguint().expect("closed form is positive")
}

/// Root family `root (mod 10^n) + j·10^n`, with `j` avoiding digit `s_{n+1}` of the root.
fn root_family(base: BigUint, root_index: u32, n: u32) -> ProgressionFamily {
    let next = root_residue(root_index, n + 1).expect("root index in range");
    let digit = next.digit(n + 1) as u32;
    ProgressionFamily::new(base, pow10(n), Some(Exclusion { modulus: 10, residues: vec![digit] }))
}

/// The two class-5 progression bases from the trigonometric form.
pub fn class5_bases_trig(n: u64) -> (BigUint, BigUint) {
    let k = n as i64;
    let p = BigInt::from(two_pow(n as u32));
    let s = quarter_sin(k);
    let c = quarter_cos(k);
    let plus = &p * (5 + 2 * s + 4 * c) + 1;
    let minus = &p * (5 - 2 * s - 4 * c) - 1;
    (to_unsigned(plus), to_unsigned(minus))
}

/// The two class-5 progression bases from the `(-1)^n`, `i^(n(n-1))` form.
pub fn class5_bases_signed(n: u64) -> (BigUint, BigUint) {
    let p = BigInt::from(two_pow(n as u32));
    let alt = if n % 2 == 0 { 1 } else { -1 };
    let sigma = quarter_sign(n);
    let small = &p * (2 - alt) - sigma;
    let large = &p * (alt + 8) + sigma;
    (to_unsigned(small), to_unsigned(large))
}

/// `α'_2(n) mod 2·5^n` or `α'_8(n) mod 2·5^n`.
fn even_root_residue(s1: u8, n: u32) -> BigUint {
    let index = if s1 == 2 { 2 } else { 11 };
    let root = root_residue(index, n).expect("root index in range").value;
    root % (five_pow(n) * 2u32)
}

/// Whether the minimal class-2/8 base needs the extra `2·5^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaFlag {
    pub s1: u8,
    pub n: u64,
    pub value: u8,
}

pub fn lambda_flag(s1: u32, n: u64) -> Result<LambdaFlag> {
    if s1 != 2 && s1 != 8 {
        return Err(Error::LambdaClass(s1));
    }
    if n == 0 {
        return Err(Error::SpeedBelowTwo(n));
    }
    let nn = n as u32;
    let here = even_root_residue(s1 as u8, nn);
    let above = even_root_residue(s1 as u8, nn + 1);
    Ok(LambdaFlag { s1: s1 as u8, n, value: u8::from(here == above) })
}

/// `ã_2(n)` or `ã_8(n)` through the λ correction.
fn even_root_min(s1: u8, n: u32) -> BigUint {
    let flag = lambda_flag(s1 as u32, n as u64).expect("class 2 or 8").value;
    even_root_residue(s1, n) + five_pow(n) * 2u32 * flag as u32
}

/// Family description of `A_s1(n)` for `n >= 2`.
pub fn class_spec(s1: u32, n: u64) -> Result<Arc<ClassSpec>> {
    let s1 = check_class(s1)?;
    let nn = check_speed(n)?;
    static SPECS: OnceLock<Mutex<HashMap<(u8, u64), Arc<ClassSpec>>>> = OnceLock::new();
    let table = SPECS.get_or_init(Default::default);
    if let Some(spec) = table.lock().unwrap_or_else(|e| e.into_inner()).get(&(s1, n)) {
        return Ok(spec.clone());
    }
    let spec = Arc::new(build_class_spec(s1, nn));
    Ok(table.lock().unwrap_or_else(|e| e.into_inner()).entry((s1, n)).or_insert(spec).clone())
}

fn build_class_spec(s1: u8, n: u32) -> ClassSpec {
    let ten_n = pow10(n);
    let not_nine = || Some(Exclusion { modulus: 10, residues: vec![9] });
    let root = |i| root_residue(i, n).expect("root index in range").value;
    let families = match s1 {
        1 => vec![
            root_family(root_one_power_form(n), 1, n),
            ProgressionFamily::new(&ten_n + 1u32, ten_n.clone(), not_nine()),
        ],
        9 => vec![
            root_family(root(12), 12, n),
            ProgressionFamily::new(&ten_n - 1u32, ten_n.clone(), not_nine()),
        ],
        3 => vec![root_family(root(3), 3, n), root_family(root(4), 4, n)],
        7 => vec![root_family(root(9), 9, n), root_family(root(10), 10, n)],
        5 => {
            let (b1, b2) = class5_bases_trig(n as u64);
            let step = two_pow(n) * 10u32;
            vec![
                ProgressionFamily::new(b1, step.clone(), None),
                ProgressionFamily::new(b2, step, None),
            ]
        }
        4 | 6 => {
            let base = if s1 == 4 { five_pow(n) - 1u32 } else { five_pow(n) + 1u32 };
            let ex = Some(Exclusion { modulus: 5, residues: vec![2] });
            vec![ProgressionFamily::new(base, five_pow(n) * 2u32, ex)]
        }
        2 | 8 => {
            let step = five_pow(n) * 2u32;
            let here = even_root_min(s1, n);
            let above = even_root_min(s1, n + 1);
            let diff = BigInt::from(above) - BigInt::from(here.clone());
            let (k, rem) = diff.div_mod_floor(&BigInt::from(step.clone()));
            debug_assert!(rem.is_zero());
            let excluded = k.mod_floor(&BigInt::from(5)).to_u32().unwrap();
            let ex = Some(Exclusion { modulus: 5, residues: vec![excluded] });
            vec![ProgressionFamily::new(here, step, ex)]
        }
        _ => unreachable!("class checked"),
    };
    ClassSpec { s1, n: n as u64, families }
}

/// Residues modulo 25 of the bases with constant speed 1.
pub const V1_RESIDUES: [u32; 16] = [2, 3, 4, 6, 8, 9, 11, 12, 13, 14, 16, 17, 19, 21, 22, 23];

pub fn v1_residues() -> &'static [u32; 16] {
    &V1_RESIDUES
}

/// `V(a) = 1` test by residue modulo 25.
pub fn has_speed_one(a: &BigUint) -> bool {
    if (a % 10u32).is_zero() {
        return false;
    }
    let r = (a % 25u32).to_u32().unwrap();
    V1_RESIDUES.contains(&r)
}

/// Smallest base `> 1` with last digit `s1` and speed 1, if any.
pub fn smallest_speed_one(s1: u32) -> Result<Option<u64>> {
    let s1 = check_class(s1)? as u64;
    Ok((0..5u64).map(|j| s1 + 10 * j).find(|&a| a > 1 && has_speed_one(&BigUint::from(a))))
}

/// `ã_s1(n)` for `n >= 2`.
pub fn min_base_class(s1: u32, n: u64) -> Result<BigUint> {
    Ok(class_spec(s1, n)?.min())
}

/// Minimum over the two trigonometric candidates.
pub fn min_base_two_candidates(n: u64) -> BigUint {
    let k = n as i64 - 1;
    let p = BigInt::from(two_pow(n as u32));
    let (s, c) = (quarter_sin(k), quarter_cos(k));
    let first: BigInt = &p * (2 * c - 4 * s + 5) + 1;
    let second: BigInt = &p * (4 * s - 2 * c + 5) - 1;
    to_unsigned(first.min(second))
}

/// Piecewise trigonometric form selected by `n mod 4`.
pub fn min_base_piecewise(n: u64) -> BigUint {
    let (plus, minus) = class5_bases_trig(n);
    if matches!(n % 4, 2 | 3) {
        plus
    } else {
        minus
    }
}

/// `2^n·((-1)^(n-1) + 2) − i^(n(n-1))`.
pub fn min_base_closed_form(n: u64) -> BigUint {
    class5_bases_signed(n).0
}

/// `ã(n)`: the smallest base with constant speed `n`.
pub fn min_base(n: u64) -> Result<BigUint> {
    match n {
        0 => Ok(BigUint::one()),
        1 => Ok(BigUint::from(2u32)),
        _ => {
            let closed = min_base_closed_form(n);
            let piecewise = min_base_piecewise(n);
            if closed != piecewise {
                return Err(Error::Invariant(format!(
                    "closed form {closed} disagrees with piecewise form {piecewise} at n = {n}"
                )));
            }
            Ok(closed)
        }
    }
}

/// First `count` elements of `A_5(n)` from the signed closed-form bases.
pub fn a5_set(n: u64, count: usize) -> Result<Vec<BigUint>> {
    check_speed(n)?;
    let (b1, b2) = class5_bases_signed(n);
    let step = two_pow(n as u32) * 10u32;
    let families = [ProgressionFamily::new(b1, step.clone(), None), ProgressionFamily::new(b2, step, None)];
    Ok(MergedIter::new(families.iter().map(|f| f.iter()).collect()).take(count).collect())
}

fn big_a(a: &TetrationBase) -> (&BigUint, BigUint, BigUint) {
    let v = a.value();
    let sq = v * v;
    (v, &sq - 1u32, sq + 1u32)
}

/// Upper bound on `V(a)` from 2-adic and 5-adic valuations of `a² ± 1`.
pub fn valuation_bound(a: &TetrationBase) -> Result<u64> {
    if a.is_one() {
        return Err(Error::Invariant("valuation bound needs a >= 2".into()));
    }
    let (_, minus, plus) = big_a(a);
    Ok(match a.last_digit() {
        1 | 9 => nu(5, &minus)?.min(nu(2, &minus)?),
        3 | 7 => nu(5, &plus)?.min(nu(2, &minus)?),
        2 | 8 => nu(5, &plus)?,
        4 | 6 => nu(5, &minus)?,
        5 => nu(2, &minus)?,
        _ => unreachable!("base is not a multiple of 10"),
    })
}

/// Closed-form constant speed.
pub fn closed_form_speed(a: &TetrationBase) -> Result<u64> {
    if a.is_one() {
        return Ok(0);
    }
    let (v, minus, _) = big_a(a);
    let fourth_minus = v * v * v * v - 1u32;
    Ok(match a.last_digit() {
        5 => nu(2, &minus)? - 1,
        2 | 4 | 6 | 8 => nu(5, &fourth_minus)?,
        _ => nu(5, &fourth_minus)?.min(nu(2, &minus)? - 1),
    })
}

/// Every `n` whose class set contains `a` (`n = 1` by the residue test).
pub fn membership_speeds(a: &TetrationBase) -> Result<Vec<u64>> {
    if a.is_one() {
        return Ok(vec![0]);
    }
    let mut found = Vec::new();
    if has_speed_one(a.value()) {
        found.push(1);
    }
    let bound = valuation_bound(a)?;
    for n in 2..=bound {
        if class_spec(a.last_digit() as u32, n)?.contains(a.value()) {
            found.push(n);
        }
    }
    Ok(found)
}

/// The unique `n` with `a ∈ A_s1(n)`.
pub fn membership_speed(a: &TetrationBase) -> Result<u64> {
    match membership_speeds(a)?.as_slice() {
        [n] => Ok(*n),
        other => Err(Error::Invariant(format!("{a} belongs to classes {other:?}, expected exactly one"))),
    }
}

/// Closed form and class-membership answers side by side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormulaCheck {
    pub closed_form: u64,
    pub membership: Vec<u64>,
}

impl FormulaCheck {
    pub fn agrees(&self) -> bool {
        self.membership == [self.closed_form]
    }
}

pub fn formula_check(a: &TetrationBase) -> Result<FormulaCheck> {
    Ok(FormulaCheck { closed_form: closed_form_speed(a)?, membership: membership_speeds(a)? })
}

/// `V(a)` from the closed form, confirmed by class membership.
///
/// If the closed form's class does not contain `a`, the membership search
/// answer is returned instead; [`formula_check`] exposes both.
pub fn speed_by_formula(a: &TetrationBase) -> Result<u64> {
    let n = closed_form_speed(a)?;
    let confirmed = match n {
        0 => a.is_one(),
        1 => has_speed_one(a.value()),
        _ => class_spec(a.last_digit() as u32, n)?.contains(a.value()),
    };
    if confirmed {
        Ok(n)
    } else {
        membership_speed(a)
    }
}

/// Whether `sqrt(5^n − 1) > c·2^n + 1`, decided exactly.
pub fn sqrt_bound_exceeds(n: u64, c: u32) -> bool {
    let lhs = five_pow(n as u32) - 1u32;
    let rhs = two_pow(n as u32) * c + 1u32;
    // sqrt(L) > R  <=>  L > R^2 for nonnegative integers
    lhs > &rhs * &rhs
}
