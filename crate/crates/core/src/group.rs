//! The multiplicative group of units `U(n)` for `n = p^m` and `n = 2p^m`.
//!
//! A [`Modulus`] is validated once and carries `phi(n)` together with its
//! prime factorization; everything that needs element orders (generator
//! tests, [`element_order`], [`find_generator`]) works from that factorization
//! rather than by iterating powers.
//!
//! [`enumerate_units`] and [`is_cyclic_bruteforce`] are desk-scale oracles and
//! work for any `n`, cyclic or not.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::modmath::{
    factorize_with_budget, inv_mod_u64, is_probable_prime, mod_inv, mod_pow, mul_mod_u64,
    pow_mod_u64, FactorBudget, Factorization, MathError, Natural, MR_ROUNDS,
};

/// Largest `n` accepted by the brute-force oracles by default.
pub const DESK_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not an odd prime")]
    InvalidPrime(Natural),
    #[error("prime-power exponent must be at least 1, got {0}")]
    InvalidExponent(u32),
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(Natural),
    #[error("{value} is not a unit modulo {n}")]
    NotAUnit { value: Natural, n: Natural },
    #[error("units live in different groups (mod {left} vs mod {right})")]
    ModulusMismatch { left: Natural, right: Natural },
    #[error("n = {n} exceeds the brute-force cap of {cap}")]
    CapExceeded { n: u64, cap: u64 },
    #[error("q = {q} does not give a safe prime p = {p}")]
    NotSafePrime { p: Natural, q: Natural },
    #[error(transparent)]
    Math(#[from] MathError),
}

/// A validated modulus `n = p^m` or `n = 2p^m` with `p` an odd prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    n: Natural,
    p: Natural,
    m: u32,
    doubled: bool,
    prime_power: Natural,
    phi: Natural,
    phi_factors: Factorization,
    p_minus_1_factors: Factorization,
    word: Option<u64>,
}

impl Modulus {
    /// Validates `(p, m, doubled)` and factors `phi(n)` with the default budget.
    pub fn new(p: Natural, m: u32, doubled: bool) -> Result<Self, GroupError> {
        Self::with_budget(p, m, doubled, &FactorBudget::default())
    }

    pub fn with_budget(p: Natural, m: u32, doubled: bool, budget: &FactorBudget) -> Result<Self, GroupError> {
        Self::check_prime(&p, m)?;
        let p_minus_1 = factorize_with_budget(&(&p - 1u8), budget)?;
        Ok(Self::assemble(p, m, doubled, p_minus_1))
    }

    /// Builds the modulus for a safe prime `p = 2q + 1`, where `phi` factors
    /// without any general-purpose factoring.
    pub fn from_safe_prime(p: Natural, q: &Natural, m: u32, doubled: bool) -> Result<Self, GroupError> {
        Self::check_prime(&p, m)?;
        let two = Natural::from(2u8);
        if p != q * &two + 1u8 || !is_probable_prime(q, MR_ROUNDS) {
            return Err(GroupError::NotSafePrime { p, q: q.clone() });
        }
        let p_minus_1 = Factorization::from_prime_powers([(two, 1), (q.clone(), 1)]);
        Ok(Self::assemble(p, m, doubled, p_minus_1))
    }

    fn check_prime(p: &Natural, m: u32) -> Result<(), GroupError> {
        if *p < Natural::from(3u8) || p.is_even() || !is_probable_prime(p, MR_ROUNDS) {
            return Err(GroupError::InvalidPrime(p.clone()));
        }
        if m == 0 {
            return Err(GroupError::InvalidExponent(m));
        }
        Ok(())
    }

    fn assemble(p: Natural, m: u32, doubled: bool, p_minus_1_factors: Factorization) -> Self {
        let prime_power = num_traits::pow(p.clone(), m as usize);
        let n = if doubled { &prime_power << 1u8 } else { prime_power.clone() };
        let phi = num_traits::pow(p.clone(), (m - 1) as usize) * (&p - 1u8);
        let own = Factorization::from_prime_powers([(p.clone(), m - 1)]);
        let phi_factors = p_minus_1_factors.merge(&own);
        debug_assert_eq!(phi_factors.value(), phi);
        let word = n.to_u64();
        Self {
            n,
            p,
            m,
            doubled,
            prime_power,
            phi,
            phi_factors,
            p_minus_1_factors,
            word,
        }
    }

    pub fn n(&self) -> &Natural {
        &self.n
    }

    pub fn p(&self) -> &Natural {
        &self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `true` for `n = 2p^m`.
    pub fn is_doubled(&self) -> bool {
        self.doubled
    }

    /// `p^m`, regardless of doubling.
    pub fn prime_power(&self) -> &Natural {
        &self.prime_power
    }

    /// The group order `phi(n)`.
    pub fn phi(&self) -> &Natural {
        &self.phi
    }

    pub fn phi_factors(&self) -> &Factorization {
        &self.phi_factors
    }

    fn same_group(&self, other: &Modulus) -> bool {
        std::ptr::eq(self, other) || self.n == other.n
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.doubled {
            write!(f, "{} = 2*{}^{}", self.n, self.p, self.m)
        } else {
            write!(f, "{} = {}^{}", self.n, self.p, self.m)
        }
    }
}

/// Shorthand for [`Modulus::new`].
pub fn make_modulus(p: Natural, m: u32, doubled: bool) -> Result<Modulus, GroupError> {
    Modulus::new(p, m, doubled)
}

/// Which of the cyclic forms `2, 4, p^m, 2p^m` an integer takes, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    CyclicPrimePower { p: Natural, m: u32 },
    CyclicTwicePrimePower { p: Natural, m: u32 },
    /// `n = 2` or `n = 4`.
    CyclicSmall,
    NotCyclic,
}

impl Classification {
    pub fn is_cyclic(&self) -> bool {
        !matches!(self, Classification::NotCyclic)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::CyclicPrimePower { p, m } => write!(f, "cyclic: p^m, p={p}, m={m}"),
            Classification::CyclicTwicePrimePower { p, m } => write!(f, "cyclic: 2p^m, p={p}, m={m}"),
            Classification::CyclicSmall => f.write_str("cyclic: small"),
            Classification::NotCyclic => f.write_str("not cyclic"),
        }
    }
}

pub fn classify_modulus(n: &Natural) -> Result<Classification, GroupError> {
    classify_modulus_with_budget(n, &FactorBudget::default())
}

/// Decides the form of `n` by factoring it.
pub fn classify_modulus_with_budget(n: &Natural, budget: &FactorBudget) -> Result<Classification, GroupError> {
    if *n < Natural::from(2u8) {
        return Err(GroupError::ModulusTooSmall(n.clone()));
    }
    if *n == Natural::from(2u8) || *n == Natural::from(4u8) {
        return Ok(Classification::CyclicSmall);
    }
    let factors = factorize_with_budget(n, budget)?;
    let two = Natural::from(2u8);
    let twos = factors.multiplicity(&two);
    let odd: Vec<&(Natural, u32)> = factors.factors().iter().filter(|(q, _)| *q != two).collect();
    Ok(match (twos, odd.as_slice()) {
        (0, [(p, m)]) => Classification::CyclicPrimePower { p: p.clone(), m: *m },
        (1, [(p, m)]) => Classification::CyclicTwicePrimePower { p: p.clone(), m: *m },
        _ => Classification::NotCyclic,
    })
}

/// `true` iff `1 <= x < n` and `gcd(x, n) = 1`.
pub fn is_unit(x: &Natural, modulus: &Modulus) -> bool {
    !x.is_zero() && x < modulus.n() && x.gcd(modulus.n()).is_one()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Residue {
    Word(u64),
    Big(Natural),
}

/// An element of `U(n)`, tied to the modulus it lives in.
#[derive(Clone)]
pub struct Unit<'m> {
    residue: Residue,
    modulus: &'m Modulus,
}

impl<'m> Unit<'m> {
    pub fn new(value: Natural, modulus: &'m Modulus) -> Result<Self, GroupError> {
        if !is_unit(&value, modulus) {
            return Err(GroupError::NotAUnit {
                value,
                n: modulus.n().clone(),
            });
        }
        Ok(Self::from_reduced(value, modulus))
    }

    pub fn one(modulus: &'m Modulus) -> Self {
        Self::from_reduced(Natural::one(), modulus)
    }

    /// Caller guarantees `value` is already a unit.
    fn from_reduced(value: Natural, modulus: &'m Modulus) -> Self {
        let residue = match modulus.word {
            Some(_) => Residue::Word(value.to_u64().expect("residue below a word-sized modulus")),
            None => Residue::Big(value),
        };
        Self { residue, modulus }
    }

    pub fn value(&self) -> Natural {
        match &self.residue {
            Residue::Word(v) => Natural::from(*v),
            Residue::Big(v) => v.clone(),
        }
    }

    pub fn modulus(&self) -> &'m Modulus {
        self.modulus
    }

    pub fn is_one(&self) -> bool {
        match &self.residue {
            Residue::Word(v) => *v == 1,
            Residue::Big(v) => v.is_one(),
        }
    }

    /// Product in `U(n)`; always another unit.
    pub fn mul(&self, other: &Unit<'m>) -> Result<Unit<'m>, GroupError> {
        if !self.modulus.same_group(other.modulus) {
            return Err(GroupError::ModulusMismatch {
                left: self.modulus.n().clone(),
                right: other.modulus.n().clone(),
            });
        }
        let residue = match (&self.residue, &other.residue, self.modulus.word) {
            (Residue::Word(a), Residue::Word(b), Some(n)) => Residue::Word(mul_mod_u64(*a, *b, n)),
            (Residue::Big(a), Residue::Big(b), None) => Residue::Big(a * b % self.modulus.n()),
            _ => unreachable!("residue representation follows the modulus"),
        };
        Ok(Unit {
            residue,
            modulus: self.modulus,
        })
    }

    pub fn inverse(&self) -> Unit<'m> {
        let residue = match (&self.residue, self.modulus.word) {
            (Residue::Word(a), Some(n)) => Residue::Word(inv_mod_u64(*a, n).expect("units are invertible")),
            (Residue::Big(a), None) => Residue::Big(mod_inv(a, self.modulus.n()).expect("units are invertible")),
            _ => unreachable!("residue representation follows the modulus"),
        };
        Unit {
            residue,
            modulus: self.modulus,
        }
    }

    pub fn pow(&self, exponent: &Natural) -> Unit<'m> {
        let residue = match (&self.residue, self.modulus.word) {
            (Residue::Word(a), Some(n)) => Residue::Word(pow_mod_u64(*a, exponent, n)),
            (Residue::Big(a), None) => Residue::Big(mod_pow(a, exponent, self.modulus.n())),
            _ => unreachable!("residue representation follows the modulus"),
        };
        Unit {
            residue,
            modulus: self.modulus,
        }
    }

    /// Hashable key identifying this residue.
    pub(crate) fn key(&self) -> ResidueKey {
        ResidueKey(self.residue.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct ResidueKey(Residue);

impl PartialEq for Unit<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.modulus.same_group(other.modulus) && self.residue == other.residue
    }
}

impl Eq for Unit<'_> {}

impl fmt::Debug for Unit<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unit({} mod {})", self.value(), self.modulus.n())
    }
}

impl fmt::Display for Unit<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Least `d >= 1` with `g^d = 1`, found by stripping prime factors off `phi`.
pub fn element_order(g: &Unit<'_>) -> Natural {
    let mut order = g.modulus.phi().clone();
    for (q, e) in g.modulus.phi_factors().factors() {
        for _ in 0..*e {
            let candidate = &order / q;
            if g.pow(&candidate).is_one() {
                order = candidate;
            } else {
                break;
            }
        }
    }
    order
}

/// `true` iff `g` is a unit and `g^(phi/q) != 1` for every prime `q | phi`.
pub fn verify_generator(g: &Natural, modulus: &Modulus) -> bool {
    let Ok(unit) = Unit::new(g.clone(), modulus) else {
        return false;
    };
    let phi = modulus.phi();
    modulus
        .phi_factors()
        .primes()
        .all(|q| !unit.pow(&(phi / q)).is_one())
}

fn is_primitive_root_mod_p(g: &Natural, modulus: &Modulus) -> bool {
    let p = modulus.p();
    let p_minus_1 = p - 1u8;
    modulus
        .p_minus_1_factors
        .primes()
        .all(|q| !mod_pow(g, &(&p_minus_1 / q), p).is_one())
}

/// Deterministic generator of `U(n)`.
///
/// Takes the smallest primitive root `g` of `p`; for `m >= 2` replaces it by
/// `g + p` when `g^(p-1) = 1 (mod p^2)`; for `n = 2p^m` adds `p^m` if the
/// result is even.
pub fn find_generator(modulus: &Modulus) -> Unit<'_> {
    let p = modulus.p();
    let mut g = Natural::from(2u8);
    // p itself is always a unit mod p once g < p; the scan terminates below p.
    while !is_primitive_root_mod_p(&g, modulus) {
        g += 1u8;
    }
    if modulus.m() >= 2 {
        let p_squared = p * p;
        if mod_pow(&g, &(p - 1u8), &p_squared).is_one() {
            g += p;
        }
    }
    if modulus.is_doubled() && g.is_even() {
        g += modulus.prime_power();
    }
    debug_assert!(verify_generator(&g, modulus));
    Unit::from_reduced(g, modulus)
}

pub fn enumerate_units(n: u64) -> Result<Vec<u64>, GroupError> {
    enumerate_units_with_cap(n, DESK_CAP)
}

/// All `x` in `[1, n)` coprime to `n`, ascending. `U(1)` is `{0}` by
/// convention and is rejected.
pub fn enumerate_units_with_cap(n: u64, cap: u64) -> Result<Vec<u64>, GroupError> {
    if n < 2 {
        return Err(GroupError::ModulusTooSmall(Natural::from(n)));
    }
    if n > cap {
        return Err(GroupError::CapExceeded { n, cap });
    }
    Ok((1..n).filter(|&x| num_integer::gcd(x, n) == 1).collect())
}

pub fn is_cyclic_bruteforce(n: u64) -> Result<bool, GroupError> {
    is_cyclic_bruteforce_with_cap(n, DESK_CAP)
}

/// `true` iff the successive powers of some unit sweep out all of `U(n)`.
pub fn is_cyclic_bruteforce_with_cap(n: u64, cap: u64) -> Result<bool, GroupError> {
    let units = enumerate_units_with_cap(n, cap)?;
    let phi = units.len() as u64;
    Ok(units.iter().any(|&g| {
        let mut x = g;
        let mut order = 1u64;
        while x != 1 {
            x = mul_mod_u64(x, g, n);
            order += 1;
        }
        order == phi
    }))
}

/// Rebuilds a modulus from a classified integer, rejecting the non-cryptographic forms.
pub fn modulus_for(n: &Natural, budget: &FactorBudget) -> Result<Option<Modulus>, GroupError> {
    Ok(match classify_modulus_with_budget(n, budget)? {
        Classification::CyclicPrimePower { p, m } => Some(Modulus::with_budget(p, m, false, budget)?),
        Classification::CyclicTwicePrimePower { p, m } => Some(Modulus::with_budget(p, m, true, budget)?),
        Classification::CyclicSmall | Classification::NotCyclic => None,
    })
}

/// Every supported modulus with `n <= limit`, ordered by `n`.
pub fn supported_moduli_up_to(limit: u64) -> Vec<Modulus> {
    let mut out = Vec::new();
    for p in (3..=limit).step_by(2) {
        if !is_probable_prime(&BigUint::from(p), 1) {
            continue;
        }
        let mut pm = p;
        let mut m = 1;
        while pm <= limit {
            for doubled in [false, true] {
                if !doubled || pm * 2 <= limit {
                    out.push(Modulus::new(BigUint::from(p), m, doubled).expect("p is an odd prime"));
                }
            }
            pm = match pm.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
            m += 1;
        }
    }
    out.sort_by(|a, b| a.n().cmp(b.n()));
    out
}
