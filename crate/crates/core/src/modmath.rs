//! Arbitrary-precision modular arithmetic and the number-theoretic primitives
//! the rest of the crate is built on: exponentiation, inverses, primality,
//! prime generation and factorization.
//!
//! Every function here is pure apart from an explicit random source, so all of
//! them can be called concurrently.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

/// Arbitrary-precision nonnegative integer.
pub type Natural = BigUint;

/// Miller-Rabin rounds used for everything above the deterministic range.
pub const MR_ROUNDS: u32 = 64;

/// Upper bound (inclusive) for trial division in [`factorize`].
pub const TRIAL_DIVISION_BOUND: u32 = 1_000_000;

/// Default number of Pollard rho iterations spent on one composite cofactor.
pub const RHO_ITERATIONS: u64 = 1 << 22;

/// Witnesses that make Miller-Rabin exact for every n < 2^64.
const U64_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MathError {
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: Natural, modulus: Natural },
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(Natural),
    #[error("prime bit length must be at least 3, got {0}")]
    BitLengthTooSmall(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(Natural),
    #[error("prime-power exponent must be at least 1")]
    ZeroExponent,
    #[error("cannot factor {0}: input must be at least 2")]
    FactorInputTooSmall(Natural),
    #[error("composite cofactor {cofactor} resisted {iterations} Pollard rho iterations")]
    FactorizationTooHard { cofactor: Natural, iterations: u64 },
}

/// `base^exponent mod modulus` by left-to-right square-and-multiply.
///
/// Returns 0 when `modulus == 1`. Panics if `modulus == 0`.
pub fn mod_pow(base: &Natural, exponent: &Natural, modulus: &Natural) -> Natural {
    assert!(!modulus.is_zero(), "mod_pow: modulus must be at least 1");
    if modulus.is_one() {
        return Natural::zero();
    }
    if let Some(m) = modulus.to_u64() {
        let b = (base % m).to_u64().unwrap_or_default();
        return Natural::from(pow_mod_u64(b, exponent, m));
    }
    let base = base % modulus;
    let mut acc = Natural::one();
    for i in (0..exponent.bits()).rev() {
        acc = &acc * &acc % modulus;
        if exponent.bit(i) {
            acc = acc * &base % modulus;
        }
    }
    acc
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Word-sized square-and-multiply; the exponent may still be arbitrarily large.
pub(crate) fn pow_mod_u64(base: u64, exponent: &Natural, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let base = base % m;
    let mut acc = 1u64;
    for i in (0..exponent.bits()).rev() {
        acc = mul_mod_u64(acc, acc, m);
        if exponent.bit(i) {
            acc = mul_mod_u64(acc, base, m);
        }
    }
    acc
}

fn pow_mod_u64_small(mut base: u64, mut exponent: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exponent >>= 1;
    }
    acc
}

pub fn gcd(a: &Natural, b: &Natural) -> Result<Natural, MathError> {
    if a.is_zero() && b.is_zero() {
        return Err(MathError::GcdOfZeros);
    }
    Ok(a.gcd(b))
}

/// Inverse of `a` modulo `modulus` via the extended Euclidean algorithm.
///
/// The result lies in `[1, modulus - 1]`.
pub fn mod_inv(a: &Natural, modulus: &Natural) -> Result<Natural, MathError> {
    if *modulus < Natural::from(2u8) {
        return Err(MathError::ModulusTooSmall(modulus.clone()));
    }
    let m = BigInt::from(modulus.clone());
    let (mut old_r, mut r) = (BigInt::from(a % modulus), m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(MathError::NotInvertible {
            value: a.clone(),
            modulus: modulus.clone(),
        });
    }
    Ok(old_s
        .mod_floor(&m)
        .to_biguint()
        .expect("mod_floor of a positive modulus is nonnegative"))
}

/// Word-sized inverse; `None` when `gcd(a, m) != 1`.
pub(crate) fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = ((a % m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// All primes up to [`TRIAL_DIVISION_BOUND`], sieved once.
fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = TRIAL_DIVISION_BOUND as usize;
        let mut composite = vec![false; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &U64_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &U64_WITNESSES {
        let mut x = pow_mod_u64_small(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn miller_rabin_round(n: &Natural, n_minus_1: &Natural, d: &Natural, s: u64, a: &Natural) -> bool {
    let mut x = mod_pow(a, d, n);
    if x.is_one() || x == *n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = &x * &x % n;
        if x == *n_minus_1 {
            return true;
        }
    }
    false
}

/// Miller-Rabin primality test.
///
/// Exact for `n < 2^64`. Above that, base 2 plus `rounds - 1` further bases
/// drawn from a generator seeded by `n` itself, so the answer is reproducible.
/// `false` is always correct.
pub fn is_probable_prime(n: &Natural, rounds: u32) -> bool {
    if let Some(w) = n.to_u64() {
        return is_prime_u64(w);
    }
    if n.is_even() {
        return false;
    }
    for &p in &small_primes()[..256] {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let mut seed = [0u8; 32];
    for (dst, src) in seed.iter_mut().zip(n.to_bytes_le()) {
        *dst = src;
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let two = Natural::from(2u8);
    for round in 0..rounds.max(1) {
        let a = if round == 0 {
            two.clone()
        } else {
            rng.gen_biguint_range(&two, &n_minus_1)
        };
        if !miller_rabin_round(n, &n_minus_1, &d, s, &a) {
            return false;
        }
    }
    true
}

fn check_bits(bits: u64) -> Result<(), MathError> {
    if bits < 3 {
        return Err(MathError::BitLengthTooSmall(bits));
    }
    Ok(())
}

/// Random odd probable prime with exactly `bits` bits.
pub fn gen_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<Natural, MathError> {
    check_bits(bits)?;
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MR_ROUNDS) {
            return Ok(candidate);
        }
    }
}

/// Random safe prime `p = 2q + 1` with exactly `bits` bits; returns `(p, q)`.
pub fn gen_safe_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<(Natural, Natural), MathError> {
    check_bits(bits)?;
    let q_bits = bits - 1;
    loop {
        let mut q = rng.gen_biguint(q_bits);
        q.set_bit(q_bits - 1, true);
        if q_bits > 2 {
            q.set_bit(0, true);
            // q = 1 mod 3 would make 3 | 2q + 1.
            if q_bits > 8 && (&q % 3u8).is_one() {
                continue;
            }
        }
        if !is_probable_prime(&q, MR_ROUNDS) {
            continue;
        }
        let p: Natural = (&q << 1u8) + 1u8;
        if is_probable_prime(&p, MR_ROUNDS) {
            return Ok((p, q));
        }
    }
}

/// `p^(m-1) * (p - 1)`, the order of both `U(p^m)` and `U(2p^m)`.
pub fn euler_phi_special(p: &Natural, m: u32, _doubled: bool) -> Result<Natural, MathError> {
    if p.is_even() || !is_probable_prime(p, MR_ROUNDS) {
        return Err(MathError::NotOddPrime(p.clone()));
    }
    if m == 0 {
        return Err(MathError::ZeroExponent);
    }
    Ok(num_traits::pow(p.clone(), (m - 1) as usize) * (p - 1u8))
}

/// Prime factorization as `(prime, multiplicity)` pairs, primes ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    factors: Vec<(Natural, u32)>,
}

impl Factorization {
    /// Builds from raw prime powers, merging duplicates. Callers guarantee
    /// every entry is prime.
    pub(crate) fn from_prime_powers<I>(powers: I) -> Self
    where
        I: IntoIterator<Item = (Natural, u32)>,
    {
        let mut factors: Vec<(Natural, u32)> = powers.into_iter().filter(|(_, e)| *e > 0).collect();
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Natural, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((last, count)) if *last == p => *count += e,
                _ => merged.push((p, e)),
            }
        }
        Self { factors: merged }
    }

    pub(crate) fn merge(&self, other: &Factorization) -> Factorization {
        Self::from_prime_powers(self.factors.iter().chain(other.factors.iter()).cloned())
    }

    pub fn factors(&self) -> &[(Natural, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &Natural> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn multiplicity(&self, prime: &Natural) -> u32 {
        self.factors
            .iter()
            .find(|(p, _)| p == prime)
            .map_or(0, |(_, e)| *e)
    }

    /// The product of all prime powers.
    pub fn value(&self) -> Natural {
        self.factors
            .iter()
            .fold(Natural::one(), |acc, (p, e)| acc * num_traits::pow(p.clone(), *e as usize))
    }
}

/// Effort limits for [`factorize_with_budget`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    /// Largest trial divisor; clamped to [`TRIAL_DIVISION_BOUND`].
    pub trial_bound: u32,
    /// Pollard rho iterations allowed per composite cofactor.
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        Self {
            trial_bound: TRIAL_DIVISION_BOUND,
            rho_iterations: RHO_ITERATIONS,
        }
    }
}

pub fn factorize(n: &Natural) -> Result<Factorization, MathError> {
    factorize_with_budget(n, &FactorBudget::default())
}

/// Trial division up to the budget's bound, then Brent's variant of Pollard
/// rho on whatever composite cofactor remains.
pub fn factorize_with_budget(n: &Natural, budget: &FactorBudget) -> Result<Factorization, MathError> {
    if *n < Natural::from(2u8) {
        return Err(MathError::FactorInputTooSmall(n.clone()));
    }
    let mut rest = n.clone();
    let mut found: Vec<(Natural, u32)> = Vec::new();
    let bound = budget.trial_bound.clamp(2, TRIAL_DIVISION_BOUND);
    for &p in small_primes().iter().take_while(|&&p| p <= bound) {
        if Natural::from(p as u64 * p as u64) > rest {
            break;
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            found.push((Natural::from(p), e));
        }
    }
    if !rest.is_one() {
        split_cofactor(rest, budget.rho_iterations, &mut found)?;
    }
    Ok(Factorization::from_prime_powers(found))
}

fn split_cofactor(n: Natural, max_iterations: u64, found: &mut Vec<(Natural, u32)>) -> Result<(), MathError> {
    if is_probable_prime(&n, MR_ROUNDS) {
        found.push((n, 1));
        return Ok(());
    }
    if n.is_even() {
        found.push((Natural::from(2u8), 1));
        return split_cofactor(n >> 1u8, max_iterations, found);
    }
    let mut remaining = max_iterations;
    let mut c = Natural::one();
    while remaining > 0 {
        if let Some(d) = brent_rho(&n, &c, &mut remaining) {
            let other = &n / &d;
            split_cofactor(d, max_iterations, found)?;
            return split_cofactor(other, max_iterations, found);
        }
        c += 1u8;
    }
    Err(MathError::FactorizationTooHard {
        cofactor: n,
        iterations: max_iterations,
    })
}

fn abs_diff(a: &Natural, b: &Natural) -> Natural {
    if a > b {
        a - b
    } else {
        b - a
    }
}

/// One Brent rho attempt with `x -> x^2 + c`. Returns a nontrivial divisor, or
/// `None` if the cycle degenerated or the iteration budget ran out.
fn brent_rho(n: &Natural, c: &Natural, remaining: &mut u64) -> Option<Natural> {
    const BATCH: u64 = 128;
    let step = |x: &Natural| (x * x + c) % n;

    let mut y = Natural::from(2u8);
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut q = Natural::one();
    let mut g = Natural::one();
    let mut r = 1u64;

    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = step(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let batch = BATCH.min(r - k);
            for _ in 0..batch {
                y = step(&y);
                q = q * abs_diff(&x, &y) % n;
            }
            g = q.gcd(n);
            k += batch;
        }
        let spent = 2 * r;
        if spent >= *remaining && g.is_one() {
            *remaining = 0;
            return None;
        }
        *remaining = remaining.saturating_sub(spent);
        r *= 2;
    }
    if g == *n {
        // Batched product hit zero; replay the last batch one step at a time.
        loop {
            ys = step(&ys);
            g = abs_diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if g == *n {
        None
    } else {
        Some(g)
    }
}
