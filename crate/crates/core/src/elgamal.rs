//! ElGamal over `U(n)`: key generation, per-block encryption and decryption.
//!
//! The public key is `(r1, r2, n)` with `r1` a generator of `U(n)` and
//! `r2 = r1^a mod n`; the private key is the exponent `a`. A plaintext block
//! `P` in `[0, n)` encrypts under ephemeral `k` to `(r1^k, P * r2^k) mod n`
//! and decrypts as `c2 * (c1^a)^-1 mod n`.
//!
//! Plaintext blocks need not be units; only `c1` and `r2^k` are ever inverted.
//!
//! This is textbook ElGamal. Ciphertexts are malleable (multiplying two
//! ciphertexts component-wise multiplies the plaintexts) and there is no
//! padding scheme. Do not use it to protect real data.

use num_bigint::RandBigInt;
use num_traits::One;
use rand::Rng;
use thiserror::Error;

use crate::codec::{self, CodecError, EncodedMessage};
use crate::group::{find_generator, is_unit, verify_generator, GroupError, Modulus};
use crate::modmath::{gen_safe_prime, mod_inv, mod_pow, MathError, Natural};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElGamalError {
    #[error("plaintext block {block} is not below the modulus {n}")]
    BlockOutOfRange { block: Natural, n: Natural },
    #[error("ephemeral exponent {k} is outside [1, {max}]")]
    BadEphemeral { k: Natural, max: Natural },
    #[error("private exponent {a} is outside [2, {max}]")]
    BadPrivateExponent { a: Natural, max: Natural },
    #[error("{0} is not a generator of U(n)")]
    NotAGenerator(Natural),
    #[error("public value r2 = {0} is not a unit")]
    BadPublicValue(Natural),
    #[error("ciphertext component {0} is not a residue below n")]
    MalformedCiphertext(Natural),
    #[error("c1 = {0} is not invertible modulo n")]
    NotInvertible(Natural),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    modulus: Modulus,
    r1: Natural,
    r2: Natural,
}

impl PublicKey {
    /// Checks that `r1` generates `U(n)` and `r2` is a unit.
    pub fn new(modulus: Modulus, r1: Natural, r2: Natural) -> Result<Self, ElGamalError> {
        if !verify_generator(&r1, &modulus) {
            return Err(ElGamalError::NotAGenerator(r1));
        }
        if !is_unit(&r2, &modulus) {
            return Err(ElGamalError::BadPublicValue(r2));
        }
        Ok(Self { modulus, r1, r2 })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn n(&self) -> &Natural {
        self.modulus.n()
    }

    pub fn r1(&self) -> &Natural {
        &self.r1
    }

    pub fn r2(&self) -> &Natural {
        &self.r2
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey {
    modulus: Modulus,
    a: Natural,
}

impl PrivateKey {
    /// `a` must lie in `[2, n - 2]`. It is not required to be coprime to `n`.
    pub fn new(modulus: Modulus, a: Natural) -> Result<Self, ElGamalError> {
        let max = modulus.n() - 2u8;
        if a < Natural::from(2u8) || a > max {
            return Err(ElGamalError::BadPrivateExponent { a, max });
        }
        Ok(Self { modulus, a })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn n(&self) -> &Natural {
        self.modulus.n()
    }

    pub fn a(&self) -> &Natural {
        &self.a
    }

    /// The public key for generator `r1`.
    pub fn public_key(&self, r1: Natural) -> Result<PublicKey, ElGamalError> {
        let r2 = mod_pow(&r1, &self.a, self.n());
        PublicKey::new(self.modulus.clone(), r1, r2)
    }

    /// `true` when `pk` was derived from this exponent.
    pub fn matches(&self, pk: &PublicKey) -> bool {
        self.modulus == pk.modulus && mod_pow(&pk.r1, &self.a, self.n()) == pk.r2
    }
}

impl std::fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrivateKey")
            .field("modulus", &self.modulus)
            .field("a", &"<redacted>")
            .finish()
    }
}

/// The pair `(c1, c2)` for one plaintext block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CiphertextBlock {
    pub c1: Natural,
    pub c2: Natural,
}

/// A whole encrypted message: the blocks plus how many pad letters the last
/// block carries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ciphertext {
    pub blocks: Vec<CiphertextBlock>,
    pub pad_count: usize,
}

/// How ephemeral exponents are chosen across the blocks of one message.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum EphemeralPolicy {
    /// A fresh uniform `k` in `[1, n - 2]` for every block.
    #[default]
    Fresh,
    /// The same `k` for every block. Identical plaintext blocks then produce
    /// identical ciphertext blocks, so this only exists to reproduce fixed
    /// test vectors.
    Fixed(Natural),
}

/// Generates a key pair over `n = p^m` (or `2p^m`) with `p` a fresh safe
/// prime of `p_bits` bits, so `phi(n)` factors immediately.
pub fn keygen<R: Rng + ?Sized>(
    p_bits: u64,
    m: u32,
    doubled: bool,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey), ElGamalError> {
    if m == 0 {
        return Err(GroupError::InvalidExponent(m).into());
    }
    let (p, q) = gen_safe_prime(p_bits, rng)?;
    let modulus = Modulus::from_safe_prime(p, &q, m, doubled)?;
    let r1 = find_generator(&modulus).value();
    let a = rng.gen_biguint_range(&Natural::from(2u8), &(modulus.n() - 1u8));
    let private = PrivateKey::new(modulus, a)?;
    let public = private.public_key(r1)?;
    Ok((public, private))
}

/// Builds a key pair from explicit material, e.g. to reproduce published
/// test vectors.
pub fn keygen_from_parts(
    p: Natural,
    m: u32,
    doubled: bool,
    a: Natural,
    r1: Natural,
) -> Result<(PublicKey, PrivateKey), ElGamalError> {
    let modulus = Modulus::new(p, m, doubled)?;
    let private = PrivateKey::new(modulus, a)?;
    let public = private.public_key(r1)?;
    Ok((public, private))
}

fn check_ephemeral(k: &Natural, n: &Natural) -> Result<(), ElGamalError> {
    let max = n - 2u8;
    if *k < Natural::one() || *k > max {
        return Err(ElGamalError::BadEphemeral { k: k.clone(), max });
    }
    Ok(())
}

pub fn encrypt_block(pk: &PublicKey, block: &Natural, k: &Natural) -> Result<CiphertextBlock, ElGamalError> {
    let n = pk.n();
    if block >= n {
        return Err(ElGamalError::BlockOutOfRange {
            block: block.clone(),
            n: n.clone(),
        });
    }
    check_ephemeral(k, n)?;
    let c1 = mod_pow(&pk.r1, k, n);
    let c2 = block * mod_pow(&pk.r2, k, n) % n;
    Ok(CiphertextBlock { c1, c2 })
}

pub fn decrypt_block(sk: &PrivateKey, ct: &CiphertextBlock) -> Result<Natural, ElGamalError> {
    let n = sk.n();
    for c in [&ct.c1, &ct.c2] {
        if c >= n {
            return Err(ElGamalError::MalformedCiphertext(c.clone()));
        }
    }
    let shared = mod_pow(&ct.c1, &sk.a, n);
    let inv = mod_inv(&shared, n).map_err(|_| ElGamalError::NotInvertible(ct.c1.clone()))?;
    Ok(&ct.c2 * inv % n)
}

pub fn encrypt_message<R: Rng + ?Sized>(
    pk: &PublicKey,
    msg: &EncodedMessage,
    policy: &EphemeralPolicy,
    rng: &mut R,
) -> Result<Ciphertext, ElGamalError> {
    if let Some((_, block)) = codec::first_block_at_or_above(msg, pk.n()) {
        return Err(ElGamalError::BlockOutOfRange {
            block,
            n: pk.n().clone(),
        });
    }
    let k_hi = pk.n() - 1u8;
    let one = Natural::one();
    let blocks = msg
        .blocks()
        .iter()
        .map(|block| match policy {
            EphemeralPolicy::Fixed(k) => encrypt_block(pk, block, k),
            EphemeralPolicy::Fresh => encrypt_block(pk, block, &rng.gen_biguint_range(&one, &k_hi)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ciphertext {
        blocks,
        pad_count: msg.pad_count(),
    })
}

/// Decrypts every block and restores the block layout for `n`.
pub fn decrypt_message(sk: &PrivateKey, ct: &Ciphertext) -> Result<EncodedMessage, ElGamalError> {
    let per_block = codec::letters_per_block_for(sk.n())?;
    let blocks = ct
        .blocks
        .iter()
        .map(|b| decrypt_block(sk, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EncodedMessage::new(blocks, per_block, ct.pad_count)?)
}
