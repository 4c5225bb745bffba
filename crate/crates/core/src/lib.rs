//! ElGamal encryption over the group of units `U(n)` for `n = p^m` and
//! `n = 2p^m` (`p` an odd prime), with the number theory it needs and tools
//! for attacking the underlying discrete logarithm problem.
//!
//! - [`modmath`]: modular arithmetic, Miller-Rabin, prime generation, factoring.
//! - [`group`]: validated moduli, units, element orders and generators.
//! - [`dlog`]: brute force and baby-step giant-step solvers plus a cost benchmark.
//! - [`elgamal`]: key generation, encryption and decryption.
//! - [`codec`]: the `A = 00 .. Z = 25` letter encoding and block packing.
//! - [`keyfile`]: decimal text formats for keys and ciphertexts.
//!
//! This is a teaching and experimentation library. Arithmetic is not constant
//! time and the scheme is textbook ElGamal.

pub mod codec;
pub mod dlog;
pub mod elgamal;
pub mod group;
pub mod keyfile;
pub mod modmath;

pub use codec::{decode, encode, CodecError, EncodedMessage};
pub use dlog::{dlog_bruteforce, dlog_bsgs, AttackReport, DlogError, DlogInstance};
pub use elgamal::{
    decrypt_block, decrypt_message, encrypt_block, encrypt_message, keygen, keygen_from_parts, Ciphertext,
    CiphertextBlock, ElGamalError, EphemeralPolicy, PrivateKey, PublicKey,
};
pub use group::{classify_modulus, find_generator, make_modulus, Classification, GroupError, Modulus, Unit};
pub use modmath::{FactorBudget, MathError, Natural};
