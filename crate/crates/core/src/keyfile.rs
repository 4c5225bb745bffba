//! Line-oriented decimal text formats for keys and ciphertexts.
//!
//! ```text
//! UN-ELGAMAL PUBLIC v1      UN-ELGAMAL PRIVATE v1      UN-ELGAMAL CT v1
//! n=<dec>                   n=<dec>                    blocks=<N>
//! p=<dec>                   p=<dec>                    pad=<count>
//! m=<dec>                   m=<dec>                    c1=<dec> c2=<dec>   (N lines)
//! doubled=<0|1>             doubled=<0|1>
//! r1=<dec>                  a=<dec>
//! r2=<dec>
//! ```

use std::str::{FromStr, Lines};

use thiserror::Error;

use crate::elgamal::{Ciphertext, CiphertextBlock, ElGamalError, PrivateKey, PublicKey};
use crate::group::{GroupError, Modulus};
use crate::modmath::{FactorBudget, Natural};

pub const PUBLIC_HEADER: &str = "UN-ELGAMAL PUBLIC v1";
pub const PRIVATE_HEADER: &str = "UN-ELGAMAL PRIVATE v1";
pub const CIPHERTEXT_HEADER: &str = "UN-ELGAMAL CT v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("n = {stated} does not match p, m and doubled (expected {expected})")]
    ModulusMismatch { stated: Natural, expected: Natural },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Key(#[from] ElGamalError),
}

struct Reader<'a> {
    lines: Lines<'a>,
    line: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines(),
            line: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> FormatError {
        FormatError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str, FormatError> {
        self.line += 1;
        match self.lines.next() {
            Some(l) => Ok(l.trim_end_matches('\r')),
            None => Err(self.error("unexpected end of file")),
        }
    }

    fn header(&mut self, expected: &str) -> Result<(), FormatError> {
        let line = self.next_line()?;
        if line.trim() != expected {
            return Err(self.error(format!("expected header {expected:?}, found {line:?}")));
        }
        Ok(())
    }

    fn parse_value<T: FromStr>(&self, key: &str, raw: &str) -> Result<T, FormatError> {
        if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.error(format!("{key}: expected a decimal integer, found {raw:?}")));
        }
        raw.parse()
            .map_err(|_| self.error(format!("{key}: value {raw:?} out of range")))
    }

    fn field<T: FromStr>(&mut self, key: &str) -> Result<T, FormatError> {
        let line = self.next_line()?;
        let Some(raw) = line.trim().strip_prefix(key).and_then(|r| r.strip_prefix('=')) else {
            return Err(self.error(format!("expected `{key}=<dec>`, found {line:?}")));
        };
        self.parse_value(key, raw)
    }

    fn finish(&mut self) -> Result<(), FormatError> {
        for rest in self.lines.by_ref() {
            self.line += 1;
            if !rest.trim().is_empty() {
                return Err(self.error(format!("unexpected trailing content {rest:?}")));
            }
        }
        Ok(())
    }
}

fn write_modulus(out: &mut String, modulus: &Modulus) {
    out.push_str(&format!(
        "n={}\np={}\nm={}\ndoubled={}\n",
        modulus.n(),
        modulus.p(),
        modulus.m(),
        u8::from(modulus.is_doubled())
    ));
}

fn read_modulus(reader: &mut Reader<'_>, budget: &FactorBudget) -> Result<Modulus, FormatError> {
    let n: Natural = reader.field("n")?;
    let p: Natural = reader.field("p")?;
    let m: u32 = reader.field("m")?;
    let doubled = match reader.field::<u8>("doubled")? {
        0 => false,
        1 => true,
        other => return Err(reader.error(format!("doubled must be 0 or 1, found {other}"))),
    };
    let modulus = Modulus::with_budget(p, m, doubled, budget)?;
    if *modulus.n() != n {
        return Err(FormatError::ModulusMismatch {
            stated: n,
            expected: modulus.n().clone(),
        });
    }
    Ok(modulus)
}

pub fn write_public_key(pk: &PublicKey) -> String {
    let mut out = format!("{PUBLIC_HEADER}\n");
    write_modulus(&mut out, pk.modulus());
    out.push_str(&format!("r1={}\nr2={}\n", pk.r1(), pk.r2()));
    out
}

pub fn write_private_key(sk: &PrivateKey) -> String {
    let mut out = format!("{PRIVATE_HEADER}\n");
    write_modulus(&mut out, sk.modulus());
    out.push_str(&format!("a={}\n", sk.a()));
    out
}

pub fn write_ciphertext(ct: &Ciphertext) -> String {
    let mut out = format!("{CIPHERTEXT_HEADER}\nblocks={}\npad={}\n", ct.blocks.len(), ct.pad_count);
    for b in &ct.blocks {
        out.push_str(&format!("c1={} c2={}\n", b.c1, b.c2));
    }
    out
}

pub fn parse_public_key(text: &str) -> Result<PublicKey, FormatError> {
    parse_public_key_with_budget(text, &FactorBudget::default())
}

pub fn parse_public_key_with_budget(text: &str, budget: &FactorBudget) -> Result<PublicKey, FormatError> {
    let mut reader = Reader::new(text);
    reader.header(PUBLIC_HEADER)?;
    let modulus = read_modulus(&mut reader, budget)?;
    let r1 = reader.field("r1")?;
    let r2 = reader.field("r2")?;
    reader.finish()?;
    Ok(PublicKey::new(modulus, r1, r2)?)
}

pub fn parse_private_key(text: &str) -> Result<PrivateKey, FormatError> {
    parse_private_key_with_budget(text, &FactorBudget::default())
}

pub fn parse_private_key_with_budget(text: &str, budget: &FactorBudget) -> Result<PrivateKey, FormatError> {
    let mut reader = Reader::new(text);
    reader.header(PRIVATE_HEADER)?;
    let modulus = read_modulus(&mut reader, budget)?;
    let a = reader.field("a")?;
    reader.finish()?;
    Ok(PrivateKey::new(modulus, a)?)
}

pub fn parse_ciphertext(text: &str) -> Result<Ciphertext, FormatError> {
    let mut reader = Reader::new(text);
    reader.header(CIPHERTEXT_HEADER)?;
    let count: usize = reader.field("blocks")?;
    let pad_count: usize = reader.field("pad")?;
    let mut blocks = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let line = reader.next_line()?;
        let mut parts = line.split_whitespace();
        let (Some(c1), Some(c2), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(reader.error(format!("expected `c1=<dec> c2=<dec>`, found {line:?}")));
        };
        let value = |key: &str, part: &str| -> Result<Natural, FormatError> {
            match part.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
                Some(raw) => reader.parse_value(key, raw),
                None => Err(reader.error(format!("expected `{key}=<dec>`, found {part:?}"))),
            }
        };
        blocks.push(CiphertextBlock {
            c1: value("c1", c1)?,
            c2: value("c2", c2)?,
        });
    }
    reader.finish()?;
    Ok(Ciphertext { blocks, pad_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elgamal::{keygen, keygen_from_parts};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn example_public_key_text() {
        let (pk, sk) = keygen_from_parts(nat(29), 1, false, nat(4), nat(3)).unwrap();
        let text = write_public_key(&pk);
        assert_eq!(text, "UN-ELGAMAL PUBLIC v1\nn=29\np=29\nm=1\ndoubled=0\nr1=3\nr2=23\n");
        assert_eq!(parse_public_key(&text).unwrap(), pk);
        let text = write_private_key(&sk);
        assert_eq!(text, "UN-ELGAMAL PRIVATE v1\nn=29\np=29\nm=1\ndoubled=0\na=4\n");
        assert_eq!(parse_private_key(&text).unwrap(), sk);
    }

    #[test]
    fn generated_keys_round_trip() {
        let (pk, sk) = keygen(64, 2, true, &mut ChaCha20Rng::seed_from_u64(8)).unwrap();
        let pk2 = parse_public_key(&write_public_key(&pk)).unwrap();
        let sk2 = parse_private_key(&write_private_key(&sk)).unwrap();
        assert_eq!(pk2, pk);
        assert!(sk2.matches(&pk2));
    }

    #[test]
    fn ciphertext_text() {
        let ct = Ciphertext {
            blocks: vec![
                CiphertextBlock { c1: nat(11), c2: nat(26) },
                CiphertextBlock { c1: nat(11), c2: nat(0) },
            ],
            pad_count: 0,
        };
        let text = write_ciphertext(&ct);
        assert_eq!(text, "UN-ELGAMAL CT v1\nblocks=2\npad=0\nc1=11 c2=26\nc1=11 c2=0\n");
        assert_eq!(parse_ciphertext(&text).unwrap(), ct);
        let empty = Ciphertext::default();
        assert_eq!(write_ciphertext(&empty), "UN-ELGAMAL CT v1\nblocks=0\npad=0\n");
        assert_eq!(parse_ciphertext(&write_ciphertext(&empty)).unwrap(), empty);
    }

    #[test]
    fn malformed_inputs() {
        let truncated = "UN-ELGAMAL CT v1\nblocks=2\npad=0\nc1=11 c2=26\n";
        assert!(matches!(parse_ciphertext(truncated), Err(FormatError::Syntax { line: 5, .. })));
        assert!(parse_ciphertext("UN-ELGAMAL CT v2\nblocks=0\npad=0\n").is_err());
        assert!(parse_ciphertext("UN-ELGAMAL CT v1\nblocks=1\npad=0\nc1=-1 c2=3\n").is_err());
        assert!(parse_ciphertext("UN-ELGAMAL CT v1\nblocks=0\npad=0\nextra\n").is_err());

        let wrong_n = "UN-ELGAMAL PUBLIC v1\nn=31\np=29\nm=1\ndoubled=0\nr1=3\nr2=23\n";
        assert!(matches!(parse_public_key(wrong_n), Err(FormatError::ModulusMismatch { .. })));
        let not_gen = "UN-ELGAMAL PUBLIC v1\nn=29\np=29\nm=1\ndoubled=0\nr1=16\nr2=23\n";
        assert!(matches!(parse_public_key(not_gen), Err(FormatError::Key(_))));
        let bad_doubled = "UN-ELGAMAL PRIVATE v1\nn=29\np=29\nm=1\ndoubled=2\na=4\n";
        assert!(parse_private_key(bad_doubled).is_err());
        let composite_p = "UN-ELGAMAL PRIVATE v1\nn=15\np=15\nm=1\ndoubled=0\na=4\n";
        assert!(matches!(parse_private_key(composite_p), Err(FormatError::Group(_))));
        assert!(parse_private_key("").is_err());
    }
}
