//! Letter-to-number translation (`A = 00` .. `Z = 25`) and packing of the
//! two-digit codes into fixed-width decimal blocks below the modulus.

use num_traits::Zero;
use thiserror::Error;

use crate::modmath::Natural;

/// Letter used to fill the last block when the message does not divide evenly.
pub const PAD_LETTER: char = 'X';

/// Largest two-digit letter code.
const MAX_CODE: u8 = 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("modulus {0} is too small to hold a single letter (needs n > 25)")]
    ModulusTooSmall(Natural),
    #[error("unsupported character {character:?} at position {position}")]
    UnsupportedCharacter { character: char, position: usize },
    #[error("block {index} ({block}) does not decode to letters")]
    InvalidBlock { index: usize, block: Natural },
    #[error("invalid message layout: {0}")]
    InvalidLayout(String),
}

/// Numeric plaintext blocks plus the layout needed to turn them back into letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedMessage {
    blocks: Vec<Natural>,
    letters_per_block: usize,
    pad_count: usize,
}

impl EncodedMessage {
    pub fn new(blocks: Vec<Natural>, letters_per_block: usize, pad_count: usize) -> Result<Self, CodecError> {
        if letters_per_block == 0 {
            return Err(CodecError::InvalidLayout("letters_per_block must be at least 1".into()));
        }
        if pad_count >= letters_per_block {
            return Err(CodecError::InvalidLayout(format!(
                "pad count {pad_count} must be below letters_per_block {letters_per_block}"
            )));
        }
        if pad_count > 0 && blocks.is_empty() {
            return Err(CodecError::InvalidLayout("padding on an empty message".into()));
        }
        Ok(Self {
            blocks,
            letters_per_block,
            pad_count,
        })
    }

    pub fn blocks(&self) -> &[Natural] {
        &self.blocks
    }

    pub fn letters_per_block(&self) -> usize {
        self.letters_per_block
    }

    pub fn pad_count(&self) -> usize {
        self.pad_count
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks rendered the way the worked examples print them, e.g. `"08 11 00"`.
    pub fn digits(&self) -> String {
        let width = 2 * self.letters_per_block;
        self.blocks
            .iter()
            .map(|b| format!("{:0>width$}", b.to_str_radix(10)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn letter_code(c: char) -> Option<u8> {
    c.is_ascii_uppercase().then(|| c as u8 - b'A')
}

pub fn code_letter(code: u8) -> Option<char> {
    (code <= MAX_CODE).then(|| (b'A' + code) as char)
}

/// The largest `t` such that `"25"` repeated `t` times, read in decimal, is below `n`.
pub fn letters_per_block_for(n: &Natural) -> Result<usize, CodecError> {
    let mut max_block = Natural::from(MAX_CODE);
    if max_block >= *n {
        return Err(CodecError::ModulusTooSmall(n.clone()));
    }
    let mut t = 1;
    loop {
        max_block = max_block * 100u8 + MAX_CODE;
        if max_block >= *n {
            return Ok(t);
        }
        t += 1;
    }
}

/// Uppercases `text`, drops whitespace, and packs the letters into blocks for
/// modulus `n`, padding the final block with [`PAD_LETTER`].
pub fn encode(text: &str, n: &Natural) -> Result<EncodedMessage, CodecError> {
    let per_block = letters_per_block_for(n)?;
    let mut codes = Vec::with_capacity(text.len());
    for (position, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            continue;
        }
        match letter_code(c.to_ascii_uppercase()) {
            Some(code) => codes.push(code),
            None => return Err(CodecError::UnsupportedCharacter { character: c, position }),
        }
    }
    let pad_count = (per_block - codes.len() % per_block) % per_block;
    let pad = letter_code(PAD_LETTER).expect("pad letter is A-Z");
    codes.extend(std::iter::repeat(pad).take(pad_count));

    let blocks = codes
        .chunks(per_block)
        .map(|chunk| chunk.iter().fold(Natural::zero(), |acc, &c| acc * 100u8 + c))
        .collect();
    EncodedMessage::new(blocks, per_block, pad_count)
}

/// Splits each block back into fixed-width two-digit codes and drops the padding.
pub fn decode(msg: &EncodedMessage) -> Result<String, CodecError> {
    let width = 2 * msg.letters_per_block;
    let mut out = String::with_capacity(msg.blocks.len() * msg.letters_per_block);
    for (index, block) in msg.blocks.iter().enumerate() {
        let invalid = || CodecError::InvalidBlock {
            index,
            block: block.clone(),
        };
        let digits = block.to_str_radix(10);
        if digits.len() > width {
            return Err(invalid());
        }
        let digits = format!("{digits:0>width$}");
        for pair in digits.as_bytes().chunks(2) {
            let code = std::str::from_utf8(pair)
                .ok()
                .and_then(|s| s.parse::<u8>().ok())
                .ok_or_else(invalid)?;
            out.push(code_letter(code).ok_or_else(invalid)?);
        }
    }
    out.truncate(out.len() - msg.pad_count);
    Ok(out)
}

pub(crate) fn first_block_at_or_above(msg: &EncodedMessage, n: &Natural) -> Option<(usize, Natural)> {
    msg.blocks
        .iter()
        .enumerate()
        .find(|(_, b)| *b >= n)
        .map(|(i, b)| (i, b.clone()))
}
