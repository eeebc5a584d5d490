//! Fixed-width bit words.
//!
//! Every protocol value (pseudonym, identity, greeting, message payload) is an
//! L-bit word for a key length L up to 160 bits, which does not fit a `u128`.
//! [`Word`] stores up to 192 bits in three little-endian limbs and keeps the
//! invariant that bits at or above `width` are zero.

use std::fmt;

use rand::RngCore;

/// Largest supported width in bits.
pub const MAX_WIDTH: u16 = 160;

/// An immutable bit word of a fixed width between 1 and [`MAX_WIDTH`] bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    width: u16,
    limbs: [u64; 3],
}

impl Word {
    /// The all-zero word of the given width.
    pub fn zero(width: u16) -> Self {
        assert!(width >= 1 && width <= MAX_WIDTH, "word width {width} out of range");
        Word { width, limbs: [0; 3] }
    }

    /// Builds a word from the low bits of `value`, masked to `width` bits.
    pub fn from_u64(width: u16, value: u64) -> Self {
        let mut w = Word::zero(width);
        w.limbs[0] = value;
        w.mask_top();
        w
    }

    /// Draws a uniformly random `width`-bit word from `rng`.
    pub fn random<R: RngCore>(width: u16, rng: &mut R) -> Self {
        let mut w = Word::zero(width);
        for i in 0..Word::limb_count(width) {
            w.limbs[i] = rng.next_u64();
        }
        w.mask_top();
        w
    }

    /// Draws a uniformly random nonzero `width`-bit word from `rng`.
    pub fn random_nonzero<R: RngCore>(width: u16, rng: &mut R) -> Self {
        loop {
            let w = Word::random(width, rng);
            if !w.is_zero() {
                return w;
            }
        }
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn is_zero(&self) -> bool {
        self.limbs == [0; 3]
    }

    /// Bit at position `idx` (0 = least significant).
    pub fn bit(&self, idx: u16) -> bool {
        debug_assert!(idx < self.width);
        self.limbs[(idx / 64) as usize] >> (idx % 64) & 1 == 1
    }

    /// Copy of `self` with bit `idx` set to `value`.
    pub fn with_bit(&self, idx: u16, value: bool) -> Self {
        debug_assert!(idx < self.width);
        let mut w = *self;
        let mask = 1u64 << (idx % 64);
        if value {
            w.limbs[(idx / 64) as usize] |= mask;
        } else {
            w.limbs[(idx / 64) as usize] &= !mask;
        }
        w
    }

    /// Bitwise XOR. Panics if widths differ: mixing widths is a protocol bug.
    pub fn xor(&self, other: &Word) -> Word {
        assert_eq!(self.width, other.width, "xor of words with different widths");
        let mut w = *self;
        for i in 0..3 {
            w.limbs[i] ^= other.limbs[i];
        }
        w
    }

    /// Parity (XOR fold) of `self & other`, as used for LFSR feedback.
    pub fn and_parity(&self, other: &Word) -> bool {
        debug_assert_eq!(self.width, other.width);
        let mut acc = 0u64;
        for i in 0..3 {
            acc ^= self.limbs[i] & other.limbs[i];
        }
        acc.count_ones() % 2 == 1
    }

    /// Shift right by one and place `feedback` in the most significant bit.
    pub fn shift_right_with_msb(&self, feedback: bool) -> Word {
        let mut w = Word::zero(self.width);
        w.limbs[0] = self.limbs[0] >> 1 | self.limbs[1] << 63;
        w.limbs[1] = self.limbs[1] >> 1 | self.limbs[2] << 63;
        w.limbs[2] = self.limbs[2] >> 1;
        if feedback {
            let top = self.width - 1;
            w.limbs[(top / 64) as usize] |= 1u64 << (top % 64);
        }
        w
    }

    /// Splits an even-width word into (high, low) halves of width/2 bits each.
    pub fn split(&self) -> (Word, Word) {
        assert_eq!(self.width % 2, 0, "split of odd-width word");
        let half = self.width / 2;
        let mut lo = Word::zero(half);
        let mut hi = Word::zero(half);
        for i in 0..self.width {
            if self.bit(i) {
                if i < half {
                    lo = lo.with_bit(i, true);
                } else {
                    hi = hi.with_bit(i - half, true);
                }
            }
        }
        (hi, lo)
    }

    /// Joins two equal-width halves into a double-width word.
    pub fn join(hi: &Word, lo: &Word) -> Word {
        assert_eq!(hi.width, lo.width, "join of mismatched halves");
        let half = hi.width;
        let mut w = Word::zero(half * 2);
        for i in 0..half {
            if lo.bit(i) {
                w = w.with_bit(i, true);
            }
            if hi.bit(i) {
                w = w.with_bit(half + i, true);
            }
        }
        w
    }

    /// Low `n` bits as a new word of width `n`.
    pub fn truncate(&self, n: u16) -> Word {
        assert!(n <= self.width);
        let mut w = Word::zero(n);
        w.limbs = self.limbs;
        w.mask_top();
        w
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> u32 {
        self.limbs.iter().map(|l| l.count_ones()).sum()
    }

    /// Hamming distance to another word of the same width.
    pub fn hamming(&self, other: &Word) -> u32 {
        self.xor(other).count_ones()
    }

    /// Lowercase hex, fixed width of ceil(L/4) digits.
    pub fn to_hex(&self) -> String {
        let digits = usize::from(self.width).div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.limbs[bit / 64] >> (bit % 64) & 0xf) as u32;
            s.push(char::from_digit(nibble, 16).unwrap());
        }
        s
    }

    /// Parses fixed-width lowercase/uppercase hex produced by [`Word::to_hex`].
    pub fn from_hex(width: u16, hex: &str) -> Option<Word> {
        if hex.len() != usize::from(width).div_ceil(4) {
            return None;
        }
        let mut w = Word::zero(width);
        for (pos, c) in hex.chars().rev().enumerate() {
            let nibble = c.to_digit(16)? as u64;
            let bit = pos * 4;
            w.limbs[bit / 64] |= nibble << (bit % 64);
        }
        // reject digits straddling the width boundary
        if w.limbs != { let mut m = w; m.mask_top(); m.limbs } {
            return None;
        }
        Some(w)
    }

    fn limb_count(width: u16) -> usize {
        usize::from(width).div_ceil(64)
    }

    fn mask_top(&mut self) {
        for i in 0..3 {
            let lo = i as u16 * 64;
            if self.width <= lo {
                self.limbs[i] = 0;
            } else if self.width < lo + 64 {
                self.limbs[i] &= u64::MAX >> (64 - (self.width - lo));
            }
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word<{}>({})", self.width, self.to_hex())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn hex_is_fixed_width() {
        assert_eq!(Word::zero(8).to_hex(), "00");
        assert_eq!(Word::from_u64(64, 0x1f).to_hex(), "000000000000001f");
        assert_eq!(Word::from_u64(4, 0x9).to_hex(), "9");
        // 160-bit word: 40 digits
        assert_eq!(Word::zero(160).to_hex().len(), 40);
    }

    #[test]
    fn from_u64_masks_to_width() {
        let w = Word::from_u64(8, 0x1ff);
        assert_eq!(w.to_hex(), "ff");
    }

    #[test]
    fn split_join_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for width in [8u16, 16, 32, 64, 96, 160] {
            let w = Word::random(width, &mut rng);
            let (hi, lo) = w.split();
            assert_eq!(Word::join(&hi, &lo), w);
        }
    }

    #[test]
    fn shift_right_crosses_limbs() {
        let w = Word::from_u64(96, 1).with_bit(64, true).with_bit(95, true);
        let s = w.shift_right_with_msb(true);
        assert!(s.bit(63));
        assert!(s.bit(94));
        assert!(s.bit(95)); // feedback bit
        assert!(!s.bit(0));
    }

    #[test]
    fn from_hex_rejects_wrong_length_and_overflow() {
        assert!(Word::from_hex(8, "0ff").is_none());
        assert!(Word::from_hex(8, "f").is_none());
        // width 6 needs 2 digits but the top nibble may only use 2 bits
        assert!(Word::from_hex(6, "ff").is_none());
        assert_eq!(Word::from_hex(6, "3f"), Some(Word::from_u64(6, 0x3f)));
    }

    proptest! {
        #[test]
        fn hex_round_trip(seed in any::<u64>(), wi in 0usize..6) {
            let width = [8u16, 16, 32, 64, 96, 160][wi];
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let w = Word::random(width, &mut rng);
            prop_assert_eq!(Word::from_hex(width, &w.to_hex()), Some(w));
        }

        #[test]
        fn xor_is_involutive(seed in any::<u64>(), wi in 0usize..6) {
            let width = [8u16, 16, 32, 64, 96, 160][wi];
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let a = Word::random(width, &mut rng);
            let b = Word::random(width, &mut rng);
            prop_assert_eq!(a.xor(&b).xor(&b), a);
        }
    }
}
