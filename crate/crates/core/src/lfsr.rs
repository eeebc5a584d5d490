//! Fibonacci LFSR realizing the shared public permutation.
//!
//! Both reader and tag use the same L-bit maximal-length linear feedback shift
//! register as their public mixing function. One clock shifts the state right
//! by one bit; the bit entering at the top is the XOR of the tapped state bits.
//! With a primitive feedback polynomial the nonzero states form a single orbit
//! of length 2^L - 1, and the all-zero state is the lone fixed point.
//!
//! Tap masks are published in [`TAP_TABLE`] so transcripts reproduce
//! bit-for-bit across implementations: bit `i` of the mask is the coefficient
//! of x^i in the characteristic polynomial (the leading x^L term is implicit),
//! and the feedback bit is `parity(state & mask)`. Every entry was checked
//! primitive against the full factorization of 2^L - 1; the 4-bit entry exists
//! for exhaustive testing only and is not a protocol key length.

use crate::word::Word;
use crate::Error;

/// Published feedback polynomials, `(width, tap mask hex)`.
///
/// | width | characteristic polynomial            | tap mask |
/// |-------|--------------------------------------|----------|
/// | 4     | x^4 + x^3 + 1 (test only)            | 0x9      |
/// | 8     | x^8 + x^4 + x^3 + x^2 + 1            | 0x1d     |
/// | 16    | x^16 + x^15 + x^13 + x^4 + 1         | 0xa011   |
/// | 32    | x^32 + x^22 + x^2 + x + 1            | 0x00400007 |
/// | 64    | x^64 + x^63 + x^61 + x^60 + 1        | 0xb000000000000001 |
/// | 96    | x^96 + x^94 + x^49 + x^47 + 1        | 0x400000000002800000000001 |
/// | 160   | x^160 + x^5 + x^3 + x^2 + 1          | 0x...002d |
pub const TAP_TABLE: &[(u16, &str)] = &[
    (4, "9"),
    (8, "1d"),
    (16, "a011"),
    (32, "00400007"),
    (64, "b000000000000001"),
    (96, "400000000002800000000001"),
    (160, "000000000000000000000000000000000000002d"),
];

/// Key lengths the protocol supports. The 4-bit LFSR spec is test-only.
pub const SUPPORTED_WIDTHS: &[u16] = &[8, 16, 32, 64, 96, 160];

pub fn is_supported_width(width: u16) -> bool {
    SUPPORTED_WIDTHS.contains(&width)
}

/// Gate cost of an L-bit LFSR: 4 gates per bit plus 3 XOR gates.
pub fn gate_cost(width: u16) -> u32 {
    4 * u32::from(width) + 3
}

/// An L-bit Fibonacci LFSR: width plus feedback tap mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LfsrSpec {
    width: u16,
    taps: Word,
}

impl LfsrSpec {
    /// Builds a spec from an explicit tap mask.
    ///
    /// The mask must be nonzero and include bit 0 (the constant term of the
    /// feedback polynomial); without it the step function is not injective.
    pub fn new(width: u16, taps: Word) -> Result<Self, Error> {
        assert_eq!(taps.width(), width, "tap mask width mismatch");
        if taps.is_zero() || !taps.bit(0) {
            return Err(Error::DegenerateTaps);
        }
        Ok(LfsrSpec { width, taps })
    }

    /// The published spec for a protocol key length.
    pub fn published(width: u16) -> Result<Self, Error> {
        let (_, hex) = TAP_TABLE
            .iter()
            .find(|(w, _)| *w == width)
            .ok_or(Error::UnsupportedWidth(width))?;
        let taps = Word::from_hex(width, hex).expect("published tap mask parses");
        LfsrSpec::new(width, taps)
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    /// The feedback tap mask (bit i set = tap on state bit i).
    pub fn taps(&self) -> Word {
        self.taps
    }

    fn clock(&self, state: &Word) -> Word {
        state.shift_right_with_msb(state.and_parity(&self.taps))
    }

    /// One clock of the register. The all-zero state is the excluded fixed
    /// point of any XOR feedback and is rejected.
    pub fn step(&self, state: &Word) -> Result<Word, Error> {
        assert_eq!(state.width(), self.width, "state width mismatch");
        if state.is_zero() {
            return Err(Error::ZeroState);
        }
        Ok(self.clock(state))
    }

    /// The public permutation: load `x` as the register state and clock L
    /// times. Total on all L-bit words; 0 maps to 0 (the degenerate fixed
    /// point), and the restriction to nonzero words is a bijection.
    pub fn permute(&self, x: &Word) -> Word {
        assert_eq!(x.width(), self.width, "input width mismatch");
        let mut state = *x;
        if state.is_zero() {
            return state;
        }
        for _ in 0..self.width {
            state = self.clock(&state);
        }
        state
    }
}
