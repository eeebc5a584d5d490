//! Simulator for a lightweight RFID mutual-authentication and
//! ownership-transfer protocol built from two hardware-friendly primitives:
//! a maximal-length LFSR shared by all parties as the public permutation F,
//! and a per-tag arbiter PUF as the secret permutation P.
//!
//! Tag and reader share a secret tuple `{IDS, ID, G}`: a rotating index
//! pseudonym, a fixed identity, and an evolving greeting chained through the
//! tag's PUF. A session is four messages — request, pseudonym, reader proof
//! `ID xor G`, tag proof `(P(G) xor F(G), P(P(G)) xor F(F(G)))` — after which
//! both sides advance the greeting and re-key the pseudonym. Handing the
//! reader-side tuple to a new owner transfers the tag: one authentication
//! round later the state has evolved past anything the old owner knows.
//!
//! The crate ships the primitives ([`lfsr`], [`puf`]), the tag/reader state
//! machines ([`protocol`]), a scriptable Dolev-Yao channel with canned attack
//! scenarios that turn the protocol's security claims into pass/fail verdicts
//! ([`adversary`]), and a hardware cost estimator ([`resources`]).
//!
//! A caveat worth stating up front: F is linear over GF(2), so an adversary
//! doing linear algebra on two consecutive pseudonyms plus one transcript can
//! recover the identity and greeting chain — the known weakness class of
//! ultra-lightweight protocols in this family. The scenario suite verifies
//! the protocol against the record/replay/modify/inject adversary its design
//! targets, and makes no stronger claim.

pub mod adversary;
pub mod lfsr;
pub mod protocol;
pub mod puf;
pub mod resources;
pub mod word;

use thiserror::Error as ThisError;

/// Errors across the primitives, the protocol engine, and the harness.
#[derive(Debug, Clone, PartialEq, Eq, ThisError)]
pub enum Error {
    /// The all-zero LFSR state is a fixed point of XOR feedback.
    #[error("LFSR state is all-zero, the excluded fixed point")]
    ZeroState,

    /// Tap mask empty or missing the constant term.
    #[error("tap mask does not describe an invertible feedback polynomial")]
    DegenerateTaps,

    /// Key length outside {8, 16, 32, 64, 96, 160}.
    #[error("unsupported key length {0} (supported: 8, 16, 32, 64, 96, 160)")]
    UnsupportedWidth(u16),

    /// Protocol message arrived in a phase that cannot accept it.
    #[error("message not acceptable in the tag's current session phase")]
    WrongPhase,

    /// Pseudonym not present in the reader's table; the reader stays silent.
    #[error("index pseudonym not present in the reader table")]
    UnknownIds,

    /// The tag found the reader's proof inconsistent with its own secrets.
    #[error("reader proof rejected by the tag")]
    ReaderRejected,

    /// The reader found the tag's proof inconsistent with its stored greeting.
    #[error("tag proof rejected by the reader")]
    TagRejected,

    /// No scenario registered under this name.
    #[error("unknown attack scenario {0:?}")]
    UnknownScenario(String),
}
