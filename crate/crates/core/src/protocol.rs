//! Tag and reader state machines for the four-message mutual-authentication
//! handshake and the ownership-transfer handoff.
//!
//! Provisioning preloads both parties with the shared tuple `{IDS, ID, G}`
//! and additionally stores `P(G)` on the reader side. A session then runs:
//!
//! 1. reader → tag: `Req` broadcast
//! 2. tag → reader: `IDS` (public, rotates every session)
//! 3. reader → tag: `ID xor G` — the tag authenticates the reader
//! 4. tag → reader: `(G1 xor K, G2 xor K')` with `G1 = P(G)`, `G2 = P(G1)`,
//!    `K = F(G)`, `K' = F(K)` — the reader recovers `G1`, compares it with
//!    its stored copy, and authenticates the tag
//!
//! On success both sides advance the greeting window and re-key the pseudonym
//! to `F(IDS xor G1)` using the post-update greeting. Any verification
//! failure leaves the failing party's secrets untouched.
//!
//! The update order matters: the tag commits its update when it emits the
//! step-4 message, the reader only after verifying it. A lost or corrupted
//! step-4 message therefore desynchronizes the pair permanently — the
//! protocol has no recovery path, and the harness demonstrates that rather
//! than papering over it.

use serde::{Deserialize, Serialize};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;

use crate::lfsr::{is_supported_width, LfsrSpec};
use crate::puf::PufInstance;
use crate::word::Word;
use crate::Error;

/// The shared secrets: rotating index pseudonym, fixed identity, current
/// greeting. All nonzero by provisioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecretTuple {
    pub ids: Word,
    pub id: Word,
    pub greeting: Word,
}

impl SecretTuple {
    /// Persistent tag storage in bits: exactly the three L-bit words.
    pub fn storage_bits(&self) -> u32 {
        3 * u32::from(self.ids.width())
    }
}

/// Where the tag stands within a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagPhase {
    Idle,
    AwaitingReaderAuth,
    Done,
}

/// The four wire messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Message {
    /// Step 1: reader broadcast, carries nothing.
    Req,
    /// Step 2: the tag's current pseudonym.
    IdsResponse { ids: Word },
    /// Step 3: `ID xor G`, the reader's proof of knowing both.
    ReaderAuth { proof: Word },
    /// Step 4: blinded next greetings, the tag's proof of owning P.
    TagAuth { blinded_g1: Word, blinded_g2: Word },
}

/// Message kind, which doubles as the session step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MessageKind {
    Req,
    IdsResponse,
    ReaderAuth,
    TagAuth,
}

/// Who sent a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    ReaderToTag,
    TagToReader,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::Req => MessageKind::Req,
            Message::IdsResponse { .. } => MessageKind::IdsResponse,
            Message::ReaderAuth { .. } => MessageKind::ReaderAuth,
            Message::TagAuth { .. } => MessageKind::TagAuth,
        }
    }

    pub fn direction(&self) -> Direction {
        match self.kind() {
            MessageKind::Req | MessageKind::ReaderAuth => Direction::ReaderToTag,
            MessageKind::IdsResponse | MessageKind::TagAuth => Direction::TagToReader,
        }
    }

    /// Payload words in wire order.
    pub fn payload_words(&self) -> Vec<Word> {
        match self {
            Message::Req => vec![],
            Message::IdsResponse { ids } => vec![*ids],
            Message::ReaderAuth { proof } => vec![*proof],
            Message::TagAuth { blinded_g1, blinded_g2 } => vec![*blinded_g1, *blinded_g2],
        }
    }

    /// Concatenated fixed-width hex of all payload words ("" for `Req`).
    pub fn payload_hex(&self) -> String {
        self.payload_words().iter().map(Word::to_hex).collect()
    }

    /// Copy with `mask` XORed into the `word_index`-th payload word.
    /// Messages without that word are returned unchanged.
    pub fn with_flipped_bits(&self, word_index: usize, mask: &Word) -> Message {
        let mut msg = *self;
        match (&mut msg, word_index) {
            (Message::IdsResponse { ids }, 0) => *ids = ids.xor(mask),
            (Message::ReaderAuth { proof }, 0) => *proof = proof.xor(mask),
            (Message::TagAuth { blinded_g1, .. }, 0) => *blinded_g1 = blinded_g1.xor(mask),
            (Message::TagAuth { blinded_g2, .. }, 1) => *blinded_g2 = blinded_g2.xor(mask),
            _ => {}
        }
        msg
    }
}

/// How a session ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    MutualSuccess,
    TagRejectedReader,
    ReaderRejectedTag,
    Dropped,
}

/// The on-wire record of one session: delivered messages in order (the list
/// position is the timestamp) plus the outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTranscript {
    pub messages: Vec<(Direction, Message)>,
    pub outcome: Outcome,
}

impl SessionTranscript {
    pub fn push(&mut self, msg: Message) {
        self.messages.push((msg.direction(), msg));
    }

    fn new() -> Self {
        SessionTranscript { messages: Vec::new(), outcome: Outcome::Dropped }
    }
}

/// One tag: shared secrets, its PUF, the public LFSR, and the session phase.
#[derive(Debug, Clone)]
pub struct TagState {
    secrets: SecretTuple,
    puf: PufInstance,
    lfsr: LfsrSpec,
    phase: TagPhase,
}

impl TagState {
    pub fn secrets(&self) -> &SecretTuple {
        &self.secrets
    }

    pub fn phase(&self) -> TagPhase {
        self.phase
    }

    pub fn puf(&self) -> &PufInstance {
        &self.puf
    }

    pub fn key_length(&self) -> u16 {
        self.secrets.ids.width()
    }

    /// Step 2: answer a `Req` with the current pseudonym. Legal when idle or
    /// after a completed session (a new request begins a new session); mid-
    /// session requests are refused.
    pub fn respond_ids(&mut self) -> Result<Message, Error> {
        match self.phase {
            TagPhase::AwaitingReaderAuth => Err(Error::WrongPhase),
            TagPhase::Idle | TagPhase::Done => {
                self.phase = TagPhase::AwaitingReaderAuth;
                Ok(Message::IdsResponse { ids: self.secrets.ids })
            }
        }
    }

    /// Steps 3-5 on the tag side: verify the reader's proof, then derive and
    /// emit the blinded next greetings and commit the update.
    ///
    /// A failed check drops back to idle with secrets untouched; the tag
    /// sends nothing (a NACK would be a tracking oracle).
    pub fn verify_and_reply(&mut self, msg: &Message) -> Result<Message, Error> {
        if self.phase != TagPhase::AwaitingReaderAuth {
            return Err(Error::WrongPhase);
        }
        let proof = match msg {
            Message::ReaderAuth { proof } => *proof,
            _ => return Err(Error::WrongPhase),
        };
        if proof != self.secrets.id.xor(&self.secrets.greeting) {
            self.phase = TagPhase::Idle;
            return Err(Error::ReaderRejected);
        }

        let g1 = self.puf.permute(&self.secrets.greeting);
        let g2 = self.puf.permute(&g1);
        let k = self.lfsr.permute(&self.secrets.greeting);
        let k2 = self.lfsr.permute(&k);
        let reply = Message::TagAuth { blinded_g1: g1.xor(&k), blinded_g2: g2.xor(&k2) };

        // commit: advance the greeting, then re-key the pseudonym with the
        // post-update greeting
        self.secrets.greeting = g1;
        self.secrets.ids = self.lfsr.permute(&self.secrets.ids.xor(&g1));
        self.phase = TagPhase::Done;
        Ok(reply)
    }

    /// Session timeout or abort: back to idle, secrets untouched.
    pub fn abort_session(&mut self) {
        self.phase = TagPhase::Idle;
    }
}

/// One reader-table row: the shared tuple plus the precomputed next greeting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReaderEntry {
    pub ids: Word,
    pub id: Word,
    pub greeting: Word,
    pub next_greeting: Word,
}

/// The reader's registry of tags, looked up by current pseudonym.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReaderTable {
    entries: BTreeMap<Word, ReaderEntry>,
}

impl ReaderTable {
    pub fn new() -> Self {
        ReaderTable::default()
    }

    /// Registers an entry under its pseudonym (used at provisioning and by a
    /// new owner adopting a transferred tuple).
    pub fn insert(&mut self, entry: ReaderEntry) {
        self.entries.insert(entry.ids, entry);
    }

    pub fn entry(&self, ids: &Word) -> Option<&ReaderEntry> {
        self.entries.get(ids)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Step 1: the broadcast request.
    pub fn request() -> Message {
        Message::Req
    }

    /// Step 3: look the pseudonym up and prove knowledge of `ID` and `G`.
    /// Unknown pseudonyms produce no message — the reader stays silent.
    pub fn authenticate(&self, ids: &Word) -> Result<Message, Error> {
        let entry = self.entries.get(ids).ok_or(Error::UnknownIds)?;
        Ok(Message::ReaderAuth { proof: entry.id.xor(&entry.greeting) })
    }

    /// Steps 4-5 on the reader side: unblind the tag's proof, compare it with
    /// the stored next greeting, and on success slide the greeting window and
    /// re-key the entry. Rejection leaves the table untouched.
    pub fn verify_and_update(
        &mut self,
        ids: &Word,
        msg: &Message,
        lfsr: &LfsrSpec,
    ) -> Result<(), Error> {
        let (blinded_g1, blinded_g2) = match msg {
            Message::TagAuth { blinded_g1, blinded_g2 } => (*blinded_g1, *blinded_g2),
            _ => return Err(Error::TagRejected),
        };
        let entry = self.entries.get(ids).ok_or(Error::UnknownIds)?;

        let k = lfsr.permute(&entry.greeting);
        let recovered_g1 = blinded_g1.xor(&k);
        if recovered_g1 != entry.next_greeting {
            return Err(Error::TagRejected);
        }
        let k2 = lfsr.permute(&k);
        let g2 = blinded_g2.xor(&k2);

        let mut updated = *entry;
        updated.greeting = updated.next_greeting;
        updated.next_greeting = g2;
        updated.ids = lfsr.permute(&ids.xor(&updated.greeting));

        self.entries.remove(ids);
        self.entries.insert(updated.ids, updated);
        Ok(())
    }

    /// Ownership transfer: hand a copy of the stored tuple to the new owner.
    /// The old owner's entry stays — lockout comes from key evolution, not
    /// deletion: one authentication round later the tag answers to a
    /// pseudonym the old table has never seen.
    pub fn transfer_entry(&self, ids: &Word) -> Result<ReaderEntry, Error> {
        self.entries.get(ids).copied().ok_or(Error::UnknownIds)
    }
}

/// Preloads a consistent tag/reader pair: nonzero secrets drawn from the
/// seeded generator, a freshly fabricated PUF, and the reader's precomputed
/// next greeting. Same `(key_length, seed)` always rebuilds the same pair.
pub fn provision(key_length: u16, seed: u64) -> Result<(TagState, ReaderTable), Error> {
    if !is_supported_width(key_length) {
        return Err(Error::UnsupportedWidth(key_length));
    }
    let lfsr = LfsrSpec::published(key_length)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let ids = Word::random_nonzero(key_length, &mut rng);
    let id = Word::random_nonzero(key_length, &mut rng);
    let greeting = Word::random_nonzero(key_length, &mut rng);
    let puf = PufInstance::fabricate(key_length, rng.next_u64())?;

    let next_greeting = puf.permute(&greeting);
    let tag = TagState {
        secrets: SecretTuple { ids, id, greeting },
        puf,
        lfsr,
        phase: TagPhase::Idle,
    };
    let mut table = ReaderTable::new();
    table.insert(ReaderEntry { ids, id, greeting, next_greeting });
    Ok((tag, table))
}

/// Runs one uninterfered session between a tag and a reader table, recording
/// the wire messages. Sub-operation failures become the transcript outcome.
pub fn run_honest_round(tag: &mut TagState, table: &mut ReaderTable) -> SessionTranscript {
    let lfsr = tag.lfsr;
    let mut transcript = SessionTranscript::new();

    transcript.push(ReaderTable::request());

    let ids_response = match tag.respond_ids() {
        Ok(m) => m,
        Err(_) => return transcript,
    };
    transcript.push(ids_response);
    let session_ids = match ids_response {
        Message::IdsResponse { ids } => ids,
        _ => unreachable!(),
    };

    let reader_auth = match table.authenticate(&session_ids) {
        Ok(m) => m,
        Err(_) => {
            // unknown pseudonym: the reader stays silent, the tag times out
            tag.abort_session();
            return transcript;
        }
    };
    transcript.push(reader_auth);

    let tag_auth = match tag.verify_and_reply(&reader_auth) {
        Ok(m) => m,
        Err(_) => {
            transcript.outcome = Outcome::TagRejectedReader;
            return transcript;
        }
    };
    transcript.push(tag_auth);

    match table.verify_and_update(&session_ids, &tag_auth, &lfsr) {
        Ok(()) => transcript.outcome = Outcome::MutualSuccess,
        Err(_) => transcript.outcome = Outcome::ReaderRejectedTag,
    }
    transcript
}

/// JSON document for one session, field names fixed for cross-implementation
/// golden tests. `rounds` is the 1-based index of the session within its run;
/// a multi-round run serializes as an array of these documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptDoc {
    pub key_length: u16,
    pub seed: u64,
    pub messages: Vec<MessageDoc>,
    pub outcome: Outcome,
    pub rounds: usize,
}

/// JSON document for one wire message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageDoc {
    pub dir: Direction,
    #[serde(rename = "type")]
    pub kind: MessageKind,
    pub payload_hex: String,
}

impl TranscriptDoc {
    pub fn new(key_length: u16, seed: u64, round_index: usize, transcript: &SessionTranscript) -> Self {
        TranscriptDoc {
            key_length,
            seed,
            messages: transcript
                .messages
                .iter()
                .map(|(dir, msg)| MessageDoc {
                    dir: *dir,
                    kind: msg.kind(),
                    payload_hex: msg.payload_hex(),
                })
                .collect(),
            outcome: transcript.outcome,
            rounds: round_index,
        }
    }
}
