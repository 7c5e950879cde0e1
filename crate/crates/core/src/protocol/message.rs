//! Protocol messages, transcripts and the message-order validator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qsim::{MeasOutcome, PauliOp};

/// A protocol participant.
///
/// Two-party sessions use `Alice`/`Bob`; chains use `E1..Em`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
    /// 1-based chain member.
    E(u16),
}

impl Party {
    pub fn name(self) -> String {
        match self {
            Party::Alice => "Alice".to_string(),
            Party::Bob => "Bob".to_string(),
            Party::E(k) => format!("E{k}"),
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Alice" => Ok(Party::Alice),
            "Bob" => Ok(Party::Bob),
            _ => s
                .strip_prefix('E')
                .and_then(|k| k.parse::<u16>().ok())
                .filter(|&k| k >= 1)
                .map(Party::E)
                .ok_or_else(|| crate::error::arg(format!("unknown party {s:?}"))),
        }
    }
}

impl Serialize for Party {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Party {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How parties are named in a transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Naming {
    /// Alice and Bob; no recipient field.
    Session,
    /// E1..Em with a recipient `party` field.
    Chain,
}

impl Naming {
    /// Party with 0-based protocol index `i` (0 is the committer).
    pub fn party(self, i: usize) -> Party {
        match (self, i) {
            (Naming::Session, 0) => Party::Alice,
            (Naming::Session, _) => Party::Bob,
            (Naming::Chain, i) => Party::E(i as u16 + 1),
        }
    }

    pub fn index(self, p: Party) -> Option<usize> {
        match (self, p) {
            (Naming::Session, Party::Alice) => Some(0),
            (Naming::Session, Party::Bob) => Some(1),
            (Naming::Chain, Party::E(k)) => Some(k as usize - 1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    /// A singlet check saw too many correlated outcomes.
    Entanglement,
    /// More than one value matched the revealed data.
    Ambiguous,
    /// No value matched the revealed data.
    Mismatch,
    /// Noise calibration did not reach the target ensemble.
    Calibration,
    /// A message arrived out of order.
    ProtocolOrder,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbortReason::Entanglement => "entanglement",
            AbortReason::Ambiguous => "ambiguous",
            AbortReason::Mismatch => "mismatch",
            AbortReason::Calibration => "calibration",
            AbortReason::ProtocolOrder => "protocol-order",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum Message {
    ParticleBatch { positions: Vec<usize> },
    SingletCheckRequest { positions: Vec<usize> },
    ReturnParticles { positions: Vec<usize> },
    CheckResult { pass: bool, error_rate: f64, checked: usize },
    CommitReveal { outcomes: Vec<MeasOutcome> },
    GuessBit { value: u32 },
    Unveil { positions: Vec<usize>, paulis: Vec<PauliOp> },
    OutputAnnounce { value: u32 },
    Abort { reason: AbortReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    ParticleBatch,
    SingletCheckRequest,
    ReturnParticles,
    CheckResult,
    CommitReveal,
    GuessBit,
    Unveil,
    OutputAnnounce,
    Abort,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::ParticleBatch { .. } => MessageKind::ParticleBatch,
            Message::SingletCheckRequest { .. } => MessageKind::SingletCheckRequest,
            Message::ReturnParticles { .. } => MessageKind::ReturnParticles,
            Message::CheckResult { .. } => MessageKind::CheckResult,
            Message::CommitReveal { .. } => MessageKind::CommitReveal,
            Message::GuessBit { .. } => MessageKind::GuessBit,
            Message::Unveil { .. } => MessageKind::Unveil,
            Message::OutputAnnounce { .. } => MessageKind::OutputAnnounce,
            Message::Abort { .. } => MessageKind::Abort,
        }
    }
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub step: u8,
    pub sender: Party,
    #[serde(flatten)]
    pub message: Message,
    pub counter: u64,
    /// Recipient, recorded in chain transcripts only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<Party>,
}

/// Append-only ordered record of a run's messages.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    entries: Vec<Entry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<Entry>) -> Self {
        Transcript { entries }
    }

    pub fn push(&mut self, step: u8, sender: Party, party: Option<Party>, message: Message) {
        let counter = self.entries.len() as u64;
        self.entries.push(Entry { step, sender, message, counter, party });
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&Entry> {
        self.entries.last()
    }

    /// The abort entry, if the run aborted.
    pub fn abort(&self) -> Option<(Party, AbortReason)> {
        self.entries.iter().find_map(|e| match e.message {
            Message::Abort { reason } => Some((e.sender, reason)),
            _ => None,
        })
    }
}

/// `(step, sender index, kind, recipient index)` of one expected message.
type Slot = (u8, usize, MessageKind, Option<usize>);

/// The legal message sequence of an honest run with `parties` members.
fn legal_sequence(parties: usize) -> Vec<Slot> {
    use MessageKind::*;
    let mut seq: Vec<Slot> = alloc::vec![(1, 0, CheckResult, None), (2, 0, ParticleBatch, Some(1))];
    for r in 1..parties {
        seq.push((3, r, SingletCheckRequest, Some(0)));
        for k in 0..r {
            seq.push((4, k, ReturnParticles, Some(r)));
        }
        seq.push((5, r, CheckResult, None));
        if r + 1 < parties {
            seq.push((6, r, ParticleBatch, Some(r + 1)));
        }
    }
    seq.extend((1..parties).map(|r| (8, 0, CommitReveal, Some(r))));
    seq.extend((1..parties).map(|r| (9, r, GuessBit, Some(0))));
    seq.extend((0..parties - 1).map(|k| (10, k, Unveil, None)));
    seq.extend((1..parties).map(|r| (12, r, OutputAnnounce, None)));
    seq
}

/// Checks that a transcript follows the protocol state machine: every entry
/// is the next legal message, counters run `0, 1, 2, …`, and the transcript
/// is either complete or ends with a single `Abort`.
pub fn validate(transcript: &Transcript, parties: usize, naming: Naming) -> Result<()> {
    let reject = |index: usize, reason: String| Err(Error::Transcript { index, reason });
    if parties < 2 {
        return reject(0, "need at least two parties".into());
    }
    if naming == Naming::Session && parties != 2 {
        return reject(0, "session naming is two-party only".into());
    }
    let seq = legal_sequence(parties);
    let entries = transcript.entries();
    let mut last_step = 0u8;
    for (i, e) in entries.iter().enumerate() {
        if e.counter != i as u64 {
            return reject(i, format!("counter {} out of sequence", e.counter));
        }
        let Some(sender) = naming.index(e.sender).filter(|&s| s < parties) else {
            return reject(i, format!("unknown sender {}", e.sender));
        };
        if let Message::Abort { .. } = e.message {
            if i + 1 != entries.len() {
                return reject(i, "entries after abort".into());
            }
            if e.step < last_step && naming == Naming::Session {
                return reject(i, "abort step decreases".into());
            }
            return Ok(());
        }
        let Some(&(step, who, kind, to)) = seq.get(i) else {
            return reject(i, "transcript continues after the final announcement".into());
        };
        if e.message.kind() != kind || e.step != step || sender != who {
            return reject(
                i,
                format!("expected {kind:?} at step {step} from {}, got {:?} at step {} from {}", naming.party(who), e.message.kind(), e.step, e.sender),
            );
        }
        let recipient = e.party.and_then(|p| naming.index(p));
        let recipient_ok = match naming {
            Naming::Session => e.party.is_none(),
            Naming::Chain => recipient == to,
        };
        if !recipient_ok {
            return reject(i, "wrong recipient".into());
        }
        if naming == Naming::Session && e.step < last_step {
            return reject(i, "step index decreased".into());
        }
        last_step = e.step;
    }
    if entries.len() != seq.len() {
        return reject(entries.len(), "transcript ends before the protocol completed".into());
    }
    Ok(())
}
