//! Secret-key agreement from knot composition.
//!
//! Two parties: Alice holds `B1`, `B2` and sends `B1#B2` and `B2`; Bob holds
//! `B3` and replies with `B2#B3`. Alice closes `B1#(B2#B3)`, Bob closes
//! `(B1#B2)#B3`, and both derive the key from the Jones polynomial.
//!
//! Many parties: an initiator broadcasts `A`, every party `i` broadcasts
//! `A#B_i`, then composes its own `B_i` with every `A#B_j` it received.
//!
//! Messages travel through an in-process [`Channel`] in their wire encoding:
//! a big-endian `u32` byte length followed by that many bytes of UTF-8 JSON.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{random_knot_with, BraidWord};
use crate::compose::{compose, obfuscate_with, ComposeError, ComposeVariant};
use crate::jones::{derive_key, jones_with, JonesError, JonesOptions};
use crate::laurent::{LaurentError, LaurentPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Jones(#[from] JonesError),
    #[error("parties derived different keys: {0}")]
    KeyMismatch(String),
    #[error("wire: {0}")]
    Wire(String),
    #[error("transcript is missing a {0} message")]
    MissingMessage(MessageKind),
    #[error("need at least two parties, got {0}")]
    TooFewParties(usize),
    #[error(transparent)]
    NotDivisible(#[from] LaurentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Offer,
    Response,
    Broadcast,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::Offer => "offer",
            MessageKind::Response => "response",
            MessageKind::Broadcast => "broadcast",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    pub session: String,
    pub seq: u64,
    pub from: String,
    pub to: Vec<String>,
    pub kind: MessageKind,
    pub braids: Vec<BraidWord>,
}

impl ProtocolMessage {
    pub fn encode(&self) -> Vec<u8> {
        let body = serde_json::to_vec(self).expect("message serializes");
        let len = u32::try_from(body.len()).expect("message under 4 GiB");
        let mut out = Vec::with_capacity(4 + body.len());
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    /// Decodes one frame from the front of `bytes`, returning the message and
    /// the number of bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(ProtocolMessage, usize), ProtocolError> {
        let head: [u8; 4] = bytes
            .get(..4)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| ProtocolError::Wire("truncated length prefix".into()))?;
        let len = u32::from_be_bytes(head) as usize;
        let body = bytes.get(4..4 + len).ok_or_else(|| ProtocolError::Wire(format!("frame claims {len} bytes")))?;
        let text = std::str::from_utf8(body).map_err(|e| ProtocolError::Wire(e.to_string()))?;
        let msg = serde_json::from_str(text).map_err(|e| ProtocolError::Wire(e.to_string()))?;
        Ok((msg, 4 + len))
    }

    pub fn decode_all(mut bytes: &[u8]) -> Result<Vec<ProtocolMessage>, ProtocolError> {
        let mut out = Vec::new();
        while !bytes.is_empty() {
            let (msg, used) = ProtocolMessage::decode(bytes)?;
            out.push(msg);
            bytes = &bytes[used..];
        }
        Ok(out)
    }
}

/// Lossless in-process channel. Everything sent is kept, encoded, for the
/// eavesdropper.
#[derive(Debug, Default, Clone)]
pub struct Channel {
    wire: Vec<u8>,
    seq: u64,
}

impl Channel {
    pub fn new() -> Channel {
        Channel::default()
    }

    /// Encodes, records, and hands back what the recipient decodes.
    pub fn send(
        &mut self,
        session: &str,
        from: &str,
        to: &[&str],
        kind: MessageKind,
        braids: Vec<BraidWord>,
    ) -> Result<ProtocolMessage, ProtocolError> {
        let msg = ProtocolMessage {
            session: session.to_string(),
            seq: self.seq,
            from: from.to_string(),
            to: to.iter().map(|s| s.to_string()).collect(),
            kind,
            braids,
        };
        self.seq += 1;
        let frame = msg.encode();
        self.wire.extend_from_slice(&frame);
        let (received, _) = ProtocolMessage::decode(&frame)?;
        Ok(received)
    }

    pub fn wire(&self) -> &[u8] {
        &self.wire
    }

    pub fn transcript(&self) -> Vec<ProtocolMessage> {
        ProtocolMessage::decode_all(&self.wire).expect("channel only holds frames it wrote")
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub seed: u64,
    pub obfuscation_moves: usize,
    /// Extra strands obfuscation may add to a braid by stabilizing.
    pub obfuscation_extra_strands: usize,
    pub key_power: u32,
    pub variant: ComposeVariant,
    pub jones: JonesOptions,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            seed: 0,
            obfuscation_moves: 8,
            obfuscation_extra_strands: 1,
            key_power: 3,
            variant: ComposeVariant::Conjugate,
            jones: JonesOptions { strand_cap: 12, ..JonesOptions::simplifying() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyResult {
    pub name: String,
    pub polynomial: LaurentPoly,
    pub key: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionOutcome {
    pub session: String,
    pub parties: Vec<PartyResult>,
    pub transcript: Vec<ProtocolMessage>,
}

impl SessionOutcome {
    pub fn shared_key(&self) -> &BigInt {
        &self.parties[0].key
    }

    pub fn shared_polynomial(&self) -> &LaurentPoly {
        &self.parties[0].polynomial
    }
}

struct Runner<'a> {
    cfg: &'a ProtocolConfig,
    rng: ChaCha8Rng,
    session: String,
    channel: Channel,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ProtocolConfig) -> Runner<'a> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let session = format!("{:016x}", rng.gen::<u64>());
        Runner { cfg, rng, session, channel: Channel::new() }
    }

    /// Each transmitted braid gets its own move sequence.
    fn obfuscate(&mut self, b: &BraidWord) -> BraidWord {
        let mut own = ChaCha8Rng::seed_from_u64(self.rng.gen());
        let cap = b.strands() + self.cfg.obfuscation_extra_strands;
        obfuscate_with(&mut own, b, self.cfg.obfuscation_moves, cap)
    }

    fn compose(&self, a: &BraidWord, b: &BraidWord) -> Result<BraidWord, ProtocolError> {
        Ok(compose(a, b, self.cfg.variant)?)
    }

    fn close(&self, name: &str, b: &BraidWord) -> Result<PartyResult, ProtocolError> {
        let polynomial = jones_with(b, &self.cfg.jones)?.polynomial;
        let key = derive_key(&polynomial, self.cfg.key_power)?;
        Ok(PartyResult { name: name.to_string(), polynomial, key })
    }

    fn finish(self, parties: Vec<PartyResult>) -> Result<SessionOutcome, ProtocolError> {
        if let Some(bad) = parties.iter().find(|p| p.key != parties[0].key || p.polynomial != parties[0].polynomial) {
            return Err(ProtocolError::KeyMismatch(format!(
                "{} has {}, {} has {}",
                parties[0].name, parties[0].key, bad.name, bad.key
            )));
        }
        Ok(SessionOutcome { session: self.session, parties, transcript: self.channel.transcript() })
    }
}

pub fn run_two_party(
    b1: &BraidWord,
    b2: &BraidWord,
    b3: &BraidWord,
    cfg: &ProtocolConfig,
) -> Result<SessionOutcome, ProtocolError> {
    let mut r = Runner::new(cfg);
    let session = r.session.clone();

    let b1b2 = r.compose(b1, b2)?;
    let offer = vec![r.obfuscate(&b1b2), r.obfuscate(b2)];
    let offer = r.channel.send(&session, "alice", &["bob"], MessageKind::Offer, offer)?;

    let b2b3 = r.compose(&offer.braids[1], b3)?;
    let reply = vec![r.obfuscate(&b2b3)];
    let reply = r.channel.send(&session, "bob", &["alice"], MessageKind::Response, reply)?;

    let alice = r.close("alice", &r.compose(b1, &reply.braids[0])?)?;
    let bob = r.close("bob", &r.compose(&offer.braids[0], b3)?)?;
    r.finish(vec![alice, bob])
}

pub fn run_multi_party(
    initiator: &BraidWord,
    parties: &[BraidWord],
    cfg: &ProtocolConfig,
) -> Result<SessionOutcome, ProtocolError> {
    if parties.len() < 2 {
        return Err(ProtocolError::TooFewParties(parties.len()));
    }
    let mut r = Runner::new(cfg);
    let session = r.session.clone();
    let names: Vec<String> = (1..=parties.len()).map(|i| format!("party{i}")).collect();
    let all: Vec<&str> = names.iter().map(String::as_str).collect();

    let a = r.obfuscate(initiator);
    let a = r.channel.send(&session, "initiator", &all, MessageKind::Broadcast, vec![a])?.braids.remove(0);

    let mut received = Vec::with_capacity(parties.len());
    for (i, b) in parties.iter().enumerate() {
        let ab = r.compose(&a, b)?;
        let out = vec![r.obfuscate(&ab)];
        let others: Vec<&str> = all.iter().copied().filter(|n| *n != all[i]).collect();
        let msg = r.channel.send(&session, all[i], &others, MessageKind::Broadcast, out)?;
        received.push(msg.braids.into_iter().next().expect("one braid sent"));
    }

    // each party skips its own broadcast
    let mut results = Vec::with_capacity(parties.len());
    for (i, b) in parties.iter().enumerate() {
        let mut acc = b.clone();
        for (j, ab) in received.iter().enumerate() {
            if j != i {
                acc = r.compose(&acc, ab)?;
            }
        }
        results.push(r.close(all[i], &acc)?);
    }
    r.finish(results)
}

/// Key recovery from public messages alone: `J(B1#B2)·J(B2#B3) / J(B2)`.
pub fn eve_attack(transcript: &[ProtocolMessage], key_power: u32) -> Result<BigInt, ProtocolError> {
    eve_attack_with(transcript, key_power, &JonesOptions { strand_cap: 12, ..JonesOptions::simplifying() })
}

pub fn eve_attack_with(
    transcript: &[ProtocolMessage],
    key_power: u32,
    jones: &JonesOptions,
) -> Result<BigInt, ProtocolError> {
    let find = |kind| transcript.iter().find(|m| m.kind == kind).ok_or(ProtocolError::MissingMessage(kind));
    let offer = find(MessageKind::Offer)?;
    let reply = find(MessageKind::Response)?;
    let [b1b2, b2] = offer.braids.as_slice() else {
        return Err(ProtocolError::Wire("offer must carry two braids".into()));
    };
    let b2b3 = reply.braids.first().ok_or_else(|| ProtocolError::Wire("response carries no braid".into()))?;
    let j = |b: &BraidWord| jones_with(b, jones).map(|r| r.polynomial);
    let numerator = &j(b1b2)? * &j(b2b3)?;
    let shared = numerator.exact_div(&j(b2)?)?;
    Ok(derive_key(&shared, key_power)?)
}

/// `count` random knot braids with `2..=max_strands` strands and at most
/// `max_len` letters.
pub fn random_braids(seed: u64, count: usize, max_strands: usize, max_len: usize) -> Vec<BraidWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_knot_with(&mut rng, max_strands, max_len)).collect()
}
