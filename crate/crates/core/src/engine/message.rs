//! Wire messages and their fixed bit encoding.
//!
//! Every message encodes as a 3-bit tag followed by its fields: broadcast
//! symbols in 2 bits, node ids in `ceil(log2 n)` bits, subgraph indices in
//! `ceil(log2 ell)` bits, bundle lengths in `ceil(log2 (len_cap+1))` bits.
//! The per-direction per-round budget is `B = beta * ceil(log2 n)` bits.

use serde::{Deserialize, Serialize};

/// Broadcastable symbol: the two data bits plus the designated control
/// payloads (the not-done marker and the termination marker) that the
/// doubling wrappers broadcast through the same machinery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Zero,
    One,
    Mark,
    Term,
}

impl Value {
    pub fn bit(b: bool) -> Value {
        if b {
            Value::One
        } else {
            Value::Zero
        }
    }

    pub fn flipped(self) -> Value {
        match self {
            Value::Zero => Value::One,
            Value::One => Value::Zero,
            other => other,
        }
    }

    fn code(self) -> u64 {
        match self {
            Value::Zero => 0,
            Value::One => 1,
            Value::Mark => 2,
            Value::Term => 3,
        }
    }

    fn from_code(c: u64) -> Value {
        match c & 3 {
            0 => Value::Zero,
            1 => Value::One,
            2 => Value::Mark,
            _ => Value::Term,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Mark,
    Term,
    StepDone,
}

impl ControlKind {
    fn code(self) -> u64 {
        match self {
            ControlKind::Mark => 0,
            ControlKind::Term => 1,
            ControlKind::StepDone => 2,
        }
    }

    fn from_code(c: u64) -> Option<ControlKind> {
        match c & 3 {
            0 => Some(ControlKind::Mark),
            1 => Some(ControlKind::Term),
            2 => Some(ControlKind::StepDone),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Message {
    Flood { value: Value, index: u32 },
    Accept { value: Value },
    HeardHeader { value: Value, len: u32 },
    HeardEdge { a: u32, b: u32 },
    Control { kind: ControlKind },
}

const TAG_BITS: u32 = 3;
const VALUE_BITS: u32 = 2;

#[inline]
pub fn ceil_log2(x: u32) -> u32 {
    if x <= 1 {
        1
    } else {
        32 - (x - 1).leading_zeros()
    }
}

/// Per-direction per-round bit budget.
#[inline]
pub fn bandwidth_bits(beta: u32, n: u32) -> u32 {
    beta * ceil_log2(n)
}

/// Field widths for one run; fixed by `(n, ell, len_cap)`.
#[derive(Clone, Copy, Debug)]
pub struct MessageWidths {
    pub node_bits: u32,
    pub index_bits: u32,
    pub len_bits: u32,
}

impl MessageWidths {
    pub fn new(n: u32, ell: u32, len_cap: u32) -> MessageWidths {
        MessageWidths {
            node_bits: ceil_log2(n),
            index_bits: ceil_log2(ell.max(2)),
            len_bits: ceil_log2(len_cap.max(1) + 1),
        }
    }

    pub fn encoded_bits(&self, msg: &Message) -> u32 {
        TAG_BITS
            + match msg {
                Message::Flood { .. } => VALUE_BITS + self.index_bits,
                Message::Accept { .. } => VALUE_BITS,
                Message::HeardHeader { .. } => VALUE_BITS + self.len_bits,
                Message::HeardEdge { .. } => 2 * self.node_bits,
                Message::Control { .. } => 2,
            }
    }

    /// Packs into little-endian bit order: tag first, then fields.
    pub fn encode(&self, msg: &Message) -> (u128, u32) {
        let mut bits = 0u128;
        let mut at = 0u32;
        let mut push = |val: u64, width: u32, at: &mut u32| {
            bits |= (val as u128 & ((1u128 << width) - 1)) << *at;
            *at += width;
        };
        match *msg {
            Message::Flood { value, index } => {
                push(0, TAG_BITS, &mut at);
                push(value.code(), VALUE_BITS, &mut at);
                push(index as u64, self.index_bits, &mut at);
            }
            Message::Accept { value } => {
                push(1, TAG_BITS, &mut at);
                push(value.code(), VALUE_BITS, &mut at);
            }
            Message::HeardHeader { value, len } => {
                push(2, TAG_BITS, &mut at);
                push(value.code(), VALUE_BITS, &mut at);
                push(len as u64, self.len_bits, &mut at);
            }
            Message::HeardEdge { a, b } => {
                push(3, TAG_BITS, &mut at);
                push(a as u64, self.node_bits, &mut at);
                push(b as u64, self.node_bits, &mut at);
            }
            Message::Control { kind } => {
                push(4, TAG_BITS, &mut at);
                push(kind.code(), 2, &mut at);
            }
        }
        (bits, at)
    }

    /// Decodes a bit string; `None` when truncated or the tag is unknown.
    pub fn decode(&self, bits: u128, size: u32) -> Option<Message> {
        let mut at = 0u32;
        let take = |width: u32, at: &mut u32| -> Option<u64> {
            if *at + width > size {
                return None;
            }
            let val = ((bits >> *at) & ((1u128 << width) - 1)) as u64;
            *at += width;
            Some(val)
        };
        let tag = take(TAG_BITS, &mut at)?;
        match tag {
            0 => Some(Message::Flood {
                value: Value::from_code(take(VALUE_BITS, &mut at)?),
                index: take(self.index_bits, &mut at)? as u32,
            }),
            1 => Some(Message::Accept {
                value: Value::from_code(take(VALUE_BITS, &mut at)?),
            }),
            2 => Some(Message::HeardHeader {
                value: Value::from_code(take(VALUE_BITS, &mut at)?),
                len: take(self.len_bits, &mut at)? as u32,
            }),
            3 => Some(Message::HeardEdge {
                a: take(self.node_bits, &mut at)? as u32,
                b: take(self.node_bits, &mut at)? as u32,
            }),
            4 => Some(Message::Control {
                kind: ControlKind::from_code(take(2, &mut at)?)?,
            }),
            _ => None,
        }
    }
}

/// A message together with the subgraph stream it belongs to. The index is
/// only populated in LOCAL mode, where simultaneous flooding loses the
/// positional index that iteration scheduling provides in CONGEST.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<u32>,
    #[serde(flatten)]
    pub msg: Message,
}

impl Envelope {
    pub fn plain(msg: Message) -> Envelope {
        Envelope { index: None, msg }
    }

    pub fn indexed(index: u32, msg: Message) -> Envelope {
        Envelope {
            index: Some(index),
            msg,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn beta8_fits_largest_honest_message() {
        // HeardEdge = two node ids + tag fits for every n >= 2 at beta = 8.
        for n in [2u32, 3, 16, 256, 1 << 20] {
            let w = MessageWidths::new(n, 4, 8);
            let msg = Message::HeardEdge { a: n - 1, b: 0 };
            assert!(w.encoded_bits(&msg) <= bandwidth_bits(8, n));
        }
    }

    #[test]
    fn truncated_messages_fail_to_decode() {
        let w = MessageWidths::new(16, 1000, 50);
        let msg = Message::Flood {
            value: Value::One,
            index: 999,
        };
        let (bits, size) = w.encode(&msg);
        assert_eq!(w.decode(bits, size), Some(msg));
        assert_eq!(w.decode(bits, size - 1), None);
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(
            n in 2u32..1024,
            ell in 2u32..100_000,
            len_cap in 1u32..4096,
            pick in 0u8..5,
            value in 0u64..4,
            x in proptest::num::u32::ANY,
            y in proptest::num::u32::ANY,
        ) {
            let w = MessageWidths::new(n, ell, len_cap);
            let msg = match pick {
                0 => Message::Flood { value: Value::from_code(value), index: x % ell },
                1 => Message::Accept { value: Value::from_code(value) },
                2 => Message::HeardHeader { value: Value::from_code(value), len: x % (len_cap + 1) },
                3 => Message::HeardEdge { a: x % n, b: y % n },
                _ => Message::Control { kind: ControlKind::from_code(value % 3).unwrap() },
            };
            let (bits, size) = w.encode(&msg);
            prop_assert_eq!(w.decode(bits, size), Some(msg));
            prop_assert_eq!(w.encoded_bits(&msg), size);
        }
    }
}
